#pragma once

#include <stdexcept>
#include <string>

namespace fishsim {

struct NotSkew : std::runtime_error {
    explicit NotSkew(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct SolveFailure : std::runtime_error {
    explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

struct NewtonDivergence : std::runtime_error {
    explicit NewtonDivergence(const std::string& what, long step_index = -1)
        : std::runtime_error(what), step_index(step_index) {}
    long step_index;  // -1 when not attached to a trajectory step
};

struct IndexOutOfRange : std::out_of_range {
    explicit IndexOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct CadenceMismatch : std::runtime_error {
    explicit CadenceMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fishsim
