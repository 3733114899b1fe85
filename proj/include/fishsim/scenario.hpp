#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fishsim/lgvi.hpp"
#include "fishsim/rk_baseline.hpp"

namespace fishsim {

inline constexpr const char* kScenarioSchema = "fishsim-scenario/1";

struct ScenarioBody {
    EllipsoidGeometry geometry;
    std::optional<double> mass;      // explicit mass, or
    bool neutral_buoyancy = false;   // mass from displaced fluid
};

struct ScenarioJoint {
    Vec3 d0i = Vec3::Zero();
    Vec3 di0 = Vec3::Zero();
};

struct IntegratorChoice {
    enum class Kind { lgvi, rk4, rk45 };
    Kind kind = Kind::lgvi;
    double h = 1e-3;            // lgvi / rk4
    double newton_tol = 1e-13;  // lgvi
    int max_iters = 50;         // lgvi
    double rel_tol = 1e-8;      // rk45
    double abs_tol = 1e-10;     // rk45
    double sample_dt = 1e-2;    // rk45 output grid
    bool reorthonormalize = false;
};

struct Scenario {
    double fluid_density = 1.0;
    std::vector<ScenarioBody> bodies;  // body 0 first
    std::vector<ScenarioJoint> joints; // one per peripheral
    Vec3 x0 = Vec3::Zero();
    std::vector<Mat3> attitudes;       // resolved, one per body
    std::optional<Velocity> initial_velocity;
    std::optional<Momentum> initial_momentum;
    IntegratorChoice integrator;
    double duration = 1.0;
    long cadence = 10;                 // emit every N-th step
};

struct ResolvedScenario {
    SystemParams params;
    SystemState initial;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>");
std::string scenario_to_json(const Scenario& s);
void write_scenario(const Scenario& s, const std::filesystem::path& path);

/// Computes added inertias and the initial momentum. Reports every
/// validation problem at once.
ResolvedScenario resolve_scenario(const Scenario& s);

/// One output-cadence tick of a trajectory stream.
struct DiagnosticsRecord {
    double time = 0;
    Eigen::VectorXd xi;
    double energy = 0;
    Vec3 px = Vec3::Zero();
    double p_omega_dev = 0;
    std::vector<double> orth_errors;   // one per body
    double solver_stat = 0;            // Newton iterations (LGVI) or accepted h (RK)
    Vec3 x = Vec3::Zero();
    std::vector<Mat3> rotations;       // body 0 first
};

struct RunSummary {
    long steps = 0;
    double max_energy_deviation = 0;
    double max_dpx = 0;
    double max_dpomega = 0;
    double max_orth_error = 0;
    long total_newton_iters = 0;
    double wall_time_s = 0;
    std::string trajectory_file;
    std::string to_json() const;
};

/// Runs the scenario's integrator, streaming DiagnosticsRecords to
/// `<out_dir>/<name>_traj.csv` and a summary to `<out_dir>/<name>_summary.json`.
RunSummary run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                        const std::string& name);

/// Trajectory CSV loaded back into memory.
struct TrajectoryData {
    std::vector<std::string> columns;
    std::vector<double> times;
    Eigen::MatrixXd values;  // one row per tick, columns after `time`
    int xi_dim = 0;
    Eigen::VectorXd xi_at(long row) const;
};

TrajectoryData read_trajectory(const std::filesystem::path& path);

struct CompareWindow {
    double t_begin = 0, t_end = 0;
    double max_xi_diff = 0;
    double rms_xi_diff = 0;
};

struct CompareReport {
    long common_rows = 0;
    bool truncated = false;  // lengths differed, compared over common prefix
    std::vector<CompareWindow> windows;
    double max_xi_diff = 0;
    double divergence_time = -1;  // first time relative xi difference > threshold
    std::string to_json() const;
};

CompareReport compare(const TrajectoryData& a, const TrajectoryData& b,
                      double threshold = 1e-3, int n_windows = 10);

}  // namespace fishsim
