#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "fishsim/scenario.hpp"

namespace {

// Overrides applied on top of the scenario file.
struct RunOptions {
    std::string scenario_path;
    std::string integrator;
    double h = -1;
    double duration = -1;
    long cadence = -1;
    std::string out_dir = ".";
    bool reorthonormalize = false;
};

int cmd_run(const RunOptions& opt) {
    fishsim::Scenario s = fishsim::load_scenario(opt.scenario_path);
    if (!opt.integrator.empty()) {
        if (opt.integrator == "lgvi")
            s.integrator.kind = fishsim::IntegratorChoice::Kind::lgvi;
        else if (opt.integrator == "rk4")
            s.integrator.kind = fishsim::IntegratorChoice::Kind::rk4;
        else if (opt.integrator == "rk45")
            s.integrator.kind = fishsim::IntegratorChoice::Kind::rk45;
        else
            throw fishsim::ValidationError("--integrator: expected lgvi, rk4 or rk45");
    }
    if (opt.h > 0) s.integrator.h = opt.h;
    if (opt.duration >= 0) s.duration = opt.duration;
    if (opt.cadence > 0) s.cadence = opt.cadence;
    if (opt.reorthonormalize) s.integrator.reorthonormalize = true;

    const std::string name =
        std::filesystem::path(opt.scenario_path).stem().string();
    const fishsim::RunSummary summary = fishsim::run_scenario(s, opt.out_dir, name);
    std::cout << summary.to_json();
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, double threshold) {
    const fishsim::TrajectoryData ta = fishsim::read_trajectory(a);
    const fishsim::TrajectoryData tb = fishsim::read_trajectory(b);
    const fishsim::CompareReport rep = fishsim::compare(ta, tb, threshold);
    if (rep.truncated) {
        std::cerr << "warning: trajectory lengths differ; compared the common prefix of "
                  << rep.common_rows << " rows\n";
    }
    std::cout << rep.to_json();
    return 0;
}

void print_mat(const char* label, const fishsim::Mat3& m) {
    std::printf("%s\n", label);
    for (int r = 0; r < 3; ++r)
        std::printf("  % .6f % .6f % .6f\n", m(r, 0), m(r, 1), m(r, 2));
}

int cmd_inertia(const std::string& path) {
    const fishsim::Scenario s = fishsim::load_scenario(path);
    const fishsim::ResolvedScenario rs = fishsim::resolve_scenario(s);
    for (int i = 0; i <= rs.params.peripheral_count(); ++i) {
        const fishsim::BodyParams& b = rs.params.body(i);
        std::printf("body %d: semi-axes (%g, %g, %g), mass %.6f kg\n", i,
                    b.geometry.semi_axes[0], b.geometry.semi_axes[1],
                    b.geometry.semi_axes[2], b.mass);
        const auto gamma = fishsim::gamma_factors(b.geometry);
        const auto lambda = fishsim::lambda_factors(b.geometry, b.mass);
        std::printf("  gamma  = (%.5f, %.5f, %.5f)\n", gamma[0], gamma[1], gamma[2]);
        std::printf("  lambda = (%.5f, %.5f, %.5f)\n", lambda[0], lambda[1], lambda[2]);
        print_mat("  M = m I + M^f:", b.total_mass_matrix);
        print_mat("  J = J^b + J^f:", b.total_inertia);
    }
    const fishsim::NonstandardInertia& n = rs.params.nonstandard;
    print_mat("nonstandard J_d0:", n.jd0);
    for (size_t i = 0; i < n.jdi.size(); ++i) {
        std::printf("peripheral %zu:\n", i + 1);
        print_mat("  J' (joint-shifted):", n.jprime[i]);
        print_mat("  nonstandard J_d:", n.jdi[i]);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rigid ellipsoid assemblies in a potential flow"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    RunOptions ro;
    CLI::App* run = app.add_subcommand("run", "Integrate a scenario and write trajectory/summary files");
    run->add_option("scenario", ro.scenario_path, "Scenario JSON file")->required();
    run->add_option("--integrator", ro.integrator, "Override the integrator (lgvi, rk4, rk45)");
    run->add_option("--h", ro.h, "Override the step size");
    run->add_option("--duration", ro.duration, "Override the duration (s)");
    run->add_option("--cadence", ro.cadence, "Emit every N-th step");
    run->add_option("--out", ro.out_dir, "Output directory (default .)");
    run->add_flag("--reorthonormalize", ro.reorthonormalize,
                  "Project RK rotation blocks back to SO(3) after each step");

    std::string cmp_a, cmp_b;
    double threshold = 1e-3;
    CLI::App* cmp = app.add_subcommand("compare", "Compare two trajectory CSV files");
    cmp->add_option("a", cmp_a, "First trajectory CSV")->required();
    cmp->add_option("b", cmp_b, "Second trajectory CSV")->required();
    cmp->add_option("--threshold", threshold, "Relative divergence threshold (default 1e-3)");

    std::string inertia_path;
    CLI::App* inr = app.add_subcommand("inertia", "Print per-body inertia data for a scenario");
    inr->add_option("scenario", inertia_path, "Scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(ro);
        if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, threshold);
        if (inr->parsed()) return cmd_inertia(inertia_path);
    } catch (const fishsim::ParseError& e) {
        std::cerr << "ParseError: " << e.what() << '\n';
        return 2;
    } catch (const fishsim::ValidationError& e) {
        std::cerr << "ValidationError: " << e.what() << '\n';
        return 3;
    } catch (const fishsim::CadenceMismatch& e) {
        std::cerr << "CadenceMismatch: " << e.what() << '\n';
        return 4;
    } catch (const fishsim::NewtonDivergence& e) {
        std::cerr << "NewtonDivergence: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
