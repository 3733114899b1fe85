#include "fishsim/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fishsim {

using nlohmann::json;

namespace {

class ErrorList {
public:
    void add(const std::string& path, const std::string& msg) {
        items_.push_back(path + ": " + msg);
    }
    bool empty() const { return items_.empty(); }
    [[noreturn]] void raise() const {
        std::string all;
        for (size_t i = 0; i < items_.size(); ++i) {
            if (i) all += "; ";
            all += items_[i];
        }
        throw ValidationError(all);
    }
    void raise_if_any() const {
        if (!empty()) raise();
    }

private:
    std::vector<std::string> items_;
};

bool read_vec3(const json& j, const std::string& path, ErrorList& errs, Vec3* out) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number()) {
        errs.add(path, "expected an array of 3 numbers");
        return false;
    }
    *out = Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    return true;
}

bool read_mat3(const json& j, const std::string& path, ErrorList& errs, Mat3* out) {
    if (!j.is_array() || j.size() != 9) {
        errs.add(path, "expected an array of 9 numbers (row-major)");
        return false;
    }
    for (int k = 0; k < 9; ++k) {
        if (!j[k].is_number()) {
            errs.add(path, "expected an array of 9 numbers (row-major)");
            return false;
        }
        (*out)(k / 3, k % 3) = j[k].get<double>();
    }
    return true;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat3_to_json(const Mat3& m) {
    json a = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
    return a;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    ErrorList errs;
    Scenario s;

    if (!j.contains("schema") || j["schema"] != kScenarioSchema) {
        errs.add("schema", std::string("expected \"") + kScenarioSchema + "\"");
    }
    if (j.contains("fluid_density")) {
        if (!j["fluid_density"].is_number() || j["fluid_density"].get<double>() <= 0)
            errs.add("fluid_density", "must be a positive number");
        else
            s.fluid_density = j["fluid_density"].get<double>();
    }

    if (!j.contains("bodies") || !j["bodies"].is_array() || j["bodies"].empty()) {
        errs.add("bodies", "expected a non-empty array");
    } else {
        for (size_t i = 0; i < j["bodies"].size(); ++i) {
            const json& jb = j["bodies"][i];
            const std::string path = "bodies[" + std::to_string(i) + "]";
            ScenarioBody b;
            if (jb.contains("semi_axes")) {
                Vec3 ax;
                if (read_vec3(jb["semi_axes"], path + ".semi_axes", errs, &ax)) {
                    if ((ax.array() <= 0).any())
                        errs.add(path + ".semi_axes", "semi-axes must be positive");
                    b.geometry.semi_axes = ax;
                }
            } else {
                errs.add(path + ".semi_axes", "missing");
            }
            const bool has_mass = jb.contains("mass");
            b.neutral_buoyancy = jb.value("neutral_buoyancy", false);
            if (has_mass == b.neutral_buoyancy) {
                errs.add(path, "give exactly one of mass or neutral_buoyancy");
            } else if (has_mass) {
                if (!jb["mass"].is_number() || jb["mass"].get<double>() <= 0)
                    errs.add(path + ".mass", "must be a positive number");
                else
                    b.mass = jb["mass"].get<double>();
            }
            s.bodies.push_back(b);
        }
    }

    const size_t n_peripherals = s.bodies.empty() ? 0 : s.bodies.size() - 1;
    if (j.contains("joints") || n_peripherals > 0) {
        if (!j.contains("joints") || !j["joints"].is_array()) {
            errs.add("joints", "expected an array (one entry per peripheral body)");
        } else {
            if (j["joints"].size() != n_peripherals) {
                errs.add("joints", "expected " + std::to_string(n_peripherals) +
                                       " entries, got " + std::to_string(j["joints"].size()));
            }
            for (size_t i = 0; i < j["joints"].size(); ++i) {
                const json& jj = j["joints"][i];
                const std::string path = "joints[" + std::to_string(i) + "]";
                ScenarioJoint joint;
                if (jj.contains("d0i"))
                    read_vec3(jj["d0i"], path + ".d0i", errs, &joint.d0i);
                else
                    errs.add(path + ".d0i", "missing");
                if (jj.contains("di0"))
                    read_vec3(jj["di0"], path + ".di0", errs, &joint.di0);
                else
                    errs.add(path + ".di0", "missing");
                s.joints.push_back(joint);
            }
        }
    }

    if (!j.contains("initial") || !j["initial"].is_object()) {
        errs.add("initial", "missing object");
    } else {
        const json& ji = j["initial"];
        if (ji.contains("x")) read_vec3(ji["x"], "initial.x", errs, &s.x0);
        if (!ji.contains("attitudes") || !ji["attitudes"].is_array()) {
            errs.add("initial.attitudes", "expected an array (one entry per body)");
        } else {
            for (size_t i = 0; i < ji["attitudes"].size(); ++i) {
                const json& ja = ji["attitudes"][i];
                const std::string path = "initial.attitudes[" + std::to_string(i) + "]";
                Mat3 r = Mat3::Identity();
                if (ja.is_object() && ja.contains("axis_angle")) {
                    Vec3 aa;
                    if (read_vec3(ja["axis_angle"], path + ".axis_angle", errs, &aa))
                        r = exp_so3(aa).matrix();
                } else if (ja.is_object() && ja.contains("matrix")) {
                    Mat3 m;
                    if (read_mat3(ja["matrix"], path + ".matrix", errs, &m)) {
                        if (orthogonality_error(m) > Rotation::kConstructionTol ||
                            m.determinant() <= 0)
                            errs.add(path + ".matrix", "not a rotation matrix");
                        else
                            r = m;
                    }
                } else {
                    errs.add(path, "expected an object with axis_angle or matrix");
                }
                s.attitudes.push_back(r);
            }
        }
        const bool has_vel = ji.contains("velocity"), has_mom = ji.contains("momentum");
        if (has_vel == has_mom) {
            errs.add("initial", "give exactly one of velocity or momentum");
        } else if (has_vel) {
            const json& jv = ji["velocity"];
            Velocity xi;
            if (jv.contains("omega0"))
                read_vec3(jv["omega0"], "initial.velocity.omega0", errs, &xi.omega0);
            else
                errs.add("initial.velocity.omega0", "missing");
            if (jv.contains("xdot"))
                read_vec3(jv["xdot"], "initial.velocity.xdot", errs, &xi.xdot);
            else
                errs.add("initial.velocity.xdot", "missing");
            if (jv.contains("omegas") && jv["omegas"].is_array()) {
                for (size_t i = 0; i < jv["omegas"].size(); ++i) {
                    Vec3 w = Vec3::Zero();
                    read_vec3(jv["omegas"][i],
                              "initial.velocity.omegas[" + std::to_string(i) + "]", errs, &w);
                    xi.omegas.push_back(w);
                }
            }
            s.initial_velocity = xi;
        } else {
            const json& jm = ji["momentum"];
            Momentum mu;
            if (jm.contains("p0")) read_vec3(jm["p0"], "initial.momentum.p0", errs, &mu.p0);
            if (jm.contains("px")) read_vec3(jm["px"], "initial.momentum.px", errs, &mu.px);
            if (jm.contains("ps") && jm["ps"].is_array()) {
                for (size_t i = 0; i < jm["ps"].size(); ++i) {
                    Vec3 p = Vec3::Zero();
                    read_vec3(jm["ps"][i], "initial.momentum.ps[" + std::to_string(i) + "]",
                              errs, &p);
                    mu.ps.push_back(p);
                }
            }
            s.initial_momentum = mu;
        }
    }

    if (j.contains("integrator") && j["integrator"].is_object()) {
        const json& jg = j["integrator"];
        const std::string type = jg.value("type", "lgvi");
        if (type == "lgvi")
            s.integrator.kind = IntegratorChoice::Kind::lgvi;
        else if (type == "rk4")
            s.integrator.kind = IntegratorChoice::Kind::rk4;
        else if (type == "rk45")
            s.integrator.kind = IntegratorChoice::Kind::rk45;
        else
            errs.add("integrator.type", "expected lgvi, rk4 or rk45");
        s.integrator.h = jg.value("h", s.integrator.h);
        s.integrator.newton_tol = jg.value("newton_tol", s.integrator.newton_tol);
        s.integrator.max_iters = jg.value("max_iters", s.integrator.max_iters);
        s.integrator.rel_tol = jg.value("rel_tol", s.integrator.rel_tol);
        s.integrator.abs_tol = jg.value("abs_tol", s.integrator.abs_tol);
        s.integrator.sample_dt = jg.value("sample_dt", s.integrator.sample_dt);
        s.integrator.reorthonormalize =
            jg.value("reorthonormalize", s.integrator.reorthonormalize);
        if (!(s.integrator.h > 0)) errs.add("integrator.h", "must be positive");
        if (!(s.integrator.newton_tol > 0)) errs.add("integrator.newton_tol", "must be positive");
        if (s.integrator.max_iters < 1) errs.add("integrator.max_iters", "must be >= 1");
        if (!(s.integrator.rel_tol > 0)) errs.add("integrator.rel_tol", "must be positive");
        if (!(s.integrator.abs_tol > 0)) errs.add("integrator.abs_tol", "must be positive");
    }

    if (j.contains("duration")) {
        if (!j["duration"].is_number() || j["duration"].get<double>() < 0)
            errs.add("duration", "must be a non-negative number");
        else
            s.duration = j["duration"].get<double>();
    }
    if (j.contains("cadence")) {
        if (!j["cadence"].is_number_integer() || j["cadence"].get<long>() < 1)
            errs.add("cadence", "must be a positive integer");
        else
            s.cadence = j["cadence"].get<long>();
    }

    errs.raise_if_any();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["schema"] = kScenarioSchema;
    j["fluid_density"] = s.fluid_density;
    j["bodies"] = json::array();
    for (const auto& b : s.bodies) {
        json jb;
        jb["semi_axes"] = vec3_to_json(b.geometry.semi_axes);
        if (b.neutral_buoyancy)
            jb["neutral_buoyancy"] = true;
        else if (b.mass)
            jb["mass"] = *b.mass;
        j["bodies"].push_back(jb);
    }
    j["joints"] = json::array();
    for (const auto& joint : s.joints) {
        j["joints"].push_back({{"d0i", vec3_to_json(joint.d0i)},
                               {"di0", vec3_to_json(joint.di0)}});
    }
    json ji;
    ji["x"] = vec3_to_json(s.x0);
    ji["attitudes"] = json::array();
    for (const auto& r : s.attitudes) ji["attitudes"].push_back({{"matrix", mat3_to_json(r)}});
    if (s.initial_velocity) {
        json jv;
        jv["omega0"] = vec3_to_json(s.initial_velocity->omega0);
        jv["xdot"] = vec3_to_json(s.initial_velocity->xdot);
        jv["omegas"] = json::array();
        for (const auto& w : s.initial_velocity->omegas) jv["omegas"].push_back(vec3_to_json(w));
        ji["velocity"] = jv;
    } else if (s.initial_momentum) {
        json jm;
        jm["p0"] = vec3_to_json(s.initial_momentum->p0);
        jm["px"] = vec3_to_json(s.initial_momentum->px);
        jm["ps"] = json::array();
        for (const auto& p : s.initial_momentum->ps) jm["ps"].push_back(vec3_to_json(p));
        ji["momentum"] = jm;
    }
    j["initial"] = ji;
    json jg;
    switch (s.integrator.kind) {
        case IntegratorChoice::Kind::lgvi:
            jg["type"] = "lgvi";
            jg["h"] = s.integrator.h;
            jg["newton_tol"] = s.integrator.newton_tol;
            jg["max_iters"] = s.integrator.max_iters;
            break;
        case IntegratorChoice::Kind::rk4:
            jg["type"] = "rk4";
            jg["h"] = s.integrator.h;
            jg["reorthonormalize"] = s.integrator.reorthonormalize;
            break;
        case IntegratorChoice::Kind::rk45:
            jg["type"] = "rk45";
            jg["rel_tol"] = s.integrator.rel_tol;
            jg["abs_tol"] = s.integrator.abs_tol;
            jg["sample_dt"] = s.integrator.sample_dt;
            jg["reorthonormalize"] = s.integrator.reorthonormalize;
            break;
    }
    j["integrator"] = jg;
    j["duration"] = s.duration;
    j["cadence"] = s.cadence;
    return j.dump(2) + "\n";
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << scenario_to_json(s);
}

ResolvedScenario resolve_scenario(const Scenario& s) {
    ErrorList errs;
    if (s.bodies.empty()) errs.add("bodies", "at least the central body is required");
    const size_t p = s.bodies.empty() ? 0 : s.bodies.size() - 1;
    if (s.joints.size() != p)
        errs.add("joints", "expected " + std::to_string(p) + " entries, got " +
                               std::to_string(s.joints.size()));
    if (s.attitudes.size() != s.bodies.size())
        errs.add("initial.attitudes", "expected " + std::to_string(s.bodies.size()) +
                                          " entries, got " + std::to_string(s.attitudes.size()));
    if (s.initial_velocity && s.initial_velocity->omegas.size() != p)
        errs.add("initial.velocity.omegas", "expected " + std::to_string(p) + " entries");
    if (s.initial_momentum && s.initial_momentum->ps.size() != p)
        errs.add("initial.momentum.ps", "expected " + std::to_string(p) + " entries");
    if (static_cast<bool>(s.initial_velocity) == static_cast<bool>(s.initial_momentum))
        errs.add("initial", "give exactly one of velocity or momentum");
    errs.raise_if_any();

    std::vector<BodyParams> bodies;
    for (size_t i = 0; i < s.bodies.size(); ++i) {
        const auto& b = s.bodies[i];
        const double mass = b.neutral_buoyancy
                                ? neutral_buoyancy_mass(b.geometry, s.fluid_density)
                                : b.mass.value();
        bodies.push_back(build_body_params(b.geometry, mass));
    }
    std::vector<Vec3> d0i, di0;
    for (const auto& joint : s.joints) {
        d0i.push_back(joint.d0i);
        di0.push_back(joint.di0);
    }

    ResolvedScenario r;
    r.params = make_system_params(bodies[0], {bodies.begin() + 1, bodies.end()}, d0i, di0);
    r.initial.config.r0 = Rotation(s.attitudes[0]);
    r.initial.config.x = s.x0;
    for (size_t i = 1; i < s.attitudes.size(); ++i)
        r.initial.config.peripherals.emplace_back(s.attitudes[i]);
    if (s.initial_momentum) {
        r.initial.momentum = *s.initial_momentum;
    } else {
        r.initial.momentum =
            legendre_to_momentum(r.params, r.initial.config, *s.initial_velocity);
    }
    r.initial.time = 0;
    return r;
}

namespace {

std::vector<std::string> trajectory_columns(int p) {
    std::vector<std::string> cols;
    cols.push_back("time");
    cols.push_back("om0_x");
    cols.push_back("om0_y");
    cols.push_back("om0_z");
    cols.push_back("v_x");
    cols.push_back("v_y");
    cols.push_back("v_z");
    for (int i = 1; i <= p; ++i)
        for (const char* ax : {"_x", "_y", "_z"})
            cols.push_back("om" + std::to_string(i) + ax);
    cols.push_back("energy");
    cols.push_back("px_x");
    cols.push_back("px_y");
    cols.push_back("px_z");
    cols.push_back("pomega_dev");
    for (int i = 0; i <= p; ++i) cols.push_back("orth" + std::to_string(i));
    cols.push_back("solver_stat");
    cols.push_back("x_x");
    cols.push_back("x_y");
    cols.push_back("x_z");
    for (int i = 0; i <= p; ++i)
        for (int k = 0; k < 9; ++k)
            cols.push_back("R" + std::to_string(i) + "_" + std::to_string(k / 3) +
                           std::to_string(k % 3));
    return cols;
}

void write_record(std::ofstream& out, const DiagnosticsRecord& rec) {
    out << fmt(rec.time);
    for (int k = 0; k < rec.xi.size(); ++k) out << ',' << fmt(rec.xi[k]);
    out << ',' << fmt(rec.energy);
    for (int k = 0; k < 3; ++k) out << ',' << fmt(rec.px[k]);
    out << ',' << fmt(rec.p_omega_dev);
    for (double e : rec.orth_errors) out << ',' << fmt(e);
    out << ',' << fmt(rec.solver_stat);
    for (int k = 0; k < 3; ++k) out << ',' << fmt(rec.x[k]);
    for (const auto& r : rec.rotations)
        for (int rr = 0; rr < 3; ++rr)
            for (int cc = 0; cc < 3; ++cc) out << ',' << fmt(r(rr, cc));
    out << '\n';
}

DiagnosticsRecord make_record(const SystemParams& params, const Pose& pose,
                              const Momentum& mu, double time, const Vec3& p_omega0,
                              double solver_stat) {
    DiagnosticsRecord rec;
    rec.time = time;
    rec.xi = legendre_to_velocity(params, pose, mu).to_vector();
    const Conserved c = conserved_quantities(params, pose, mu);
    rec.energy = c.energy;
    rec.px = c.px;
    rec.p_omega_dev = (c.p_omega - p_omega0).norm();
    rec.orth_errors.push_back(orthogonality_error(pose.r0));
    for (const auto& r : pose.rs) rec.orth_errors.push_back(orthogonality_error(r));
    rec.solver_stat = solver_stat;
    rec.x = pose.x;
    rec.rotations.push_back(pose.r0);
    rec.rotations.insert(rec.rotations.end(), pose.rs.begin(), pose.rs.end());
    return rec;
}

}  // namespace

RunSummary run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                        const std::string& name) {
    const auto t_start = std::chrono::steady_clock::now();
    ResolvedScenario rs = resolve_scenario(s);
    const SystemParams& params = rs.params;
    const int p = params.peripheral_count();

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path traj_path = out_dir / (name + "_traj.csv");
    std::ofstream traj(traj_path);
    if (!traj) throw ParseError(traj_path.string() + ": cannot open for writing");
    const auto cols = trajectory_columns(p);
    for (size_t i = 0; i < cols.size(); ++i) traj << (i ? "," : "") << cols[i];
    traj << '\n';

    RunSummary summary;
    const Conserved c0 = conserved_quantities(params, rs.initial);
    const Vec3 px0 = c0.px;

    auto update_summary = [&](const Pose& pose, const Momentum& mu) {
        const Conserved c = conserved_quantities(params, pose, mu);
        summary.max_energy_deviation =
            std::max(summary.max_energy_deviation, std::abs(c.energy - c0.energy));
        summary.max_dpx = std::max(summary.max_dpx, (c.px - px0).norm());
        summary.max_dpomega =
            std::max(summary.max_dpomega, (c.p_omega - c0.p_omega).norm());
        double orth = orthogonality_error(pose.r0);
        for (const auto& r : pose.rs) orth = std::max(orth, orthogonality_error(r));
        summary.max_orth_error = std::max(summary.max_orth_error, orth);
    };

    switch (s.integrator.kind) {
        case IntegratorChoice::Kind::lgvi: {
            SolverSettings set;
            set.h = s.integrator.h;
            set.newton_tol = s.integrator.newton_tol;
            set.max_iters = s.integrator.max_iters;
            const long n = std::lround(s.duration / set.h);
            SystemState state = rs.initial;
            write_record(traj, make_record(params, Pose::from(state.config), state.momentum,
                                           state.time, c0.p_omega, 0));
            for (long k = 1; k <= n; ++k) {
                LgviStepResult r;
                try {
                    r = implicit_step(params, state, set);
                } catch (const NewtonDivergence& e) {
                    throw NewtonDivergence("step " + std::to_string(k - 1) + ": " + e.what(),
                                           k - 1);
                }
                state = r.next;
                summary.total_newton_iters += r.newton_iters;
                update_summary(Pose::from(state.config), state.momentum);
                if (k % s.cadence == 0 || k == n) {
                    write_record(traj,
                                 make_record(params, Pose::from(state.config), state.momentum,
                                             state.time, c0.p_omega, r.newton_iters));
                }
            }
            summary.steps = n;
            break;
        }
        case IntegratorChoice::Kind::rk4: {
            const double h = s.integrator.h;
            const long n = std::lround(s.duration / h);
            Eigen::VectorXd y = RkState::pack(Pose::from(rs.initial.config), rs.initial.momentum);
            write_record(traj, make_record(params, RkState::unpack_pose(y, p),
                                           RkState::unpack_momentum(y, p), 0, c0.p_omega, h));
            for (long k = 1; k <= n; ++k) {
                y = rk_step(params, y, h, s.integrator.reorthonormalize);
                update_summary(RkState::unpack_pose(y, p), RkState::unpack_momentum(y, p));
                if (k % s.cadence == 0 || k == n) {
                    write_record(traj, make_record(params, RkState::unpack_pose(y, p),
                                                   RkState::unpack_momentum(y, p), k * h,
                                                   c0.p_omega, h));
                }
            }
            summary.steps = n;
            break;
        }
        case IntegratorChoice::Kind::rk45: {
            RkSettings set;
            set.mode = RkSettings::Mode::adaptive;
            set.rel_tol = s.integrator.rel_tol;
            set.abs_tol = s.integrator.abs_tol;
            set.reorthonormalize = s.integrator.reorthonormalize;
            const RkTrajectory rt =
                run_rk(params, rs.initial, set, s.duration, 1, s.integrator.sample_dt);
            for (size_t k = 0; k < rt.states.size(); ++k) {
                const Pose pose = RkState::unpack_pose(rt.states[k], p);
                const Momentum mu = RkState::unpack_momentum(rt.states[k], p);
                if (k > 0) update_summary(pose, mu);
                write_record(traj, make_record(params, pose, mu, rt.times[k], c0.p_omega,
                                               rt.accepted_h[k]));
            }
            summary.steps = static_cast<long>(rt.states.size()) - 1;
            break;
        }
    }

    summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    summary.trajectory_file = traj_path.string();
    std::ofstream sum(out_dir / (name + "_summary.json"));
    sum << summary.to_json();
    return summary;
}

std::string RunSummary::to_json() const {
    json j;
    j["steps"] = steps;
    j["max_energy_deviation"] = max_energy_deviation;
    j["max_dpx"] = max_dpx;
    j["max_dpomega"] = max_dpomega;
    j["max_orth_error"] = max_orth_error;
    j["total_newton_iters"] = total_newton_iters;
    j["wall_time_s"] = wall_time_s;
    j["trajectory_file"] = trajectory_file;
    return j.dump(2) + "\n";
}

TrajectoryData read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    TrajectoryData t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) t.columns.push_back(col);
    if (t.columns.empty() || t.columns[0] != "time")
        throw ParseError(path.string() + ": first column must be time");
    int xi_dim = 0;
    for (size_t i = 1; i < t.columns.size() && t.columns[i] != "energy"; ++i) ++xi_dim;
    t.xi_dim = xi_dim;

    std::vector<std::vector<double>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
            }
        }
        if (row.size() != t.columns.size())
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": wrong field count");
        rows.push_back(std::move(row));
    }
    t.times.reserve(rows.size());
    t.values.resize(rows.size(), static_cast<long>(t.columns.size()) - 1);
    for (size_t r = 0; r < rows.size(); ++r) {
        t.times.push_back(rows[r][0]);
        for (size_t c = 1; c < rows[r].size(); ++c) t.values(r, c - 1) = rows[r][c];
    }
    return t;
}

Eigen::VectorXd TrajectoryData::xi_at(long row) const {
    return values.row(row).segment(0, xi_dim).transpose();
}

CompareReport compare(const TrajectoryData& a, const TrajectoryData& b, double threshold,
                      int n_windows) {
    if (a.xi_dim != b.xi_dim)
        throw CadenceMismatch("compare: trajectories have different state dimensions");
    CompareReport rep;
    const long n = std::min<long>(a.times.size(), b.times.size());
    if (n == 0) throw CadenceMismatch("compare: empty trajectory");
    rep.truncated = a.times.size() != b.times.size();
    rep.common_rows = n;
    for (long r = 0; r < n; ++r) {
        const double scale = std::max(1.0, std::abs(a.times[r]));
        if (std::abs(a.times[r] - b.times[r]) > 1e-9 * scale)
            throw CadenceMismatch("compare: time grids differ at row " + std::to_string(r) +
                                  " (" + std::to_string(a.times[r]) + " vs " +
                                  std::to_string(b.times[r]) + ")");
    }
    const double t0 = a.times.front(), t1 = a.times[n - 1];
    const double span = std::max(t1 - t0, 1e-300);
    rep.windows.resize(n_windows);
    for (int w = 0; w < n_windows; ++w) {
        rep.windows[w].t_begin = t0 + span * w / n_windows;
        rep.windows[w].t_end = t0 + span * (w + 1) / n_windows;
    }
    std::vector<double> sq_sum(n_windows, 0);
    std::vector<long> counts(n_windows, 0);
    for (long r = 0; r < n; ++r) {
        int w = static_cast<int>((a.times[r] - t0) / span * n_windows);
        w = std::clamp(w, 0, n_windows - 1);
        const Eigen::VectorXd da = a.xi_at(r) - b.xi_at(r);
        const double dmax = da.cwiseAbs().maxCoeff();
        rep.windows[w].max_xi_diff = std::max(rep.windows[w].max_xi_diff, dmax);
        sq_sum[w] += da.squaredNorm();
        counts[w] += da.size();
        rep.max_xi_diff = std::max(rep.max_xi_diff, dmax);
        if (rep.divergence_time < 0 &&
            da.norm() > threshold * std::max(1.0, a.xi_at(r).norm()))
            rep.divergence_time = a.times[r];
    }
    for (int w = 0; w < n_windows; ++w)
        rep.windows[w].rms_xi_diff = counts[w] ? std::sqrt(sq_sum[w] / counts[w]) : 0;
    return rep;
}

std::string CompareReport::to_json() const {
    json j;
    j["common_rows"] = common_rows;
    j["truncated_to_common_prefix"] = truncated;
    j["max_xi_diff"] = max_xi_diff;
    j["divergence_time"] = divergence_time;
    j["windows"] = json::array();
    for (const auto& w : windows) {
        j["windows"].push_back({{"t_begin", w.t_begin},
                                {"t_end", w.t_end},
                                {"max_xi_diff", w.max_xi_diff},
                                {"rms_xi_diff", w.rms_xi_diff}});
    }
    return j.dump(2) + "\n";
}

}  // namespace fishsim
