// subpa: fixed points, spectral objects, ODE profiles and Monte-Carlo
// simulation for sublinear preferential attachment degree structure.
//
// Subcommands: fixed-point, ode, spectral, simulate, study.
// Exit codes: 0 ok, 2 config error, 3 numeric/tolerance error, 4 model error.

#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "subpa/equilibrium.hpp"
#include "subpa/errors.hpp"
#include "subpa/experiments.hpp"
#include "subpa/run_io.hpp"
#include "subpa/spectral.hpp"

namespace {

using namespace subpa;
using nlohmann::json;

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

// Certification gate: fixed-point/ode/spectral refuse uncertified weights,
// simulation proceeds with a warning.
void gate_weight(const ModelParams& model, const RunSettings& s,
                 bool simulation_only) {
    const SublinearityCertificate cert =
        model.weight.certify(s.weight_probe);
    if (cert.ok()) return;
    const std::string msg =
        "weight function failed sublinearity certification: w(k)/k is not "
        "nonincreasing over the probe tail (probe " +
        std::to_string(cert.probe_limit) + ")";
    if (!simulation_only) throw ConfigError(msg);
    std::cerr << "warning: " << msg << "; simulation continues\n";
}

int pick_truncation(const RunSettings& s, const ModelParams& model,
                    double s_star) {
    if (s.kmax > 0) return s.kmax;
    return std::max(2, choose_truncation(model, s_star));
}

std::string out_path(const RunSettings& s, const std::string& name) {
    std::filesystem::create_directories(resolve_out_dir(s));
    return (std::filesystem::path(resolve_out_dir(s)) / name).string();
}

void emit_manifest(const RunSettings& s, const std::vector<std::string>& files,
                   double wall,
                   const std::vector<AuditCounters>& audits = {}) {
    write_text_file(out_path(s, s.command + "_manifest.json"),
                    manifest_json(s, files, wall, audits));
}

InitialConfiguration initial_from_settings(const RunSettings& s) {
    if (s.init == "small") return InitialConfiguration::small_config();
    return load_initial_csv(s.init.substr(4));
}

int run_fixed_point(const RunSettings& s) {
    Timer timer;
    const ModelParams model = make_model(s);
    gate_weight(model, s, false);

    const double s_star = solve_growth_rate(model, s.tol);
    const int kmax = pick_truncation(s, model, s_star);
    EquilibriumSolution sol = limit_proportions(model, s_star, kmax);
    sol.residuals = mass_identity_residuals(sol, model);

    json j;
    j["s_star"] = s_star;
    j["a"] = sol.a;
    j["K"] = sol.truncation;
    j["tail_bound"] = sol.tail_bound;
    j["residuals"] = {{"mass", sol.residuals.mass},
                      {"size", sol.residuals.size},
                      {"threshold", sol.residuals.threshold},
                      {"pass", sol.residuals.pass}};
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    const std::string file = out_path(s, "fixed_point.json");
    write_text_file(file, text);
    emit_manifest(s, {file}, timer.seconds());
    return 0;
}

int run_ode(const RunSettings& s) {
    Timer timer;
    const ModelParams model = make_model(s);
    gate_weight(model, s, false);

    const double s_star = solve_growth_rate(model, std::min(s.tol, 1e-10));
    const int kmax = pick_truncation(s, model, s_star);
    const InitialConfiguration init = initial_from_settings(s);

    StepControl ctl;
    ctl.rel_tol = s.rel_tol;

    std::vector<double> times;
    const double t0 = init.small() ? s.t0 : 0.0;
    const int samples = 101;
    for (int i = 0; i < samples; ++i)
        times.push_back(t0 + (s.t_end - t0) * double(i) / double(samples - 1));

    const Trajectory traj = integrate_profile(
        init, model, times, kmax, tail_mode_from_string(s.tail), ctl);
    const GrowthBoundsReport bounds =
        check_growth_bounds(traj, model, init, s_star, 1e-6);

    const std::string csv = out_path(s, "ode.csv");
    write_ode_csv(csv, traj);

    json j;
    j["t_end"] = s.t_end;
    j["K"] = traj.truncation;
    j["tail_mode"] = s.tail;
    j["max_tail_register"] = traj.max_tail_register;
    j["steps_accepted"] = traj.stats.accepted;
    j["steps_rejected"] = traj.stats.rejected;
    j["bounds"] = {{"C0", bounds.C0},
                   {"L_hat", bounds.L_hat},
                   {"mass_affine_ok", bounds.mass_affine_ok},
                   {"max_mass_dev", bounds.max_mass_dev},
                   {"size_bound_ok", bounds.size_bound_ok},
                   {"weight_bounds_ok", bounds.weight_bounds_ok},
                   {"small_ray_ok", bounds.small_ray_ok},
                   {"max_ray_dev", bounds.max_ray_dev}};
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    const std::string summary = out_path(s, "ode_summary.json");
    write_text_file(summary, text);
    emit_manifest(s, {csv, summary}, timer.seconds());
    return 0;
}

int run_spectral(const RunSettings& s) {
    Timer timer;
    const ModelParams model = make_model(s);
    gate_weight(model, s, false);

    const double s_star = solve_growth_rate(model, s.tol);
    const double lambda_scalar = solve_eigenvalue_equation(model, s.tol);
    const int kmax = s.kmax > 0 ? s.kmax : 400;

    const TruncatedGenerator op = build_generator(model, kmax);
    const Eigenpair pair = dominant_eigenpair(op, std::max(s.tol * 0.1, 1e-11));
    const AdjointEigenvector adjoint =
        adjoint_eigenvector(model, s_star, std::min(kmax, 2000));

    json j;
    j["s_star"] = s_star;
    j["lambda_scalar"] = lambda_scalar;
    j["lambda_power"] = pair.value;
    j["K"] = kmax;
    j["truncation_gap"] = s_star - pair.value;
    j["eigvec"] = pair.vector;
    j["adjoint"] = adjoint.values;
    j["residuals"] = {{"power_residual", pair.residual},
                      {"boundary_residual", pair.boundary_residual},
                      {"closed_form_rel_err", pair.closed_form_rel_err},
                      {"adjoint_recursion", adjoint.max_recursion_residual},
                      {"positive_ok", pair.positive_ok}};
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    const std::string file = out_path(s, "spectral.json");
    write_text_file(file, text);
    emit_manifest(s, {file}, timer.seconds());
    return 0;
}

int run_simulate(const RunSettings& s) {
    Timer timer;
    const ModelParams model = make_model(s);
    gate_weight(model, s, true);

    const std::vector<double> grid = parse_grid(s.grid);
    std::vector<RecordedPath> paths(static_cast<std::size_t>(s.replicas));
    const InitialConfiguration init = initial_from_settings(s);

    for (int r = 0; r < s.replicas; ++r) {
        const std::uint64_t rs =
            Rng::stream(s.seed, std::uint64_t(r)).next_u64();
        DegreeCountState st =
            init.small() ? DegreeCountState::seed_small(model, rs)
                         : DegreeCountState::seed_large(model, init, s.n, rs);
        paths[std::size_t(r)] = run_chain(st, s.n, grid, s.k_record);
    }

    std::vector<AuditCounters> audits;
    bool exact_ok = true;
    for (const RecordedPath& p : paths) {
        audits.push_back(p.audit);
        exact_ok = exact_ok && p.audit.exact_ok(model.kind);
    }
    if (!exact_ok)
        throw ModelError("simulate: exact count identities violated");

    const std::string csv = out_path(s, "simulate.csv");
    write_simulation_csv(csv, paths);
    emit_manifest(s, {csv}, timer.seconds(), audits);

    json j;
    j["replicas"] = s.replicas;
    j["n"] = s.n;
    j["exact_invariants_ok"] = exact_ok;
    j["outputs"] = {csv};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_study(const RunSettings& s) {
    Timer timer;
    const ModelParams model = make_model(s);
    gate_weight(model, s, true);

    std::vector<long long> ns = s.ns;
    if (ns.empty()) ns = {1000, 10000, 100000};

    const StudyTable table = convergence_study(model, ns, s.replicas, s.t_end,
                                               s.k_cut, s.seed, 101, s.threads);

    const std::string csv = out_path(s, "study.csv");
    write_study_csv(csv, table);

    json j;
    json rows = json::array();
    for (const StudyRow& row : table.rows)
        rows.push_back({{"n", row.n},
                        {"mean_max_dev", row.mean_max_dev},
                        {"std", row.std_dev}});
    j["rows"] = rows;
    j["slope"] = table.slope;
    j["slope_defined"] = table.slope_defined;
    j["verdicts"] = {{"slope_in_band", table.slope_in_band},
                     {"monotone_shrinkage", table.monotone}};
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    const std::string verdicts = out_path(s, "study.json");
    write_text_file(verdicts, text);
    emit_manifest(s, {csv, verdicts}, timer.seconds());
    return 0;
}

void add_common_options(CLI::App* cmd, RunSettings& s, std::string& config,
                        std::string& replay) {
    cmd->add_option("--config", config, "key=value config file");
    cmd->add_option("--replay", replay, "re-run from a manifest JSON");
    cmd->add_option("--model", s.model, "graph | urn");
    cmd->add_option("--p", s.p, "new-vertex / new-urn probability");
    cmd->add_option("--kappa", s.kappa, "power weight exponent (< 1)");
    cmd->add_option("--weight-kind", s.weight_kind, "power | table");
    cmd->add_option("--weight-table", s.weight_table,
                    "table weight entries")->delimiter(',');
    cmd->add_option("--weight-probe", s.weight_probe,
                    "sublinearity probe range");
    cmd->add_option("--out", s.out_dir, "output directory");
    cmd->add_option("--threads", s.threads, "worker threads (0 = auto)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "degree-structure toolkit for sublinear preferential attachment: "
        "fixed points, spectra, ODE profiles and exact simulation"};
    app.require_subcommand(1);

    RunSettings s;
    std::string config, replay;

    CLI::App* fp = app.add_subcommand(
        "fixed-point", "solve F(s*) = 1 and the limit proportions a_k");
    add_common_options(fp, s, config, replay);
    fp->add_option("--tol", s.tol, "fixed-point tolerance");
    fp->add_option("--kmax", s.kmax, "truncation (0 = automatic)");

    CLI::App* ode = app.add_subcommand(
        "ode", "integrate the truncated degree-profile flow");
    add_common_options(ode, s, config, replay);
    ode->add_option("--init", s.init, "small | csv:FILE");
    ode->add_option("--t0", s.t0, "small-config seed time");
    ode->add_option("--t-end", s.t_end, "integration end time");
    ode->add_option("--kmax", s.kmax, "truncation (0 = automatic)");
    ode->add_option("--tail", s.tail, "open | absorbing");
    ode->add_option("--rel-tol", s.rel_tol, "integrator relative tolerance");
    ode->add_option("--tol", s.tol, "fixed-point tolerance");

    CLI::App* sp = app.add_subcommand(
        "spectral", "dominant eigenpair, scalar eigenvalue, adjoint vector");
    add_common_options(sp, s, config, replay);
    sp->add_option("--tol", s.tol, "eigen tolerance");
    sp->add_option("--kmax", s.kmax, "operator truncation (default 400)");

    CLI::App* sim = app.add_subcommand(
        "simulate", "run the exact degree-count chains and record paths");
    add_common_options(sim, s, config, replay);
    sim->add_option("--n", s.n, "chain scale (steps per unit time)");
    sim->add_option("--replicas", s.replicas, "independent replicas");
    sim->add_option("--seed", s.seed, "master seed");
    sim->add_option("--grid", s.grid, "recording grid START:END:STEP");
    sim->add_option("--krec", s.k_record, "record classes 1..krec");
    sim->add_option("--init", s.init, "small | csv:FILE");

    CLI::App* study = app.add_subcommand(
        "study", "deviation-vs-n convergence study against a_k t");
    add_common_options(study, s, config, replay);
    study->add_option("--ns", s.ns, "scales, e.g. 1e3,1e4,1e5")
        ->delimiter(',');
    study->add_option("--replicas", s.replicas, "replicas per scale");
    study->add_option("--seed", s.seed, "master seed");
    study->add_option("--t-end", s.t_end, "time horizon");
    study->add_option("--kcut", s.k_cut, "aggregate classes 1..kcut");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const std::string command = chosen->get_name();

        if (!replay.empty()) {
            s = settings_from_manifest(replay);
            if (s.command != command)
                throw ConfigError("manifest was recorded for '" + s.command +
                                  "', not '" + command + "'");
        } else if (!config.empty()) {
            // File values form the base; any flag passed explicitly wins.
            RunSettings merged;
            apply_config(merged, load_config_file(config));
            auto passed = [&](const std::string& name) {
                const CLI::Option* o = chosen->get_option_no_throw(name);
                return o != nullptr && o->count() > 0;
            };
            auto keep = [&](const std::string& name, auto member) {
                if (passed(name)) merged.*member = s.*member;
            };
            keep("--model", &RunSettings::model);
            keep("--p", &RunSettings::p);
            keep("--kappa", &RunSettings::kappa);
            keep("--weight-kind", &RunSettings::weight_kind);
            keep("--weight-table", &RunSettings::weight_table);
            keep("--weight-probe", &RunSettings::weight_probe);
            keep("--out", &RunSettings::out_dir);
            keep("--threads", &RunSettings::threads);
            keep("--tol", &RunSettings::tol);
            keep("--kmax", &RunSettings::kmax);
            keep("--init", &RunSettings::init);
            keep("--t0", &RunSettings::t0);
            keep("--t-end", &RunSettings::t_end);
            keep("--tail", &RunSettings::tail);
            keep("--rel-tol", &RunSettings::rel_tol);
            keep("--n", &RunSettings::n);
            keep("--replicas", &RunSettings::replicas);
            keep("--seed", &RunSettings::seed);
            keep("--grid", &RunSettings::grid);
            keep("--krec", &RunSettings::k_record);
            keep("--ns", &RunSettings::ns);
            keep("--kcut", &RunSettings::k_cut);
            s = merged;
        }
        s.command = command;
        validate(s);

        if (command == "fixed-point") return run_fixed_point(s);
        if (command == "ode") return run_ode(s);
        if (command == "spectral") return run_spectral(s);
        if (command == "simulate") return run_simulate(s);
        if (command == "study") return run_study(s);
        throw ConfigError("unknown subcommand " + command);
    } catch (const subpa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
