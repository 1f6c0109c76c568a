#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subpa/dynamics.hpp"
#include "subpa/experiments.hpp"
#include "subpa/model.hpp"
#include "subpa/simulation.hpp"

namespace subpa {

// Flat key=value config with [section] headers flattened to "section.key".
// '#' and ';' start comments.  Unknown keys are rejected at validation.
std::map<std::string, std::string> load_config_file(const std::string& path);

// Every knob of every subcommand in one bag; a manifest serializes the bag
// so a run can be replayed bit-identically.
struct RunSettings {
    std::string command;  // fixed-point | ode | spectral | simulate | study

    std::string model = "graph";
    double p = 1.0;
    std::string weight_kind = "power";  // power | table
    double kappa = 0.0;
    std::vector<double> weight_table;
    int weight_probe = 1000;

    double tol = 1e-10;
    int kmax = 0;  // 0 = choose from the underflow rule

    // ode
    std::string init = "small";  // small | csv:FILE
    double t0 = 0.01;
    double t_end = 1.0;
    std::string tail = "open";
    double rel_tol = 1e-9;

    // simulate / study
    long long n = 100000;
    int replicas = 1;
    std::uint64_t seed = 1;
    std::string grid = "0:1:0.01";
    int k_record = 32;
    std::vector<long long> ns;
    int k_cut = 10;
    int threads = 0;

    std::string out_dir;  // empty = $SUBPA_OUT_DIR or "."
};

// Apply config-file values; CLI flags override afterwards.
void apply_config(RunSettings& settings,
                  const std::map<std::string, std::string>& config);

// Domain checks shared by every entry point.  Throws ConfigError naming the
// offending key.
void validate(const RunSettings& settings);

WeightFunction make_weight(const RunSettings& settings);
ModelParams make_model(const RunSettings& settings);
std::vector<double> parse_grid(const std::string& spec);         // "a:b:h"
std::vector<long long> parse_scales(const std::string& csv);     // "1e3,1e4"
InitialConfiguration load_initial_csv(const std::string& path);  // rows k,c
void write_initial_csv(const std::string& path,
                       const InitialConfiguration& init);

std::string resolve_out_dir(const RunSettings& settings);

// All floating output uses 17 significant digits so replays compare equal.
std::string format_g17(double v);

void write_simulation_csv(const std::string& path,
                          std::span<const RecordedPath> paths);
void write_ode_csv(const std::string& path, const Trajectory& trajectory);
void write_study_csv(const std::string& path, const StudyTable& table);

// Manifest: settings + seeds + audits; replaying a manifest reruns the
// command with identical outputs.
std::string manifest_json(const RunSettings& settings,
                          const std::vector<std::string>& outputs,
                          double wall_seconds,
                          const std::vector<AuditCounters>& audits = {});
RunSettings settings_from_manifest(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace subpa
