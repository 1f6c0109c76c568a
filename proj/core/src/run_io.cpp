#include "subpa/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "subpa/errors.hpp"
#include "json.hpp"

namespace subpa {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" +
                          v + "'");
    }
}

long long to_count(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (!(x >= 0 && x < 9.1e18) || std::floor(x) != x)
        throw ConfigError("config key '" + key +
                          "': expected a nonnegative integer, got '" + v + "'");
    return (long long)x;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        out[key] = value;
    }
    return out;
}

void apply_config(RunSettings& s,
                  const std::map<std::string, std::string>& config) {
    for (const auto& [key, value] : config) {
        if (key == "model") s.model = value;
        else if (key == "p") s.p = to_double(key, value);
        else if (key == "weight.kind") s.weight_kind = value;
        else if (key == "weight.kappa" || key == "kappa")
            s.kappa = to_double(key, value);
        else if (key == "weight.table")
            s.weight_table = parse_double_list(key, value);
        else if (key == "weight.probe")
            s.weight_probe = int(to_count(key, value));
        else if (key == "tol") s.tol = to_double(key, value);
        else if (key == "kmax") s.kmax = int(to_count(key, value));
        else if (key == "init") s.init = value;
        else if (key == "t0") s.t0 = to_double(key, value);
        else if (key == "t_end") s.t_end = to_double(key, value);
        else if (key == "tail") s.tail = value;
        else if (key == "rel_tol") s.rel_tol = to_double(key, value);
        else if (key == "n") s.n = to_count(key, value);
        else if (key == "replicas") s.replicas = int(to_count(key, value));
        else if (key == "seed") s.seed = std::uint64_t(to_count(key, value));
        else if (key == "grid") s.grid = value;
        else if (key == "k_record") s.k_record = int(to_count(key, value));
        else if (key == "ns") {
            s.ns.clear();
            for (double v : parse_double_list(key, value))
                s.ns.push_back((long long)v);
        } else if (key == "k_cut") s.k_cut = int(to_count(key, value));
        else if (key == "threads") s.threads = int(to_count(key, value));
        else if (key == "out_dir") s.out_dir = value;
        else
            throw ConfigError("unknown config key '" + key + "'");
    }
}

void validate(const RunSettings& s) {
    if (s.model != "graph" && s.model != "urn")
        throw ConfigError("model: must be 'graph' or 'urn' (got '" + s.model +
                          "')");
    if (s.model == "graph") {
        if (!(s.p > 0.0 && s.p <= 1.0))
            throw ConfigError("p: graph model requires 0 < p <= 1");
    } else {
        if (!(s.p > 0.0 && s.p < 1.0))
            throw ConfigError(
                "p: urn model requires 0 < p < 1 (p = 0 and p = 1 are "
                "degenerate evolutions)");
    }
    if (s.weight_kind == "power") {
        if (!(s.kappa < 1.0))
            throw ConfigError("weight.kappa: must be < 1 for sublinearity");
    } else if (s.weight_kind == "table") {
        if (s.weight_table.empty())
            throw ConfigError("weight.table: required for weight.kind=table");
    } else {
        throw ConfigError("weight.kind: must be 'power' or 'table'");
    }
    if (s.weight_probe < 100)
        throw ConfigError("weight.probe: must be at least 100");
    if (!(s.tol > 0.0)) throw ConfigError("tol: must be positive");
    if (!(s.rel_tol > 0.0)) throw ConfigError("rel_tol: must be positive");
    if (s.kmax < 0) throw ConfigError("kmax: must be >= 0");
    if (s.replicas < 1) throw ConfigError("replicas: must be >= 1");
    if (s.n < 1) throw ConfigError("n: must be >= 1");
    if (s.k_cut < 1) throw ConfigError("k_cut: must be >= 1");
    if (s.k_record < 1) throw ConfigError("k_record: must be >= 1");
    if (!(s.t_end > 0.0)) throw ConfigError("t_end: must be positive");
    if (s.init != "small" && s.init.rfind("csv:", 0) != 0)
        throw ConfigError("init: must be 'small' or 'csv:FILE'");
    if (s.tail != "open" && s.tail != "absorbing")
        throw ConfigError("tail: must be 'open' or 'absorbing'");
}

WeightFunction make_weight(const RunSettings& s) {
    if (s.weight_kind == "table") return WeightFunction::table(s.weight_table);
    return WeightFunction::power(s.kappa);
}

ModelParams make_model(const RunSettings& s) {
    return ModelParams::make(model_kind_from_string(s.model), s.p,
                             make_weight(s));
}

std::vector<double> parse_grid(const std::string& spec) {
    double a = 0, b = 0, h = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &h) != 3)
        throw ConfigError("grid: expected START:END:STEP (got '" + spec + "')");
    if (!(h > 0.0) || !(b >= a))
        throw ConfigError("grid: requires END >= START and STEP > 0");
    std::vector<double> out;
    const long long count = (long long)std::floor((b - a) / h + 1e-9);
    for (long long i = 0; i <= count; ++i) out.push_back(a + h * double(i));
    if (out.back() < b - 1e-12 * std::max(1.0, b)) out.push_back(b);
    return out;
}

std::vector<long long> parse_scales(const std::string& csv) {
    std::vector<long long> out;
    for (double v : parse_double_list("ns", csv)) {
        if (!(v >= 1)) throw ConfigError("ns: scales must be >= 1");
        out.push_back((long long)llround(v));
    }
    if (out.empty()) throw ConfigError("ns: empty scale list");
    return out;
}

InitialConfiguration load_initial_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open initial configuration: " + path);
    std::vector<double> c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("k,", 0) == 0) continue;  // header
        int k = 0;
        double v = 0.0;
        if (std::sscanf(line.c_str(), "%d,%lf", &k, &v) != 2)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected rows 'k,c_k'");
        if (k < 1)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": class index must be >= 1");
        if (int(c.size()) < k) c.resize(std::size_t(k), 0.0);
        c[std::size_t(k - 1)] = v;
    }
    return InitialConfiguration::large(std::move(c));
}

void write_initial_csv(const std::string& path,
                       const InitialConfiguration& init) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "k,c\n";
    for (std::size_t i = 0; i < init.c.size(); ++i)
        out << (i + 1) << "," << format_g17(init.c[i]) << "\n";
}

std::string resolve_out_dir(const RunSettings& s) {
    if (!s.out_dir.empty()) return s.out_dir;
    if (const char* env = std::getenv("SUBPA_OUT_DIR")) return env;
    return ".";
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_simulation_csv(const std::string& path,
                          std::span<const RecordedPath> paths) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "replica,t,k,x\n";
    for (std::size_t r = 0; r < paths.size(); ++r) {
        const RecordedPath& p = paths[r];
        for (std::size_t i = 0; i < p.times.size(); ++i)
            for (int k = 1; k <= p.k_record; ++k)
                out << r << "," << format_g17(p.times[i]) << "," << k << ","
                    << format_g17(p.value(k, i)) << "\n";
    }
}

void write_ode_csv(const std::string& path, const Trajectory& trajectory) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "t,k,phi\n";
    for (const TruncatedProfile& s : trajectory.samples)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            out << format_g17(s.t) << "," << (i + 1) << ","
                << format_g17(s.values[i]) << "\n";
}

void write_study_csv(const std::string& path, const StudyTable& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "n,k,deviation\n";
    for (const StudyRow& row : table.rows)
        for (std::size_t k = 0; k < row.per_k_mean.size(); ++k)
            out << row.n << "," << (k + 1) << ","
                << format_g17(row.per_k_mean[k]) << "\n";
}

namespace {

nlohmann::json settings_to_json(const RunSettings& s) {
    nlohmann::json j;
    j["command"] = s.command;
    j["model"] = s.model;
    j["p"] = s.p;
    j["weight"] = {{"kind", s.weight_kind},
                   {"kappa", s.kappa},
                   {"table", s.weight_table},
                   {"probe", s.weight_probe}};
    j["tol"] = s.tol;
    j["kmax"] = s.kmax;
    j["init"] = s.init;
    j["t0"] = s.t0;
    j["t_end"] = s.t_end;
    j["tail"] = s.tail;
    j["rel_tol"] = s.rel_tol;
    j["n"] = s.n;
    j["replicas"] = s.replicas;
    j["seed"] = s.seed;
    j["grid"] = s.grid;
    j["k_record"] = s.k_record;
    j["ns"] = s.ns;
    j["k_cut"] = s.k_cut;
    j["threads"] = s.threads;
    j["out_dir"] = s.out_dir;
    return j;
}

}  // namespace

std::string manifest_json(const RunSettings& settings,
                          const std::vector<std::string>& outputs,
                          double wall_seconds,
                          const std::vector<AuditCounters>& audits) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tool"] = "subpa";
    j["version"] = "0.1.0";
    j["settings"] = settings_to_json(settings);
    j["outputs"] = outputs;
    j["wall_seconds"] = wall_seconds;
    if (!audits.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const AuditCounters& a : audits) {
            arr.push_back({{"steps", a.steps},
                           {"size_total", a.size_total},
                           {"initial_size_total", a.initial_size_total},
                           {"units", a.units},
                           {"initial_units", a.initial_units},
                           {"additions", a.additions},
                           {"max_abs_increment", a.max_abs_increment}});
        }
        j["audit"] = arr;
    }
    return j.dump(2) + "\n";
}

RunSettings settings_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed manifest " + path + ": " + e.what());
    }
    RunSettings s;
    try {
        const auto& js = j.at("settings");
        s.command = js.at("command").get<std::string>();
        s.model = js.at("model").get<std::string>();
        s.p = js.at("p").get<double>();
        s.weight_kind = js.at("weight").at("kind").get<std::string>();
        s.kappa = js.at("weight").at("kappa").get<double>();
        s.weight_table =
            js.at("weight").at("table").get<std::vector<double>>();
        s.weight_probe = js.at("weight").at("probe").get<int>();
        s.tol = js.at("tol").get<double>();
        s.kmax = js.at("kmax").get<int>();
        s.init = js.at("init").get<std::string>();
        s.t0 = js.at("t0").get<double>();
        s.t_end = js.at("t_end").get<double>();
        s.tail = js.at("tail").get<std::string>();
        s.rel_tol = js.at("rel_tol").get<double>();
        s.n = js.at("n").get<long long>();
        s.replicas = js.at("replicas").get<int>();
        s.seed = js.at("seed").get<std::uint64_t>();
        s.grid = js.at("grid").get<std::string>();
        s.k_record = js.at("k_record").get<int>();
        s.ns = js.at("ns").get<std::vector<long long>>();
        s.k_cut = js.at("k_cut").get<int>();
        s.threads = js.at("threads").get<int>();
        s.out_dir = js.at("out_dir").get<std::string>();
    } catch (const std::exception& e) {
        throw ConfigError("manifest " + path + " is missing fields: " +
                          e.what());
    }
    return s;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

}  // namespace subpa
