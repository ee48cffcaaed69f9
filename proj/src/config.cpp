#include "ceplan/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ceplan {

using nlohmann::ordered_json;

Scenario ScenarioSection::to_scenario() const {
    Scenario sc;
    sc.kind = kind;
    sc.horizon = horizon;
    sc.radius = radius;
    sc.width = width;
    sc.height = height;
    return sc;
}

CeConfig ExperimentConfig::ce_config() const {
    CeConfig c;
    c.n_samples = ce.n_samples;
    c.rho = ce.rho;
    c.smoothing = policy.smoothing;
    c.patience = ce.criterion;
    c.max_iterations = ce.max_iterations;
    c.seed = ce.seed;
    return c;
}

std::string case_label(CaseKind kind) {
    switch (kind) {
        case CaseKind::Case1Fixed: return "fixed";
        case CaseKind::Case2Blind: return "blind";
        case CaseKind::Case3Full: return "full";
    }
    return "full";
}

CaseKind parse_case(const std::string& label, const std::string& key) {
    if (label == "fixed") return CaseKind::Case1Fixed;
    if (label == "blind") return CaseKind::Case2Blind;
    if (label == "full") return CaseKind::Case3Full;
    throw std::runtime_error(key + ": must be one of \"fixed\", \"blind\", \"full\"");
}

std::string criterion_label(int criterion) {
    if (criterion == 100) return "weak";
    if (criterion == 500) return "strong";
    return std::to_string(criterion);
}

int parse_criterion(const ordered_json& value, const std::string& key) {
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "weak") return 100;
        if (s == "strong") return 500;
        throw std::runtime_error(key + ": must be \"weak\", \"strong\", or a positive integer");
    }
    if (value.is_number_integer()) {
        const long long v = value.get<long long>();
        if (v >= 1 && v <= 1000000000) return static_cast<int>(v);
    }
    throw std::runtime_error(key + ": must be \"weak\", \"strong\", or a positive integer");
}

namespace {

class Errors {
public:
    void add(const std::string& key, const std::string& what) {
        lines_.push_back(key + ": " + what);
    }
    bool empty() const { return lines_.empty(); }
    std::string joined() const {
        std::ostringstream os;
        os << "config error";
        if (lines_.size() > 1) os << "s";
        for (const auto& l : lines_) os << "\n  " << l;
        return os.str();
    }

private:
    std::vector<std::string> lines_;
};

bool read_i64(const ordered_json& v, const std::string& key, long long lo, long long hi,
              long long& out, Errors& err) {
    if (!v.is_number_integer()) {
        err.add(key, "must be an integer");
        return false;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
        err.add(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return false;
    }
    out = x;
    return true;
}

bool read_int(const ordered_json& v, const std::string& key, long long lo, long long hi, int& out,
              Errors& err) {
    long long x;
    if (!read_i64(v, key, lo, hi, x, err)) return false;
    out = static_cast<int>(x);
    return true;
}

bool read_u64(const ordered_json& v, const std::string& key, std::uint64_t& out, Errors& err) {
    if (v.is_number_unsigned()) {
        out = v.get<std::uint64_t>();
        return true;
    }
    if (v.is_number_integer() && v.get<long long>() >= 0) {
        out = static_cast<std::uint64_t>(v.get<long long>());
        return true;
    }
    err.add(key, "must be a nonnegative integer");
    return false;
}

bool read_double(const ordered_json& v, const std::string& key, double& out, Errors& err) {
    if (!v.is_number()) {
        err.add(key, "must be a number");
        return false;
    }
    out = v.get<double>();
    return true;
}

bool read_string(const ordered_json& v, const std::string& key, std::string& out, Errors& err) {
    if (!v.is_string()) {
        err.add(key, "must be a string");
        return false;
    }
    out = v.get<std::string>();
    return true;
}

bool read_level_sizes(const ordered_json& v, const std::string& key, LevelSizes& out, Errors& err) {
    if (!v.is_array() || v.empty()) {
        err.add(key, "must be a nonempty array of positive integers");
        return false;
    }
    LevelSizes sizes;
    for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > 100000) {
            err.add(key, "must be a nonempty array of positive integers");
            return false;
        }
        sizes.push_back(static_cast<int>(e.get<long long>()));
    }
    out = std::move(sizes);
    return true;
}

void expect_object(const ordered_json& v, const std::string& key, Errors& err) {
    if (!v.is_object()) err.add(key, "must be an object");
}

void parse_scenario(const ordered_json& j, ScenarioSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "scenario." + key;
        if (key == "case") {
            std::string label;
            if (read_string(value, path, label, err)) {
                try {
                    out.kind = parse_case(label, path);
                } catch (const std::runtime_error&) {
                    err.add(path, "must be one of \"fixed\", \"blind\", \"full\"");
                }
            }
        } else if (key == "horizon") {
            read_int(value, path, 1, 1000000, out.horizon, err);
        } else if (key == "radius") {
            read_int(value, path, 0, 1000, out.radius, err);
        } else if (key == "width") {
            read_int(value, path, 1, 1000, out.width, err);
        } else if (key == "height") {
            read_int(value, path, 2, 1000, out.height, err);
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_policy(const ordered_json& j, PolicySection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "policy." + key;
        if (key == "level_sizes") {
            read_level_sizes(value, path, out.level_sizes, err);
        } else if (key == "smoothing") {
            double s;
            if (read_double(value, path, s, err)) {
                if (s < 0)
                    err.add(path, "must be >= 0");
                else
                    out.smoothing = s;
            }
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_ce(const ordered_json& j, CeSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "ce." + key;
        if (key == "n_samples") {
            read_int(value, path, 1, 100000000, out.n_samples, err);
        } else if (key == "rho") {
            double r;
            if (read_double(value, path, r, err)) {
                if (r <= 0.0 || r >= 1.0)
                    err.add(path, "must be in (0, 1)");
                else
                    out.rho = r;
            }
        } else if (key == "criterion") {
            try {
                out.criterion = parse_criterion(value, path);
            } catch (const std::runtime_error&) {
                err.add(path, "must be \"weak\", \"strong\", or a positive integer");
            }
        } else if (key == "max_iterations") {
            read_i64(value, path, 0, 1000000000, out.max_iterations, err);
        } else if (key == "seed") {
            read_u64(value, path, out.seed, err);
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_qlearning(const ordered_json& j, QlearningSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "qlearning." + key;
        if (key == "steps") {
            read_i64(value, path, 1, 1000000000000LL, out.steps, err);
        } else if (key == "alpha") {
            double a;
            if (read_double(value, path, a, err)) {
                if (a <= 0.0 || a > 1.0)
                    err.add(path, "must be in (0, 1]");
                else
                    out.alpha = a;
            }
        } else if (key == "gamma") {
            double g;
            if (read_double(value, path, g, err)) {
                if (g < 0.0 || g >= 1.0)
                    err.add(path, "must be in [0, 1)");
                else
                    out.gamma = g;
            }
        } else if (key == "seed") {
            read_u64(value, path, out.seed, err);
        } else if (key == "episode_length") {
            read_i64(value, path, 0, 1000000000000LL, out.episode_length, err);
        } else if (key == "windows") {
            read_int(value, path, 1, 100000000, out.windows, err);
        } else if (key == "warmup_steps") {
            read_i64(value, path, 0, 1000000000000LL, out.warmup_steps, err);
        } else if (key == "eval_mode") {
            std::string m;
            if (read_string(value, path, m, err)) {
                if (m != "fresh" && m != "continuation")
                    err.add(path, "must be \"fresh\" or \"continuation\"");
                else
                    out.eval_mode = m;
            }
        } else if (key == "memory_budget_mb") {
            double mb;
            if (read_double(value, path, mb, err)) {
                if (mb <= 0.0)
                    err.add(path, "must be > 0");
                else
                    out.memory_budget_mb = mb;
            }
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_evaluation(const ordered_json& j, EvaluationSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "evaluation." + key;
        if (key == "episodes") {
            read_int(value, path, 1, 100000000, out.episodes, err);
        } else if (key == "seed") {
            read_u64(value, path, out.seed, err);
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_sweep(const ordered_json& j, SweepSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "sweep." + key;
        if (key == "level_sizes_grid") {
            if (!value.is_array()) {
                err.add(path, "must be an array of level-size arrays");
                continue;
            }
            std::vector<LevelSizes> grid;
            bool ok = true;
            for (std::size_t i = 0; i < value.size(); ++i) {
                LevelSizes sizes;
                if (!read_level_sizes(value[i], path + "[" + std::to_string(i) + "]", sizes, err)) {
                    ok = false;
                    break;
                }
                grid.push_back(std::move(sizes));
            }
            if (ok) out.level_sizes_grid = std::move(grid);
        } else if (key == "criteria") {
            if (!value.is_array()) {
                err.add(path, "must be an array of criteria");
                continue;
            }
            std::vector<int> crits;
            bool ok = true;
            for (std::size_t i = 0; i < value.size(); ++i) {
                try {
                    crits.push_back(parse_criterion(value[i], path + "[" + std::to_string(i) + "]"));
                } catch (const std::runtime_error&) {
                    err.add(path + "[" + std::to_string(i) + "]",
                            "must be \"weak\", \"strong\", or a positive integer");
                    ok = false;
                    break;
                }
            }
            if (ok) out.criteria = std::move(crits);
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void parse_output(const ordered_json& j, OutputSection& out, Errors& err) {
    for (const auto& [key, value] : j.items()) {
        const std::string path = "output." + key;
        if (key == "dir") {
            std::string d;
            if (read_string(value, path, d, err)) {
                if (d.empty())
                    err.add(path, "must be a nonempty path");
                else
                    out.dir = d;
            }
        } else if (key == "reference_reward") {
            double r;
            if (read_double(value, path, r, err)) {
                if (r <= 0.0)
                    err.add(path, "must be > 0");
                else
                    out.reference_reward = r;
            }
        } else {
            err.add(path, "unrecognized key");
        }
    }
}

void cross_checks(const ExperimentConfig& cfg, Errors& err) {
    try {
        validate_level_sizes(cfg.policy.level_sizes);
    } catch (const std::exception& e) {
        err.add("policy.level_sizes", e.what());
    }
    for (std::size_t i = 0; i < cfg.sweep.level_sizes_grid.size(); ++i) {
        try {
            validate_level_sizes(cfg.sweep.level_sizes_grid[i]);
        } catch (const std::exception& e) {
            err.add("sweep.level_sizes_grid[" + std::to_string(i) + "]", e.what());
        }
    }
    if (cfg.scenario.radius >= std::max(cfg.scenario.width, cfg.scenario.height))
        err.add("scenario.radius", "must be smaller than the larger grid dimension");
}

}  // namespace

ExperimentConfig config_from_json(const ordered_json& j) {
    Errors err;
    ExperimentConfig cfg;
    if (!j.is_object()) throw std::runtime_error("config error\n  top level: must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "scenario") {
            expect_object(value, key, err);
            if (value.is_object()) parse_scenario(value, cfg.scenario, err);
        } else if (key == "policy") {
            expect_object(value, key, err);
            if (value.is_object()) parse_policy(value, cfg.policy, err);
        } else if (key == "ce") {
            expect_object(value, key, err);
            if (value.is_object()) parse_ce(value, cfg.ce, err);
        } else if (key == "qlearning") {
            expect_object(value, key, err);
            if (value.is_object()) parse_qlearning(value, cfg.qlearning, err);
        } else if (key == "evaluation") {
            expect_object(value, key, err);
            if (value.is_object()) parse_evaluation(value, cfg.evaluation, err);
        } else if (key == "sweep") {
            expect_object(value, key, err);
            if (value.is_object()) parse_sweep(value, cfg.sweep, err);
        } else if (key == "output") {
            expect_object(value, key, err);
            if (value.is_object()) parse_output(value, cfg.output, err);
        } else {
            err.add(key, "unrecognized key");
        }
    }
    if (err.empty()) cross_checks(cfg, err);
    if (!err.empty()) throw std::runtime_error(err.joined());
    return cfg;
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["scenario"] = {{"case", case_label(cfg.scenario.kind)},
                     {"horizon", cfg.scenario.horizon},
                     {"radius", cfg.scenario.radius},
                     {"width", cfg.scenario.width},
                     {"height", cfg.scenario.height}};
    j["policy"] = {{"level_sizes", cfg.policy.level_sizes}, {"smoothing", cfg.policy.smoothing}};
    ordered_json ce;
    ce["n_samples"] = cfg.ce.n_samples;
    ce["rho"] = cfg.ce.rho;
    const std::string crit = criterion_label(cfg.ce.criterion);
    if (crit == "weak" || crit == "strong")
        ce["criterion"] = crit;
    else
        ce["criterion"] = cfg.ce.criterion;
    ce["max_iterations"] = cfg.ce.max_iterations;
    ce["seed"] = cfg.ce.seed;
    j["ce"] = std::move(ce);
    j["qlearning"] = {{"steps", cfg.qlearning.steps},
                      {"alpha", cfg.qlearning.alpha},
                      {"gamma", cfg.qlearning.gamma},
                      {"seed", cfg.qlearning.seed},
                      {"episode_length", cfg.qlearning.episode_length},
                      {"windows", cfg.qlearning.windows},
                      {"warmup_steps", cfg.qlearning.warmup_steps},
                      {"eval_mode", cfg.qlearning.eval_mode},
                      {"memory_budget_mb", cfg.qlearning.memory_budget_mb}};
    j["evaluation"] = {{"episodes", cfg.evaluation.episodes}, {"seed", cfg.evaluation.seed}};
    ordered_json sweep;
    sweep["level_sizes_grid"] = cfg.sweep.level_sizes_grid;
    ordered_json crits = ordered_json::array();
    for (int c : cfg.sweep.criteria) {
        const std::string label = criterion_label(c);
        if (label == "weak" || label == "strong")
            crits.push_back(label);
        else
            crits.push_back(c);
    }
    sweep["criteria"] = std::move(crits);
    j["sweep"] = std::move(sweep);
    j["output"] = {{"dir", cfg.output.dir}, {"reference_reward", cfg.output.reference_reward}};
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << config_to_json(cfg).dump(2) << "\n";
}

}  // namespace ceplan
