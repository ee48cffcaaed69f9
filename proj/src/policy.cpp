#include "ceplan/policy.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ceplan/rollout.hpp"
#include "json.hpp"

namespace ceplan {

namespace {

// Extent of the second conditioning axis of memory[k]: the level above,
// or a single nil slot at the top of the stack.
int upper_extent(const LevelSizes& sizes, int k) {
    return k + 1 < static_cast<int>(sizes.size()) ? sizes[k + 1] : 1;
}

}  // namespace

void validate_level_sizes(const LevelSizes& sizes) {
    if (sizes.empty()) throw std::invalid_argument("level_sizes: at least one level required");
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("level_sizes: every level size must be >= 1");
    }
}

HhmmPolicy HhmmPolicy::flat(LevelSizes sizes, int obs_count, int action_count) {
    validate_level_sizes(sizes);
    if (obs_count < 1 || action_count < 1) {
        throw std::invalid_argument("flat: observation and action counts must be >= 1");
    }
    HhmmPolicy h;
    h.level_sizes = std::move(sizes);
    h.obs_count = obs_count;
    h.action_count = action_count;
    h.decision.resize_uniform(h.level_sizes[0], 1, action_count);
    h.memory.resize(h.level_sizes.size());
    h.memory[0].resize_uniform(obs_count, upper_extent(h.level_sizes, 0), h.level_sizes[0]);
    for (int k = 1; k < h.levels(); ++k) {
        h.memory[k].resize_uniform(h.level_sizes[k - 1] + 1, upper_extent(h.level_sizes, k),
                                   h.level_sizes[k]);
    }
    return h;
}

int HhmmPolicy::sample_step(int y, std::span<const int> prev, std::span<int> cur,
                            Rng& rng) const {
    const int lambda = levels();
    if (!prev.empty() && static_cast<int>(prev.size()) != lambda) {
        throw std::invalid_argument("sample_step: previous stack has wrong number of levels");
    }
    for (std::size_t k = 0; k < prev.size(); ++k) {
        if (prev[k] < 0 || prev[k] >= level_sizes[k]) {
            throw std::invalid_argument("sample_step: previous stack symbol out of range");
        }
    }
    if (y < 0 || y >= obs_count) throw std::invalid_argument("sample_step: observation out of range");

    // Top-down refresh. Level k+1 conditions on the step t-1 symbol of the
    // level below (nil at t = 1) and the already drawn symbol above.
    for (int k = lambda - 1; k >= 1; --k) {
        const int below_prev = prev.empty() ? level_sizes[k - 1] : prev[k - 1];
        const int above = k + 1 < lambda ? cur[k + 1] : 0;
        cur[k] = rng.sample_row(memory[k].row(below_prev, above));
    }
    const int above = lambda > 1 ? cur[1] : 0;
    cur[0] = rng.sample_row(memory[0].row(y, above));
    return rng.sample_row(decision.row(cur[0], 0));
}

std::pair<MemoryStack, int> HhmmPolicy::sample_step(int y, const MemoryStack* prev,
                                                    Rng& rng) const {
    MemoryStack cur(levels());
    std::span<const int> prev_span =
        prev ? std::span<const int>(*prev) : std::span<const int>();
    const int action = sample_step(y, prev_span, cur, rng);
    return {std::move(cur), action};
}

double HhmmPolicy::trajectory_log_prob(std::span<const int> actions, std::span<const int> obs,
                                       std::span<const int> memories) const {
    const int lambda = levels();
    const std::size_t horizon = actions.size();
    if (obs.size() != horizon || memories.size() != horizon * lambda) {
        throw std::invalid_argument("trajectory_log_prob: sequence lengths differ");
    }
    double log_prob = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const int* cur = memories.data() + t * lambda;
        const int* prev = t > 0 ? memories.data() + (t - 1) * lambda : nullptr;
        double step = decision.row(cur[0], 0)[actions[t]];
        step *= memory[0].row(obs[t], lambda > 1 ? cur[1] : 0)[cur[0]];
        for (int k = 1; k < lambda; ++k) {
            const int below_prev = prev ? prev[k - 1] : level_sizes[k - 1];
            const int above = k + 1 < lambda ? cur[k + 1] : 0;
            step *= memory[k].row(below_prev, above)[cur[k]];
        }
        if (step <= 0.0) return -std::numeric_limits<double>::infinity();
        log_prob += std::log(step);
    }
    return log_prob;
}

void HhmmPolicy::validate(double tol) const {
    auto check_table = [tol](const CondTable& table, const char* name) {
        for (int a = 0; a < table.ctx_a; ++a) {
            for (int b = 0; b < table.ctx_b; ++b) {
                double sum = 0.0;
                for (double v : table.row(a, b)) {
                    if (v < 0.0) {
                        throw std::logic_error(std::string(name) + ": negative probability");
                    }
                    sum += v;
                }
                if (std::abs(sum - 1.0) > tol) {
                    throw std::logic_error(std::string(name) + ": row does not sum to 1");
                }
            }
        }
    };
    check_table(decision, "decision");
    for (std::size_t k = 0; k < memory.size(); ++k) {
        check_table(memory[k], ("memory" + std::to_string(k + 1)).c_str());
    }
}

long param_count(const LevelSizes& sizes, int obs_count, int action_count) {
    validate_level_sizes(sizes);
    const int lambda = static_cast<int>(sizes.size());
    long total = static_cast<long>(action_count - 1) * sizes[0];
    // memory[k]: nil contexts are excluded, so the first axis contributes
    // card(M^k) for k >= 1 and obs_count for the observation-driven level.
    total += static_cast<long>(sizes[0] - 1) * obs_count * (lambda > 1 ? sizes[1] : 1);
    for (int k = 1; k < lambda; ++k) {
        total += static_cast<long>(sizes[k] - 1) * sizes[k - 1] *
                 (k + 1 < lambda ? sizes[k + 1] : 1);
    }
    return total;
}

HhmmPolicy ce_update(std::span<const Trajectory* const> elite, const LevelSizes& sizes,
                     double smoothing, const HhmmPolicy& old) {
    if (elite.empty()) throw std::invalid_argument("ce_update: empty elite set");
    if (smoothing < 0.0) throw std::invalid_argument("ce_update: smoothing must be >= 0");
    validate_level_sizes(sizes);
    if (old.level_sizes != sizes) {
        throw std::invalid_argument("ce_update: old policy does not match level_sizes");
    }

    HhmmPolicy next = HhmmPolicy::flat(sizes, old.obs_count, old.action_count);
    next.smoothing = smoothing;
    const int lambda = next.levels();

    std::vector<std::vector<std::int64_t>> counts(1 + lambda);
    counts[0].assign(next.decision.p.size(), 0);
    for (int k = 0; k < lambda; ++k) counts[1 + k].assign(next.memory[k].p.size(), 0);

    auto slot = [](const CondTable& t, int a, int b, int o) {
        return (static_cast<std::size_t>(a) * t.ctx_b + b) * t.width + o;
    };

    for (const Trajectory* tr : elite) {
        if (tr->levels != lambda) {
            throw std::invalid_argument("ce_update: trajectory level count mismatch");
        }
        for (int t = 0; t < tr->horizon; ++t) {
            const auto cur = tr->memory_at(t);
            ++counts[0][slot(next.decision, cur[0], 0, tr->actions[t])];
            ++counts[1][slot(next.memory[0], tr->obs[t], lambda > 1 ? cur[1] : 0, cur[0])];
            for (int k = 1; k < lambda; ++k) {
                const int below_prev = t > 0 ? tr->memory_at(t - 1)[k - 1] : sizes[k - 1];
                const int above = k + 1 < lambda ? cur[k + 1] : 0;
                ++counts[1 + k][slot(next.memory[k], below_prev, above, cur[k])];
            }
        }
    }

    auto rebuild = [&](CondTable& table, const CondTable& old_table,
                       const std::vector<std::int64_t>& c) {
        for (int a = 0; a < table.ctx_a; ++a) {
            for (int b = 0; b < table.ctx_b; ++b) {
                const std::size_t base = slot(table, a, b, 0);
                std::int64_t context_total = 0;
                for (int o = 0; o < table.width; ++o) context_total += c[base + o];
                auto row = table.row(a, b);
                if (context_total == 0 && smoothing == 0.0) {
                    const auto old_row = old_table.row(a, b);
                    std::copy(old_row.begin(), old_row.end(), row.begin());
                    continue;
                }
                const double denom =
                    static_cast<double>(context_total) + smoothing * table.width;
                for (int o = 0; o < table.width; ++o) {
                    row[o] = (static_cast<double>(c[base + o]) + smoothing) / denom;
                }
            }
        }
    };

    rebuild(next.decision, old.decision, counts[0]);
    for (int k = 0; k < lambda; ++k) rebuild(next.memory[k], old.memory[k], counts[1 + k]);
    return next;
}

HhmmPolicy ce_update(const std::vector<Trajectory>& elite, const LevelSizes& sizes,
                     double smoothing, const HhmmPolicy& old) {
    std::vector<const Trajectory*> ptrs;
    ptrs.reserve(elite.size());
    for (const Trajectory& tr : elite) ptrs.push_back(&tr);
    return ce_update(std::span<const Trajectory* const>(ptrs), sizes, smoothing, old);
}

namespace {

using nlohmann::ordered_json;

ordered_json table_to_json(const CondTable& table, bool flatten_b) {
    ordered_json out = ordered_json::array();
    for (int a = 0; a < table.ctx_a; ++a) {
        if (flatten_b) {
            ordered_json row = ordered_json::array();
            for (double v : table.row(a, 0)) row.push_back(v);
            out.push_back(std::move(row));
            continue;
        }
        ordered_json mid = ordered_json::array();
        for (int b = 0; b < table.ctx_b; ++b) {
            ordered_json row = ordered_json::array();
            for (double v : table.row(a, b)) row.push_back(v);
            mid.push_back(std::move(row));
        }
        out.push_back(std::move(mid));
    }
    return out;
}

CondTable table_from_json(const ordered_json& j, int ctx_a, int ctx_b, int width,
                          bool flatten_b, const std::string& name) {
    CondTable table;
    table.resize_uniform(ctx_a, ctx_b, width);
    if (!j.is_array() || static_cast<int>(j.size()) != ctx_a) {
        throw std::runtime_error("policy file: table " + name + " has wrong shape");
    }
    for (int a = 0; a < ctx_a; ++a) {
        for (int b = 0; b < ctx_b; ++b) {
            const ordered_json& row_json = flatten_b ? j[a] : j[a][b];
            if (!flatten_b &&
                (!j[a].is_array() || static_cast<int>(j[a].size()) != ctx_b)) {
                throw std::runtime_error("policy file: table " + name + " has wrong shape");
            }
            if (!row_json.is_array() || static_cast<int>(row_json.size()) != width) {
                throw std::runtime_error("policy file: table " + name + " has wrong shape");
            }
            auto row = table.row(a, b);
            for (int o = 0; o < width; ++o) {
                if (!row_json[o].is_number()) {
                    throw std::runtime_error("policy file: table " + name +
                                             " holds a non-numeric entry");
                }
                row[o] = row_json[o].get<double>();
            }
        }
    }
    return table;
}

}  // namespace

std::string policy_to_json(const HhmmPolicy& policy) {
    ordered_json doc;
    doc["format_version"] = 1;
    doc["level_sizes"] = policy.level_sizes;
    doc["smoothing"] = policy.smoothing;
    ordered_json tables;
    tables["decision"] = table_to_json(policy.decision, /*flatten_b=*/true);
    for (int k = 0; k < policy.levels(); ++k) {
        tables["memory" + std::to_string(k + 1)] = table_to_json(policy.memory[k], false);
    }
    doc["tables"] = std::move(tables);
    return doc.dump(2);
}

HhmmPolicy policy_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("policy file: not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("level_sizes") ||
        !doc.contains("smoothing") || !doc.contains("tables")) {
        throw std::runtime_error("policy file: missing required field");
    }
    if (doc["format_version"].get<int>() != 1) {
        throw std::runtime_error("policy file: unsupported format_version");
    }
    LevelSizes sizes = doc["level_sizes"].get<LevelSizes>();
    validate_level_sizes(sizes);
    const ordered_json& tables = doc["tables"];
    if (!tables.is_object() || !tables.contains("decision") || !tables.contains("memory1")) {
        throw std::runtime_error("policy file: missing table");
    }
    // Observation and action counts are recovered from the table shapes.
    const ordered_json& m1 = tables["memory1"];
    if (!m1.is_array() || m1.empty()) throw std::runtime_error("policy file: memory1 malformed");
    const ordered_json& d0 = tables["decision"];
    if (!d0.is_array() || d0.empty() || !d0[0].is_array()) {
        throw std::runtime_error("policy file: decision malformed");
    }
    const int obs_count = static_cast<int>(m1.size());
    const int action_count = static_cast<int>(d0[0].size());

    HhmmPolicy policy = HhmmPolicy::flat(sizes, obs_count, action_count);
    policy.smoothing = doc["smoothing"].get<double>();
    policy.decision = table_from_json(d0, sizes[0], 1, action_count, true, "decision");
    const int lambda = static_cast<int>(sizes.size());
    for (int k = 0; k < lambda; ++k) {
        const std::string name = "memory" + std::to_string(k + 1);
        if (!tables.contains(name)) throw std::runtime_error("policy file: missing table " + name);
        const int ctx_a = k == 0 ? obs_count : sizes[k - 1] + 1;
        const int ctx_b = k + 1 < lambda ? sizes[k + 1] : 1;
        policy.memory[k] = table_from_json(tables[name], ctx_a, ctx_b, sizes[k], false, name);
    }
    policy.validate(1e-6);
    return policy;
}

void save_policy(const HhmmPolicy& policy, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open policy file for writing: " + path);
    out << policy_to_json(policy) << '\n';
    if (!out) throw std::runtime_error("failed writing policy file: " + path);
}

HhmmPolicy load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return policy_from_json(buffer.str());
}

}  // namespace ceplan
