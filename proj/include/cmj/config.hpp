#pragma once

// Plain-text key-value configuration with dotted keys.
//
//   # comment
//   seed = 7
//   [weights]
//   coupling = u_zero        # same as weights.coupling
//   v = pareto
//   v.shape = 0.5
//
// A `[section]` line prefixes every following key until the next section;
// `[]` returns to the top level. Lists are comma separated. Every key must be
// read by the command that runs, so typos surface as errors.

#include <charconv>
#include <cmath>
#include <limits>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cmj/criteria.hpp"
#include "cmj/errors.hpp"
#include "cmj/fitness.hpp"
#include "cmj/pure_birth.hpp"
#include "cmj/sequence_plan.hpp"
#include "cmj/weights.hpp"

namespace cmj {

namespace detail {
inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec == std::errc() && ptr == end && !s.empty()) return v;
    // Accept integral scientific notation such as 1e5.
    if (const auto d = parse_double(s); d && *d >= 0.0 && *d < 1.8e19 && *d == std::floor(*d))
        return static_cast<std::uint64_t>(*d);
    return std::nullopt;
}
}  // namespace detail

class Config {
public:
    Config() = default;

    static Config parse(std::istream& in, const std::string& source = "<config>") {
        Config cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view s = line;
            if (const auto hash = s.find('#'); hash != s.npos) s = s.substr(0, hash);
            s = detail::trim(s);
            if (s.empty()) continue;
            const std::string where = source + ":" + std::to_string(lineno);
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError(where, "unterminated section header");
                section = std::string(detail::trim(s.substr(1, s.size() - 2)));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == s.npos) throw ConfigError(where, "expected key = value");
            const std::string_view key = detail::trim(s.substr(0, eq));
            if (key.empty()) throw ConfigError(where, "empty key");
            const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
            if (cfg.entries_.count(full)) throw ConfigError(full, "duplicate key (" + where + ")");
            cfg.entries_[full] = std::string(detail::trim(s.substr(eq + 1)));
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("--config", "cannot read " + path.string());
        return parse(in, path.string());
    }

    static Config from_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    void erase(const std::string& key) { entries_.erase(key); }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::optional<std::string> raw(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::string get_string(const std::string& key) const {
        if (auto v = raw(key)) return *v;
        throw ConfigError(key, "missing required key");
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        return raw(key).value_or(fallback);
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        const auto v = raw(key);
        return v ? to_double(key, *v) : fallback;
    }

    std::uint64_t get_u64(const std::string& key) const { return to_u64(key, get_string(key)); }
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        const auto v = raw(key);
        return v ? to_u64(key, *v) : fallback;
    }

    int get_int(const std::string& key, int fallback) const {
        if (!raw(key)) return fallback;
        const std::uint64_t v = get_u64(key);
        if (v > 1000000000ULL) throw ConfigError(key, "value too large");
        return static_cast<int>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError(key, "expected true or false, got '" + *v + "'");
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : detail::split_list(get_string(key))) out.push_back(to_double(key, item));
        return out;
    }
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const {
        return has(key) ? get_doubles(key) : fallback;
    }

    std::vector<std::string> get_strings(const std::string& key) const {
        return detail::split_list(get_string(key));
    }

    /// Marks every key below `prefix.` as read.
    void consume_prefix(const std::string& prefix) const {
        for (const auto& [k, v] : entries_)
            if (k == prefix || k.rfind(prefix + ".", 0) == 0) used_.insert(k);
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    void require_all_used() const {
        const auto left = unused();
        if (!left.empty()) throw ConfigError(left.front(), "unknown key for this command");
    }

private:
    static double to_double(const std::string& key, const std::string& s) {
        const auto v = detail::parse_double(s);
        if (!v) throw ConfigError(key, "expected a number, got '" + s + "'");
        return *v;
    }
    static std::uint64_t to_u64(const std::string& key, const std::string& s) {
        const auto v = detail::parse_u64(s);
        if (!v) throw ConfigError(key, "expected a nonnegative integer, got '" + s + "'");
        return *v;
    }

    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Builders. Model-level validation failures are reported against the key
// that introduced the offending block.

namespace detail {
template <class F>
auto as_config_error(const std::string& key, F&& build) -> decltype(build()) {
    try {
        return build();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}
}  // namespace detail

/// Law named by `prefix` (point, exponential, uniform, pareto, logpareto)
/// with parameters under `prefix.`.
inline ScalarLaw parse_law(const Config& cfg, const std::string& prefix) {
    const std::string kind = cfg.get_string(prefix);
    auto p = [&](const char* name) { return cfg.get_double(prefix + "." + name); };
    auto p_or = [&](const char* name, double d) { return cfg.get_double(prefix + "." + name, d); };
    return detail::as_config_error(prefix, [&]() -> ScalarLaw {
        if (kind == "point") return PointMass(p("value"));
        if (kind == "exponential") return Exponential(p_or("rate", 1.0));
        if (kind == "uniform") return Uniform(p("lo"), p("hi"));
        if (kind == "pareto") return Pareto(p("shape"), p_or("scale", 1.0));
        if (kind == "logpareto") return LogParetoTail(p("nu"), p_or("x0", std::exp(1.0)));
        throw ConfigError(prefix, "unknown law '" + kind + "'");
    });
}

inline Coupling parse_coupling(const std::string& key, const std::string& s) {
    if (s == "independent") return Coupling::independent;
    if (s == "u_equals_v") return Coupling::u_equals_v;
    if (s == "u_zero") return Coupling::u_zero;
    if (s == "u_one") return Coupling::u_one;
    throw ConfigError(key, "unknown coupling '" + s + "'");
}

/// weights.coupling (default u_zero), weights.v and, for independent
/// coupling, weights.u.
inline WeightSpec parse_weights(const Config& cfg) {
    const Coupling c = parse_coupling("weights.coupling", cfg.get_string("weights.coupling", "u_zero"));
    ScalarLaw v = parse_law(cfg, "weights.v");
    std::optional<ScalarLaw> u;
    if (c == Coupling::independent) u = parse_law(cfg, "weights.u");
    else if (cfg.has("weights.u")) throw ConfigError("weights.u", "only used with independent coupling");
    return detail::as_config_error("weights.coupling", [&] { return WeightSpec(PairSpec(c, v, u)); });
}

/// fitness.kind = linear (default) | tabulated with fitness.rates and
/// fitness.tail = zero_after_end | constant_last.
inline FitnessSpec parse_fitness(const Config& cfg) {
    const std::string kind = cfg.get_string("fitness.kind", "linear");
    if (kind == "linear") return FitnessSpec::linear();
    if (kind != "tabulated") throw ConfigError("fitness.kind", "unknown fitness '" + kind + "'");
    const auto rates = cfg.get_doubles("fitness.rates");
    const std::string tail = cfg.get_string("fitness.tail", "zero_after_end");
    TailRule rule;
    if (tail == "zero_after_end") rule = TailRule::zero_after_end;
    else if (tail == "constant_last") rule = TailRule::constant_last;
    else throw ConfigError("fitness.tail", "unknown tail rule '" + tail + "'");
    return detail::as_config_error("fitness.rates", [&] { return FitnessSpec::tabulated(rates, rule); });
}

/// offspring.kind = mixed (default: fitness + weights) | fixed (birth.c1, birth.c2).
inline OffspringModel parse_offspring(const Config& cfg) {
    const std::string kind = cfg.get_string("offspring.kind", "mixed");
    if (kind == "fixed") {
        const double c1 = cfg.get_double("birth.c1");
        const double c2 = cfg.get_double("birth.c2");
        return detail::as_config_error("birth.c1", [&] { return OffspringModel::fixed(BirthRates(c1, c2)); });
    }
    if (kind != "mixed") throw ConfigError("offspring.kind", "unknown offspring model '" + kind + "'");
    return OffspringModel::mixed(parse_weights(cfg), parse_fitness(cfg));
}

inline SequencePlan parse_plan(const Config& cfg) {
    SequencePlan plan;
    plan.epsilon = cfg.get_double("plan.epsilon", plan.epsilon);
    plan.i_max = cfg.get_int("plan.i_max", plan.i_max);
    plan.time_scale = cfg.get_double("plan.time_scale", plan.time_scale);
    plan.budget_base = cfg.get_double("plan.budget_base", plan.budget_base);
    plan.candidate_base = cfg.get_double("plan.candidate_base", plan.candidate_base);
    detail::as_config_error("plan", [&] {
        plan.validate();
        return 0;
    });
    return plan;
}

inline TailGridConfig parse_tail_grid(const Config& cfg) {
    TailGridConfig g;
    g.epsilon = cfg.get_double("tail.epsilon", g.epsilon);
    g.epsilon_prime = cfg.get_double("tail.epsilon_prime", g.epsilon_prime);
    g.x0 = cfg.get_double("tail.x0", g.x0);
    g.t_grid = cfg.get_doubles("tail.t_grid", g.t_grid);
    g.x_grid = cfg.get_doubles("tail.x_grid", g.x_grid);
    g.nsamples = cfg.get_u64("tail.samples", g.nsamples);
    g.max_unresolved_share = cfg.get_double("tail.max_unresolved_share", g.max_unresolved_share);
    detail::as_config_error("tail", [&] {
        g.validate();
        return 0;
    });
    return g;
}

inline MomentConfig parse_moment(const Config& cfg) {
    MomentConfig m;
    m.nsamples = cfg.get_u64("moment.samples", m.nsamples);
    m.truncation_scale = cfg.get_double("moment.truncation_scale", m.truncation_scale);
    m.stable_change = cfg.get_double("moment.stable_change", m.stable_change);
    m.growth_change = cfg.get_double("moment.growth_change", m.growth_change);
    if (m.nsamples < 1000) throw ConfigError("moment.samples", "need at least 1000 samples");
    if (!(m.truncation_scale > 0.0)) throw ConfigError("moment.truncation_scale", "must be > 0");
    return m;
}

inline ClassifyConfig parse_classify(const Config& cfg) {
    ClassifyConfig c;
    c.moment_t_grid = cfg.get_doubles("moment.t_grid", c.moment_t_grid);
    for (double t : c.moment_t_grid)
        if (!(t > 0.0)) throw ConfigError("moment.t_grid", "every t must be > 0");
    if (c.moment_t_grid.empty()) throw ConfigError("moment.t_grid", "empty grid");
    c.moment = parse_moment(cfg);
    c.tail = parse_tail_grid(cfg);
    return c;
}

}  // namespace cmj
