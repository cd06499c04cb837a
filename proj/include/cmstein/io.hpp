#pragma once

// JSON and CSV serialisation. External formats use 1-based ball and colour
// labels.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmstein/bounds.hpp"
#include "cmstein/config.hpp"
#include "cmstein/degseq.hpp"
#include "cmstein/error.hpp"
#include "cmstein/explore.hpp"
#include "cmstein/mc.hpp"
#include "cmstein/stats.hpp"
#include "cmstein/stein.hpp"

namespace cmstein::io {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "': " + e.what());
    }
}

// --- degree distributions and sequences ------------------------------------

inline json to_json(const DegreeDistribution& pi) {
    json j = json::object();
    for (const auto& [k, p] : pi.masses()) j[std::to_string(k)] = p;
    return j;
}

inline DegreeDistribution distribution_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidDistribution, "distribution must be a JSON object");
    std::map<Degree, double> masses;
    for (const auto& [key, value] : j.items()) {
        unsigned long long degree = 0;
        auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), degree);
        if (ec != std::errc{} || ptr != key.data() + key.size() || degree > std::numeric_limits<Degree>::max())
            throw Error(ErrorCode::InvalidDistribution, "degree key '" + key + "' is not a nonnegative integer");
        if (!value.is_number()) throw Error(ErrorCode::InvalidDistribution, "mass for degree " + key + " is not a number");
        masses[static_cast<Degree>(degree)] += value.get<double>();
    }
    return DegreeDistribution(std::move(masses));
}

inline json to_json(const DegreeSequence& d) { return json(std::vector<Degree>(d.degrees().begin(), d.degrees().end())); }

inline DegreeSequence degrees_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "degrees must be a JSON array");
    std::vector<std::int64_t> raw;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw Error(ErrorCode::InvalidArgument, "degrees must be integers");
        raw.push_back(x.get<std::int64_t>());
    }
    return validate(raw);
}

/// Either a JSON array or newline/whitespace-delimited integers.
inline DegreeSequence parse_degrees(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            return degrees_from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::InvalidArgument, std::string("degree list: ") + e.what());
        }
    }
    std::istringstream in(text);
    std::vector<std::int64_t> raw;
    std::string token;
    while (in >> token) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw Error(ErrorCode::InvalidArgument, "'" + token + "' is not an integer degree");
        raw.push_back(v);
    }
    return validate(raw);
}

// --- configurations --------------------------------------------------------

inline json to_json(const Configuration& g) {
    json pairs = json::array();
    for (auto [a, b] : g.pairs()) pairs.push_back({a + 1, b + 1});
    return {{"degrees", to_json(g.degrees())}, {"pairs", pairs}};
}

inline Configuration configuration_from_json(const json& j) {
    if (!j.is_object() || !j.contains("degrees") || !j.contains("pairs"))
        throw Error(ErrorCode::InvalidConfiguration, "configuration needs 'degrees' and 'pairs'");
    const DegreeSequence d = degrees_from_json(j.at("degrees"));
    std::vector<std::pair<Ball, Ball>> pairs;
    for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
            throw Error(ErrorCode::InvalidConfiguration, "each pair must be [b1, b2]");
        const auto a = p[0].get<std::int64_t>(), b = p[1].get<std::int64_t>();
        if (a < 1 || b < 1 || static_cast<std::uint64_t>(a) > d.total() || static_cast<std::uint64_t>(b) > d.total())
            throw Error(ErrorCode::InvalidConfiguration, "ball label out of range");
        pairs.emplace_back(static_cast<Ball>(a - 1), static_cast<Ball>(b - 1));
    }
    if (pairs.size() * 2 != d.total())
        throw Error(ErrorCode::InvalidConfiguration, "pairs do not cover every ball exactly once");
    return Configuration::from_pairs(d, pairs);
}

// --- exploration and statistics --------------------------------------------

inline json to_json(const TruncatedComponent& t) {
    json colours = json::array(), edges = json::array();
    for (Colour c : t.colours) colours.push_back(c + 1);
    for (const auto& e : t.edges) edges.push_back({e.a + 1, e.b + 1});
    return {{"root", t.root + 1}, {"colours", colours}, {"edges", edges}, {"unpaired", t.unpaired_count}};
}

inline json to_json(const ComponentPartition& p) {
    return {{"sizes", p.sizes}, {"largest", p.largest}, {"outside_largest", p.outside_largest()}};
}

/// {"statistic": name, "ell": ..., "k": ...}
inline LocalStatistic statistic_from_json(const json& j, std::size_t default_ell = 12) {
    const std::string name = get_or<std::string>(j, "statistic", "small_component_indicator");
    const auto ell = get_or<std::size_t>(j, "ell", default_ell);
    const auto k = get_or<Degree>(j, "k", 1);
    return make_statistic(name, ell, k);
}

inline json to_json(const StatisticSummary& s) {
    json j{{"value", s.value}, {"per_vertex", s.per_vertex}};
    if (s.mean_hint) j["mean_hint"] = *s.mean_hint;
    if (s.variance_hint) j["variance_hint"] = *s.variance_hint;
    return j;
}

inline json colours_to_json(std::span<const Colour> cs) {
    json out = json::array();
    for (Colour c : cs) out.push_back(c + 1);
    return out;
}

inline json to_json(const CouplingRecord& r) {
    return {{"vertex", r.vertex + 1}, {"explored", colours_to_json(r.explored)}, {"touched", colours_to_json(r.touched)},
            {"internal_pairs", r.internal_pairs},           {"boundary", r.boundary},         {"root_value", r.root_value},
            {"u", r.u},               {"u_prime", r.u_prime},           {"w", r.w},
            {"w_prime", r.w_prime},   {"weight", r.weight},             {"delta", r.delta},
            {"affected", r.affected}, {"on_event_A", r.few_internal_pairs}};
}

// --- bounds and conditions ---------------------------------------------------

inline json to_json(const WassersteinBound& b) {
    return {{"value", b.value},
            {"cubic_term", b.cubic_term},
            {"quadratic_term", b.quadratic_term},
            {"preconditions_met", b.preconditions_met},
            {"violated", b.violated}};
}

inline json to_json(const ConditionReport& r) {
    json fam = json::array();
    for (const auto& f : r.family)
        fam.push_back({{"n", f.n},
                       {"d_max", f.d_max},
                       {"tv_degree", f.tv_degree},
                       {"tv_size_bias", f.tv_size_bias},
                       {"mean_diff", f.mean_diff},
                       {"third_moment_rel_diff", f.third_moment_rel_diff}});
    json j{{"mean_size_bias", r.mean_size_bias},
           {"threshold_margin", r.threshold_margin},
           {"pi1", r.pi1},
           {"third_moment", r.third_moment},
           {"tv_to_limit", r.tv_to_limit},
           {"tv_size_bias_to_limit", r.tv_size_bias_to_limit},
           {"d_max_exponent", r.d_max_exponent},
           {"family", fam},
           {"verdicts", r.verdicts},
           {"all_hold", r.all_hold()}};
    j["tv_decay_exponent"] = r.tv_decay_exponent ? json(*r.tv_decay_exponent) : json(nullptr);
    j["mean_decay_exponent"] = r.mean_decay_exponent ? json(*r.mean_decay_exponent) : json(nullptr);
    return j;
}

// --- experiments --------------------------------------------------------------

inline ExperimentMode mode_from_string(const std::string& s) {
    if (s == "statistic") return ExperimentMode::Statistic;
    if (s == "giant_component") return ExperimentMode::GiantComponent;
    throw Error(ErrorCode::InvalidArgument, "mode must be 'statistic' or 'giant_component', got '" + s + "'");
}

inline std::string to_string(ExperimentMode m) {
    return m == ExperimentMode::Statistic ? "statistic" : "giant_component";
}

/// Experiment settings are read from the "mc" section when present, else
/// from the top level; graph and statistic fields live at the top level.
inline ExperimentConfig experiment_from_json(const json& root) {
    const json& mc = root.contains("mc") ? root.at("mc") : root;
    ExperimentConfig cfg;
    if (root.contains("distribution")) cfg.distribution = distribution_from_json(root.at("distribution"));
    if (root.contains("degrees")) cfg.degrees = degrees_from_json(root.at("degrees"));
    cfg.n_grid = get_or<std::vector<std::size_t>>(mc, "n_grid", {});
    if (mc.contains("ell") && !mc.at("ell").is_null()) cfg.ell = mc.at("ell").get<std::size_t>();
    else if (root.contains("ell") && !root.at("ell").is_null()) cfg.ell = root.at("ell").get<std::size_t>();
    cfg.delta = get_or<double>(mc, "delta", cfg.delta);
    cfg.statistic = get_or<std::string>(root, "statistic", cfg.statistic);
    cfg.k = get_or<Degree>(root, "k", cfg.k);
    cfg.cap = get_or<Degree>(root, "cap", cfg.cap);
    cfg.replications = get_or<std::size_t>(mc, "replications", cfg.replications);
    cfg.mode = mode_from_string(get_or<std::string>(mc, "mode", to_string(cfg.mode)));
    cfg.resample_degrees = get_or<bool>(mc, "resample_degrees", cfg.resample_degrees);
    cfg.compute_bound = get_or<bool>(mc, "compute_bound", cfg.compute_bound);
    cfg.master_seed = get_or<Seed>(root, "seed", cfg.master_seed);
    cfg.validate();
    return cfg;
}

inline json to_json(const AndersonDarling& a) {
    return {{"statistic", a.statistic}, {"adjusted_statistic", a.adjusted_statistic}, {"p_value", a.p_value}};
}

inline json to_json(const PerNResult& p) {
    json j{{"n", p.n},
           {"m", p.m},
           {"d_max", p.d_max},
           {"ell", p.ell},
           {"mean_U", p.mean_u},
           {"var_U", p.var_u},
           {"var_over_n", p.var_over_n},
           {"var_over_n_se", p.var_over_n_se},
           {"wasserstein", p.wasserstein},
           {"anderson_darling", to_json(p.anderson_darling)},
           {"samples", p.samples}};
    j["bound_value"] = p.bound ? json(p.bound->value) : json(nullptr);
    if (p.bound) j["wasserstein_bound"] = to_json(*p.bound);
    if (p.s_ne_u_frequency) j["s_ne_u_frequency"] = *p.s_ne_u_frequency;
    if (p.threshold_margin) j["threshold_margin"] = *p.threshold_margin;
    return j;
}

inline json to_json(const ExperimentResult& r) {
    json per_n = json::array();
    for (const auto& p : r.per_n) per_n.push_back(to_json(p));
    return {{"per_n", per_n}};
}

/// Shortest round-trip decimal form.
inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

/// n,replication,raw_value,standardized_value
inline void write_samples_csv(std::ostream& os, const ExperimentResult& r) {
    os << "n,replication,raw_value,standardized_value\n";
    for (const auto& p : r.per_n)
        for (std::size_t i = 0; i < p.raw.size(); ++i)
            os << p.n << ',' << i << ',' << format_double(p.raw[i]) << ',' << format_double(p.samples[i]) << '\n';
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, what + ": " + e.what());
    }
}

} // namespace cmstein::io
