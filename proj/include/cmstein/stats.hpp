#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmstein/config.hpp"
#include "cmstein/error.hpp"
#include "cmstein/explore.hpp"

namespace cmstein {

/// A bounded function of a truncated component. evaluate must depend only
/// on what the exploration revealed within ell colours.
struct LocalStatistic {
    std::string name;
    std::size_t ell = 1;
    double sup_norm = 1.0;
    std::function<double(const TruncatedComponent&)> evaluate;
};

/// 1 if the component of the root has at most ell vertices.
inline LocalStatistic small_component_indicator(std::size_t ell) {
    return {"small_component_indicator", ell, 1.0,
            [](const TruncatedComponent& t) { return t.truncated ? 0.0 : 1.0; }};
}

/// 1 if the root has degree k.
inline LocalStatistic degree_indicator(Degree k) {
    return {"degree_indicator", 1, 1.0,
            [k](const TruncatedComponent& t) { return t.root_degree() == k ? 1.0 : 0.0; }};
}

/// Number of explored colours, at most ell.
inline LocalStatistic capped_component_size(std::size_t ell) {
    return {"capped_component_size", ell, static_cast<double>(ell),
            [](const TruncatedComponent& t) { return static_cast<double>(t.size()); }};
}

/// Look up a built-in statistic by name. k is only used by degree_indicator.
inline LocalStatistic make_statistic(const std::string& name, std::size_t ell, Degree k = 0) {
    if (name == "small_component_indicator") return small_component_indicator(ell);
    if (name == "degree_indicator") return degree_indicator(k);
    if (name == "capped_component_size") return capped_component_size(ell);
    throw Error(ErrorCode::UnknownStatistic, "unknown statistic '" + name + "'");
}

struct StatisticSummary {
    double value = 0.0;
    std::vector<double> per_vertex;   // h at each root
    std::optional<double> mean_hint;
    std::optional<double> variance_hint;
    /// colour c -> roots w (ascending) whose exploration reached c
    std::vector<std::vector<Colour>> inverted_index;
};

inline double checked_value(const LocalStatistic& h, const TruncatedComponent& t) {
    const double x = h.evaluate(t);
    if (!(std::abs(x) <= h.sup_norm))
        throw Error(ErrorCode::StatisticOutOfBound, h.name + " returned " + std::to_string(x) +
                                                        " above its declared bound " + std::to_string(h.sup_norm));
    return x;
}

/// Sum of h over all roots, plus the colour -> explorer index.
inline StatisticSummary evaluate_statistic(const Configuration& g, const LocalStatistic& h) {
    if (h.ell < 1) throw Error(ErrorCode::InvalidArgument, "statistic locality must be >= 1");
    const std::size_t n = g.num_colours();
    StatisticSummary s;
    s.per_vertex.resize(n);
    s.inverted_index.resize(n);
    Explorer explorer(g);
    TruncatedComponent t;
    for (Colour v = 0; v < n; ++v) {
        explorer.explore_into(v, h.ell, t);
        s.per_vertex[v] = checked_value(h, t);
        for (Colour c : t.colours) s.inverted_index[c].push_back(v);
    }
    for (double x : s.per_vertex) s.value += x;
    return s;
}

/// Vertices whose truncated component meets any colour in `touched`,
/// ascending and without duplicates.
inline std::vector<Colour> affected_vertices(const StatisticSummary& s, std::span<const Colour> touched) {
    std::vector<Colour> out;
    for (Colour c : touched) out.insert(out.end(), s.inverted_index[c].begin(), s.inverted_index[c].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace cmstein
