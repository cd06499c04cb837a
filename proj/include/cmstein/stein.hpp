#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cmstein/config.hpp"
#include "cmstein/error.hpp"
#include "cmstein/explore.hpp"
#include "cmstein/parallel.hpp"
#include "cmstein/rng.hpp"
#include "cmstein/stats.hpp"

namespace cmstein {

/// A rebuild is flagged when it re-inserts at most ell + kInternalPairSlack pairs.
inline constexpr std::size_t kInternalPairSlack = 6;

/// A configuration rebuilt around the truncated component of one root.
struct Rebuild {
    Configuration config;
    std::vector<Colour> explored;            // in exploration order
    std::vector<Colour> touched;             // explored, then colours of split pairs by first use
    std::size_t internal_pairs = 0;          // pairs re-inserted
    std::size_t boundary = 0;                // unpaired balls of the exploration
    std::uint64_t explored_degree_sum = 0;
    std::size_t heads = 0;                   // insertions that kept the pair together
    bool few_internal_pairs = false;         // internal_pairs <= ell + kInternalPairSlack
};

/// Removes the internal pairs of the explored colours from g (boundary
/// balls keep their partners) and re-inserts them one pair at a time, in
/// order of smallest ball label. With m_k = m - 2(K - k) balls present after
/// the k-th insertion the pair stays together with probability 1/(m_k - 1);
/// otherwise a uniform present ball I and its partner J are split and the
/// inserted balls are matched to I and J.
///
/// The result is uniform and independent of the exploration when the
/// component is closed (no boundary balls). With two or more boundary
/// balls it is not exactly uniform: those balls never start out paired
/// with each other.
inline Rebuild rebuild_independent(const Configuration& g, Colour v, std::size_t ell, RandomStream& rng) {
    const std::size_t n = g.num_colours();
    const std::size_t m = g.num_balls();
    Explorer explorer(g);
    const TruncatedComponent t = explorer.explore(v, ell);

    Rebuild r{g, t.colours, t.colours, 0, t.unpaired_count, 0, 0, false};

    std::vector<std::pair<Ball, Ball>> internal;
    for (Colour c : t.colours) {
        r.explored_degree_sum += g.degree(c);
        for (Ball b = g.first_ball(c); b < g.end_ball(c); ++b) {
            const Ball p = g.partner(b);
            if (b < p && explorer.in_last(g.colour_of(p))) internal.emplace_back(b, p);
        }
    }
    std::sort(internal.begin(), internal.end());
    r.internal_pairs = internal.size();
    r.few_internal_pairs = r.internal_pairs <= ell + kInternalPairSlack;

    std::vector<Ball> partner(g.partners().begin(), g.partners().end());
    std::vector<char> present(m, 1);
    for (auto [a, b] : internal) present[a] = present[b] = 0;

    std::vector<char> seen(n, 0);
    for (Colour c : r.explored) seen[c] = 1;
    auto touch = [&](Ball b) {
        const Colour c = g.colour_of(b);
        if (!seen[c]) {
            seen[c] = 1;
            r.touched.push_back(c);
        }
    };

    const std::size_t k_total = internal.size();
    for (std::size_t k = 1; k <= k_total; ++k) {
        const auto [a, b] = internal[k - 1];
        const std::uint64_t balls_after = m - 2 * (k_total - k);
        const bool heads = rng.uniform_below(balls_after - 1) == 0;
        if (heads) {
            partner[a] = b;
            partner[b] = a;
            ++r.heads;
        } else {
            // balls_after - 1 > 1 here, so at least one pair is present.
            assert(balls_after > 2);
            Ball i;
            do {
                i = static_cast<Ball>(rng.uniform_below(m));
            } while (!present[i]);
            const Ball j = partner[i];
            partner[a] = i;
            partner[i] = a;
            partner[b] = j;
            partner[j] = b;
            touch(i);
            touch(j);
        }
        present[a] = present[b] = 1;
    }
    r.config = Configuration(g.shared_layout(), std::move(partner));
    return r;
}

/// One coupling draw for a root.
struct CouplingRecord {
    Colour vertex = 0;
    std::vector<Colour> explored;
    std::vector<Colour> touched;
    std::size_t internal_pairs = 0;
    std::size_t boundary = 0;
    double root_value = 0.0;  // h at the root
    double u = 0.0;           // statistic on g
    double u_prime = 0.0;     // statistic on the rebuilt configuration
    double w = 0.0;           // standardised u
    double w_prime = 0.0;
    double weight = 0.0;      // -(n / sigma) root_value
    double delta = 0.0;       // w_prime - w
    std::size_t affected = 0;
    bool few_internal_pairs = false;
};

/// Only roots whose exploration in g reached a touched colour can change:
/// every pair that differs between g and the rebuild has both balls in
/// touched colours, so an exploration that avoids them in one
/// configuration sees the same partners, and avoids them, in the other.
inline double coupling_difference(const Rebuild& rb, const LocalStatistic& h, const StatisticSummary& summary,
                                  std::size_t* affected_count = nullptr) {
    const std::vector<Colour> affected = affected_vertices(summary, rb.touched);
    if (affected_count) *affected_count = affected.size();
    Explorer explorer(rb.config);
    TruncatedComponent t;
    double diff = 0.0;
    for (Colour w : affected) {
        explorer.explore_into(w, h.ell, t);
        diff += checked_value(h, t) - summary.per_vertex[w];
    }
    return diff;
}

inline CouplingRecord coupling_draw(const Configuration& g, Colour v, const LocalStatistic& h,
                                    const StatisticSummary& summary, double sigma, RandomStream& rng) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorCode::ZeroVariance, "coupling needs a positive standard deviation");
    if (v >= g.num_colours())
        throw Error(ErrorCode::InvalidVertex, "vertex " + std::to_string(v + 1) + " out of range");

    const Rebuild rb = rebuild_independent(g, v, h.ell, rng);
    CouplingRecord rec;
    rec.vertex = v;
    rec.explored = rb.explored;
    rec.touched = rb.touched;
    rec.internal_pairs = rb.internal_pairs;
    rec.boundary = rb.boundary;
    rec.few_internal_pairs = rb.few_internal_pairs;
    rec.root_value = summary.per_vertex[v];
    rec.u = summary.value;
    rec.u_prime = summary.value + coupling_difference(rb, h, summary, &rec.affected);

    const double mu = summary.mean_hint.value_or(0.0);
    const double n = static_cast<double>(g.num_colours());
    rec.w = (rec.u - mu) / sigma;
    rec.w_prime = (rec.u_prime - mu) / sigma;
    rec.delta = rec.w_prime - rec.w;
    rec.weight = -(n / sigma) * rec.root_value;
    return rec;
}

struct VarianceEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::vector<double> terms;  // -n h(I) (U' - U) for a uniform root I, one per replication
};

/// Variance of the statistic as -n times the mean of h(I) (U' - U), over
/// independent (configuration, root I, rebuild) triples.
inline VarianceEstimate estimate_variance_identity(const DegreeSequence& d, const LocalStatistic& h,
                                                   std::size_t replications, Seed seed,
                                                   std::size_t threads = 1) {
    if (replications < 2) throw Error(ErrorCode::InvalidArgument, "need at least two replications");
    const auto layout = std::make_shared<const BallLayout>(d);
    const double n = static_cast<double>(d.size());
    VarianceEstimate out;
    out.terms.resize(replications);
    parallel_for(replications, threads, [&](std::size_t r) {
        RandomStream config_rng(seed, {tag(StreamTag::Configuration), r});
        const Configuration g = sample_configuration(layout, config_rng);
        RandomStream vertex_rng(seed, {tag(StreamTag::Vertex), r});
        const auto vertex = static_cast<Colour>(vertex_rng.uniform_below(d.size()));
        const StatisticSummary summary = evaluate_statistic(g, h);
        const double x = summary.per_vertex[vertex];
        if (x == 0.0) {
            out.terms[r] = 0.0;
            return;
        }
        RandomStream coupling_rng(seed, {tag(StreamTag::Coupling), r, vertex});
        const Rebuild rb = rebuild_independent(g, vertex, h.ell, coupling_rng);
        out.terms[r] = -n * x * coupling_difference(rb, h, summary);
    });
    double sum = 0.0;
    for (double t : out.terms) sum += t;
    const double k = static_cast<double>(replications);
    out.estimate = sum / k;
    double ss = 0.0;
    for (double t : out.terms) ss += (t - out.estimate) * (t - out.estimate);
    out.std_error = std::sqrt(ss / (k - 1.0) / k);
    if (out.estimate == 0.0) out.estimate = 0.0; // normalise -0
    return out;
}

} // namespace cmstein
