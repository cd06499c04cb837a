#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "cmstein/bounds.hpp"
#include "cmstein/config.hpp"
#include "cmstein/degseq.hpp"
#include "cmstein/error.hpp"
#include "cmstein/explore.hpp"
#include "cmstein/parallel.hpp"
#include "cmstein/rng.hpp"
#include "cmstein/stats.hpp"

namespace cmstein {

// ---------------------------------------------------------------------------
// Distances and normality tests against N(0, 1).

namespace detail {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

/// ∫_{-∞}^x Φ(t) dt = x Φ(x) + φ(x). Evaluating at -x gives ∫_x^∞ (1 - Φ).
inline double integrated_cdf(double x) { return x * std_normal_cdf(x) + std_normal_pdf(x); }

/// ∫_a^b |c - Φ(x)| dx for a <= b, c in [0, 1], Φ(x) - c single-signed.
inline double signed_segment(double a, double b, double c) {
    if (a >= 0.0) {
        // Φ - c = (1 - c) - (1 - Φ); right half uses the upper-tail primitive.
        return std::abs((1.0 - c) * (b - a) - (integrated_cdf(-a) - integrated_cdf(-b)));
    }
    return std::abs((integrated_cdf(b) - integrated_cdf(a)) - c * (b - a));
}

inline double abs_segment(double a, double b, double c) {
    if (b <= a) return 0.0;
    const double split = boost::math::quantile(boost::math::normal_distribution<double>(), c);
    if (split <= a || split >= b) return signed_segment(a, b, c);
    return signed_segment(a, split, c) + signed_segment(split, b, c);
}

} // namespace detail

/// d_W(F̂, N(0,1)) = ∫ |F̂(x) - Φ(x)| dx, exact up to rounding.
inline double wasserstein_to_std_normal(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptySample, "Wasserstein distance of an empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    double total = detail::integrated_cdf(x.front()) + detail::integrated_cdf(-x.back());
    for (std::size_t i = 1; i < n; ++i)
        total += detail::abs_segment(x[i - 1], x[i], static_cast<double>(i) / static_cast<double>(n));
    return total;
}

struct AndersonDarling {
    double statistic = 0.0;           // A²
    double adjusted_statistic = 0.0;  // A²(1 + 0.75/N + 2.25/N²)
    double p_value = 0.0;
};

/// Anderson-Darling normality test with mean and variance estimated from
/// the sample (D'Agostino & Stephens p-value approximation).
inline AndersonDarling anderson_darling_normality(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 3) throw Error(ErrorCode::EmptySample, "Anderson-Darling needs at least three samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double nn = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nn;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (nn - 1.0));
    if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateVariance, "constant sample");

    auto log_cdf = [](double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); };
    auto log_sf = [](double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); };
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = (x[i] - mean) / sd;
        const double zr = (x[n - 1 - i] - mean) / sd;
        acc += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(zi) + log_sf(zr));
    }
    AndersonDarling out;
    out.statistic = -nn - acc / nn;
    const double a = out.statistic * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
    out.adjusted_statistic = a;
    if (a >= 0.6)
        out.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    else if (a >= 0.34)
        out.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    else if (a >= 0.2)
        out.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    else
        out.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    out.p_value = std::clamp(out.p_value, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Sample moments.

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;        // unbiased
    double variance_se = 0.0;     // jackknife (normal-theory for two samples)
};

inline SampleMoments sample_moments(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw Error(ErrorCode::EmptySample, "need at least two samples");
    const double nn = static_cast<double>(n);
    SampleMoments s;
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / nn;
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / (nn - 1.0);
    if (n == 2) {
        s.variance_se = s.variance * std::sqrt(2.0 / (nn - 1.0));
        return s;
    }
    // Leave-one-out variances from centred sums.
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = x[i] - s.mean;
        loo[i] = (ss - nn / (nn - 1.0) * e * e) / (nn - 2.0);
    }
    const double loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / nn;
    double jj = 0.0;
    for (double v : loo) jj += (v - loo_mean) * (v - loo_mean);
    s.variance_se = std::sqrt((nn - 1.0) / nn * jj);
    return s;
}

// ---------------------------------------------------------------------------
// Experiments.

enum class ExperimentMode { Statistic, GiantComponent };

struct ExperimentConfig {
    std::optional<DegreeDistribution> distribution;
    std::optional<DegreeSequence> degrees;  // explicit d; overrides distribution and n_grid
    std::vector<std::size_t> n_grid;
    std::optional<std::size_t> ell;         // fixed; otherwise max(12, ceil(n^(delta/10)))
    double delta = 1.0;
    std::string statistic = "small_component_indicator";
    Degree k = 1;                           // degree_indicator parameter
    Degree cap = std::numeric_limits<Degree>::max();
    std::size_t replications = 100;
    Seed master_seed = 1;
    ExperimentMode mode = ExperimentMode::GiantComponent;
    bool resample_degrees = false;          // outside the fixed-d model
    bool compute_bound = true;
    std::size_t threads = 1;

    void validate() const {
        if (replications < 2) throw Error(ErrorCode::InvalidArgument, "replications must be >= 2");
        if (!degrees) {
            if (!distribution) throw Error(ErrorCode::InvalidArgument, "need a degree distribution or sequence");
            if (n_grid.empty()) throw Error(ErrorCode::InvalidArgument, "n_grid is empty");
            for (std::size_t i = 1; i < n_grid.size(); ++i)
                if (n_grid[i] <= n_grid[i - 1])
                    throw Error(ErrorCode::InvalidArgument, "n_grid must be strictly increasing");
        }
        if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
        if (ell && *ell < 1) throw Error(ErrorCode::InvalidArgument, "ell must be >= 1");
    }

    std::vector<std::size_t> resolved_grid() const {
        if (degrees) return {degrees->size()};
        return n_grid;
    }

    std::size_t ell_for(std::size_t n) const {
        if (ell) return *ell;
        const double x = std::pow(static_cast<double>(n), delta / 10.0);
        return std::max<std::size_t>(12, static_cast<std::size_t>(std::ceil(x - 1e-9)));
    }
};

struct PerNResult {
    std::size_t n = 0;
    std::uint64_t m = 0;     // of the fixed degree sequence (first replication's if resampled)
    Degree d_max = 0;
    std::size_t ell = 0;
    std::vector<double> raw;        // U, or R_n in giant-component mode
    std::vector<double> samples;    // standardised by sample mean and sd
    double mean_u = 0.0;
    double var_u = 0.0;
    double var_over_n = 0.0;
    double var_over_n_se = 0.0;
    double wasserstein = 0.0;
    AndersonDarling anderson_darling;
    std::optional<WassersteinBound> bound;
    std::optional<double> s_ne_u_frequency;  // giant mode: P̂[S_n != U_n]
    std::optional<double> threshold_margin;  // of the distribution behind d
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<PerNResult> per_n;
};

/// Number of vertices in components of size <= ell. Equals U_n for
/// small_component_indicator(ell), since an exploration has unpaired balls exactly
/// when the component of v has more than ell vertices.
inline std::size_t vertices_in_small_components(const ComponentPartition& p, std::size_t ell) {
    std::size_t total = 0;
    for (std::size_t s : p.sizes)
        if (s <= ell) total += s;
    return total;
}

inline DegreeSequence experiment_degrees(const ExperimentConfig& cfg, std::size_t n, std::optional<std::size_t> rep) {
    if (cfg.degrees) return *cfg.degrees;
    if (rep) {
        RandomStream rng(cfg.master_seed, {tag(StreamTag::DegreeSequence), n, *rep});
        return sample_degree_sequence(*cfg.distribution, n, cfg.cap, rng);
    }
    RandomStream rng(cfg.master_seed, {tag(StreamTag::DegreeSequence), n});
    return sample_degree_sequence(*cfg.distribution, n, cfg.cap, rng);
}

/// Replication r at size n always uses stream (seed, n, r), so results do
/// not depend on the thread count.
inline ExperimentResult run_clt_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result{cfg, {}};
    const bool giant = cfg.mode == ExperimentMode::GiantComponent;

    for (std::size_t n : cfg.resolved_grid()) {
        PerNResult out;
        out.n = n;
        out.ell = cfg.ell_for(n);
        const LocalStatistic h = giant ? small_component_indicator(out.ell)
                                       : make_statistic(cfg.statistic, out.ell, cfg.k);
        const DegreeSequence fixed = experiment_degrees(cfg, n, std::nullopt);
        const auto layout = std::make_shared<const BallLayout>(fixed);
        out.m = fixed.total();
        out.d_max = fixed.max_degree();
        if (cfg.distribution && mean(*cfg.distribution) > 0.0)
            out.threshold_margin = threshold_margin(*cfg.distribution);
        else if (!cfg.distribution)
            out.threshold_margin = threshold_margin(empirical_distribution(fixed));

        out.raw.assign(cfg.replications, 0.0);
        std::vector<char> mismatch(cfg.replications, 0);
        parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            RandomStream rng(cfg.master_seed, {tag(StreamTag::Configuration), n, r});
            const Configuration g =
                cfg.resample_degrees && !cfg.degrees
                    ? sample_configuration(experiment_degrees(cfg, n, r), rng)
                    : sample_configuration(layout, rng);
            if (giant) {
                const ComponentPartition p = components(g);
                out.raw[r] = static_cast<double>(p.largest);
                mismatch[r] = p.outside_largest() != vertices_in_small_components(p, out.ell);
            } else {
                out.raw[r] = evaluate_statistic(g, h).value;
            }
        });

        const SampleMoments mom = sample_moments(out.raw);
        if (!(mom.variance > 0.0))
            throw Error(ErrorCode::DegenerateVariance,
                        "sample variance is zero at n=" + std::to_string(n) + "; the statistic is constant");
        out.mean_u = mom.mean;
        out.var_u = mom.variance;
        out.var_over_n = mom.variance / static_cast<double>(n);
        out.var_over_n_se = mom.variance_se / static_cast<double>(n);
        const double sd = std::sqrt(mom.variance);
        out.samples.resize(out.raw.size());
        for (std::size_t r = 0; r < out.raw.size(); ++r) out.samples[r] = (out.raw[r] - mom.mean) / sd;
        out.wasserstein = wasserstein_to_std_normal(out.samples);
        if (out.samples.size() >= 3) out.anderson_darling = anderson_darling_normality(out.raw);
        if (giant) {
            const auto bad = std::count(mismatch.begin(), mismatch.end(), 1);
            out.s_ne_u_frequency = static_cast<double>(bad) / static_cast<double>(cfg.replications);
        }
        if (cfg.compute_bound)
            out.bound = wasserstein_bound({h.sup_norm, out.d_max, out.ell, n, out.m, sd});
        result.per_n.push_back(std::move(out));
    }
    return result;
}

struct VarianceScalingPoint {
    std::size_t n = 0;
    double var_over_n = 0.0;
    double std_error = 0.0;
    bool supercritical = false;  // threshold margin > 0
};

inline std::vector<VarianceScalingPoint> variance_scaling(const ExperimentResult& result) {
    std::vector<VarianceScalingPoint> out;
    for (const auto& p : result.per_n)
        out.push_back({p.n, p.var_over_n, p.var_over_n_se, p.threshold_margin.value_or(0.0) > 0.0});
    return out;
}

/// Var R_n / n per n with jackknife errors; reports rather than rejects
/// subcritical or critical inputs.
inline std::vector<VarianceScalingPoint> variance_scaling_study(const ExperimentConfig& cfg) {
    if (cfg.mode != ExperimentMode::GiantComponent)
        throw Error(ErrorCode::InvalidArgument, "variance scaling study runs in giant_component mode");
    return variance_scaling(run_clt_experiment(cfg));
}

/// U over independent configurations on a fixed d; the direct-variance
/// reference for the coupling estimator.
inline std::vector<double> sample_statistic_values(const DegreeSequence& d, const LocalStatistic& h,
                                                   std::size_t replications, Seed seed, std::size_t threads = 1) {
    const auto layout = std::make_shared<const BallLayout>(d);
    std::vector<double> out(replications);
    parallel_for(replications, threads, [&](std::size_t r) {
        RandomStream rng(seed, {tag(StreamTag::Configuration), d.size(), r});
        out[r] = evaluate_statistic(sample_configuration(layout, rng), h).value;
    });
    return out;
}

} // namespace cmstein
