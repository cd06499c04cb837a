#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmstein/error.hpp"
#include "cmstein/rng.hpp"

namespace cmstein {

using Degree = std::uint32_t;

/// Vertex degrees d_1..d_n with even total m. Immutable.
class DegreeSequence {
public:
    explicit DegreeSequence(std::vector<Degree> degrees) : degrees_(std::move(degrees)) {
        if (degrees_.empty()) throw Error(ErrorCode::EmptySequence, "degree sequence has no vertices");
        for (Degree d : degrees_) {
            total_ += d;
            max_ = std::max(max_, d);
        }
        if (total_ % 2 != 0)
            throw Error(ErrorCode::OddTotalDegree,
                        "total degree " + std::to_string(total_) + " is odd; no perfect matching exists");
    }

    std::size_t size() const { return degrees_.size(); }
    std::uint64_t total() const { return total_; }
    Degree max_degree() const { return max_; }
    Degree operator[](std::size_t v) const { return degrees_[v]; }
    std::span<const Degree> degrees() const { return degrees_; }

    friend bool operator==(const DegreeSequence&, const DegreeSequence&) = default;

private:
    std::vector<Degree> degrees_;
    std::uint64_t total_ = 0;
    Degree max_ = 0;
};

/// Checked construction from possibly negative input (e.g. parsed JSON).
inline DegreeSequence validate(std::span<const std::int64_t> degrees) {
    std::vector<Degree> out;
    out.reserve(degrees.size());
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (degrees[i] < 0)
            throw Error(ErrorCode::NegativeDegree, "vertex " + std::to_string(i + 1) + " has negative degree");
        if (degrees[i] > std::numeric_limits<Degree>::max())
            throw Error(ErrorCode::InvalidArgument, "degree too large at vertex " + std::to_string(i + 1));
        out.push_back(static_cast<Degree>(degrees[i]));
    }
    return DegreeSequence(std::move(out));
}

/// Finite-support probability distribution on the nonnegative integers.
/// Zero masses are dropped; masses are renormalised to sum to one.
class DegreeDistribution {
public:
    static constexpr double kMassTolerance = 1e-9;

    DegreeDistribution() = default;

    explicit DegreeDistribution(std::map<Degree, double> masses) {
        double sum = 0.0;
        for (const auto& [j, p] : masses) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw Error(ErrorCode::InvalidDistribution, "mass at degree " + std::to_string(j) + " is not a nonnegative number");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kMassTolerance)
            throw Error(ErrorCode::InvalidDistribution, "masses sum to " + std::to_string(sum) + ", expected 1");
        for (const auto& [j, p] : masses)
            if (p > 0.0) masses_.emplace(j, p / sum);
    }

    DegreeDistribution(std::initializer_list<std::pair<const Degree, double>> init)
        : DegreeDistribution(std::map<Degree, double>(init)) {}

    const std::map<Degree, double>& masses() const { return masses_; }

    double operator[](Degree j) const {
        auto it = masses_.find(j);
        return it == masses_.end() ? 0.0 : it->second;
    }

    Degree max_support() const { return masses_.empty() ? 0 : masses_.rbegin()->first; }

private:
    std::map<Degree, double> masses_;
};

/// Σ_j j^k π_j.
inline double moment(const DegreeDistribution& pi, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 1");
    double acc = 0.0;
    for (const auto& [j, p] : pi.masses()) acc += std::pow(static_cast<double>(j), k) * p;
    return acc;
}

inline double mean(const DegreeDistribution& pi) { return moment(pi, 1); }

inline DegreeDistribution empirical_distribution(const DegreeSequence& d) {
    std::map<Degree, std::size_t> counts;
    for (Degree x : d.degrees()) ++counts[x];
    std::map<Degree, double> masses;
    const double n = static_cast<double>(d.size());
    for (const auto& [j, c] : counts) masses.emplace(j, static_cast<double>(c) / n);
    return DegreeDistribution(std::move(masses));
}

/// P[D* = j] = j π_j / E D.
inline DegreeDistribution size_bias(const DegreeDistribution& pi) {
    const double ed = mean(pi);
    if (!(ed > 0.0)) throw Error(ErrorCode::ZeroMeanDegree, "size-biasing needs E D > 0");
    std::map<Degree, double> masses;
    for (const auto& [j, p] : pi.masses())
        if (j > 0) masses.emplace(j, static_cast<double>(j) * p / ed);
    return DegreeDistribution(std::move(masses));
}

/// E D* - 2 with E D* = E D² / E D. Positive exactly in the supercritical
/// (Molloy-Reed) regime.
inline double threshold_margin(const DegreeDistribution& pi) {
    const double ed = mean(pi);
    if (!(ed > 0.0)) throw Error(ErrorCode::ZeroMeanDegree, "threshold margin needs E D > 0");
    return moment(pi, 2) / ed - 2.0;
}

inline double tv_distance(const DegreeDistribution& p, const DegreeDistribution& q) {
    double acc = 0.0;
    auto a = p.masses().begin(), ae = p.masses().end();
    auto b = q.masses().begin(), be = q.masses().end();
    while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
            acc += a->second;
            ++a;
        } else if (a == ae || b->first < a->first) {
            acc += b->second;
            ++b;
        } else {
            acc += std::abs(a->second - b->second);
            ++a;
            ++b;
        }
    }
    return std::min(1.0, 0.5 * acc);
}

/// n i.i.d. draws from pi clamped to cap. An odd total is repaired by
/// incrementing the last nonzero degree.
inline DegreeSequence sample_degree_sequence(const DegreeDistribution& pi, std::size_t n, Degree cap,
                                             RandomStream& rng) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two vertices");
    if (cap < 1) throw Error(ErrorCode::InvalidArgument, "degree cap must be >= 1");
    if (pi.masses().empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");

    std::vector<std::pair<double, Degree>> cdf;
    double acc = 0.0;
    for (const auto& [j, p] : pi.masses()) {
        acc += p;
        cdf.emplace_back(acc, j);
    }
    cdf.back().first = 1.0;

    std::vector<Degree> degrees(n);
    std::uint64_t total = 0;
    for (auto& x : degrees) {
        const double u = rng.uniform01();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u,
                                   [](double value, const auto& entry) { return value < entry.first; });
        if (it == cdf.end()) --it;
        x = std::min(it->second, cap);
        total += x;
    }
    if (total % 2 != 0) {
        auto last = std::find_if(degrees.rbegin(), degrees.rend(), [](Degree x) { return x > 0; });
        ++*last;
    }
    return DegreeSequence(std::move(degrees));
}

inline DegreeSequence sample_degree_sequence(const DegreeDistribution& pi, std::size_t n, Degree cap, Seed seed) {
    RandomStream rng(seed, {tag(StreamTag::DegreeSequence), n});
    return sample_degree_sequence(pi, n, cap, rng);
}

// ---------------------------------------------------------------------------
// Condition checker for the giant-component variance asymptotics.

struct FamilyDiagnostics {
    std::size_t n = 0;
    Degree d_max = 0;
    double tv_degree = 0.0;          // d_TV(D_n, D)
    double tv_size_bias = 0.0;       // d_TV(D*_n, D*)
    double mean_diff = 0.0;          // |E D_n - E D|
    double third_moment_rel_diff = 0.0;
};

struct ConditionReport {
    static constexpr double kFinalTvTolerance = 0.02;
    static constexpr double kThirdMomentTolerance = 0.05;
    static constexpr double kDmaxSlopeLimit = 0.25 - 0.01;

    double mean_size_bias = 0.0;
    double threshold_margin = 0.0;
    double pi1 = 0.0;
    double third_moment = 0.0;
    double tv_to_limit = 0.0;               // degree TV of the largest member
    double tv_size_bias_to_limit = 0.0;
    std::optional<double> tv_decay_exponent;    // fitted decay of d_TV(D*_n, D*)
    std::optional<double> mean_decay_exponent;  // fitted decay of |E D_n - E D|
    double d_max_exponent = 0.0;            // fitted log-log slope of d_max vs n
    std::vector<FamilyDiagnostics> family;
    // supercritical, has leaves, finite third moment, degree law converges,
    // third moment converges, size-biased law converges, d_max grows slowly
    std::array<bool, 7> verdicts{};

    bool all_hold() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](bool b) { return b; });
    }
};

namespace detail {

/// Least-squares slope of log(y) on log(x) over points with y > 0.
inline std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = 0;
    for (auto [x, y] : pts) {
        if (!(x > 0) || !(y > 0)) continue;
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
    }
    if (k < 2) return std::nullopt;
    const double denom = static_cast<double>(k) * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (static_cast<double>(k) * sxy - sx * sy) / denom;
}

template <class F>
bool non_increasing(const std::vector<FamilyDiagnostics>& fam, F field) {
    for (std::size_t i = 1; i < fam.size(); ++i)
        if (field(fam[i]) > field(fam[i - 1])) return false;
    return true;
}

} // namespace detail

/// Numeric diagnostics for the seven hypotheses on (pi, d^(n)). Never
/// throws on a violated condition; only on malformed input.
inline ConditionReport check_conditions(const DegreeDistribution& pi, std::vector<DegreeSequence> family) {
    if (family.size() < 2)
        throw Error(ErrorCode::PreconditionViolated, "condition check needs at least two family members");
    std::sort(family.begin(), family.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });

    ConditionReport r;
    const double ed = mean(pi);
    if (!(ed > 0.0)) throw Error(ErrorCode::ZeroMeanDegree, "limit distribution has zero mean");
    r.mean_size_bias = moment(pi, 2) / ed;
    r.threshold_margin = r.mean_size_bias - 2.0;
    r.pi1 = pi[1];
    r.third_moment = moment(pi, 3);
    const DegreeDistribution pi_star = size_bias(pi);

    std::vector<std::pair<double, double>> tv_pts, mean_pts, dmax_pts;
    for (const auto& d : family) {
        FamilyDiagnostics f;
        f.n = d.size();
        f.d_max = d.max_degree();
        const DegreeDistribution emp = empirical_distribution(d);
        f.tv_degree = tv_distance(emp, pi);
        f.tv_size_bias = mean(emp) > 0.0 ? tv_distance(size_bias(emp), pi_star) : 1.0;
        f.mean_diff = std::abs(mean(emp) - ed);
        f.third_moment_rel_diff = std::abs(moment(emp, 3) - r.third_moment) / r.third_moment;
        const double n = static_cast<double>(f.n);
        tv_pts.emplace_back(n, f.tv_size_bias);
        mean_pts.emplace_back(n, f.mean_diff);
        dmax_pts.emplace_back(n, std::max<double>(f.d_max, 1.0));
        r.family.push_back(f);
    }
    const FamilyDiagnostics& last = r.family.back();
    r.tv_to_limit = last.tv_degree;
    r.tv_size_bias_to_limit = last.tv_size_bias;
    if (auto s = detail::loglog_slope(tv_pts)) r.tv_decay_exponent = -*s;
    if (auto s = detail::loglog_slope(mean_pts)) r.mean_decay_exponent = -*s;
    r.d_max_exponent = detail::loglog_slope(dmax_pts).value_or(0.0);

    r.verdicts[0] = r.threshold_margin > 0.0;
    r.verdicts[1] = r.pi1 > 0.0;
    r.verdicts[2] = std::isfinite(r.third_moment);
    r.verdicts[3] = detail::non_increasing(r.family, [](const auto& f) { return f.tv_degree; }) &&
                    last.tv_degree < ConditionReport::kFinalTvTolerance;
    r.verdicts[4] = last.third_moment_rel_diff < ConditionReport::kThirdMomentTolerance;
    r.verdicts[5] = detail::non_increasing(r.family, [](const auto& f) { return f.tv_size_bias; }) &&
                    last.tv_size_bias < ConditionReport::kFinalTvTolerance;
    r.verdicts[6] = r.d_max_exponent < ConditionReport::kDmaxSlopeLimit;
    return r;
}

} // namespace cmstein
