#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cmstein/error.hpp"

namespace cmstein {

struct BoundInputs {
    double sup_norm = 1.0;   // ‖h‖
    std::uint64_t d_max = 2;
    std::uint64_t ell = 12;
    std::uint64_t n = 1;
    std::uint64_t m = 1;
    double sigma = 1.0;      // standard deviation of the statistic
};

struct WassersteinBound {
    double value = 0.0;
    double cubic_term = 0.0;      // ‖h‖³ d_max² ell¹⁰ n / (4536 sigma³)
    double quadratic_term = 0.0;  // ‖h‖² d_max² ell⁸ √n / (78 sigma²)
    bool preconditions_met = false;
    std::vector<std::string> violated;
};

namespace detail {

/// x⁴ <= n without floating point; x⁴ overflowing 128 bits counts as larger.
inline bool fourth_power_at_most(std::uint64_t x, std::uint64_t n) {
    if (x > (1ULL << 32)) return false;
    const unsigned __int128 sq = static_cast<unsigned __int128>(x) * x;
    return sq * sq <= n;
}

inline double log_u(std::uint64_t x) { return std::log(static_cast<double>(x)); }

} // namespace detail

/// Wasserstein bound for the standardised local statistic. Hypothesis
/// violations are reported, never thrown.
inline WassersteinBound wasserstein_bound(const BoundInputs& in) {
    WassersteinBound out;
    if (in.d_max < 2) out.violated.emplace_back("d_max >= 2");
    if (!detail::fourth_power_at_most(in.d_max, in.n)) out.violated.emplace_back("d_max <= n^(1/4)");
    if (in.ell < 12) out.violated.emplace_back("ell >= 12");
    if (!detail::fourth_power_at_most(in.ell, in.n)) out.violated.emplace_back("ell <= n^(1/4)");
    if (in.m < in.n) out.violated.emplace_back("m >= n");
    const unsigned __int128 rhs = static_cast<unsigned __int128>(7) * in.d_max * in.d_max * in.ell;
    if (static_cast<unsigned __int128>(in.m) < rhs) out.violated.emplace_back("m >= 7 d_max^2 ell");
    out.preconditions_met = out.violated.empty();

    if (!(in.sigma > 0.0) || !(in.sup_norm >= 0.0)) {
        out.value = out.cubic_term = out.quadratic_term = std::numeric_limits<double>::infinity();
        if (!(in.sigma > 0.0)) out.violated.emplace_back("sigma > 0");
        out.preconditions_met = false;
        return out;
    }
    if (in.sup_norm == 0.0) return out;

    using detail::log_u;
    const double ls = std::log(in.sigma), lh = std::log(in.sup_norm);
    const double ld = log_u(in.d_max), ll = log_u(in.ell), ln = log_u(in.n);
    out.cubic_term = std::exp(3 * lh + 2 * ld + 10 * ll + ln - std::log(4536.0) - 3 * ls);
    out.quadratic_term = std::exp(2 * lh + 2 * ld + 8 * ll + 0.5 * ln - std::log(78.0) - 2 * ls);
    out.value = out.cubic_term + out.quadratic_term;
    return out;
}

struct TailBound {
    double single = 0.0;  // one root has >= ell+k-1 internal pairs: d_max^{2k} ell^{2k} / (k! m^k)
    double union_ = 0.0;  // some root does: d_max^{2k} ell^{2k} / (k! m^{k-1})
};

/// Raw bounds evaluated in the log domain; not clamped to [0, 1].
inline TailBound internal_pair_tail_bound(std::uint64_t d_max, std::uint64_t ell, std::uint64_t m, std::uint64_t k,
                               std::uint64_t n) {
    if (k < 1) throw Error(ErrorCode::PreconditionViolated, "k >= 1");
    if (m < 8 * std::max(k, ell)) throw Error(ErrorCode::PreconditionViolated, "m >= 8 max(k, ell)");
    if (m < n) throw Error(ErrorCode::PreconditionViolated, "m >= n");
    using detail::log_u;
    const double kk = static_cast<double>(k);
    const double numer = 2 * kk * (log_u(d_max) + log_u(ell)) - std::lgamma(kk + 1.0);
    return {std::exp(numer - kk * log_u(m)), std::exp(numer - (kk - 1) * log_u(m))};
}

/// P[some root has >= ell+7 internal pairs] <= d_max¹⁶ ell¹⁶ / (8! m⁷), the k = 8 union bound.
inline double any_vertex_tail_bound(std::uint64_t d_max, std::uint64_t ell, std::uint64_t m, std::uint64_t n) {
    return internal_pair_tail_bound(d_max, ell, m, 8, n).union_;
}

/// Right-hand sides of the four intersection inequalities for a colour set
/// of size alpha_size.
struct IntersectionBounds {
    // I is 1 when the root lies in the set, a = set size
    double explored_hits;     // P[explored meets set] <= I + 2 d_max a (ell-1) / m
    double explored_overlap;  // E|explored ∩ set| <= ell I + 2 d_max a (ell-1) / m
    double touched_hits;      // same for touched colours, few internal pairs: I + 2 d_max a (3 ell+11) / m
    double touched_overlap;   // (3 ell+12) I + 2 d_max a (3 ell+11) / m
};

inline IntersectionBounds intersection_bounds(std::uint64_t alpha_size, bool v_in_alpha, std::uint64_t d_max,
                                              std::uint64_t ell, std::uint64_t m) {
    if (m < 2 * d_max * (alpha_size + ell))
        throw Error(ErrorCode::PreconditionViolated, "m >= 2 d_max (|alpha| + ell)");
    const double ind = v_in_alpha ? 1.0 : 0.0;
    const double base = 2.0 * static_cast<double>(d_max) * static_cast<double>(alpha_size) / static_cast<double>(m);
    const double l = static_cast<double>(ell);
    return {ind + base * (l - 1), l * ind + base * (l - 1), ind + base * (3 * l + 11),
            (3 * l + 12) * ind + base * (3 * l + 11)};
}

/// Sums of the intersection bounds over all v: the intermediate expression
/// and the simplified d_max ell |set| multiple for each of the four inequalities.
struct AggregateIntersectionBounds {
    IntersectionBounds sums;
    IntersectionBounds simplified;  // 2, 3, 8, 10 times |set| d_max ell
};

inline AggregateIntersectionBounds summed_intersection_bounds(std::uint64_t alpha_size, std::uint64_t d_max,
                                                    std::uint64_t ell, std::uint64_t m, std::uint64_t n) {
    if (d_max < 2) throw Error(ErrorCode::PreconditionViolated, "d_max >= 2");
    if (ell < 12) throw Error(ErrorCode::PreconditionViolated, "ell >= 12");
    if (m < n) throw Error(ErrorCode::PreconditionViolated, "m >= n");
    if (m < 2 * d_max * (alpha_size + ell))
        throw Error(ErrorCode::PreconditionViolated, "m >= 2 d_max (|alpha| + ell)");
    const double a = static_cast<double>(alpha_size), d = static_cast<double>(d_max);
    const double l = static_cast<double>(ell), nn = static_cast<double>(n), mm = static_cast<double>(m);
    const double spread = 2.0 * d * a * nn / mm;
    AggregateIntersectionBounds out;
    out.sums = {a + spread * (l - 1), l * a + spread * (l - 1), a + spread * (3 * l + 11),
                (3 * l + 12) * a + spread * (3 * l + 11)};
    const double unit = a * d * l;
    out.simplified = {2 * unit, 3 * unit, 8 * unit, 10 * unit};
    return out;
}

} // namespace cmstein
