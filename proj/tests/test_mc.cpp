#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmstein/mc.hpp"
#include "support/oracles.hpp"

using namespace cmstein;

namespace {

// Adaptive Gauss-Kronrod on each gap between order statistics; independent
// of the closed-form primitive.
double wasserstein_quadrature(std::vector<double> x) {
    using boost::math::quadrature::gauss_kronrod;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    boost::math::normal_distribution<double> z;
    auto gap = [&](double c, double a, double b) {
        return gauss_kronrod<double, 61>::integrate(
            [&](double t) { return std::abs(c - boost::math::cdf(z, t)); }, a, b, 15, 1e-12);
    };
    double total = gap(0.0, -INFINITY, x.front()) + gap(1.0, x.back(), INFINITY);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] > x[i - 1]) total += gap(static_cast<double>(i) / n, x[i - 1], x[i]);
    return total;
}

std::vector<double> normal_quantiles(std::size_t n) {
    boost::math::normal_distribution<double> z;
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = boost::math::quantile(z, (static_cast<double>(i) + 0.5) / n);
    return q;
}

ExperimentConfig small_giant_config() {
    ExperimentConfig cfg;
    cfg.distribution = DegreeDistribution{{1, 0.5}, {3, 0.5}};
    cfg.n_grid = {200, 400};
    cfg.replications = 60;
    cfg.master_seed = 42;
    return cfg;
}

} // namespace

TEST(Wasserstein, PointMassAtZero) {
    const std::vector<double> x{0.0};
    EXPECT_NEAR(wasserstein_to_std_normal(x), 0.7978845608028654, 1e-14);
}

TEST(Wasserstein, NormalQuantilesAreClose) {
    EXPECT_LT(wasserstein_to_std_normal(normal_quantiles(10000)), 5e-4);
}

TEST(Wasserstein, MatchesQuadrature) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd(0.3, 1.4);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> x(1 + rep * 7);
        for (auto& v : x) v = nd(gen);
        EXPECT_NEAR(wasserstein_to_std_normal(x), wasserstein_quadrature(x), 1e-9);
    }
    const std::vector<double> ties{-0.5, -0.5, 0.0, 2.0, 2.0, 2.0};
    EXPECT_NEAR(wasserstein_to_std_normal(ties), wasserstein_quadrature(ties), 1e-9);
}

TEST(Wasserstein, IidNormalSamplesWithinTolerance) {
    int ok = 0;
    for (Seed s = 0; s < 100; ++s) {
        RandomStream rng(s, {77});
        std::normal_distribution<double> nd;
        std::vector<double> x(10000);
        for (auto& v : x) v = nd(rng);
        ok += wasserstein_to_std_normal(x) < 0.03;
    }
    EXPECT_GE(ok, 99);
}

TEST(Wasserstein, PermutationInvariantAndLipschitz) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    std::vector<double> x(500);
    for (auto& v : x) v = nd(gen);
    const double base = wasserstein_to_std_normal(x);
    for (int rep = 0; rep < 20; ++rep) {
        auto y = x;
        std::shuffle(y.begin(), y.end(), gen);
        EXPECT_DOUBLE_EQ(wasserstein_to_std_normal(y), base);
        const double eps = std::ldexp(1.0, -(rep % 10) - 1);
        y[gen() % y.size()] += eps;
        EXPECT_LE(std::abs(wasserstein_to_std_normal(y) - base), eps / 500.0 + 1e-12);
    }
}

TEST(Wasserstein, EmptySampleThrows) {
    try {
        wasserstein_to_std_normal({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySample);
    }
}

TEST(AndersonDarling, StatisticMatchesDirectFormula) {
    const std::vector<double> x{0.3, -1.2, 2.1, 0.0, 0.8, -0.4, 1.5};
    const auto ad = anderson_darling_normality(x);
    auto y = x;
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(y.size());
    double mean = 0, ss = 0;
    for (double v : y) mean += v / n;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));
    boost::math::normal_distribution<double> z;
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double fi = boost::math::cdf(z, (y[i] - mean) / sd);
        const double fr = boost::math::cdf(z, (y[y.size() - 1 - i] - mean) / sd);
        s += (2.0 * static_cast<double>(i) + 1) * (std::log(fi) + std::log(1 - fr));
    }
    EXPECT_NEAR(ad.statistic, -n - s / n, 1e-12);
    EXPECT_NEAR(ad.adjusted_statistic, ad.statistic * (1 + 0.75 / n + 2.25 / (n * n)), 1e-12);
}

TEST(AndersonDarling, AcceptsNormalRejectsSkewed) {
    int accepted = 0;
    for (Seed s = 0; s < 50; ++s) {
        RandomStream rng(s, {1});
        std::normal_distribution<double> nd(5, 2);
        std::exponential_distribution<double> ed;
        std::vector<double> a(2000), b(2000);
        for (auto& v : a) v = nd(rng);
        for (auto& v : b) v = ed(rng);
        accepted += anderson_darling_normality(a).p_value > 0.01;
        EXPECT_LT(anderson_darling_normality(b).p_value, 1e-3);
    }
    EXPECT_GE(accepted, 45);
}

TEST(AndersonDarling, PValueBranchesAreContinuousEnough) {
    // the piecewise approximation is close to continuous at its knots
    for (double knot : {0.2, 0.34, 0.6}) {
        auto p = [](double a) {
            if (a >= 0.6) return std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
            if (a >= 0.34) return std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
            if (a >= 0.2) return 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
            return 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
        };
        EXPECT_NEAR(p(knot - 1e-9), p(knot), 0.01);
    }
}

TEST(SampleMoments, JackknifeAgainstLeaveOneOut) {
    std::mt19937_64 gen(1);
    std::gamma_distribution<double> gd(2.0, 1.0);
    std::vector<double> x(40);
    for (auto& v : x) v = gd(gen);
    const auto m = sample_moments(x);
    auto var = [](const std::vector<double>& v) {
        double mean = 0;
        for (double a : v) mean += a / static_cast<double>(v.size());
        double ss = 0;
        for (double a : v) ss += (a - mean) * (a - mean);
        return ss / static_cast<double>(v.size() - 1);
    };
    EXPECT_NEAR(m.variance, var(x), 1e-12);
    std::vector<double> loo;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto y = x;
        y.erase(y.begin() + static_cast<std::ptrdiff_t>(i));
        loo.push_back(var(y));
    }
    const double n = static_cast<double>(x.size());
    double lm = 0;
    for (double a : loo) lm += a / n;
    double jj = 0;
    for (double a : loo) jj += (a - lm) * (a - lm);
    EXPECT_NEAR(m.variance_se, std::sqrt((n - 1) / n * jj), 1e-10);
}

TEST(SampleMoments, TwoSamples) {
    const std::vector<double> x{1.0, 3.0};
    const auto m = sample_moments(x);
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.variance, 2.0);
    EXPECT_GT(m.variance_se, 0.0);
    EXPECT_THROW(sample_moments(std::vector<double>{1.0}), Error);
}

TEST(ExperimentConfig, EllRule) {
    ExperimentConfig cfg;
    EXPECT_EQ(cfg.ell_for(1000), 12U);
    EXPECT_EQ(cfg.ell_for(16000), 12U);
    cfg.delta = 10;
    EXPECT_EQ(cfg.ell_for(1000), 1000U);
    cfg.delta = 5;
    EXPECT_EQ(cfg.ell_for(10000), 100U);
    cfg.ell = 7;
    EXPECT_EQ(cfg.ell_for(10000), 7U);
}

TEST(ExperimentConfig, Validation) {
    auto cfg = small_giant_config();
    EXPECT_NO_THROW(cfg.validate());
    cfg.replications = 1;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = small_giant_config();
    cfg.n_grid = {400, 400};
    EXPECT_THROW(cfg.validate(), Error);
    cfg = small_giant_config();
    cfg.distribution.reset();
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(RunCltExperiment, ShapesAndStandardisation) {
    const auto res = run_clt_experiment(small_giant_config());
    ASSERT_EQ(res.per_n.size(), 2U);
    for (const auto& p : res.per_n) {
        EXPECT_EQ(p.samples.size(), 60U);
        EXPECT_DOUBLE_EQ(p.var_over_n, p.var_u / static_cast<double>(p.n));
        const auto m = sample_moments(p.samples);
        EXPECT_NEAR(m.mean, 0.0, 1e-12);
        EXPECT_NEAR(m.variance, 1.0, 1e-12);
        EXPECT_EQ(p.ell, 12U);
        EXPECT_TRUE(p.bound.has_value());
        EXPECT_TRUE(p.s_ne_u_frequency.has_value());
        EXPECT_NEAR(*p.threshold_margin, 0.5, 1e-12);
    }
}

TEST(RunCltExperiment, DeterministicAndThreadIndependent) {
    auto cfg = small_giant_config();
    const auto a = run_clt_experiment(cfg);
    const auto b = run_clt_experiment(cfg);
    cfg.threads = 3;
    const auto c = run_clt_experiment(cfg);
    for (std::size_t i = 0; i < a.per_n.size(); ++i) {
        EXPECT_EQ(a.per_n[i].raw, b.per_n[i].raw);
        EXPECT_EQ(a.per_n[i].raw, c.per_n[i].raw);
        EXPECT_EQ(a.per_n[i].wasserstein, c.per_n[i].wasserstein);
    }
    cfg.master_seed = 43;
    EXPECT_NE(run_clt_experiment(cfg).per_n[0].raw, a.per_n[0].raw);
}

TEST(RunCltExperiment, DegreeIndicatorIsDegenerate) {
    auto cfg = small_giant_config();
    cfg.mode = ExperimentMode::Statistic;
    cfg.statistic = "degree_indicator";
    cfg.k = 3;
    try {
        run_clt_experiment(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateVariance);
    }
}

TEST(RunCltExperiment, StatisticModeOnExplicitSequence) {
    ExperimentConfig cfg;
    cfg.degrees = sample_degree_sequence({{1, 0.5}, {3, 0.5}}, 300, 10, Seed{9});
    cfg.mode = ExperimentMode::Statistic;
    cfg.statistic = "capped_component_size";
    cfg.ell = 5;
    cfg.replications = 40;
    const auto res = run_clt_experiment(cfg);
    ASSERT_EQ(res.per_n.size(), 1U);
    EXPECT_EQ(res.per_n[0].n, 300U);
    EXPECT_EQ(res.per_n[0].raw, sample_statistic_values(*cfg.degrees, capped_component_size(5), 40, 1));
    EXPECT_FALSE(res.per_n[0].s_ne_u_frequency.has_value());
}

TEST(RunCltExperiment, ResampledDegreesDiffer) {
    auto cfg = small_giant_config();
    cfg.resample_degrees = true;
    const auto a = run_clt_experiment(cfg);
    EXPECT_NE(a.per_n[0].raw, run_clt_experiment(small_giant_config()).per_n[0].raw);
}

TEST(GiantMode, SmallComponentCountMatchesStatistic) {
    const auto d = sample_degree_sequence({{1, 0.5}, {3, 0.5}}, 1000, 20, Seed{3});
    for (Seed s = 0; s < 20; ++s) {
        const auto g = sample_configuration(d, s);
        const auto p = components(g);
        for (std::size_t ell : {3, 12, 40}) {
            EXPECT_EQ(static_cast<double>(vertices_in_small_components(p, ell)),
                      evaluate_statistic(g, small_component_indicator(ell)).value);
        }
    }
}

TEST(VarianceScaling, MinimalReplications) {
    auto cfg = small_giant_config();
    cfg.replications = 2;
    const auto pts = variance_scaling_study(cfg);
    ASSERT_EQ(pts.size(), 2U);
    for (const auto& p : pts) {
        EXPECT_TRUE(std::isfinite(p.var_over_n));
        EXPECT_GT(p.std_error, 0.0);
        EXPECT_TRUE(p.supercritical);
    }
}

TEST(VarianceScaling, CriticalInputIsFlaggedNotRejected) {
    ExperimentConfig cfg;
    cfg.distribution = DegreeDistribution{{2, 1.0}};
    cfg.n_grid = {200, 400};
    cfg.replications = 30;
    const auto pts = variance_scaling_study(cfg);
    ASSERT_EQ(pts.size(), 2U);
    EXPECT_FALSE(pts[0].supercritical);
    const auto report = check_conditions(*cfg.distribution,
                                         {experiment_degrees(cfg, 200, std::nullopt),
                                          experiment_degrees(cfg, 400, std::nullopt)});
    EXPECT_FALSE(report.verdicts[0]);
    cfg.mode = ExperimentMode::Statistic;
    EXPECT_THROW(variance_scaling_study(cfg), Error);
}
