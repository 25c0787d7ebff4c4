#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "outformation/experiments.hpp"
#include "outformation/theory.hpp"

using namespace outformation;
using theory::Side;
using theory::Variant;

namespace {

// Standard normal mass of (lo, hi) for N(0, sigma^2).
double normal_mass(double lo, double hi, double sigma) {
    if (!(hi > lo)) return 0.0;
    return oracle::phi(hi / sigma) - oracle::phi(lo / sigma);
}

// P(Q(W1, W2) > 0, |W1 - W2| < eps) by conditioning on W1. For fixed w1 the
// quadratic Q vanishes at w2 = c_lo w1 and w2 = c_hi w1 and is positive outside.
double joint_by_conditioning(double eps, double sigma, Variant v) {
    double c_a, c_b;
    if (v == Variant::ProofConsistent) {
        c_a = -3.0;  // (w2 + 3 w1)(w2 - w1) > 0
        c_b = 1.0;
    } else {
        c_a = (-1.0 - std::sqrt(13.0)) / 4.0;  // w2^2 + w1 w2 / 2 - 3 w1^2 / 4 > 0
        c_b = (-1.0 + std::sqrt(13.0)) / 4.0;
    }
    auto inner = [&](double w1) {
        const double r1 = std::min(c_a * w1, c_b * w1), r2 = std::max(c_a * w1, c_b * w1);
        const double lo = w1 - eps, hi = w1 + eps;
        return normal_mass(lo, std::min(hi, r1), sigma) + normal_mass(std::max(lo, r2), hi, sigma);
    };
    auto f = [&](double w1) { return std::exp(-0.5 * w1 * w1 / (sigma * sigma)) / (sigma * std::sqrt(2 * M_PI)) * inner(w1); };
    const double L = 12.0 * sigma;
    return oracle::simpson(f, -L, 0.0, 1e-12) + oracle::simpson(f, 0.0, L, 1e-12);
}

double quadratic(double w1, double w2, Variant v) {
    if (v == Variant::ProofConsistent) return (w1 + w2) * (w1 + w2) / 4.0 - w1 * w1;
    return w1 * w2 / 2.0 + w2 * w2 - 3.0 * w1 * w1 / 4.0;
}

}  // namespace

TEST(GaussAbsDiff, ExampleValue) {
    EXPECT_NEAR(theory::gauss_abs_diff_prob(1.0, 1.0, Side::Geq), 0.4795001221869535, 1e-12);
    EXPECT_NEAR(theory::gauss_abs_diff_prob(1.0, 1.0, Side::Lt), 1.0 - 0.4795001221869535, 1e-12);
}

TEST(GaussAbsDiff, MatchesAnalyticNormalTail) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> e(0.0, 4.0), s(0.05, 3.0);
    for (int i = 0; i < 500; ++i) {
        const double eps = e(rng), sigma = s(rng);
        // W1 - W2 ~ N(0, 2 sigma^2).
        const double geq = 2.0 * (1.0 - oracle::phi(eps / (sigma * std::sqrt(2.0))));
        EXPECT_NEAR(theory::gauss_abs_diff_prob(eps, sigma, Side::Geq), geq, 1e-12);
        EXPECT_NEAR(theory::gauss_abs_diff_prob(eps, sigma, Side::Geq) + theory::gauss_abs_diff_prob(eps, sigma, Side::Lt),
                    1.0, 1e-15);
    }
}

TEST(GaussAbsDiff, MatchesMonteCarlo) {
    const double eps = 0.8, sigma = 0.7;
    const auto mc = oracle::monte_carlo(1'000'000, 3, [&](std::mt19937_64& g) {
        std::normal_distribution<double> n(0.0, sigma);
        return std::abs(n(g) - n(g)) >= eps ? 1.0 : 0.0;
    });
    EXPECT_NEAR(theory::gauss_abs_diff_prob(eps, sigma, Side::Geq), mc.mean, 3.0 * mc.se);
}

TEST(GaussAbsDiff, NoiselessLimit) {
    EXPECT_EQ(theory::gauss_abs_diff_prob(0.5, 0.0, Side::Geq), 0.0);
    EXPECT_EQ(theory::gauss_abs_diff_prob(0.5, 0.0, Side::Lt), 1.0);
    EXPECT_EQ(theory::gauss_abs_diff_prob(0.0, 0.0, Side::Geq), 1.0);
}

TEST(BackoffDiffCdf, Examples) {
    EXPECT_EQ(theory::backoff_diff_cdf(BackoffSpec::zero(), 0.0), 1.0);
    EXPECT_EQ(theory::backoff_diff_cdf(BackoffSpec::zero(), -1e-9), 0.0);
    EXPECT_NEAR(theory::backoff_diff_cdf(BackoffSpec::uniform(10.0), 0.0), 0.5, 1e-12);
    EXPECT_NEAR(theory::backoff_diff_cdf(BackoffSpec::uniform(10.0), 5.0), 7.0 / 8.0, 1e-12);
    EXPECT_EQ(theory::backoff_diff_cdf(BackoffSpec::uniform(10.0), 10.0), 1.0);
    const auto emp = BackoffSpec::empirical({1.0, 3.0}, {0.5, 0.5});
    EXPECT_EQ(theory::backoff_diff_cdf(emp, -2.0), 0.25);
    EXPECT_EQ(theory::backoff_diff_cdf(emp, 0.0), 0.75);
}

TEST(BackoffDiffCdf, UniformSymmetricAndMonotone) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> bd(0.5, 20.0), sd(-25.0, 25.0);
    for (int i = 0; i < 1000; ++i) {
        const auto spec = BackoffSpec::uniform(bd(rng));
        double a = sd(rng), b = sd(rng);
        EXPECT_NEAR(theory::backoff_diff_cdf(spec, a) + theory::backoff_diff_cdf(spec, -a), 1.0, 1e-12);
        if (a > b) std::swap(a, b);
        EXPECT_LE(theory::backoff_diff_cdf(spec, a), theory::backoff_diff_cdf(spec, b));
    }
}

TEST(BackoffDiffCdf, UniformMatchesConvolution) {
    for (double b : {1.0, 4.5, 10.0}) {
        for (double s = -b - 1.0; s <= b + 1.0; s += b / 7.0) {
            // G(s) = E[F_B(s + B2)] with F_B(x) = clamp(x / b).
            const double conv = oracle::simpson(
                [&](double x) { return std::clamp((s + x) / b, 0.0, 1.0) / b; }, 0.0, b, 1e-14);
            EXPECT_NEAR(theory::backoff_diff_cdf(BackoffSpec::uniform(b), s), conv, 1e-12) << "b=" << b << " s=" << s;
        }
    }
}

TEST(BackoffDiffCdf, MatchesMonteCarloForRandomSpecs) {
    std::mt19937_64 rng(57);
    for (int i = 0; i < 10; ++i) {
        const auto spec = gen::backoff(rng);
        const double s = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        auto draw = [&](std::mt19937_64& g) {
            switch (spec.kind) {
                case BackoffSpec::Kind::Zero: return 0.0;
                case BackoffSpec::Kind::Uniform: return std::uniform_real_distribution<double>(0.0, spec.b)(g);
                default: {
                    std::discrete_distribution<std::size_t> d(spec.probs.begin(), spec.probs.end());
                    return spec.points[d(g)];
                }
            }
        };
        const auto mc = oracle::monte_carlo(200'000, 100 + i, [&](std::mt19937_64& g) {
            const double b1 = draw(g);
            return b1 - draw(g) <= s ? 1.0 : 0.0;
        });
        EXPECT_NEAR(theory::backoff_diff_cdf(spec, s), mc.mean, 4.0 * mc.se + 1e-12);
    }
}

TEST(PowerShared, NoiselessClosedForms) {
    ScenarioConfig cfg;
    cfg.sigma = 0.0;
    // F_B(2) = 0.2 for uniform(0, 10).
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::ProofConsistent), 0.8 * (cfg.p_up - cfg.p_down), 1e-12);
    EXPECT_EQ(theory::power_shared_expected_diff(cfg, Variant::Printed), 0.0);
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::ProofConsistent, BroadcastAccounting::Always),
                0.8 * (cfg.p_up + cfg.p_down) - 2.0 * cfg.p_down, 1e-12);
}

TEST(PowerShared, LargeThresholdLimit) {
    ScenarioConfig cfg;
    cfg.epsilon = 1e6;
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::Printed), 0.0, 1e-12);
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::ProofConsistent), 0.8 * (cfg.p_up - cfg.p_down), 1e-12);
}

TEST(PowerShared, DefaultConfigValues) {
    ScenarioConfig cfg;
    const double lt = 1.0 - std::erfc(0.5);
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::ProofConsistent), 0.8 * lt, 1e-12);
    EXPECT_NEAR(theory::power_shared_expected_diff(cfg, Variant::Printed), 0.8 * (1.0 - lt), 1e-12);
}

TEST(MseShared, MatchesConditioningIntegral) {
    for (auto v : {Variant::Printed, Variant::ProofConsistent}) {
        for (double eps : {0.1, 0.5, 1.0, 2.5}) {
            for (double sigma : {0.2, 1.0, 3.0}) {
                EXPECT_NEAR(theory::mse_shared_joint(eps, sigma, v), joint_by_conditioning(eps, sigma, v), 1e-9)
                    << theory::to_string(v) << " eps=" << eps << " sigma=" << sigma;
            }
        }
    }
}

TEST(MseShared, MatchesMonteCarlo) {
    const double eps = 1.0, sigma = 1.0;
    for (auto v : {Variant::Printed, Variant::ProofConsistent}) {
        const auto mc = oracle::monte_carlo(1'000'000, 61, [&](std::mt19937_64& g) {
            std::normal_distribution<double> n(0.0, sigma);
            const double w1 = n(g), w2 = n(g);
            return quadratic(w1, w2, v) > 0.0 && std::abs(w1 - w2) < eps ? 1.0 : 0.0;
        });
        EXPECT_NEAR(theory::mse_shared_joint(eps, sigma, v), mc.mean, 3.0 * mc.se) << theory::to_string(v);
    }
}

TEST(MseShared, MonotoneInThresholdAndZeroAtEdges) {
    for (auto v : {Variant::Printed, Variant::ProofConsistent}) {
        double prev = 0.0;
        for (double eps = 0.0; eps <= 5.0; eps += 0.25) {
            const double p = theory::mse_shared_joint(eps, 1.0, v);
            EXPECT_GE(p, prev - 1e-15);
            prev = p;
        }
        EXPECT_EQ(theory::mse_shared_joint(1.0, 0.0, v), 0.0);
        EXPECT_EQ(theory::mse_shared_joint(0.0, 1.0, v), 0.0);
    }
}

TEST(MseShared, ProbabilityScalesByBackoffFactor) {
    ScenarioConfig cfg;
    EXPECT_NEAR(theory::mse_shared_prob(cfg, Variant::ProofConsistent),
                0.8 * joint_by_conditioning(1.0, 1.0, Variant::ProofConsistent), 1e-9);
}

TEST(MseSharedGen, SetupTwoPresetValues) {
    const auto s = experiments::preset("setup2");
    const double close = 1.0 - std::erfc(0.5);
    // gap a1 T1 - a2 T2 = 5, dt_up + dt_down = 2, G uniform(10).
    const double g3 = 1.0 - 49.0 / 200.0, g7 = 1.0 - 9.0 / 200.0;
    EXPECT_NEAR(theory::mse_shared_gen_prob(s.config, 2, 1, Variant::ProofConsistent), close * g3, 1e-12);
    EXPECT_NEAR(theory::mse_shared_gen_prob(s.config, 2, 1, Variant::Printed), close * (1.0 - g7), 1e-12);
}

TEST(MseSharedGen, RejectsInvalidGeometry) {
    const auto s = experiments::preset("setup2");
    try {
        theory::mse_shared_gen_prob(s.config, 1, 1, Variant::ProofConsistent);
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "invalid setup-2 geometry");
    }
}

TEST(UnsharedPower, ZeroProbabilitiesGiveZero) {
    const auto s = experiments::preset("unshared_power");
    theory::PTable table;
    for (int j = 1; j <= 2; ++j)
        for (auto k : s.components.unshared(j))
            for (long long m = 0; m < 12; ++m) table[{j, k, m}] = {0.0, 0.0, 1};
    EXPECT_EQ(theory::unshared_power_expected(s.config, s.components, 1, 1, table), 0.0);
}

TEST(UnsharedPower, CertainTriggersWithZeroBackoff) {
    // Every sample triggers and arrives 1.5 later: arrivals in [20, 40) come from
    // the samples at 20, 25, 30 and 35.
    auto s = experiments::preset("unshared_power");
    s.config.backoff = BackoffSpec::zero();
    theory::PTable table;
    for (int j = 1; j <= 2; ++j)
        for (auto k : s.components.unshared(j))
            for (long long m = 0; m < 12; ++m) table[{j, k, m}] = {1.0, 0.0, 1};
    EXPECT_NEAR(theory::unshared_power_expected(s.config, s.components, 1, 1, table), 4.0 * s.config.p_up, 1e-12);
    EXPECT_NEAR(theory::unshared_power_expected(s.config, s.components, 2, 1, table), 4.0 * s.config.p_up, 1e-12);
}

TEST(UnsharedPower, MissingEntriesAreListed) {
    const auto s = experiments::preset("unshared_power");
    try {
        theory::unshared_power_expected(s.config, s.components, 1, 1, {});
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("missing p entries: (1,1,0)"), std::string::npos);
    }
}

TEST(EstimatePjk, NoChangeNoNoiseNeverTriggers) {
    auto s = experiments::preset("unshared_power");
    s.config.p_change = 0.0;
    s.config.sigma = 0.0;
    const auto table = theory::estimate_p_jk(s.config, s.components, 20, 1);
    EXPECT_FALSE(table.empty());
    for (const auto& [key, e] : table) {
        EXPECT_EQ(e.p, 0.0);
        EXPECT_EQ(e.n, 20);
    }
}

TEST(EstimatePjk, ProbabilitiesAndErrorsAreConsistent) {
    const auto s = experiments::preset("unshared_power");
    const long long reps = 300;
    const auto table = theory::estimate_p_jk(s.config, s.components, reps, 7);
    bool some_positive = false;
    for (const auto& [key, e] : table) {
        EXPECT_GE(e.p, 0.0);
        EXPECT_LE(e.p, 1.0);
        EXPECT_NEAR(e.se, std::sqrt(e.p * (1.0 - e.p) / reps), 1e-15);
        some_positive = some_positive || e.p > 0.0;
    }
    EXPECT_TRUE(some_positive);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    std::vector<double> x, w;
    theory::gauss_legendre(20, x, w);
    for (int deg = 0; deg <= 39; ++deg) {
        double q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) q += w[i] * std::pow(x[i], deg);
        const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
        EXPECT_NEAR(q, exact, 1e-13) << "degree " << deg;
    }
}
