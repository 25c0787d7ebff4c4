#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "outformation/experiments.hpp"

using namespace outformation;
namespace ex = outformation::experiments;

namespace {

const std::vector<Architecture> kAll{Architecture::In0, Architecture::InEps, Architecture::OutEps};

class ThreadsEnv {
public:
    explicit ThreadsEnv(const char* value) {
        if (const char* old = std::getenv("OUTFORMATION_THREADS")) saved_ = old;
        ::setenv("OUTFORMATION_THREADS", value, 1);
    }
    ~ThreadsEnv() {
        if (saved_.empty()) ::unsetenv("OUTFORMATION_THREADS");
        else ::setenv("OUTFORMATION_THREADS", saved_.c_str(), 1);
    }

private:
    std::string saved_;
};

}  // namespace

TEST(Presets, AllValidAndNamed) {
    for (const auto& name : ex::preset_names()) {
        const auto s = ex::preset(name);
        EXPECT_TRUE(config_violations(s.config, s.components).empty()) << name;
    }
    EXPECT_EQ(ex::preset("fig_time").config.T_1, 23.0);
    EXPECT_EQ(ex::preset("fig_time").config.T_2, 41.0);
    EXPECT_EQ(ex::preset("fig_event").config.sigma, 0.0);
    EXPECT_TRUE(ex::preset("unshared_power").components.shared.empty());
    const auto pair = find_setup_two_pair(ex::preset("setup2").config);
    ASSERT_TRUE(pair.has_value());
    EXPECT_EQ(*pair, std::make_pair(2, 1));
}

TEST(Presets, UnknownNameThrows) {
    try {
        ex::preset("nope");
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "unknown preset 'nope'");
    }
}

TEST(Estimate, StandardErrorGuards) {
    EXPECT_EQ(ex::estimate_mean({3.0}).se, 0.0);
    EXPECT_EQ(ex::estimate_mean({2.0, 2.0, 2.0}).se, 0.0);
    const auto e = ex::estimate_mean({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_LT(e.ci_low, e.mean);
    EXPECT_GT(e.ci_high, e.mean);
}

TEST(Replicate, RejectsTooFewReplications) {
    EXPECT_THROW(ex::replicate(ex::preset("sweep"), kAll, 1), std::invalid_argument);
}

TEST(Replicate, StandardErrorShrinksLikeRootN) {
    const auto s = ex::preset("sweep");
    const auto a = ex::replicate(s, {Architecture::InEps}, 100);
    const auto b = ex::replicate(s, {Architecture::InEps}, 400);
    const double ratio = a.at("power_total[in_eps]").se / b.at("power_total[in_eps]").se;
    EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(Replicate, IndependentOfThreadCount) {
    const auto s = ex::preset("sweep");
    ex::ReplicationSummary one, many;
    {
        ThreadsEnv env("1");
        one = ex::replicate(s, kAll, 40);
    }
    {
        ThreadsEnv env("7");
        many = ex::replicate(s, kAll, 40);
    }
    ASSERT_EQ(one.stats.size(), many.stats.size());
    for (std::size_t i = 0; i < one.stats.size(); ++i) {
        EXPECT_EQ(one.stats[i].first, many.stats[i].first);
        EXPECT_EQ(one.stats[i].second.mean, many.stats[i].second.mean) << one.stats[i].first;
        EXPECT_EQ(one.stats[i].second.se, many.stats[i].second.se) << one.stats[i].first;
    }
}

TEST(Replicate, DifferencesMatchTotals) {
    const auto s = ex::preset("sweep");
    const auto r = ex::replicate(s, kAll, 50);
    EXPECT_NEAR(r.at("power_diff[in_eps-out_eps]").mean,
                r.at("power_total[in_eps]").mean - r.at("power_total[out_eps]").mean, 1e-9);
    double idx = 0.0;
    for (int i = 1; i <= s.config.n; ++i) idx += r.at("mse_idx_diff[in0-out_eps][" + std::to_string(i) + "]").mean;
    EXPECT_NEAR(idx, r.at("mse_diff[in0-out_eps]").mean, 1e-9);
    EXPECT_THROW(r.at("missing"), std::out_of_range);
}

TEST(PairedRun, ArchitecturesShareRandomPrimitives) {
    const auto s = ex::preset("sweep");
    for (std::uint64_t r = 0; r < 20; ++r) EXPECT_TRUE(ex::paired_run(s, kAll, r).coupled());
}

TEST(PairedRun, NoSharedComponentsGiveZeroDifferences) {
    const auto s = ex::preset("unshared_power");
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto pr = ex::paired_run(s, {Architecture::InEps, Architecture::OutEps}, r);
        EXPECT_EQ(pr.power_diff(Architecture::InEps, Architecture::OutEps), 0.0);
        EXPECT_EQ(pr.mse_diff(Architecture::InEps, Architecture::OutEps), 0.0);
    }
}

TEST(ConditionedRun, NoiselessSetupOneDifferences) {
    // sigma = 0: both sensors report the same value, so sensor 2 is cancelled
    // whenever sensor 1's broadcast beats its backoff, and the MSE is unchanged.
    auto s = ex::preset("setup1");
    s.config.sigma = 0.0;
    const auto& cfg = s.config;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto run = ex::conditioned_run(s, SetupKind::One, r);
        const double diff = run.in.metrics.power_total - run.out.metrics.power_total;
        EXPECT_TRUE(std::abs(diff) < 1e-12 || std::abs(diff - (cfg.p_up - cfg.p_down)) < 1e-12) << diff;
        EXPECT_NEAR(run.in.metrics.mse_total, run.out.metrics.mse_total, 1e-12);
    }
}

TEST(Verification, WithinBandRecomputesVerdict) {
    ex::Comparison c;
    c.closed_form = 1.0;
    c.mc_estimate = 1.02;
    c.mc_stderr = 0.01;
    c.band = "3se";
    EXPECT_TRUE(ex::within_band(c));
    c.mc_estimate = 1.04;
    EXPECT_FALSE(ex::within_band(c));
    c.band = "rel_2pct";
    c.mc_estimate = 1.019;
    EXPECT_TRUE(ex::within_band(c));
    c.band = "exact";
    EXPECT_FALSE(ex::within_band(c));
    c.mc_estimate = 1.0;
    EXPECT_TRUE(ex::within_band(c));
    c.band = "3se";
    c.mc_stderr = 0.0;
    c.mc_estimate = 1.0 + 1e-9;
    EXPECT_FALSE(ex::within_band(c));
}

TEST(Verification, TheoremNamesRoundTrip) {
    for (const auto& name : ex::theorem_names()) {
        const auto id = ex::parse_theorem(name);
        ASSERT_TRUE(id.has_value()) << name;
        EXPECT_EQ(ex::to_string(*id), name);
    }
    EXPECT_FALSE(ex::parse_theorem("power").has_value());
}

TEST(Verification, PowerSharedSmallRunIsReproducible) {
    const auto s = ex::preset("setup1");
    const auto a = ex::verify_theorem(ex::TheoremId::PowerShared, s, 200);
    const auto b = ex::verify_theorem(ex::TheoremId::PowerShared, s, 200);
    EXPECT_EQ(ex::to_json(a).dump(), ex::to_json(b).dump());
    EXPECT_EQ(a.config_digest, ex::config_digest(s));
    for (const auto& c : a.comparisons) EXPECT_EQ(c.pass, ex::within_band(c));
}

TEST(Verification, MseUnsharedExactChecksClean) {
    const auto rep = ex::verify_theorem(ex::TheoremId::MseUnshared, ex::preset("unshared"), 50);
    EXPECT_TRUE(rep.passed());
    for (const auto& e : rep.exact_checks) EXPECT_TRUE(e.pass()) << e.name;
}
