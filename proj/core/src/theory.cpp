#include "outformation/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "outformation/environment.hpp"
#include "outformation/random.hpp"
#include "outformation/sensing.hpp"

namespace outformation::theory {

std::string_view to_string(Variant v) { return v == Variant::Printed ? "PRINTED" : "PROOF_CONSISTENT"; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gauss_abs_diff_prob(double epsilon, double sigma, Side side) {
    double geq;
    if (sigma == 0.0) {
        geq = epsilon > 0.0 ? 0.0 : 1.0;
    } else {
        // W1 - W2 ~ N(0, 2 sigma^2)
        geq = std::erfc(epsilon / (2.0 * sigma));
    }
    return side == Side::Geq ? geq : 1.0 - geq;
}

double backoff_diff_cdf(const BackoffSpec& spec, double s) {
    switch (spec.kind) {
        case BackoffSpec::Kind::Zero: return s >= 0.0 ? 1.0 : 0.0;
        case BackoffSpec::Kind::Uniform: {
            const double b = spec.b;
            if (b <= 0.0) return s >= 0.0 ? 1.0 : 0.0;
            if (s <= -b) return 0.0;
            if (s >= b) return 1.0;
            if (s <= 0.0) return (b + s) * (b + s) / (2.0 * b * b);
            return 1.0 - (b - s) * (b - s) / (2.0 * b * b);
        }
        case BackoffSpec::Kind::Empirical: {
            double acc = 0.0;
            for (std::size_t i = 0; i < spec.points.size(); ++i)
                for (std::size_t j = 0; j < spec.points.size(); ++j)
                    if (spec.points[i] - spec.points[j] <= s) acc += spec.probs[i] * spec.probs[j];
            return std::min(1.0, acc);
        }
    }
    return 0.0;
}

double power_shared_expected_diff(const ScenarioConfig& cfg, Variant variant, BroadcastAccounting accounting) {
    const double beat = 1.0 - backoff_cdf(cfg.backoff, cfg.dt_up + cfg.dt_down);
    const auto side = variant == Variant::Printed ? Side::Geq : Side::Lt;
    const double q = beat * gauss_abs_diff_prob(cfg.epsilon, cfg.sigma, side);
    if (accounting == BroadcastAccounting::Conditional) return (cfg.p_up - cfg.p_down) * q;
    return (cfg.p_up + cfg.p_down) * q - 2.0 * cfg.p_down;
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(order), 0.0);
    weights.assign(static_cast<std::size_t>(order), 0.0);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double mse_shared_joint(double epsilon, double sigma, Variant variant) {
    if (sigma == 0.0 || epsilon <= 0.0) return 0.0;
    const double s = sigma * std::numbers::sqrt2;  // std of u and of v

    // P_v(Q > 0 | u) for u > 0; the integrand is even in u.
    const double root_lo = (14.0 - std::sqrt(208.0)) / 6.0;
    const double root_hi = (14.0 + std::sqrt(208.0)) / 6.0;
    auto inner = [&](double u) {
        if (variant == Variant::ProofConsistent) return normal_cdf(-u / (2.0 * s));
        return normal_cdf(root_lo * u / s) + normal_cdf(-root_hi * u / s);
    };
    auto density = [&](double u) { return std::exp(-0.5 * (u / s) * (u / s)) / (s * std::sqrt(2.0 * std::numbers::pi)); };

    static const auto rule = [] {
        std::pair<std::vector<double>, std::vector<double>> r;
        gauss_legendre(20, r.first, r.second);
        return r;
    }();
    // Past 40 standard deviations the density is zero in double precision.
    const double upper = std::min(epsilon, 40.0 * s);
    constexpr int panels = 64;
    const double h = upper / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.first.size(); ++i) {
            const double u = mid + 0.5 * h * rule.first[i];
            acc += rule.second[i] * 0.5 * h * density(u) * inner(u);
        }
    }
    return 2.0 * acc;
}

double mse_shared_prob(const ScenarioConfig& cfg, Variant variant) {
    const double beat = 1.0 - backoff_cdf(cfg.backoff, cfg.dt_up + cfg.dt_down);
    return beat * mse_shared_joint(cfg.epsilon, cfg.sigma, variant);
}

double mse_shared_gen_prob(const ScenarioConfig& cfg, int a1, int a2, Variant variant) {
    const double lo = (a1 - 1) * cfg.T_1;
    const double mid = a2 * cfg.T_2;
    const double hi = a1 * cfg.T_1;
    if (!(lo < mid && mid < hi)) throw std::invalid_argument("invalid setup-2 geometry");
    const double p_step = cfg.d_up > 0.0 ? 1.0 : 0.0;
    const double close = gauss_abs_diff_prob(cfg.epsilon, cfg.sigma, Side::Lt);
    const double gap = hi - mid;
    const double delays = cfg.dt_up + cfg.dt_down;
    if (variant == Variant::Printed) return p_step * close * (1.0 - backoff_diff_cdf(cfg.backoff, gap + delays));
    return p_step * close * backoff_diff_cdf(cfg.backoff, gap - delays);
}

double unshared_power_expected(const ScenarioConfig& cfg, const ComponentMap& map, int sensor, int interval,
                               const PTable& table) {
    if (interval < 1) throw std::invalid_argument("interval must be at least 1");
    const double tau = cfg.tau(sensor);
    const long long h_count = cfg.H[static_cast<std::size_t>(sensor - 1)];
    std::vector<std::string> missing;
    auto lookup = [&](ComponentId k, long long sample) {
        auto it = table.find({sensor, k, sample});
        if (it == table.end()) {
            missing.push_back("(" + std::to_string(sensor) + "," + std::to_string(k) + "," + std::to_string(sample) + ")");
            return 0.0;
        }
        return it->second.p;
    };

    double acc = 0.0;
    for (auto k : map.unshared(sensor)) {
        const long long prev = static_cast<long long>(interval - 1) * h_count;
        const long long cur = static_cast<long long>(interval) * h_count;
        for (long long h = 0; h <= h_count; ++h) {
            const double w = 1.0 - backoff_cdf(cfg.backoff, cfg.delta_t - static_cast<double>(h) * tau - cfg.dt_up);
            acc += w * lookup(k, prev + h);
        }
        for (long long h = 1; h <= h_count - 1; ++h) {
            const double w = backoff_cdf(cfg.backoff, cfg.delta_t - static_cast<double>(h) * tau - cfg.dt_up);
            acc += w * lookup(k, cur + h);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing p entries:";
        for (const auto& m : missing) msg += " " + m;
        throw std::invalid_argument(msg);
    }
    return cfg.p_up * acc;
}

PTable estimate_p_jk(const ScenarioConfig& cfg, const ComponentMap& map, long long reps, std::uint64_t seed,
                     std::uint64_t first_replication) {
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");
    std::map<std::tuple<int, ComponentId, long long>, long long> counts;
    for (int j = 1; j <= kSensorCount; ++j) {
        const long long samples = static_cast<long long>(std::ceil(cfg.t_sim / cfg.tau(j) - 1e-9));
        for (auto k : map.observed_by(j))
            for (long long m = 0; m < samples; ++m) counts[{j, k, m}] = 0;
    }
    for (long long r = 0; r < reps; ++r) {
        const RandomStreams streams(seed, first_replication + static_cast<std::uint64_t>(r));
        const auto path = sample_path(cfg, streams);
        for (const auto& tr : replay_in_eps_triggers(path, map, cfg, streams, cfg.t_sim)) {
            const long long sample = tr.instant * cfg.verification_stride(tr.sensor);
            for (auto k : tr.components) ++counts[{tr.sensor, k, sample}];
        }
    }
    PTable table;
    const double n = static_cast<double>(reps);
    for (const auto& [key, count] : counts) {
        const double p = static_cast<double>(count) / n;
        table[key] = {p, std::sqrt(p * (1.0 - p) / n), reps};
    }
    return table;
}

}  // namespace outformation::theory
