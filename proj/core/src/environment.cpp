#include "outformation/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace outformation {

namespace {

constexpr double kTimeTolerance = 1e-9;

bool time_leq(double a, double b) { return a <= b + kTimeTolerance * std::max(1.0, std::abs(b)); }
bool time_lt(double a, double b) { return a < b - kTimeTolerance * std::max(1.0, std::abs(b)); }

double draw_step(const ScenarioConfig& cfg, const RandomStreams& streams, Purpose which, std::uint64_t a,
                 std::uint64_t b) {
    const double u = streams.uniform(Purpose::EnvironmentMagnitude, static_cast<std::uint64_t>(which), a, b);
    const double magnitude = cfg.d_low + (cfg.d_up - cfg.d_low) * u;
    const bool negative = streams.uniform(Purpose::EnvironmentSign, static_cast<std::uint64_t>(which), a, b) < 0.5;
    return negative ? -magnitude : magnitude;
}

template <typename Container>
auto pick(const Container& c, double u) {
    auto it = c.begin();
    std::advance(it, std::min<std::size_t>(c.size() - 1, static_cast<std::size_t>(u * c.size())));
    return *it;
}

}  // namespace

EnvironmentPath::EnvironmentPath(std::vector<double> initial, double delta_t, int interval_count,
                                 std::vector<ChangeRecord> records)
    : initial_(std::move(initial)), delta_t_(delta_t), interval_count_(interval_count), records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(),
              [](const ChangeRecord& a, const ChangeRecord& b) { return a.interval < b.interval; });
    per_index_.resize(initial_.size());
    for (std::size_t i = 0; i < initial_.size(); ++i) per_index_[i].push_back({0.0, initial_[i]});
    for (const auto& rec : records_) {
        const double t = rec.interval * delta_t_;
        for (const auto& [idx, step] : rec.steps) {
            auto& bps = per_index_.at(idx - 1);
            bps.push_back({t, bps.back().value + step});
        }
    }
}

double EnvironmentPath::value(FullIndex i, double t) const {
    const auto& bps = per_index_.at(i - 1);
    // Last breakpoint with time <= t (tolerant, so sampling at c * delta_t sees step c).
    auto it = std::upper_bound(bps.begin(), bps.end(), t,
                               [](double tt, const Breakpoint& bp) { return !time_leq(bp.time, tt); });
    return std::prev(it)->value;
}

std::vector<double> EnvironmentPath::state(double t) const {
    std::vector<double> x(initial_.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = value(static_cast<FullIndex>(i + 1), t);
    return x;
}

void EnvironmentPath::write_csv(std::ostream& os) const {
    os << "interval,full_index,step_value\n";
    char buf[64];
    for (const auto& rec : records_) {
        for (const auto& [idx, step] : rec.steps) {
            std::snprintf(buf, sizeof buf, "%.17g", step);
            os << rec.interval << ',' << idx << ',' << buf << '\n';
        }
    }
}

std::vector<double> apply_step(std::vector<double> x, const ChangeRecord& record) {
    for (const auto& [idx, step] : record.steps) x.at(idx - 1) += step;
    return x;
}

StepResult step_environment(const std::vector<double>& x, int c, const RandomStreams& streams,
                            const ScenarioConfig& cfg) {
    ChangeRecord rec{c, {}};
    const auto uc = static_cast<std::uint64_t>(c);
    if (cfg.change_mode == ChangeMode::Independent) {
        for (int i = 1; i <= cfg.n; ++i) {
            if (streams.uniform(Purpose::EnvironmentChange, uc, static_cast<std::uint64_t>(i)) < cfg.p_change)
                rec.steps.emplace_back(i, draw_step(cfg, streams, Purpose::EnvironmentChange, uc, i));
        }
    } else if (streams.uniform(Purpose::EnvironmentChange, uc, 0) < cfg.p_change) {
        const double u = streams.uniform(Purpose::EnvironmentPick, uc);
        const int i = 1 + std::min(cfg.n - 1, static_cast<int>(u * cfg.n));
        rec.steps.emplace_back(i, draw_step(cfg, streams, Purpose::EnvironmentChange, uc, static_cast<std::uint64_t>(i)));
    }
    return {apply_step(x, rec), std::move(rec)};
}

EnvironmentPath sample_path(const ScenarioConfig& cfg, const RandomStreams& streams) {
    const int intervals = cfg.interval_count();
    std::vector<double> x(static_cast<std::size_t>(cfg.n), 0.0);
    const auto initial = x;
    std::vector<ChangeRecord> records;
    for (int c = 1; c < intervals; ++c) {
        auto step = step_environment(x, c, streams, cfg);
        x = std::move(step.state);
        if (!step.record.steps.empty()) records.push_back(std::move(step.record));
    }
    return EnvironmentPath(initial, cfg.delta_t, intervals, std::move(records));
}

std::optional<double> ConditionedScenario::backoff_override(int sensor, long long instant) const {
    for (const auto& o : backoff_overrides)
        if (o.sensor == sensor && o.instant == instant) return o.value;
    return std::nullopt;
}

namespace {

ConditionedScenario run_rejection(ConditionedScenario scn, const RandomStreams& streams,
                                  const ScenarioAcceptor& accept, int budget, const char* what) {
    for (int attempt = 0; attempt < budget; ++attempt) {
        scn.noise_epoch = static_cast<std::uint64_t>(attempt);
        if (accept(scn, streams.with_epoch(scn.noise_epoch))) {
            scn.rejections = attempt;
            return scn;
        }
    }
    throw ConditioningError(std::string(what) + " conditioning infeasible after " + std::to_string(budget) +
                            " attempts");
}

}  // namespace

ConditionedScenario build_setup_one(const ScenarioConfig& cfg, const ComponentMap& map,
                                    const RandomStreams& streams, const ScenarioAcceptor& accept,
                                    const SetupOptions& options) {
    if (map.shared.empty()) throw ConditioningError("setup-I needs at least one shared component");
    if (cfg.verification_stride(1) != 1 || cfg.verification_stride(2) != 1)
        throw ConditioningError("setup-I requires event-triggered verification (T_j = tau_j)");
    if (options.interval < 1) throw ConditioningError("setup-I interval index must be at least 1");

    ConditionedScenario scn;
    scn.setup = SetupKind::One;
    const int c = options.interval;
    scn.change_interval = c;
    scn.window_begin = c * cfg.delta_t;
    scn.window_end = (c + 1) * cfg.delta_t;
    scn.horizon = scn.window_end;

    scn.shared_component = pick(map.shared, streams.uniform(Purpose::SetupPlacement, 0));
    scn.shared_index = map.index_of(scn.shared_component);
    scn.shared_step = draw_step(cfg, streams, Purpose::SetupPlacement, static_cast<std::uint64_t>(c),
                                static_cast<std::uint64_t>(scn.shared_index));

    ChangeRecord rec{c, {{scn.shared_index, scn.shared_step}}};
    scn.path = EnvironmentPath(std::vector<double>(static_cast<std::size_t>(cfg.n), 0.0), cfg.delta_t, c + 1, {rec});

    // Sensor 1 reports first: its backoff at c * delta_t is pinned to zero.
    const auto instant = std::llround(scn.window_begin / cfg.T_1);
    scn.backoff_overrides.push_back({1, instant, 0.0});

    return run_rejection(std::move(scn), streams, accept, options.rejection_budget, "setup-I");
}

std::optional<std::pair<int, int>> find_setup_two_pair(const ScenarioConfig& cfg) {
    if (!(cfg.T_1 > 0.0) || !(cfg.T_2 > 0.0) || !(cfg.delta_t > 0.0)) return std::nullopt;
    auto has_boundary = [&](double lo_open, double hi_closed) {
        const double first = std::floor(lo_open / cfg.delta_t) + 1.0;
        return time_leq(first * cfg.delta_t, hi_closed);
    };
    for (int a2 = 1; a2 * cfg.T_2 < cfg.t_sim; ++a2) {
        const double t2 = a2 * cfg.T_2;
        const int a1 = static_cast<int>(std::floor(t2 / cfg.T_1 + kTimeTolerance)) + 1;
        const double lo = (a1 - 1) * cfg.T_1;
        const double hi = a1 * cfg.T_1;
        if (!time_lt(lo, t2) || !time_lt(t2, hi)) continue;
        if (!time_lt(hi, cfg.t_sim)) break;
        if (has_boundary(lo, t2) && has_boundary(t2, hi)) return std::make_pair(a1, a2);
    }
    return std::nullopt;
}

ConditionedScenario build_setup_two(const ScenarioConfig& cfg, const ComponentMap& map,
                                    const RandomStreams& streams, const ScenarioAcceptor& accept,
                                    const SetupOptions& options) {
    if (map.shared.empty() || map.unshared_1.empty())
        throw ConditioningError("setup-II needs a shared component and an unshared component of sensor 1");
    if (!(cfg.T_1 > cfg.tau_1) || !(cfg.T_2 > cfg.tau_2))
        throw ConditioningError("setup-II requires verification periods longer than sampling periods");
    const auto pair = find_setup_two_pair(cfg);
    if (!pair) throw ConditioningError("no valid (a1,a2) pair");

    ConditionedScenario scn;
    scn.setup = SetupKind::Two;
    scn.a1 = pair->first;
    scn.a2 = pair->second;
    const double t0 = (scn.a1 - 1) * cfg.T_1;
    const double t2 = scn.a2 * cfg.T_2;
    const double tf = scn.a1 * cfg.T_1;
    scn.window_begin = t0;
    scn.window_end = tf;
    scn.horizon = std::min((scn.a1 + 1) * cfg.T_1, (scn.a2 + 1) * cfg.T_2);
    // Sensor 1's two-component packet must land before the next verification.
    if (!time_lt(tf + cfg.backoff.upper_bound() + 2.0 * cfg.dt_up, scn.horizon))
        throw ConditioningError("setup-II horizon shorter than backoff support plus uplink delay");

    scn.shared_component = pick(map.shared, streams.uniform(Purpose::SetupPlacement, 0));
    scn.unshared_component = pick(map.unshared_1, streams.uniform(Purpose::SetupPlacement, 1));
    scn.shared_index = map.index_of(scn.shared_component);
    scn.unshared_index = map.index_of(scn.unshared_component);

    auto boundaries = [&](double lo_open, double hi_closed) {
        std::vector<int> cs;
        for (int c = static_cast<int>(std::floor(lo_open / cfg.delta_t)) + 1; time_leq(c * cfg.delta_t, hi_closed); ++c)
            if (time_lt(lo_open, c * cfg.delta_t)) cs.push_back(c);
        return cs;
    };
    const auto shared_cs = boundaries(t0, t2);
    const auto unshared_cs = boundaries(t2, tf);
    scn.change_interval = pick(shared_cs, streams.uniform(Purpose::SetupPlacement, 2));
    scn.unshared_change_interval = pick(unshared_cs, streams.uniform(Purpose::SetupPlacement, 3));
    scn.shared_step = draw_step(cfg, streams, Purpose::SetupPlacement, static_cast<std::uint64_t>(scn.change_interval),
                                static_cast<std::uint64_t>(scn.shared_index));
    scn.unshared_step = draw_step(cfg, streams, Purpose::SetupPlacement,
                                  static_cast<std::uint64_t>(scn.unshared_change_interval),
                                  static_cast<std::uint64_t>(scn.unshared_index));

    std::vector<ChangeRecord> records{{scn.change_interval, {{scn.shared_index, scn.shared_step}}},
                                      {scn.unshared_change_interval, {{scn.unshared_index, scn.unshared_step}}}};
    const int intervals = static_cast<int>(std::ceil(scn.horizon / cfg.delta_t - kTimeTolerance));
    scn.path = EnvironmentPath(std::vector<double>(static_cast<std::size_t>(cfg.n), 0.0), cfg.delta_t, intervals,
                               std::move(records));

    return run_rejection(std::move(scn), streams, accept, options.rejection_budget, "setup-II");
}

}  // namespace outformation
