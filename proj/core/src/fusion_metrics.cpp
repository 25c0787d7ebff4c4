#include "outformation/fusion_metrics.hpp"

#include <algorithm>
#include <ostream>

namespace outformation {

EstimateState::EstimateState(const ComponentMap& map, std::vector<double> initial)
    : map_(&map), estimate_(std::move(initial)) {
    trajectory_.reserve(estimate_.size());
    for (std::size_t i = 0; i < estimate_.size(); ++i)
        trajectory_.push_back({0.0, static_cast<FullIndex>(i + 1), estimate_[i]});
}

double EstimateState::fuse(double now, int sensor, ComponentId k, double value, double timestamp) {
    auto& entries = stored_[k];
    auto it = std::find_if(entries.begin(), entries.end(), [&](const StoredValue& s) { return s.sensor == sensor; });
    if (it == entries.end()) {
        entries.push_back({sensor, value, timestamp});
    } else if (timestamp >= it->timestamp) {
        *it = {sensor, value, timestamp};
    }

    double newest = entries.front().timestamp;
    for (const auto& s : entries) newest = std::max(newest, s.timestamp);
    double sum = 0.0;
    int count = 0;
    for (const auto& s : entries) {
        if (s.timestamp == newest) {
            sum += s.value;
            ++count;
        }
    }
    const FullIndex i = map_->index_of(k);
    const double updated = sum / count;
    if (updated != estimate_[i - 1]) {
        estimate_[i - 1] = updated;
        trajectory_.push_back({now, i, updated});
    }
    return updated;
}

MseBreakdown integrate_mse(const EnvironmentPath& path, const std::vector<EstimateBreakpoint>& trajectory, double t1,
                           double t2) {
    const int n = path.dimension();
    std::vector<std::vector<Breakpoint>> est(static_cast<std::size_t>(n));
    for (const auto& bp : trajectory) est.at(bp.index - 1).push_back({bp.time, bp.value});

    MseBreakdown out;
    out.per_index.assign(static_cast<std::size_t>(n), 0.0);
    if (!(t2 > t1)) return out;

    for (int i = 1; i <= n; ++i) {
        const auto& xs = path.breakpoints(i);
        auto& hs = est[i - 1];
        std::stable_sort(hs.begin(), hs.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.time < b.time; });
        if (hs.empty() || hs.front().time > 0.0) hs.insert(hs.begin(), {0.0, path.initial()[i - 1]});

        // Walk both staircases together.
        std::size_t xi = 0, hi = 0;
        double acc = 0.0;
        double t = t1;
        auto value_at = [](const std::vector<Breakpoint>& bps, std::size_t& cursor, double time) {
            while (cursor + 1 < bps.size() && bps[cursor + 1].time <= time) ++cursor;
            return bps[cursor].value;
        };
        while (t < t2) {
            const double xv = value_at(xs, xi, t);
            const double hv = value_at(hs, hi, t);
            double next = t2;
            if (xi + 1 < xs.size()) next = std::min(next, xs[xi + 1].time);
            if (hi + 1 < hs.size()) next = std::min(next, hs[hi + 1].time);
            const double err = xv - hv;
            acc += err * err * (next - t);
            t = next;
        }
        out.per_index[i - 1] = acc;
        out.integral += acc;
    }
    return out;
}

MetricsReport summarize(const SimulationTrace& trace, const EnvironmentPath& path, const ScenarioConfig& cfg) {
    MetricsReport r;
    const double horizon = trace.horizon;
    const auto mse = integrate_mse(path, trace.estimates, 0.0, horizon);
    r.mse_per_index.resize(mse.per_index.size());
    for (std::size_t i = 0; i < mse.per_index.size(); ++i) r.mse_per_index[i] = mse.per_index[i] / horizon;
    r.mse_total = 0.0;
    for (double v : r.mse_per_index) r.mse_total += v;
    r.power_total = trace.ledger.total(cfg.broadcast_accounting);
    r.uplink_components = trace.ledger.uplink_components();
    r.downlink_components = trace.ledger.downlink_components(cfg.broadcast_accounting);
    r.cancellations = static_cast<long long>(trace.cancellations.size());
    r.drift_triggers = trace.drift_triggers;
    return r;
}

std::vector<EstimateBreakpoint> replay_estimates(const SimulationTrace& trace, const ComponentMap& map) {
    EstimateState state(map, trace.initial_estimate);
    for (const auto& rec : trace.events) {
        if (rec.kind != TraceKind::UplinkArrive) continue;
        for (std::size_t i = 0; i < rec.components.size(); ++i)
            state.fuse(rec.time, rec.actor, rec.components[i], rec.values[i], rec.aux);
    }
    return state.trajectory();
}

void write_metrics_header(std::ostream& os, int n) {
    os << "replication,arch,mse_total,power_total,uplink_components,downlink_components,cancellations";
    for (int i = 1; i <= n; ++i) os << ",mse_idx_" << i;
    os << '\n';
}

void write_metrics_row(std::ostream& os, std::uint64_t replication, Architecture arch, const MetricsReport& report) {
    os << replication << ',' << to_string(arch) << ',' << format_number(report.mse_total) << ','
       << format_number(report.power_total) << ',' << report.uplink_components << ',' << report.downlink_components
       << ',' << report.cancellations;
    for (double v : report.mse_per_index) os << ',' << format_number(v);
    os << '\n';
}

}  // namespace outformation
