#include "outformation/engine.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "outformation/sensing.hpp"

namespace outformation {

namespace {

struct Broadcast {
    int destination;
    std::vector<BroadcastItem> items;
};

std::uint64_t mix_double(std::uint64_t h, double v) { return hash_combine(h, std::bit_cast<std::uint64_t>(v)); }

class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, const ComponentMap& map, Architecture arch, const EnvironmentPath& path,
              const RandomStreams& streams, const ConditionedScenario* scenario, double horizon,
              const SimOptions& options)
        : cfg_(cfg),
          map_(map),
          arch_(arch),
          path_(path),
          streams_(streams),
          scenario_(scenario),
          horizon_(horizon),
          options_(options),
          sensors_{SensorState(1, map, path.initial()), SensorState(2, map, path.initial())},
          estimate_(map, path.initial()) {
        trace_.arch = arch;
        trace_.replication = streams.replication();
        trace_.horizon = horizon;
        trace_.initial_estimate = path.initial();
        trace_.ledger = PowerLedger(cfg.p_up, cfg.p_down);
        trace_.primitive_checksum = primitive_checksum(path, streams, scenario);
    }

    SimulationResult run() {
        // Environment steps are not queued: the path is right-continuous, so a
        // sample at c * delta_t already sees step c, which is what class 1 < 2 encodes.
        for (int j = 1; j <= kSensorCount; ++j) push(0.0, EventClass::Sampling, j, 0);

        std::size_t processed = 0;
        while (!queue_.empty()) {
            const Event ev = queue_.pop();
            if (ev.time >= horizon_) break;
            if (++processed > options_.max_events) throw EngineError("event queue overflow");
            switch (ev.cls) {
                case EventClass::Sampling: on_sampling(ev); break;
                case EventClass::BroadcastArrival: on_broadcast_arrival(ev); break;
                case EventClass::BackoffFire: on_fire(ev); break;
                case EventClass::UplinkArrival: on_uplink_arrival(ev); break;
                case EventClass::EnvironmentChange: break;
            }
        }
        trace_.estimates = estimate_.trajectory();
        SimulationResult result;
        result.metrics = summarize(trace_, path_, cfg_);
        result.trace = std::move(trace_);
        return result;
    }

private:
    SensorState& sensor(int j) { return sensors_[static_cast<std::size_t>(j - 1)]; }

    void push(double t, EventClass cls, int actor, long long payload) { queue_.push({t, cls, actor, seq_++, payload}); }

    void log(double t, EventClass cls, int actor, TraceKind kind, std::vector<ComponentId> comps,
             std::vector<double> values, double aux = 0.0) {
        trace_.events.push_back({t, cls, actor, kind, std::move(comps), std::move(values), aux});
    }

    static std::vector<ComponentId> ids(const std::vector<Observation>& obs) {
        std::vector<ComponentId> out;
        out.reserve(obs.size());
        for (const auto& o : obs) out.push_back(o.component);
        return out;
    }
    static std::vector<double> vals(const std::vector<Observation>& obs) {
        std::vector<double> out;
        out.reserve(obs.size());
        for (const auto& o : obs) out.push_back(o.value);
        return out;
    }

    void charge_causal(double t, long long broadcast, ComponentId k) {
        if (charged_.insert({broadcast, k}).second) trace_.ledger.add_causal_downlink(t, 1);
    }

    // Only verification instants are simulated: samples in between never change
    // any protocol state.
    void on_sampling(const Event& ev) {
        const int j = ev.actor;
        const double t = ev.time;
        const long long instant = ev.payload;
        auto& state = sensor(j);

        std::vector<Observation> obs;
        obs.reserve(state.components().size());
        for (auto k : state.components()) obs.push_back(observe(path_, map_, cfg_, j, k, t, streams_));
        if (options_.record_samples) log(t, EventClass::Sampling, j, TraceKind::Sample, ids(obs), vals(obs));

        auto outcome = verify(state, obs, arch_, cfg_.epsilon);
        trace_.drift_triggers += static_cast<long long>(outcome.drift.size());
        for (const auto& o : outcome.suppressed) {
            log(t, EventClass::Sampling, j, TraceKind::Cancel, {o.component}, {o.value});
            trace_.cancellations.push_back({t, j, o.component, true});
            if (auto src = ref_source_[j - 1].find(o.component); src != ref_source_[j - 1].end())
                charge_causal(t, src->second, o.component);
        }
        if (!outcome.triggered.empty()) {
            log(t, EventClass::Sampling, j, TraceKind::Trigger, ids(outcome.triggered), vals(outcome.triggered));
            const double backoff = draw_backoff(cfg_, streams_, j, instant, scenario_);
            const auto& sched = schedule_backoff(state, outcome.triggered, t, instant, backoff);
            for (const auto& o : outcome.triggered) ref_source_[j - 1].erase(o.component);
            log(t, EventClass::Sampling, j, TraceKind::Schedule, ids(sched.items), {}, sched.fire_time);
            push(sched.fire_time, EventClass::BackoffFire, j, instant);
        }

        const double next = static_cast<double>(instant + 1) * cfg_.period(j);
        if (next < horizon_) push(next, EventClass::Sampling, j, instant + 1);
    }

    void on_broadcast_arrival(const Event& ev) {
        const auto& b = broadcasts_.at(static_cast<std::size_t>(ev.payload));
        const int j = b.destination;
        std::vector<ComponentId> comps;
        std::vector<double> values;
        for (const auto& item : b.items) {
            comps.push_back(item.component);
            values.push_back(item.value);
        }
        log(ev.time, EventClass::BroadcastArrival, j, TraceKind::BroadcastArrive, comps, values);

        auto& state = sensor(j);
        std::map<ComponentId, double> own;
        for (const auto& sched : state.pending())
            for (const auto& o : sched.items) own[o.component] = o.value;
        const auto cancelled = apply_broadcast(state, b.items, cfg_.epsilon, arch_);
        for (const auto& item : b.items) ref_source_[j - 1][item.component] = ev.payload;
        for (auto k : cancelled) {
            log(ev.time, EventClass::BroadcastArrival, j, TraceKind::Cancel, {k}, {own[k]});
            trace_.cancellations.push_back({ev.time, j, k, false});
            charge_causal(ev.time, ev.payload, k);
        }
    }

    void on_fire(const Event& ev) {
        const int j = ev.actor;
        auto packet = fire_transmission(sensor(j), ev.payload, ev.time);
        if (!packet) return;
        const int m = static_cast<int>(packet->items.size());
        for (const auto& o : packet->items) ref_source_[j - 1].erase(o.component);
        log(ev.time, EventClass::BackoffFire, j, TraceKind::UplinkSend, ids(packet->items), vals(packet->items),
            packet->items.front().time);
        trace_.ledger.add_uplink(ev.time, j, m);
        const auto idx = static_cast<long long>(packets_.size());
        packets_.push_back(std::move(*packet));
        push(uplink_arrival_time(ev.time, m, cfg_.dt_up), EventClass::UplinkArrival, j, idx);
    }

    void on_uplink_arrival(const Event& ev) {
        const auto& packet = packets_.at(static_cast<std::size_t>(ev.payload));
        const int j = packet.sensor;
        log(ev.time, EventClass::UplinkArrival, j, TraceKind::UplinkArrive, ids(packet.items), vals(packet.items),
            packet.items.front().time);
        for (const auto& o : packet.items) estimate_.fuse(ev.time, j, o.component, o.value, o.time);

        if (arch_ != Architecture::OutEps) return;
        Broadcast b{j == 1 ? 2 : 1, {}};
        for (const auto& o : packet.items)
            if (map_.is_shared(o.component)) b.items.push_back({o.component, o.value});
        if (b.items.empty()) return;
        const int ms = static_cast<int>(b.items.size());
        std::vector<ComponentId> comps;
        std::vector<double> values;
        for (const auto& item : b.items) {
            comps.push_back(item.component);
            values.push_back(item.value);
        }
        log(ev.time, EventClass::UplinkArrival, kCentral, TraceKind::BroadcastSend, comps, values,
            packet.items.front().time);
        trace_.ledger.add_broadcast(ev.time, ms);
        const auto idx = static_cast<long long>(broadcasts_.size());
        broadcasts_.push_back(std::move(b));
        push(broadcast_arrival_time(ev.time, ms, cfg_.dt_down), EventClass::BroadcastArrival, broadcasts_.back().destination,
             idx);
    }

    const ScenarioConfig& cfg_;
    const ComponentMap& map_;
    Architecture arch_;
    const EnvironmentPath& path_;
    RandomStreams streams_;
    const ConditionedScenario* scenario_;
    double horizon_;
    SimOptions options_;

    std::array<SensorState, kSensorCount> sensors_;
    EstimateState estimate_;
    EventQueue queue_;
    std::uint64_t seq_ = 0;
    std::vector<UplinkPacket> packets_;
    std::vector<Broadcast> broadcasts_;
    // Broadcast that set each sensor's current reference (OUT only), for conditional charging.
    std::array<std::map<ComponentId, long long>, kSensorCount> ref_source_;
    std::set<std::pair<long long, ComponentId>> charged_;
    SimulationTrace trace_;
};

}  // namespace

std::uint64_t primitive_checksum(const EnvironmentPath& path, const RandomStreams& streams,
                                 const ConditionedScenario* scenario) {
    std::uint64_t h = hash_combine(streams.seed(), streams.replication());
    h = hash_combine(h, streams.noise_epoch());
    for (double x : path.initial()) h = mix_double(h, x);
    for (const auto& rec : path.records()) {
        h = hash_combine(h, static_cast<std::uint64_t>(rec.interval));
        for (const auto& [i, step] : rec.steps) h = mix_double(hash_combine(h, static_cast<std::uint64_t>(i)), step);
    }
    if (scenario) {
        for (const auto& o : scenario->backoff_overrides) {
            h = hash_combine(h, static_cast<std::uint64_t>(o.sensor));
            h = mix_double(hash_combine(h, static_cast<std::uint64_t>(o.instant)), o.value);
        }
    }
    return h;
}

SimulationResult run_simulation(const ScenarioConfig& cfg, const ComponentMap& map, Architecture arch,
                                const EnvironmentPath& path, const RandomStreams& streams, const SimOptions& options) {
    return Simulator(cfg, map, arch, path, streams, nullptr, cfg.t_sim, options).run();
}

SimulationResult run_simulation(const ScenarioConfig& cfg, const ComponentMap& map, Architecture arch,
                                const ConditionedScenario& scenario, const RandomStreams& streams,
                                const SimOptions& options) {
    const auto s = streams.with_epoch(scenario.noise_epoch);
    return Simulator(cfg, map, arch, scenario.path, s, &scenario, scenario.horizon, options).run();
}

}  // namespace outformation
