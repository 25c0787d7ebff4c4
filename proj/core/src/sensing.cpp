#include "outformation/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace outformation {

Observation observe(const EnvironmentPath& path, const ComponentMap& map, const ScenarioConfig& cfg, int sensor,
                    ComponentId k, double t, const RandomStreams& streams) {
    if (!map.observes(sensor, k))
        throw std::invalid_argument("component " + std::to_string(k) + " not observed by sensor " +
                                    std::to_string(sensor));
    Observation obs;
    obs.sensor = sensor;
    obs.component = k;
    obs.time = t;
    obs.sample_index = std::llround(t / cfg.tau(sensor));
    obs.value = path.value(map.index_of(k), t);
    if (cfg.sigma > 0.0) {
        obs.value += cfg.sigma * streams.standard_normal(Purpose::Noise, static_cast<std::uint64_t>(sensor),
                                                          static_cast<std::uint64_t>(k),
                                                          static_cast<std::uint64_t>(obs.sample_index));
    }
    return obs;
}

SensorState::SensorState(int sensor, const ComponentMap& map, const std::vector<double>& initial_estimate)
    : sensor_(sensor), components_(map.observed_by(sensor)) {
    for (auto k : components_) {
        const double v = initial_estimate.at(map.index_of(k) - 1);
        reference_[k] = v;
        own_reference_[k] = v;
    }
}

const ScheduledTransmission* SensorState::find_pending(long long instant) const {
    for (const auto& s : pending_)
        if (s.instant == instant) return &s;
    return nullptr;
}

bool SensorState::has_pending(ComponentId k) const {
    return std::any_of(pending_.begin(), pending_.end(), [&](const ScheduledTransmission& s) {
        return std::any_of(s.items.begin(), s.items.end(), [&](const Observation& o) { return o.component == k; });
    });
}

VerifyOutcome verify(const SensorState& state, std::span<const Observation> observations, Architecture arch,
                     double epsilon) {
    VerifyOutcome out;
    for (const auto& obs : observations) {
        if (arch == Architecture::In0) {
            out.triggered.push_back(obs);
            continue;
        }
        const bool fires = std::abs(obs.value - state.reference(obs.component)) >= epsilon;
        if (fires) out.triggered.push_back(obs);
        if (arch == Architecture::OutEps) {
            const bool fires_own = std::abs(obs.value - state.own_reference(obs.component)) >= epsilon;
            if (fires_own && !fires) out.suppressed.push_back(obs);
            if (fires && !fires_own) out.drift.push_back(obs);
        }
    }
    return out;
}

double draw_backoff(const ScenarioConfig& cfg, const RandomStreams& streams, int sensor, long long instant,
                    const ConditionedScenario* scenario) {
    if (scenario) {
        if (auto o = scenario->backoff_override(sensor, instant)) return *o;
    }
    auto s = streams.stream(Purpose::Backoff, static_cast<std::uint64_t>(sensor), static_cast<std::uint64_t>(instant));
    return sample_backoff(cfg.backoff, s);
}

const ScheduledTransmission& schedule_backoff(SensorState& state, std::span<const Observation> triggers, double t,
                                              long long instant, double backoff) {
    auto& pending = state.pending();
    for (auto& sched : pending) {
        std::erase_if(sched.items, [&](const Observation& o) {
            return std::any_of(triggers.begin(), triggers.end(),
                               [&](const Observation& tr) { return tr.component == o.component; });
        });
    }
    for (const auto& obs : triggers) {
        state.set_reference(obs.component, obs.value);
        state.set_own_reference(obs.component, obs.value);
    }
    ScheduledTransmission sched;
    sched.sensor = state.sensor();
    sched.instant = instant;
    sched.created = t;
    sched.fire_time = t + std::max(0.0, backoff);
    sched.items.assign(triggers.begin(), triggers.end());
    pending.push_back(std::move(sched));
    return pending.back();
}

std::vector<ComponentId> apply_broadcast(SensorState& state, std::span<const BroadcastItem> broadcast, double epsilon,
                                         Architecture arch) {
    if (arch != Architecture::OutEps) throw std::logic_error("broadcasts exist only under OUT(eps)");
    std::vector<ComponentId> cancelled;
    for (const auto& item : broadcast) {
        for (auto& sched : state.pending()) {
            auto it = std::find_if(sched.items.begin(), sched.items.end(),
                                   [&](const Observation& o) { return o.component == item.component; });
            if (it != sched.items.end() && std::abs(it->value - item.value) < epsilon) {
                cancelled.push_back(item.component);
                sched.items.erase(it);
            }
        }
        state.set_reference(item.component, item.value);
    }
    return cancelled;
}

std::optional<UplinkPacket> fire_transmission(SensorState& state, long long instant, double t) {
    auto& pending = state.pending();
    auto it = std::find_if(pending.begin(), pending.end(),
                           [&](const ScheduledTransmission& s) { return s.instant == instant; });
    if (it == pending.end()) return std::nullopt;
    UplinkPacket packet{state.sensor(), t, std::move(it->items)};
    pending.erase(it);
    if (packet.items.empty()) return std::nullopt;
    for (const auto& obs : packet.items) {
        state.set_reference(obs.component, obs.value);
        state.set_own_reference(obs.component, obs.value);
    }
    return packet;
}

std::vector<TriggerRecord> replay_in_eps_triggers(const EnvironmentPath& path, const ComponentMap& map,
                                                  const ScenarioConfig& cfg, const RandomStreams& streams,
                                                  double horizon) {
    std::vector<TriggerRecord> out;
    for (int j = 1; j <= kSensorCount; ++j) {
        SensorState state(j, map, path.initial());
        std::vector<Observation> obs;
        for (long long v = 0; v * cfg.period(j) < horizon; ++v) {
            const double t = static_cast<double>(v) * cfg.period(j);
            obs.clear();
            for (auto k : state.components()) obs.push_back(observe(path, map, cfg, j, k, t, streams));
            auto outcome = verify(state, obs, Architecture::InEps, cfg.epsilon);
            if (outcome.triggered.empty()) continue;
            TriggerRecord rec{j, v, t, {}};
            for (const auto& o : outcome.triggered) {
                rec.components.push_back(o.component);
                state.set_reference(o.component, o.value);
                state.set_own_reference(o.component, o.value);
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

bool setup_one_pattern_holds(const ConditionedScenario& scn, const ComponentMap& map, const ScenarioConfig& cfg,
                             const RandomStreams& streams) {
    const auto triggers = replay_in_eps_triggers(scn.path, map, cfg, streams, scn.horizon);
    if (triggers.size() != 2) return false;
    for (const auto& tr : triggers) {
        const auto instant = std::llround(scn.window_begin / cfg.period(tr.sensor));
        if (tr.instant != instant || tr.components != std::vector<ComponentId>{scn.shared_component}) return false;
    }
    return triggers[0].sensor != triggers[1].sensor;
}

bool setup_two_pattern_holds(const ConditionedScenario& scn, const ComponentMap& map, const ScenarioConfig& cfg,
                             const RandomStreams& streams) {
    const auto triggers = replay_in_eps_triggers(scn.path, map, cfg, streams, scn.horizon);
    if (triggers.size() != 2) return false;
    std::vector<ComponentId> sensor1{scn.shared_component, scn.unshared_component};
    std::sort(sensor1.begin(), sensor1.end());
    bool saw1 = false, saw2 = false;
    for (const auto& tr : triggers) {
        if (tr.sensor == 1) saw1 = tr.instant == scn.a1 && tr.components == sensor1;
        else saw2 = tr.instant == scn.a2 && tr.components == std::vector<ComponentId>{scn.shared_component};
    }
    return saw1 && saw2;
}

}  // namespace outformation
