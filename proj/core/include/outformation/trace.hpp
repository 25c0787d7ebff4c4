#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "outformation/model.hpp"

namespace outformation {

/// Processing priority at equal times (lower first).
enum class EventClass : int {
    EnvironmentChange = 1,
    Sampling = 2,
    BroadcastArrival = 3,
    BackoffFire = 4,
    UplinkArrival = 5,
};

enum class TraceKind { Sample, Trigger, Schedule, Cancel, UplinkSend, UplinkArrive, BroadcastSend, BroadcastArrive };

std::string_view to_string(TraceKind kind);

/// Actor ids: 0 is the central processor, 1 and 2 are the sensors.
inline constexpr int kCentral = 0;

struct TraceRecord {
    double time = 0.0;
    EventClass cls = EventClass::Sampling;
    int actor = 0;
    TraceKind kind = TraceKind::Sample;
    std::vector<ComponentId> components;
    std::vector<double> values;
    /// Sample timestamp for uplink/broadcast records, fire time for schedule records.
    double aux = 0.0;

    bool operator==(const TraceRecord&) const = default;
};

struct EstimateBreakpoint {
    double time;
    FullIndex index;
    double value;

    bool operator==(const EstimateBreakpoint&) const = default;
};

struct CancelRecord {
    double time;
    int sensor;
    ComponentId component;
    bool at_verification;  // held back at verification rather than removed from a pending packet

    bool operator==(const CancelRecord&) const = default;
};

/// Energy bookkeeping. Broadcasts are always recorded; `causal` downlink entries
/// are the ones charged under conditional accounting (a broadcast component that
/// cancelled or held back a peer transmission).
class PowerLedger {
public:
    struct Entry {
        double time;
        int actor;
        bool uplink;
        int components;
        bool causal;

        bool operator==(const Entry&) const = default;
    };

    PowerLedger() = default;
    PowerLedger(double p_up, double p_down) : p_up_(p_up), p_down_(p_down) {}

    void add_uplink(double t, int sensor, int components);
    void add_broadcast(double t, int components);
    void add_causal_downlink(double t, int components);

    long long uplink_components() const;
    long long downlink_components(BroadcastAccounting mode) const;
    double total(BroadcastAccounting mode) const;
    /// R(t1:t2), entries with t1 <= time < t2.
    double window(double t1, double t2, BroadcastAccounting mode) const;
    const std::vector<Entry>& entries() const { return entries_; }

    bool operator==(const PowerLedger&) const = default;

private:
    bool counts(const Entry& e, BroadcastAccounting mode) const;
    double energy(const Entry& e) const { return (e.uplink ? p_up_ : p_down_) * e.components; }

    double p_up_ = 0.0;
    double p_down_ = 0.0;
    std::vector<Entry> entries_;
};

struct SimulationTrace {
    Architecture arch = Architecture::InEps;
    std::uint64_t replication = 0;
    double horizon = 0.0;
    std::vector<double> initial_estimate;
    std::vector<TraceRecord> events;
    PowerLedger ledger;
    std::vector<EstimateBreakpoint> estimates;
    std::vector<CancelRecord> cancellations;
    long long drift_triggers = 0;
    std::uint64_t primitive_checksum = 0;
};

void write_events_header(std::ostream& os);
/// One row per trace record: replication,arch,time,class,actor,kind,component_ids,value.
void write_events_csv(std::ostream& os, const SimulationTrace& trace);

/// Fixed-format number used by every CSV writer.
std::string format_number(double v);

}  // namespace outformation
