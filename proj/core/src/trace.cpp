#include "outformation/trace.hpp"

#include <cstdio>
#include <ostream>

namespace outformation {

std::string_view to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::Sample: return "sample";
        case TraceKind::Trigger: return "trigger";
        case TraceKind::Schedule: return "schedule";
        case TraceKind::Cancel: return "cancel";
        case TraceKind::UplinkSend: return "uplink_send";
        case TraceKind::UplinkArrive: return "uplink_arrive";
        case TraceKind::BroadcastSend: return "bcast_send";
        case TraceKind::BroadcastArrive: return "bcast_arrive";
    }
    return "?";
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void PowerLedger::add_uplink(double t, int sensor, int components) {
    if (components > 0) entries_.push_back({t, sensor, true, components, false});
}

void PowerLedger::add_broadcast(double t, int components) {
    if (components > 0) entries_.push_back({t, kCentral, false, components, false});
}

void PowerLedger::add_causal_downlink(double t, int components) {
    if (components > 0) entries_.push_back({t, kCentral, false, components, true});
}

bool PowerLedger::counts(const Entry& e, BroadcastAccounting mode) const {
    if (e.uplink) return true;
    return mode == BroadcastAccounting::Always ? !e.causal : e.causal;
}

long long PowerLedger::uplink_components() const {
    long long n = 0;
    for (const auto& e : entries_)
        if (e.uplink) n += e.components;
    return n;
}

long long PowerLedger::downlink_components(BroadcastAccounting mode) const {
    long long n = 0;
    for (const auto& e : entries_)
        if (!e.uplink && counts(e, mode)) n += e.components;
    return n;
}

double PowerLedger::total(BroadcastAccounting mode) const {
    double r = 0.0;
    for (const auto& e : entries_)
        if (counts(e, mode)) r += energy(e);
    return r;
}

double PowerLedger::window(double t1, double t2, BroadcastAccounting mode) const {
    double r = 0.0;
    for (const auto& e : entries_)
        if (e.time >= t1 && e.time < t2 && counts(e, mode)) r += energy(e);
    return r;
}

void write_events_header(std::ostream& os) {
    os << "replication,arch,time,class,actor,kind,component_ids,value\n";
}

void write_events_csv(std::ostream& os, const SimulationTrace& trace) {
    for (const auto& rec : trace.events) {
        os << trace.replication << ',' << to_string(trace.arch) << ',' << format_number(rec.time) << ','
           << static_cast<int>(rec.cls) << ',' << rec.actor << ',' << to_string(rec.kind) << ',';
        for (std::size_t i = 0; i < rec.components.size(); ++i) os << (i ? ";" : "") << rec.components[i];
        os << ',';
        if (rec.kind == TraceKind::Schedule) {
            os << format_number(rec.aux);
        } else {
            for (std::size_t i = 0; i < rec.values.size(); ++i) os << (i ? ";" : "") << format_number(rec.values[i]);
        }
        os << '\n';
    }
}

}  // namespace outformation
