#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "outformation/trace.hpp"

namespace outformation::cli {

using Point = std::pair<double, double>;

struct TimelinePlotSpec {
    std::vector<TraceRecord> events;
    double dt_up = 1.0;
    double dt_down = 1.0;
    bool sensor1 = true;
    bool sensor2 = true;
    bool central = true;
    double x_min = 0.0;
    double x_max = -1.0;  // negative: end of the last transfer
    std::string title;
};

/// Cumulative transferred components for transfers (start time, component count)
/// that each take count * per_component seconds. The result starts at (x_begin, 0),
/// has a vertex at every ramp start and end, and ends at x_end.
std::vector<Point> cumulative_staircase(std::vector<std::pair<double, int>> transfers, double per_component,
                                        double x_begin, double x_end);

/// Value of a staircase at time t (linear between vertices).
double staircase_value(const std::vector<Point>& points, double t);

/// Throws std::invalid_argument("empty trace") when there is nothing to draw.
std::string render_timeline_svg(const TimelinePlotSpec& spec);

struct EventRow {
    std::uint64_t replication = 0;
    std::string arch;
    TraceRecord record;
};

/// Reads an events.csv written by the simulate command.
std::vector<EventRow> read_events_csv(std::istream& is);

}  // namespace outformation::cli
