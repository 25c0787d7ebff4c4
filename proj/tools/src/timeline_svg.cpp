#include "outformation/timeline_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace outformation::cli {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Series {
    std::string label;
    std::string color;
    std::vector<std::pair<double, int>> transfers;
    double per_component;
    std::vector<double> cancels;
    std::vector<Point> points;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::vector<Point> cumulative_staircase(std::vector<std::pair<double, int>> transfers, double per_component,
                                        double x_begin, double x_end) {
    std::sort(transfers.begin(), transfers.end());
    std::vector<double> xs{x_begin, x_end};
    for (const auto& [t, m] : transfers) {
        xs.push_back(t);
        xs.push_back(t + m * per_component);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto value = [&](double x) {
        double acc = 0.0;
        for (const auto& [t, m] : transfers) {
            if (x <= t) continue;
            const double dur = m * per_component;
            acc += dur > 0.0 ? std::min(static_cast<double>(m), m * (x - t) / dur) : m;
        }
        return acc;
    };
    std::vector<Point> pts;
    for (double x : xs)
        if (x >= x_begin && x <= x_end) pts.emplace_back(x, value(x));
    return pts;
}

double staircase_value(const std::vector<Point>& points, double t) {
    if (points.empty() || t <= points.front().first) return points.empty() ? 0.0 : points.front().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
            const auto& [x0, y0] = points[i - 1];
            const auto& [x1, y1] = points[i];
            return x1 > x0 ? y0 + (y1 - y0) * (t - x0) / (x1 - x0) : y1;
        }
    }
    return points.back().second;
}

std::string render_timeline_svg(const TimelinePlotSpec& spec) {
    std::vector<Series> series;
    if (spec.sensor1) series.push_back({"sensor 1 uplink", "#1f77b4", {}, spec.dt_up, {}, {}});
    if (spec.sensor2) series.push_back({"sensor 2 uplink", "#2ca02c", {}, spec.dt_up, {}, {}});
    if (spec.central) series.push_back({"central downlink", "#d62728", {}, spec.dt_down, {}, {}});
    auto slot = [&](int actor) -> Series* {
        const std::string want = actor == 1 ? "sensor 1 uplink" : actor == 2 ? "sensor 2 uplink" : "central downlink";
        for (auto& s : series)
            if (s.label == want) return &s;
        return nullptr;
    };

    double x_last = spec.x_min;
    bool any = false;
    for (const auto& e : spec.events) {
        const int m = static_cast<int>(e.components.size());
        if (e.kind == TraceKind::UplinkSend || e.kind == TraceKind::BroadcastSend) {
            if (auto* s = slot(e.kind == TraceKind::BroadcastSend ? kCentral : e.actor)) {
                s->transfers.emplace_back(e.time, m);
                x_last = std::max(x_last, e.time + m * s->per_component);
                any = true;
            }
        } else if (e.kind == TraceKind::Cancel) {
            if (auto* s = slot(e.actor)) {
                s->cancels.push_back(e.time);
                x_last = std::max(x_last, e.time);
                any = true;
            }
        }
    }
    if (!any) throw std::invalid_argument("empty trace");

    const double x_max = spec.x_max > spec.x_min ? spec.x_max : x_last;
    const double x_span = x_max > spec.x_min ? x_max - spec.x_min : 1.0;
    double y_max = 1.0;
    for (auto& s : series) {
        s.points = cumulative_staircase(s.transfers, s.per_component, spec.x_min, x_max);
        if (!s.points.empty()) y_max = std::max(y_max, s.points.back().second);
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - spec.x_min) / x_span * plot_w; };
    auto sy = [&](double y) { return kTop + plot_h - y / y_max * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        os << "<text x=\"" << fmt(kLeft) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
           << escape(spec.title) << "</text>\n";

    // Axes and ticks.
    os << "<g stroke=\"black\" stroke-width=\"1\">\n";
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(kLeft + plot_w) << "\" y2=\""
       << fmt(sy(0)) << "\"/>\n";
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(sy(0))
       << "\"/>\n</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    constexpr int xticks = 8;
    for (int i = 0; i <= xticks; ++i) {
        const double x = spec.x_min + x_span * i / xticks;
        os << "<line x1=\"" << fmt(sx(x)) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(sx(x)) << "\" y2=\""
           << fmt(sy(0) + 5) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(sy(0) + 18) << "\" text-anchor=\"middle\">" << fmt(x)
           << "</text>\n";
    }
    const int ystep = std::max(1, static_cast<int>(std::ceil(y_max / 8.0)));
    for (int y = 0; y <= static_cast<int>(y_max); y += ystep) {
        os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(sy(y)) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
           << fmt(sy(y)) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(sy(y) + 4) << "\" text-anchor=\"end\">" << y
           << "</text>\n";
    }
    os << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 10)
       << "\" text-anchor=\"middle\">time</text>\n";
    os << "<text x=\"14\" y=\"" << fmt(kTop + plot_h / 2) << "\" transform=\"rotate(-90 14 " << fmt(kTop + plot_h / 2)
       << ")\" text-anchor=\"middle\">cumulative components</text>\n</g>\n";

    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i)
            os << (i ? " " : "") << fmt(sx(s.points[i].first)) << ',' << fmt(sy(s.points[i].second));
        os << "\"/>\n";
        for (double t : s.cancels) {
            const double cx = sx(t);
            const double cy = sy(staircase_value(s.points, t));
            os << "<path class=\"cancel\" d=\"M" << fmt(cx - 5) << ' ' << fmt(cy - 5) << " L" << fmt(cx + 5) << ' '
               << fmt(cy + 5) << " M" << fmt(cx - 5) << ' ' << fmt(cy + 5) << " L" << fmt(cx + 5) << ' '
               << fmt(cy - 5) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        }
    }

    os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = kTop + 10;
    for (const auto& s : series) {
        os << "<line x1=\"" << fmt(kWidth - kRight + 10) << "\" y1=\"" << fmt(ly) << "\" x2=\""
           << fmt(kWidth - kRight + 30) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
           << "\" stroke-width=\"2\"/>";
        os << "<text x=\"" << fmt(kWidth - kRight + 35) << "\" y=\"" << fmt(ly + 4) << "\">" << s.label << "</text>\n";
        ly += 18;
    }
    os << "<text x=\"" << fmt(kWidth - kRight + 10) << "\" y=\"" << fmt(ly + 4) << "\">x = cancellation</text>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

std::vector<EventRow> read_events_csv(std::istream& is) {
    std::vector<EventRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;
    if (line != "replication,arch,time,class,actor,kind,component_ids,value")
        throw std::invalid_argument("unexpected events.csv header");
    static const std::vector<std::pair<std::string, TraceKind>> kinds = {
        {"sample", TraceKind::Sample},           {"trigger", TraceKind::Trigger},
        {"schedule", TraceKind::Schedule},       {"cancel", TraceKind::Cancel},
        {"uplink_send", TraceKind::UplinkSend},  {"uplink_arrive", TraceKind::UplinkArrive},
        {"bcast_send", TraceKind::BroadcastSend}, {"bcast_arrive", TraceKind::BroadcastArrive}};
    long long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 8) throw std::invalid_argument("events.csv line " + std::to_string(lineno) + ": expected 8 fields");
        try {
            EventRow row;
            row.replication = std::stoull(f[0]);
            row.arch = f[1];
            row.record.time = std::stod(f[2]);
            row.record.cls = static_cast<EventClass>(std::stoi(f[3]));
            row.record.actor = std::stoi(f[4]);
            auto it = std::find_if(kinds.begin(), kinds.end(), [&](const auto& k) { return k.first == f[5]; });
            if (it == kinds.end()) throw std::invalid_argument("unknown kind '" + f[5] + "'");
            row.record.kind = it->second;
            if (!f[6].empty())
                for (const auto& c : split(f[6], ';')) row.record.components.push_back(std::stoi(c));
            if (!f[7].empty()) {
                if (row.record.kind == TraceKind::Schedule) {
                    row.record.aux = std::stod(f[7]);
                } else {
                    for (const auto& v : split(f[7], ';')) row.record.values.push_back(std::stod(v));
                }
            }
            rows.push_back(std::move(row));
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("events.csv line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace outformation::cli
