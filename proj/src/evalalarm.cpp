#include "eegfc/evalalarm.hpp"

#include "eegfc/train.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace eegfc {

template <class T>
AlarmTimeline infer_timeline(const Model<T>& m, const Recording& rec, const TokenizerState& tok,
                             double seg_dur_s, double overlap, double threshold) {
    const std::vector<Segment> segments = segment_recording(rec, seg_dur_s, overlap);
    if (segments.empty()) fail_usage("infer: recording shorter than one window");
    AlarmTimeline tl;
    tl.threshold = threshold;
    tl.stride_s = seg_dur_s * (1.0 - overlap);
    WorkspaceHolder<T> ws(m.cfg);
    for (const Segment& s : segments) {
        T p[2];
        clf_forward(m, *ws.get(), s.window.data(), s.width, tok, p);
        const double p1 = static_cast<double>(p[1]);
        tl.entries.push_back({s.t_end, p1, p1 >= threshold});
    }
    return tl;
}

EventReport match_events(const AlarmTimeline& timeline, const std::vector<double>& onsets,
                         double duration_s, double horizon_s) {
    if (!(duration_s > 0.0)) fail_usage("match_events: duration must be positive");
    if (!(horizon_s >= 0.0)) fail_usage("match_events: horizon must be non-negative");

    // Normalize: sort by timestamp, collapse exact duplicates.
    std::vector<AlarmEntry> entries = timeline.entries;
    std::stable_sort(entries.begin(), entries.end(),
                     [](const AlarmEntry& a, const AlarmEntry& b) { return a.t_end < b.t_end; });
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const AlarmEntry& a, const AlarmEntry& b) {
                                  return a.t_end == b.t_end;
                              }),
                  entries.end());

    EventReport rep;
    int false_alarms = 0;
    {
        int tp = 0, fp = 0, tn = 0, fn = 0;
        for (const AlarmEntry& e : entries) {
            const int label = label_for_window(e.t_end, onsets, horizon_s);
            if (label == 1)
                (e.alarm ? tp : fn) += 1;
            else
                (e.alarm ? fp : tn) += 1;
        }
        false_alarms = fp;
        const BinMetrics m = compute_bin_metrics(tp, fp, tn, fn);
        rep.tp = m.tp;
        rep.fp = m.fp;
        rep.tn = m.tn;
        rep.fn = m.fn;
        rep.accuracy = m.acc;
        rep.precision = m.prec;
        rep.recall = m.rec;
        rep.f1 = m.f1;
    }
    rep.far_per_h = false_alarms / (duration_s / 3600.0);

    int detected = 0;
    double delay_sum = 0.0;
    for (double s : onsets) {
        PerEvent ev;
        ev.onset_s = s;
        for (const AlarmEntry& e : entries) {
            if (!e.alarm) continue;
            if (e.t_end >= s - horizon_s && e.t_end <= s) {
                ev.detected = true;
                ev.first_alarm_s = e.t_end;
                ev.delay_s = e.t_end - (s - horizon_s);
                ev.warning_s = s - e.t_end;
                break; // entries are sorted: first true alarm
            }
        }
        if (ev.detected) {
            detected += 1;
            delay_sum += ev.delay_s;
        }
        rep.per_event.push_back(ev);
    }
    if (!onsets.empty()) {
        rep.has_sensitivity = true;
        rep.sensitivity_pct = 100.0 * detected / static_cast<double>(onsets.size());
    }
    if (detected > 0) {
        rep.has_delay = true;
        rep.mean_delay_s = delay_sum / detected;
    }
    return rep;
}

std::string write_timeline_csv(const AlarmTimeline& timeline) {
    std::string out = "t_end_s,p1,alarm\n";
    char buf[96];
    for (const AlarmEntry& e : timeline.entries) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%d\n", e.t_end, e.p1, e.alarm ? 1 : 0);
        out += buf;
    }
    return out;
}

AlarmTimeline parse_timeline_csv(const std::string& text, double threshold) {
    AlarmTimeline tl;
    tl.threshold = threshold;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t_end_s,p1,alarm")
        fail_format("timeline CSV: bad header");
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno += 1;
        if (line.empty()) continue;
        double t = 0.0, p1 = 0.0;
        int alarm = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &t, &p1, &alarm) != 3 ||
            (alarm != 0 && alarm != 1))
            fail_format("timeline CSV: bad row at line " + std::to_string(lineno));
        tl.entries.push_back({t, p1, alarm == 1});
    }
    if (tl.entries.size() >= 2) tl.stride_s = tl.entries[1].t_end - tl.entries[0].t_end;
    return tl;
}

std::string write_event_report_json(const EventReport& report) {
    nlohmann::ordered_json j;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["far_per_h"] = report.far_per_h;
    if (report.has_delay)
        j["mean_delay_s"] = report.mean_delay_s;
    else
        j["mean_delay_s"] = nullptr;
    if (report.has_sensitivity)
        j["sensitivity_pct"] = report.sensitivity_pct;
    else
        j["sensitivity_pct"] = nullptr;
    j["per_event"] = nlohmann::ordered_json::array();
    for (const PerEvent& ev : report.per_event) {
        nlohmann::ordered_json e;
        e["onset_s"] = ev.onset_s;
        e["detected"] = ev.detected;
        if (ev.detected) {
            e["first_alarm_s"] = ev.first_alarm_s;
            e["delay_s"] = ev.delay_s;
            e["warning_s"] = ev.warning_s;
        } else {
            e["first_alarm_s"] = nullptr;
            e["delay_s"] = nullptr;
            e["warning_s"] = nullptr;
        }
        j["per_event"].push_back(e);
    }
    // window-level confusion counts, appended after the headline metrics
    j["tp"] = report.tp;
    j["fp"] = report.fp;
    j["tn"] = report.tn;
    j["fn"] = report.fn;
    return j.dump(2) + "\n";
}

EventReport parse_event_report_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail_format(std::string("event report JSON: ") + e.what());
    }
    EventReport rep;
    try {
        rep.accuracy = j.at("accuracy").get<double>();
        rep.precision = j.at("precision").get<double>();
        rep.recall = j.at("recall").get<double>();
        rep.f1 = j.at("f1").get<double>();
        rep.far_per_h = j.at("far_per_h").get<double>();
        if (!j.at("mean_delay_s").is_null()) {
            rep.has_delay = true;
            rep.mean_delay_s = j.at("mean_delay_s").get<double>();
        }
        if (!j.at("sensitivity_pct").is_null()) {
            rep.has_sensitivity = true;
            rep.sensitivity_pct = j.at("sensitivity_pct").get<double>();
        }
        for (const auto& e : j.at("per_event")) {
            PerEvent ev;
            ev.onset_s = e.at("onset_s").get<double>();
            ev.detected = e.at("detected").get<bool>();
            if (ev.detected) {
                ev.first_alarm_s = e.at("first_alarm_s").get<double>();
                ev.delay_s = e.at("delay_s").get<double>();
                ev.warning_s = e.at("warning_s").get<double>();
            }
            rep.per_event.push_back(ev);
        }
        rep.tp = j.value("tp", 0);
        rep.fp = j.value("fp", 0);
        rep.tn = j.value("tn", 0);
        rep.fn = j.value("fn", 0);
    } catch (const nlohmann::json::exception& e) {
        fail_format(std::string("event report JSON: ") + e.what());
    }
    return rep;
}

template AlarmTimeline infer_timeline<float>(const Model<float>&, const Recording&,
                                             const TokenizerState&, double, double, double);
template AlarmTimeline infer_timeline<double>(const Model<double>&, const Recording&,
                                              const TokenizerState&, double, double, double);

} // namespace eegfc
