#pragma once

#include "eegfc/net.hpp"
#include "eegfc/recording.hpp"
#include "eegfc/tokenizer.hpp"

#include <string>
#include <vector>

namespace eegfc {

// Sliding-window inference and event-based evaluation: seizure-probability
// timeline, alarm thresholding, false-alarm rate, per-onset detection latency.

struct AlarmEntry {
    double t_end = 0.0; // the moment the prediction is made (window end)
    double p1 = 0.0;    // probability of the positive class
    bool alarm = false; // p1 >= threshold
};

struct AlarmTimeline {
    std::vector<AlarmEntry> entries; // strictly increasing t_end
    double threshold = 0.5;
    double stride_s = 0.0;
};

// Scores overlapping windows (default 75% overlap -> 7.5 s stride at 30 s
// windows) with the classifier, dropout off.
template <class T>
AlarmTimeline infer_timeline(const Model<T>& m, const Recording& rec, const TokenizerState& tok,
                             double seg_dur_s = 30.0, double overlap = 0.75, double threshold = 0.5);

struct PerEvent {
    double onset_s = 0.0;
    bool detected = false;
    double first_alarm_s = -1.0; // t_end of the first true alarm; -1 if none
    double delay_s = -1.0;       // first_alarm - (onset - horizon); in [0, horizon]
    double warning_s = -1.0;     // onset - first_alarm (time-to-seizure convention)
};

struct EventReport {
    // window-level confusion over the timeline entries (labels from the
    // horizon rule applied at each t_end)
    int tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    // event level
    double far_per_h = 0.0;
    double mean_delay_s = 0.0;   // over detected events; valid iff has_delay
    double sensitivity_pct = 0.0; // valid iff has_sensitivity (>= 1 onset)
    bool has_delay = false;
    bool has_sensitivity = false;
    std::vector<PerEvent> per_event;
};

// An alarm at time t is TRUE iff some onset s satisfies t in [s - horizon, s]
// (closed). FAR counts the remaining alarms per recorded hour. An onset is
// detected iff at least one true alarm maps to it; its delay is measured from
// the horizon start (s - horizon) to the first such alarm. Entries are
// re-sorted and exact-duplicate timestamps deduplicated first.
EventReport match_events(const AlarmTimeline& timeline, const std::vector<double>& onsets,
                         double duration_s, double horizon_s = 30.0);

// timeline CSV: "t_end_s,p1,alarm"
std::string write_timeline_csv(const AlarmTimeline& timeline);
AlarmTimeline parse_timeline_csv(const std::string& text, double threshold = 0.5);

// JSON report, fixed key order: accuracy, precision, recall, f1, far_per_h,
// mean_delay_s, sensitivity_pct, per_event[]. Undefined aggregates are null.
std::string write_event_report_json(const EventReport& report);
EventReport parse_event_report_json(const std::string& text);

extern template AlarmTimeline infer_timeline<float>(const Model<float>&, const Recording&,
                                                    const TokenizerState&, double, double, double);
extern template AlarmTimeline infer_timeline<double>(const Model<double>&, const Recording&,
                                                     const TokenizerState&, double, double, double);

} // namespace eegfc
