#pragma once

#include <algorithm>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trajexit/cost_model.hpp"
#include "trajexit/error.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/ingest.hpp"
#include "trajexit/policy.hpp"
#include "trajexit/text.hpp"

namespace trajexit {

// ---------------------------------------------------------------------------
// Multi-vessel aggregation

/// Motion cue of the closest vessel pair at one window start.
struct PairCue {
  double d_t = 0.0;
  double v_t = 0.0;
  bool valid_v = false;
  bool valid = true;
  std::string vessel_a;  // lexicographically smaller id of the closest pair
  std::string vessel_b;
};

/// Minimum pairwise distance at t, with the closure rate of the pair attaining it.
///
/// The rate compares against the same pair one second earlier; pass
/// has_previous = false for the first window. Exact distance ties go to
/// the lexicographically smallest (id, id) pair.
inline PairCue aggregate_pairs(std::span<const Trajectory> trajs, double t, bool has_previous) {
  if (trajs.size() < 2) throw InputError("need at least two vessels");
  bool found = false;
  PairCue best;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    for (std::size_t j = i + 1; j < trajs.size(); ++j) {
      const Trajectory* a = &trajs[i];
      const Trajectory* b = &trajs[j];
      if (b->vessel_id() < a->vessel_id()) std::swap(a, b);
      const PositionSample pa = a->position_at(t);
      const PositionSample pb = b->position_at(t);
      const double d = haversine_m(pa.position, pb.position);
      const bool better = !found || d < best.d_t ||
                          (d == best.d_t && std::pair(a->vessel_id(), b->vessel_id()) <
                                                std::pair(best.vessel_a, best.vessel_b));
      if (!better) continue;
      found = true;
      best = PairCue{d, 0.0, false, !pa.across_gap && !pb.across_gap, a->vessel_id(), b->vessel_id()};
      if (has_previous && best.valid) {
        const PositionSample qa = a->position_at(t - 1.0);
        const PositionSample qb = b->position_at(t - 1.0);
        if (!qa.across_gap && !qb.across_gap) {
          best.v_t = closure_rate(haversine_m(qa.position, qb.position), d, 1.0);
          best.valid_v = true;
        }
      }
    }
  }
  return best;
}

/// Motion windows for any number (>= 2) of vessels. Two vessels reduce to build_motion_windows.
inline std::vector<MotionWindow> build_windows(std::span<const Trajectory> trajs) {
  if (trajs.size() < 2) throw InputError("need at least two vessels");
  if (trajs.size() == 2) return build_motion_windows(trajs[0], trajs[1]);
  std::vector<const Trajectory*> ptrs;
  for (const auto& t : trajs) ptrs.push_back(&t);
  const WindowGrid grid = common_window_grid(ptrs);
  std::vector<MotionWindow> out;
  out.reserve(grid.count);
  for (std::size_t k = 0; k < grid.count; ++k) {
    MotionWindow w;
    w.window_index = k;
    w.t_start = grid.t_start + static_cast<double>(k);
    w.t_end = w.t_start + 1.0;
    const PairCue cue = aggregate_pairs(trajs, w.t_start, k > 0 && out.back().valid);
    w.d_t = cue.d_t;
    w.v_t = cue.v_t;
    w.valid_v = cue.valid_v;
    w.valid = cue.valid;
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detector backends

/// Stand-in for the detector: yields detections attributable to the selected heads.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<DetectionRecord> detect(std::size_t frame_index, HeadSet selection) const = 0;
  virtual std::string name() const = 0;
};

/// Accounts cost only; never produces detections.
class CostOnlyBackend final : public DetectorBackend {
 public:
  std::vector<DetectionRecord> detect(std::size_t, HeadSet) const override { return {}; }
  std::string name() const override { return "cost"; }
};

/// Replays precomputed detections, keeping those whose head was selected.
class ReplayBackend final : public DetectorBackend {
 public:
  explicit ReplayBackend(std::vector<DetectionRecord> records) : index_(std::move(records)) {}

  std::vector<DetectionRecord> detect(std::size_t frame_index, HeadSet selection) const override {
    auto all = index_.for_frame(static_cast<std::int64_t>(frame_index));
    std::erase_if(all, [&](const DetectionRecord& d) { return !selection.contains(d.head); });
    return all;
  }
  std::string name() const override { return "replay"; }

 private:
  DetectionIndex index_;
};

// ---------------------------------------------------------------------------
// Replay run

struct FrameDecision {
  std::size_t frame_index = 0;
  std::size_t window_index = 0;
  HeadSet selection;
  double latency_ms = 0.0;
  double d_t = 0.0;
  double v_t = 0.0;
  std::vector<DetectionRecord> detections;
};

struct WindowDecision {
  std::size_t window_index = 0;
  double t_start = 0.0;
  double d_t = 0.0;
  double v_t = 0.0;
  bool valid = true;
  HeadSet selection;
};

struct SimulationReport {
  std::size_t frame_count = 0;
  std::size_t frames_low = 0;
  std::size_t frames_full = 0;
  double total_latency_ms = 0.0;
  double full_model_baseline_ms = 0.0;
  double latency_saving_pct = 0.0;
  std::vector<WindowDecision> per_window_timeline;
};

struct SimulationResult {
  SimulationReport report;
  std::vector<FrameDecision> decisions;
};

inline std::vector<WindowDecision> window_decisions(std::span<const MotionWindow> windows, const PolicyConfig& cfg) {
  const auto sel = decide_windows(windows, cfg);
  std::vector<WindowDecision> out;
  out.reserve(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    out.push_back({w.window_index, w.t_start, w.d_t, w.v_t, w.valid, sel[k]});
  }
  return out;
}

/// Runs the policy over precomputed windows; the core of run().
inline SimulationResult run_windows(std::span<const MotionWindow> windows, const FrameStreamMeta& meta,
                                    const PolicyConfig& cfg, const DetectorProfile& profile,
                                    const DetectorBackend& backend) {
  cfg.validate();
  meta.validate();
  const CoverageReport coverage = check_frame_coverage(meta, windows);
  if (!coverage.ok()) throw CoverageError("frame stream not covered by trajectories: " + coverage.describe());

  const double low_ms = latency_for(cfg.low_set, profile);
  const double full_ms = latency_for(cfg.full_set, profile);

  const FrameWindowMap map = map_frames_to_windows(meta, windows);
  const SelectionTimeline timeline = selection_timeline(windows, map, cfg);

  SimulationResult result;
  SimulationReport& rep = result.report;
  rep.frame_count = meta.frame_count;
  rep.per_window_timeline = window_decisions(windows, cfg);
  result.decisions.reserve(meta.frame_count);
  for (std::size_t i = 0; i < meta.frame_count; ++i) {
    const std::size_t k = map.window_of[i];
    FrameDecision fd;
    fd.frame_index = i;
    fd.window_index = k;
    fd.selection = timeline.per_frame[i];
    fd.latency_ms = fd.selection == cfg.low_set ? low_ms : full_ms;
    fd.d_t = windows[k].d_t;
    fd.v_t = windows[k].v_t;
    fd.detections = backend.detect(i, fd.selection);
    if (fd.selection == cfg.low_set) ++rep.frames_low;
    else ++rep.frames_full;
    rep.total_latency_ms += fd.latency_ms;
    result.decisions.push_back(std::move(fd));
  }
  rep.full_model_baseline_ms = static_cast<double>(meta.frame_count) * full_ms;
  rep.latency_saving_pct = (1.0 - rep.total_latency_ms / rep.full_model_baseline_ms) * 100.0;
  return result;
}

/// Builds windows from the trajectories, then replays the frame stream through the policy.
inline SimulationResult run(std::span<const Trajectory> trajs, const FrameStreamMeta& meta, const PolicyConfig& cfg,
                            const DetectorProfile& profile, const DetectorBackend& backend) {
  const auto windows = build_windows(trajs);
  return run_windows(windows, meta, cfg, profile, backend);
}

// ---------------------------------------------------------------------------
// Outputs

inline constexpr std::string_view kTimelineHeader = "window,t_start,d_m,v_mps,heads";

inline void export_timeline(std::span<const WindowDecision> timeline, std::ostream& out) {
  out << kTimelineHeader << '\n';
  for (const auto& w : timeline) {
    out << w.window_index << ',' << text::format_fixed(w.t_start, 3) << ',' << text::format_fixed(w.d_t, 3) << ','
        << text::format_fixed(w.v_t, 3) << ',' << to_string(w.selection) << '\n';
  }
  if (!out) throw std::runtime_error("failed to write timeline");
}

inline void export_timeline(const SimulationReport& report, std::ostream& out) {
  export_timeline(report.per_window_timeline, out);
}

inline nlohmann::ordered_json to_json(const SimulationReport& r) {
  nlohmann::ordered_json j;
  j["frame_count"] = r.frame_count;
  j["frames_low"] = r.frames_low;
  j["frames_full"] = r.frames_full;
  j["total_latency_ms"] = r.total_latency_ms;
  j["full_model_baseline_ms"] = r.full_model_baseline_ms;
  j["latency_saving_pct"] = r.latency_saving_pct;
  nlohmann::ordered_json tl = nlohmann::ordered_json::array();
  for (const auto& w : r.per_window_timeline) {
    nlohmann::ordered_json e;
    e["window"] = w.window_index;
    e["t_start"] = w.t_start;
    e["d_m"] = w.d_t;
    e["v_mps"] = w.v_t;
    e["valid"] = w.valid;
    e["heads"] = to_string(w.selection);
    tl.push_back(e);
  }
  j["per_window_timeline"] = tl;
  return j;
}

inline nlohmann::ordered_json to_json(const FrameDecision& d, bool with_detections) {
  nlohmann::ordered_json j;
  j["frame"] = d.frame_index;
  j["window"] = d.window_index;
  j["heads"] = to_string(d.selection);
  j["latency_ms"] = d.latency_ms;
  j["d_m"] = d.d_t;
  j["v_mps"] = d.v_t;
  if (with_detections) {
    nlohmann::ordered_json dets = nlohmann::ordered_json::array();
    for (const auto& det : d.detections) dets.push_back(to_json(det));
    j["detections"] = dets;
  }
  return j;
}

inline void write_decision_log(std::span<const FrameDecision> decisions, std::ostream& out, bool with_detections) {
  for (const auto& d : decisions) out << to_json(d, with_detections).dump() << '\n';
  if (!out) throw std::runtime_error("failed to write decision log");
}

/// One-paragraph summary; times in seconds with two decimals.
inline std::string summarize(const SimulationReport& r, const PolicyConfig& cfg) {
  return std::to_string(r.frame_count) + " frames: " + std::to_string(r.frames_low) + " ran " + to_string(cfg.low_set) +
         ", " + std::to_string(r.frames_full) + " ran " + to_string(cfg.full_set) + ". Total " +
         text::format_fixed(r.total_latency_ms / 1000.0, 2) + " s versus full-model baseline " +
         text::format_fixed(r.full_model_baseline_ms / 1000.0, 2) + " s (" + text::format_fixed(r.latency_saving_pct, 2) +
         "% saved).\n";
}

}  // namespace trajexit
