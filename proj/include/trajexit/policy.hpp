#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajexit/error.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/ingest.hpp"

namespace trajexit {

/// Thresholds and head sets of the trajectory-aware exit criterion.
///
/// A window is "easy" when the vessels are farther apart than tau1_m and
/// not closing faster than tau2_mps; easy windows run only low_set, all
/// others run full_set. Both comparisons are strict, so values sitting
/// exactly on a threshold take the full branch.
struct PolicyConfig {
  double tau1_m = 30.0;
  double tau2_mps = 0.5;
  HeadSet low_set{Head::P3};
  HeadSet full_set = HeadSet::all();
  /// Compare |v_t| instead of the signed closure rate.
  bool use_abs_v = false;
  /// After a full-set window, keep the full set for this many further windows. 0 disables.
  std::size_t min_dwell_windows = 0;

  void validate() const {
    if (!std::isfinite(tau1_m) || !(tau1_m > 0.0)) throw InputError("tau1_m must be a positive finite distance");
    if (!std::isfinite(tau2_mps)) throw InputError("tau2_mps must be finite");
    if (low_set.empty()) throw InputError("low_set must not be empty");
    if (full_set.empty()) throw InputError("full_set must not be empty");
    if (!low_set.is_subset_of(full_set) || low_set == full_set) {
      throw InputError("low_set must be a proper subset of full_set");
    }
  }

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

namespace detail {

inline std::vector<std::string> head_list(HeadSet s) {
  std::vector<std::string> out;
  for (Head h : s.heads()) out.emplace_back(to_string(h));
  return out;
}

inline HeadSet head_set_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw InputError(std::string(key) + " must be an array of head names");
  HeadSet s;
  for (const auto& item : j) {
    if (!item.is_string()) throw InputError(std::string(key) + " must contain head names");
    Head h = head_or_throw(item.get<std::string>());
    if (s.contains(h)) throw InputError(std::string(key) + " lists " + std::string(to_string(h)) + " twice");
    s = s.with(h);
  }
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PolicyConfig& cfg) {
  nlohmann::ordered_json j;
  j["tau1_m"] = cfg.tau1_m;
  j["tau2_mps"] = cfg.tau2_mps;
  j["low_set"] = detail::head_list(cfg.low_set);
  j["full_set"] = detail::head_list(cfg.full_set);
  j["use_abs_v"] = cfg.use_abs_v;
  if (cfg.min_dwell_windows > 0) j["min_dwell_windows"] = cfg.min_dwell_windows;
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline PolicyConfig policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("policy config must be a JSON object");
  PolicyConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "tau1_m") cfg.tau1_m = value.get<double>();
      else if (key == "tau2_mps") cfg.tau2_mps = value.get<double>();
      else if (key == "low_set") cfg.low_set = detail::head_set_from_json(value, "low_set");
      else if (key == "full_set") cfg.full_set = detail::head_set_from_json(value, "full_set");
      else if (key == "use_abs_v") cfg.use_abs_v = value.get<bool>();
      else if (key == "min_dwell_windows") cfg.min_dwell_windows = value.get<std::size_t>();
      else throw InputError("unknown policy key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw InputError("policy key '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

/// True when the window qualifies for the reduced head set.
inline bool is_easy(const MotionWindow& w, const PolicyConfig& cfg) {
  if (std::isnan(w.d_t) || std::isnan(w.v_t)) throw InputError("select_heads: NaN motion cue");
  if (!w.valid) return false;
  const double v = cfg.use_abs_v ? std::abs(w.v_t) : w.v_t;
  return w.d_t > cfg.tau1_m && v < cfg.tau2_mps;
}

inline HeadSet select_heads(const MotionWindow& w, const PolicyConfig& cfg) {
  return is_easy(w, cfg) ? cfg.low_set : cfg.full_set;
}

/// Per-window selections, applying the optional dwell rule in window order.
inline std::vector<HeadSet> decide_windows(std::span<const MotionWindow> windows, const PolicyConfig& cfg) {
  std::vector<HeadSet> out;
  out.reserve(windows.size());
  std::size_t hold = 0;
  for (const auto& w : windows) {
    HeadSet s = select_heads(w, cfg);
    if (s == cfg.full_set) {
      hold = cfg.min_dwell_windows;
    } else if (hold > 0) {
      s = cfg.full_set;
      --hold;
    }
    out.push_back(s);
  }
  return out;
}

struct SelectionTimeline {
  std::vector<HeadSet> per_window;
  std::vector<HeadSet> per_frame;
};

inline SelectionTimeline selection_timeline(std::span<const MotionWindow> windows, const FrameWindowMap& map,
                                            const PolicyConfig& cfg) {
  SelectionTimeline tl;
  tl.per_window = decide_windows(windows, cfg);
  tl.per_frame.reserve(map.frame_count());
  for (std::size_t i = 0; i < map.frame_count(); ++i) {
    const std::size_t k = map.window_of[i];
    if (k >= tl.per_window.size()) {
      throw InputError("frame " + std::to_string(i) + " refers to window " + std::to_string(k) + " but only " +
                       std::to_string(tl.per_window.size()) + " windows exist");
    }
    tl.per_frame.push_back(tl.per_window[k]);
  }
  return tl;
}

}  // namespace trajexit
