#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajexit/error.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/text.hpp"

namespace trajexit {

/// Measured cost and quality of running one head in isolation.
///
/// Every measurement is optional: reference tables give speedups but not
/// absolute latencies, and a deployment measurement may cover only the
/// head that was actually used.
struct HeadProfile {
  Head head = Head::P3;
  std::optional<double> latency_ms;
  std::optional<double> speedup;
  std::optional<double> flops_savings_pct;
  std::optional<std::int64_t> detections;
  std::optional<double> map50;
  std::optional<double> precision;
  std::optional<double> recall;

  friend bool operator==(const HeadProfile&, const HeadProfile&) = default;
};

struct DetectorProfile {
  std::string model;
  std::optional<double> full_latency_ms;
  std::optional<std::int64_t> total_detections;
  std::vector<HeadProfile> heads;

  const HeadProfile* find(Head h) const {
    for (const auto& hp : heads) {
      if (hp.head == h) return &hp;
    }
    return nullptr;
  }

  const HeadProfile& at(Head h) const {
    if (const auto* hp = find(h)) return *hp;
    throw InputError("profile '" + model + "' has no entry for head " + std::string(to_string(h)));
  }

  friend bool operator==(const DetectorProfile&, const DetectorProfile&) = default;
};

/// Allowed disagreement between a quoted speedup and the latency ratio.
inline constexpr double kSpeedupTolerance = 0.05;

/// Median latency of one head in isolation: measured if present, else full / speedup.
inline double head_latency_ms(const DetectorProfile& p, Head h) {
  const HeadProfile& hp = p.at(h);
  if (hp.latency_ms) return *hp.latency_ms;
  if (hp.speedup && p.full_latency_ms) return *p.full_latency_ms / *hp.speedup;
  throw InputError("profile '" + p.model + "' has no latency for head " + std::string(to_string(h)));
}

/// Per-frame latency of a head selection.
///
/// Only single heads and the full path are measured. Other subsets are
/// modeled as the slowest member, since heads share most of the neck.
inline double latency_for(HeadSet selection, const DetectorProfile& p) {
  if (selection.empty()) throw InputError("empty head selection");
  if (selection.is_full()) {
    if (!p.full_latency_ms) throw InputError("profile '" + p.model + "' has no full-model latency");
    return *p.full_latency_ms;
  }
  double worst = 0.0;
  for (Head h : selection.heads()) worst = std::max(worst, head_latency_ms(p, h));
  return worst;
}

/// FLOPs saved relative to the full path; subsets get the smallest member saving.
inline double flops_savings_for(HeadSet selection, const DetectorProfile& p) {
  if (selection.empty()) throw InputError("empty head selection");
  if (selection.is_full()) return 0.0;
  double least = 100.0;
  for (Head h : selection.heads()) {
    const HeadProfile& hp = p.at(h);
    if (!hp.flops_savings_pct) {
      throw InputError("profile '" + p.model + "' has no FLOPs savings for head " + std::string(to_string(h)));
    }
    least = std::min(least, *hp.flops_savings_pct);
  }
  return least;
}

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

inline ValidationReport validate_profile(const DetectorProfile& p) {
  ValidationReport r;
  auto issue = [&](std::string s) { r.issues.push_back(std::move(s)); };
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };

  if (p.full_latency_ms && !(*p.full_latency_ms > 0.0)) issue("full_latency_ms must be positive");
  if (p.heads.size() != 3) issue("expected exactly 3 heads, found " + std::to_string(p.heads.size()));
  for (Head h : kAllHeads) {
    auto n = std::count_if(p.heads.begin(), p.heads.end(), [h](const HeadProfile& hp) { return hp.head == h; });
    if (n != 1) issue(std::string(to_string(h)) + " appears " + std::to_string(n) + " times");
  }

  bool all_detections = !p.heads.empty();
  std::int64_t detection_sum = 0;
  for (const auto& hp : p.heads) {
    const std::string name(to_string(hp.head));
    if (hp.latency_ms && !(*hp.latency_ms > 0.0)) issue(name + ": latency_ms must be positive");
    if (hp.speedup && !(*hp.speedup > 0.0)) issue(name + ": speedup must be positive");
    if (hp.flops_savings_pct && !(*hp.flops_savings_pct >= 0.0 && *hp.flops_savings_pct < 100.0)) {
      issue(name + ": flops_savings_pct outside [0, 100)");
    }
    if (hp.detections && *hp.detections < 0) issue(name + ": negative detection count");
    if (hp.map50 && !in_unit(*hp.map50)) issue(name + ": map50 outside [0, 1]");
    if (hp.precision && !in_unit(*hp.precision)) issue(name + ": precision outside [0, 1]");
    if (hp.recall && !in_unit(*hp.recall)) issue(name + ": recall outside [0, 1]");
    if (hp.latency_ms && hp.speedup && p.full_latency_ms && *hp.latency_ms > 0.0) {
      const double ratio = *p.full_latency_ms / *hp.latency_ms;
      if (std::abs(ratio - *hp.speedup) > kSpeedupTolerance) {
        issue(name + ": speedup " + text::format_double(*hp.speedup) + " disagrees with latency ratio " +
              text::format_fixed(ratio, 3));
      }
    }
    if (hp.detections) detection_sum += *hp.detections;
    else all_detections = false;
  }
  if (p.total_detections && all_detections && detection_sum != *p.total_detections) {
    issue("per-head detections sum to " + std::to_string(detection_sum) + " but total is " +
          std::to_string(*p.total_detections));
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const DetectorProfile& p) {
  nlohmann::ordered_json j;
  j["model"] = p.model;
  if (p.full_latency_ms) j["full_latency_ms"] = *p.full_latency_ms;
  if (p.total_detections) j["total_detections"] = *p.total_detections;
  nlohmann::ordered_json heads = nlohmann::ordered_json::array();
  for (const auto& hp : p.heads) {
    nlohmann::ordered_json h;
    h["head"] = std::string(to_string(hp.head));
    if (hp.latency_ms) h["latency_ms"] = *hp.latency_ms;
    if (hp.speedup) h["speedup"] = *hp.speedup;
    if (hp.flops_savings_pct) h["flops_savings_pct"] = *hp.flops_savings_pct;
    if (hp.detections) h["detections"] = *hp.detections;
    if (hp.map50) h["map50"] = *hp.map50;
    if (hp.precision) h["precision"] = *hp.precision;
    if (hp.recall) h["recall"] = *hp.recall;
    heads.push_back(h);
  }
  j["heads"] = heads;
  return j;
}

inline DetectorProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("detector profile must be a JSON object");
  auto opt_number = [](const nlohmann::json& obj, const char* key) -> std::optional<double> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw InputError(std::string("profile field '") + key + "' must be a number");
    return it->get<double>();
  };
  auto opt_int = [](const nlohmann::json& obj, const char* key) -> std::optional<std::int64_t> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw InputError(std::string("profile field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
  };

  DetectorProfile p;
  auto model = j.find("model");
  if (model == j.end() || !model->is_string()) throw InputError("profile needs a string 'model'");
  p.model = model->get<std::string>();
  p.full_latency_ms = opt_number(j, "full_latency_ms");
  p.total_detections = opt_int(j, "total_detections");
  auto heads = j.find("heads");
  if (heads == j.end() || !heads->is_array()) throw InputError("profile needs a 'heads' array");
  for (const auto& h : *heads) {
    if (!h.is_object()) throw InputError("profile head entries must be objects");
    auto name = h.find("head");
    if (name == h.end() || !name->is_string()) throw InputError("profile head entry needs a 'head' name");
    HeadProfile hp;
    hp.head = head_or_throw(name->get<std::string>());
    hp.latency_ms = opt_number(h, "latency_ms");
    hp.speedup = opt_number(h, "speedup");
    hp.flops_savings_pct = opt_number(h, "flops_savings_pct");
    hp.detections = opt_int(h, "detections");
    hp.map50 = opt_number(h, "map50");
    hp.precision = opt_number(h, "precision");
    hp.recall = opt_number(h, "recall");
    p.heads.push_back(hp);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Bundled profiles

namespace detail {

struct TableRow {
  const char* model;
  std::int64_t total;
  std::array<std::int64_t, 3> detections;
  std::array<double, 3> speedup;
  std::array<double, 3> flops;
  std::array<double, 3> map50;
  std::array<double, 3> precision;
  std::array<double, 3> recall;
};

inline DetectorProfile from_table_row(const TableRow& row) {
  DetectorProfile p;
  p.model = row.model;
  p.total_detections = row.total;
  for (std::size_t k = 0; k < 3; ++k) {
    HeadProfile hp;
    hp.head = kAllHeads[k];
    hp.speedup = row.speedup[k];
    hp.flops_savings_pct = row.flops[k];
    hp.detections = row.detections[k];
    hp.map50 = row.map50[k];
    hp.precision = row.precision[k];
    hp.recall = row.recall[k];
    p.heads.push_back(hp);
  }
  return p;
}

}  // namespace detail

/// Published per-head measurements for three YOLOv8 sizes. Relative costs only:
/// the source gives no absolute latency, so full_latency_ms is unset.
inline DetectorProfile yolov8_nano_profile() {
  return detail::from_table_row({"YOLOv8 Nano", 590, {168, 277, 145}, {1.61, 1.45, 1.34}, {25.08, 33.79, 32.71},
                                 {0.6179, 0.7959, 0.6709}, {0.8121, 0.8960, 0.9786}, {0.3818, 0.6461, 0.3540}});
}

inline DetectorProfile yolov8_small_profile() {
  return detail::from_table_row({"YOLOv8 Small", 602, {212, 286, 104}, {1.56, 1.53, 1.27}, {24.41, 28.54, 25.45},
                                 {0.6736, 0.8084, 0.5903}, {0.8215, 0.8980, 0.9167}, {0.4805, 0.6645, 0.2458}});
}

inline DetectorProfile yolov8_medium_profile() {
  return detail::from_table_row({"YOLOv8 Medium", 556, {228, 309, 19}, {1.31, 1.33, 1.17}, {21.26, 20.56, 18.33},
                                 {0.7235, 0.8713, 0.5112}, {0.8506, 0.9346, 0.9643}, {0.5411, 0.7632, 0.0560}});
}

/// Deployment medians of the adaptive run: full path and the P3-only path.
/// The model variant behind these numbers is not known.
inline DetectorProfile deployment_profile() {
  DetectorProfile p;
  p.model = "deployment";
  p.full_latency_ms = 10.097;
  p.heads.resize(3);
  p.heads[0].head = Head::P3;
  p.heads[0].latency_ms = 6.686;
  p.heads[1].head = Head::P4;
  p.heads[2].head = Head::P5;
  return p;
}

/// Copy of a relative profile anchored to an absolute full-model latency.
inline DetectorProfile with_full_latency(DetectorProfile p, double full_latency_ms) {
  p.full_latency_ms = full_latency_ms;
  return p;
}

/// Short names accepted wherever a profile path is expected.
inline std::optional<DetectorProfile> bundled_profile(std::string_view name) {
  if (name == "nano" || name == "yolov8n") return yolov8_nano_profile();
  if (name == "small" || name == "yolov8s") return yolov8_small_profile();
  if (name == "medium" || name == "yolov8m") return yolov8_medium_profile();
  if (name == "deployment") return deployment_profile();
  return std::nullopt;
}

}  // namespace trajexit
