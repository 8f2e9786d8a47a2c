#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajexit/error.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/ingest.hpp"
#include "trajexit/text.hpp"

namespace trajexit {

enum class ScaleCategory : std::uint8_t { Small = 0, Medium = 1, Large = 2 };

inline constexpr std::array<ScaleCategory, 3> kScaleCategories = {ScaleCategory::Small, ScaleCategory::Medium,
                                                                   ScaleCategory::Large};

inline constexpr std::string_view to_string(ScaleCategory c) {
  switch (c) {
    case ScaleCategory::Small: return "small";
    case ScaleCategory::Medium: return "medium";
    case ScaleCategory::Large: return "large";
  }
  return "?";
}

/// Small objects train the finest head, large ones the coarsest.
inline constexpr Head head_for(ScaleCategory c) { return static_cast<Head>(static_cast<std::uint8_t>(c)); }

/// Pixel boundaries between size categories; lower bounds are inclusive.
struct ScaleThresholds {
  double small_max = 32.0;
  double medium_max = 96.0;

  void validate() const {
    if (!(small_max > 0.0) || !(medium_max > small_max) || !std::isfinite(medium_max)) {
      throw InputError("scale thresholds need 0 < small_max < medium_max");
    }
  }
};

/// Per-category difficulty weights, indexed by ScaleCategory.
using ScaleWeights = std::array<double, 3>;
inline constexpr ScaleWeights kDefaultScaleWeights = {1.5, 1.0, 0.7};

/// Geometric mean of the box sides.
inline double size_metric(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw InputError("box dimensions must be positive");
  return std::sqrt(width * height);
}

inline double size_metric(const BBoxRecord& box) { return size_metric(box.width, box.height); }

inline ScaleCategory categorize(double metric, const ScaleThresholds& th) {
  if (metric < th.small_max) return ScaleCategory::Small;
  if (metric < th.medium_max) return ScaleCategory::Medium;
  return ScaleCategory::Large;
}

inline ScaleCategory categorize(const BBoxRecord& box, const ScaleThresholds& th) {
  return categorize(size_metric(box), th);
}

struct CategoryStats {
  std::size_t count = 0;
  double fraction = 0.0;  // f_k
  double weight = 0.0;    // omega_k
  double ratio = 0.0;     // r_k, weighted fraction normalized by the largest one
};

struct ScaleComposition {
  ScaleThresholds thresholds;
  std::array<CategoryStats, 3> categories;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& c : categories) n += c.count;
    return n;
  }
  const CategoryStats& operator[](ScaleCategory c) const { return categories[static_cast<std::size_t>(c)]; }
};

/// Composition from raw per-category counts.
inline ScaleComposition compose_counts(const std::array<std::size_t, 3>& counts, const ScaleWeights& weights,
                                       const ScaleThresholds& th = {}) {
  th.validate();
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("scale weights must be positive and finite");
  }
  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total == 0) throw InputError("cannot compose an empty corpus");

  ScaleComposition comp;
  comp.thresholds = th;
  double best = 0.0;
  std::array<double, 3> score{};
  for (std::size_t k = 0; k < 3; ++k) {
    auto& c = comp.categories[k];
    c.count = counts[k];
    c.fraction = static_cast<double>(counts[k]) / static_cast<double>(total);
    c.weight = weights[k];
    score[k] = c.weight * c.fraction;
    best = std::max(best, score[k]);
  }
  for (std::size_t k = 0; k < 3; ++k) comp.categories[k].ratio = score[k] / best;
  return comp;
}

inline ScaleComposition compose(std::span<const BBoxRecord> corpus, const ScaleThresholds& th,
                                const ScaleWeights& weights = kDefaultScaleWeights) {
  th.validate();
  std::array<std::size_t, 3> counts{};
  for (const auto& box : corpus) ++counts[static_cast<std::size_t>(categorize(box, th))];
  return compose_counts(counts, weights, th);
}

/// Rate applied instead of zero when a category has no instances.
inline constexpr double kEmptyCategoryLrFactor = 0.01;
inline constexpr double kNeckLrFactor = 0.8;

struct LrSchedule {
  double eta0 = 0.0;
  std::array<double, 3> eta_head{};  // indexed by Head
  double eta_neck = 0.0;
  /// Heads whose category was empty and got the floor rate.
  std::vector<Head> floored;

  double eta(Head h) const { return eta_head[static_cast<std::size_t>(h)]; }
};

inline LrSchedule schedule(const ScaleComposition& comp, double eta0) {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InputError("eta0 must be positive and finite");
  LrSchedule s;
  s.eta0 = eta0;
  for (ScaleCategory c : kScaleCategories) {
    const double r = comp[c].ratio;
    double eta = r * eta0;
    if (r == 0.0) {
      eta = kEmptyCategoryLrFactor * eta0;
      s.floored.push_back(head_for(c));
    }
    s.eta_head[static_cast<std::size_t>(head_for(c))] = eta;
  }
  s.eta_neck = kNeckLrFactor * eta0;
  return s;
}

inline nlohmann::ordered_json to_json(const ScaleComposition& comp, const LrSchedule& s) {
  nlohmann::ordered_json j;
  j["eta0"] = s.eta0;
  j["eta_p3"] = s.eta(Head::P3);
  j["eta_p4"] = s.eta(Head::P4);
  j["eta_p5"] = s.eta(Head::P5);
  j["eta_neck"] = s.eta_neck;
  j["backbone"] = "unspecified";
  j["thresholds"] = {{"small_max", comp.thresholds.small_max}, {"medium_max", comp.thresholds.medium_max}};
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (ScaleCategory c : kScaleCategories) {
    const auto& st = comp[c];
    nlohmann::ordered_json e;
    e["head"] = std::string(to_string(head_for(c)));
    e["count"] = st.count;
    e["f"] = st.fraction;
    e["omega"] = st.weight;
    e["r"] = st.ratio;
    cats[std::string(to_string(c))] = e;
  }
  j["categories"] = cats;
  nlohmann::ordered_json floored = nlohmann::ordered_json::array();
  for (Head h : s.floored) floored.push_back(std::string(to_string(h)));
  j["floored"] = floored;
  return j;
}

namespace detail {

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

}  // namespace detail

/// Plain-text table with one row per component, in the usual Table-style column order.
inline std::string format_lr_table(const ScaleComposition& comp, const LrSchedule& s) {
  const std::array<std::size_t, 7> w = {13, 18, 11, 9, 9, 15, 0};
  auto row = [&](const std::array<std::string, 7>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += detail::pad(cells[i], w[i]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + '\n';
  };
  const std::string lo = text::format_double(comp.thresholds.small_max);
  const std::string hi = text::format_double(comp.thresholds.medium_max);
  std::string out = row({"Component", "Size range", "Instances", "f_k (%)", "omega_k", "r_k", "eta"});
  const std::array<std::string, 3> names = {"Small (P3)", "Medium (P4)", "Large (P5)"};
  const std::array<std::string, 3> ranges = {"s < " + lo + "px", lo + " <= s < " + hi + "px", "s >= " + hi + "px"};
  for (ScaleCategory c : kScaleCategories) {
    const auto k = static_cast<std::size_t>(c);
    const auto& st = comp[c];
    out += row({names[k], ranges[k], std::to_string(st.count), text::format_fixed(st.fraction * 100.0, 2),
                text::format_fixed(st.weight, 1), text::format_fixed(st.ratio, 3), detail::sci(s.eta(head_for(c)))});
  }
  out += row({"Neck", "---", "---", "---", "---", text::format_fixed(kNeckLrFactor, 3) + " (fixed)", detail::sci(s.eta_neck)});
  return out;
}

}  // namespace trajexit
