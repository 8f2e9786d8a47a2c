#pragma once

// Published per-head table cells, as printed (strings, not doubles), for the
// three bundled model profiles. Used by the golden tests.

#include <array>
#include <string>

#include "trajexit/cost_model.hpp"
#include "trajexit/text.hpp"

namespace table_cells {

struct Row {
  const char* key;
  const char* model;
  const char* total;
  std::array<const char*, 3> detections;
  std::array<const char*, 3> speedup;
  std::array<const char*, 3> flops;
  std::array<const char*, 3> map50;
  std::array<const char*, 3> precision;
  std::array<const char*, 3> recall;
};

inline constexpr std::array<Row, 3> kRows = {{
    {"nano", "YOLOv8 Nano", "590", {"168", "277", "145"}, {"1.61", "1.45", "1.34"}, {"25.08", "33.79", "32.71"},
     {"0.6179", "0.7959", "0.6709"}, {"0.8121", "0.8960", "0.9786"}, {"0.3818", "0.6461", "0.3540"}},
    {"small", "YOLOv8 Small", "602", {"212", "286", "104"}, {"1.56", "1.53", "1.27"}, {"24.41", "28.54", "25.45"},
     {"0.6736", "0.8084", "0.5903"}, {"0.8215", "0.8980", "0.9167"}, {"0.4805", "0.6645", "0.2458"}},
    {"medium", "YOLOv8 Medium", "556", {"228", "309", "19"}, {"1.31", "1.33", "1.17"}, {"21.26", "20.56", "18.33"},
     {"0.7235", "0.8713", "0.5112"}, {"0.8506", "0.9346", "0.9643"}, {"0.5411", "0.7632", "0.0560"}},
}};

inline std::string expected(const Row& r) {
  std::string s = std::string(r.model) + "|" + r.total;
  for (const auto* group : {&r.detections, &r.speedup, &r.flops, &r.map50, &r.precision, &r.recall}) {
    for (const char* cell : *group) s += std::string("|") + cell;
  }
  return s;
}

/// Same layout as expected(), rendered from a profile at the printed precision of each column.
inline std::string render(const trajexit::DetectorProfile& p) {
  using trajexit::text::format_fixed;
  std::string s = p.model + "|" + (p.total_detections ? std::to_string(*p.total_detections) : "-");
  auto each = [&](auto field, int digits) {
    for (const auto& h : p.heads) {
      const auto v = field(h);
      if (!v) s += "|-";
      else if (digits < 0) s += "|" + std::to_string(static_cast<long long>(*v));
      else s += "|" + format_fixed(static_cast<double>(*v), digits);
    }
  };
  each([](const trajexit::HeadProfile& h) { return h.detections; }, -1);
  each([](const trajexit::HeadProfile& h) { return h.speedup; }, 2);
  each([](const trajexit::HeadProfile& h) { return h.flops_savings_pct; }, 2);
  each([](const trajexit::HeadProfile& h) { return h.map50; }, 4);
  each([](const trajexit::HeadProfile& h) { return h.precision; }, 4);
  each([](const trajexit::HeadProfile& h) { return h.recall; }, 4);
  return s;
}

}  // namespace table_cells
