#pragma once

// Test-only reference computations. Nothing here calls into the library's
// geometry, mapping or policy code; the checks stay independent of the
// implementation they verify.

#include <cstdint>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

/// Great-circle distance by the spherical law of cosines at 50 digits.
inline double great_circle_m(double lat1, double lon1, double lat2, double lon2) {
  const Real pi = boost::math::constants::pi<Real>();
  const Real deg = pi / 180;
  const Real p1 = Real(lat1) * deg, p2 = Real(lat2) * deg;
  const Real dl = (Real(lon2) - Real(lon1)) * deg;
  Real c = sin(p1) * sin(p2) + cos(p1) * cos(p2) * cos(dl);
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return static_cast<double>(Real(6371000) * acos(c));
}

/// Arc length of a latitude difference along a meridian.
inline double meridian_arc_m(double dlat_deg) {
  const Real pi = boost::math::constants::pi<Real>();
  return static_cast<double>(Real(6371000) * abs(Real(dlat_deg)) * pi / 180);
}

/// Window of frame i for a stream at num/den fps starting exactly on window 0, clamped.
inline std::size_t frame_window(std::size_t i, std::uint64_t fps_num, std::uint64_t fps_den, std::size_t windows) {
  const std::uint64_t k = (static_cast<std::uint64_t>(i) * fps_den) / fps_num;
  return k >= windows ? windows - 1 : static_cast<std::size_t>(k);
}

struct PolicyTotals {
  std::size_t low = 0;
  std::size_t full = 0;
  double total_ms = 0.0;
};

/// Per-frame brute force: look up the frame's window, apply the two-threshold rule, add latency.
struct WindowCue {
  double d;
  double v;
  bool valid;
};

inline PolicyTotals brute_force_totals(const std::vector<WindowCue>& windows, std::size_t frame_count,
                                       std::uint64_t fps_num, std::uint64_t fps_den, double tau1, double tau2,
                                       double low_ms, double full_ms) {
  PolicyTotals t;
  for (std::size_t i = 0; i < frame_count; ++i) {
    const WindowCue& w = windows[frame_window(i, fps_num, fps_den, windows.size())];
    const bool easy = w.valid && w.d > tau1 && w.v < tau2;
    if (easy) {
      ++t.low;
      t.total_ms += low_ms;
    } else {
      ++t.full;
      t.total_ms += full_ms;
    }
  }
  return t;
}

}  // namespace oracle
