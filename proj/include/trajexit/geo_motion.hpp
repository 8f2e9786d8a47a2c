#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajexit/error.hpp"

namespace trajexit {

/// Mean Earth radius used for every great-circle distance in this library.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Nearest-fix snapping tolerance when sampling a trajectory at time t.
inline constexpr double kNearestFixToleranceS = 0.5;

/// Consecutive fixes further apart than this invalidate samples taken between them.
inline constexpr double kMaxFixGapS = 2.0;

/// Nominal GPS sampling period; each fix stands for one second of coverage.
inline constexpr double kSamplePeriodS = 1.0;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

struct GeoFix {
  std::string vessel_id;
  double t = 0.0;  // seconds since epoch
  double lat = 0.0;
  double lon = 0.0;

  LatLon position() const { return {lat, lon}; }
  friend bool operator==(const GeoFix&, const GeoFix&) = default;
};

inline void validate_position(LatLon p) {
  if (std::isnan(p.lat) || std::isnan(p.lon)) throw InputError("coordinate is NaN");
  if (p.lat < -90.0 || p.lat > 90.0) throw InputError("latitude " + std::to_string(p.lat) + " outside [-90, 90]");
  if (p.lon < -180.0 || p.lon > 180.0) throw InputError("longitude " + std::to_string(p.lon) + " outside [-180, 180]");
}

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
inline double haversine_m(LatLon a, LatLon b) {
  validate_position(a);
  validate_position(b);
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kRad;
  const double phi2 = b.lat * kRad;
  const double dphi = (b.lat - a.lat) * kRad;
  const double dlambda = (b.lon - a.lon) * kRad;
  const double s_phi = std::sin(dphi / 2.0);
  const double s_lambda = std::sin(dlambda / 2.0);
  // cos(phi1)*cos(phi2) is symmetric only up to rounding order, so sort the factors.
  const double c1 = std::cos(std::min(phi1, phi2));
  const double c2 = std::cos(std::max(phi1, phi2));
  double h = s_phi * s_phi + c1 * c2 * s_lambda * s_lambda;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

/// Rate at which a separation shrinks: positive when converging.
inline double closure_rate(double d_prev, double d_curr, double dt) {
  if (std::isnan(d_prev) || std::isnan(d_curr) || std::isnan(dt)) throw InputError("closure_rate: NaN input");
  if (!(dt > 0.0)) throw InputError("closure_rate: dt must be positive");
  if (d_prev < 0.0 || d_curr < 0.0) throw InputError("closure_rate: distances must be non-negative");
  return (d_prev - d_curr) / dt;
}

/// Position sampled from a trajectory at an arbitrary time.
struct PositionSample {
  LatLon position;
  /// True when the position was interpolated across a gap wider than kMaxFixGapS.
  bool across_gap = false;
};

/// Time-ordered fixes of a single vessel. Immutable after construction.
class Trajectory {
 public:
  Trajectory(std::string vessel_id, std::vector<GeoFix> fixes) : vessel_id_(std::move(vessel_id)), fixes_(std::move(fixes)) {
    if (fixes_.empty()) throw InputError("trajectory '" + vessel_id_ + "' has no fixes");
    for (std::size_t i = 0; i < fixes_.size(); ++i) {
      const auto& f = fixes_[i];
      if (f.vessel_id != vessel_id_) throw InputError("fix for vessel '" + f.vessel_id + "' in trajectory '" + vessel_id_ + "'");
      if (!std::isfinite(f.t)) throw InputError("non-finite timestamp in trajectory '" + vessel_id_ + "'");
      validate_position(f.position());
      if (i > 0 && !(fixes_[i - 1].t < f.t)) {
        throw InputError("timestamps not strictly increasing in trajectory '" + vessel_id_ + "'");
      }
    }
  }

  const std::string& vessel_id() const { return vessel_id_; }
  std::span<const GeoFix> fixes() const { return fixes_; }
  double first_time() const { return fixes_.front().t; }
  double last_time() const { return fixes_.back().t; }
  /// End of the interval covered by the last fix's sampling period.
  double coverage_end() const { return last_time() + kSamplePeriodS; }

  bool can_sample(double t) const {
    return t >= first_time() - kNearestFixToleranceS && t <= last_time() + kNearestFixToleranceS;
  }

  /// Nearest fix when one lies within kNearestFixToleranceS, else linear interpolation in lat/lon.
  PositionSample position_at(double t) const {
    if (std::isnan(t)) throw InputError("sample time is NaN");
    if (!can_sample(t)) {
      throw CoverageError("time " + std::to_string(t) + " outside coverage of trajectory '" + vessel_id_ + "'");
    }
    auto it = std::lower_bound(fixes_.begin(), fixes_.end(), t, [](const GeoFix& f, double v) { return f.t < v; });
    // Ties between the two neighbours go to the earlier fix.
    const GeoFix* nearest = nullptr;
    double best = kNearestFixToleranceS;
    if (it != fixes_.end() && it->t - t <= best) {
      best = it->t - t;
      nearest = &*it;
    }
    if (it != fixes_.begin() && t - std::prev(it)->t <= best) nearest = &*std::prev(it);
    if (nearest != nullptr) return {nearest->position(), false};

    // Within the sampling envelope but not near a fix, so t is strictly bracketed.
    const GeoFix& lo = *std::prev(it);
    const GeoFix& hi = *it;
    const double w = (t - lo.t) / (hi.t - lo.t);
    LatLon p{lo.lat + w * (hi.lat - lo.lat), lo.lon + w * (hi.lon - lo.lon)};
    return {p, (hi.t - lo.t) > kMaxFixGapS};
  }

 private:
  std::string vessel_id_;
  std::vector<GeoFix> fixes_;
};

/// Great-circle distance between two vessels at time t.
inline double pairwise_distance_at(const Trajectory& a, const Trajectory& b, double t) {
  return haversine_m(a.position_at(t).position, b.position_at(t).position);
}

/// One-second aggregate of separation and closure rate for a vessel pair.
struct MotionWindow {
  std::size_t window_index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double d_t = 0.0;      // meters, sampled at t_start
  double v_t = 0.0;      // m/s, positive = converging
  bool valid_v = false;  // false when there is no usable previous distance
  bool valid = true;     // false when d_t was interpolated across a GPS gap

  friend bool operator==(const MotionWindow&, const MotionWindow&) = default;
};

/// Whole-second windows spanned by the common coverage of all given trajectories.
struct WindowGrid {
  double t_start = 0.0;
  std::size_t count = 0;
};

inline WindowGrid common_window_grid(std::span<const Trajectory* const> trajs) {
  if (trajs.empty()) throw InputError("no trajectories");
  double start = trajs.front()->first_time();
  double end = trajs.front()->coverage_end();
  for (const Trajectory* t : trajs) {
    start = std::max(start, t->first_time());
    end = std::min(end, t->coverage_end());
  }
  if (!(end > start)) throw CoverageError("trajectories do not overlap in time");
  // Tolerate timestamp rounding so that exactly N seconds gives N windows.
  const double span = end - start;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9));
  if (count < 1) throw CoverageError("trajectories overlap for less than one second");
  return {start, count};
}

/// One window per whole second of overlap; window 0 carries no closure rate.
inline std::vector<MotionWindow> build_motion_windows(const Trajectory& a, const Trajectory& b) {
  const Trajectory* pair[] = {&a, &b};
  const WindowGrid grid = common_window_grid(pair);

  std::vector<MotionWindow> out;
  out.reserve(grid.count);
  for (std::size_t k = 0; k < grid.count; ++k) {
    MotionWindow w;
    w.window_index = k;
    w.t_start = grid.t_start + static_cast<double>(k);
    w.t_end = w.t_start + 1.0;
    const PositionSample pa = a.position_at(w.t_start);
    const PositionSample pb = b.position_at(w.t_start);
    w.d_t = haversine_m(pa.position, pb.position);
    w.valid = !pa.across_gap && !pb.across_gap;
    if (k > 0 && w.valid && out.back().valid) {
      w.v_t = closure_rate(out.back().d_t, w.d_t, 1.0);
      w.valid_v = true;
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace trajexit
