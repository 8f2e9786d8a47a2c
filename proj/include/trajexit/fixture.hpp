#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "trajexit/error.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/ingest.hpp"

namespace trajexit {

/// splitmix64. Used instead of <random> distributions so fixtures are
/// byte-identical across standard library implementations.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

/// A contiguous run of hard windows.
struct Episode {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct FixtureSpec {
  std::size_t duration_s = 10;
  double fps = 10.0;
  /// 0 means round(duration_s * fps).
  std::size_t frame_count = 0;
  std::vector<Episode> hard_episodes;
  std::uint64_t seed = 7;
  double t0 = 1'700'000'000.0;
  LatLon origin{37.45, 24.94};
  /// Upper bound on synthetic detections per head per frame; 0 disables.
  std::size_t max_detections_per_head = 2;
};

struct Fixture {
  std::vector<Trajectory> trajectories;
  FrameStreamMeta frames;
  std::vector<DetectionRecord> detections;
  std::vector<bool> hard;  // per window, as laid out by hard_episodes
  std::vector<double> distances_m;
};

/// Episodes of the bundled scenario: 125 s, 3686 frames, 659 of them hard.
///
/// At 29.488 fps the windows alternate 30 and 29 frames, so 659 hard frames
/// means 21 thirty-frame windows plus one twenty-nine-frame window.
inline std::vector<Episode> paper_hard_episodes() {
  std::vector<Episode> eps;
  for (std::size_t k = 18; k <= 34; k += 2) eps.push_back({k, 1});
  eps.push_back({55, 3});
  for (std::size_t k = 94; k <= 112; k += 2) eps.push_back({k, 1});
  return eps;
}

inline FixtureSpec paper_fixture_spec(std::uint64_t seed = 7) {
  FixtureSpec spec;
  spec.duration_s = 125;
  spec.frame_count = 3686;
  spec.fps = 3686.0 / 125.0;
  spec.hard_episodes = paper_hard_episodes();
  spec.seed = seed;
  return spec;
}

/// Random episode layout covering roughly a quarter of the windows.
inline std::vector<Episode> random_episodes(std::size_t duration_s, FixtureRng& rng) {
  std::vector<Episode> eps;
  std::size_t k = rng.below(4);
  while (k < duration_s) {
    const std::size_t len = 1 + rng.below(std::max<std::size_t>(1, duration_s / 8));
    eps.push_back({k, std::min(len, duration_s - k)});
    k += len + 1 + rng.below(std::max<std::size_t>(2, duration_s / 4));
  }
  return eps;
}

inline std::vector<bool> hard_mask(const FixtureSpec& spec) {
  std::vector<bool> hard(spec.duration_s, false);
  for (const auto& e : spec.hard_episodes) {
    if (e.length == 0 || e.start + e.length > spec.duration_s) {
      throw InputError("episode " + std::to_string(e.start) + "+" + std::to_string(e.length) + " exceeds duration " +
                       std::to_string(spec.duration_s) + " s");
    }
    for (std::size_t k = e.start; k < e.start + e.length; ++k) hard[k] = true;
  }
  return hard;
}

/// Two vessels on a shared meridian whose separation makes every window
/// land on the requested side of the default thresholds (30 m, 0.5 m/s)
/// with margin: easy windows sit at >= 40 m and drift apart; hard windows
/// close at >= 1 m/s or, once near, hold between 10 and 10.3 m.
inline Fixture make_fixture(const FixtureSpec& spec) {
  if (spec.duration_s < 1) throw InputError("fixture duration must be at least 1 s");
  if (!(spec.fps > 0.0) || !std::isfinite(spec.fps)) throw InputError("fixture fps must be positive");
  validate_position(spec.origin);

  Fixture fx;
  fx.hard = hard_mask(spec);
  fx.frames.fps = spec.fps;
  fx.frames.t0 = spec.t0;
  fx.frames.frame_count = spec.frame_count != 0
                              ? spec.frame_count
                              : static_cast<std::size_t>(std::llround(static_cast<double>(spec.duration_s) * spec.fps));
  if (fx.frames.frame_count == 0) throw InputError("fixture has no frames");
  if (fx.frames.frame_offset(fx.frames.frame_count - 1) >= static_cast<double>(spec.duration_s)) {
    throw InputError("frame_count does not fit in the fixture duration at this fps");
  }

  FixtureRng rng(spec.seed);
  std::vector<double>& d = fx.distances_m;
  d.resize(spec.duration_s);
  for (std::size_t k = 0; k < spec.duration_s; ++k) {
    const double jitter = rng.uniform(0.0, 0.3);
    if (!fx.hard[k]) {
      const double prev = k == 0 ? 60.0 : std::max(d[k - 1], 40.0);
      d[k] = prev + 0.1 + 0.2 * jitter / 0.3;
    } else if (k == 0) {
      d[k] = 10.0 + jitter;
    } else {
      const double closer = d[k - 1] - (1.0 + jitter);
      d[k] = closer >= 10.0 ? closer : 10.0 + jitter;
    }
  }

  constexpr double kDegPerM = 180.0 / (std::numbers::pi * kEarthRadiusM);
  const double lead_speed_mps = 0.8;
  std::vector<GeoFix> a, b;
  for (std::size_t k = 0; k < spec.duration_s; ++k) {
    const double t = spec.t0 + static_cast<double>(k);
    const double lat_a = spec.origin.lat + lead_speed_mps * static_cast<double>(k) * kDegPerM;
    a.push_back({"ASV-1", t, lat_a, spec.origin.lon});
    b.push_back({"ASV-2", t, lat_a + d[k] * kDegPerM, spec.origin.lon});
  }
  fx.trajectories.emplace_back("ASV-1", std::move(a));
  fx.trajectories.emplace_back("ASV-2", std::move(b));

  if (spec.max_detections_per_head > 0) {
    static const char* kClasses[] = {"ASV", "Boat"};
    for (std::size_t i = 0; i < fx.frames.frame_count; ++i) {
      for (Head h : kAllHeads) {
        const std::size_t n = rng.below(spec.max_detections_per_head + 1);
        for (std::size_t j = 0; j < n; ++j) {
          DetectionRecord det;
          det.frame_index = static_cast<std::int64_t>(i);
          det.head = h;
          det.class_label = kClasses[rng.below(2)];
          det.confidence = std::round(rng.uniform(0.25, 1.0) * 1e4) / 1e4;
          const double side = h == Head::P3 ? 16.0 : h == Head::P4 ? 48.0 : 128.0;
          det.box = {static_cast<double>(rng.below(1800)), static_cast<double>(rng.below(1000)),
                     std::round(side * rng.uniform(0.6, 1.4)), std::round(side * rng.uniform(0.6, 1.4))};
          fx.detections.push_back(std::move(det));
        }
      }
    }
  }
  return fx;
}

}  // namespace trajexit
