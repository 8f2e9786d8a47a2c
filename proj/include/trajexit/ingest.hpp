#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trajexit/error.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/text.hpp"

namespace trajexit {

enum class TrajectoryFormat { Csv, Jsonl };

inline TrajectoryFormat parse_trajectory_format(std::string_view s) {
  if (s == "csv") return TrajectoryFormat::Csv;
  if (s == "jsonl") return TrajectoryFormat::Jsonl;
  throw InputError("unknown trajectory format '" + std::string(s) + "' (expected csv or jsonl)");
}

namespace detail {

inline constexpr std::string_view kTrajectoryHeader = "vessel_id,t,lat,lon";

inline double require_number(std::string_view field, std::string_view name, std::size_t line) {
  auto v = text::parse_double(field);
  if (!v || !std::isfinite(*v)) throw ParseError(line, "field '" + std::string(name) + "' is not a finite number: '" + std::string(field) + "'");
  return *v;
}

inline double json_number(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ParseError(line, std::string("field '") + key + "' is not a number");
  double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError(line, std::string("field '") + key + "' is not finite");
  return v;
}

inline std::string json_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

inline nlohmann::json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    auto obj = nlohmann::json::parse(line);
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    return obj;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
}

inline bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace detail

/// Reads trajectory rows and groups them per vessel, sorted by vessel_id then time.
inline std::vector<Trajectory> parse_trajectories(std::istream& in, TrajectoryFormat format) {
  struct Row {
    GeoFix fix;
    std::size_t line;
  };
  std::map<std::string, std::vector<Row>> by_vessel;

  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = text::strip_cr(raw);
    if (detail::is_blank(line)) continue;

    GeoFix fix;
    if (format == TrajectoryFormat::Csv) {
      if (!header_seen) {
        if (line != detail::kTrajectoryHeader) {
          throw ParseError(line_no, "expected header '" + std::string(detail::kTrajectoryHeader) + "'");
        }
        header_seen = true;
        continue;
      }
      auto fields = text::split(line, ',');
      if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
      if (fields[0].empty()) throw ParseError(line_no, "empty vessel_id");
      fix.vessel_id = std::string(fields[0]);
      fix.t = detail::require_number(fields[1], "t", line_no);
      fix.lat = detail::require_number(fields[2], "lat", line_no);
      fix.lon = detail::require_number(fields[3], "lon", line_no);
    } else {
      auto obj = detail::parse_json_line(std::string(line), line_no);
      fix.vessel_id = detail::json_string(obj, "vessel_id", line_no);
      if (fix.vessel_id.empty()) throw ParseError(line_no, "empty vessel_id");
      fix.t = detail::json_number(obj, "t", line_no);
      fix.lat = detail::json_number(obj, "lat", line_no);
      fix.lon = detail::json_number(obj, "lon", line_no);
    }
    try {
      validate_position(fix.position());
    } catch (const InputError& e) {
      throw ParseError(line_no, e.what());
    }
    by_vessel[fix.vessel_id].push_back({std::move(fix), line_no});
  }

  std::vector<Trajectory> out;
  out.reserve(by_vessel.size());
  for (auto& [id, rows] : by_vessel) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.fix.t < b.fix.t; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].fix.t == rows[i - 1].fix.t) {
        throw ParseError(rows[i].line, "duplicate timestamp " + text::format_double(rows[i].fix.t) + " for vessel '" + id + "'");
      }
    }
    std::vector<GeoFix> fixes;
    fixes.reserve(rows.size());
    for (auto& r : rows) fixes.push_back(std::move(r.fix));
    out.emplace_back(id, std::move(fixes));
  }
  return out;
}

/// Canonical serialization; parse_trajectories reads it back bit-exactly.
inline void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs, TrajectoryFormat format) {
  if (format == TrajectoryFormat::Csv) out << detail::kTrajectoryHeader << '\n';
  for (const auto& traj : trajs) {
    for (const auto& f : traj.fixes()) {
      if (format == TrajectoryFormat::Csv) {
        out << f.vessel_id << ',' << text::format_double(f.t) << ',' << text::format_double(f.lat) << ','
            << text::format_double(f.lon) << '\n';
      } else {
        nlohmann::ordered_json obj;
        obj["vessel_id"] = f.vessel_id;
        obj["t"] = f.t;
        obj["lat"] = f.lat;
        obj["lon"] = f.lon;
        out << obj.dump() << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Frame stream

struct FrameStreamMeta {
  std::size_t frame_count = 0;
  double fps = 0.0;
  double t0 = 0.0;

  void validate() const {
    if (frame_count == 0) throw InputError("frame_count must be positive");
    if (!(fps > 0.0) || !std::isfinite(fps)) throw InputError("fps must be a positive finite number");
    if (!std::isfinite(t0)) throw InputError("t0 must be finite");
    if (!std::isfinite(duration()) || !(duration() > 0.0)) throw InputError("frame stream duration must be finite and positive");
  }

  double duration() const { return static_cast<double>(frame_count) / fps; }
  /// Offset of frame i from t0, in seconds.
  double frame_offset(std::size_t i) const { return static_cast<double>(i) / fps; }
  double frame_time(std::size_t i) const { return t0 + frame_offset(i); }

  friend bool operator==(const FrameStreamMeta&, const FrameStreamMeta&) = default;
};

inline nlohmann::ordered_json to_json(const FrameStreamMeta& m) {
  nlohmann::ordered_json j;
  j["frame_count"] = m.frame_count;
  j["fps"] = m.fps;
  j["t0"] = m.t0;
  return j;
}

inline FrameStreamMeta frame_meta_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("frame metadata must be a JSON object");
  FrameStreamMeta m;
  try {
    auto count = j.at("frame_count");
    if (!count.is_number_integer() || count.get<std::int64_t>() <= 0) throw InputError("frame_count must be a positive integer");
    m.frame_count = count.get<std::size_t>();
    m.fps = j.at("fps").get<double>();
    m.t0 = j.value("t0", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("frame metadata: ") + e.what());
  }
  m.validate();
  return m;
}

/// Frame timestamps are synthesized from t0 and fps; offsets this close below a
/// whole second are treated as landing on it.
inline constexpr double kFrameTimeEpsilonS = 1e-9;

/// window_of[frame_index] for every frame of the stream.
struct FrameWindowMap {
  std::vector<std::size_t> window_of;

  std::size_t frame_count() const { return window_of.size(); }
};

/// Frame i (at t0 + i/fps) goes to the window containing it; out-of-range frames clamp to the nearest end.
inline FrameWindowMap map_frames_to_windows(const FrameStreamMeta& meta, std::span<const MotionWindow> windows) {
  if (windows.empty()) throw InputError("cannot map frames onto an empty window sequence");
  meta.validate();
  const double base = meta.t0 - windows.front().t_start;
  const double last = static_cast<double>(windows.size() - 1);
  FrameWindowMap map;
  map.window_of.resize(meta.frame_count);
  for (std::size_t i = 0; i < meta.frame_count; ++i) {
    const double k = std::floor(base + meta.frame_offset(i) + kFrameTimeEpsilonS);
    map.window_of[i] = static_cast<std::size_t>(std::clamp(k, 0.0, last));
  }
  return map;
}

/// How far a frame stream reaches outside the span of a window sequence.
struct CoverageReport {
  double frames_start = 0.0;
  double frames_end = 0.0;      // timestamp of the last frame
  double windows_start = 0.0;
  double windows_end = 0.0;     // t_end of the last window
  std::size_t frames_before = 0;  // frames earlier than the first window
  std::size_t frames_after = 0;   // frames later than the tolerated tail

  bool ok() const { return frames_before == 0 && frames_after == 0; }

  std::string describe() const {
    std::string s = "frames span [" + text::format_fixed(frames_start, 3) + ", " + text::format_fixed(frames_end, 3) +
                    "] s, trajectory windows span [" + text::format_fixed(windows_start, 3) + ", " +
                    text::format_fixed(windows_end, 3) + ") s";
    if (frames_before > 0) {
      s += "; " + std::to_string(frames_before) + " frame(s) precede coverage by up to " +
           text::format_fixed(windows_start - frames_start, 3) + " s";
    }
    if (frames_after > 0) {
      s += "; " + std::to_string(frames_after) + " frame(s) extend " + text::format_fixed(frames_end - windows_end, 3) +
           " s past coverage";
    }
    return s;
  }
};

/// Frames may run into a tail of less than one second past the last window; anything beyond is uncovered.
inline CoverageReport check_frame_coverage(const FrameStreamMeta& meta, std::span<const MotionWindow> windows) {
  if (windows.empty()) throw InputError("cannot check coverage against an empty window sequence");
  CoverageReport r;
  const double base = meta.t0 - windows.front().t_start;
  const double n = static_cast<double>(windows.size());
  r.windows_start = windows.front().t_start;
  r.windows_end = windows.back().t_end;
  r.frames_start = meta.frame_time(0);
  r.frames_end = meta.frame_time(meta.frame_count - 1);
  for (std::size_t i = 0; i < meta.frame_count; ++i) {
    const double off = base + meta.frame_offset(i) + kFrameTimeEpsilonS;
    if (off < 0.0) ++r.frames_before;
    else if (off >= n + 1.0) ++r.frames_after;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Bounding-box corpus

struct BBoxRecord {
  std::string image_id;
  std::string class_label;
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const BBoxRecord&, const BBoxRecord&) = default;
};

inline constexpr std::string_view kBBoxHeader = "image_id,class,width,height";

inline std::vector<BBoxRecord> parse_bbox_corpus(std::istream& in) {
  std::vector<BBoxRecord> out;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = text::strip_cr(raw);
    if (detail::is_blank(line)) continue;
    if (!header_seen) {
      if (line != kBBoxHeader) throw ParseError(line_no, "expected header '" + std::string(kBBoxHeader) + "'");
      header_seen = true;
      continue;
    }
    auto fields = text::split(line, ',');
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    BBoxRecord r;
    r.image_id = std::string(fields[0]);
    r.class_label = std::string(fields[1]);
    if (r.class_label.empty()) throw ParseError(line_no, "empty class label");
    r.width = detail::require_number(fields[2], "width", line_no);
    r.height = detail::require_number(fields[3], "height", line_no);
    if (!(r.width > 0.0) || !(r.height > 0.0)) throw ParseError(line_no, "non-positive box dimension");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_bbox_corpus(std::ostream& out, std::span<const BBoxRecord> records) {
  out << kBBoxHeader << '\n';
  for (const auto& r : records) {
    out << r.image_id << ',' << r.class_label << ',' << text::format_double(r.width) << ','
        << text::format_double(r.height) << '\n';
  }
}

inline std::map<std::string, std::size_t> count_by_class(std::span<const BBoxRecord> records) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.class_label];
  return counts;
}

/// Rejects labels outside `allowed`; the first offending record is named.
inline void require_class_labels(std::span<const BBoxRecord> records, const std::set<std::string>& allowed) {
  for (const auto& r : records) {
    if (!allowed.contains(r.class_label)) {
      throw InputError("unexpected class label '" + r.class_label + "' (image " + r.image_id + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// Precomputed detections (replay backend input)

struct Box {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct DetectionRecord {
  std::int64_t frame_index = 0;
  Head head = Head::P3;
  std::string class_label;
  double confidence = 0.0;
  Box box;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

inline nlohmann::ordered_json to_json(const DetectionRecord& d) {
  nlohmann::ordered_json j;
  j["frame"] = d.frame_index;
  j["head"] = std::string(to_string(d.head));
  j["class"] = d.class_label;
  j["conf"] = d.confidence;
  j["x"] = d.box.x;
  j["y"] = d.box.y;
  j["w"] = d.box.w;
  j["h"] = d.box.h;
  return j;
}

inline std::vector<DetectionRecord> parse_detections(std::istream& in) {
  std::vector<DetectionRecord> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = text::strip_cr(raw);
    if (detail::is_blank(line)) continue;
    auto obj = detail::parse_json_line(std::string(line), line_no);
    DetectionRecord d;
    auto frame = obj.find("frame");
    if (frame == obj.end() || !frame->is_number_integer()) throw ParseError(line_no, "field 'frame' must be an integer");
    d.frame_index = frame->get<std::int64_t>();
    const std::string head = detail::json_string(obj, "head", line_no);
    auto h = parse_head(head);
    if (!h) throw ParseError(line_no, "unknown head '" + head + "'");
    d.head = *h;
    d.class_label = detail::json_string(obj, "class", line_no);
    d.confidence = detail::json_number(obj, "conf", line_no);
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw ParseError(line_no, "confidence " + text::format_double(d.confidence) + " outside [0, 1]");
    }
    d.box = {detail::json_number(obj, "x", line_no), detail::json_number(obj, "y", line_no),
             detail::json_number(obj, "w", line_no), detail::json_number(obj, "h", line_no)};
    out.push_back(std::move(d));
  }
  return out;
}

inline void write_detections(std::ostream& out, std::span<const DetectionRecord> records) {
  for (const auto& d : records) out << to_json(d).dump() << '\n';
}

/// Detections grouped by frame, preserving input order within each frame.
class DetectionIndex {
 public:
  DetectionIndex() = default;
  explicit DetectionIndex(std::vector<DetectionRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) by_frame_[records_[i].frame_index].push_back(i);
  }

  std::vector<DetectionRecord> for_frame(std::int64_t frame) const {
    std::vector<DetectionRecord> out;
    auto it = by_frame_.find(frame);
    if (it == by_frame_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(records_[i]);
    return out;
  }

  std::array<std::size_t, 3> count_per_head() const {
    std::array<std::size_t, 3> counts{};
    for (const auto& r : records_) ++counts[static_cast<std::size_t>(r.head)];
    return counts;
  }

  std::span<const DetectionRecord> records() const { return records_; }

 private:
  std::vector<DetectionRecord> records_;
  std::map<std::int64_t, std::vector<std::size_t>> by_frame_;
};

}  // namespace trajexit
