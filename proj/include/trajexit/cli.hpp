#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajexit/cost_model.hpp"
#include "trajexit/error.hpp"
#include "trajexit/fixture.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/ingest.hpp"
#include "trajexit/lr_planner.hpp"
#include "trajexit/policy.hpp"
#include "trajexit/sim.hpp"
#include "trajexit/text.hpp"

namespace trajexit::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInternal = 1, kInputError = 2, kCoverageError = 3 };

/// Stderr logger; level taken from TRAJ_EXIT_LOG (error, warn, info, debug).
class Logger {
 public:
  enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

  explicit Logger(std::ostream& sink) : sink_(sink) {
    if (const char* env = std::getenv("TRAJ_EXIT_LOG")) {
      const std::string v = env;
      if (v == "error") level_ = Level::Error;
      else if (v == "warn") level_ = Level::Warn;
      else if (v == "info") level_ = Level::Info;
      else if (v == "debug") level_ = Level::Debug;
    }
  }

  void error(const std::string& msg) const { log(Level::Error, "error", msg); }
  void warn(const std::string& msg) const { log(Level::Warn, "warning", msg); }
  void info(const std::string& msg) const { log(Level::Info, "info", msg); }
  void debug(const std::string& msg) const { log(Level::Debug, "debug", msg); }

 private:
  void log(Level lvl, const char* tag, const std::string& msg) const {
    if (static_cast<int>(lvl) <= static_cast<int>(level_)) sink_ << "trajexit: " << tag << ": " << msg << '\n';
  }

  std::ostream& sink_;
  Level level_ = Level::Warn;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

/// Prefixes errors raised while reading `path` with the file name.
template <typename Fn>
auto with_source(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline std::vector<double> parse_number_list(const std::string& s, std::size_t expected, const char* flag) {
  std::vector<double> out;
  for (auto tok : text::split(s, ',')) {
    auto v = text::parse_double(tok);
    if (!v || !std::isfinite(*v)) throw InputError(std::string(flag) + ": '" + std::string(tok) + "' is not a number");
    out.push_back(*v);
  }
  if (out.size() != expected) {
    throw InputError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

/// Files are staged in memory and written only once every output is ready.
class OutputSet {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

  void write_to(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw InputError("failed to write '" + (dir / name).string() + "'");
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Everything needed to rerun a command; stored as manifest.json next to its outputs.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  std::string dump() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = std::string(kToolVersion);
    j["inputs"] = inputs;
    j["config"] = config;
    j["out"] = out_dir;
    if (seed) j["seed"] = *seed;
    else j["seed"] = nullptr;
    j["created_utc"] = detail::utc_now();
    return j.dump(2) + "\n";
  }
};

struct TrajectoryArgs {
  std::string path;
  std::string format = "csv";
};

struct PolicyArgs {
  std::string path;
  std::optional<double> tau1;
  std::optional<double> tau2;
};

inline std::vector<Trajectory> load_trajectories(const TrajectoryArgs& a) {
  const auto fmt = parse_trajectory_format(a.format);
  return detail::with_source(a.path, [&] {
    std::istringstream in(detail::read_file(a.path));
    return parse_trajectories(in, fmt);
  });
}

inline PolicyConfig load_policy(const PolicyArgs& a) {
  PolicyConfig cfg;
  if (!a.path.empty()) cfg = detail::with_source(a.path, [&] { return policy_from_json(detail::read_json_file(a.path)); });
  if (a.tau1) cfg.tau1_m = *a.tau1;
  if (a.tau2) cfg.tau2_mps = *a.tau2;
  cfg.validate();
  return cfg;
}

inline DetectorProfile load_profile(const std::string& name_or_path) {
  if (auto p = bundled_profile(name_or_path)) return *p;
  return detail::with_source(name_or_path, [&] { return profile_from_json(detail::read_json_file(name_or_path)); });
}

// ---------------------------------------------------------------------------
// Commands

struct PlanLrArgs {
  std::string corpus;
  std::string thresholds = "32,96";
  std::string weights = "1.5,1.0,0.7";
  double eta0 = 1e-3;
  std::string classes = "ASV,Boat";
  std::string out;
};

inline int cmd_plan_lr(const PlanLrArgs& a, std::ostream& out, const Logger& log) {
  const auto th_v = detail::parse_number_list(a.thresholds, 2, "--thresholds");
  const auto w_v = detail::parse_number_list(a.weights, 3, "--weights");
  const ScaleThresholds th{th_v[0], th_v[1]};
  th.validate();
  const ScaleWeights weights{w_v[0], w_v[1], w_v[2]};

  auto corpus = detail::with_source(a.corpus, [&] {
    std::istringstream in(detail::read_file(a.corpus));
    return parse_bbox_corpus(in);
  });
  if (!a.classes.empty()) {
    std::set<std::string> allowed;
    for (auto c : text::split(a.classes, ',')) allowed.emplace(c);
    detail::with_source(a.corpus, [&] {
      require_class_labels(corpus, allowed);
      return 0;
    });
  }
  const ScaleComposition comp = detail::with_source(a.corpus, [&] { return compose(corpus, th, weights); });
  const LrSchedule sched = schedule(comp, a.eta0);
  for (Head h : sched.floored) {
    log.warn("no " + std::string(to_string(h)) + "-scale boxes; learning rate floored at " +
             text::format_double(kEmptyCategoryLrFactor) + " * eta0");
  }

  const std::string table = format_lr_table(comp, sched);
  out << table;
  if (!a.out.empty()) {
    RunManifest m;
    m.command = "plan-lr";
    m.inputs["corpus"] = a.corpus;
    m.config["thresholds"] = {th.small_max, th.medium_max};
    m.config["weights"] = weights;
    m.config["eta0"] = a.eta0;
    m.out_dir = a.out;
    detail::OutputSet files;
    files.add("schedule.json", to_json(comp, sched).dump(2) + "\n");
    files.add("table.txt", table);
    files.add("manifest.json", m.dump());
    files.write_to(a.out);
  }
  return kOk;
}

struct SimulateArgs {
  TrajectoryArgs traj;
  PolicyArgs policy;
  std::string frames;
  std::optional<double> fps;
  std::optional<double> t0;
  std::string profile = "deployment";
  std::string backend = "cost";
  std::string detections;
  std::string out;
};

inline FrameStreamMeta load_frames(const SimulateArgs& a) {
  FrameStreamMeta meta;
  if (auto count = text::parse_int(a.frames)) {
    if (*count <= 0) throw InputError("--frames must be positive");
    if (!a.fps) throw InputError("--frames given as a count requires --fps");
    meta.frame_count = static_cast<std::size_t>(*count);
    meta.fps = *a.fps;
    meta.t0 = a.t0.value_or(0.0);
  } else {
    meta = detail::with_source(a.frames, [&] { return frame_meta_from_json(detail::read_json_file(a.frames)); });
    if (a.fps) meta.fps = *a.fps;
    if (a.t0) meta.t0 = *a.t0;
  }
  meta.validate();
  return meta;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, const Logger& log) {
  const auto trajs = load_trajectories(a.traj);
  if (trajs.size() < 2) throw InputError("need at least two vessels, found " + std::to_string(trajs.size()));
  if (trajs.size() > 2) log.info("aggregating " + std::to_string(trajs.size()) + " vessels by closest pair");
  const FrameStreamMeta meta = load_frames(a);
  const PolicyConfig cfg = load_policy(a.policy);
  const DetectorProfile profile = load_profile(a.profile);
  for (const auto& issue : validate_profile(profile).issues) log.warn("profile: " + issue);

  std::unique_ptr<DetectorBackend> backend;
  if (a.backend == "cost") {
    if (!a.detections.empty()) log.warn("--detections ignored with --backend cost");
    backend = std::make_unique<CostOnlyBackend>();
  } else if (a.backend == "replay") {
    if (a.detections.empty()) throw InputError("--backend replay requires --detections");
    auto dets = detail::with_source(a.detections, [&] {
      std::istringstream in(detail::read_file(a.detections));
      return parse_detections(in);
    });
    for (const auto& d : dets) {
      if (d.frame_index < 0 || static_cast<std::size_t>(d.frame_index) >= meta.frame_count) {
        throw InputError(a.detections + ": frame " + std::to_string(d.frame_index) + " outside the frame stream");
      }
    }
    backend = std::make_unique<ReplayBackend>(std::move(dets));
  } else {
    throw InputError("unknown backend '" + a.backend + "' (expected cost or replay)");
  }

  const SimulationResult result = run(trajs, meta, cfg, profile, *backend);
  log.debug("built " + std::to_string(result.report.per_window_timeline.size()) + " motion windows");

  std::ostringstream timeline, decisions;
  export_timeline(result.report, timeline);
  write_decision_log(result.decisions, decisions, a.backend == "replay");

  RunManifest m;
  m.command = "simulate";
  m.inputs["trajectories"] = a.traj.path;
  m.inputs["format"] = a.traj.format;
  m.inputs["frames"] = a.frames;
  m.inputs["profile"] = a.profile;
  if (!a.policy.path.empty()) m.inputs["policy"] = a.policy.path;
  if (!a.detections.empty()) m.inputs["detections"] = a.detections;
  m.config["policy"] = to_json(cfg);
  m.config["frames"] = to_json(meta);
  m.config["backend"] = backend->name();
  m.out_dir = a.out;

  detail::OutputSet files;
  files.add("report.json", to_json(result.report).dump(2) + "\n");
  files.add("timeline.csv", timeline.str());
  files.add("decisions.jsonl", decisions.str());
  files.add("manifest.json", m.dump());
  files.write_to(a.out);

  out << summarize(result.report, cfg);
  return kOk;
}

struct PolicyEvalArgs {
  TrajectoryArgs traj;
  PolicyArgs policy;
  std::string out;
};

inline int cmd_policy_eval(const PolicyEvalArgs& a, std::ostream& out, const Logger&) {
  const auto trajs = load_trajectories(a.traj);
  if (trajs.size() < 2) throw InputError("need at least two vessels, found " + std::to_string(trajs.size()));
  const PolicyConfig cfg = load_policy(a.policy);
  const auto windows = build_windows(trajs);
  std::ostringstream table;
  export_timeline(window_decisions(windows, cfg), table);
  out << table.str();
  if (!a.out.empty()) {
    RunManifest m;
    m.command = "policy-eval";
    m.inputs["trajectories"] = a.traj.path;
    m.inputs["format"] = a.traj.format;
    if (!a.policy.path.empty()) m.inputs["policy"] = a.policy.path;
    m.config["policy"] = to_json(cfg);
    m.out_dir = a.out;
    detail::OutputSet files;
    files.add("timeline.csv", table.str());
    files.add("manifest.json", m.dump());
    files.write_to(a.out);
  }
  return kOk;
}

struct MakeFixtureArgs {
  std::string preset;
  std::uint64_t seed = 7;
  std::optional<std::size_t> duration;
  std::optional<double> fps;
  std::optional<std::size_t> frames;
  std::string episodes;
  bool all_easy = false;
  bool all_hard = false;
  bool random_episodes = false;
  std::string format = "csv";
  std::string out;
};

inline std::vector<Episode> parse_episodes(const std::string& s) {
  std::vector<Episode> eps;
  if (s.empty()) return eps;
  for (auto tok : text::split(s, ',')) {
    auto parts = text::split(tok, ':');
    auto start = parts.size() == 2 ? text::parse_int(parts[0]) : std::nullopt;
    auto len = parts.size() == 2 ? text::parse_int(parts[1]) : std::nullopt;
    if (!start || !len || *start < 0 || *len <= 0) {
      throw InputError("--episodes expects start:length pairs, got '" + std::string(tok) + "'");
    }
    eps.push_back({static_cast<std::size_t>(*start), static_cast<std::size_t>(*len)});
  }
  return eps;
}

inline int cmd_make_fixture(const MakeFixtureArgs& a, std::ostream& out, const Logger&) {
  FixtureSpec spec;
  if (a.preset == "paper") {
    spec = paper_fixture_spec(a.seed);
  } else if (!a.preset.empty()) {
    throw InputError("unknown preset '" + a.preset + "' (expected paper)");
  }
  spec.seed = a.seed;
  if (a.duration) spec.duration_s = *a.duration;
  if (a.fps) spec.fps = *a.fps;
  if (a.frames) spec.frame_count = *a.frames;
  if ((a.duration || a.fps) && !a.frames && a.preset == "paper") spec.frame_count = 0;

  const int layouts = int(a.all_easy) + int(a.all_hard) + int(!a.episodes.empty()) + int(a.random_episodes);
  if (layouts > 1) throw InputError("choose at most one of --all-easy, --all-hard, --episodes, --random-episodes");
  if (a.all_easy) spec.hard_episodes.clear();
  if (a.all_hard) spec.hard_episodes = {{0, spec.duration_s}};
  if (!a.episodes.empty()) spec.hard_episodes = parse_episodes(a.episodes);
  if (a.random_episodes) {
    FixtureRng rng(a.seed ^ 0x5EEDull);
    spec.hard_episodes = random_episodes(spec.duration_s, rng);
  }

  const Fixture fx = make_fixture(spec);
  const auto fmt = parse_trajectory_format(a.format);

  std::ostringstream traj, dets;
  write_trajectories(traj, fx.trajectories, fmt);
  write_detections(dets, fx.detections);

  RunManifest m;
  m.command = "make-fixture";
  m.config["preset"] = a.preset.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(a.preset);
  m.config["duration_s"] = spec.duration_s;
  m.config["fps"] = spec.fps;
  m.config["frame_count"] = fx.frames.frame_count;
  nlohmann::ordered_json eps = nlohmann::ordered_json::array();
  for (const auto& e : spec.hard_episodes) eps.push_back({e.start, e.length});
  m.config["hard_episodes"] = eps;
  m.out_dir = a.out;
  m.seed = a.seed;

  const std::string traj_name = fmt == TrajectoryFormat::Csv ? "trajectories.csv" : "trajectories.jsonl";
  detail::OutputSet files;
  files.add(traj_name, traj.str());
  files.add("frames.json", to_json(fx.frames).dump(2) + "\n");
  files.add("detections.jsonl", dets.str());
  files.add("policy.json", to_json(PolicyConfig{}).dump(2) + "\n");
  files.add("manifest.json", m.dump());
  files.write_to(a.out);

  std::size_t hard = 0;
  for (bool h : fx.hard) hard += h ? 1 : 0;
  out << "wrote fixture to " << a.out << ": " << spec.duration_s << " s, " << fx.frames.frame_count << " frames, "
      << hard << " hard window(s), " << fx.detections.size() << " detections\n";
  return kOk;
}

inline int cmd_validate_profile(const std::string& profile, std::ostream& out) {
  const DetectorProfile p = load_profile(profile);
  const auto report = validate_profile(p);
  if (report.ok()) {
    out << p.model << ": consistent\n";
    return kOk;
  }
  for (const auto& issue : report.issues) out << p.model << ": " << issue << '\n';
  return kCoverageError;
}

// ---------------------------------------------------------------------------
// Entry point

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  const Logger log(err);
  CLI::App app{"Trajectory-aware head selection for multi-head detectors", "trajexit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto add_traj = [](CLI::App* c, TrajectoryArgs& t) {
    c->add_option("--trajectories", t.path, "Trajectory file (vessel_id,t,lat,lon)")->required();
    c->add_option("--format", t.format, "Trajectory format")->check(CLI::IsMember({"csv", "jsonl"}));
  };
  auto add_policy = [](CLI::App* c, PolicyArgs& p) {
    c->add_option("--policy", p.path, "Policy JSON (tau1_m, tau2_mps, low_set, full_set, use_abs_v)");
    c->add_option("--tau1", p.tau1, "Distance threshold override, meters");
    c->add_option("--tau2", p.tau2, "Closure-rate threshold override, m/s");
  };

  PlanLrArgs plan;
  auto* plan_cmd = app.add_subcommand("plan-lr", "Per-head learning rates from a bounding-box corpus");
  plan_cmd->add_option("--corpus", plan.corpus, "Box corpus CSV (image_id,class,width,height)")->required();
  plan_cmd->add_option("--thresholds", plan.thresholds, "small_max,medium_max in pixels");
  plan_cmd->add_option("--weights", plan.weights, "omega for small,medium,large");
  plan_cmd->add_option("--eta0", plan.eta0, "Base learning rate");
  plan_cmd->add_option("--classes", plan.classes, "Allowed class labels (comma-separated, empty = any)");
  plan_cmd->add_option("--out", plan.out, "Output directory");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Replay a frame stream through the head-selection policy");
  add_traj(sim_cmd, sim.traj);
  add_policy(sim_cmd, sim.policy);
  sim_cmd->add_option("--frames", sim.frames, "Frame metadata JSON, or a frame count")->required();
  sim_cmd->add_option("--fps", sim.fps, "Frames per second (overrides metadata)");
  sim_cmd->add_option("--t0", sim.t0, "Timestamp of frame 0 (overrides metadata)");
  sim_cmd->add_option("--profile", sim.profile, "Profile JSON or bundled name (nano, small, medium, deployment)");
  sim_cmd->add_option("--backend", sim.backend, "Detector backend")->check(CLI::IsMember({"cost", "replay"}));
  sim_cmd->add_option("--detections", sim.detections, "Detections JSONL for the replay backend");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  PolicyEvalArgs pe;
  auto* pe_cmd = app.add_subcommand("policy-eval", "Per-window distance, closure rate and head selection");
  add_traj(pe_cmd, pe.traj);
  add_policy(pe_cmd, pe.policy);
  pe_cmd->add_option("--out", pe.out, "Output directory");

  MakeFixtureArgs fx;
  auto* fx_cmd = app.add_subcommand("make-fixture", "Generate a synthetic two-vessel scenario");
  fx_cmd->add_option("--preset", fx.preset, "Named scenario")->check(CLI::IsMember({"paper"}));
  fx_cmd->add_option("--seed", fx.seed, "Seed for jitter and synthetic detections");
  fx_cmd->add_option("--duration", fx.duration, "Duration in seconds (one window per second)");
  fx_cmd->add_option("--fps", fx.fps, "Frames per second");
  fx_cmd->add_option("--frames", fx.frames, "Frame count (default duration * fps)");
  fx_cmd->add_option("--episodes", fx.episodes, "Hard windows as start:length,...");
  fx_cmd->add_flag("--all-easy", fx.all_easy, "No hard windows");
  fx_cmd->add_flag("--all-hard", fx.all_hard, "Every window hard");
  fx_cmd->add_flag("--random-episodes", fx.random_episodes, "Seeded random hard episodes");
  fx_cmd->add_option("--format", fx.format, "Trajectory output format")->check(CLI::IsMember({"csv", "jsonl"}));
  fx_cmd->add_option("--out", fx.out, "Output directory")->required();

  std::string vp_profile;
  auto* vp_cmd = app.add_subcommand("validate-profile", "Check a detector profile for internal consistency");
  vp_cmd->add_option("--profile", vp_profile, "Profile JSON or bundled name")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*plan_cmd) return cmd_plan_lr(plan, out, log);
    if (*sim_cmd) return cmd_simulate(sim, out, log);
    if (*pe_cmd) return cmd_policy_eval(pe, out, log);
    if (*fx_cmd) return cmd_make_fixture(fx, out, log);
    if (*vp_cmd) return cmd_validate_profile(vp_profile, out);
  } catch (const CoverageError& e) {
    log.error(e.what());
    return kCoverageError;
  } catch (const InputError& e) {
    log.error(e.what());
    return kInputError;
  } catch (const std::exception& e) {
    log.error(std::string("internal error: ") + e.what());
    return kInternal;
  }
  return kInputError;
}

}  // namespace trajexit::cli
