#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "spinphase/analytic.hpp"
#include "spinphase/io.hpp"
#include "spinphase/phase.hpp"

namespace spinphase {

using Json = nlohmann::ordered_json;

namespace detail {

inline void check_keys(const Json& j, const std::string& context,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

inline const Json& require(const Json& j, const std::string& context,
                           const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ConfigError("missing key '" + std::string(key) + "' in " + context);
  return *it;
}

inline double as_number(const Json& j, const std::string& context) {
  if (!j.is_number()) throw ConfigError(context + " must be a number");
  return j.get<double>();
}

inline double number_field(const Json& j, const std::string& context,
                           const char* key) {
  return as_number(require(j, context, key), context + "." + key);
}

inline Vec3 as_vec3(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(context + " must be an array of 3 numbers");
  return Vec3{as_number(j[0], context), as_number(j[1], context),
              as_number(j[2], context)};
}

inline Mat3 as_mat3(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(context + " must be an array of 3 rows");
  Mat3 m = Mat3::zero();
  for (int r = 0; r < 3; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != 3)
      throw ConfigError(context + " rows must hold 3 numbers");
    for (int c = 0; c < 3; ++c) m(r, c) = as_number(row[c], context);
  }
  return m;
}

inline InertiaTensor as_inertia(const Json& j, const std::string& context) {
  check_keys(j, context, {"diag", "matrix"});
  const bool has_diag = j.contains("diag");
  const bool has_matrix = j.contains("matrix");
  if (has_diag == has_matrix)
    throw ConfigError(context + " needs exactly one of 'diag' or 'matrix'");
  if (has_diag) {
    const Vec3 d = as_vec3(j["diag"], context + ".diag");
    return InertiaTensor(Mat3::diag(d.x, d.y, d.z));
  }
  return InertiaTensor(as_mat3(j["matrix"], context + ".matrix"));
}

/// A scalar coefficient of time: either a bare number (constant), a linear
/// ramp {"value0": v, "slope": s} meaning v + s*t, or an exponential
/// {"form": "exp", "value0": v, "rate": r} meaning v*e^{r*t}.
struct ScalarSpec {
  std::function<double(double)> value;
  std::function<double(double)> rate;
};

inline ScalarSpec as_scalar_spec(const Json& j, const std::string& context) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {[v](double) { return v; }, [](double) { return 0.0; }};
  }
  if (!j.is_object())
    throw ConfigError(context + " must be a number or an object");
  if (j.contains("form")) {
    check_keys(j, context, {"form", "value0", "rate"});
    const Json& form = j["form"];
    if (!form.is_string() || form.get<std::string>() != "exp")
      throw ConfigError(context + ".form must be \"exp\"");
    const double v0 =
        j.contains("value0") ? as_number(j["value0"], context) : 1.0;
    const double r = number_field(j, context, "rate");
    return {[v0, r](double t) { return v0 * std::exp(r * t); },
            [v0, r](double t) { return v0 * r * std::exp(r * t); }};
  }
  check_keys(j, context, {"value0", "slope"});
  const double v0 = number_field(j, context, "value0");
  const double s = j.contains("slope") ? as_number(j["slope"], context) : 0.0;
  return {[v0, s](double t) { return v0 + s * t; },
          [s](double) { return s; }};
}

}  // namespace detail

struct ToleranceSet {
  double closure_tol = 1e-6;
  double tol_spatial = 1e-6;
  double axis_tol = 1e-4;
};

struct OutputSpec {
  std::filesystem::path directory;
  bool trajectory = true;
  bool report = true;
  bool model = false;
};

struct ScenarioConfig {
  std::string name;
  Json model_spec;
  Vec3 pi0;
  Rotation r0 = Rotation::identity();
  double t0 = 0.0;
  double t1 = 0.0;
  double h = 0.0;
  ToleranceSet tolerances;
  OutputSpec outputs;
  std::filesystem::path base_dir;
};

inline ScenarioConfig parse_scenario(const Json& j,
                                     const std::filesystem::path& base_dir,
                                     const std::string& default_name) {
  using namespace detail;
  check_keys(j, "scenario",
             {"name", "model", "pi0", "r0", "t0", "t1", "h", "tolerances",
              "outputs"});
  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  cfg.name = default_name;
  if (j.contains("name")) {
    if (!j["name"].is_string())
      throw ConfigError("scenario.name must be a string");
    cfg.name = j["name"].get<std::string>();
  }

  cfg.model_spec = require(j, "scenario", "model");
  if (!cfg.model_spec.is_object() || !cfg.model_spec.contains("kind"))
    throw ConfigError("scenario.model must be an object with a 'kind'");

  cfg.pi0 = as_vec3(require(j, "scenario", "pi0"), "scenario.pi0");
  if (norm(cfg.pi0) <= 0.0)
    throw ConfigError("scenario.pi0 must be a nonzero vector");

  if (j.contains("r0")) {
    try {
      cfg.r0 = Rotation::from_matrix(as_mat3(j["r0"], "scenario.r0"));
    } catch (const Error& e) {
      throw ConfigError(std::string("scenario.r0 is not a rotation: ") +
                        e.what());
    }
  }

  cfg.t0 = number_field(j, "scenario", "t0");
  cfg.t1 = number_field(j, "scenario", "t1");
  cfg.h = number_field(j, "scenario", "h");
  if (!(cfg.t1 > cfg.t0)) throw ConfigError("scenario requires t1 > t0");
  if (!(cfg.h > 0.0)) throw ConfigError("scenario requires h > 0");

  if (j.contains("tolerances")) {
    const Json& tj = j["tolerances"];
    check_keys(tj, "scenario.tolerances",
               {"closure_tol", "tol_spatial", "axis_tol"});
    if (tj.contains("closure_tol"))
      cfg.tolerances.closure_tol =
          as_number(tj["closure_tol"], "tolerances.closure_tol");
    if (tj.contains("tol_spatial"))
      cfg.tolerances.tol_spatial =
          as_number(tj["tol_spatial"], "tolerances.tol_spatial");
    if (tj.contains("axis_tol"))
      cfg.tolerances.axis_tol =
          as_number(tj["axis_tol"], "tolerances.axis_tol");
    for (double v : {cfg.tolerances.closure_tol, cfg.tolerances.tol_spatial,
                     cfg.tolerances.axis_tol})
      if (!(v > 0.0)) throw ConfigError("tolerances must be positive");
  }

  if (j.contains("outputs")) {
    const Json& oj = j["outputs"];
    check_keys(oj, "scenario.outputs",
               {"directory", "trajectory", "report", "model"});
    if (oj.contains("directory")) {
      if (!oj["directory"].is_string())
        throw ConfigError("outputs.directory must be a string");
      cfg.outputs.directory = oj["directory"].get<std::string>();
    }
    const auto flag = [&](const char* key, bool fallback) {
      if (!oj.contains(key)) return fallback;
      if (!oj[key].is_boolean())
        throw ConfigError(std::string("outputs.") + key + " must be a bool");
      return oj[key].get<bool>();
    };
    cfg.outputs.trajectory = flag("trajectory", true);
    cfg.outputs.report = flag("report", true);
    cfg.outputs.model = flag("model", false);
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.has_parent_path()
                               ? path.parent_path()
                               : std::filesystem::path("."),
                        path.stem().string());
}

inline DeformationModel build_model(const ScenarioConfig& cfg) {
  using namespace detail;
  const Json& mj = cfg.model_spec;
  const Json& kind_j = require(mj, "model", "kind");
  if (!kind_j.is_string()) throw ConfigError("model.kind must be a string");
  const std::string kind = kind_j.get<std::string>();
  const auto resolve = [&cfg](const Json& j, const std::string& context) {
    if (!j.is_string()) throw ConfigError(context + " must be a path string");
    std::filesystem::path p = j.get<std::string>();
    return p.is_absolute() ? p : cfg.base_dir / p;
  };

  if (kind == "rigid") {
    check_keys(mj, "model", {"kind", "inertia", "internal_momentum"});
    const InertiaTensor I0 =
        as_inertia(require(mj, "model", "inertia"), "model.inertia");
    Vec3 l0{};
    if (mj.contains("internal_momentum"))
      l0 = as_vec3(mj["internal_momentum"], "model.internal_momentum");
    return make_rigid(I0, l0);
  }
  if (kind == "vibrational") {
    check_keys(mj, "model", {"kind", "inertia", "scale"});
    const InertiaTensor I0 =
        as_inertia(require(mj, "model", "inertia"), "model.inertia");
    const ScalarSpec a =
        as_scalar_spec(require(mj, "model", "scale"), "model.scale");
    return make_vibrational(I0, a.value, a.rate, cfg.t0, cfg.t1);
  }
  if (kind == "axisym") {
    check_keys(mj, "model", {"kind", "I1", "I23"});
    const ScalarSpec i1 = as_scalar_spec(require(mj, "model", "I1"), "model.I1");
    const double i23 = number_field(mj, "model", "I23");
    if (!(i23 > 0.0)) throw ConfigError("model.I23 must be positive");
    const auto c = [i23](double) { return i23; };
    const auto z = [](double) { return 0.0; };
    return make_diagonal_timevarying(i1.value, i1.rate, c, z, c, z, cfg.t0,
                                     cfg.t1);
  }
  if (kind == "diagonal") {
    check_keys(mj, "model", {"kind", "I1", "I2", "I3"});
    const ScalarSpec i1 = as_scalar_spec(require(mj, "model", "I1"), "model.I1");
    const ScalarSpec i2 = as_scalar_spec(require(mj, "model", "I2"), "model.I2");
    const ScalarSpec i3 = as_scalar_spec(require(mj, "model", "I3"), "model.I3");
    return make_diagonal_timevarying(i1.value, i1.rate, i2.value, i2.rate,
                                     i3.value, i3.rate, cfg.t0, cfg.t1);
  }
  if (kind == "particles") {
    check_keys(mj, "model", {"kind", "trajectories", "masses"});
    return read_particles_model(
        resolve(require(mj, "model", "trajectories"), "model.trajectories"),
        resolve(require(mj, "model", "masses"), "model.masses"));
  }
  if (kind == "tabulated") {
    check_keys(mj, "model", {"kind", "samples"});
    return make_tabulated(
        read_model_csv(resolve(require(mj, "model", "samples"), "model.samples")));
  }
  throw ConfigError("unknown model.kind '" + kind + "'");
}

struct SegmentReport {
  ClosedSegment segment;
  double t_a = 0.0;
  double t_b = 0.0;
  bool simple = false;
  std::string error;
  std::optional<PhaseReport> phase;
};

struct RunReport {
  std::string scenario;
  std::string command;
  std::string model_kind;
  double t0 = 0.0;
  double t1 = 0.0;
  double h = 0.0;
  std::size_t nodes = 0;
  double momentum_norm = 0.0;
  double spatial_residual_max = 0.0;
  double norm_drift_max = 0.0;
  double orthogonality_max = 0.0;
  long model_clamp_warnings = 0;
  std::vector<SegmentReport> segments;
  double elapsed_seconds = 0.0;  // stderr diagnostics only, never serialized
};

inline Json report_json(const RunReport& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["command"] = r.command;
  j["model_kind"] = r.model_kind;
  j["time_grid"] = {{"t0", r.t0}, {"t1", r.t1}, {"h", r.h}, {"nodes", r.nodes}};
  j["momentum_norm"] = r.momentum_norm;
  j["diagnostics"] = {{"spatial_residual_max", r.spatial_residual_max},
                      {"norm_drift_max", r.norm_drift_max},
                      {"orthogonality_max", r.orthogonality_max},
                      {"model_clamp_warnings", r.model_clamp_warnings}};
  Json regimes = Json::array();
  Json segs = Json::array();
  for (const SegmentReport& s : r.segments) {
    Json sj;
    sj["status"] =
        !s.simple ? "not simple" : (s.error.empty() ? "ok" : "error");
    if (!s.error.empty()) sj["error"] = s.error;
    sj["index_a"] = s.segment.index_a;
    sj["index_b"] = s.segment.index_b;
    sj["t_a"] = s.t_a;
    sj["t_b"] = s.t_b;
    sj["closure_residual"] = s.segment.closure_residual;
    if (s.phase) {
      const PhaseReport& p = *s.phase;
      sj["t_closure"] = p.t_closure;
      sj["period"] = p.period;
      sj["closure_gap"] = p.closure_gap;
      sj["theta_dynamic"] = p.theta_dynamic;
      sj["solid_angle"] = p.solid_angle;
      sj["theta_geometric"] = p.theta_geometric;
      sj["theta_unwrapped"] = p.theta_unwrapped;
      sj["theta_formula"] = p.theta_formula;
      sj["theta_direct"] = p.theta_direct;
      sj["discrepancy"] = p.discrepancy;
      sj["axis_residual"] = p.axis_residual;
      sj["used_complementary_disc"] = p.used_complementary_disc;
      sj["regime"] = regime_name(p.regime);
      sj["energy_min"] = p.energy_min;
      sj["energy_max"] = p.energy_max;
      sj["bounds"] = {{"valid", p.bounds_valid},
                      {"low", p.bounds_valid ? p.bounds.low : 0.0},
                      {"high", p.bounds_valid ? p.bounds.high : 0.0}};
      regimes.push_back(regime_name(p.regime));
    }
    segs.push_back(std::move(sj));
  }
  j["regime_summary"] = std::move(regimes);
  j["segments"] = std::move(segs);
  return j;
}

namespace detail {

struct RunArtifacts {
  DeformationModel model;
  MomentumTrajectory momentum;
  RotationTrajectory rotation;
  RunReport report;
};

inline RunArtifacts run_pipeline(const ScenarioConfig& cfg, bool with_phase) {
  const auto start = std::chrono::steady_clock::now();
  DeformationModel model = build_model(cfg);
  auto [mt, rt] =
      integrate_reconstruction(model, cfg.pi0, cfg.r0, cfg.t0, cfg.t1, cfg.h,
                               cfg.tolerances.tol_spatial);
  RunReport rep;
  rep.scenario = cfg.name;
  rep.command = with_phase ? "phase" : "simulate";
  rep.model_kind = model.kind();
  rep.t0 = cfg.t0;
  rep.t1 = cfg.t1;
  rep.h = cfg.h;
  rep.nodes = mt.size();
  rep.momentum_norm = mt.momentum_norm;
  rep.spatial_residual_max = rt.spatial_residual_max;
  rep.norm_drift_max = mt.norm_drift_max;
  rep.orthogonality_max = rt.orthogonality_max;
  rep.model_clamp_warnings = model.clamp_warnings();

  if (with_phase) {
    const std::vector<ClosedSegment> found =
        detect_closures(mt, cfg.tolerances.closure_tol);
    PhaseOptions opts;
    opts.closure_tol = cfg.tolerances.closure_tol;
    opts.axis_tol = cfg.tolerances.axis_tol;
    for (const ClosedSegment& seg : found) {
      SegmentReport sr;
      sr.segment = seg;
      sr.t_a = mt.times[seg.index_a];
      sr.t_b = mt.times[seg.index_b];
      sr.simple = seg.simple;
      if (seg.simple) {
        try {
          sr.phase = montgomery_phase(model, mt, rt, seg, opts);
        } catch (const Error& err) {
          sr.error = err.what();
        }
      }
      rep.segments.push_back(std::move(sr));
    }
  }
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return RunArtifacts{std::move(model), std::move(mt), std::move(rt),
                      std::move(rep)};
}

}  // namespace detail

/// Resolves the effective output directory: an explicit override wins,
/// otherwise the config's outputs.directory (relative to the config file).
inline std::filesystem::path output_directory(
    const ScenarioConfig& cfg,
    const std::optional<std::filesystem::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (cfg.outputs.directory.empty())
    throw ConfigError(
        "no output directory: set outputs.directory or pass --out-dir");
  return cfg.outputs.directory.is_absolute()
             ? cfg.outputs.directory
             : cfg.base_dir / cfg.outputs.directory;
}

inline void write_outputs(const ScenarioConfig& cfg,
                          const detail::RunArtifacts& art,
                          const std::filesystem::path& dir) {
  if (cfg.outputs.trajectory)
    atomic_write_text(dir / "trajectory.csv",
                      trajectory_csv(art.model, art.momentum, art.rotation));
  if (cfg.outputs.report)
    atomic_write_text(dir / "report.json", report_json(art.report).dump(2) + "\n");
  if (cfg.outputs.model)
    atomic_write_text(dir / "model.csv",
                      model_csv(art.model, art.momentum.times));
}

inline RunReport run_simulate(
    const ScenarioConfig& cfg,
    const std::optional<std::filesystem::path>& out_dir = {}) {
  detail::RunArtifacts art = detail::run_pipeline(cfg, false);
  write_outputs(cfg, art, output_directory(cfg, out_dir));
  return std::move(art.report);
}

inline RunReport run_phase(
    const ScenarioConfig& cfg,
    const std::optional<std::filesystem::path>& out_dir = {}) {
  detail::RunArtifacts art = detail::run_pipeline(cfg, true);
  write_outputs(cfg, art, output_directory(cfg, out_dir));
  return std::move(art.report);
}

/// Runs one scenario end to end, mapping failures onto process exit codes:
/// 0 ok, 2 configuration or input error, 3 numerical failure.
inline int run_scenario_file(
    const std::filesystem::path& config_path, bool with_phase,
    const std::optional<std::filesystem::path>& out_dir, std::ostream& log) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(config_path);
  } catch (const Error& e) {
    log << config_path.string() << ": " << e.what() << '\n';
    return 2;
  }
  try {
    const RunReport rep =
        with_phase ? run_phase(cfg, out_dir) : run_simulate(cfg, out_dir);
    log << rep.scenario << ": " << rep.nodes << " nodes";
    if (with_phase) log << ", " << rep.segments.size() << " segment(s)";
    log << " in " << rep.elapsed_seconds << " s\n";
    return 0;
  } catch (const ConfigError& e) {
    log << cfg.name << ": " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    log << cfg.name << ": " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    log << cfg.name << ": " << e.what() << '\n';
    return 3;
  }
}

/// Runs every *.json scenario under configs_dir through the phase pipeline,
/// one worker per scenario up to the requested job count. Returns the worst
/// exit code observed; log lines are buffered so output order matches the
/// sorted config order regardless of scheduling.
inline int run_batch(const std::filesystem::path& configs_dir, int jobs,
                     const std::optional<std::filesystem::path>& out_base,
                     std::ostream& log) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(configs_dir))
    throw ConfigError(configs_dir.string() + " is not a directory");
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(configs_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    log << "no scenario configs in " << configs_dir.string() << '\n';
    return 2;
  }
  if (jobs < 1) throw ConfigError("jobs must be at least 1");

  std::vector<std::string> logs(configs.size());
  std::vector<int> codes(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), configs.size());
  const auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      std::ostringstream local;
      std::optional<fs::path> dir;
      if (out_base) dir = *out_base / configs[i].stem();
      codes[i] = run_scenario_file(configs[i], true, dir, local);
      logs[i] = local.str();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& th : pool) th.join();

  int worst = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    log << logs[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace spinphase
