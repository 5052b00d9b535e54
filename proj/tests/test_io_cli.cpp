#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "spinphase/scenario.hpp"

using namespace spinphase;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("spinphase-test-" + std::to_string(rd()) + "-" +
            std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Json minimal_scenario() {
  Json j;
  j["model"] = {{"kind", "rigid"}, {"inertia", {{"diag", {1.0, 2.0, 2.0}}}}};
  j["pi0"] = {0.5, std::sqrt(3.0) / 2.0, 0.0};
  j["t0"] = 0.0;
  j["t1"] = 1.0;
  j["h"] = 0.01;
  return j;
}

}  // namespace

TEST_CASE("doubles survive the text round trip exactly") {
  for (double v : {0.0, -1.0, kPi, 1.0 / 3.0, 1e-308, 6.02e23,
                   -0.1234567890123456789}) {
    CHECK(detail::parse_double(detail::format_double(v)) == v);
  }
  CHECK_THROWS_AS(detail::parse_double("1.0x"), IoError);
  CHECK_THROWS_AS(detail::parse_double(""), IoError);
}

TEST_CASE("csv line splitting keeps empty fields") {
  const auto f = detail::split_csv_line("a,,c");
  REQUIRE(f.size() == 3);
  CHECK(f[0] == "a");
  CHECK(f[1] == "");
  CHECK(f[2] == "c");
}

TEST_CASE("a model written as csv rebuilds into the same shape history") {
  const InertiaTensor I0 = InertiaTensor::diag(0.25, 1.0, 1.5);
  const DeformationModel src = make_vibrational(
      I0, [](double t) { return std::exp(0.2 * t); }, nullptr, 0.0, 2.0);
  std::vector<double> times;
  for (int k = 0; k <= 500; ++k) times.push_back(2.0 * k / 500.0);

  TempDir tmp;
  const fs::path file = tmp.path / "model.csv";
  atomic_write_text(file, model_csv(src, times));
  const DeformationModel back = make_tabulated(read_model_csv(file));

  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = 2.0 * (k + 0.5) / 100.0;
    worst = std::max(worst, (src.eval(t).inertia.matrix() -
                             back.eval(t).inertia.matrix())
                                .max_abs());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("model csv parsing rejects malformed input") {
  TempDir tmp;
  const fs::path file = tmp.path / "model.csv";
  atomic_write_text(file, "t,bogus\n");
  CHECK_THROWS_AS(read_model_csv(file), IoError);
  atomic_write_text(file, std::string(kModelHeader) + "\n0,1,0,0,2,0,3,0,0\n");
  CHECK_THROWS_AS(read_model_csv(file), IoError);
  CHECK_THROWS_AS(read_model_csv(tmp.path / "absent.csv"), IoError);
}

TEST_CASE("mass sidecar parsing enforces unique positive masses") {
  TempDir tmp;
  const fs::path file = tmp.path / "masses.csv";
  atomic_write_text(file, "particle_id,mass\n1,1.5\n2,2.5\n");
  const std::map<long, double> m = read_masses_csv(file);
  REQUIRE(m.size() == 2);
  CHECK(m.at(1) == 1.5);
  CHECK(m.at(2) == 2.5);

  atomic_write_text(file, "particle_id,mass\n1,1.5\n1,2.5\n");
  CHECK_THROWS_AS(read_masses_csv(file), IoError);
  atomic_write_text(file, "particle_id,mass\n1,0\n");
  CHECK_THROWS_AS(read_masses_csv(file), IoError);
}

TEST_CASE("a particle history file tabulates the correct inertia") {
  // Four-point cloud rotating rigidly about z at rate 0.8.
  const std::vector<double> masses{1.0, 1.0, 2.0, 2.0};
  const std::vector<Vec3> base{{1.0, 0.0, 0.2},
                               {-1.0, 0.0, 0.2},
                               {0.0, 0.5, -0.1},
                               {0.0, -0.5, -0.1}};
  const double w = 0.8;
  std::string traj = "t,particle_id,x,y,z,vx,vy,vz\n";
  std::vector<double> times;
  for (int k = 0; k <= 80; ++k) times.push_back(k / 80.0);
  for (double t : times) {
    const double c = std::cos(w * t), s = std::sin(w * t);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const Vec3 r{c * base[i].x - s * base[i].y,
                   s * base[i].x + c * base[i].y, base[i].z};
      const Vec3 v = cross(Vec3{0, 0, w}, r);
      traj += detail::format_double(t) + "," + std::to_string(i);
      for (double x : {r.x, r.y, r.z, v.x, v.y, v.z})
        traj += "," + detail::format_double(x);
      traj += "\n";
    }
  }
  TempDir tmp;
  atomic_write_text(tmp.path / "traj.csv", traj);
  std::string m = "particle_id,mass\n";
  for (std::size_t i = 0; i < masses.size(); ++i)
    m += std::to_string(i) + "," + detail::format_double(masses[i]) + "\n";
  atomic_write_text(tmp.path / "masses.csv", m);

  const DeformationModel model =
      read_particles_model(tmp.path / "traj.csv", tmp.path / "masses.csv");
  for (double t : {0.25, 0.5}) {
    const double c = std::cos(w * t), s = std::sin(w * t);
    std::vector<Vec3> r;
    for (const Vec3& q : base)
      r.push_back({c * q.x - s * q.y, s * q.x + c * q.y, q.z});
    const InertiaTensor direct = inertia_from_points(masses, r);
    CHECK((model.eval(t).inertia.matrix() - direct.matrix()).max_abs() <
          1e-6);
  }

  // A block missing one particle must be rejected.
  atomic_write_text(tmp.path / "short.csv",
                    "t,particle_id,x,y,z,vx,vy,vz\n"
                    "0,0,1,0,0.2,0,0,0\n0,1,-1,0,0.2,0,0,0\n"
                    "0,2,0,0.5,-0.1,0,0,0\n0,3,0,-0.5,-0.1,0,0,0\n"
                    "1,0,1,0,0.2,0,0,0\n");
  CHECK_THROWS_AS(
      read_particles_model(tmp.path / "short.csv", tmp.path / "masses.csv"),
      IoError);
}

TEST_CASE("trajectory csv has one row per node and the frozen header") {
  const DeformationModel m = make_rigid(InertiaTensor::diag(1, 2, 2));
  const auto [mt, rt] = integrate_reconstruction(
      m, {0.5, std::sqrt(3.0) / 2.0, 0.0}, Rotation::identity(), 0.0, 1.0,
      0.01);
  const std::string csv = trajectory_csv(m, mt, rt);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == mt.size() + 1);
  CHECK(csv.rfind(kTrajectoryHeader, 0) == 0);
  const auto first_row_start = csv.find('\n') + 1;
  const auto first_row =
      csv.substr(first_row_start, csv.find('\n', first_row_start) -
                                      first_row_start);
  CHECK(detail::split_csv_line(first_row).size() == 19);
}

TEST_CASE("scenario parsing rejects unknown keys and bad values") {
  TempDir tmp;
  CHECK_NOTHROW(parse_scenario(minimal_scenario(), tmp.path, "ok"));

  Json j = minimal_scenario();
  j["typo_key"] = 1;
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j.erase("pi0");
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j["t1"] = -1.0;
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j["h"] = 0.0;
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j["pi0"] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j["r0"] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 2}};
  CHECK_THROWS_AS(parse_scenario(j, tmp.path, "x"), ConfigError);

  j = minimal_scenario();
  j["model"] = {{"kind", "warp-drive"}};
  const ScenarioConfig cfg = parse_scenario(j, tmp.path, "x");
  CHECK_THROWS_AS(build_model(cfg), ConfigError);
}

TEST_CASE("scalar specs accept constants, ramps, and exponentials") {
  TempDir tmp;
  Json j = minimal_scenario();
  j["model"] = {
      {"kind", "diagonal"},
      {"I1", 1.0},
      {"I2", Json{{"value0", 2.0}, {"slope", 0.1}}},
      {"I3", Json{{"form", "exp"}, {"value0", 3.0}, {"rate", 0.05}}}};
  const ScenarioConfig cfg = parse_scenario(j, tmp.path, "ramp");
  const DeformationModel m = build_model(cfg);
  const DeformationState s = m.eval(0.5);
  CHECK(s.inertia.matrix()(0, 0) == Catch::Approx(1.0));
  CHECK(s.inertia.matrix()(1, 1) == Catch::Approx(2.05));
  CHECK(s.inertia.matrix()(2, 2) ==
        Catch::Approx(3.0 * std::exp(0.025)).epsilon(1e-12));
}

TEST_CASE("the simulate pipeline writes its artifacts") {
  TempDir tmp;
  Json j = minimal_scenario();
  j["outputs"] = {{"model", true}};
  const ScenarioConfig cfg = parse_scenario(j, tmp.path, "artifacts");
  const RunReport rep = run_simulate(cfg, tmp.path / "out");

  CHECK(fs::exists(tmp.path / "out" / "trajectory.csv"));
  CHECK(fs::exists(tmp.path / "out" / "report.json"));
  CHECK(fs::exists(tmp.path / "out" / "model.csv"));

  const Json report =
      Json::parse(read_text(tmp.path / "out" / "report.json"));
  CHECK(report["scenario"] == "artifacts");
  CHECK(report["command"] == "simulate");
  CHECK(report["momentum_norm"] == Catch::Approx(1.0));
  CHECK(report["time_grid"]["nodes"].get<std::size_t>() == 101);

  const std::string traj = read_text(tmp.path / "out" / "trajectory.csv");
  std::size_t lines = 0;
  for (char c : traj) lines += c == '\n';
  CHECK(lines == 102);
  CHECK(rep.segments.empty());
}

TEST_CASE("the phase pipeline reports the loop it finds") {
  TempDir tmp;
  Json j = minimal_scenario();
  j["t1"] = 26.0;
  j["h"] = 2e-3;
  j["tolerances"] = {{"closure_tol", 1e-3}};
  const ScenarioConfig cfg = parse_scenario(j, tmp.path, "loop");
  const RunReport rep = run_phase(cfg, tmp.path / "out");
  REQUIRE_FALSE(rep.segments.empty());
  REQUIRE(rep.segments.front().phase.has_value());
  const PhaseReport& ph = *rep.segments.front().phase;
  CHECK(ph.period == Catch::Approx(8.0 * kPi).margin(1e-6));
  CHECK(circle_distance(ph.theta_formula, 0.0) < 1e-4);

  const Json report = Json::parse(read_text(tmp.path / "out" / "report.json"));
  REQUIRE(report["segments"].size() >= 1);
  CHECK(report["segments"][0]["status"] == "ok");
  CHECK(report["segments"][0].contains("theta_formula"));
}

TEST_CASE("output directory resolution prefers the override") {
  TempDir tmp;
  Json j = minimal_scenario();
  ScenarioConfig cfg = parse_scenario(j, tmp.path, "dirs");
  CHECK_THROWS_AS(output_directory(cfg, {}), ConfigError);
  CHECK(output_directory(cfg, tmp.path / "o") == tmp.path / "o");

  j["outputs"] = {{"directory", "sub"}};
  cfg = parse_scenario(j, tmp.path, "dirs");
  CHECK(output_directory(cfg, {}) == tmp.path / "sub");
  CHECK(output_directory(cfg, tmp.path / "o") == tmp.path / "o");
}

TEST_CASE("scenario files map failures onto exit codes") {
  TempDir tmp;
  std::ostringstream log;
  CHECK(run_scenario_file(tmp.path / "missing.json", false, tmp.path / "o",
                          log) == 2);

  atomic_write_text(tmp.path / "bad.json", "{not json");
  CHECK(run_scenario_file(tmp.path / "bad.json", false, tmp.path / "o",
                          log) == 2);

  atomic_write_text(tmp.path / "good.json", minimal_scenario().dump());
  CHECK(run_scenario_file(tmp.path / "good.json", false, tmp.path / "o",
                          log) == 0);
  CHECK(fs::exists(tmp.path / "o" / "report.json"));
}

TEST_CASE("batch runs every config and fans out the output directories") {
  TempDir tmp;
  fs::create_directories(tmp.path / "configs");
  Json a = minimal_scenario();
  a["name"] = "alpha";
  Json b = minimal_scenario();
  b["name"] = "beta";
  b["t1"] = 0.5;
  atomic_write_text(tmp.path / "configs" / "alpha.json", a.dump());
  atomic_write_text(tmp.path / "configs" / "beta.json", b.dump());

  std::ostringstream log;
  const int code = run_batch(tmp.path / "configs", 2, tmp.path / "out", log);
  CHECK(code == 0);
  CHECK(fs::exists(tmp.path / "out" / "alpha" / "report.json"));
  CHECK(fs::exists(tmp.path / "out" / "beta" / "report.json"));

  fs::create_directories(tmp.path / "empty");
  const int empty_code = run_batch(tmp.path / "empty", 1, {}, log);
  CHECK(empty_code == 2);
}
