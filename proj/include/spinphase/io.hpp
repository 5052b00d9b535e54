#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spinphase/reconstruct.hpp"

namespace spinphase {

namespace detail {

/// Shortest exact decimal form of a double; round-trips bit for bit.
inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, buf + n);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw IoError("cannot parse number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

}  // namespace detail

/// Writes content to path via a temporary file and an atomic rename, so a
/// crash never leaves a half-written output behind.
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline constexpr const char* kTrajectoryHeader =
    "t,Pi1,Pi2,Pi3,R11,R12,R13,R21,R22,R23,R31,R32,R33,"
    "omega1,omega2,omega3,energy,theta_dyn,spatial_residual";

/// Serializes a reconstruction run as CSV, one row per node.
inline std::string trajectory_csv(const DeformationModel& m,
                                  const MomentumTrajectory& mt,
                                  const RotationTrajectory& rt) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (std::size_t k = 0; k < mt.size(); ++k) {
    const DeformationState s = m.eval(mt.times[k]);
    const Vec3& pi = mt.points[k];
    const Rotation& R = rt.rotations[k];
    const Vec3 w = omega_from_pi(s, pi);
    const double e = energy_at(s, pi);
    const double res = norm(R * pi - rt.spatial_momentum);
    using detail::format_double;
    out += format_double(mt.times[k]);
    for (double v : {pi.x, pi.y, pi.z}) out += "," + format_double(v);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out += "," + format_double(R.m(r, c));
    for (double v : {w.x, w.y, w.z}) out += "," + format_double(v);
    out += "," + format_double(e);
    out += "," + format_double(rt.theta_dyn[k]);
    out += "," + format_double(res);
    out += '\n';
  }
  return out;
}

inline constexpr const char* kModelHeader =
    "t,I11,I12,I13,I22,I23,I33,L01,L02,L03";

/// Samples the deformation model at the given times as tabulated-model CSV.
inline std::string model_csv(const DeformationModel& m,
                             const std::vector<double>& times) {
  std::string out(kModelHeader);
  out += '\n';
  for (double t : times) {
    const DeformationState s = m.eval(t);
    const Mat3& im = s.inertia.matrix();
    using detail::format_double;
    out += format_double(t);
    for (double v : {im(0, 0), im(0, 1), im(0, 2), im(1, 1), im(1, 2),
                     im(2, 2), s.internal_momentum.x, s.internal_momentum.y,
                     s.internal_momentum.z})
      out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

/// Parses tabulated-model CSV (header t,I11,I12,I13,I22,I23,I33,L01,L02,L03).
inline std::vector<DeformationSample> read_model_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::strip_cr(line) != kModelHeader)
    throw IoError("unexpected header in " + path.string());
  std::vector<DeformationSample> samples;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 10)
      throw IoError("expected 10 columns in " + path.string());
    double v[10];
    for (int i = 0; i < 10; ++i) v[i] = detail::parse_double(f[i]);
    DeformationSample s;
    s.t = v[0];
    s.inertia.a = {v[1], v[2], v[3], v[2], v[4], v[5], v[3], v[5], v[6]};
    s.internal_momentum = {v[7], v[8], v[9]};
    samples.push_back(s);
  }
  return samples;
}

/// Parses a per-particle mass sidecar (header particle_id,mass).
inline std::map<long, double> read_masses_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      detail::strip_cr(line) != std::string("particle_id,mass"))
    throw IoError("unexpected header in " + path.string());
  std::map<long, double> masses;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 2) throw IoError("expected 2 columns in " + path.string());
    const long id = static_cast<long>(detail::parse_double(f[0]));
    const double mass = detail::parse_double(f[1]);
    if (!(mass > 0.0)) throw IoError("particle mass must be positive");
    if (!masses.emplace(id, mass).second)
      throw IoError("duplicate particle id in " + path.string());
  }
  if (masses.empty()) throw IoError("no masses in " + path.string());
  return masses;
}

/// Parses particle kinematics CSV (header t,particle_id,x,y,z,vx,vy,vz)
/// grouped by strictly increasing sample time, pairs it with the mass
/// sidecar, and tabulates the resulting inertia and internal momentum.
inline DeformationModel read_particles_model(
    const std::filesystem::path& trajectories_path,
    const std::filesystem::path& masses_path) {
  const std::map<long, double> mass_by_id = read_masses_csv(masses_path);
  std::ifstream in(trajectories_path);
  if (!in) throw IoError("cannot open " + trajectories_path.string());
  std::string line;
  if (!std::getline(in, line) ||
      detail::strip_cr(line) != std::string("t,particle_id,x,y,z,vx,vy,vz"))
    throw IoError("unexpected header in " + trajectories_path.string());

  struct Block {
    double t = 0.0;
    std::map<long, std::pair<Vec3, Vec3>> rows;
  };
  std::vector<Block> blocks;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 8)
      throw IoError("expected 8 columns in " + trajectories_path.string());
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = detail::parse_double(f[i]);
    const long id = static_cast<long>(v[1]);
    if (!mass_by_id.count(id))
      throw IoError("particle id without a mass entry");
    if (blocks.empty() || v[0] > blocks.back().t) {
      blocks.push_back(Block{v[0], {}});
    } else if (v[0] < blocks.back().t) {
      throw UnsortedSamplesError(
          "particle sample times must be non-decreasing");
    }
    auto& rows = blocks.back().rows;
    if (!rows.emplace(id, std::make_pair(Vec3{v[2], v[3], v[4]},
                                         Vec3{v[5], v[6], v[7]}))
             .second)
      throw IoError("duplicate particle row within a sample time");
  }
  if (blocks.size() < 2)
    throw IoError("need at least two particle sample times");

  std::vector<DeformationSample> samples;
  samples.reserve(blocks.size());
  for (const Block& blk : blocks) {
    if (blk.rows.size() != mass_by_id.size())
      throw IoError("incomplete particle set at one sample time");
    std::vector<double> masses;
    std::vector<Vec3> r, v;
    for (const auto& [id, mass] : mass_by_id) {
      const auto& rv = blk.rows.at(id);
      masses.push_back(mass);
      r.push_back(rv.first);
      v.push_back(rv.second);
    }
    DeformationSample s;
    s.t = blk.t;
    s.inertia = inertia_from_points(masses, r).matrix();
    s.internal_momentum = internal_momentum_from_points(masses, r, v);
    samples.push_back(s);
  }
  return make_tabulated(samples);
}

}  // namespace spinphase
