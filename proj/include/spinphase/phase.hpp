#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "spinphase/reconstruct.hpp"

namespace spinphase {

/// Node-indexed closed loop of a momentum trajectory. closure_residual is
/// |Pi_b - Pi_a| / l; simple records whether the loop passes the
/// self-intersection test.
struct ClosedSegment {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  double closure_residual = 0.0;
  bool simple = false;
};

enum class Regime { Axis1Orbit, Axis3Orbit, Indeterminate };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Axis1Orbit:
      return "axis1-orbit";
    case Regime::Axis3Orbit:
      return "axis3-orbit";
    default:
      return "indeterminate";
  }
}

namespace detail {

/// Uniform spatial hash over 3D points, used to prune pair searches.
class PointGrid {
 public:
  PointGrid(std::span<const Vec3> pts, double cell) : cell_(cell) {
    cells_.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      cells_[key(pts[i])].push_back(static_cast<std::uint32_t>(i));
  }

  template <class Fn>
  void for_neighbors(const Vec3& p, Fn&& fn) const {
    const long ix = coord(p.x), iy = coord(p.y), iz = coord(p.z);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(pack(ix + dx, iy + dy, iz + dz));
          if (it == cells_.end()) continue;
          for (std::uint32_t j : it->second) fn(j);
        }
  }

 private:
  long coord(double v) const { return static_cast<long>(std::floor(v / cell_)); }

  static std::uint64_t pack(long x, long y, long z) {
    const std::uint64_t mask = (1ull << 21) - 1;
    const std::uint64_t off = 1ull << 20;
    return ((static_cast<std::uint64_t>(x) + off) & mask) |
           (((static_cast<std::uint64_t>(y) + off) & mask) << 21) |
           (((static_cast<std::uint64_t>(z) + off) & mask) << 42);
  }

  std::uint64_t key(const Vec3& p) const {
    return pack(coord(p.x), coord(p.y), coord(p.z));
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

/// True when u lies on the minor arc between unit vectors a and b, given
/// n = cross(a, b). eps > 0 makes the test strict (open arc).
inline bool in_minor_arc(const Vec3& u, const Vec3& a, const Vec3& b,
                         const Vec3& n, double eps) {
  return dot(cross(a, u), n) >= eps && dot(cross(u, b), n) >= eps &&
         dot(u, a + b) > 0.0;
}

/// Intersection test for two minor great-circle arcs on the unit sphere.
inline bool arcs_cross(const Vec3& a, const Vec3& b, const Vec3& c,
                       const Vec3& d) {
  const Vec3 n1 = cross(a, b);
  const Vec3 n2 = cross(c, d);
  const double s1 = norm2(n1), s2 = norm2(n2);
  if (s1 < 1e-30 || s2 < 1e-30) return false;  // degenerate edge
  const Vec3 t = cross(n1, n2);
  const double tn2 = norm2(t);
  if (tn2 <= 1e-18 * s1 * s2) {
    // Arcs lie on (nearly) the same great circle: they cross when one
    // contains an interior point of the other.
    const double plane_eps = 1e-9 * std::sqrt(s1);
    if (std::abs(dot(c, n1)) > plane_eps || std::abs(dot(d, n1)) > plane_eps)
      return false;
    const double strict = 1e-14;
    return in_minor_arc(c, a, b, n1, strict) ||
           in_minor_arc(d, a, b, n1, strict) ||
           in_minor_arc(a, c, d, n2, strict) ||
           in_minor_arc(b, c, d, n2, strict);
  }
  const Vec3 u = t / std::sqrt(tn2);
  const double eps = -1e-14;
  if (in_minor_arc(u, a, b, n1, eps) && in_minor_arc(u, c, d, n2, eps))
    return true;
  const Vec3 v = -u;
  return in_minor_arc(v, a, b, n1, eps) && in_minor_arc(v, c, d, n2, eps);
}

}  // namespace detail

/// Self-intersection test for a closed spherical polyline. The input is
/// radially projected to the unit sphere, closed by an implicit edge from the
/// last point back to the first, and every non-adjacent edge pair is tested
/// for a great-circle arc crossing. A spatial grid prunes far-apart pairs,
/// so the pairwise test stays near-linear for well-behaved curves.
inline bool is_simple_curve(std::span<const Vec3> pts) {
  std::vector<Vec3> q;
  q.reserve(pts.size());
  for (const Vec3& p : pts) {
    const double n = norm(p);
    if (n == 0.0) throw DegenerateCurveError("curve passes through origin");
    const Vec3 u = p / n;
    // Collapse consecutive duplicates; they carry no edge.
    if (!q.empty() && norm(u - q.back()) < 1e-14) continue;
    q.push_back(u);
  }
  if (q.size() >= 2 && norm(q.front() - q.back()) < 1e-14) q.pop_back();
  const std::size_t n = q.size();
  if (n < 4) return true;  // a triangle or less cannot self-intersect

  double max_edge = 0.0;
  std::vector<Vec3> mid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = q[i];
    const Vec3& b = q[(i + 1) % n];
    max_edge = std::max(max_edge, norm(b - a));
    mid[i] = (a + b) * 0.5;
  }
  const detail::PointGrid grid(mid, std::max(max_edge, 1e-12));

  for (std::size_t i = 0; i < n; ++i) {
    bool crossing = false;
    grid.for_neighbors(mid[i], [&](std::uint32_t j) {
      if (crossing || j <= i) return;
      const bool adjacent =
          (i + 1) % n == j || (j + 1) % n == i;
      if (adjacent) return;
      if (detail::arcs_cross(q[i], q[(i + 1) % n], q[j], q[(j + 1) % n]))
        crossing = true;
    });
    if (crossing) return false;
  }
  return true;
}

/// Signed solid angle of the disc bounded by a closed spherical curve, taken
/// on the side of the curve's mean direction and signed by the traversal
/// orientation (right-hand rule). Computed by fanning the polyline from the
/// normalized centroid and summing oriented triangle solid angles via the
/// two-argument arctangent formula. Throws DegenerateCurveError when the
/// centroid direction is too short to define the reference disc.
inline double signed_solid_angle(std::span<const Vec3> pts) {
  std::vector<Vec3> q;
  q.reserve(pts.size());
  for (const Vec3& p : pts) {
    const double nn = norm(p);
    if (nn == 0.0) throw DegenerateCurveError("curve passes through origin");
    const Vec3 u = p / nn;
    if (!q.empty() && norm(u - q.back()) < 1e-14) continue;
    q.push_back(u);
  }
  if (q.size() >= 2 && norm(q.front() - q.back()) < 1e-14) q.pop_back();
  if (q.size() < 3)
    throw DegenerateCurveError("need at least three distinct points");

  Vec3 mean{};
  for (const Vec3& u : q) mean += u;
  mean = mean / static_cast<double>(q.size());
  if (norm(mean) < 1e-6)
    throw DegenerateCurveError("curve centroid direction is degenerate");
  const Vec3 c = normalized(mean);

  double omega = 0.0;
  const std::size_t n = q.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& r2 = q[k];
    const Vec3& r3 = q[(k + 1) % n];
    const double det = dot(c, cross(r2, r3));
    const double den = 1.0 + dot(c, r2) + dot(r2, r3) + dot(r3, c);
    omega += 2.0 * std::atan2(det, den);
  }
  return omega;
}

/// Finds non-overlapping closed loops at node resolution: starting from each
/// candidate index a (greedily advanced past accepted loops), the first node
/// b > a + min_arc_nodes with |Pi_b - Pi_a| <= closure_tol * l closes a
/// segment. A loop must first leave twice the closure tolerance, which
/// excludes trivial loops around equilibria. Simplicity is tested per
/// segment.
inline std::vector<ClosedSegment> detect_closures(
    const MomentumTrajectory& traj, double closure_tol,
    std::size_t min_arc_nodes = 10) {
  std::vector<ClosedSegment> segments;
  const std::size_t n = traj.size();
  if (n < 2 || !(closure_tol > 0.0)) return segments;
  const double l = traj.momentum_norm;
  const double tol_abs = closure_tol * l;

  const detail::PointGrid grid(traj.points, tol_abs);

  std::size_t a = 0;
  while (a + min_arc_nodes < n) {
    const Vec3& pa = traj.points[a];
    // Departure: the loop has to actually leave the neighborhood first.
    std::size_t exit = a + 1;
    while (exit < n && norm(traj.points[exit] - pa) <= 2.0 * tol_abs) ++exit;
    if (exit >= n) break;  // the tail never leaves; no loop can start here

    std::size_t best = n;
    grid.for_neighbors(pa, [&](std::uint32_t j) {
      if (j <= a + min_arc_nodes || j < exit || j >= best) return;
      if (norm(traj.points[j] - pa) <= tol_abs) best = j;
    });
    if (best < n) {
      // Walk forward to the locally closest node so the recorded endpoint
      // is the best return, not merely the first node inside the tolerance.
      while (best + 1 < n && norm(traj.points[best + 1] - pa) <
                                 norm(traj.points[best] - pa))
        ++best;
      ClosedSegment seg;
      seg.index_a = a;
      seg.index_b = best;
      seg.closure_residual = norm(traj.points[best] - pa) / l;
      // The locally closest node can land just past the true closure, folding
      // the final edge back over the first; test simplicity on [a, best) so
      // that sliver does not count as a crossing.
      seg.simple = is_simple_curve(
          std::span<const Vec3>(traj.points.data() + a, best - a));
      segments.push_back(seg);
      a = best;
    } else {
      ++a;
    }
  }
  return segments;
}

/// Rotation angle of Delta = R_b R_a^T about the spatial momentum direction.
/// Returns the angle in (-pi, pi] and the axis residual |Delta L - L| / |L|;
/// throws AxisMismatchError when the residual exceeds axis_tol.
struct DirectPhase {
  double theta = 0.0;
  double axis_residual = 0.0;
};

inline DirectPhase direct_phase(const Rotation& Ra, const Rotation& Rb,
                                const Vec3& L, double axis_tol = 1e-4) {
  const double l = norm(L);
  if (!(l > 0.0)) throw ConfigError("spatial momentum must be nonzero");
  const Rotation delta = Rb * Ra.transposed();
  DirectPhase out;
  out.axis_residual = norm(delta * L - L) / l;
  if (out.axis_residual > axis_tol)
    throw AxisMismatchError(
        "relative rotation does not preserve the momentum axis");
  const Vec3 lhat = L / l;
  // Reference direction orthogonal to L, built from the smallest component.
  int smallest = 0;
  double best = std::abs(lhat.x);
  if (std::abs(lhat.y) < best) {
    best = std::abs(lhat.y);
    smallest = 1;
  }
  if (std::abs(lhat.z) < best) smallest = 2;
  const Vec3 e = smallest == 0   ? Vec3{1, 0, 0}
                 : smallest == 1 ? Vec3{0, 1, 0}
                                 : Vec3{0, 0, 1};
  const Vec3 u = normalized(e - dot(e, lhat) * lhat);
  const Vec3 d = delta * u;
  out.theta = std::atan2(dot(d, cross(lhat, u)), dot(d, u));
  return out;
}

/// Energy envelope and orbit classification for diagonal models with zero
/// internal momentum. The threshold l^2 / (2 I2(t)) separates loops around
/// the long axis (energies above its maximum) from loops around the short
/// axis (energies below its minimum).
struct RegimeInfo {
  Regime regime = Regime::Indeterminate;
  double energy_min = 0.0;
  double energy_max = 0.0;
  double threshold_min = 0.0;
  double threshold_max = 0.0;
};

inline RegimeInfo regime_classify(const DeformationModel& m,
                                  const MomentumTrajectory& traj,
                                  std::size_t index_a, std::size_t index_b) {
  if (index_b <= index_a || index_b >= traj.size())
    throw ConfigError("invalid segment indices");
  const double l = traj.momentum_norm;
  RegimeInfo info;
  info.energy_min = std::numeric_limits<double>::infinity();
  info.energy_max = -info.energy_min;
  info.threshold_min = std::numeric_limits<double>::infinity();
  info.threshold_max = -info.threshold_min;
  for (std::size_t k = index_a; k <= index_b; ++k) {
    const DeformationState s = m.eval(traj.times[k]);
    const Mat3& im = s.inertia.matrix();
    const double scale = im.max_abs();
    const double off = std::max({std::abs(im(0, 1)), std::abs(im(0, 2)),
                                 std::abs(im(1, 2))});
    if (off > 1e-12 * scale)
      throw NotDiagonalOrderedError("model is not diagonal on the segment");
    if (norm(s.internal_momentum) > 1e-12 * std::max(1.0, l))
      throw NotDiagonalOrderedError(
          "model carries internal momentum on the segment");
    const double i1 = im(0, 0), i2 = im(1, 1), i3 = im(2, 2);
    // Coincident moments are fine: the classification below uses strict
    // energy inequalities against the I2 threshold, which stay sound when
    // neighbouring moments merge.
    if (!(i1 <= i2 && i2 <= i3))
      throw NotDiagonalOrderedError("moments are not ordered");
    const double e = energy_at(s, traj.points[k]);
    const double threshold = l * l / (2.0 * i2);
    info.energy_min = std::min(info.energy_min, e);
    info.energy_max = std::max(info.energy_max, e);
    info.threshold_min = std::min(info.threshold_min, threshold);
    info.threshold_max = std::max(info.threshold_max, threshold);
  }
  if (info.energy_min > info.threshold_max)
    info.regime = Regime::Axis1Orbit;
  else if (info.energy_max < info.threshold_min)
    info.regime = Regime::Axis3Orbit;
  else
    info.regime = Regime::Indeterminate;
  return info;
}

/// Unwrapped bracket for the phase over a closed segment:
///   -Lambda + 2 E_min dt / l <= theta <= -Lambda + 2 E_max dt / l.
/// informative records whether the bracket is narrower than a full turn.
struct PhaseBounds {
  double low = 0.0;
  double high = 0.0;
  bool informative = false;
};

inline PhaseBounds phase_bounds(const DeformationModel& m,
                                const MomentumTrajectory& traj,
                                const ClosedSegment& seg, double solid_angle) {
  const RegimeInfo info = regime_classify(m, traj, seg.index_a, seg.index_b);
  if (info.regime == Regime::Indeterminate)
    throw RegimeNotApplicableError(
        "phase bounds need a definite orbit regime");
  const double l = traj.momentum_norm;
  const double dt = traj.times[seg.index_b] - traj.times[seg.index_a];
  PhaseBounds b;
  b.low = -solid_angle + 2.0 * info.energy_min * dt / l;
  b.high = -solid_angle + 2.0 * info.energy_max * dt / l;
  b.informative = (b.high - b.low) < kTwoPi;
  return b;
}

/// Lower bound on the time a loop around the given principal axis (1 or 3)
/// needs to return: 2 pi |Pi_a x e_axis| I_min / l^2, where I_min is the
/// smallest principal moment over the span. Requires a diagonal ordered
/// model.
inline double return_time_lower_bound(const DeformationModel& m,
                                      const Vec3& pi_a, double t0, double t1,
                                      int axis) {
  if (axis != 1 && axis != 3)
    throw RegimeNotApplicableError("axis must be 1 or 3");
  const double l = norm(pi_a);
  if (!(l > 0.0)) throw ConfigError("momentum must be nonzero");
  double smallest = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000; ++k) {
    const double t = t0 + (t1 - t0) * (k / 1000.0);
    const DeformationState s = m.eval(t);
    const Mat3& im = s.inertia.matrix();
    const double off = std::max({std::abs(im(0, 1)), std::abs(im(0, 2)),
                                 std::abs(im(1, 2))});
    if (off > 1e-12 * im.max_abs())
      throw NotDiagonalOrderedError("model is not diagonal on the span");
    if (!(im(0, 0) <= im(1, 1) && im(1, 1) <= im(2, 2)))
      throw NotDiagonalOrderedError("moments are out of order");
    smallest = std::min(smallest, im(0, 0));
  }
  const Vec3 e = axis == 1 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  return kTwoPi * norm(cross(pi_a, e)) * smallest / (l * l);
}

/// Closure endpoint refined below node resolution: the time near node
/// index_b at which the dense (cubic Hermite) trajectory is closest to the
/// segment start.
struct RefinedClosure {
  double t = 0.0;
  Vec3 pi;
  double gap = 0.0;  // |pi(t) - pi_a| relative to |L|
};

inline RefinedClosure refine_closure(const DeformationModel& m,
                                     const MomentumTrajectory& mt,
                                     const ClosedSegment& seg) {
  const std::size_t a = seg.index_a, b = seg.index_b;
  if (b <= a || b >= mt.size() || a + 1 >= b)
    throw ConfigError("invalid segment indices");
  const double l = mt.momentum_norm;
  const Vec3& pa = mt.points[a];

  struct Cubic {
    double t0 = 0.0, dt = 0.0;
    Vec3 p0, p1, f0, f1;
    Vec3 eval(double s) const {
      const double u = (s - t0) / dt;
      const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
      const double h10 = u * (1.0 - u) * (1.0 - u);
      const double h01 = u * u * (3.0 - 2.0 * u);
      const double h11 = u * u * (u - 1.0);
      return h00 * p0 + (h10 * dt) * f0 + h01 * p1 + (h11 * dt) * f1;
    }
  };
  const std::size_t lo = b - 1;
  const std::size_t hi = std::min(b + 1, mt.size() - 1);
  std::vector<Cubic> pieces;
  for (std::size_t k = lo; k < hi; ++k) {
    Cubic c;
    c.t0 = mt.times[k];
    c.dt = mt.times[k + 1] - mt.times[k];
    c.p0 = mt.points[k];
    c.p1 = mt.points[k + 1];
    c.f0 = momentum_rhs(m, c.t0, c.p0);
    c.f1 = momentum_rhs(m, c.t0 + c.dt, c.p1);
    pieces.push_back(c);
  }
  const auto dense = [&](double s) {
    for (const Cubic& c : pieces)
      if (s <= c.t0 + c.dt) return c.eval(s);
    return pieces.back().eval(s);
  };
  const auto dist2 = [&](double s) { return norm2(dense(s) - pa); };

  // Golden-section search; the walk in detect_closures guarantees the
  // minimum lies between the neighbors of node b.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double left = mt.times[lo];
  double right = mt.times[hi];
  double x1 = right - gr * (right - left);
  double x2 = left + gr * (right - left);
  double d1 = dist2(x1);
  double d2 = dist2(x2);
  for (int it = 0; it < 90; ++it) {
    if (d1 < d2) {
      right = x2;
      x2 = x1;
      d2 = d1;
      x1 = right - gr * (right - left);
      d1 = dist2(x1);
    } else {
      left = x1;
      x1 = x2;
      d1 = d2;
      x2 = left + gr * (right - left);
      d2 = dist2(x2);
    }
  }
  RefinedClosure out;
  out.t = 0.5 * (left + right);
  if (dist2(out.t) > norm2(mt.points[b] - pa)) out.t = mt.times[b];
  const Vec3 p = dense(out.t);
  out.pi = p * (l / norm(p));
  out.gap = norm(out.pi - pa) / l;
  return out;
}

/// Everything the phase formula produces for one closed simple segment.
struct PhaseReport {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  double t_a = 0.0;
  double t_b = 0.0;
  double t_closure = 0.0;    // refined closure time near t_b
  double period = 0.0;       // t_closure - t_a
  double closure_gap = 0.0;  // refined miss distance relative to |L|
  double closure_residual = 0.0;
  double theta_dynamic = 0.0;
  double solid_angle = 0.0;       // Lambda of the reference disc
  double theta_geometric = 0.0;   // -Lambda
  double theta_unwrapped = 0.0;   // -Lambda + theta_dynamic, not wrapped
  double theta_formula = 0.0;     // wrapped to (-pi, pi]
  double theta_direct = 0.0;      // from the reconstructed rotations
  double axis_residual = 0.0;
  double discrepancy = 0.0;       // circle distance formula vs direct
  bool used_complementary_disc = false;
  Regime regime = Regime::Indeterminate;
  bool bounds_valid = false;
  PhaseBounds bounds;
  double energy_min = 0.0;
  double energy_max = 0.0;
};

struct PhaseOptions {
  double closure_tol = 1e-6;
  double axis_tol = 1e-4;
};

/// Evaluates the phase formula theta = wrap(-Lambda + theta_dynamic) over a
/// closed simple segment and cross-checks it against the angle extracted
/// from the reconstructed rotations. The closure endpoint is first refined
/// below node resolution, and momentum, attitude, and dynamic phase are
/// advanced to the refined time, so node quantization does not leak into the
/// reported angles. When formula and direct extraction disagree by more than
/// 1e-2 the complementary disc (solid angle shifted by a full sphere) is
/// tried and the better match kept, with the retry recorded.
inline PhaseReport montgomery_phase(const DeformationModel& m,
                                    const MomentumTrajectory& mt,
                                    const RotationTrajectory& rt,
                                    const ClosedSegment& seg,
                                    const PhaseOptions& opts = {}) {
  if (!seg.simple)
    throw NotSimpleError("segment is not a simple closed curve");
  if (seg.closure_residual > opts.closure_tol)
    throw NotClosedError("segment endpoints exceed the closure tolerance");
  const std::size_t a = seg.index_a, b = seg.index_b;
  if (b <= a || b >= mt.size()) throw ConfigError("invalid segment indices");
  const double l = mt.momentum_norm;

  const RefinedClosure rc = refine_closure(m, mt, seg);
  const double dt_ref = rc.t - mt.times[b];
  const detail::CoupledStep stp = detail::coupled_step(
      m, mt.times[b], mt.points[b], rt.rotations[b], dt_ref, l);

  PhaseReport rep;
  rep.index_a = a;
  rep.index_b = b;
  rep.t_a = mt.times[a];
  rep.t_b = mt.times[b];
  rep.t_closure = rc.t;
  rep.period = rc.t - mt.times[a];
  rep.closure_gap = norm(stp.pi - mt.points[a]) / l;
  rep.closure_residual = seg.closure_residual;
  rep.theta_dynamic = rt.theta_dyn[b] - rt.theta_dyn[a] + stp.dtheta;

  const std::size_t last = dt_ref >= 0.0 ? b : b - 1;
  std::vector<Vec3> polygon(mt.points.begin() + a,
                            mt.points.begin() + last + 1);
  polygon.push_back(stp.pi);
  rep.solid_angle =
      signed_solid_angle(std::span<const Vec3>(polygon.data(), polygon.size()));

  const DirectPhase direct =
      direct_phase(rt.rotations[a], stp.R, rt.spatial_momentum, opts.axis_tol);
  rep.theta_direct = direct.theta;
  rep.axis_residual = direct.axis_residual;

  auto assemble = [&](double lambda) {
    rep.solid_angle = lambda;
    rep.theta_geometric = -lambda;
    rep.theta_unwrapped = -lambda + rep.theta_dynamic;
    rep.theta_formula = wrap_angle(rep.theta_unwrapped);
    rep.discrepancy = circle_distance(rep.theta_formula, rep.theta_direct);
  };
  assemble(rep.solid_angle);
  if (rep.discrepancy > 1e-2) {
    const double lambda = rep.solid_angle;
    const double complement =
        lambda > 0.0 ? lambda - 2.0 * kTwoPi : lambda + 2.0 * kTwoPi;
    const double kept = lambda;
    const double kept_disc = rep.discrepancy;
    assemble(complement);
    if (rep.discrepancy < kept_disc) {
      rep.used_complementary_disc = true;
    } else {
      assemble(kept);
    }
  }

  try {
    const RegimeInfo info = regime_classify(m, mt, a, b);
    rep.regime = info.regime;
    rep.energy_min = info.energy_min;
    rep.energy_max = info.energy_max;
    if (info.regime != Regime::Indeterminate) {
      // Same bracket as phase_bounds, but over the refined period so node
      // quantization cannot push a zero-width bracket off the phase. The
      // node-range energy envelope only widens the bracket, so it stays valid.
      rep.bounds.low =
          -rep.solid_angle + 2.0 * info.energy_min * rep.period / l;
      rep.bounds.high =
          -rep.solid_angle + 2.0 * info.energy_max * rep.period / l;
      rep.bounds.informative = (rep.bounds.high - rep.bounds.low) < kTwoPi;
      rep.bounds_valid = true;
    }
  } catch (const NotDiagonalOrderedError&) {
    rep.regime = Regime::Indeterminate;
  }
  return rep;
}

}  // namespace spinphase
