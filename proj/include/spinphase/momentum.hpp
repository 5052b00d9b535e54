#pragma once

#include <cmath>
#include <vector>

#include "spinphase/deformation.hpp"
#include "spinphase/geom3.hpp"

namespace spinphase {

/// Body angular velocity omega = I(t)^-1 (Pi - L0(t)).
inline Vec3 omega_from_pi(const DeformationState& s, const Vec3& pi) {
  return apply_inverse(s.inertia, pi - s.internal_momentum);
}

inline Vec3 omega_from_pi(const DeformationModel& m, double t,
                          const Vec3& pi) {
  return omega_from_pi(m.eval(t), pi);
}

/// Right-hand side of the momentum equation, Pi' = Pi x omega.
inline Vec3 momentum_rhs(const DeformationModel& m, double t, const Vec3& pi) {
  return cross(pi, omega_from_pi(m, t, pi));
}

/// Shape-frozen kinetic energy of the momentum, E_t(Pi) = Pi . I^-1 Pi / 2.
inline double energy_at(const DeformationState& s, const Vec3& pi) {
  return 0.5 * dot(pi, apply_inverse(s.inertia, pi));
}

inline double energy_at(const DeformationModel& m, double t, const Vec3& pi) {
  return energy_at(m.eval(t), pi);
}

/// Time derivative of E_t along the dynamics:
/// dE/dt = (Pi x I^-1 Pi) . I^-1 L0 + Pi . d(I^-1)/dt Pi / 2.
inline double energy_rate(const DeformationModel& m, double t,
                          const Vec3& pi) {
  const DeformationState s = m.eval(t);
  const Vec3 iinv_pi = apply_inverse(s.inertia, pi);
  const Vec3 iinv_l0 = apply_inverse(s.inertia, s.internal_momentum);
  return dot(cross(pi, iinv_pi), iinv_l0) +
         0.5 * dot(pi, s.d_inertia_inv_dt * pi);
}

/// Kinetic energy split T = omega.I omega/2 + L0.omega + T_internal.
struct KineticDecomposition {
  double rotational = 0.0;
  double coupling = 0.0;
  double internal = 0.0;
  double total = 0.0;
};

inline KineticDecomposition kinetic_decomposition(const DeformationModel& m,
                                                  double t, const Vec3& pi,
                                                  double internal_kinetic) {
  const DeformationState s = m.eval(t);
  const Vec3 w = omega_from_pi(s, pi);
  KineticDecomposition k;
  k.rotational = 0.5 * dot(w, s.inertia * w);
  k.coupling = dot(s.internal_momentum, w);
  k.internal = internal_kinetic;
  k.total = k.rotational + k.coupling + k.internal;
  return k;
}

/// Fixed-step solution of the momentum equation on the sphere |Pi| = |Pi0|.
struct MomentumTrajectory {
  std::vector<double> times;
  std::vector<Vec3> points;
  double momentum_norm = 0.0;   // conserved |Pi|
  double step = 0.0;            // nominal step h
  double norm_drift_max = 0.0;  // max per-step |Pi| drift before projection
  bool last_step_partial = false;

  std::size_t size() const { return times.size(); }

  /// Node index of time t; throws NotANodeError when t is off-grid.
  std::size_t node_index(double t) const {
    const double t0 = times.front();
    const double tol_t = 1e-9 * std::max(1.0, std::abs(t));
    std::size_t k = 0;
    if (step > 0.0) {
      const double guess = (t - t0) / step;
      k = static_cast<std::size_t>(
          std::min(std::max(0.0, std::round(guess)),
                   static_cast<double>(times.size() - 1)));
    }
    // The last node may sit off the uniform grid (partial final step).
    for (std::size_t cand :
         {k, k > 0 ? k - 1 : k, std::min(k + 1, times.size() - 1),
          times.size() - 1}) {
      if (std::abs(times[cand] - t) <= tol_t) return cand;
    }
    throw NotANodeError("time does not coincide with a trajectory node");
  }
};

namespace detail {

/// Model states and stage data of one classical RK4 step on Pi. The same
/// stage evaluations drive the rotation update and the phase quadrature, so
/// the momentum component is shared code, not a re-derivation.
struct Rk4Stages {
  DeformationState s0, s_mid, s1;
  Vec3 w1, w2, w3, w4;  // stage body angular velocities
  Vec3 k1, k2, k3, k4;  // stage slopes Pi x omega
  Vec3 pi_raw;          // end state before projection to the sphere
};

inline Rk4Stages rk4_momentum_stages(const DeformationModel& m, double t,
                                     const Vec3& pi, double h) {
  Rk4Stages st{m.eval(t), m.eval(t + 0.5 * h), m.eval(t + h),
               {}, {}, {}, {}, {}, {}, {}, {}, {}};
  st.w1 = omega_from_pi(st.s0, pi);
  st.k1 = cross(pi, st.w1);
  const Vec3 p2 = pi + (0.5 * h) * st.k1;
  st.w2 = omega_from_pi(st.s_mid, p2);
  st.k2 = cross(p2, st.w2);
  const Vec3 p3 = pi + (0.5 * h) * st.k2;
  st.w3 = omega_from_pi(st.s_mid, p3);
  st.k3 = cross(p3, st.w3);
  const Vec3 p4 = pi + h * st.k3;
  st.w4 = omega_from_pi(st.s1, p4);
  st.k4 = cross(p4, st.w4);
  st.pi_raw = pi + (h / 6.0) * (st.k1 + 2.0 * st.k2 + 2.0 * st.k3 + st.k4);
  return st;
}

/// Step count decomposition for span/h. The final partial step, when the
/// step does not divide the span within 1e-9 relative, is taken with the
/// leftover width and recorded on the trajectory.
struct StepPlan {
  long n_full = 0;
  double last_dt = 0.0;  // 0 when h divides the span
};

inline StepPlan plan_steps(double t0, double t1, double h) {
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  if (!(t1 > t0)) throw ConfigError("time span must be increasing");
  const double span = t1 - t0;
  const double ratio = span / h;
  const double rounded = std::round(ratio);
  StepPlan plan;
  if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio) &&
      rounded >= 1.0) {
    plan.n_full = static_cast<long>(rounded);
    plan.last_dt = 0.0;
  } else {
    plan.n_full = static_cast<long>(std::floor(ratio));
    plan.last_dt = span - plan.n_full * h;
  }
  return plan;
}

}  // namespace detail

/// Integrates Pi' = Pi x I(t)^-1 (Pi - L0(t)) with classical RK4 and
/// projects each step back to the momentum sphere. The projection distance
/// is recorded as norm_drift_max, a cheap consistency diagnostic.
inline MomentumTrajectory integrate_momentum(const DeformationModel& m,
                                             const Vec3& pi0, double t0,
                                             double t1, double h) {
  const double l = norm(pi0);
  if (!(l > 0.0)) throw ConfigError("initial momentum must be nonzero");
  const detail::StepPlan plan = detail::plan_steps(t0, t1, h);
  const long n_total = plan.n_full + (plan.last_dt > 0.0 ? 1 : 0);

  MomentumTrajectory traj;
  traj.momentum_norm = l;
  traj.step = h;
  traj.last_step_partial = plan.last_dt > 0.0;
  traj.times.reserve(n_total + 1);
  traj.points.reserve(n_total + 1);
  traj.times.push_back(t0);
  traj.points.push_back(pi0);

  Vec3 pi = pi0;
  for (long k = 0; k < n_total; ++k) {
    const bool partial = k == plan.n_full;
    const double dt = partial ? plan.last_dt : h;
    const double t = partial ? t0 + plan.n_full * h : t0 + k * h;
    const auto st = detail::rk4_momentum_stages(m, t, pi, dt);
    const double raw_norm = norm(st.pi_raw);
    traj.norm_drift_max =
        std::max(traj.norm_drift_max, std::abs(raw_norm - l));
    pi = st.pi_raw * (l / raw_norm);
    traj.times.push_back(partial ? t1 : t0 + (k + 1) * h);
    traj.points.push_back(pi);
  }
  return traj;
}

/// Chordal length of the trajectory polyline between two node indices.
inline double arc_length(const MomentumTrajectory& traj, std::size_t a,
                         std::size_t b) {
  double len = 0.0;
  for (std::size_t k = a; k + 1 <= b; ++k)
    len += norm(traj.points[k + 1] - traj.points[k]);
  return len;
}

inline double arc_length(const MomentumTrajectory& traj) {
  return arc_length(traj, 0, traj.size() - 1);
}

/// Upper bound l * integral of (l + |L0(t)|) / a(t) dt, where a(t) is the
/// smallest eigenvalue of I(t), by composite Simpson on n_samples nodes.
inline double arc_length_bound(const DeformationModel& m, double l, double t0,
                               double t1, int n_samples = 257) {
  if (n_samples < 3) n_samples = 3;
  if (n_samples % 2 == 0) ++n_samples;  // Simpson needs an even panel count
  const double h = (t1 - t0) / (n_samples - 1);
  auto integrand = [&](double t) {
    const DeformationState s = m.eval(t);
    const double a = sym_eigenvalues(s.inertia.matrix())[0];
    return (l + norm(s.internal_momentum)) / a;
  };
  double sum = integrand(t0) + integrand(t1);
  for (int k = 1; k < n_samples - 1; ++k)
    sum += integrand(t0 + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return l * sum * h / 3.0;
}

}  // namespace spinphase
