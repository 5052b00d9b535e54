#pragma once

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "spinphase/momentum.hpp"

namespace spinphase {

/// Attitude history paired with a MomentumTrajectory on the same nodes.
/// theta_dyn accumulates the dynamic-phase integral
///   (1/|L|) int (I^-1 Pi - I^-1 L0) . Pi dt
/// node by node, so differences of theta_dyn are the integral between nodes.
struct RotationTrajectory {
  std::vector<double> times;
  std::vector<Rotation> rotations;
  std::vector<double> theta_dyn;
  Vec3 spatial_momentum;              // L = R0 Pi0, conserved
  double spatial_residual_max = 0.0;  // max |R Pi - L| over nodes
  double orthogonality_max = 0.0;     // max |R^T R - Id| entry over nodes

  std::size_t size() const { return times.size(); }
};

/// Right-hand side of the coupled system: R' = R hat(omega), Pi' = Pi x omega.
inline std::pair<Mat3, Vec3> coupled_rhs(const DeformationModel& m, double t,
                                         const Rotation& R, const Vec3& pi) {
  const DeformationState s = m.eval(t);
  const Vec3 w = omega_from_pi(s, pi);
  return {R.m * hat(w), cross(pi, w)};
}

namespace detail {

/// Inverse of the differential of exp on so(3), exact on |sigma| < 2 pi:
/// dexpinv_{-sigma}(w) = w + sigma x w / 2 + c2 sigma x (sigma x w) with
/// c2 = (1 - (theta/2) cot(theta/2)) / theta^2. The small-angle branch uses
/// the series 1/12 + theta^2/720 + theta^4/30240.
inline Vec3 dexpinv(const Vec3& sigma, const Vec3& w) {
  const double theta2 = norm2(sigma);
  double c2;
  if (theta2 < 1e-4) {
    c2 = 1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0;
  } else {
    const double theta = std::sqrt(theta2);
    const double half = 0.5 * theta;
    c2 = (1.0 - half * std::cos(half) / std::sin(half)) / theta2;
  }
  const Vec3 c1 = cross(sigma, w);
  return w + 0.5 * c1 + c2 * cross(sigma, c1);
}

/// One coupled step of length dt from (t, pi_prev, R_prev): classical RK4 on
/// Pi, the matching Munthe-Kaas update on R, and the per-step Simpson
/// increment of the dynamic phase. dt may be negative or zero.
struct CoupledStep {
  Vec3 pi;                  // end momentum, back on the sphere
  Rotation R;               // end attitude, projected to the group
  double dtheta = 0.0;      // dynamic phase increment over the step
  double norm_drift = 0.0;  // pre-projection |Pi| deviation
};

inline CoupledStep coupled_step(const DeformationModel& m, double t,
                                const Vec3& pi_prev, const Rotation& R_prev,
                                double dt, double l) {
  const Rk4Stages st = rk4_momentum_stages(m, t, pi_prev, dt);

  // Munthe-Kaas stages in the Lie algebra (classical RK4 tableau).
  const Vec3 u1 = st.w1;
  const Vec3 u2 = dexpinv((0.5 * dt) * u1, st.w2);
  const Vec3 u3 = dexpinv((0.5 * dt) * u2, st.w3);
  const Vec3 u4 = dexpinv(dt * u3, st.w4);
  const Vec3 sigma = (dt / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4);

  CoupledStep out;
  out.R = project_to_rotation((R_prev * exp_rotation(sigma)).m);
  const double raw_norm = norm(st.pi_raw);
  out.norm_drift = std::abs(raw_norm - l);
  out.pi = st.pi_raw * (l / raw_norm);

  // Dynamic phase by per-step Simpson. The midpoint value comes from the
  // cubic Hermite dense output of the momentum step, which keeps the
  // quadrature at the integrator's order without extra ODE state.
  const Vec3 w_end = omega_from_pi(st.s1, out.pi);
  const Vec3 f_end = cross(out.pi, w_end);
  Vec3 pi_mid = 0.5 * (pi_prev + out.pi) + (dt / 8.0) * (st.k1 - f_end);
  pi_mid = pi_mid * (l / norm(pi_mid));
  const Vec3 w_mid = omega_from_pi(st.s_mid, pi_mid);
  const double g0 = dot(st.w1, pi_prev);
  const double gm = dot(w_mid, pi_mid);
  const double g1 = dot(w_end, out.pi);
  out.dtheta = dt / 6.0 * (g0 + 4.0 * gm + g1) / l;
  return out;
}

}  // namespace detail

/// Integrates momentum and attitude together: classical RK4 on Pi and a
/// fourth-order Runge-Kutta-Munthe-Kaas update on R, sharing the same stage
/// angular velocities. Each step multiplies by exp of a corrected algebra
/// element and re-projects to the rotation group; Pi is re-projected to its
/// sphere. Throws NumericalFailureError when the spatial momentum residual
/// exceeds tol_spatial * |L| * (1 + span).
inline std::pair<MomentumTrajectory, RotationTrajectory>
integrate_reconstruction(const DeformationModel& m, const Vec3& pi0,
                         const Rotation& R0, double t0, double t1, double h,
                         double tol_spatial = 1e-6) {
  const double l = norm(pi0);
  if (!(l > 0.0)) throw ConfigError("initial momentum must be nonzero");
  const detail::StepPlan plan = detail::plan_steps(t0, t1, h);
  const long n_total = plan.n_full + (plan.last_dt > 0.0 ? 1 : 0);
  const double span = t1 - t0;
  const double residual_limit = tol_spatial * l * (1.0 + span);

  MomentumTrajectory mt;
  mt.momentum_norm = l;
  mt.step = h;
  mt.last_step_partial = plan.last_dt > 0.0;
  mt.times.reserve(n_total + 1);
  mt.points.reserve(n_total + 1);

  RotationTrajectory rt;
  rt.spatial_momentum = R0 * pi0;
  rt.times.reserve(n_total + 1);
  rt.rotations.reserve(n_total + 1);
  rt.theta_dyn.reserve(n_total + 1);

  Vec3 pi = pi0;
  Rotation R = R0;
  double theta = 0.0;

  auto record = [&](double t) {
    mt.times.push_back(t);
    mt.points.push_back(pi);
    rt.times.push_back(t);
    rt.rotations.push_back(R);
    rt.theta_dyn.push_back(theta);
    const double res = norm(R * pi - rt.spatial_momentum);
    rt.spatial_residual_max = std::max(rt.spatial_residual_max, res);
    rt.orthogonality_max =
        std::max(rt.orthogonality_max, R.orthogonality_residual());
    if (res > residual_limit) {
      std::ostringstream msg;
      msg << "spatial momentum residual " << res << " exceeds "
          << residual_limit << " at t = " << t
          << "; the step size is too large for this model";
      throw NumericalFailureError(msg.str());
    }
  };
  record(t0);

  for (long k = 0; k < n_total; ++k) {
    const bool partial = k == plan.n_full;
    const double dt = partial ? plan.last_dt : h;
    const double t = partial ? t0 + plan.n_full * h : t0 + k * h;
    const detail::CoupledStep stp = detail::coupled_step(m, t, pi, R, dt, l);
    mt.norm_drift_max = std::max(mt.norm_drift_max, stp.norm_drift);
    pi = stp.pi;
    R = stp.R;
    theta += stp.dtheta;
    record(partial ? t1 : t0 + (k + 1) * h);
  }
  return {std::move(mt), std::move(rt)};
}

/// Dynamic phase between two node times, as a difference of the accumulated
/// per-node quadrature. Throws NotANodeError for off-grid times.
inline double dynamic_phase(const MomentumTrajectory& mt,
                            const RotationTrajectory& rt, double t_a,
                            double t_b) {
  const std::size_t a = mt.node_index(t_a);
  const std::size_t b = mt.node_index(t_b);
  return rt.theta_dyn[b] - rt.theta_dyn[a];
}

/// Max centered finite difference of the spatial momentum R (I omega + L0)
/// along the computed solution. The quantity is conserved by the exact flow,
/// so the residual measures how well the reconstruction satisfies the
/// second-order equations of motion.
inline double second_order_residual(const MomentumTrajectory& mt,
                                    const RotationTrajectory& rt,
                                    const DeformationModel& m) {
  const std::size_t n = mt.size();
  if (n < 3) throw ConfigError("need at least three nodes for differencing");
  std::vector<Vec3> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const DeformationState s = m.eval(mt.times[k]);
    const Vec3 w = omega_from_pi(s, mt.points[k]);
    v[k] = rt.rotations[k] * (s.inertia * w + s.internal_momentum);
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double dt = mt.times[k + 1] - mt.times[k - 1];
    worst = std::max(worst, norm((v[k + 1] - v[k - 1]) / dt));
  }
  return worst;
}

}  // namespace spinphase
