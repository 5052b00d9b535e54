#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "spinphase/momentum.hpp"

namespace spinphase {

/// Recursive adaptive Simpson quadrature with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-10) {
  struct Rec {
    const std::function<double(double)>& f;
    double operator()(double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth >= 48 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return (*this)(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
             (*this)(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
  };
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec{f}(a, b, fa, fm, fb, whole, tol, 0);
}

/// Reference solution with a closed-form or high-resolution evaluator.
/// semi_analytic() marks solutions whose base flow had to be computed
/// numerically (tri-axial bodies) rather than in closed form.
class AnalyticSolution {
 public:
  AnalyticSolution(std::function<Vec3(double)> fn, double momentum_norm,
                   bool semi_analytic, double precession_rate = 0.0)
      : fn_(std::move(fn)),
        momentum_norm_(momentum_norm),
        semi_analytic_(semi_analytic),
        precession_rate_(precession_rate) {}

  Vec3 at(double t) const { return fn_(t); }
  double momentum_norm() const { return momentum_norm_; }
  bool semi_analytic() const { return semi_analytic_; }

  /// Body-frame precession rate for symmetric-top solutions, 0 otherwise.
  double precession_rate() const { return precession_rate_; }

  /// Period of the momentum curve for symmetric-top solutions.
  double period() const {
    if (precession_rate_ == 0.0)
      throw DegenerateRateError("solution has no precession period");
    return kTwoPi / std::abs(precession_rate_);
  }

 private:
  std::function<Vec3(double)> fn_;
  double momentum_norm_;
  bool semi_analytic_;
  double precession_rate_;
};

/// Rigid body with I = diag(I1, I23, I23): Pi1 is constant and (Pi2, Pi3)
/// rotates rigidly at rate Omega = Pi1 (1/I23 - 1/I1).
inline AnalyticSolution symmetric_top_solution(double I1, double I23,
                                               const Vec3& pi0) {
  if (!(I1 > 0.0) || !(I23 > 0.0))
    throw NonPositiveMomentError("moments must be positive");
  const double omega = pi0.x * (1.0 / I23 - 1.0 / I1);
  auto fn = [pi0, omega](double t) {
    const double c = std::cos(omega * t), s = std::sin(omega * t);
    return Vec3{pi0.x, c * pi0.y - s * pi0.z, s * pi0.y + c * pi0.z};
  };
  return AnalyticSolution(fn, norm(pi0), false, omega);
}

namespace detail {

/// Dense-output rigid base flow Pi_RB(tau) for an arbitrary SPD inertia.
/// Diagonal bodies with two equal moments use the closed form; otherwise the
/// flow is integrated once at high resolution and evaluated by cubic Hermite
/// interpolation between nodes (semi-analytic). Negative tau uses the
/// reversibility Pi(-tau; pi0) = -Pi(tau; -pi0).
class RigidBaseFlow {
 public:
  RigidBaseFlow(const InertiaTensor& I0, const Vec3& pi0, double tau_min,
                double tau_max, double resolution)
      : model_(make_rigid(I0)), pi0_(pi0) {
    const Mat3& m = I0.matrix();
    const double off = std::sqrt(m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) +
                                 m(1, 2) * m(1, 2));
    const double scale = m.max_abs();
    if (off < 1e-13 * scale &&
        std::abs(m(1, 1) - m(2, 2)) < 1e-12 * scale) {
      symmetric_ = true;
      rate_ = pi0.x * (1.0 / m(1, 1) - 1.0 / m(0, 0));
      return;
    }
    // Tri-axial: integrate forward and (reflected) backward once.
    const double span_fwd = std::max(tau_max, 0.0);
    const double span_bwd = std::max(-tau_min, 0.0);
    if (span_fwd > 0.0)
      fwd_ = std::make_shared<MomentumTrajectory>(
          integrate_momentum(model_, pi0, 0.0, span_fwd, resolution));
    if (span_bwd > 0.0)
      bwd_ = std::make_shared<MomentumTrajectory>(
          integrate_momentum(model_, -pi0, 0.0, span_bwd, resolution));
  }

  bool symmetric() const { return symmetric_; }

  Vec3 at(double tau) const {
    if (symmetric_) {
      const double c = std::cos(rate_ * tau), s = std::sin(rate_ * tau);
      return Vec3{pi0_.x, c * pi0_.y - s * pi0_.z, s * pi0_.y + c * pi0_.z};
    }
    if (tau >= 0.0) return dense_eval(*fwd_, tau);
    return -dense_eval(*bwd_, -tau);
  }

 private:
  Vec3 dense_eval(const MomentumTrajectory& traj, double tau) const {
    const double h = traj.step;
    const std::size_t last = traj.size() - 1;
    if (tau >= traj.times[last]) return traj.points[last];
    std::size_t k = static_cast<std::size_t>(tau / h);
    if (k >= last) k = last - 1;
    const double dt = traj.times[k + 1] - traj.times[k];
    const double s = (tau - traj.times[k]) / dt;
    const Vec3 f0 = momentum_rhs(model_, traj.times[k], traj.points[k]);
    const Vec3 f1 = momentum_rhs(model_, traj.times[k + 1], traj.points[k + 1]);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * traj.points[k] +
           (s3 - 2 * s2 + s) * dt * f0 +
           (-2 * s3 + 3 * s2) * traj.points[k + 1] + (s3 - s2) * dt * f1;
  }

  DeformationModel model_;
  Vec3 pi0_;
  bool symmetric_ = false;
  double rate_ = 0.0;
  std::shared_ptr<MomentumTrajectory> fwd_;
  std::shared_ptr<MomentumTrajectory> bwd_;
};

}  // namespace detail

/// Exact solution of the conformally scaled model I(t) = a(t)^2 I0:
/// Pi(t) = Pi_RB(tau(t)) with tau(t) = int_0^t a(s)^-2 ds. tau may be
/// supplied in closed form; otherwise it is computed by adaptive Simpson to
/// 1e-10. Time arguments are relative to the model start t0.
inline AnalyticSolution vibrational_exact(
    const InertiaTensor& I0, std::function<double(double)> a, const Vec3& pi0,
    double t0, double t1, std::function<double(double)> tau = nullptr,
    double base_resolution = 1e-5) {
  if (!a) throw ConfigError("vibrational solution requires a scale function");
  if (!tau) {
    tau = [a, t0](double t) {
      return adaptive_simpson(
          [&a](double s) { return 1.0 / (a(s) * a(s)); }, t0, t, 1e-10);
    };
  }
  // Bracket the tau range over the span to size the base flow.
  double tau_min = 0.0, tau_max = 0.0;
  for (int k = 0; k <= 256; ++k) {
    const double tv = tau(t0 + (t1 - t0) * (k / 256.0));
    tau_min = std::min(tau_min, tv);
    tau_max = std::max(tau_max, tv);
  }
  auto base = std::make_shared<detail::RigidBaseFlow>(
      I0, pi0, tau_min - 1e-3, tau_max + 1e-3, base_resolution);
  auto fn = [base, tau](double t) { return base->at(tau(t)); };
  return AnalyticSolution(fn, norm(pi0), !base->symmetric());
}

/// Exact solution of the axisymmetric stretching model
/// I(t) = diag(I1(t), I23, I23): Pi(t) = Pi_RB(tau(t)) with
///   tau(t) = int_0^t (1/I1(s) - 1/I23) ds / (1/I1(0) - 1/I23)
/// and base flow frozen at t = 0. Throws DegenerateRateError when
/// I1(0) = I23, which makes the reparameterization rate vanish.
inline AnalyticSolution axisym_stretch_exact(
    std::function<double(double)> I1, double I23, const Vec3& pi0, double t0,
    double t1, std::function<double(double)> tau = nullptr) {
  if (!I1) throw ConfigError("axisym solution requires a moment function");
  if (!(I23 > 0.0))
    throw NonPositiveMomentError("transverse moment must be positive");
  const double denom = 1.0 / I1(t0) - 1.0 / I23;
  if (std::abs(denom) < 1e-14)
    throw DegenerateRateError(
        "I1(0) equals the transverse moment; the base flow is stationary");
  if (!tau) {
    tau = [I1, I23, denom, t0](double t) {
      return adaptive_simpson(
                 [&I1, I23](double s) { return 1.0 / I1(s) - 1.0 / I23; },
                 t0, t, 1e-10) /
             denom;
    };
  }
  const double rate0 = pi0.x * (1.0 / I23 - 1.0 / I1(t0));
  auto fn = [pi0, rate0, tau](double t) {
    const double ang = rate0 * tau(t);
    const double c = std::cos(ang), s = std::sin(ang);
    return Vec3{pi0.x, c * pi0.y - s * pi0.z, s * pi0.y + c * pi0.z};
  };
  return AnalyticSolution(fn, norm(pi0), false);
}

/// Rigid-body phase over one period: wrap(-Lambda + 2 E T / l).
inline double rigid_phase_formula(double energy, double period,
                                  double momentum_norm, double solid_angle) {
  return wrap_angle(-solid_angle + 2.0 * energy * period / momentum_norm);
}

}  // namespace spinphase
