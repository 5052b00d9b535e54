#pragma once

#include <atomic>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinphase/geom3.hpp"

namespace spinphase {

/// Snapshot of the shape data the momentum dynamics needs at one time:
/// inertia tensor, its inverse, the time derivative of the inverse, and the
/// internal (deformation) angular momentum in body coordinates.
struct DeformationState {
  double t = 0.0;
  InertiaTensor inertia;
  Mat3 inertia_inv;
  Mat3 d_inertia_inv_dt;
  Vec3 internal_momentum;

  DeformationState(double t_, InertiaTensor inertia_, Mat3 inertia_inv_,
                   Mat3 d_inertia_inv_dt_, Vec3 internal_momentum_)
      : t(t_),
        inertia(std::move(inertia_)),
        inertia_inv(inertia_inv_),
        d_inertia_inv_dt(d_inertia_inv_dt_),
        internal_momentum(internal_momentum_) {}
};

/// Prescribed shape history. eval() is a pure function of t, so models can be
/// shared freely across threads. Tabulated models clamp out-of-range queries
/// to the nearest endpoint and count how often that happened.
class DeformationModel {
 public:
  using EvalFn = std::function<DeformationState(double)>;

  DeformationModel(double t_start, double t_end, EvalFn eval, std::string kind,
                   std::shared_ptr<std::atomic<long>> clamp_counter = nullptr)
      : t_start_(t_start),
        t_end_(t_end),
        eval_(std::move(eval)),
        kind_(std::move(kind)),
        clamp_counter_(std::move(clamp_counter)) {}

  DeformationState eval(double t) const { return eval_(t); }

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  const std::string& kind() const { return kind_; }

  /// Number of clamped out-of-range evaluations (tabulated models only).
  long clamp_warnings() const {
    return clamp_counter_ ? clamp_counter_->load() : 0;
  }

 private:
  double t_start_;
  double t_end_;
  EvalFn eval_;
  std::string kind_;
  std::shared_ptr<std::atomic<long>> clamp_counter_;
};

/// One row of a tabulated shape history.
struct DeformationSample {
  double t = 0.0;
  Mat3 inertia;
  Vec3 internal_momentum;
};

/// Collection of point masses with prescribed body-frame kinematics.
/// kinematics(t, r, v) fills one position and one velocity per particle.
struct ParticleSystem {
  std::vector<double> masses;
  std::function<void(double, std::vector<Vec3>&, std::vector<Vec3>&)>
      kinematics;

  std::size_t size() const { return masses.size(); }

  void sample(double t, std::vector<Vec3>& r, std::vector<Vec3>& v) const {
    r.assign(masses.size(), Vec3{});
    v.assign(masses.size(), Vec3{});
    kinematics(t, r, v);
  }
};

namespace detail {

inline void check_centered_points(const std::vector<double>& masses,
                                  const std::vector<Vec3>& r) {
  double mass = 0.0;
  Vec3 com{};
  double r2_weighted = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    mass += masses[i];
    com += masses[i] * r[i];
    r2_weighted += masses[i] * norm2(r[i]);
  }
  const double rms = std::sqrt(r2_weighted / std::max(mass, 1e-300));
  if (norm(com) > 1e-9 * std::max(rms, 1e-300) * mass)
    throw NotCenteredError(
        "particle center of mass is not at the origin within tolerance");
}

}  // namespace detail

/// Inertia tensor sum_i m_i (|r_i|^2 Id - r_i r_i^T) of a centered point set.
/// Throws CollinearError when the points lie on a line through the origin,
/// and NotCenteredError when the center-of-mass constraint fails.
inline InertiaTensor inertia_from_points(const std::vector<double>& masses,
                                         const std::vector<Vec3>& r) {
  detail::check_centered_points(masses, r);
  Mat3 m = Mat3::zero();
  for (std::size_t i = 0; i < masses.size(); ++i)
    m = m + masses[i] * (norm2(r[i]) * Mat3::identity() - outer(r[i], r[i]));
  const auto ev = sym_eigenvalues(m);
  const double scale = std::max(1.0, ev[2]);
  if (ev[0] < tol::spd * scale)
    throw CollinearError("particles are collinear; inertia is singular");
  return InertiaTensor(m);
}

/// Internal angular momentum sum_i m_i r_i x v_i of a centered point set.
inline Vec3 internal_momentum_from_points(const std::vector<double>& masses,
                                          const std::vector<Vec3>& r,
                                          const std::vector<Vec3>& v) {
  detail::check_centered_points(masses, r);
  Vec3 L{};
  for (std::size_t i = 0; i < masses.size(); ++i)
    L += masses[i] * cross(r[i], v[i]);
  return L;
}

/// Same at a sampled time of a particle system.
inline InertiaTensor inertia_from_particles(const ParticleSystem& p,
                                            double t) {
  std::vector<Vec3> r, v;
  p.sample(t, r, v);
  return inertia_from_points(p.masses, r);
}

inline Vec3 internal_momentum_from_particles(const ParticleSystem& p,
                                             double t) {
  std::vector<Vec3> r, v;
  p.sample(t, r, v);
  return internal_momentum_from_points(p.masses, r, v);
}

/// Constant shape, no internal momentum.
inline DeformationModel make_rigid(const InertiaTensor& I0,
                                   const Vec3& internal_momentum = Vec3{}) {
  const Mat3 inv = spd_inverse(I0.matrix());
  const double inf = std::numeric_limits<double>::infinity();
  return DeformationModel(
      -inf, inf,
      [I0, inv, internal_momentum](double t) {
        return DeformationState(t, I0, inv, Mat3::zero(), internal_momentum);
      },
      "rigid");
}

/// Conformally scaled shape I(t) = a(t)^2 I0 with zero internal momentum.
/// a must stay positive on [t_start, t_end]; a_dot may be null, in which
/// case a centered finite difference is used.
inline DeformationModel make_vibrational(const InertiaTensor& I0,
                                         std::function<double(double)> a,
                                         std::function<double(double)> a_dot,
                                         double t_start, double t_end) {
  if (!a) throw ConfigError("vibrational model requires a scale function");
  for (int k = 0; k <= 1000; ++k) {
    const double t = t_start + (t_end - t_start) * (k / 1000.0);
    if (!(a(t) > 0.0))
      throw NonPositiveScaleError("scale factor is not positive on the span");
  }
  if (!a_dot) {
    a_dot = [a](double t) {
      const double dt = 1e-6 * std::max(1.0, std::abs(t));
      return (a(t + dt) - a(t - dt)) / (2.0 * dt);
    };
  }
  const Mat3 inv0 = spd_inverse(I0.matrix());
  return DeformationModel(
      t_start, t_end,
      [I0, inv0, a, a_dot](double t) {
        const double at = a(t);
        if (!(at > 0.0))
          throw NonPositiveScaleError("scale factor is not positive");
        const double a2 = at * at;
        const InertiaTensor I(I0.matrix() * a2);
        const Mat3 inv = inv0 * (1.0 / a2);
        const Mat3 dinv = inv0 * (-2.0 * a_dot(t) / (a2 * at));
        return DeformationState(t, I, inv, dinv, Vec3{});
      },
      "vibrational");
}

/// Diagonal shape history I(t) = diag(I1(t), I2(t), I3(t)) with zero internal
/// momentum. Derivative functions may be null (centered finite differences).
inline DeformationModel make_diagonal_timevarying(
    std::function<double(double)> I1, std::function<double(double)> dI1,
    std::function<double(double)> I2, std::function<double(double)> dI2,
    std::function<double(double)> I3, std::function<double(double)> dI3,
    double t_start, double t_end) {
  if (!I1 || !I2 || !I3)
    throw ConfigError("diagonal model requires three moment functions");
  auto fd = [](const std::function<double(double)>& f) {
    return [f](double t) {
      const double dt = 1e-6 * std::max(1.0, std::abs(t));
      return (f(t + dt) - f(t - dt)) / (2.0 * dt);
    };
  };
  if (!dI1) dI1 = fd(I1);
  if (!dI2) dI2 = fd(I2);
  if (!dI3) dI3 = fd(I3);
  for (int k = 0; k <= 1000; ++k) {
    const double t = t_start + (t_end - t_start) * (k / 1000.0);
    if (!(I1(t) > 0.0) || !(I2(t) > 0.0) || !(I3(t) > 0.0))
      throw NonPositiveMomentError("principal moment is not positive on span");
  }
  return DeformationModel(
      t_start, t_end,
      [I1, dI1, I2, dI2, I3, dI3](double t) {
        const double a = I1(t), b = I2(t), c = I3(t);
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
          throw NonPositiveMomentError("principal moment is not positive");
        const InertiaTensor I = InertiaTensor::diag(a, b, c);
        const Mat3 inv = Mat3::diag(1.0 / a, 1.0 / b, 1.0 / c);
        const Mat3 dinv = Mat3::diag(-dI1(t) / (a * a), -dI2(t) / (b * b),
                                     -dI3(t) / (c * c));
        return DeformationState(t, I, inv, dinv, Vec3{});
      },
      "diagonal");
}

namespace detail {

/// Cubic Hermite coefficients per tabulated channel, with centered
/// finite-difference node derivatives (one-sided at the ends).
struct HermiteTable {
  std::vector<double> t;
  // y[k][c]: channel c at node k; 9 channels = 6 inertia entries + 3 momentum.
  std::vector<std::array<double, 9>> y;
  std::vector<std::array<double, 9>> dy;

  void build_derivatives() {
    const std::size_t n = t.size();
    dy.assign(n, {});
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t lo = (k == 0) ? 0 : k - 1;
      const std::size_t hi = (k + 1 == n) ? k : k + 1;
      const double dt = t[hi] - t[lo];
      for (int c = 0; c < 9; ++c) dy[k][c] = (y[hi][c] - y[lo][c]) / dt;
    }
  }

  /// Interval index such that t[i] <= x <= t[i+1], after clamping.
  std::size_t interval(double x) const {
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (t[mid] <= x)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

  void eval(double x, std::array<double, 9>& val,
            std::array<double, 9>& deriv) const {
    const std::size_t k = interval(x);
    const double h = t[k + 1] - t[k];
    const double s = (x - t[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    const double g00 = (6 * s2 - 6 * s) / h;
    const double g10 = 3 * s2 - 4 * s + 1;
    const double g01 = (-6 * s2 + 6 * s) / h;
    const double g11 = 3 * s2 - 2 * s;
    for (int c = 0; c < 9; ++c) {
      val[c] = h00 * y[k][c] + h10 * h * dy[k][c] + h01 * y[k + 1][c] +
               h11 * h * dy[k + 1][c];
      deriv[c] = g00 * y[k][c] + g10 * dy[k][c] + g01 * y[k + 1][c] +
                 g11 * dy[k + 1][c];
    }
  }
};

inline Mat3 sym_from_channels(const std::array<double, 9>& v) {
  Mat3 m;
  m.a = {v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]};
  return m;
}

}  // namespace detail

/// Piecewise cubic Hermite interpolation of tabulated samples. The inertia
/// entries and the internal momentum are interpolated channel by channel;
/// the inverse and its derivative follow from the interpolant. Queries
/// outside the sample range are clamped to the nearest endpoint state and
/// counted as warnings.
inline DeformationModel make_tabulated(
    const std::vector<DeformationSample>& samples) {
  if (samples.size() < 2)
    throw ConfigError("tabulated model needs at least two samples");
  auto table = std::make_shared<detail::HermiteTable>();
  table->t.reserve(samples.size());
  table->y.reserve(samples.size());
  for (const auto& s : samples) {
    if (!table->t.empty() && !(s.t > table->t.back()))
      throw UnsortedSamplesError("sample times must be strictly increasing");
    const Mat3 m = symmetric_part(s.inertia);
    table->t.push_back(s.t);
    table->y.push_back({m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2),
                        s.internal_momentum.x, s.internal_momentum.y,
                        s.internal_momentum.z});
  }
  table->build_derivatives();

  // Pre-scan the interpolant for positive definiteness on a dense grid.
  const double t0 = table->t.front(), t1 = table->t.back();
  const int grid = static_cast<int>(10 * (samples.size() - 1));
  for (int k = 0; k <= grid; ++k) {
    const double t = t0 + (t1 - t0) * (static_cast<double>(k) / grid);
    std::array<double, 9> val{}, deriv{};
    table->eval(t, val, deriv);
    const auto ev = sym_eigenvalues(detail::sym_from_channels(val));
    if (!(ev[0] > 0.0))
      throw NotPositiveDefiniteError(
          "interpolated inertia loses positive definiteness");
  }

  auto clamps = std::make_shared<std::atomic<long>>(0);
  auto fn = [table, clamps, t0, t1](double t) {
    double tc = t;
    if (tc < t0) {
      tc = t0;
      clamps->fetch_add(1);
    } else if (tc > t1) {
      tc = t1;
      clamps->fetch_add(1);
    }
    std::array<double, 9> val{}, deriv{};
    table->eval(tc, val, deriv);
    const Mat3 I = detail::sym_from_channels(val);
    const Mat3 Idot = detail::sym_from_channels(deriv);
    const InertiaTensor inertia(I);
    const Mat3 inv = spd_inverse(I);
    const Mat3 dinv = (inv * Idot * inv) * -1.0;
    const Vec3 L0{val[6], val[7], val[8]};
    return DeformationState(t, inertia, inv, dinv, L0);
  };
  return DeformationModel(t0, t1, fn, "tabulated", clamps);
}

/// Samples a particle system uniformly on [t0, t1] and tabulates the result.
inline DeformationModel model_from_particles(const ParticleSystem& p,
                                             double t0, double t1,
                                             int n_samples) {
  if (n_samples < 2) throw ConfigError("need at least two particle samples");
  std::vector<DeformationSample> samples;
  samples.reserve(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const double t = t0 + (t1 - t0) * (static_cast<double>(k) / (n_samples - 1));
    DeformationSample s;
    s.t = t;
    s.inertia = inertia_from_particles(p, t).matrix();
    s.internal_momentum = internal_momentum_from_particles(p, t);
    samples.push_back(s);
  }
  return make_tabulated(samples);
}

}  // namespace spinphase
