#pragma once

#include <chrono>
#include <random>
#include <sstream>

#include "spinphase/scenario.hpp"

namespace spinphase {

/// Outcome of one acceptance check. detail carries the measured quantities
/// (or the failed conditions) in a single human-readable line.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double elapsed_seconds = 0.0;
};

struct VerifyOptions {
  std::string suite = "all";  // "all" or one check name
  /// Fault injection for the self-test of the suite: negates the solid angle
  /// before it enters the phase formula, which a correct build must catch.
  bool flip_solid_angle_sign = false;
};

/// Reference models shared by the acceptance checks. Time-dependent models
/// are built over [0, t_end]; the span argument is ignored by rigid bodies.
namespace fixtures {

inline DeformationModel tri_axial(double) {
  return make_rigid(InertiaTensor(Mat3::diag(1.0, 2.0, 3.0)));
}
inline Vec3 tri_axial_pi0() { return {0.6, 0.0, 0.8}; }

inline DeformationModel symmetric_top(double) {
  return make_rigid(InertiaTensor(Mat3::diag(1.0, 2.0, 2.0)));
}
inline Vec3 symmetric_top_pi0() { return {0.5, std::sqrt(3.0) / 2.0, 0.0}; }

inline DeformationModel vibrational(double t_end) {
  return make_vibrational(
      InertiaTensor(Mat3::diag(0.25, 1.0, 1.0)),
      [](double t) { return std::exp(0.2 * t); },
      [](double t) { return 0.2 * std::exp(0.2 * t); }, 0.0, t_end);
}
inline Vec3 vibrational_pi0() { return {0.9, std::sqrt(0.19), 0.0}; }

inline DeformationModel axisym(double t_end) {
  const auto c = [](double v) {
    return [v](double) { return v; };
  };
  return make_diagonal_timevarying([](double t) { return 1.0 + 0.1 * t; },
                                   c(0.1), c(0.5), c(0.0), c(0.5), c(0.0),
                                   0.0, t_end);
}
inline Vec3 axisym_pi0() { return {0.6, 0.8, 0.0}; }

inline DeformationModel antenna(double t_end, double rate = 0.05) {
  const auto c = [](double v) {
    return [v](double) { return v; };
  };
  return make_diagonal_timevarying(
      c(1.0), c(0.0), c(2.0), c(0.0),
      [rate](double t) { return 3.0 + rate * t; }, c(rate), 0.0, t_end);
}
inline Vec3 antenna_pi0() {
  return {0.015, 0.015, std::sqrt(1.0 - 2.0 * 0.015 * 0.015)};
}

inline DeformationModel transition(double t_end) {
  return antenna(t_end, 2.0);
}
inline Vec3 transition_pi0() {
  return {std::sqrt(0.28), 0.0, std::sqrt(0.72)};
}

}  // namespace fixtures

namespace detail {

struct Expect {
  bool ok = true;
  std::ostringstream out;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) out << "; ";
      out << "FAIL " << what;
      ok = false;
    }
  }
  void note(const std::string& what) {
    if (ok && out.tellp() > 0) out << "; ";
    if (ok) out << what;
  }
};

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

/// Integrates a fixture and returns the phase report of its first simple
/// closed segment; throws NotClosedError when no closure is found.
struct FixtureRun {
  MomentumTrajectory mt;
  RotationTrajectory rt;
  PhaseReport report;
};

inline FixtureRun run_first_phase(const DeformationModel& m, const Vec3& pi0,
                                  double t_end, double h, double closure_tol) {
  auto [mt, rt] = integrate_reconstruction(m, pi0, Rotation::identity(), 0.0,
                                           t_end, h);
  const std::vector<ClosedSegment> segs = detect_closures(mt, closure_tol);
  PhaseOptions opts;
  opts.closure_tol = closure_tol;
  // Deforming bodies spiral instead of closing exactly, and the residual
  // closure gap reappears as the axis mismatch of the relative rotation, so
  // the axis tolerance has to track the closure tolerance.
  opts.axis_tol = std::max(opts.axis_tol, closure_tol);
  for (const ClosedSegment& seg : segs) {
    if (!seg.simple) continue;
    PhaseReport rep = montgomery_phase(m, mt, rt, seg, opts);
    return FixtureRun{std::move(mt), std::move(rt), std::move(rep)};
  }
  throw NotClosedError("no simple closed segment found on the fixture");
}

/// Applies the optional fault injection and re-derives the dependent angles,
/// exactly as a sign error in the solid angle would propagate.
inline PhaseReport with_injection(PhaseReport rep, const VerifyOptions& opts) {
  if (!opts.flip_solid_angle_sign) return rep;
  rep.solid_angle = -rep.solid_angle;
  rep.theta_geometric = -rep.solid_angle;
  rep.theta_unwrapped = rep.theta_geometric + rep.theta_dynamic;
  rep.theta_formula = wrap_angle(rep.theta_unwrapped);
  rep.discrepancy = circle_distance(rep.theta_formula, rep.theta_direct);
  return rep;
}

inline CheckResult check_formula_vs_direct(const VerifyOptions& opts) {
  Expect e;
  const double h = 1e-3;
  struct Case {
    const char* name;
    DeformationModel model;
    Vec3 pi0;
    double span;
    double closure_tol;
  };
  std::vector<Case> cases;
  cases.push_back({"tri-axial", fixtures::tri_axial(30.0),
                   fixtures::tri_axial_pi0(), 30.0, 1e-3});
  cases.push_back({"symmetric-top", fixtures::symmetric_top(26.0),
                   fixtures::symmetric_top_pi0(), 26.0, 1e-3});
  cases.push_back({"vibrational", fixtures::vibrational(7.0),
                   fixtures::vibrational_pi0(), 7.0, 2e-3});
  cases.push_back({"axisym", fixtures::axisym(9.0), fixtures::axisym_pi0(),
                   9.0, 1e-3});
  cases.push_back({"antenna", fixtures::antenna(25.0),
                   fixtures::antenna_pi0(), 25.0, 4e-3});

  const auto start = std::chrono::steady_clock::now();
  std::ostringstream measured;
  for (Case& c : cases) {
    try {
      const FixtureRun run =
          run_first_phase(c.model, c.pi0, c.span, h, c.closure_tol);
      const PhaseReport rep = with_injection(run.report, opts);
      e.require(rep.discrepancy < 1e-4,
                std::string(c.name) + " formula vs direct off by " +
                    fmt(rep.discrepancy));
      if (std::string(c.name) == "antenna")
        e.require(rep.regime == Regime::Axis3Orbit,
                  "antenna regime is not an axis-3 orbit");
      measured << c.name << "=" << fmt(rep.discrepancy) << " ";
    } catch (const Error& err) {
      e.require(false, std::string(c.name) + ": " + err.what());
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  e.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s exceeds 5 s");
  e.note("max |formula - direct|: " + measured.str() + "(tol 1e-4) in " +
         fmt(elapsed) + " s");
  return {"formula_vs_direct", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_symmetric_top_phase(const VerifyOptions& opts) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  const double h = 1e-3;
  try {
    const DeformationModel m = fixtures::symmetric_top(26.0);
    const FixtureRun run =
        run_first_phase(m, fixtures::symmetric_top_pi0(), 26.0, h, 1e-3);
    const PhaseReport rep = with_injection(run.report, opts);

    e.require(std::abs(rep.period - 8.0 * kPi) <= 2.0 * h,
              "period off by " + fmt(rep.period - 8.0 * kPi));
    e.require(std::min(std::abs(rep.solid_angle - kPi),
                       std::abs(rep.solid_angle + kPi)) < 1e-4,
              "|solid angle| is not pi: " + fmt(rep.solid_angle));
    e.require(std::abs(rep.theta_dynamic - 5.0 * kPi) < 1e-5,
              "dynamic phase off by " + fmt(rep.theta_dynamic - 5.0 * kPi));
    e.require(std::abs(rep.theta_unwrapped - 6.0 * kPi) < 1e-5,
              "unwrapped phase off by " +
                  fmt(rep.theta_unwrapped - 6.0 * kPi));
    e.require(circle_distance(rep.theta_formula, 0.0) < 1e-5,
              "formula phase is not 0 mod 2pi: " + fmt(rep.theta_formula));
    e.require(circle_distance(rep.theta_direct, 0.0) < 1e-5,
              "direct phase is not 0 mod 2pi: " + fmt(rep.theta_direct));
    e.note("period-8pi=" + fmt(rep.period - 8.0 * kPi) +
           " lambda=" + fmt(rep.solid_angle) +
           " theta_dyn-5pi=" + fmt(rep.theta_dynamic - 5.0 * kPi) +
           " theta=" + fmt(rep.theta_formula));
  } catch (const Error& err) {
    e.require(false, err.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"symmetric_top_phase", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_conservation(const VerifyOptions&) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  const double h = 1e-3, span = 100.0;
  struct Case {
    const char* name;
    DeformationModel model;
    Vec3 pi0;
  };
  std::vector<Case> cases;
  cases.push_back({"tri-axial", fixtures::tri_axial(span),
                   fixtures::tri_axial_pi0()});
  cases.push_back({"symmetric-top", fixtures::symmetric_top(span),
                   fixtures::symmetric_top_pi0()});
  cases.push_back({"vibrational", fixtures::vibrational(span),
                   fixtures::vibrational_pi0()});
  cases.push_back({"axisym", fixtures::axisym(span), fixtures::axisym_pi0()});
  cases.push_back({"antenna", fixtures::antenna(span),
                   fixtures::antenna_pi0()});
  cases.push_back({"antenna-slow", fixtures::antenna(span, 0.05e-3),
                   fixtures::antenna_pi0()});
  cases.push_back({"transition", fixtures::transition(span),
                   fixtures::transition_pi0()});

  double worst_res = 0.0, worst_drift = 0.0, worst_orth = 0.0,
         worst_second = 0.0;
  for (Case& c : cases) {
    try {
      const auto [mt, rt] = integrate_reconstruction(
          c.model, c.pi0, Rotation::identity(), 0.0, span, h);
      const double l = mt.momentum_norm;
      const double second = second_order_residual(mt, rt, c.model);
      worst_res = std::max(worst_res, rt.spatial_residual_max / l);
      worst_drift = std::max(worst_drift, mt.norm_drift_max / l);
      worst_orth = std::max(worst_orth, rt.orthogonality_max);
      worst_second = std::max(worst_second, second);
      e.require(rt.spatial_residual_max <= 1e-7 * l,
                std::string(c.name) + " spatial residual " +
                    fmt(rt.spatial_residual_max / l));
      e.require(mt.norm_drift_max < 1e-12 * l,
                std::string(c.name) + " momentum norm drift " +
                    fmt(mt.norm_drift_max / l));
      e.require(rt.orthogonality_max < 1e-10,
                std::string(c.name) + " orthogonality " +
                    fmt(rt.orthogonality_max));
      e.require(second < 1e-5, std::string(c.name) +
                                   " second-order residual " + fmt(second));
    } catch (const Error& err) {
      e.require(false, std::string(c.name) + ": " + err.what());
    }
  }
  e.note("worst: residual=" + fmt(worst_res) + " drift=" + fmt(worst_drift) +
         " orth=" + fmt(worst_orth) + " second-order=" + fmt(worst_second));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"conservation", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_closed_form_equivalence(const VerifyOptions&) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();

  const auto sup_error = [](const DeformationModel& m, const Vec3& pi0,
                            double span, double h,
                            const AnalyticSolution& exact) {
    const MomentumTrajectory mt = integrate_momentum(m, pi0, 0.0, span, h);
    double worst = 0.0;
    for (std::size_t k = 0; k < mt.size(); ++k)
      worst = std::max(worst, norm(mt.points[k] - exact.at(mt.times[k])));
    return worst;
  };

  try {
    const InertiaTensor I0(Mat3::diag(0.05, 0.4, 0.4));
    const auto a = [](double t) { return std::exp(0.2 * t); };
    const auto a_dot = [](double t) { return 0.2 * std::exp(0.2 * t); };
    const auto tau = [](double t) {
      return (1.0 - std::exp(-0.4 * t)) / 0.4;
    };
    const Vec3 pi0 = {0.9, std::sqrt(0.19), 0.0};
    const double span = 3.0;
    const DeformationModel m = make_vibrational(I0, a, a_dot, 0.0, span);
    const AnalyticSolution exact =
        vibrational_exact(I0, a, pi0, 0.0, span, tau);
    const double e1 = sup_error(m, pi0, span, 1e-3, exact);
    const double e2 = sup_error(m, pi0, span, 5e-4, exact);
    e.require(e1 < 1e-6, "vibrational sup error " + fmt(e1));
    e.require(e1 / e2 >= 12.0 && e1 / e2 <= 20.0,
              "vibrational halving ratio " + fmt(e1 / e2));
    e.note("vibrational err=" + fmt(e1) + " ratio=" + fmt(e1 / e2));
  } catch (const Error& err) {
    e.require(false, std::string("vibrational: ") + err.what());
  }

  try {
    const auto I1 = [](double t) { return 1.0 + 0.1 * t; };
    const auto dI1 = [](double) { return 0.1; };
    const double I23 = 0.1;
    const auto tau = [](double t) {
      return (10.0 * t - 10.0 * std::log(1.0 + 0.1 * t)) / 9.0;
    };
    const Vec3 pi0 = {0.95, std::sqrt(0.0975), 0.0};
    const double span = 2.0;
    const auto c = [](double v) {
      return [v](double) { return v; };
    };
    const DeformationModel m = make_diagonal_timevarying(
        I1, dI1, c(I23), c(0.0), c(I23), c(0.0), 0.0, span);
    const AnalyticSolution exact =
        axisym_stretch_exact(I1, I23, pi0, 0.0, span, tau);
    const double e1 = sup_error(m, pi0, span, 1e-3, exact);
    const double e2 = sup_error(m, pi0, span, 5e-4, exact);
    e.require(e1 < 1e-6, "axisym sup error " + fmt(e1));
    e.require(e1 / e2 >= 12.0 && e1 / e2 <= 20.0,
              "axisym halving ratio " + fmt(e1 / e2));
    e.note("axisym err=" + fmt(e1) + " ratio=" + fmt(e1 / e2));
  } catch (const Error& err) {
    e.require(false, std::string("axisym: ") + err.what());
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"closed_form_equivalence", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_rigid_reduction(const VerifyOptions& opts) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  try {
    const DeformationModel m = fixtures::tri_axial(30.0);
    const Vec3 pi0 = fixtures::tri_axial_pi0();
    const FixtureRun run = run_first_phase(m, pi0, 30.0, 1e-3, 1e-3);
    const double e0 = energy_at(m, 0.0, pi0);
    double drift = 0.0;
    for (std::size_t k = 0; k < run.mt.size(); ++k)
      drift = std::max(drift, std::abs(energy_at(m, run.mt.times[k],
                                                 run.mt.points[k]) -
                                       e0));
    const PhaseReport rep = with_injection(run.report, opts);
    const double formula = rigid_phase_formula(
        e0, rep.period, run.mt.momentum_norm, rep.solid_angle);
    const double gap = circle_distance(rep.theta_formula, formula);
    e.require(drift < 1e-8, "energy drift " + fmt(drift));
    e.require(gap < 1e-5, "classic formula differs by " + fmt(gap));
    e.note("energy drift=" + fmt(drift) + " formula gap=" + fmt(gap));
  } catch (const Error& err) {
    e.require(false, err.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"rigid_reduction", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_monotonicity_and_bounds(const VerifyOptions& opts) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  const double h = 1e-3;

  try {
    const DeformationModel m = fixtures::tri_axial(30.0);
    const MomentumTrajectory mt =
        integrate_momentum(m, fixtures::tri_axial_pi0(), 0.0, 30.0, h);
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < mt.size(); ++k) {
      const double phi0 = std::atan2(mt.points[k].z, mt.points[k].y);
      const double phi1 = std::atan2(mt.points[k + 1].z, mt.points[k + 1].y);
      worst_rise = std::max(worst_rise, std::remainder(phi1 - phi0, kTwoPi));
    }
    e.require(worst_rise <= 1e-9,
              "azimuth about axis 1 rose by " + fmt(worst_rise));
    e.note("max azimuth increment=" + fmt(worst_rise));
  } catch (const Error& err) {
    e.require(false, std::string("monotonicity: ") + err.what());
  }

  try {
    const DeformationModel m = fixtures::antenna(25.0);
    const FixtureRun run =
        run_first_phase(m, fixtures::antenna_pi0(), 25.0, h, 4e-3);
    const PhaseReport rep = with_injection(run.report, opts);
    e.require(rep.bounds_valid, "phase bounds unavailable on the antenna");
    if (rep.bounds_valid) {
      e.require(rep.bounds.low - 1e-9 <= rep.theta_unwrapped &&
                    rep.theta_unwrapped <= rep.bounds.high + 1e-9,
                "phase " + fmt(rep.theta_unwrapped) + " outside [" +
                    fmt(rep.bounds.low) + ", " + fmt(rep.bounds.high) + "]");
      e.require(rep.bounds.high - rep.bounds.low < kTwoPi,
                "bracket wider than a full turn");
      e.note("bracket width=" + fmt(rep.bounds.high - rep.bounds.low));
    }
  } catch (const Error& err) {
    e.require(false, std::string("bounds: ") + err.what());
  }

  struct Case {
    const char* name;
    DeformationModel model;
    Vec3 pi0;
    double span;
  };
  std::vector<Case> cases;
  cases.push_back({"tri-axial", fixtures::tri_axial(10.0),
                   fixtures::tri_axial_pi0(), 10.0});
  cases.push_back({"symmetric-top", fixtures::symmetric_top(10.0),
                   fixtures::symmetric_top_pi0(), 10.0});
  cases.push_back({"vibrational", fixtures::vibrational(10.0),
                   fixtures::vibrational_pi0(), 10.0});
  cases.push_back({"axisym", fixtures::axisym(10.0), fixtures::axisym_pi0(),
                   10.0});
  cases.push_back({"antenna", fixtures::antenna(10.0),
                   fixtures::antenna_pi0(), 10.0});
  cases.push_back({"antenna-slow", fixtures::antenna(10.0, 0.05e-3),
                   fixtures::antenna_pi0(), 10.0});
  cases.push_back({"transition", fixtures::transition(10.0),
                   fixtures::transition_pi0(), 10.0});
  for (Case& c : cases) {
    try {
      const MomentumTrajectory mt =
          integrate_momentum(c.model, c.pi0, 0.0, c.span, h);
      const double chordal = arc_length(mt);
      const double bound =
          arc_length_bound(c.model, mt.momentum_norm, 0.0, c.span);
      e.require(chordal <= bound + 1e-12,
                std::string(c.name) + " arc length " + fmt(chordal) +
                    " exceeds bound " + fmt(bound));
    } catch (const Error& err) {
      e.require(false, std::string(c.name) + ": " + err.what());
    }
  }

  try {
    const DeformationModel m = fixtures::symmetric_top(26.0);
    const Vec3 pi0 = fixtures::symmetric_top_pi0();
    const double bound = return_time_lower_bound(m, pi0, 0.0, 26.0, 1);
    const FixtureRun run = run_first_phase(m, pi0, 26.0, h, 1e-3);
    e.require(std::abs(bound - kPi * std::sqrt(3.0)) < 1e-9,
              "return-time bound is not pi sqrt(3): " + fmt(bound));
    e.require(bound <= run.report.period,
              "return-time bound " + fmt(bound) + " exceeds the period " +
                  fmt(run.report.period));
    e.note("return bound=" + fmt(bound) + " period=" +
           fmt(run.report.period));
  } catch (const Error& err) {
    e.require(false, std::string("return time: ") + err.what());
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"monotonicity_and_bounds", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_regime_transition(const VerifyOptions&) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  try {
    const double span = 2.0, h = 1e-3;
    const DeformationModel m = fixtures::transition(span);
    const Vec3 pi0 = fixtures::transition_pi0();
    const MomentumTrajectory mt = integrate_momentum(m, pi0, 0.0, span, h);
    const double l = mt.momentum_norm;
    const double threshold = l * l / (2.0 * 2.0);  // I2 = 2, constant

    std::size_t crossing = mt.size();
    double rise = -std::numeric_limits<double>::infinity();
    double prev = energy_at(m, mt.times[0], mt.points[0]);
    e.require(prev > threshold, "initial energy is not above the threshold");
    for (std::size_t k = 1; k < mt.size(); ++k) {
      const double en = energy_at(m, mt.times[k], mt.points[k]);
      rise = std::max(rise, en - prev);
      if (crossing == mt.size() && en < threshold) crossing = k;
      prev = en;
    }
    e.require(crossing < mt.size(), "energy never crossed the threshold");
    e.require(rise <= 1e-12, "energy rose by " + fmt(rise) +
                                 " while the long moment grows");
    if (crossing < mt.size()) {
      const RegimeInfo early = regime_classify(m, mt, 0, crossing / 2);
      const std::size_t late = mt.size() - 1 - (mt.size() - crossing) / 2;
      const RegimeInfo tail = regime_classify(m, mt, late, mt.size() - 1);
      const RegimeInfo whole = regime_classify(m, mt, 0, mt.size() - 1);
      e.require(early.regime == Regime::Axis1Orbit,
                "early window is not an axis-1 orbit");
      e.require(tail.regime == Regime::Axis3Orbit,
                "late window is not an axis-3 orbit");
      e.require(whole.regime == Regime::Indeterminate,
                "full span should not classify as a single orbit");
      e.note("crossing at t=" + fmt(mt.times[crossing]) +
             " max energy rise=" + fmt(rise));
    }
  } catch (const Error& err) {
    e.require(false, err.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"regime_transition", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_slow_deformation_limit(const VerifyOptions& opts) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  try {
    const double h = 1e-3;
    const DeformationModel slow = fixtures::antenna(25.0, 0.05e-3);
    const Vec3 pi0 = fixtures::antenna_pi0();
    const FixtureRun srun = run_first_phase(slow, pi0, 25.0, h, 5e-5);
    const PhaseReport sp = with_injection(srun.report, opts);

    // Rigid comparison run with the inertia frozen at the segment start.
    const double t_i = sp.t_a;
    const DeformationModel frozen = make_rigid(
        InertiaTensor(Mat3::diag(1.0, 2.0, 3.0 + 0.05e-3 * t_i)));
    const Vec3 pi_i = srun.mt.points[sp.index_a];
    const FixtureRun rrun = run_first_phase(frozen, pi_i, 25.0, h, 5e-5);
    const PhaseReport rp = with_injection(rrun.report, opts);

    const double gap = circle_distance(sp.theta_formula, rp.theta_formula);
    e.require(gap < 0.05, "slow phase differs from the frozen rigid phase by " +
                              fmt(gap));
    e.note("|slow - frozen| = " + fmt(gap));
  } catch (const Error& err) {
    e.require(false, err.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"slow_deformation_limit", e.ok, e.out.str(), elapsed};
}

inline CheckResult check_determinism(const VerifyOptions&) {
  Expect e;
  const auto start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  fs::path root;
  try {
    std::random_device rd;
    root = fs::temp_directory_path() /
           ("spinphase-verify-" + std::to_string(rd()) + "-" +
            std::to_string(rd()));
    fs::create_directories(root);

    Json cfg;
    cfg["name"] = "determinism-probe";
    cfg["model"] = {{"kind", "diagonal"},
                    {"I1", 1.0},
                    {"I2", 2.0},
                    {"I3", Json{{"value0", 3.0}, {"slope", 0.05}}}};
    cfg["pi0"] = {0.015, 0.015, std::sqrt(1.0 - 2.0 * 0.015 * 0.015)};
    cfg["t0"] = 0.0;
    cfg["t1"] = 25.0;
    cfg["h"] = 1e-3;
    cfg["tolerances"] = {{"closure_tol", 4e-3}, {"axis_tol", 4e-3}};
    const ScenarioConfig scenario = parse_scenario(cfg, root, "determinism");

    run_phase(scenario, root / "a");
    run_phase(scenario, root / "b");
    const std::string traj_a = read_text(root / "a" / "trajectory.csv");
    const std::string traj_b = read_text(root / "b" / "trajectory.csv");
    const std::string rep_a = read_text(root / "a" / "report.json");
    const std::string rep_b = read_text(root / "b" / "report.json");
    e.require(traj_a == traj_b, "trajectory files differ between runs");
    e.require(rep_a == rep_b, "report files differ between runs");
    e.require(!traj_a.empty() && !rep_a.empty(), "outputs are empty");
    e.note("outputs identical across two runs (" +
           std::to_string(traj_a.size()) + " byte trajectory)");
  } catch (const Error& err) {
    e.require(false, err.what());
  }
  std::error_code ec;
  if (!root.empty()) fs::remove_all(root, ec);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {"determinism", e.ok, e.out.str(), elapsed};
}

}  // namespace detail

inline std::vector<std::string> verify_check_names() {
  return {"formula_vs_direct",     "symmetric_top_phase",
          "conservation",          "closed_form_equivalence",
          "rigid_reduction",       "monotonicity_and_bounds",
          "regime_transition",     "slow_deformation_limit",
          "determinism"};
}

inline std::vector<CheckResult> run_verify(const VerifyOptions& opts = {}) {
  using CheckFn = CheckResult (*)(const VerifyOptions&);
  const std::pair<const char*, CheckFn> registry[] = {
      {"formula_vs_direct", detail::check_formula_vs_direct},
      {"symmetric_top_phase", detail::check_symmetric_top_phase},
      {"conservation", detail::check_conservation},
      {"closed_form_equivalence", detail::check_closed_form_equivalence},
      {"rigid_reduction", detail::check_rigid_reduction},
      {"monotonicity_and_bounds", detail::check_monotonicity_and_bounds},
      {"regime_transition", detail::check_regime_transition},
      {"slow_deformation_limit", detail::check_slow_deformation_limit},
      {"determinism", detail::check_determinism},
  };
  std::vector<CheckResult> results;
  bool matched = false;
  for (const auto& [name, fn] : registry) {
    if (opts.suite != "all" && !opts.suite.empty() && opts.suite != name)
      continue;
    matched = true;
    results.push_back(fn(opts));
  }
  if (!matched)
    throw ConfigError("unknown check suite '" + opts.suite + "'");
  return results;
}

inline Json verify_json(const std::vector<CheckResult>& results) {
  Json j;
  bool all = true;
  Json checks = Json::array();
  for (const CheckResult& r : results) {
    all = all && r.passed;
    checks.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"detail", r.detail},
                      {"elapsed_seconds", r.elapsed_seconds}});
  }
  j["passed"] = all;
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace spinphase
