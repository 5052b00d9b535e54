#include <catch2/catch_amalgamated.hpp>

#include "spinphase/analytic.hpp"

using namespace spinphase;

TEST_CASE("adaptive simpson integrates smooth functions to tolerance") {
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, kPi) ==
        Catch::Approx(2.0).margin(1e-10));
  CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        Catch::Approx(std::exp(1.0) - 1.0).margin(1e-10));
  CHECK(adaptive_simpson([](double x) { return 1.0 / (1.0 + x * x); }, 0.0,
                         1.0) == Catch::Approx(kPi / 4.0).margin(1e-10));
  CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("the symmetric top solution precesses about axis 1") {
  const Vec3 pi0{0.5, std::sqrt(3.0) / 2.0, 0.0};
  const AnalyticSolution sol = symmetric_top_solution(1.0, 2.0, pi0);
  CHECK(sol.precession_rate() == Catch::Approx(-0.25));
  CHECK(sol.period() == Catch::Approx(8.0 * kPi));
  CHECK_FALSE(sol.semi_analytic());

  const Vec3 quarter = sol.at(kTwoPi);  // a quarter period
  CHECK(quarter.x == Catch::Approx(0.5));
  CHECK(quarter.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(quarter.z == Catch::Approx(-std::sqrt(3.0) / 2.0));
  CHECK(norm(sol.at(sol.period()) - pi0) < 1e-12);
}

TEST_CASE("a constant-rate solution has no period to report") {
  const AnalyticSolution sol([](double) { return Vec3{1, 0, 0}; }, 1.0,
                             false, 0.0);
  CHECK_THROWS_AS(sol.period(), DegenerateRateError);
}

TEST_CASE("the vibrational time change matches its closed form") {
  // For a(t) = exp(0.2 t) the rescaled time is (1 - exp(-0.4 t)) / 0.4; with
  // a symmetric base body the momentum rotates about axis 1 by base rate
  // times tau, so tau is observable from the rotation angle.
  const InertiaTensor I0 = InertiaTensor::diag(0.25, 1.0, 1.0);
  const Vec3 pi0{0.9, std::sqrt(0.19), 0.0};
  const AnalyticSolution sol = vibrational_exact(
      I0, [](double t) { return std::exp(0.2 * t); }, pi0, 0.0, 2.0);
  const double base_rate = 0.9 * (1.0 / 1.0 - 1.0 / 0.25);  // -2.7

  for (double t : {0.5, 1.0, 2.0}) {
    const Vec3 p = sol.at(t);
    CHECK(p.x == Catch::Approx(0.9).margin(1e-12));
    const double angle = std::atan2(p.z, p.y);
    const double tau = (1.0 - std::exp(-0.4 * t)) / 0.4;
    CHECK(std::remainder(angle - base_rate * tau, kTwoPi) ==
          Catch::Approx(0.0).margin(1e-7));
  }
}

TEST_CASE("the axisymmetric stretch solution matches its closed form") {
  // With I1 = 1 + t / 10 and I23 = 2 the rescaled time is
  // 20 log(1 + t / 10) - t, which is 20 log(1.1) - 1 at t = 1.
  const auto I1 = [](double t) { return 1.0 + 0.1 * t; };
  const Vec3 pi0{0.6, 0.8, 0.0};
  const AnalyticSolution sol = axisym_stretch_exact(I1, 2.0, pi0, 0.0, 2.0);
  const double rate0 = 0.6 * (1.0 / 2.0 - 1.0);  // -0.3

  const Vec3 p = sol.at(1.0);
  CHECK(p.x == Catch::Approx(0.6).margin(1e-12));
  const double tau = std::atan2(p.z, p.y) / rate0;
  CHECK(tau == Catch::Approx(20.0 * std::log(1.1) - 1.0).margin(1e-7));
}

TEST_CASE("a semi-analytic vibrational solution is marked as such") {
  // A tri-axial base body has no closed-form flow, so the solution falls
  // back to a fine reference integration in rescaled time.
  const InertiaTensor I0 = InertiaTensor::diag(1.0, 2.0, 3.0);
  const Vec3 pi0{0.6, 0.0, 0.8};
  const AnalyticSolution sol = vibrational_exact(
      I0, [](double t) { return 1.0 + 0.1 * t; }, pi0, 0.0, 1.0);
  CHECK(sol.semi_analytic());
  CHECK(norm(sol.at(0.0) - pi0) < 1e-9);
  CHECK(std::abs(norm(sol.at(0.7)) - 1.0) < 1e-9);
}

TEST_CASE("the rescaled solutions degrade gracefully on bad input") {
  CHECK_THROWS_AS(symmetric_top_solution(0.0, 2.0, Vec3{1, 0, 0}),
                  NonPositiveMomentError);
  CHECK_THROWS_AS(
      axisym_stretch_exact([](double) { return 2.0; }, 2.0, Vec3{1, 0, 0},
                           0.0, 1.0),
      DegenerateRateError);
}

TEST_CASE("the frozen-shape phase formula reduces to known numbers") {
  // wrap(-(-pi) + 2 * 0.3125 * 8 pi / 1) = wrap(6 pi) = 0.
  CHECK(rigid_phase_formula(0.3125, 8.0 * kPi, 1.0, -kPi) ==
        Catch::Approx(0.0).margin(1e-12));
  CHECK(rigid_phase_formula(0.25, kPi, 1.0, 0.0) ==
        Catch::Approx(wrap_angle(kPi / 2.0)).margin(1e-12));
}
