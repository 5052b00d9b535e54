#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "spinphase/geom3.hpp"

using namespace spinphase;

namespace {

std::mt19937 rng_at(unsigned seed) { return std::mt19937(seed); }

Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

Rotation random_rotation(std::mt19937& rng) {
  return exp_rotation(random_vec(rng, 2.0));
}

}  // namespace

TEST_CASE("hat and vee invert each other and hat encodes the cross product") {
  auto rng = rng_at(101);
  for (int k = 0; k < 50; ++k) {
    const Vec3 v = random_vec(rng, 5.0);
    const Vec3 w = random_vec(rng, 5.0);
    const Vec3 back = vee(hat(v));
    CHECK(norm(back - v) < 1e-15 * std::max(1.0, norm(v)));
    CHECK(norm(hat(v) * w - cross(v, w)) < 1e-14 * norm(v) * norm(w) + 1e-30);
  }
  CHECK_THROWS_AS(vee(Mat3::diag(1.0, 0.0, 0.0)), NotSkewError);
}

TEST_CASE("exp_rotation matches the quaternion rotation of sample vectors") {
  auto rng = rng_at(102);
  for (int k = 0; k < 60; ++k) {
    Vec3 axis_angle = random_vec(rng, 3.0);
    if (k % 5 == 0) axis_angle = axis_angle * 1e-10;  // small-angle branch
    const double theta = norm(axis_angle);
    const Vec3 probe = random_vec(rng, 2.0);

    // Quaternion oracle: q = (cos(t/2), sin(t/2) n), v' = q v q^-1.
    Vec3 expected = probe;
    if (theta > 0.0) {
      const Vec3 n = axis_angle / theta;
      const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
      const Vec3 qv = n * s;
      const Vec3 t = 2.0 * cross(qv, probe);
      expected = probe + c * t + cross(qv, t);
    }
    const Vec3 got = exp_rotation(axis_angle) * probe;
    CHECK(norm(got - expected) < 1e-13 * std::max(1.0, norm(probe)));
  }
}

TEST_CASE("exp_rotation of a quarter turn about z maps x to y") {
  const Rotation R = exp_rotation({0.0, 0.0, kPi / 2.0});
  CHECK(norm(R * Vec3{1, 0, 0} - Vec3{0, 1, 0}) < 1e-15);
  CHECK(norm(R * Vec3{0, 0, 1} - Vec3{0, 0, 1}) < 1e-15);
}

TEST_CASE("log_rotation inverts exp_rotation away from the cut locus") {
  auto rng = rng_at(103);
  for (int k = 0; k < 60; ++k) {
    Vec3 v = random_vec(rng, 1.0);
    const double target =
        (k % 3 == 0) ? 1e-9 : (k % 3 == 1 ? 1.5 : kPi - 1e-4);
    v = normalized(v) * target;
    const Vec3 back = log_rotation(exp_rotation(v));
    CHECK(norm(back - v) < 1e-7 * std::max(1.0, target));
  }
}

TEST_CASE("project_to_rotation returns the polar factor") {
  auto rng = rng_at(104);
  for (int k = 0; k < 40; ++k) {
    const Rotation R0 = random_rotation(rng);
    Mat3 noisy = R0.m;
    const Vec3 n1 = random_vec(rng, 1e-3);
    const Vec3 n2 = random_vec(rng, 1e-3);
    noisy = noisy + outer(n1, n2);

    const Rotation U = Rotation::from_matrix(project_to_rotation(noisy).m);
    CHECK(U.orthogonality_residual() < 1e-12);

    // Polar decomposition oracle: U^T M must come out symmetric positive
    // definite; no other orthogonal factor has that property.
    const Mat3 S = U.m.transposed() * noisy;
    CHECK((S - S.transposed()).max_abs() < 1e-10);
    const auto ev = sym_eigenvalues(S);
    CHECK(ev[0] > 0.9);
  }
}

TEST_CASE("project_to_rotation is exact on rotations") {
  auto rng = rng_at(105);
  for (int k = 0; k < 20; ++k) {
    const Rotation R0 = random_rotation(rng);
    CHECK((project_to_rotation(R0.m).m - R0.m).max_abs() < 1e-14);
  }
}

TEST_CASE("sym_eigenvalues returns roots of the characteristic polynomial") {
  auto rng = rng_at(106);
  for (int k = 0; k < 40; ++k) {
    const Vec3 a = random_vec(rng, 2.0);
    const Vec3 b = random_vec(rng, 2.0);
    const Mat3 S = symmetric_part(outer(a, a) + outer(b, b) +
                                  Mat3::diag(0.5, 1.0, 1.5));
    const auto ev = sym_eigenvalues(S);
    CHECK(ev[0] <= ev[1]);
    CHECK(ev[1] <= ev[2]);
    const double scale = std::max(1.0, S.max_abs());
    for (double lambda : ev) {
      const Mat3 shifted = S - Mat3::diag(lambda, lambda, lambda);
      CHECK(std::abs(shifted.det()) < 1e-10 * scale * scale * scale);
    }
    CHECK(std::abs(ev[0] + ev[1] + ev[2] - S.trace()) < 1e-12 * scale);
    CHECK(std::abs(ev[0] * ev[1] * ev[2] - S.det()) <
          1e-11 * scale * scale * scale);
  }
}

TEST_CASE("cholesky_solve agrees with the adjugate inverse") {
  auto rng = rng_at(107);
  for (int k = 0; k < 40; ++k) {
    const Vec3 a = random_vec(rng, 1.5);
    const Mat3 A = symmetric_part(outer(a, a)) + Mat3::diag(1.0, 2.0, 3.0);
    const Vec3 b = random_vec(rng, 4.0);
    const Vec3 x = cholesky_solve(A, b);
    CHECK(norm(A * x - b) < 1e-12 * std::max(1.0, norm(b)));
    CHECK(norm(x - A.inverse() * b) < 1e-11 * std::max(1.0, norm(x)));
  }
  CHECK_THROWS_AS(cholesky_solve(Mat3::diag(1.0, -1.0, 1.0), Vec3{1, 1, 1}),
                  NotPositiveDefiniteError);
}

TEST_CASE("spd_inverse produces a two-sided inverse") {
  auto rng = rng_at(108);
  for (int k = 0; k < 20; ++k) {
    const Vec3 a = random_vec(rng, 1.0);
    const Mat3 A = symmetric_part(outer(a, a)) + Mat3::diag(0.7, 1.3, 2.9);
    const Mat3 inv = spd_inverse(A);
    CHECK((A * inv - Mat3::identity()).max_abs() < 1e-12);
    CHECK((inv * A - Mat3::identity()).max_abs() < 1e-12);
  }
}

TEST_CASE("wrap_angle lands in (-pi, pi] and is 2 pi periodic") {
  auto rng = rng_at(109);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi - 1e-15);
    CHECK(w <= kPi + 1e-15);
    CHECK(std::abs(wrap_angle(a + kTwoPi) - w) < 1e-12);
    CHECK(std::abs(std::remainder(a - w, kTwoPi)) < 1e-9);
  }
  CHECK(wrap_angle(kPi) == Catch::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi) == Catch::Approx(kPi));
}

TEST_CASE("circle_distance is a symmetric metric on the circle") {
  CHECK(circle_distance(0.1, kTwoPi + 0.1) < 1e-12);
  CHECK(circle_distance(-kPi + 0.01, kPi - 0.01) == Catch::Approx(0.02));
  CHECK(circle_distance(1.0, 2.0) == Catch::Approx(1.0));
  CHECK(circle_distance(2.0, 1.0) == Catch::Approx(1.0));
}

TEST_CASE("rotation construction rejects invalid matrices") {
  CHECK_THROWS_AS(Rotation::from_matrix(Mat3::diag(1.0, 1.0, -1.0)),
                  DegenerateError);
  CHECK_THROWS_AS(Rotation::from_matrix(Mat3::diag(2.0, 1.0, 1.0)),
                  DegenerateError);
  CHECK_THROWS_AS(normalized(Vec3{0, 0, 0}), DegenerateError);
}

TEST_CASE("inertia tensor validates positive definiteness") {
  CHECK_THROWS_AS(InertiaTensor(Mat3::diag(1.0, 0.0, 1.0)),
                  NotPositiveDefiniteError);
  CHECK_THROWS_AS(InertiaTensor(Mat3::diag(-1.0, 2.0, 3.0)),
                  NotPositiveDefiniteError);
  const InertiaTensor I = InertiaTensor::diag(1.0, 2.0, 3.0);
  const Vec3 v{0.3, -0.4, 0.5};
  CHECK(norm(I.matrix() * apply_inverse(I, v) - v) < 1e-14);
}
