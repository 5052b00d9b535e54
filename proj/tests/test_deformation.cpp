#include <catch2/catch_amalgamated.hpp>

#include "spinphase/deformation.hpp"

using namespace spinphase;

namespace {

/// Centered four-point cloud with distinct principal moments. Summing
/// m (|r|^2 Id - r r^T) by hand gives the frozen tensor below.
struct CloudFixture {
  std::vector<double> masses{1.0, 1.0, 2.0, 2.0};
  std::vector<Vec3> points{{1.0, 0.0, 0.0},
                           {-1.0, 0.0, 0.0},
                           {0.0, 0.5, 0.0},
                           {0.0, -0.5, 0.0}};
};

}  // namespace

TEST_CASE("inertia of a unit cube of corner masses is 16 Id") {
  std::vector<double> masses(8, 1.0);
  std::vector<Vec3> pts;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) pts.push_back({double(sx), double(sy), double(sz)});
  const InertiaTensor I = inertia_from_points(masses, pts);
  CHECK((I.matrix() - Mat3::diag(16.0, 16.0, 16.0)).max_abs() < 1e-13);
}

TEST_CASE("inertia of the four-point cloud matches the hand computation") {
  const CloudFixture f;
  const InertiaTensor I = inertia_from_points(f.masses, f.points);
  // Axis sums: sum m y^2+z^2 = 1, sum m x^2+z^2 = 2, sum m x^2+y^2 = 3.
  CHECK((I.matrix() - Mat3::diag(1.0, 2.0, 3.0)).max_abs() < 1e-14);
}

TEST_CASE("inertia construction rejects degenerate and offset clouds") {
  std::vector<double> masses{1.0, 1.0};
  std::vector<Vec3> collinear{{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(inertia_from_points(masses, collinear), CollinearError);

  std::vector<Vec3> offset{{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
  CHECK_THROWS_AS(inertia_from_points(masses, offset), NotCenteredError);
}

TEST_CASE("internal momentum sums the mass-weighted angular momenta") {
  std::vector<double> masses{1.0, 1.0};
  std::vector<Vec3> pts{{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
  std::vector<Vec3> vel{{0.0, 1.0, 0.0}, {0.0, -1.0, 0.0}};
  const Vec3 L = internal_momentum_from_points(masses, pts, vel);
  CHECK(norm(L - Vec3{0.0, 0.0, 2.0}) < 1e-15);
}

TEST_CASE("rigid model is constant and carries its internal momentum") {
  const Vec3 L0{0.1, -0.2, 0.3};
  const DeformationModel m = make_rigid(InertiaTensor::diag(1, 2, 3), L0);
  for (double t : {-4.0, 0.0, 17.5}) {
    const DeformationState s = m.eval(t);
    CHECK((s.inertia.matrix() - Mat3::diag(1, 2, 3)).max_abs() == 0.0);
    CHECK(s.d_inertia_inv_dt.max_abs() == 0.0);
    CHECK(norm(s.internal_momentum - L0) == 0.0);
  }
  CHECK(m.kind() == "rigid");
}

TEST_CASE("vibrational model scales the inertia by the squared factor") {
  const InertiaTensor I0 = InertiaTensor::diag(0.25, 1.0, 1.0);
  const auto a = [](double t) { return std::exp(0.2 * t); };
  const auto a_dot = [](double t) { return 0.2 * std::exp(0.2 * t); };
  const DeformationModel m = make_vibrational(I0, a, a_dot, 0.0, 5.0);

  const double t = 1.7;
  const DeformationState s = m.eval(t);
  const double a2 = a(t) * a(t);
  CHECK((s.inertia.matrix() - I0.matrix() * a2).max_abs() < 1e-12);
  CHECK((s.inertia_inv * s.inertia.matrix() - Mat3::identity()).max_abs() <
        1e-12);

  // Derivative of the inverse against a centered finite difference.
  const double dt = 1e-6;
  const Mat3 fd =
      (m.eval(t + dt).inertia_inv - m.eval(t - dt).inertia_inv) *
      (1.0 / (2.0 * dt));
  CHECK((s.d_inertia_inv_dt - fd).max_abs() < 1e-7);
}

TEST_CASE("vibrational model rejects a scale that loses positivity") {
  const InertiaTensor I0 = InertiaTensor::diag(1, 1, 1);
  CHECK_THROWS_AS(make_vibrational(
                      I0, [](double t) { return 1.0 - t; }, nullptr, 0.0, 2.0),
                  NonPositiveScaleError);
}

TEST_CASE("diagonal model fills missing derivatives by finite differences") {
  const auto I3 = [](double t) { return 3.0 + 0.05 * t * t; };
  const auto c = [](double v) {
    return [v](double) { return v; };
  };
  const DeformationModel m = make_diagonal_timevarying(
      c(1.0), nullptr, c(2.0), nullptr, I3, nullptr, 0.0, 4.0);
  const double t = 2.3;
  const DeformationState s = m.eval(t);
  CHECK(s.inertia.matrix()(2, 2) == Catch::Approx(I3(t)));
  // d(1/I3)/dt = -I3' / I3^2 with I3' = 0.1 t.
  const double expected = -0.1 * t / (I3(t) * I3(t));
  CHECK(s.d_inertia_inv_dt(2, 2) == Catch::Approx(expected).margin(1e-7));
  CHECK(s.d_inertia_inv_dt(0, 0) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("diagonal model rejects moments that cross zero") {
  const auto c = [](double v) {
    return [v](double) { return v; };
  };
  CHECK_THROWS_AS(
      make_diagonal_timevarying([](double t) { return 1.0 - 0.6 * t; },
                                nullptr, c(2.0), nullptr, c(3.0), nullptr,
                                0.0, 2.0),
      NonPositiveMomentError);
}

TEST_CASE("tabulated model reproduces a smooth source between samples") {
  const InertiaTensor I0 = InertiaTensor::diag(0.5, 1.0, 1.5);
  const auto a = [](double t) { return 1.0 + 0.1 * std::sin(t); };
  const DeformationModel src = make_vibrational(I0, a, nullptr, 0.0, 2.0);

  std::vector<DeformationSample> samples;
  const int n = 2000;
  for (int k = 0; k <= n; ++k) {
    const double t = 2.0 * k / n;
    const DeformationState s = src.eval(t);
    samples.push_back({t, s.inertia.matrix(), s.internal_momentum});
  }
  const DeformationModel tab = make_tabulated(samples);

  double worst_i = 0.0, worst_d = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double t = 2.0 * (k + 0.5) / 200.0;
    const DeformationState se = src.eval(t);
    const DeformationState st = tab.eval(t);
    worst_i = std::max(worst_i,
                       (se.inertia.matrix() - st.inertia.matrix()).max_abs());
    worst_d = std::max(
        worst_d, (se.d_inertia_inv_dt - st.d_inertia_inv_dt).max_abs());
  }
  CHECK(worst_i < 1e-9);
  CHECK(worst_d < 1e-5);
}

TEST_CASE("tabulated model rejects unsorted samples") {
  std::vector<DeformationSample> samples{
      {0.0, Mat3::diag(1, 2, 3), Vec3{}},
      {1.0, Mat3::diag(1, 2, 3), Vec3{}},
      {0.5, Mat3::diag(1, 2, 3), Vec3{}},
  };
  CHECK_THROWS_AS(make_tabulated(samples), UnsortedSamplesError);
}

TEST_CASE("model built from particles matches the pointwise tensors") {
  // Rigid cloud spinning about z: r_i(t) = Rz(w t) r_i(0), v = w x r.
  const CloudFixture f;
  const double w = 0.8;
  ParticleSystem p;
  p.masses = f.masses;
  p.kinematics = [f, w](double t, std::vector<Vec3>& r, std::vector<Vec3>& v) {
    const double c = std::cos(w * t), s = std::sin(w * t);
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      const Vec3& q = f.points[i];
      r[i] = {c * q.x - s * q.y, s * q.x + c * q.y, q.z};
      v[i] = cross(Vec3{0, 0, w}, r[i]);
    }
  };

  const DeformationModel m = model_from_particles(p, 0.0, 1.0, 801);
  for (double t : {0.13, 0.5, 0.87}) {
    std::vector<Vec3> r, v;
    p.sample(t, r, v);
    const InertiaTensor direct = inertia_from_points(p.masses, r);
    const Vec3 L_direct = internal_momentum_from_points(p.masses, r, v);
    const DeformationState s = m.eval(t);
    CHECK((s.inertia.matrix() - direct.matrix()).max_abs() < 1e-8);
    CHECK(norm(s.internal_momentum - L_direct) < 1e-8);
  }
}

TEST_CASE("tabulated queries outside the span clamp and count a warning") {
  std::vector<DeformationSample> samples;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    samples.push_back({t, Mat3::diag(1.0 + t, 2.0, 3.0), Vec3{}});
  }
  const DeformationModel m = make_tabulated(samples);
  CHECK(m.clamp_warnings() == 0);
  const DeformationState s = m.eval(2.0);
  CHECK(s.inertia.matrix()(0, 0) == Catch::Approx(2.0));
  CHECK(m.clamp_warnings() == 1);
  m.eval(-1.0);
  CHECK(m.clamp_warnings() == 2);
}
