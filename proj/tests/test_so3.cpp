#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bgkso3/so3.hpp"

using namespace bgkso3;

namespace {

Vec3 normalized3(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  return {x / n, y / n, z / n};
}

Vec4 random_unit4(Rng &rng) {
  std::normal_distribution<double> gauss;
  Vec4 q;
  double n2 = 0;
  for (double &c : q) {
    c = gauss(rng);
    n2 += c * c;
  }
  for (double &c : q) c /= std::sqrt(n2);
  return q;
}

Mat3 random_mat3(Rng &rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat3 a;
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++) a.m[r][c] = gauss(rng);
  return a;
}

Mat3 elementary(int i, int j) {
  Mat3 a = Mat3::zero();
  a.m[i][j] = 1;
  return a;
}

}  // namespace

TEST_CASE("mat_dot basics") {
  CHECK(mat_dot(Mat3::identity(), Mat3::identity()) == doctest::Approx(1.5));
  CHECK(mat_dot(elementary(0, 0), elementary(1, 1)) == 0.0);

  Rng rng(101);
  for (int k = 0; k < 50; k++) {
    const Rotation a = haar_sample(rng);
    CHECK(mat_dot(a, a) == doctest::Approx(1.5).epsilon(1e-12));
  }

  const Mat3 a = random_mat3(rng), b = random_mat3(rng);
  CHECK(mat_dot(a, b) == doctest::Approx(mat_dot(b, a)).epsilon(1e-14));
  CHECK(mat_dot(a, b) ==
        doctest::Approx(0.5 * trace(matmul(transpose(a), b))).epsilon(1e-13));
}

TEST_CASE("rodrigues explicit values") {
  const Mat3 id = rodrigues(0.0, {0, 0, 1});
  CHECK(max_abs_diff(id, Mat3::identity()) <= 1e-15);

  const Mat3 half_turn = rodrigues(M_PI, {0, 0, 1});
  CHECK(max_abs_diff(half_turn, Mat3::diag({-1, -1, 1})) <= 1e-15);

  Mat3 quarter = Mat3::zero();
  quarter.m[0][1] = -1;
  quarter.m[1][0] = 1;
  quarter.m[2][2] = 1;
  CHECK(max_abs_diff(rodrigues(M_PI / 2, {0, 0, 1}), quarter) <= 1e-15);

  Rng rng(102);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 200; k++) {
    const double theta = angle(rng);
    const Vec3 n = normalized3(gauss(rng), gauss(rng), gauss(rng));
    const Rotation a = rodrigues(theta, n);
    CHECK(rotation_defect(a) <= 1e-13);
    CHECK(trace(a) == doctest::Approx(1 + 2 * std::cos(theta)).epsilon(1e-12));
  }
}

TEST_CASE("axis_angle branches and round trip") {
  const AxisAngle at_id = axis_angle(Mat3::identity());
  CHECK(at_id.theta == 0.0);
  CHECK(at_id.degenerate);
  CHECK(at_id.axis[0] == 1.0);

  const AxisAngle pi_z = axis_angle(Mat3::diag({-1, -1, 1}));
  CHECK(pi_z.theta == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(std::fabs(pi_z.axis[2] - 1.0) <= 1e-12);
  CHECK(!pi_z.degenerate);

  const Vec3 n = normalized3(1, -2, 0.5);
  const AxisAngle generic = axis_angle(rodrigues(1.2, n));
  CHECK(generic.theta == doctest::Approx(1.2).epsilon(1e-12));
  for (int i = 0; i < 3; i++)
    CHECK(generic.axis[i] == doctest::Approx(n[i]).epsilon(1e-10));

  Rng rng(103);
  double worst = 0;
  for (int k = 0; k < 1000; k++) {
    const Rotation a = haar_sample(rng);
    const AxisAngle aa = axis_angle(a);
    worst = std::max(worst, max_abs_diff(a, rodrigues(aa.theta, aa.axis)));
  }
  CHECK(worst <= 1e-9);

  // near-pi extraction stays accurate despite the vanishing skew part
  for (double eps : {1e-5, 1e-7, 1e-9, 0.0}) {
    const Vec3 m = normalized3(2, 1, -1);
    const AxisAngle aa = axis_angle(rodrigues(M_PI - eps, m));
    CHECK(max_abs_diff(rodrigues(aa.theta, aa.axis), rodrigues(M_PI - eps, m)) <=
          1e-9);
  }
}

TEST_CASE("quaternion map explicit values and half-angle identity") {
  CHECK(max_abs_diff(quat_to_rot({1, 0, 0, 0}), Mat3::identity()) <= 1e-15);
  CHECK(max_abs_diff(quat_to_rot({0, 0, 0, 1}), Mat3::diag({-1, -1, 1})) <=
        1e-15);

  Rng rng(104);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  std::normal_distribution<double> gauss;
  double worst = 0;
  for (int k = 0; k < 1000; k++) {
    const double theta = angle(rng);
    const Vec3 n = normalized3(gauss(rng), gauss(rng), gauss(rng));
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const Vec4 q{c, s * n[0], s * n[1], s * n[2]};
    worst = std::max(worst, max_abs_diff(quat_to_rot(q), rodrigues(theta, n)));
    const Vec4 neg{-q[0], -q[1], -q[2], -q[3]};
    CHECK(max_abs_diff(quat_to_rot(q), quat_to_rot(neg)) == 0.0);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("rot_to_quat round trip and canonical sign") {
  const Vec4 q_id = rot_to_quat(Mat3::identity());
  CHECK(q_id[0] == doctest::Approx(1.0).epsilon(1e-14));

  Rng rng(105);
  double worst = 0;
  for (int k = 0; k < 2000; k++) {
    const Rotation a = haar_sample(rng);
    const Vec4 q = rot_to_quat(a);
    double n2 = 0;
    for (double c : q) n2 += c * c;
    CHECK(std::fabs(n2 - 1.0) <= 1e-12);
    // canonical representative: first coordinate above noise is positive
    for (double c : q) {
      if (std::fabs(c) > 1e-12) {
        CHECK(c > 0);
        break;
      }
    }
    worst = std::max(worst, max_abs_diff(quat_to_rot(q), a));
  }
  CHECK(worst <= 1e-10);

  // half-turns exercise the three non-leading recovery branches
  for (int axis = 0; axis < 3; axis++) {
    Vec3 n{0, 0, 0};
    n[axis] = 1;
    const Vec4 q = rot_to_quat(rodrigues(M_PI, n));
    CHECK(std::fabs(q[axis + 1] - 1.0) <= 1e-12);
  }
}

TEST_CASE("phi_map diagonal formula, tracelessness, outer-product identity") {
  const Sym4 s = phi_map(Mat3::diag({1.0, 2.0, 3.0}));
  CHECK(s.at(0, 0) == doctest::Approx(0.25 * 6).epsilon(1e-15));
  CHECK(s.at(1, 1) == doctest::Approx(0.25 * (1 - 2 - 3)).epsilon(1e-15));
  CHECK(s.at(2, 2) == doctest::Approx(0.25 * (-1 + 2 - 3)).epsilon(1e-15));
  CHECK(s.at(3, 3) == doctest::Approx(0.25 * (-1 - 2 + 3)).epsilon(1e-15));
  for (int i = 0; i < 4; i++)
    for (int j = i + 1; j < 4; j++) CHECK(s.at(i, j) == 0.0);

  Rng rng(106);
  for (int k = 0; k < 200; k++) {
    const Sym4 t = phi_map(random_mat3(rng));
    CHECK(std::fabs(t.at(0, 0) + t.at(1, 1) + t.at(2, 2) + t.at(3, 3)) <= 1e-12);
  }

  const Sym4 zero = phi_map(Mat3::zero());
  for (int i = 0; i < 10; i++) CHECK(zero.s[i] == 0.0);

  double worst = 0;
  for (int k = 0; k < 500; k++) {
    const Vec4 q = random_unit4(rng);
    const Sym4 s_rot = phi_map(quat_to_rot(q));
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++) {
        const double expect = q[i] * q[j] - (i == j ? 0.25 : 0.0);
        worst = std::max(worst, std::fabs(s_rot.at(i, j) - expect));
      }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("quadratic-form bridge over random pairs") {
  Rng rng(107);
  double worst = 0;
  for (int k = 0; k < 1000; k++) {
    const Vec4 q = random_unit4(rng);
    const Mat3 j = random_mat3(rng);
    const Sym4 s = phi_map(j);
    double quad = 0;
    for (int r = 0; r < 4; r++)
      for (int c = 0; c < 4; c++) quad += q[r] * s.at(r, c) * q[c];
    worst = std::max(worst, std::fabs(0.5 * mat_dot(j, quat_to_rot(q)) - quad));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("phi_inverse inverts phi_map and matches diagonal formulas") {
  Rng rng(108);
  double worst = 0;
  for (int k = 0; k < 500; k++) {
    const Mat3 j = random_mat3(rng);
    worst = std::max(worst, max_abs_diff(phi_inverse(phi_map(j)), j));
  }
  CHECK(worst <= 1e-12);

  const double alpha = 1.7;
  Sym4 iso{};
  iso.at(0, 0) = 0.75 * alpha;
  iso.at(1, 1) = iso.at(2, 2) = iso.at(3, 3) = -0.25 * alpha;
  CHECK(max_abs_diff(phi_inverse(iso, true), alpha * Mat3::identity()) <= 1e-15);

  Sym4 axis{};
  axis.at(0, 0) = axis.at(1, 1) = 0.25 * alpha;
  axis.at(2, 2) = axis.at(3, 3) = -0.25 * alpha;
  CHECK(max_abs_diff(phi_inverse(axis, true), Mat3::diag({alpha, 0, 0})) <=
        1e-15);

  Sym4 zero{};
  CHECK(max_abs_diff(phi_inverse(zero), Mat3::zero()) == 0.0);
}

TEST_CASE("ssvd explicit cases") {
  const SsvdResult id = ssvd(Mat3::identity());
  CHECK(id.D[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.D[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.D[2] == doctest::Approx(1.0).epsilon(1e-14));

  const double alpha = 0.8;
  const SsvdResult rank1 = ssvd(Mat3::diag({0, -alpha, 0}));
  CHECK(rank1.D[0] == doctest::Approx(alpha).epsilon(1e-13));
  CHECK(std::fabs(rank1.D[1]) <= 1e-13);
  CHECK(std::fabs(rank1.D[2]) <= 1e-13);

  const SsvdResult neg = ssvd(-2.0 * Mat3::identity());
  CHECK(neg.D[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(neg.D[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(neg.D[2] == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("ssvd reconstruction sweep with degenerate inputs") {
  Rng rng(109);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst_rec = 0, worst_rot = 0, worst_cone = 0;
  for (int k = 0; k < 10000; k++) {
    Mat3 m = random_mat3(rng);
    const int variant = k % 5;
    if (variant == 1) {
      // rank <= 2
      for (int c = 0; c < 3; c++) m.m[2][c] = m.m[0][c] + m.m[1][c];
    } else if (variant == 2) {
      // rank 1
      for (int r = 1; r < 3; r++)
        for (int c = 0; c < 3; c++) m.m[r][c] = (r + 1.0) * m.m[0][c];
    } else if (variant == 3 && det3(m) > 0) {
      m = -1.0 * m;
    } else if (variant == 4) {
      // repeated singular values
      const double s = 0.3 + uni(rng);
      m = matmul(haar_sample(rng), s * haar_sample(rng));
    }
    const SsvdResult f = ssvd(m);
    worst_rec = std::max(
        worst_rec, max_abs_diff(m, matmul(f.P, matmul(Mat3::diag(f.D), f.Q))));
    worst_rot = std::max(worst_rot, rotation_defect(f.P));
    worst_rot = std::max(worst_rot, rotation_defect(f.Q));
    worst_cone = std::max(worst_cone, f.D[1] - f.D[0]);
    worst_cone = std::max(worst_cone, std::fabs(f.D[2]) - f.D[1]);
    const double det = det3(m);
    if (std::fabs(det) > 1e-12) CHECK(f.D[2] * det >= 0);
  }
  CHECK(worst_rec <= 1e-10);
  CHECK(worst_rot <= 1e-12);
  CHECK(worst_cone <= 1e-14);
}

TEST_CASE("ssvd diagonal is an orbit invariant") {
  Rng rng(110);
  double worst = 0;
  for (int k = 0; k < 300; k++) {
    const Mat3 m = random_mat3(rng);
    const Rotation p = haar_sample(rng), q = haar_sample(rng);
    const SsvdResult base = ssvd(m);
    const SsvdResult moved = ssvd(matmul(p, matmul(m, q)));
    for (int i = 0; i < 3; i++)
      worst = std::max(worst, std::fabs(base.D[i] - moved.D[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("polar_rotation") {
  Rng rng(111);
  for (int k = 0; k < 100; k++) {
    const Rotation a = haar_sample(rng);
    CHECK(max_abs_diff(polar_rotation(a), a) <= 1e-12);
    CHECK(max_abs_diff(polar_rotation(2.5 * a), a) <= 1e-12);
  }

  for (int k = 0; k < 200; k++) {
    Mat3 m = random_mat3(rng);
    if (std::fabs(det3(m)) < 1e-6) continue;
    const Mat3 lambda = polar_rotation(m);
    // orthogonal with the determinant sign of the input
    CHECK(max_abs_diff(matmul(transpose(lambda), lambda), Mat3::identity()) <=
          1e-11);
    CHECK(det3(lambda) * det3(m) > 0);
    if (det3(m) > 0) {
      const SsvdResult f = ssvd(m);
      CHECK(max_abs_diff(lambda, matmul(f.P, f.Q)) <= 1e-9);
    }
  }

  CHECK_THROWS_AS((void)polar_rotation(Mat3::zero()), std::invalid_argument);
  Mat3 singular = Mat3::diag({1, 1, 0});
  CHECK_THROWS_AS((void)polar_rotation(singular), std::invalid_argument);
}

TEST_CASE("haar sampling determinism and horn membership") {
  Rng a(42), b(42);
  for (int k = 0; k < 20; k++)
    CHECK(max_abs_diff(haar_sample(a), haar_sample(b)) == 0.0);

  Rng rng(112);
  for (int k = 0; k < 20000; k++) {
    const Rotation r = haar_sample(rng);
    CHECK(rotation_defect(r) <= 1e-13);
    CHECK(horn_check({r.m[0][0], r.m[1][1], r.m[2][2]}));
  }
}

TEST_CASE("haar moments match the uniform law") {
  Rng rng(113);
  const int n = 200000;
  double sum11 = 0, sum11_sq = 0, sum_q2[4] = {0, 0, 0, 0}, sum_q4 = 0,
         sum_q22 = 0;
  for (int k = 0; k < n; k++) {
    const Rotation r = haar_sample(rng);
    sum11 += r.m[0][0];
    sum11_sq += r.m[0][0] * r.m[0][0];
    const Vec4 q = rot_to_quat(r);
    for (int i = 0; i < 4; i++) sum_q2[i] += q[i] * q[i];
    sum_q4 += q[0] * q[0] * q[0] * q[0];
    sum_q22 += q[0] * q[0] * q[1] * q[1];
  }
  CHECK(std::fabs(sum11 / n) <= 4 * std::sqrt(1.0 / 3 / n));
  CHECK(std::fabs(sum11_sq / n - 1.0 / 3) <= 4 * std::sqrt(0.2 / n));
  for (int i = 0; i < 4; i++)
    CHECK(std::fabs(sum_q2[i] / n - 0.25) <= 4 * std::sqrt(0.05 / n));
  CHECK(std::fabs(sum_q4 / n - 0.125) <= 4 * std::sqrt(0.03 / n));
  CHECK(std::fabs(sum_q22 / n - 1.0 / 24) <= 4 * std::sqrt(0.01 / n));
}

TEST_CASE("haar invariance under the group change-of-variable maps") {
  const int n = 1000000;
  struct Moments {
    double m1 = 0, m2 = 0, m12 = 0;
    double v1 = 0, v2 = 0, v12 = 0;
  };
  auto collect = [&](unsigned long long seed, int variant) {
    Rng rng(seed);
    const Mat3 d12 = Mat3::diag({-1, -1, 1});
    Mat3 p12 = Mat3::zero();
    p12.m[0][1] = p12.m[1][0] = p12.m[2][2] = 1;
    double s1 = 0, s2 = 0, s12 = 0, q1 = 0, q2 = 0, q12 = 0;
    for (int k = 0; k < n; k++) {
      Rotation a = haar_sample(rng);
      if (variant == 1) a = matmul(d12, a);
      if (variant == 2) a = matmul(a, d12);
      if (variant == 3) a = matmul(p12, matmul(a, transpose(p12)));
      if (variant == 4) a = transpose(a);
      const double x = a.m[0][0], y = a.m[1][1];
      s1 += x;
      s2 += x * x;
      s12 += x * y;
      q1 += x * x;
      q2 += x * x * x * x;
      q12 += x * y * x * y;
    }
    Moments out;
    out.m1 = s1 / n;
    out.m2 = s2 / n;
    out.m12 = s12 / n;
    out.v1 = std::sqrt((q1 / n - out.m1 * out.m1) / n);
    out.v2 = std::sqrt((q2 / n - out.m2 * out.m2) / n);
    out.v12 = std::sqrt((q12 / n - out.m12 * out.m12) / n);
    return out;
  };
  const Moments ref = collect(500, 0);
  for (int variant = 1; variant <= 4; variant++) {
    const Moments t = collect(500 + variant, variant);
    CHECK(std::fabs(t.m1 - ref.m1) <= 4 * std::hypot(t.v1, ref.v1));
    CHECK(std::fabs(t.m2 - ref.m2) <= 4 * std::hypot(t.v2, ref.v2));
    CHECK(std::fabs(t.m12 - ref.m12) <= 4 * std::hypot(t.v12, ref.v12));
  }
}

TEST_CASE("first-moment projection integrates to J/6") {
  Rng rng(114);
  const int n = 200000;
  for (int trial = 0; trial < 5; trial++) {
    const Mat3 j = random_mat3(rng);
    Mat3 mean = Mat3::zero(), second = Mat3::zero();
    Rng stream(900 + trial);
    for (int k = 0; k < n; k++) {
      const Rotation a = haar_sample(stream);
      const double s = mat_dot(j, a);
      for (int r = 0; r < 3; r++)
        for (int c = 0; c < 3; c++) {
          const double v = s * a.m[r][c];
          mean.m[r][c] += v;
          second.m[r][c] += v * v;
        }
    }
    for (int r = 0; r < 3; r++)
      for (int c = 0; c < 3; c++) {
        const double avg = mean.m[r][c] / n;
        const double se =
            std::sqrt((second.m[r][c] / n - avg * avg) / n);
        CHECK(std::fabs(avg - j.m[r][c] / 6.0) <= 4 * se);
      }
  }
}

TEST_CASE("horn_check facets") {
  CHECK(horn_check({1, 1, 1}));
  CHECK(horn_check({-1, -1, 1}));
  CHECK(horn_check({0, 0, 0}));
  CHECK(!horn_check({1, 1, -1}));
  CHECK(!horn_check({-1, -1, -1}));
  CHECK(!horn_check({1.5, 0, 0}));
  // tolerance keeps boundary points inside
  CHECK(horn_check({-1 - 1e-11, -1 - 1e-11, 1}));
}

TEST_CASE("rotation_defect and sym3_eigen") {
  CHECK(rotation_defect(Mat3::identity()) == 0.0);
  CHECK(rotation_defect(1.1 * Mat3::identity()) > 0.09);

  Mat3 s = Mat3::zero();
  s.m[0][0] = 2;
  s.m[0][1] = s.m[1][0] = 1;
  s.m[1][1] = 2;
  s.m[2][2] = 5;
  Vec3 eig;
  Mat3 vec;
  sym3_eigen(s, eig, vec);
  CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(eig[2] == doctest::Approx(5.0).epsilon(1e-13));
  const Mat3 rebuilt =
      matmul(vec, matmul(Mat3::diag(eig), transpose(vec)));
  CHECK(max_abs_diff(rebuilt, s) <= 1e-12);
  CHECK(max_abs_diff(matmul(transpose(vec), vec), Mat3::identity()) <= 1e-13);

  Rng rng(115);
  for (int k = 0; k < 200; k++) {
    const Mat3 g = random_mat3(rng);
    const Mat3 sym = 0.5 * (g + transpose(g));
    sym3_eigen(sym, eig, vec);
    CHECK(eig[0] <= eig[1]);
    CHECK(eig[1] <= eig[2]);
    CHECK(max_abs_diff(matmul(vec, matmul(Mat3::diag(eig), transpose(vec))),
                       sym) <= 1e-12);
  }
}
