#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bgkso3/so3.hpp"
#include "bgkso3/vonmises.hpp"

using namespace bgkso3;

namespace {

Mat3 random_mat3(Rng &rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat3 a;
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++) a.m[r][c] = gauss(rng);
  return a;
}

Vec3 random_unit3(Rng &rng) {
  std::normal_distribution<double> gauss;
  while (true) {
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    const double n = norm3(v);
    if (n > 1e-6) {
      for (double &c : v) c /= n;
      return v;
    }
  }
}

Mat3 outer(const Vec3 &p, const Vec3 &q) {
  Mat3 a;
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++) a.m[r][c] = p[r] * q[c];
  return a;
}

}  // namespace

TEST_CASE("quadrature config validation") {
  CHECK_NOTHROW(validate(QuadratureConfig{}));
  CHECK_NOTHROW(validate(QuadratureConfig{32, 24}));
  CHECK_THROWS_AS(validate(QuadratureConfig{16, 48}), std::invalid_argument);
  CHECK_THROWS_AS(validate(QuadratureConfig{128, 16}), std::invalid_argument);
  CHECK_THROWS_AS(log_partition({1, 0, 0}, QuadratureConfig{8, 8}),
                  std::invalid_argument);
}

TEST_CASE("log_partition reference values") {
  CHECK(std::fabs(log_partition({0, 0, 0})) <= 1e-12);

  for (double alpha : {0.5, 2.0, 10.0}) {
    CHECK(log_partition({alpha, alpha, alpha}) ==
          doctest::Approx(log_partition_iso_1d(alpha)).epsilon(1e-9));
    CHECK(log_partition({alpha, 0, 0}) ==
          doctest::Approx(log_partition_axis_closed(alpha)).epsilon(1e-10));
  }

  // axis closed form against its own definition
  for (double alpha : {0.3, 1.0, 7.0}) {
    CHECK(log_partition_axis_closed(alpha) ==
          doctest::Approx(std::log(2 * std::sinh(alpha / 2) / alpha))
              .epsilon(1e-13));
  }
}

TEST_CASE("log_partition is an orbit invariant") {
  const DiagTriple d{1.7, -0.6, 0.35};
  const double base = log_partition(d);
  const std::vector<DiagTriple> orbit = {
      {d[1], d[2], d[0]},  {d[2], d[0], d[1]},   {d[1], d[0], d[2]},
      {-d[0], -d[1], d[2]}, {d[0], -d[1], -d[2]}, {-d[1], d[0], -d[2]},
  };
  for (const DiagTriple &e : orbit)
    CHECK(log_partition(e) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("density basics and normalization") {
  Rng rng(201);
  const VonMisesParams uniform = make_params(Mat3::zero());
  for (int k = 0; k < 20; k++)
    CHECK(density(uniform, haar_sample(rng)) ==
          doctest::Approx(1.0).epsilon(1e-12));

  const double alpha = 1.4;
  const VonMisesParams iso = make_params(alpha * Mat3::identity());
  CHECK(std::log(density(iso, Mat3::identity())) ==
        doctest::Approx(1.5 * alpha - log_partition({alpha, alpha, alpha}))
            .epsilon(1e-12));

  // MC normalization of a generic density
  const Mat3 j = random_mat3(rng, 0.8);
  const VonMisesParams p = make_params(j);
  const int n = 1000000;
  double mean = 0, m2 = 0;
  for (int k = 1; k <= n; k++) {
    const double v = density(p, haar_sample(rng));
    const double delta = v - mean;
    mean += delta / k;
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / n / (n - 1));
  CHECK(std::fabs(mean - 1.0) <= 4 * se);
}

TEST_CASE("first moments on the aligned and axis lines") {
  const DiagTriple zero = moment1_diag({0, 0, 0});
  for (double v : zero) CHECK(std::fabs(v) <= 1e-12);

  for (double alpha : {0.7, 2.5}) {
    const DiagTriple iso = moment1_diag({alpha, alpha, alpha});
    const double want = c1(alpha);
    for (double v : iso) CHECK(v == doctest::Approx(want).epsilon(1e-10));

    const DiagTriple axis = moment1_diag({alpha, 0, 0});
    CHECK(axis[0] == doctest::Approx(c2(alpha)).epsilon(1e-10));
    CHECK(std::fabs(axis[1]) <= 1e-12);
    CHECK(std::fabs(axis[2]) <= 1e-12);
  }
}

TEST_CASE("slot symmetries of the diagonal moments are exact") {
  const DiagTriple d{1.1, 1.1, 0.4};
  const DiagTriple m = moment1_diag(d);
  CHECK(m[0] == m[1]);
  const Mat3 m2 = moment2_diag(d);
  CHECK(m2.m[0][0] == m2.m[1][1]);
  CHECK(std::fabs(m2.m[0][2] - m2.m[1][2]) <= 1e-15);

  const DiagTriple g{0.9, -0.3, 1.6};
  const DiagTriple mg = moment1_diag(g);
  const DiagTriple cyc = moment1_diag({g[1], g[2], g[0]});
  CHECK(std::fabs(cyc[0] - mg[1]) <= 1e-15);
  CHECK(std::fabs(cyc[1] - mg[2]) <= 1e-15);
  CHECK(std::fabs(cyc[2] - mg[0]) <= 1e-15);
  const DiagTriple flip = moment1_diag({-g[0], -g[1], g[2]});
  CHECK(flip[0] == -mg[0]);
  CHECK(flip[1] == -mg[1]);
  CHECK(flip[2] == mg[2]);
}

TEST_CASE("second moments: special lines") {
  const Mat3 at_zero = moment2_diag({0, 0, 0});
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) {
      if (i == j)
        CHECK(at_zero.m[i][j] == doctest::Approx(1.0 / 3).epsilon(1e-10));
      else
        CHECK(std::fabs(at_zero.m[i][j]) <= 1e-12);
    }

  const double alpha = 1.9;
  const Mat3 iso = moment2_diag({alpha, alpha, alpha});
  CHECK(iso.m[0][0] == iso.m[1][1]);
  CHECK(iso.m[1][1] == iso.m[2][2]);
  CHECK(iso.m[0][1] == iso.m[0][2]);
  CHECK(iso.m[0][1] == iso.m[1][2]);

  const Mat3 axis = moment2_diag({alpha, 0, 0});
  CHECK(std::fabs(axis.m[0][1]) <= 1e-12);
  CHECK(std::fabs(axis.m[0][2]) <= 1e-12);
  CHECK(std::fabs(axis.m[1][1] - axis.m[2][2]) <= 1e-15);
}

TEST_CASE("second moments agree with the single-angle reference paths") {
  for (double alpha : {0.3, 1.7, 6.0}) {
    const Mat3 iso = moment2_diag({alpha, alpha, alpha});
    const Mat3 iso_ref = moment2_iso_1d(alpha);
    CHECK(max_abs_diff(iso, iso_ref) <= 1e-9);

    const Mat3 axis = moment2_diag({alpha, 0, 0});
    const Mat3 axis_ref = moment2_axis_1d(alpha);
    CHECK(max_abs_diff(axis, axis_ref) <= 1e-9);
  }
}

TEST_CASE("moment_matrix on the closed-form rays") {
  CHECK(max_abs_diff(moment_matrix(Mat3::zero()), Mat3::zero()) <= 1e-12);

  Rng rng(202);
  for (double alpha : {0.8, 3.0}) {
    const Rotation lam = haar_sample(rng);
    CHECK(max_abs_diff(moment_matrix(alpha * lam), c1(alpha) * lam) <= 1e-9);

    const Mat3 b = outer(random_unit3(rng), random_unit3(rng));
    CHECK(max_abs_diff(moment_matrix(alpha * b), c2(alpha) * b) <= 1e-9);
  }

  const Mat3 j = random_mat3(rng);
  const Rotation p = haar_sample(rng), q = haar_sample(rng);
  const Mat3 moved = moment_matrix(matmul(p, matmul(j, q)));
  CHECK(max_abs_diff(moved, matmul(p, matmul(moment_matrix(j), q))) <= 1e-10);
}

TEST_CASE("consistency functions") {
  CHECK(std::fabs(c1(0)) <= 1e-14);
  CHECK(std::fabs(c2(0)) <= 1e-14);
  CHECK(c2(2.0) == doctest::Approx(1.0 / std::tanh(1.0) - 1.0).epsilon(1e-12));
  for (double alpha : {0.5, 2.0, 10.0})
    CHECK(c2(alpha) == doctest::Approx(c2_closed(alpha)).epsilon(1e-9));

  // the density-to-concentration ratio leaves 6 with slope -3/2
  CHECK(1e-4 / c1(1e-4) == doctest::Approx(6.0 - 1.5e-4).epsilon(1e-8 / 6));
  CHECK(1e-6 / c1(1e-6) == doctest::Approx(6.0).epsilon(2e-6 / 6));

  CHECK(c1_prime(0) == doctest::Approx(1.0 / 6).epsilon(1e-8));
  CHECK(c2_prime(0) == doctest::Approx(1.0 / 6).epsilon(1e-8));
  for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
    CHECK(c1_prime(alpha) > 0);
    const double h = 1e-5;
    CHECK(std::fabs(c1_prime(alpha) - (c1(alpha + h) - c1(alpha - h)) / (2 * h)) <=
          1e-7);
    CHECK(std::fabs(c2_prime(alpha) - (c2(alpha + h) - c2(alpha - h)) / (2 * h)) <=
          1e-7);
  }

  // monotone saturation toward 1
  double prev1 = c1(10), prev2 = c2(10);
  for (double alpha : {20.0, 50.0}) {
    const double v1 = c1(alpha), v2 = c2(alpha);
    CHECK(v1 > prev1);
    CHECK(v2 > prev2);
    CHECK(v1 < 1.0);
    CHECK(v2 < 1.0);
    prev1 = v1;
    prev2 = v2;
  }
}

TEST_CASE("weighted means") {
  auto one = [](double) { return 1.0; };
  for (double alpha : {0.0, 1.3, 8.0}) {
    CHECK(brace_mean(one, alpha) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bracket_mean(one, alpha) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const double alpha = 2.2;
  auto chord = [](double t) { return 2 * std::cos(t) + 1; };
  CHECK(brace_mean(chord, alpha) ==
        doctest::Approx(3 * c1(alpha)).epsilon(1e-11));
  auto sin_sq = [](double t) { return std::sin(t) * std::sin(t); };
  CHECK(brace_mean(sin_sq, alpha) ==
        doctest::Approx(3 * c1(alpha) / alpha).epsilon(1e-11));
  auto cosine = [](double t) { return std::cos(t); };
  CHECK(bracket_mean(cosine, alpha) == doctest::Approx(c2(alpha)).epsilon(1e-11));
  CHECK(bracket_mean(sin_sq, alpha) ==
        doctest::Approx(4 * c2(alpha) / alpha).epsilon(1e-11));

  // angle-distribution moments of the unweighted class measure
  auto cosp = [](int p) {
    return [p](double t) { return std::pow(std::cos(t), p); };
  };
  CHECK(brace_mean(cosp(1), 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(brace_mean(cosp(2), 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(brace_mean(cosp(3), 0) == doctest::Approx(-0.375).epsilon(1e-12));
  CHECK(brace_mean(cosp(4), 0) == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("quadrature converges under node doubling") {
  const QuadratureConfig base{};
  const QuadratureConfig dense_1d{256, 48};
  for (double alpha : {0.1, 1.0, 10.0, 50.0}) {
    CHECK(std::fabs(c1(alpha, base) - c1(alpha, dense_1d)) <= 1e-10);
    CHECK(std::fabs(c2(alpha, base) - c2(alpha, dense_1d)) <= 1e-10);
  }

  const QuadratureConfig dense_s3{128, 96};
  for (const DiagTriple &d :
       {DiagTriple{1.5, 0.7, -0.2}, DiagTriple{4, -2, 1}, DiagTriple{8, 8, 8}}) {
    CHECK(std::fabs(log_partition(d, base) - log_partition(d, dense_s3)) <=
          1e-10);
    const DiagTriple a = moment1_diag(d, base), b = moment1_diag(d, dense_s3);
    for (int i = 0; i < 3; i++) CHECK(std::fabs(a[i] - b[i]) <= 1e-10);
  }

  // the cheaper grid used for long parameter sweeps stays accurate
  const QuadratureConfig sweep{64, 32};
  for (const DiagTriple &d :
       {DiagTriple{10, 10, 10}, DiagTriple{10, 0, 0}, DiagTriple{6.7, 6.7, 6.7}}) {
    CHECK(std::fabs(log_partition(d, sweep) - log_partition(d, base)) <= 1e-7);
    const DiagTriple a = moment1_diag(d, sweep), b = moment1_diag(d, base);
    for (int i = 0; i < 3; i++) CHECK(std::fabs(a[i] - b[i]) <= 1e-7);
  }
}

TEST_CASE("moments cross-validated by importance-weighted Monte Carlo") {
  const int n = 1000000;
  std::vector<std::array<double, 3>> diags(n);
  {
    Rng rng(203);
    for (int k = 0; k < n; k++) {
      const Rotation a = haar_sample(rng);
      diags[k] = {a.m[0][0], a.m[1][1], a.m[2][2]};
    }
  }

  Rng rng(204);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 10; trial++) {
    const DiagTriple d{uni(rng), uni(rng), uni(rng)};
    const double shift = 0.5 * (std::fabs(d[0]) + std::fabs(d[1]) + std::fabs(d[2]));
    std::vector<double> w(n);
    double wsum = 0;
    for (int k = 0; k < n; k++) {
      const double e =
          0.5 * (d[0] * diags[k][0] + d[1] * diags[k][1] + d[2] * diags[k][2]);
      w[k] = std::exp(e - shift);
      wsum += w[k];
    }
    const DiagTriple m1 = moment1_diag(d);
    const Mat3 m2 = moment2_diag(d);
    for (int i = 0; i < 3; i++)
      for (int j = i; j < 3; j++) {
        double num1 = 0, num2 = 0;
        for (int k = 0; k < n; k++) {
          num1 += w[k] * diags[k][i];
          num2 += w[k] * diags[k][i] * diags[k][j];
        }
        const double est1 = num1 / wsum, est2 = num2 / wsum;
        double var1 = 0, var2 = 0;
        for (int k = 0; k < n; k++) {
          const double r1 = w[k] * (diags[k][i] - est1);
          const double r2 = w[k] * (diags[k][i] * diags[k][j] - est2);
          var1 += r1 * r1;
          var2 += r2 * r2;
        }
        const double se1 = std::sqrt(var1) / wsum, se2 = std::sqrt(var2) / wsum;
        if (i == j) CHECK(std::fabs(est1 - m1[i]) <= 4 * se1);
        CHECK(std::fabs(est2 - m2.m[i][j]) <= 4 * se2);
      }
  }
}

TEST_CASE("weighted first-moment projection with a class-function factor") {
  // For g invariant under conjugation and transpose, the map
  // J -> int (J.A) A g(A) dA  equals  a Tr(J) I + b J + c J^T, with the
  // constants reducible to angle averages:
  //   b + c = <(1-cos)^2 g>/15,  b - c = <sin^2 g>/3,
  //   3a + b + c = <(1+2cos)^2 g>/6.
  auto constants = [](const std::function<double(double)> &g) {
    const double bc_plus = brace_mean(
        [&](double t) { return std::pow(1 - std::cos(t), 2) * g(t); }, 0) / 15.0;
    const double bc_minus = brace_mean(
        [&](double t) { return std::pow(std::sin(t), 2) * g(t); }, 0) / 3.0;
    const double s0 = brace_mean(
        [&](double t) { return std::pow(1 + 2 * std::cos(t), 2) * g(t); }, 0) / 6.0;
    const double b = 0.5 * (bc_plus + bc_minus);
    const double c = 0.5 * (bc_plus - bc_minus);
    return std::array<double, 3>{(s0 - b - c) / 3.0, b, c};
  };

  const auto plain = constants([](double) { return 1.0; });
  CHECK(plain[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plain[1] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(std::fabs(plain[2]) <= 1e-13);

  auto trace_sq = [](double t) { return std::pow(1 + 2 * std::cos(t), 2); };
  const auto tsq = constants(trace_sq);
  CHECK(tsq[0] == doctest::Approx(2.0 / 15).epsilon(1e-11));
  CHECK(tsq[1] == doctest::Approx(2.0 / 15).epsilon(1e-11));
  CHECK(tsq[2] == doctest::Approx(-1.0 / 30).epsilon(1e-11));

  Rng rng(205);
  const int n = 400000;
  for (int trial = 0; trial < 3; trial++) {
    const Mat3 j = random_mat3(rng);
    Mat3 mean = Mat3::zero(), second = Mat3::zero();
    for (int k = 0; k < n; k++) {
      const Rotation a = haar_sample(rng);
      const double f = mat_dot(j, a) * trace(a) * trace(a);
      for (int r = 0; r < 3; r++)
        for (int col = 0; col < 3; col++) {
          const double v = f * a.m[r][col];
          mean.m[r][col] += v;
          second.m[r][col] += v * v;
        }
    }
    const Mat3 want = tsq[0] * trace(j) * Mat3::identity() + tsq[1] * j +
                      tsq[2] * transpose(j);
    for (int r = 0; r < 3; r++)
      for (int col = 0; col < 3; col++) {
        const double avg = mean.m[r][col] / n;
        const double se = std::sqrt((second.m[r][col] / n - avg * avg) / n);
        CHECK(std::fabs(avg - want.m[r][col]) <= 4 * se);
      }
  }
}

TEST_CASE("tail ratio sign function") {
  auto f = [](double x) {
    const double num = brace_mean(
        [](double t) { return std::pow(1 - std::cos(t), 2); }, x);
    const double den = brace_mean(
        [](double t) { return std::pow(std::sin(t), 2); }, x);
    return 1.0 - 0.2 * num / den;
  };
  CHECK(std::fabs(f(0)) <= 1e-9);
  for (double x = 0.5; x <= 20.0; x += 0.5) CHECK(f(x) >= -1e-9);
  for (double x = -0.5; x >= -20.0; x -= 0.5) CHECK(f(x) <= 1e-9);
}

TEST_CASE("rejection sampler statistics") {
  Rng a(206), b(206);
  const VonMisesParams p_iso = make_params(2.0 * Mat3::identity());
  CHECK(max_abs_diff(sample(p_iso, a), sample(p_iso, b)) == 0.0);

  // J = 0 degenerates to Haar: first proposal accepted
  const VonMisesParams p0 = make_params(Mat3::zero());
  Rng c(207), d(207);
  CHECK(max_abs_diff(sample(p0, c), haar_sample(d)) == 0.0);

  Rng rng(208);
  const int n = 100000;
  double mean = 0, m2 = 0;
  for (int k = 1; k <= n; k++) {
    const Rotation s = sample(p_iso, rng);
    const double v = (2.0 / 3) * mat_dot(Mat3::identity(), s);
    const double delta = v - mean;
    mean += delta / k;
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / n / (n - 1));
  CHECK(std::fabs(mean - c1(2.0)) <= 4 * se);
}

TEST_CASE("sampler matches the first-moment matrix on a rotated ray") {
  Rng rng(209);
  const double alpha = 1.6;
  const Rotation lam = haar_sample(rng);
  const Mat3 j = alpha * lam;
  const Mat3 want = c1(alpha) * lam;

  const int n = 60000;
  Mat3 mean = Mat3::zero(), second = Mat3::zero();
  for (int k = 0; k < n; k++) {
    const Rotation s = sample_flux(j, rng);
    for (int r = 0; r < 3; r++)
      for (int c = 0; c < 3; c++) {
        mean.m[r][c] += s.m[r][c];
        second.m[r][c] += s.m[r][c] * s.m[r][c];
      }
  }
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++) {
      const double avg = mean.m[r][c] / n;
      const double se = std::sqrt((second.m[r][c] / n - avg * avg) / n);
      CHECK(std::fabs(avg - want.m[r][c]) <= 4 * se);
    }

  // cache-free path draws the same stream as the cached one
  Rng r1(210), r2(210);
  const VonMisesParams p = make_params(j);
  for (int k = 0; k < 5; k++)
    CHECK(max_abs_diff(sample(p, r1), sample_flux(j, r2)) == 0.0);
}
