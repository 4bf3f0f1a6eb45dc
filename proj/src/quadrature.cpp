#include "bgkso3/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace bgkso3 {

void validate(const QuadratureConfig &cfg) {
  if (cfg.nodes_1d < 32)
    throw std::invalid_argument("QuadratureConfig: nodes_1d must be >= 32");
  if (cfg.nodes_s3 < 24)
    throw std::invalid_argument("QuadratureConfig: nodes_s3 must be >= 24");
}

static GaussLegendre make_gauss_legendre(int n) {
  GaussLegendre g;
  g.x.resize(n);
  g.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; i++) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; it++) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; j++) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; j++) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
    }
    pp = n * (x * p0 - p1) / (x * x - 1.0);
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return g;
}

const GaussLegendre &gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

namespace {

// Precomputed evaluation grid for the S^3 angles.
struct S3Grid {
  // psi1 (Gauss-Legendre on [0,pi], weight includes sin^2 psi1)
  std::vector<double> q1sq;  // cos^2 psi1
  std::vector<double> r1;    // sin^2 psi1
  std::vector<double> w1;
  // psi2 (Gauss-Legendre on [0,pi], weight includes sin psi2)
  std::vector<double> c2sq;  // cos^2 psi2
  std::vector<double> s2sq;  // sin^2 psi2
  std::vector<double> w2;
  // psi3 (trapezoid on [0,2pi)); only cos(2 psi3) enters, so equal values
  // are folded into classes with multiplicity weights
  std::vector<double> x3;
  std::vector<double> w3;
};

const S3Grid &s3_grid(int n) {
  static std::map<int, S3Grid> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  S3Grid g;
  const double pi = std::numbers::pi;
  const GaussLegendre &gl = gauss_legendre(n);
  g.q1sq.resize(n);
  g.r1.resize(n);
  g.w1.resize(n);
  g.c2sq.resize(n);
  g.s2sq.resize(n);
  g.w2.resize(n);
  for (int i = 0; i < n; i++) {
    const double psi = 0.5 * pi * (gl.x[i] + 1.0);
    const double c = std::cos(psi), s = std::sin(psi);
    g.q1sq[i] = c * c;
    g.r1[i] = s * s;
    g.w1[i] = 0.5 * pi * gl.w[i] * s * s;
    g.c2sq[i] = c * c;
    g.s2sq[i] = s * s;
    g.w2[i] = 0.5 * pi * gl.w[i] * s;
  }
  std::map<int, int> classes;
  for (int k = 0; k < n; k++) {
    const int r = (2 * k) % n;
    classes[std::min(r, n - r)]++;
  }
  for (const auto &[j, count] : classes) {
    g.x3.push_back(std::cos(2.0 * pi * j / n));
    g.w3.push_back(count * 2.0 * pi / n);
  }
  return cache.emplace(n, std::move(g)).first->second;
}

}  // namespace

BinghamMoments bingham_moments(const std::array<double, 4> &s,
                               const QuadratureConfig &cfg, bool with_second) {
  validate(cfg);
  for (double v : s)
    if (!std::isfinite(v))
      throw std::invalid_argument("bingham_moments: non-finite exponent");

  // Canonical slot order: sort descending, remember the placement.
  int ord[4] = {0, 1, 2, 3};
  std::stable_sort(ord, ord + 4, [&](int a, int b) { return s[a] > s[b]; });
  double ss[4];
  for (int k = 0; k < 4; k++) ss[k] = s[ord[k]];

  // Snap near-ties so symmetric inputs give identical canonical exponents.
  const double snap =
      32.0 * std::numeric_limits<double>::epsilon() *
      (std::fabs(ss[0]) + std::fabs(ss[1]) + std::fabs(ss[2]) + std::fabs(ss[3]));
  int group[4];
  group[0] = 0;
  for (int k = 1; k < 4; k++)
    group[k] = (ss[k - 1] - ss[k] <= snap) ? group[k - 1] : group[k - 1] + 1;
  for (int gstart = 0; gstart < 4;) {
    int gend = gstart;
    while (gend + 1 < 4 && group[gend + 1] == group[gstart]) gend++;
    if (gend > gstart) {
      double mean = 0;
      for (int k = gstart; k <= gend; k++) mean += ss[k];
      mean /= (gend - gstart + 1);
      for (int k = gstart; k <= gend; k++) ss[k] = mean;
    }
    gstart = gend + 1;
  }

  const S3Grid &g = s3_grid(cfg.nodes_s3);
  const double shift = 2.0 * ss[0];
  const double s34p = ss[2] + ss[3];
  const double s34m = ss[2] - ss[3];
  const int n = cfg.nodes_s3;
  const int nx = static_cast<int>(g.x3.size());

  double wx_sum = 0, wx_x = 0, wx_xx = 0;
  for (int c = 0; c < nx; c++) {
    wx_sum += g.w3[c];
    wx_x += g.w3[c] * g.x3[c];
    wx_xx += g.w3[c] * g.x3[c] * g.x3[c];
  }

  double z = 0, n1 = 0, n2 = 0, n3 = 0, n4 = 0;
  double q11 = 0, q12 = 0, q13 = 0, q14 = 0, q22 = 0, q23 = 0, q24 = 0;
  double q33 = 0, q34 = 0, q44 = 0;

  for (int i = 0; i < n; i++) {
    const double P1 = g.q1sq[i];
    const double r = g.r1[i];
    const double e1 = 2.0 * ss[0] * P1 - shift;
    for (int j = 0; j < n; j++) {
      const double P2 = r * g.c2sq[j];
      const double R = r * g.s2sq[j];
      const double a = e1 + 2.0 * ss[1] * P2 + s34p * R;
      const double b = s34m * R;
      double T0, T1, T2;
      if (b == 0.0) {
        const double e = std::exp(a);
        T0 = e * wx_sum;
        T1 = e * wx_x;
        T2 = e * wx_xx;
      } else {
        T0 = T1 = T2 = 0;
        for (int c = 0; c < nx; c++) {
          const double e = g.w3[c] * std::exp(a + b * g.x3[c]);
          T0 += e;
          T1 += e * g.x3[c];
          T2 += e * g.x3[c] * g.x3[c];
        }
      }
      const double w = g.w1[i] * g.w2[j];
      const double h0 = w * T0;
      const double hp = 0.5 * w * (T0 + T1);  // pairs with q3^2
      const double hm = 0.5 * w * (T0 - T1);  // pairs with q4^2
      z += h0;
      n1 += P1 * h0;
      n2 += P2 * h0;
      n3 += R * hp;
      n4 += R * hm;
      if (with_second) {
        q11 += P1 * P1 * h0;
        q12 += P1 * P2 * h0;
        q13 += P1 * R * hp;
        q14 += P1 * R * hm;
        q22 += P2 * P2 * h0;
        q23 += P2 * R * hp;
        q24 += P2 * R * hm;
        const double RR = 0.25 * R * R * w;
        q33 += RR * (T0 + 2.0 * T1 + T2);
        q34 += RR * (T0 - T2);
        q44 += RR * (T0 - 2.0 * T1 + T2);
      }
    }
  }

  if (!(z > 0) || !std::isfinite(z))
    throw std::runtime_error("bingham_moments: partition sum underflow");

  double ps[4] = {n1 / z, n2 / z, n3 / z, n4 / z};
  double pps[4][4] = {{q11 / z, q12 / z, q13 / z, q14 / z},
                      {q12 / z, q22 / z, q23 / z, q24 / z},
                      {q13 / z, q23 / z, q33 / z, q34 / z},
                      {q14 / z, q24 / z, q34 / z, q44 / z}};

  // Average tied slots: the exact moments are equal there, and enforcing the
  // equality keeps downstream sign-mirror identities exact.
  for (int a = 0; a < 4; a++) {
    int cnt = 0;
    double sum = 0;
    for (int b = 0; b < 4; b++)
      if (group[b] == group[a]) {
        cnt++;
        sum += ps[b];
      }
    if (cnt > 1) {
      const double mean = sum / cnt;
      for (int b = 0; b < 4; b++)
        if (group[b] == group[a]) ps[b] = mean;
    }
  }
  if (with_second) {
    double orbit_mean[4][4];
    for (int a = 0; a < 4; a++)
      for (int b = 0; b < 4; b++) {
        int cnt = 0;
        double sum = 0;
        for (int u = 0; u < 4; u++)
          for (int v = 0; v < 4; v++) {
            if (group[u] != group[a] || group[v] != group[b]) continue;
            if ((u == v) != (a == b)) continue;
            cnt++;
            sum += pps[u][v];
          }
        orbit_mean[a][b] = sum / cnt;
      }
    for (int a = 0; a < 4; a++)
      for (int b = 0; b < 4; b++) pps[a][b] = orbit_mean[a][b];
  }

  BinghamMoments out;
  out.with_second = with_second;
  out.log_z = shift + std::log(z / (2.0 * std::numbers::pi * std::numbers::pi));
  for (int k = 0; k < 4; k++) out.p[ord[k]] = ps[k];
  for (int a = 0; a < 4; a++)
    for (int b = 0; b < 4; b++)
      out.pp[ord[a]][ord[b]] = with_second ? pps[a][b] : 0.0;
  return out;
}

}  // namespace bgkso3
