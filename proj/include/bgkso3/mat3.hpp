#pragma once

#include <array>
#include <cmath>

namespace bgkso3 {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

struct Mat3 {
  double m[3][3];

  static Mat3 zero() { return Mat3{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }
  static Mat3 identity() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }
  static Mat3 diag(double a, double b, double c) {
    return Mat3{{{a, 0, 0}, {0, b, 0}, {0, 0, c}}};
  }
  static Mat3 diag(const Vec3 &d) { return diag(d[0], d[1], d[2]); }
};

// Rotation matrices and flux matrices are plain Mat3; validity is checked
// where it matters, not enforced by the type.
using Rotation = Mat3;
using FluxMatrix = Mat3;
using DiagTriple = Vec3;

inline Mat3 operator+(const Mat3 &a, const Mat3 &b) {
  Mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.m[i][j] = a.m[i][j] + b.m[i][j];
  return r;
}

inline Mat3 operator-(const Mat3 &a, const Mat3 &b) {
  Mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.m[i][j] = a.m[i][j] - b.m[i][j];
  return r;
}

inline Mat3 operator*(double s, const Mat3 &a) {
  Mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.m[i][j] = s * a.m[i][j];
  return r;
}

inline Mat3 matmul(const Mat3 &a, const Mat3 &b) {
  Mat3 r = Mat3::zero();
  for (int i = 0; i < 3; i++)
    for (int k = 0; k < 3; k++) {
      const double aik = a.m[i][k];
      for (int j = 0; j < 3; j++) r.m[i][j] += aik * b.m[k][j];
    }
  return r;
}

inline Mat3 transpose(const Mat3 &a) {
  Mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.m[i][j] = a.m[j][i];
  return r;
}

inline double trace(const Mat3 &a) { return a.m[0][0] + a.m[1][1] + a.m[2][2]; }

inline double det3(const Mat3 &a) {
  return a.m[0][0] * (a.m[1][1] * a.m[2][2] - a.m[1][2] * a.m[2][1]) -
         a.m[0][1] * (a.m[1][0] * a.m[2][2] - a.m[1][2] * a.m[2][0]) +
         a.m[0][2] * (a.m[1][0] * a.m[2][1] - a.m[1][1] * a.m[2][0]);
}

inline double frobenius_norm(const Mat3 &a) {
  double s = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) s += a.m[i][j] * a.m[i][j];
  return std::sqrt(s);
}

inline double max_abs_diff(const Mat3 &a, const Mat3 &b) {
  double s = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) s = std::max(s, std::fabs(a.m[i][j] - b.m[i][j]));
  return s;
}

inline Vec3 matvec(const Mat3 &a, const Vec3 &v) {
  Vec3 r;
  for (int i = 0; i < 3; i++)
    r[i] = a.m[i][0] * v[0] + a.m[i][1] * v[1] + a.m[i][2] * v[2];
  return r;
}

inline double dot3(const Vec3 &a, const Vec3 &b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm3(const Vec3 &a) { return std::sqrt(dot3(a, a)); }

inline Vec3 cross3(const Vec3 &a, const Vec3 &b) {
  return Vec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
              a[0] * b[1] - a[1] * b[0]};
}

}  // namespace bgkso3
