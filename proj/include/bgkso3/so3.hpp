#pragma once

#include <cstdint>
#include <random>

#include "bgkso3/mat3.hpp"

namespace bgkso3 {

using Rng = std::mt19937_64;

// Symmetric 4x4 matrix, upper triangle stored row-major (10 entries).
struct Sym4 {
  double s[10];

  static constexpr int index(int i, int j) {
    return (i <= j) ? i * 4 + j - i * (i + 1) / 2 : j * 4 + i - j * (j + 1) / 2;
  }
  double at(int i, int j) const { return s[index(i, j)]; }
  double &at(int i, int j) { return s[index(i, j)]; }
};

struct AxisAngle {
  double theta;
  Vec3 axis;
  bool degenerate;  // true when theta < 1e-8 and the axis is conventional
};

struct SsvdResult {
  Rotation P;
  DiagTriple D;  // d1 >= d2 >= |d3|, sign(d3) = sign(det M)
  Rotation Q;
};

// Matrix inner product (1/2) tr(A^T B); rotations have squared norm 3/2.
inline double mat_dot(const Mat3 &a, const Mat3 &b) {
  double s = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) s += a.m[i][j] * b.m[i][j];
  return 0.5 * s;
}

Rotation rodrigues(double theta, const Vec3 &axis);
AxisAngle axis_angle(const Rotation &A);

Rotation quat_to_rot(const Vec4 &q);
Vec4 rot_to_quat(const Rotation &A);

Sym4 phi_map(const Mat3 &J);
Mat3 phi_inverse(const Sym4 &S, bool require_diagonal = false);

SsvdResult ssvd(const Mat3 &M);
Mat3 polar_rotation(const Mat3 &M);

Rotation haar_sample(Rng &rng);

bool horn_check(const Vec3 &d, double tol = 1e-10);

// Largest deviation of A from SO(3): orthogonality residual and det - 1.
double rotation_defect(const Mat3 &A);

// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
// symmetric 3x3 matrix, by cyclic Jacobi rotations.
void sym3_eigen(const Mat3 &S, Vec3 &eval, Mat3 &evec);

}  // namespace bgkso3
