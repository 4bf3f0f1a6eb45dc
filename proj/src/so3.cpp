#include "bgkso3/so3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgkso3 {

Rotation rodrigues(double theta, const Vec3 &axis) {
  const double n = norm3(axis);
  if (std::fabs(n - 1.0) > 1e-10)
    throw std::invalid_argument("rodrigues: axis must be unit length");
  const double c = std::cos(theta), s = std::sin(theta);
  const double omc = 1.0 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  Rotation A;
  A.m[0][0] = c + omc * x * x;
  A.m[0][1] = omc * x * y - s * z;
  A.m[0][2] = omc * x * z + s * y;
  A.m[1][0] = omc * x * y + s * z;
  A.m[1][1] = c + omc * y * y;
  A.m[1][2] = omc * y * z - s * x;
  A.m[2][0] = omc * x * z - s * y;
  A.m[2][1] = omc * y * z + s * x;
  A.m[2][2] = c + omc * z * z;
  return A;
}

double rotation_defect(const Mat3 &A) {
  Mat3 G = matmul(transpose(A), A);
  double worst = std::fabs(det3(A) - 1.0);
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      worst = std::max(worst, std::fabs(G.m[i][j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

AxisAngle axis_angle(const Rotation &A) {
  if (rotation_defect(A) > 1e-9)
    throw std::invalid_argument("axis_angle: input is not a rotation");
  const double c = std::clamp(0.5 * (trace(A) - 1.0), -1.0, 1.0);

  // Twice the dual vector of the skew part; length 2 sin(theta).
  const Vec3 w{A.m[2][1] - A.m[1][2], A.m[0][2] - A.m[2][0],
               A.m[1][0] - A.m[0][1]};
  // atan2 keeps theta well conditioned where acos(c) blows up (c near +-1).
  const double theta = std::atan2(0.5 * norm3(w), c);
  if (theta < 1e-8) return AxisAngle{theta, Vec3{1, 0, 0}, true};

  Vec3 axis;
  if (theta < 2.3) {
    axis = w;
  } else {
    // Near pi the skew part degenerates; take the axis from the symmetric
    // part A + A^T = 2 c I + 2(1-c) n n^T and sign it with the skew part.
    const double omc = 1.0 - c;
    Mat3 N;
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++)
        N.m[i][j] =
            (0.5 * (A.m[i][j] + A.m[j][i]) - (i == j ? c : 0.0)) / omc;
    int k = 0;
    if (N.m[1][1] > N.m[k][k]) k = 1;
    if (N.m[2][2] > N.m[k][k]) k = 2;
    axis = Vec3{N.m[0][k], N.m[1][k], N.m[2][k]};
    const double nk = std::sqrt(std::max(N.m[k][k], 0.0));
    if (nk > 0)
      for (double &v : axis) v /= nk;
    double sgn = 0;
    for (int i = 0; i < 3; i++)
      if (std::fabs(w[i]) > 1e-12 && std::fabs(axis[i]) > 0.5) {
        sgn = (w[i] > 0) == (axis[i] > 0) ? 1.0 : -1.0;
        break;
      }
    if (sgn == 0) {
      // theta == pi to machine precision: sign is conventional.
      sgn = 1.0;
      for (int i = 0; i < 3; i++) {
        if (std::fabs(axis[i]) > 1e-6) {
          if (axis[i] < 0) sgn = -1.0;
          break;
        }
      }
    }
    for (double &v : axis) v *= sgn;
  }
  const double len = norm3(axis);
  for (double &v : axis) v /= len;
  return AxisAngle{theta, axis, false};
}

Rotation quat_to_rot(const Vec4 &q) {
  const double n =
      std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::fabs(n - 1.0) > 1e-10)
    throw std::invalid_argument("quat_to_rot: quaternion must be unit length");
  const double x = q[0], y = q[1], z = q[2], t = q[3];
  Rotation A;
  A.m[0][0] = x * x + y * y - z * z - t * t;
  A.m[0][1] = 2 * (y * z - x * t);
  A.m[0][2] = 2 * (x * z + y * t);
  A.m[1][0] = 2 * (x * t + y * z);
  A.m[1][1] = x * x - y * y + z * z - t * t;
  A.m[1][2] = 2 * (z * t - x * y);
  A.m[2][0] = 2 * (y * t - x * z);
  A.m[2][1] = 2 * (x * y + z * t);
  A.m[2][2] = x * x - y * y - z * z + t * t;
  return A;
}

Vec4 rot_to_quat(const Rotation &A) {
  if (rotation_defect(A) > 1e-9)
    throw std::invalid_argument("rot_to_quat: input is not a rotation");
  const double tr = trace(A);
  Vec4 q;
  // Shepperd's method: pick the largest of the four squared components.
  const double xx = 1.0 + tr;
  const double yy = 1.0 + A.m[0][0] - A.m[1][1] - A.m[2][2];
  const double zz = 1.0 - A.m[0][0] + A.m[1][1] - A.m[2][2];
  const double tt = 1.0 - A.m[0][0] - A.m[1][1] + A.m[2][2];
  int k = 0;
  double best = xx;
  if (yy > best) { best = yy; k = 1; }
  if (zz > best) { best = zz; k = 2; }
  if (tt > best) { best = tt; k = 3; }
  switch (k) {
    case 0: {
      const double r = 0.5 * std::sqrt(xx);
      q[0] = r;
      q[1] = (A.m[2][1] - A.m[1][2]) / (4 * r);
      q[2] = (A.m[0][2] - A.m[2][0]) / (4 * r);
      q[3] = (A.m[1][0] - A.m[0][1]) / (4 * r);
      break;
    }
    case 1: {
      const double r = 0.5 * std::sqrt(yy);
      q[1] = r;
      q[0] = (A.m[2][1] - A.m[1][2]) / (4 * r);
      q[2] = (A.m[0][1] + A.m[1][0]) / (4 * r);
      q[3] = (A.m[0][2] + A.m[2][0]) / (4 * r);
      break;
    }
    case 2: {
      const double r = 0.5 * std::sqrt(zz);
      q[2] = r;
      q[0] = (A.m[0][2] - A.m[2][0]) / (4 * r);
      q[1] = (A.m[0][1] + A.m[1][0]) / (4 * r);
      q[3] = (A.m[1][2] + A.m[2][1]) / (4 * r);
      break;
    }
    default: {
      const double r = 0.5 * std::sqrt(tt);
      q[3] = r;
      q[0] = (A.m[1][0] - A.m[0][1]) / (4 * r);
      q[1] = (A.m[0][2] + A.m[2][0]) / (4 * r);
      q[2] = (A.m[1][2] + A.m[2][1]) / (4 * r);
      break;
    }
  }
  double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double &v : q) v /= n;
  // Canonical representative of {q, -q}: first component above noise positive.
  for (int i = 0; i < 4; i++) {
    if (std::fabs(q[i]) > 1e-12) {
      if (q[i] < 0)
        for (double &v : q) v = -v;
      break;
    }
  }
  return q;
}

Sym4 phi_map(const Mat3 &J) {
  Sym4 S;
  const auto &m = J.m;
  S.at(0, 0) = 0.25 * (m[0][0] + m[1][1] + m[2][2]);
  S.at(0, 1) = 0.25 * (m[2][1] - m[1][2]);
  S.at(0, 2) = 0.25 * (m[0][2] - m[2][0]);
  S.at(0, 3) = 0.25 * (m[1][0] - m[0][1]);
  S.at(1, 1) = 0.25 * (m[0][0] - m[1][1] - m[2][2]);
  S.at(1, 2) = 0.25 * (m[0][1] + m[1][0]);
  S.at(1, 3) = 0.25 * (m[0][2] + m[2][0]);
  S.at(2, 2) = 0.25 * (-m[0][0] + m[1][1] - m[2][2]);
  S.at(2, 3) = 0.25 * (m[1][2] + m[2][1]);
  S.at(3, 3) = 0.25 * (-m[0][0] - m[1][1] + m[2][2]);
  return S;
}

Mat3 phi_inverse(const Sym4 &S, bool require_diagonal) {
  Mat3 J;
  const double s00 = S.at(0, 0);
  J.m[0][0] = 2 * (s00 + S.at(1, 1));
  J.m[1][1] = 2 * (s00 + S.at(2, 2));
  J.m[2][2] = 2 * (s00 + S.at(3, 3));
  if (require_diagonal) {
    J.m[0][1] = J.m[0][2] = J.m[1][0] = J.m[1][2] = J.m[2][0] = J.m[2][1] = 0;
    return J;
  }
  J.m[1][0] = 2 * (S.at(1, 2) + S.at(0, 3));
  J.m[0][1] = 2 * (S.at(1, 2) - S.at(0, 3));
  J.m[0][2] = 2 * (S.at(1, 3) + S.at(0, 2));
  J.m[2][0] = 2 * (S.at(1, 3) - S.at(0, 2));
  J.m[2][1] = 2 * (S.at(2, 3) + S.at(0, 1));
  J.m[1][2] = 2 * (S.at(2, 3) - S.at(0, 1));
  return J;
}

void sym3_eigen(const Mat3 &S, Vec3 &eval, Mat3 &evec) {
  double a[3][3];
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) a[i][j] = S.m[i][j];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  double scale = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) scale = std::max(scale, std::fabs(a[i][j]));
  if (scale == 0) scale = 1;

  for (int sweep = 0; sweep < 60; sweep++) {
    double off = std::fabs(a[0][1]) + std::fabs(a[0][2]) + std::fabs(a[1][2]);
    if (off <= 1e-14 * scale) break;
    for (int p = 0; p < 2; p++)
      for (int q = p + 1; q < 3; q++) {
        if (std::fabs(a[p][q]) <= 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double apq = a[p][q];
        a[p][p] -= t * apq;
        a[q][q] += t * apq;
        a[p][q] = a[q][p] = 0;
        for (int r = 0; r < 3; r++) {
          if (r != p && r != q) {
            const double arp = a[r][p], arq = a[r][q];
            a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
            a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
          }
          const double vrp = v[r][p], vrq = v[r][q];
          v[r][p] = vrp - s * (vrq + tau * vrp);
          v[r][q] = vrq + s * (vrp - tau * vrq);
        }
      }
  }

  int idx[3] = {0, 1, 2};
  std::sort(idx, idx + 3,
            [&](int i, int j) { return a[i][i] < a[j][j]; });
  for (int k = 0; k < 3; k++) {
    eval[k] = a[idx[k]][idx[k]];
    for (int r = 0; r < 3; r++) evec.m[r][k] = v[r][idx[k]];
  }
}

SsvdResult ssvd(const Mat3 &M) {
  // One-sided Jacobi: orthogonalize the columns of B = M V by right rotations.
  // Unlike the normal-matrix route this keeps small singular values accurate
  // relative to themselves, which rank-deficient inputs need.
  Vec3 bcol[3], vcol[3];
  for (int k = 0; k < 3; k++)
    for (int r = 0; r < 3; r++) {
      bcol[k][r] = M.m[r][k];
      vcol[k][r] = (r == k) ? 1.0 : 0.0;
    }
  for (int sweep = 0; sweep < 60; sweep++) {
    bool rotated = false;
    for (int p = 0; p < 2; p++)
      for (int q = p + 1; q < 3; q++) {
        const double a = dot3(bcol[p], bcol[p]);
        const double b = dot3(bcol[q], bcol[q]);
        const double c = dot3(bcol[p], bcol[q]);
        if (std::fabs(c) <= 1e-15 * std::sqrt(a * b) || c == 0) continue;
        rotated = true;
        const double zeta = (b - a) / (2 * c);
        const double t =
            (zeta >= 0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::hypot(1.0, zeta));
        const double cs = 1.0 / std::hypot(1.0, t);
        const double sn = cs * t;
        for (int r = 0; r < 3; r++) {
          const double bp = bcol[p][r], bq = bcol[q][r];
          bcol[p][r] = cs * bp - sn * bq;
          bcol[q][r] = sn * bp + cs * bq;
          const double vp = vcol[p][r], vq = vcol[q][r];
          vcol[p][r] = cs * vp - sn * vq;
          vcol[q][r] = sn * vp + cs * vq;
        }
      }
    if (!rotated) break;
  }

  double sig[3];
  for (int k = 0; k < 3; k++) sig[k] = norm3(bcol[k]);
  for (int i = 0; i < 2; i++)
    for (int j = 0; j < 2 - i; j++)
      if (sig[j] < sig[j + 1]) {
        std::swap(sig[j], sig[j + 1]);
        std::swap(bcol[j], bcol[j + 1]);
        std::swap(vcol[j], vcol[j + 1]);
      }
  // Right-handed V; the paired flip keeps B = M V.
  if (dot3(cross3(vcol[0], vcol[1]), vcol[2]) < 0)
    for (int r = 0; r < 3; r++) {
      vcol[2][r] = -vcol[2][r];
      bcol[2][r] = -bcol[2][r];
    }

  const double tol = std::max(sig[0] * 1e-13, 1e-300);
  Vec3 ucol[3];
  int rank = 0;
  for (int k = 0; k < 3; k++)
    if (sig[k] > tol) rank = k + 1;

  for (int k = 0; k < rank; k++) {
    for (int r = 0; r < 3; r++) ucol[k][r] = bcol[k][r] / sig[k];
    for (int j = 0; j < k; j++) {
      const double d = dot3(ucol[k], ucol[j]);
      for (int r = 0; r < 3; r++) ucol[k][r] -= d * ucol[j][r];
    }
    const double n = norm3(ucol[k]);
    for (int r = 0; r < 3; r++) ucol[k][r] /= n;
  }
  if (rank == 0) {
    ucol[0] = Vec3{1, 0, 0};
    ucol[1] = Vec3{0, 1, 0};
  } else if (rank == 1) {
    // Any completion; orthogonality is all that matters at zero singular value.
    int k = std::fabs(ucol[0][0]) < 0.9 ? 0 : 1;
    Vec3 e{0, 0, 0};
    e[k] = 1;
    ucol[1] = cross3(ucol[0], e);
    const double n = norm3(ucol[1]);
    for (int r = 0; r < 3; r++) ucol[1][r] /= n;
  }
  if (rank < 3) ucol[2] = cross3(ucol[0], ucol[1]);

  Mat3 U;
  for (int k = 0; k < 3; k++)
    for (int r = 0; r < 3; r++) U.m[r][k] = ucol[k][r];

  DiagTriple D{sig[0], sig[1], sig[2]};
  // det U = sign(det M) when det V = +1; fold any reflection into d3 so that
  // both factors land in SO(3) and sign(d3) = sign(det M).
  if (det3(U) < 0) {
    for (int r = 0; r < 3; r++) U.m[r][2] = -U.m[r][2];
    D[2] = -D[2];
  }
  Mat3 Q;
  for (int k = 0; k < 3; k++)
    for (int r = 0; r < 3; r++) Q.m[k][r] = vcol[k][r];
  return SsvdResult{U, D, Q};
}

Mat3 polar_rotation(const Mat3 &M) {
  if (std::fabs(det3(M)) <= 1e-12)
    throw std::invalid_argument("polar_rotation: matrix is singular");
  const SsvdResult f = ssvd(M);
  Mat3 R = matmul(f.P, f.Q);
  if (f.D[2] < 0) {
    // M (M^T M)^{-1/2} = U V^T carries the reflection when det M < 0.
    Mat3 flip = Mat3::diag(1, 1, -1);
    R = matmul(matmul(f.P, flip), f.Q);
  }
  return R;
}

Rotation haar_sample(Rng &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec4 q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
    const double n =
        std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (n < 1e-8) continue;
    for (double &v : q) v /= n;
    return quat_to_rot(q);
  }
}

bool horn_check(const Vec3 &d, double tol) {
  const double x = d[0], y = d[1], z = d[2];
  const double b = -1.0 - tol;
  return (x + y + z >= b) && (x - y - z >= b) && (-x + y - z >= b) &&
         (-x - y + z >= b);
}

}  // namespace bgkso3
