// SPDX-License-Identifier: Apache-2.0
#include "grassq/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grassq/error.hpp"

namespace grassq {

FieldKind field_from_beta(int beta) {
  if (beta == 1) return FieldKind::Real;
  if (beta == 2) return FieldKind::Complex;
  throw DomainError("beta must be 1 (real) or 2 (complex), got " + std::to_string(beta));
}

const char* field_name(FieldKind f) noexcept { return f == FieldKind::Real ? "real" : "complex"; }

GrassmannSpec GrassmannSpec::make(int n, int p, FieldKind field) {
  if (p < 1 || p > n - 1) {
    throw DomainError("Grassmann spec requires 1 <= p <= n-1, got n=" + std::to_string(n) +
                      " p=" + std::to_string(p));
  }
  return GrassmannSpec{n, p, field};
}

namespace {

// Thin QR of `a` with column phases chosen so that diag(R) > 0.
Eigen::MatrixXd positive_qr(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix positive_qr(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const Complex r = qr.matrixQR()(j, j);
    const double mag = std::abs(r);
    if (mag > 0.0) q.col(j) *= r / mag;
  }
  return q;
}

Matrix haar_columns(int n, int p, FieldKind field, Rng& rng) {
  if (field == FieldKind::Real) {
    Eigen::MatrixXd g(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    return positive_qr(g).cast<Complex>();
  }
  Matrix g(n, p);
  const double s = std::sqrt(0.5);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(s * re, s * im);
    }
  return positive_qr(g);
}

void check_pair(const Plane& P, const Plane& Q) {
  if (P.ambient() != Q.ambient() || P.field() != Q.field()) {
    throw DimensionMismatch("planes live in different spaces: n=" + std::to_string(P.ambient()) +
                            "/" + field_name(P.field()) + " vs n=" +
                            std::to_string(Q.ambient()) + "/" + field_name(Q.field()));
  }
  if (P.dim() > Q.dim()) {
    throw OrderViolation("principal angles need dim(P) <= dim(Q), got " +
                         std::to_string(P.dim()) + " > " + std::to_string(Q.dim()));
  }
}

}  // namespace

Plane Plane::from_orthonormal(GrassmannSpec spec, Matrix basis) {
  spec = GrassmannSpec::make(spec.n, spec.p, spec.field);
  if (basis.rows() != spec.n || basis.cols() != spec.p) {
    throw DimensionMismatch("basis is " + std::to_string(basis.rows()) + "x" +
                            std::to_string(basis.cols()) + ", expected " +
                            std::to_string(spec.n) + "x" + std::to_string(spec.p));
  }
  if (!basis.allFinite()) throw OrthonormalityError("basis has non-finite entries");
  const double residual = (basis.adjoint() * basis - Matrix::Identity(spec.p, spec.p)).norm();
  if (residual > kTolOrtho) {
    throw OrthonormalityError("basis is not orthonormal: ||B^H B - I||_F = " +
                              std::to_string(residual));
  }
  if (spec.field == FieldKind::Real && basis.imag().cwiseAbs().maxCoeff() > 0.0) {
    throw DomainError("real plane has a basis with non-zero imaginary part");
  }
  return Plane(spec, std::move(basis));
}

Plane Plane::span_of(FieldKind field, const Matrix& columns) {
  const auto spec = GrassmannSpec::make(static_cast<int>(columns.rows()),
                                        static_cast<int>(columns.cols()), field);
  Matrix q;
  if (field == FieldKind::Real) {
    if (columns.imag().cwiseAbs().maxCoeff() > 0.0)
      throw DomainError("real span requested for complex columns");
    q = positive_qr(Eigen::MatrixXd(columns.real())).cast<Complex>();
  } else {
    q = positive_qr(columns);
  }
  const Eigen::JacobiSVD<Matrix> svd(columns);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw DomainError("columns are rank deficient");
  }
  return Plane(spec, std::move(q));
}

Plane Plane::coordinate(int n, int p, FieldKind field) {
  const auto spec = GrassmannSpec::make(n, p, field);
  return Plane(spec, Matrix::Identity(n, p));
}

Plane Plane::rotated(const Matrix& unitary) const {
  if (unitary.rows() != spec_.n || unitary.cols() != spec_.n)
    throw DimensionMismatch("rotation must be n x n");
  return from_orthonormal(spec_, unitary * basis_);
}

Plane Plane::rebased(const Matrix& unitary) const {
  if (unitary.rows() != spec_.p || unitary.cols() != spec_.p)
    throw DimensionMismatch("basis change must be p x p");
  return from_orthonormal(spec_, basis_ * unitary);
}

Plane sample_isotropic(const GrassmannSpec& spec, Rng& rng) {
  const auto checked = GrassmannSpec::make(spec.n, spec.p, spec.field);
  return Plane::from_orthonormal(checked, haar_columns(spec.n, spec.p, spec.field, rng));
}

Matrix random_unitary(int n, FieldKind field, Rng& rng) {
  if (n < 1) throw DomainError("random_unitary needs n >= 1");
  return haar_columns(n, n, field, rng);
}

PrincipalAngles principal_angles(const Plane& P, const Plane& Q) {
  check_pair(P, Q);
  const Matrix cross = P.basis().adjoint() * Q.basis();
  const Eigen::JacobiSVD<Matrix> svd(cross);
  PrincipalAngles out;
  out.cosines.reserve(P.dim());
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    out.cosines.push_back(c);
    out.sin_sq_sum += 1.0 - c * c;
  }
  // JacobiSVD already sorts in decreasing order; keep the invariant explicit.
  std::sort(out.cosines.begin(), out.cosines.end(), std::greater<>());
  return out;
}

double chordal_distance_sq(const Plane& P, const Plane& Q) {
  check_pair(P, Q);
  // Component of P outside Q; p - ||B_P^H B_Q||^2 cancels badly near zero.
  const Matrix coeff = Q.basis().adjoint() * P.basis();
  return (P.basis() - Q.basis() * coeff).squaredNorm();
}

double chordal_distance(const Plane& P, const Plane& Q) {
  return std::sqrt(chordal_distance_sq(P, Q));
}

double chordal_distance_sym(const Plane& A, const Plane& B) {
  return A.dim() <= B.dim() ? chordal_distance(A, B) : chordal_distance(B, A);
}

bool same_point(const Plane& P, const Plane& Q) {
  return P.dim() == Q.dim() && chordal_distance(P, Q) < kTolEq;
}

}  // namespace grassq
