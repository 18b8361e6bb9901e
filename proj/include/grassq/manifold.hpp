// SPDX-License-Identifier: Apache-2.0
//
// Points of the Grassmann manifold G_{n,p}(L), L = R or C, with the
// chordal (projection Frobenius) metric and the invariant measure.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "grassq/rng.hpp"

namespace grassq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Residual bound on ||B^H B - I||_F for a stored basis.
inline constexpr double kTolOrtho = 1e-10;
/// Two planes closer than this (chordal) are the same point.
inline constexpr double kTolEq = 1e-9;

enum class FieldKind { Real, Complex };

/// 1 for the reals, 2 for the complex numbers.
constexpr int beta_of(FieldKind f) noexcept { return f == FieldKind::Real ? 1 : 2; }
FieldKind field_from_beta(int beta);
const char* field_name(FieldKind f) noexcept;

/// Identifies G_{n,p}(L). Construct through `make` to get validation.
struct GrassmannSpec {
  int n = 0;
  int p = 0;
  FieldKind field = FieldKind::Real;

  /// Throws DomainError unless 1 <= p <= n - 1.
  static GrassmannSpec make(int n, int p, FieldKind field);

  int beta() const noexcept { return beta_of(field); }
  int real_dimension() const noexcept { return beta() * p * (n - p); }
  friend bool operator==(const GrassmannSpec&, const GrassmannSpec&) = default;
};

/// A p-dimensional subspace of L^n held as an n x p orthonormal basis.
/// Bases that differ by a right p x p unitary factor are the same point.
/// Real planes are stored with an identically zero imaginary part.
class Plane {
 public:
  /// Adopts `basis` as-is after checking orthonormality (OrthonormalityError)
  /// and, for real planes, that the imaginary part vanishes (DomainError).
  static Plane from_orthonormal(GrassmannSpec spec, Matrix basis);

  /// Span of the columns of an arbitrary full-column-rank matrix.
  static Plane span_of(FieldKind field, const Matrix& columns);

  /// span(e_1, ..., e_p).
  static Plane coordinate(int n, int p, FieldKind field);

  const GrassmannSpec& spec() const noexcept { return spec_; }
  const Matrix& basis() const noexcept { return basis_; }
  int dim() const noexcept { return spec_.p; }
  int ambient() const noexcept { return spec_.n; }
  FieldKind field() const noexcept { return spec_.field; }

  /// The image A·P under an n x n unitary (orthogonal, for real planes) A.
  Plane rotated(const Matrix& unitary) const;
  /// The same point with basis B·U for a p x p unitary U.
  Plane rebased(const Matrix& unitary) const;

  /// n x n orthogonal projector B B^H.
  Matrix projector() const { return basis_ * basis_.adjoint(); }

 private:
  Plane(GrassmannSpec spec, Matrix basis) : spec_(spec), basis_(std::move(basis)) {}

  GrassmannSpec spec_;
  Matrix basis_;
};

/// Cosines of the min(p, q) principal angles, non-increasing, each in [0, 1].
struct PrincipalAngles {
  std::vector<double> cosines;
  double sin_sq_sum = 0.0;
};

/// Draw from the invariant (Haar) distribution on G_{n,p}(L): QR of an i.i.d.
/// Gaussian matrix with the phases of diag(R) moved into Q.
Plane sample_isotropic(const GrassmannSpec& spec, Rng& rng);

/// Haar-distributed n x n orthogonal (Real) or unitary (Complex) matrix.
Matrix random_unitary(int n, FieldKind field, Rng& rng);

/// Singular values of B_P^H B_Q, clamped into [0, 1].
/// Requires dim(P) <= dim(Q) (OrderViolation) and matching n and field
/// (DimensionMismatch).
PrincipalAngles principal_angles(const Plane& P, const Plane& Q);

/// sqrt(dim(P) - ||B_P^H B_Q||_F^2). Same preconditions as principal_angles.
double chordal_distance(const Plane& P, const Plane& Q);
double chordal_distance_sq(const Plane& P, const Plane& Q);

/// Chordal distance with the lower-dimensional plane placed first.
double chordal_distance_sym(const Plane& A, const Plane& B);

/// True when P and Q have the same dimension and lie within kTolEq.
bool same_point(const Plane& P, const Plane& Q);

}  // namespace grassq
