// SPDX-License-Identifier: Apache-2.0
//
// Volume (invariant measure) of a chordal metric ball in G_{n,p}(L) whose
// center lies in G_{n,q}(L), p <= q.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grassq/manifold.hpp"
#include "grassq/rng.hpp"

namespace grassq {

/// Ball of chordal radius `radius` between G_{n,p} and G_{n,q}.
struct BallSpec {
  int n = 0;
  int p = 0;
  int q = 0;
  int beta = 1;
  double radius = 0.0;

  /// Throws DomainError unless 1 <= p <= q <= n-1, beta in {1,2} and
  /// 0 <= radius <= sqrt(p).
  static BallSpec make(int n, int p, int q, int beta, double radius);

  /// Exponent beta*p*(n-q) of the leading volume term.
  int exponent() const noexcept { return beta * p * (n - q); }
};

enum class VolumeMethod { ClosedForm, LowerBound, UpperBound, BargNogin, MonteCarlo };
const char* method_name(VolumeMethod m) noexcept;

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for closed-form values
  VolumeMethod method = VolumeMethod::ClosedForm;
  std::size_t samples = 0;  // MonteCarlo only
};

/// Which case formula of the leading coefficient to evaluate. `Auto` picks
/// the p+q <= n product when it applies.
enum class CoeffBranch { Auto, SmallCodim, LargeCodim };

/// log c_{n,p,q,beta}, a sum of log-gamma terms; finite for any valid input.
double log_coeff_c(int n, int p, int q, int beta, CoeffBranch branch = CoeffBranch::Auto);

/// Leading coefficient c_{n,p,q,beta} of the small-ball volume
///   mu(B(delta)) = c delta^{beta p (n-q)} (1 + c1 delta^2 + o(delta^2)).
/// Requesting a branch whose case (p+q <= n resp. p+q >= n) does not hold
/// throws DomainError.
double coeff_c(int n, int p, int q, int beta, CoeffBranch branch = CoeffBranch::Auto);

/// Second-order coefficient c1 = -(beta(q-p+1)/2 - 1) * a / (a + 1), a = beta p (n-q) / 2.
double coeff_c1(int n, int p, int q, int beta);

enum class VolumeOrder { Leading, WithCorrection };

/// c delta^t, optionally times (1 + c1 delta^2); clamped into [0, 1].
/// The o(delta^2) remainder is not modelled. RadiusTooLarge for delta > 1.
VolumeEstimate ball_volume_approx(const BallSpec& spec, VolumeOrder order = VolumeOrder::Leading);

struct VolumeBounds {
  VolumeEstimate lower;
  VolumeEstimate upper;
};

/// Two-sided volume bounds valid for delta <= 1; both clamped into [0, 1].
///  real, p == q : [c d^t, c d^t (1-d^2)^{-p/2}]
///  otherwise    : [(1-d^2)^{beta p (q-p+1)/2 - p} c d^t, c d^t]
VolumeBounds ball_volume_bounds(const BallSpec& spec);

/// Laplace-method approximation (delta / sqrt(p))^{beta n p} for p == q.
VolumeEstimate barg_nogin_approx(int n, int p, int beta, double delta);

/// Monte-Carlo estimate of mu(B(delta)): fraction of isotropic p-planes
/// within delta of span(e_1..e_q). Requires samples >= 1000.
VolumeEstimate ball_volume_mc(const BallSpec& spec, std::size_t samples, Rng& rng);

/// One draw of `samples` isotropic p-planes, thresholded at every radius in
/// `radii`. The estimates are non-decreasing in the radius.
std::vector<VolumeEstimate> ball_volume_mc_sweep(int n, int p, int q, int beta,
                                                 std::span<const double> radii,
                                                 std::size_t samples, Rng& rng);

/// Squared chordal distances of `samples` isotropic p-planes to span(e_1..e_q).
std::vector<double> sample_distances_sq(int n, int p, int q, int beta, std::size_t samples,
                                        Rng& rng);

}  // namespace grassq
