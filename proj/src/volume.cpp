// SPDX-License-Identifier: Apache-2.0
#include "grassq/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grassq/error.hpp"
#include "grassq/parallel.hpp"

namespace grassq {

namespace {

constexpr std::size_t kMinSamples = 1000;
constexpr std::size_t kBlock = 4096;

void check_shape(int n, int p, int q, int beta) {
  if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2, got " + std::to_string(beta));
  if (p < 1 || p > q || q > n - 1) {
    throw DomainError("ball needs 1 <= p <= q <= n-1, got n=" + std::to_string(n) +
                      " p=" + std::to_string(p) + " q=" + std::to_string(q));
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_small_radius(const BallSpec& s) {
  if (s.radius > 1.0) {
    throw RadiusTooLarge("closed-form volume needs delta <= 1, got " + std::to_string(s.radius));
  }
}

// log(c delta^t) with the delta = 0 case mapped to -inf.
double log_leading(const BallSpec& s) {
  const double lc = log_coeff_c(s.n, s.p, s.q, s.beta);
  if (s.radius == 0.0) return -INFINITY;
  return lc + s.exponent() * std::log(s.radius);
}

VolumeEstimate closed(double value, VolumeMethod m) { return {clamp01(value), 0.0, m, 0}; }

}  // namespace

BallSpec BallSpec::make(int n, int p, int q, int beta, double radius) {
  check_shape(n, p, q, beta);
  if (!(radius >= 0.0) || radius > std::sqrt(static_cast<double>(p)) * (1.0 + 1e-12)) {
    throw DomainError("radius must lie in [0, sqrt(p)], got " + std::to_string(radius));
  }
  return BallSpec{n, p, q, beta, radius};
}

const char* method_name(VolumeMethod m) noexcept {
  switch (m) {
    case VolumeMethod::ClosedForm: return "closed_form";
    case VolumeMethod::LowerBound: return "lower_bound";
    case VolumeMethod::UpperBound: return "upper_bound";
    case VolumeMethod::BargNogin: return "barg_nogin";
    case VolumeMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

double log_coeff_c(int n, int p, int q, int beta, CoeffBranch branch) {
  check_shape(n, p, q, beta);
  const double h = 0.5 * beta;
  if (branch == CoeffBranch::Auto) {
    branch = p + q <= n ? CoeffBranch::SmallCodim : CoeffBranch::LargeCodim;
  }
  double acc = -std::lgamma(h * p * (n - q) + 1.0);
  if (branch == CoeffBranch::SmallCodim) {
    if (p + q > n) throw DomainError("p+q <= n branch requested with p+q > n");
    for (int i = 1; i <= p; ++i) acc += std::lgamma(h * (n - i + 1)) - std::lgamma(h * (q - i + 1));
  } else {
    if (p + q < n) throw DomainError("p+q >= n branch requested with p+q < n");
    for (int i = 1; i <= n - q; ++i)
      acc += std::lgamma(h * (n - i + 1)) - std::lgamma(h * (n - p - i + 1));
  }
  return acc;
}

double coeff_c(int n, int p, int q, int beta, CoeffBranch branch) {
  return std::exp(log_coeff_c(n, p, q, beta, branch));
}

double coeff_c1(int n, int p, int q, int beta) {
  check_shape(n, p, q, beta);
  const double h = 0.5 * beta;
  const double a = h * p * (n - q);
  return -(h * (q - p + 1) - 1.0) * a / (a + 1.0);
}

VolumeEstimate ball_volume_approx(const BallSpec& s, VolumeOrder order) {
  require_small_radius(s);
  double v = std::exp(log_leading(s));
  if (order == VolumeOrder::WithCorrection) {
    v *= 1.0 + coeff_c1(s.n, s.p, s.q, s.beta) * s.radius * s.radius;
  }
  return closed(v, VolumeMethod::ClosedForm);
}

VolumeBounds ball_volume_bounds(const BallSpec& s) {
  require_small_radius(s);
  const double lead = log_leading(s);
  const double log_shrink = std::log1p(-s.radius * s.radius);  // -inf at delta = 1
  VolumeBounds out;
  if (s.beta == 1 && s.p == s.q) {
    out.lower = closed(std::exp(lead), VolumeMethod::LowerBound);
    out.upper = closed(std::exp(lead - 0.5 * s.p * log_shrink), VolumeMethod::UpperBound);
  } else {
    const double e = 0.5 * s.beta * s.p * (s.q - s.p + 1) - s.p;
    const double lo = e == 0.0 ? lead : lead + e * log_shrink;
    out.lower = closed(std::exp(lo), VolumeMethod::LowerBound);
    out.upper = closed(std::exp(lead), VolumeMethod::UpperBound);
  }
  return out;
}

VolumeEstimate barg_nogin_approx(int n, int p, int beta, double delta) {
  check_shape(n, p, p, beta);
  if (!(delta >= 0.0)) throw DomainError("radius must be non-negative");
  const double v = std::pow(delta / std::sqrt(static_cast<double>(p)),
                            static_cast<double>(beta) * n * p);
  return closed(v, VolumeMethod::BargNogin);
}

std::vector<double> sample_distances_sq(int n, int p, int q, int beta, std::size_t samples,
                                        Rng& rng) {
  check_shape(n, p, q, beta);
  const auto spec = GrassmannSpec::make(n, p, field_from_beta(beta));
  const auto blocks = make_blocks(samples, kBlock);
  const std::uint64_t base = rng.next_u64();
  std::vector<double> out(samples);
  parallel_for(blocks.size(), [&](std::size_t b) {
    Rng local(sub_seed(base, b));
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
      const Plane P = sample_isotropic(spec, local);
      // Center span(e_1..e_q): overlap is the mass of the first q rows.
      const double overlap = P.basis().topRows(q).squaredNorm();
      out[i] = std::max(0.0, p - overlap);
    }
  });
  return out;
}

std::vector<VolumeEstimate> ball_volume_mc_sweep(int n, int p, int q, int beta,
                                                 std::span<const double> radii,
                                                 std::size_t samples, Rng& rng) {
  check_shape(n, p, q, beta);
  if (samples < kMinSamples) {
    throw DomainError("Monte-Carlo volume needs at least 1000 samples, got " +
                      std::to_string(samples));
  }
  for (double r : radii) BallSpec::make(n, p, q, beta, r);

  auto d2 = sample_distances_sq(n, p, q, beta, samples, rng);
  std::sort(d2.begin(), d2.end());
  std::vector<VolumeEstimate> out;
  out.reserve(radii.size());
  const double m = static_cast<double>(samples);
  for (double r : radii) {
    const auto hits = std::upper_bound(d2.begin(), d2.end(), r * r) - d2.begin();
    const double v = static_cast<double>(hits) / m;
    out.push_back({v, std::sqrt(v * (1.0 - v) / m), VolumeMethod::MonteCarlo, samples});
  }
  return out;
}

VolumeEstimate ball_volume_mc(const BallSpec& s, std::size_t samples, Rng& rng) {
  const double r[] = {s.radius};
  return ball_volume_mc_sweep(s.n, s.p, s.q, s.beta, r, samples, rng).front();
}

}  // namespace grassq
