// SPDX-License-Identifier: Apache-2.0
//
// Unequal-dimensional quantization: sources in G_{n,p}(L), codewords in
// G_{n,q}(L), distortion = squared chordal distance.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grassq/manifold.hpp"
#include "grassq/report.hpp"
#include "grassq/rng.hpp"

namespace grassq {

enum class ProvenanceKind { Random, MaxMin, Loaded };
const char* provenance_name(ProvenanceKind k) noexcept;

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Random;
  std::uint64_t seed = 0;      // stream that regenerates the codebook
  std::vector<double> trace;   // MaxMin: training distortion per round (round 0 = greedy)
  std::string path;            // Loaded: source file
};

/// K planes in G_{n,q}(L) used to quantize sources from G_{n,p}(L).
/// p and q may be in either order; distances are taken with the smaller
/// dimension first. Immutable after construction.
class Codebook {
 public:
  /// Checks that source and code specs share n and the field (SpecMismatch),
  /// K >= 1 (DomainError), every entry matches `code` (SpecMismatch) and no
  /// two entries coincide (DuplicateEntry).
  static Codebook create(GrassmannSpec source, GrassmannSpec code, std::vector<Plane> entries,
                         Provenance provenance);

  const GrassmannSpec& source_spec() const noexcept { return source_; }
  const GrassmannSpec& code_spec() const noexcept { return code_; }
  const std::vector<Plane>& entries() const noexcept { return entries_; }
  const Plane& operator[](std::size_t i) const { return entries_.at(i); }
  std::size_t size() const noexcept { return entries_.size(); }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// All bases side by side, n x (K q).
  const Matrix& packed() const noexcept { return packed_; }

 private:
  Codebook() = default;

  GrassmannSpec source_;
  GrassmannSpec code_;
  std::vector<Plane> entries_;
  Provenance provenance_;
  Matrix packed_;
};

/// Indices (i, j), i < j, of some pair of entries closer than kTolEq, if any.
/// Entries must share one spec. Runs in roughly O(K log K).
std::optional<std::pair<std::size_t, std::size_t>> find_duplicate(std::span<const Plane> entries);

struct QuantizeResult {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Nearest codeword in chordal distance; ties go to the lowest index.
/// SpecMismatch unless P lives in the codebook's source space.
QuantizeResult quantize(const Plane& P, const Codebook& C);

struct Assignment {
  std::size_t index = 0;
  double distance_sq = 0.0;
};

/// Batched `quantize` returning squared distances.
std::vector<Assignment> quantize_many(std::span<const Plane> sources, const Codebook& C);

struct DistortionEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo D(C) = E_P[min_k d_c^2(P, Q_k)] over isotropic P. samples >= 1000.
DistortionEstimate distortion_mc(const Codebook& C, std::size_t samples, Rng& rng);

/// K independent isotropic codewords. Consumes one value from `rng`, which
/// becomes the provenance seed.
Codebook random_codebook(const GrassmannSpec& source, const GrassmannSpec& code, std::size_t K,
                         Rng& rng);
Codebook random_codebook_from_seed(const GrassmannSpec& source, const GrassmannSpec& code,
                                   std::size_t K, std::uint64_t seed);

struct MaxMinOptions {
  std::size_t pool = 256;               // candidates per greedy step
  std::size_t training_samples = 10000;
};

/// Greedy farthest-point initialization followed by `iters` Lloyd rounds with
/// dominant-eigenspace centroids; returns the codebook with the lowest
/// training distortion seen. Requires K >= 2.
Codebook design_maxmin(const GrassmannSpec& source, const GrassmannSpec& code, std::size_t K,
                       Rng& rng, int iters, const MaxMinOptions& options = {});
Codebook design_maxmin_from_seed(const GrassmannSpec& source, const GrassmannSpec& code,
                                 std::size_t K, std::uint64_t seed, int iters,
                                 const MaxMinOptions& options = {});

/// Smallest pairwise chordal distance between codewords (0 for K = 1).
double min_pairwise_distance(const Codebook& C);

/// lower <= upper; regime_ok reports whether the asymptotic precondition holds.
struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
  bool regime_ok = false;
};

/// Main-order bounds on the distortion rate function D*(K), t = beta p (n-q):
///   lower = t/(t+2) (cK)^{-2/t},  upper = 2 Gamma(2/t)/t (cK)^{-2/t}.
/// The (1+o(1)) factors are taken as exactly 1. regime_ok iff (cK)^{-2/t} <= 1.
/// Requires 1 <= p <= q <= n-1 and K >= 1.
BoundPair drf_bounds(int n, int p, int q, int beta, double K);

/// Main-order bounds on the rate distortion function K*(D), for 0 < D <= 1:
///   lower = (1/c) ((t+2) D / t)^{-t/2},  upper = (1/c) (t D / (2 Gamma(2/t)))^{-t/2}.
/// Exact algebraic inverses of the drf_bounds maps.
BoundPair rdf_bounds(int n, int p, int q, int beta, double D);

/// Limit of D*(K) as n, log2 K -> infinity with log2 K / n -> rbar: p 2^{-2 rbar/(beta p)}.
double asymptotic_drf(int p, int beta, double rbar);
/// Limit of log2 K*(D) / n: (beta p / 2) log2(p / D). Inverse of asymptotic_drf.
double asymptotic_rate(int p, int beta, double D);
/// Whether the asymptotic statements apply (their values are <= 1).
bool asymptotic_drf_regime(int p, int beta, double rbar);
inline bool asymptotic_rate_regime(double D) { return D <= 1.0; }

inline constexpr std::uint64_t kMaxCodebookSize = std::uint64_t{1} << 16;

struct RandomOptimalityConfig {
  int p = 1;
  int q = 1;
  int beta = 2;
  double rbar = 2.0;
  std::vector<int> n_list;
  std::size_t trials = 20;
  double epsilon = 0.05;
  std::size_t samples = 1000;  // Monte-Carlo samples per distortion estimate
  std::uint64_t max_k = kMaxCodebookSize;
  std::uint64_t seed = 1;      // row i uses row_seed(seed, i)
};

/// For each n, draws `trials` random codebooks of size K = round(2^{rbar n})
/// and records how often D(C) exceeds p 2^{-2 rbar/(beta p)} + epsilon.
/// Points with K > max_k are reported with cap_exceeded = true and no trials.
ExperimentReport random_code_optimality_experiment(const RandomOptimalityConfig& cfg);

}  // namespace grassq
