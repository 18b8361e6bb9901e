// SPDX-License-Identifier: Apache-2.0
//
// Two communication-theory uses of Grassmann quantization: decoding an AWGN
// channel by line angles, and limited-feedback MIMO beamforming selection.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "grassq/manifold.hpp"
#include "grassq/quantization.hpp"
#include "grassq/report.hpp"

namespace grassq {

struct AwgnConfig {
  int n = 64;              // block length
  int beta = 2;
  double sigma_sq = 1.0;   // noise variance per dimension
  double epsilon = 0.05;   // power window (1-2eps, 1-eps), 0 < eps < 1/4
  double rate = 0.5;       // bits per dimension
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::uint64_t max_k = kMaxCodebookSize;
  bool clamp_k = false;    // use min(K, max_k) instead of failing with CapExceeded

  /// round(2^{n rate}), before any clamping.
  double nominal_k() const;
};

/// Random Gaussian codebook with every codeword on the shell
/// ||X||^2 = n (1 - 1.5 eps); X_1 is sent through Y = X_1 + W and decoded as
/// argmin_k d_c^2(P(X_k), P(Y)) over lines in G_{n,1}(L). One report row with
/// the block-error rate and the mean of d_c^2(P(X_1), P(Y)) against the
/// window [s/(1+s-eps), s/(1+s-2eps)], s = sigma^2.
ExperimentReport awgn_grassmann_decode_experiment(const AwgnConfig& cfg);

/// Right singular subspace span(V) of an L_R x L_T channel, L_R < L_T.
Plane channel_row_space(const Matrix& H);

/// Index of the codeword closest to span(V) in chordal distance. The
/// codebook must quantize G_{L_T,L_R}(C) into G_{L_T,s}(C) (SpecMismatch).
std::size_t beamforming_selection(const Matrix& H, const Codebook& codebook);

struct BeamformingSample {
  double throughput = 0.0;  // log det(I + (rho/s) H Q Q^H H^H), nats
  double trace = 0.0;       // tr(V^H Q Q^H V)
};

/// Per-realization quantities for a chosen beamforming matrix Q (L_T x s).
BeamformingSample beamforming_sample(const Matrix& H, const Matrix& Q, double rho);

enum class BeamCodebook { MaxMin, Random };

struct BeamformingConfig {
  int tx = 4;          // L_T
  int rx = 1;          // L_R < L_T
  int streams = 1;     // s, 1 <= s <= L_T - 1
  double rho = 10.0;   // SNR
  int feedback_bits = 4;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  BeamCodebook codebook = BeamCodebook::MaxMin;
  int design_iters = 5;
  std::size_t distortion_samples = 10000;
  bool bits = true;    // throughput in bits (log2) rather than nats
};

/// Monte-Carlo throughput study of beamforming selection. Reports the mean
/// throughput, E[tr(V^H Q Q^H V)], min(s, L_R) - D(B_Q) from an independent
/// distortion estimate, the throughput upper bound evaluated with that
/// trace, and the same bound evaluated with the distortion-rate bounds at
/// K = 2^{R_fb}. When `codebook` is null one is built per cfg.codebook.
ExperimentReport beamforming_throughput_experiment(const BeamformingConfig& cfg,
                                                   const Codebook* codebook = nullptr);

/// Source/code specs used for a beamforming codebook.
GrassmannSpec beamforming_source_spec(const BeamformingConfig& cfg);
GrassmannSpec beamforming_code_spec(const BeamformingConfig& cfg);

/// Throughput upper bound L_R log(1 + (rho/s)(L_T/L_R) trace), in nats.
double throughput_bound(int tx, int rx, int streams, double rho, double expected_trace);

}  // namespace grassq
