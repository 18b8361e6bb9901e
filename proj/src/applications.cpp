// SPDX-License-Identifier: Apache-2.0
#include "grassq/applications.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "grassq/error.hpp"
#include "grassq/parallel.hpp"

namespace grassq {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStd summarize(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return {NAN, NAN};
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double N = static_cast<double>(xs.size());
  out.std_error = std::sqrt(ss / (N - 1.0) / N);
  return out;
}

// i.i.d. standard Gaussian vector: N(0,1) entries, or CN(0,1) for beta = 2.
Vector gaussian_vector(int n, int beta, double variance, Rng& rng) {
  Vector v(n);
  if (beta == 1) {
    const double s = std::sqrt(variance);
    for (int i = 0; i < n; ++i) v(i) = Complex(s * rng.normal(), 0.0);
  } else {
    const double s = std::sqrt(0.5 * variance);
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      v(i) = Complex(s * re, s * im);
    }
  }
  return v;
}

Matrix gaussian_channel(int rows, int cols, Rng& rng) {
  Matrix h(rows, cols);
  const double s = std::sqrt(0.5);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      h(r, c) = Complex(s * re, s * im);
    }
  return h;
}

// Squared chordal distance between the lines spanned by x and y.
double line_distance_sq(const Vector& x, double xx, const Vector& y, double yy) {
  return std::max(0.0, 1.0 - std::norm(x.dot(y)) / (xx * yy));
}

double log_det_hpd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(llt.matrixL()(i, i).real());
  return 2.0 * acc;
}

struct AwgnTrial {
  bool error = false;
  double dc2 = 0.0;
};

AwgnTrial awgn_trial(const AwgnConfig& cfg, std::size_t K, Rng& rng) {
  const int n = cfg.n;
  const double energy = n * (1.0 - 1.5 * cfg.epsilon);
  auto codeword = [&] {
    Vector x = gaussian_vector(n, cfg.beta, 1.0, rng);
    x *= std::sqrt(energy / x.squaredNorm());
    return x;
  };
  const Vector x1 = codeword();
  const Vector y = x1 + gaussian_vector(n, cfg.beta, cfg.sigma_sq, rng);
  const double yy = y.squaredNorm();
  AwgnTrial out;
  out.dc2 = line_distance_sq(x1, x1.squaredNorm(), y, yy);
  double best = out.dc2;
  for (std::size_t k = 1; k < K; ++k) {
    const Vector xk = codeword();
    const double d = line_distance_sq(xk, xk.squaredNorm(), y, yy);
    if (d < best) {
      best = d;
      out.error = true;
    }
  }
  return out;
}

void validate(const BeamformingConfig& cfg) {
  if (cfg.rx < 1 || cfg.rx >= cfg.tx)
    throw DomainError("beamforming needs 1 <= L_R < L_T");
  if (cfg.streams < 1 || cfg.streams > cfg.tx - 1)
    throw DomainError("beamforming needs 1 <= s <= L_T - 1");
  if (!(cfg.rho > 0.0)) throw DomainError("SNR rho must be positive");
  if (cfg.feedback_bits < 0 || cfg.feedback_bits > 16)
    throw DomainError("feedback bits must lie in [0, 16]");
  if (cfg.codebook == BeamCodebook::MaxMin && cfg.feedback_bits < 1)
    throw DomainError("a max-min codebook needs at least 1 feedback bit");
  if (cfg.trials < 1000) throw DomainError("beamforming experiment needs at least 1000 trials");
}

}  // namespace

double AwgnConfig::nominal_k() const { return std::round(std::exp2(static_cast<double>(n) * rate)); }

ExperimentReport awgn_grassmann_decode_experiment(const AwgnConfig& cfg) {
  if (cfg.n < 4) throw DomainError("AWGN experiment needs n >= 4");
  if (cfg.beta != 1 && cfg.beta != 2) throw DomainError("beta must be 1 or 2");
  if (!(cfg.sigma_sq > 0.0)) throw DomainError("noise variance must be positive");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.25)) throw DomainError("epsilon must lie in (0, 1/4)");
  if (!(cfg.rate >= 0.0)) throw DomainError("rate must be non-negative");
  double k_real = std::max(1.0, cfg.nominal_k());
  if (k_real > static_cast<double>(cfg.max_k)) {
    if (!cfg.clamp_k) {
      throw CapExceeded("K = 2^(n R) = " + std::to_string(k_real) + " exceeds the cap " +
                        std::to_string(cfg.max_k));
    }
    k_real = static_cast<double>(cfg.max_k);
  }
  const auto K = static_cast<std::size_t>(k_real);

  std::vector<AwgnTrial> trials(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    Rng rng(sub_seed(cfg.seed, t));
    trials[t] = awgn_trial(cfg, K, rng);
  });

  std::size_t errors = 0;
  std::vector<double> dc2;
  dc2.reserve(trials.size());
  for (const auto& t : trials) {
    errors += t.error ? 1 : 0;
    dc2.push_back(t.dc2);
  }
  const auto d = summarize(dc2);
  const double T = static_cast<double>(cfg.trials);
  const double err = cfg.trials ? static_cast<double>(errors) / T : NAN;
  const double s2 = cfg.sigma_sq;
  const double half_beta = 0.5 * cfg.beta;

  ExperimentReport report("awgn", {"n", "beta", "K", "rate", "effective_rate", "sigma_sq",
                                   "epsilon", "trials", "errors", "error_rate", "error_stderr",
                                   "dc2_mean", "dc2_stderr", "window_lo", "window_hi",
                                   "capacity", "rate_threshold", "seed"});
  report.add_row({cell_int(cfg.n), cell_int(cfg.beta), cell_int(static_cast<std::int64_t>(K)),
                  cell(cfg.rate), cell(std::log2(k_real) / cfg.n), cell(s2), cell(cfg.epsilon),
                  cell_int(static_cast<std::int64_t>(cfg.trials)),
                  cell_int(static_cast<std::int64_t>(errors)), cell(err),
                  cell(cfg.trials ? std::sqrt(err * (1.0 - err) / T) : NAN), cell(d.mean),
                  cell(d.std_error), cell(s2 / (1.0 + s2 - cfg.epsilon)),
                  cell(s2 / (1.0 + s2 - 2.0 * cfg.epsilon)), cell(half_beta * std::log2(1.0 + 1.0 / s2)),
                  cell(half_beta * std::log2(1.0 + (1.0 - 2.0 * cfg.epsilon) / s2)),
                  cell_seed(cfg.seed)});
  return report;
}

Plane channel_row_space(const Matrix& H) {
  if (H.rows() < 1 || H.rows() >= H.cols()) throw DimensionMismatch("channel must be L_R x L_T with L_R < L_T");
  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeThinV);
  const auto spec = GrassmannSpec::make(static_cast<int>(H.cols()), static_cast<int>(H.rows()),
                                        FieldKind::Complex);
  return Plane::from_orthonormal(spec, svd.matrixV());
}

std::size_t beamforming_selection(const Matrix& H, const Codebook& codebook) {
  const auto& src = codebook.source_spec();
  if (src.field != FieldKind::Complex || H.cols() != src.n || H.rows() != src.p) {
    throw SpecMismatch("channel is " + std::to_string(H.rows()) + "x" + std::to_string(H.cols()) +
                       " but the codebook quantizes G(" + std::to_string(src.n) + "," +
                       std::to_string(src.p) + ") subspaces");
  }
  return quantize(channel_row_space(H), codebook).index;
}

BeamformingSample beamforming_sample(const Matrix& H, const Matrix& Q, double rho) {
  if (Q.rows() != H.cols()) throw DimensionMismatch("beamformer rows must equal L_T");
  const auto s = static_cast<double>(Q.cols());
  const Matrix hq = H * Q;
  const Matrix a = Matrix::Identity(H.rows(), H.rows()) + (rho / s) * hq * hq.adjoint();
  const Plane V = channel_row_space(H);
  return {log_det_hpd(a), (V.basis().adjoint() * Q).squaredNorm()};
}

GrassmannSpec beamforming_source_spec(const BeamformingConfig& cfg) {
  return GrassmannSpec::make(cfg.tx, cfg.rx, FieldKind::Complex);
}

GrassmannSpec beamforming_code_spec(const BeamformingConfig& cfg) {
  return GrassmannSpec::make(cfg.tx, cfg.streams, FieldKind::Complex);
}

double throughput_bound(int tx, int rx, int streams, double rho, double expected_trace) {
  return rx * std::log1p(rho / streams * static_cast<double>(tx) / rx * expected_trace);
}

ExperimentReport beamforming_throughput_experiment(const BeamformingConfig& cfg,
                                                   const Codebook* codebook) {
  validate(cfg);
  const auto src = beamforming_source_spec(cfg);
  const auto code = beamforming_code_spec(cfg);
  const std::size_t K = std::size_t{1} << cfg.feedback_bits;

  std::optional<Codebook> built;
  if (codebook == nullptr) {
    const std::uint64_t design_seed = sub_seed(cfg.seed, 0);
    built = cfg.codebook == BeamCodebook::MaxMin
                ? design_maxmin_from_seed(src, code, K, design_seed, cfg.design_iters)
                : random_codebook_from_seed(src, code, K, design_seed);
    codebook = &*built;
  }
  if (!(codebook->source_spec() == src) || !(codebook->code_spec() == code)) {
    throw SpecMismatch("codebook does not map G(L_T, L_R) into G(L_T, s)");
  }

  const std::uint64_t trial_base = sub_seed(cfg.seed, 2);
  std::vector<double> rates(cfg.trials), traces(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    Rng rng(sub_seed(trial_base, t));
    const Matrix H = gaussian_channel(cfg.rx, cfg.tx, rng);
    const Plane V = channel_row_space(H);
    const auto& Q = (*codebook)[quantize(V, *codebook).index].basis();
    const Matrix hq = H * Q;
    const Matrix a = Matrix::Identity(cfg.rx, cfg.rx) + (cfg.rho / cfg.streams) * hq * hq.adjoint();
    rates[t] = log_det_hpd(a);
    traces[t] = (V.basis().adjoint() * Q).squaredNorm();
  });

  const double unit = cfg.bits ? std::numbers::ln2 : 1.0;
  for (double& r : rates) r /= unit;
  const auto rate = summarize(rates);
  const auto trace = summarize(traces);

  Rng eval(sub_seed(cfg.seed, 1));
  const auto dist = distortion_mc(*codebook, cfg.distortion_samples, eval);
  const int m = std::min(cfg.streams, cfg.rx);
  const double trace_from_d = m - dist.mean;
  const double gap = std::abs(trace.mean - trace_from_d);
  const double combined = std::hypot(trace.std_error, dist.std_error);
  const double bound_d = throughput_bound(cfg.tx, cfg.rx, cfg.streams, cfg.rho, trace_from_d) / unit;

  const auto drf = drf_bounds(cfg.tx, m, std::max(cfg.streams, cfg.rx), 2, static_cast<double>(K));
  auto bound_at = [&](double distortion) {
    return throughput_bound(cfg.tx, cfg.rx, cfg.streams, cfg.rho, std::max(0.0, m - distortion)) /
           unit;
  };

  ExperimentReport report(
      "beamforming",
      {"tx", "rx", "streams", "rho", "feedback_bits", "K", "codebook", "trials", "throughput",
       "throughput_stderr", "trace_mean", "trace_stderr", "distortion", "distortion_stderr",
       "trace_from_distortion", "identity_gap", "combined_stderr", "identity_ok",
       "bound_from_distortion", "bound_ok", "drf_lower", "drf_upper", "drf_regime_ok",
       "bound_from_drf_lower", "bound_from_drf_upper", "units", "seed"});
  report.add_row(
      {cell_int(cfg.tx), cell_int(cfg.rx), cell_int(cfg.streams), cell(cfg.rho),
       cell_int(cfg.feedback_bits), cell_int(static_cast<std::int64_t>(K)),
       cell_str(provenance_name(codebook->provenance().kind)),
       cell_int(static_cast<std::int64_t>(cfg.trials)), cell(rate.mean), cell(rate.std_error),
       cell(trace.mean), cell(trace.std_error), cell(dist.mean), cell(dist.std_error),
       cell(trace_from_d), cell(gap), cell(combined), cell_bool(gap <= 3.0 * combined),
       cell(bound_d), cell_bool(rate.mean <= bound_d + 3.0 * rate.std_error), cell(drf.lower),
       cell(drf.upper), cell_bool(drf.regime_ok), cell(bound_at(drf.lower)),
       cell(bound_at(drf.upper)), cell_str(cfg.bits ? "bits" : "nats"), cell_seed(cfg.seed)});
  return report;
}

}  // namespace grassq
