// SPDX-License-Identifier: Apache-2.0
#include "grassq/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "grassq/error.hpp"
#include "grassq/parallel.hpp"
#include "grassq/volume.hpp"

namespace grassq {

namespace {

constexpr std::size_t kMinSamples = 1000;
constexpr std::size_t kSampleBlock = 1024;
constexpr std::size_t kEntryBlock = 1024;
// Upper limit on the size of one batched cross-product (complex entries).
constexpr std::size_t kBatchEntries = std::size_t{1} << 20;

std::string spec_str(const GrassmannSpec& s) {
  return "G(" + std::to_string(s.n) + "," + std::to_string(s.p) + "," + field_name(s.field) + ")";
}

void check_bound_shape(int n, int p, int q, int beta) {
  if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2");
  if (p < 1 || p > q || q > n - 1) {
    throw DomainError("bounds need 1 <= p <= q <= n-1, got n=" + std::to_string(n) +
                      " p=" + std::to_string(p) + " q=" + std::to_string(q));
  }
}

Provenance placeholder() { return Provenance{ProvenanceKind::MaxMin, 0, {}, {}}; }

// Dominant q-dimensional eigenspace of a Hermitian (real symmetric for real
// planes) matrix, as a plane.
Plane dominant_eigenspace(const Matrix& m, int q, FieldKind field) {
  const int n = static_cast<int>(m.rows());
  const auto spec = GrassmannSpec::make(n, q, field);
  if (field == FieldKind::Real) {
    const Eigen::MatrixXd sym = 0.5 * (m.real() + m.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::MatrixXd top = es.eigenvectors().rightCols(q);
    // Re-orthonormalize to wash out solver round-off before the strict check.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(top);
    Eigen::MatrixXd b = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
    return Plane::from_orthonormal(spec, b.cast<Complex>());
  }
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  Matrix top = es.eigenvectors().rightCols(q);
  Eigen::HouseholderQR<Matrix> qr(top);
  Matrix b = qr.householderQ() * Matrix::Identity(n, q);
  return Plane::from_orthonormal(spec, std::move(b));
}

double mean_distance_sq(const std::vector<Assignment>& a) {
  double s = 0.0;
  for (const auto& x : a) s += x.distance_sq;
  return s / static_cast<double>(a.size());
}

std::vector<Plane> draw_planes(const GrassmannSpec& spec, std::size_t count, Rng& rng) {
  std::vector<Plane> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_isotropic(spec, rng));
  return out;
}

}  // namespace

const char* provenance_name(ProvenanceKind k) noexcept {
  switch (k) {
    case ProvenanceKind::Random: return "random";
    case ProvenanceKind::MaxMin: return "maxmin";
    case ProvenanceKind::Loaded: return "loaded";
  }
  return "unknown";
}

std::optional<std::pair<std::size_t, std::size_t>> find_duplicate(std::span<const Plane> entries) {
  // For equal-dimensional planes |P_00 - Q_00| <= ||P - Q||_F = sqrt(2) d_c,
  // so only neighbours in the sorted (0,0) projector entry need a full check.
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    keys.emplace_back(entries[i].basis().row(0).squaredNorm(), i);
  std::sort(keys.begin(), keys.end());
  const double window = 2.0 * kTolEq;
  for (std::size_t a = 0; a < keys.size(); ++a) {
    for (std::size_t b = a + 1; b < keys.size() && keys[b].first - keys[a].first <= window; ++b) {
      const auto i = keys[a].second;
      const auto j = keys[b].second;
      if (same_point(entries[i], entries[j])) return std::make_pair(std::min(i, j), std::max(i, j));
    }
  }
  return std::nullopt;
}

Codebook Codebook::create(GrassmannSpec source, GrassmannSpec code, std::vector<Plane> entries,
                          Provenance provenance) {
  source = GrassmannSpec::make(source.n, source.p, source.field);
  code = GrassmannSpec::make(code.n, code.p, code.field);
  if (source.n != code.n || source.field != code.field) {
    throw SpecMismatch("source " + spec_str(source) + " and code " + spec_str(code) +
                       " must share n and field");
  }
  if (entries.empty()) throw DomainError("codebook needs at least one entry");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (!(entries[k].spec() == code)) {
      throw SpecMismatch("entry " + std::to_string(k) + " is in " + spec_str(entries[k].spec()) +
                         ", expected " + spec_str(code));
    }
  }
  if (auto dup = find_duplicate(entries)) {
    throw DuplicateEntry("codebook entries " + std::to_string(dup->first) + " and " +
                         std::to_string(dup->second) + " coincide");
  }
  Codebook cb;
  cb.source_ = source;
  cb.code_ = code;
  cb.packed_.resize(code.n, static_cast<Eigen::Index>(entries.size()) * code.p);
  for (std::size_t k = 0; k < entries.size(); ++k)
    cb.packed_.middleCols(static_cast<Eigen::Index>(k) * code.p, code.p) = entries[k].basis();
  cb.entries_ = std::move(entries);
  cb.provenance_ = std::move(provenance);
  return cb;
}

std::vector<Assignment> quantize_many(std::span<const Plane> sources, const Codebook& C) {
  const auto& src = C.source_spec();
  for (const auto& P : sources) {
    if (!(P.spec() == src)) {
      throw SpecMismatch("source plane is in " + spec_str(P.spec()) + ", codebook expects " +
                         spec_str(src));
    }
  }
  const int p = src.p;
  const int q = C.code_spec().p;
  const double m = std::min(p, q);
  const std::size_t K = C.size();
  const std::size_t per_chunk =
      std::max<std::size_t>(1, kBatchEntries / (K * static_cast<std::size_t>(q * p)));

  std::vector<Assignment> out(sources.size());
  Matrix stacked;
  Eigen::MatrixXd overlap;
  for (std::size_t start = 0; start < sources.size(); start += per_chunk) {
    const std::size_t count = std::min(per_chunk, sources.size() - start);
    stacked.resize(src.n, static_cast<Eigen::Index>(count) * p);
    for (std::size_t j = 0; j < count; ++j)
      stacked.middleCols(static_cast<Eigen::Index>(j) * p, p) = sources[start + j].basis();
    overlap = (C.packed().adjoint() * stacked).cwiseAbs2();
    for (std::size_t j = 0; j < count; ++j) {
      Assignment best{0, INFINITY};
      for (std::size_t k = 0; k < K; ++k) {
        const double ov = overlap
                              .block(static_cast<Eigen::Index>(k) * q,
                                     static_cast<Eigen::Index>(j) * p, q, p)
                              .sum();
        const double d2 = std::max(0.0, m - ov);
        if (d2 < best.distance_sq) best = {k, d2};
      }
      out[start + j] = best;
    }
  }
  return out;
}

QuantizeResult quantize(const Plane& P, const Codebook& C) {
  const auto a = quantize_many(std::span<const Plane>(&P, 1), C).front();
  // Recompute the winner's distance with the cancellation-free route.
  return {a.index, chordal_distance_sym(P, C[a.index])};
}

DistortionEstimate distortion_mc(const Codebook& C, std::size_t samples, Rng& rng) {
  if (samples < kMinSamples) {
    throw DomainError("distortion estimate needs at least 1000 samples, got " +
                      std::to_string(samples));
  }
  const auto blocks = make_blocks(samples, kSampleBlock);
  const std::uint64_t base = rng.next_u64();
  std::vector<std::pair<double, double>> sums(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    Rng local(sub_seed(base, b));
    const auto planes = draw_planes(C.source_spec(), blocks[b].end - blocks[b].begin, local);
    double s = 0.0, s2 = 0.0;
    for (const auto& a : quantize_many(planes, C)) {
      s += a.distance_sq;
      s2 += a.distance_sq * a.distance_sq;
    }
    sums[b] = {s, s2};
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& [a, b] : sums) {
    s += a;
    s2 += b;
  }
  const double N = static_cast<double>(samples);
  const double mean = s / N;
  const double var = std::max(0.0, (s2 - N * mean * mean) / (N - 1.0));
  return {mean, std::sqrt(var / N), samples};
}

Codebook random_codebook_from_seed(const GrassmannSpec& source, const GrassmannSpec& code,
                                   std::size_t K, std::uint64_t seed) {
  if (K < 1) throw DomainError("random codebook needs K >= 1");
  const auto code_spec = GrassmannSpec::make(code.n, code.p, code.field);
  const auto blocks = make_blocks(K, kEntryBlock);
  std::vector<std::vector<Plane>> parts(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    Rng local(sub_seed(seed, b));
    parts[b] = draw_planes(code_spec, blocks[b].end - blocks[b].begin, local);
  });
  std::vector<Plane> entries;
  entries.reserve(K);
  for (auto& part : parts)
    for (auto& P : part) entries.push_back(std::move(P));

  // Collisions have probability zero; redraw from a dedicated stream if one happens.
  std::uint64_t attempt = 0;
  while (auto dup = find_duplicate(entries)) {
    Rng redraw(sub_seed(seed, (std::uint64_t{1} << 40) + attempt++));
    entries[dup->second] = sample_isotropic(code_spec, redraw);
  }
  return Codebook::create(source, code_spec, std::move(entries),
                          Provenance{ProvenanceKind::Random, seed, {}, {}});
}

Codebook random_codebook(const GrassmannSpec& source, const GrassmannSpec& code, std::size_t K,
                         Rng& rng) {
  return random_codebook_from_seed(source, code, K, rng.next_u64());
}

double min_pairwise_distance(const Codebook& C) {
  double best = INFINITY;
  const auto& e = C.entries();
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) best = std::min(best, chordal_distance(e[i], e[j]));
  return e.size() < 2 ? 0.0 : best;
}

Codebook design_maxmin_from_seed(const GrassmannSpec& source, const GrassmannSpec& code,
                                 std::size_t K, std::uint64_t seed, int iters,
                                 const MaxMinOptions& options) {
  if (K < 2) throw DomainError("max-min design needs K >= 2");
  if (iters < 0) throw DomainError("iteration count must be non-negative");
  if (options.pool < 1) throw DomainError("candidate pool must be non-empty");
  const auto src = GrassmannSpec::make(source.n, source.p, source.field);
  const auto cs = GrassmannSpec::make(code.n, code.p, code.field);
  const int q = cs.p;

  // Greedy farthest point: each new codeword maximizes its minimum distance
  // to the ones already chosen, i.e. minimizes its largest overlap.
  Rng init(sub_seed(seed, 0));
  std::vector<Plane> entries;
  entries.reserve(K);
  entries.push_back(sample_isotropic(cs, init));
  Matrix chosen = entries.front().basis();
  while (entries.size() < K) {
    double best_overlap = INFINITY;
    std::optional<Plane> best;
    for (std::size_t c = 0; c < options.pool; ++c) {
      Plane cand = sample_isotropic(cs, init);
      const Eigen::MatrixXd ov = (chosen.adjoint() * cand.basis()).cwiseAbs2();
      double worst = 0.0;
      for (std::size_t k = 0; k < entries.size(); ++k)
        worst = std::max(worst, ov.middleRows(static_cast<Eigen::Index>(k) * q, q).sum());
      if (worst < best_overlap) {
        best_overlap = worst;
        best = std::move(cand);
      }
    }
    chosen.conservativeResize(Eigen::NoChange, chosen.cols() + q);
    chosen.rightCols(q) = best->basis();
    entries.push_back(std::move(*best));
  }

  Rng train(sub_seed(seed, 1));
  const auto training = draw_planes(src, options.training_samples, train);

  Codebook current = Codebook::create(src, cs, entries, placeholder());
  std::vector<double> trace;
  auto assign = training.empty() ? std::vector<Assignment>{} : quantize_many(training, current);
  trace.push_back(training.empty() ? NAN : mean_distance_sq(assign));
  std::size_t best_round = 0;
  std::vector<Plane> best_entries = current.entries();

  for (int it = 1; it <= iters && !training.empty(); ++it) {
    std::vector<Matrix> scatter(K, Matrix::Zero(src.n, src.n));
    std::vector<std::size_t> members(K, 0);
    for (std::size_t i = 0; i < training.size(); ++i) {
      const auto& B = training[i].basis();
      scatter[assign[i].index].noalias() += B * B.adjoint();
      ++members[assign[i].index];
    }
    std::vector<Plane> next = current.entries();
    for (std::size_t k = 0; k < K; ++k)
      if (members[k] > 0) next[k] = dominant_eigenspace(scatter[k], q, cs.field);
    // A centroid landing on another codeword reverts to its previous value.
    for (std::size_t guard = 0; guard < K; ++guard) {
      auto dup = find_duplicate(next);
      if (!dup) break;
      next[dup->second] = current.entries()[dup->second];
    }
    current = Codebook::create(src, cs, std::move(next), placeholder());
    assign = quantize_many(training, current);
    trace.push_back(mean_distance_sq(assign));
    if (trace.back() < trace[best_round]) {
      best_round = trace.size() - 1;
      best_entries = current.entries();
    }
  }
  return Codebook::create(src, cs, std::move(best_entries),
                          Provenance{ProvenanceKind::MaxMin, seed, std::move(trace), {}});
}

Codebook design_maxmin(const GrassmannSpec& source, const GrassmannSpec& code, std::size_t K,
                       Rng& rng, int iters, const MaxMinOptions& options) {
  return design_maxmin_from_seed(source, code, K, rng.next_u64(), iters, options);
}

BoundPair drf_bounds(int n, int p, int q, int beta, double K) {
  check_bound_shape(n, p, q, beta);
  if (!(K >= 1.0) || !std::isfinite(K)) throw DomainError("code size must be >= 1");
  const double t = static_cast<double>(beta) * p * (n - q);
  const double log_ck = log_coeff_c(n, p, q, beta) + std::log(K);
  const double scale = std::exp(-2.0 / t * log_ck);
  BoundPair out;
  out.lower = t / (t + 2.0) * scale;
  out.upper = std::exp(std::log(2.0) + std::lgamma(2.0 / t) - std::log(t)) * scale;
  out.regime_ok = log_ck >= 0.0;
  return out;
}

BoundPair rdf_bounds(int n, int p, int q, int beta, double D) {
  check_bound_shape(n, p, q, beta);
  if (!(D > 0.0) || D > 1.0) throw DomainError("distortion must lie in (0, 1], got " + std::to_string(D));
  const double t = static_cast<double>(beta) * p * (n - q);
  const double log_c = log_coeff_c(n, p, q, beta);
  // Inverse of drf lower: K >= (1/c) ((t+2) D / t)^{-t/2}.
  const double log_lower = -log_c - 0.5 * t * std::log((t + 2.0) * D / t);
  // Inverse of drf upper: (1/c) (t D / (2 Gamma(2/t)))^{-t/2} suffices.
  const double log_upper =
      -log_c - 0.5 * t * (std::log(t * D) - std::log(2.0) - std::lgamma(2.0 / t));
  return {std::exp(log_lower), std::exp(log_upper), true};
}

double asymptotic_drf(int p, int beta, double rbar) {
  if (p < 1 || (beta != 1 && beta != 2)) throw DomainError("need p >= 1 and beta in {1,2}");
  if (!(rbar >= 0.0) || !std::isfinite(rbar)) throw DomainError("normalized rate must be >= 0");
  return p * std::exp2(-2.0 * rbar / (beta * p));
}

double asymptotic_rate(int p, int beta, double D) {
  if (p < 1 || (beta != 1 && beta != 2)) throw DomainError("need p >= 1 and beta in {1,2}");
  if (!(D > 0.0) || D > p) throw DomainError("distortion must lie in (0, p]");
  return 0.5 * beta * p * std::log2(p / D);
}

bool asymptotic_drf_regime(int p, int beta, double rbar) {
  return asymptotic_drf(p, beta, rbar) <= 1.0;
}

ExperimentReport random_code_optimality_experiment(const RandomOptimalityConfig& cfg) {
  if (cfg.n_list.empty()) throw DomainError("n_list must not be empty");
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    check_bound_shape(cfg.n_list[i], cfg.p, cfg.q, cfg.beta);
    if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) throw DomainError("n_list must be increasing");
  }
  if (!(cfg.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double target = asymptotic_drf(cfg.p, cfg.beta, cfg.rbar);
  const auto field = field_from_beta(cfg.beta);

  ExperimentReport report("random-opt",
                          {"n", "K", "trials", "exceed_count", "exceed_fraction",
                           "mean_distortion", "asymptotic_drf", "threshold", "drf_lower",
                           "drf_upper", "regime_ok", "cap_exceeded", "seed"});
  for (std::size_t row = 0; row < cfg.n_list.size(); ++row) {
    const int n = cfg.n_list[row];
    const std::uint64_t seed = row_seed(cfg.seed, row);
    const double k_real = std::round(std::exp2(cfg.rbar * n));
    const bool capped = !(k_real <= static_cast<double>(cfg.max_k));
    const auto drf = drf_bounds(n, cfg.p, cfg.q, cfg.beta, std::max(1.0, k_real));
    std::vector<Cell> cells{cell_int(n), cell(k_real)};
    if (capped) {
      cells.insert(cells.end(), {cell_int(0), cell_none(), cell_none(), cell_none()});
    } else {
      const auto K = static_cast<std::size_t>(k_real);
      const auto src = GrassmannSpec::make(n, cfg.p, field);
      const auto code = GrassmannSpec::make(n, cfg.q, field);
      std::size_t exceed = 0;
      double total = 0.0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto cb = random_codebook_from_seed(src, code, K, sub_seed(seed, 2 * t));
        Rng eval(sub_seed(seed, 2 * t + 1));
        const double d = distortion_mc(cb, cfg.samples, eval).mean;
        total += d;
        if (d > target + cfg.epsilon) ++exceed;
      }
      cells.push_back(cell_int(static_cast<std::int64_t>(cfg.trials)));
      cells.push_back(cell_int(static_cast<std::int64_t>(exceed)));
      if (cfg.trials == 0) {
        cells.insert(cells.end(), {cell_none(), cell_none()});
      } else {
        const double T = static_cast<double>(cfg.trials);
        cells.push_back(cell(static_cast<double>(exceed) / T));
        cells.push_back(cell(total / T));
      }
    }
    cells.insert(cells.end(), {cell(target), cell(target + cfg.epsilon), cell(drf.lower),
                               cell(drf.upper), cell_bool(drf.regime_ok), cell_bool(capped),
                               cell_seed(seed)});
    report.add_row(std::move(cells));
  }
  return report;
}

}  // namespace grassq
