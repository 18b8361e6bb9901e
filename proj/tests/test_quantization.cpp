// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "grassq/codebook_io.hpp"
#include "grassq/error.hpp"
#include "grassq/quantization.hpp"
#include "grassq/volume.hpp"
#include "oracles.hpp"

using namespace grassq;

namespace {

GrassmannSpec cspec(int n, int p) { return GrassmannSpec::make(n, p, FieldKind::Complex); }
GrassmannSpec rspec(int n, int p) { return GrassmannSpec::make(n, p, FieldKind::Real); }

Plane line(const std::vector<Complex>& v, FieldKind f) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return Plane::span_of(f, m);
}

std::vector<Plane> draws(const GrassmannSpec& s, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Plane> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(sample_isotropic(s, rng));
  return out;
}

}  // namespace

TEST_CASE("codebook validation") {
  const auto s = cspec(4, 1), q = cspec(4, 2);
  CHECK_THROWS_AS(Codebook::create(s, q, {}, {}), DomainError);
  CHECK_THROWS_AS(Codebook::create(s, q, draws(s, 2, 1), {}), SpecMismatch);
  CHECK_THROWS_AS(Codebook::create(s, cspec(5, 2), draws(cspec(5, 2), 2, 1), {}), SpecMismatch);
  CHECK_THROWS_AS(Codebook::create(s, rspec(4, 2), draws(rspec(4, 2), 2, 1), {}), SpecMismatch);
  auto e = draws(q, 3, 2);
  e.push_back(e[1].rebased(Matrix::Identity(2, 2) * Complex(0.0, 1.0)));
  CHECK_THROWS_AS(Codebook::create(s, q, e, {}), DuplicateEntry);
  const auto cb = Codebook::create(s, q, draws(q, 5, 3), {});
  CHECK(cb.size() == 5);
  CHECK(cb.packed().cols() == 10);
}

TEST_CASE("find_duplicate agrees with a pairwise scan") {
  auto e = draws(rspec(5, 2), 200, 4);
  CHECK_FALSE(find_duplicate(e).has_value());
  e.push_back(e[17]);
  const auto d = find_duplicate(e);
  REQUIRE(d.has_value());
  CHECK(d->first == 17);
  CHECK(d->second == 200);
}

TEST_CASE("quantize examples") {
  const auto s = cspec(4, 2);
  auto e = draws(s, 6, 5);
  const auto cb = Codebook::create(s, s, e, {});
  const auto hit = quantize(e[3].rebased(Matrix::Identity(2, 2) * Complex(0.0, 1.0)), cb);
  CHECK(hit.index == 3);
  CHECK(hit.distance == doctest::Approx(0.0).epsilon(1e-7));

  const auto single = Codebook::create(s, s, draws(s, 1, 6), {});
  const auto P = draws(s, 1, 7)[0];
  const auto r = quantize(P, single);
  CHECK(r.index == 0);
  CHECK(r.distance == doctest::Approx(chordal_distance(P, single[0])));

  // Two orthogonal lines; P at angle 0.3 from the first.
  const auto l = cspec(4, 1);
  const auto q0 = line({1, 0, 0, 0}, FieldKind::Complex);
  const auto q1 = line({0, 1, 0, 0}, FieldKind::Complex);
  const auto cb2 = Codebook::create(l, l, {q0, q1}, {});
  const auto P2 = line({std::cos(0.3), std::sin(0.3), 0, 0}, FieldKind::Complex);
  const auto r2 = quantize(P2, cb2);
  CHECK(r2.index == 0);
  CHECK(r2.distance == doctest::Approx(std::sin(0.3)));
  CHECK(chordal_distance(P2, q1) == doctest::Approx(std::cos(0.3)));

  // Exact tie (orthogonal to both lines) goes to the lower index.
  const auto tie = line({0, 0, 1, 0}, FieldKind::Complex);
  CHECK(quantize(tie, cb2).index == 0);

  CHECK_THROWS_AS(quantize(draws(cspec(4, 2), 1, 8)[0], cb2), SpecMismatch);
}

TEST_CASE("quantize_many matches a brute-force scan") {
  for (auto f : {FieldKind::Real, FieldKind::Complex}) {
    const auto src = GrassmannSpec::make(6, 2, f), code = GrassmannSpec::make(6, 3, f);
    const auto cb = Codebook::create(src, code, draws(code, 37, 9), {});
    const auto P = draws(src, 500, 10);
    const auto got = quantize_many(P, cb);
    for (std::size_t i = 0; i < P.size(); ++i) {
      std::size_t best = 0;
      double bd = 1e300;
      for (std::size_t k = 0; k < cb.size(); ++k) {
        const double d = chordal_distance_sq(P[i], cb[k]);
        if (d < bd) bd = d, best = k;
      }
      CHECK(got[i].index == best);
      CHECK(std::abs(got[i].distance_sq - bd) < 1e-12);
    }
  }
}

TEST_CASE("codebooks with p > q quantize with the smaller dimension first") {
  const auto src = cspec(5, 3), code = cspec(5, 1);
  const auto cb = Codebook::create(src, code, draws(code, 8, 11), {});
  for (const auto& P : draws(src, 50, 12)) {
    const auto r = quantize(P, cb);
    double bd = 1e300;
    for (std::size_t k = 0; k < cb.size(); ++k) bd = std::min(bd, chordal_distance(cb[k], P));
    CHECK(r.distance == doctest::Approx(bd));
    CHECK(r.distance <= 1.0 + 1e-12);
  }
}

TEST_CASE("quantize is invariant under a global rotation") {
  Rng rng(13);
  for (auto f : {FieldKind::Real, FieldKind::Complex}) {
    const auto src = GrassmannSpec::make(5, 1, f), code = GrassmannSpec::make(5, 2, f);
    const auto e = draws(code, 20, 14);
    const auto cb = Codebook::create(src, code, e, {});
    const Matrix A = random_unitary(5, f, rng);
    std::vector<Plane> rotated;
    for (const auto& Q : e) rotated.push_back(Q.rotated(A));
    const auto cbr = Codebook::create(src, code, rotated, {});
    for (const auto& P : draws(src, 100, 15)) {
      const auto a = quantize(P, cb), b = quantize(P.rotated(A), cbr);
      CHECK(a.index == b.index);
      CHECK(std::abs(a.distance - b.distance) < 1e-9);
    }
  }
}

TEST_CASE("distortion of a single line against a line in C^2 is one half") {
  const auto s = cspec(2, 1);
  const auto cb = Codebook::create(s, s, {Plane::coordinate(2, 1, FieldKind::Complex)}, {});
  Rng rng(16);
  const auto d = distortion_mc(cb, 100000, rng);
  CHECK(std::abs(d.mean - 0.5) <= 3.0 * d.std_error);
  CHECK(d.samples == 100000);
  CHECK_THROWS_AS(distortion_mc(cb, 10, rng), DomainError);
}

TEST_CASE("distortion is non-increasing along nested codebooks") {
  const auto src = cspec(5, 1), code = cspec(5, 2);
  const auto e = draws(code, 64, 17);
  double prev = 1e300;
  for (std::size_t k = 1; k <= e.size(); k *= 2) {
    const auto cb = Codebook::create(src, code, std::vector<Plane>(e.begin(), e.begin() + k), {});
    Rng eval(18);
    const double d = distortion_mc(cb, 4000, eval).mean;
    CHECK(d <= prev);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    prev = d;
  }
}

TEST_CASE("random codebooks") {
  const auto s = cspec(4, 1);
  const auto one = random_codebook_from_seed(s, s, 1, 3);
  CHECK(one.size() == 1);
  CHECK(one.provenance().kind == ProvenanceKind::Random);
  CHECK(one.provenance().seed == 3);
  const auto a = random_codebook_from_seed(s, s, 8, 1), b = random_codebook_from_seed(s, s, 8, 2);
  for (std::size_t i = 0; i < 8; ++i) CHECK(chordal_distance(a[i], b[i]) > 1e-6);
  const auto a2 = random_codebook_from_seed(s, s, 8, 1);
  for (std::size_t i = 0; i < 8; ++i) CHECK((a[i].basis() - a2[i].basis()).norm() == 0.0);
  Rng r1(5), r2(5);
  CHECK(random_codebook(s, s, 4, r1).provenance().seed == random_codebook(s, s, 4, r2).provenance().seed);
}

TEST_CASE("random codebook average distortion is near the upper bound") {
  const auto s = cspec(4, 1);
  std::vector<double> d;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto cb = random_codebook_from_seed(s, s, 64, 100 + t);
    Rng eval(1000 + t);
    d.push_back(distortion_mc(cb, 4000, eval).mean);
  }
  const double upper = std::tgamma(4.0 / 3.0) * 0.25;
  CHECK(std::abs(oracle::mean_se(d).mean - upper) <= 0.10 * upper);
}

TEST_CASE("random codebook distortion matches the order-statistic oracle") {
  // Complex lines in C^4: d^2 has CDF y^3, so E[min of K] = G(4/3) G(K+1) / G(K+4/3).
  const auto s = cspec(4, 1);
  for (std::size_t K : {4u, 32u}) {
    std::vector<double> d;
    for (std::uint64_t t = 0; t < 40; ++t) {
      const auto cb = random_codebook_from_seed(s, s, K, 500 + t);
      Rng eval(900 + t);
      d.push_back(distortion_mc(cb, 2000, eval).mean);
    }
    const double exact =
        std::exp(std::lgamma(4.0 / 3.0) + std::lgamma(K + 1.0) - std::lgamma(K + 4.0 / 3.0));
    const auto m = oracle::mean_se(d);
    CHECK(std::abs(m.mean - exact) <= 3.0 * m.se);
  }
}

TEST_CASE("designed and random distortion sit inside the bound windows") {
  struct Case {
    int n, p, q, beta;
  };
  for (const Case c : {Case{4, 1, 1, 2}, Case{4, 2, 2, 1}, Case{6, 1, 2, 2}}) {
    const auto src = GrassmannSpec::make(c.n, c.p, field_from_beta(c.beta));
    const auto code = GrassmannSpec::make(c.n, c.q, field_from_beta(c.beta));
    for (std::size_t K : {16u, 32u, 64u, 128u}) {
      CAPTURE(c.n);
      CAPTURE(c.p);
      CAPTURE(c.q);
      CAPTURE(K);
      const auto b = drf_bounds(c.n, c.p, c.q, c.beta, static_cast<double>(K));
      MaxMinOptions opt;
      opt.training_samples = 5000;
      const auto designed = design_maxmin_from_seed(src, code, K, 40 + K, 8, opt);
      Rng eval(41 + K);
      const double dd = distortion_mc(designed, 10000, eval).mean;
      CHECK(dd >= 0.8 * b.lower);
      CHECK(dd <= 1.3 * b.upper);
      std::vector<double> r;
      for (std::uint64_t t = 0; t < 10; ++t) {
        Rng e(7000 + t);
        r.push_back(distortion_mc(random_codebook_from_seed(src, code, K, 6000 + t), 5000, e).mean);
      }
      CHECK(std::abs(oracle::mean_se(r).mean - b.upper) <= 0.15 * b.upper);
    }
  }
}

TEST_CASE("max-min design") {
  const auto s = rspec(2, 1);
  const auto two = design_maxmin_from_seed(s, s, 2, 1, 5);
  CHECK(min_pairwise_distance(two) >= 0.99);
  CHECK(two.provenance().kind == ProvenanceKind::MaxMin);
  CHECK(two.provenance().trace.size() == 6);
  CHECK_THROWS_AS(design_maxmin_from_seed(s, s, 1, 1, 5), DomainError);

  const auto c = cspec(4, 1);
  MaxMinOptions opt;
  opt.training_samples = 5000;
  const auto designed = design_maxmin_from_seed(c, c, 16, 7, 10, opt);
  const auto random = random_codebook_from_seed(c, c, 16, 7);
  Rng e1(8), e2(8);
  CHECK(distortion_mc(designed, 20000, e1).mean <= distortion_mc(random, 20000, e2).mean);

  const auto g1 = design_maxmin_from_seed(c, c, 8, 3, 0, opt);
  const auto g2 = design_maxmin_from_seed(c, c, 8, 3, 0, opt);
  for (std::size_t i = 0; i < 8; ++i) CHECK((g1[i].basis() - g2[i].basis()).norm() == 0.0);
  CHECK(g1.provenance().trace.size() == 1);
}

TEST_CASE("max-min design handles unequal dimensions") {
  for (auto [p, q] : {std::pair{1, 2}, std::pair{2, 1}}) {
    const auto src = cspec(4, p), code = cspec(4, q);
    MaxMinOptions opt;
    opt.training_samples = 2000;
    const auto cb = design_maxmin_from_seed(src, code, 8, 5, 3, opt);
    CHECK(cb.size() == 8);
    const auto& tr = cb.provenance().trace;
    for (double x : tr) CHECK(x >= 0.0);
  }
}

TEST_CASE("min_pairwise_distance matches a scan") {
  const auto s = rspec(5, 2);
  const auto cb = random_codebook_from_seed(s, s, 30, 4);
  double m = 1e300;
  for (std::size_t i = 0; i < cb.size(); ++i)
    for (std::size_t j = i + 1; j < cb.size(); ++j) m = std::min(m, chordal_distance(cb[i], cb[j]));
  CHECK(min_pairwise_distance(cb) == doctest::Approx(m).epsilon(1e-12));
  CHECK(min_pairwise_distance(random_codebook_from_seed(s, s, 1, 4)) == 0.0);
}

TEST_CASE("distortion-rate bound anchor") {
  const auto b = drf_bounds(4, 1, 1, 2, 64);
  CHECK(b.lower == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(b.upper == doctest::Approx(0.892979511569249 * 0.25).epsilon(1e-12));
  CHECK(b.regime_ok);
  CHECK_THROWS_AS(drf_bounds(4, 1, 1, 2, 0.5), DomainError);
  CHECK_THROWS_AS(drf_bounds(4, 2, 1, 2, 8), DomainError);
}

TEST_CASE("distortion-rate bound properties") {
  std::mt19937_64 g(1);
  for (int i = 0; i < 300; ++i) {
    const int n = 2 + static_cast<int>(g() % 255);
    const int p = 1 + static_cast<int>(g() % (n - 1));
    const int q = p + static_cast<int>(g() % (n - p));
    const int beta = 1 + static_cast<int>(g() % 2);
    const double K = std::exp2(1.0 + static_cast<double>(g() % 20));
    const auto b = drf_bounds(n, p, q, beta, K);
    CHECK(std::isfinite(b.lower));
    CHECK(std::isfinite(b.upper));
    CHECK(b.lower > 0.0);
    CHECK(b.lower <= b.upper);
    const double t = static_cast<double>(beta) * p * (n - q);
    CHECK(b.lower / b.upper == doctest::Approx((t / (t + 2)) / (2 * std::tgamma(2 / t) / t)).epsilon(1e-9));
  }
  CHECK(drf_bounds(4, 1, 1, 2, 1e300).upper < 1e-90);
}

TEST_CASE("rate-distortion bounds") {
  const auto b = rdf_bounds(4, 1, 1, 2, 0.1875);
  CHECK(b.lower == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(b.lower <= b.upper);
  CHECK(b.upper == doctest::Approx(std::pow(6 * 0.1875 / (2 * std::tgamma(1.0 / 3.0)), -3.0)).epsilon(1e-12));
  CHECK(rdf_bounds(4, 1, 1, 2, 1e-6).lower > 1e15);
  CHECK_THROWS_AS(rdf_bounds(4, 1, 1, 2, 1.5), DomainError);
  CHECK_THROWS_AS(rdf_bounds(4, 1, 1, 2, 0.0), DomainError);
  const auto d = drf_bounds(4, 1, 1, 2, 64);
  CHECK(rdf_bounds(4, 1, 1, 2, d.lower).lower == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(rdf_bounds(4, 1, 1, 2, d.upper).upper == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("asymptotic rate and distortion") {
  CHECK(asymptotic_drf(1, 2, 2.0) == doctest::Approx(0.25));
  CHECK(asymptotic_rate(3, 1, 3.0) == 0.0);
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const int p = 1 + static_cast<int>(g() % 6), beta = 1 + static_cast<int>(g() % 2);
    const double r = u(g);
    CHECK(asymptotic_rate(p, beta, asymptotic_drf(p, beta, r)) == doctest::Approx(r).epsilon(1e-12));
  }
  CHECK(asymptotic_drf_regime(1, 2, 2.0));
  CHECK_FALSE(asymptotic_drf_regime(4, 2, 0.1));
  CHECK(asymptotic_rate_regime(0.5));
  CHECK_FALSE(asymptotic_rate_regime(1.5));
  CHECK_THROWS_AS(asymptotic_rate(1, 2, 0.0), DomainError);
}

TEST_CASE("random-code optimality experiment") {
  RandomOptimalityConfig cfg;
  cfg.rbar = 1.0;
  cfg.n_list = {4};
  cfg.trials = 0;
  const auto empty = random_code_optimality_experiment(cfg);
  REQUIRE(empty.rows.size() == 1);
  CHECK(std::isnan(empty.number(0, "exceed_fraction")));
  CHECK(empty.number(0, "trials") == 0.0);

  cfg.trials = 3;
  cfg.epsilon = 1.0;  // = min(p, q): distortion can never exceed the threshold
  cfg.n_list = {4, 5};
  const auto r = random_code_optimality_experiment(cfg);
  for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.number(i, "exceed_fraction") == 0.0);
  CHECK(r.number(1, "seed") == static_cast<double>(row_seed(cfg.seed, 1)));

  cfg.n_list = {4, 20};
  cfg.trials = 1;
  const auto capped = random_code_optimality_experiment(cfg);
  CHECK_FALSE(capped.flag(0, "cap_exceeded"));
  CHECK(capped.flag(1, "cap_exceeded"));
  CHECK(std::isnan(capped.number(1, "mean_distortion")));

  cfg.n_list = {5, 4};
  CHECK_THROWS_AS(random_code_optimality_experiment(cfg), DomainError);
}

TEST_CASE("codebook files round-trip") {
  for (auto f : {FieldKind::Real, FieldKind::Complex}) {
    const auto src = GrassmannSpec::make(5, 1, f), code = GrassmannSpec::make(5, 2, f);
    MaxMinOptions opt;
    opt.training_samples = 1000;
    const auto cb = design_maxmin_from_seed(src, code, 6, 42, 2, opt);
    const auto text = serialize_codebook(cb);
    const auto back = parse_codebook(text, "mem");
    REQUIRE(back.size() == cb.size());
    CHECK(back.source_spec() == cb.source_spec());
    CHECK(back.code_spec() == cb.code_spec());
    for (std::size_t i = 0; i < cb.size(); ++i) {
      CHECK(chordal_distance(back[i], cb[i]) < 1e-14);
      CHECK((back[i].basis() - cb[i].basis()).norm() == 0.0);
    }
    CHECK(back.provenance().kind == ProvenanceKind::Loaded);
    CHECK(back.provenance().path == "mem");
    CHECK(back.provenance().seed == 42);
    CHECK(back.provenance().trace == cb.provenance().trace);
  }
}

TEST_CASE("codebook files are re-validated on load") {
  const auto s = cspec(4, 1);
  const auto cb = random_codebook_from_seed(s, s, 4, 1);
  const auto text = serialize_codebook(cb);
  CHECK_THROWS_AS(parse_codebook(text.substr(0, text.size() / 2)), FormatError);
  CHECK_THROWS_AS(parse_codebook("{}"), FormatError);
  CHECK_THROWS_AS(parse_codebook("[1, 2]"), FormatError);

  auto j = nlohmann::json::parse(text);
  j["entries"][2][0] = j["entries"][2][0].get<double>() + 1e-3;
  CHECK_THROWS_AS(parse_codebook(j.dump()), OrthonormalityError);

  j = nlohmann::json::parse(text);
  j["entries"][3] = j["entries"][1];
  CHECK_THROWS_AS(parse_codebook(j.dump()), DuplicateEntry);

  j = nlohmann::json::parse(text);
  j["K"] = 5;
  CHECK_THROWS_AS(parse_codebook(j.dump()), FormatError);

  j = nlohmann::json::parse(text);
  j["q"] = 4;
  CHECK_THROWS_AS(parse_codebook(j.dump()), FormatError);

  const auto real = random_codebook_from_seed(rspec(4, 1), rspec(4, 1), 2, 1);
  j = nlohmann::json::parse(serialize_codebook(real));
  j["entries"][0][1] = 0.5;
  CHECK_THROWS(parse_codebook(j.dump()));
}
