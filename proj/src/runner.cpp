// SPDX-License-Identifier: Apache-2.0
#include "grassq/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "grassq/applications.hpp"
#include "grassq/codebook_io.hpp"
#include "grassq/error.hpp"
#include "grassq/parallel.hpp"
#include "grassq/quantization.hpp"
#include "grassq/volume.hpp"

namespace grassq {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_field(const std::string& key, const std::string& msg) {
  throw ConfigError("field '" + key + "': " + msg);
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) bad_field(key, msg);
}

/// Typed, validated access to a JSON object; remembers which keys were read
/// so that misspelled fields are reported instead of silently ignored.
class ConfigReader {
 public:
  explicit ConfigReader(const json& j) : j_(j) {
    if (!j_.is_object()) throw ConfigError("config must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt) {
    const json* v = get(key, def.has_value());
    if (!v) return *def;
    require(v->is_number_integer(), key, "expected an integer");
    return v->get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    const json* v = get(key, true);
    if (!v) return def;
    require(v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0),
            key, "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    const json* v = get(key, def.has_value());
    if (!v) return *def;
    require(v->is_number(), key, "expected a number");
    return v->get<double>();
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = get(key, true);
    if (!v) return def;
    require(v->is_boolean(), key, "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    const json* v = get(key, def.has_value());
    if (!v) return *def;
    require(v->is_string(), key, "expected a string");
    return v->get<std::string>();
  }

  /// A number or a non-empty array of numbers.
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = {}) {
    const json* v = get(key, def.has_value());
    if (!v) return *def;
    if (v->is_number()) return {v->get<double>()};
    require(v->is_array() && !v->empty(), key, "expected a number or a non-empty array");
    std::vector<double> out;
    for (const auto& x : *v) {
      require(x.is_number(), key, "array must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::optional<std::vector<int>> def = {}) {
    const json* v = get(key, def.has_value());
    if (!v) return *def;
    if (v->is_number_integer()) return {v->get<int>()};
    require(v->is_array() && !v->empty(), key, "expected an integer or a non-empty array");
    std::vector<int> out;
    for (const auto& x : *v) {
      require(x.is_number_integer(), key, "array must hold integers");
      out.push_back(x.get<int>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) bad_field(it.key(), "unknown field for this experiment");
  }

  void mark(const std::string& key) { used_.insert(key); }

 private:
  const json* get(const std::string& key, bool optional) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (optional) return nullptr;
      bad_field(key, "required");
    }
    return &j_.at(key);
  }

  const json& j_;
  std::set<std::string> used_;
};

struct Shape {
  int n, p, q, beta;
};

// n, p, q, beta with 1 <= p <= q <= n-1.
Shape read_shape(ConfigReader& r) {
  Shape s{};
  s.n = static_cast<int>(r.integer("n"));
  s.p = static_cast<int>(r.integer("p"));
  s.q = static_cast<int>(r.integer("q"));
  s.beta = static_cast<int>(r.integer("beta"));
  require(s.beta == 1 || s.beta == 2, "beta", "must be 1 (real) or 2 (complex)");
  require(s.p >= 1, "p", "must be >= 1");
  require(s.p <= s.q, "q", "order constraint p <= q violated (p=" + std::to_string(s.p) +
                               ", q=" + std::to_string(s.q) + ")");
  require(s.q <= s.n - 1, "n", "must exceed q (q <= n-1)");
  return s;
}

std::size_t read_count(ConfigReader& r, const std::string& key, std::int64_t def, std::int64_t min) {
  const auto v = r.integer(key, def);
  require(v >= min, key, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

ExperimentReport run_volume(ConfigReader& r, std::uint64_t seed) {
  const Shape s = read_shape(r);
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(k / 10.0);
  const auto deltas = r.numbers("deltas", grid);
  for (double d : deltas)
    require(d >= 0.0 && d <= std::sqrt(static_cast<double>(s.p)), "deltas",
            "every radius must lie in [0, sqrt(p)]");
  const auto samples = read_count(r, "samples", 100000, 1000);
  r.finish();

  Rng rng(seed);
  const auto mc = ball_volume_mc_sweep(s.n, s.p, s.q, s.beta, deltas, samples, rng);
  ExperimentReport report("volume", {"delta", "mc", "stderr", "closed_form", "lower", "upper",
                                     "barg_nogin", "seed"});
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    std::vector<Cell> row{cell(d), cell(mc[i].value), cell(mc[i].std_error)};
    if (d <= 1.0) {
      const auto ball = BallSpec::make(s.n, s.p, s.q, s.beta, d);
      const auto bounds = ball_volume_bounds(ball);
      row.insert(row.end(), {cell(ball_volume_approx(ball).value), cell(bounds.lower.value),
                             cell(bounds.upper.value)});
    } else {
      row.insert(row.end(), {cell_none(), cell_none(), cell_none()});
    }
    row.push_back(s.p == s.q ? cell(barg_nogin_approx(s.n, s.p, s.beta, d).value) : cell_none());
    row.push_back(cell_seed(seed));
    report.add_row(std::move(row));
  }
  return report;
}

Codebook build_codebook(ConfigReader& r, const Shape& s, std::uint64_t seed) {
  const std::string kind = r.string("kind", "random");
  require(kind == "random" || kind == "maxmin", "kind", "must be 'random' or 'maxmin'");
  const auto K = read_count(r, "K", 16, kind == "maxmin" ? 2 : 1);
  require(K <= kMaxCodebookSize, "K", "must not exceed 65536");
  const auto iters = static_cast<int>(read_count(r, "iters", 10, 0));
  MaxMinOptions opt;
  opt.training_samples = read_count(r, "training_samples", 10000, 1);
  opt.pool = read_count(r, "pool", 256, 1);
  const auto field = field_from_beta(s.beta);
  const auto src = GrassmannSpec::make(s.n, s.p, field);
  const auto code = GrassmannSpec::make(s.n, s.q, field);
  return kind == "maxmin" ? design_maxmin_from_seed(src, code, K, seed, iters, opt)
                          : random_codebook_from_seed(src, code, K, seed);
}

ExperimentReport run_distortion(ConfigReader& r, std::uint64_t seed) {
  std::optional<Codebook> cb;
  if (r.has("codebook_path")) {
    cb = load_codebook(r.string("codebook_path"));
  } else {
    const Shape s = read_shape(r);
    cb = build_codebook(r, s, sub_seed(seed, 0));
  }
  const auto samples = read_count(r, "samples", 20000, 1000);
  r.finish();

  Rng eval(sub_seed(seed, 1));
  const auto d = distortion_mc(*cb, samples, eval);
  const int p = std::min(cb->source_spec().p, cb->code_spec().p);
  const int q = std::max(cb->source_spec().p, cb->code_spec().p);
  const auto b = drf_bounds(cb->code_spec().n, p, q, cb->code_spec().beta(),
                            static_cast<double>(cb->size()));
  ExperimentReport report("distortion", {"K", "kind", "distortion", "stderr", "samples",
                                         "drf_lower", "drf_upper", "regime_ok", "seed"});
  report.add_row({cell_int(static_cast<std::int64_t>(cb->size())),
                  cell_str(provenance_name(cb->provenance().kind)), cell(d.mean),
                  cell(d.std_error), cell_int(static_cast<std::int64_t>(samples)), cell(b.lower),
                  cell(b.upper), cell_bool(b.regime_ok), cell_seed(seed)});
  return report;
}

ExperimentReport run_design(ConfigReader& r, std::uint64_t seed) {
  const Shape s = read_shape(r);
  const auto ks = r.integers("K_list", std::vector<int>{16, 32, 64, 128});
  for (int k : ks) require(k >= 2 && k <= static_cast<int>(kMaxCodebookSize), "K_list", "each K must lie in [2, 65536]");
  const auto iters = static_cast<int>(read_count(r, "iters", 10, 0));
  MaxMinOptions opt;
  opt.training_samples = read_count(r, "training_samples", 10000, 1);
  opt.pool = read_count(r, "pool", 256, 1);
  const auto eval_samples = read_count(r, "eval_samples", 20000, 1000);
  const auto random_trials = read_count(r, "random_trials", 20, 0);
  const std::string out_dir = r.string("codebook_dir", "");
  r.finish();

  const auto field = field_from_beta(s.beta);
  const auto src = GrassmannSpec::make(s.n, s.p, field);
  const auto code = GrassmannSpec::make(s.n, s.q, field);
  ExperimentReport report("design", {"K", "designed", "designed_stderr", "random_mean",
                                     "random_stderr", "drf_lower", "drf_upper", "regime_ok",
                                     "min_distance", "seed"});
  for (std::size_t row = 0; row < ks.size(); ++row) {
    const auto K = static_cast<std::size_t>(ks[row]);
    const std::uint64_t rs = row_seed(seed, row);
    const auto designed = design_maxmin_from_seed(src, code, K, sub_seed(rs, 0), iters, opt);
    // Common evaluation stream for designed and random books.
    const std::uint64_t eval_seed = sub_seed(rs, 1);
    Rng eval(eval_seed);
    const auto dd = distortion_mc(designed, eval_samples, eval);
    std::vector<double> rand;
    for (std::size_t t = 0; t < random_trials; ++t) {
      const auto cb = random_codebook_from_seed(src, code, K, sub_seed(rs, 2 + t));
      Rng e(eval_seed);
      rand.push_back(distortion_mc(cb, eval_samples, e).mean);
    }
    double mean = NAN, se = NAN;
    if (!rand.empty()) {
      mean = 0.0;
      for (double x : rand) mean += x;
      mean /= static_cast<double>(rand.size());
      if (rand.size() > 1) {
        double ss = 0.0;
        for (double x : rand) ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / (rand.size() - 1.0) / rand.size());
      }
    }
    const auto b = drf_bounds(s.n, s.p, s.q, s.beta, static_cast<double>(K));
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      save_codebook(designed, std::filesystem::path(out_dir) / ("maxmin_K" + std::to_string(K) + ".json"));
    }
    report.add_row({cell_int(static_cast<std::int64_t>(K)), cell(dd.mean), cell(dd.std_error),
                    cell(mean), cell(se), cell(b.lower), cell(b.upper), cell_bool(b.regime_ok),
                    cell(min_pairwise_distance(designed)), cell_seed(rs)});
  }
  return report;
}

ExperimentReport run_random_opt(ConfigReader& r, std::uint64_t seed) {
  RandomOptimalityConfig cfg;
  cfg.p = static_cast<int>(r.integer("p"));
  cfg.q = static_cast<int>(r.integer("q"));
  cfg.beta = static_cast<int>(r.integer("beta"));
  require(cfg.beta == 1 || cfg.beta == 2, "beta", "must be 1 (real) or 2 (complex)");
  require(cfg.p >= 1, "p", "must be >= 1");
  require(cfg.p <= cfg.q, "q", "order constraint p <= q violated (p=" + std::to_string(cfg.p) +
                                   ", q=" + std::to_string(cfg.q) + ")");
  cfg.rbar = r.number("rbar");
  require(cfg.rbar > 0.0, "rbar", "must be positive");
  cfg.n_list = r.integers("n_list");
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    require(cfg.n_list[i] >= cfg.q + 1, "n_list", "every n must exceed q");
    require(i == 0 || cfg.n_list[i] > cfg.n_list[i - 1], "n_list", "must be increasing");
  }
  cfg.trials = read_count(r, "trials", 20, 0);
  cfg.epsilon = r.number("epsilon", 0.05);
  require(cfg.epsilon > 0.0, "epsilon", "must be positive");
  cfg.samples = read_count(r, "samples", 1000, 1000);
  cfg.max_k = r.unsigned_integer("max_k", kMaxCodebookSize);
  r.finish();
  cfg.seed = seed;
  return random_code_optimality_experiment(cfg);
}

ExperimentReport run_awgn(ConfigReader& r, std::uint64_t seed) {
  AwgnConfig base;
  const auto ns = r.integers("n");
  const auto rates = r.numbers("rate");
  base.beta = static_cast<int>(r.integer("beta", 2));
  base.sigma_sq = r.number("sigma_sq", 1.0);
  base.epsilon = r.number("epsilon", 0.05);
  base.trials = read_count(r, "trials", 1000, 1);
  base.clamp_k = r.boolean("clamp_k", false);
  base.max_k = r.unsigned_integer("max_k", kMaxCodebookSize);
  r.finish();
  for (int n : ns) require(n >= 4, "n", "must be >= 4");
  for (double x : rates) require(x >= 0.0, "rate", "must be non-negative");
  require(base.beta == 1 || base.beta == 2, "beta", "must be 1 (real) or 2 (complex)");
  require(base.sigma_sq > 0.0, "sigma_sq", "must be positive");
  require(base.epsilon > 0.0 && base.epsilon < 0.25, "epsilon", "must lie in (0, 1/4)");

  ExperimentReport report;
  std::size_t row = 0;
  for (int n : ns) {
    for (double rate : rates) {
      AwgnConfig cfg = base;
      cfg.n = n;
      cfg.rate = rate;
      cfg.seed = row_seed(seed, row++);
      auto one = awgn_grassmann_decode_experiment(cfg);
      if (report.columns.empty()) report = ExperimentReport(one.experiment, one.columns);
      report.add_row(std::move(one.rows.front()));
    }
  }
  return report;
}

ExperimentReport run_beamforming(ConfigReader& r, std::uint64_t seed) {
  BeamformingConfig cfg;
  cfg.tx = static_cast<int>(r.integer("tx"));
  cfg.rx = static_cast<int>(r.integer("rx"));
  cfg.streams = static_cast<int>(r.integer("streams"));
  cfg.rho = r.number("rho", 10.0);
  cfg.feedback_bits = static_cast<int>(r.integer("feedback_bits"));
  cfg.trials = read_count(r, "trials", 10000, 1000);
  cfg.design_iters = static_cast<int>(read_count(r, "design_iters", 5, 0));
  cfg.distortion_samples = read_count(r, "distortion_samples", 10000, 1000);
  const std::string kind = r.string("codebook", "maxmin");
  const std::string units = r.string("units", "bits");
  const std::string path = r.string("codebook_path", "");
  r.finish();
  require(cfg.rx >= 1 && cfg.rx < cfg.tx, "rx", "need 1 <= rx < tx");
  require(cfg.streams >= 1 && cfg.streams <= cfg.tx - 1, "streams", "need 1 <= streams <= tx-1");
  require(cfg.rho > 0.0, "rho", "must be positive");
  require(cfg.feedback_bits >= 0 && cfg.feedback_bits <= 16, "feedback_bits", "must lie in [0, 16]");
  require(kind == "maxmin" || kind == "random", "codebook", "must be 'maxmin' or 'random'");
  require(kind == "random" || cfg.feedback_bits >= 1, "feedback_bits", "max-min design needs >= 1 bit");
  require(units == "bits" || units == "nats", "units", "must be 'bits' or 'nats'");
  cfg.codebook = kind == "maxmin" ? BeamCodebook::MaxMin : BeamCodebook::Random;
  cfg.bits = units == "bits";
  cfg.seed = seed;
  if (!path.empty()) {
    const auto cb = load_codebook(path);
    require(cb.size() == (std::size_t{1} << cfg.feedback_bits), "codebook_path",
            "codebook size must equal 2^feedback_bits");
    return beamforming_throughput_experiment(cfg, &cb);
  }
  return beamforming_throughput_experiment(cfg);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"volume",     "distortion", "design",
                                              "random-opt", "awgn",       "beamforming"};
  return names;
}

ExperimentReport run_experiment(const std::string& experiment, const nlohmann::json& config,
                                const RunOptions& options) {
  ConfigReader r(config);
  if (r.has("experiment")) {
    require(r.string("experiment") == experiment, "experiment",
            "config is for '" + config.at("experiment").get<std::string>() + "', not '" +
                experiment + "'");
  }
  std::uint64_t seed = r.unsigned_integer("seed", 1);
  if (options.seed) seed = *options.seed;
  const auto threads = r.unsigned_integer("threads", 0);
  set_max_threads(options.threads ? *options.threads : static_cast<unsigned>(threads));

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  if (experiment == "volume") report = run_volume(r, seed);
  else if (experiment == "distortion") report = run_distortion(r, seed);
  else if (experiment == "design") report = run_design(r, seed);
  else if (experiment == "random-opt") report = run_random_opt(r, seed);
  else if (experiment == "awgn") report = run_awgn(r, seed);
  else if (experiment == "beamforming") report = run_beamforming(r, seed);
  else throw ConfigError("unknown experiment '" + experiment + "'");
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.config = nlohmann::ordered_json::parse(config.dump());
  report.config["experiment"] = experiment;
  report.config["seed"] = seed;
  return report;
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / (report.experiment + ".csv"), std::ios::binary);
    csv << report.to_csv();
    if (!csv) throw std::runtime_error("failed writing CSV report to " + dir.string());
  }
  std::ofstream js(dir / (report.experiment + ".json"), std::ios::binary);
  js << report.to_json().dump(2) << '\n';
  if (!js) throw std::runtime_error("failed writing JSON report to " + dir.string());
}

nlohmann::ordered_json save_codebook_from_config(const nlohmann::json& config,
                                                 const RunOptions& options,
                                                 const std::filesystem::path& path) {
  ConfigReader r(config);
  if (r.has("experiment")) r.mark("experiment");
  std::uint64_t seed = r.unsigned_integer("seed", 1);
  if (options.seed) seed = *options.seed;
  const auto threads = r.unsigned_integer("threads", 0);
  set_max_threads(options.threads ? *options.threads : static_cast<unsigned>(threads));
  const Shape s = read_shape(r);
  const auto cb = build_codebook(r, s, seed);
  r.finish();
  save_codebook(cb, path);
  nlohmann::ordered_json out;
  out["path"] = path.string();
  out["n"] = s.n;
  out["p"] = s.p;
  out["q"] = s.q;
  out["beta"] = s.beta;
  out["K"] = cb.size();
  out["kind"] = provenance_name(cb.provenance().kind);
  out["seed"] = cb.provenance().seed;
  out["trace"] = cb.provenance().trace;
  return out;
}

nlohmann::ordered_json describe_codebook_file(const std::filesystem::path& path) {
  const auto cb = load_codebook(path);
  nlohmann::ordered_json out;
  out["path"] = path.string();
  out["n"] = cb.code_spec().n;
  out["p"] = cb.source_spec().p;
  out["q"] = cb.code_spec().p;
  out["beta"] = cb.code_spec().beta();
  out["K"] = cb.size();
  out["seed"] = cb.provenance().seed;
  out["valid"] = true;
  if (cb.size() <= 4096) out["min_distance"] = min_pairwise_distance(cb);
  return out;
}

}  // namespace grassq
