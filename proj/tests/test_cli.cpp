// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "grassq/codebook_io.hpp"
#include "grassq/error.hpp"
#include "grassq/runner.hpp"

using namespace grassq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("grassq_cli_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GRASSQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string header(const ExperimentReport& r) {
  const auto csv = r.to_csv();
  return csv.substr(0, csv.find('\n'));
}

const json kVolume = {{"n", 4}, {"p", 1}, {"q", 1}, {"beta", 2}, {"samples", 2000}};
const json kDistortion = {{"n", 4}, {"p", 1}, {"q", 2}, {"beta", 2}, {"K", 8}, {"samples", 1000}};
const json kDesign = {{"n", 4},          {"p", 1},           {"q", 1},
                      {"beta", 2},       {"K_list", {4, 8}}, {"iters", 1},
                      {"training_samples", 500}, {"eval_samples", 1000}, {"random_trials", 2}};
const json kRandomOpt = {{"p", 1}, {"q", 1}, {"beta", 2}, {"rbar", 1.0}, {"n_list", {4, 5}}, {"trials", 2}};
const json kAwgn = {{"n", {8, 10}}, {"rate", 0.5}, {"trials", 50}};
const json kBeam = {{"tx", 4},         {"rx", 1},      {"streams", 1},
                    {"feedback_bits", 2}, {"trials", 1000}, {"distortion_samples", 1000},
                    {"design_iters", 1}};

}  // namespace

TEST_CASE("golden CSV headers") {
  CHECK(header(run_experiment("volume", kVolume)) ==
        "delta,mc,stderr,closed_form,lower,upper,barg_nogin,seed");
  CHECK(header(run_experiment("distortion", kDistortion)) ==
        "K,kind,distortion,stderr,samples,drf_lower,drf_upper,regime_ok,seed");
  CHECK(header(run_experiment("design", kDesign)) ==
        "K,designed,designed_stderr,random_mean,random_stderr,drf_lower,drf_upper,regime_ok,"
        "min_distance,seed");
  CHECK(header(run_experiment("random-opt", kRandomOpt)) ==
        "n,K,trials,exceed_count,exceed_fraction,mean_distortion,asymptotic_drf,threshold,"
        "drf_lower,drf_upper,regime_ok,cap_exceeded,seed");
  CHECK(header(run_experiment("awgn", kAwgn)) ==
        "n,beta,K,rate,effective_rate,sigma_sq,epsilon,trials,errors,error_rate,error_stderr,"
        "dc2_mean,dc2_stderr,window_lo,window_hi,capacity,rate_threshold,seed");
  CHECK(header(run_experiment("beamforming", kBeam)) ==
        "tx,rx,streams,rho,feedback_bits,K,codebook,trials,throughput,throughput_stderr,"
        "trace_mean,trace_stderr,distortion,distortion_stderr,trace_from_distortion,identity_gap,"
        "combined_stderr,identity_ok,bound_from_distortion,bound_ok,drf_lower,drf_upper,"
        "drf_regime_ok,bound_from_drf_lower,bound_from_drf_upper,units,seed");
}

TEST_CASE("volume rows carry the closed-form columns") {
  auto cfg = kVolume;
  cfg["deltas"] = {0.5, 1.0};
  const auto r = run_experiment("volume", cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.number(0, "closed_form") == doctest::Approx(0.015625));
  CHECK(r.number(0, "barg_nogin") == doctest::Approx(std::pow(0.5, 8)));
  CHECK(r.number(1, "mc") == 1.0);
}

TEST_CASE("identical config and seed give identical CSV bytes, across thread counts") {
  for (const auto& [name, cfg] : {std::pair{"volume", kVolume}, std::pair{"design", kDesign},
                                  std::pair{"random-opt", kRandomOpt}, std::pair{"awgn", kAwgn},
                                  std::pair{"beamforming", kBeam}}) {
    const auto a = run_experiment(name, cfg, {std::uint64_t{5}, 1u}).to_csv();
    const auto b = run_experiment(name, cfg, {std::uint64_t{5}, 3u}).to_csv();
    CHECK(a == b);
    CHECK(a != run_experiment(name, cfg, {std::uint64_t{6}, 1u}).to_csv());
  }
}

TEST_CASE("rows regenerate from their embedded seed") {
  const auto sweep = run_experiment("awgn", kAwgn, {std::uint64_t{40}, {}});
  REQUIRE(sweep.rows.size() == 2);
  const auto seed = std::get<std::uint64_t>(sweep.rows[1][sweep.column("seed")]);
  auto one = kAwgn;
  one["n"] = 10;
  const auto alone = run_experiment("awgn", one, {seed, {}});
  CHECK(alone.rows[0] == sweep.rows[1]);

  const auto design = run_experiment("design", kDesign, {std::uint64_t{9}, {}});
  auto d1 = kDesign;
  d1["K_list"] = 8;
  const auto dseed = std::get<std::uint64_t>(design.rows[1][design.column("seed")]);
  CHECK(run_experiment("design", d1, {dseed, {}}).rows[0] == design.rows[1]);

  const auto ro = run_experiment("random-opt", kRandomOpt, {std::uint64_t{3}, {}});
  auto r1 = kRandomOpt;
  r1["n_list"] = {5};
  const auto rseed = std::get<std::uint64_t>(ro.rows[1][ro.column("seed")]);
  CHECK(run_experiment("random-opt", r1, {rseed, {}}).rows[0] == ro.rows[1]);
}

TEST_CASE("config validation names the offending field") {
  auto bad = kVolume;
  bad["p"] = 2;
  try {
    run_experiment("volume", bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("order constraint") != std::string::npos);
  }
  auto extra = kVolume;
  extra["smaples"] = 10;
  try {
    run_experiment("volume", extra);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("smaples") != std::string::npos);
  }
  auto typed = kVolume;
  typed["n"] = "four";
  CHECK_THROWS_AS(run_experiment("volume", typed), ConfigError);
  auto small = kVolume;
  small["samples"] = 10;
  CHECK_THROWS_AS(run_experiment("volume", small), ConfigError);
  auto big_delta = kVolume;
  big_delta["deltas"] = {2.0};
  CHECK_THROWS_AS(run_experiment("volume", big_delta), ConfigError);
  auto wrong_exp = kVolume;
  wrong_exp["experiment"] = "awgn";
  CHECK_THROWS_AS(run_experiment("volume", wrong_exp), ConfigError);
  CHECK_THROWS_AS(run_experiment("nope", kVolume), ConfigError);
  auto eps = kAwgn;
  eps["epsilon"] = 0.3;
  CHECK_THROWS_AS(run_experiment("awgn", eps), ConfigError);
  auto beam = kBeam;
  beam["streams"] = 4;
  CHECK_THROWS_AS(run_experiment("beamforming", beam), ConfigError);
  CHECK_THROWS_AS(run_experiment("volume", json::array()), ConfigError);
}

TEST_CASE("reports carry config, version and timing in JSON") {
  const auto r = run_experiment("volume", kVolume, {std::uint64_t{12}, {}});
  const auto j = r.to_json();
  CHECK(j["config"]["seed"] == 12);
  CHECK(j["config"]["experiment"] == "volume");
  CHECK(j["version"] == kLibraryVersion);
  CHECK(j.contains("wall_time_s"));
  CHECK(r.to_csv().find("wall") == std::string::npos);
}

TEST_CASE("command line: experiments, exit codes and output files") {
  const auto dir = scratch("run");
  const auto cfg = dir / "volume.json";
  std::ofstream(cfg) << kVolume.dump();
  CHECK(run_cli("volume --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
  CHECK(run_cli("volume --config " + cfg.string() + " --out " + (dir / "b").string() + " --threads 2") == 0);
  CHECK(fs::exists(dir / "a" / "volume.json"));
  CHECK(slurp(dir / "a" / "volume.csv") == slurp(dir / "b" / "volume.csv"));
  CHECK_FALSE(slurp(dir / "a" / "volume.csv").empty());

  CHECK(run_cli("volume --config " + cfg.string() + " --set p=3 --set q=2") == 2);
  CHECK(run_cli("volume --config " + cfg.string() + " --set typo=1") == 2);
  CHECK(run_cli("volume --config /nonexistent.json") == 2);
  CHECK(run_cli("frobnicate") == 2);
  // Runtime failure: the AWGN point exceeds the codebook cap.
  CHECK(run_cli("awgn --set n=20 --set rate=1 --set trials=1") == 3);
}

TEST_CASE("command line: codebook save, load and verify") {
  const auto dir = scratch("codebook");
  const auto cfg = dir / "book.json";
  std::ofstream(cfg) << json{{"n", 4}, {"p", 1}, {"q", 2}, {"beta", 2}, {"K", 8},
                             {"kind", "maxmin"}, {"iters", 2}, {"training_samples", 500}}
                            .dump();
  const auto book = dir / "cb.json";
  CHECK(run_cli("codebook save --config " + cfg.string() + " --file " + book.string() + " --seed 4") == 0);
  CHECK(run_cli("codebook load " + book.string()) == 0);
  CHECK(run_cli("codebook verify " + book.string()) == 0);
  const auto cb = load_codebook(book);
  CHECK(cb.size() == 8);
  CHECK(cb.provenance().seed == 4);

  auto j = json::parse(slurp(book));
  j["entries"][0][0] = j["entries"][0][0].get<double>() + 1e-3;
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << j.dump();
  CHECK(run_cli("codebook verify " + broken.string()) == 3);
  const auto text = slurp(book);
  const auto cut = dir / "cut.json";
  std::ofstream(cut) << text.substr(0, text.size() / 3);
  CHECK(run_cli("codebook verify " + cut.string()) == 3);

  // A stored codebook drives the distortion experiment.
  const auto r = run_experiment("distortion", {{"codebook_path", book.string()}, {"samples", 1000}});
  CHECK(r.number(0, "K") == 8.0);
  fs::remove_all(dir.parent_path());
}
