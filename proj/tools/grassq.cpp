// SPDX-License-Identifier: Apache-2.0
//
// grassq: run Grassmann quantization experiments from JSON configs.
//
//   grassq volume --config volume.json --out results/
//   grassq awgn --set n=64 --set rate=0.5 --seed 7
//   grassq codebook save --config book.json --file book.json
//   grassq codebook verify book.json
//
// Exit status: 0 success, 2 configuration error, 3 runtime failure.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "grassq/error.hpp"
#include "grassq/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool with_out) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "Override a config field, KEY=VALUE (VALUE parsed as JSON)");
  app->add_option("--seed", c.seed, "Master seed (overrides the config)");
  app->add_option("--threads", c.threads, "Worker threads, 0 = all cores");
  if (with_out) app->add_option("--out", c.out, "Directory for <experiment>.csv/.json");
}

nlohmann::json build_config(const Common& c) {
  nlohmann::json j = c.config.empty() ? nlohmann::json::object() : grassq::load_config(c.config);
  if (!j.is_object()) throw grassq::ConfigError("config must be a JSON object");
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw grassq::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      j[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      j[key] = value;  // bare strings such as codebook=random
    }
  }
  return j;
}

grassq::RunOptions options_of(const Common& c) { return {c.seed, c.threads}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmann manifold quantization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(grassq::kLibraryVersion));

  std::map<std::string, Common> runs;
  for (const auto& name : grassq::experiment_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    add_common(sub, runs[name], true);
  }

  auto* cb = app.add_subcommand("codebook", "Create, load or verify codebook files");
  cb->require_subcommand(1);
  Common save_opts;
  std::string save_path, load_path, verify_path;
  auto* save = cb->add_subcommand("save", "Design or draw a codebook and write it to --file");
  add_common(save, save_opts, false);
  save->add_option("--file", save_path, "Output codebook file")->required();
  auto* load = cb->add_subcommand("load", "Load a codebook file and print its summary");
  load->add_option("file", load_path, "Codebook file")->required();
  auto* verify = cb->add_subcommand("verify", "Check a codebook file; nonzero exit if invalid");
  verify->add_option("file", verify_path, "Codebook file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    for (auto& [name, common] : runs) {
      if (!app.got_subcommand(name)) continue;
      const auto report = grassq::run_experiment(name, build_config(common), options_of(common));
      if (common.out.empty()) {
        std::cout << report.to_csv();
      } else {
        grassq::write_report(report, common.out);
        std::printf("wrote %s/%s.csv (%zu rows, %.2fs)\n", common.out.c_str(),
                    report.experiment.c_str(), report.rows.size(), report.wall_time_s);
      }
      return 0;
    }
    if (save->parsed()) {
      std::cout << grassq::save_codebook_from_config(build_config(save_opts), options_of(save_opts),
                                                     save_path)
                       .dump(2)
                << '\n';
    } else if (load->parsed()) {
      std::cout << grassq::describe_codebook_file(load_path).dump(2) << '\n';
    } else if (verify->parsed()) {
      grassq::describe_codebook_file(verify_path);
      std::printf("ok %s\n", verify_path.c_str());
    }
    return 0;
  } catch (const grassq::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const grassq::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
