// Copyright 2026 The Wassdim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// wassdim: batch experiment harness for Wasserstein-decay intrinsic
// dimension estimation. Each subcommand reproduces one experiment at desk
// scale and writes results.csv, series.csv, and manifest.json to --out.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wassdim/experiments.hpp"
#include "wassdim/version.hpp"

namespace {

// "5..10" or "5,6,7" -> list of nonnegative integers.
template <typename T>
std::vector<T> parse_int_list(const std::string& flag,
                              const std::string& text) {
  std::vector<T> values;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const unsigned long lo = std::stoul(text.substr(0, dots));
    const unsigned long hi = std::stoul(text.substr(dots + 2));
    if (hi < lo) throw CLI::ValidationError(flag, "range is reversed");
    for (unsigned long v = lo; v <= hi; ++v)
      values.push_back(static_cast<T>(v));
    return values;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) values.push_back(static_cast<T>(std::stoul(tok)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.empty()) throw CLI::ValidationError(flag, "no values given");
  return values;
}

struct CliState {
  std::optional<std::string> config_file;
  std::optional<std::string> scales_text;
  std::optional<std::size_t> seed_count;
  std::optional<std::string> ot;
  std::optional<double> reg;
  std::optional<std::size_t> iters;
  std::optional<double> tol;
  std::optional<std::string> metric;
  std::optional<std::size_t> knn;
  std::optional<unsigned> degree;
  std::optional<std::string> ambient_text;
  std::optional<std::string> dims_text;
  std::optional<std::size_t> intrinsic_dim;
  std::optional<std::size_t> n_total;
  std::optional<std::string> digits_text;
  std::optional<std::size_t> mle_k;
  std::optional<unsigned> repetitions;
  std::optional<std::string> mnist_dir;
  std::optional<std::string> out_dir;
};

template <typename T>
void add_optional(CLI::App* cmd, const std::string& name,
                  std::optional<T>& slot, const std::string& help) {
  cmd->add_option_function<T>(
         name, [&slot](const T& v) { slot = v; }, help)
      ->expected(1);
}

void add_common_flags(CLI::App* cmd, CliState& state) {
  add_optional<std::string>(cmd, "--config", state.config_file,
                            "JSON config or manifest to start from");
  add_optional<std::string>(cmd, "--scales", state.scales_text,
                            "scale exponents, e.g. 5..10 or 5,7,9");
  add_optional<std::size_t>(cmd, "--seeds", state.seed_count,
                            "number of seeds (uses 1..N)");
  cmd->add_option_function<std::string>(
         "--ot", [&state](const std::string& v) { state.ot = v; },
         "transport solver")
      ->check(CLI::IsMember({"exact", "sinkhorn"}));
  add_optional<double>(cmd, "--reg", state.reg,
                       "sinkhorn entropic regularization");
  add_optional<std::size_t>(cmd, "--iters", state.iters,
                            "sinkhorn iteration cap");
  add_optional<double>(cmd, "--tol", state.tol,
                       "sinkhorn dual-change tolerance");
  cmd->add_option_function<std::string>(
         "--metric", [&state](const std::string& v) { state.metric = v; },
         "which ground metrics to run")
      ->check(CLI::IsMember({"euclid", "graph", "both"}));
  add_optional<std::size_t>(cmd, "--knn", state.knn,
                            "kNN graph neighbor count (0 = default rule)");
  add_optional<unsigned>(cmd, "--degree", state.degree,
                         "embedding degree (1 = isometric zero-pad)");
  add_optional<std::string>(cmd, "--ambient", state.ambient_text,
                            "ambient dimension(s), e.g. 20 or 20,50,100");
  add_optional<std::string>(cmd, "--dims", state.dims_text,
                            "sphere intrinsic dimensions, e.g. 2,4,8");
  add_optional<std::size_t>(cmd, "--intrinsic-dim", state.intrinsic_dim,
                            "fixed intrinsic dimension (ambient sweep)");
  add_optional<std::size_t>(cmd, "--n-total", state.n_total,
                            "corpus size for generated datasets");
  add_optional<std::string>(cmd, "--digits", state.digits_text,
                            "digit classes, e.g. 7 or 0..9");
  add_optional<std::size_t>(cmd, "--mle-k", state.mle_k,
                            "neighbor count for the MLE baseline");
  add_optional<unsigned>(cmd, "--reps", state.repetitions,
                         "W1 repetitions per scale (log-averaged)");
  add_optional<std::string>(cmd, "--mnist-dir", state.mnist_dir,
                            "directory with the four standard MNIST files");
  add_optional<std::string>(cmd, "--out", state.out_dir,
                            "output directory");
}

wassdim::ConfigOverrides to_overrides(const CliState& state) {
  wassdim::ConfigOverrides o;
  if (state.scales_text)
    o.scales = parse_int_list<unsigned>("--scales", *state.scales_text);
  o.seed_count = state.seed_count;
  o.ot = state.ot;
  o.reg = state.reg;
  o.iters = state.iters;
  o.tol = state.tol;
  o.metric = state.metric;
  o.knn_k = state.knn;
  o.degree = state.degree;
  if (state.ambient_text)
    o.ambient_dims =
        parse_int_list<std::size_t>("--ambient", *state.ambient_text);
  if (state.dims_text)
    o.sphere_dims = parse_int_list<std::size_t>("--dims", *state.dims_text);
  o.intrinsic_dim = state.intrinsic_dim;
  o.n_total = state.n_total;
  if (state.digits_text)
    o.digits = parse_int_list<int>("--digits", *state.digits_text);
  o.mle_k = state.mle_k;
  o.repetitions = state.repetitions;
  o.mnist_dir = state.mnist_dir;
  o.out_dir = state.out_dir;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-decay intrinsic dimension experiments"};
  app.set_version_flag("--version", wassdim::kVersion);
  app.require_subcommand(1);

  CliState state;
  std::optional<wassdim::ExperimentKind> chosen;
  for (wassdim::ExperimentKind kind :
       {wassdim::ExperimentKind::sphere_sweep,
        wassdim::ExperimentKind::ambient_sweep,
        wassdim::ExperimentKind::swiss_roll, wassdim::ExperimentKind::mnist,
        wassdim::ExperimentKind::fig1_residuals}) {
    CLI::App* cmd = app.add_subcommand(wassdim::to_string(kind));
    add_common_flags(cmd, state);
    cmd->callback([kind, &chosen] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<std::filesystem::path> config_path;
    if (state.config_file) config_path = *state.config_file;
    const wassdim::ExperimentConfig config =
        wassdim::parse_config(*chosen, config_path, to_overrides(state));
    const wassdim::ExperimentReport report = wassdim::run_experiment(config);
    wassdim::write_report(report, config);
    std::printf("%s: %zu result rows, %zu failures -> %s\n",
                wassdim::to_string(config.experiment),
                report.results_rows.size(), report.failures,
                config.out_dir.c_str());
    return report.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wassdim: %s\n", e.what());
    return 2;
  }
}
