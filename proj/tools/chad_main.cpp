// Copyright 2026 The CHAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using chad::cli::RunConfig;

// Flags shared by every subcommand; anything unset stays at the config
// file's (or built-in) value.
struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed, "override the command's seed");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c;
  if (!f.config_path.empty()) c = chad::cli::load_config(f.config_path);
  if (f.seed) {
    // One seed flag steers whichever streams the command reads.
    c.experiment.train.seed = *f.seed;
    c.experiment.seed = *f.seed;
    c.synth.seed = *f.seed;
    c.motivation_seed = *f.seed;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive anomaly detection for mixed tabular data"};
  app.require_subcommand(1);

  CommonFlags train_f;
  bool train_no_noise = false;
  auto* train = app.add_subcommand("train", "fit a model on normal records");
  add_common(train, train_f);
  train->add_flag("--no-latent-noise", train_no_noise,
                  "disable latent-space noise on negatives");

  CommonFlags score_f;
  std::string score_csv;
  std::optional<double> threshold;
  bool with_fae_r = false, sorted = false;
  auto* score = app.add_subcommand("score", "score records with a model");
  add_common(score, score_f);
  score->add_option("csv", score_csv, "records to score")->required();
  score->add_option("--threshold", threshold,
                    "flag rows with score below this");
  score->add_flag("--with-fae-r", with_fae_r,
                  "include the reconstruction-error column");
  score->add_flag("--sorted", sorted, "ascending score, most anomalous first");

  CommonFlags eval_f;
  std::optional<std::size_t> runs, sets;
  bool eval_no_noise = false;
  auto* eval = app.add_subcommand("eval", "repeated train/score protocol");
  add_common(eval, eval_f);
  eval->add_option("--runs", runs, "number of repeated runs");
  eval->add_option("--anomaly-sets", sets, "anomaly mixes per run");
  eval->add_flag("--no-latent-noise", eval_no_noise,
                 "disable latent-space noise on negatives");

  CommonFlags sweep_f;
  std::vector<double> ratios;
  auto* sweep = app.add_subcommand("sweep", "AP across anomaly ratios");
  add_common(sweep, sweep_f);
  sweep->add_option("--ratios", ratios, "anomaly ratios to sweep")
      ->delimiter(',');

  CommonFlags abl_f;
  auto* abl = app.add_subcommand("ablation", "latent-noise on/off comparison");
  add_common(abl, abl_f);

  CommonFlags motiv_f;
  bool dump = false;
  auto* motiv =
      app.add_subcommand("motivation", "2-d synthetic scorer comparison");
  add_common(motiv, motiv_f);
  motiv->add_flag("--dump", dump, "write point and score CSVs");

  CommonFlags stats_f;
  auto* stats =
      app.add_subcommand("negsample-stats", "audit the negative sampler");
  add_common(stats, stats_f);

  CommonFlags synth_f;
  auto* synth =
      app.add_subcommand("synth", "generate the network benchmark CSV");
  add_common(synth, synth_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      RunConfig c = resolve(train_f);
      if (train_no_noise)
        c.experiment.train.sampler.latent_noise_enabled = false;
      return chad::cli::cmd_train(c, train_f.out_dir);
    }
    if (score->parsed()) {
      RunConfig c = resolve(score_f);
      if (threshold)
        c.score.threshold = static_cast<chad::real_t>(*threshold);
      if (with_fae_r) c.score.with_fae_r = true;
      if (sorted) c.score.sorted = true;
      return chad::cli::cmd_score(c, score_csv, score_f.out_dir);
    }
    if (eval->parsed()) {
      RunConfig c = resolve(eval_f);
      if (runs) c.experiment.n_runs = *runs;
      if (sets) c.experiment.n_anomaly_sets = *sets;
      if (eval_no_noise)
        c.experiment.train.sampler.latent_noise_enabled = false;
      return chad::cli::cmd_eval(c, eval_f.out_dir);
    }
    if (sweep->parsed()) {
      RunConfig c = resolve(sweep_f);
      if (!ratios.empty()) {
        c.sweep_ratios.clear();
        for (double r : ratios)
          c.sweep_ratios.push_back(static_cast<chad::real_t>(r));
      }
      return chad::cli::cmd_sweep(c, sweep_f.out_dir);
    }
    if (abl->parsed())
      return chad::cli::cmd_ablation(resolve(abl_f), abl_f.out_dir);
    if (motiv->parsed()) {
      RunConfig c = resolve(motiv_f);
      if (dump) c.motivation_dump = true;
      return chad::cli::cmd_motivation(c, motiv_f.out_dir);
    }
    if (stats->parsed())
      return chad::cli::cmd_negsample_stats(resolve(stats_f),
                                            stats_f.out_dir);
    if (synth->parsed())
      return chad::cli::cmd_synth(resolve(synth_f), synth_f.out_dir);
  } catch (const chad::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return chad::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
