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

// Command layer behind the chad binary: config file handling plus one
// function per subcommand. Each command writes its artifacts under an
// output directory and echoes the fully resolved configuration, so a run
// can be reproduced from the echo file alone.

#ifndef CHAD_CLI_HPP_
#define CHAD_CLI_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chad/common.hpp"
#include "chad/eval.hpp"
#include "chad/motivation.hpp"
#include "chad/synth.hpp"

namespace chad::cli {

struct ScoreOptions {
  std::string model_path;
  std::string schema_bin_path;
  std::optional<real_t> threshold;  // flag rows with score < threshold
  bool with_fae_r = false;          // add the reconstruction-error column
  bool sorted = false;              // ascending score, most anomalous first
};

/// Every tunable, with library defaults; loaded from a sectioned key=value
/// file and overridable by command-line flags.
struct RunConfig {
  std::string schema_path;  // [data] schema: declaration file
  std::string csv_path;     // [data] csv: the dataset

  eval::ExperimentConfig experiment;  // [arch], [train], [sampler], [eval]
  std::vector<real_t> sweep_ratios{real_t(0.02), real_t(0.04), real_t(0.06),
                                   real_t(0.08), real_t(0.10)};
  ScoreOptions score;                   // [score]
  std::size_t stats_samples = 100000;   // [stats] samples
  synth::SynthConfig synth;             // [synth]
  std::uint64_t motivation_seed = 1;    // [motivation] seed
  bool motivation_dump = false;         // [motivation] dump
};

/// Parse config text. Unknown keys and unparsable values are collected and
/// reported together in one Config error.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Full resolved configuration, parseable by parse_config_text.
std::string render_config(const RunConfig& config);

int cmd_train(const RunConfig& config, const std::string& out_dir);
int cmd_score(const RunConfig& config, const std::string& data_csv,
              const std::string& out_dir);
int cmd_eval(const RunConfig& config, const std::string& out_dir);
int cmd_sweep(const RunConfig& config, const std::string& out_dir);
int cmd_ablation(const RunConfig& config, const std::string& out_dir);
int cmd_motivation(const RunConfig& config, const std::string& out_dir);
int cmd_negsample_stats(const RunConfig& config, const std::string& out_dir);
int cmd_synth(const RunConfig& config, const std::string& out_dir);

/// 2 for configuration problems, 3 for data problems, 4 for training
/// failures, 1 otherwise.
int exit_code_for(const Error& e);

}  // namespace chad::cli

#endif  // CHAD_CLI_HPP_
