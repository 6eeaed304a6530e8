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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace chad;
using cli::RunConfig;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("chad_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Exit code of the chad binary run with the given arguments.
int run_chad(const std::string& args) {
  const std::string cmd =
      std::string(CHAD_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status >= 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("defaults survive a render/parse round trip") {
  const RunConfig base;
  const RunConfig back = cli::parse_config_text(cli::render_config(base));

  CHECK(back.schema_path == base.schema_path);
  CHECK(back.csv_path == base.csv_path);
  CHECK(back.experiment.arch.encoder_widths ==
        base.experiment.arch.encoder_widths);
  CHECK(back.experiment.arch.ae_dropout == base.experiment.arch.ae_dropout);
  CHECK(back.experiment.train.learning_rate ==
        base.experiment.train.learning_rate);
  CHECK(back.experiment.train.batch_size == base.experiment.train.batch_size);
  CHECK(back.experiment.train.schedule.phase1_epochs ==
        base.experiment.train.schedule.phase1_epochs);
  CHECK(back.experiment.train.sampler.negatives_per_instance ==
        base.experiment.train.sampler.negatives_per_instance);
  CHECK(back.experiment.train.sampler.noise_deviation ==
        base.experiment.train.sampler.noise_deviation);
  CHECK(back.experiment.train_fraction == base.experiment.train_fraction);
  CHECK(back.sweep_ratios == base.sweep_ratios);
  CHECK(!back.score.threshold.has_value());
  CHECK(back.stats_samples == base.stats_samples);
  CHECK(back.synth.n_normal == base.synth.n_normal);
  CHECK(back.motivation_seed == base.motivation_seed);
}

TEST_CASE("non-default values survive the round trip") {
  RunConfig c;
  c.schema_path = "a.schema";
  c.csv_path = "b.csv";
  c.experiment.arch.encoder_widths = {40, 20};
  c.experiment.train.learning_rate = real_t(0.001);
  c.experiment.train.seed = 77;
  c.experiment.train.sampler.latent_noise_enabled = false;
  c.experiment.n_runs = 4;
  c.sweep_ratios = {real_t(0.05), real_t(0.5)};
  c.score.threshold = real_t(0.25);
  c.score.with_fae_r = true;
  c.score.sorted = true;
  c.motivation_dump = true;

  const RunConfig back = cli::parse_config_text(cli::render_config(c));
  CHECK(back.schema_path == "a.schema");
  CHECK(back.experiment.arch.encoder_widths ==
        std::vector<std::size_t>{40, 20});
  CHECK(back.experiment.train.learning_rate == real_t(0.001));
  CHECK(back.experiment.train.seed == 77);
  CHECK_FALSE(back.experiment.train.sampler.latent_noise_enabled);
  CHECK(back.experiment.n_runs == 4);
  CHECK(back.sweep_ratios == c.sweep_ratios);
  REQUIRE(back.score.threshold.has_value());
  CHECK(*back.score.threshold == real_t(0.25));
  CHECK(back.score.with_fae_r);
  CHECK(back.score.sorted);
  CHECK(back.motivation_dump);
}

TEST_CASE("comments, blank lines and spacing are tolerated") {
  const auto c = cli::parse_config_text(
      "# leading comment\n"
      "\n"
      "  [train]  \n"
      "  batch_size =  128   # trailing comment\n"
      "\n"
      "[eval]\n"
      "runs=3\n");
  CHECK(c.experiment.train.batch_size == 128);
  CHECK(c.experiment.n_runs == 3);
}

TEST_CASE("bad config reports every problem at once") {
  try {
    cli::parse_config_text(
        "[train]\n"
        "batch_size = many\n"
        "mystery = 1\n"
        "[nowhere]\n"
        "key = v\n");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    const std::string msg = e.what();
    CHECK(msg.find("bad count for train.batch_size") != std::string::npos);
    CHECK(msg.find("unknown config key: train.mystery") != std::string::npos);
    CHECK(msg.find("unknown config key: nowhere.key") != std::string::npos);
  }
}

TEST_CASE("threshold parses 'none' and numbers") {
  const auto off = cli::parse_config_text("[score]\nthreshold = none\n");
  CHECK(!off.score.threshold.has_value());
  const auto on = cli::parse_config_text("[score]\nthreshold = 0.125\n");
  REQUIRE(on.score.threshold.has_value());
  CHECK(*on.score.threshold == real_t(0.125));
}

TEST_CASE("exit codes map error kinds") {
  CHECK(cli::exit_code_for(Error(ErrorKind::Config, "x")) == 2);
  CHECK(cli::exit_code_for(Error(ErrorKind::Data, "x")) == 3);
  CHECK(cli::exit_code_for(Error(ErrorKind::Train, "x")) == 4);
  CHECK(cli::exit_code_for(Error(ErrorKind::Internal, "x")) == 1);
}

TEST_CASE("pipeline: synth, train, score, eval through the binary") {
  const fs::path dir = fresh_dir("pipeline");
  const std::string d = dir.string();

  REQUIRE(run_chad("synth --seed 31 --out " + d + "/gen") == 0);
  REQUIRE(fs::exists(dir / "gen/network.csv"));
  REQUIRE(fs::exists(dir / "gen/network.schema"));

  // Tiny but complete three-phase schedule; quality is not under test here.
  spit(d + "/run.cfg",
       "[data]\n"
       "schema = " + d + "/gen/network.schema\n"
       "csv = " + d + "/gen/network.csv\n"
       "[train]\n"
       "phase1_epochs = 1\nphase2_epochs = 1\nphase3_epochs = 1\n"
       "seed = 5\n"
       "[eval]\nruns = 1\nanomaly_sets = 1\nseed = 6\n");

  SUBCASE("train writes its artifact set and is deterministic") {
    REQUIRE(run_chad("train --config " + d + "/run.cfg --out " + d + "/t1") ==
            0);
    for (const char* f : {"model.chm", "schema.bin", "train_log.jsonl",
                          "config-echo.txt"})
      CHECK(fs::exists(dir / "t1" / f));
    CHECK(fs::exists(dir / "t1/checkpoints/phase3.chm"));

    REQUIRE(run_chad("train --config " + d + "/run.cfg --out " + d + "/t2") ==
            0);
    CHECK(slurp(d + "/t1/model.chm") == slurp(d + "/t2/model.chm"));

    // The echo alone reproduces the run.
    REQUIRE(run_chad("train --config " + d + "/t1/config-echo.txt --out " +
                     d + "/t3") == 0);
    CHECK(slurp(d + "/t1/model.chm") == slurp(d + "/t3/model.chm"));

    SUBCASE("score: row accounting, threshold flags, sorted order") {
      spit(d + "/score.cfg",
           "[score]\n"
           "model = " + d + "/t1/model.chm\n"
           "schema_bin = " + d + "/t1/schema.bin\n");

      // 60 good rows + a short row + an unseen-category row.
      std::istringstream src(slurp(d + "/gen/network.csv"));
      std::ostringstream sample;
      std::string line;
      std::size_t copied = 0;
      while (copied < 61 && std::getline(src, line)) {
        sample << line << "\n";
        ++copied;
      }
      sample << "tcp,http\n";
      std::getline(src, line);
      sample << "no_such_proto" << line.substr(line.find(',')) << "\n";
      spit(d + "/sample.csv", sample.str());

      REQUIRE(run_chad("score " + d + "/sample.csv --config " + d +
                       "/score.cfg --out " + d +
                       "/sc --threshold 0.5 --sorted") == 0);
      const std::string scores = slurp(d + "/sc/scores.csv");
      const std::string rejects = slurp(d + "/sc/scores_rejects.csv");
      CHECK(scores.rfind("id,score,flagged\n", 0) == 0);
      CHECK(count_lines(scores) - 1 == 60);
      CHECK(count_lines(rejects) - 1 == 2);
      CHECK(rejects.find("expected 42 cells") != std::string::npos);
      CHECK(rejects.find("no_such_proto") != std::string::npos);

      // Ascending score, flag consistent with the threshold.
      std::istringstream rows(scores);
      std::getline(rows, line);
      double prev = -1;
      while (std::getline(rows, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double s = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        const int flagged = std::stoi(line.substr(c2 + 1));
        CHECK(s >= prev);
        CHECK(flagged == (s < 0.5 ? 1 : 0));
        prev = s;
      }

      // The extra column appears only when asked for.
      REQUIRE(run_chad("score " + d + "/sample.csv --config " + d +
                       "/score.cfg --out " + d + "/sc2 --with-fae-r") == 0);
      CHECK(slurp(d + "/sc2/scores.csv").rfind("id,score,recon_score\n", 0) ==
            0);

      // A model refuses a schema fitted on other data.
      REQUIRE(run_chad("synth --seed 99 --out " + d + "/gen2") == 0);
      spit(d + "/run2.cfg",
           "[data]\n"
           "schema = " + d + "/gen2/network.schema\n"
           "csv = " + d + "/gen2/network.csv\n"
           "[train]\n"
           "phase1_epochs = 1\nphase2_epochs = 0\nphase3_epochs = 1\n"
           "seed = 5\n");
      REQUIRE(run_chad("train --config " + d + "/run2.cfg --out " + d +
                       "/t5") == 0);
      spit(d + "/score_mismatch.cfg",
           "[score]\n"
           "model = " + d + "/t1/model.chm\n"
           "schema_bin = " + d + "/t5/schema.bin\n");
      CHECK(run_chad("score " + d + "/sample.csv --config " + d +
                     "/score_mismatch.cfg --out " + d + "/scbad") == 3);
    }

    SUBCASE("eval and sweep reports") {
      REQUIRE(run_chad("eval --config " + d + "/run.cfg --out " + d +
                       "/ev") == 0);
      const std::string report = slurp(d + "/ev/eval_report.txt");
      CHECK(report.find("seed = 6") != std::string::npos);
      CHECK(report.find("config_fingerprint = ") != std::string::npos);
      CHECK(report.find("(\xc2\xb1 ") != std::string::npos);

      REQUIRE(run_chad("sweep --config " + d + "/run.cfg --out " + d +
                       "/sw --ratios 0.05,0.1") == 0);
      const std::string sweep = slurp(d + "/sw/sweep_report.txt");
      CHECK(sweep.find("ratio,ap") != std::string::npos);
      CHECK(count_lines(sweep.substr(sweep.find("ratio,ap"))) == 3);
    }
  }
}

TEST_CASE("motivation command writes the four-scorer table") {
  const fs::path dir = fresh_dir("motiv");
  const std::string d = dir.string();
  REQUIRE(run_chad("motivation --seed 2 --out " + d + " --dump") == 0);
  const std::string report = slurp(d + "/motivation_report.txt");
  CHECK(report.find("gmm k=2,") != std::string::npos);
  CHECK(report.find("k-means k=2,") != std::string::npos);
  CHECK(report.find("k-means k=1,") != std::string::npos);
  CHECK(report.find("contrast,") != std::string::npos);
  CHECK(fs::exists(dir / "motivation_points.csv"));
  CHECK(fs::exists(dir / "motivation_scores.csv"));
}

TEST_CASE("failure exit codes through the binary") {
  const fs::path dir = fresh_dir("errs");
  const std::string d = dir.string();

  spit(d + "/unknown.cfg", "[data]\nwhat = 1\n");
  CHECK(run_chad("train --config " + d + "/unknown.cfg --out " + d + "/o") ==
        2);

  REQUIRE(run_chad("synth --seed 8 --out " + d + "/gen") == 0);

  // A schema decl that cannot be opened is a configuration problem; a csv
  // that cannot be opened is a data problem.
  spit(d + "/noschema.cfg",
       "[data]\nschema = " + d + "/nope.schema\ncsv = " + d +
           "/gen/network.csv\n");
  CHECK(run_chad("train --config " + d + "/noschema.cfg --out " + d + "/o") ==
        2);
  spit(d + "/nocsv.cfg",
       "[data]\nschema = " + d + "/gen/network.schema\ncsv = " + d +
           "/nope.csv\n");
  CHECK(run_chad("train --config " + d + "/nocsv.cfg --out " + d + "/o") ==
        3);

  CHECK(run_chad("train --config " + d + "/absent.cfg --out " + d + "/o") ==
        2);
  CHECK(run_chad("not-a-command") == 2);
  // eval needs labels; strip the label directive to provoke the data error.
  std::string decl = slurp(d + "/gen/network.schema");
  const auto at = decl.find("label ");
  REQUIRE(at != std::string::npos);
  decl.resize(at);
  spit(d + "/nolabel.schema", decl);
  spit(d + "/nolabel.cfg",
       "[data]\nschema = " + d + "/nolabel.schema\ncsv = " + d +
           "/gen/network.csv\n"
           "[train]\nphase1_epochs = 1\nphase2_epochs = 0\n"
           "phase3_epochs = 1\n");
  CHECK(run_chad("eval --config " + d + "/nolabel.cfg --out " + d + "/o") ==
        3);
}
