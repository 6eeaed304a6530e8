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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "chad/data.hpp"
#include "chad/model.hpp"
#include "chad/negsampler.hpp"
#include "chad/trainer.hpp"

namespace chad::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t at = 0;
  for (;;) {
    const auto pos = line.find(sep, at);
    if (pos == std::string::npos) {
      out.push_back(line.substr(at));
      return out;
    }
    out.push_back(line.substr(at, pos - at));
    at = pos + 1;
  }
}

std::string fmt_real(real_t v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
  return buf;
}

std::string fmt_ap(real_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", static_cast<double>(v));
  return buf;
}

// Accumulates parse problems so a bad config reports everything at once.
struct ValueReader {
  std::vector<std::string>* errs;

  bool as_real(const std::string& key, const std::string& v, real_t* out) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      *out = static_cast<real_t>(d);
      return true;
    } catch (const std::exception&) {
      errs->push_back("bad number for " + key + ": '" + v + "'");
      return false;
    }
  }

  bool as_size(const std::string& key, const std::string& v,
               std::size_t* out) {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size() || n < 0) throw std::invalid_argument(v);
      *out = static_cast<std::size_t>(n);
      return true;
    } catch (const std::exception&) {
      errs->push_back("bad count for " + key + ": '" + v + "'");
      return false;
    }
  }

  bool as_u64(const std::string& key, const std::string& v,
              std::uint64_t* out) {
    try {
      std::size_t used = 0;
      const unsigned long long n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      *out = n;
      return true;
    } catch (const std::exception&) {
      errs->push_back("bad seed for " + key + ": '" + v + "'");
      return false;
    }
  }

  bool as_bool(const std::string& key, const std::string& v, bool* out) {
    if (v == "true" || v == "1") {
      *out = true;
      return true;
    }
    if (v == "false" || v == "0") {
      *out = false;
      return true;
    }
    errs->push_back("bad flag for " + key + ": '" + v +
                    "' (want true/false)");
    return false;
  }

  bool as_real_list(const std::string& key, const std::string& v,
                    std::vector<real_t>* out) {
    std::vector<real_t> vals;
    for (const auto& part : split(v, ',')) {
      real_t r;
      if (!as_real(key, trim(part), &r)) return false;
      vals.push_back(r);
    }
    if (vals.empty()) {
      errs->push_back("empty list for " + key);
      return false;
    }
    *out = std::move(vals);
    return true;
  }

  bool as_size_list(const std::string& key, const std::string& v,
                    std::vector<std::size_t>* out) {
    std::vector<std::size_t> vals;
    for (const auto& part : split(v, ',')) {
      std::size_t n;
      if (!as_size(key, trim(part), &n)) return false;
      vals.push_back(n);
    }
    if (vals.empty()) {
      errs->push_back("empty list for " + key);
      return false;
    }
    *out = std::move(vals);
    return true;
  }
};

void apply_key(RunConfig& c, const std::string& key, const std::string& value,
               std::vector<std::string>& errs) {
  ValueReader rd{&errs};
  auto& ex = c.experiment;
  auto& tr = ex.train;

  if (key == "data.schema") c.schema_path = value;
  else if (key == "data.csv") c.csv_path = value;

  else if (key == "arch.encoder_widths")
    rd.as_size_list(key, value, &ex.arch.encoder_widths);
  else if (key == "arch.ae_dropout") rd.as_real(key, value, &ex.arch.ae_dropout);
  else if (key == "arch.est_dropout")
    rd.as_real(key, value, &ex.arch.est_dropout);
  else if (key == "arch.embed_threshold")
    rd.as_size(key, value, &ex.arch.embed_threshold);
  else if (key == "arch.embed_max_dim")
    rd.as_size(key, value, &ex.arch.embed_max_dim);
  else if (key == "arch.cont_proj_width")
    rd.as_size(key, value, &ex.arch.cont_proj_width);

  else if (key == "train.learning_rate")
    rd.as_real(key, value, &tr.learning_rate);
  else if (key == "train.batch_size") rd.as_size(key, value, &tr.batch_size);
  else if (key == "train.phase1_epochs")
    rd.as_size(key, value, &tr.schedule.phase1_epochs);
  else if (key == "train.phase2_epochs")
    rd.as_size(key, value, &tr.schedule.phase2_epochs);
  else if (key == "train.phase3_epochs")
    rd.as_size(key, value, &tr.schedule.phase3_epochs);
  else if (key == "train.gamma_max") rd.as_real(key, value, &tr.gamma_max);
  else if (key == "train.seed") rd.as_u64(key, value, &tr.seed);

  else if (key == "sampler.negatives")
    rd.as_size(key, value, &tr.sampler.negatives_per_instance);
  else if (key == "sampler.noise_deviation")
    rd.as_real(key, value, &tr.sampler.noise_deviation);
  else if (key == "sampler.dampening_exponent")
    rd.as_real(key, value, &tr.sampler.dampening_exponent);
  else if (key == "sampler.latent_noise")
    rd.as_bool(key, value, &tr.sampler.latent_noise_enabled);

  else if (key == "eval.train_fraction")
    rd.as_real(key, value, &ex.train_fraction);
  else if (key == "eval.anomaly_ratio")
    rd.as_real(key, value, &ex.anomaly_ratio);
  else if (key == "eval.runs") rd.as_size(key, value, &ex.n_runs);
  else if (key == "eval.anomaly_sets")
    rd.as_size(key, value, &ex.n_anomaly_sets);
  else if (key == "eval.seed") rd.as_u64(key, value, &ex.seed);
  else if (key == "eval.ratios") rd.as_real_list(key, value, &c.sweep_ratios);

  else if (key == "score.model") c.score.model_path = value;
  else if (key == "score.schema_bin") c.score.schema_bin_path = value;
  else if (key == "score.threshold") {
    if (value == "none") {
      c.score.threshold.reset();
    } else {
      real_t t;
      if (rd.as_real(key, value, &t)) c.score.threshold = t;
    }
  } else if (key == "score.with_fae_r")
    rd.as_bool(key, value, &c.score.with_fae_r);
  else if (key == "score.sorted") rd.as_bool(key, value, &c.score.sorted);

  else if (key == "stats.samples") rd.as_size(key, value, &c.stats_samples);

  else if (key == "synth.normals") rd.as_size(key, value, &c.synth.n_normal);
  else if (key == "synth.anomalies")
    rd.as_size(key, value, &c.synth.n_anomaly);
  else if (key == "synth.seed") rd.as_u64(key, value, &c.synth.seed);

  else if (key == "motivation.seed")
    rd.as_u64(key, value, &c.motivation_seed);
  else if (key == "motivation.dump")
    rd.as_bool(key, value, &c.motivation_dump);

  else errs.push_back("unknown config key: " + key);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Data, "cannot create directory: " + dir);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write: " + path);
  out << text;
  if (!out) fail(ErrorKind::Data, "short write: " + path);
}

void write_echo(const RunConfig& config, const std::string& out_dir) {
  write_file(out_dir + "/config-echo.txt", render_config(config));
}

/// Loads the configured dataset; raw continuous values, schema unfitted.
data::LoadResult load_input(const RunConfig& config, bool need_label) {
  std::vector<std::string> missing;
  if (config.schema_path.empty()) missing.push_back("data.schema");
  if (config.csv_path.empty()) missing.push_back("data.csv");
  if (!missing.empty()) {
    std::string msg = "missing config values:";
    for (const auto& m : missing) msg += " " + m;
    fail(ErrorKind::Config, msg);
  }
  const auto decl = data::load_schema_decl(config.schema_path);
  auto loaded = data::load_csv(config.csv_path, decl);
  if (need_label && !loaded.dataset.labeled())
    fail(ErrorKind::Data,
         "this command needs labeled data; the schema declares no label "
         "column");
  return loaded;
}

std::string report_header(const char* command, std::uint64_t seed,
                          std::uint64_t fingerprint) {
  std::ostringstream out;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(fingerprint));
  out << "chad " << command << " report\n"
      << "seed = " << seed << "\n"
      << "config_fingerprint = " << fp << "\n\n";
  return out.str();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::vector<std::string> errs;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.push_back("line " + std::to_string(line_no) +
                       ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back("line " + std::to_string(line_no) +
                     ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errs.push_back("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    apply_key(config, section.empty() ? key : section + "." + key, value,
              errs);
  }
  if (!errs.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : errs) msg += "\n  " + e;
    fail(ErrorKind::Config, msg);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot read config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string render_config(const RunConfig& c) {
  const auto& ex = c.experiment;
  const auto& tr = ex.train;
  std::ostringstream o;
  o << "[data]\n"
    << "schema = " << c.schema_path << "\n"
    << "csv = " << c.csv_path << "\n\n";

  o << "[arch]\nencoder_widths = ";
  for (std::size_t i = 0; i < ex.arch.encoder_widths.size(); ++i)
    o << (i ? "," : "") << ex.arch.encoder_widths[i];
  o << "\n"
    << "ae_dropout = " << fmt_real(ex.arch.ae_dropout) << "\n"
    << "est_dropout = " << fmt_real(ex.arch.est_dropout) << "\n"
    << "embed_threshold = " << ex.arch.embed_threshold << "\n"
    << "embed_max_dim = " << ex.arch.embed_max_dim << "\n"
    << "cont_proj_width = " << ex.arch.cont_proj_width << "\n\n";

  o << "[train]\n"
    << "learning_rate = " << fmt_real(tr.learning_rate) << "\n"
    << "batch_size = " << tr.batch_size << "\n"
    << "phase1_epochs = " << tr.schedule.phase1_epochs << "\n"
    << "phase2_epochs = " << tr.schedule.phase2_epochs << "\n"
    << "phase3_epochs = " << tr.schedule.phase3_epochs << "\n"
    << "gamma_max = " << fmt_real(tr.gamma_max) << "\n"
    << "seed = " << tr.seed << "\n\n";

  o << "[sampler]\n"
    << "negatives = " << tr.sampler.negatives_per_instance << "\n"
    << "noise_deviation = " << fmt_real(tr.sampler.noise_deviation) << "\n"
    << "dampening_exponent = " << fmt_real(tr.sampler.dampening_exponent)
    << "\n"
    << "latent_noise = " << (tr.sampler.latent_noise_enabled ? "true" : "false")
    << "\n\n";

  o << "[eval]\n"
    << "train_fraction = " << fmt_real(ex.train_fraction) << "\n"
    << "anomaly_ratio = " << fmt_real(ex.anomaly_ratio) << "\n"
    << "runs = " << ex.n_runs << "\n"
    << "anomaly_sets = " << ex.n_anomaly_sets << "\n"
    << "seed = " << ex.seed << "\n"
    << "ratios = ";
  for (std::size_t i = 0; i < c.sweep_ratios.size(); ++i)
    o << (i ? "," : "") << fmt_real(c.sweep_ratios[i]);
  o << "\n\n";

  o << "[score]\n"
    << "model = " << c.score.model_path << "\n"
    << "schema_bin = " << c.score.schema_bin_path << "\n"
    << "threshold = "
    << (c.score.threshold ? fmt_real(*c.score.threshold) : "none") << "\n"
    << "with_fae_r = " << (c.score.with_fae_r ? "true" : "false") << "\n"
    << "sorted = " << (c.score.sorted ? "true" : "false") << "\n\n";

  o << "[stats]\nsamples = " << c.stats_samples << "\n\n";

  o << "[synth]\n"
    << "normals = " << c.synth.n_normal << "\n"
    << "anomalies = " << c.synth.n_anomaly << "\n"
    << "seed = " << c.synth.seed << "\n\n";

  o << "[motivation]\n"
    << "seed = " << c.motivation_seed << "\n"
    << "dump = " << (c.motivation_dump ? "true" : "false") << "\n";
  return o.str();
}

int cmd_train(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto loaded = load_input(config, false);
  data::Dataset ds = std::move(loaded.dataset);
  if (ds.labeled()) ds = data::split_by_label(ds).first;
  if (ds.size() == 0) fail(ErrorKind::Data, "no normal records to train on");
  data::fit_normalizer(ds);

  trainer::TrainConfig tc = config.experiment.train;
  tc.validate();
  tc.checkpoint_dir = out_dir + "/checkpoints";
  ensure_dir(tc.checkpoint_dir);

  RngStream build_rng(tc.seed, "model/build");
  auto m = model::ChadModel::build(ds.schema, config.experiment.arch,
                                   build_rng);
  const trainer::TrainLog log = trainer::train(m, ds, tc);

  m.save(out_dir + "/model.chm");
  data::save_schema_file(out_dir + "/schema.bin", ds.schema);
  log.write_jsonl(out_dir + "/train_log.jsonl");
  write_echo(config, out_dir);

  std::printf("trained on %zu records for %zu epochs; model -> %s\n",
              ds.size(), log.epochs.size(), (out_dir + "/model.chm").c_str());
  return 0;
}

int cmd_score(const RunConfig& config, const std::string& data_csv,
              const std::string& out_dir) {
  ensure_dir(out_dir);
  std::vector<std::string> missing;
  if (config.score.model_path.empty()) missing.push_back("score.model");
  if (config.score.schema_bin_path.empty())
    missing.push_back("score.schema_bin");
  if (data_csv.empty()) missing.push_back("data csv argument");
  if (!missing.empty()) {
    std::string msg = "missing config values:";
    for (const auto& m : missing) msg += " " + m;
    fail(ErrorKind::Config, msg);
  }

  const auto m = model::ChadModel::load(config.score.model_path);
  const data::Schema fitted =
      data::load_schema_file(config.score.schema_bin_path);
  if (fitted.fingerprint() != m.schema_fingerprint())
    fail(ErrorKind::Data, "model was trained under a different schema");

  std::ifstream in(data_csv);
  if (!in) fail(ErrorKind::Data, "cannot read csv: " + data_csv);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Data, "empty csv: " + data_csv);

  const auto header = split(trim(line), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  std::vector<std::size_t> order;  // schema order -> csv column
  std::vector<std::string> names;
  for (const auto& f : fitted.cats) names.push_back(f.name);
  for (const auto& f : fitted.conts) names.push_back(f.name);
  for (const auto& name : names) {
    const auto it = col.find(name);
    if (it == col.end())
      fail(ErrorKind::Data, "column missing from csv: " + name);
    order.push_back(it->second);
  }

  std::vector<std::size_t> ids;
  std::vector<data::EncodedRecord> recs;
  std::vector<std::pair<std::size_t, std::string>> rejects;
  std::size_t row = 0;
  std::vector<std::string> cells(names.size());
  while (std::getline(in, line)) {
    const auto parts = split(trim(line), ',');
    if (parts.size() != header.size()) {
      rejects.emplace_back(row, "expected " + std::to_string(header.size()) +
                                    " cells, got " +
                                    std::to_string(parts.size()));
      ++row;
      continue;
    }
    bool bad = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      cells[i] = trim(parts[order[i]]);
      if (cells[i].empty()) {
        rejects.emplace_back(row, "missing value in column " + names[i]);
        bad = true;
        break;
      }
    }
    if (!bad) {
      try {
        recs.push_back(data::encode_for_test(cells, fitted));
        ids.push_back(row);
      } catch (const Error& e) {
        rejects.emplace_back(row, e.what());
      }
    }
    ++row;
  }

  struct OutRow {
    std::size_t id;
    real_t score;
    real_t recon;
  };
  std::vector<OutRow> out_rows(recs.size());
  const std::size_t chunk = 4096;
  for (std::size_t at = 0; at < recs.size(); at += chunk) {
    const std::size_t n = std::min(chunk, recs.size() - at);
    const std::vector<data::EncodedRecord> batch(recs.begin() + at,
                                                 recs.begin() + at + n);
    const Mat s = m.anomaly_score(batch);
    Mat r;
    if (config.score.with_fae_r) r = m.reconstruction_score(batch);
    for (std::size_t i = 0; i < n; ++i) {
      out_rows[at + i] = {ids[at + i], s(i, 0),
                          config.score.with_fae_r ? r(i, 0) : real_t(0)};
    }
  }
  if (config.score.sorted) {
    std::stable_sort(out_rows.begin(), out_rows.end(),
                     [](const OutRow& a, const OutRow& b) {
                       if (a.score != b.score) return a.score < b.score;
                       return a.id < b.id;
                     });
  }

  std::ostringstream so;
  so << "id,score";
  if (config.score.with_fae_r) so << ",recon_score";
  if (config.score.threshold) so << ",flagged";
  so << "\n";
  for (const auto& r : out_rows) {
    so << r.id << ',' << fmt_real(r.score);
    if (config.score.with_fae_r) so << ',' << fmt_real(r.recon);
    if (config.score.threshold)
      so << ',' << (r.score < *config.score.threshold ? 1 : 0);
    so << "\n";
  }
  write_file(out_dir + "/scores.csv", so.str());

  std::ostringstream ro;
  ro << "row,reason\n";
  for (const auto& [id, why] : rejects) ro << id << ',' << why << "\n";
  write_file(out_dir + "/scores_rejects.csv", ro.str());
  write_echo(config, out_dir);

  std::printf("scored %zu rows, rejected %zu; scores -> %s\n", recs.size(),
              rejects.size(), (out_dir + "/scores.csv").c_str());
  return 0;
}

int cmd_eval(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto loaded = load_input(config, true);
  const auto rep = eval::run_experiment(loaded.dataset, config.experiment);

  char cell[64];
  std::snprintf(cell, sizeof(cell), "%.5f (\xc2\xb1 %.4f)",
                static_cast<double>(rep.mean),
                static_cast<double>(rep.stddev));

  std::ostringstream o;
  o << report_header("eval", config.experiment.seed, rep.config_fingerprint);
  o << "ap = " << cell << "\n\n";
  rep.write_text(o);
  write_file(out_dir + "/eval_report.txt", o.str());
  write_echo(config, out_dir);

  std::printf("mean ap %s; report -> %s\n", cell,
              (out_dir + "/eval_report.txt").c_str());
  return 0;
}

int cmd_sweep(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto loaded = load_input(config, true);

  eval::ExperimentConfig ec = config.experiment;
  ec.n_runs = 1;
  ec.n_anomaly_sets = 1;
  model::ChadModel m;
  data::Dataset test_normals;
  eval::run_experiment(loaded.dataset, ec, &m, &test_normals);

  auto anomalies = data::split_by_label(loaded.dataset).second;
  data::normalize_against(test_normals.schema, anomalies);
  const auto points = eval::anomaly_ratio_sweep(
      m, test_normals, anomalies, config.sweep_ratios, config.experiment.seed);

  std::ostringstream o;
  o << report_header("sweep", config.experiment.seed, ec.fingerprint());
  o << "ratio,ap\n";
  for (const auto& p : points)
    o << fmt_real(p.ratio) << ',' << fmt_ap(p.ap) << "\n";
  write_file(out_dir + "/sweep_report.txt", o.str());
  write_echo(config, out_dir);

  std::printf("%zu sweep points; report -> %s\n", points.size(),
              (out_dir + "/sweep_report.txt").c_str());
  return 0;
}

int cmd_ablation(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto loaded = load_input(config, true);
  const auto rep = eval::noise_ablation(loaded.dataset, config.experiment);

  std::ostringstream o;
  o << report_header("ablation", config.experiment.seed,
                     rep.with_noise.config_fingerprint);
  o << "with latent noise:    " << fmt_ap(rep.with_noise.mean) << " (+/- "
    << fmt_ap(rep.with_noise.stddev) << ")\n";
  o << "without latent noise: " << fmt_ap(rep.without_noise.mean) << " (+/- "
    << fmt_ap(rep.without_noise.stddev) << ")\n\n";
  const auto trace_line = [&](const char* tag,
                              const eval::NoiseTraceReport& t) {
    o << tag << " trace_clean = " << fmt_real(t.trace_clean)
      << "  trace_noisy = " << fmt_real(t.trace_noisy)
      << "  latent_dim = " << t.latent_dim << "  n = " << t.n_latents << "\n";
  };
  trace_line("noise-on  arm:", rep.traces_with);
  trace_line("noise-off arm:", rep.traces_without);
  write_file(out_dir + "/ablation_report.txt", o.str());
  write_echo(config, out_dir);

  std::printf("ablation with %s vs without %s; report -> %s\n",
              fmt_ap(rep.with_noise.mean).c_str(),
              fmt_ap(rep.without_noise.mean).c_str(),
              (out_dir + "/ablation_report.txt").c_str());
  return 0;
}

int cmd_motivation(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  motivation::SyntheticConfig sc;
  sc.seed = config.motivation_seed;
  const auto res = motivation::run_motivation(sc);

  std::ostringstream o;
  o << report_header("motivation", sc.seed, 0);
  o << "scorer,ap\n"
    << "gmm k=2," << fmt_ap(static_cast<real_t>(res.ap_gmm2)) << "\n"
    << "k-means k=2," << fmt_ap(static_cast<real_t>(res.ap_km2)) << "\n"
    << "k-means k=1," << fmt_ap(static_cast<real_t>(res.ap_km1)) << "\n"
    << "contrast," << fmt_ap(static_cast<real_t>(res.ap_contrast)) << "\n";
  write_file(out_dir + "/motivation_report.txt", o.str());

  if (config.motivation_dump) {
    std::ostringstream pts;
    pts << "x,y,label\n";
    for (const auto& p : res.points.normals)
      pts << fmt_real(static_cast<real_t>(p.x)) << ','
          << fmt_real(static_cast<real_t>(p.y)) << ",0\n";
    for (const auto& p : res.points.anomalies)
      pts << fmt_real(static_cast<real_t>(p.x)) << ','
          << fmt_real(static_cast<real_t>(p.y)) << ",1\n";
    write_file(out_dir + "/motivation_points.csv", pts.str());

    std::ostringstream sc_csv;
    sc_csv << "id,gmm2,km2,km1,contrast\n";
    for (std::size_t i = 0; i < res.score_gmm2.size(); ++i)
      sc_csv << i << ',' << fmt_real(static_cast<real_t>(res.score_gmm2[i]))
             << ',' << fmt_real(static_cast<real_t>(res.score_km2[i])) << ','
             << fmt_real(static_cast<real_t>(res.score_km1[i])) << ','
             << fmt_real(static_cast<real_t>(res.score_contrast[i])) << "\n";
    write_file(out_dir + "/motivation_scores.csv", sc_csv.str());
  }
  write_echo(config, out_dir);

  std::printf(
      "motivation ap: contrast %s, k-means2 %s, gmm2 %s, k-means1 %s\n",
      fmt_ap(static_cast<real_t>(res.ap_contrast)).c_str(),
      fmt_ap(static_cast<real_t>(res.ap_km2)).c_str(),
      fmt_ap(static_cast<real_t>(res.ap_gmm2)).c_str(),
      fmt_ap(static_cast<real_t>(res.ap_km1)).c_str());
  return 0;
}

int cmd_negsample_stats(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto loaded = load_input(config, false);
  data::Dataset ds = std::move(loaded.dataset);
  if (ds.labeled()) ds = data::split_by_label(ds).first;
  if (ds.size() == 0) fail(ErrorKind::Data, "no records for sampler stats");
  data::fit_normalizer(ds);

  const auto& sampler = config.experiment.train.sampler;
  negsampler::PerturbStats stats;
  RngStream rng(config.experiment.train.seed, "negstats");
  while (stats.n_negatives < config.stats_samples) {
    const auto& rec = ds.records[rng.index(ds.size())];
    negsampler::perturb_record(rec, ds.schema, sampler, rng, &stats);
  }

  std::vector<std::size_t> arities;
  for (const auto& f : ds.schema.cats) arities.push_back(f.values.size());
  const auto probs =
      negsampler::category_probs(arities, sampler.dampening_exponent);

  std::ostringstream o;
  o << report_header("negsample-stats", config.experiment.train.seed, 0);
  o << "negatives = " << stats.n_negatives << "\n"
    << "arity1_topups = " << stats.n_augmented << "\n\n";
  // single_draw_prob is the per-draw multinomial weight; with more than one
  // field drawn per negative (without replacement) the observed share
  // flattens toward uniform, so the two columns only coincide when every
  // negative draws exactly one field.
  o << "field,arity,single_draw_prob,drawn_share,changed\n";
  std::uint64_t total_drawn = 0;
  for (auto d : stats.drawn) total_drawn += d;
  for (std::size_t w = 0; w < arities.size(); ++w) {
    const double p = static_cast<double>(probs[w]);
    const double obs =
        total_drawn ? static_cast<double>(stats.drawn[w]) / total_drawn : 0;
    o << ds.schema.cats[w].name << ',' << arities[w] << ','
      << fmt_real(static_cast<real_t>(p)) << ','
      << fmt_real(static_cast<real_t>(obs)) << ',' << stats.changed[w]
      << "\n";
  }
  o << "\ncont_perturbed_min = " << stats.cont_features_min << "\n"
    << "cont_perturbed_max = " << stats.cont_features_max << "\n";
  if (stats.noise_plus_n)
    o << "noise_plus_mean = "
      << fmt_real(static_cast<real_t>(stats.noise_plus_sum /
                                      stats.noise_plus_n))
      << " (n = " << stats.noise_plus_n << ")\n";
  if (stats.noise_minus_n)
    o << "noise_minus_mean = "
      << fmt_real(static_cast<real_t>(stats.noise_minus_sum /
                                      stats.noise_minus_n))
      << " (n = " << stats.noise_minus_n << ")\n";
  write_file(out_dir + "/negsample_stats.txt", o.str());
  write_echo(config, out_dir);

  std::printf("%llu negatives sampled; report -> %s\n",
              static_cast<unsigned long long>(stats.n_negatives),
              (out_dir + "/negsample_stats.txt").c_str());
  return 0;
}

int cmd_synth(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  synth::write_network_csv(out_dir + "/network.csv", config.synth);
  write_file(out_dir + "/network.schema", synth::network_schema_decl());
  write_echo(config, out_dir);
  std::printf("wrote %zu records -> %s\n",
              config.synth.n_normal + config.synth.n_anomaly,
              (out_dir + "/network.csv").c_str());
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
      return 3;
    case ErrorKind::Train:
      return 4;
    default:
      return 1;
  }
}

}  // namespace chad::cli
