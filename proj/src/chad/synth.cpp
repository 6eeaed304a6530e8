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

#include "chad/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "chad/rng.hpp"

namespace chad::synth {

namespace {

const char* kProtocols[] = {"tcp", "udp", "icmp"};

std::vector<std::string> service_values() {
  std::vector<std::string> v = {"http",  "smtp",   "domain_u", "ftp_data",
                                "ftp",   "ssh",    "telnet",   "ecr_i",
                                "eco_i", "pop_3",  "imap4",    "private",
                                "other", "finger", "auth",     "ntp_u"};
  for (int i = 0; v.size() < 65; ++i)
    v.push_back("srv_" + std::to_string(i));
  return v;
}

const char* kFlags[] = {"SF",  "S0", "REJ", "RSTR", "RSTO", "S1",
                        "S2",  "S3", "SH",  "OTH",  "RSTOS0"};

// (name, lo, hi, baseline mean, baseline sd). Baseline covers every
// feature a profile does not explicitly shape. num_outbound_cmds is
// constant 0 like the real column, exercising the degenerate normalizer.
struct Feature {
  const char* name;
  double lo, hi, mean, sd;
};

constexpr Feature kFeatures[] = {
    {"duration", 0, 5000, 0, 0},
    {"src_bytes", 0, 50000, 0, 0},
    {"dst_bytes", 0, 50000, 0, 0},
    {"wrong_fragment", 0, 3, 0, 0.02},
    {"urgent", 0, 3, 0, 0.01},
    {"hot", 0, 30, 0, 0.1},
    {"num_failed_logins", 0, 5, 0, 0.03},
    {"num_compromised", 0, 10, 0, 0.02},
    {"root_shell", 0, 1, 0, 0.01},
    {"su_attempted", 0, 2, 0, 0.01},
    {"num_root", 0, 10, 0, 0.02},
    {"num_file_creations", 0, 10, 0, 0.05},
    {"num_shells", 0, 5, 0, 0.01},
    {"num_access_files", 0, 10, 0, 0.05},
    {"num_outbound_cmds", 0, 0, 0, 0},
    {"is_host_login", 0, 1, 0, 0.005},
    {"count", 0, 511, 6, 4},
    {"srv_count", 0, 511, 6, 4},
    {"serror_rate", 0, 1, 0.01, 0.02},
    {"srv_serror_rate", 0, 1, 0.01, 0.02},
    {"rerror_rate", 0, 1, 0.01, 0.02},
    {"srv_rerror_rate", 0, 1, 0.01, 0.02},
    {"same_srv_rate", 0, 1, 0.9, 0.1},
    {"diff_srv_rate", 0, 1, 0.05, 0.05},
    {"srv_diff_host_rate", 0, 1, 0.05, 0.05},
    {"dst_host_count", 0, 255, 100, 70},
    {"dst_host_srv_count", 0, 255, 100, 70},
    {"dst_host_same_srv_rate", 0, 1, 0.85, 0.15},
    {"dst_host_diff_srv_rate", 0, 1, 0.06, 0.06},
    {"dst_host_same_src_port_rate", 0, 1, 0.1, 0.1},
    {"dst_host_srv_diff_host_rate", 0, 1, 0.03, 0.04},
    {"dst_host_serror_rate", 0, 1, 0.01, 0.02},
    {"dst_host_srv_serror_rate", 0, 1, 0.01, 0.02},
    {"dst_host_rerror_rate", 0, 1, 0.01, 0.02},
    {"dst_host_srv_rerror_rate", 0, 1, 0.01, 0.02},
};
constexpr std::size_t kNumFeatures = sizeof(kFeatures) / sizeof(kFeatures[0]);

std::size_t feature_index(const char* name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (std::string(kFeatures[i].name) == name) return i;
  fail(ErrorKind::Internal, std::string("unknown synth feature: ") + name);
}

struct Override {
  std::size_t idx;
  double mean, sd;
  bool lognormal = false;  // mean is the (linear) median, sd the log-sd
};

struct CatChoice {
  const char* value;
  double weight;
};

struct RowSpec {
  const char* protocol = "tcp";
  std::vector<CatChoice> services;
  std::vector<CatChoice> flags;
  double p_land = 0.002;
  double p_logged_in = 0.3;
  double p_guest = 0.01;
  std::vector<Override> cont;
  const char* label = "normal.";
  bool uniform_service_tail = false;  // scan-style: any of the 65 services
};

const char* pick(const std::vector<CatChoice>& choices, RngStream& rng) {
  double total = 0;
  for (const auto& c : choices) total += c.weight;
  double u = rng.u01() * total;
  for (const auto& c : choices) {
    u -= c.weight;
    if (u <= 0) return c.value;
  }
  return choices.back().value;
}

double draw_feature(const Feature& f, const Override* ov, RngStream& rng) {
  double v;
  if (ov != nullptr && ov->lognormal) {
    v = ov->mean * std::exp(ov->sd * rng.normal());
  } else if (ov != nullptr) {
    v = ov->mean + ov->sd * rng.normal();
  } else {
    v = f.mean + f.sd * rng.normal();
  }
  return std::clamp(v, f.lo, f.hi);
}

// ---- normal service profiles -------------------------------------------

RowSpec web_profile() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"http", 0.93}, {"private", 0.04}, {"other", 0.03}};
  s.flags = {{"SF", 0.97}, {"REJ", 0.02}, {"RSTO", 0.01}};
  s.p_logged_in = 0.7;
  s.cont = {
      {feature_index("duration"), 3, 1.0, true},
      {feature_index("src_bytes"), 250, 0.7, true},
      {feature_index("dst_bytes"), 2500, 0.9, true},
      {feature_index("count"), 8, 5, false},
      {feature_index("srv_count"), 9, 5, false},
      {feature_index("same_srv_rate"), 0.95, 0.05, false},
      {feature_index("dst_host_count"), 120, 60, false},
      {feature_index("dst_host_srv_count"), 150, 60, false},
      {feature_index("dst_host_same_srv_rate"), 0.92, 0.08, false},
  };
  return s;
}

RowSpec smtp_profile() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"smtp", 0.97}, {"other", 0.03}};
  s.flags = {{"SF", 0.96}, {"REJ", 0.04}};
  s.p_logged_in = 0.5;
  s.cont = {
      {feature_index("duration"), 2, 0.8, true},
      {feature_index("src_bytes"), 420, 0.5, true},
      {feature_index("dst_bytes"), 330, 0.4, true},
      {feature_index("count"), 4, 2.5, false},
      {feature_index("srv_count"), 4, 2.5, false},
      {feature_index("same_srv_rate"), 0.9, 0.08, false},
      {feature_index("dst_host_count"), 70, 40, false},
  };
  return s;
}

RowSpec dns_profile() {
  RowSpec s;
  s.protocol = "udp";
  s.services = {{"domain_u", 0.95}, {"ntp_u", 0.05}};
  s.flags = {{"SF", 0.995}, {"S0", 0.005}};
  s.p_logged_in = 0.02;
  s.cont = {
      {feature_index("duration"), 0.1, 0.5, true},
      {feature_index("src_bytes"), 45, 0.3, true},
      {feature_index("dst_bytes"), 90, 0.4, true},
      {feature_index("count"), 40, 25, false},
      {feature_index("srv_count"), 42, 25, false},
      {feature_index("same_srv_rate"), 0.99, 0.02, false},
      {feature_index("dst_host_count"), 200, 40, false},
      {feature_index("dst_host_srv_count"), 210, 35, false},
      {feature_index("dst_host_same_srv_rate"), 0.98, 0.03, false},
  };
  return s;
}

RowSpec ftp_profile() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"ftp_data", 0.7}, {"ftp", 0.3}};
  s.flags = {{"SF", 0.98}, {"S1", 0.02}};
  s.p_logged_in = 0.9;
  s.cont = {
      {feature_index("duration"), 25, 1.2, true},
      {feature_index("src_bytes"), 2200, 1.3, true},
      {feature_index("dst_bytes"), 120, 0.8, true},
      {feature_index("count"), 3, 2, false},
      {feature_index("srv_count"), 3, 2, false},
      {feature_index("same_srv_rate"), 0.85, 0.1, false},
      {feature_index("num_file_creations"), 1.2, 1.0, false},
  };
  return s;
}

RowSpec ssh_profile() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"ssh", 0.92}, {"telnet", 0.08}};
  s.flags = {{"SF", 0.95}, {"S1", 0.03}, {"RSTO", 0.02}};
  s.p_logged_in = 0.95;
  s.cont = {
      {feature_index("duration"), 60, 1.1, true},
      {feature_index("src_bytes"), 1400, 0.7, true},
      {feature_index("dst_bytes"), 1700, 0.7, true},
      {feature_index("count"), 2, 1.5, false},
      {feature_index("srv_count"), 2, 1.5, false},
      {feature_index("same_srv_rate"), 0.8, 0.12, false},
      {feature_index("hot"), 0.4, 0.6, false},
  };
  return s;
}

RowSpec icmp_profile() {
  RowSpec s;
  s.protocol = "icmp";
  s.services = {{"ecr_i", 0.8}, {"eco_i", 0.2}};
  s.flags = {{"SF", 1.0}};
  s.p_logged_in = 0.0;
  s.cont = {
      {feature_index("src_bytes"), 520, 0.25, true},
      {feature_index("dst_bytes"), 0, 0, false},
      {feature_index("count"), 60, 40, false},
      {feature_index("srv_count"), 60, 40, false},
      {feature_index("same_srv_rate"), 1.0, 0.01, false},
      {feature_index("dst_host_count"), 220, 40, false},
  };
  return s;
}

// A thin slice of miscellaneous traffic keeps the whole service/flag
// vocabulary alive in the normal data.
RowSpec misc_profile() {
  RowSpec s;
  s.protocol = "tcp";
  s.uniform_service_tail = true;
  s.flags = {{"SF", 0.6},   {"REJ", 0.08}, {"RSTO", 0.06}, {"RSTR", 0.05},
             {"S0", 0.05},  {"S1", 0.04},  {"S2", 0.03},   {"S3", 0.03},
             {"SH", 0.02},  {"OTH", 0.02}, {"RSTOS0", 0.02}};
  s.p_logged_in = 0.3;
  s.p_land = 0.01;
  s.p_guest = 0.05;
  s.cont = {
      {feature_index("duration"), 4, 1.5, true},
      {feature_index("src_bytes"), 150, 1.2, true},
      {feature_index("dst_bytes"), 200, 1.2, true},
  };
  return s;
}

// ---- attacks ------------------------------------------------------------

RowSpec neptune_attack() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"http", 0.3}, {"private", 0.3}, {"telnet", 0.2},
                {"smtp", 0.2}};
  s.flags = {{"S0", 0.9}, {"REJ", 0.1}};
  s.p_logged_in = 0.0;
  s.label = "neptune.";
  s.cont = {
      {feature_index("duration"), 0, 0, false},
      {feature_index("src_bytes"), 0, 0, false},
      {feature_index("dst_bytes"), 0, 0, false},
      {feature_index("count"), 210, 90, false},
      {feature_index("srv_count"), 190, 90, false},
      {feature_index("serror_rate"), 0.96, 0.04, false},
      {feature_index("srv_serror_rate"), 0.96, 0.04, false},
      {feature_index("dst_host_serror_rate"), 0.95, 0.05, false},
      {feature_index("dst_host_srv_serror_rate"), 0.95, 0.05, false},
      {feature_index("same_srv_rate"), 0.12, 0.1, false},
      {feature_index("dst_host_count"), 235, 20, false},
      {feature_index("dst_host_same_srv_rate"), 0.1, 0.08, false},
  };
  return s;
}

RowSpec probe_attack() {
  RowSpec s;
  s.protocol = "tcp";
  s.uniform_service_tail = true;  // scans walk the whole service space
  s.flags = {{"REJ", 0.4}, {"RSTR", 0.3}, {"SF", 0.2}, {"SH", 0.1}};
  s.p_logged_in = 0.0;
  s.label = "portsweep.";
  s.cont = {
      {feature_index("duration"), 0, 0, false},
      {feature_index("src_bytes"), 15, 0.8, true},
      {feature_index("dst_bytes"), 2, 1.0, true},
      {feature_index("count"), 130, 70, false},
      {feature_index("srv_count"), 8, 6, false},
      {feature_index("rerror_rate"), 0.78, 0.15, false},
      {feature_index("srv_rerror_rate"), 0.75, 0.15, false},
      {feature_index("dst_host_rerror_rate"), 0.7, 0.15, false},
      {feature_index("diff_srv_rate"), 0.85, 0.1, false},
      {feature_index("same_srv_rate"), 0.08, 0.07, false},
      {feature_index("dst_host_count"), 250, 8, false},
      {feature_index("dst_host_diff_srv_rate"), 0.8, 0.12, false},
      {feature_index("dst_host_same_src_port_rate"), 0.7, 0.2, false},
  };
  return s;
}

RowSpec guess_passwd_attack() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"telnet", 0.5}, {"ftp", 0.4}, {"pop_3", 0.1}};
  s.flags = {{"SF", 0.8}, {"RSTO", 0.2}};
  s.p_logged_in = 0.05;
  s.label = "guess_passwd.";
  s.cont = {
      {feature_index("duration"), 4, 0.8, true},
      {feature_index("src_bytes"), 110, 0.4, true},
      {feature_index("dst_bytes"), 180, 0.4, true},
      {feature_index("num_failed_logins"), 3.8, 0.9, false},
      {feature_index("hot"), 2.0, 1.2, false},
      {feature_index("count"), 2, 1.5, false},
      {feature_index("srv_count"), 2, 1.5, false},
  };
  return s;
}

RowSpec overflow_attack() {
  RowSpec s;
  s.protocol = "tcp";
  s.services = {{"telnet", 0.6}, {"ftp", 0.2}, {"ssh", 0.2}};
  s.flags = {{"SF", 1.0}};
  s.p_logged_in = 1.0;
  s.label = "buffer_overflow.";
  s.cont = {
      {feature_index("duration"), 90, 1.0, true},
      {feature_index("src_bytes"), 1100, 0.8, true},
      {feature_index("dst_bytes"), 900, 0.9, true},
      {feature_index("root_shell"), 0.8, 0.2, false},
      {feature_index("su_attempted"), 0.8, 0.6, false},
      {feature_index("num_root"), 3.5, 2.0, false},
      {feature_index("num_compromised"), 2.5, 1.8, false},
      {feature_index("hot"), 4.5, 2.0, false},
      {feature_index("num_file_creations"), 2.5, 1.5, false},
      {feature_index("num_shells"), 1.2, 0.8, false},
  };
  return s;
}

struct Row {
  std::string cells;  // pre-joined csv payload
};

std::string format_value(double v) {
  char buf[32];
  // Integers print clean; everything else keeps 6 significant digits.
  if (v == std::floor(v) && std::abs(v) < 1e15)
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  else
    std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string render_row(const RowSpec& spec,
                       const std::vector<std::string>& services,
                       RngStream& rng, const char* force_service,
                       const char* force_flag) {
  std::string service;
  if (force_service != nullptr) {
    service = force_service;
  } else if (spec.uniform_service_tail) {
    service = services[rng.index(services.size())];
  } else {
    service = pick(spec.services, rng);
  }
  const char* flag = force_flag != nullptr ? force_flag : pick(spec.flags, rng);

  std::ostringstream out;
  out << spec.protocol << ',' << service << ',' << flag << ','
      << (rng.bernoulli(spec.p_land) ? 1 : 0) << ','
      << (rng.bernoulli(spec.p_logged_in) ? 1 : 0) << ','
      << (rng.bernoulli(spec.p_guest) ? 1 : 0);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const Override* ov = nullptr;
    for (const auto& o : spec.cont)
      if (o.idx == f) {
        ov = &o;
        break;
      }
    out << ',' << format_value(draw_feature(kFeatures[f], ov, rng));
  }
  out << ',' << spec.label;
  return out.str();
}

}  // namespace

std::string network_schema_decl() {
  std::ostringstream out;
  out << "categorical protocol_type\n"
      << "categorical service\n"
      << "categorical flag\n"
      << "categorical land\n"
      << "categorical logged_in\n"
      << "categorical is_guest_login\n";
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    out << "continuous " << kFeatures[f].name << "\n";
  out << "label label normal.\n";
  return out.str();
}

void write_network_csv(const std::string& path, const SynthConfig& config) {
  if (config.n_normal < 200)
    fail(ErrorKind::Config, "need at least 200 normal rows for coverage");
  const auto services = service_values();
  RngStream rng(config.seed, "synth/rows");
  RngStream mix_rng(config.seed, "synth/order");

  const RowSpec web = web_profile(), smtp = smtp_profile(),
                dns = dns_profile(), ftp = ftp_profile(), ssh = ssh_profile(),
                icmp = icmp_profile(), misc = misc_profile();
  const RowSpec neptune = neptune_attack(), probe = probe_attack(),
                guess = guess_passwd_attack(), overflow = overflow_attack();

  auto pick_normal = [&](RngStream& r) -> const RowSpec& {
    const double u = r.u01();
    if (u < 0.33) return web;
    if (u < 0.47) return smtp;
    if (u < 0.67) return dns;
    if (u < 0.75) return ftp;
    if (u < 0.83) return ssh;
    if (u < 0.95) return icmp;
    return misc;
  };
  auto pick_attack = [&](RngStream& r) -> const RowSpec& {
    const double u = r.u01();
    if (u < 0.45) return neptune;
    if (u < 0.75) return probe;
    if (u < 0.90) return guess;
    return overflow;
  };

  // Coverage block: every service and flag appears at least once, plus the
  // rare binary values, all inside ordinary-looking misc rows.
  std::vector<std::string> coverage;
  for (std::size_t i = 0; i < services.size(); ++i) {
    RowSpec s = misc;
    if (i == 1) s.p_land = 1.0;
    if (i == 2) s.p_guest = 1.0;
    coverage.push_back(render_row(s, services, rng, services[i].c_str(),
                                  kFlags[i % 11]));
  }
  for (std::size_t i = services.size(); i % 11 != 0; ++i) {
    coverage.push_back(
        render_row(misc, services, rng, nullptr, kFlags[i % 11]));
  }

  std::vector<std::string> rest;
  rest.reserve(config.n_normal + config.n_anomaly - coverage.size());
  for (std::size_t i = coverage.size(); i < config.n_normal; ++i)
    rest.push_back(render_row(pick_normal(rng), services, rng, nullptr,
                              nullptr));
  for (std::size_t i = 0; i < config.n_anomaly; ++i)
    rest.push_back(render_row(pick_attack(rng), services, rng, nullptr,
                              nullptr));
  mix_rng.shuffle(rest);

  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write csv: " + path);
  out << "protocol_type,service,flag,land,logged_in,is_guest_login";
  for (std::size_t f = 0; f < kNumFeatures; ++f) out << ',' << kFeatures[f].name;
  out << ",label\n";
  for (const auto& row : coverage) out << row << '\n';
  for (const auto& row : rest) out << row << '\n';
  if (!out) fail(ErrorKind::Data, "short write: " + path);
}

}  // namespace chad::synth
