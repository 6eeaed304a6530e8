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

#include "chad/data.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "io_util.hpp"

namespace chad::data {

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

real_t parse_real(const std::string& cell, std::size_t line_no,
                  const std::string& field) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(ErrorKind::Data, "line " + std::to_string(line_no) +
                              ": field '" + field +
                              "' is not numeric: '" + cell + "'");
  return static_cast<real_t>(v);
}

struct ColumnMap {
  std::vector<std::size_t> cat_cols;   // csv column per declared categorical
  std::vector<std::size_t> cont_cols;  // csv column per declared continuous
  std::optional<std::size_t> label_col;
  std::size_t n_columns = 0;
};

ColumnMap map_columns(const std::vector<std::string>& header,
                      const SchemaDecl& decl) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(header[i], i);
  ColumnMap cm;
  cm.n_columns = header.size();
  for (const auto& [name, is_cat] : decl.fields) {
    const auto it = pos.find(name);
    if (it == pos.end())
      fail(ErrorKind::Data, "declared field missing from header: " + name);
    (is_cat ? cm.cat_cols : cm.cont_cols).push_back(it->second);
  }
  if (decl.label_column) {
    const auto it = pos.find(*decl.label_column);
    if (it == pos.end())
      fail(ErrorKind::Data,
           "label column missing from header: " + *decl.label_column);
    cm.label_col = it->second;
  }
  return cm;
}

Schema schema_from_decl(const SchemaDecl& decl) {
  Schema s;
  for (const auto& [name, is_cat] : decl.fields) {
    if (is_cat)
      s.cats.push_back(CatField{name, {}, {}});
    else
      s.conts.push_back(ContField{name});
  }
  return s;
}

}  // namespace

std::size_t Schema::total_arity() const {
  std::size_t n = 0;
  for (const auto& c : cats) n += c.arity();
  return n;
}

bool Schema::fitted() const {
  for (const auto& c : conts)
    if (!c.fitted) return false;
  return true;
}

std::uint64_t Schema::fingerprint() const {
  std::uint64_t h = fnv1a("chad-schema-v1");
  auto mix = [&h](const void* p, std::size_t n) { h = fnv1a(p, n, h); };
  auto mix_str = [&](const std::string& s) {
    mix(s.data(), s.size());
    const char sep = '\x1f';
    mix(&sep, 1);
  };
  for (const auto& c : cats) {
    mix_str("cat");
    mix_str(c.name);
    for (const auto& v : c.values) mix_str(v);
  }
  for (const auto& c : conts) {
    mix_str("cont");
    mix_str(c.name);
    const std::uint8_t fitted = c.fitted ? 1 : 0;
    mix(&fitted, 1);
    if (c.fitted) {
      const double lo = static_cast<double>(c.min);
      const double hi = static_cast<double>(c.max);
      mix(&lo, 8);
      mix(&hi, 8);
    }
  }
  return h;
}

SchemaDecl parse_schema_decl(const std::string& text) {
  SchemaDecl decl;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    auto rest = [&](const char* what) {
      std::string v;
      if (!(ls >> v))
        fail(ErrorKind::Config, "schema decl line " + std::to_string(line_no) +
                                    ": " + word + " needs a " + what);
      return v;
    };
    if (word == "categorical" || word == "continuous") {
      const std::string name = rest("field name");
      if (!seen.emplace(name, true).second)
        fail(ErrorKind::Config, "duplicate field in schema decl: " + name);
      decl.fields.emplace_back(name, word == "categorical");
    } else if (word == "floor") {
      decl.freq_floor = std::stoul(rest("count"));
    } else if (word == "label") {
      decl.label_column = rest("column name");
      decl.label_normal = rest("normal value");
    } else {
      fail(ErrorKind::Config, "schema decl line " + std::to_string(line_no) +
                                  ": unknown directive '" + word + "'");
    }
  }
  if (decl.fields.empty())
    fail(ErrorKind::Config, "schema decl declares no fields");
  return decl;
}

SchemaDecl load_schema_decl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open schema decl: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_decl(buf.str());
}

LoadResult load_csv(const std::string& path, const SchemaDecl& decl) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Data, "cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Data, "empty csv: " + path);
  const ColumnMap cm = map_columns(split_csv_line(strip_cr(line)), decl);

  std::vector<std::string> cont_names;
  for (const auto& [name, is_cat] : decl.fields)
    if (!is_cat) cont_names.push_back(name);

  struct RawRow {
    std::vector<std::string> cat;
    std::vector<real_t> cont;
    std::uint8_t label = 0;
  };
  std::vector<RawRow> rows;
  LoadResult res;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cm.n_columns)
      fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": expected " +
                                std::to_string(cm.n_columns) + " cells, got " +
                                std::to_string(cells.size()));
    bool missing = false;
    for (std::size_t c : cm.cat_cols) missing |= cells[c].empty();
    for (std::size_t c : cm.cont_cols) missing |= cells[c].empty();
    if (cm.label_col) missing |= cells[*cm.label_col].empty();
    if (missing) {
      ++res.dropped_missing;
      continue;
    }
    RawRow row;
    row.cat.reserve(cm.cat_cols.size());
    for (std::size_t c : cm.cat_cols) row.cat.push_back(cells[c]);
    row.cont.reserve(cm.cont_cols.size());
    for (std::size_t fi = 0; fi < cm.cont_cols.size(); ++fi)
      row.cont.push_back(
          parse_real(cells[cm.cont_cols[fi]], line_no, cont_names[fi]));
    if (cm.label_col)
      row.label = cells[*cm.label_col] == decl.label_normal ? 0 : 1;
    rows.push_back(std::move(row));
  }

  Schema schema = schema_from_decl(decl);
  const std::size_t k = schema.k();

  // Frequency floor: a row survives only if every categorical value it
  // holds appears at least `floor` times over the non-missing rows.
  std::vector<std::unordered_map<std::string, std::size_t>> freq(k);
  if (decl.freq_floor > 1)
    for (const auto& row : rows)
      for (std::size_t w = 0; w < k; ++w) ++freq[w][row.cat[w]];

  Dataset& ds = res.dataset;
  for (const auto& row : rows) {
    if (decl.freq_floor > 1) {
      bool rare = false;
      for (std::size_t w = 0; w < k && !rare; ++w)
        rare = freq[w][row.cat[w]] < decl.freq_floor;
      if (rare) {
        ++res.dropped_low_freq;
        continue;
      }
    }
    EncodedRecord rec;
    rec.cat.reserve(k);
    for (std::size_t w = 0; w < k; ++w) {
      CatField& f = schema.cats[w];
      auto [it, inserted] =
          f.index.emplace(row.cat[w], static_cast<std::uint32_t>(f.arity()));
      if (inserted) f.values.push_back(row.cat[w]);
      rec.cat.push_back(it->second);
    }
    rec.cont = row.cont;
    ds.records.push_back(std::move(rec));
    if (decl.label_column) ds.labels.push_back(row.label);
  }
  if (ds.records.empty())
    fail(ErrorKind::Data, "no rows survived loading: " + path);
  ds.schema = std::move(schema);
  return res;
}

void fit_normalizer(Dataset& ds) {
  if (ds.records.empty())
    fail(ErrorKind::Data, "fit_normalizer: empty dataset");
  const std::size_t r = ds.schema.r();
  for (std::size_t j = 0; j < r; ++j) {
    ContField& f = ds.schema.conts[j];
    real_t lo = ds.records.front().cont[j];
    real_t hi = lo;
    for (const auto& rec : ds.records) {
      lo = std::min(lo, rec.cont[j]);
      hi = std::max(hi, rec.cont[j]);
    }
    f.min = lo;
    f.max = hi;
    f.fitted = true;
  }
  for (auto& rec : ds.records)
    for (std::size_t j = 0; j < r; ++j) {
      const ContField& f = ds.schema.conts[j];
      rec.cont[j] = f.max > f.min
                        ? (rec.cont[j] - f.min) / (f.max - f.min)
                        : real_t(0);
    }
}

void normalize_against(const Schema& fitted, Dataset& ds) {
  if (!fitted.fitted())
    fail(ErrorKind::Internal, "normalize_against: schema not fitted");
  if (fitted.r() != ds.schema.r() || fitted.k() != ds.schema.k())
    fail(ErrorKind::Internal, "normalize_against: schema shape mismatch");
  const std::size_t r = fitted.r();
  for (auto& rec : ds.records)
    for (std::size_t j = 0; j < r; ++j) {
      const ContField& f = fitted.conts[j];
      real_t v = f.max > f.min ? (rec.cont[j] - f.min) / (f.max - f.min)
                               : real_t(0);
      rec.cont[j] = std::clamp(v, real_t(0), real_t(1));
    }
  ds.schema = fitted;
}

EncodedRecord encode_for_test(const std::vector<std::string>& cells,
                              const Schema& fitted) {
  if (!fitted.fitted())
    fail(ErrorKind::Internal, "encode_for_test: schema not fitted");
  if (cells.size() != fitted.k() + fitted.r())
    fail(ErrorKind::Data, "encode_for_test: expected " +
                              std::to_string(fitted.k() + fitted.r()) +
                              " cells, got " + std::to_string(cells.size()));
  EncodedRecord rec;
  rec.cat.reserve(fitted.k());
  for (std::size_t w = 0; w < fitted.k(); ++w) {
    const CatField& f = fitted.cats[w];
    const auto it = f.index.find(cells[w]);
    if (it == f.index.end())
      fail(ErrorKind::Data,
           "unseen value '" + cells[w] + "' in field " + f.name);
    rec.cat.push_back(it->second);
  }
  rec.cont.reserve(fitted.r());
  for (std::size_t j = 0; j < fitted.r(); ++j) {
    const ContField& f = fitted.conts[j];
    const real_t raw = parse_real(cells[fitted.k() + j], 0, f.name);
    const real_t v = f.max > f.min ? (raw - f.min) / (f.max - f.min)
                                   : real_t(0);
    rec.cont.push_back(std::clamp(v, real_t(0), real_t(1)));
  }
  return rec;
}

EncodeCsvResult encode_csv(const std::string& path, const Schema& fitted,
                           const SchemaDecl& decl) {
  if (!fitted.fitted()) fail(ErrorKind::Internal, "encode_csv: not fitted");
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Data, "cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Data, "empty csv: " + path);
  const ColumnMap cm = map_columns(split_csv_line(strip_cr(line)), decl);

  EncodeCsvResult res;
  res.dataset.schema = fitted;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cm.n_columns)
      fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": expected " +
                                std::to_string(cm.n_columns) + " cells, got " +
                                std::to_string(cells.size()));
    bool missing = false;
    for (std::size_t c : cm.cat_cols) missing |= cells[c].empty();
    for (std::size_t c : cm.cont_cols) missing |= cells[c].empty();
    if (cm.label_col) missing |= cells[*cm.label_col].empty();
    if (missing) {
      ++res.dropped_missing;
      continue;
    }
    std::vector<std::string> ordered;
    ordered.reserve(fitted.k() + fitted.r());
    for (std::size_t c : cm.cat_cols) ordered.push_back(cells[c]);
    for (std::size_t c : cm.cont_cols) ordered.push_back(cells[c]);
    try {
      res.dataset.records.push_back(encode_for_test(ordered, fitted));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Data &&
          std::string(e.what()).find("unseen value") != std::string::npos) {
        ++res.dropped_unseen;
        continue;
      }
      throw;
    }
    if (cm.label_col)
      res.dataset.labels.push_back(
          cells[*cm.label_col] == decl.label_normal ? 0 : 1);
  }
  return res;
}

Dataset build_eval_mix(const Dataset& normals, const Dataset& anomalies,
                       double anomaly_ratio, RngStream& rng) {
  if (!(anomaly_ratio > 0.0 && anomaly_ratio <= 1.0))
    fail(ErrorKind::Config, "anomaly ratio must lie in (0,1]");
  if (normals.schema.fingerprint() != anomalies.schema.fingerprint())
    fail(ErrorKind::Internal, "eval mix: schema mismatch");
  const std::size_t n_anom = static_cast<std::size_t>(
      anomaly_ratio * static_cast<double>(normals.size()));
  if (anomalies.size() < n_anom)
    fail(ErrorKind::Data,
         "insufficient anomalies: need " + std::to_string(n_anom) + ", have " +
             std::to_string(anomalies.size()));

  std::vector<std::size_t> idx(anomalies.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // partial Fisher-Yates: the first n_anom entries are a uniform
  // without-replacement sample
  for (std::size_t i = 0; i < n_anom; ++i) {
    const std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }

  Dataset mix;
  mix.schema = normals.schema;
  mix.records.reserve(normals.size() + n_anom);
  mix.labels.reserve(normals.size() + n_anom);
  for (const auto& rec : normals.records) {
    mix.records.push_back(rec);
    mix.labels.push_back(0);
  }
  for (std::size_t i = 0; i < n_anom; ++i) {
    mix.records.push_back(anomalies.records[idx[i]]);
    mix.labels.push_back(1);
  }
  std::vector<std::size_t> order(mix.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  Dataset out;
  out.schema = mix.schema;
  out.records.reserve(order.size());
  out.labels.reserve(order.size());
  for (std::size_t i : order) {
    out.records.push_back(std::move(mix.records[i]));
    out.labels.push_back(mix.labels[i]);
  }
  return out;
}

std::pair<Dataset, Dataset> split_by_label(const Dataset& ds) {
  if (!ds.labeled()) fail(ErrorKind::Data, "split_by_label: unlabeled data");
  Dataset normals, anomalies;
  normals.schema = ds.schema;
  anomalies.schema = ds.schema;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    (ds.labels[i] == 0 ? normals : anomalies).records.push_back(ds.records[i]);
  return {std::move(normals), std::move(anomalies)};
}

namespace {
constexpr char kSchemaMagic[5] = "CHSC";
constexpr char kDatasetMagic[5] = "CHDS";
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void save_schema(std::ostream& out, const Schema& s) {
  io::put_bytes(out, kSchemaMagic, 4);
  io::put_u32(out, kFormatVersion);
  io::put_u64(out, s.k());
  for (const auto& c : s.cats) {
    io::put_str(out, c.name);
    io::put_u64(out, c.values.size());
    for (const auto& v : c.values) io::put_str(out, v);
  }
  io::put_u64(out, s.r());
  for (const auto& c : s.conts) {
    io::put_str(out, c.name);
    io::put_u8(out, c.fitted ? 1 : 0);
    io::put_f64(out, static_cast<double>(c.min));
    io::put_f64(out, static_cast<double>(c.max));
  }
}

Schema load_schema(std::istream& in) {
  io::expect_magic(in, kSchemaMagic, "schema");
  const std::uint32_t ver = io::get_u32(in);
  if (ver != kFormatVersion)
    fail(ErrorKind::Data, "unsupported schema version " + std::to_string(ver));
  Schema s;
  const std::uint64_t k = io::get_u64(in);
  s.cats.resize(k);
  for (auto& c : s.cats) {
    c.name = io::get_str(in);
    const std::uint64_t nv = io::get_u64(in);
    c.values.reserve(nv);
    for (std::uint64_t i = 0; i < nv; ++i) {
      c.values.push_back(io::get_str(in));
      c.index.emplace(c.values.back(), static_cast<std::uint32_t>(i));
    }
  }
  const std::uint64_t r = io::get_u64(in);
  s.conts.resize(r);
  for (auto& c : s.conts) {
    c.name = io::get_str(in);
    c.fitted = io::get_u8(in) != 0;
    c.min = static_cast<real_t>(io::get_f64(in));
    c.max = static_cast<real_t>(io::get_f64(in));
  }
  return s;
}

void save_schema_file(const std::string& path, const Schema& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write schema: " + path);
  save_schema(out, s);
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open schema: " + path);
  return load_schema(in);
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write dataset: " + path);
  io::put_bytes(out, kDatasetMagic, 4);
  io::put_u32(out, kFormatVersion);
  save_schema(out, ds.schema);
  io::put_u8(out, ds.labeled() ? 1 : 0);
  io::put_u64(out, ds.records.size());
  const std::size_t k = ds.schema.k(), r = ds.schema.r();
  for (const auto& rec : ds.records) {
    if (rec.cat.size() != k || rec.cont.size() != r)
      fail(ErrorKind::Internal, "dataset record does not match schema");
    for (std::uint32_t c : rec.cat) io::put_u32(out, c);
    for (real_t v : rec.cont) io::put_f64(out, static_cast<double>(v));
  }
  if (ds.labeled()) {
    if (ds.labels.size() != ds.records.size())
      fail(ErrorKind::Internal, "label count mismatch");
    for (std::uint8_t l : ds.labels) io::put_u8(out, l);
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open dataset: " + path);
  io::expect_magic(in, kDatasetMagic, "dataset");
  const std::uint32_t ver = io::get_u32(in);
  if (ver != kFormatVersion)
    fail(ErrorKind::Data,
         "unsupported dataset version " + std::to_string(ver));
  Dataset ds;
  ds.schema = load_schema(in);
  const bool labeled = io::get_u8(in) != 0;
  const std::uint64_t n = io::get_u64(in);
  const std::size_t k = ds.schema.k(), r = ds.schema.r();
  ds.records.resize(n);
  for (auto& rec : ds.records) {
    rec.cat.resize(k);
    for (auto& c : rec.cat) {
      c = io::get_u32(in);
    }
    for (std::size_t w = 0; w < k; ++w)
      if (rec.cat[w] >= ds.schema.cats[w].arity())
        fail(ErrorKind::Data, "dataset: categorical index out of range");
    rec.cont.resize(r);
    for (auto& v : rec.cont) v = static_cast<real_t>(io::get_f64(in));
  }
  if (labeled) {
    ds.labels.resize(n);
    for (auto& l : ds.labels) l = io::get_u8(in);
  }
  return ds;
}

}  // namespace chad::data
