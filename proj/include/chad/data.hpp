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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "chad/common.hpp"
#include "chad/rng.hpp"

// Schema + CSV ingestion for mixed categorical/continuous tables.
// Pipeline: parse a schema declaration, load_csv (drops rows with missing
// cells and, with a frequency floor, rows holding rare categorical values),
// fit_normalizer on the training slice, then 0-1-normalize everything else
// against those bounds. Index maps are first-seen order, so loading is
// deterministic and order-preserving.

namespace chad::data {

struct CatField {
  std::string name;
  std::vector<std::string> values;              // index -> value
  std::unordered_map<std::string, std::uint32_t> index;  // value -> index
  std::size_t arity() const { return values.size(); }
};

struct ContField {
  std::string name;
  real_t min = real_t(0);
  real_t max = real_t(0);
  bool fitted = false;
};

class Schema {
 public:
  std::vector<CatField> cats;
  std::vector<ContField> conts;

  std::size_t k() const { return cats.size(); }
  std::size_t r() const { return conts.size(); }
  std::size_t total_arity() const;
  bool fitted() const;

  /// Stable digest of names, value maps and fitted bounds; model files
  /// carry it so a model can refuse data encoded under another schema.
  std::uint64_t fingerprint() const;
};

struct EncodedRecord {
  std::vector<std::uint32_t> cat;
  std::vector<real_t> cont;
};

struct Dataset {
  Schema schema;
  std::vector<EncodedRecord> records;
  std::vector<std::uint8_t> labels;  // empty, or per record: 1 = anomaly
  bool labeled() const { return !labels.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Parsed schema declaration: field order, frequency floor, optional label
/// column. Declaration text has one directive per line:
///   categorical <field>   continuous <field>   floor <count>
///   label <column> <normal-value>
struct SchemaDecl {
  std::vector<std::pair<std::string, bool>> fields;  // (name, is_categorical)
  std::size_t freq_floor = 0;
  std::optional<std::string> label_column;
  std::string label_normal;
};

SchemaDecl parse_schema_decl(const std::string& text);
SchemaDecl load_schema_decl(const std::string& path);

struct LoadResult {
  Dataset dataset;            // raw cont values; schema not yet fitted
  std::size_t dropped_missing = 0;
  std::size_t dropped_low_freq = 0;
};

/// Parse the CSV at path under the declaration. Continuous values stay raw
/// until fit_normalizer/normalize_against run.
LoadResult load_csv(const std::string& path, const SchemaDecl& decl);

/// Fill per-field min/max from ds's own records and rewrite them to [0,1].
/// Degenerate fields (min == max) map to constant 0.
void fit_normalizer(Dataset& ds);

/// Normalize raw-valued records against an already fitted schema, clamping
/// into [0,1]; stamps the fitted bounds onto ds.schema.
void normalize_against(const Schema& fitted, Dataset& ds);

/// Encode one raw record (cells in schema order: categoricals then
/// continuous) against a fitted schema. Unseen categorical values throw a
/// Data error naming the field; continuous values are clamped.
EncodedRecord encode_for_test(const std::vector<std::string>& cells,
                              const Schema& fitted);

struct EncodeCsvResult {
  Dataset dataset;  // normalized against the fitted schema
  std::size_t dropped_missing = 0;
  std::size_t dropped_unseen = 0;
};

/// Encode a whole CSV against a fitted schema, dropping (and counting)
/// rows with missing cells or unseen categorical values.
EncodeCsvResult encode_csv(const std::string& path, const Schema& fitted,
                           const SchemaDecl& decl);

/// Labeled test set: all normals plus floor(ratio * |normals|) anomalies
/// sampled without replacement, shuffled.
Dataset build_eval_mix(const Dataset& normals, const Dataset& anomalies,
                       double anomaly_ratio, RngStream& rng);

/// Split a labeled dataset into (normal-only, anomaly-only) halves.
std::pair<Dataset, Dataset> split_by_label(const Dataset& ds);

// Versioned binary round trip for fitted schemas and encoded datasets.
void save_schema(std::ostream& out, const Schema& s);
Schema load_schema(std::istream& in);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);
void save_schema_file(const std::string& path, const Schema& s);
Schema load_schema_file(const std::string& path);

}  // namespace chad::data
