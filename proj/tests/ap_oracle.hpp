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

// Brute-force average precision straight from the definition
// AP = sum_n (R_n - R_{n-1}) * P_n, with ranks computed by O(n^2) counting
// instead of a sort. Deliberately shares no code with the library.

#ifndef CHAD_TESTS_AP_ORACLE_HPP_
#define CHAD_TESTS_AP_ORACLE_HPP_

#include <cstddef>
#include <vector>

namespace chad_test {

inline double ap_oracle(const std::vector<double>& scores,
                        const std::vector<int>& labels,
                        bool low_is_anomalous) {
  const std::size_t n = scores.size();
  // rank[i]: how many elements sit strictly ahead of i in anomaly-first
  // order; ties go to the earlier input index.
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool more_anom = low_is_anomalous ? scores[j] < scores[i]
                                              : scores[j] > scores[i];
      const bool tie_earlier = scores[j] == scores[i] && j < i;
      if (more_anom || tie_earlier) ++rank[i];
    }
  }
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l ? 1 : 0;

  double ap = 0, prev_recall = 0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t who = n;
    for (std::size_t i = 0; i < n; ++i)
      if (rank[i] == r) who = i;
    if (labels[who]) ++hits;
    const double recall = static_cast<double>(hits) /
                          static_cast<double>(n_pos);
    const double precision = static_cast<double>(hits) /
                             static_cast<double>(r + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace chad_test

#endif  // CHAD_TESTS_AP_ORACLE_HPP_
