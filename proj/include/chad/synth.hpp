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

// Synthetic network-connection table in the KDDCup99 shape: 6 categorical
// fields (protocol, service x65, flag x11, land, logged_in, is_guest_login)
// and 35 continuous features, with clustered normal service profiles and
// DoS/probe/R2L/U2R-style attack rows. Fully seeded and deterministic.

#ifndef CHAD_SYNTH_HPP_
#define CHAD_SYNTH_HPP_

#include <cstdint>
#include <string>

#include "chad/common.hpp"

namespace chad::synth {

struct SynthConfig {
  std::size_t n_normal = 14286;  // 70% split of this is a 10k train set
  std::size_t n_anomaly = 2500;
  std::uint64_t seed = 7;
};

/// Schema declaration text matching the generated CSV.
std::string network_schema_decl();

/// Write the labeled CSV: header row, then n_normal + n_anomaly shuffled
/// records. The first rows cycle through every categorical value so a
/// loaded schema always covers the full vocabulary.
void write_network_csv(const std::string& path, const SynthConfig& config);

}  // namespace chad::synth

#endif  // CHAD_SYNTH_HPP_
