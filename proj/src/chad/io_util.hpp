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
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "chad/common.hpp"

// Little-endian binary stream helpers for the schema/dataset/model formats.
// The build targets little-endian hosts only (asserted in common.hpp), so
// plain byte copies are the wire format.

namespace chad::io {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out) fail(ErrorKind::Data, "write failed");
}

inline void get_bytes(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    fail(ErrorKind::Data, "unexpected end of file");
}

inline void put_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, 1); }
inline void put_u32(std::ostream& out, std::uint32_t v) {
  put_bytes(out, &v, 4);
}
inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_bytes(out, &v, 8);
}
inline void put_f64(std::ostream& out, double v) { put_bytes(out, &v, 8); }
inline void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  if (!s.empty()) put_bytes(out, s.data(), s.size());
}

inline std::uint8_t get_u8(std::istream& in) {
  std::uint8_t v;
  get_bytes(in, &v, 1);
  return v;
}
inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v;
  get_bytes(in, &v, 4);
  return v;
}
inline std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v;
  get_bytes(in, &v, 8);
  return v;
}
inline double get_f64(std::istream& in) {
  double v;
  get_bytes(in, &v, 8);
  return v;
}
inline std::string get_str(std::istream& in, std::size_t max_len = 1u << 20) {
  const std::uint64_t n = get_u64(in);
  if (n > max_len) fail(ErrorKind::Data, "string field too long");
  std::string s(n, '\0');
  if (n > 0) get_bytes(in, s.data(), n);
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5],
                         const std::string& what) {
  char got[4];
  get_bytes(in, got, 4);
  if (std::memcmp(got, magic, 4) != 0)
    fail(ErrorKind::Data, "not a " + what + " file (bad magic)");
}

}  // namespace chad::io
