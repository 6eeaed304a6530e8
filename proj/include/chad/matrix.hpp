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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "chad/common.hpp"

namespace chad {

/// Dense row-major matrix of real_t. The one container every network
/// parameter, batch and gradient lives in.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, real_t fill = real_t{0})
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }

  real_t& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  real_t operator()(std::size_t i, std::size_t j) const {
    return v_[i * cols_ + j];
  }

  real_t* data() noexcept { return v_.data(); }
  const real_t* data() const noexcept { return v_.data(); }

  std::span<real_t> row(std::size_t i) {
    return {v_.data() + i * cols_, cols_};
  }
  std::span<const real_t> row(std::size_t i) const {
    return {v_.data() + i * cols_, cols_};
  }

  void assign(std::size_t rows, std::size_t cols, real_t fill = real_t{0}) {
    rows_ = rows;
    cols_ = cols;
    v_.assign(rows * cols, fill);
  }
  void set_zero() { std::fill(v_.begin(), v_.end(), real_t{0}); }

  bool same_shape(const Mat& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const noexcept {
    for (real_t x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.v_ == b.v_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<real_t> v_;
};

inline void require_shape(const Mat& m, std::size_t rows, std::size_t cols,
                          const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    fail(ErrorKind::Internal,
         std::string("shape error: ") + what + ": got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
             ", want " + std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace chad
