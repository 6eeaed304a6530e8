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

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops of the training substrate. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2+FMA variant; the
// backend is picked once at startup from CPUID and can be forced for tests
// or benchmarking. Within one process the selected backend never changes
// mid-run, so repeated runs on the same machine are bit-identical.
//
// Equivalence contract (exercised by tests/test_kernels.cpp):
//   - adam_update, axpy, scale: bit-identical across backends (elementwise,
//     no reassociation, FMA disabled in those loops).
//   - gemm_*, sum_sq_diff: equal up to reassociation/FMA rounding; compared
//     under a tight relative tolerance.

namespace chad::kernels {

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b);

/// True if this build and this CPU can run the given backend.
bool supported(Backend b);

Backend active();

/// Force a backend (tests, --kernel flag). Throws chad::Error if unsupported.
void set_backend(Backend b);

/// Pick the fastest supported backend. Called implicitly on first use.
Backend best_available();

// C (m x n) = A (m x k) * B (k x n); accumulate adds into C instead.
template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate = false);

// C (m x n) = A^T * B with A stored (k x m), B (k x n).
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate = false);

// C (m x n) = A * B^T with A (m x k), B stored (n x k).
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate = false);

// y += alpha * x
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);

// x *= alpha
template <class T>
void scale(std::size_t n, T alpha, T* x);

// sum((a - b)^2)
template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b);

/// Bias-corrected Adam on one parameter block. `step` is the 1-based count
/// of updates including this one.
template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v,
                 T beta1, T beta2, T eps, T lr, std::int64_t step);

}  // namespace chad::kernels
