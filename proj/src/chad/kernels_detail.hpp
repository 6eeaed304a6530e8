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

// Per-backend entry points. Only kernels.cpp (the dispatcher) includes this.

namespace chad::kernels::scalar {

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);
template <class T>
void scale(std::size_t n, T alpha, T* x);
template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b);
template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v, T beta1,
                 T beta2, T eps, T lr, std::int64_t step);

}  // namespace chad::kernels::scalar

#if defined(CHAD_X86_AVX2_BUILD)
namespace chad::kernels::avx2 {

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y);
template <class T>
void scale(std::size_t n, T alpha, T* x);
template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b);
template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v, T beta1,
                 T beta2, T eps, T lr, std::int64_t step);

}  // namespace chad::kernels::avx2
#endif  // CHAD_X86_AVX2_BUILD
