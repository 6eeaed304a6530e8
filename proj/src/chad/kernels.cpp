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

#include "chad/kernels.hpp"

#include <string>

#include "chad/common.hpp"
#include "chad/kernels_detail.hpp"

namespace chad::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(CHAD_X86_AVX2_BUILD)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend& active_slot() {
  static Backend b = best_available();
  return b;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "?";
}

bool supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2_fma();
  }
  return false;
}

Backend active() { return active_slot(); }

void set_backend(Backend b) {
  if (!supported(b))
    fail(ErrorKind::Config,
         std::string("kernel backend not supported here: ") + backend_name(b));
  active_slot() = b;
}

Backend best_available() {
  return cpu_has_avx2_fma() ? Backend::Avx2 : Backend::Scalar;
}

#if defined(CHAD_X86_AVX2_BUILD)
#define CHAD_DISPATCH(fn, ...)                  \
  do {                                          \
    if (active_slot() == Backend::Avx2)         \
      return avx2::fn(__VA_ARGS__);             \
    return scalar::fn(__VA_ARGS__);             \
  } while (0)
#else
#define CHAD_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  CHAD_DISPATCH(gemm_nn, a, b, c, m, k, n, accumulate);
}

template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  CHAD_DISPATCH(gemm_tn, a, b, c, m, k, n, accumulate);
}

template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  CHAD_DISPATCH(gemm_nt, a, b, c, m, k, n, accumulate);
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  CHAD_DISPATCH(axpy, n, alpha, x, y);
}

template <class T>
void scale(std::size_t n, T alpha, T* x) {
  CHAD_DISPATCH(scale, n, alpha, x);
}

template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b) {
  CHAD_DISPATCH(sum_sq_diff, n, a, b);
}

template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v, T beta1,
                 T beta2, T eps, T lr, std::int64_t step) {
  CHAD_DISPATCH(adam_update, n, param, grad, m, v, beta1, beta2, eps, lr, step);
}

#undef CHAD_DISPATCH

template void gemm_nn<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_nn<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template void gemm_tn<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_tn<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template void gemm_nt<float>(const float*, const float*, float*, std::size_t,
                             std::size_t, std::size_t, bool);
template void gemm_nt<double>(const double*, const double*, double*,
                              std::size_t, std::size_t, std::size_t, bool);
template void axpy<float>(std::size_t, float, const float*, float*);
template void axpy<double>(std::size_t, double, const double*, double*);
template void scale<float>(std::size_t, float, float*);
template void scale<double>(std::size_t, double, double*);
template float sum_sq_diff<float>(std::size_t, const float*, const float*);
template double sum_sq_diff<double>(std::size_t, const double*, const double*);
template void adam_update<float>(std::size_t, float*, const float*, float*,
                                 float*, float, float, float, float,
                                 std::int64_t);
template void adam_update<double>(std::size_t, double*, const double*, double*,
                                  double*, double, double, double, double,
                                  std::int64_t);

}  // namespace chad::kernels
