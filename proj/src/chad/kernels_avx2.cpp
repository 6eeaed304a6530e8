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

// AVX2+FMA kernels. This TU is compiled with -mavx2 -mfma -ffp-contract=off;
// the contract=off keeps the elementwise kernels (adam_update, axpy, scale)
// free of implicit fusion so they stay bit-identical to the scalar backend.
// The gemm family uses explicit FMA and is equivalence-tested under a
// relative tolerance instead.

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "chad/kernels_detail.hpp"

#if !defined(CHAD_X86_AVX2_BUILD)
#error "kernels_avx2.cpp must be built with CHAD_X86_AVX2_BUILD"
#endif

namespace chad::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

void gemm_nn_impl(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, n * sizeof(double));
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const __m256d av = _mm256_set1_pd(ai[l]);
      const double* bl = b + l * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d cj = _mm256_loadu_pd(ci + j);
        _mm256_storeu_pd(ci + j,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(bl + j), cj));
      }
      for (; j < n; ++j) ci[j] += ai[l] * bl[j];
    }
  }
}

void gemm_nn_impl(const float* a, const float* b, float* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    float* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, n * sizeof(float));
    const float* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const __m256 av = _mm256_set1_ps(ai[l]);
      const float* bl = b + l * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        const __m256 cj = _mm256_loadu_ps(ci + j);
        _mm256_storeu_ps(ci + j,
                         _mm256_fmadd_ps(av, _mm256_loadu_ps(bl + j), cj));
      }
      for (; j < n; ++j) ci[j] += ai[l] * bl[j];
    }
  }
}

void gemm_tn_impl(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t l = 0; l < k; ++l) {
    const double* al = a + l * m;
    const double* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      const __m256d av = _mm256_set1_pd(al[i]);
      double* ci = c + i * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d cj = _mm256_loadu_pd(ci + j);
        _mm256_storeu_pd(ci + j,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(bl + j), cj));
      }
      for (; j < n; ++j) ci[j] += al[i] * bl[j];
    }
  }
}

void gemm_tn_impl(const float* a, const float* b, float* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(float));
  for (std::size_t l = 0; l < k; ++l) {
    const float* al = a + l * m;
    const float* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      const __m256 av = _mm256_set1_ps(al[i]);
      float* ci = c + i * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        const __m256 cj = _mm256_loadu_ps(ci + j);
        _mm256_storeu_ps(ci + j,
                         _mm256_fmadd_ps(av, _mm256_loadu_ps(bl + j), cj));
      }
      for (; j < n; ++j) ci[j] += al[i] * bl[j];
    }
  }
}

void gemm_nt_impl(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      __m256d acc = _mm256_setzero_pd();
      std::size_t l = 0;
      for (; l + 4 <= k; l += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + l), _mm256_loadu_pd(bj + l),
                              acc);
      double s = hsum(acc);
      for (; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void gemm_nt_impl(const float* a, const float* b, float* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const float* bj = b + j * k;
      __m256 acc = _mm256_setzero_ps();
      std::size_t l = 0;
      for (; l + 8 <= k; l += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(ai + l), _mm256_loadu_ps(bj + l),
                              acc);
      float s = hsum(acc);
      for (; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void axpy_impl(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void axpy_impl(std::size_t n, float alpha, const float* x, float* y) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(av, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_impl(std::size_t n, double alpha, double* x) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = alpha * x[i];
}

void scale_impl(std::size_t n, float alpha, float* x) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] = alpha * x[i];
}

double sum_sq_diff_impl(std::size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                    _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

float sum_sq_diff_impl(std::size_t n, const float* a, const float* b) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i),
                                   _mm256_loadu_ps(b + i));
    acc = _mm256_fmadd_ps(d, d, acc);
  }
  float s = hsum(acc);
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Mirrors the scalar op order exactly: mul/mul/add for the moments,
// sqrt/add/div/mul/sub for the update. All are correctly-rounded per lane,
// so the result is bit-identical to the scalar backend.
void adam_update_impl(std::size_t n, double* param, const double* grad,
                      double* m, double* v, double beta1, double beta2,
                      double eps, double lr, std::int64_t step) {
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vomb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vomb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(vomb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(vomb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, vbc1);
    const __m256d vhat = _mm256_div_pd(vi, vbc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d upd = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  const double omb1 = 1.0 - beta1;
  const double omb2 = 1.0 - beta2;
  for (; i < n; ++i) {
    const double g = grad[i];
    const double mi = beta1 * m[i] + omb1 * g;
    const double vi = beta2 * v[i] + omb2 * (g * g);
    m[i] = mi;
    v[i] = vi;
    param[i] = param[i] - lr * ((mi / bc1) / (std::sqrt(vi / bc2) + eps));
  }
}

void adam_update_impl(std::size_t n, float* param, const float* grad, float* m,
                      float* v, float beta1, float beta2, float eps, float lr,
                      std::int64_t step) {
  const float bc1 = 1.0f - std::pow(beta1, static_cast<float>(step));
  const float bc2 = 1.0f - std::pow(beta2, static_cast<float>(step));
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vomb1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vomb2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vbc1 = _mm256_set1_ps(bc1);
  const __m256 vbc2 = _mm256_set1_ps(bc2);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vlr = _mm256_set1_ps(lr);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                                    _mm256_mul_ps(vomb1, g));
    const __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                    _mm256_mul_ps(vomb2, _mm256_mul_ps(g, g)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    const __m256 mhat = _mm256_div_ps(mi, vbc1);
    const __m256 vhat = _mm256_div_ps(vi, vbc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    const __m256 upd = _mm256_mul_ps(vlr, _mm256_div_ps(mhat, denom));
    _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), upd));
  }
  const float omb1 = 1.0f - beta1;
  const float omb2 = 1.0f - beta2;
  for (; i < n; ++i) {
    const float g = grad[i];
    const float mi = beta1 * m[i] + omb1 * g;
    const float vi = beta2 * v[i] + omb2 * (g * g);
    m[i] = mi;
    v[i] = vi;
    param[i] = param[i] - lr * ((mi / bc1) / (std::sqrt(vi / bc2) + eps));
  }
}

}  // namespace

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  gemm_nn_impl(a, b, c, m, k, n, accumulate);
}
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  gemm_tn_impl(a, b, c, m, k, n, accumulate);
}
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  gemm_nt_impl(a, b, c, m, k, n, accumulate);
}
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  axpy_impl(n, alpha, x, y);
}
template <class T>
void scale(std::size_t n, T alpha, T* x) {
  scale_impl(n, alpha, x);
}
template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b) {
  return sum_sq_diff_impl(n, a, b);
}
template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v, T beta1,
                 T beta2, T eps, T lr, std::int64_t step) {
  adam_update_impl(n, param, grad, m, v, beta1, beta2, eps, lr, step);
}

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

}  // namespace chad::kernels::avx2
