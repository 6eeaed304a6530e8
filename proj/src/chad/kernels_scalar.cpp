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

// Reference kernels. Loop order matches the AVX2 variants (i, l, j with the
// innermost j loop contiguous in B and C) so the two backends differ only by
// lane width and FMA rounding, not by accumulation order.

#include <cmath>
#include <cstring>

#include "chad/kernels_detail.hpp"

namespace chad::kernels::scalar {

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, n * sizeof(T));
    const T* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const T av = ai[l];
      const T* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
  for (std::size_t l = 0; l < k; ++l) {
    const T* al = a + l * m;
    const T* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = al[i];
      T* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc{0};
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

template <class T>
void scale(std::size_t n, T alpha, T* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = alpha * x[i];
}

template <class T>
T sum_sq_diff(std::size_t n, const T* a, const T* b) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

template <class T>
void adam_update(std::size_t n, T* param, const T* grad, T* m, T* v, T beta1,
                 T beta2, T eps, T lr, std::int64_t step) {
  const T bc1 = T(1) - std::pow(beta1, static_cast<T>(step));
  const T bc2 = T(1) - std::pow(beta2, static_cast<T>(step));
  const T one_m_b1 = T(1) - beta1;
  const T one_m_b2 = T(1) - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const T g = grad[i];
    const T mi = beta1 * m[i] + one_m_b1 * g;
    const T vi = beta2 * v[i] + one_m_b2 * (g * g);
    m[i] = mi;
    v[i] = vi;
    const T mhat = mi / bc1;
    const T vhat = vi / bc2;
    param[i] = param[i] - lr * (mhat / (std::sqrt(vhat) + eps));
  }
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

}  // namespace chad::kernels::scalar
