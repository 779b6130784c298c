#include "morph/num/kernels.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace morph::num::kernels {

namespace {

std::atomic<std::size_t> g_threshold{1u << 15};

// One output row of each product. Serial and parallel paths share these so
// the floating-point operation sequence per element is the same.
template <typename T>
inline void row_nn(std::size_t i, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool acc) {
  T* crow = c + i * n;
  if (!acc) {
    for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
  }
  const T* arow = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const T av = arow[p];
    const T* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

template <typename T>
inline void row_nt(std::size_t i, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool acc) {
  const T* arow = a + i * k;
  T* crow = c + i * n;
  for (std::size_t j = 0; j < n; ++j) {
    const T* brow = b + j * k;
    T s = T(0);
    for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
    crow[j] = acc ? crow[j] + s : s;
  }
}

template <typename T>
inline void row_tn(std::size_t i, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                   bool acc) {
  T* crow = c + i * n;
  if (!acc) {
    for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const T av = a[p * m + i];
    if (av == T(0)) continue;
    const T* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

}  // namespace

namespace serial {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) row_nn(i, n, k, a, b, c, accumulate);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) row_nt(i, n, k, a, b, c, accumulate);
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) row_tn(i, m, n, k, a, b, c, accumulate);
}

}  // namespace serial

namespace parallel {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) row_nn(static_cast<std::size_t>(i), n, k, a, b, c, accumulate);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto rows = static_cast<long long>(m);
  if (m == 1) {
    // Matrix-vector products: split over output columns instead.
    const auto cols = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < cols; ++j) {
      const T* brow = b + j * k;
      T s = T(0);
      for (std::size_t p = 0; p < k; ++p) s += a[p] * brow[p];
      c[j] = accumulate ? c[j] + s : s;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) row_nt(static_cast<std::size_t>(i), n, k, a, b, c, accumulate);
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) row_tn(static_cast<std::size_t>(i), m, n, k, a, b, c, accumulate);
}

}  // namespace parallel

namespace {

bool use_parallel(std::size_t m, std::size_t n, std::size_t k) {
#ifdef _OPENMP
  if (omp_in_parallel()) return false;
  return m * n * k >= g_threshold.load(std::memory_order_relaxed) && omp_get_max_threads() > 1;
#else
  (void)m;
  (void)n;
  (void)k;
  return false;
#endif
}

}  // namespace

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    parallel::gemm_nn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nn(m, n, k, a, b, c, accumulate);
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    parallel::gemm_nt(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nt(m, n, k, a, b, c, accumulate);
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  if (use_parallel(m, n, k)) {
    parallel::gemm_tn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_tn(m, n, k, a, b, c, accumulate);
  }
}

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

std::size_t parallel_threshold() { return g_threshold.load(); }
void set_parallel_threshold(std::size_t work) { g_threshold.store(work); }

#define MORPH_INSTANTIATE_GEMM(NS, T)                                                                     \
  template void NS gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
  template void NS gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
  template void NS gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool);

MORPH_INSTANTIATE_GEMM(serial::, float)
MORPH_INSTANTIATE_GEMM(serial::, double)
MORPH_INSTANTIATE_GEMM(parallel::, float)
MORPH_INSTANTIATE_GEMM(parallel::, double)
MORPH_INSTANTIATE_GEMM(, float)
MORPH_INSTANTIATE_GEMM(, double)

#undef MORPH_INSTANTIATE_GEMM

}  // namespace morph::num::kernels
