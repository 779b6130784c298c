#pragma once

#include <cstddef>

// Dense matrix kernels. Every routine exists twice: a serial reference and an
// OpenMP version that splits work over output rows. Both accumulate each
// output element over the inner index in ascending order, so their results are
// bit-identical regardless of thread count.
namespace morph::num::kernels {

namespace serial {

// c[m,n] (+)= a[m,k] * b[k,n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
// c[m,n] (+)= a[m,k] * b[n,k]^T
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
// c[m,n] (+)= a[k,m]^T * b[k,n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

}  // namespace serial

namespace parallel {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

}  // namespace parallel

// Dispatching entry points used by the autodiff ops. Small products stay
// serial; the parallel path is taken once m*n*k reaches parallel_threshold().
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

bool openmp_available();
int max_threads();
void set_threads(int n);
std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t work);

}  // namespace morph::num::kernels
