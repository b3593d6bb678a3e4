#pragma once

#include <Eigen/Core>

namespace allconv {

// Thin row-major GEMM wrappers over Eigen. Single-threaded and sequential,
// so reductions have a fixed summation order regardless of how many folds
// run in parallel around them.

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

// C[M,N] = A[M,K] * B[K,N]  (+= when accumulate)
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate = false) {
  CMapMat<T> A(a, m, k);
  CMapMat<T> B(b, k, n);
  MapMat<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A * B;
  else
    C.noalias() = A * B;
}

// C[M,N] = A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate = false) {
  CMapMat<T> A(a, m, k);
  CMapMat<T> B(b, n, k);
  MapMat<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A * B.transpose();
  else
    C.noalias() = A * B.transpose();
}

// C[M,N] = A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate = false) {
  CMapMat<T> A(a, k, m);
  CMapMat<T> B(b, k, n);
  MapMat<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A.transpose() * B;
  else
    C.noalias() = A.transpose() * B;
}

}  // namespace allconv
