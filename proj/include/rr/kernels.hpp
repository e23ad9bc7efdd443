#pragma once

#include <cstdint>

namespace rr::nd::kernels {

// c[m x n] += a[m x k] * b[k x n]. The serial variant is the reference; the
// OpenMP variant parallelizes over output rows with an identical per-element
// accumulation order, so both produce bitwise-equal results.
void matmul_acc_serial(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_acc_omp(const double* a, const double* b, double* c, int m, int k, int n);

// c[m x n] += a^T[k x m] * b[k x n]   (a stored as [k x m])
void matmul_tn_acc_serial(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn_acc_omp(const double* a, const double* b, double* c, int m, int k, int n);

// c[m x n] += a[m x k] * b^T[n x k]   (b stored as [n x k])
void matmul_nt_acc_serial(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt_acc_omp(const double* a, const double* b, double* c, int m, int k, int n);

// y[i] += alpha * x[i]
void axpy_serial(double alpha, const double* x, double* y, int64_t n);
void axpy_omp(double alpha, const double* x, double* y, int64_t n);

// Dispatchers: pick the OpenMP path when the work is large enough to pay
// for thread startup. Deterministic either way.
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt_acc(const double* a, const double* b, double* c, int m, int k, int n);
void axpy(double alpha, const double* x, double* y, int64_t n);

}  // namespace rr::nd::kernels
