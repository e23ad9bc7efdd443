#include "rr/kernels.hpp"

namespace rr::nd::kernels {

namespace {
constexpr int64_t kOmpThreshold = 1 << 16;  // flops below this run serial
}

void matmul_acc_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<int64_t>(i) * k;
        double* ci = c + static_cast<int64_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<int64_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_acc_omp(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<int64_t>(i) * k;
        double* ci = c + static_cast<int64_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<int64_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_tn_acc_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int p = 0; p < k; ++p) {
        const double* ap = a + static_cast<int64_t>(p) * m;
        const double* bp = b + static_cast<int64_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            double* ci = c + static_cast<int64_t>(i) * n;
            const double api = ap[i];
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

void matmul_tn_acc_omp(const double* a, const double* b, double* c, int m, int k, int n) {
    // Parallel over output rows; each row accumulates over p in the same
    // order as the serial loop.
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<int64_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double api = a[static_cast<int64_t>(p) * m + i];
            const double* bp = b + static_cast<int64_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

void matmul_nt_acc_serial(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<int64_t>(i) * k;
        double* ci = c + static_cast<int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<int64_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

void matmul_nt_acc_omp(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<int64_t>(i) * k;
        double* ci = c + static_cast<int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<int64_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

void axpy_serial(double alpha, const double* x, double* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_omp(double alpha, const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n >= kOmpThreshold && m > 1)
        matmul_acc_omp(a, b, c, m, k, n);
    else
        matmul_acc_serial(a, b, c, m, k, n);
}

void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n >= kOmpThreshold && m > 1)
        matmul_tn_acc_omp(a, b, c, m, k, n);
    else
        matmul_tn_acc_serial(a, b, c, m, k, n);
}

void matmul_nt_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n >= kOmpThreshold && m > 1)
        matmul_nt_acc_omp(a, b, c, m, k, n);
    else
        matmul_nt_acc_serial(a, b, c, m, k, n);
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
    if (n >= kOmpThreshold)
        axpy_omp(alpha, x, y, n);
    else
        axpy_serial(alpha, x, y, n);
}

}  // namespace rr::nd::kernels
