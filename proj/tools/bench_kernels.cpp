// Timing comparison of the serial reference kernels against the OpenMP
// variants, plus a bitwise-equality audit, at a few dense sizes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "rr/kernels.hpp"
#include "rr/rng.hpp"

using namespace rr::nd::kernels;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    std::mt19937_64 rng = rr::make_rng(7, "bench");
    std::printf("%-22s %10s %10s %8s %s\n", "kernel", "serial ms", "omp ms", "speedup", "bitwise");
    for (int n : {64, 128, 256, 512}) {
        std::vector<double> a(static_cast<size_t>(n) * n), b(a), c1(a.size()), c2(a.size());
        for (double& x : a) x = rr::uniform_real(rng, -1.0, 1.0);
        for (double& x : b) x = rr::uniform_real(rng, -1.0, 1.0);
        const int reps = n <= 128 ? 20 : 5;

        std::fill(c1.begin(), c1.end(), 0.0);
        double ts = time_ms(reps, [&] { matmul_acc_serial(a.data(), b.data(), c1.data(), n, n, n); });
        std::fill(c2.begin(), c2.end(), 0.0);
        double tp = time_ms(reps, [&] { matmul_acc_omp(a.data(), b.data(), c2.data(), n, n, n); });
        bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
        char name[64];
        std::snprintf(name, sizeof name, "matmul_acc %dx%d", n, n);
        std::printf("%-22s %10.3f %10.3f %8.2fx %s\n", name, ts, tp, ts / tp, same ? "yes" : "NO");
    }
    for (int64_t n : {int64_t{1} << 16, int64_t{1} << 20, int64_t{1} << 24}) {
        std::vector<double> x(static_cast<size_t>(n)), y1(x.size(), 0.0), y2(x.size(), 0.0);
        for (double& v : x) v = rr::uniform_real(rng, -1.0, 1.0);
        double ts = time_ms(10, [&] { axpy_serial(0.5, x.data(), y1.data(), n); });
        double tp = time_ms(10, [&] { axpy_omp(0.5, x.data(), y2.data(), n); });
        bool same = std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0;
        char name[64];
        std::snprintf(name, sizeof name, "axpy 2^%d", static_cast<int>(std::log2(double(n))));
        std::printf("%-22s %10.3f %10.3f %8.2fx %s\n", name, ts, tp, ts / tp, same ? "yes" : "NO");
    }
    return 0;
}
