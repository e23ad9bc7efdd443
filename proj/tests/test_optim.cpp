#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rr/optim.hpp"

using namespace rr::nd;

TEST_CASE("adam matches a hand-traced update") {
    // One parameter, two steps with constant gradient g.
    Tensor p = Tensor::scalar(1.0);
    Tensor g = Tensor::scalar(0.5);
    AdamState st;
    const double lr = 0.1, b1 = st.beta1, b2 = st.beta2, eps = st.eps;

    adam_step(p, g, st, lr);
    double m = (1 - b1) * 0.5;
    double v = (1 - b2) * 0.25;
    double mhat = m / (1 - b1);
    double vhat = v / (1 - b2);
    double want = 1.0 - lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(p.data[0] == doctest::Approx(want).epsilon(1e-14));
    CHECK(st.step == 1);

    adam_step(p, g, st, lr);
    m = b1 * m + (1 - b1) * 0.5;
    v = b2 * v + (1 - b2) * 0.25;
    mhat = m / (1 - b1 * b1);
    vhat = v / (1 - b2 * b2);
    want -= lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(p.data[0] == doctest::Approx(want).epsilon(1e-14));
    CHECK(st.step == 2);
}

TEST_CASE("adam weight decay is decoupled from the moments") {
    Tensor p1 = Tensor::scalar(2.0), p2 = Tensor::scalar(2.0);
    Tensor g = Tensor::scalar(0.3);
    AdamState s1, s2;
    adam_step(p1, g, s1, 0.1, 0.0);
    adam_step(p2, g, s2, 0.1, 0.01);
    // decoupled decay subtracts lr * wd * param on top of the Adam step
    CHECK(p2.data[0] == doctest::Approx(p1.data[0] - 0.1 * 0.01 * 2.0).epsilon(1e-14));
    // the moments must be identical: decay never leaks into them
    CHECK(s1.m.data[0] == s2.m.data[0]);
    CHECK(s1.v.data[0] == s2.v.data[0]);
}

TEST_CASE("adam converges on a quadratic") {
    // minimize (x - 3)^2
    Tensor x = Tensor::scalar(-5.0);
    AdamState st;
    for (int i = 0; i < 4000; ++i) {
        Tensor g = Tensor::scalar(2.0 * (x.data[0] - 3.0));
        adam_step(x, g, st, 0.05);
    }
    CHECK(x.data[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("sgd step") {
    Tensor p = Tensor::vec({1.0, -2.0});
    sgd_step(p, Tensor::vec({0.5, 0.25}), 0.2);
    CHECK(p.data[0] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(p.data[1] == doctest::Approx(-2.05).epsilon(1e-14));
}

TEST_CASE("adam rejects shape mismatches") {
    Tensor p = Tensor::vec({1.0, 2.0});
    AdamState st;
    CHECK_THROWS(adam_step(p, Tensor::vec({1.0}), st, 0.1));
}

TEST_CASE("one-cycle schedule endpoints and shape") {
    OneCycleSchedule sched{1e-3, 1000, 0.1};
    const int64_t warmup = 100;

    CHECK(sched.lr(0) == 0.0);                                     // ramp starts at zero
    CHECK(sched.lr(50) == doctest::Approx(1e-3 * 0.5));            // halfway up the ramp
    CHECK(sched.lr(warmup) == doctest::Approx(1e-3));              // peak at end of warmup
    CHECK(sched.lr(999) == doctest::Approx(1e-6).epsilon(1e-12));  // final lr = max/1000

    // cosine midpoint between peak and floor
    double mid = sched.lr(warmup + (999 - warmup) / 2);
    double lo = 1e-6, hi = 1e-3;
    CHECK(mid > lo);
    CHECK(mid < hi);
    CHECK(mid == doctest::Approx(lo + (hi - lo) * 0.5).epsilon(0.01));

    // monotone up the ramp, monotone down the decay
    for (int64_t s = 1; s <= warmup; ++s) CHECK(sched.lr(s) >= sched.lr(s - 1));
    for (int64_t s = warmup + 1; s < 1000; ++s) CHECK(sched.lr(s) <= sched.lr(s - 1));

    CHECK_THROWS_AS((void)sched.lr(-1), std::out_of_range);
    CHECK_THROWS_AS((void)sched.lr(1000), std::out_of_range);
}

TEST_CASE("one-cycle degenerate cases") {
    OneCycleSchedule one{2e-3, 1, 0.1};
    CHECK(one.lr(0) == doctest::Approx(2e-3));

    OneCycleSchedule no_warmup{1e-2, 10, 0.0};
    CHECK(no_warmup.lr(0) == doctest::Approx(1e-2));  // no ramp: starts at peak
    CHECK(no_warmup.lr(9) == doctest::Approx(1e-5));
}
