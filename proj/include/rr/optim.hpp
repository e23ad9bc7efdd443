#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "rr/tensor.hpp"

namespace rr::nd {

// Adam with bias correction. One state per named parameter.
struct AdamState {
    Tensor m;  // first moment
    Tensor v;  // second moment
    int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// In-place Adam update of a single parameter tensor.
// Decoupled weight decay (applied directly to the parameter, not the
// gradient moments).
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double weight_decay = 0.0);

// Plain SGD update, used by the --sgd training path.
void sgd_step(Tensor& param, const Tensor& grad, double lr);

// 1-cycle learning-rate schedule: linear ramp 0 -> max_lr over the first
// warmup fraction of steps, then cosine decay from max_lr to max_lr/1000.
struct OneCycleSchedule {
    double max_lr;
    int64_t total_steps;
    double warmup_fraction = 0.1;

    double lr(int64_t step) const;
};

}  // namespace rr::nd
