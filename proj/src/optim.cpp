#include "rr/optim.hpp"

#include <cmath>

namespace rr::nd {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double weight_decay) {
    if (!param.same_shape(grad)) throw std::invalid_argument("adam_step: param/grad shape mismatch");
    if (state.m.data.empty()) {
        state.m = Tensor::zeros(param.shape);
        state.v = Tensor::zeros(param.shape);
    }
    if (!state.m.same_shape(param)) throw std::invalid_argument("adam_step: state shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < param.data.size(); ++i) {
        const double g = grad.data[i];
        state.m.data[i] = state.beta1 * state.m.data[i] + (1.0 - state.beta1) * g;
        state.v.data[i] = state.beta2 * state.v.data[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m.data[i] / bc1;
        const double vhat = state.v.data[i] / bc2;
        param.data[i] -= lr * (mhat / (std::sqrt(vhat) + state.eps) + weight_decay * param.data[i]);
    }
}

void sgd_step(Tensor& param, const Tensor& grad, double lr) {
    if (!param.same_shape(grad)) throw std::invalid_argument("sgd_step: param/grad shape mismatch");
    for (size_t i = 0; i < param.data.size(); ++i) param.data[i] -= lr * grad.data[i];
}

double OneCycleSchedule::lr(int64_t step) const {
    if (step < 0 || step >= total_steps) throw std::out_of_range("OneCycleSchedule: step out of range");
    if (total_steps == 1) return max_lr;
    const double end_lr = max_lr / 1000.0;
    const int64_t warmup_steps = static_cast<int64_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
    if (warmup_steps > 0 && step < warmup_steps)
        return max_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
    const int64_t last = total_steps - 1;
    if (step >= last) return end_lr;
    const double frac = static_cast<double>(step - warmup_steps) / static_cast<double>(last - warmup_steps);
    return end_lr + (max_lr - end_lr) * 0.5 * (1.0 + std::cos(M_PI * frac));
}

}  // namespace rr::nd
