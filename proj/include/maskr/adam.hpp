#pragma once

#include <functional>

#include "maskr/tape.hpp"

namespace maskr::nn {

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Adam with bias correction over a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

    // Applies one update from the accumulated grads, then increments the
    // step counter. Throws TrainingDiverged if any grad is non-finite.
    void step();
    void zero_grad();
    int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig cfg_;
    int64_t step_ = 0;
    std::vector<Tensor> first_moment_;
    std::vector<Tensor> second_moment_;
};

// Central finite-difference check of analytic gradients.
// loss_fn must rebuild the forward pass from current parameter values and
// return the scalar loss; grads are produced by the caller-provided backward
// closure (typically the same fn run through a tape).
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    int64_t worst_index = -1;
};

GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& compute_grads,
                           std::vector<Parameter*> params, double h = 1e-3);

}  // namespace maskr::nn
