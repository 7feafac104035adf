#include "maskr/adam.hpp"

#include <cmath>

namespace maskr::nn {

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    first_moment_.reserve(params_.size());
    second_moment_.reserve(params_.size());
    for (Parameter* p : params_) {
        first_moment_.push_back(Tensor::zeros(p->value.shape));
        second_moment_.push_back(Tensor::zeros(p->value.shape));
    }
}

void Adam::step() {
    for (Parameter* p : params_)
        if (!all_finite(p->grad))
            throw TrainingDiverged("non-finite gradient in '" + p->name + "' at step " +
                                   std::to_string(step_ + 1));
    ++step_;
    double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(step_));
    for (size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        Tensor& m = first_moment_[k];
        Tensor& v = second_moment_[k];
        for (size_t i = 0; i < p.value.data.size(); ++i) {
            float g = p.grad.data[i];
            m.data[i] = cfg_.beta1 * m.data[i] + (1.0f - cfg_.beta1) * g;
            v.data[i] = cfg_.beta2 * v.data[i] + (1.0f - cfg_.beta2) * g * g;
            float mhat = static_cast<float>(m.data[i] / bc1);
            float vhat = static_cast<float>(v.data[i] / bc2);
            p.value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

GradCheckResult grad_check(const std::function<double()>& loss_fn,
                           const std::function<void()>& compute_grads,
                           std::vector<Parameter*> params, double h) {
    for (Parameter* p : params) p->zero_grad();
    compute_grads();
    GradCheckResult res;
    // near-zero elements are judged against the model's gradient scale, which
    // keeps f32 forward noise from swamping the check (a K-projection bias,
    // for instance, has an exactly-zero gradient by softmax shift invariance)
    double gmax = 0.0;
    for (Parameter* p : params)
        for (float g : p->grad.data) gmax = std::max(gmax, static_cast<double>(std::abs(g)));
    double floor = std::max(0.05 * gmax, 1e-6);
    for (Parameter* p : params) {
        for (size_t i = 0; i < p->value.data.size(); ++i) {
            float saved = p->value.data[i];
            p->value.data[i] = saved + static_cast<float>(h);
            double up = loss_fn();
            p->value.data[i] = saved - static_cast<float>(h);
            double down = loss_fn();
            p->value.data[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double analytic = static_cast<double>(p->grad.data[i]);
            double denom = std::max(std::abs(numeric) + std::abs(analytic), floor);
            double rel = std::abs(numeric - analytic) / denom;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = p->name;
                res.worst_index = static_cast<int64_t>(i);
            }
        }
    }
    return res;
}

}  // namespace maskr::nn
