#pragma once

#include <span>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/nn/model.hpp"

namespace sparsegrow {

/// Piecewise-constant learning rate: divided by drop_factor at each epoch in
/// drop_epochs.
struct LearningRateSchedule {
    double initial = 0.1;
    double drop_factor = 10.0;
    std::vector<double> drop_epochs;

    double at(double epoch) const;
};

struct OptimizerState {
    LearningRateSchedule lr;
    double momentum = 0.9;
    double weight_decay = 1e-4;

    void validate() const;
};

/// v <- mu * v + (g + l2 * theta); theta <- theta - lr * v.
void sgd_update(std::span<real> theta, std::span<real> velocity, std::span<const real> grad,
                double lr, double momentum, double weight_decay);

/// Apply sgd_update to every sparse weight vector and every dense bias, with
/// the learning rate for `epoch`.
void sgd_step(Model& model, const Gradients& grads, const OptimizerState& opt, double epoch);

}  // namespace sparsegrow
