#include "sparsegrow/nn/optimizer.hpp"

namespace sparsegrow {

double LearningRateSchedule::at(double epoch) const {
    double lr = initial;
    for (double e : drop_epochs)
        if (epoch >= e) lr /= drop_factor;
    return lr;
}

void OptimizerState::validate() const {
    if (!(lr.initial > 0)) throw ConfigError("learning rate must be > 0");
    if (!(lr.drop_factor > 0)) throw ConfigError("learning rate drop factor must be > 0");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0)) throw ConfigError("weight decay must be >= 0");
}

void sgd_update(std::span<real> theta, std::span<real> velocity, std::span<const real> grad,
                double lr, double momentum, double weight_decay) {
    if (theta.size() != velocity.size() || theta.size() != grad.size())
        throw ShapeMismatch("sgd_update: parameter, velocity and gradient lengths differ");
    const real mu = static_cast<real>(momentum);
    const real l2 = static_cast<real>(weight_decay);
    const real eta = static_cast<real>(lr);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = mu * velocity[i] + (grad[i] + l2 * theta[i]);
        theta[i] -= eta * velocity[i];
    }
}

void sgd_step(Model& model, const Gradients& grads, const OptimizerState& opt, double epoch) {
    const double lr = opt.lr.at(epoch);
    for (std::size_t p = 0; p < model.params.size(); ++p) {
        auto& lp = model.params[p];
        sgd_update(lp.weights.weights(), lp.weights.momentum(), grads.weights[p], lr, opt.momentum,
                   opt.weight_decay);
        if (!lp.bias.empty())
            sgd_update(lp.bias, lp.bias_momentum, grads.bias[p], lr, opt.momentum,
                       opt.weight_decay);
    }
}

}  // namespace sparsegrow
