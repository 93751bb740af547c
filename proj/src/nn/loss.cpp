#include "sparsegrow/nn/loss.hpp"

#include <cmath>
#include <string>

namespace sparsegrow {

LossResult cross_entropy(const Matrix& logits, std::span<const int> labels, real smoothing) {
    const std::size_t classes = logits.rows();
    const std::size_t batch = logits.cols();
    if (labels.size() != batch) throw ShapeMismatch("cross_entropy: label count differs from batch");
    if (!(smoothing >= 0 && smoothing < 1))
        throw ShapeMismatch("cross_entropy: smoothing must lie in [0, 1)");

    LossResult r;
    r.grad = Matrix(classes, batch);
    const double off = double(smoothing) / double(classes);
    const double on = 1.0 - double(smoothing) + off;
    double total = 0;
    std::vector<double> logp(classes);
    for (std::size_t i = 0; i < batch; ++i) {
        const int y = labels[i];
        if (y < 0 || std::size_t(y) >= classes)
            throw ShapeMismatch("cross_entropy: label " + std::to_string(y) + " out of range");
        double mx = logits(0, i);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (logits(c, i) > mx) {
                mx = logits(c, i);
                arg = c;
            }
        if (arg == std::size_t(y)) ++r.correct;
        double z = 0;
        for (std::size_t c = 0; c < classes; ++c) z += std::exp(double(logits(c, i)) - mx);
        const double lse = mx + std::log(z);
        for (std::size_t c = 0; c < classes; ++c) {
            logp[c] = double(logits(c, i)) - lse;
            const double q = c == std::size_t(y) ? on : off;
            total -= q * logp[c];
            r.grad(c, i) = static_cast<real>((std::exp(logp[c]) - q) / double(batch));
        }
    }
    r.loss = total / double(batch);
    return r;
}

TrainStepResult backward(const Model& model, ActivationCache& cache, std::span<const int> labels) {
    TrainStepResult r;
    r.loss = cross_entropy(cache.logits(), labels, model.spec.label_smoothing);
    r.grads = backward(model, cache, r.loss.grad);
    return r;
}

}  // namespace sparsegrow
