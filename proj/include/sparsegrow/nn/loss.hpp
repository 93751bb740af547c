#pragma once

#include <span>

#include "sparsegrow/common.hpp"
#include "sparsegrow/nn/model.hpp"

namespace sparsegrow {

struct LossResult {
    double loss = 0;          // mean over the batch
    Matrix grad;              // d loss / d logits, classes x B
    std::size_t correct = 0;  // argmax hits
};

/// Softmax cross-entropy against label-smoothed targets
/// q = (1 - s) * onehot + s / C, averaged over the batch. logits is C x B.
LossResult cross_entropy(const Matrix& logits, std::span<const int> labels, real smoothing);

struct TrainStepResult {
    LossResult loss;
    Gradients grads;
};

/// Loss plus a full backward pass; fills cache.deltas.
TrainStepResult backward(const Model& model, ActivationCache& cache, std::span<const int> labels);

}  // namespace sparsegrow
