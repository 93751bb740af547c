#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/nn/im2col.hpp"
#include "sparsegrow/sparse/connection_set.hpp"

namespace sparsegrow {

enum class LayerKind { feedforward, conv2d, relu, avg_pool, flatten };

struct PoolGeometry {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t window = 2;

    std::size_t out_height() const noexcept { return height / window; }
    std::size_t out_width() const noexcept { return width / window; }
    std::size_t input_units() const noexcept { return channels * height * width; }
    std::size_t output_units() const noexcept { return channels * out_height() * out_width(); }
};

/// One layer. For parametric layers n_in x n_out are the dimensions of the
/// sparse weight matrix; a conv layer is viewed as a feedforward layer over
/// patches, so n_in = in_channels * k * k and n_out = out_channels. For the
/// other kinds n_in and n_out are unit counts.
struct LayerSpec {
    LayerKind kind = LayerKind::feedforward;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    ConvGeometry conv{};
    PoolGeometry pool{};
    bool has_bias = true;

    bool parametric() const noexcept {
        return kind == LayerKind::feedforward || kind == LayerKind::conv2d;
    }
    std::size_t input_units() const noexcept;
    std::size_t output_units() const noexcept;
    /// Columns of the layer's effective batch per sample (conv: positions).
    std::size_t positions() const noexcept {
        return kind == LayerKind::conv2d ? conv.positions() : 1;
    }

    static LayerSpec feedforward(std::size_t n_in, std::size_t n_out, bool bias = true);
    static LayerSpec conv2d(const ConvGeometry& g, bool bias = true);
    static LayerSpec relu(std::size_t units);
    static LayerSpec avg_pool(const PoolGeometry& g);
    static LayerSpec flatten(std::size_t units);
};

/// Ordered layers followed by a softmax cross-entropy loss.
struct ModelSpec {
    std::vector<LayerSpec> layers;
    real label_smoothing = 0;

    /// Throws ShapeMismatch when adjacent layers do not compose.
    void validate() const;
    std::size_t input_units() const;
    std::size_t output_units() const;
    std::vector<std::size_t> parametric_layers() const;
    /// Sum of n_in * n_out over parametric layers (the dense weight budget;
    /// biases excluded).
    std::uint64_t dense_weight_count() const;

    /// ReLU MLP: widths = {input, hidden..., classes}.
    static ModelSpec mlp(const std::vector<std::size_t>& widths, real label_smoothing = 0);
    /// Two conv blocks (3x3 conv, ReLU, 2x2 average pool) and a linear head.
    static ModelSpec small_cnn(std::size_t channels, std::size_t height, std::size_t width,
                               std::size_t classes, std::size_t c1 = 32, std::size_t c2 = 64,
                               real label_smoothing = 0);
};

/// Sparse weights plus dense bias of one parametric layer.
struct LayerParams {
    ConnectionSet weights;
    std::vector<real> bias;
    std::vector<real> bias_momentum;
};

struct Model {
    ModelSpec spec;
    /// One entry per parametric layer, in layer order.
    std::vector<LayerParams> params;

    std::size_t active_connections() const;
    /// Fraction of inactive weights over all parametric layers.
    double sparsity() const;
};

/// Wrap a topology (one ConnectionSet per parametric layer) into a model with
/// zero biases. Shapes are checked against the spec.
Model make_model(ModelSpec spec, std::vector<ConnectionSet> topology);

/// Draw each active weight from N(0, 2 / fan_in_active(b)) where b is its
/// output unit. Momentum is reset; biases are untouched.
void init_weights(ConnectionSet& conn, Rng& rng);
void init_weights(Model& model, Rng& rng);

/// Per-layer activations and gradients of one batch.
struct ActivationCache {
    std::size_t batch = 0;
    Matrix input;
    /// outputs[l] is the output of layer l, (units x B).
    std::vector<Matrix> outputs;
    /// Per parametric layer: the matrix the weights multiply, n_in x B_eff
    /// (the patch matrix for conv layers, B_eff = B * positions).
    std::vector<Matrix> layer_inputs;
    /// Per parametric layer: loss gradient at the layer's pre-activation
    /// outputs, n_out x B_eff. Filled by backward().
    std::vector<Matrix> deltas;

    const Matrix& logits() const { return outputs.back(); }
    bool has_deltas() const noexcept { return !deltas.empty(); }
};

struct Gradients {
    /// Per parametric layer, aligned with weights.connections().
    std::vector<std::vector<real>> weights;
    std::vector<std::vector<real>> bias;
};

/// Forward pass. batch is input_units x B.
ActivationCache forward(const Model& model, const Matrix& batch, unsigned threads = 1);

/// Backward pass from the gradient of the loss w.r.t. the logits. Computes
/// gradients for active connections only and stores per-layer deltas.
Gradients backward(const Model& model, ActivationCache& cache, const Matrix& logits_grad);

}  // namespace sparsegrow
