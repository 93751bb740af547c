#include "sparsegrow/nn/model.hpp"

#include <cmath>
#include <string>

#include "sparsegrow/sparse/kernels.hpp"

namespace sparsegrow {

std::size_t LayerSpec::input_units() const noexcept {
    switch (kind) {
        case LayerKind::conv2d: return conv.input_units();
        case LayerKind::avg_pool: return pool.input_units();
        default: return n_in;
    }
}

std::size_t LayerSpec::output_units() const noexcept {
    switch (kind) {
        case LayerKind::conv2d: return conv.output_units();
        case LayerKind::avg_pool: return pool.output_units();
        default: return n_out;
    }
}

LayerSpec LayerSpec::feedforward(std::size_t n_in, std::size_t n_out, bool bias) {
    LayerSpec s;
    s.kind = LayerKind::feedforward;
    s.n_in = n_in;
    s.n_out = n_out;
    s.has_bias = bias;
    return s;
}

LayerSpec LayerSpec::conv2d(const ConvGeometry& g, bool bias) {
    g.validate();
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.conv = g;
    s.n_in = g.patch_size();
    s.n_out = g.out_channels;
    s.has_bias = bias;
    return s;
}

LayerSpec LayerSpec::relu(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::relu;
    s.n_in = s.n_out = units;
    s.has_bias = false;
    return s;
}

LayerSpec LayerSpec::avg_pool(const PoolGeometry& g) {
    if (g.window == 0 || g.height % g.window != 0 || g.width % g.window != 0)
        throw ShapeMismatch("avg_pool: window must divide the input size");
    LayerSpec s;
    s.kind = LayerKind::avg_pool;
    s.pool = g;
    s.n_in = g.input_units();
    s.n_out = g.output_units();
    s.has_bias = false;
    return s;
}

LayerSpec LayerSpec::flatten(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    s.n_in = s.n_out = units;
    s.has_bias = false;
    return s;
}

void ModelSpec::validate() const {
    if (layers.empty()) throw ShapeMismatch("model has no layers");
    if (!(label_smoothing >= 0 && label_smoothing < 1))
        throw ShapeMismatch("label smoothing must lie in [0, 1)");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = layers[l];
        if (s.parametric() && (s.n_in == 0 || s.n_out == 0))
            throw ShapeMismatch("layer " + std::to_string(l) + ": zero-sized weight matrix");
        if (s.kind == LayerKind::conv2d) s.conv.validate();
        if (l > 0 && layers[l - 1].output_units() != s.input_units())
            throw ShapeMismatch("layer " + std::to_string(l) + " expects " +
                                std::to_string(s.input_units()) + " inputs but layer " +
                                std::to_string(l - 1) + " produces " +
                                std::to_string(layers[l - 1].output_units()));
    }
    if (parametric_layers().empty()) throw ShapeMismatch("model has no parametric layer");
}

std::size_t ModelSpec::input_units() const { return layers.front().input_units(); }
std::size_t ModelSpec::output_units() const { return layers.back().output_units(); }

std::vector<std::size_t> ModelSpec::parametric_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < layers.size(); ++l)
        if (layers[l].parametric()) out.push_back(l);
    return out;
}

std::uint64_t ModelSpec::dense_weight_count() const {
    std::uint64_t n = 0;
    for (const auto& s : layers)
        if (s.parametric()) n += std::uint64_t(s.n_in) * s.n_out;
    return n;
}

ModelSpec ModelSpec::mlp(const std::vector<std::size_t>& widths, real label_smoothing) {
    if (widths.size() < 2) throw ShapeMismatch("mlp needs at least input and output widths");
    ModelSpec m;
    m.label_smoothing = label_smoothing;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        m.layers.push_back(LayerSpec::feedforward(widths[i], widths[i + 1]));
        if (i + 2 < widths.size()) m.layers.push_back(LayerSpec::relu(widths[i + 1]));
    }
    m.validate();
    return m;
}

ModelSpec ModelSpec::small_cnn(std::size_t channels, std::size_t height, std::size_t width,
                               std::size_t classes, std::size_t c1, std::size_t c2,
                               real label_smoothing) {
    ModelSpec m;
    m.label_smoothing = label_smoothing;
    ConvGeometry g1{channels, height, width, c1, 3, 1, 1};
    m.layers.push_back(LayerSpec::conv2d(g1));
    m.layers.push_back(LayerSpec::relu(g1.output_units()));
    PoolGeometry p1{c1, g1.out_height(), g1.out_width(), 2};
    m.layers.push_back(LayerSpec::avg_pool(p1));
    ConvGeometry g2{c1, p1.out_height(), p1.out_width(), c2, 3, 1, 1};
    m.layers.push_back(LayerSpec::conv2d(g2));
    m.layers.push_back(LayerSpec::relu(g2.output_units()));
    PoolGeometry p2{c2, g2.out_height(), g2.out_width(), 2};
    m.layers.push_back(LayerSpec::avg_pool(p2));
    m.layers.push_back(LayerSpec::flatten(p2.output_units()));
    m.layers.push_back(LayerSpec::feedforward(p2.output_units(), classes));
    m.validate();
    return m;
}

std::size_t Model::active_connections() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.weights.size();
    return n;
}

double Model::sparsity() const {
    return 1.0 - double(active_connections()) / double(spec.dense_weight_count());
}

Model make_model(ModelSpec spec, std::vector<ConnectionSet> topology) {
    spec.validate();
    const auto param_layers = spec.parametric_layers();
    if (topology.size() != param_layers.size())
        throw ShapeMismatch("make_model: expected " + std::to_string(param_layers.size()) +
                            " connection sets, got " + std::to_string(topology.size()));
    Model m;
    m.spec = std::move(spec);
    for (std::size_t p = 0; p < param_layers.size(); ++p) {
        const auto& s = m.spec.layers[param_layers[p]];
        auto& conn = topology[p];
        if (conn.n_in() != s.n_in || conn.n_out() != s.n_out)
            throw ShapeMismatch("make_model: connection set " + std::to_string(p) +
                                " has the wrong dimensions");
        const std::size_t nb = s.has_bias ? s.n_out : 0;
        m.params.push_back({std::move(conn), std::vector<real>(nb, real(0)),
                            std::vector<real>(nb, real(0))});
    }
    return m;
}

void init_weights(ConnectionSet& conn, Rng& rng) {
    const auto fan_in = conn.fan_in();
    const auto conns = conn.connections();
    auto w = conn.weights();
    auto m = conn.momentum();
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const double n = double(std::max<std::size_t>(1, fan_in[conns[i].out_unit]));
        w[i] = static_cast<real>(rng.normal(0.0, std::sqrt(2.0 / n)));
        m[i] = real(0);
    }
}

void init_weights(Model& model, Rng& rng) {
    for (auto& p : model.params) init_weights(p.weights, rng);
}

namespace {

void add_bias(Matrix& z, const std::vector<real>& bias) {
    if (bias.empty()) return;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        const real b = bias[r];
        for (auto& v : z.row(r)) v += b;
    }
}

std::vector<real> row_sums(const Matrix& m) {
    std::vector<real> out(m.rows(), real(0));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (real v : m.row(r)) out[r] += v;
    return out;
}

Matrix avg_pool_forward(const Matrix& in, const PoolGeometry& g) {
    const std::size_t batch = in.cols();
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const real scale = real(1) / real(g.window * g.window);
    Matrix out(g.output_units(), batch);
    for (std::size_t c = 0; c < g.channels; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                real* dst = out.row((c * oh + oy) * ow + ox).data();
                for (std::size_t dy = 0; dy < g.window; ++dy)
                    for (std::size_t dx = 0; dx < g.window; ++dx) {
                        const std::size_t y = oy * g.window + dy;
                        const std::size_t x = ox * g.window + dx;
                        const real* src = in.row((c * g.height + y) * g.width + x).data();
                        for (std::size_t i = 0; i < batch; ++i) dst[i] += src[i] * scale;
                    }
            }
    return out;
}

Matrix avg_pool_backward(const Matrix& grad_out, const PoolGeometry& g) {
    const std::size_t batch = grad_out.cols();
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const real scale = real(1) / real(g.window * g.window);
    Matrix out(g.input_units(), batch);
    for (std::size_t c = 0; c < g.channels; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const real* src = grad_out.row((c * oh + oy) * ow + ox).data();
                for (std::size_t dy = 0; dy < g.window; ++dy)
                    for (std::size_t dx = 0; dx < g.window; ++dx) {
                        const std::size_t y = oy * g.window + dy;
                        const std::size_t x = ox * g.window + dx;
                        real* dst = out.row((c * g.height + y) * g.width + x).data();
                        for (std::size_t i = 0; i < batch; ++i) dst[i] += src[i] * scale;
                    }
            }
    return out;
}

}  // namespace

ActivationCache forward(const Model& model, const Matrix& batch, unsigned threads) {
    const auto& layers = model.spec.layers;
    if (batch.rows() != model.spec.input_units())
        throw ShapeMismatch("forward: batch has " + std::to_string(batch.rows()) +
                            " rows, model expects " + std::to_string(model.spec.input_units()));
    ActivationCache cache;
    cache.batch = batch.cols();
    cache.input = batch;
    cache.outputs.reserve(layers.size());
    std::size_t p = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = layers[l];
        const Matrix& h = l == 0 ? cache.input : cache.outputs[l - 1];
        switch (s.kind) {
            case LayerKind::feedforward: {
                const auto& lp = model.params[p++];
                cache.layer_inputs.push_back(h);
                Matrix z = spmm(lp.weights, h, threads);
                add_bias(z, lp.bias);
                cache.outputs.push_back(std::move(z));
                break;
            }
            case LayerKind::conv2d: {
                const auto& lp = model.params[p++];
                cache.layer_inputs.push_back(im2col(h, s.conv));
                Matrix z = spmm(lp.weights, cache.layer_inputs.back(), threads);
                add_bias(z, lp.bias);
                cache.outputs.push_back(fold_positions(z, s.conv.positions()));
                break;
            }
            case LayerKind::relu: {
                Matrix out = h;
                for (auto& v : out.values()) v = v > real(0) ? v : real(0);
                cache.outputs.push_back(std::move(out));
                break;
            }
            case LayerKind::avg_pool: cache.outputs.push_back(avg_pool_forward(h, s.pool)); break;
            case LayerKind::flatten: cache.outputs.push_back(h); break;
        }
    }
    return cache;
}

Gradients backward(const Model& model, ActivationCache& cache, const Matrix& logits_grad) {
    const auto& layers = model.spec.layers;
    if (cache.outputs.size() != layers.size())
        throw ShapeMismatch("backward: activation cache is missing or belongs to another model");
    if (logits_grad.rows() != cache.logits().rows() || logits_grad.cols() != cache.batch)
        throw ShapeMismatch("backward: logits gradient shape mismatch");

    const std::size_t n_params = model.params.size();
    Gradients grads;
    grads.weights.resize(n_params);
    grads.bias.resize(n_params);
    cache.deltas.assign(n_params, Matrix());

    Matrix g = logits_grad;
    std::size_t p = n_params;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& s = layers[l];
        const bool need_input_grad = l > 0;
        switch (s.kind) {
            case LayerKind::feedforward: {
                const auto& lp = model.params[--p];
                grads.weights[p] =
                    gather_connection_grads(lp.weights.connections(), cache.layer_inputs[p], g);
                if (s.has_bias) grads.bias[p] = row_sums(g);
                Matrix next = need_input_grad ? spmm_transposed(lp.weights, g) : Matrix();
                cache.deltas[p] = std::move(g);
                g = std::move(next);
                break;
            }
            case LayerKind::conv2d: {
                const auto& lp = model.params[--p];
                Matrix delta = unfold_positions(g, s.conv.out_channels, s.conv.positions());
                grads.weights[p] =
                    gather_connection_grads(lp.weights.connections(), cache.layer_inputs[p], delta);
                if (s.has_bias) grads.bias[p] = row_sums(delta);
                g = need_input_grad
                        ? col2im(spmm_transposed(lp.weights, delta), s.conv, cache.batch)
                        : Matrix();
                cache.deltas[p] = std::move(delta);
                break;
            }
            case LayerKind::relu: {
                const auto& out = cache.outputs[l];
                auto gv = g.values();
                const auto ov = out.values();
                for (std::size_t i = 0; i < gv.size(); ++i)
                    if (!(ov[i] > real(0))) gv[i] = real(0);
                break;
            }
            case LayerKind::avg_pool: g = avg_pool_backward(g, s.pool); break;
            case LayerKind::flatten: break;
        }
    }
    return grads;
}

}  // namespace sparsegrow
