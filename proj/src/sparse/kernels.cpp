#include "sparsegrow/sparse/kernels.hpp"

#include <string>

namespace sparsegrow {

namespace {

void spmm_rows(const ConnectionSet& w, const Matrix& dense, Matrix& out, std::size_t r0,
               std::size_t r1) {
    const auto conns = w.connections();
    const auto vals = w.weights();
    const auto offsets = w.row_offsets();
    const std::size_t batch = dense.cols();
    for (std::size_t b = r0; b < r1; ++b) {
        real* o = out.row(b).data();
        for (auto i = offsets[b]; i < offsets[b + 1]; ++i) {
            const real a = vals[i];
            const real* x = dense.row(conns[i].in_unit).data();
            for (std::size_t j = 0; j < batch; ++j) o[j] += a * x[j];
        }
    }
}

}  // namespace

Matrix spmm(const ConnectionSet& weights, const Matrix& dense, unsigned threads) {
    Matrix out(weights.n_out(), dense.cols());
    spmm_accumulate(weights, dense, out, threads);
    return out;
}

void spmm_accumulate(const ConnectionSet& weights, const Matrix& dense, Matrix& out,
                     unsigned threads) {
    if (dense.rows() != weights.n_in())
        throw ShapeMismatch("spmm: dense input has " + std::to_string(dense.rows()) +
                            " rows, layer expects " + std::to_string(weights.n_in()));
    if (out.rows() != weights.n_out() || out.cols() != dense.cols())
        throw ShapeMismatch("spmm: output shape mismatch");
    const std::size_t n = weights.n_out();
    if (threads <= 1 || n < 2 * std::size_t(threads)) {
        spmm_rows(weights, dense, out, 0, n);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t r0 = t * chunk;
        const std::size_t r1 = std::min(n, r0 + chunk);
        if (r0 < r1)
            pool.emplace_back([&, r0, r1] { spmm_rows(weights, dense, out, r0, r1); });
    }
}

Matrix spmm_transposed(const ConnectionSet& weights, const Matrix& dense) {
    if (dense.rows() != weights.n_out())
        throw ShapeMismatch("spmm_transposed: dense input has " + std::to_string(dense.rows()) +
                            " rows, layer has " + std::to_string(weights.n_out()) + " outputs");
    Matrix out(weights.n_in(), dense.cols());
    const auto conns = weights.connections();
    const auto vals = weights.weights();
    const std::size_t batch = dense.cols();
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const real a = vals[i];
        const real* d = dense.row(conns[i].out_unit).data();
        real* o = out.row(conns[i].in_unit).data();
        for (std::size_t j = 0; j < batch; ++j) o[j] += a * d[j];
    }
    return out;
}

std::vector<real> gather_connection_grads(std::span<const ConnectionIndex> pairs,
                                          const Matrix& h_prev, const Matrix& delta) {
    if (h_prev.cols() != delta.cols())
        throw ShapeMismatch("gather_connection_grads: batch sizes differ");
    const std::size_t batch = h_prev.cols();
    std::vector<real> out(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& c = pairs[p];
        if (c.in_unit >= h_prev.rows() || c.out_unit >= delta.rows())
            throw ShapeMismatch("gather_connection_grads: pair out of bounds");
        const real* h = h_prev.row(c.in_unit).data();
        const real* d = delta.row(c.out_unit).data();
        real acc = 0;
        for (std::size_t i = 0; i < batch; ++i) acc += h[i] * d[i];
        out[p] = acc;
    }
    return out;
}

Matrix dense_weight_gradient(const Matrix& h_prev, const Matrix& delta) {
    if (h_prev.cols() != delta.cols())
        throw ShapeMismatch("dense_weight_gradient: batch sizes differ");
    const std::size_t batch = h_prev.cols();
    Matrix g(delta.rows(), h_prev.rows());
    for (std::size_t b = 0; b < delta.rows(); ++b) {
        const real* d = delta.row(b).data();
        for (std::size_t a = 0; a < h_prev.rows(); ++a) {
            const real* h = h_prev.row(a).data();
            real acc = 0;
            for (std::size_t i = 0; i < batch; ++i) acc += h[i] * d[i];
            g(b, a) = acc;
        }
    }
    return g;
}

}  // namespace sparsegrow
