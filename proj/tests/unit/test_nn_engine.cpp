#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sparsegrow/nn/im2col.hpp"
#include "sparsegrow/nn/loss.hpp"
#include "sparsegrow/nn/model.hpp"
#include "sparsegrow/nn/optimizer.hpp"
#include "sparsegrow/sparse/kernels.hpp"

using namespace sparsegrow;

using oracle::loss_of;
using oracle::max_fd_error;
using oracle::random_labels;
using oracle::random_model;

TEST_CASE("init_weights: std is sqrt(2 / active fan-in)") {
    ConnectionSet two(4, 1, {{0, 0}, {3, 0}});
    Rng rng(1);
    // Per-unit variance: two inputs -> std 1. Check statistically over draws.
    double s2 = 0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        init_weights(two, rng);
        for (real w : two.weights()) s2 += w * w;
    }
    CHECK(std::abs(s2 / (2.0 * reps) - 1.0) < 0.03);

    // 10^4 connections spread over 50 output units.
    Rng r2(2);
    auto layer = oracle::random_layer(400, 50, 0.5, r2);
    init_weights(layer, r2);
    const auto fan = layer.fan_in();
    std::vector<double> ss(50, 0.0);
    for (std::size_t i = 0; i < layer.size(); ++i) ss[layer.connections()[i].out_unit] += layer.weights()[i] * layer.weights()[i];
    // Per unit the variance ratio has standard error sqrt(2 / fan); allow 5 of them.
    for (std::size_t b = 0; b < 50; ++b)
        CHECK(std::abs(ss[b] / 2.0 - 1.0) < 5 * std::sqrt(2.0 / double(fan[b])));
    double pooled = 0;
    for (std::size_t b = 0; b < 50; ++b) pooled += ss[b] / (2.0 / double(fan[b]));
    CHECK(std::abs(pooled / double(layer.size()) - 1.0) < 0.1);

    // An output unit without connections has no weights to draw.
    ConnectionSet lonely(3, 2, {{0, 0}});
    init_weights(lonely, rng);
    CHECK(lonely.size() == 1);
}

TEST_CASE("forward with zero weights and bias gives zero logits") {
    const auto spec = ModelSpec::mlp({6, 5, 3});
    Rng rng(3);
    auto m = random_model(spec, 0.5, rng);
    for (auto& lp : m.params) {
        for (auto& w : lp.weights.weights()) w = 0;
        for (auto& b : lp.bias) b = 0;
    }
    const auto cache = forward(m, oracle::random_matrix(6, 4, rng));
    for (real v : cache.logits().values()) CHECK(v == 0.0);
}

TEST_CASE("single feedforward layer is spmm plus bias") {
    Rng rng(4);
    const auto spec = ModelSpec::mlp({10, 7});
    auto m = random_model(spec, 0.4, rng);
    const auto x = oracle::random_matrix(10, 3, rng);
    const auto cache = forward(m, x);
    const auto dense = oracle::densify(m.params[0].weights);
    for (std::size_t b = 0; b < 7; ++b)
        for (std::size_t j = 0; j < 3; ++j) {
            double want = m.params[0].bias[b];
            for (std::size_t a = 0; a < 10; ++a) want += dense[b][a] * x(a, j);
            CHECK(oracle::rel_err(cache.logits()(b, j), want) < 1e-12);
        }
    CHECK_THROWS_AS(forward(m, Matrix(9, 3)), ShapeMismatch);
}

TEST_CASE("im2col with a 1x1 kernel is a reshape") {
    ConvGeometry g{3, 4, 4, 2, 1, 1, 0};
    Rng rng(5);
    const auto x = oracle::random_matrix(g.input_units(), 2, rng);
    const auto cols = im2col(x, g);
    REQUIRE(cols.rows() == 3);
    REQUIRE(cols.cols() == 2 * 16);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t p = 0; p < 16; ++p) CHECK(cols(c, i * 16 + p) == x(c * 16 + p, i));
}

TEST_CASE("im2col 3x3 on 4x4 matches direct indexing") {
    ConvGeometry g{2, 4, 4, 1, 3, 1, 0};
    Rng rng(6);
    const auto x = oracle::random_matrix(g.input_units(), 3, rng);
    const auto cols = im2col(x, g);
    REQUIRE(g.positions() == 4);
    REQUIRE(cols.rows() == 18);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx)
                for (std::size_t i = 0; i < 3; ++i)
                    for (std::size_t oy = 0; oy < 2; ++oy)
                        for (std::size_t ox = 0; ox < 2; ++ox)
                            CHECK(cols((c * 3 + ky) * 3 + kx, i * 4 + oy * 2 + ox) ==
                                  x(c * 16 + (oy + ky) * 4 + (ox + kx), i));
}

TEST_CASE("col2im is the adjoint of im2col") {
    ConvGeometry g{2, 5, 5, 1, 3, 2, 1};
    g.validate();
    Rng rng(7);
    const auto x = oracle::random_matrix(g.input_units(), 2, rng);
    const auto y = oracle::random_matrix(g.patch_size(), 2 * g.positions(), rng);
    const auto ax = im2col(x, g);
    const auto aty = col2im(y, g, 2);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) lhs += ax.values()[i] * y.values()[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.values()[i] * aty.values()[i];
    CHECK(oracle::rel_err(lhs, rhs) < 1e-12);
    CHECK(unfold_positions(fold_positions(y, g.positions()), y.rows(), g.positions()) == y);
}

TEST_CASE("conv forward and backward match a direct nested-loop convolution") {
    ConvGeometry g{2, 6, 6, 3, 3, 1, 1};
    ModelSpec spec;
    spec.layers = {LayerSpec::conv2d(g)};
    Rng rng(8);
    auto m = random_model(spec, 0.6, rng);
    const std::size_t B = 2;
    const auto x = oracle::random_matrix(g.input_units(), B, rng);
    auto cache = forward(m, x);
    const auto W = oracle::densify(m.params[0].weights);  // out x (c*9 + ky*3 + kx)
    const std::size_t H = 6, OH = g.out_height(), OW = g.out_width();
    auto in_at = [&](std::size_t c, long y, long xx, std::size_t i) -> double {
        if (y < 0 || xx < 0 || y >= long(H) || xx >= long(H)) return 0.0;
        return x(c * 36 + std::size_t(y) * 6 + std::size_t(xx), i);
    };
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox)
                for (std::size_t i = 0; i < B; ++i) {
                    double want = m.params[0].bias[o];
                    for (std::size_t c = 0; c < 2; ++c)
                        for (std::size_t ky = 0; ky < 3; ++ky)
                            for (std::size_t kx = 0; kx < 3; ++kx)
                                want += W[o][(c * 3 + ky) * 3 + kx] *
                                        in_at(c, long(oy + ky) - 1, long(ox + kx) - 1, i);
                    CHECK(oracle::rel_err(cache.logits()(o * OH * OW + oy * OW + ox, i), want) < 1e-6);
                }

    // Backward: with upstream gradient G, dW[o][c,ky,kx] = sum G * input.
    const auto G = oracle::random_matrix(3 * OH * OW, B, rng);
    const auto grads = backward(m, cache, G);
    const auto& conn = m.params[0].weights;
    for (std::size_t e = 0; e < conn.size(); ++e) {
        const auto o = conn.connections()[e].out_unit;
        const auto tap = conn.connections()[e].in_unit;
        const std::size_t c = tap / 9, ky = (tap / 3) % 3, kx = tap % 3;
        double want = 0;
        for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox)
                for (std::size_t i = 0; i < B; ++i)
                    want += G(o * OH * OW + oy * OW + ox, i) * in_at(c, long(oy + ky) - 1, long(ox + kx) - 1, i);
        CHECK(oracle::rel_err(grads.weights[0][e], want) < 1e-6);
    }
    for (std::size_t o = 0; o < 3; ++o) {
        double want = 0;
        for (std::size_t q = 0; q < OH * OW; ++q)
            for (std::size_t i = 0; i < B; ++i) want += G(o * OH * OW + q, i);
        CHECK(oracle::rel_err(grads.bias[0][o], want) < 1e-6);
    }
}

TEST_CASE("cross entropy reference values") {
    const std::size_t C = 5;
    Matrix uniform(C, 3, 0.7);
    const std::vector<int> y{0, 2, 4};
    CHECK(cross_entropy(uniform, y, 0).loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    Matrix confident(C, 1, 0.0);
    confident(3, 0) = 200;
    const std::vector<int> y3{3};
    const auto r = cross_entropy(confident, y3, 0);
    CHECK(r.loss < 1e-12);
    CHECK(r.correct == 1);

    // Label-smoothed optimum: logits whose softmax equals the smoothed target
    // give a zero gradient.
    const real s = 0.1;
    Matrix opt(C, 1);
    for (std::size_t c = 0; c < C; ++c) opt(c, 0) = std::log(c == 3 ? 1 - s + s / C : s / C);
    const auto at_opt = cross_entropy(opt, y3, s);
    for (real g : at_opt.grad.values()) CHECK(std::abs(g) < 1e-12);

    Rng rng(9);
    const auto logits = oracle::random_matrix(C, 6, rng, 3.0);
    const auto labels = random_labels(6, C, rng);
    const auto got = cross_entropy(logits, labels, s);
    long double want = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        long double mx = -1e300L, z = 0;
        for (std::size_t c = 0; c < C; ++c) mx = std::max<long double>(mx, logits(c, i));
        for (std::size_t c = 0; c < C; ++c) z += std::exp((long double)logits(c, i) - mx);
        for (std::size_t c = 0; c < C; ++c) {
            const long double q = (c == std::size_t(labels[i]) ? 1 - s : 0) + (long double)s / C;
            want -= q * (((long double)logits(c, i) - mx) - std::log(z));
        }
    }
    want /= 6;
    CHECK(std::abs(got.loss - double(want)) < 1e-10);
    for (std::size_t i = 0; i < 6; ++i) {
        double col = 0;
        for (std::size_t c = 0; c < C; ++c) col += got.grad(c, i);
        CHECK(std::abs(col) < 1e-15);
    }
}

TEST_CASE("finite-difference gradient check, MLP") {
    Rng rng(10);
    for (int rep = 0; rep < 3; ++rep) {
        auto spec = ModelSpec::mlp({6, 8, 4}, rep == 2 ? real(0.1) : real(0));
        auto m = random_model(spec, 0.6, rng);
        const auto x = oracle::random_matrix(6, 5, rng);
        const auto y = random_labels(5, 4, rng);
        CHECK(max_fd_error(m, x, y) < 1e-4);
    }
    auto tiny = random_model(ModelSpec::mlp({2, 2, 2}), 1.0, rng);
    CHECK(max_fd_error(tiny, oracle::random_matrix(2, 3, rng), random_labels(3, 2, rng)) < 1e-4);
}

TEST_CASE("finite-difference gradient check, CNN") {
    Rng rng(11);
    auto spec = ModelSpec::small_cnn(2, 8, 8, 3, 3, 4);
    auto m = random_model(spec, 0.7, rng);
    const auto x = oracle::random_matrix(spec.input_units(), 2, rng);
    const auto y = random_labels(2, 3, rng);
    CHECK(max_fd_error(m, x, y) < 1e-4);
}

TEST_CASE("backward never materializes an n_in x n_out matrix") {
    Rng rng(12);
    auto spec = ModelSpec::mlp({2000, 1500, 10});
    auto m = random_model(spec, 0.0005, rng);
    const auto x = oracle::random_matrix(2000, 4, rng);
    matrix_stats::reset();
    auto cache = forward(m, x);
    backward(m, cache, random_labels(4, 10, rng));
    CHECK(matrix_stats::peak_elements() <= 2000 * 4);
    CHECK(cache.deltas.size() == 2);
    CHECK(cache.deltas[0].rows() == 1500);
}

TEST_CASE("sgd_update special cases and momentum trace") {
    std::vector<real> th{1.0, -2.0}, v{0, 0};
    const std::vector<real> g{0.5, 0.25};
    sgd_update(th, v, g, 0.1, 0.0, 0.0);
    CHECK(th[0] == doctest::Approx(0.95));
    CHECK(th[1] == doctest::Approx(-2.025));

    std::vector<real> th2{3.0}, v2{0};
    const std::vector<real> zero{0};
    sgd_update(th2, v2, zero, 0.1, 0.9, 0.0);
    CHECK(th2[0] == 3.0);

    // Three steps, hand-unrolled.
    const double lr = 0.1, mu = 0.9, l2 = 1e-4;
    std::vector<real> t{0.5}, vel{0};
    const double gs[3] = {0.2, -0.1, 0.3};
    double tt = 0.5, vv = 0;
    for (double gi : gs) {
        const std::vector<real> gv{gi};
        sgd_update(t, vel, gv, lr, mu, l2);
        vv = mu * vv + (gi + l2 * tt);
        tt = tt - lr * vv;
    }
    CHECK(t[0] == tt);
    CHECK(vel[0] == vv);
    CHECK_THROWS_AS(sgd_update(t, vel, std::vector<real>{1, 2}, lr, mu, l2), ShapeMismatch);
}

TEST_CASE("learning rate schedule and optimizer validation") {
    LearningRateSchedule s{0.1, 10.0, {80, 120}};
    CHECK(s.at(0) == 0.1);
    CHECK(s.at(79.9) == 0.1);
    CHECK(s.at(80) == doctest::Approx(0.01));
    CHECK(s.at(150) == doctest::Approx(0.001));
    OptimizerState o;
    CHECK(o.momentum == 0.9);
    CHECK(o.weight_decay == 1e-4);
    o.momentum = 1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("sparse training equals dense training under a frozen mask") {
    Rng rng(13);
    auto m = random_model(ModelSpec::mlp({12, 10, 5}), 0.3, rng);
    std::vector<ConnectionSet> layers;
    std::vector<std::vector<real>> biases;
    for (const auto& lp : m.params) {
        layers.push_back(lp.weights);
        biases.push_back(lp.bias);
    }
    auto dense = oracle::dense_copy(layers, biases);
    OptimizerState opt;
    for (int step = 0; step < 10; ++step) {
        const auto x = oracle::random_matrix(12, 4, rng);
        const auto y = random_labels(4, 5, rng);
        auto cache = forward(m, x);
        const auto r = backward(m, cache, y);
        sgd_step(m, r.grads, opt, 0);
        oracle::dense_mlp_sgd_step(dense, x, y, 0.1, 0.9, 1e-4);
    }
    for (std::size_t p = 0; p < m.params.size(); ++p) {
        const auto got = oracle::densify(m.params[p].weights);
        for (std::size_t b = 0; b < got.size(); ++b) {
            for (std::size_t a = 0; a < got[b].size(); ++a) {
                CHECK(oracle::rel_err(got[b][a], dense[p].w[b][a]) < 1e-5);
                if (dense[p].mask[b][a] == 0) CHECK(dense[p].w[b][a] == 0.0);
            }
            CHECK(oracle::rel_err(m.params[p].bias[b], dense[p].bias[b]) < 1e-5);
        }
    }
}
