#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/dst/schedule.hpp"
#include "sparsegrow/nn/model.hpp"
#include "sparsegrow/sparse/connection_set.hpp"

namespace sparsegrow {

/// Sampling distributions over the input units (f) and output units (g) of
/// one layer. A candidate connection (a, b) is drawn with probability f(a) g(b).
struct UnitDistributions {
    std::vector<double> f;
    std::vector<double> g;
    // Set when the strategy's weights were all zero and uniform was used.
    bool f_fallback = false;
    bool g_fallback = false;
};

/// Random +-1 signs, one per batch column.
struct SignVector {
    std::vector<real> s;

    std::size_t size() const noexcept { return s.size(); }
    static SignVector sample(std::size_t n, Rng& rng);
};

/// The two matrices whose product is a layer's weight gradient:
/// input is h (n_in x B), delta is the loss gradient at the outputs (n_out x B).
struct LayerActivity {
    const Matrix& input;
    const Matrix& delta;
};

/// uniform: f = 1/n_in, g = 1/n_out.
/// gse_grabo: f ~ |h| 1, g ~ |delta| 1 (row L1 norms).
/// gse_graest: f ~ |h s|, g ~ |delta s|; signs must cover at least B columns
/// (only the first B are used).
/// Other strategies throw std::invalid_argument.
UnitDistributions build_distribution(GrowthStrategy strategy, std::size_t n_in, std::size_t n_out,
                                     const LayerActivity* activity = nullptr,
                                     const SignVector* signs = nullptr);

/// Same, reading parametric layer p of a populated cache.
UnitDistributions build_distribution(GrowthStrategy strategy, const ActivationCache& cache,
                                     std::size_t p, const SignVector* signs = nullptr);

/// Draw `count` pairs a ~ f, b ~ g from two alias tables and keep the distinct
/// ones that are not active.
std::vector<ConnectionIndex> sample_candidates(const UnitDistributions& dist,
                                               const ConnectionSet& active, std::size_t count,
                                               Rng& rng);

}  // namespace sparsegrow
