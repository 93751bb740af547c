#pragma once

#include <algorithm>
#include <span>
#include <thread>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/sparse/connection_set.hpp"
#include "sparsegrow/sparse/formats.hpp"

namespace sparsegrow {

// ---------------------------------------------------------------------------
// Layer kernels over a ConnectionSet (rows of the CSR view are output units).
// ---------------------------------------------------------------------------

/// out[b, j] = sum over active (a, b) of w(a, b) * dense[a, j].
/// dense is n_in x B, the result is n_out x B. `threads` > 1 splits output rows
/// across threads; each row is still summed in the same order, so results are
/// bitwise identical for any thread count.
Matrix spmm(const ConnectionSet& weights, const Matrix& dense, unsigned threads = 1);

/// In-place variant: out += W * dense.
void spmm_accumulate(const ConnectionSet& weights, const Matrix& dense, Matrix& out,
                     unsigned threads = 1);

/// out[a, j] = sum over active (a, b) of w(a, b) * dense[b, j].
/// dense is n_out x B, the result is n_in x B. Always serial.
Matrix spmm_transposed(const ConnectionSet& weights, const Matrix& dense);

/// grad(a, b) = sum_i h_prev(a, i) * delta(b, i) for each requested pair,
/// summed in order i = 0..B-1. Cost O(|pairs| * B).
std::vector<real> gather_connection_grads(std::span<const ConnectionIndex> pairs,
                                          const Matrix& h_prev, const Matrix& delta);

/// Full n_out x n_in weight gradient delta * h_prev^T. Quadratic memory; only
/// the dense-gradient baseline may call this. Entry (b, a) is summed in the
/// same order as gather_connection_grads, so the two agree bitwise.
Matrix dense_weight_gradient(const Matrix& h_prev, const Matrix& delta);

// ---------------------------------------------------------------------------
// Format kernels used by the benchmark: out (rows x B) = M (rows x cols) * X
// (cols x B), all row-major.
// ---------------------------------------------------------------------------

/// Cache-blocked dense kernel. Blocks over the shared dimension so a panel of
/// X stays resident while every row of M streams past it.
template <class T>
void dense_matmul(std::span<const T> m, std::size_t rows, std::size_t cols, std::span<const T> x,
                  std::size_t batch, std::span<T> out) {
    constexpr std::size_t kBlock = 256;
    std::fill(out.begin(), out.end(), T(0));
    for (std::size_t k0 = 0; k0 < cols; k0 += kBlock) {
        const std::size_t k1 = std::min(cols, k0 + kBlock);
        for (std::size_t i = 0; i < rows; ++i) {
            T* o = out.data() + i * batch;
            const T* mrow = m.data() + i * cols;
            for (std::size_t k = k0; k < k1; ++k) {
                const T a = mrow[k];
                const T* xr = x.data() + k * batch;
                for (std::size_t j = 0; j < batch; ++j) o[j] += a * xr[j];
            }
        }
    }
}

template <class T>
void coo_matmul(const CooMatrix<T>& m, std::span<const T> x, std::size_t batch, std::span<T> out) {
    std::fill(out.begin(), out.end(), T(0));
    for (std::size_t e = 0; e < m.nnz(); ++e) {
        T* o = out.data() + std::size_t(m.row_indices[e]) * batch;
        const T* xr = x.data() + std::size_t(m.col_indices[e]) * batch;
        const T a = m.values[e];
        for (std::size_t j = 0; j < batch; ++j) o[j] += a * xr[j];
    }
}

template <class T>
void csr_matmul(const CsrMatrix<T>& m, std::span<const T> x, std::size_t batch, std::span<T> out,
                unsigned threads = 1) {
    auto rows = [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            T* o = out.data() + r * batch;
            std::fill(o, o + batch, T(0));
            for (auto i = m.row_offsets[r]; i < m.row_offsets[r + 1]; ++i) {
                const T a = m.values[i];
                const T* xr = x.data() + std::size_t(m.col_indices[i]) * batch;
                for (std::size_t j = 0; j < batch; ++j) o[j] += a * xr[j];
            }
        }
    };
    if (threads <= 1 || m.n_rows < 2 * threads) {
        rows(0, m.n_rows);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (m.n_rows + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t r0 = t * chunk;
        const std::size_t r1 = std::min(m.n_rows, r0 + chunk);
        if (r0 < r1) pool.emplace_back(rows, r0, r1);
    }
}

}  // namespace sparsegrow
