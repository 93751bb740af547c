#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsegrow {

// Training math is 64-bit unless the float32 build option is enabled.
#ifdef SPARSEGROW_FLOAT32
using real = float;
#else
using real = double;
#endif

// Error hierarchy. Each subsystem throws the most specific type; the CLI maps
// them onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidDistribution : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct InfeasibleSparsity : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct DatasetError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct NumericFailure : Error {
    using Error::Error;
};

/// Row-major dense matrix. Activations use the "units x batch" layout: one
/// row per unit, one column per sample, so a row is contiguous over the batch.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, real fill = real(0));

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    real* data() noexcept { return data_.data(); }
    const real* data() const noexcept { return data_.data(); }
    std::span<real> values() noexcept { return data_; }
    std::span<const real> values() const noexcept { return data_; }

    std::span<real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const real> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    void fill(real v);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<real> data_;
};

// Largest single Matrix allocation (in elements) on this thread since the last
// reset. Used by structural tests asserting no layer ever allocates n_in*n_out.
namespace matrix_stats {
std::size_t peak_elements() noexcept;
void reset() noexcept;
}  // namespace matrix_stats

/// Seeded pseudo-random source. Wraps mt19937_64 and derives uniform, integer
/// and normal variates by hand so sequences are identical across standard
/// libraries (std::*_distribution outputs are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64();
    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Derive an independent stream, e.g. one per epoch.
    Rng fork(std::uint64_t salt);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sparsegrow
