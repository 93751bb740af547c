#include "sparsegrow/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sparsegrow {

namespace {
thread_local std::size_t g_peak_elements = 0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

namespace matrix_stats {
std::size_t peak_elements() noexcept { return g_peak_elements; }
void reset() noexcept { g_peak_elements = 0; }
}  // namespace matrix_stats

Matrix::Matrix(std::size_t rows, std::size_t cols, real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    g_peak_elements = std::max(g_peak_elements, data_.size());
}

void Matrix::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

Rng Rng::fork(std::uint64_t salt) { return Rng(next_u64() ^ splitmix64(salt)); }

}  // namespace sparsegrow
