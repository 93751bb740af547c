#pragma once

#include "sparsegrow/common.hpp"

namespace sparsegrow {

/// Square-kernel 2D convolution geometry. Activations of a conv layer are laid
/// out per sample as (channel, y, x) flattened into units.
struct ConvGeometry {
    std::size_t in_channels = 0;
    std::size_t in_height = 0;
    std::size_t in_width = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t padding = 0;

    std::size_t out_height() const noexcept {
        return (in_height + 2 * padding - kernel) / stride + 1;
    }
    std::size_t out_width() const noexcept { return (in_width + 2 * padding - kernel) / stride + 1; }
    /// Output positions per sample.
    std::size_t positions() const noexcept { return out_height() * out_width(); }
    /// Rows of the patch matrix: the fan-in of the flattened filter.
    std::size_t patch_size() const noexcept { return in_channels * kernel * kernel; }
    std::size_t input_units() const noexcept { return in_channels * in_height * in_width; }
    std::size_t output_units() const noexcept { return out_channels * positions(); }

    /// Throws ShapeMismatch when the kernel does not fit or the stride does not
    /// tile the padded input.
    void validate() const;
};

/// Unfold a (C*H*W) x B activation matrix into the patch matrix of shape
/// (C*k*k) x (B*P). Row (c*k + ky)*k + kx, column i*P + p holds the input
/// pixel under kernel tap (ky, kx) at output position p of sample i; taps
/// falling into padding are zero.
Matrix im2col(const Matrix& input, const ConvGeometry& g);

/// Adjoint of im2col: scatter-add a patch-matrix gradient back to (C*H*W) x B.
Matrix col2im(const Matrix& cols, const ConvGeometry& g, std::size_t batch);

/// (O) x (B*P) -> (O*P) x B, unit index o*P + p.
Matrix fold_positions(const Matrix& per_patch, std::size_t positions);
/// (O*P) x B -> (O) x (B*P); inverse of fold_positions.
Matrix unfold_positions(const Matrix& per_unit, std::size_t channels, std::size_t positions);

}  // namespace sparsegrow
