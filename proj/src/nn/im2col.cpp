#include "sparsegrow/nn/im2col.hpp"

#include <string>

namespace sparsegrow {

void ConvGeometry::validate() const {
    if (in_channels == 0 || out_channels == 0 || kernel == 0 || stride == 0 || in_height == 0 ||
        in_width == 0)
        throw ShapeMismatch("conv geometry: zero-sized dimension");
    if (kernel > in_height + 2 * padding || kernel > in_width + 2 * padding)
        throw ShapeMismatch("conv geometry: kernel larger than padded input");
    if ((in_height + 2 * padding - kernel) % stride != 0 ||
        (in_width + 2 * padding - kernel) % stride != 0)
        throw ShapeMismatch("conv geometry: stride " + std::to_string(stride) +
                            " does not tile the padded input");
}

Matrix im2col(const Matrix& input, const ConvGeometry& g) {
    if (input.rows() != g.input_units())
        throw ShapeMismatch("im2col: input has " + std::to_string(input.rows()) + " units, expected " +
                            std::to_string(g.input_units()));
    const std::size_t batch = input.cols();
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const std::size_t positions = oh * ow;
    const std::size_t k = g.kernel;
    Matrix cols(g.patch_size(), batch * positions);
    for (std::size_t c = 0; c < g.in_channels; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                real* dst = cols.row((c * k + ky) * k + kx).data();
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t y = std::ptrdiff_t(oy * g.stride + ky) - std::ptrdiff_t(g.padding);
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t x =
                            std::ptrdiff_t(ox * g.stride + kx) - std::ptrdiff_t(g.padding);
                        const std::size_t p = oy * ow + ox;
                        if (y < 0 || x < 0 || y >= std::ptrdiff_t(g.in_height) ||
                            x >= std::ptrdiff_t(g.in_width))
                            continue;
                        const real* src = input.row((c * g.in_height + y) * g.in_width + x).data();
                        for (std::size_t i = 0; i < batch; ++i) dst[i * positions + p] = src[i];
                    }
                }
            }
    return cols;
}

Matrix col2im(const Matrix& cols, const ConvGeometry& g, std::size_t batch) {
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const std::size_t positions = oh * ow;
    if (cols.rows() != g.patch_size() || cols.cols() != batch * positions)
        throw ShapeMismatch("col2im: patch matrix shape mismatch");
    const std::size_t k = g.kernel;
    Matrix out(g.input_units(), batch);
    for (std::size_t c = 0; c < g.in_channels; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                const real* src = cols.row((c * k + ky) * k + kx).data();
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t y = std::ptrdiff_t(oy * g.stride + ky) - std::ptrdiff_t(g.padding);
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t x =
                            std::ptrdiff_t(ox * g.stride + kx) - std::ptrdiff_t(g.padding);
                        if (y < 0 || x < 0 || y >= std::ptrdiff_t(g.in_height) ||
                            x >= std::ptrdiff_t(g.in_width))
                            continue;
                        const std::size_t p = oy * ow + ox;
                        real* dst = out.row((c * g.in_height + y) * g.in_width + x).data();
                        for (std::size_t i = 0; i < batch; ++i) dst[i] += src[i * positions + p];
                    }
                }
            }
    return out;
}

Matrix fold_positions(const Matrix& per_patch, std::size_t positions) {
    const std::size_t channels = per_patch.rows();
    const std::size_t batch = per_patch.cols() / positions;
    Matrix out(channels * positions, batch);
    for (std::size_t o = 0; o < channels; ++o) {
        const real* src = per_patch.row(o).data();
        for (std::size_t p = 0; p < positions; ++p) {
            real* dst = out.row(o * positions + p).data();
            for (std::size_t i = 0; i < batch; ++i) dst[i] = src[i * positions + p];
        }
    }
    return out;
}

Matrix unfold_positions(const Matrix& per_unit, std::size_t channels, std::size_t positions) {
    if (per_unit.rows() != channels * positions)
        throw ShapeMismatch("unfold_positions: unit count mismatch");
    const std::size_t batch = per_unit.cols();
    Matrix out(channels, batch * positions);
    for (std::size_t o = 0; o < channels; ++o) {
        real* dst = out.row(o).data();
        for (std::size_t p = 0; p < positions; ++p) {
            const real* src = per_unit.row(o * positions + p).data();
            for (std::size_t i = 0; i < batch; ++i) dst[i * positions + p] = src[i];
        }
    }
    return out;
}

}  // namespace sparsegrow
