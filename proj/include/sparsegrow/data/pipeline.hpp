#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/data/dataset.hpp"

namespace sparsegrow {

/// Per-channel mean and standard deviation.
struct NormalizationConstants {
    std::vector<double> mean;
    std::vector<double> stddev;

    static NormalizationConstants cifar10();
    static NormalizationConstants cifar100();
    static NormalizationConstants imagenet();
    static NormalizationConstants mnist();
    /// Constants by dataset name; throws ConfigError for unknown names.
    static NormalizationConstants for_dataset(const std::string& name);
};

/// x' = (x - mean_c) / std_c in place. Throws DatasetError on a channel count
/// mismatch or a zero standard deviation.
void normalize(Dataset& d, const NormalizationConstants& k);
void denormalize(Dataset& d, const NormalizationConstants& k);

struct AugmentationPolicy {
    std::size_t pad = 4;
    std::size_t crop = 32;
    double hflip_prob = 0.5;

    /// Throws ConfigError when the crop does not fit the padded image or the
    /// flip probability is outside [0, 1].
    void validate(std::size_t height, std::size_t width) const;
};

/// Crop one C x H x W image out of its padded version at (offset_y, offset_x)
/// of the padded frame, optionally mirroring it horizontally. Padding pixels
/// take fill[c] (the value of a black pixel after normalization). out holds
/// C x crop x crop values.
void augment_image(std::span<const float> in, std::span<float> out, std::size_t channels, std::size_t height,
                   std::size_t width, const AugmentationPolicy& policy, std::size_t offset_y, std::size_t offset_x,
                   bool flip, std::span<const float> fill = {});

/// Random crop and flip applied independently to each column of a
/// (C*H*W) x B batch. Offsets are uniform over the (2 pad + 1)^2 positions
/// when crop equals the image size.
void augment(Matrix& batch, std::size_t channels, std::size_t height, std::size_t width,
             const AugmentationPolicy& policy, Rng& rng, std::span<const float> fill = {});

/// Normalized value of a black pixel for each channel.
std::vector<float> black_fill(const NormalizationConstants& k);

/// A permutation of 0..n-1 that depends only on (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct Batch {
    Matrix inputs;  // units x B
    std::vector<int> labels;
    std::vector<std::size_t> indices;
};

/// Gather samples into a batch (columns in the given order).
Batch make_batch(const Dataset& d, std::span<const std::size_t> indices);

/// The shuffled batches of one epoch. Batches are built on demand; the final
/// partial batch is kept.
class BatchSequence {
public:
    BatchSequence(const Dataset& d, std::size_t batch_size, std::uint64_t seed, std::size_t epoch);
    /// Unshuffled, in dataset order (for evaluation).
    BatchSequence(const Dataset& d, std::size_t batch_size);

    std::size_t size() const noexcept;
    Batch operator[](std::size_t i) const;
    std::span<const std::size_t> order() const noexcept { return order_; }

private:
    const Dataset* data_;
    std::size_t batch_size_;
    std::vector<std::size_t> order_;
};

BatchSequence batches(const Dataset& d, std::size_t batch_size, std::uint64_t seed, std::size_t epoch);

/// Gaussian blobs: class means drawn from N(0, separation^2 I) in `dims`
/// dimensions, samples are mean + N(0, I). Stored as 1 x 1 x dims images.
Dataset synthetic_classification(std::size_t n, std::size_t classes, std::size_t dims, double separation,
                                 Rng& rng);

}  // namespace sparsegrow
