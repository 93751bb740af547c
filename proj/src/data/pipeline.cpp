#include "sparsegrow/data/pipeline.hpp"

#include <algorithm>
#include <numeric>

namespace sparsegrow {

NormalizationConstants NormalizationConstants::cifar10() {
    return {{0.491, 0.482, 0.447}, {0.247, 0.243, 0.262}};
}

NormalizationConstants NormalizationConstants::cifar100() {
    return {{0.507, 0.487, 0.441}, {0.267, 0.256, 0.276}};
}

NormalizationConstants NormalizationConstants::imagenet() {
    return {{0.485, 0.456, 0.406}, {0.229, 0.224, 0.225}};
}

NormalizationConstants NormalizationConstants::mnist() { return {{0.1307}, {0.3081}}; }

NormalizationConstants NormalizationConstants::for_dataset(const std::string& name) {
    if (name == "mnist") return mnist();
    if (name == "cifar10") return cifar10();
    if (name == "cifar100") return cifar100();
    if (name == "imagenet") return imagenet();
    throw ConfigError("no normalization constants for dataset '" + name + "'");
}

namespace {

void check_constants(const Dataset& d, const NormalizationConstants& k) {
    if (k.mean.size() != d.channels || k.stddev.size() != d.channels)
        throw DatasetError(d.name + ": normalization constants have " + std::to_string(k.mean.size()) +
                           " channels, images have " + std::to_string(d.channels));
    for (double s : k.stddev)
        if (!(s > 0)) throw DatasetError(d.name + ": standard deviation must be > 0");
}

template <class F>
void per_channel(Dataset& d, F&& f) {
    const std::size_t plane = d.height * d.width;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t c = 0; c < d.channels; ++c) {
            float* p = d.images.data() + (i * d.channels + c) * plane;
            for (std::size_t j = 0; j < plane; ++j) p[j] = f(p[j], c);
        }
}

}  // namespace

void normalize(Dataset& d, const NormalizationConstants& k) {
    check_constants(d, k);
    per_channel(d, [&](float x, std::size_t c) { return float((double(x) - k.mean[c]) / k.stddev[c]); });
}

void denormalize(Dataset& d, const NormalizationConstants& k) {
    check_constants(d, k);
    per_channel(d, [&](float x, std::size_t c) { return float(double(x) * k.stddev[c] + k.mean[c]); });
}

std::vector<float> black_fill(const NormalizationConstants& k) {
    std::vector<float> f;
    for (std::size_t c = 0; c < k.mean.size(); ++c) f.push_back(float(-k.mean[c] / k.stddev[c]));
    return f;
}

void AugmentationPolicy::validate(std::size_t height, std::size_t width) const {
    if (crop == 0 || crop > height + 2 * pad || crop > width + 2 * pad)
        throw ConfigError("crop of " + std::to_string(crop) + " does not fit the padded image");
    if (!(hflip_prob >= 0 && hflip_prob <= 1)) throw ConfigError("flip probability must lie in [0, 1]");
}

void augment_image(std::span<const float> in, std::span<float> out, std::size_t channels, std::size_t height,
                   std::size_t width, const AugmentationPolicy& policy, std::size_t offset_y, std::size_t offset_x,
                   bool flip, std::span<const float> fill) {
    const std::size_t k = policy.crop;
    if (in.size() != channels * height * width || out.size() != channels * k * k)
        throw ShapeMismatch("augment_image: buffer sizes do not match the geometry");
    if (offset_y + k > height + 2 * policy.pad || offset_x + k > width + 2 * policy.pad)
        throw ShapeMismatch("augment_image: crop offset out of range");
    for (std::size_t c = 0; c < channels; ++c) {
        const float pad_value = fill.empty() ? 0.0f : fill[c];
        for (std::size_t y = 0; y < k; ++y)
            for (std::size_t x = 0; x < k; ++x) {
                const std::size_t sx = flip ? k - 1 - x : x;
                // Source position in the unpadded image.
                const long iy = long(offset_y + y) - long(policy.pad);
                const long ix = long(offset_x + sx) - long(policy.pad);
                const bool inside = iy >= 0 && ix >= 0 && iy < long(height) && ix < long(width);
                out[(c * k + y) * k + x] =
                    inside ? in[(c * height + std::size_t(iy)) * width + std::size_t(ix)] : pad_value;
            }
    }
}

void augment(Matrix& batch, std::size_t channels, std::size_t height, std::size_t width,
             const AugmentationPolicy& policy, Rng& rng, std::span<const float> fill) {
    policy.validate(height, width);
    if (batch.rows() != channels * height * width) throw ShapeMismatch("augment: batch rows do not match the geometry");
    if (policy.crop != height || policy.crop != width)
        throw ShapeMismatch("augment: in-place augmentation needs crop == image size");
    const std::size_t units = batch.rows();
    const std::size_t span_y = height + 2 * policy.pad - policy.crop + 1;
    const std::size_t span_x = width + 2 * policy.pad - policy.crop + 1;
    std::vector<float> in(units), out(units);
    for (std::size_t j = 0; j < batch.cols(); ++j) {
        const std::size_t oy = rng.uniform_index(span_y);
        const std::size_t ox = rng.uniform_index(span_x);
        const bool flip = rng.uniform() < policy.hflip_prob;
        for (std::size_t u = 0; u < units; ++u) in[u] = float(batch(u, j));
        augment_image(in, out, channels, height, width, policy, oy, ox, flip, fill);
        for (std::size_t u = 0; u < units; ++u) batch(u, j) = real(out[u]);
    }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng(seed).fork(0x5eed0000 + epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    return order;
}

Batch make_batch(const Dataset& d, std::span<const std::size_t> indices) {
    Batch b;
    const std::size_t units = d.sample_units();
    b.inputs = Matrix(units, indices.size());
    b.labels.reserve(indices.size());
    b.indices.assign(indices.begin(), indices.end());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const auto img = d.image(indices[j]);
        for (std::size_t u = 0; u < units; ++u) b.inputs(u, j) = real(img[u]);
        b.labels.push_back(d.labels[indices[j]]);
    }
    return b;
}

BatchSequence::BatchSequence(const Dataset& d, std::size_t batch_size, std::uint64_t seed, std::size_t epoch)
    : data_(&d), batch_size_(batch_size), order_(epoch_order(d.size(), seed, epoch)) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
}

BatchSequence::BatchSequence(const Dataset& d, std::size_t batch_size)
    : data_(&d), batch_size_(batch_size), order_(d.size()) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::size_t BatchSequence::size() const noexcept { return (order_.size() + batch_size_ - 1) / batch_size_; }

Batch BatchSequence::operator[](std::size_t i) const {
    const std::size_t lo = i * batch_size_;
    const std::size_t hi = std::min(order_.size(), lo + batch_size_);
    return make_batch(*data_, std::span(order_).subspan(lo, hi - lo));
}

BatchSequence batches(const Dataset& d, std::size_t batch_size, std::uint64_t seed, std::size_t epoch) {
    return BatchSequence(d, batch_size, seed, epoch);
}

Dataset synthetic_classification(std::size_t n, std::size_t classes, std::size_t dims, double separation,
                                 Rng& rng) {
    if (classes == 0 || dims == 0) throw ConfigError("synthetic data needs classes and dims >= 1");
    Dataset d;
    d.name = "synthetic";
    d.channels = 1;
    d.height = 1;
    d.width = dims;
    d.classes = classes;
    std::vector<double> means(classes * dims);
    for (auto& m : means) m = rng.normal(0, separation);
    d.images.resize(n * dims);
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = rng.uniform_index(classes);
        d.labels[i] = int(c);
        for (std::size_t j = 0; j < dims; ++j) d.images[i * dims + j] = float(means[c * dims + j] + rng.normal());
    }
    return d;
}

}  // namespace sparsegrow
