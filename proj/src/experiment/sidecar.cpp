#include "sparsegrow/experiment/sidecar.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sparsegrow/common.hpp"
#include "sparsegrow/data/dataset.hpp"

namespace sparsegrow {

namespace {

constexpr char kMagic[8] = {'S', 'G', 'M', 'O', 'D', 'E', 'L', '\0'};

template <class U>
void put(std::vector<std::uint8_t>& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    template <class U>
    U get() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(b_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == b_.size(); }
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw ParseError("model sidecar truncated at offset " + std::to_string(pos_));
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

ModelSnapshot snapshot(const Model& model, std::uint64_t step) {
    ModelSnapshot s;
    s.step = step;
    for (const auto& p : model.params) {
        SidecarLayer l;
        l.n_in = std::uint32_t(p.weights.n_in());
        l.n_out = std::uint32_t(p.weights.n_out());
        l.connections.assign(p.weights.connections().begin(), p.weights.connections().end());
        l.weights.assign(p.weights.weights().begin(), p.weights.weights().end());
        l.bias.assign(p.bias.begin(), p.bias.end());
        s.layers.push_back(std::move(l));
    }
    return s;
}

std::vector<std::uint8_t> encode_sidecar(const ModelSnapshot& s) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put(out, s.version);
    put(out, std::uint32_t(s.layers.size()));
    put(out, s.step);
    for (const auto& l : s.layers) {
        put(out, l.n_in);
        put(out, l.n_out);
        put(out, std::uint64_t(l.connections.size()));
        put(out, std::uint32_t(l.bias.size()));
    }
    for (const auto& l : s.layers) {
        for (std::size_t i = 0; i < l.connections.size(); ++i) {
            put(out, l.connections[i].in_unit);
            put(out, l.connections[i].out_unit);
            put_f64(out, l.weights[i]);
        }
        for (double b : l.bias) put_f64(out, b);
    }
    return out;
}

ModelSnapshot decode_sidecar(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw ParseError("model sidecar: bad magic at offset 0");
    Reader r(bytes.subspan(8));
    ModelSnapshot s;
    s.version = r.get<std::uint32_t>();
    if (s.version != kSidecarVersion)
        throw ParseError("model sidecar: unsupported version " + std::to_string(s.version) + " at offset 8");
    const auto count = r.get<std::uint32_t>();
    s.step = r.get<std::uint64_t>();
    std::vector<std::pair<std::uint64_t, std::uint32_t>> sizes;
    for (std::uint32_t i = 0; i < count; ++i) {
        SidecarLayer l;
        l.n_in = r.get<std::uint32_t>();
        l.n_out = r.get<std::uint32_t>();
        const auto nnz = r.get<std::uint64_t>();
        const auto nb = r.get<std::uint32_t>();
        sizes.emplace_back(nnz, nb);
        s.layers.push_back(std::move(l));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& l = s.layers[i];
        r.need(sizes[i].first * 16);
        for (std::uint64_t e = 0; e < sizes[i].first; ++e) {
            const auto a = r.get<std::uint32_t>();
            const auto b = r.get<std::uint32_t>();
            if (a >= l.n_in || b >= l.n_out)
                throw ParseError("model sidecar: connection out of range before offset " + std::to_string(r.pos() + 8));
            l.connections.push_back({a, b});
            l.weights.push_back(r.f64());
        }
        for (std::uint32_t j = 0; j < sizes[i].second; ++j) l.bias.push_back(r.f64());
    }
    if (!r.done()) throw ParseError("model sidecar: trailing bytes at offset " + std::to_string(r.pos() + 8));
    return s;
}

void write_sidecar(const std::filesystem::path& path, const Model& model, std::uint64_t step) {
    const auto bytes = encode_sidecar(snapshot(model, step));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

ModelSnapshot read_sidecar(const std::filesystem::path& path) {
    try {
        return decode_sidecar(read_bytes(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace sparsegrow
