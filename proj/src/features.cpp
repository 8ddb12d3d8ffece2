#include "situate/features.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "situate/errors.hpp"
#include "situate/rng.hpp"

namespace situate {

OracleFeatureProvider::OracleFeatureProvider(std::vector<SyntheticScene> scenes,
                                             std::vector<std::string> categories, int dim,
                                             double noise_sigma, std::uint64_t projection_seed)
    : categories_(std::move(categories)), noise_sigma_(noise_sigma) {
    const int psi_dim = static_cast<int>(categories_.size()) + 5;
    if (dim < psi_dim)
        throw validation_error("oracle features: dim must be at least categories + 5");
    for (auto& scene : scenes) {
        std::string id = scene.image_id;
        scenes_.emplace(std::move(id), std::move(scene));
    }

    // Regenerate from successive seeds until the projection has full
    // column rank (a rank-deficient draw has probability ~0 but the
    // contract is checked anyway).
    std::uint64_t seed = projection_seed;
    for (;;) {
        Rng rng(seed);
        projection_.resize(dim, psi_dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < psi_dim; ++j) projection_(i, j) = rng.normal();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projection_);
        if (qr.rank() == psi_dim) break;
        ++seed;
    }
}

const SyntheticScene& OracleFeatureProvider::scene(const std::string& image_id) const {
    auto it = scenes_.find(image_id);
    if (it == scenes_.end())
        throw validation_error("oracle features: unknown image " + image_id);
    return it->second;
}

Eigen::VectorXd OracleFeatureProvider::descriptor(const std::string& image_id,
                                                  const PixelBox& box) const {
    const SyntheticScene& sc = scene(image_id);
    const int k = static_cast<int>(categories_.size());
    Eigen::VectorXd psi(k + 5);
    for (int c = 0; c < k; ++c) {
        auto it = sc.gt_boxes.find(categories_[c]);
        psi(c) = it == sc.gt_boxes.end() ? 0.0 : iou(box, it->second);
    }
    psi(k) = box.cx() / sc.dims.width;
    psi(k + 1) = box.cy() / sc.dims.height;
    psi(k + 2) = box.area() / (sc.dims.width * sc.dims.height);
    psi(k + 3) = box.w / box.h;
    psi(k + 4) = 1.0;
    return psi;
}

Eigen::VectorXd OracleFeatureProvider::features(const std::string& image_id,
                                                const PixelBox& box) const {
    Eigen::VectorXd out = projection_ * descriptor(image_id, box);
    if (noise_sigma_ > 0.0) {
        // Noise is keyed by the query (box quantized to 0.1 pixel), not a
        // stream: feature vectors are a pure function of their inputs.
        std::uint64_t h = fnv1a64(image_id);
        auto mix = [&h](std::int64_t v) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        mix(std::llround(box.x * 10.0));
        mix(std::llround(box.y * 10.0));
        mix(std::llround(box.w * 10.0));
        mix(std::llround(box.h * 10.0));
        for (int i = 0; i < out.size(); ++i)
            out(i) += noise_sigma_ * hash_normal(h ^ (0xd6e8feb86659fd93ull * (i + 1)));
    }
    return out;
}

QuantizedKey quantize_params(const BoxParams& params) {
    QuantizedKey key;
    key.cx = static_cast<std::int32_t>(std::llround(params.cx * 64.0));
    key.cy = static_cast<std::int32_t>(std::llround(params.cy * 64.0));
    key.log_area = static_cast<std::int32_t>(std::llround(std::log(params.area_ratio) * 16.0));
    key.log_aspect = static_cast<std::int32_t>(std::llround(std::log(params.aspect_ratio) * 16.0));
    return key;
}

void FeatureStore::insert(const std::string& image_id, const QuantizedKey& key,
                          const Eigen::VectorXd& feature) {
    if (dim == 0) dim = static_cast<int>(feature.size());
    if (feature.size() != dim) throw validation_error("feature store: dimension mismatch");
    std::uint64_t offset = blob.size();
    for (int i = 0; i < feature.size(); ++i) blob.push_back(static_cast<float>(feature(i)));
    index[image_id][key] = offset;
}

Eigen::VectorXd store_lookup(const FeatureStore& store, const std::string& image_id,
                             const PixelBox& box, const ImageDims& dims) {
    auto img = store.index.find(image_id);
    if (img == store.index.end())
        throw validation_error("feature store: unknown image " + image_id);

    QuantizedKey want = quantize_params(to_params(box, dims));
    const std::map<QuantizedKey, std::uint64_t>* keys = &img->second;

    std::uint64_t offset = 0;
    bool found = false;
    if (auto exact = keys->find(want); exact != keys->end()) {
        offset = exact->second;
        found = true;
    } else {
        long best = std::numeric_limits<long>::max();
        for (const auto& [key, off] : *keys) {
            long d_cx = std::abs(long(key.cx) - long(want.cx));
            long d_cy = std::abs(long(key.cy) - long(want.cy));
            long d_la = std::abs(long(key.log_area) - long(want.log_area));
            long d_lq = std::abs(long(key.log_aspect) - long(want.log_aspect));
            if (std::max({d_cx, d_cy, d_la, d_lq}) > 1) continue;
            long d2 = d_cx * d_cx + d_cy * d_cy + d_la * d_la + d_lq * d_lq;
            if (d2 < best) { // map order makes ties resolve to the smaller key
                best = d2;
                offset = off;
                found = true;
            }
        }
        if (!found)
            throw validation_error("feature store: no key within one quantization step (sparse store)");
    }

    Eigen::VectorXd out(store.dim);
    for (int i = 0; i < store.dim; ++i) out(i) = store.blob[offset + i];
    return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'I', 'T', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    is.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!is) throw format_error("feature store: truncated file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(v);
}

} // namespace

void store_write(const FeatureStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write " + path);

    std::uint64_t count = 0;
    for (const auto& [_, keys] : store.index) count += keys.size();

    os.write(kMagic, 4);
    write_le<std::uint32_t>(os, kVersion);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(store.dim));
    write_le<std::uint64_t>(os, count);
    for (const auto& [image_id, keys] : store.index) {
        for (const auto& [key, offset] : keys) {
            write_le<std::uint32_t>(os, static_cast<std::uint32_t>(image_id.size()));
            os.write(image_id.data(), static_cast<std::streamsize>(image_id.size()));
            write_le<std::int32_t>(os, key.cx);
            write_le<std::int32_t>(os, key.cy);
            write_le<std::int32_t>(os, key.log_area);
            write_le<std::int32_t>(os, key.log_aspect);
            write_le<std::uint64_t>(os, offset);
        }
    }
    for (float f : store.blob) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_le<std::uint32_t>(os, bits);
    }
    if (!os) throw io_error("write failed: " + path);
}

FeatureStore store_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot read " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw format_error("feature store: bad magic in " + path);
    std::uint32_t version = read_le<std::uint32_t>(is);
    if (version != kVersion)
        throw format_error("feature store: unsupported version " + std::to_string(version));

    FeatureStore store;
    store.dim = static_cast<int>(read_le<std::uint32_t>(is));
    if (store.dim <= 0) throw format_error("feature store: invalid dimension");
    std::uint64_t count = read_le<std::uint64_t>(is);

    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t len = read_le<std::uint32_t>(is);
        std::string image_id(len, '\0');
        is.read(image_id.data(), len);
        if (!is) throw format_error("feature store: truncated index");
        QuantizedKey key;
        key.cx = read_le<std::int32_t>(is);
        key.cy = read_le<std::int32_t>(is);
        key.log_area = read_le<std::int32_t>(is);
        key.log_aspect = read_le<std::int32_t>(is);
        std::uint64_t offset = read_le<std::uint64_t>(is);
        store.index[image_id][key] = offset;
    }

    // The blob is the remainder of the file.
    std::vector<char> raw(std::istreambuf_iterator<char>(is), {});
    if (raw.size() % 4 != 0) throw format_error("feature store: truncated blob");
    store.blob.reserve(raw.size() / 4);
    for (std::size_t i = 0; i < raw.size(); i += 4) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i + b])) << (8 * b);
        float f;
        std::memcpy(&f, &bits, 4);
        store.blob.push_back(f);
    }

    for (const auto& [image_id, keys] : store.index)
        for (const auto& [_, offset] : keys)
            if (offset + store.dim > store.blob.size())
                throw format_error("feature store: index entry outside blob");
    return store;
}

StoreFeatureProvider::StoreFeatureProvider(FeatureStore store, std::map<std::string, ImageDims> dims)
    : store_(std::move(store)), dims_(std::move(dims)) {}

Eigen::VectorXd StoreFeatureProvider::features(const std::string& image_id,
                                               const PixelBox& box) const {
    auto it = dims_.find(image_id);
    if (it == dims_.end())
        throw validation_error("feature store: no dimensions for image " + image_id);
    return store_lookup(store_, image_id, box, it->second);
}

} // namespace situate
