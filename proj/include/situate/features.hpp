#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "situate/geometry.hpp"

namespace situate {

// Deterministic feature source: the same (image_id, box) query always
// returns the identical vector.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    virtual int feature_dim() const = 0;
    virtual Eigen::VectorXd features(const std::string& image_id, const PixelBox& box) const = 0;
};

// Ground truth for one synthetic image: at most one box per situation
// category, plus labeled distractor boxes.
struct SyntheticScene {
    std::string image_id;
    ImageDims dims;
    std::map<std::string, PixelBox> gt_boxes;
    std::vector<std::pair<std::string, PixelBox>> distractors;
};

// Test-scale feature oracle. The descriptor psi of a query box is
// [iou with each category's ground truth; cx; cy; area_ratio;
// aspect_ratio; 1], projected through a fixed full-column-rank matrix
// with hash-derived additive noise, so per-category overlap is linearly
// decodable from the output by construction.
class OracleFeatureProvider : public FeatureProvider {
public:
    OracleFeatureProvider(std::vector<SyntheticScene> scenes,
                          std::vector<std::string> categories, int dim, double noise_sigma,
                          std::uint64_t projection_seed);

    int feature_dim() const override { return static_cast<int>(projection_.rows()); }
    Eigen::VectorXd features(const std::string& image_id, const PixelBox& box) const override;

    Eigen::VectorXd descriptor(const std::string& image_id, const PixelBox& box) const;
    const Eigen::MatrixXd& projection() const { return projection_; }
    const SyntheticScene& scene(const std::string& image_id) const;
    bool has_scene(const std::string& image_id) const { return scenes_.count(image_id) > 0; }

private:
    std::map<std::string, SyntheticScene> scenes_;
    std::vector<std::string> categories_;
    Eigen::MatrixXd projection_;
    double noise_sigma_;
};

// Quantized BoxParams key used by the feature store index: cx, cy on a
// 1/64 grid, log area_ratio and log aspect_ratio on a 1/16 grid.
struct QuantizedKey {
    std::int32_t cx = 0;
    std::int32_t cy = 0;
    std::int32_t log_area = 0;
    std::int32_t log_aspect = 0;

    auto operator<=>(const QuantizedKey&) const = default;
};

QuantizedKey quantize_params(const BoxParams& params);

// Packed store of precomputed float32 feature vectors indexed by
// (image_id, quantized box parameters).
struct FeatureStore {
    int dim = 0;
    std::map<std::string, std::map<QuantizedKey, std::uint64_t>> index; // offsets into blob
    std::vector<float> blob;

    void insert(const std::string& image_id, const QuantizedKey& key,
                const Eigen::VectorXd& feature);
};

// Nearest-key lookup: an exact quantized hit returns the stored bytes;
// otherwise the closest key within one quantization step per dimension is
// used. Missing image or no key in range is an error.
Eigen::VectorXd store_lookup(const FeatureStore& store, const std::string& image_id,
                             const PixelBox& box, const ImageDims& dims);

void store_write(const FeatureStore& store, const std::string& path);
FeatureStore store_read(const std::string& path);

// FeatureProvider over a FeatureStore; image dimensions come from the
// annotation set because the store file does not carry them.
class StoreFeatureProvider : public FeatureProvider {
public:
    StoreFeatureProvider(FeatureStore store, std::map<std::string, ImageDims> dims);

    int feature_dim() const override { return store_.dim; }
    Eigen::VectorXd features(const std::string& image_id, const PixelBox& box) const override;

private:
    FeatureStore store_;
    std::map<std::string, ImageDims> dims_;
};

} // namespace situate
