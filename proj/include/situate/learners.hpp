#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "situate/geometry.hpp"
#include "situate/rng.hpp"

namespace situate {

class FeatureProvider;

// Ridge-trained linear predictor. The bias is learned unregularized by
// centering features and targets.
struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0;
    double lambda = 0;

    int dim() const { return static_cast<int>(weights.size()); }
};

// Four linear models over the (t_x, t_y, t_w, t_h) box-delta
// parameterization, all sharing one feature dimension.
struct RefinerModel {
    LinearModel dx, dy, dw, dh;

    int dim() const { return dx.dim(); }
};

struct TrainingCrop {
    std::string image_id;
    PixelBox box;
    Eigen::VectorXd feature;
    double target_iou = 0;
    std::array<double, 4> target_deltas{}; // t_x, t_y, t_w, t_h
};

LinearModel fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      double lambda);

double predict(const LinearModel& model, const Eigen::VectorXd& feature);

// Center-form box deltas between a proposal P and a target G:
// t_x = (G_cx - P_cx) / P_w, t_y likewise over heights,
// t_w = ln(G_w / P_w), t_h = ln(G_h / P_h).
std::array<double, 4> box_deltas(const PixelBox& proposal, const PixelBox& target);

// Inverts box_deltas and clips the result to the frame.
PixelBox apply_deltas(const PixelBox& box, const std::array<double, 4>& deltas,
                      const ImageDims& dims);

// One ground-truth annotation used for crop generation.
struct CropSource {
    std::string image_id;
    ImageDims dims;
    PixelBox gt_box;
};

// The ground-truth crop plus jittered crops that keep IOU >= 0.1 with it.
// Center jitter is up to +/-30% of the corresponding side and scale
// jitter is x[0.7, 1.4] per axis; each jitter slot is resampled up to 50
// times before being dropped.
std::vector<TrainingCrop> build_crops(const std::vector<CropSource>& sources,
                                      const FeatureProvider& provider, Rng& rng,
                                      int crops_per_image);

LinearModel train_localizer(const std::vector<TrainingCrop>& crops, double lambda = 1.0);

RefinerModel train_refiner(const std::vector<TrainingCrop>& crops, double lambda = 1.0);

PixelBox apply_refinement(const RefinerModel& refiner, const Eigen::VectorXd& feature,
                          const PixelBox& box, const ImageDims& dims);

} // namespace situate
