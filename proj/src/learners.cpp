#include "situate/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "situate/errors.hpp"
#include "situate/features.hpp"

namespace situate {

LinearModel fit_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      double lambda) {
    const auto n = features.rows();
    const auto d = features.cols();
    if (n < 1) throw validation_error("fit_ridge: need at least one sample");
    if (targets.size() != n) throw std::invalid_argument("fit_ridge: row count mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_ridge: lambda must be nonnegative");
    if (!features.allFinite() || !targets.allFinite())
        throw validation_error("fit_ridge: non-finite input");

    Eigen::RowVectorXd x_mean = features.colwise().mean();
    double y_mean = targets.mean();
    Eigen::MatrixXd xc = features.rowwise() - x_mean;
    Eigen::VectorXd yc = targets.array() - y_mean;

    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += lambda;
    Eigen::VectorXd rhs = xc.transpose() * yc;
    Eigen::VectorXd w = gram.ldlt().solve(rhs);

    double scale = std::max({rhs.norm(), gram.norm() * w.norm(), 1e-12});
    if (!w.allFinite() || (gram * w - rhs).norm() > 1e-7 * scale)
        throw validation_error("fit_ridge: singular normal equations (increase lambda)");

    LinearModel model;
    model.bias = y_mean - w.dot(x_mean);
    model.weights = std::move(w);
    model.lambda = lambda;
    return model;
}

double predict(const LinearModel& model, const Eigen::VectorXd& feature) {
    if (feature.size() != model.weights.size())
        throw std::invalid_argument("predict: feature dimension mismatch");
    return model.weights.dot(feature) + model.bias;
}

std::array<double, 4> box_deltas(const PixelBox& proposal, const PixelBox& target) {
    return {(target.cx() - proposal.cx()) / proposal.w,
            (target.cy() - proposal.cy()) / proposal.h,
            std::log(target.w / proposal.w),
            std::log(target.h / proposal.h)};
}

PixelBox apply_deltas(const PixelBox& box, const std::array<double, 4>& deltas,
                      const ImageDims& dims) {
    // Clamp the log-scale deltas so a wild prediction cannot overflow exp.
    double tw = std::clamp(deltas[2], -30.0, 30.0);
    double th = std::clamp(deltas[3], -30.0, 30.0);
    double w = box.w * std::exp(tw);
    double h = box.h * std::exp(th);
    double cx = box.cx() + box.w * deltas[0];
    double cy = box.cy() + box.h * deltas[1];
    return clip_to_frame(PixelBox{cx - w / 2.0, cy - h / 2.0, w, h}, dims);
}

std::vector<TrainingCrop> build_crops(const std::vector<CropSource>& sources,
                                      const FeatureProvider& provider, Rng& rng,
                                      int crops_per_image) {
    if (crops_per_image < 1)
        throw std::invalid_argument("build_crops: crops_per_image must be positive");

    std::vector<TrainingCrop> crops;
    crops.reserve(sources.size() * crops_per_image);
    for (const auto& src : sources) {
        auto emit = [&](const PixelBox& box) {
            TrainingCrop crop;
            crop.image_id = src.image_id;
            crop.box = box;
            crop.feature = provider.features(src.image_id, box);
            crop.target_iou = iou(box, src.gt_box);
            crop.target_deltas = box_deltas(box, src.gt_box);
            crops.push_back(std::move(crop));
        };

        emit(src.gt_box);
        for (int j = 1; j < crops_per_image; ++j) {
            for (int attempt = 0; attempt < 50; ++attempt) {
                const PixelBox& g = src.gt_box;
                double cx = g.cx() + rng.uniform(-0.3, 0.3) * g.w;
                double cy = g.cy() + rng.uniform(-0.3, 0.3) * g.h;
                double w = g.w * rng.uniform(0.7, 1.4);
                double h = g.h * rng.uniform(0.7, 1.4);
                PixelBox jittered =
                    clip_to_frame(PixelBox{cx - w / 2.0, cy - h / 2.0, w, h}, src.dims);
                if (iou(jittered, g) >= 0.1) {
                    emit(jittered);
                    break;
                }
            }
        }
    }
    return crops;
}

namespace {

std::pair<Eigen::MatrixXd, int> crop_feature_matrix(const std::vector<TrainingCrop>& crops) {
    const int n = static_cast<int>(crops.size());
    const int d = static_cast<int>(crops[0].feature.size());
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) x.row(i) = crops[i].feature;
    return {x, n};
}

} // namespace

LinearModel train_localizer(const std::vector<TrainingCrop>& crops, double lambda) {
    if (crops.size() < 10)
        throw validation_error("train_localizer: need at least 10 crops");
    auto [x, n] = crop_feature_matrix(crops);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = crops[i].target_iou;
    return fit_ridge(x, y, lambda);
}

RefinerModel train_refiner(const std::vector<TrainingCrop>& crops, double lambda) {
    if (crops.size() < 10)
        throw validation_error("train_refiner: need at least 10 crops");
    auto [x, n] = crop_feature_matrix(crops);
    RefinerModel refiner;
    LinearModel* targets[4] = {&refiner.dx, &refiner.dy, &refiner.dw, &refiner.dh};
    for (int t = 0; t < 4; ++t) {
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y(i) = crops[i].target_deltas[t];
        *targets[t] = fit_ridge(x, y, lambda);
    }
    return refiner;
}

PixelBox apply_refinement(const RefinerModel& refiner, const Eigen::VectorXd& feature,
                          const PixelBox& box, const ImageDims& dims) {
    std::array<double, 4> deltas = {predict(refiner.dx, feature), predict(refiner.dy, feature),
                                    predict(refiner.dw, feature), predict(refiner.dh, feature)};
    return apply_deltas(box, deltas, dims);
}

} // namespace situate
