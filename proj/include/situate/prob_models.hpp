#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "situate/rng.hpp"

namespace situate {

// Block-structured multivariate Gaussian. `layout` maps each category to
// the start of its 4 consecutive dimensions (cx, cy, area_ratio,
// aspect_ratio); it may be empty for models without category structure.
struct GaussianModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::vector<std::pair<std::string, int>> layout;

    int dim() const { return static_cast<int>(mean.size()); }
    int block_start(const std::string& category) const;
};

// MLE fit (divide by n) with covariance regularized by
// max(ridge * trace / dim, 1e-8) on the diagonal.
GaussianModel fit_gaussian(const std::vector<Eigen::VectorXd>& samples, double ridge = 1e-6);

// Gaussian conditioning on observed dimension values. Returns the model
// over the unobserved dimensions; category blocks that survive intact are
// remapped in the output layout.
GaussianModel condition(const GaussianModel& model, const std::map<int, double>& observed);

// 4-dim sub-block for one category, copied without recomputation.
GaussianModel marginal(const GaussianModel& model, const std::string& category);

// mean + L z with L the lower Cholesky factor of cov.
Eigen::VectorXd sample_gaussian(const GaussianModel& model, Rng& rng);

double mahalanobis_sq(const GaussianModel& model, const Eigen::VectorXd& x);

// Gaussian log-density at x.
double gaussian_log_density(const GaussianModel& model, const Eigen::VectorXd& x);

// Log-normal with a floored log-space standard deviation.
struct LogNormalModel {
    double mu = 0;
    double sigma = 1;

    static constexpr double sigma_floor = 1e-4;
};

LogNormalModel fit_lognormal(const std::vector<double>& values);
double sample_lognormal(const LogNormalModel& model, Rng& rng);
double density_lognormal(const LogNormalModel& model, double v);

struct GmmModel {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;

    int k() const { return static_cast<int>(weights.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

// EM with k-means++-style seeding. Stops when the log-likelihood gain
// drops below 1e-6 or after 200 iterations. `iter_log_likelihoods`, when
// given, receives the log-likelihood after each EM iteration.
GmmModel fit_gmm(const std::vector<Eigen::VectorXd>& samples, int k, Rng& rng,
                 double ridge = 1e-6, std::vector<double>* iter_log_likelihoods = nullptr);

double gmm_density(const GmmModel& model, const Eigen::VectorXd& x);

} // namespace situate
