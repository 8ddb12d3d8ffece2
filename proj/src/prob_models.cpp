#include "situate/prob_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "situate/errors.hpp"

namespace situate {

namespace {

constexpr double kAbsCovFloor = 1e-8;

Eigen::MatrixXd regularized_cov(Eigen::MatrixXd cov, double ridge) {
    int d = static_cast<int>(cov.rows());
    double eps = std::max(ridge * cov.trace() / d, kAbsCovFloor);
    cov.diagonal().array() += eps;
    return cov;
}

Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m, const char* who) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw validation_error(std::string(who) + ": covariance not positive-definite");
    return llt;
}

} // namespace

int GaussianModel::block_start(const std::string& category) const {
    for (const auto& [name, start] : layout)
        if (name == category) return start;
    throw std::invalid_argument("GaussianModel: unknown category " + category);
}

GaussianModel fit_gaussian(const std::vector<Eigen::VectorXd>& samples, double ridge) {
    if (samples.size() < 2)
        throw validation_error("fit_gaussian: need at least 2 samples");
    const int d = static_cast<int>(samples[0].size());
    for (const auto& s : samples)
        if (s.size() != d) throw std::invalid_argument("fit_gaussian: dimension mismatch");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& s : samples) {
        Eigen::VectorXd c = s - mean;
        cov.noalias() += c * c.transpose();
    }
    cov /= static_cast<double>(samples.size());

    GaussianModel model;
    model.mean = std::move(mean);
    model.cov = regularized_cov(std::move(cov), ridge);
    return model;
}

GaussianModel condition(const GaussianModel& model, const std::map<int, double>& observed) {
    if (observed.empty()) return model;
    const int d = model.dim();
    for (const auto& [idx, _] : observed)
        if (idx < 0 || idx >= d) throw std::invalid_argument("condition: observed index out of range");
    if (static_cast<int>(observed.size()) >= d)
        throw std::invalid_argument("condition: observed set must be a strict subset of dims");

    std::vector<int> keep, obs;
    keep.reserve(d - observed.size());
    obs.reserve(observed.size());
    for (int i = 0; i < d; ++i) {
        if (observed.count(i)) obs.push_back(i);
        else keep.push_back(i);
    }
    const int na = static_cast<int>(keep.size());
    const int nb = static_cast<int>(obs.size());

    Eigen::VectorXd mu_a(na), mu_b(nb), x_b(nb);
    Eigen::MatrixXd s_aa(na, na), s_ab(na, nb), s_bb(nb, nb);
    for (int i = 0; i < na; ++i) {
        mu_a(i) = model.mean(keep[i]);
        for (int j = 0; j < na; ++j) s_aa(i, j) = model.cov(keep[i], keep[j]);
        for (int j = 0; j < nb; ++j) s_ab(i, j) = model.cov(keep[i], obs[j]);
    }
    for (int i = 0; i < nb; ++i) {
        mu_b(i) = model.mean(obs[i]);
        x_b(i) = observed.at(obs[i]);
        for (int j = 0; j < nb; ++j) s_bb(i, j) = model.cov(obs[i], obs[j]);
    }

    Eigen::LLT<Eigen::MatrixXd> llt(s_bb);
    if (llt.info() != Eigen::Success)
        throw validation_error("condition: observed-block covariance numerically singular");
    // mu_A + S_AB S_BB^-1 (x_B - mu_B);  S_AA - S_AB S_BB^-1 S_BA
    Eigen::MatrixXd solved = llt.solve(s_ab.transpose()); // S_BB^-1 S_BA
    GaussianModel out;
    out.mean = mu_a + s_ab * llt.solve(x_b - mu_b);
    out.cov = s_aa - s_ab * solved;
    out.cov = (out.cov + out.cov.transpose()) / 2.0; // keep exact symmetry

    // Remap category blocks that survive unobserved and intact.
    for (const auto& [name, start] : model.layout) {
        bool intact = true;
        for (int j = 0; j < 4; ++j)
            if (observed.count(start + j)) { intact = false; break; }
        if (!intact) continue;
        auto it = std::lower_bound(keep.begin(), keep.end(), start);
        out.layout.emplace_back(name, static_cast<int>(it - keep.begin()));
    }
    return out;
}

GaussianModel marginal(const GaussianModel& model, const std::string& category) {
    int start = model.block_start(category);
    GaussianModel out;
    out.mean = model.mean.segment(start, 4);
    out.cov = model.cov.block(start, start, 4, 4);
    out.layout = {{category, 0}};
    return out;
}

Eigen::VectorXd sample_gaussian(const GaussianModel& model, Rng& rng) {
    auto llt = cholesky_or_throw(model.cov, "sample_gaussian");
    Eigen::VectorXd z(model.dim());
    for (int i = 0; i < model.dim(); ++i) z(i) = rng.normal();
    return model.mean + Eigen::MatrixXd(llt.matrixL()) * z;
}

double mahalanobis_sq(const GaussianModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.mean.size())
        throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
    auto llt = cholesky_or_throw(model.cov, "mahalanobis_sq");
    Eigen::VectorXd diff = x - model.mean;
    return diff.dot(llt.solve(diff));
}

double gaussian_log_density(const GaussianModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.mean.size())
        throw std::invalid_argument("gaussian_log_density: dimension mismatch");
    auto llt = cholesky_or_throw(model.cov, "gaussian_log_density");
    Eigen::VectorXd diff = x - model.mean;
    double quad = diff.dot(llt.solve(diff));
    double log_det = 0.0;
    for (int i = 0; i < model.dim(); ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (model.dim() * std::log(2.0 * M_PI) + log_det + quad);
}

LogNormalModel fit_lognormal(const std::vector<double>& values) {
    if (values.size() < 2)
        throw validation_error("fit_lognormal: need at least 2 values");
    double sum = 0.0;
    for (double v : values) {
        if (v <= 0.0) throw validation_error("fit_lognormal: nonpositive value");
        sum += std::log(v);
    }
    double mu = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        double c = std::log(v) - mu;
        ss += c * c;
    }
    double sigma = std::sqrt(ss / static_cast<double>(values.size()));
    return LogNormalModel{mu, std::max(sigma, LogNormalModel::sigma_floor)};
}

double sample_lognormal(const LogNormalModel& model, Rng& rng) {
    return std::exp(model.mu + model.sigma * rng.normal());
}

double density_lognormal(const LogNormalModel& model, double v) {
    if (v <= 0.0) throw std::invalid_argument("density_lognormal: v must be positive");
    double z = (std::log(v) - model.mu) / model.sigma;
    return std::exp(-0.5 * z * z) / (v * model.sigma * std::sqrt(2.0 * M_PI));
}

namespace {

// Squared Euclidean distance k-means++ seeding: subsequent centers are
// drawn proportional to distance from the chosen set.
std::vector<int> kmeanspp_seed(const std::vector<Eigen::VectorXd>& samples, int k, Rng& rng) {
    std::vector<int> centers;
    centers.push_back(static_cast<int>(rng.uniform_index(samples.size())));
    std::vector<double> d2(samples.size(), std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double d = (samples[i] - samples[centers.back()]).squaredNorm();
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        int next = 0;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                acc += d2[i];
                if (acc >= r) { next = static_cast<int>(i); break; }
            }
        } else {
            next = static_cast<int>(rng.uniform_index(samples.size()));
        }
        centers.push_back(next);
    }
    return centers;
}

} // namespace

GmmModel fit_gmm(const std::vector<Eigen::VectorXd>& samples, int k, Rng& rng,
                 double ridge, std::vector<double>* iter_log_likelihoods) {
    if (k < 1) throw std::invalid_argument("fit_gmm: k must be positive");
    const int d = samples.empty() ? 0 : static_cast<int>(samples[0].size());
    if (static_cast<int>(samples.size()) < k * (d + 1))
        throw validation_error("fit_gmm: too few samples for requested k");

    const int n = static_cast<int>(samples.size());
    GaussianModel overall = fit_gaussian(samples, ridge);

    GmmModel model;
    model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    for (int c : kmeanspp_seed(samples, k, rng)) {
        model.means.push_back(samples[c]);
        model.covs.push_back(overall.cov);
    }

    Eigen::MatrixXd resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        // E-step with log-sum-exp.
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd logp(k);
            for (int j = 0; j < k; ++j) {
                GaussianModel comp{model.means[j], model.covs[j], {}};
                logp(j) = std::log(model.weights(j)) + gaussian_log_density(comp, samples[i]);
            }
            double m = logp.maxCoeff();
            double lse = m + std::log((logp.array() - m).exp().sum());
            resp.row(i) = (logp.array() - lse).exp();
            ll += lse;
        }
        if (iter_log_likelihoods) iter_log_likelihoods->push_back(ll);
        if (ll - prev_ll < 1e-6 && iter > 0) break;
        prev_ll = ll;

        // M-step.
        for (int j = 0; j < k; ++j) {
            double nj = resp.col(j).sum();
            if (nj < 1e-12) continue; // starved component keeps its parameters
            Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
            for (int i = 0; i < n; ++i) mu += resp(i, j) * samples[i];
            mu /= nj;
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd c = samples[i] - mu;
                cov.noalias() += resp(i, j) * (c * c.transpose());
            }
            cov /= nj;
            model.weights(j) = nj / n;
            model.means[j] = std::move(mu);
            model.covs[j] = regularized_cov(std::move(cov), ridge);
        }
        model.weights /= model.weights.sum();
    }
    return model;
}

double gmm_density(const GmmModel& model, const Eigen::VectorXd& x) {
    double total = 0.0;
    for (int j = 0; j < model.k(); ++j) {
        GaussianModel comp{model.means[j], model.covs[j], {}};
        total += model.weights(j) * std::exp(gaussian_log_density(comp, x));
    }
    return total;
}

} // namespace situate
