#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mvictr/common.hpp"
#include "mvictr/ratingmatch.hpp"

namespace mvictr {

enum class Side { user, item };

struct FactorHyperparams {
    int d = 3;               // latent dimension (= K)
    double lambda_u = 1.0;   // precision ratio sigma^2 / sigma_u^2
    double lambda_v = 1.0;   // precision ratio sigma^2 / sigma_v^2
    double sigma2 = 1e-4;    // observation noise variance
    double conf_a = 1.0;     // confidence for reward 1
    double conf_b = 0.01;    // confidence for reward 0

    double lambda_for(Side s) const { return s == Side::user ? lambda_u : lambda_v; }
    void validate() const;
};

// Gaussian latent-factor posterior with a topic-component prior mean.
// Observations accumulate additively into Gram/moment sufficient statistics;
// the posterior is the exact normal
//   mean = (G + lambda I)^-1 (m + lambda * prior_mean)
//   cov  = sigma^2 (G + lambda I)^-1
// with G = sum c * other other^T and m = sum c * reward * other.
class LatentFactor {
public:
    LatentFactor(Eigen::VectorXd prior_mean, double lambda, double sigma2);

    // Fixed-moment factor (zero or explicit covariance); used for degenerate
    // policies and tests. observe() is rejected on fixed factors.
    static LatentFactor fixed(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    void observe(const Eigen::VectorXd& other_mean, double reward, double confidence);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    // Lower-triangular L with cov = L L^T (zero matrix for zero covariance).
    const Eigen::MatrixXd& cov_cholesky() const { return chol_; }
    const Eigen::VectorXd& prior_mean() const { return prior_mean_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::VectorXd& moment() const { return moment_; }
    int dim() const { return static_cast<int>(mean_.size()); }
    int64_t observation_count() const { return n_obs_; }
    bool zero_covariance() const { return zero_cov_; }
    double lambda() const { return lambda_; }
    double sigma2() const { return sigma2_; }

    uint64_t digest() const;

private:
    LatentFactor() = default;

    Eigen::VectorXd prior_mean_;
    double lambda_ = 0.0;
    double sigma2_ = 0.0;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd moment_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
    int64_t n_obs_ = 0;
    bool fixed_ = false;
    bool zero_cov_ = false;

    void refresh();
};

// Factor at its prior: mean = chi, covariance = (sigma2/lambda) I.
LatentFactor prior_factor(const TopicComponent& chi, const FactorHyperparams& hyper, Side side);
LatentFactor zero_prior_factor(const FactorHyperparams& hyper, Side side);

// Expected reward: dot product of posterior means.
double predict(const LatentFactor& u, const LatentFactor& v);

}  // namespace mvictr
