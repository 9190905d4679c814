#include "mvictr/factor.hpp"

#include <cmath>

namespace mvictr {

void FactorHyperparams::validate() const {
    if (d < 1) throw ValidationError("latent dimension must be >= 1");
    if (!(lambda_u > 0.0) || !(lambda_v > 0.0))
        throw ValidationError("lambda_u and lambda_v must be positive");
    if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
    if (!(conf_a > 0.0) || !(conf_b > 0.0) || !(conf_a > conf_b))
        throw ValidationError("confidence weights must satisfy a > b > 0");
}

LatentFactor::LatentFactor(Eigen::VectorXd prior_mean, double lambda, double sigma2) {
    if (!(lambda > 0.0)) throw ValidationError("factor lambda must be positive");
    if (!(sigma2 > 0.0)) throw ValidationError("factor sigma2 must be positive");
    const auto d = prior_mean.size();
    if (d < 1) throw ValidationError("factor dimension must be >= 1");
    prior_mean_ = std::move(prior_mean);
    lambda_ = lambda;
    sigma2_ = sigma2;
    gram_ = Eigen::MatrixXd::Zero(d, d);
    moment_ = Eigen::VectorXd::Zero(d);
    refresh();
}

LatentFactor LatentFactor::fixed(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
    const auto d = mean.size();
    if (covariance.rows() != d || covariance.cols() != d)
        throw ValidationError("fixed factor: covariance shape mismatch");
    LatentFactor f;
    f.prior_mean_ = mean;
    f.mean_ = std::move(mean);
    f.cov_ = std::move(covariance);
    f.fixed_ = true;
    if (f.cov_.isZero(0.0)) {
        f.zero_cov_ = true;
        f.chol_ = Eigen::MatrixXd::Zero(d, d);
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(f.cov_);
        if (llt.info() != Eigen::Success)
            throw NumericError("fixed factor: covariance is not positive definite");
        f.chol_ = llt.matrixL();
    }
    f.gram_ = Eigen::MatrixXd::Zero(d, d);
    f.moment_ = Eigen::VectorXd::Zero(d);
    return f;
}

void LatentFactor::refresh() {
    Eigen::MatrixXd a = gram_;
    a.diagonal().array() += lambda_;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericError("factor posterior solve failed (non-SPD system)");
    mean_ = llt.solve(moment_ + lambda_ * prior_mean_);
    cov_ = sigma2_ * llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    // keep the cached covariance exactly symmetric
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> cov_llt(cov_);
    if (cov_llt.info() != Eigen::Success)
        throw NumericError("factor covariance factorization failed");
    chol_ = cov_llt.matrixL();
    zero_cov_ = false;
}

void LatentFactor::observe(const Eigen::VectorXd& other_mean, double reward, double confidence) {
    if (fixed_) throw ValidationError("cannot observe on a fixed factor");
    if (!(confidence > 0.0)) throw ValidationError("confidence must be positive");
    if (other_mean.size() != mean_.size())
        throw ValidationError("observe: dimension mismatch");
    gram_.noalias() += confidence * (other_mean * other_mean.transpose());
    moment_.noalias() += confidence * reward * other_mean;
    ++n_obs_;
    refresh();
}

uint64_t LatentFactor::digest() const {
    uint64_t h = fnv1a64(std::span<const double>(prior_mean_.data(), prior_mean_.size()));
    h = fnv1a64(std::span<const double>(gram_.data(), gram_.size()), h);
    h = fnv1a64(std::span<const double>(moment_.data(), moment_.size()), h);
    h = fnv1a64(std::span<const double>(mean_.data(), mean_.size()), h);
    return h;
}

LatentFactor prior_factor(const TopicComponent& chi, const FactorHyperparams& hyper, Side side) {
    hyper.validate();
    if (chi.chi.size() != static_cast<size_t>(hyper.d))
        throw ValidationError("topic component length != latent dimension");
    Eigen::VectorXd mean(hyper.d);
    for (int i = 0; i < hyper.d; ++i) mean[i] = chi.chi[i];
    return LatentFactor(std::move(mean), hyper.lambda_for(side), hyper.sigma2);
}

LatentFactor zero_prior_factor(const FactorHyperparams& hyper, Side side) {
    hyper.validate();
    return LatentFactor(Eigen::VectorXd::Zero(hyper.d), hyper.lambda_for(side), hyper.sigma2);
}

double predict(const LatentFactor& u, const LatentFactor& v) {
    if (u.dim() != v.dim()) throw ValidationError("predict: dimension mismatch");
    return u.mean().dot(v.mean());
}

}  // namespace mvictr
