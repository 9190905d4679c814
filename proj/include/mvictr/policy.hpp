#pragma once

#include <Eigen/Dense>
#include <span>
#include <unordered_map>

#include "mvictr/factor.hpp"
#include "mvictr/rng.hpp"

namespace mvictr {

using FactorMap = std::unordered_map<int, LatentFactor>;

// One posterior draw; zero covariance short-circuits to the mean without
// consuming randomness.
Eigen::VectorXd sample_factor(const LatentFactor& f, Rng& rng);
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_cholesky,
                           Rng& rng);

int select_random(std::span<const int> pool, Rng& rng);

// argmax over the pool of u.mean . v.mean; exact ties resolved uniformly.
int select_greedy(const LatentFactor& u, const FactorMap& items, std::span<const int> pool,
                  Rng& rng);

// Thompson sampling: one user draw shared across all arms, one draw per arm,
// argmax of sampled scores. Degenerates to select_greedy when every
// covariance is zero.
int select_thompson(const LatentFactor& u, const FactorMap& items, std::span<const int> pool,
                    Rng& rng);

}  // namespace mvictr
