#pragma once

#include <cstdint>
#include <vector>

#include "mvictr/dataset.hpp"
#include "mvictr/ratingmatch.hpp"

namespace mvictr {

// Ground-truth generative state for inference tests: a global cluster
// distribution plus per-(feature, cluster) value distributions.
struct SyntheticWorld {
    FeatureSchema schema;
    int k = 0;
    std::vector<double> theta;              // length K, sums to 1
    std::vector<std::vector<double>> phi;   // per feature: K x V_x row-major, rows sum to 1

    void validate() const;
};

// theta ~ Dirichlet(alpha * 1_K), phi_{x,k} ~ Dirichlet(beta_x * 1_{V_x}).
SyntheticWorld sample_world(const FeatureSchema& schema, int k, double alpha,
                            const std::vector<double>& beta, uint64_t seed);

struct SyntheticEvents {
    std::vector<std::pair<FeatureBundle, FeatureBundle>> pairs;  // (user, item) bundles
    std::vector<int> assignments;                                // true cluster per event
};

// Per event: z ~ Mult(theta); each feature value ~ Mult(phi_{x,z}) within its
// view. Multi-valued features draw `multi_values` values without replacement.
SyntheticEvents sample_events(const SyntheticWorld& world, int n_events, uint64_t seed,
                              int multi_values = 2);

// Fraction of events whose inferred label matches the truth under the best
// cluster-label permutation.
double best_permutation_agreement(const std::vector<int>& truth,
                                  const std::vector<int>& predicted, int k);

}  // namespace mvictr
