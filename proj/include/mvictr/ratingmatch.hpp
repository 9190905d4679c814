#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvictr/dataset.hpp"
#include "mvictr/rng.hpp"

namespace mvictr {

struct RmHyperparams {
    int k = 3;                 // cluster count; doubles as the latent dimension d
    double alpha = 1.0;        // Dirichlet concentration over clusters
    std::vector<double> beta;  // per-feature Dirichlet concentration

    void validate(const FeatureSchema& schema) const;
};

// One training observation: the concatenated user+item feature values of a
// positively rated pair, flattened to (feature, value) tokens. Multi-valued
// features contribute one token per value. `weight` is the rating mass
// (1.0 for binarized positives).
struct RmEvent {
    std::vector<std::pair<int, int>> tokens;
    double weight = 1.0;
};

RmEvent make_rm_event(const FeatureSchema& schema, const FeatureBundle& user,
                      const FeatureBundle& item, std::span<const uint8_t> view_mask,
                      double weight = 1.0);

// Normalized cluster-membership probabilities for one entity. Serves as the
// latent-factor prior mean, so it is always a proper probability vector.
struct TopicComponent {
    std::vector<double> chi;
};

// Multi-view clustering of rated user/item feature bundles, trained by
// collapsed Gibbs sampling over rating-weighted counts.
//
// The same machinery restricted to the item view (via `view_mask`) is the
// vanilla-LDA analog used by the CTR baseline: each positive rating
// occurrence contributes one item-feature document.
class RmModel {
public:
    RmModel(FeatureSchema schema, RmHyperparams hyper, std::vector<uint8_t> view_mask);

    // Uniform-random initial assignment for each event, counts aggregated.
    static RmModel init(FeatureSchema schema, RmHyperparams hyper, std::vector<RmEvent> events,
                        uint64_t seed, std::vector<uint8_t> view_mask = {});

    // p(z = k | counts) for an event's tokens, normalized. Counts are used
    // as-is: when resampling event i the caller must have decremented it.
    std::vector<double> conditional_assignment(const RmEvent& ev) const;

    // One full pass: each event is removed from the counts, resampled from
    // its conditional, and added back. Returns the plug-in log-likelihood of
    // the training events under the post-sweep counts.
    double gibbs_sweep(Rng& rng);

    // Plug-in cluster membership for any bundle of the given view, trained
    // or not ("out-of-sample" entities included).
    TopicComponent topic_component(const FeatureBundle& bundle, View view) const;

    // exp(-mean log p(f_i)) over the given events.
    double perplexity(std::span<const RmEvent> events) const;
    double log_likelihood(std::span<const RmEvent> events) const;

    // count accessors
    int k() const { return hyper_.k; }
    double total_mass() const { return total_mass_; }
    const std::vector<double>& cluster_mass() const { return cluster_mass_; }
    // K x V_x row-major slab for feature x
    const std::vector<double>& value_mass(int feature) const { return value_mass_[feature]; }
    const std::vector<int>& assignments() const { return assignments_; }
    const std::vector<RmEvent>& events() const { return events_; }
    const FeatureSchema& schema() const { return schema_; }
    const RmHyperparams& hyper() const { return hyper_; }
    const std::vector<uint8_t>& view_mask() const { return view_mask_; }

    // exposed for the sweep and for exact-posterior tests
    void decrement_event(int i);
    void increment_event(int i, int cluster);

    // true iff counts equal the aggregation of assignments within tol
    bool counts_consistent(double tol = 1e-9) const;

    // test hook: overwrite counts (label-permutation properties etc.)
    void set_counts(std::vector<double> cluster_mass, std::vector<std::vector<double>> value_mass);

    std::string to_json_string() const;
    static RmModel from_json_string(const std::string& text, const FeatureSchema& schema);

private:
    FeatureSchema schema_;
    RmHyperparams hyper_;
    std::vector<uint8_t> view_mask_;  // per feature: participates in the model?
    std::vector<RmEvent> events_;
    std::vector<int> assignments_;
    std::vector<double> cluster_mass_;             // n_k
    std::vector<std::vector<double>> value_mass_;  // per feature: K x V_x
    double total_mass_ = 0.0;

    // log E[theta_k] + sum of log E[phi] factors for the tokens
    double log_plugin_score(int k, std::span<const std::pair<int, int>> tokens) const;
};

struct RmTrainResult {
    RmModel model;
    // (iteration, perplexity) pairs; iteration 0 is the initialized model
    std::vector<std::pair<int, double>> perplexity_trace;
};

RmTrainResult train_rm(FeatureSchema schema, RmHyperparams hyper, std::vector<RmEvent> events,
                       int iterations, uint64_t seed, std::vector<uint8_t> view_mask = {},
                       int perplexity_every = 10);

// Full-view mask (all features) and single-view mask helpers.
std::vector<uint8_t> full_view_mask(const FeatureSchema& schema);
std::vector<uint8_t> single_view_mask(const FeatureSchema& schema, View view);

}  // namespace mvictr
