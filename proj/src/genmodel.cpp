#include "mvictr/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvictr {

void SyntheticWorld::validate() const {
    if (k < 1) throw ValidationError("world: K must be >= 1");
    if (theta.size() != static_cast<size_t>(k)) throw ValidationError("world: theta length != K");
    double s = std::accumulate(theta.begin(), theta.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("world: theta does not sum to 1");
    if (phi.size() != static_cast<size_t>(schema.feature_count()))
        throw ValidationError("world: phi must have one slab per feature");
    for (int x = 0; x < schema.feature_count(); ++x) {
        int v = schema.features[x].vocab_size();
        if (phi[x].size() != static_cast<size_t>(k) * v)
            throw ValidationError("world: phi slab has wrong shape");
        for (int c = 0; c < k; ++c) {
            double row = std::accumulate(phi[x].begin() + static_cast<size_t>(c) * v,
                                         phi[x].begin() + static_cast<size_t>(c + 1) * v, 0.0);
            if (std::abs(row - 1.0) > 1e-9)
                throw ValidationError("world: phi row does not sum to 1");
        }
    }
}

namespace {

std::vector<double> dirichlet(Rng& rng, int n, double concentration) {
    std::vector<double> out(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = rng.gamma(concentration);
        total += out[i];
    }
    if (total <= 0.0) throw NumericError("dirichlet draw degenerated");
    for (double& v : out) v /= total;
    return out;
}

}  // namespace

SyntheticWorld sample_world(const FeatureSchema& schema, int k, double alpha,
                            const std::vector<double>& beta, uint64_t seed) {
    if (k < 1) throw ValidationError("sample_world: K must be >= 1");
    if (!(alpha > 0.0)) throw ValidationError("sample_world: alpha must be positive");
    if (beta.size() != static_cast<size_t>(schema.feature_count()))
        throw ValidationError("sample_world: beta must have one entry per feature");
    for (double b : beta)
        if (!(b > 0.0)) throw ValidationError("sample_world: beta entries must be positive");

    Rng rng(seed);
    SyntheticWorld world;
    world.schema = schema;
    world.k = k;
    world.theta = dirichlet(rng, k, alpha);
    world.phi.resize(schema.feature_count());
    for (int x = 0; x < schema.feature_count(); ++x) {
        int v = schema.features[x].vocab_size();
        world.phi[x].resize(static_cast<size_t>(k) * v);
        for (int c = 0; c < k; ++c) {
            auto row = dirichlet(rng, v, beta[x]);
            std::copy(row.begin(), row.end(), world.phi[x].begin() + static_cast<size_t>(c) * v);
        }
    }
    world.validate();
    return world;
}

namespace {

// Draw `count` distinct values from the weights by removal-and-renormalize;
// a cluster-degenerate row falls back to uniform over the unchosen values.
std::vector<int> draw_without_replacement(Rng& rng, const std::vector<double>& weights,
                                          int count) {
    const int v = static_cast<int>(weights.size());
    if (count > v)
        throw ValidationError("multi-valued draw needs vocabulary >= requested value count");
    std::vector<char> taken(v, 0);
    std::vector<int> picked;
    std::vector<double> w(v);
    for (int r = 0; r < count; ++r) {
        double total = 0.0;
        for (int u = 0; u < v; ++u) {
            w[u] = taken[u] ? 0.0 : weights[u];
            total += w[u];
        }
        if (total <= 0.0)
            for (int u = 0; u < v; ++u) w[u] = taken[u] ? 0.0 : 1.0;
        int idx = rng.categorical(w);
        taken[idx] = 1;
        picked.push_back(idx);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace

SyntheticEvents sample_events(const SyntheticWorld& world, int n_events, uint64_t seed,
                              int multi_values) {
    if (n_events < 0) throw ValidationError("sample_events: n_events must be >= 0");
    if (multi_values < 1) throw ValidationError("sample_events: multi_values must be >= 1");
    world.validate();
    Rng rng(seed);
    SyntheticEvents out;
    out.pairs.reserve(n_events);
    out.assignments.reserve(n_events);

    auto user_feats = world.schema.view_features(View::user);
    auto item_feats = world.schema.view_features(View::item);

    for (int i = 0; i < n_events; ++i) {
        int z = rng.categorical(world.theta);
        out.assignments.push_back(z);
        auto draw_bundle = [&](const std::vector<int>& feats, View view) {
            FeatureBundle b;
            b.entity_id = i;
            b.view = view;
            for (int x : feats) {
                const FeatureDef& f = world.schema.features[x];
                int v = f.vocab_size();
                std::vector<double> row(world.phi[x].begin() + static_cast<size_t>(z) * v,
                                        world.phi[x].begin() + static_cast<size_t>(z + 1) * v);
                if (f.multi_valued)
                    b.values.push_back(draw_without_replacement(rng, row, multi_values));
                else
                    b.values.push_back({rng.categorical(row)});
            }
            return b;
        };
        FeatureBundle user = draw_bundle(user_feats, View::user);
        FeatureBundle item = draw_bundle(item_feats, View::item);
        out.pairs.emplace_back(std::move(user), std::move(item));
    }
    return out;
}

double best_permutation_agreement(const std::vector<int>& truth,
                                  const std::vector<int>& predicted, int k) {
    if (truth.size() != predicted.size() || truth.empty())
        throw ValidationError("agreement: label vectors must be non-empty and equal length");
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        size_t hits = 0;
        for (size_t i = 0; i < truth.size(); ++i)
            if (perm[predicted[i]] == truth[i]) ++hits;
        best = std::max(best, static_cast<double>(hits) / truth.size());
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace mvictr
