#include "mvictr/ratingmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace mvictr {

using nlohmann::json;

void RmHyperparams::validate(const FeatureSchema& schema) const {
    if (k < 1) throw ValidationError("K must be >= 1");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (beta.size() != static_cast<size_t>(schema.feature_count()))
        throw ValidationError("beta must have one entry per schema feature");
    for (double b : beta)
        if (!(b > 0.0)) throw ValidationError("beta entries must be positive");
}

std::vector<uint8_t> full_view_mask(const FeatureSchema& schema) {
    return std::vector<uint8_t>(schema.feature_count(), 1);
}

std::vector<uint8_t> single_view_mask(const FeatureSchema& schema, View view) {
    std::vector<uint8_t> mask(schema.feature_count(), 0);
    for (int x : schema.view_features(view)) mask[x] = 1;
    return mask;
}

RmEvent make_rm_event(const FeatureSchema& schema, const FeatureBundle& user,
                      const FeatureBundle& item, std::span<const uint8_t> view_mask,
                      double weight) {
    RmEvent ev;
    ev.weight = weight;
    auto add = [&](const FeatureBundle& b, View view) {
        auto feats = schema.view_features(view);
        for (size_t j = 0; j < feats.size(); ++j) {
            int x = feats[j];
            if (!view_mask.empty() && !view_mask[x]) continue;
            for (int v : b.values[j]) ev.tokens.emplace_back(x, v);
        }
    };
    add(user, View::user);
    add(item, View::item);
    return ev;
}

RmModel::RmModel(FeatureSchema schema, RmHyperparams hyper, std::vector<uint8_t> view_mask)
    : schema_(std::move(schema)), hyper_(std::move(hyper)), view_mask_(std::move(view_mask)) {
    if (view_mask_.empty()) view_mask_ = full_view_mask(schema_);
    hyper_.validate(schema_);
    cluster_mass_.assign(hyper_.k, 0.0);
    value_mass_.resize(schema_.feature_count());
    for (int x = 0; x < schema_.feature_count(); ++x)
        value_mass_[x].assign(static_cast<size_t>(hyper_.k) * schema_.features[x].vocab_size(),
                              0.0);
}

RmModel RmModel::init(FeatureSchema schema, RmHyperparams hyper, std::vector<RmEvent> events,
                      uint64_t seed, std::vector<uint8_t> view_mask) {
    if (events.empty()) throw ValidationError("RmModel::init: no training events");
    RmModel m(std::move(schema), std::move(hyper), std::move(view_mask));
    m.events_ = std::move(events);
    for (const auto& ev : m.events_) {
        if (!(ev.weight >= 0.0)) throw ValidationError("event weight must be >= 0");
        for (auto [x, v] : ev.tokens) {
            if (x < 0 || x >= m.schema_.feature_count() || !m.view_mask_[x])
                throw ValidationError("event token references a feature outside the view mask");
            if (v < 0 || v >= m.schema_.features[x].vocab_size())
                throw ValidationError("event token value out of vocabulary range");
        }
    }
    Rng rng(seed);
    m.assignments_.resize(m.events_.size());
    for (size_t i = 0; i < m.events_.size(); ++i) {
        m.assignments_[i] = static_cast<int>(rng.uniform_index(m.hyper_.k));
        m.increment_event(static_cast<int>(i), m.assignments_[i]);
    }
    return m;
}

void RmModel::decrement_event(int i) {
    const RmEvent& ev = events_[i];
    int k = assignments_[i];
    cluster_mass_[k] -= ev.weight;
    total_mass_ -= ev.weight;
    if (cluster_mass_[k] < -1e-9)
        throw NumericError("count tensor went negative after decrement (cluster mass)");
    for (auto [x, v] : ev.tokens) {
        double& cell = value_mass_[x][static_cast<size_t>(k) * schema_.features[x].vocab_size() + v];
        cell -= ev.weight;
        if (cell < -1e-9)
            throw NumericError("count tensor went negative after decrement (value mass)");
    }
}

void RmModel::increment_event(int i, int cluster) {
    const RmEvent& ev = events_[i];
    assignments_[i] = cluster;
    cluster_mass_[cluster] += ev.weight;
    total_mass_ += ev.weight;
    for (auto [x, v] : ev.tokens)
        value_mass_[x][static_cast<size_t>(cluster) * schema_.features[x].vocab_size() + v] +=
            ev.weight;
}

std::vector<double> RmModel::conditional_assignment(const RmEvent& ev) const {
    const int K = hyper_.k;
    std::vector<double> p(K);
    bool ok = true;
    // Products of a handful of bounded factors; computed in linear space with
    // an exact log-space fallback when they degenerate.
    for (int k = 0; k < K; ++k) {
        double w = cluster_mass_[k] + hyper_.alpha;
        for (auto [x, v] : ev.tokens) {
            const int V = schema_.features[x].vocab_size();
            const double* row = value_mass_[x].data() + static_cast<size_t>(k) * V;
            double denom = hyper_.beta[x] * V;
            for (int u = 0; u < V; ++u) denom += row[u];
            w *= (row[v] + hyper_.beta[x]) / denom;
        }
        if (!std::isfinite(w) || w <= 0.0) ok = false;
        p[k] = w;
    }
    double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!ok || !std::isfinite(total) || total <= 0.0) {
        // log-space fallback, normalized by max-subtraction
        std::vector<double> logp(K);
        for (int k = 0; k < K; ++k) {
            double lw = std::log(cluster_mass_[k] + hyper_.alpha);
            for (auto [x, v] : ev.tokens) {
                const int V = schema_.features[x].vocab_size();
                const double* row = value_mass_[x].data() + static_cast<size_t>(k) * V;
                double denom = hyper_.beta[x] * V;
                for (int u = 0; u < V; ++u) denom += row[u];
                lw += std::log(row[v] + hyper_.beta[x]) - std::log(denom);
            }
            logp[k] = lw;
        }
        double mx = *std::max_element(logp.begin(), logp.end());
        if (!std::isfinite(mx)) throw NumericError("conditional assignment is non-finite");
        total = 0.0;
        for (int k = 0; k < K; ++k) {
            p[k] = std::exp(logp[k] - mx);
            total += p[k];
        }
    }
    for (double& v : p) v /= total;
    return p;
}

double RmModel::gibbs_sweep(Rng& rng) {
    for (size_t i = 0; i < events_.size(); ++i) {
        decrement_event(static_cast<int>(i));
        std::vector<double> p = conditional_assignment(events_[i]);
        int z = rng.categorical(p);
        increment_event(static_cast<int>(i), z);
    }
    return log_likelihood(events_);
}

double RmModel::log_plugin_score(int k, std::span<const std::pair<int, int>> tokens) const {
    // log E[theta_k] with E[theta_k] = (n_k + alpha) / sum_k (n_k + alpha)
    double theta_denom = total_mass_ + hyper_.alpha * hyper_.k;
    double s = std::log(cluster_mass_[k] + hyper_.alpha) - std::log(theta_denom);
    for (auto [x, v] : tokens) {
        const int V = schema_.features[x].vocab_size();
        const double* row = value_mass_[x].data() + static_cast<size_t>(k) * V;
        double denom = hyper_.beta[x] * V;
        for (int u = 0; u < V; ++u) denom += row[u];
        s += std::log(row[v] + hyper_.beta[x]) - std::log(denom);
    }
    return s;
}

TopicComponent RmModel::topic_component(const FeatureBundle& bundle, View view) const {
    bundle.validate(schema_);
    if (bundle.view != view) throw ValidationError("bundle view does not match requested view");
    std::vector<std::pair<int, int>> tokens;
    auto feats = schema_.view_features(view);
    for (size_t j = 0; j < feats.size(); ++j) {
        int x = feats[j];
        if (!view_mask_[x]) continue;
        for (int v : bundle.values[j]) tokens.emplace_back(x, v);
    }
    const int K = hyper_.k;
    std::vector<double> logp(K);
    for (int k = 0; k < K; ++k) logp[k] = log_plugin_score(k, tokens);
    double mx = *std::max_element(logp.begin(), logp.end());
    if (!std::isfinite(mx)) throw NumericError("topic component is non-finite");
    TopicComponent tc;
    tc.chi.resize(K);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        tc.chi[k] = std::exp(logp[k] - mx);
        total += tc.chi[k];
    }
    for (double& v : tc.chi) v /= total;
    return tc;
}

double RmModel::log_likelihood(std::span<const RmEvent> events) const {
    const int K = hyper_.k;
    double ll = 0.0;
    std::vector<double> logp(K);
    for (const auto& ev : events) {
        for (int k = 0; k < K; ++k) logp[k] = log_plugin_score(k, ev.tokens);
        double mx = *std::max_element(logp.begin(), logp.end());
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += std::exp(logp[k] - mx);
        double lp = mx + std::log(s);
        if (!std::isfinite(lp)) throw NumericError("event likelihood is non-finite");
        ll += lp;
    }
    return ll;
}

double RmModel::perplexity(std::span<const RmEvent> events) const {
    if (events.empty()) throw ValidationError("perplexity: no events");
    double ll = log_likelihood(events);
    double px = std::exp(-ll / static_cast<double>(events.size()));
    if (!std::isfinite(px)) throw NumericError("perplexity is non-finite");
    return px;
}

bool RmModel::counts_consistent(double tol) const {
    std::vector<double> cm(hyper_.k, 0.0);
    std::vector<std::vector<double>> vm(value_mass_.size());
    for (size_t x = 0; x < value_mass_.size(); ++x) vm[x].assign(value_mass_[x].size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < events_.size(); ++i) {
        const RmEvent& ev = events_[i];
        int k = assignments_[i];
        cm[k] += ev.weight;
        total += ev.weight;
        for (auto [x, v] : ev.tokens)
            vm[x][static_cast<size_t>(k) * schema_.features[x].vocab_size() + v] += ev.weight;
    }
    if (std::abs(total - total_mass_) > tol) return false;
    for (int k = 0; k < hyper_.k; ++k)
        if (std::abs(cm[k] - cluster_mass_[k]) > tol) return false;
    for (size_t x = 0; x < vm.size(); ++x)
        for (size_t c = 0; c < vm[x].size(); ++c)
            if (std::abs(vm[x][c] - value_mass_[x][c]) > tol) return false;
    return true;
}

void RmModel::set_counts(std::vector<double> cluster_mass,
                         std::vector<std::vector<double>> value_mass) {
    if (cluster_mass.size() != cluster_mass_.size() || value_mass.size() != value_mass_.size())
        throw ValidationError("set_counts: shape mismatch");
    for (size_t x = 0; x < value_mass.size(); ++x)
        if (value_mass[x].size() != value_mass_[x].size())
            throw ValidationError("set_counts: shape mismatch");
    cluster_mass_ = std::move(cluster_mass);
    value_mass_ = std::move(value_mass);
    total_mass_ = std::accumulate(cluster_mass_.begin(), cluster_mass_.end(), 0.0);
}

RmTrainResult train_rm(FeatureSchema schema, RmHyperparams hyper, std::vector<RmEvent> events,
                       int iterations, uint64_t seed, std::vector<uint8_t> view_mask,
                       int perplexity_every) {
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
    if (perplexity_every < 1) throw ValidationError("perplexity interval must be >= 1");
    RmModel model =
        RmModel::init(std::move(schema), std::move(hyper), std::move(events), seed,
                      std::move(view_mask));
    Rng rng(derive_seed(seed, 1));
    RmTrainResult result{std::move(model), {}};
    result.perplexity_trace.emplace_back(0, result.model.perplexity(result.model.events()));
    for (int it = 1; it <= iterations; ++it) {
        result.model.gibbs_sweep(rng);
        if (it % perplexity_every == 0 || it == iterations)
            result.perplexity_trace.emplace_back(it,
                                                 result.model.perplexity(result.model.events()));
    }
    return result;
}

// --- serialization ------------------------------------------------------------

std::string RmModel::to_json_string() const {
    json j;
    j["format"] = "mvictr-rm-model";
    j["version"] = 1;
    j["k"] = hyper_.k;
    j["alpha"] = hyper_.alpha;
    j["beta"] = hyper_.beta;
    j["schema_hash"] = to_hex(schema_.content_hash());
    j["view_mask"] = view_mask_;
    j["cluster_mass"] = cluster_mass_;
    j["value_mass"] = value_mass_;
    j["total_mass"] = total_mass_;
    j["assignments"] = assignments_;
    return j.dump();
}

RmModel RmModel::from_json_string(const std::string& text, const FeatureSchema& schema) {
    json j = json::parse(text);
    if (j.value("format", "") != "mvictr-rm-model")
        throw ValidationError("not an rm model file");
    if (j.value("version", 0) != 1) throw ValidationError("unsupported rm model version");
    if (j.at("schema_hash").get<std::string>() != to_hex(schema.content_hash()))
        throw ValidationError("rm model was trained against a different schema");
    RmHyperparams hyper;
    hyper.k = j.at("k").get<int>();
    hyper.alpha = j.at("alpha").get<double>();
    hyper.beta = j.at("beta").get<std::vector<double>>();
    RmModel m(schema, hyper, j.at("view_mask").get<std::vector<uint8_t>>());
    m.cluster_mass_ = j.at("cluster_mass").get<std::vector<double>>();
    m.value_mass_ = j.at("value_mass").get<std::vector<std::vector<double>>>();
    m.total_mass_ = j.at("total_mass").get<double>();
    m.assignments_ = j.at("assignments").get<std::vector<int>>();
    if (m.cluster_mass_.size() != static_cast<size_t>(hyper.k))
        throw ValidationError("rm model cluster mass has wrong length");
    if (m.value_mass_.size() != static_cast<size_t>(schema.feature_count()))
        throw ValidationError("rm model value mass has wrong feature count");
    for (int x = 0; x < schema.feature_count(); ++x)
        if (m.value_mass_[x].size() !=
            static_cast<size_t>(hyper.k) * schema.features[x].vocab_size())
            throw ValidationError("rm model value mass slab has wrong shape");
    return m;
}

}  // namespace mvictr
