#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvictr/common.hpp"

namespace mvictr {

enum class View { user, item };

std::string view_name(View v);
View view_from_name(const std::string& s);

// One (user, item, rating) record; the atom of both training and replay.
// reward is the binarized rating: 1 iff raw_rating >= 4.
struct InteractionEvent {
    int user_id = 0;
    int item_id = 0;
    int raw_rating = 0;
    int reward = 0;
    int64_t timestamp = 0;
};

struct FeatureDef {
    std::string name;
    View view = View::user;
    std::vector<std::string> vocabulary;
    bool multi_valued = false;

    int vocab_size() const { return static_cast<int>(vocabulary.size()); }
    int value_index(const std::string& label) const;  // -1 if absent
};

// Ordered feature ontologies for both views. User features come first, so a
// feature's position in `features` is its global index used throughout the
// clustering model.
struct FeatureSchema {
    std::vector<FeatureDef> features;

    int feature_count() const { return static_cast<int>(features.size()); }
    std::vector<int> view_features(View v) const;
    int feature_index(const std::string& name) const;  // -1 if absent
    void validate() const;
    uint64_t content_hash() const;
};

// Per-feature value indices for one entity, aligned with the schema features
// of the entity's view (single-valued features carry exactly one index).
struct FeatureBundle {
    int entity_id = 0;
    View view = View::user;
    std::vector<std::vector<int>> values;

    void validate(const FeatureSchema& schema) const;
};

struct SplitStats {
    int64_t n_train = 0;
    int64_t n_test = 0;
    double cold_start_fraction = 0.0;
    int64_t n_items = 0;
    int64_t n_users = 0;
};

// --- MovieLens 100K ingestion -------------------------------------------

// u.data: user \t item \t rating \t timestamp
std::vector<InteractionEvent> parse_ratings(const std::string& raw_text);

struct UserTable {
    std::vector<FeatureDef> features;  // gender, occupation, age_decade
    std::map<int, FeatureBundle> bundles;
};
struct ItemTable {
    std::vector<FeatureDef> features;  // release_decade, genre (multi-valued)
    std::map<int, FeatureBundle> bundles;
};

// u.user: id|age|gender|occupation|zip
UserTable parse_users(const std::string& raw_text);
// u.item: id|title|release_date|video_date|url|19 genre flags
ItemTable parse_items(const std::string& raw_text);

FeatureSchema combine_schema(const UserTable& users, const ItemTable& items);

struct MovieLensDataset {
    FeatureSchema schema;
    std::map<int, FeatureBundle> user_bundles;
    std::map<int, FeatureBundle> item_bundles;
    std::vector<InteractionEvent> events;
};

MovieLensDataset load_movielens(const std::string& dir);

// --- Transformations ------------------------------------------------------

// Ids of the n most-rated items (ties broken by smaller item id).
std::vector<int> top_items(const std::vector<InteractionEvent>& events, int n);

// Keep only events whose item is among the n most-rated; order preserved.
std::vector<InteractionEvent> filter_top_items(const std::vector<InteractionEvent>& events,
                                               int n);

// Sort by (timestamp, user_id, item_id); first floor(fraction*N) events are
// the training half.
std::pair<std::vector<InteractionEvent>, std::vector<InteractionEvent>>
chronological_split(std::vector<InteractionEvent> events, double fraction);

// An event is cold-start iff its user or item never appears in train.
SplitStats cold_start_stats(const std::vector<InteractionEvent>& train,
                            const std::vector<InteractionEvent>& test);

// --- Artifact IO -----------------------------------------------------------

// Provenance block embedded in every artifact: the fully resolved config and
// content hashes of the inputs the producing stage consumed.
struct Provenance {
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> input_hashes;
};

void write_events_csv(const std::string& path, const std::vector<InteractionEvent>& train,
                      const std::vector<InteractionEvent>& test, const Provenance& prov);
// -> (train, test)
std::pair<std::vector<InteractionEvent>, std::vector<InteractionEvent>> read_events_csv(
    const std::string& path);

void write_schema_json(const std::string& path, const FeatureSchema& schema,
                       const Provenance& prov);
FeatureSchema read_schema_json(const std::string& path);

void write_bundles_csv(const std::string& path, const FeatureSchema& schema,
                       const std::map<int, FeatureBundle>& users,
                       const std::map<int, FeatureBundle>& items, const Provenance& prov);
std::pair<std::map<int, FeatureBundle>, std::map<int, FeatureBundle>> read_bundles_csv(
    const std::string& path, const FeatureSchema& schema);

}  // namespace mvictr
