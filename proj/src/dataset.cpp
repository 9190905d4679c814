#include "mvictr/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace mvictr {

using nlohmann::json;

// --- common.hpp helpers (small enough to live here) -------------------------

std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.emplace_back(line);
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        size_t end = line.find(sep, start);
        if (end == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, end - start));
        start = end + 1;
    }
}

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- views ------------------------------------------------------------------

std::string view_name(View v) { return v == View::user ? "user" : "item"; }

View view_from_name(const std::string& s) {
    if (s == "user") return View::user;
    if (s == "item") return View::item;
    throw ValidationError("unknown view: " + s);
}

// --- schema -----------------------------------------------------------------

int FeatureDef::value_index(const std::string& label) const {
    for (size_t i = 0; i < vocabulary.size(); ++i)
        if (vocabulary[i] == label) return static_cast<int>(i);
    return -1;
}

std::vector<int> FeatureSchema::view_features(View v) const {
    std::vector<int> out;
    for (int x = 0; x < feature_count(); ++x)
        if (features[x].view == v) out.push_back(x);
    return out;
}

int FeatureSchema::feature_index(const std::string& name) const {
    for (int x = 0; x < feature_count(); ++x)
        if (features[x].name == name) return x;
    return -1;
}

void FeatureSchema::validate() const {
    std::set<std::string> names;
    bool has_user = false, has_item = false;
    for (const auto& f : features) {
        if (f.vocabulary.empty())
            throw ValidationError("feature '" + f.name + "' has empty vocabulary");
        if (!names.insert(f.name).second)
            throw ValidationError("duplicate feature name: " + f.name);
        (f.view == View::user ? has_user : has_item) = true;
    }
    if (!has_user || !has_item)
        throw ValidationError("schema must contain at least one feature per view");
}

uint64_t FeatureSchema::content_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : features) {
        h = fnv1a64(f.name, h);
        h = fnv1a64(view_name(f.view), h);
        h = fnv1a64(f.multi_valued ? "m" : "s", h);
        for (const auto& v : f.vocabulary) h = fnv1a64(v + "\x1f", h);
    }
    return h;
}

void FeatureBundle::validate(const FeatureSchema& schema) const {
    auto idx = schema.view_features(view);
    if (values.size() != idx.size())
        throw ValidationError("bundle for entity " + std::to_string(entity_id) +
                              " has wrong feature count");
    for (size_t j = 0; j < idx.size(); ++j) {
        const FeatureDef& f = schema.features[idx[j]];
        if (!f.multi_valued && values[j].size() != 1)
            throw ValidationError("feature '" + f.name + "' must have exactly one value");
        if (f.multi_valued && values[j].empty())
            throw ValidationError("feature '" + f.name + "' must have at least one value");
        for (int v : values[j])
            if (v < 0 || v >= f.vocab_size())
                throw ValidationError("value index out of range for feature '" + f.name + "'");
    }
}

// --- parsing ----------------------------------------------------------------

namespace {

int parse_int(std::string_view s, const char* what, size_t line_no) {
    int value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                              " '" + std::string(s) + "'");
    return value;
}

int64_t parse_int64(std::string_view s, const char* what, size_t line_no) {
    int64_t value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                              " '" + std::string(s) + "'");
    return value;
}

}  // namespace

std::vector<InteractionEvent> parse_ratings(const std::string& raw_text) {
    std::vector<InteractionEvent> events;
    auto lines = split_lines(raw_text);
    events.reserve(lines.size());
    for (size_t n = 0; n < lines.size(); ++n) {
        auto fields = split(lines[n], '\t');
        if (fields.size() != 4)
            throw ValidationError("line " + std::to_string(n + 1) +
                                  ": expected 4 tab-separated fields, got " +
                                  std::to_string(fields.size()));
        InteractionEvent e;
        e.user_id = parse_int(fields[0], "user id", n + 1);
        e.item_id = parse_int(fields[1], "item id", n + 1);
        e.raw_rating = parse_int(fields[2], "rating", n + 1);
        e.timestamp = parse_int64(fields[3], "timestamp", n + 1);
        if (e.raw_rating < 1 || e.raw_rating > 5)
            throw ValidationError("line " + std::to_string(n + 1) + ": rating " +
                                  std::to_string(e.raw_rating) + " outside 1..5");
        if (e.timestamp <= 0)
            throw ValidationError("line " + std::to_string(n + 1) + ": non-positive timestamp");
        e.reward = e.raw_rating >= 4 ? 1 : 0;
        events.push_back(e);
    }
    return events;
}

namespace {

// age in years -> decade, rounded half away from zero
int age_decade(int age) { return static_cast<int>(std::lround(age / 10.0)); }

const std::array<const char*, 19> kGenreLabels = {
    "unknown",  "Action",    "Adventure", "Animation", "Children's", "Comedy",  "Crime",
    "Documentary", "Drama",  "Fantasy",   "Film-Noir", "Horror",     "Musical", "Mystery",
    "Romance",  "Sci-Fi",    "Thriller",  "War",       "Western"};

// release date "DD-Mon-YYYY" -> year; empty/invalid -> nullopt
std::optional<int> release_year(const std::string& date) {
    if (date.empty()) return std::nullopt;
    auto parts = split(date, '-');
    if (parts.size() != 3) return std::nullopt;
    const std::string& y = parts[2];
    if (y.size() != 4) return std::nullopt;
    int year = 0;
    auto [p, ec] = std::from_chars(y.data(), y.data() + y.size(), year);
    if (ec != std::errc() || p != y.data() + y.size()) return std::nullopt;
    return year;
}

}  // namespace

UserTable parse_users(const std::string& raw_text) {
    struct RawUser {
        int id;
        std::string gender, occupation;
        int decade;
    };
    std::vector<RawUser> raw;
    auto lines = split_lines(raw_text);
    std::set<std::string> genders, occupations;
    std::set<int> decades;
    for (size_t n = 0; n < lines.size(); ++n) {
        auto fields = split(lines[n], '|');
        if (fields.size() < 4)
            throw ValidationError("u.user line " + std::to_string(n + 1) + ": expected >=4 fields");
        RawUser u;
        u.id = parse_int(fields[0], "user id", n + 1);
        int age = parse_int(fields[1], "age", n + 1);
        u.gender = trim(fields[2]);
        u.occupation = trim(fields[3]);
        if (u.gender.empty() || u.occupation.empty())
            throw ValidationError("u.user line " + std::to_string(n + 1) + ": empty field");
        u.decade = age_decade(age);
        genders.insert(u.gender);
        occupations.insert(u.occupation);
        decades.insert(u.decade);
        raw.push_back(std::move(u));
    }

    UserTable table;
    FeatureDef gender{"gender", View::user, {genders.begin(), genders.end()}, false};
    FeatureDef occupation{"occupation", View::user, {occupations.begin(), occupations.end()}, false};
    FeatureDef decade{"age_decade", View::user, {}, false};
    for (int d : decades) decade.vocabulary.push_back(std::to_string(d));
    table.features = {gender, occupation, decade};

    for (const auto& u : raw) {
        FeatureBundle b;
        b.entity_id = u.id;
        b.view = View::user;
        b.values = {{gender.value_index(u.gender)},
                    {occupation.value_index(u.occupation)},
                    {decade.value_index(std::to_string(u.decade))}};
        table.bundles[u.id] = std::move(b);
    }
    return table;
}

ItemTable parse_items(const std::string& raw_text) {
    struct RawItem {
        int id;
        std::optional<int> year;
        std::vector<int> genres;
    };
    std::vector<RawItem> raw;
    auto lines = split_lines(raw_text);
    std::set<int> decades;
    bool any_unknown_decade = false;
    for (size_t n = 0; n < lines.size(); ++n) {
        auto fields = split(lines[n], '|');
        if (fields.size() != 24)
            throw ValidationError("u.item line " + std::to_string(n + 1) +
                                  ": expected 24 pipe-separated fields, got " +
                                  std::to_string(fields.size()));
        RawItem it;
        it.id = parse_int(fields[0], "item id", n + 1);
        it.year = release_year(trim(fields[2]));
        for (int g = 0; g < 19; ++g) {
            const std::string flag = trim(fields[5 + g]);
            if (flag == "1")
                it.genres.push_back(g);
            else if (flag != "0")
                throw ValidationError("u.item line " + std::to_string(n + 1) +
                                      ": genre flag must be 0 or 1");
        }
        if (it.genres.empty())
            throw ValidationError("u.item line " + std::to_string(n + 1) + ": no genre flags set");
        if (it.year)
            decades.insert(*it.year / 10 * 10);
        else
            any_unknown_decade = true;
        raw.push_back(std::move(it));
    }

    ItemTable table;
    FeatureDef decade{"release_decade", View::item, {}, false};
    for (int d : decades) decade.vocabulary.push_back(std::to_string(d));
    if (any_unknown_decade) decade.vocabulary.push_back("unknown");
    FeatureDef genre{"genre", View::item, {kGenreLabels.begin(), kGenreLabels.end()}, true};
    table.features = {decade, genre};

    for (const auto& it : raw) {
        FeatureBundle b;
        b.entity_id = it.id;
        b.view = View::item;
        std::string label = it.year ? std::to_string(*it.year / 10 * 10) : "unknown";
        b.values = {{decade.value_index(label)}, it.genres};
        table.bundles[it.id] = std::move(b);
    }
    return table;
}

FeatureSchema combine_schema(const UserTable& users, const ItemTable& items) {
    FeatureSchema schema;
    schema.features = users.features;
    schema.features.insert(schema.features.end(), items.features.begin(), items.features.end());
    schema.validate();
    return schema;
}

MovieLensDataset load_movielens(const std::string& dir) {
    MovieLensDataset ds;
    UserTable users = parse_users(read_file(dir + "/u.user"));
    ItemTable items = parse_items(read_file(dir + "/u.item"));
    ds.schema = combine_schema(users, items);
    ds.user_bundles = std::move(users.bundles);
    ds.item_bundles = std::move(items.bundles);
    ds.events = parse_ratings(read_file(dir + "/u.data"));
    for (const auto& [id, b] : ds.user_bundles) b.validate(ds.schema);
    for (const auto& [id, b] : ds.item_bundles) b.validate(ds.schema);
    return ds;
}

// --- transformations ---------------------------------------------------------

std::vector<int> top_items(const std::vector<InteractionEvent>& events, int n) {
    if (n < 1) throw ValidationError("top_items: n must be >= 1");
    std::unordered_map<int, int64_t> counts;
    for (const auto& e : events) counts[e.item_id]++;
    std::vector<std::pair<int, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // ties: smaller item id wins
    });
    if (static_cast<size_t>(n) < ranked.size()) ranked.resize(n);
    std::vector<int> ids;
    ids.reserve(ranked.size());
    for (const auto& [id, c] : ranked) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<InteractionEvent> filter_top_items(const std::vector<InteractionEvent>& events,
                                               int n) {
    auto ids = top_items(events, n);
    std::unordered_set<int> keep(ids.begin(), ids.end());
    std::vector<InteractionEvent> out;
    out.reserve(events.size());
    for (const auto& e : events)
        if (keep.count(e.item_id)) out.push_back(e);
    return out;
}

std::pair<std::vector<InteractionEvent>, std::vector<InteractionEvent>>
chronological_split(std::vector<InteractionEvent> events, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValidationError("split fraction must be in (0, 1)");
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.user_id != b.user_id) return a.user_id < b.user_id;
        return a.item_id < b.item_id;
    });
    size_t n_train = static_cast<size_t>(std::floor(fraction * events.size()));
    std::vector<InteractionEvent> train(events.begin(), events.begin() + n_train);
    std::vector<InteractionEvent> test(events.begin() + n_train, events.end());
    return {std::move(train), std::move(test)};
}

SplitStats cold_start_stats(const std::vector<InteractionEvent>& train,
                            const std::vector<InteractionEvent>& test) {
    if (test.empty()) throw ValidationError("cold_start_stats: empty test set");
    std::unordered_set<int> train_users, train_items, users, items;
    for (const auto& e : train) {
        train_users.insert(e.user_id);
        train_items.insert(e.item_id);
        users.insert(e.user_id);
        items.insert(e.item_id);
    }
    int64_t cold = 0;
    for (const auto& e : test) {
        users.insert(e.user_id);
        items.insert(e.item_id);
        if (!train_users.count(e.user_id) || !train_items.count(e.item_id)) ++cold;
    }
    SplitStats s;
    s.n_train = static_cast<int64_t>(train.size());
    s.n_test = static_cast<int64_t>(test.size());
    s.cold_start_fraction = static_cast<double>(cold) / static_cast<double>(test.size());
    s.n_users = static_cast<int64_t>(users.size());
    s.n_items = static_cast<int64_t>(items.size());
    return s;
}

// --- artifact IO --------------------------------------------------------------

namespace {

std::string provenance_comment(const Provenance& prov) {
    std::string out;
    for (const auto& [k, v] : prov.config) out += "# config " + k + "=" + v + "\n";
    for (const auto& [k, v] : prov.input_hashes) out += "# input " + k + " " + v + "\n";
    return out;
}

json provenance_json(const Provenance& prov) {
    json j;
    j["config"] = prov.config;
    j["inputs"] = prov.input_hashes;
    return j;
}

}  // namespace

void write_events_csv(const std::string& path, const std::vector<InteractionEvent>& train,
                      const std::vector<InteractionEvent>& test, const Provenance& prov) {
    std::string out = provenance_comment(prov);
    out += "user_id,item_id,raw_rating,reward,timestamp,split\n";
    auto emit = [&out](const InteractionEvent& e, const char* split) {
        out += std::to_string(e.user_id) + "," + std::to_string(e.item_id) + "," +
               std::to_string(e.raw_rating) + "," + std::to_string(e.reward) + "," +
               std::to_string(e.timestamp) + "," + split + "\n";
    };
    for (const auto& e : train) emit(e, "train");
    for (const auto& e : test) emit(e, "test");
    write_file(path, out);
}

std::pair<std::vector<InteractionEvent>, std::vector<InteractionEvent>> read_events_csv(
    const std::string& path) {
    std::vector<InteractionEvent> train, test;
    auto lines = split_lines(read_file(path));
    bool header_seen = false;
    for (size_t n = 0; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 6)
            throw ValidationError(path + " line " + std::to_string(n + 1) + ": expected 6 columns");
        InteractionEvent e;
        e.user_id = parse_int(f[0], "user id", n + 1);
        e.item_id = parse_int(f[1], "item id", n + 1);
        e.raw_rating = parse_int(f[2], "rating", n + 1);
        e.reward = parse_int(f[3], "reward", n + 1);
        e.timestamp = parse_int64(f[4], "timestamp", n + 1);
        if (f[5] == "train")
            train.push_back(e);
        else if (f[5] == "test")
            test.push_back(e);
        else
            throw ValidationError(path + " line " + std::to_string(n + 1) + ": bad split label");
    }
    return {std::move(train), std::move(test)};
}

void write_schema_json(const std::string& path, const FeatureSchema& schema,
                       const Provenance& prov) {
    json j;
    j["format"] = "mvictr-schema";
    j["version"] = 1;
    json feats = json::array();
    for (const auto& f : schema.features) {
        json jf;
        jf["name"] = f.name;
        jf["view"] = view_name(f.view);
        jf["multi_valued"] = f.multi_valued;
        jf["vocabulary"] = f.vocabulary;
        feats.push_back(jf);
    }
    j["features"] = feats;
    j["schema_hash"] = to_hex(schema.content_hash());
    j["provenance"] = provenance_json(prov);
    write_file(path, j.dump(2) + "\n");
}

FeatureSchema read_schema_json(const std::string& path) {
    json j = json::parse(read_file(path));
    if (j.value("format", "") != "mvictr-schema")
        throw ValidationError(path + ": not a schema file");
    FeatureSchema schema;
    for (const auto& jf : j.at("features")) {
        FeatureDef f;
        f.name = jf.at("name").get<std::string>();
        f.view = view_from_name(jf.at("view").get<std::string>());
        f.multi_valued = jf.at("multi_valued").get<bool>();
        f.vocabulary = jf.at("vocabulary").get<std::vector<std::string>>();
        schema.features.push_back(std::move(f));
    }
    schema.validate();
    return schema;
}

void write_bundles_csv(const std::string& path, const FeatureSchema& schema,
                       const std::map<int, FeatureBundle>& users,
                       const std::map<int, FeatureBundle>& items, const Provenance& prov) {
    std::string out = provenance_comment(prov);
    out += "view,entity_id,feature,value_indices\n";
    auto emit = [&](const std::map<int, FeatureBundle>& bundles, View view) {
        auto feats = schema.view_features(view);
        for (const auto& [id, b] : bundles) {
            for (size_t j = 0; j < feats.size(); ++j) {
                std::string vals;
                for (size_t v = 0; v < b.values[j].size(); ++v) {
                    if (v) vals += ';';
                    vals += std::to_string(b.values[j][v]);
                }
                out += view_name(view) + "," + std::to_string(id) + "," +
                       schema.features[feats[j]].name + "," + vals + "\n";
            }
        }
    };
    emit(users, View::user);
    emit(items, View::item);
    write_file(path, out);
}

std::pair<std::map<int, FeatureBundle>, std::map<int, FeatureBundle>> read_bundles_csv(
    const std::string& path, const FeatureSchema& schema) {
    std::map<int, FeatureBundle> users, items;
    auto user_feats = schema.view_features(View::user);
    auto item_feats = schema.view_features(View::item);
    auto lines = split_lines(read_file(path));
    bool header_seen = false;
    for (size_t n = 0; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 4)
            throw ValidationError(path + " line " + std::to_string(n + 1) + ": expected 4 columns");
        View view = view_from_name(f[0]);
        int id = parse_int(f[1], "entity id", n + 1);
        const auto& feats = view == View::user ? user_feats : item_feats;
        auto& bundles = view == View::user ? users : items;
        auto [it, inserted] = bundles.try_emplace(id);
        if (inserted) {
            it->second.entity_id = id;
            it->second.view = view;
            it->second.values.resize(feats.size());
        }
        int fx = schema.feature_index(f[2]);
        auto pos = std::find(feats.begin(), feats.end(), fx);
        if (fx < 0 || pos == feats.end())
            throw ValidationError(path + " line " + std::to_string(n + 1) + ": unknown feature '" +
                                  f[2] + "'");
        std::vector<int> vals;
        for (const auto& tok : split(f[3], ';')) vals.push_back(parse_int(tok, "value", n + 1));
        it->second.values[pos - feats.begin()] = std::move(vals);
    }
    for (const auto& [id, b] : users) b.validate(schema);
    for (const auto& [id, b] : items) b.validate(schema);
    return {std::move(users), std::move(items)};
}

}  // namespace mvictr
