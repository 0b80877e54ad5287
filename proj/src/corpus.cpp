#include "logicere/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "logicere/rng.hpp"

namespace logicere {

using nlohmann::ordered_json;

const Event* Document::find_event(const std::string& id) const {
    for (const auto& e : events) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

std::vector<std::string> validate_document(const Document& doc) {
    std::vector<std::string> out;
    if (doc.doc_id.empty()) out.push_back("empty doc_id");

    std::set<std::string> ids;
    for (const auto& e : doc.events) {
        if (e.id.empty()) out.push_back("event with empty id");
        if (!ids.insert(e.id).second) out.push_back("duplicate event id '" + e.id + "'");
        if (e.start >= e.end) {
            out.push_back("empty span for event '" + e.id + "' (" + std::to_string(e.start) + "," +
                          std::to_string(e.end) + ")");
        } else if (e.end > doc.tokens.size()) {
            out.push_back("span of event '" + e.id + "' exceeds document length");
        }
    }

    std::set<std::string> clustered;
    bool overlap = false;
    for (const auto& cluster : doc.coref_clusters) {
        for (const auto& id : cluster) {
            if (!ids.count(id)) out.push_back("coref cluster references unknown event '" + id + "'");
            if (!clustered.insert(id).second) overlap = true;
        }
    }
    if (overlap) out.push_back("clusters not disjoint");

    for (const auto& [pair, label] : doc.gold) {
        const auto& [a, b] = pair;
        if (!ids.count(a) || !ids.count(b)) {
            out.push_back("gold references unknown event in (" + a + "," + b + ")");
            continue;
        }
        if (a == b) out.push_back("gold pair relates event '" + a + "' to itself");
        auto it = doc.gold.find({b, a});
        if (it != doc.gold.end() && it->second != reverse(label)) {
            out.push_back("reversal inconsistency for (" + a + "," + b + ")");
        }
    }
    return out;
}

void materialize_reverse_gold(Document& doc) {
    std::vector<std::pair<EventPair, RelationLabel>> missing;
    for (const auto& [pair, label] : doc.gold) {
        auto it = doc.gold.find({pair.second, pair.first});
        if (it == doc.gold.end()) {
            missing.push_back({{pair.second, pair.first}, reverse(label)});
        } else if (it->second != reverse(label)) {
            throw std::invalid_argument("reversal inconsistency for (" + pair.first + "," +
                                        pair.second + "): " + std::string(label_name(label)) +
                                        " vs " + std::string(label_name(it->second)));
        }
    }
    for (auto& [pair, label] : missing) doc.gold.emplace(pair, label);
}

namespace {

void reject_unknown(const ordered_json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw DataError(where + ": unknown field '" + key + "'");
        }
    }
}

template <typename T>
T field(const ordered_json& obj, const char* name, const std::string& where) {
    if (!obj.contains(name)) throw DataError(where + ": missing field '" + name + "'");
    try {
        return obj.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(where + ": field '" + name + "' has the wrong type");
    }
}

std::string surface_of(const std::vector<std::string>& tokens, std::size_t s, std::size_t e) {
    std::string out;
    for (std::size_t i = s; i < e && i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        ++lineno;
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) f(line, lineno);
        pos = nl + 1;
    }
}

}  // namespace

Document parse_document_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("document must be a JSON object");
    Document doc;
    doc.doc_id = field<std::string>(j, "doc_id", "document");
    const std::string where = "document '" + doc.doc_id + "'";
    reject_unknown(j, {"doc_id", "tokens", "events", "coref_clusters", "gold"}, where);
    doc.tokens = field<std::vector<std::string>>(j, "tokens", where);

    const auto& events = j.contains("events") ? j["events"] : ordered_json();
    if (!events.is_array()) throw DataError(where + ": field 'events' must be an array");
    for (const auto& ev : events) {
        if (!ev.is_object()) throw DataError(where + ": event must be an object");
        reject_unknown(ev, {"id", "start", "end"}, where + " event");
        Event e;
        e.id = field<std::string>(ev, "id", where + " event");
        auto start = field<long long>(ev, "start", where + " event '" + e.id + "'");
        auto end = field<long long>(ev, "end", where + " event '" + e.id + "'");
        if (start < 0 || end < 0) throw DataError(where + ": negative span for event '" + e.id + "'");
        e.start = static_cast<std::size_t>(start);
        e.end = static_cast<std::size_t>(end);
        e.surface = surface_of(doc.tokens, e.start, e.end);
        doc.events.push_back(std::move(e));
    }

    if (j.contains("coref_clusters")) {
        doc.coref_clusters = field<std::vector<std::vector<std::string>>>(j, "coref_clusters", where);
    }

    if (j.contains("gold")) {
        if (!j["gold"].is_array()) throw DataError(where + ": field 'gold' must be an array");
        for (const auto& g : j["gold"]) {
            if (!g.is_object()) throw DataError(where + ": gold entry must be an object");
            reject_unknown(g, {"e1", "e2", "label"}, where + " gold");
            auto e1 = field<std::string>(g, "e1", where + " gold");
            auto e2 = field<std::string>(g, "e2", where + " gold");
            auto name = field<std::string>(g, "label", where + " gold");
            auto label = try_parse_label(name);
            if (!label) throw DataError(where + ": unknown label '" + name + "'");
            auto [it, inserted] = doc.gold.emplace(EventPair{e1, e2}, *label);
            if (!inserted && it->second != *label) {
                throw DataError(where + ": conflicting gold labels for (" + e1 + "," + e2 + ")");
            }
        }
    }
    try {
        materialize_reverse_gold(doc);
    } catch (const std::invalid_argument& e) {
        throw DataError(where + ": " + e.what());
    }

    auto violations = validate_document(doc);
    if (!violations.empty()) throw DataError(where + ": " + violations.front());
    return doc;
}

std::string document_to_line(const Document& doc) {
    ordered_json j;
    j["doc_id"] = doc.doc_id;
    j["tokens"] = doc.tokens;
    auto events = ordered_json::array();
    for (const auto& e : doc.events) events.push_back({{"id", e.id}, {"start", e.start}, {"end", e.end}});
    j["events"] = events;
    j["coref_clusters"] = doc.coref_clusters;
    auto gold = ordered_json::array();
    for (const auto& [pair, label] : doc.gold) {
        if (pair.first < pair.second) {
            gold.push_back({{"e1", pair.first}, {"e2", pair.second}, {"label", label_name(label)}});
        }
    }
    j["gold"] = gold;
    return j.dump();
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.documents) out += document_to_line(d) + "\n";
    return out;
}

Corpus corpus_from_jsonl(std::string_view text) {
    Corpus c;
    std::set<std::string> seen;
    for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        Document d;
        try {
            d = parse_document_line(line);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(d.doc_id).second) {
            throw DataError("line " + std::to_string(lineno) + ": duplicate doc_id '" + d.doc_id + "'");
        }
        c.documents.push_back(std::move(d));
    });
    return c;
}

Corpus load_corpus(const std::filesystem::path& path) {
    try {
        return corpus_from_jsonl(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
    write_file(path, corpus_to_jsonl(corpus));
}

void write_features(const std::filesystem::path& path, const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.documents) {
        auto it = corpus.features.find(d.doc_id);
        if (it == corpus.features.end()) continue;
        ordered_json j;
        j["doc_id"] = d.doc_id;
        j["features"] = ordered_json::object();
        for (const auto& [id, v] : it->second) j["features"][id] = v;
        out += j.dump() + "\n";
    }
    write_file(path, out);
}

void load_features(const std::filesystem::path& path, Corpus& corpus) {
    std::set<std::string> wanted;
    for (const auto& d : corpus.documents) wanted.insert(d.doc_id);
    for_each_line(read_file(path), [&](std::string_view line, std::size_t lineno) {
        const std::string where = path.string() + " line " + std::to_string(lineno);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(where + ": malformed JSON");
        }
        reject_unknown(j, {"doc_id", "features"}, where);
        auto doc_id = field<std::string>(j, "doc_id", where);
        if (!wanted.count(doc_id)) return;
        FeatureTable table;
        for (const auto& [id, v] : j.at("features").items()) {
            table[id] = v.get<std::vector<double>>();
        }
        corpus.features[doc_id] = std::move(table);
    });
}

void SyntheticWorldConfig::validate() const {
    auto rate = [](double r, const char* name) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw std::invalid_argument(std::string("synthetic config: ") + name + " must lie in [0,1]");
        }
    };
    rate(coref_rate, "coref_rate");
    rate(containment_rate, "containment_rate");
    rate(vague_rate, "vague_rate");
    rate(equal_rate, "equal_rate");
    if (docs == 0) throw std::invalid_argument("synthetic config: docs must be positive");
    if (events_min == 0 || events_max < events_min) {
        throw std::invalid_argument("synthetic config: events range must be positive and ordered");
    }
    if (feature_dim < 6) throw std::invalid_argument("synthetic config: feature_dim must be >= 6");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("synthetic config: noise_std must be >= 0");
}

namespace {

struct Latent {
    double start = 0.0;
    double end = 0.0;
    int parent = -1;
    int depth = 0;
};

constexpr int kMaxDepth = 3;

bool is_ancestor(const std::vector<Latent>& w, int a, int b) {
    for (int p = w[b].parent; p >= 0; p = w[p].parent) {
        if (p == a) return true;
    }
    return false;
}

RelationLabel world_label(const std::vector<Latent>& w, int a, int b) {
    if (a == b) return RelationLabel::Coref;
    if (is_ancestor(w, a, b)) return RelationLabel::ParentChild;
    if (is_ancestor(w, b, a)) return RelationLabel::ChildParent;
    // Temporal order is only asserted among events sharing a parent.
    if (w[a].parent != w[b].parent) return RelationLabel::NoRel;
    if (w[a].start == w[b].start && w[a].end == w[b].end) return RelationLabel::Equal;
    if (w[a].end < w[b].start) return RelationLabel::Before;
    if (w[b].end < w[a].start) return RelationLabel::After;
    return RelationLabel::NoRel;
}

// Interval for a new event under `parent` (or at top level), possibly copying a sibling.
void place(std::vector<Latent>& w, Latent& fresh, std::mt19937_64& eng, double equal_rate) {
    std::vector<int> siblings;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
        if (w[i].parent == fresh.parent) siblings.push_back(i);
    }
    if (!siblings.empty() && uniform(eng) < equal_rate) {
        const auto& s = w[siblings[uniform_int(eng, 0, static_cast<std::int64_t>(siblings.size()) - 1)]];
        fresh.start = s.start;
        fresh.end = s.end;
        return;
    }
    if (fresh.parent < 0) {
        const double len = uniform(eng, 2.0, 8.0);
        fresh.start = uniform(eng, 0.0, kTimeline - len);
        fresh.end = fresh.start + len;
        return;
    }
    const auto& p = w[fresh.parent];
    const double span = p.end - p.start;
    const double len = span * uniform(eng, 0.1, 0.35);
    const double margin = 0.05 * span;
    fresh.start = uniform(eng, p.start + margin, p.end - margin - len);
    fresh.end = fresh.start + len;
}

double hash_bit(std::uint64_t key, std::uint64_t id, std::size_t bit) {
    return ((derive_key(key, id) >> bit) & 1u) ? 1.0 : -1.0;
}

}  // namespace

Document generate_document(const SyntheticWorldConfig& cfg, std::size_t index,
                           const ConjunctionTable& table, FeatureTable* features) {
    const std::uint64_t doc_key = derive_key(cfg.seed, index);
    auto eng = make_engine(doc_key);
    const auto k = static_cast<std::size_t>(uniform_int(
        eng, static_cast<std::int64_t>(cfg.events_min), static_cast<std::int64_t>(cfg.events_max)));

    std::vector<Latent> world;
    std::vector<int> mention_of;  // mention index -> latent index
    for (std::size_t m = 0; m < k; ++m) {
        if (m > 0 && uniform(eng) < cfg.coref_rate) {
            mention_of.push_back(mention_of[uniform_int(eng, 0, static_cast<std::int64_t>(m) - 1)]);
            continue;
        }
        Latent fresh;
        std::vector<int> hosts;
        for (int i = 0; i < static_cast<int>(world.size()); ++i) {
            if (world[i].depth < kMaxDepth) hosts.push_back(i);
        }
        if (!hosts.empty() && uniform(eng) < cfg.containment_rate) {
            fresh.parent = hosts[uniform_int(eng, 0, static_cast<std::int64_t>(hosts.size()) - 1)];
            fresh.depth = world[fresh.parent].depth + 1;
        }
        place(world, fresh, eng, cfg.equal_rate);
        world.push_back(fresh);
        mention_of.push_back(static_cast<int>(world.size()) - 1);
    }

    // Mention-level label matrix.
    std::vector<RelationLabel> lab(k * k, RelationLabel::NoRel);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) lab[i * k + j] = world_label(world, mention_of[i], mention_of[j]);

    // A triple is consistent when the (x,z) label lies in De((x,y),(y,z)).
    auto ok = [&](std::size_t x, std::size_t y, std::size_t z) {
        return deduction_set(table, lab[x * k + y], lab[y * k + z]).contains(lab[x * k + z]);
    };

    // Discard order information for sampled latent pairs. A pair becomes VAGUE only if no
    // triple through any of its mention pairs is broken by the change.
    const std::size_t n_lat = world.size();
    for (std::size_t a = 0; a < n_lat; ++a) {
        for (std::size_t b = a + 1; b < n_lat; ++b) {
            const auto base = world_label(world, static_cast<int>(a), static_cast<int>(b));
            if (base != RelationLabel::Before && base != RelationLabel::After &&
                base != RelationLabel::Equal) {
                continue;
            }
            if (uniform(eng) >= cfg.vague_rate) continue;
            std::vector<std::pair<std::size_t, std::size_t>> touched;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    if ((mention_of[i] == static_cast<int>(a) && mention_of[j] == static_cast<int>(b)) ||
                        (mention_of[i] == static_cast<int>(b) && mention_of[j] == static_cast<int>(a)))
                        touched.push_back({i, j});
            std::vector<RelationLabel> saved;
            for (auto [i, j] : touched) {
                saved.push_back(lab[i * k + j]);
                lab[i * k + j] = RelationLabel::Vague;
            }
            bool consistent = true;
            for (auto [x, y] : touched) {
                for (std::size_t z = 0; z < k && consistent; ++z) {
                    if (z == x || z == y) continue;
                    consistent = ok(x, y, z) && ok(z, x, y) && ok(x, z, y);
                }
                if (!consistent) break;
            }
            if (!consistent) {
                for (std::size_t t = 0; t < touched.size(); ++t) {
                    lab[touched[t].first * k + touched[t].second] = saved[t];
                }
            }
        }
    }

    Document doc;
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth-%zu-%05zu", static_cast<std::size_t>(cfg.seed), index);
    doc.doc_id = buf;
    const int width = std::max(2, static_cast<int>(std::to_string(cfg.events_max).size()));
    std::vector<std::string> ids(k);
    for (std::size_t m = 0; m < k; ++m) {
        std::string num = std::to_string(m);
        ids[m] = "e" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(num.size(), width), '0') + num;
        const auto fillers = uniform_int(eng, 1, 3);
        for (std::int64_t f = 0; f < fillers; ++f) doc.tokens.push_back("w");
        Event e;
        e.id = ids[m];
        e.start = doc.tokens.size();
        doc.tokens.push_back("event" + std::to_string(mention_of[m]));
        e.end = doc.tokens.size();
        e.surface = doc.tokens.back();
        doc.events.push_back(std::move(e));
    }
    doc.tokens.push_back(".");

    for (std::size_t l = 0; l < n_lat; ++l) {
        std::vector<std::string> cluster;
        for (std::size_t m = 0; m < k; ++m)
            if (mention_of[m] == static_cast<int>(l)) cluster.push_back(ids[m]);
        if (cluster.size() > 1) doc.coref_clusters.push_back(std::move(cluster));
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) doc.gold[{ids[i], ids[j]}] = lab[i * k + j];

    if (features) {
        const std::uint64_t hash_key = derive_key(doc_key, 0xFEA7u);
        auto noise_eng = make_engine(derive_key(doc_key, 0x0153u));
        for (std::size_t m = 0; m < k; ++m) {
            const auto& lat = world[mention_of[m]];
            std::vector<double> f(cfg.feature_dim, 0.0);
            f[0] = lat.start / kTimeline;
            f[1] = lat.end / kTimeline;
            f[2] = static_cast<double>(lat.depth) / 4.0;
            for (std::size_t b = 0; b < 3; ++b) {
                f[3 + b] = lat.parent < 0 ? 0.0
                                          : hash_bit(hash_key, static_cast<std::uint64_t>(lat.parent), b);
            }
            for (std::size_t d = 6; d < cfg.feature_dim; ++d) {
                f[d] = hash_bit(hash_key, static_cast<std::uint64_t>(mention_of[m]), d - 6);
            }
            for (auto& v : f) v += cfg.noise_std * standard_normal(noise_eng);
            (*features)[ids[m]] = std::move(f);
        }
    }
    return doc;
}

Corpus generate_synthetic(const SyntheticWorldConfig& cfg, const ConjunctionTable& table) {
    cfg.validate();
    Corpus c;
    c.documents.resize(cfg.docs);
    std::vector<FeatureTable> feats(cfg.docs);
    const auto n = static_cast<std::ptrdiff_t>(cfg.docs);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        c.documents[i] = generate_document(cfg, static_cast<std::size_t>(i), table, &feats[i]);
    }
    for (std::size_t i = 0; i < cfg.docs; ++i) c.features[c.documents[i].doc_id] = std::move(feats[i]);
    return c;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios r) {
    const std::array<double, 3> ratios{r.train, r.dev, r.test};
    double total = 0.0;
    for (double x : ratios) {
        if (!(x >= 0.0)) throw std::invalid_argument("split: ratios must be non-negative");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split: ratios must sum to 1");
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double q = ratios[i] * static_cast<double>(n);
        // Guard against 0.1 * 10 landing a hair under 1.
        const double fl = std::floor(q + 1e-9);
        sizes[i] = static_cast<std::size_t>(fl);
        rem[i] = q - fl;
        assigned += sizes[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (std::size_t t = 0; assigned < n; ++t, ++assigned) ++sizes[order[t % 3]];
    return sizes;
}

CorpusSplit split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
    const std::size_t n = corpus.documents.size();
    const bool all_positive = ratios.train > 0 && ratios.dev > 0 && ratios.test > 0;
    if (all_positive && n < 3) {
        throw std::invalid_argument("split: need at least 3 documents for three non-empty parts");
    }
    auto sizes = split_sizes(n, ratios);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto eng = make_engine(derive_key(seed, 0x5B117u));
    for (std::size_t i = n; i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_int(eng, 0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    CorpusSplit out;
    std::array<Corpus*, 3> parts{&out.train, &out.dev, &out.test};
    std::size_t pos = 0;
    for (int p = 0; p < 3; ++p) {
        std::vector<std::size_t> idx(order.begin() + pos, order.begin() + pos + sizes[p]);
        std::sort(idx.begin(), idx.end());
        for (auto i : idx) {
            const auto& d = corpus.documents[i];
            parts[p]->documents.push_back(d);
            auto f = corpus.features.find(d.doc_id);
            if (f != corpus.features.end()) parts[p]->features[d.doc_id] = f->second;
        }
        pos += sizes[p];
    }
    return out;
}

}  // namespace logicere
