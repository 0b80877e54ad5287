#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "logicere/labels.hpp"

namespace logicere {

struct Event {
    std::string id;
    std::size_t start = 0;  // inclusive token index
    std::size_t end = 0;    // exclusive
    std::string surface;

    bool operator==(const Event&) const = default;
};

using EventPair = std::pair<std::string, std::string>;

struct Document {
    std::string doc_id;
    std::vector<std::string> tokens;
    std::vector<Event> events;
    std::vector<std::vector<std::string>> coref_clusters;
    /// Ordered pair -> label, holding both directions once loaded.
    std::map<EventPair, RelationLabel> gold;

    const Event* find_event(const std::string& id) const;
    bool operator==(const Document&) const = default;
};

/// Per-event raw feature vectors for one document, keyed by event id.
using FeatureTable = std::map<std::string, std::vector<double>>;

struct Corpus {
    std::vector<Document> documents;
    /// doc_id -> raw features consumed by the toy encoder.
    std::map<std::string, FeatureTable> features;

    bool operator==(const Corpus&) const = default;
};

/// Violations of the Document invariants; empty when the document is well formed.
std::vector<std::string> validate_document(const Document& doc);

/// Adds the reverse direction of every gold label. Throws std::invalid_argument naming the
/// pair if both directions are present and not mutual reverses.
void materialize_reverse_gold(Document& doc);

/// Thrown for schema and consistency problems in input files.
class DataError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

Document parse_document_line(std::string_view line);
std::string document_to_line(const Document& doc);

Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus corpus_from_jsonl(std::string_view text);

/// Feature JSONL: {"doc_id": str, "features": {"event id": [f64]}} per line.
void write_features(const std::filesystem::path& path, const Corpus& corpus);
void load_features(const std::filesystem::path& path, Corpus& corpus);

struct SyntheticWorldConfig {
    std::size_t docs = 80;
    std::size_t events_min = 6;
    std::size_t events_max = 10;
    double coref_rate = 0.1;
    double containment_rate = 0.15;
    double vague_rate = 0.05;
    /// Probability that a new top-level or sibling event copies a sibling's interval.
    double equal_rate = 0.1;
    std::size_t feature_dim = 8;
    double noise_std = 0.02;
    std::uint64_t seed = 7;

    /// Throws std::invalid_argument when an invariant fails.
    void validate() const;
};

/// Layout of the raw feature vector emitted by generate_synthetic:
///   [0] start / timeline, [1] end / timeline, [2] depth / 4,
///   [3..5] parent id hash bits (+-1, zeros for top-level events),
///   [6..]  own id hash bits (+-1).
/// Gaussian noise of noise_std is added to every component.
inline constexpr std::string_view kSyntheticFeatureVersion = "synthetic-features-v1";
inline constexpr double kTimeline = 100.0;

/// Documents sampled from a latent world of intervals and a containment forest. Gold
/// labels are derived from the world and are reversal-closed and consistent with
/// `table`. Each document uses its own RNG stream keyed by (seed, document index).
Corpus generate_synthetic(const SyntheticWorldConfig& cfg,
                          const ConjunctionTable& table = default_table());

/// One synthetic document; exposed so generation can run per document in parallel.
Document generate_document(const SyntheticWorldConfig& cfg, std::size_t index,
                           const ConjunctionTable& table, FeatureTable* features);

struct SplitRatios {
    double train = 0.8;
    double dev = 0.1;
    double test = 0.1;
};

struct CorpusSplit {
    Corpus train, dev, test;
};

/// Document-level seeded partition; sizes by the largest-remainder rule.
CorpusSplit split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed);

/// Largest-remainder apportionment of n items.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios ratios);

}  // namespace logicere
