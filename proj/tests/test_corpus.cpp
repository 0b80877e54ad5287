#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "logicere/corpus.hpp"
#include "logicere/evaluation.hpp"

using namespace logicere;
using L = RelationLabel;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    auto p = std::filesystem::temp_directory_path() / ("logicere_test_" + name);
    std::ofstream(p) << text;
    return p;
}

Document three_events() {
    Document d;
    d.doc_id = "d";
    d.tokens = {"a", "b", "c", "d", "e"};
    d.events = {{"e1", 0, 1, "a"}, {"e2", 2, 3, "c"}, {"e3", 4, 5, "e"}};
    return d;
}

bool has(const std::vector<std::string>& report, const std::string& needle) {
    return std::any_of(report.begin(), report.end(),
                       [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST(LoadCorpus, EmptyFile) { EXPECT_TRUE(load_corpus(temp_file("empty.jsonl", "")).documents.empty()); }

TEST(LoadCorpus, ReverseConsistentPair) {
    auto p = temp_file("one.jsonl",
                       R"({"doc_id":"d1","tokens":["x","y"],"events":[{"id":"e1","start":0,"end":1},{"id":"e2","start":1,"end":2}],)"
                       R"("gold":[{"e1":"e1","e2":"e2","label":"BEFORE"},{"e1":"e2","e2":"e1","label":"AFTER"}]})"
                       "\n");
    const Corpus c = load_corpus(p);
    ASSERT_EQ(c.documents.size(), 1u);
    EXPECT_EQ(c.documents[0].gold.at({"e2", "e1"}), L::After);
    EXPECT_EQ(c.documents[0].events[0].surface, "x");
}

TEST(LoadCorpus, ReversalInconsistencyRejected) {
    auto p = temp_file("bad.jsonl",
                       R"({"doc_id":"d1","tokens":["x","y"],"events":[{"id":"e1","start":0,"end":1},{"id":"e2","start":1,"end":2}],)"
                       R"("gold":[{"e1":"e1","e2":"e2","label":"BEFORE"},{"e1":"e2","e2":"e1","label":"BEFORE"}]})"
                       "\n");
    try {
        load_corpus(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("reversal inconsistency"), std::string::npos);
    }
}

TEST(LoadCorpus, SchemaErrors) {
    EXPECT_THROW(parse_document_line(R"({"doc_id":"d","tokens":[],"events":[],"extra":1})"), DataError);
    EXPECT_THROW(parse_document_line(R"({"doc_id":"d","tokens":["a"],"events":[{"id":"e","start":0,"end":1}],)"
                                     R"("gold":[{"e1":"e","e2":"x","label":"BEFORE"}]})"),
                 DataError);
    EXPECT_THROW(parse_document_line(R"({"doc_id":"d","tokens":["a"],"events":[{"id":"e","start":0,"end":1,"x":2}]})"),
                 DataError);
    EXPECT_THROW(parse_document_line("{not json"), DataError);
    EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), std::runtime_error);
}

TEST(Validate, Examples) {
    Document d = three_events();
    EXPECT_TRUE(validate_document(d).empty());

    Document overlap = d;
    overlap.coref_clusters = {{"e1", "e2"}, {"e2", "e3"}};
    EXPECT_TRUE(has(validate_document(overlap), "clusters not disjoint"));

    Document empty_span = d;
    empty_span.tokens.resize(10);
    empty_span.events[0].start = 5;
    empty_span.events[0].end = 5;
    EXPECT_TRUE(has(validate_document(empty_span), "empty span"));

    Document dup = d;
    dup.events[1].id = "e1";
    EXPECT_TRUE(has(validate_document(dup), "duplicate event id"));

    Document long_span = d;
    long_span.events[2].end = 9;
    EXPECT_TRUE(has(validate_document(long_span), "exceeds document length"));

    Document unknown = d;
    unknown.gold[{"e1", "zz"}] = L::Before;
    EXPECT_TRUE(has(validate_document(unknown), "unknown event"));
}

TEST(MaterializeReverse, FillsAndChecks) {
    Document d = three_events();
    d.gold[{"e1", "e2"}] = L::ParentChild;
    materialize_reverse_gold(d);
    EXPECT_EQ(d.gold.at({"e2", "e1"}), L::ChildParent);
    d.gold[{"e2", "e1"}] = L::Coref;
    EXPECT_THROW(materialize_reverse_gold(d), std::invalid_argument);
}

TEST(Corpus, WriteLoadRoundTrip) {
    SyntheticWorldConfig cfg;
    cfg.docs = 6;
    Corpus c = generate_synthetic(cfg);
    auto p = std::filesystem::temp_directory_path() / "logicere_test_rt.jsonl";
    auto f = std::filesystem::temp_directory_path() / "logicere_test_rt_features.jsonl";
    write_corpus(p, c);
    write_features(f, c);
    Corpus back = load_corpus(p);
    load_features(f, back);
    EXPECT_EQ(back, c);
    EXPECT_EQ(corpus_from_jsonl(corpus_to_jsonl(c)).documents, c.documents);
}

TEST(Synthetic, Deterministic) {
    SyntheticWorldConfig cfg;
    cfg.docs = 5;
    EXPECT_EQ(corpus_to_jsonl(generate_synthetic(cfg)), corpus_to_jsonl(generate_synthetic(cfg)));
    EXPECT_EQ(generate_synthetic(cfg).features, generate_synthetic(cfg).features);
    cfg.seed = 8;
    SyntheticWorldConfig other;
    other.docs = 5;
    EXPECT_NE(corpus_to_jsonl(generate_synthetic(cfg)), corpus_to_jsonl(generate_synthetic(other)));
}

TEST(Synthetic, DocumentIndependentOfCorpusSize) {
    SyntheticWorldConfig small, large;
    small.docs = 3;
    large.docs = 9;
    EXPECT_EQ(generate_synthetic(small).documents[2], generate_synthetic(large).documents[2]);
}

TEST(Synthetic, GoldIsCoherentAndComplete) {
    SyntheticWorldConfig cfg;
    cfg.docs = 40;
    cfg.coref_rate = 0.3;
    cfg.containment_rate = 0.4;
    cfg.vague_rate = 0.2;
    const Corpus c = generate_synthetic(cfg);
    std::vector<LabelGraph> graphs;
    for (const auto& d : c.documents) {
        EXPECT_TRUE(validate_document(d).empty());
        const std::size_t k = d.events.size();
        EXPECT_GE(k, cfg.events_min);
        EXPECT_LE(k, cfg.events_max);
        EXPECT_EQ(d.gold.size(), k * (k - 1));
        for (const auto& [p, l] : d.gold) EXPECT_EQ(d.gold.at({p.second, p.first}), reverse(l));
        graphs.push_back(gold_graph(d));
    }
    EXPECT_EQ(conjunction_violation_rate(graphs, default_table()), 0.0);
    EXPECT_EQ(symmetry_violation_rate(graphs), 0.0);
    EXPECT_GT(conjunction_violations(graphs, default_table()).total, 0u);
}

TEST(Synthetic, LabelsPresentAtDefaultRates) {
    SyntheticWorldConfig cfg;
    cfg.docs = 40;
    std::set<L> seen;
    for (const auto& d : generate_synthetic(cfg).documents)
        for (const auto& [p, l] : d.gold) seen.insert(l);
    for (auto l : kAllLabels) EXPECT_TRUE(seen.count(l)) << label_name(l);
}

TEST(Synthetic, ZeroRatesRemoveSubeventLabels) {
    SyntheticWorldConfig cfg;
    cfg.docs = 20;
    cfg.coref_rate = 0.0;
    cfg.containment_rate = 0.0;
    for (const auto& d : generate_synthetic(cfg).documents) {
        EXPECT_TRUE(d.coref_clusters.empty());
        for (const auto& [p, l] : d.gold) {
            EXPECT_NE(l, L::Coref);
            EXPECT_NE(l, L::ParentChild);
            EXPECT_NE(l, L::ChildParent);
        }
    }
}

TEST(Synthetic, FeaturesFollowLayout) {
    SyntheticWorldConfig cfg;
    cfg.docs = 2;
    cfg.noise_std = 0.0;
    const Corpus c = generate_synthetic(cfg);
    for (const auto& d : c.documents) {
        const auto& ft = c.features.at(d.doc_id);
        ASSERT_EQ(ft.size(), d.events.size());
        for (const auto& [id, v] : ft) {
            ASSERT_EQ(v.size(), cfg.feature_dim);
            EXPECT_LT(v[0], v[1]);  // start before end
            EXPECT_GE(v[2], 0.0);
            for (std::size_t i = 6; i < v.size(); ++i) EXPECT_EQ(std::abs(v[i]), 1.0);
        }
    }
}

TEST(Synthetic, ConfigValidation) {
    SyntheticWorldConfig cfg;
    cfg.coref_rate = 1.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.feature_dim = 5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.events_min = 5;
    cfg.events_max = 4;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Split, LargestRemainder) {
    EXPECT_EQ(split_sizes(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
    EXPECT_EQ(split_sizes(80, {0.625, 0.125, 0.25}), (std::array<std::size_t, 3>{50, 10, 20}));
    EXPECT_EQ(split_sizes(7, {1.0, 0.0, 0.0}), (std::array<std::size_t, 3>{7, 0, 0}));
    EXPECT_THROW(split_sizes(10, {0.5, 0.1, 0.1}), std::invalid_argument);
}

TEST(Split, DeterministicPartition) {
    SyntheticWorldConfig cfg;
    cfg.docs = 10;
    const Corpus c = generate_synthetic(cfg);
    auto a = split(c, {0.8, 0.1, 0.1}, 3);
    auto b = split(c, {0.8, 0.1, 0.1}, 3);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    std::set<std::string> ids;
    for (const Corpus* part : {&a.train, &a.dev, &a.test})
        for (const auto& d : part->documents) EXPECT_TRUE(ids.insert(d.doc_id).second);
    EXPECT_EQ(ids.size(), 10u);
    EXPECT_EQ(a.train.features.size(), 8u);

    auto all = split(c, {1.0, 0.0, 0.0}, 3);
    EXPECT_EQ(all.train.documents.size(), 10u);

    Corpus two;
    two.documents.assign(c.documents.begin(), c.documents.begin() + 2);
    EXPECT_THROW(split(two, {0.5, 0.25, 0.25}, 1), std::invalid_argument);
}
