#include <gtest/gtest.h>

#include <set>

#include "logicere/lcg.hpp"
#include "logicere/rng.hpp"

using namespace logicere;

namespace {

Document make_doc(std::size_t k, std::vector<std::vector<std::string>> clusters = {}) {
    Document d;
    d.doc_id = "doc";
    for (std::size_t i = 0; i < k; ++i) {
        d.tokens.push_back("t" + std::to_string(i));
        d.events.push_back({"e" + std::to_string(i), i, i + 1, d.tokens.back()});
    }
    d.coref_clusters = std::move(clusters);
    return d;
}

// Edge counts by brute force over the definitions.
LcgStats recount(std::size_t k, const std::vector<std::vector<std::size_t>>& clusters, bool ep) {
    LcgStats s;
    s.event_nodes = k;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) pairs.push_back({i, j});
    s.pair_nodes = pairs.size();
    for (std::size_t a = 0; a < pairs.size(); ++a)
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            std::set<std::size_t> ea{pairs[a].first, pairs[a].second};
            if (ea.count(pairs[b].first) || ea.count(pairs[b].second)) ++s.pp_edges;
        }
    if (ep) s.ep_edges = 2 * pairs.size();
    for (const auto& c : clusters) s.ee_edges += c.size() * (c.size() - 1) / 2;
    return s;
}

}  // namespace

TEST(Lcg, SmallExamples) {
    auto s3 = lcg_stats(build_lcg(make_doc(3)));
    EXPECT_EQ(s3.pair_nodes, 6u);
    EXPECT_EQ(s3.ep_edges, 12u);
    EXPECT_EQ(s3.pp_edges, 15u);
    auto s4 = lcg_stats(build_lcg(make_doc(4)));
    EXPECT_EQ(s4.pair_nodes, 12u);
    EXPECT_EQ(s4.ep_edges, 24u);
    EXPECT_EQ(s4.pp_edges, 54u);
    EXPECT_EQ(s4.ee_edges, 0u);
}

TEST(Lcg, MatchesBruteForceCounts) {
    for (std::size_t k = 0; k <= 7; ++k) {
        EXPECT_EQ(lcg_stats(build_lcg(make_doc(k))), recount(k, {}, true)) << "k=" << k;
        LcgOptions no_ep;
        no_ep.use_ep_edges = false;
        EXPECT_EQ(lcg_stats(build_lcg(make_doc(k), no_ep)), recount(k, {}, false)) << "k=" << k;
    }
    auto d = make_doc(7, {{"e0", "e3", "e5"}, {"e1", "e6"}});
    EXPECT_EQ(lcg_stats(build_lcg(d)), recount(7, {{0, 3, 5}, {1, 6}}, true));
    LcgOptions no_coref;
    no_coref.use_coref = false;
    EXPECT_EQ(lcg_stats(build_lcg(d, no_coref)).ee_edges, 0u);
}

TEST(Lcg, NodeOrderAndLookup) {
    Document d = make_doc(3);
    std::swap(d.events[0], d.events[2]);
    const Lcg g = build_lcg(d);
    EXPECT_EQ(g.event_ids, (std::vector<std::string>{"e0", "e1", "e2"}));
    ASSERT_EQ(g.num_nodes(), 9u);
    EXPECT_EQ(g.nodes[3].kind, NodeKind::Pair);
    EXPECT_EQ(g.nodes[3].first, 0u);
    EXPECT_EQ(g.nodes[3].second, 1u);
    EXPECT_EQ(*g.pair_node(2, 1), 8u);
    EXPECT_FALSE(g.pair_node(1, 1).has_value());
    EXPECT_EQ(*g.event_position("e2"), 2u);
    EXPECT_FALSE(g.event_position("zz").has_value());
    EXPECT_EQ(g.candidate_pairs().size(), 6u);
    EXPECT_THROW(neighbors(g, 9), std::out_of_range);
}

TEST(Lcg, AdjacencySymmetricSortedAndTyped) {
    auto d = make_doc(5, {{"e1", "e4"}});
    const Lcg g = build_lcg(d);
    const auto m = g.edge_type_matrix();
    const std::size_t n = g.num_nodes();
    for (std::size_t a = 0; a < n; ++a) {
        const auto& nb = neighbors(g, a);
        for (std::size_t i = 1; i < nb.size(); ++i) EXPECT_LT(nb[i - 1].node, nb[i].node);
        for (std::size_t b = 0; b < n; ++b) {
            EXPECT_EQ(m[a * n + b], m[b * n + a]);
            const bool ea = g.nodes[a].kind == NodeKind::Event, eb = g.nodes[b].kind == NodeKind::Event;
            if (m[a * n + b] < 0) continue;
            const auto t = static_cast<EdgeType>(m[a * n + b]);
            if (ea && eb) EXPECT_EQ(t, EdgeType::EE);
            else if (!ea && !eb) EXPECT_EQ(t, EdgeType::PP);
            else EXPECT_EQ(t, EdgeType::EP);
        }
        EXPECT_EQ(m[a * n + a], -1);
    }
}

TEST(Lcg, DistanceFilter) {
    Document d = make_doc(4);
    d.events[3].start = 10;
    d.events[3].end = 11;
    d.tokens.resize(12);
    LcgOptions o;
    o.max_pair_distance = 2;
    const Lcg g = build_lcg(d, o);
    // e3 is more than two tokens from everyone.
    EXPECT_EQ(g.num_pairs(), 6u);
    EXPECT_FALSE(g.pair_node(3, 0).has_value());
    EXPECT_EQ(lcg_stats(g), (LcgStats{4, 6, 0, 15, 12}));
    EXPECT_TRUE(neighbors(g, 3).empty());
}

TEST(Lcg, DegenerateDocuments) {
    const Lcg one = build_lcg(make_doc(1));
    EXPECT_TRUE(one.warning.has_value());
    EXPECT_EQ(one.num_pairs(), 0u);
    EXPECT_FALSE(build_lcg(make_doc(2)).warning.has_value());
}

TEST(Lcg, JsonDumpListsEdges) {
    const auto j = lcg_to_json(build_lcg(make_doc(3, {{"e0", "e1"}})));
    EXPECT_NE(j.find("\"EE\""), std::string::npos);
    EXPECT_NE(j.find("\"event_ids\""), std::string::npos);
}
