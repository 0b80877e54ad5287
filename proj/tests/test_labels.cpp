#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "logicere/labels.hpp"

using namespace logicere;
using L = RelationLabel;

namespace {

// Independent point enumeration: every relation realizable for (a, c) given r1(a,b), r2(b,c).
std::set<L> enumerate_points(L r1, L r2, int grid) {
    auto rel = [](int x, int y) { return x < y ? L::Before : (x > y ? L::After : L::Equal); };
    std::set<L> out;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b)
            for (int c = 0; c < grid; ++c)
                if (rel(a, b) == r1 && rel(b, c) == r2) out.insert(rel(a, c));
    return out;
}

std::set<L> to_set(LabelSet s) {
    auto v = s.labels();
    return {v.begin(), v.end()};
}

}  // namespace

TEST(Reverse, PairsAndFixedPoints) {
    EXPECT_EQ(reverse(L::Before), L::After);
    EXPECT_EQ(reverse(L::After), L::Before);
    EXPECT_EQ(reverse(L::ParentChild), L::ChildParent);
    EXPECT_EQ(reverse(L::ChildParent), L::ParentChild);
    for (auto l : {L::Equal, L::Vague, L::Coref, L::NoRel}) EXPECT_EQ(reverse(l), l);
}

TEST(Reverse, InvolutionAndBijection) {
    std::set<L> image;
    for (auto l : kAllLabels) {
        EXPECT_EQ(reverse(reverse(l)), l);
        image.insert(reverse(l));
    }
    EXPECT_EQ(image.size(), kNumLabels);
}

TEST(LabelNames, RoundTrip) {
    for (auto l : kAllLabels) EXPECT_EQ(parse_label(label_name(l)), l);
    EXPECT_EQ(label_name(L::ParentChild), "PARENT-CHILD");
    EXPECT_THROW(parse_label("SOON"), std::invalid_argument);
    EXPECT_FALSE(try_parse_label("before").has_value());
}

TEST(LabelSpace, Modes) {
    auto tre = LabelSpace::make(LabelMode::SplitTre);
    EXPECT_EQ(tre.labels, (std::vector<L>{L::Before, L::After, L::Equal, L::Vague}));
    EXPECT_EQ(tre.positive_set, (LabelSet{L::Before, L::After, L::Equal}));
    auto sre = LabelSpace::make(LabelMode::SplitSre);
    EXPECT_EQ(sre.labels.size(), 4u);
    EXPECT_FALSE(sre.positive_set.contains(L::NoRel));
    auto joint = LabelSpace::make(LabelMode::Joint);
    EXPECT_EQ(joint.labels.size(), 8u);
    EXPECT_EQ(joint.members(), LabelSet::temporal() | LabelSet::subevent());
    EXPECT_TRUE(joint.symmetric_set.subset_of(joint.members()));
    EXPECT_EQ(joint.position(L::Coref), 6);
    EXPECT_EQ(tre.position(L::Coref), -1);
    // Every space is closed under reversal.
    for (auto mode : {LabelMode::SplitTre, LabelMode::SplitSre, LabelMode::Joint}) {
        auto s = LabelSpace::make(mode);
        for (auto l : s.labels) EXPECT_TRUE(s.contains(reverse(l)));
    }
}

TEST(Oracle, MatchesIndependentEnumeration) {
    const auto t = derive_temporal_table();
    const LabelSet ordered{L::Before, L::After, L::Equal};
    for (auto r1 : ordered.labels()) {
        for (auto r2 : ordered.labels()) {
            auto expected = enumerate_points(r1, r2, 5);
            EXPECT_EQ(to_set(deduction_set(t, r1, r2, ordered)), expected)
                << label_name(r1) << "," << label_name(r2);
        }
    }
}

TEST(Oracle, SpecExamples) {
    const auto t = derive_temporal_table();
    EXPECT_EQ(deduction_set(t, L::Before, L::Before), LabelSet{L::Before});
    EXPECT_EQ(deduction_set(t, L::Equal, L::Before), LabelSet{L::Before});
    EXPECT_FALSE(t.entry(L::Before, L::After).has_value());
    EXPECT_EQ(t.provenance(L::Before, L::Before), EntryProvenance::OracleDerived);
    EXPECT_EQ(t.provenance(L::Vague, L::Before), EntryProvenance::Unconstrained);
}

TEST(Oracle, AssociativeOnFourPoints) {
    // Every realizable composition over four points lands inside the chained deduction.
    const auto t = derive_temporal_table();
    auto rel = [](int x, int y) { return x < y ? L::Before : (x > y ? L::After : L::Equal); };
    const LabelSet ordered{L::Before, L::After, L::Equal};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    LabelSet left;
                    for (auto x : deduction_set(t, rel(a, b), rel(b, c), ordered).labels())
                        left = left | deduction_set(t, x, rel(c, d), ordered);
                    LabelSet right;
                    for (auto y : deduction_set(t, rel(b, c), rel(c, d), ordered).labels())
                        right = right | deduction_set(t, rel(a, b), y, ordered);
                    EXPECT_TRUE(left.contains(rel(a, d)));
                    EXPECT_TRUE(right.contains(rel(a, d)));
                }
}

TEST(DefaultTable, CorefIsIdentity) {
    const auto& t = default_table();
    for (auto r : kAllLabels) {
        EXPECT_EQ(deduction_set(t, L::Coref, r), LabelSet{r}) << label_name(r);
        EXPECT_EQ(deduction_set(t, r, L::Coref), LabelSet{r}) << label_name(r);
    }
}

TEST(DefaultTable, ReversalSymmetry) {
    const auto& t = default_table();
    for (auto r1 : kAllLabels)
        for (auto r2 : kAllLabels)
            for (auto r3 : deduction_set(t, r1, r2).labels())
                EXPECT_TRUE(deduction_set(t, reverse(r2), reverse(r1)).contains(reverse(r3)))
                    << label_name(r1) << "," << label_name(r2) << "->" << label_name(r3);
}

TEST(DefaultTable, SpecExamples) {
    const auto& t = default_table();
    EXPECT_EQ(deduction_set(t, L::ParentChild, L::ParentChild), LabelSet{L::ParentChild});
    EXPECT_EQ(deduction_set(t, L::ParentChild, L::Before), LabelSet{L::ParentChild});
    EXPECT_EQ(t.provenance(L::ParentChild, L::Before), EntryProvenance::PaperFigure);
    EXPECT_EQ(deduction_set(t, L::Vague, L::Vague), LabelSet::all());
    EXPECT_EQ(deduction_set(t, L::NoRel, L::Before), LabelSet::all());
    EXPECT_FALSE(is_constrained(t, L::NoRel, L::Before));
    EXPECT_TRUE(is_constrained(t, L::Before, L::Before));
}

TEST(DefaultTable, AgreesWithOracleOnTemporalBlock) {
    const auto oracle = derive_temporal_table();
    const LabelSet ordered{L::Before, L::After, L::Equal};
    for (auto r1 : ordered.labels())
        for (auto r2 : ordered.labels())
            EXPECT_EQ(deduction_set(default_table(), r1, r2, ordered), deduction_set(oracle, r1, r2, ordered));
    EXPECT_TRUE(parse_table(default_table_json()).warnings.empty());
}

TEST(DefaultTable, ShippedFileMatchesEmbeddedCopy) {
    std::ifstream in(std::string(LOGICERE_SOURCE_DIR) + "/data/conjunction_table.json");
    ASSERT_TRUE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(parse_table(ss.str()).table, default_table());
}

TEST(DeductionSet, RestrictedToSpace) {
    const auto& t = default_table();
    EXPECT_EQ(deduction_set(t, L::Equal, L::Equal, LabelSet::temporal()), LabelSet{L::Equal});
    EXPECT_EQ(deduction_set(t, L::Equal, L::Equal), (LabelSet{L::Equal, L::Coref}));
    EXPECT_EQ(deduction_set(t, L::Vague, L::Before, LabelSet::temporal()), LabelSet::temporal());
}

TEST(ParseTable, ErrorsAndWarnings) {
    EXPECT_THROW(parse_table(R"({"entries": {"BEFORE,SOON": ["BEFORE"]}})"), std::invalid_argument);
    EXPECT_THROW(parse_table(R"({"entries": {"BEFORE": ["BEFORE"]}})"), std::invalid_argument);
    EXPECT_THROW(parse_table(R"({"entries": {"BEFORE,BEFORE": []}})"), std::invalid_argument);
    EXPECT_THROW(parse_table(R"({"entries": {"BEFORE,BEFORE": "BEFORE"}})"), std::invalid_argument);
    EXPECT_THROW(parse_table(R"({"entries": {}, "extra": 1})"), std::invalid_argument);
    EXPECT_THROW(parse_table("not json"), std::invalid_argument);

    auto r = parse_table(R"({"entries": {"BEFORE,BEFORE": ["AFTER"]}, "version": "x"})");
    EXPECT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(deduction_set(r.table, L::Before, L::Before), LabelSet{L::After});
    EXPECT_EQ(r.table.version, "x");

    auto ok = parse_table(R"({"entries": {"PARENT-CHILD,PARENT-CHILD": ["PARENT-CHILD"]}})");
    EXPECT_TRUE(ok.warnings.empty());
    EXPECT_EQ(deduction_set(ok.table, L::ParentChild, L::ParentChild), LabelSet{L::ParentChild});
    // Oracle entries survive the merge.
    EXPECT_EQ(deduction_set(ok.table, L::Before, L::Before), LabelSet{L::Before});
}

TEST(TableJson, RoundTripWithProvenance) {
    const std::string text = table_to_json(default_table());
    EXPECT_NE(text.find("paper-figure"), std::string::npos);
    EXPECT_EQ(parse_table(text).table.version, default_table().version);
    const auto again = parse_table(text).table;
    for (auto r1 : kAllLabels)
        for (auto r2 : kAllLabels)
            EXPECT_EQ(deduction_set(again, r1, r2), deduction_set(default_table(), r1, r2));
}
