#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "logicere/encoder.hpp"

using namespace logicere;

namespace {

Document doc3() {
    Document d;
    d.doc_id = "d";
    d.tokens = {"a", "b", "c"};
    d.events = {{"e1", 0, 1, "a"}, {"e2", 1, 2, "b"}, {"e3", 2, 3, "c"}};
    return d;
}

FeatureTable feats3() {
    return {{"e1", {0.1, -0.2, 0.3}}, {"e2", {1.0, 0.0, -1.0}}, {"e3", {0.5, 0.5, 0.5}}};
}

}  // namespace

TEST(ToyEncoder, MatchesHandComputation) {
    ParamStore ps;
    init_toy_encoder(ps, 3, 2, 5);
    Tape t;
    const Document d = doc3();
    const FeatureTable f = feats3();
    auto out = encode_toy(t, d, f, ps);
    ASSERT_EQ(out.dim, 2u);
    const Tensor& w = ps.at(toy_encoder::kWFeat);
    const Tensor& b = ps.at(toy_encoder::kBFeat);
    const Tensor& wc = ps.at(toy_encoder::kWCls);
    double avg[2] = {0, 0};
    for (const auto& e : d.events) {
        for (std::size_t c = 0; c < 2; ++c) {
            double s = b[c];
            for (std::size_t r = 0; r < 3; ++r) s += f.at(e.id)[r] * w(r, c);
            const double h = std::tanh(s);
            EXPECT_NEAR(out.h_events.at(e.id).value()[c], h, 1e-14);
            avg[c] += h / 3.0;
        }
    }
    for (std::size_t c = 0; c < 2; ++c) {
        const double cls = std::tanh(avg[0] * wc(0, c) + avg[1] * wc(1, c));
        EXPECT_NEAR(out.h_cls.value()[c], cls, 1e-14);
    }
}

TEST(ToyEncoder, GradientsReachParameters) {
    ParamStore ps;
    init_toy_encoder(ps, 3, 4, 1);
    Tape t;
    const Document d = doc3();
    auto out = encode_toy(t, d, feats3(), ps);
    t.backward(ad::sum(ad::add(out.h_cls, out.h_events.at("e2"))));
    t.accumulate_param_grads();
    for (const auto& [name, p] : ps) {
        double norm = 0;
        for (double g : p.grad) norm += std::abs(g);
        EXPECT_GT(norm, 0.0) << name;
    }
}

TEST(ToyEncoder, Errors) {
    ParamStore ps;
    init_toy_encoder(ps, 3, 2, 5);
    Tape t;
    FeatureTable f = feats3();
    f.erase("e2");
    EXPECT_THROW(encode_toy(t, doc3(), f, ps), std::invalid_argument);
    f = feats3();
    f["e1"] = {1.0};
    EXPECT_THROW(encode_toy(t, doc3(), f, ps), std::invalid_argument);
    Document empty;
    EXPECT_THROW(encode_toy(t, empty, feats3(), ps), std::invalid_argument);
}

TEST(ToyEncoder, InitDeterministic) {
    ParamStore a, b, c;
    init_toy_encoder(a, 8, 16, 3);
    init_toy_encoder(b, 8, 16, 3);
    init_toy_encoder(c, 8, 16, 4);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
}

TEST(Precomputed, RoundTripAndEncode) {
    std::map<std::string, PrecomputedEmbedding> table;
    table["d"] = {{0.5, -0.5}, {{"e1", {1, 2}}, {"e2", {3, 4}}, {"e3", {5, 6}}}};
    table["other"] = {{0.0, 0.0}, {{"x", {0, 1}}}};
    auto p = std::filesystem::temp_directory_path() / "logicere_test_emb.jsonl";
    write_precomputed(p, table);
    auto all = load_precomputed_all(p);
    EXPECT_EQ(all.size(), 2u);
    EXPECT_EQ(all["d"].events["e2"], (std::vector<double>{3, 4}));
    const Document d = doc3();
    auto one = load_precomputed(p, "d", &d);
    Tape t;
    auto out = encode_precomputed(t, d, one);
    EXPECT_EQ(out.dim, 2u);
    EXPECT_EQ(out.h_events.at("e3").value()[1], 6.0);
    EXPECT_EQ(out.h_cls.value()[0], 0.5);
    EXPECT_THROW(load_precomputed(p, "missing"), DataError);
}

TEST(Precomputed, MissingEventNamed) {
    auto p = std::filesystem::temp_directory_path() / "logicere_test_emb_bad.jsonl";
    std::ofstream(p) << R"({"doc_id":"d","h_cls":[1,2],"events":{"e1":[1,2],"e2":[1,2]}})" << "\n";
    const Document d = doc3();
    try {
        load_precomputed(p, "d", &d);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("'e3'"), std::string::npos);
    }
    Tape t;
    try {
        encode_precomputed(t, d, load_precomputed(p, "d"));
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("'e3'"), std::string::npos);
    }
    std::ofstream(p) << R"({"doc_id":"d","h_cls":[1,2],"events":{"e1":[1]}})" << "\n";
    EXPECT_THROW(load_precomputed(p, "d"), DataError);
}
