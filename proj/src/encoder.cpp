#include "logicere/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "logicere/rng.hpp"

namespace logicere {

void init_toy_encoder(ParamStore& params, std::size_t feature_dim, std::size_t d, std::uint64_t seed) {
    auto add = [&](const char* name, std::vector<std::size_t> shape, double fan_in) {
        Tensor& t = params.add(name, random_uniform(std::move(shape), 1.0 / std::sqrt(fan_in),
                                                    derive_key(seed, fnv1a(name))));
        t.requires_grad = true;
    };
    add(toy_encoder::kWFeat, {feature_dim, d}, static_cast<double>(feature_dim));
    add(toy_encoder::kBFeat, {1, d}, static_cast<double>(feature_dim));
    add(toy_encoder::kWCls, {d, d}, static_cast<double>(d));
}

EncoderOutput encode_toy(Tape& tape, const Document& doc, const FeatureTable& features,
                         ParamStore& params) {
    Tensor& w_feat = params.at(toy_encoder::kWFeat);
    const std::size_t fdim = w_feat.rows();
    const std::size_t d = w_feat.cols();
    const std::size_t k = doc.events.size();
    if (k == 0) throw std::invalid_argument("encode_toy: document '" + doc.doc_id + "' has no events");

    Tensor x = Tensor::matrix(k, fdim);
    for (std::size_t i = 0; i < k; ++i) {
        auto it = features.find(doc.events[i].id);
        if (it == features.end()) {
            throw std::invalid_argument("encode_toy: missing features for event '" + doc.events[i].id +
                                        "' in '" + doc.doc_id + "'");
        }
        if (it->second.size() != fdim) {
            throw std::invalid_argument("encode_toy: feature dimension " + std::to_string(it->second.size()) +
                                        " for event '" + doc.events[i].id + "', expected " +
                                        std::to_string(fdim));
        }
        std::copy(it->second.begin(), it->second.end(), x.data().begin() + i * fdim);
    }

    Var xv = tape.constant(std::move(x));
    Var ones = tape.constant(Tensor::matrix(k, 1, 1.0));
    Var bias = ad::matmul(ones, tape.param(params.at(toy_encoder::kBFeat)));
    Var h = ad::tanh(ad::add(ad::matmul(xv, tape.param(w_feat)), bias));
    Var avg = ad::matmul(tape.constant(Tensor::matrix(1, k, 1.0 / static_cast<double>(k))), h);

    EncoderOutput out;
    out.dim = d;
    out.h_cls = ad::tanh(ad::matmul(avg, tape.param(params.at(toy_encoder::kWCls))));
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t row = i;
        out.h_events[doc.events[i].id] = ad::gather_rows(h, std::span<const std::size_t>(&row, 1));
    }
    return out;
}

namespace {

PrecomputedEmbedding parse_embedding(const nlohmann::json& j, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (key != "doc_id" && key != "h_cls" && key != "events") {
            throw DataError(where + ": unknown field '" + key + "'");
        }
    }
    PrecomputedEmbedding e;
    try {
        e.h_cls = j.at("h_cls").get<std::vector<double>>();
        for (const auto& [id, v] : j.at("events").items()) e.events[id] = v.get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(where + ": " + ex.what());
    }
    const std::size_t d = e.h_cls.size();
    if (d == 0) throw DataError(where + ": empty h_cls");
    for (const auto& [id, v] : e.events) {
        if (v.size() != d) {
            throw DataError(where + ": ragged dimensions, event '" + id + "' has " +
                            std::to_string(v.size()) + " values, h_cls has " + std::to_string(d));
        }
    }
    return e;
}

template <typename F>
void scan_lines(const std::filesystem::path& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw DataError(path.string() + " line " + std::to_string(lineno) + ": malformed JSON");
        }
        if (!f(j, path.string() + " line " + std::to_string(lineno))) return;
    }
}

}  // namespace

PrecomputedEmbedding load_precomputed(const std::filesystem::path& path, const std::string& doc_id,
                                      const Document* doc) {
    std::optional<PrecomputedEmbedding> found;
    scan_lines(path, [&](const nlohmann::json& j, const std::string& where) {
        if (j.value("doc_id", "") != doc_id) return true;
        found = parse_embedding(j, where);
        return false;
    });
    if (!found) throw DataError(path.string() + ": no embeddings for document '" + doc_id + "'");
    if (doc) {
        for (const auto& e : doc->events) {
            if (!found->events.count(e.id)) {
                throw DataError(path.string() + ": document '" + doc_id + "' lacks an embedding for event '" +
                                e.id + "'");
            }
        }
    }
    return *found;
}

std::map<std::string, PrecomputedEmbedding> load_precomputed_all(const std::filesystem::path& path) {
    std::map<std::string, PrecomputedEmbedding> out;
    scan_lines(path, [&](const nlohmann::json& j, const std::string& where) {
        if (!j.is_object() || !j.contains("doc_id")) throw DataError(where + ": missing doc_id");
        out[j["doc_id"].get<std::string>()] = parse_embedding(j, where);
        return true;
    });
    return out;
}

void write_precomputed(const std::filesystem::path& path,
                       const std::map<std::string, PrecomputedEmbedding>& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& [doc_id, e] : table) {
        nlohmann::ordered_json j;
        j["doc_id"] = doc_id;
        j["h_cls"] = e.h_cls;
        j["events"] = nlohmann::ordered_json::object();
        for (const auto& [id, v] : e.events) j["events"][id] = v;
        out << j.dump() << "\n";
    }
}

EncoderOutput encode_precomputed(Tape& tape, const Document& doc, const PrecomputedEmbedding& emb) {
    EncoderOutput out;
    out.dim = emb.h_cls.size();
    out.h_cls = tape.constant(Tensor({1, out.dim}, emb.h_cls));
    for (const auto& e : doc.events) {
        auto it = emb.events.find(e.id);
        if (it == emb.events.end()) {
            throw std::invalid_argument("encode_precomputed: no embedding for event '" + e.id + "'");
        }
        if (it->second.size() != out.dim) {
            throw std::invalid_argument("encode_precomputed: ragged dimension for event '" + e.id + "'");
        }
        out.h_events[e.id] = tape.constant(Tensor({1, out.dim}, it->second));
    }
    return out;
}

}  // namespace logicere
