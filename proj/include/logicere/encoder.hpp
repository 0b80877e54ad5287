#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "logicere/autodiff.hpp"
#include "logicere/corpus.hpp"

namespace logicere {

/// Document embedding plus one embedding per event, all of width d.
struct EncoderOutput {
    Var h_cls;                        // 1 x d
    std::map<std::string, Var> h_events;  // event id -> 1 x d
    std::size_t dim = 0;
};

/// Frozen embeddings as stored on disk.
struct PrecomputedEmbedding {
    std::vector<double> h_cls;
    std::map<std::string, std::vector<double>> events;
};

/// Parameter names of the toy encoder inside a ParamStore.
namespace toy_encoder {
inline constexpr const char* kWFeat = "encoder.W_feat";
inline constexpr const char* kBFeat = "encoder.b_feat";
inline constexpr const char* kWCls = "encoder.W_cls";
}  // namespace toy_encoder

/// Adds W_feat (feature_dim x d), b_feat (1 x d) and W_cls (d x d).
void init_toy_encoder(ParamStore& params, std::size_t feature_dim, std::size_t d, std::uint64_t seed);

/// h_e = tanh(x_e W_feat + b_feat); h_cls = tanh(mean_e(h_e) W_cls). Differentiable.
/// Throws std::invalid_argument for missing features or dimension mismatches.
EncoderOutput encode_toy(Tape& tape, const Document& doc, const FeatureTable& features,
                         ParamStore& params);

/// Loads one document's embeddings from the precomputed-embedding JSONL file.
PrecomputedEmbedding load_precomputed(const std::filesystem::path& path, const std::string& doc_id,
                                      const Document* doc = nullptr);
/// All documents in the file, keyed by doc_id.
std::map<std::string, PrecomputedEmbedding> load_precomputed_all(const std::filesystem::path& path);
void write_precomputed(const std::filesystem::path& path,
                       const std::map<std::string, PrecomputedEmbedding>& table);

/// Puts precomputed embeddings on the tape as constants. Throws std::invalid_argument
/// naming the first event without an embedding, or on ragged dimensions.
EncoderOutput encode_precomputed(Tape& tape, const Document& doc, const PrecomputedEmbedding& emb);

}  // namespace logicere
