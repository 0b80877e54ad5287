#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logicere/autodiff.hpp"
#include "logicere/encoder.hpp"
#include "logicere/labels.hpp"
#include "logicere/lcg.hpp"

namespace logicere {

enum class EncoderKind { Toy, Precomputed };

/// Structural hyperparameters. Each ablation flag maps to one row of the ablation study:
/// use_edge_bias (edge heterogeneity), use_coref (coreference edges), use_ep_edges
/// (event / event-pair edges).
struct ModelConfig {
    std::size_t d = 16;
    std::size_t layers = 2;
    std::size_t heads = 4;
    /// Per-head width; 0 selects 2d / heads.
    std::size_t d_k = 0;
    /// Width of the edge-type feature vectors; 0 selects d.
    std::size_t d_r = 0;
    double dropout = 0.2;
    double layer_norm_eps = 1e-5;
    LabelMode label_mode = LabelMode::Joint;
    bool use_edge_bias = true;
    bool use_ep_edges = true;
    bool use_coref = true;
    std::optional<std::size_t> max_pair_distance;
    EncoderKind encoder = EncoderKind::Toy;
    std::size_t feature_dim = 8;
    std::uint64_t seed = 1;

    std::size_t head_dim() const { return d_k ? d_k : (2 * d) / heads; }
    std::size_t edge_dim() const { return d_r ? d_r : d; }
    LabelSpace label_space() const { return LabelSpace::make(label_mode); }
    LcgOptions lcg_options() const { return {use_coref, use_ep_edges, max_pair_distance}; }

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// Adds every reasoner and classifier parameter (and the toy encoder when configured),
/// initialized uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); layer-norm gains start at 1.
ParamStore init_params(const ModelConfig& cfg);

namespace param_names {
std::string w_n();
std::string w_q(std::size_t layer, std::size_t head);
std::string w_k(std::size_t layer, std::size_t head);
std::string w_v(std::size_t layer, std::size_t head);
std::string w_o(std::size_t layer);
std::string ln_gain(std::size_t layer);
std::string ln_bias(std::size_t layer);
std::string edge_r();
std::string edge_w_r();
std::string w_p();
}  // namespace param_names

/// Attention mask and edge-type lookup for dense attention over an Lcg.
struct AttentionGraph {
    std::size_t n = 0;
    std::vector<unsigned char> mask;      // n x n, 1 where j is a neighbor of i
    std::vector<std::size_t> type_index;  // n x n, edge type (0 where no edge)

    static AttentionGraph from(const Lcg& g);
};

enum class Mode { Train, Eval };

/// Event rows h_e W_n followed by pair rows [h_i || h_j], in node order. N x 2d.
Var init_node_embeddings(Tape& tape, const EncoderOutput& enc, const Lcg& g, ParamStore& params);

/// Edge-type bias β_t = r_t W_r for every type, as a 3 x 1 column.
Var edge_bias(Tape& tape, ParamStore& params);

struct AttentionTrace {
    std::vector<Var> weights;  // one N x N matrix per head
};

/// One relational graph transformer layer: per-head masked attention with optional
/// edge-type bias, heads concatenated and projected by W_o, then layer norm and dropout.
Var attention_layer(Tape& tape, const Var& v_in, const AttentionGraph& ag, ParamStore& params,
                    const ModelConfig& cfg, std::size_t layer, const std::optional<Var>& beta,
                    Mode mode, std::uint64_t rng_key, AttentionTrace* trace = nullptr);

struct ForwardResult {
    /// (i, j) event positions into Lcg::event_ids, one per row of the outputs.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    Var logits;     // P x |labels|
    Var probs;      // softmax(logits)
    Var log_probs;  // log_softmax(logits)
    Var node_states;  // final N x 2d
    std::vector<AttentionTrace> attention;
};

/// Classifier over [h_cls || v_i || v_j || v_ij] for the given pair nodes.
Var classify_logits(Tape& tape, const Var& h_cls, const Var& node_states, const Lcg& g,
                    std::span<const std::pair<std::size_t, std::size_t>> pairs, ParamStore& params);

/// Probability vector for a single ordered pair. Throws std::invalid_argument if the pair
/// has no node in the graph.
std::vector<double> classify_pair(Tape& tape, const Var& h_cls, const Var& node_states, const Lcg& g,
                                  std::pair<std::size_t, std::size_t> pair, ParamStore& params);

ForwardResult forward_document(Tape& tape, const EncoderOutput& enc, const Lcg& g, ParamStore& params,
                               const ModelConfig& cfg, Mode mode, std::uint64_t rng_key);

}  // namespace logicere
