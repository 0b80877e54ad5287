#include "logicere/reasoner.hpp"

#include <cmath>
#include <stdexcept>

#include "logicere/rng.hpp"

namespace logicere {

void ModelConfig::validate() const {
    if (d == 0) throw std::invalid_argument("model config: d must be positive");
    if (heads == 0) throw std::invalid_argument("model config: heads must be positive");
    if (head_dim() == 0) throw std::invalid_argument("model config: per-head width is zero");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model config: dropout must lie in [0,1)");
    if (!(layer_norm_eps > 0.0)) throw std::invalid_argument("model config: layer_norm_eps must be positive");
    if (encoder == EncoderKind::Toy && feature_dim == 0) {
        throw std::invalid_argument("model config: feature_dim must be positive for the toy encoder");
    }
}

namespace param_names {
namespace {
std::string layer_prefix(std::size_t l) { return "reasoner.layer" + std::to_string(l) + "."; }
}  // namespace
std::string w_n() { return "reasoner.W_n"; }
std::string w_q(std::size_t l, std::size_t h) { return layer_prefix(l) + "head" + std::to_string(h) + ".W_q"; }
std::string w_k(std::size_t l, std::size_t h) { return layer_prefix(l) + "head" + std::to_string(h) + ".W_k"; }
std::string w_v(std::size_t l, std::size_t h) { return layer_prefix(l) + "head" + std::to_string(h) + ".W_v"; }
std::string w_o(std::size_t l) { return layer_prefix(l) + "W_o"; }
std::string ln_gain(std::size_t l) { return layer_prefix(l) + "ln_gain"; }
std::string ln_bias(std::size_t l) { return layer_prefix(l) + "ln_bias"; }
std::string edge_r() { return "reasoner.edge.r"; }
std::string edge_w_r() { return "reasoner.edge.W_r"; }
std::string w_p() { return "classifier.W_p"; }
}  // namespace param_names

ParamStore init_params(const ModelConfig& cfg) {
    cfg.validate();
    ParamStore ps;
    const std::size_t d = cfg.d, w = 2 * d, dk = cfg.head_dim(), dr = cfg.edge_dim();
    auto add = [&](const std::string& name, std::vector<std::size_t> shape, double fan_in) {
        Tensor& t = ps.add(name, random_uniform(std::move(shape), 1.0 / std::sqrt(fan_in),
                                                derive_key(cfg.seed, fnv1a(name))));
        t.requires_grad = true;
    };
    if (cfg.encoder == EncoderKind::Toy) init_toy_encoder(ps, cfg.feature_dim, d, cfg.seed);
    add(param_names::w_n(), {d, w}, static_cast<double>(d));
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            add(param_names::w_q(l, h), {w, dk}, static_cast<double>(w));
            add(param_names::w_k(l, h), {w, dk}, static_cast<double>(w));
            add(param_names::w_v(l, h), {w, dk}, static_cast<double>(w));
        }
        add(param_names::w_o(l), {cfg.heads * dk, w}, static_cast<double>(cfg.heads * dk));
        ps.add(param_names::ln_gain(l), Tensor({1, w}, 1.0)).requires_grad = true;
        ps.add(param_names::ln_bias(l), Tensor({1, w}, 0.0)).requires_grad = true;
    }
    add(param_names::edge_r(), {kNumEdgeTypes, dr}, static_cast<double>(dr));
    add(param_names::edge_w_r(), {dr, 1}, static_cast<double>(dr));
    add(param_names::w_p(), {7 * d, cfg.label_space().size()}, static_cast<double>(7 * d));
    return ps;
}

AttentionGraph AttentionGraph::from(const Lcg& g) {
    AttentionGraph ag;
    ag.n = g.num_nodes();
    ag.mask.assign(ag.n * ag.n, 0);
    ag.type_index.assign(ag.n * ag.n, 0);
    for (std::size_t i = 0; i < ag.n; ++i) {
        for (const auto& nb : g.adjacency[i]) {
            ag.mask[i * ag.n + nb.node] = 1;
            ag.type_index[i * ag.n + nb.node] = static_cast<std::size_t>(nb.type);
        }
    }
    return ag;
}

Var init_node_embeddings(Tape& tape, const EncoderOutput& enc, const Lcg& g, ParamStore& params) {
    const std::size_t k = g.num_events();
    if (k == 0) throw std::invalid_argument("init_node_embeddings: graph has no events");
    std::vector<Var> rows;
    for (const auto& id : g.event_ids) {
        auto it = enc.h_events.find(id);
        if (it == enc.h_events.end()) {
            throw std::invalid_argument("init_node_embeddings: missing embedding for event '" + id + "'");
        }
        rows.push_back(it->second);
    }
    Var h = ad::concat_rows(rows);
    const Tensor& w_n = params.at(param_names::w_n());
    if (h.cols() != w_n.rows()) {
        throw std::invalid_argument("init_node_embeddings: encoder width " + std::to_string(h.cols()) +
                                    " does not match W_n rows " + std::to_string(w_n.rows()));
    }
    Var event_rows = ad::matmul(h, tape.param(params.at(param_names::w_n())));
    if (g.num_pairs() == 0) return event_rows;

    std::vector<std::size_t> first, second;
    for (const auto& [node, ij] : g.candidate_pairs()) {
        first.push_back(ij.first);
        second.push_back(ij.second);
    }
    const Var parts[] = {ad::gather_rows(h, first), ad::gather_rows(h, second)};
    const Var both[] = {event_rows, ad::concat_cols(parts)};
    return ad::concat_rows(both);
}

Var edge_bias(Tape& tape, ParamStore& params) {
    return ad::matmul(tape.param(params.at(param_names::edge_r())),
                      tape.param(params.at(param_names::edge_w_r())));
}

Var attention_layer(Tape& tape, const Var& v_in, const AttentionGraph& ag, ParamStore& params,
                    const ModelConfig& cfg, std::size_t layer, const std::optional<Var>& beta,
                    Mode mode, std::uint64_t rng_key, AttentionTrace* trace) {
    const std::size_t n = ag.n;
    if (v_in.rows() != n) throw std::invalid_argument("attention_layer: node count mismatch");
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));

    std::optional<Var> bias;
    if (cfg.use_edge_bias && beta) bias = ad::gather(*beta, ag.type_index, {n, n});

    std::vector<Var> heads;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        Var q = ad::matmul(v_in, tape.param(params.at(param_names::w_q(layer, h))));
        Var k = ad::matmul(v_in, tape.param(params.at(param_names::w_k(layer, h))));
        Var v = ad::matmul(v_in, tape.param(params.at(param_names::w_v(layer, h))));
        Var scores = ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt_dk);
        if (bias) scores = ad::add(*bias, scores);
        // Nodes without neighbors aggregate nothing.
        Var alpha = ad::softmax_rows(scores, ag.mask, kernels::EmptyRow::Zero);
        if (trace) trace->weights.push_back(alpha);
        heads.push_back(ad::matmul(alpha, v));
    }
    Var merged = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
    Var out = ad::matmul(merged, tape.param(params.at(param_names::w_o(layer))));
    out = ad::layer_norm_rows(out, tape.param(params.at(param_names::ln_gain(layer))),
                              tape.param(params.at(param_names::ln_bias(layer))), cfg.layer_norm_eps);
    return ad::dropout(out, cfg.dropout, derive_key(rng_key, layer), mode == Mode::Train);
}

Var classify_logits(Tape& tape, const Var& h_cls, const Var& node_states, const Lcg& g,
                    std::span<const std::pair<std::size_t, std::size_t>> pairs, ParamStore& params) {
    std::vector<std::size_t> cls_rows(pairs.size(), 0), first, second, pair_rows;
    for (const auto& [i, j] : pairs) {
        auto node = g.pair_node(i, j);
        if (!node) {
            throw std::invalid_argument("classify: pair (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") is not in the graph");
        }
        first.push_back(i);  // event nodes come first, so position == node index
        second.push_back(j);
        pair_rows.push_back(*node);
    }
    const Var parts[] = {ad::gather_rows(h_cls, cls_rows), ad::gather_rows(node_states, first),
                         ad::gather_rows(node_states, second), ad::gather_rows(node_states, pair_rows)};
    return ad::matmul(ad::concat_cols(parts), tape.param(params.at(param_names::w_p())));
}

std::vector<double> classify_pair(Tape& tape, const Var& h_cls, const Var& node_states, const Lcg& g,
                                  std::pair<std::size_t, std::size_t> pair, ParamStore& params) {
    Var p = ad::softmax_rows(classify_logits(tape, h_cls, node_states, g, std::span(&pair, 1), params));
    return p.value().values();
}

ForwardResult forward_document(Tape& tape, const EncoderOutput& enc, const Lcg& g, ParamStore& params,
                               const ModelConfig& cfg, Mode mode, std::uint64_t rng_key) {
    if (enc.dim != cfg.d) {
        throw std::invalid_argument("forward: encoder width " + std::to_string(enc.dim) +
                                    " differs from configured d = " + std::to_string(cfg.d));
    }
    ForwardResult r;
    const AttentionGraph ag = AttentionGraph::from(g);
    Var v = init_node_embeddings(tape, enc, g, params);
    std::optional<Var> beta;
    if (cfg.use_edge_bias && cfg.layers > 0) beta = edge_bias(tape, params);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        AttentionTrace trace;
        v = attention_layer(tape, v, ag, params, cfg, l, beta, mode, rng_key, &trace);
        r.attention.push_back(std::move(trace));
    }
    r.node_states = v;
    for (const auto& [node, ij] : g.candidate_pairs()) r.pairs.push_back(ij);
    if (r.pairs.empty()) return r;
    r.logits = classify_logits(tape, enc.h_cls, v, g, r.pairs, params);
    r.probs = ad::softmax_rows(r.logits);
    r.log_probs = ad::log_softmax_rows(r.logits);
    return r;
}

}  // namespace logicere
