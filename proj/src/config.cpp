#include "logicere/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "logicere/rng.hpp"

namespace logicere {

using ojson = nlohmann::ordered_json;

namespace {

ojson model_json(const ModelConfig& m) {
    ojson j;
    j["d"] = m.d;
    j["layers"] = m.layers;
    j["heads"] = m.heads;
    j["d_k"] = m.d_k;
    j["d_r"] = m.d_r;
    j["dropout"] = m.dropout;
    j["layer_norm_eps"] = m.layer_norm_eps;
    j["label_space"] = std::string(mode_name(m.label_mode));
    j["use_edge_bias"] = m.use_edge_bias;
    j["use_ep_edges"] = m.use_ep_edges;
    j["use_coref"] = m.use_coref;
    j["max_pair_distance"] = m.max_pair_distance ? ojson(*m.max_pair_distance) : ojson(nullptr);
    j["encoder"] = m.encoder == EncoderKind::Toy ? "toy" : "precomputed";
    j["feature_dim"] = m.feature_dim;
    j["seed"] = m.seed;
    return j;
}

ojson train_json(const TrainConfig& t) {
    ojson j;
    j["lr"] = t.lr;
    j["weight_decay"] = t.weight_decay;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["adam_eps"] = t.adam_eps;
    j["batch"] = t.batch;
    j["max_epochs"] = t.max_epochs;
    j["patience"] = t.patience;
    j["gamma_sym"] = t.gamma_sym;
    j["gamma_conj"] = t.gamma_conj;
    j["conj_mode"] = std::string(conj_mode_name(t.conj_mode));
    j["conj_triple_budget"] = t.conj_triple_budget;
    j["seed"] = t.seed;
    if (t.eval_labels) {
        ojson labels = ojson::array();
        for (auto l : t.eval_labels->labels()) labels.push_back(std::string(label_name(l)));
        j["eval_labels"] = labels;
    } else {
        j["eval_labels"] = nullptr;
    }
    return j;
}

void check_keys(const nlohmann::json& j, const ojson& reference, const std::string& section) {
    if (!j.is_object()) throw std::invalid_argument("config: '" + section + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!reference.contains(key)) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
    }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config: bad value for '" + section + "." + key + "'");
    }
}

ModelConfig model_from(const nlohmann::json& j) {
    ModelConfig m;
    check_keys(j, model_json(m), "model");
    const std::string s = "model";
    read(j, "d", m.d, s);
    read(j, "layers", m.layers, s);
    read(j, "heads", m.heads, s);
    read(j, "d_k", m.d_k, s);
    read(j, "d_r", m.d_r, s);
    read(j, "dropout", m.dropout, s);
    read(j, "layer_norm_eps", m.layer_norm_eps, s);
    std::string mode(mode_name(m.label_mode));
    read(j, "label_space", mode, s);
    m.label_mode = parse_mode(mode);
    read(j, "use_edge_bias", m.use_edge_bias, s);
    read(j, "use_ep_edges", m.use_ep_edges, s);
    read(j, "use_coref", m.use_coref, s);
    if (j.contains("max_pair_distance")) {
        if (j["max_pair_distance"].is_null()) {
            m.max_pair_distance.reset();
        } else {
            std::size_t v = 0;
            read(j, "max_pair_distance", v, s);
            m.max_pair_distance = v;
        }
    }
    std::string enc = m.encoder == EncoderKind::Toy ? "toy" : "precomputed";
    read(j, "encoder", enc, s);
    if (enc == "toy") {
        m.encoder = EncoderKind::Toy;
    } else if (enc == "precomputed") {
        m.encoder = EncoderKind::Precomputed;
    } else {
        throw std::invalid_argument("config: model.encoder must be 'toy' or 'precomputed'");
    }
    read(j, "feature_dim", m.feature_dim, s);
    read(j, "seed", m.seed, s);
    m.validate();
    return m;
}

TrainConfig train_from(const nlohmann::json& j) {
    TrainConfig t;
    check_keys(j, train_json(t), "train");
    const std::string s = "train";
    read(j, "lr", t.lr, s);
    read(j, "weight_decay", t.weight_decay, s);
    read(j, "beta1", t.beta1, s);
    read(j, "beta2", t.beta2, s);
    read(j, "adam_eps", t.adam_eps, s);
    read(j, "batch", t.batch, s);
    read(j, "max_epochs", t.max_epochs, s);
    read(j, "patience", t.patience, s);
    read(j, "gamma_sym", t.gamma_sym, s);
    read(j, "gamma_conj", t.gamma_conj, s);
    std::string mode(conj_mode_name(t.conj_mode));
    read(j, "conj_mode", mode, s);
    t.conj_mode = parse_conj_mode(mode);
    read(j, "conj_triple_budget", t.conj_triple_budget, s);
    read(j, "seed", t.seed, s);
    if (j.contains("eval_labels") && !j["eval_labels"].is_null()) {
        std::vector<std::string> names;
        read(j, "eval_labels", names, s);
        LabelSet set;
        for (const auto& n : names) set.insert(parse_label(n));
        t.eval_labels = set;
    }
    t.validate();
    return t;
}

nlohmann::json parse_or_throw(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string model_config_to_json(const ModelConfig& m) { return model_json(m).dump(); }
std::string train_config_to_json(const TrainConfig& t) { return train_json(t).dump(); }

std::string run_config_to_json(const RunConfig& c) {
    ojson j;
    j["model"] = model_json(c.model);
    j["train"] = train_json(c.train);
    return j.dump(2);
}

ModelConfig model_config_from_json(std::string_view text) { return model_from(parse_or_throw(text)); }

RunConfig run_config_from_json(std::string_view text) {
    const auto j = parse_or_throw(text);
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "model" && key != "train") throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    RunConfig c;
    if (j.contains("model")) c.model = model_from(j["model"]);
    if (j.contains("train")) c.train = train_from(j["train"]);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

std::string config_hash(const ModelConfig& m) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(model_config_to_json(m))));
    return buf;
}

}  // namespace logicere
