// logicere command-line tool. Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "logicere/config.hpp"
#include "logicere/corpus.hpp"
#include "logicere/evaluation.hpp"
#include "logicere/labels.hpp"
#include "logicere/training.hpp"

namespace fs = std::filesystem;
using namespace logicere;

namespace {

class UsageError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << text;
    if (!out) throw DataError("write failed for " + p.string());
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

LabelSet parse_label_list(const std::string& s) {
    LabelSet set;
    for (const auto& n : split_list(s)) set.insert(parse_label(n));
    if (set.empty()) throw UsageError("empty label list");
    return set;
}

ConjunctionTable table_from(const std::string& path) {
    if (path.empty()) return default_table();
    auto res = load_table(path);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    return res.table;
}

// Model and training flags shared by train and gradcheck; applied over a config file.
struct ConfigFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t d = 0, layers = 0, heads = 0, d_k = 0, feature_dim = 0, max_pair_distance = 0;
    double dropout = 0, lr = 0, weight_decay = 0, gamma_sym = 0, gamma_conj = 0;
    std::size_t epochs = 0, patience = 0, batch = 0, budget = 0;
    std::string label_space, conj_mode, eval_labels, encoder;
    bool no_edge_bias = false, no_coref = false, no_ep_edges = false;
    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App* app) {
        opts["config"] = app->add_option("--config", config_path, "JSON config with 'model' and 'train' sections");
        opts["seed"] = app->add_option("--seed", seed, "seed for initialization, shuffling, dropout and sampling");
        opts["d"] = app->add_option("--d", d, "encoder width d");
        opts["layers"] = app->add_option("--layers", layers, "reasoner layers L");
        opts["heads"] = app->add_option("--heads", heads, "attention heads C");
        opts["d_k"] = app->add_option("--d-k", d_k, "per-head width (0: 2d/C)");
        opts["dropout"] = app->add_option("--dropout", dropout, "dropout rate");
        opts["label_space"] = app->add_option("--label-space", label_space, "SPLIT_TRE, SPLIT_SRE or JOINT");
        opts["encoder"] = app->add_option("--encoder", encoder, "toy or precomputed");
        opts["feature_dim"] = app->add_option("--feature-dim", feature_dim, "toy encoder input width");
        opts["max_pair_distance"] = app->add_option("--max-pair-distance", max_pair_distance, "token distance filter");
        opts["lr"] = app->add_option("--lr", lr, "learning rate");
        opts["weight_decay"] = app->add_option("--weight-decay", weight_decay, "AdamW weight decay");
        opts["epochs"] = app->add_option("--epochs", epochs, "maximum epochs");
        opts["patience"] = app->add_option("--patience", patience, "early-stopping patience");
        opts["batch"] = app->add_option("--batch", batch, "documents per step");
        opts["gamma_sym"] = app->add_option("--gamma-sym", gamma_sym, "symmetry loss coefficient");
        opts["gamma_conj"] = app->add_option("--gamma-conj", gamma_conj, "conjunction loss coefficient");
        opts["conj_mode"] = app->add_option("--conj-mode", conj_mode, "HINGE or ABS");
        opts["budget"] = app->add_option("--conj-budget", budget, "sampled triples per document");
        opts["eval_labels"] = app->add_option("--eval-labels", eval_labels, "labels pooled into dev micro-F1");
        app->add_flag("--no-edge-bias", no_edge_bias, "drop the edge-type attention bias");
        app->add_flag("--no-coref", no_coref, "drop coreference edges");
        app->add_flag("--no-ep-edges", no_ep_edges, "drop event / event-pair edges");
    }

    bool given(const std::string& k) const { return opts.at(k)->count() > 0; }

    RunConfig resolve() const {
        RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (given("seed")) rc.model.seed = rc.train.seed = seed;
        if (given("d")) rc.model.d = d;
        if (given("layers")) rc.model.layers = layers;
        if (given("heads")) rc.model.heads = heads;
        if (given("d_k")) rc.model.d_k = d_k;
        if (given("dropout")) rc.model.dropout = dropout;
        if (given("label_space")) rc.model.label_mode = parse_mode(label_space);
        if (given("encoder")) {
            if (encoder == "toy") rc.model.encoder = EncoderKind::Toy;
            else if (encoder == "precomputed") rc.model.encoder = EncoderKind::Precomputed;
            else throw UsageError("--encoder must be toy or precomputed");
        }
        if (given("feature_dim")) rc.model.feature_dim = feature_dim;
        if (given("max_pair_distance")) rc.model.max_pair_distance = max_pair_distance;
        if (no_edge_bias) rc.model.use_edge_bias = false;
        if (no_coref) rc.model.use_coref = false;
        if (no_ep_edges) rc.model.use_ep_edges = false;
        if (given("lr")) rc.train.lr = lr;
        if (given("weight_decay")) rc.train.weight_decay = weight_decay;
        if (given("epochs")) rc.train.max_epochs = epochs;
        if (given("patience")) rc.train.patience = patience;
        if (given("batch")) rc.train.batch = batch;
        if (given("gamma_sym")) rc.train.gamma_sym = gamma_sym;
        if (given("gamma_conj")) rc.train.gamma_conj = gamma_conj;
        if (given("conj_mode")) rc.train.conj_mode = parse_conj_mode(conj_mode);
        if (given("budget")) rc.train.conj_triple_budget = budget;
        if (given("eval_labels")) rc.train.eval_labels = parse_label_list(eval_labels);
        rc.model.validate();
        rc.train.validate();
        return rc;
    }
};

Corpus load_split(const fs::path& corpus_path, const std::string& features_path) {
    Corpus c = load_corpus(corpus_path);
    fs::path fp = features_path.empty() ? corpus_path.parent_path() / "features.jsonl" : fs::path(features_path);
    if (fs::exists(fp)) load_features(fp, c);
    return c;
}

std::optional<PrecomputedTable> load_embeddings(const ModelConfig& m, const std::string& path) {
    if (m.encoder != EncoderKind::Precomputed) return std::nullopt;
    if (path.empty()) throw UsageError("--embeddings is required with the precomputed encoder");
    return load_precomputed_all(path);
}

// ---- gen-data ----

struct GenDataArgs {
    std::string out, events, counts, ratios = "0.8,0.1,0.1", table;
    SyntheticWorldConfig world;
};

int cmd_gen_data(const GenDataArgs& a) {
    SyntheticWorldConfig w = a.world;
    if (!a.events.empty()) {
        auto dots = a.events.find("..");
        if (dots == std::string::npos) throw UsageError("--events expects MIN..MAX");
        w.events_min = std::stoul(a.events.substr(0, dots));
        w.events_max = std::stoul(a.events.substr(dots + 2));
    }
    SplitRatios ratios;
    if (!a.counts.empty()) {
        auto parts = split_list(a.counts);
        if (parts.size() != 3) throw UsageError("--counts expects TRAIN,DEV,TEST");
        std::array<std::size_t, 3> c{std::stoul(parts[0]), std::stoul(parts[1]), std::stoul(parts[2])};
        w.docs = c[0] + c[1] + c[2];
        if (w.docs == 0) throw UsageError("--counts must not all be zero");
        const double n = static_cast<double>(w.docs);
        ratios = {static_cast<double>(c[0]) / n, static_cast<double>(c[1]) / n, static_cast<double>(c[2]) / n};
        ratios.test = 1.0 - ratios.train - ratios.dev;
    } else {
        auto parts = split_list(a.ratios);
        if (parts.size() != 3) throw UsageError("--ratios expects TRAIN,DEV,TEST");
        ratios = {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    }
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const ConjunctionTable table = table_from(a.table);
    const Corpus all = generate_synthetic(w, table);
    const CorpusSplit parts = split(all, ratios, w.seed);

    const fs::path out(a.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw DataError("cannot create " + out.string() + ": " + ec.message());
    write_corpus(out / "train.jsonl", parts.train);
    write_corpus(out / "dev.jsonl", parts.dev);
    write_corpus(out / "test.jsonl", parts.test);
    write_features(out / "features.jsonl", all);

    nlohmann::ordered_json m;
    m["generator"] = "logicere synthetic world";
    m["seed"] = w.seed;
    m["config"] = {{"docs", w.docs},
                   {"events_min", w.events_min},
                   {"events_max", w.events_max},
                   {"coref_rate", w.coref_rate},
                   {"containment_rate", w.containment_rate},
                   {"vague_rate", w.vague_rate},
                   {"equal_rate", w.equal_rate},
                   {"feature_dim", w.feature_dim},
                   {"noise_std", w.noise_std}};
    m["split"] = {{"train", parts.train.documents.size()},
                  {"dev", parts.dev.documents.size()},
                  {"test", parts.test.documents.size()}};
    m["feature_version"] = std::string(kSyntheticFeatureVersion);
    m["table_version"] = table.version;
    write_file(out / "manifest.json", m.dump(2) + "\n");
    std::cout << m.dump() << "\n";
    return 0;
}

// ---- train ----

struct TrainArgs {
    ConfigFlags flags;
    std::string data, train_path, dev_path, features, out, table, embeddings;
};

int cmd_train(const TrainArgs& a) {
    const RunConfig rc = a.flags.resolve();
    fs::path train_path = a.train_path, dev_path = a.dev_path;
    if (!a.data.empty()) {
        if (train_path.empty()) train_path = fs::path(a.data) / "train.jsonl";
        if (dev_path.empty()) dev_path = fs::path(a.data) / "dev.jsonl";
    }
    if (train_path.empty() || dev_path.empty()) throw UsageError("train needs --data DIR or --train and --dev");
    const Corpus tr = load_split(train_path, a.features);
    const Corpus dv = load_split(dev_path, a.features);
    const auto emb = load_embeddings(rc.model, a.embeddings);
    const ConjunctionTable table = table_from(a.table);

    const fs::path out(a.out);
    fs::create_directories(out);
    write_file(out / "config.json", run_config_to_json(rc) + "\n");
    std::ofstream metrics(out / "metrics.jsonl");
    if (!metrics) throw DataError("cannot write " + (out / "metrics.jsonl").string());

    Checkpoint ckpt;
    ckpt.config_hash = config_hash(rc.model);
    ckpt.config_json = run_config_to_json(rc);
    TrainHooks hooks;
    hooks.metrics = &metrics;
    hooks.on_best = [&](const ParamStore& p, std::size_t) {
        ckpt.params = p;
        save_checkpoint(out / "checkpoint.json", ckpt);
    };
    const TrainResult res = train(tr, dv, rc.model, rc.train, table, hooks, emb ? &*emb : nullptr);

    nlohmann::ordered_json s;
    s["epochs"] = res.history.size();
    s["best_epoch"] = res.best_epoch;
    s["best_dev_micro_f1"] = res.best_dev_f1;
    s["config_hash"] = ckpt.config_hash;
    s["checkpoint"] = (out / "checkpoint.json").string();
    std::cout << s.dump() << "\n";
    return 0;
}

// ---- eval / predict ----

struct ModelArgs {
    std::string checkpoint, config, data, features, embeddings, table;
};

struct LoadedModel {
    Checkpoint ckpt;
    RunConfig rc;
};

LoadedModel load_model(const ModelArgs& a) {
    LoadedModel lm;
    lm.ckpt = load_checkpoint(a.checkpoint);
    lm.rc = run_config_from_json(lm.ckpt.config_json);
    if (!a.config.empty()) {
        const RunConfig given = load_run_config(a.config);
        const std::string h = config_hash(given.model);
        if (h != lm.ckpt.config_hash) {
            throw DataError("config hash mismatch: " + a.config + " hashes to " + h + ", checkpoint records " +
                            lm.ckpt.config_hash);
        }
        lm.rc.model = given.model;
    }
    if (config_hash(lm.rc.model) != lm.ckpt.config_hash) {
        throw DataError("checkpoint config does not match its recorded hash " + lm.ckpt.config_hash);
    }
    return lm;
}

int cmd_eval(const ModelArgs& a, const std::string& positive, const std::string& out, bool json) {
    LoadedModel lm = load_model(a);
    const Corpus c = load_split(a.data, a.features);
    const auto emb = load_embeddings(lm.rc.model, a.embeddings);
    const ConjunctionTable table = table_from(a.table);
    const PredictionTable preds = predict(c, lm.ckpt.params, lm.rc.model, emb ? &*emb : nullptr);
    std::optional<LabelSet> pos;
    if (!positive.empty()) pos = parse_label_list(positive);
    const MetricsReport rep = evaluate(preds, table, pos);
    if (!out.empty()) write_file(out, report_to_json(rep) + "\n");
    std::cout << (json ? report_to_json(rep) + "\n" : report_to_text(rep));
    return 0;
}

std::string prediction_lines(const PredictionTable& preds) {
    std::string text;
    for (const auto& doc : preds.docs) {
        for (std::size_t r = 0; r < doc.pairs.size(); ++r) {
            const auto [i, j] = doc.pairs[r];
            nlohmann::ordered_json line;
            line["doc_id"] = doc.doc_id;
            line["source"] = doc.event_ids[i];
            line["target"] = doc.event_ids[j];
            line["label"] = std::string(label_name(argmax_label(doc.probs[r], preds.space)));
            nlohmann::ordered_json probs;
            for (std::size_t p = 0; p < preds.space.size(); ++p) {
                probs[std::string(label_name(preds.space.labels[p]))] = doc.probs[r][p];
            }
            line["probs"] = probs;
            text += line.dump() + "\n";
        }
    }
    return text;
}

int cmd_predict(const ModelArgs& a, const std::string& out, const std::string& graph_out) {
    LoadedModel lm = load_model(a);
    const Corpus c = load_split(a.data, a.features);
    if (!graph_out.empty()) {
        std::string lines;
        for (const auto& doc : c.documents) {
            auto j = nlohmann::ordered_json::parse(lcg_to_json(build_lcg(doc, lm.rc.model.lcg_options())));
            nlohmann::ordered_json line;
            line["doc_id"] = doc.doc_id;
            line["graph"] = j;
            lines += line.dump() + "\n";
        }
        write_file(graph_out, lines);
    }
    const auto emb = load_embeddings(lm.rc.model, a.embeddings);
    const PredictionTable preds = predict(c, lm.ckpt.params, lm.rc.model, emb ? &*emb : nullptr);
    const std::string text = prediction_lines(preds);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file(out, text);
    }
    return 0;
}

// ---- check-coherence ----

// Reads either a prediction JSONL (lines with "label") or a corpus JSONL (gold labels).
std::vector<LabelGraph> label_graphs(const fs::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::vector<std::tuple<std::string, std::string, RelationLabel>>> by_doc;
    std::vector<std::string> doc_order;
    std::vector<LabelGraph> graphs;
    bool predictions = false, corpus = false;
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
        if (j.contains("label")) {
            predictions = true;
            try {
                const auto id = j.at("doc_id").get<std::string>();
                if (!by_doc.count(id)) doc_order.push_back(id);
                by_doc[id].emplace_back(j.at("source").get<std::string>(), j.at("target").get<std::string>(),
                                        parse_label(j.at("label").get<std::string>()));
            } catch (const std::exception& e) {
                throw DataError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
        } else {
            corpus = true;
            Document d;
            try {
                d = parse_document_line(line);
            } catch (const DataError& e) {
                throw DataError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
            graphs.push_back(gold_graph(d));
        }
    }
    if (predictions && corpus) throw DataError(path.string() + ": mixes predictions and documents");
    for (const auto& id : doc_order) {
        std::set<std::string> ids;
        for (const auto& [s, t, l] : by_doc[id]) {
            ids.insert(s);
            ids.insert(t);
        }
        const std::vector<std::string> sorted(ids.begin(), ids.end());
        auto pos = [&](const std::string& e) {
            return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), e) - sorted.begin());
        };
        LabelGraph g;
        g.num_events = sorted.size();
        for (const auto& [s, t, l] : by_doc[id]) g.labels[{pos(s), pos(t)}] = l;
        graphs.push_back(std::move(g));
    }
    return graphs;
}

int cmd_check_coherence(const std::string& input, const std::string& table_path) {
    const ConjunctionTable table = table_from(table_path);
    const auto graphs = label_graphs(input);
    const auto sym = symmetry_violations(graphs);
    const auto conj = conjunction_violations(graphs, table);
    nlohmann::ordered_json j;
    j["documents"] = graphs.size();
    j["sym_violation_rate"] = sym.rate();
    j["sym_pairs"] = sym.total;
    j["sym_violations"] = sym.violations;
    j["conj_violation_rate"] = conj.rate();
    j["conj_triples"] = conj.total;
    j["conj_violations"] = conj.violations;
    std::cout << j.dump() << "\n";
    return 0;
}

// ---- gradcheck ----

struct GradcheckArgs {
    ConfigFlags flags;
    std::size_t events = 3;
    double h = 1e-5, tol = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a) {
    RunConfig rc = a.flags.resolve();
    // Tiny defaults unless overridden.
    if (!a.flags.given("d") && a.flags.config_path.empty()) rc.model.d = 8;
    if (!a.flags.given("heads") && a.flags.config_path.empty()) rc.model.heads = 2;
    rc.model.dropout = 0.0;
    rc.model.validate();

    SyntheticWorldConfig w;
    w.docs = 1;
    w.events_min = w.events_max = a.events;
    w.feature_dim = rc.model.feature_dim;
    w.seed = rc.train.seed;
    Corpus c;
    FeatureTable ft;
    c.documents.push_back(generate_document(w, 0, default_table(), &ft));
    c.features[c.documents[0].doc_id] = ft;

    ParamStore params = init_params(rc.model);
    const auto rep = gradcheck(document_objective(c.documents[0], c, rc.model, rc.train, default_table()), params,
                               a.h, a.tol);
    nlohmann::ordered_json j;
    j["passed"] = rep.passed;
    j["max_rel_error"] = rep.max_rel_error;
    j["tolerance"] = rep.tolerance;
    nlohmann::ordered_json per;
    for (const auto& t : rep.tensors) per[t.name] = t.max_rel_error;
    j["tensors"] = per;
    std::cout << j.dump(2) << "\n";
    if (!rep.passed) {
        std::cerr << "gradcheck failed: max relative error " << rep.max_rel_error << " > " << rep.tolerance << "\n";
        return 3;
    }
    return 0;
}

// ---- derive-table ----

int cmd_derive_table(bool merged, const std::string& out) {
    const std::string text = table_to_json(merged ? default_table() : derive_temporal_table()) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file(out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LogicERE: logic-constrained event relation extraction"};
    app.require_subcommand(1);
    std::function<int()> run;

    GenDataArgs gen;
    auto* g = app.add_subcommand("gen-data", "generate a synthetic corpus with train/dev/test splits");
    g->add_option("--out", gen.out, "output directory")->required();
    g->add_option("--seed", gen.world.seed, "world seed");
    g->add_option("--docs", gen.world.docs, "number of documents");
    g->add_option("--events", gen.events, "events per document as MIN..MAX");
    g->add_option("--events-min", gen.world.events_min, "minimum events per document");
    g->add_option("--events-max", gen.world.events_max, "maximum events per document");
    g->add_option("--counts", gen.counts, "exact split sizes TRAIN,DEV,TEST (overrides --docs)");
    g->add_option("--ratios", gen.ratios, "split ratios TRAIN,DEV,TEST");
    g->add_option("--coref-rate", gen.world.coref_rate, "probability an event gets a coreferent mention");
    g->add_option("--containment-rate", gen.world.containment_rate, "probability an event nests in another");
    g->add_option("--vague-rate", gen.world.vague_rate, "probability a temporal pair is relabeled VAGUE");
    g->add_option("--equal-rate", gen.world.equal_rate, "probability an event copies a sibling's interval");
    g->add_option("--feature-dim", gen.world.feature_dim, "raw feature width");
    g->add_option("--noise", gen.world.noise_std, "feature noise standard deviation");
    g->add_option("--table", gen.table, "conjunction table JSON (default: built in)");
    g->callback([&] { run = [&] { return cmd_gen_data(gen); }; });

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train a model and write checkpoint.json and metrics.jsonl");
    tr.flags.add(t);
    t->add_option("--data", tr.data, "directory with train.jsonl, dev.jsonl and features.jsonl");
    t->add_option("--train", tr.train_path, "training corpus JSONL");
    t->add_option("--dev", tr.dev_path, "dev corpus JSONL");
    t->add_option("--features", tr.features, "feature JSONL (default: next to the corpus)");
    t->add_option("--embeddings", tr.embeddings, "precomputed embedding JSONL");
    t->add_option("--table", tr.table, "conjunction table JSON");
    t->add_option("--out", tr.out, "output directory")->required();
    t->callback([&] { run = [&] { return cmd_train(tr); }; });

    ModelArgs ev;
    std::string ev_positive, ev_out;
    bool ev_json = false;
    auto* e = app.add_subcommand("eval", "score a checkpoint on a corpus");
    e->add_option("--checkpoint", ev.checkpoint, "checkpoint JSON")->required();
    e->add_option("--data", ev.data, "corpus JSONL")->required();
    e->add_option("--config", ev.config, "config whose model section must match the checkpoint");
    e->add_option("--features", ev.features, "feature JSONL");
    e->add_option("--embeddings", ev.embeddings, "precomputed embedding JSONL");
    e->add_option("--table", ev.table, "conjunction table JSON");
    e->add_option("--positive", ev_positive, "labels pooled into micro-F1, comma separated");
    e->add_option("--out", ev_out, "write the JSON report here");
    e->add_flag("--json", ev_json, "print JSON instead of the text table");
    e->callback([&] { run = [&] { return cmd_eval(ev, ev_positive, ev_out, ev_json); }; });

    ModelArgs pr;
    std::string pr_out, pr_graph;
    auto* p = app.add_subcommand("predict", "write per-pair labels and probabilities as JSONL");
    p->add_option("--checkpoint", pr.checkpoint, "checkpoint JSON")->required();
    p->add_option("--data", pr.data, "corpus JSONL")->required();
    p->add_option("--config", pr.config, "config whose model section must match the checkpoint");
    p->add_option("--features", pr.features, "feature JSONL");
    p->add_option("--embeddings", pr.embeddings, "precomputed embedding JSONL");
    p->add_option("--out", pr_out, "output JSONL (default: stdout)");
    p->add_option("--dump-graph", pr_graph, "also write each document's LCG as JSONL");
    p->callback([&] { run = [&] { return cmd_predict(pr, pr_out, pr_graph); }; });

    std::string cc_input, cc_table;
    auto* cc = app.add_subcommand("check-coherence", "symmetry and conjunction violation rates of a label file");
    cc->add_option("--input", cc_input, "prediction JSONL or corpus JSONL")->required();
    cc->add_option("--table", cc_table, "conjunction table JSON");
    cc->callback([&] { run = [&] { return cmd_check_coherence(cc_input, cc_table); }; });

    GradcheckArgs gc;
    auto* gcmd = app.add_subcommand("gradcheck", "compare backward() with central differences on a tiny model");
    gc.flags.add(gcmd);
    gcmd->add_option("--events", gc.events, "events in the probe document");
    gcmd->add_option("--step", gc.h, "finite-difference step");
    gcmd->add_option("--tol", gc.tol, "relative error tolerance");
    gcmd->callback([&] { run = [&] { return cmd_gradcheck(gc); }; });

    bool dt_merged = false;
    std::string dt_out;
    auto* dt = app.add_subcommand("derive-table", "emit the conjunction table with provenance tags");
    dt->add_flag("--merged", dt_merged, "the shipped table merged over the oracle instead of the oracle alone");
    dt->add_option("--out", dt_out, "output file (default: stdout)");
    dt->callback([&] { run = [&] { return cmd_derive_table(dt_merged, dt_out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 1;
    }

    try {
        return run();
    } catch (const NumericError& err) {
        std::cerr << "numeric failure: " << err.what() << "\n";
        return 3;
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& err) {
        std::cerr << "invalid argument: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return 2;
    }
}
