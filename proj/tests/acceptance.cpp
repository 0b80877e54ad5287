// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logicere/config.hpp"
#include "logicere/rng.hpp"
#include "logicere/training.hpp"

using namespace logicere;
using L = RelationLabel;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& f) {
    try {
        report(id, name, f());
    } catch (const std::exception& e) {
        report(id, name, {false, std::string("exception: ") + e.what()});
    }
}

std::string fmt(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- 1 ----

Outcome label_algebra() {
    const std::set<std::pair<L, L>> expected{{L::Before, L::After}, {L::After, L::Before},
                                             {L::ParentChild, L::ChildParent}, {L::ChildParent, L::ParentChild},
                                             {L::Equal, L::Equal}, {L::Vague, L::Vague},
                                             {L::Coref, L::Coref}, {L::NoRel, L::NoRel}};
    std::size_t ok = 0;
    for (auto l : kAllLabels) ok += expected.count({l, reverse(l)}) && reverse(reverse(l)) == l;
    return {ok == kNumLabels, std::to_string(ok) + "/8 labels map to their reciprocal or themselves, involution holds"};
}

// ---- 2 ----

Outcome table_oracle() {
    const auto oracle = derive_temporal_table();
    auto rel = [](int x, int y) { return x < y ? L::Before : (x > y ? L::After : L::Equal); };
    const LabelSet ordered{L::Before, L::After, L::Equal};
    std::size_t cells = 0, agree = 0;
    for (auto r1 : ordered.labels())
        for (auto r2 : ordered.labels()) {
            LabelSet found;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 3; ++c)
                        if (rel(a, b) == r1 && rel(b, c) == r2) found.insert(rel(a, c));
            ++cells;
            agree += deduction_set(oracle, r1, r2, ordered) == found;
        }
    const auto& t = default_table();
    std::size_t coref_bad = 0, rev_bad = 0;
    for (auto r : kAllLabels) {
        coref_bad += deduction_set(t, L::Coref, r) != LabelSet{r};
        coref_bad += deduction_set(t, r, L::Coref) != LabelSet{r};
    }
    for (auto r1 : kAllLabels)
        for (auto r2 : kAllLabels)
            for (auto r3 : deduction_set(t, r1, r2).labels())
                rev_bad += !deduction_set(t, reverse(r2), reverse(r1)).contains(reverse(r3));
    return {agree == cells && coref_bad == 0 && rev_bad == 0,
            std::to_string(agree) + "/" + std::to_string(cells) + " oracle cells match enumeration; " +
                std::to_string(coref_bad) + " COREF-identity and " + std::to_string(rev_bad) +
                " reversal-symmetry violations in " + t.version};
}

// ---- 3 ----

Outcome lcg_structure() {
    std::size_t checked = 0, bad = 0;
    for (std::size_t k = 2; k <= 7; ++k) {
        Document d;
        d.doc_id = "k" + std::to_string(k);
        for (std::size_t i = 0; i < k; ++i) {
            d.tokens.push_back("w");
            d.events.push_back({"e" + std::to_string(i), i, i + 1, "w"});
        }
        if (k >= 4) d.coref_clusters = {{"e0", "e1", "e3"}};
        const Lcg g = build_lcg(d);
        // Brute-force counts.
        std::size_t pairs = 0, pp = 0;
        std::vector<std::pair<std::size_t, std::size_t>> ps;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j) ps.push_back({i, j});
        pairs = ps.size();
        for (std::size_t a = 0; a < ps.size(); ++a)
            for (std::size_t b = a + 1; b < ps.size(); ++b) {
                const auto [i, j] = ps[a];
                const auto [u, v] = ps[b];
                pp += (i == u || i == v || j == u || j == v);
            }
        const std::size_t ee = k >= 4 ? 3 : 0;
        const LcgStats want{k, pairs, ee, pp, 2 * pairs};
        ++checked;
        bad += !(lcg_stats(g) == want);
        for (std::size_t n = k; n < g.num_nodes(); ++n) {
            std::size_t ep = 0;
            for (const auto& nb : neighbors(g, n)) ep += nb.type == EdgeType::EP;
            bad += ep != 2;
        }
    }
    return {bad == 0, std::to_string(checked) + " graphs (k=2..7) match the enumerator, EP-degree 2 on every pair node"};
}

// ---- 4 ----

Outcome autodiff_soundness() {
    SyntheticWorldConfig w;
    w.docs = 1;
    w.events_min = w.events_max = 3;
    FeatureTable ft;
    Corpus c;
    c.documents.push_back(generate_document(w, 0, default_table(), &ft));
    c.features[c.documents[0].doc_id] = ft;
    ModelConfig m;
    m.d = 8;
    m.layers = 2;
    m.heads = 2;
    m.dropout = 0.0;
    TrainConfig t;
    t.gamma_sym = t.gamma_conj = 0.2;
    ParamStore ps = init_params(m);
    const auto rep = gradcheck(document_objective(c.documents[0], c, m, t, default_table()), ps, 1e-5, 1e-4);
    return {rep.passed && rep.max_rel_error < 1e-4,
            "max relative error " + fmt(rep.max_rel_error) + " over " + std::to_string(ps.scalar_count()) +
                " parameters (tol 1e-4)"};
}

// ---- 5 ----

Outcome normalization() {
    double worst = 0.0;
    std::size_t rows = 0;
    for (std::size_t trial = 0; trial < 1000; ++trial) {
        auto eng = make_engine(derive_key(0xACCE55, trial));
        SyntheticWorldConfig w;
        w.events_min = 2;
        w.events_max = 6;
        w.seed = trial;
        FeatureTable ft;
        Corpus c;
        c.documents.push_back(generate_document(w, 0, default_table(), &ft));
        c.features[c.documents[0].doc_id] = ft;
        ModelConfig m;
        m.d = 4 + 2 * static_cast<std::size_t>(uniform_int(eng, 0, 2));
        m.heads = 1 + static_cast<std::size_t>(uniform_int(eng, 0, 1));
        m.layers = 1 + static_cast<std::size_t>(uniform_int(eng, 0, 1));
        m.use_coref = uniform(eng) < 0.5;
        m.use_ep_edges = uniform(eng) < 0.5;
        m.seed = trial;
        ParamStore ps = init_params(m);
        // Scale the weights up so softmax inputs span a wide range.
        const double scale = 1.0 + 9.0 * uniform(eng);
        for (auto& [name, p] : ps)
            for (auto& x : p.values()) x *= scale;
        Tape tape;
        const auto& doc = c.documents[0];
        auto enc = encode_document(tape, doc, c, ps, m, nullptr);
        const Lcg g = build_lcg(doc, m.lcg_options());
        const auto ag = AttentionGraph::from(g);
        auto r = forward_document(tape, enc, g, ps, m, Mode::Train, trial);
        for (const auto& layer : r.attention)
            for (const auto& w8 : layer.weights)
                for (std::size_t i = 0; i < ag.n; ++i) {
                    bool live = false;
                    double s = 0;
                    for (std::size_t j = 0; j < ag.n; ++j) {
                        live |= ag.mask[i * ag.n + j] != 0;
                        s += w8.value()(i, j);
                    }
                    if (!live) continue;
                    worst = std::max(worst, std::abs(s - 1.0));
                    ++rows;
                }
        for (std::size_t p = 0; p < r.pairs.size(); ++p) {
            double s = 0;
            for (std::size_t l = 0; l < r.probs.cols(); ++l) s += r.probs.value()(p, l);
            worst = std::max(worst, std::abs(s - 1.0));
            ++rows;
        }
    }
    return {worst <= 1e-9, std::to_string(rows) + " attention and classifier rows over 1000 trials, max |sum-1| = " +
                               fmt(worst)};
}

// ---- 6 ----

Outcome loss_fixed_points() {
    const auto joint = LabelSpace::make(LabelMode::Joint);
    const auto tre = LabelSpace::make(LabelMode::SplitTre);
    double worst_sym = 0.0, worst_conj = 0.0;
    auto eng = make_engine(66);
    // Reversal-consistent random tables.
    for (int trial = 0; trial < 100; ++trial) {
        DocumentPredictions d;
        const std::size_t k = 3 + static_cast<std::size_t>(uniform_int(eng, 0, 3));
        for (std::size_t i = 0; i < k; ++i) d.event_ids.push_back(std::to_string(i));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) {
                std::vector<double> row(joint.size());
                double z = 0;
                for (auto& x : row) z += (x = 0.01 + uniform(eng));
                for (auto& x : row) x /= z;
                std::vector<double> back(row.size());
                for (std::size_t p = 0; p < row.size(); ++p)
                    back[static_cast<std::size_t>(joint.position(reverse(joint.labels[p])))] = row[p];
                d.pairs.push_back({i, j});
                d.probs.push_back(row);
                d.pairs.push_back({j, i});
                d.probs.push_back(back);
            }
        worst_sym = std::max(worst_sym, std::abs(loss_sym(d, joint)));
    }
    // Table-consistent one-hot tables: gold graphs of synthetic documents.
    SyntheticWorldConfig w;
    w.docs = 30;
    const Corpus c = generate_synthetic(w);
    for (const auto& doc : c.documents) {
        const auto g = gold_graph(doc);
        DocumentPredictions d;
        for (std::size_t i = 0; i < g.num_events; ++i) d.event_ids.push_back(std::to_string(i));
        for (const auto& [p, l] : g.labels) {
            std::vector<double> row(joint.size(), 0.0);
            row[static_cast<std::size_t>(joint.position(l))] = 1.0;
            d.pairs.push_back(p);
            d.probs.push_back(row);
        }
        worst_conj = std::max(worst_conj, std::abs(loss_conj(d, default_table(), joint, ConjMode::Hinge, 1u << 20)));
    }
    // Hand examples.
    DocumentPredictions s;
    s.event_ids = {"a", "b"};
    s.pairs = {{0, 1}, {1, 0}};
    s.probs = {{0.8, 0.1, 0.05, 0.05}, {0.1, 0.4, 0.05, 0.05}};
    const double sym = loss_sym(s, tre);

    ConjunctionTable only;
    only.set(L::Before, L::Before, LabelSet{L::Before}, EntryProvenance::OracleDerived);
    DocumentPredictions t;
    t.event_ids = {"a", "b", "c"};
    t.pairs = {{0, 1}, {1, 2}, {0, 2}};
    t.probs = {{0.9, 0.05, 0.03, 0.02}, {0.9, 0.05, 0.03, 0.02}, {0.5, 0.18, 0.17, 0.15}};
    // One deduced term plus three clipped exclusion terms on this triple.
    const double hinge_term = 4.0 * loss_conj(t, only, tre, ConjMode::Hinge);

    const bool ok = worst_sym <= 1e-12 && worst_conj <= 1e-12 && std::abs(sym - 0.6931) <= 1e-4 &&
                    std::abs(hinge_term - 0.4824) <= 1e-4;
    return {ok, "max |Lsym| " + fmt(worst_sym) + ", max |Lconj| " + fmt(worst_conj) + ", symmetry example " +
                    fmt(sym) + ", hinge example " + fmt(hinge_term)};
}

// ---- 7-10: end-to-end runs ----

struct E2E {
    CorpusSplit data;
    ModelConfig model;
    TrainConfig train;
};

const LabelSet kTemporal{L::Before, L::After, L::Equal};

E2E acceptance_setup() {
    SyntheticWorldConfig w;
    w.seed = 7;
    w.docs = 80;
    w.events_min = 6;
    w.events_max = 10;
    const Corpus all = generate_synthetic(w);
    E2E e;
    e.data = split(all, {50.0 / 80.0, 10.0 / 80.0, 20.0 / 80.0}, w.seed);
    e.model.d = 16;
    e.model.layers = 2;
    e.model.heads = 2;
    e.train.gamma_sym = e.train.gamma_conj = 0.2;
    e.train.conj_mode = ConjMode::Hinge;
    e.train.patience = 20;
    e.train.max_epochs = 200;
    e.train.eval_labels = kTemporal;
    return e;
}

struct RunMetrics {
    double test_f1 = 0, test_p = 0, test_r = 0, sym = 0, conj = 0, best_dev = 0;
    std::size_t best_epoch = 0, epochs = 0;
    double seconds = 0;
    std::vector<double> losses;
    ParamStore params;
};

RunMetrics run_once(const E2E& e, const ModelConfig& m, const TrainConfig& t) {
    const auto start = std::chrono::steady_clock::now();
    TrainResult r = train(e.data.train, e.data.dev, m, t, default_table());
    RunMetrics out;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto preds = predict(e.data.test, r.best_params, m);
    const auto rep = evaluate(preds, default_table(), kTemporal);
    out.test_f1 = rep.micro_f1;
    out.test_p = rep.micro_p;
    out.test_r = rep.micro_r;
    out.sym = rep.sym_violation_rate;
    out.conj = rep.conj_violation_rate;
    out.best_dev = r.best_dev_f1;
    out.best_epoch = r.best_epoch;
    out.epochs = r.history.size();
    for (const auto& h : r.history) {
        out.losses.push_back(h.train_loss);
        out.losses.push_back(h.dev_micro_f1);
    }
    out.params = std::move(r.best_params);
    return out;
}

std::vector<RunMetrics> run_seeds(const E2E& e, double gamma, const char* tag) {
    std::vector<RunMetrics> runs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ModelConfig m = e.model;
        TrainConfig t = e.train;
        m.seed = t.seed = seed;
        t.gamma_sym = t.gamma_conj = gamma;
        runs.push_back(run_once(e, m, t));
        const auto& r = runs.back();
        std::printf("  [%s seed %llu] epochs %zu best %zu dev %.4f test F1 %.4f sym %.4f conj %.4f (%.1fs)\n", tag,
                    static_cast<unsigned long long>(seed), r.epochs, r.best_epoch, r.best_dev, r.test_f1, r.sym, r.conj,
                    r.seconds);
        std::fflush(stdout);
    }
    return runs;
}

std::vector<double> column(const std::vector<RunMetrics>& runs, double RunMetrics::*f) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*f);
    return v;
}

}  // namespace

int main() {
    run_criterion(1, "label algebra", label_algebra);
    run_criterion(2, "conjunction-table oracle", table_oracle);
    run_criterion(3, "LCG structure", lcg_structure);
    run_criterion(4, "autodiff soundness", autodiff_soundness);
    run_criterion(5, "normalization invariants", normalization);
    run_criterion(6, "logic-loss fixed points", loss_fixed_points);

    const E2E e = acceptance_setup();
    std::printf("  end-to-end config: %s\n",
                run_config_to_json({e.model, e.train}).c_str());
    std::vector<RunMetrics> full, ablated, repeat;

    run_criterion(7, "end-to-end synthetic learning", [&] {
        full = run_seeds(e, 0.2, "full");
        const double med = median(column(full, &RunMetrics::test_f1));
        const std::vector<double> secs = column(full, &RunMetrics::seconds);
        const double max_s = *std::max_element(secs.begin(), secs.end());
        return Outcome{med >= 0.80 && max_s <= 600.0,
                       "median test micro-F1 over BEFORE/AFTER/EQUAL " + fmt(med) + " (>= 0.80), slowest run " +
                           fmt(max_s) + " s (<= 600 s)"};
    });

    run_criterion(8, "logic losses reduce incoherence", [&] {
        if (full.empty()) throw std::runtime_error("criterion 7 did not produce runs");
        ablated = run_seeds(e, 0.0, "gamma=0");
        const double fs = median(column(full, &RunMetrics::sym)), as = median(column(ablated, &RunMetrics::sym));
        const double fc = median(column(full, &RunMetrics::conj)), ac = median(column(ablated, &RunMetrics::conj));
        return Outcome{fs <= as && fc <= ac, "median symmetry " + fmt(fs) + " vs " + fmt(as) +
                                                 ", median conjunction " + fmt(fc) + " vs " + fmt(ac) +
                                                 " (full vs gamma=0)"};
    });

    run_criterion(9, "ablation machinery", [&] {
        struct Toggle {
            const char* name;
            std::function<void(ModelConfig&, TrainConfig&)> apply;
        };
        const std::vector<Toggle> toggles{
            {"no-edge-bias", [](ModelConfig& m, TrainConfig&) { m.use_edge_bias = false; }},
            {"no-coref", [](ModelConfig& m, TrainConfig&) { m.use_coref = false; }},
            {"no-ep-edges", [](ModelConfig& m, TrainConfig&) { m.use_ep_edges = false; }},
            {"gamma-sym 0", [](ModelConfig&, TrainConfig& t) { t.gamma_sym = 0.0; }},
            {"gamma-conj 0", [](ModelConfig&, TrainConfig& t) { t.gamma_conj = 0.0; }},
            {"both gammas 0", [](ModelConfig&, TrainConfig& t) { t.gamma_sym = t.gamma_conj = 0.0; }},
        };
        std::size_t completed = 0;
        std::string rows;
        RunMetrics no_bias;
        ModelConfig no_bias_cfg;
        for (const auto& tg : toggles) {
            ModelConfig m = e.model;
            TrainConfig t = e.train;
            t.max_epochs = 15;
            tg.apply(m, t);
            RunMetrics r = run_once(e, m, t);
            const bool finite = std::isfinite(r.test_f1) && std::isfinite(r.sym) && std::isfinite(r.conj);
            completed += finite;
            rows += std::string(rows.empty() ? "" : ", ") + tg.name + " F1 " + fmt(r.test_f1);
            if (std::string(tg.name) == "no-edge-bias") {
                no_bias = std::move(r);
                no_bias_cfg = m;
            }
        }
        // The same weights with the bias path on but beta forced to zero.
        ParamStore zeroed = no_bias.params;
        zeroed.at(param_names::edge_r()) = Tensor({kNumEdgeTypes, e.model.edge_dim()}, 0.0);
        ModelConfig with_bias = no_bias_cfg;
        with_bias.use_edge_bias = true;
        ParamStore off_params = no_bias.params;
        const auto a = predict(e.data.test, off_params, no_bias_cfg);
        const auto b = predict(e.data.test, zeroed, with_bias);
        bool identical = a.docs.size() == b.docs.size();
        for (std::size_t d = 0; identical && d < a.docs.size(); ++d) identical = a.docs[d].probs == b.docs[d].probs;
        return Outcome{completed == toggles.size() && identical,
                       std::to_string(completed) + "/6 toggles produced reports (" + rows +
                           "); no-edge-bias vs beta-zeroed predictions " + (identical ? "bit-identical" : "DIFFER")};
    });

    run_criterion(10, "determinism", [&] {
        if (full.empty()) throw std::runtime_error("criterion 7 did not produce runs");
        repeat = run_seeds(e, 0.2, "repeat");
        double worst = 0.0;
        bool same_shape = true;
        for (std::size_t i = 0; i < full.size(); ++i) {
            const auto& x = full[i];
            const auto& y = repeat[i];
            for (auto f : {&RunMetrics::test_f1, &RunMetrics::test_p, &RunMetrics::test_r, &RunMetrics::sym,
                           &RunMetrics::conj, &RunMetrics::best_dev})
                worst = std::max(worst, std::abs(x.*f - y.*f));
            same_shape &= x.losses.size() == y.losses.size() && x.best_epoch == y.best_epoch;
            for (std::size_t k = 0; same_shape && k < x.losses.size(); ++k)
                worst = std::max(worst, std::abs(x.losses[k] - y.losses[k]));
        }
        return Outcome{same_shape && worst <= 1e-9,
                       "max metric difference across 5 repeated runs " + fmt(worst) + " (<= 1e-9)"};
    });

    std::printf("%s: %d criterion failure(s)\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
