#include "logicere/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "logicere/rng.hpp"

namespace logicere {

std::string_view conj_mode_name(ConjMode m) { return m == ConjMode::Hinge ? "HINGE" : "ABS"; }

ConjMode parse_conj_mode(std::string_view name) {
    if (name == "HINGE" || name == "hinge") return ConjMode::Hinge;
    if (name == "ABS" || name == "abs") return ConjMode::Abs;
    throw std::invalid_argument("unknown conjunction mode '" + std::string(name) + "' (expected HINGE or ABS)");
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be positive");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("train config: weight_decay must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("train config: betas must lie in [0,1)");
    }
    if (!(adam_eps > 0.0)) throw std::invalid_argument("train config: adam_eps must be positive");
    if (batch == 0) throw std::invalid_argument("train config: batch must be positive");
    if (max_epochs == 0) throw std::invalid_argument("train config: max_epochs must be positive");
    if (!(gamma_sym >= 0.0) || !(gamma_conj >= 0.0)) {
        throw std::invalid_argument("train config: loss coefficients must be non-negative");
    }
}

PairScores PairScores::from(std::size_t num_events, std::vector<std::pair<std::size_t, std::size_t>> pairs,
                            Var probs, Var log_probs) {
    PairScores s;
    s.num_events = num_events;
    s.pairs = std::move(pairs);
    s.row_of.assign(num_events * num_events, -1);
    for (std::size_t r = 0; r < s.pairs.size(); ++r) {
        const auto [i, j] = s.pairs[r];
        if (i >= num_events || j >= num_events) throw std::invalid_argument("PairScores: pair index out of range");
        s.row_of[i * num_events + j] = static_cast<long>(r);
    }
    s.probs = probs;
    s.log_probs = log_probs;
    return s;
}

std::optional<Var> loss_ce(const PairScores& s, const GoldByPosition& gold, const LabelSpace& space) {
    const std::size_t nl = space.size();
    std::vector<std::size_t> idx;
    for (const auto& [p, l] : gold) {
        const int pos = space.position(l);
        if (pos < 0 || p.first >= s.num_events || p.second >= s.num_events) continue;
        const long r = s.row(p.first, p.second);
        if (r < 0) continue;
        idx.push_back(static_cast<std::size_t>(r) * nl + static_cast<std::size_t>(pos));
    }
    if (idx.empty()) return std::nullopt;
    return ad::scale(ad::mean(ad::gather(s.log_probs, idx, {1, idx.size()})), -1.0);
}

std::optional<Var> loss_sym(const PairScores& s, const LabelSpace& space) {
    const std::size_t nl = space.size();
    std::vector<std::size_t> a, b;
    std::size_t unordered = 0;
    for (std::size_t r = 0; r < s.pairs.size(); ++r) {
        const auto [i, j] = s.pairs[r];
        if (i >= j) continue;
        const long back = s.row(j, i);
        if (back < 0) {
            throw std::invalid_argument("loss_sym: pair (" + std::to_string(j) + "," + std::to_string(i) +
                                        ") has no prediction");
        }
        ++unordered;
        for (std::size_t p = 0; p < nl; ++p) {
            const auto lbl = space.labels[p];
            if (!space.symmetric_set.contains(lbl)) continue;
            const int q = space.position(reverse(lbl));
            if (q < 0) continue;
            a.push_back(r * nl + p);
            b.push_back(static_cast<std::size_t>(back) * nl + static_cast<std::size_t>(q));
        }
    }
    if (unordered == 0 || a.empty()) return std::nullopt;
    Var diff = ad::sub(ad::gather(s.log_probs, a, {1, a.size()}), ad::gather(s.log_probs, b, {1, b.size()}));
    return ad::scale(ad::sum(ad::abs(diff)), 1.0 / static_cast<double>(unordered));
}

std::vector<Triple> sample_triples(const PairScores& s, std::size_t budget, std::uint64_t key) {
    std::vector<Triple> all;
    const std::size_t k = s.num_events;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i || s.row(i, j) < 0) continue;
            for (std::size_t m = 0; m < k; ++m) {
                if (m == i || m == j || s.row(j, m) < 0 || s.row(i, m) < 0) continue;
                all.push_back({i, j, m});
            }
        }
    }
    if (all.size() <= budget) return all;
    auto eng = make_engine(key);
    for (std::size_t t = 0; t < budget; ++t) {
        const auto pick = static_cast<std::size_t>(uniform_int(eng, static_cast<std::int64_t>(t),
                                                               static_cast<std::int64_t>(all.size() - 1)));
        std::swap(all[t], all[pick]);
    }
    all.resize(budget);
    std::sort(all.begin(), all.end());
    return all;
}

std::optional<Var> loss_conj(const PairScores& s, std::span<const Triple> triples, const ConjunctionTable& table,
                             const LabelSpace& space, ConjMode mode) {
    const std::size_t nl = space.size();
    const LabelSet members = space.members();
    struct Rule {
        std::size_t p1, p2;
        LabelSet de;
    };
    std::vector<Rule> rules;
    for (std::size_t p1 = 0; p1 < nl; ++p1) {
        for (std::size_t p2 = 0; p2 < nl; ++p2) {
            const auto r1 = space.labels[p1], r2 = space.labels[p2];
            if (!is_constrained(table, r1, r2, members)) continue;
            rules.push_back({p1, p2, deduction_set(table, r1, r2, members)});
        }
    }
    if (rules.empty() || triples.empty()) return std::nullopt;

    // Distinct deduction sets become columns of an indicator matrix, so log p(De) per row
    // is one product.
    std::vector<LabelSet> sets;
    std::vector<std::size_t> set_of(rules.size());
    for (std::size_t r = 0; r < rules.size(); ++r) {
        auto it = std::find(sets.begin(), sets.end(), rules[r].de);
        set_of[r] = static_cast<std::size_t>(it - sets.begin());
        if (it == sets.end()) sets.push_back(rules[r].de);
    }
    Tensor indicator({nl, sets.size()}, 0.0);
    for (std::size_t c = 0; c < sets.size(); ++c)
        for (std::size_t p = 0; p < nl; ++p) indicator(p, c) = sets[c].contains(space.labels[p]) ? 1.0 : 0.0;

    std::vector<std::size_t> a1, b1, c1, a2, b2, c2;
    for (const auto& [i, j, k] : triples) {
        const auto ij = static_cast<std::size_t>(s.row(i, j)) * nl;
        const auto jk = static_cast<std::size_t>(s.row(j, k)) * nl;
        const auto ik_row = static_cast<std::size_t>(s.row(i, k));
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            a1.push_back(ij + rule.p1);
            b1.push_back(jk + rule.p2);
            c1.push_back(ik_row * sets.size() + set_of[r]);
            for (std::size_t p3 = 0; p3 < nl; ++p3) {
                if (rule.de.contains(space.labels[p3])) continue;
                a2.push_back(ij + rule.p1);
                b2.push_back(jk + rule.p2);
                c2.push_back(ik_row * nl + p3);
            }
        }
    }

    std::vector<Var> terms;
    auto g = [&](const std::vector<std::size_t>& idx, const Var& src) { return ad::gather(src, idx, {1, idx.size()}); };
    Tape& tape = *s.probs.tape();
    Var log_de = ad::log_clamped(ad::matmul(s.probs, tape.constant(std::move(indicator))), 1e-12);
    terms.push_back(ad::sub(ad::add(g(a1, s.log_probs), g(b1, s.log_probs)), g(c1, log_de)));
    if (!a2.empty()) {
        Var not_p = ad::log_clamped(ad::add_scalar(ad::scale(s.probs, -1.0), 1.0), 1e-12);
        terms.push_back(ad::sub(ad::add(g(a2, s.log_probs), g(b2, s.log_probs)), g(c2, not_p)));
    }
    Var all = terms.size() == 1 ? terms.front() : ad::concat_cols(terms);
    return ad::mean(mode == ConjMode::Hinge ? ad::relu(all) : ad::abs(all));
}

std::optional<LossParts> total_loss(const PairScores& s, const GoldByPosition& gold, const LabelSpace& space,
                                    const ConjunctionTable& table, const TrainConfig& cfg,
                                    std::uint64_t triple_key) {
    if (s.pairs.empty()) return std::nullopt;
    LossParts out;
    std::optional<Var> total;
    auto accumulate = [&](const Var& term, double coeff) {
        Var scaled = coeff == 1.0 ? term : ad::scale(term, coeff);
        total = total ? ad::add(*total, scaled) : scaled;
    };
    if (auto l1 = loss_ce(s, gold, space)) {
        out.l1 = l1->value().item();
        accumulate(*l1, 1.0);
    }
    if (cfg.gamma_sym > 0.0) {
        if (auto ls = loss_sym(s, space)) {
            out.lsym = ls->value().item();
            accumulate(*ls, cfg.gamma_sym);
        }
    }
    if (cfg.gamma_conj > 0.0) {
        const auto triples = sample_triples(s, cfg.conj_triple_budget, triple_key);
        if (auto lc = loss_conj(s, triples, table, space, cfg.conj_mode)) {
            out.lconj = lc->value().item();
            accumulate(*lc, cfg.gamma_conj);
        }
    }
    if (!total) return std::nullopt;
    out.total = *total;
    return out;
}

namespace {

struct ConstantScores {
    Tape tape;
    PairScores scores;
};

// Puts a plain probability table on a tape as constants.
void load_scores(ConstantScores& cs, const DocumentPredictions& doc, const LabelSpace& space) {
    std::size_t k = doc.event_ids.size();
    for (const auto& [i, j] : doc.pairs) k = std::max(k, std::max(i, j) + 1);
    const std::size_t nl = space.size();
    Tensor p({std::max<std::size_t>(doc.pairs.size(), 1), nl}, 1.0 / static_cast<double>(nl));
    for (std::size_t r = 0; r < doc.probs.size(); ++r) {
        if (doc.probs[r].size() != nl) throw std::invalid_argument("probability row has the wrong width");
        std::copy(doc.probs[r].begin(), doc.probs[r].end(), p.data().begin() + r * nl);
    }
    Tensor lp = p;
    for (auto& x : lp.data()) x = std::log(x);
    cs.scores = PairScores::from(k, doc.pairs, cs.tape.constant(std::move(p)), cs.tape.constant(std::move(lp)));
}

double value_or_zero(const std::optional<Var>& v) { return v ? v->value().item() : 0.0; }

}  // namespace

double loss_ce(const DocumentPredictions& doc, const LabelSpace& space) {
    ConstantScores cs;
    load_scores(cs, doc, space);
    return value_or_zero(loss_ce(cs.scores, doc.gold, space));
}

double loss_sym(const DocumentPredictions& doc, const LabelSpace& space) {
    ConstantScores cs;
    load_scores(cs, doc, space);
    return value_or_zero(loss_sym(cs.scores, space));
}

double loss_conj(const DocumentPredictions& doc, const ConjunctionTable& table, const LabelSpace& space,
                 ConjMode mode, std::size_t budget, std::uint64_t key) {
    ConstantScores cs;
    load_scores(cs, doc, space);
    const auto triples = sample_triples(cs.scores, budget, key);
    return value_or_zero(loss_conj(cs.scores, triples, table, space, mode));
}

void adamw_step(ParamStore& params, AdamState& state, const AdamHyper& h) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
    for (auto& [name, t] : params) {
        if (!t.requires_grad) continue;
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.size() != t.size()) {
            m.assign(t.size(), 0.0);
            v.assign(t.size(), 0.0);
        }
        const bool has_grad = !t.grad.empty();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double g = has_grad ? t.grad[i] : 0.0;
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            t[i] -= h.lr * (mhat / (std::sqrt(vhat) + h.eps) + h.weight_decay * t[i]);
        }
    }
}

EncoderOutput encode_document(Tape& tape, const Document& doc, const Corpus& corpus, ParamStore& params,
                              const ModelConfig& cfg, const PrecomputedTable* precomputed) {
    if (cfg.encoder == EncoderKind::Precomputed) {
        if (!precomputed) throw std::invalid_argument("precomputed encoder selected but no embeddings were loaded");
        auto it = precomputed->find(doc.doc_id);
        if (it == precomputed->end()) throw DataError("no precomputed embeddings for document '" + doc.doc_id + "'");
        return encode_precomputed(tape, doc, it->second);
    }
    auto it = corpus.features.find(doc.doc_id);
    if (it == corpus.features.end()) throw DataError("no features for document '" + doc.doc_id + "'");
    return encode_toy(tape, doc, it->second, params);
}

GoldByPosition gold_positions(const Document& doc, const Lcg& g) {
    GoldByPosition out;
    for (const auto& [p, l] : doc.gold) {
        auto i = g.event_position(p.first), j = g.event_position(p.second);
        if (i && j) out[{*i, *j}] = l;
    }
    return out;
}

namespace {

// Runs `body(i)` for i in [0, n) on OpenMP threads and rethrows the first failure by index.
template <typename F>
void parallel_for_each(std::size_t n, F&& body) {
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

DocumentPredictions predict_document(const Document& doc, const Corpus& corpus, ParamStore& params,
                                     const ModelConfig& cfg, const PrecomputedTable* precomputed) {
    DocumentPredictions out;
    out.doc_id = doc.doc_id;
    const Lcg g = build_lcg(doc, cfg.lcg_options());
    out.event_ids = g.event_ids;
    out.gold = gold_positions(doc, g);
    if (g.num_pairs() == 0) return out;
    Tape tape;
    const EncoderOutput enc = encode_document(tape, doc, corpus, params, cfg, precomputed);
    const ForwardResult fr = forward_document(tape, enc, g, params, cfg, Mode::Eval, 0);
    out.pairs = fr.pairs;
    const Tensor& p = fr.probs.value();
    for (std::size_t r = 0; r < p.rows(); ++r) {
        out.probs.emplace_back(p.data().begin() + r * p.cols(), p.data().begin() + (r + 1) * p.cols());
    }
    return out;
}

}  // namespace

PredictionTable predict(const Corpus& corpus, ParamStore& params, const ModelConfig& cfg,
                        const PrecomputedTable* precomputed) {
    PredictionTable table;
    table.space = cfg.label_space();
    table.docs.resize(corpus.documents.size());
    parallel_for_each(corpus.documents.size(), [&](std::size_t i) {
        table.docs[i] = predict_document(corpus.documents[i], corpus, params, cfg, precomputed);
    });
    return table;
}

std::string EpochMetrics::to_json() const {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["train_loss"] = train_loss;
    j["L1"] = l1;
    j["Lsym"] = lsym;
    j["Lconj"] = lconj;
    j["dev_micro_f1"] = dev_micro_f1;
    j["sym_violation"] = sym_violation;
    j["conj_violation"] = conj_violation;
    return j.dump();
}

namespace {

struct DocStep {
    bool used = false;
    double total = 0.0, l1 = 0.0, lsym = 0.0, lconj = 0.0;
    std::vector<std::vector<double>> grads;  // aligned with the parameter list
};

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0xD0;
constexpr std::uint64_t kTripleStream = 0x7C;

std::string describe(const LossParts& p) {
    std::ostringstream s;
    s << "L1=" << p.l1 << " Lsym=" << p.lsym << " Lconj=" << p.lconj << " total=" << p.total.value().item();
    return s.str();
}

}  // namespace

TrainResult train(const Corpus& train_set, const Corpus& dev_set, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const ConjunctionTable& table, const TrainHooks& hooks, const PrecomputedTable* precomputed) {
    mcfg.validate();
    tcfg.validate();
    const LabelSpace space = mcfg.label_space();
    const LabelSet eval_labels = tcfg.eval_labels.value_or(space.positive_set);

    ParamStore params = init_params(mcfg);
    std::vector<std::pair<std::string, Tensor*>> plist;
    std::unordered_map<const Tensor*, std::size_t> slot;
    for (auto& [name, t] : params) {
        slot[&t] = plist.size();
        plist.emplace_back(name, &t);
    }

    const std::size_t n = train_set.documents.size();
    std::vector<Lcg> graphs;
    std::vector<GoldByPosition> golds;
    for (const auto& doc : train_set.documents) {
        graphs.push_back(build_lcg(doc, mcfg.lcg_options()));
        golds.push_back(gold_positions(doc, graphs.back()));
    }

    TrainResult result;
    AdamState adam;
    const AdamHyper hyper{tcfg.lr, tcfg.weight_decay, tcfg.beta1, tcfg.beta2, tcfg.adam_eps};
    std::vector<std::size_t> order(n);

    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto eng = make_engine(derive_key(tcfg.seed, kShuffleStream, epoch));
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(eng, 0, static_cast<std::int64_t>(i - 1)));
            std::swap(order[i - 1], order[j]);
        }

        EpochMetrics em;
        em.epoch = epoch;
        std::size_t used_docs = 0;
        for (std::size_t start = 0; start < n; start += tcfg.batch) {
            const std::size_t bsz = std::min(tcfg.batch, n - start);
            std::vector<DocStep> steps(bsz);
            parallel_for_each(bsz, [&](std::size_t b) {
                const std::size_t di = order[start + b];
                const Document& doc = train_set.documents[di];
                const Lcg& g = graphs[di];
                if (g.num_pairs() == 0) return;
                Tape tape;
                const EncoderOutput enc = encode_document(tape, doc, train_set, params, mcfg, precomputed);
                const ForwardResult fr = forward_document(tape, enc, g, params, mcfg, Mode::Train,
                                                          derive_key(tcfg.seed, kDropoutStream, epoch, di));
                const PairScores s = PairScores::from(g.num_events(), fr.pairs, fr.probs, fr.log_probs);
                auto parts = total_loss(s, golds[di], space, table, tcfg, derive_key(tcfg.seed, kTripleStream, epoch, di));
                if (!parts) return;
                if (!std::isfinite(parts->total.value().item())) {
                    throw NumericError("non-finite loss on document '" + doc.doc_id + "' at epoch " +
                                       std::to_string(epoch) + ": " + describe(*parts));
                }
                tape.backward(parts->total);
                DocStep& st = steps[b];
                st.used = true;
                st.total = parts->total.value().item();
                st.l1 = parts->l1;
                st.lsym = parts->lsym;
                st.lconj = parts->lconj;
                st.grads.resize(plist.size());
                tape.visit_param_grads([&](const Tensor& t, const std::vector<double>& gr) {
                    auto& dst = st.grads[slot.at(&t)];
                    if (dst.empty()) dst.assign(gr.size(), 0.0);
                    for (std::size_t q = 0; q < gr.size(); ++q) dst[q] += gr[q];
                });
            });

            params.zero_grad();
            std::size_t used = 0;
            for (const auto& st : steps) {
                if (!st.used) continue;
                ++used;
                em.train_loss += st.total;
                em.l1 += st.l1;
                em.lsym += st.lsym;
                em.lconj += st.lconj;
                for (std::size_t p = 0; p < plist.size(); ++p) {
                    if (st.grads[p].empty()) continue;
                    Tensor& t = *plist[p].second;
                    t.ensure_grad();
                    for (std::size_t q = 0; q < st.grads[p].size(); ++q) t.grad[q] += st.grads[p][q];
                }
            }
            if (used == 0) continue;
            used_docs += used;
            if (used > 1) {
                for (auto& [name, t] : plist) {
                    for (auto& x : t->grad) x /= static_cast<double>(used);
                }
            }
            adamw_step(params, adam, hyper);
        }
        if (used_docs > 0) {
            const double inv = 1.0 / static_cast<double>(used_docs);
            em.train_loss *= inv;
            em.l1 *= inv;
            em.lsym *= inv;
            em.lconj *= inv;
        }

        const PredictionTable dev_preds = predict(dev_set, params, mcfg, precomputed);
        const MetricsReport rep = evaluate(dev_preds, table, eval_labels);
        em.dev_micro_f1 = rep.micro_f1;
        em.sym_violation = rep.sym_violation_rate;
        em.conj_violation = rep.conj_violation_rate;
        result.history.push_back(em);
        if (hooks.metrics) *hooks.metrics << em.to_json() << std::endl;

        if (em.dev_micro_f1 > result.best_dev_f1) {
            result.best_dev_f1 = em.dev_micro_f1;
            result.best_epoch = epoch;
            result.best_params = params;
            if (hooks.on_best) hooks.on_best(params, epoch);
        }
        if (epoch - result.best_epoch >= tcfg.patience) break;
    }
    params.zero_grad();
    result.best_params.zero_grad();
    return result;
}

Objective document_objective(const Document& doc, const Corpus& corpus, const ModelConfig& mcfg,
                             const TrainConfig& tcfg, const ConjunctionTable& table) {
    return [doc, corpus, mcfg, tcfg, &table](ParamStore& params, bool want_grad) {
        Tape tape;
        const Lcg g = build_lcg(doc, mcfg.lcg_options());
        const EncoderOutput enc = encode_document(tape, doc, corpus, params, mcfg, nullptr);
        const ForwardResult fr = forward_document(tape, enc, g, params, mcfg, Mode::Eval, 0);
        const PairScores s = PairScores::from(g.num_events(), fr.pairs, fr.probs, fr.log_probs);
        auto parts = total_loss(s, gold_positions(doc, g), mcfg.label_space(), table, tcfg,
                                derive_key(tcfg.seed, kTripleStream));
        if (!parts) throw std::invalid_argument("document_objective: document has no scored pairs");
        if (want_grad) {
            tape.backward(parts->total);
            tape.accumulate_param_grads();
        }
        return parts->total.value().item();
    };
}

}  // namespace logicere
