#include "logicere/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace logicere {

std::optional<std::size_t> DocumentPredictions::row(std::size_t i, std::size_t j) const {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(i, j));
    if (it == pairs.end() || *it != std::make_pair(i, j)) {
        // Pairs are normally sorted; fall back to a scan otherwise.
        auto f = std::find(pairs.begin(), pairs.end(), std::make_pair(i, j));
        if (f == pairs.end()) return std::nullopt;
        return static_cast<std::size_t>(f - pairs.begin());
    }
    return static_cast<std::size_t>(it - pairs.begin());
}

RelationLabel argmax_label(std::span<const double> probs, const LabelSpace& space) {
    if (probs.size() != space.size() || probs.empty()) {
        throw std::invalid_argument("argmax_label: expected " + std::to_string(space.size()) +
                                    " probabilities, got " + std::to_string(probs.size()));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return space.labels[best];
}

LabelGraph argmax_graph(const DocumentPredictions& doc, const LabelSpace& space) {
    LabelGraph g;
    g.num_events = doc.event_ids.size();
    for (std::size_t r = 0; r < doc.pairs.size(); ++r) g.labels[doc.pairs[r]] = argmax_label(doc.probs[r], space);
    return g;
}

LabelGraph gold_graph(const Document& doc) {
    std::vector<std::string> ids;
    for (const auto& e : doc.events) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    auto pos = [&](const std::string& id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    LabelGraph g;
    g.num_events = ids.size();
    for (const auto& [p, l] : doc.gold) g.labels[{pos(p.first), pos(p.second)}] = l;
    return g;
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
double f1_score(double p, double r) { return safe_ratio(2.0 * p * r, p + r); }

double LabelCounts::precision() const { return safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp)); }
double LabelCounts::recall() const { return safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn)); }
double LabelCounts::f1() const { return f1_score(precision(), recall()); }

std::array<double, 3> MetricsReport::micro_over(LabelSet labels) const {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (auto l : labels.labels()) {
        tp += per_label[index_of(l)].tp;
        fp += per_label[index_of(l)].fp;
        fn += per_label[index_of(l)].fn;
    }
    const double p = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    const double r = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    return {p, r, f1_score(p, r)};
}

MetricsReport micro_prf(std::span<const RelationLabel> pred, std::span<const RelationLabel> gold,
                        LabelSet positive) {
    if (pred.size() != gold.size()) throw std::invalid_argument("micro_prf: prediction and gold sizes differ");
    MetricsReport r;
    r.positive = positive;
    r.scored_pairs = gold.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == gold[i]) {
            if (positive.contains(gold[i])) ++r.per_label[index_of(gold[i])].tp;
            continue;
        }
        if (positive.contains(pred[i])) ++r.per_label[index_of(pred[i])].fp;
        if (positive.contains(gold[i])) ++r.per_label[index_of(gold[i])].fn;
    }
    auto [p, rc, f] = r.micro_over(positive);
    r.micro_p = p;
    r.micro_r = rc;
    r.micro_f1 = f;
    return r;
}

ViolationCount symmetry_violations(std::span<const LabelGraph> docs) {
    ViolationCount c;
    for (const auto& g : docs) {
        for (const auto& [p, l] : g.labels) {
            if (p.first >= p.second) continue;
            auto it = g.labels.find({p.second, p.first});
            if (it == g.labels.end()) continue;
            ++c.total;
            if (l != reverse(it->second)) ++c.violations;
        }
    }
    return c;
}

ViolationCount conjunction_violations(std::span<const LabelGraph> docs, const ConjunctionTable& table) {
    ViolationCount c;
    for (const auto& g : docs) {
        const std::size_t k = g.num_events;
        std::vector<int> dense(k * k, -1);
        for (const auto& [p, l] : g.labels) {
            if (p.first < k && p.second < k) dense[p.first * k + p.second] = static_cast<int>(index_of(l));
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (j == i || dense[i * k + j] < 0) continue;
                const auto r1 = kAllLabels[static_cast<std::size_t>(dense[i * k + j])];
                for (std::size_t m = 0; m < k; ++m) {
                    if (m == i || m == j || dense[j * k + m] < 0 || dense[i * k + m] < 0) continue;
                    const auto r2 = kAllLabels[static_cast<std::size_t>(dense[j * k + m])];
                    if (!is_constrained(table, r1, r2)) continue;
                    ++c.total;
                    const auto r3 = kAllLabels[static_cast<std::size_t>(dense[i * k + m])];
                    if (!deduction_set(table, r1, r2).contains(r3)) ++c.violations;
                }
            }
        }
    }
    return c;
}

double symmetry_violation_rate(std::span<const LabelGraph> docs) { return symmetry_violations(docs).rate(); }

double conjunction_violation_rate(std::span<const LabelGraph> docs, const ConjunctionTable& table) {
    return conjunction_violations(docs, table).rate();
}

MetricsReport evaluate(const PredictionTable& preds, const ConjunctionTable& table,
                       std::optional<LabelSet> positive) {
    const LabelSet pos = positive.value_or(preds.space.positive_set);
    const LabelSet members = preds.space.members();
    std::vector<RelationLabel> pred_labels, gold_labels;
    std::vector<LabelGraph> graphs;
    graphs.reserve(preds.docs.size());
    // A label outside every positive set stands in for "no prediction".
    const RelationLabel miss = RelationLabel::NoRel;
    for (const auto& doc : preds.docs) {
        graphs.push_back(argmax_graph(doc, preds.space));
        const auto& g = graphs.back();
        for (const auto& [p, gl] : doc.gold) {
            if (!members.contains(gl)) continue;
            auto it = g.labels.find(p);
            gold_labels.push_back(gl);
            pred_labels.push_back(it == g.labels.end() ? miss : it->second);
            if (it == g.labels.end() && pos.contains(miss)) {
                throw std::invalid_argument("evaluate: missing prediction for a gold pair in '" + doc.doc_id + "'");
            }
        }
    }
    MetricsReport r = micro_prf(pred_labels, gold_labels, pos);
    const auto sym = symmetry_violations(graphs);
    const auto conj = conjunction_violations(graphs, table);
    r.sym_pairs = sym.total;
    r.sym_violations = sym.violations;
    r.sym_violation_rate = sym.rate();
    r.conj_triples = conj.total;
    r.conj_violations = conj.violations;
    r.conj_violation_rate = conj.rate();
    return r;
}

std::string report_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["micro"] = {{"precision", r.micro_p}, {"recall", r.micro_r}, {"f1", r.micro_f1}};
    std::vector<std::string> pos;
    for (auto l : r.positive.labels()) pos.emplace_back(label_name(l));
    j["positive_labels"] = pos;
    j["scored_pairs"] = r.scored_pairs;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (auto l : kAllLabels) {
        const auto& c = r.per_label[index_of(l)];
        if (!r.positive.contains(l) && c.tp + c.fp + c.fn == 0) continue;
        per[std::string(label_name(l))] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"precision", c.precision()},
                                           {"recall", c.recall()}, {"f1", c.f1()}};
    }
    j["per_label"] = per;
    j["sym_violation_rate"] = r.sym_violation_rate;
    j["sym_pairs"] = r.sym_pairs;
    j["conj_violation_rate"] = r.conj_violation_rate;
    j["conj_triples"] = r.conj_triples;
    return j.dump();
}

std::string report_to_text(const MetricsReport& r) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-14s %6s %6s %6s %9s %9s %9s\n", "label", "tp", "fp", "fn", "precision",
                  "recall", "f1");
    out << buf;
    for (auto l : r.positive.labels()) {
        const auto& c = r.per_label[index_of(l)];
        std::snprintf(buf, sizeof buf, "%-14s %6zu %6zu %6zu %9.4f %9.4f %9.4f\n", std::string(label_name(l)).c_str(),
                      c.tp, c.fp, c.fn, c.precision(), c.recall(), c.f1());
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-14s %6s %6s %6s %9.4f %9.4f %9.4f\n", "micro", "", "", "", r.micro_p, r.micro_r,
                  r.micro_f1);
    out << buf;
    std::snprintf(buf, sizeof buf, "symmetry violations     %zu / %zu (%.4f)\n", r.sym_violations, r.sym_pairs,
                  r.sym_violation_rate);
    out << buf;
    std::snprintf(buf, sizeof buf, "conjunction violations  %zu / %zu (%.4f)\n", r.conj_violations, r.conj_triples,
                  r.conj_violation_rate);
    out << buf;
    return out.str();
}

}  // namespace logicere
