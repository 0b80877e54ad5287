#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logicere/corpus.hpp"
#include "logicere/labels.hpp"

namespace logicere {

/// Model outputs for one document. Pair positions index `event_ids` (sorted ids).
struct DocumentPredictions {
    std::string doc_id;
    std::vector<std::string> event_ids;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    /// One row per pair, ordered like LabelSpace::labels.
    std::vector<std::vector<double>> probs;
    /// Gold labels by event positions, both directions.
    std::map<std::pair<std::size_t, std::size_t>, RelationLabel> gold;

    /// Row of pair (i, j), or nullopt.
    std::optional<std::size_t> row(std::size_t i, std::size_t j) const;
};

struct PredictionTable {
    LabelSpace space;
    std::vector<DocumentPredictions> docs;
};

/// Highest-probability label; ties go to the earlier label in `space.labels`.
RelationLabel argmax_label(std::span<const double> probs, const LabelSpace& space);

/// Hard labels for one document, keyed by ordered event positions.
struct LabelGraph {
    std::size_t num_events = 0;
    std::map<std::pair<std::size_t, std::size_t>, RelationLabel> labels;
};

LabelGraph argmax_graph(const DocumentPredictions& doc, const LabelSpace& space);
/// Gold labels of a document, with events indexed in sorted-id order.
LabelGraph gold_graph(const Document& doc);

struct LabelCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision() const;
    double recall() const;
    double f1() const;
};

struct MetricsReport {
    LabelSet positive;
    std::array<LabelCounts, kNumLabels> per_label{};
    std::size_t scored_pairs = 0;
    double micro_p = 0.0, micro_r = 0.0, micro_f1 = 0.0;

    std::size_t sym_pairs = 0, sym_violations = 0;
    std::size_t conj_triples = 0, conj_violations = 0;
    double sym_violation_rate = 0.0;
    double conj_violation_rate = 0.0;

    /// Micro P/R/F1 pooled over `labels` using the stored counts.
    std::array<double, 3> micro_over(LabelSet labels) const;
};

/// 0/0 is taken as 0 for P, R and F1.
double safe_ratio(double num, double den);
double f1_score(double p, double r);

/// Tallies TP/FP/FN over labels in `positive`. `pred` and `gold` are aligned.
MetricsReport micro_prf(std::span<const RelationLabel> pred, std::span<const RelationLabel> gold,
                        LabelSet positive);

struct ViolationCount {
    std::size_t total = 0;
    std::size_t violations = 0;
    double rate() const { return total ? static_cast<double>(violations) / static_cast<double>(total) : 0.0; }
};

/// Unordered pairs labeled in both directions whose labels are not mutual reverses.
ViolationCount symmetry_violations(std::span<const LabelGraph> docs);
/// Ordered triples of distinct events with a constrained De(l(i,j), l(j,k)) and
/// l(i,k) outside it.
ViolationCount conjunction_violations(std::span<const LabelGraph> docs, const ConjunctionTable& table);

double symmetry_violation_rate(std::span<const LabelGraph> docs);
double conjunction_violation_rate(std::span<const LabelGraph> docs, const ConjunctionTable& table);

/// Full report over a prediction table. Gold pairs with labels outside the label space
/// are not scored; gold pairs without a prediction count as misses.
MetricsReport evaluate(const PredictionTable& preds, const ConjunctionTable& table,
                       std::optional<LabelSet> positive = std::nullopt);

std::string report_to_json(const MetricsReport& r);
std::string report_to_text(const MetricsReport& r);

}  // namespace logicere
