#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "logicere/autodiff.hpp"
#include "logicere/corpus.hpp"
#include "logicere/encoder.hpp"
#include "logicere/evaluation.hpp"
#include "logicere/labels.hpp"
#include "logicere/lcg.hpp"
#include "logicere/reasoner.hpp"

namespace logicere {

enum class ConjMode { Hinge, Abs };

std::string_view conj_mode_name(ConjMode m);
ConjMode parse_conj_mode(std::string_view name);

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch = 1;
    std::size_t max_epochs = 60;
    std::size_t patience = 20;
    double gamma_sym = 0.2;
    double gamma_conj = 0.2;
    ConjMode conj_mode = ConjMode::Hinge;
    std::size_t conj_triple_budget = 200;
    std::uint64_t seed = 1;
    /// Labels pooled into the dev micro-F1 used for model selection; defaults to the
    /// label space's positive set.
    std::optional<LabelSet> eval_labels;

    void validate() const;
};

/// Raised for a non-finite loss or a failed gradient check.
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Classifier outputs of one document on a tape, with a dense (i, j) -> row lookup.
struct PairScores {
    std::size_t num_events = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<long> row_of;  // i * num_events + j -> row, -1 when absent
    Var probs;
    Var log_probs;

    long row(std::size_t i, std::size_t j) const { return row_of[i * num_events + j]; }

    static PairScores from(std::size_t num_events, std::vector<std::pair<std::size_t, std::size_t>> pairs,
                           Var probs, Var log_probs);
};

using GoldByPosition = std::map<std::pair<std::size_t, std::size_t>, RelationLabel>;

/// Mean of -log p[gold] over gold pairs inside the label space; nullopt when there are none.
std::optional<Var> loss_ce(const PairScores& s, const GoldByPosition& gold, const LabelSpace& space);

/// Sum over unordered pairs and all labels r of |log p_ij[r] - log p_ji[reverse r]|,
/// divided by the number of unordered pairs. Throws std::invalid_argument when a pair lacks
/// its reverse direction.
std::optional<Var> loss_sym(const PairScores& s, const LabelSpace& space);

using Triple = std::array<std::size_t, 3>;

/// Ordered triples of distinct events whose three pairs are all scored. When there are
/// more than `budget`, a uniform sample of `budget` of them (sorted) keyed by `key`.
std::vector<Triple> sample_triples(const PairScores& s, std::size_t budget, std::uint64_t key);

/// Mean of g(.) over rule instantiations on the given triples, g = relu or abs. Each
/// constrained (r1, r2) yields one term against log p_ik(De) = log sum_{r3 in De} p_ik[r3]
/// and one term against log(1 - p_ik[r4]) per label r4 outside De.
std::optional<Var> loss_conj(const PairScores& s, std::span<const Triple> triples, const ConjunctionTable& table,
                             const LabelSpace& space, ConjMode mode);

struct LossParts {
    Var total;
    double l1 = 0.0, lsym = 0.0, lconj = 0.0;
};

/// L1 + gamma_sym Lsym + gamma_conj Lconj; a zero coefficient skips its term.
/// nullopt when no term applies (no pairs).
std::optional<LossParts> total_loss(const PairScores& s, const GoldByPosition& gold, const LabelSpace& space,
                                    const ConjunctionTable& table, const TrainConfig& cfg, std::uint64_t triple_key);

// Plain-value versions over a document's probability table.
double loss_ce(const DocumentPredictions& doc, const LabelSpace& space);
double loss_sym(const DocumentPredictions& doc, const LabelSpace& space);
double loss_conj(const DocumentPredictions& doc, const ConjunctionTable& table, const LabelSpace& space,
                 ConjMode mode, std::size_t budget = 200, std::uint64_t key = 0);

struct AdamState {
    std::map<std::string, std::vector<double>> m, v;
    std::size_t step = 0;
};

struct AdamHyper {
    double lr = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One AdamW step using each parameter's grad buffer (missing buffers count as zero):
/// θ -= lr (m̂ / (sqrt(v̂) + eps) + weight_decay θ).
void adamw_step(ParamStore& params, AdamState& state, const AdamHyper& h);

using PrecomputedTable = std::map<std::string, PrecomputedEmbedding>;

/// Runs the configured encoder for one document of `corpus`. Throws DataError when the
/// document's features or embeddings are missing.
EncoderOutput encode_document(Tape& tape, const Document& doc, const Corpus& corpus, ParamStore& params,
                              const ModelConfig& cfg, const PrecomputedTable* precomputed);

GoldByPosition gold_positions(const Document& doc, const Lcg& g);

/// Eval-mode predictions for every document, computed in parallel.
PredictionTable predict(const Corpus& corpus, ParamStore& params, const ModelConfig& cfg,
                        const PrecomputedTable* precomputed = nullptr);

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0, l1 = 0.0, lsym = 0.0, lconj = 0.0;
    double dev_micro_f1 = 0.0;
    double sym_violation = 0.0, conj_violation = 0.0;

    std::string to_json() const;
};

struct TrainResult {
    ParamStore best_params;
    std::vector<EpochMetrics> history;
    std::size_t best_epoch = 0;
    double best_dev_f1 = -1.0;
};

struct TrainHooks {
    /// Receives one JSON line per epoch.
    std::ostream* metrics = nullptr;
    /// Called with the parameters whenever the dev F1 improves.
    std::function<void(const ParamStore&, std::size_t epoch)> on_best;
};

/// Epoch loop: seeded shuffle, per-document forward and loss (documents of a batch in
/// parallel, gradients reduced in index order), AdamW, dev evaluation, early stopping
/// once `patience` epochs pass without a dev improvement. Throws NumericError on a
/// non-finite loss.
TrainResult train(const Corpus& train_set, const Corpus& dev_set, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const ConjunctionTable& table, const TrainHooks& hooks = {},
                  const PrecomputedTable* precomputed = nullptr);

/// Full-model loss on one document in eval mode (no dropout), as a gradcheck objective.
Objective document_objective(const Document& doc, const Corpus& corpus, const ModelConfig& mcfg,
                             const TrainConfig& tcfg, const ConjunctionTable& table);

}  // namespace logicere
