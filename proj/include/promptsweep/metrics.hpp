#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "promptsweep/response_parser.hpp"
#include "promptsweep/task_model.hpp"

namespace promptsweep {

// Rows are gold labels, columns predicted labels. INVALID predictions are
// tallied per gold label in `invalid` and never enter `counts`.
struct ConfusionMatrix {
    std::vector<Label> labels;
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::size_t> invalid;

    std::size_t total() const;
    std::size_t trace() const;
    std::size_t support(std::size_t gold) const;     // row sum + invalid
    std::size_t predicted(std::size_t pred) const;   // column sum
};

struct ClassMetrics {
    Label label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::size_t n_items = 0;
    std::size_t n_invalid = 0;

    bool operator==(const MetricsReport&) const = default;
};

// Throws InvariantViolation if an entry's gold or predicted label is not in `labels`.
ConfusionMatrix confusion_matrix(const std::vector<PredictionEntry>& entries,
                                 const std::vector<Label>& labels);
ConfusionMatrix confusion_matrix(const PredictionSet& preds, const std::vector<Label>& labels);

// Zero denominators yield 0. INVALID predictions count as false negatives of
// their gold class and as nobody's false positive.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

// Macro F1 averages over every label, including ones that never occur.
// Throws EmptyInput when the matrix holds no items.
MetricsReport aggregate_metrics(const ConfusionMatrix& cm);

struct ItemAgreement {
    std::string item_id;
    std::size_t flips = 0;  // prediction changes between consecutive runs
};

struct DeterminismReport {
    std::size_t n_runs = 0;
    std::size_t n_items = 0;
    double exact_match_rate = 0.0;
    double mean_pairwise_agreement = 0.0;
    std::vector<ItemAgreement> per_item;  // first run's item order
    std::size_t items_with_flips = 0;
};

// INVALID agrees with INVALID. Throws InvariantViolation for fewer than two
// runs and MismatchedItems when the runs cover different item ids.
DeterminismReport agreement_stats(const std::vector<PredictionSet>& runs);

} // namespace promptsweep
