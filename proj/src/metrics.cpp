#include "promptsweep/metrics.hpp"

#include <unordered_map>

#include "promptsweep/error.hpp"

namespace promptsweep {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (std::size_t g = 0; g < labels.size(); ++g) n += support(g);
    return n;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) n += counts[i][i];
    return n;
}

std::size_t ConfusionMatrix::support(std::size_t gold) const {
    std::size_t n = invalid[gold];
    for (auto c : counts[gold]) n += c;
    return n;
}

std::size_t ConfusionMatrix::predicted(std::size_t pred) const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[pred];
    return n;
}

ConfusionMatrix confusion_matrix(const std::vector<PredictionEntry>& entries,
                                 const std::vector<Label>& labels) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
    auto lookup = [&](const Label& l) {
        auto it = index.find(l);
        if (it == index.end()) throw InvariantViolation("label '" + l + "' is not a task label");
        return it->second;
    };

    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
    cm.invalid.assign(labels.size(), 0);
    for (const auto& e : entries) {
        auto g = lookup(e.gold);
        if (e.predicted) {
            ++cm.counts[g][lookup(*e.predicted)];
        } else {
            ++cm.invalid[g];
        }
    }
    return cm;
}

ConfusionMatrix confusion_matrix(const PredictionSet& preds, const std::vector<Label>& labels) {
    return confusion_matrix(preds.entries, labels);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> rows;
    rows.reserve(cm.labels.size());
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        const double tp = static_cast<double>(cm.counts[i][i]);
        const auto predicted = cm.predicted(i);
        const auto support = cm.support(i);

        ClassMetrics m;
        m.label = cm.labels[i];
        m.support = support;
        m.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
        m.recall = support == 0 ? 0.0 : tp / static_cast<double>(support);
        const double denom = m.precision + m.recall;
        m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
        rows.push_back(std::move(m));
    }
    return rows;
}

MetricsReport aggregate_metrics(const ConfusionMatrix& cm) {
    const auto n = cm.total();
    if (n == 0) throw EmptyInput("no evaluated items");

    MetricsReport r;
    r.per_class = per_class_metrics(cm);
    r.n_items = n;
    for (auto v : cm.invalid) r.n_invalid += v;
    r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(n);

    double f1_sum = 0.0;
    double weighted_sum = 0.0;
    for (const auto& row : r.per_class) {
        f1_sum += row.f1;
        weighted_sum += static_cast<double>(row.support) * row.f1;
    }
    r.macro_f1 = f1_sum / static_cast<double>(r.per_class.size());
    r.weighted_f1 = weighted_sum / static_cast<double>(n);
    return r;
}

DeterminismReport agreement_stats(const std::vector<PredictionSet>& runs) {
    if (runs.size() < 2) throw InvariantViolation("agreement_stats needs at least two runs");

    const auto& base = runs.front().entries;
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (!position.emplace(base[i].item_id, i).second) {
            throw MismatchedItems("duplicate item '" + base[i].item_id + "' in run 0");
        }
    }

    // aligned[r][i] is run r's prediction for the first run's item i
    std::vector<std::vector<const std::optional<Label>*>> aligned(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& entries = runs[r].entries;
        if (entries.size() != base.size()) {
            throw MismatchedItems("run " + std::to_string(r) + " has " +
                                  std::to_string(entries.size()) + " items, run 0 has " +
                                  std::to_string(base.size()));
        }
        aligned[r].assign(base.size(), nullptr);
        for (const auto& e : entries) {
            auto it = position.find(e.item_id);
            if (it == position.end()) {
                throw MismatchedItems("item '" + e.item_id + "' missing from run 0");
            }
            if (aligned[r][it->second]) {
                throw MismatchedItems("duplicate item '" + e.item_id + "' in run " +
                                      std::to_string(r));
            }
            aligned[r][it->second] = &e.predicted;
        }
    }

    DeterminismReport report;
    report.n_runs = runs.size();
    report.n_items = base.size();
    if (base.empty()) {
        report.exact_match_rate = 1.0;
        report.mean_pairwise_agreement = 1.0;
        return report;
    }

    std::size_t exact = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        ItemAgreement item{base[i].item_id, 0};
        bool all_same = true;
        for (std::size_t r = 1; r < runs.size(); ++r) {
            if (*aligned[r][i] != *aligned[r - 1][i]) ++item.flips;
            if (*aligned[r][i] != *aligned[0][i]) all_same = false;
        }
        if (all_same) ++exact;
        if (item.flips > 0) ++report.items_with_flips;
        report.per_item.push_back(std::move(item));
    }

    double pair_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            std::size_t agree = 0;
            for (std::size_t i = 0; i < base.size(); ++i) {
                if (*aligned[a][i] == *aligned[b][i]) ++agree;
            }
            pair_sum += static_cast<double>(agree) / static_cast<double>(base.size());
            ++pairs;
        }
    }
    report.exact_match_rate = static_cast<double>(exact) / static_cast<double>(base.size());
    report.mean_pairwise_agreement = pair_sum / static_cast<double>(pairs);
    return report;
}

} // namespace promptsweep
