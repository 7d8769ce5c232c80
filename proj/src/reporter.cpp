#include "promptsweep/reporter.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "promptsweep/csv.hpp"
#include "promptsweep/error.hpp"
#include "promptsweep/fs_util.hpp"
#include "promptsweep/orchestrator.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {

namespace {

const char* sign(bool present) { return present ? "+" : "-"; }

std::string model_title(ProviderKind provider, const std::string& model_id) {
    return to_string(provider) + " / " + model_id;
}

// (provider, model, trial) in a stable order.
using GroupKey = std::tuple<ProviderKind, std::string, int>;

GroupKey group_key(const PromptConfig& c) { return {c.provider, c.model_id, c.trial_index}; }

std::vector<CellResult> sorted(std::vector<CellResult> cells) {
    std::stable_sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        return grid_order_less(a.config, b.config);
    });
    return cells;
}

std::map<GroupKey, std::vector<CellResult>> by_model(const std::vector<CellResult>& results) {
    std::map<GroupKey, std::vector<CellResult>> groups;
    for (const auto& cell : sorted(results)) groups[group_key(cell.config)].push_back(cell);
    return groups;
}

bool several_trials(const std::vector<CellResult>& results) {
    std::set<int> trials;
    for (const auto& c : results) trials.insert(c.config.trial_index);
    return trials.size() > 1;
}

std::string section_title(const GroupKey& key, bool show_trial) {
    auto title = model_title(std::get<0>(key), std::get<1>(key));
    if (show_trial) title += " (trial " + std::to_string(std::get<2>(key)) + ")";
    return title;
}

void check_group(const std::vector<CellResult>& group) {
    if (group.empty()) throw InvariantViolation("per-class table needs at least one result");
    const auto& first = group.front().config;
    std::set<std::size_t> batch_sizes;
    for (const auto& cell : group) {
        const auto& c = cell.config;
        if (!(c.flags == first.flags) || c.provider != first.provider ||
            c.model_id != first.model_id || c.trial_index != first.trial_index) {
            throw MixedConfigs("per-class table mixes " + first.canonical_string() + " and " +
                               c.canonical_string());
        }
        if (!batch_sizes.insert(c.batch_size).second) {
            throw MixedConfigs("per-class table has two cells with batch size " +
                               std::to_string(c.batch_size));
        }
        if (cell.metrics.per_class.size() != group.front().metrics.per_class.size()) {
            throw MixedConfigs("per-class table mixes label sets");
        }
    }
}

std::vector<CellResult> by_batch_size(const std::vector<CellResult>& group) {
    auto cells = group;
    std::stable_sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        return a.config.batch_size < b.config.batch_size;
    });
    return cells;
}

std::string file_stem(Flags flags) { return to_notation(flags); }

} // namespace

std::vector<SummaryRow> summary_rows(const std::vector<CellResult>& results) {
    std::vector<SummaryRow> rows;
    for (const auto& cell : sorted(results)) {
        SummaryRow row;
        row.flags = cell.config.flags;
        row.batch_size = cell.config.batch_size;
        row.model = cell.config.model_id;
        row.provider = cell.config.provider;
        row.trial = cell.config.trial_index;
        row.accuracy = cell.metrics.accuracy;
        row.macro_f1 = cell.metrics.macro_f1;
        row.weighted_f1 = cell.metrics.weighted_f1;
        row.n_items = cell.metrics.n_items;
        row.n_invalid = cell.metrics.n_invalid;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_summary_markdown(const std::vector<CellResult>& results) {
    std::ostringstream out;
    out << "# Classification performance\n";
    const bool show_trial = several_trials(results);
    for (const auto& [key, cells] : by_model(results)) {
        out << "\n## " << section_title(key, show_trial) << "\n\n";
        out << "| Label Desc. | Inst. Nudges | Few-Shot | Batch Size | Accuracy | F1 | Weighted F1 |\n";
        out << "|---|---|---|---:|---:|---:|---:|\n";
        for (const auto& row : summary_rows(cells)) {
            out << "| " << sign(row.flags.label_desc) << " | " << sign(row.flags.nudges) << " | "
                << sign(row.flags.few_shot) << " | " << row.batch_size << " | "
                << format_fixed3(row.accuracy) << " | " << format_fixed3(row.macro_f1) << " | "
                << format_fixed3(row.weighted_f1) << " |\n";
        }
    }
    return out.str();
}

std::string render_summary_csv(const std::vector<CellResult>& results) {
    std::string out = csv::format_row({"label_desc", "nudges", "few_shot", "batch_size", "model",
                                       "accuracy", "macro_f1", "weighted_f1", "n_items",
                                       "n_invalid", "trial"});
    for (const auto& [key, cells] : by_model(results)) {
        for (const auto& row : summary_rows(cells)) {
            out += csv::format_row({sign(row.flags.label_desc), sign(row.flags.nudges),
                                    sign(row.flags.few_shot), std::to_string(row.batch_size),
                                    row.model, format_fixed3(row.accuracy),
                                    format_fixed3(row.macro_f1), format_fixed3(row.weighted_f1),
                                    std::to_string(row.n_items), std::to_string(row.n_invalid),
                                    std::to_string(row.trial)});
        }
    }
    return out;
}

std::string render_per_class_markdown(const std::vector<CellResult>& group) {
    check_group(group);
    const auto cells = by_batch_size(group);
    const auto& cfg = cells.front().config;

    std::ostringstream out;
    out << "## " << to_notation(cfg.flags) << " " << model_title(cfg.provider, cfg.model_id)
        << " (trial " << cfg.trial_index << ")\n\n";
    out << "| Class |";
    for (const auto& cell : cells) {
        const auto b = std::to_string(cell.config.batch_size);
        out << " B=" << b << " Precision | B=" << b << " Recall | B=" << b << " F1 |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < cells.size(); ++i) out << "---:|---:|---:|";
    out << "\n";

    const auto n_classes = cells.front().metrics.per_class.size();
    for (std::size_t c = 0; c < n_classes; ++c) {
        out << "| " << cells.front().metrics.per_class[c].label << " |";
        for (const auto& cell : cells) {
            const auto& m = cell.metrics.per_class[c];
            out << " " << format_fixed3(m.precision) << " | " << format_fixed3(m.recall) << " | "
                << format_fixed3(m.f1) << " |";
        }
        out << "\n";
    }
    return out.str();
}

std::string render_per_class_csv(const std::vector<CellResult>& group, bool with_header) {
    check_group(group);
    const auto cells = by_batch_size(group);
    const auto& cfg = cells.front().config;

    std::string out;
    if (with_header) {
        out = csv::format_row({"label_desc", "nudges", "few_shot", "model", "trial", "class",
                               "batch_size", "precision", "recall", "f1", "support"});
    }
    const auto n_classes = cells.front().metrics.per_class.size();
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (const auto& cell : cells) {
            const auto& m = cell.metrics.per_class[c];
            out += csv::format_row({sign(cfg.flags.label_desc), sign(cfg.flags.nudges),
                                    sign(cfg.flags.few_shot), cfg.model_id,
                                    std::to_string(cfg.trial_index), m.label,
                                    std::to_string(cell.config.batch_size),
                                    format_fixed3(m.precision), format_fixed3(m.recall),
                                    format_fixed3(m.f1), std::to_string(m.support)});
        }
    }
    return out;
}

std::string render_determinism_csv(const std::vector<AuditResult>& audits) {
    std::string out = csv::format_row({"label_desc", "nudges", "few_shot", "batch_size", "model",
                                       "repeats", "n_items", "exact_match_rate",
                                       "mean_pairwise_agreement", "items_with_flips"});
    for (const auto& a : audits) {
        const auto& c = a.config;
        out += csv::format_row({sign(c.flags.label_desc), sign(c.flags.nudges),
                                sign(c.flags.few_shot), std::to_string(c.batch_size), c.model_id,
                                std::to_string(a.repeats), std::to_string(a.report.n_items),
                                format_fixed3(a.report.exact_match_rate),
                                format_fixed3(a.report.mean_pairwise_agreement),
                                std::to_string(a.report.items_with_flips)});
    }
    return out;
}

void write_reports(const std::filesystem::path& output_dir, const std::vector<CellResult>& results) {
    write_file_atomic(output_dir / "summary.md", render_summary_markdown(results));
    write_file_atomic(output_dir / "summary.csv", render_summary_csv(results));

    // notation -> (model, trial) -> cells
    std::map<int, std::map<GroupKey, std::vector<CellResult>>> per_flags;
    for (const auto& cell : sorted(results)) {
        per_flags[flag_rank(cell.config.flags)][group_key(cell.config)].push_back(cell);
    }
    for (const auto& [rank, groups] : per_flags) {
        const auto flags = groups.begin()->second.front().config.flags;
        std::string md = "# Per-class metrics " + to_notation(flags) + "\n";
        std::string csv_text;
        bool header = true;
        for (const auto& [key, cells] : groups) {
            md += "\n" + render_per_class_markdown(cells);
            csv_text += render_per_class_csv(cells, header);
            header = false;
        }
        const auto dir = output_dir / "per_class";
        write_file_atomic(dir / (file_stem(flags) + ".md"), md);
        write_file_atomic(dir / (file_stem(flags) + ".csv"), csv_text);
    }
}

void write_determinism_report(const std::filesystem::path& output_dir,
                              const std::vector<AuditResult>& audits) {
    write_file_atomic(output_dir / "determinism.csv", render_determinism_csv(audits));
}

void write_manifest_lock(const std::filesystem::path& output_dir, const nlohmann::json& manifest,
                         const std::string& cache_mode) {
    nlohmann::json lock = {{"software_version", std::string(kSoftwareVersion)},
                           {"cache_mode", cache_mode},
                           {"manifest", manifest}};
    write_file_atomic(output_dir / "manifest.lock", lock.dump(2) + "\n");
}

std::vector<CellResult> load_cells(const std::filesystem::path& run_dir) {
    const auto dir = run_dir / "cells";
    if (!std::filesystem::is_directory(dir)) {
        throw InvariantViolation("no cells directory under " + run_dir.string());
    }
    std::vector<CellResult> cells;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        cells.push_back(cell_from_json(nlohmann::json::parse(read_file(entry.path()))));
    }
    return sorted(std::move(cells));
}

} // namespace promptsweep
