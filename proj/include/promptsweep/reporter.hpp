#pragma once
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptsweep/cell_result.hpp"

namespace promptsweep {

struct AuditResult;

inline constexpr std::string_view kSoftwareVersion = "0.1.0";

struct SummaryRow {
    Flags flags;
    std::size_t batch_size = 0;
    std::string model;
    ProviderKind provider = ProviderKind::mock_echo;
    int trial = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::size_t n_items = 0;
    std::size_t n_invalid = 0;
};

// Rows in grid order: flags group, then batch size ascending.
std::vector<SummaryRow> summary_rows(const std::vector<CellResult>& results);

// Markdown: one table per model (and trial, when there are several), columns
// Label Desc. | Inst. Nudges | Few-Shot | Batch Size | Accuracy | F1 | Weighted F1.
std::string render_summary_markdown(const std::vector<CellResult>& results);

// CSV header:
// label_desc,nudges,few_shot,batch_size,model,accuracy,macro_f1,weighted_f1,n_items,n_invalid,trial
std::string render_summary_csv(const std::vector<CellResult>& results);

// One flag configuration for one model and trial across batch sizes. Rows
// are classes in task order, column groups batch sizes ascending. Throws
// MixedConfigs when the cells disagree on flags, model or trial, and
// InvariantViolation on an empty group.
std::string render_per_class_markdown(const std::vector<CellResult>& group);
std::string render_per_class_csv(const std::vector<CellResult>& group, bool with_header = true);

std::string render_determinism_csv(const std::vector<AuditResult>& audits);

// Writes summary.{csv,md} and per_class/<notation>.{csv,md} atomically.
void write_reports(const std::filesystem::path& output_dir, const std::vector<CellResult>& results);
void write_determinism_report(const std::filesystem::path& output_dir,
                              const std::vector<AuditResult>& audits);
void write_manifest_lock(const std::filesystem::path& output_dir, const nlohmann::json& manifest,
                         const std::string& cache_mode);

// Reads every `<run_dir>/cells/*.json`, in grid order.
std::vector<CellResult> load_cells(const std::filesystem::path& run_dir);

} // namespace promptsweep
