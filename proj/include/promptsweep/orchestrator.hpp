#pragma once
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "promptsweep/cell_result.hpp"
#include "promptsweep/manifest.hpp"
#include "promptsweep/metrics.hpp"
#include "promptsweep/provider_gateway.hpp"
#include "promptsweep/response_cache.hpp"

namespace promptsweep {

using ProviderFactory = std::function<std::shared_ptr<ChatProvider>(const ModelRef&)>;

enum class ProviderMode {
    as_declared,  // each model uses the provider the manifest names
    mock,         // live models are replaced by the manifest's mock
    live,         // mock models are rejected
};

ProviderFactory make_provider_factory(const RunManifest& manifest, ProviderMode mode);

struct RunOptions {
    bool resume = false;  // reuse completed cell files from output_dir
    std::optional<std::filesystem::path> dump_prompts;
    // Stop after this many freshly executed cells, as if the process died.
    std::optional<std::size_t> stop_after_cells;
    bool write_reports = true;
    bool run_audits = true;  // honoured only when the manifest enables audits
    std::function<void(const CellResult&, bool from_checkpoint)> on_cell;
};

struct AuditResult {
    PromptConfig config;  // trial_index of the first repeat
    int repeats = 0;
    DeterminismReport report;
    std::vector<PredictionSet> runs;
};

struct RunSummary {
    std::vector<CellResult> cells;
    std::vector<AuditResult> audits;
    bool interrupted = false;
    std::size_t provider_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t cells_from_checkpoint = 0;

    bool all_complete() const;
};

// Executes grid cells: batches, dispatches through one gateway per model,
// parses, scores and checkpoints. Completed cells are written to
// `<output_dir>/cells/<config hash>.json`; raw responses are cached per
// request under `cache_dir`.
class Orchestrator {
public:
    Orchestrator(RunManifest manifest, ProviderFactory factory, Clock& clock);
    Orchestrator(RunManifest manifest, ProviderFactory factory);

    RunSummary run(const RunOptions& options);
    CellResult run_cell(const PromptConfig& config, const RunOptions& options = {});

    // Issues `repeats` fresh (uncached) runs of one config over the whole
    // dataset. Throws InvariantViolation for repeats < 2; provider errors
    // propagate.
    AuditResult run_determinism_audit(const PromptConfig& config, int repeats);

    const RunManifest& manifest() const { return manifest_; }
    const Dataset& dataset() const { return dataset_; }
    std::size_t provider_calls() const;
    std::filesystem::path cell_path(const PromptConfig& config) const;

private:
    struct ExecMode {
        std::string scope = "grid";
        bool use_cache = true;
        bool fail_fast = false;
        std::optional<std::filesystem::path> dump_prompts;
    };
    struct BatchOutcome;

    CellResult execute(const PromptConfig& config, const ExecMode& mode);
    BatchOutcome execute_batch(const PromptConfig& config, const Batch& batch, const ExecMode& mode);
    Gateway& gateway_for(const PromptConfig& config);
    std::optional<CellResult> load_checkpoint(const PromptConfig& config) const;

    RunManifest manifest_;
    ProviderFactory factory_;
    Clock& clock_;
    Dataset dataset_;
    std::optional<ResponseCache> cache_;
    std::unique_ptr<TranscriptLog> transcript_;

    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<Gateway>> gateways_;
    std::size_t audit_counter_ = 0;
};

RunSummary run_experiment(const RunManifest& manifest, ProviderFactory factory,
                          const RunOptions& options = {});

// Metrics for a set of entries; all-zero rows when `entries` is empty.
MetricsReport score_entries(const std::vector<PredictionEntry>& entries,
                            const std::vector<Label>& labels);

} // namespace promptsweep
