#include "promptsweep/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "promptsweep/error.hpp"
#include "promptsweep/fs_util.hpp"
#include "promptsweep/hashing.hpp"
#include "promptsweep/http_providers.hpp"
#include "promptsweep/mock_providers.hpp"
#include "promptsweep/prompt_assembler.hpp"
#include "promptsweep/reporter.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {

namespace {

SystemClock& system_clock() {
    static SystemClock clock;
    return clock;
}

// More than this share of missing indices triggers a corrective retry.
constexpr double kMaxMissingShare = 0.2;

} // namespace

bool RunSummary::all_complete() const {
    if (interrupted) return false;
    return std::all_of(cells.begin(), cells.end(),
                       [](const CellResult& c) { return c.status == CellStatus::complete; });
}

ProviderFactory make_provider_factory(const RunManifest& manifest, ProviderMode mode) {
    const auto labels = manifest.task.labels;
    const auto mock = manifest.mock;
    const auto seed = manifest.seed;
    const auto timeout = manifest.timeout;

    auto confusion = [labels, mock, seed] {
        auto matrix = mock.matrix.empty() ? identity_matrix(labels.size()) : mock.matrix;
        return std::make_shared<ConfusionProvider>(labels, matrix, seed, mock.flip_prob);
    };
    auto build_mock = [confusion, mock, seed](ProviderKind kind) -> std::shared_ptr<ChatProvider> {
        switch (kind) {
        case ProviderKind::mock_confusion:
            return confusion();
        case ProviderKind::mock_flaky: {
            std::shared_ptr<ChatProvider> inner;
            if (mock.inner == "mock_confusion") inner = confusion();
            else inner = std::make_shared<EchoProvider>(mock.delay);
            return std::make_shared<FlakyProvider>(
                inner, FlakyOptions{mock.p_malformed, mock.p_reject, mock.transient_failures, seed});
        }
        default:
            return std::make_shared<EchoProvider>(mock.delay);
        }
    };

    return [=](const ModelRef& model) -> std::shared_ptr<ChatProvider> {
        if (is_mock(model.provider)) {
            if (mode == ProviderMode::live) {
                throw ManifestInvalid("--providers live but model '" + model.model_id +
                                      "' uses " + to_string(model.provider));
            }
            return build_mock(model.provider);
        }
        if (mode == ProviderMode::mock) return build_mock(ProviderKind::mock_echo);

        auto endpoint = endpoint_from_env(model.provider);
        endpoint.timeout = timeout;
        if (model.provider == ProviderKind::openai_compat) {
            return std::make_shared<OpenAICompatProvider>(endpoint);
        }
        return std::make_shared<GeminiCompatProvider>(endpoint);
    };
}

MetricsReport score_entries(const std::vector<PredictionEntry>& entries,
                            const std::vector<Label>& labels) {
    if (entries.empty()) {
        MetricsReport empty;
        for (const auto& label : labels) empty.per_class.push_back(ClassMetrics{label, 0, 0, 0, 0});
        return empty;
    }
    return aggregate_metrics(confusion_matrix(entries, labels));
}

struct Orchestrator::BatchOutcome {
    std::optional<Alignment> alignment;
    std::optional<std::string> error;
    std::exception_ptr fatal;
    std::vector<TranscriptRecord> transcript;
    std::size_t requests = 0;
    std::size_t cache_hits = 0;
};

Orchestrator::Orchestrator(RunManifest manifest, ProviderFactory factory)
    : Orchestrator(std::move(manifest), std::move(factory), system_clock()) {}

Orchestrator::Orchestrator(RunManifest manifest, ProviderFactory factory, Clock& clock)
    : manifest_(std::move(manifest)), factory_(std::move(factory)), clock_(clock) {
    dataset_ = load_dataset(manifest_.task);
    if (dataset_.empty()) throw ManifestInvalid("dataset '" + manifest_.task.dataset_ref.string() +
                                                "' has no records");
    if (manifest_.use_cache) cache_.emplace(manifest_.cache_dir);
    std::filesystem::create_directories(manifest_.output_dir);
    transcript_ = std::make_unique<TranscriptLog>(manifest_.output_dir / "transcript.jsonl");
}

std::size_t Orchestrator::provider_calls() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [key, gw] : gateways_) n += gw->calls();
    return n;
}

std::filesystem::path Orchestrator::cell_path(const PromptConfig& config) const {
    return manifest_.output_dir / "cells" / (config.config_hash() + ".json");
}

Gateway& Orchestrator::gateway_for(const PromptConfig& config) {
    const std::string key = to_string(config.provider) + "/" + config.model_id;
    std::lock_guard lock(mu_);
    auto it = gateways_.find(key);
    if (it == gateways_.end()) {
        RetryPolicy policy;
        policy.max_attempts = manifest_.max_attempts;
        policy.initial_backoff = manifest_.initial_backoff;
        auto provider = factory_(ModelRef{config.provider, config.model_id});
        it = gateways_
                 .emplace(key, std::make_unique<Gateway>(std::move(provider), policy,
                                                         manifest_.requests_per_minute, clock_))
                 .first;
    }
    return *it->second;
}

std::optional<CellResult> Orchestrator::load_checkpoint(const PromptConfig& config) const {
    const auto path = cell_path(config);
    if (!std::filesystem::is_regular_file(path)) return std::nullopt;
    try {
        auto cell = cell_from_json(nlohmann::json::parse(read_file(path)));
        if (!(cell.config == config) || cell.status != CellStatus::complete) return std::nullopt;
        return cell;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Orchestrator::BatchOutcome Orchestrator::execute_batch(const PromptConfig& config,
                                                       const Batch& batch,
                                                       const ExecMode& mode) {
    BatchOutcome out;
    const auto prompt = assemble_prompt(manifest_.task, config, batch);
    if (mode.dump_prompts) dump_prompt(*mode.dump_prompts, prompt);

    const std::size_t k = batch.items.size();
    const LabelMatcher matcher(manifest_.task.labels);
    RequestTag tag;
    tag.scope = mode.scope;
    tag.config_hash = config.config_hash();
    tag.batch_index = batch.index;
    tag.trial = config.trial_index;
    for (const auto& item : batch.items) tag.items.push_back(ItemRef{item.item_id, item.gold});

    for (int attempt = 0; attempt <= manifest_.repair_retries; ++attempt) {
        std::string text = prompt.text;
        if (attempt > 0) text += "\n" + render_repair_suffix(k);

        CacheKeyFields key_fields;
        key_fields.provider = config.provider;
        key_fields.model_id = config.model_id;
        key_fields.temperature = config.temperature;
        key_fields.prompt_hash = attempt == 0 ? prompt.content_hash : sha256_hex(text);
        key_fields.trial = config.trial_index;
        const auto key = key_fields.key();

        std::string raw;
        std::optional<CacheEntry> hit;
        if (mode.use_cache && cache_) hit = cache_->get(key);
        if (hit) {
            raw = hit->raw_text;
            ++out.cache_hits;
        } else {
            ChatRequest request;
            request.model_id = config.model_id;
            request.prompt_text = text;
            request.temperature = config.temperature;
            request.tag = tag;
            request.tag.attempt = attempt;
            const auto before = out.transcript.size();
            try {
                raw = gateway_for(config).complete(request, out.transcript).raw_text;
                out.requests += out.transcript.size() - before;
            } catch (const ProviderError& e) {
                out.requests += out.transcript.size() - before;
                if (mode.fail_fast) {
                    out.fatal = std::current_exception();
                    return out;
                }
                out.error = e.what();
                return out;
            }
        }

        std::optional<Alignment> alignment;
        nlohmann::json outcome;
        try {
            auto parsed = parse_batch_response(raw, k);
            alignment = align_predictions(parsed.predictions, batch, matcher,
                                          attempt == 0 ? Provenance::parsed : Provenance::repaired);
            outcome = {{"matched", parsed.predictions.size()},
                       {"skipped", parsed.skipped_lines},
                       {"missing", alignment->missing}};
        } catch (const NoParsableLines&) {
            outcome = {{"matched", 0}, {"skipped", split_lines(raw).size()}, {"missing", k}};
        }
        if (mode.use_cache && cache_ && !hit) cache_->put(CacheEntry{key, raw, outcome});

        if (alignment && (!out.alignment || alignment->missing < out.alignment->missing)) {
            out.alignment = std::move(alignment);
        }
        if (out.alignment &&
            static_cast<double>(out.alignment->missing) <= kMaxMissingShare * static_cast<double>(k)) {
            break;
        }
    }
    if (!out.alignment) out.alignment = default_alignment(batch);
    return out;
}

CellResult Orchestrator::execute(const PromptConfig& config, const ExecMode& mode) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<std::uint64_t> shuffle_seed;
    if (manifest_.shuffle) shuffle_seed = manifest_.seed;
    const auto batches = partition_batches(dataset_, config.batch_size, shuffle_seed);

    std::vector<BatchOutcome> outcomes(batches.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= batches.size()) return;
            try {
                outcomes[i] = execute_batch(config, batches[i], mode);
            } catch (...) {
                outcomes[i].fatal = std::current_exception();
            }
        }
    };
    const auto width = std::min(manifest_.workers, batches.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
        worker();
    }

    CellResult cell;
    cell.config = config;
    cell.prediction_set.config = config;
    std::vector<TranscriptRecord> transcript;
    std::exception_ptr fatal;
    std::size_t failed_batches = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        transcript.insert(transcript.end(), o.transcript.begin(), o.transcript.end());
        cell.timing.requests += o.requests;
        cell.timing.cache_hits += o.cache_hits;
        if (o.fatal && !fatal) fatal = o.fatal;
        if (o.error) {
            ++failed_batches;
            cell.errors.push_back(BatchError{batches[i].index, *o.error});
        } else if (o.alignment) {
            for (auto& e : o.alignment->entries) cell.prediction_set.entries.push_back(std::move(e));
        }
    }
    if (!transcript.empty()) transcript_->append(transcript);
    if (fatal) std::rethrow_exception(fatal);

    if (failed_batches == 0) cell.status = CellStatus::complete;
    else if (failed_batches == batches.size()) cell.status = CellStatus::failed;
    else cell.status = CellStatus::partial;
    cell.metrics = score_entries(cell.prediction_set.entries, manifest_.task.labels);
    cell.timing.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    return cell;
}

CellResult Orchestrator::run_cell(const PromptConfig& config, const RunOptions& options) {
    ExecMode mode;
    mode.use_cache = manifest_.use_cache;
    mode.dump_prompts = options.dump_prompts;
    auto cell = execute(config, mode);
    write_file_atomic(cell_path(config), serialize_cell(cell));
    return cell;
}

AuditResult Orchestrator::run_determinism_audit(const PromptConfig& config, int repeats) {
    if (repeats < 2) throw InvariantViolation("determinism audit needs at least 2 repeats");
    std::size_t audit_id = 0;
    {
        std::lock_guard lock(mu_);
        audit_id = audit_counter_++;
    }
    AuditResult result;
    result.config = config;
    result.repeats = repeats;
    for (int r = 0; r < repeats; ++r) {
        ExecMode mode;
        mode.scope = "audit:" + std::to_string(audit_id);
        mode.use_cache = false;
        mode.fail_fast = true;
        auto repeat_config = config;
        repeat_config.trial_index = config.trial_index + r;
        auto cell = execute(repeat_config, mode);
        result.runs.push_back(std::move(cell.prediction_set));
    }
    result.report = agreement_stats(result.runs);
    return result;
}

RunSummary Orchestrator::run(const RunOptions& options) {
    RunSummary summary;
    std::size_t executed = 0;
    for (const auto& config : manifest_.configs) {
        if (options.resume) {
            if (auto cell = load_checkpoint(config)) {
                ++summary.cells_from_checkpoint;
                if (options.on_cell) options.on_cell(*cell, true);
                summary.cells.push_back(std::move(*cell));
                continue;
            }
        }
        auto cell = run_cell(config, options);
        summary.provider_calls += cell.timing.requests;
        summary.cache_hits += cell.timing.cache_hits;
        if (options.on_cell) options.on_cell(cell, false);
        summary.cells.push_back(std::move(cell));
        ++executed;
        if (options.stop_after_cells && executed >= *options.stop_after_cells &&
            summary.cells.size() < manifest_.configs.size()) {
            summary.interrupted = true;
            return summary;
        }
    }

    if (options.run_audits && manifest_.audit.enabled) {
        for (const auto& flags : manifest_.audit.flags) {
            for (auto b : manifest_.audit.batch_sizes) {
                for (const auto& model : manifest_.models) {
                    PromptConfig cfg{flags, b, model.provider, model.model_id,
                                     manifest_.configs.front().temperature, 0};
                    summary.audits.push_back(run_determinism_audit(cfg, manifest_.audit.repeats));
                }
            }
        }
    }

    if (options.write_reports) {
        write_reports(manifest_.output_dir, summary.cells);
        if (!summary.audits.empty()) write_determinism_report(manifest_.output_dir, summary.audits);
        write_manifest_lock(manifest_.output_dir, manifest_.source, manifest_.cache_mode());
    }
    return summary;
}

RunSummary run_experiment(const RunManifest& manifest, ProviderFactory factory,
                          const RunOptions& options) {
    Orchestrator orchestrator(manifest, std::move(factory));
    return orchestrator.run(options);
}

} // namespace promptsweep
