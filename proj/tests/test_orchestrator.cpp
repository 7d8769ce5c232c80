#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "promptsweep/error.hpp"
#include "promptsweep/fs_util.hpp"
#include "promptsweep/manifest.hpp"
#include "promptsweep/mock_providers.hpp"
#include "promptsweep/orchestrator.hpp"
#include "promptsweep/reporter.hpp"
#include "promptsweep/response_cache.hpp"
#include "support.hpp"

using namespace promptsweep;
using nlohmann::json;
using testing_support::ScratchDir;

namespace fs = std::filesystem;

namespace {

// Manifest over a synthetic task in `dir`; `overrides` are merged on top.
RunManifest make_manifest(const fs::path& dir, json overrides = json::object(),
                          std::size_t n_items = 20, std::size_t n_labels = 4) {
    const auto task = testing_support::write_synthetic_task(dir / "task", n_items, n_labels);
    json j{{"task", task.string()},
           {"models", {{{"provider", "mock_echo"}, {"model_id", "echo"}}}},
           {"batch_sizes", {1, 10, 100}},
           {"seed", 13},
           {"cache_dir", "cache"},
           {"output_dir", "out"}};
    j.merge_patch(overrides);
    return parse_manifest(j.dump(), dir);
}

std::map<std::string, std::string> cell_files(const fs::path& out) {
    std::map<std::string, std::string> files;
    if (!fs::exists(out / "cells")) return files;
    for (const auto& e : fs::directory_iterator(out / "cells")) {
        files[e.path().filename().string()] = read_file(e.path());
    }
    return files;
}

// Answers in a caller-chosen way per request.
class LambdaProvider : public ChatProvider {
public:
    explicit LambdaProvider(std::function<std::string(const ChatRequest&)> f) : f_(std::move(f)) {}
    ChatResponse send(const ChatRequest& request) override {
        ++sends;
        ChatResponse r;
        r.raw_text = f_(request);
        return r;
    }
    std::string name() const override { return "lambda"; }
    std::atomic<int> sends{0};

private:
    std::function<std::string(const ChatRequest&)> f_;
};

std::string echo_lines(const ChatRequest& req, std::size_t skip_every = 0) {
    std::string out;
    for (std::size_t i = 0; i < req.tag.items.size(); ++i) {
        if (skip_every && i % skip_every == 0) continue;
        out += std::to_string(i + 1) + ": " + req.tag.items[i].gold + "\n";
    }
    return out;
}

ProviderFactory fixed(std::shared_ptr<ChatProvider> p) {
    return [p](const ModelRef&) { return p; };
}

RunOptions quiet() {
    RunOptions o;
    o.run_audits = false;
    return o;
}

} // namespace

TEST(Orchestrator, EchoGridCompletesWithPerfectScores) {
    ScratchDir dir("orch_echo");
    auto m = make_manifest(dir.path());
    auto summary = run_experiment(m, make_provider_factory(m, ProviderMode::as_declared), quiet());
    ASSERT_EQ(summary.cells.size(), 24u);
    EXPECT_TRUE(summary.all_complete());
    for (const auto& cell : summary.cells) {
        EXPECT_EQ(cell.status, CellStatus::complete);
        EXPECT_EQ(cell.metrics.accuracy, 1.0);
        EXPECT_EQ(cell.metrics.macro_f1, 1.0);
        EXPECT_EQ(cell.metrics.weighted_f1, 1.0);
        EXPECT_EQ(cell.prediction_set.entries.size(), 20u);
    }
    // 8 flags x (20 + 2 + 1) batches
    EXPECT_EQ(summary.provider_calls, 8u * 23u);
    for (const auto* f : {"summary.csv", "summary.md", "manifest.lock", "transcript.jsonl",
                          "per_class/(+,-,+).csv", "per_class/(-,-,-).md"}) {
        EXPECT_TRUE(fs::exists(m.output_dir / f)) << f;
    }
    auto lock = json::parse(read_file(m.output_dir / "manifest.lock"));
    EXPECT_EQ(lock["cache_mode"], "read_write");
    EXPECT_EQ(lock["software_version"], "0.1.0");
    EXPECT_EQ(lock["manifest"]["seed"], 13);
}

TEST(Orchestrator, RerunIsIdempotentAndMakesNoProviderCalls) {
    ScratchDir dir("orch_idem");
    auto m = make_manifest(dir.path());
    auto first = run_experiment(m, make_provider_factory(m, ProviderMode::as_declared), quiet());
    const auto files = cell_files(m.output_dir);

    auto counting = std::make_shared<LambdaProvider>([](const ChatRequest& r) { return echo_lines(r); });
    auto again = run_experiment(m, fixed(counting), quiet());
    EXPECT_EQ(counting->sends, 0);
    EXPECT_EQ(again.cache_hits, first.provider_calls);
    EXPECT_EQ(cell_files(m.output_dir), files);

    RunOptions resume = quiet();
    resume.resume = true;
    auto resumed = run_experiment(m, fixed(counting), resume);
    EXPECT_EQ(resumed.cells_from_checkpoint, 24u);
    EXPECT_EQ(counting->sends, 0);
}

TEST(Orchestrator, InterruptedRunResumesToIdenticalBytes) {
    ScratchDir a("orch_resume_a"), b("orch_resume_b");
    json grid{{"batch_sizes", {1, 3, 7, 10, 100}}};
    auto reference = make_manifest(a.path(), grid);
    auto interrupted = make_manifest(b.path(), grid);
    ASSERT_EQ(reference.configs.size(), 40u);

    run_experiment(reference, make_provider_factory(reference, ProviderMode::as_declared), quiet());

    RunOptions stop = quiet();
    stop.stop_after_cells = 17;
    auto partial = run_experiment(interrupted, make_provider_factory(interrupted, ProviderMode::as_declared), stop);
    EXPECT_TRUE(partial.interrupted);
    EXPECT_FALSE(partial.all_complete());
    EXPECT_EQ(cell_files(interrupted.output_dir).size(), 17u);

    RunOptions resume = quiet();
    resume.resume = true;
    std::size_t fresh = 0;
    resume.on_cell = [&](const CellResult&, bool from_checkpoint) { fresh += from_checkpoint ? 0 : 1; };
    auto rest = run_experiment(interrupted, make_provider_factory(interrupted, ProviderMode::as_declared), resume);
    EXPECT_EQ(rest.cells_from_checkpoint, 17u);
    EXPECT_EQ(fresh, 23u);
    EXPECT_EQ(cell_files(interrupted.output_dir), cell_files(reference.output_dir));
    EXPECT_EQ(read_file(interrupted.output_dir / "summary.csv"), read_file(reference.output_dir / "summary.csv"));
}

TEST(Orchestrator, CorruptOrForeignCheckpointsAreRecomputed) {
    ScratchDir dir("orch_corrupt");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {10}}});
    auto factory = make_provider_factory(m, ProviderMode::as_declared);
    run_experiment(m, factory, quiet());
    const auto files = cell_files(m.output_dir);

    Orchestrator orch(m, factory);
    write_file_atomic(orch.cell_path(m.configs[0]), "{\"truncated");
    auto other = json::parse(read_file(orch.cell_path(m.configs[2])));
    write_file_atomic(orch.cell_path(m.configs[1]), other.dump(2) + "\n");  // wrong config inside
    testing_support::write_text(m.output_dir / "cells" / "stray.json.tmp.1.0", "partial");

    RunOptions resume = quiet();
    resume.resume = true;
    auto summary = orch.run(resume);
    EXPECT_EQ(summary.cells_from_checkpoint, 6u);
    auto after = cell_files(m.output_dir);
    after.erase("stray.json.tmp.1.0");
    EXPECT_EQ(after, files);
}

TEST(Orchestrator, CellsAreIndependentOfTheGrid) {
    ScratchDir grid_dir("orch_grid"), solo_dir("orch_solo");
    json conf{{"models", {{{"provider", "mock_confusion"}, {"model_id", "noisy"}}}},
              {"mock", {{"matrix", {{0.7, 0.1, 0.1, 0.1}, {0.2, 0.6, 0.1, 0.1}, {0, 0, 1, 0}, {0.25, 0.25, 0.25, 0.25}}},
                        {"flip_prob", 0.2}}}};
    auto grid = make_manifest(grid_dir.path(), conf);
    auto solo = make_manifest(solo_dir.path(), conf);
    run_experiment(grid, make_provider_factory(grid, ProviderMode::as_declared), quiet());

    Orchestrator orch(solo, make_provider_factory(solo, ProviderMode::as_declared));
    const auto& target = solo.configs[13];
    orch.run_cell(target);
    EXPECT_EQ(read_file(orch.cell_path(target)),
              read_file(grid.output_dir / "cells" / (target.config_hash() + ".json")));
}

TEST(Orchestrator, WorkerCountDoesNotChangeResultsOrTranscripts) {
    ScratchDir one("orch_w1"), many("orch_w8");
    json base{{"models", {{{"provider", "mock_confusion"}, {"model_id", "noisy"}}}},
              {"mock", {{"flip_prob", 0.3}}},
              {"cache", false}};
    auto a = base;
    a["workers"] = 1;
    auto b = base;
    b["workers"] = 8;
    auto ma = make_manifest(one.path(), a, 50);
    auto mb = make_manifest(many.path(), b, 50);
    run_experiment(ma, make_provider_factory(ma, ProviderMode::as_declared), quiet());
    run_experiment(mb, make_provider_factory(mb, ProviderMode::as_declared), quiet());
    EXPECT_EQ(cell_files(ma.output_dir), cell_files(mb.output_dir));
    EXPECT_EQ(read_file(ma.output_dir / "transcript.jsonl"), read_file(mb.output_dir / "transcript.jsonl"));
    EXPECT_EQ(json::parse(read_file(ma.output_dir / "manifest.lock"))["cache_mode"], "disabled");
}

TEST(Orchestrator, TwoFullRunsWriteIdenticalTranscripts) {
    ScratchDir a("orch_tr_a"), b("orch_tr_b");
    json flaky{{"models", {{{"provider", "mock_flaky"}, {"model_id", "flaky"}}}},
               {"mock", {{"inner", "mock_confusion"}, {"flip_prob", 0.1}, {"p_malformed", 0.3},
                         {"transient_failures", 1}}},
               {"initial_backoff_ms", 0},
               {"workers", 3}};
    auto ma = make_manifest(a.path(), flaky);
    auto mb = make_manifest(b.path(), flaky);
    run_experiment(ma, make_provider_factory(ma, ProviderMode::as_declared), quiet());
    run_experiment(mb, make_provider_factory(mb, ProviderMode::as_declared), quiet());
    const auto ta = read_file(ma.output_dir / "transcript.jsonl");
    EXPECT_FALSE(ta.empty());
    EXPECT_EQ(ta, read_file(mb.output_dir / "transcript.jsonl"));
    EXPECT_NE(ta.find("transport_error"), std::string::npos);
}

TEST(Orchestrator, RepairRetryRecoversMalformedFirstAnswers) {
    ScratchDir dir("orch_repair");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {10}}, {"flags", {"(-,-,-)"}}});
    auto provider = std::make_shared<LambdaProvider>([](const ChatRequest& r) {
        if (r.tag.attempt == 0) return std::string("I think these are:\n1 - L0\n");
        EXPECT_NE(r.prompt_text.find("Answer again using exactly this format."), std::string::npos);
        return echo_lines(r);
    });
    Orchestrator orch(m, fixed(provider));
    auto cell = orch.run_cell(m.configs[0]);
    EXPECT_EQ(cell.status, CellStatus::complete);
    EXPECT_EQ(cell.metrics.accuracy, 1.0);
    EXPECT_EQ(provider->sends, 4);
    for (const auto& e : cell.prediction_set.entries) EXPECT_EQ(e.provenance, Provenance::repaired);
}

TEST(Orchestrator, RepairTriggersOnTooManyMissingAndKeepsTheBetterAttempt) {
    ScratchDir dir("orch_repair2");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {10}}, {"flags", {"(-,-,-)"}}});
    // first answer drops 4 of 10 lines (over 20%), the retry drops 5
    auto provider = std::make_shared<LambdaProvider>([](const ChatRequest& r) {
        return r.tag.attempt == 0 ? echo_lines(r, 3) : echo_lines(r, 2);
    });
    Orchestrator orch(m, fixed(provider));
    auto cell = orch.run_cell(m.configs[0]);
    EXPECT_EQ(provider->sends, 4);
    std::size_t invalid = 0;
    for (const auto& e : cell.prediction_set.entries) {
        if (!e.predicted) {
            ++invalid;
            EXPECT_EQ(e.provenance, Provenance::defaulted);
        } else {
            EXPECT_EQ(e.provenance, Provenance::parsed);
        }
    }
    EXPECT_EQ(invalid, 8u);  // 4 per batch from the first attempt
    EXPECT_EQ(cell.metrics.n_invalid, 8u);
    EXPECT_EQ(cell.status, CellStatus::complete);

    // within the 20% tolerance no retry is sent
    auto lenient = std::make_shared<LambdaProvider>([](const ChatRequest& r) { return echo_lines(r, 10); });
    ScratchDir dir2("orch_repair3");
    auto m2 = make_manifest(dir2.path(), {{"batch_sizes", {10}}, {"flags", {"(-,-,-)"}}});
    Orchestrator(m2, fixed(lenient)).run_cell(m2.configs[0]);
    EXPECT_EQ(lenient->sends, 2);
}

TEST(Orchestrator, NoRepairWhenDisabled) {
    ScratchDir dir("orch_norepair");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {5}}, {"flags", {"(-,-,-)"}}, {"repair_retries", 0},
                                        {"models", {{{"provider", "mock_flaky"}, {"model_id", "f"}}}},
                                        {"mock", {{"p_malformed", 1.0}}}});
    Orchestrator orch(m, make_provider_factory(m, ProviderMode::as_declared));
    auto cell = orch.run_cell(m.configs[0]);
    EXPECT_EQ(orch.provider_calls(), 4u);
    EXPECT_EQ(cell.metrics.n_invalid, 20u);
    EXPECT_EQ(cell.metrics.accuracy, 0.0);
    for (const auto& e : cell.prediction_set.entries) EXPECT_EQ(e.provenance, Provenance::defaulted);
}

TEST(Orchestrator, RejectedBatchesMakeCellsPartialOrFailedWithoutAborting) {
    ScratchDir dir("orch_partial");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {5, 20}}, {"flags", {"(-,-,-)"}}});
    auto provider = std::make_shared<LambdaProvider>([](const ChatRequest& r) -> std::string {
        if (r.tag.items.size() == 20 || r.tag.batch_index == 1) throw ProviderRejected("context length");
        return echo_lines(r);
    });
    auto summary = run_experiment(m, fixed(provider), quiet());
    ASSERT_EQ(summary.cells.size(), 2u);
    const auto& partial = summary.cells[0];
    EXPECT_EQ(partial.status, CellStatus::partial);
    ASSERT_EQ(partial.errors.size(), 1u);
    EXPECT_EQ(partial.errors[0].batch_index, 1u);
    EXPECT_EQ(partial.prediction_set.entries.size(), 15u);
    EXPECT_EQ(partial.metrics.accuracy, 1.0);
    const auto& failed = summary.cells[1];
    EXPECT_EQ(failed.status, CellStatus::failed);
    EXPECT_TRUE(failed.prediction_set.entries.empty());
    EXPECT_FALSE(summary.all_complete());

    // non-complete cells are not reused on resume
    auto fixed_provider = std::make_shared<LambdaProvider>([](const ChatRequest& r) { return echo_lines(r); });
    RunOptions resume = quiet();
    resume.resume = true;
    auto healed = run_experiment(m, fixed(fixed_provider), resume);
    EXPECT_TRUE(healed.all_complete());
    EXPECT_EQ(healed.cells_from_checkpoint, 0u);
}

TEST(Orchestrator, ConfusionMockFlagsHaveNoEffect) {
    ScratchDir dir("orch_null");
    auto m = make_manifest(dir.path(),
                           {{"models", {{{"provider", "mock_confusion"}, {"model_id", "c"}}}},
                            {"mock", {{"matrix", {{0.6, 0.2, 0.1, 0.1}, {0.1, 0.7, 0.1, 0.1}, {0.3, 0, 0.7, 0}, {0, 0, 0.5, 0.5}}}}}},
                           200);
    auto summary = run_experiment(m, make_provider_factory(m, ProviderMode::as_declared), quiet());
    std::map<std::size_t, MetricsReport> by_batch;
    for (const auto& cell : summary.cells) {
        auto [it, inserted] = by_batch.emplace(cell.config.batch_size, cell.metrics);
        if (!inserted) EXPECT_EQ(cell.metrics, it->second) << cell.config.canonical_string();
    }
    EXPECT_LT(by_batch.at(1).accuracy, 1.0);
}

TEST(Audit, DeterministicMockAgreesPerfectly) {
    ScratchDir dir("audit_det");
    auto m = make_manifest(dir.path());
    Orchestrator orch(m, make_provider_factory(m, ProviderMode::as_declared));
    auto audit = orch.run_determinism_audit(m.configs.back(), 3);
    EXPECT_EQ(audit.report.n_runs, 3u);
    EXPECT_EQ(audit.report.exact_match_rate, 1.0);
    EXPECT_EQ(audit.report.mean_pairwise_agreement, 1.0);
    EXPECT_THROW(orch.run_determinism_audit(m.configs.back(), 1), InvariantViolation);
}

TEST(Audit, BypassesTheCacheAndPropagatesRejections) {
    ScratchDir dir("audit_cache");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {10}}});
    run_experiment(m, make_provider_factory(m, ProviderMode::as_declared), quiet());

    auto counting = std::make_shared<LambdaProvider>([](const ChatRequest& r) { return echo_lines(r); });
    Orchestrator orch(m, fixed(counting));
    orch.run_determinism_audit(m.configs[0], 2);
    EXPECT_EQ(counting->sends, 4);

    auto rejecting = std::make_shared<LambdaProvider>([](const ChatRequest&) -> std::string {
        throw ProviderRejected("nope");
    });
    Orchestrator bad(m, fixed(rejecting));
    EXPECT_THROW(bad.run_determinism_audit(m.configs[0], 2), ProviderRejected);
}

// Binary labels: two repeats agree when both or neither flip, 1 - 2p(1-p).
TEST(Audit, FlipMockAgreementMatchesClosedForm) {
    ScratchDir dir("audit_flip");
    auto m = make_manifest(dir.path(),
                           {{"models", {{{"provider", "mock_confusion"}, {"model_id", "c"}}}},
                            {"mock", {{"flip_prob", 0.05}}}, {"batch_sizes", {100}}},
                           2000, 2);
    Orchestrator orch(m, make_provider_factory(m, ProviderMode::as_declared));
    auto audit = orch.run_determinism_audit(m.configs[0], 2);
    EXPECT_NEAR(audit.report.mean_pairwise_agreement, 1 - 2 * 0.05 * 0.95, 0.02);
    EXPECT_LT(audit.report.exact_match_rate, 1.0);
}

TEST(Audit, RunWritesDeterminismReportForDefaultExtremes) {
    ScratchDir dir("audit_run");
    auto m = make_manifest(dir.path(), {{"audit", {{"repeats", 2}}}});
    EXPECT_TRUE(m.audit.enabled);
    EXPECT_EQ(m.audit.batch_sizes, (std::vector<std::size_t>{1, 100}));
    auto summary = run_experiment(m, make_provider_factory(m, ProviderMode::as_declared));
    ASSERT_EQ(summary.audits.size(), 4u);
    const auto csv_text = read_file(m.output_dir / "determinism.csv");
    EXPECT_NE(csv_text.find("-,-,-,1,echo,2,20,1.000,1.000,0"), std::string::npos);
    EXPECT_NE(csv_text.find("+,+,+,100,echo,2,20,1.000,1.000,0"), std::string::npos);
}

TEST(ResponseCache, StoresRawTextVerbatim) {
    ScratchDir dir("cache");
    ResponseCache cache(dir.path());
    CacheKeyFields f;
    f.model_id = "m";
    f.prompt_hash = "abc";
    const auto key = f.key();
    EXPECT_EQ(cache.get(key), std::nullopt);
    cache.put({key, "  1: A \r\n\n", json{{"matched", 1}}});
    auto hit = cache.get(key);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->raw_text, "  1: A \r\n\n");
    EXPECT_EQ(hit->parse_outcome["matched"], 1);

    testing_support::write_text(cache.path_for(key), "{broken");
    EXPECT_EQ(cache.get(key), std::nullopt);
}

TEST(ResponseCache, KeyCoversEveryField) {
    CacheKeyFields base;
    base.model_id = "m";
    base.prompt_hash = "h";
    std::set<std::string> keys{base.key()};
    auto v = base; v.provider = ProviderKind::openai_compat; keys.insert(v.key());
    v = base; v.model_id = "n"; keys.insert(v.key());
    v = base; v.temperature = 0.7; keys.insert(v.key());
    v = base; v.prompt_hash = "i"; keys.insert(v.key());
    v = base; v.policy_version = "other"; keys.insert(v.key());
    v = base; v.trial = 1; keys.insert(v.key());
    EXPECT_EQ(keys.size(), 7u);
    EXPECT_EQ(base.key(), base.key());
}

TEST(Manifest, RejectsInvalidInput) {
    ScratchDir dir("manifest");
    EXPECT_THROW(make_manifest(dir.path(), {{"batch_sizes", json::array()}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"batch_sizes", {0}}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"repeats", 0}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"workers", 0}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"temperature", 3.0}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"mock", {{"flip_prob", 1.5}}}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"flags", {"(+,+,+)", "(+,+,+)"}}}), ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"models", {{{"provider", "carrier_pigeon"}, {"model_id", "x"}}}}}),
                 ManifestInvalid);
    EXPECT_THROW(make_manifest(dir.path(), {{"task", "missing.json"}}), ManifestInvalid);
    EXPECT_THROW(parse_manifest("[1,2]", dir.path()), ManifestInvalid);
    EXPECT_THROW(load_manifest(dir / "nope.json"), ManifestInvalid);
}

TEST(Manifest, RejectsConfigsNeedingAbsentComponents) {
    ScratchDir dir("manifest_blocks");
    testing_support::write_text(dir / "items.csv", "item_id,text,gold\n1,a,X\n");
    testing_support::write_text(dir / "t.json",
                                R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X","Y"]})");
    json j{{"task", "t.json"}, {"models", {{{"provider", "mock_echo"}, {"model_id", "e"}}}}, {"batch_sizes", {1}}};
    EXPECT_THROW(parse_manifest(j.dump(), dir.path()), ManifestInvalid);
    j["flags"] = {"(-,-,-)"};
    EXPECT_NO_THROW(parse_manifest(j.dump(), dir.path()));
}

TEST(ProviderFactory, ModesSelectMocksOrLiveEndpoints) {
    ScratchDir dir("factory");
    auto m = make_manifest(dir.path(), {{"models", {{{"provider", "openai_compat"}, {"model_id", "gpt-4o"}},
                                                    {{"provider", "mock_echo"}, {"model_id", "echo"}}}}});
    auto mock = make_provider_factory(m, ProviderMode::mock);
    EXPECT_EQ(mock(m.models[0])->name(), "mock_echo");
    auto live = make_provider_factory(m, ProviderMode::live);
    EXPECT_THROW(live(m.models[1]), ManifestInvalid);
    ::unsetenv("PROMPTSWEEP_OPENAI_KEY");
    EXPECT_THROW(live(m.models[0]), AuthError);
    ::setenv("PROMPTSWEEP_OPENAI_KEY", "k", 1);
    EXPECT_EQ(live(m.models[0])->name(), "openai_compat");
}

TEST(CellResult, JsonRoundTrip) {
    ScratchDir dir("cell_json");
    auto m = make_manifest(dir.path(), {{"batch_sizes", {7}}, {"flags", {"(+,-,+)"}}});
    auto provider = std::make_shared<LambdaProvider>([](const ChatRequest& r) { return echo_lines(r, 4); });
    Orchestrator orch(m, fixed(provider));
    auto cell = orch.run_cell(m.configs[0]);
    auto back = cell_from_json(json::parse(serialize_cell(cell)));
    EXPECT_EQ(back.config, cell.config);
    EXPECT_EQ(back.prediction_set, cell.prediction_set);
    EXPECT_EQ(back.metrics, cell.metrics);
    EXPECT_EQ(back.status, cell.status);
    EXPECT_EQ(serialize_cell(back), serialize_cell(cell));
}
