// promptsweep: run, audit and report on prompt-configuration grids.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "promptsweep/error.hpp"
#include "promptsweep/manifest.hpp"
#include "promptsweep/orchestrator.hpp"
#include "promptsweep/reporter.hpp"
#include "promptsweep/text.hpp"

namespace ps = promptsweep;

namespace {

ps::ProviderMode parse_mode(const std::string& s) {
    if (s == "mock") return ps::ProviderMode::mock;
    if (s == "live") return ps::ProviderMode::live;
    return ps::ProviderMode::as_declared;
}

int cmd_run(const std::string& manifest_path, const std::string& providers, bool resume,
            const std::string& dump_dir, long stop_after) {
    auto manifest = ps::load_manifest(manifest_path);
    auto factory = ps::make_provider_factory(manifest, parse_mode(providers));
    ps::Orchestrator orchestrator(manifest, factory);

    ps::RunOptions options;
    options.resume = resume;
    if (!dump_dir.empty()) options.dump_prompts = dump_dir;
    if (stop_after > 0) options.stop_after_cells = static_cast<std::size_t>(stop_after);
    options.on_cell = [](const ps::CellResult& cell, bool from_checkpoint) {
        std::cerr << (from_checkpoint ? "cached " : "ran    ") << cell.config.canonical_string()
                  << "  " << ps::to_string(cell.status)
                  << "  acc=" << ps::format_fixed3(cell.metrics.accuracy) << "\n";
    };

    auto summary = orchestrator.run(options);
    std::cerr << summary.cells.size() << " cells (" << summary.cells_from_checkpoint
              << " from checkpoint), " << summary.provider_calls << " provider calls, "
              << summary.cache_hits << " cache hits";
    if (summary.interrupted) std::cerr << ", stopped early";
    std::cerr << "\n";
    return summary.all_complete() ? 0 : 1;
}

int cmd_audit(const std::string& manifest_path, const std::string& providers,
              const std::string& notation, std::size_t batch, int repeats) {
    auto manifest = ps::load_manifest(manifest_path);
    auto factory = ps::make_provider_factory(manifest, parse_mode(providers));
    ps::Orchestrator orchestrator(manifest, factory);

    std::vector<ps::AuditResult> audits;
    for (const auto& model : manifest.models) {
        ps::PromptConfig cfg{ps::parse_notation(notation), batch, model.provider, model.model_id,
                             manifest.configs.front().temperature, 0};
        audits.push_back(orchestrator.run_determinism_audit(cfg, repeats));
    }
    std::cout << ps::render_determinism_csv(audits);
    ps::write_determinism_report(manifest.output_dir, audits);
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
    auto cells = ps::load_cells(run_dir);
    if (cells.empty()) {
        std::cerr << "no cells under " << run_dir << "\n";
        return 1;
    }
    std::cout << (format == "md" ? ps::render_summary_markdown(cells)
                                 : ps::render_summary_csv(cells));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt-configuration experiment harness for LLM text classification"};
    app.require_subcommand(1);

    std::string manifest_path, providers = "declared", dump_dir;
    bool resume = false;
    long stop_after = 0;
    auto* run = app.add_subcommand("run", "Execute every cell of a manifest's grid");
    run->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--providers", providers, "Provider source")
        ->check(CLI::IsMember({"declared", "mock", "live"}));
    run->add_flag("--resume", resume, "Reuse completed cells from the output directory");
    run->add_option("--dump-prompts", dump_dir, "Write every assembled prompt under DIR");
    run->add_option("--stop-after", stop_after, "Stop after N freshly executed cells")
        ->group("");

    std::string notation;
    std::size_t batch = 1;
    int repeats = 3;
    auto* audit = app.add_subcommand("audit", "Repeat one configuration and measure agreement");
    audit->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    audit->add_option("--providers", providers, "Provider source")
        ->check(CLI::IsMember({"declared", "mock", "live"}));
    audit->add_option("--config", notation, "Flag notation such as (+,-,+)")->required();
    audit->add_option("--batch", batch, "Batch size")->required()->check(CLI::PositiveNumber);
    audit->add_option("--repeats", repeats, "Number of repeats (>= 2)")->default_val(3);

    std::string run_dir, format = "md";
    auto* report = app.add_subcommand("report", "Render the summary of a finished run");
    report->add_option("--run", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(manifest_path, providers, resume, dump_dir, stop_after);
        if (*audit) return cmd_audit(manifest_path, providers, notation, batch, repeats);
        if (*report) return cmd_report(run_dir, format);
    } catch (const ps::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
