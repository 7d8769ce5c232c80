#pragma once
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptsweep/mock_providers.hpp"
#include "promptsweep/task_model.hpp"

namespace promptsweep {

struct MockSettings {
    std::string inner = "mock_echo";  // what mock_flaky wraps: mock_echo or mock_confusion
    ConfusionDistribution matrix;     // empty means identity
    double flip_prob = 0.0;
    double p_malformed = 0.0;
    double p_reject = 0.0;
    int transient_failures = 0;
    std::chrono::milliseconds delay{0};
};

struct AuditSettings {
    bool enabled = false;
    int repeats = 3;
    std::vector<Flags> flags;               // default: (-,-,-) and (+,+,+)
    std::vector<std::size_t> batch_sizes;   // default: 1 and the largest grid batch size
};

struct RunManifest {
    std::filesystem::path task_path;
    TaskSpec task;
    std::vector<ModelRef> models;
    std::vector<PromptConfig> configs;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;

    bool use_cache = true;
    bool shuffle = false;
    std::size_t workers = 4;
    int repair_retries = 1;
    std::size_t requests_per_minute = 0;
    std::chrono::seconds timeout{120};
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};

    MockSettings mock;
    AuditSettings audit;

    nlohmann::json source;  // manifest as written, frozen into manifest.lock

    std::string cache_mode() const { return use_cache ? "read_write" : "disabled"; }
};

// Relative paths resolve against the manifest's directory. Throws
// ManifestInvalid for anything structurally wrong, including grid cells that
// ask for a component the task does not define.
RunManifest load_manifest(const std::filesystem::path& path);
RunManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);

} // namespace promptsweep
