#pragma once
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "promptsweep/task_model.hpp"

namespace promptsweep {

// Bumped whenever the corrective-retry procedure changes what is sent.
inline constexpr std::string_view kAttemptPolicyVersion = "repair-suffix-v1";

struct CacheKeyFields {
    ProviderKind provider = ProviderKind::mock_echo;
    std::string model_id;
    double temperature = 0.0;
    std::string prompt_hash;
    std::string policy_version{kAttemptPolicyVersion};
    int trial = 0;

    std::string key() const;  // sha256 over a canonical JSON encoding
};

struct CacheEntry {
    std::string key;
    std::string raw_text;
    nlohmann::json parse_outcome = nlohmann::json::object();
};

// Per-request checkpoint store. One file per key under
// `<dir>/<key[0..2]>/<key>.json`, written with write-temp-then-rename.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CacheEntry> get(const std::string& key) const;
    void put(const CacheEntry& entry);
    std::filesystem::path path_for(const std::string& key) const;

private:
    std::filesystem::path dir_;
    std::mutex write_mu_;
};

} // namespace promptsweep
