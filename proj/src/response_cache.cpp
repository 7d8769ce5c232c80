#include "promptsweep/response_cache.hpp"

#include "promptsweep/fs_util.hpp"
#include "promptsweep/hashing.hpp"

namespace promptsweep {

using json = nlohmann::json;

std::string CacheKeyFields::key() const {
    json fields = json::array({to_string(provider), model_id, temperature, prompt_hash,
                               policy_version, trial});
    return sha256_hex(fields.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
    auto path = path_for(key);
    if (!std::filesystem::is_regular_file(path)) return std::nullopt;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception&) {
        return std::nullopt;  // unreadable entries are refetched and overwritten
    }
    if (!j.is_object() || j.value("key", "") != key || !j.contains("raw_text")) return std::nullopt;
    return CacheEntry{key, j["raw_text"].get<std::string>(),
                      j.value("parse_outcome", json::object())};
}

void ResponseCache::put(const CacheEntry& entry) {
    json j{{"key", entry.key}, {"raw_text", entry.raw_text}, {"parse_outcome", entry.parse_outcome}};
    std::lock_guard lock(write_mu_);
    write_file_atomic(path_for(entry.key), j.dump() + "\n");
}

} // namespace promptsweep
