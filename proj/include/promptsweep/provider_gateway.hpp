#pragma once
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptsweep/task_model.hpp"

namespace promptsweep {

struct ItemRef {
    std::string item_id;
    Label gold;
};

// Identifies one request within a run. Mock providers read the batch's gold
// labels from `items`; live providers ignore them.
struct RequestTag {
    std::string scope = "grid";  // separates audit repeats from grid requests
    std::string config_hash;
    std::size_t batch_index = 0;
    int attempt = 0;  // 0 = first send, 1.. = corrective retries
    int trial = 0;
    std::vector<ItemRef> items;

    std::string key() const;
};

struct ChatRequest {
    std::string model_id;
    std::string prompt_text;
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    RequestTag tag;

    // Throws InvariantViolation unless temperature is in [0, 2] and the prompt is non-empty.
    void validate() const;
    std::string request_hash() const;
};

struct ChatResponse {
    std::string raw_text;  // verbatim, never trimmed
    std::int64_t latency_ms = 0;
    nlohmann::json provider_meta = nlohmann::json::object();
    int attempt = 1;  // transport attempts used, 1-based
};

// Implementations throw AuthError, RateLimited, TransportError or
// ProviderRejected. `send` may be called concurrently.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse send(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

class Clock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    using duration = std::chrono::steady_clock::duration;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_for(duration d) = 0;
};

class SystemClock : public Clock {
public:
    time_point now() override;
    void sleep_for(duration d) override;
};

// Test clock: sleeping advances time instantly.
class VirtualClock : public Clock {
public:
    time_point now() override;
    void sleep_for(duration d) override;
    void advance(duration d);

private:
    std::mutex mu_;
    time_point now_{};
};

// At most `requests_per_minute` acquisitions in any sliding 60 s window.
// Zero disables limiting.
class RateLimiter {
public:
    RateLimiter(std::size_t requests_per_minute, Clock& clock);
    void acquire();
    std::vector<Clock::time_point> history() const;

private:
    std::size_t rpm_;
    Clock& clock_;
    mutable std::mutex mu_;
    std::deque<Clock::time_point> window_;
    std::vector<Clock::time_point> history_;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};

    std::chrono::milliseconds backoff_for(int failed_attempts) const;
};

struct TranscriptRecord {
    std::string request_hash;
    std::string config_hash;
    std::size_t batch_index = 0;
    int attempt = 0;            // corrective attempt
    int transport_attempt = 1;  // retry within the gateway
    int trial = 0;
    std::string status;         // "ok" or the error class
    std::string raw_response;
    std::int64_t latency_ms = 0;
    std::string error;

    nlohmann::json to_json() const;
};

// Append-only newline-delimited JSON. Safe for concurrent appends.
class TranscriptLog {
public:
    explicit TranscriptLog(const std::filesystem::path& path);
    void append(const TranscriptRecord& record);
    void append(const std::vector<TranscriptRecord>& records);

private:
    std::mutex mu_;
    std::ofstream out_;
};

// Retries, rate limiting and transcript capture in front of one provider.
class Gateway {
public:
    Gateway(std::shared_ptr<ChatProvider> provider, RetryPolicy policy,
            std::size_t requests_per_minute, Clock& clock);

    // Returns the first successful response. Every transport attempt is
    // appended to `transcript`. Rethrows the last ProviderError once retries
    // are exhausted or on a non-retryable error. A second successful
    // completion of the same request tag is a logic_error.
    ChatResponse complete(const ChatRequest& request, std::vector<TranscriptRecord>& transcript);
    ChatResponse complete(const ChatRequest& request);

    std::size_t calls() const;
    const RateLimiter& limiter() const { return limiter_; }
    ChatProvider& provider() { return *provider_; }

private:
    std::shared_ptr<ChatProvider> provider_;
    RetryPolicy policy_;
    Clock& clock_;
    RateLimiter limiter_;
    mutable std::mutex mu_;
    std::set<std::string> succeeded_;
    std::size_t calls_ = 0;
};

} // namespace promptsweep
