#include "promptsweep/provider_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "promptsweep/error.hpp"
#include "promptsweep/hashing.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {

std::string RequestTag::key() const {
    std::ostringstream ss;
    ss << scope << '/' << config_hash << '/' << batch_index << '/' << attempt << '/' << trial;
    return ss.str();
}

void ChatRequest::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw InvariantViolation("temperature " + format_shortest(temperature) +
                                 " outside [0, 2]");
    }
    if (prompt_text.empty()) throw InvariantViolation("empty prompt");
}

std::string ChatRequest::request_hash() const {
    std::ostringstream ss;
    ss << model_id << '\n'
       << format_shortest(temperature) << '\n'
       << tag.key() << '\n'
       << prompt_text;
    return sha256_hex(ss.str()).substr(0, 32);
}

Clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void SystemClock::sleep_for(duration d) { std::this_thread::sleep_for(d); }

Clock::time_point VirtualClock::now() {
    std::lock_guard lock(mu_);
    return now_;
}

void VirtualClock::sleep_for(duration d) { advance(d); }

void VirtualClock::advance(duration d) {
    std::lock_guard lock(mu_);
    now_ += d;
}

RateLimiter::RateLimiter(std::size_t requests_per_minute, Clock& clock)
    : rpm_(requests_per_minute), clock_(clock) {}

void RateLimiter::acquire() {
    std::lock_guard lock(mu_);
    if (rpm_ == 0) {
        history_.push_back(clock_.now());
        return;
    }
    constexpr auto kWindow = std::chrono::seconds(60);
    for (;;) {
        const auto now = clock_.now();
        while (!window_.empty() && now - window_.front() >= kWindow) window_.pop_front();
        if (window_.size() < rpm_) {
            window_.push_back(now);
            history_.push_back(now);
            return;
        }
        // Holding the lock keeps waiters in arrival order.
        clock_.sleep_for(window_.front() + kWindow - now);
    }
}

std::vector<Clock::time_point> RateLimiter::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

std::chrono::milliseconds RetryPolicy::backoff_for(int failed_attempts) const {
    const double scaled = static_cast<double>(initial_backoff.count()) *
                          std::pow(multiplier, std::max(0, failed_attempts - 1));
    const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

nlohmann::json TranscriptRecord::to_json() const {
    return nlohmann::json{{"request_hash", request_hash},
                          {"config_hash", config_hash},
                          {"batch_index", batch_index},
                          {"attempt", attempt},
                          {"transport_attempt", transport_attempt},
                          {"trial", trial},
                          {"status", status},
                          {"raw_response", raw_response},
                          {"latency_ms", latency_ms},
                          {"error", error}};
}

TranscriptLog::TranscriptLog(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("cannot open transcript log " + path.string());
}

void TranscriptLog::append(const TranscriptRecord& record) {
    std::lock_guard lock(mu_);
    out_ << record.to_json().dump() << '\n';
    out_.flush();
}

void TranscriptLog::append(const std::vector<TranscriptRecord>& records) {
    std::lock_guard lock(mu_);
    for (const auto& r : records) out_ << r.to_json().dump() << '\n';
    out_.flush();
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, RetryPolicy policy,
                 std::size_t requests_per_minute, Clock& clock)
    : provider_(std::move(provider)),
      policy_(policy),
      clock_(clock),
      limiter_(requests_per_minute, clock) {
    if (!provider_) throw std::invalid_argument("Gateway needs a provider");
    if (policy_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    std::vector<TranscriptRecord> ignored;
    return complete(request, ignored);
}

ChatResponse Gateway::complete(const ChatRequest& request,
                               std::vector<TranscriptRecord>& transcript) {
    request.validate();
    const auto tag_key = request.tag.key();
    {
        std::lock_guard lock(mu_);
        if (succeeded_.count(tag_key)) {
            throw std::logic_error("request " + tag_key + " already completed");
        }
    }
    const auto hash = request.request_hash();

    for (int attempt = 1;; ++attempt) {
        limiter_.acquire();
        {
            std::lock_guard lock(mu_);
            ++calls_;
        }
        TranscriptRecord record;
        record.request_hash = hash;
        record.config_hash = request.tag.config_hash;
        record.batch_index = request.tag.batch_index;
        record.attempt = request.tag.attempt;
        record.transport_attempt = attempt;
        record.trial = request.tag.trial;
        try {
            auto response = provider_->send(request);
            response.attempt = attempt;
            record.status = "ok";
            record.raw_response = response.raw_text;
            record.latency_ms = response.latency_ms;
            transcript.push_back(std::move(record));
            std::lock_guard lock(mu_);
            succeeded_.insert(tag_key);
            return response;
        } catch (const ProviderError& e) {
            if (dynamic_cast<const AuthError*>(&e)) record.status = "auth_error";
            else if (dynamic_cast<const RateLimited*>(&e)) record.status = "rate_limited";
            else if (dynamic_cast<const TransportError*>(&e)) record.status = "transport_error";
            else record.status = "provider_rejected";
            record.error = e.what();
            transcript.push_back(std::move(record));
            if (!e.retryable() || attempt >= policy_.max_attempts) throw;
            clock_.sleep_for(policy_.backoff_for(attempt));
        }
    }
}

std::size_t Gateway::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

} // namespace promptsweep
