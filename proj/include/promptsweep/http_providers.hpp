#pragma once
#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "promptsweep/provider_gateway.hpp"

namespace promptsweep {

struct HttpEndpoint {
    std::string base_url;  // scheme://host[:port][/prefix]
    std::string api_key;
    std::chrono::seconds timeout{120};
};

// Reads PROMPTSWEEP_{OPENAI,GEMINI}_KEY and PROMPTSWEEP_BASE_URL_{OPENAI,GEMINI}.
// Throws AuthError when the key variable is unset or empty.
HttpEndpoint endpoint_from_env(ProviderKind kind);

// Wire-format helpers, exposed for tests.
nlohmann::json openai_request_body(const ChatRequest& request);
std::string openai_response_text(const nlohmann::json& body);
nlohmann::json gemini_request_body(const ChatRequest& request);
std::string gemini_response_text(const nlohmann::json& body);

// Maps a non-2xx status to the matching ProviderError and throws it.
[[noreturn]] void throw_for_status(int status, const std::string& body);

// POST {base}/v1/chat/completions with a bearer token; the whole prompt is a
// single user message.
class OpenAICompatProvider : public ChatProvider {
public:
    explicit OpenAICompatProvider(HttpEndpoint endpoint);
    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "openai_compat"; }

private:
    HttpEndpoint endpoint_;
};

// POST {base}/v1beta/models/{model}:generateContent?key=...
class GeminiCompatProvider : public ChatProvider {
public:
    explicit GeminiCompatProvider(HttpEndpoint endpoint);
    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "gemini_compat"; }

private:
    HttpEndpoint endpoint_;
};

} // namespace promptsweep
