#include "promptsweep/http_providers.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "promptsweep/error.hpp"

namespace promptsweep {
namespace {

struct SplitUrl {
    std::string scheme_host_port;
    std::string prefix;  // no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("base url '" + base_url + "' lacks a scheme");
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host_port = base_url;
    } else {
        out.scheme_host_port = base_url.substr(0, path_start);
        out.prefix = base_url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::string(fallback);
}

struct HttpResult {
    nlohmann::json body;
    std::int64_t latency_ms = 0;
    int status = 0;
};

HttpResult post_json(const HttpEndpoint& endpoint, const std::string& path,
                     const nlohmann::json& body, const httplib::Headers& headers) {
    auto url = split_base_url(endpoint.base_url);
    httplib::Client client(url.scheme_host_port);
    const auto secs = static_cast<time_t>(endpoint.timeout.count());
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!res) {
        throw TransportError("POST " + url.prefix + path + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) throw_for_status(res->status, res->body);

    HttpResult out;
    out.status = res->status;
    out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    try {
        out.body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what());
    }
    return out;
}

} // namespace

HttpEndpoint endpoint_from_env(ProviderKind kind) {
    HttpEndpoint ep;
    if (kind == ProviderKind::openai_compat) {
        ep.base_url = env_or("PROMPTSWEEP_BASE_URL_OPENAI", "https://api.openai.com");
        ep.api_key = env_or("PROMPTSWEEP_OPENAI_KEY", "");
        if (ep.api_key.empty()) throw AuthError("PROMPTSWEEP_OPENAI_KEY is not set");
    } else if (kind == ProviderKind::gemini_compat) {
        ep.base_url = env_or("PROMPTSWEEP_BASE_URL_GEMINI",
                             "https://generativelanguage.googleapis.com");
        ep.api_key = env_or("PROMPTSWEEP_GEMINI_KEY", "");
        if (ep.api_key.empty()) throw AuthError("PROMPTSWEEP_GEMINI_KEY is not set");
    } else {
        throw std::invalid_argument("no HTTP endpoint for provider " + to_string(kind));
    }
    return ep;
}

void throw_for_status(int status, const std::string& body) {
    const auto msg = "HTTP " + std::to_string(status) + ": " + body.substr(0, 500);
    if (status == 401 || status == 403) throw AuthError(msg);
    if (status == 429) throw RateLimited(msg);
    if (status == 408 || status >= 500) throw TransportError(msg);
    throw ProviderRejected(msg);
}

nlohmann::json openai_request_body(const ChatRequest& request) {
    nlohmann::json body{
        {"model", request.model_id},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
        {"temperature", request.temperature},
    };
    if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;
    return body;
}

std::string openai_response_text(const nlohmann::json& body) {
    try {
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderRejected(std::string("unexpected chat completion shape: ") + e.what());
    }
}

nlohmann::json gemini_request_body(const ChatRequest& request) {
    nlohmann::json generation{{"temperature", request.temperature}};
    if (request.max_output_tokens) generation["maxOutputTokens"] = *request.max_output_tokens;
    return nlohmann::json{
        {"contents", nlohmann::json::array({{{"parts", nlohmann::json::array({{{"text", request.prompt_text}}})}}})},
        {"generationConfig", generation},
    };
}

std::string gemini_response_text(const nlohmann::json& body) {
    try {
        return body.at("candidates").at(0).at("content").at("parts").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderRejected(std::string("unexpected generateContent shape: ") + e.what());
    }
}

OpenAICompatProvider::OpenAICompatProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

ChatResponse OpenAICompatProvider::send(const ChatRequest& request) {
    httplib::Headers headers{{"Authorization", "Bearer " + endpoint_.api_key}};
    auto result = post_json(endpoint_, "/v1/chat/completions", openai_request_body(request), headers);
    ChatResponse r;
    r.raw_text = openai_response_text(result.body);
    r.latency_ms = result.latency_ms;
    r.provider_meta = nlohmann::json{{"http_status", result.status}};
    if (result.body.contains("usage")) r.provider_meta["usage"] = result.body["usage"];
    if (result.body.contains("model")) r.provider_meta["model"] = result.body["model"];
    return r;
}

GeminiCompatProvider::GeminiCompatProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

ChatResponse GeminiCompatProvider::send(const ChatRequest& request) {
    const auto path = "/v1beta/models/" + request.model_id +
                      ":generateContent?key=" + httplib::detail::encode_query_param(endpoint_.api_key);
    auto result = post_json(endpoint_, path, gemini_request_body(request), {});
    ChatResponse r;
    r.raw_text = gemini_response_text(result.body);
    r.latency_ms = result.latency_ms;
    r.provider_meta = nlohmann::json{{"http_status", result.status}};
    if (result.body.contains("usageMetadata")) r.provider_meta["usage"] = result.body["usageMetadata"];
    if (result.body.contains("modelVersion")) r.provider_meta["model"] = result.body["modelVersion"];
    return r;
}

} // namespace promptsweep
