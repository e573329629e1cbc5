#pragma once

#include <functional>
#include <memory>
#include <string>

namespace rrank {

struct BackendRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 256;
};

struct BackendResponse {
    std::string text;  // raw, unparsed model output
    std::string backend_tag;
};

// Single-operation LLM contract. Implementations throw BackendError on hard
// failure; retry policy lives in RetryingBackend.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResponse complete(const BackendRequest& request) = 0;
};

// Deterministic rule-based mock: recognizes the pipeline's own prompt shapes
// and answers accordingly (intent echo, role-flavored rewrite, passing check
// scores, top judge scores). Pure in the prompt, so concurrent use is safe.
class MockBackend : public Backend {
public:
    BackendResponse complete(const BackendRequest& request) override;
};

struct HttpBackendConfig {
    std::string endpoint;           // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string auth_env = "RRANK_API_KEY";  // env var holding the bearer token
    double temperature = 0.0;
    int timeout_seconds = 30;
};

// Minimal chat-completions client (OpenAI-style JSON). The bearer token is
// read from the configured environment variable, never from flags.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    BackendResponse complete(const BackendRequest& request) override;

private:
    HttpBackendConfig config_;
    std::string host_;
    std::string path_;
};

// Wraps another backend with a retry budget and exponential backoff on
// BackendError. ParseError is not handled here; the pipeline owns that.
class RetryingBackend : public Backend {
public:
    RetryingBackend(std::shared_ptr<Backend> inner, int attempts = 3, int backoff_ms = 100);
    BackendResponse complete(const BackendRequest& request) override;

private:
    std::shared_ptr<Backend> inner_;
    int attempts_;
    int backoff_ms_;
};

// Scripted backend for tests: pops canned replies per recognized prompt kind.
class ScriptedBackend : public Backend {
public:
    using Rule = std::function<bool(const BackendRequest&, BackendResponse&)>;
    void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }
    BackendResponse complete(const BackendRequest& request) override;

private:
    std::vector<Rule> rules_;
};

}  // namespace rrank
