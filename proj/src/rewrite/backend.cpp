#include "rrank/rewrite/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rrank/errors.hpp"
#include "rrank/hash.hpp"

namespace rrank {

namespace {

// Pulls the text between two markers; empty when the markers are absent.
std::string between(const std::string& text, const std::string& from, const std::string& to) {
    const auto start = text.find(from);
    if (start == std::string::npos) return "";
    const auto body = start + from.size();
    const auto end = text.find(to, body);
    if (end == std::string::npos) return "";
    return text.substr(body, end - body);
}

std::string first_line_after(const std::string& text, const std::string& label) {
    const auto start = text.find(label);
    if (start == std::string::npos) return "";
    const auto body = start + label.size();
    const auto end = text.find('\n', body);
    return text.substr(body, end == std::string::npos ? std::string::npos : end - body);
}

}  // namespace

BackendResponse MockBackend::complete(const BackendRequest& request) {
    const std::string& p = request.prompt;
    BackendResponse r;
    r.backend_tag = "mock";

    if (p.find("determine the actual intention") != std::string::npos) {
        const std::string query = between(p, "The search query is ", ". Please analyze");
        r.text = "The intent is to find information about: " + query;
        return r;
    }
    if (p.find("Assign judgment scores") != std::string::npos) {
        r.text = "1 1";
        return r;
    }
    if (p.find("Rate each metric on a 0 to 5 scale") != std::string::npos) {
        // Deterministic per prompt, concentrated at the top of the scale.
        const std::uint64_t h = fnv1a64(p);
        r.text = std::to_string(3 + static_cast<int>(h % 3)) + " " +
                 std::to_string(3 + static_cast<int>((h >> 8) % 3));
        return r;
    }
    if (p.find("Assuming you are ") != std::string::npos) {
        const std::string agent = between(p, "Assuming you are ", ",");
        std::string base = first_line_after(p, "Original query: ");
        if (base.empty()) base = first_line_after(p, "Query intent: ");
        r.text = "As " + agent + " I would ask: " + base;
        return r;
    }
    throw BackendError("mock backend does not recognize this prompt");
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw UsageError("http backend endpoint must start with http:// or https://");
    }
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = config_.endpoint;
        path_ = "/v1/chat/completions";
    } else {
        host_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
}

BackendResponse HttpBackend::complete(const BackendRequest& request) {
    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw BackendError("http backend: no response from " + host_ + " (" +
                           httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw BackendError("http backend: status " + std::to_string(res->status) + " from " +
                           host_ + path_);
    }
    try {
        const auto j = nlohmann::json::parse(res->body);
        BackendResponse out;
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.backend_tag = config_.model.empty() ? "http" : config_.model;
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("http backend: malformed response body: ") + e.what());
    }
}

RetryingBackend::RetryingBackend(std::shared_ptr<Backend> inner, int attempts, int backoff_ms)
    : inner_(std::move(inner)), attempts_(attempts), backoff_ms_(backoff_ms) {
    if (attempts_ < 1) {
        throw UsageError("retry budget must be at least 1");
    }
}

BackendResponse RetryingBackend::complete(const BackendRequest& request) {
    int delay = backoff_ms_;
    for (int attempt = 1;; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const ParseError&) {
            throw;  // not a transport problem
        } catch (const BackendError&) {
            if (attempt >= attempts_) throw;
            if (delay > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
                delay *= 2;
            }
        }
    }
}

BackendResponse ScriptedBackend::complete(const BackendRequest& request) {
    BackendResponse response;
    response.backend_tag = "scripted";
    for (auto& rule : rules_) {
        if (rule(request, response)) return response;
    }
    throw BackendError("scripted backend: no rule matched prompt");
}

}  // namespace rrank
