// SPDX-License-Identifier: Apache-2.0
#pragma once

// Kept separate from eval.hpp so test binaries that only script the
// transport do not pay for compiling the HTTP stack.

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>

#include "zebra/error.hpp"
#include "zebra/eval.hpp"

namespace zebra {

/// Chat-completion transport over cpp-httplib. The base URL is
/// scheme://host[:port][/prefix]; requests go to <prefix>/chat/completions.
class HttpTransport : public Transport {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpTransport(Sleeper sleeper = nullptr) : sleeper_(std::move(sleeper)) {}

    TransportResult post_chat(const ModelEndpointConfig& cfg, const std::string& token,
                              const std::string& body) override {
        auto [origin, prefix] = split_base_url(cfg.base_url);
        httplib::Client client(origin);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        client.set_write_timeout(cfg.timeout_seconds, 0);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
        httplib::Result res =
            client.Post(prefix + "/chat/completions", headers, body, "application/json");
        TransportResult out;
        if (!res) {
            out.transport_failure = classify_transport_error(res.error());
            return out;
        }
        out.has_response = true;
        out.status = res->status;
        out.body = res->body;
        return out;
    }

    void sleep_for(std::chrono::milliseconds delay) override {
        if (sleeper_) {
            sleeper_(delay);
        } else {
            std::this_thread::sleep_for(delay);
        }
    }

    static std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
        std::size_t scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) {
            throw EvalError("endpoint URL must include a scheme: " + base_url);
        }
        std::size_t path_start = base_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) return {base_url, ""};
        std::string prefix = base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        return {base_url.substr(0, path_start), prefix};
    }

private:
    static FailureClass classify_transport_error(httplib::Error e) {
        // Deadline-style errors are terminal; everything else is treated
        // as a connection problem and retried.
        switch (e) {
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Read: return FailureClass::timeout;
            default: return FailureClass::connection_error;
        }
    }

    Sleeper sleeper_;
};

} // namespace zebra
