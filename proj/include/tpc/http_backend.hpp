// SPDX-License-Identifier: Apache-2.0
//
// Chat-completion client. Define TPC_WITH_OPENSSL (and link OpenSSL) to reach
// https endpoints.
#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#ifdef TPC_WITH_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif
#include <httplib.h>
#include <json.hpp>

#include "backend.hpp"
#include "error.hpp"

namespace tpc::agent
{

struct HttpBackendConfig
{
    std::string base_url;
    std::string model;
    double temperature = 0.0;
    double timeout_seconds = 60.0;
    int retries = 3;
    int backoff_ms = 500;
    std::string api_key_env = "OPENAI_API_KEY";
};

class HttpBackend: public LlmBackend
{
  public:
    explicit HttpBackend(HttpBackendConfig cfg): _cfg(std::move(cfg))
    {
        auto scheme_end = _cfg.base_url.find("://");
        if (scheme_end == std::string::npos)
            throw BackendError(ErrorKind::BackendUnavailable, "base_url must start with http:// or https://");
        auto scheme = _cfg.base_url.substr(0, scheme_end);
        if (scheme != "http" && scheme != "https")
            throw BackendError(ErrorKind::BackendUnavailable, "unsupported URL scheme '" + scheme + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (scheme == "https")
            throw BackendError(ErrorKind::BackendUnavailable, "https endpoints need a build with OpenSSL");
#endif
        auto path_start = _cfg.base_url.find('/', scheme_end + 3);
        _origin = _cfg.base_url.substr(0, path_start);
        _path = path_start == std::string::npos ? std::string() : _cfg.base_url.substr(path_start);
        while (!_path.empty() && _path.back() == '/')
            _path.pop_back();
        _path += "/chat/completions";
        if (_origin.size() <= scheme_end + 3)
            throw BackendError(ErrorKind::BackendUnavailable, "base_url has no host: " + _cfg.base_url);
        if (_cfg.retries < 0)
            throw Error(ErrorKind::InvalidConfig, "retries must be >= 0");
    }

    [[nodiscard]] nlohmann::json request_body(const std::vector<ChatMessage>& messages) const
    {
        return {{"model", _cfg.model}, {"temperature", _cfg.temperature}, {"messages", messages_to_json(messages)}};
    }

    std::string complete(const std::vector<ChatMessage>& messages) override
    {
        auto body = request_body(messages).dump();
        httplib::Headers headers;
        if (const char* key = std::getenv(_cfg.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

        std::string last_problem;
        for (int attempt = 0; attempt <= _cfg.retries; ++attempt)
        {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(_cfg.backoff_ms) << (attempt - 1)));

            httplib::Client client(_origin);
            auto timeout = std::chrono::milliseconds(static_cast<long long>(_cfg.timeout_seconds * 1000));
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);

            auto res = client.Post(_path, headers, body, "application/json");
            if (!res)
            {
                last_problem = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 401 || res->status == 403)
                throw BackendError(ErrorKind::AuthError,
                                   "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
            if (res->status == 429 || res->status >= 500)
            {
                last_problem = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError(ErrorKind::BackendUnavailable,
                                   "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
            return extract_content(res->body);
        }
        throw BackendError(ErrorKind::BackendUnavailable,
                           "giving up after " + std::to_string(_cfg.retries + 1) + " attempts: " + last_problem);
    }

    static std::string extract_content(const std::string& body)
    {
        try
        {
            auto doc = nlohmann::json::parse(body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        catch (const nlohmann::json::exception& e)
        {
            throw BackendError(ErrorKind::BackendUnavailable, std::string("malformed completion response: ") + e.what());
        }
    }

  private:
    HttpBackendConfig _cfg;
    std::string _origin;
    std::string _path;
};

} // namespace tpc::agent
