// SPDX-License-Identifier: Apache-2.0
//
// Flat "key = value" run configuration; '#' starts a comment.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "agent.hpp"
#include "error.hpp"
#include "http_backend.hpp"
#include "spatial.hpp"
#include "text.hpp"

namespace tpc
{

struct RunConfig
{
    std::string scene_dir;
    std::string questions;
    std::string prompt_dir;
    std::string synonyms;
    std::string label_embeddings;
    std::string knn_references;
    std::string category_mapping;
    int knn_k = 5;

    RelationConfig relation;

    std::string backend = "scripted";
    std::string script_dir;
    agent::HttpBackendConfig http;

    agent::SessionConfig session;
    int parallelism = 1;

    std::string predictions_out = "predictions.jsonl";
    std::string transcripts_dir;

    void validate() const
    {
        relation.validate();
        if (parallelism < 1)
            throw Error(ErrorKind::InvalidConfig, "parallelism must be >= 1");
        if (session.max_iterations < 1)
            throw Error(ErrorKind::InvalidConfig, "max_iterations must be >= 1");
        if (knn_k < 1)
            throw Error(ErrorKind::InvalidConfig, "knn_k must be >= 1");
        if (backend != "scripted" && backend != "http")
            throw Error(ErrorKind::InvalidConfig, "backend must be 'scripted' or 'http', got '" + backend + "'");
        if (session.limits.max_steps == 0 || session.limits.max_api_calls == 0 || session.limits.max_stdout_bytes == 0)
            throw Error(ErrorKind::InvalidConfig, "interpreter limits must be positive");
    }

    /// Every input path that is set must exist.
    void check_paths() const
    {
        for (const auto* p: {&scene_dir, &questions, &prompt_dir, &synonyms, &label_embeddings, &knn_references,
                             &category_mapping, &script_dir})
            if (!p->empty() && !std::filesystem::exists(*p))
                throw Error(ErrorKind::Io, "configured path does not exist: " + *p);
    }
};

namespace detail
{

inline double config_number(std::string_view key, std::string_view value)
{
    double out = 0;
    if (!text::parse_double(value, out))
        throw Error(ErrorKind::InvalidConfig, "config key '" + std::string(key) + "' needs a number, got '"
                                                  + std::string(value) + "'");
    return out;
}

inline long long config_integer(std::string_view key, std::string_view value)
{
    double d = config_number(key, value);
    if (d != static_cast<double>(static_cast<long long>(d)))
        throw Error(ErrorKind::InvalidConfig, "config key '" + std::string(key) + "' needs an integer");
    return static_cast<long long>(d);
}

} // namespace detail

/// Applies one setting; throws InvalidConfig for unknown keys or bad values.
/// Path values are resolved against `base` when relative.
inline void apply_config_value(RunConfig& cfg,
                               std::string_view key,
                               std::string_view value,
                               const std::filesystem::path& base = {})
{
    auto path = [&](std::string& slot) {
        if (value.empty())
        {
            slot.clear();
            return;
        }
        std::filesystem::path p{std::string(value)};
        slot = (p.is_relative() && !base.empty() ? base / p : p).lexically_normal().string();
    };
    auto num = [&] { return detail::config_number(key, value); };
    auto integer = [&] { return detail::config_integer(key, value); };
    auto count = [&] {
        auto v = integer();
        if (v < 0)
            throw Error(ErrorKind::InvalidConfig, "config key '" + std::string(key) + "' must be >= 0");
        return static_cast<std::size_t>(v);
    };

    static const std::map<std::string_view, int> kKeys = {
        {"scene_dir", 0},       {"questions", 1},         {"prompt_dir", 2},       {"synonyms", 3},
        {"label_embeddings", 4}, {"knn_references", 5},   {"category_mapping", 6}, {"knn_k", 7},
        {"epsilon", 8},          {"wr_dist", 9},          {"ar_dist", 10},         {"min_iou", 11},
        {"min_on_ratio", 12},    {"max_on_dist", 13},     {"max_on_ratio", 14},    {"sector_half_width", 15},
        {"backend", 16},         {"script_dir", 17},      {"base_url", 18},        {"model", 19},
        {"temperature", 20},     {"timeout", 21},         {"retries", 22},         {"api_key_env", 23},
        {"backoff_ms", 24},      {"max_iterations", 25},  {"max_steps", 26},       {"max_api_calls", 27},
        {"max_stdout_bytes", 28}, {"parallelism", 29},    {"predictions_out", 30}, {"transcripts_dir", 31},
    };
    auto it = kKeys.find(key);
    if (it == kKeys.end())
        throw Error(ErrorKind::InvalidConfig, "unknown config key '" + std::string(key) + "'");
    switch (it->second)
    {
        case 0: path(cfg.scene_dir); break;
        case 1: path(cfg.questions); break;
        case 2: path(cfg.prompt_dir); break;
        case 3: path(cfg.synonyms); break;
        case 4: path(cfg.label_embeddings); break;
        case 5: path(cfg.knn_references); break;
        case 6: path(cfg.category_mapping); break;
        case 7: cfg.knn_k = static_cast<int>(integer()); break;
        case 8: cfg.relation.epsilon = num(); break;
        case 9: cfg.relation.wr_dist = num(); break;
        case 10: cfg.relation.ar_dist = num(); break;
        case 11: cfg.relation.min_iou = num(); break;
        case 12: cfg.relation.min_on_ratio = num(); break;
        case 13: cfg.relation.max_on_dist = num(); break;
        case 14: cfg.relation.max_on_ratio = num(); break;
        case 15: cfg.relation.sector_half_width = num(); break;
        case 16: cfg.backend = std::string(value); break;
        case 17: path(cfg.script_dir); break;
        case 18: cfg.http.base_url = std::string(value); break;
        case 19: cfg.http.model = std::string(value); break;
        case 20: cfg.http.temperature = num(); break;
        case 21: cfg.http.timeout_seconds = num(); break;
        case 22: cfg.http.retries = static_cast<int>(integer()); break;
        case 23: cfg.http.api_key_env = std::string(value); break;
        case 24: cfg.http.backoff_ms = static_cast<int>(integer()); break;
        case 25: cfg.session.max_iterations = static_cast<int>(integer()); break;
        case 26: cfg.session.limits.max_steps = count(); break;
        case 27: cfg.session.limits.max_api_calls = count(); break;
        case 28: cfg.session.limits.max_stdout_bytes = count(); break;
        case 29: cfg.parallelism = static_cast<int>(integer()); break;
        case 30: path(cfg.predictions_out); break;
        case 31: path(cfg.transcripts_dir); break;
    }
}

inline RunConfig parse_config(std::string_view content, const std::filesystem::path& base = {})
{
    RunConfig cfg;
    int line_no = 0;
    for (auto line: text::split_lines(content))
    {
        ++line_no;
        auto hash = line.find('#');
        auto t = text::trim(line.substr(0, hash));
        if (t.empty())
            continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::InvalidConfig, "config line " + std::to_string(line_no) + ": expected 'key = value'");
        apply_config_value(cfg, text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)), base);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    return parse_config(text::read_file(path), std::filesystem::path(path).parent_path());
}

} // namespace tpc
