// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "fixtures.hpp"

namespace testing
{

struct FixtureBench
{
    tpc::RunConfig config;
    std::vector<tpc::QuestionRecord> questions;
    tpc::BenchResult result;
};

/// Runs the scripted bench described by a fixture config.
inline FixtureBench run_fixture_bench(const std::string& conf_rel, int max_iterations, int parallelism)
{
    FixtureBench out;
    out.config = tpc::load_config(fixture_path(conf_rel));
    out.questions = tpc::load_questions(tpc::text::read_file(out.config.questions));

    tpc::SceneStore store(out.config.scene_dir);
    auto assets = tpc::agent::load_prompt_assets(out.config.prompt_dir);
    auto script_dir = std::filesystem::path(out.config.script_dir);
    tpc::BackendFactory factory = [script_dir](const tpc::QuestionRecord& q) -> std::shared_ptr<tpc::agent::LlmBackend> {
        auto path = script_dir / (q.qid + ".json");
        if (!std::filesystem::exists(path))
            throw tpc::BackendError(tpc::ErrorKind::ScriptExhausted, "no script for " + q.qid);
        return std::make_shared<tpc::agent::ScriptedBackend>(tpc::agent::load_script_file(path.string()));
    };

    tpc::BenchOptions opts;
    opts.session = out.config.session;
    opts.session.max_iterations = max_iterations;
    opts.relation = out.config.relation;
    if (!out.config.label_embeddings.empty())
        opts.label_embeddings = std::make_shared<const tpc::LabelEmbeddings>(
            tpc::load_label_embeddings(tpc::text::read_file(out.config.label_embeddings)));
    opts.parallelism = parallelism;
    out.result = tpc::run_bench(out.questions, store, assets, factory, opts);
    return out;
}

} // namespace testing
