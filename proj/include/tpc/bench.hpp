// SPDX-License-Identifier: Apache-2.0
//
// Runs many questions through the agent on a worker pool.
#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "agent.hpp"
#include "classify.hpp"
#include "evaluation.hpp"
#include "scene.hpp"
#include "scene_api.hpp"

namespace tpc
{

/// Resolves scene ids and situation references under one directory:
/// <dir>/<scene_id>.json and <dir>/<situation_ref>.
class SceneStore
{
  public:
    explicit SceneStore(std::filesystem::path dir): _dir(std::move(dir)) {}

    /// Optional two-stage category refinement applied once per scene load.
    void set_refinement(std::map<std::string, std::string> mapping, std::shared_ptr<const KnnReferences> refs, int k)
    {
        _mapping = std::move(mapping);
        _refs = std::move(refs);
        _k = k;
    }

    std::shared_ptr<const Scene> scene(const std::string& scene_id)
    {
        std::lock_guard lock(_mutex);
        if (auto it = _scenes.find(scene_id); it != _scenes.end())
            return it->second;
        auto path = _dir / (scene_id + ".json");
        if (!std::filesystem::is_regular_file(path))
            throw Error(ErrorKind::Io, "scene file not found: " + path.string());
        auto loaded = load_scene_file(path.string());
        if (_refs)
            refine_categories(loaded, _mapping, *_refs, static_cast<std::size_t>(_k));
        auto shared = std::make_shared<const Scene>(std::move(loaded));
        _scenes.emplace(scene_id, shared);
        return shared;
    }

    AgentSituation situation(const std::string& ref) const
    {
        auto path = _dir / ref;
        if (!std::filesystem::is_regular_file(path))
            throw Error(ErrorKind::Io, "situation file not found: " + path.string());
        return load_situation_file(path.string());
    }

  private:
    std::filesystem::path _dir;
    std::map<std::string, std::shared_ptr<const Scene>> _scenes;
    std::map<std::string, std::string> _mapping;
    std::shared_ptr<const KnnReferences> _refs;
    int _k = 5;
    std::mutex _mutex;
};

using BackendFactory = std::function<std::shared_ptr<agent::LlmBackend>(const QuestionRecord&)>;

struct BenchOptions
{
    agent::SessionConfig session;
    RelationConfig relation;
    std::shared_ptr<const LabelEmbeddings> label_embeddings;
    int parallelism = 1;
    std::string transcripts_dir; ///< one JSON file per question when set
};

struct BenchRecord
{
    eval::Prediction prediction;
    std::string failure; ///< backend failure message; the answer is then empty
};

struct BenchResult
{
    std::vector<BenchRecord> records; ///< in question order

    [[nodiscard]] std::size_t passed() const
    {
        std::size_t n = 0;
        for (const auto& r: records)
            n += r.prediction.program_passed.value_or(false) ? 1 : 0;
        return n;
    }

    [[nodiscard]] double pass_rate() const
    {
        return records.empty() ? 0.0 : static_cast<double>(passed()) / static_cast<double>(records.size());
    }

    [[nodiscard]] double mean_iterations() const
    {
        if (records.empty())
            return 0.0;
        double total = 0;
        for (const auto& r: records)
            total += r.prediction.iterations.value_or(0);
        return total / static_cast<double>(records.size());
    }

    [[nodiscard]] std::string predictions_jsonl() const
    {
        std::string out;
        for (const auto& r: records)
            out += eval::prediction_to_jsonl(r.prediction) + "\n";
        return out;
    }
};

/// Scenes and situations are resolved up front, so data errors surface before
/// any backend call. Backend failures are recorded per question; any other
/// error stops the run and is rethrown.
inline BenchResult run_bench(const std::vector<QuestionRecord>& questions,
                             SceneStore& store,
                             const agent::PromptAssets& assets,
                             const BackendFactory& make_backend,
                             const BenchOptions& opts)
{
    if (opts.parallelism < 1)
        throw Error(ErrorKind::InvalidConfig, "parallelism must be >= 1");

    std::vector<std::unique_ptr<ApiContext>> contexts;
    contexts.reserve(questions.size());
    for (const auto& q: questions)
        contexts.push_back(std::make_unique<ApiContext>(store.scene(q.scene_id), store.situation(q.situation_ref),
                                                        opts.relation, opts.label_embeddings));

    BenchResult result;
    result.records.resize(questions.size());
    std::atomic<std::size_t> next {0};
    std::mutex write_mutex;
    std::exception_ptr fatal;

    auto worker = [&] {
        while (true)
        {
            auto i = next.fetch_add(1);
            if (i >= questions.size())
                return;
            {
                std::lock_guard lock(write_mutex);
                if (fatal)
                    return;
            }
            const auto& q = questions[i];
            BenchRecord rec;
            rec.prediction.qid = q.qid;
            try
            {
                auto backend = make_backend(q);
                auto session = agent::run_session(assets, *contexts[i], q.question, *backend, opts.session);
                rec.prediction.answer = session.final_answer;
                rec.prediction.iterations = session.iterations;
                rec.prediction.program_passed = session.program_passed;
                if (!opts.transcripts_dir.empty())
                {
                    std::lock_guard lock(write_mutex);
                    auto path = std::filesystem::path(opts.transcripts_dir) / (q.qid + ".json");
                    text::write_file(path.string(), agent::session_to_json(session).dump(2) + "\n");
                }
            }
            catch (const BackendError& e)
            {
                rec.prediction.answer.clear();
                rec.prediction.iterations = 0;
                rec.prediction.program_passed = false;
                rec.failure = e.what();
            }
            catch (...)
            {
                std::lock_guard lock(write_mutex);
                if (!fatal)
                    fatal = std::current_exception();
                return;
            }
            result.records[i] = std::move(rec);
        }
    };

    auto workers = std::min<std::size_t>(static_cast<std::size_t>(opts.parallelism), std::max<std::size_t>(1, questions.size()));
    if (workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back(worker);
        for (auto& th: pool)
            th.join();
    }
    if (fatal)
        std::rethrow_exception(fatal);
    return result;
}

} // namespace tpc
