// SPDX-License-Identifier: Apache-2.0
//
// tpc: validate scenes, ask questions, run benchmarks, score predictions,
// ensemble with top-k answers and inspect relations.
//
// Exit codes: 0 success, 1 domain error, 2 I/O error, 3 backend error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpc/tpc.hpp"

namespace fs = std::filesystem;

namespace
{

enum Exit
{
    kOk = 0,
    kDomain = 1,
    kIo = 2,
    kBackend = 3,
};

struct Globals
{
    std::string config_path;
    bool verbose = false;
};

Globals g_globals;

void note(const std::string& line)
{
    if (g_globals.verbose)
        std::cerr << line << "\n";
}

void warn(const std::string& line)
{
    std::cerr << "warning: " << line << "\n";
}

tpc::RunConfig load_run_config()
{
    if (g_globals.config_path.empty())
        return {};
    if (!fs::is_regular_file(g_globals.config_path))
        throw tpc::Error(tpc::ErrorKind::Io, "config file not found: " + g_globals.config_path);
    auto cfg = tpc::load_config(g_globals.config_path);
    cfg.check_paths();
    return cfg;
}

std::shared_ptr<const tpc::LabelEmbeddings> label_embeddings(const tpc::RunConfig& cfg)
{
    if (cfg.label_embeddings.empty())
        return nullptr;
    return std::make_shared<const tpc::LabelEmbeddings>(
        tpc::load_label_embeddings(tpc::text::read_file(cfg.label_embeddings)));
}

tpc::agent::PromptAssets prompt_assets(const tpc::RunConfig& cfg)
{
    if (cfg.prompt_dir.empty())
        throw tpc::Error(tpc::ErrorKind::InvalidConfig, "prompt_dir is not configured (use --config)");
    return tpc::agent::load_prompt_assets(cfg.prompt_dir);
}

tpc::eval::SynonymTable synonyms(const tpc::RunConfig& cfg, const std::string& override_path)
{
    const auto& path = override_path.empty() ? cfg.synonyms : override_path;
    if (path.empty())
        return {};
    return tpc::eval::load_synonym_table(path);
}

std::shared_ptr<tpc::agent::LlmBackend> scripted_from_file(const std::string& path)
{
    return std::make_shared<tpc::agent::ScriptedBackend>(tpc::agent::load_script_file(path));
}

std::shared_ptr<tpc::agent::LlmBackend> http_backend(const tpc::RunConfig& cfg)
{
    return std::make_shared<tpc::agent::HttpBackend>(cfg.http);
}

void write_output(const std::string& path, const std::string& content)
{
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    tpc::text::write_file(path, content);
}

// validate ---------------------------------------------------------------

struct ValidateArgs
{
    std::string scene;
    std::string situation;
};

int cmd_validate(const ValidateArgs& a)
{
    if (!fs::is_regular_file(a.scene))
        throw tpc::Error(tpc::ErrorKind::Io, "scene file not found: " + a.scene);
    auto scene = tpc::load_scene_file(a.scene);
    std::cout << "scene " << scene.scene_id << ": " << scene.objects.size() << " objects\n";
    if (!a.situation.empty())
    {
        if (!fs::is_regular_file(a.situation))
            throw tpc::Error(tpc::ErrorKind::Io, "situation file not found: " + a.situation);
        tpc::load_situation_file(a.situation);
        std::cout << "situation ok\n";
    }
    std::cout << tpc::summarize_scene(scene) << "\n";
    return kOk;
}

// ask --------------------------------------------------------------------

struct AskArgs
{
    std::string scene;
    std::string situation;
    std::string question;
    std::string script;
    std::string base_url;
    std::string output;
    std::optional<int> max_iterations;
};

int cmd_ask(const AskArgs& a)
{
    auto cfg = load_run_config();
    if (a.max_iterations)
        cfg.session.max_iterations = *a.max_iterations;
    if (!a.base_url.empty())
    {
        cfg.backend = "http";
        cfg.http.base_url = a.base_url;
    }
    cfg.validate();

    for (const auto* p: {&a.scene, &a.situation})
        if (!fs::is_regular_file(*p))
            throw tpc::Error(tpc::ErrorKind::Io, "file not found: " + *p);
    auto scene = std::make_shared<const tpc::Scene>(tpc::load_scene_file(a.scene));
    tpc::ApiContext ctx(scene, tpc::load_situation_file(a.situation), cfg.relation, label_embeddings(cfg));
    auto assets = prompt_assets(cfg);

    std::shared_ptr<tpc::agent::LlmBackend> backend;
    if (!a.script.empty())
        backend = scripted_from_file(a.script);
    else if (cfg.backend == "http")
        backend = http_backend(cfg);
    else
        throw tpc::Error(tpc::ErrorKind::InvalidConfig, "the scripted backend needs --script");

    auto result = tpc::agent::run_session(assets, ctx, a.question, *backend, cfg.session);
    for (const auto& m: result.transcript)
        note("[" + std::string(tpc::agent::role_name(m.role)) + "]\n" + m.content + "\n");
    if (!a.output.empty())
        write_output(a.output, tpc::agent::session_to_json(result).dump(2) + "\n");
    std::cout << result.final_answer << "\n";
    return kOk;
}

// bench ------------------------------------------------------------------

struct BenchArgs
{
    std::string output;
    std::optional<int> parallelism;
    std::optional<int> max_iterations;
};

int cmd_bench(const BenchArgs& a)
{
    auto cfg = load_run_config();
    if (a.parallelism)
        cfg.parallelism = *a.parallelism;
    if (a.max_iterations)
        cfg.session.max_iterations = *a.max_iterations;
    if (!a.output.empty())
        cfg.predictions_out = a.output;
    cfg.validate();
    if (cfg.questions.empty() || cfg.scene_dir.empty())
        throw tpc::Error(tpc::ErrorKind::InvalidConfig, "bench needs questions and scene_dir in the config");

    auto questions = tpc::load_questions(tpc::text::read_file(cfg.questions));
    auto assets = prompt_assets(cfg);
    tpc::SceneStore store(cfg.scene_dir);
    if (!cfg.knn_references.empty())
        store.set_refinement(
            cfg.category_mapping.empty() ? std::map<std::string, std::string> {}
                                         : tpc::load_category_mapping(tpc::text::read_file(cfg.category_mapping)),
            std::make_shared<const tpc::KnnReferences>(tpc::load_knn_references(tpc::text::read_file(cfg.knn_references))),
            cfg.knn_k);

    tpc::BackendFactory factory;
    if (cfg.backend == "http")
    {
        auto shared = http_backend(cfg);
        factory = [shared](const tpc::QuestionRecord&) { return shared; };
    }
    else
    {
        if (cfg.script_dir.empty())
            throw tpc::Error(tpc::ErrorKind::InvalidConfig, "the scripted backend needs script_dir");
        auto dir = fs::path(cfg.script_dir);
        factory = [dir](const tpc::QuestionRecord& q) -> std::shared_ptr<tpc::agent::LlmBackend> {
            auto path = dir / (q.qid + ".json");
            if (!fs::is_regular_file(path))
                throw tpc::BackendError(tpc::ErrorKind::ScriptExhausted, "no script for question " + q.qid);
            return scripted_from_file(path.string());
        };
    }

    tpc::BenchOptions opts;
    opts.session = cfg.session;
    opts.relation = cfg.relation;
    opts.label_embeddings = label_embeddings(cfg);
    opts.parallelism = cfg.parallelism;
    opts.transcripts_dir = cfg.transcripts_dir;
    if (!opts.transcripts_dir.empty())
        fs::create_directories(opts.transcripts_dir);

    auto result = tpc::run_bench(questions, store, assets, factory, opts);
    for (const auto& r: result.records)
        if (!r.failure.empty())
            warn("question " + r.prediction.qid + ": " + r.failure);
    write_output(cfg.predictions_out, result.predictions_jsonl());

    char line[128];
    std::cout << "questions: " << result.records.size() << "\n";
    std::snprintf(line, sizeof line, "pass rate: %s%% (%zu/%zu)", tpc::eval::format_percent(result.pass_rate()).c_str(),
                  result.passed(), result.records.size());
    std::cout << line << "\n";
    std::snprintf(line, sizeof line, "mean iterations: %.2f", result.mean_iterations());
    std::cout << line << "\n";
    std::cout << "predictions: " << cfg.predictions_out << "\n";
    return kOk;
}

// eval -------------------------------------------------------------------

struct EvalArgs
{
    std::string predictions;
    std::string gold;
    std::string protocol = "soft";
    std::string synonyms;
    std::string report;
    bool breakdown = false;
};

int cmd_eval(const EvalArgs& a)
{
    auto cfg = load_run_config();
    for (const auto* p: {&a.predictions, &a.gold})
        if (!fs::is_regular_file(*p))
            throw tpc::Error(tpc::ErrorKind::Io, "file not found: " + *p);
    auto protocol = a.protocol == "strict" ? tpc::eval::Protocol::Strict : tpc::eval::Protocol::Soft;
    auto preds = tpc::eval::load_predictions(tpc::text::read_file(a.predictions));
    auto gold = tpc::load_questions(tpc::text::read_file(a.gold));
    auto report = tpc::eval::score(preds, gold, protocol, synonyms(cfg, a.synonyms));

    auto summary = report;
    if (!a.breakdown)
        summary.per_type.clear();
    std::cout << tpc::eval::report_to_text(summary, protocol);
    if (!a.report.empty())
        write_output(a.report, tpc::eval::report_to_json(report, protocol).dump(2) + "\n");
    return kOk;
}

// ensemble ---------------------------------------------------------------

struct EnsembleArgs
{
    std::string predictions;
    std::string topk;
    std::string questions;
    std::string script;
    std::string output = "ensemble_predictions.jsonl";
    std::string template_path;
};

int cmd_ensemble(const EnsembleArgs& a)
{
    auto cfg = load_run_config();
    for (const auto* p: {&a.predictions, &a.topk, &a.questions})
        if (!fs::is_regular_file(*p))
            throw tpc::Error(tpc::ErrorKind::Io, "file not found: " + *p);

    std::string tmpl_path = a.template_path;
    if (tmpl_path.empty())
    {
        if (cfg.prompt_dir.empty())
            throw tpc::Error(tpc::ErrorKind::InvalidConfig, "pass --template or a config with prompt_dir");
        tmpl_path = (fs::path(cfg.prompt_dir) / "ensemble.txt").string();
    }
    if (!fs::is_regular_file(tmpl_path))
        throw tpc::Error(tpc::ErrorKind::MissingAsset, "missing prompt asset: " + tmpl_path);
    auto tmpl = tpc::text::read_file(tmpl_path);
    if (!tmpl.empty() && tmpl.back() == '\n')
        tmpl.pop_back();

    auto preds = tpc::eval::load_predictions(tpc::text::read_file(a.predictions));
    auto topk = tpc::eval::load_topk(tpc::text::read_file(a.topk));
    std::map<std::string, std::string> question_text;
    for (const auto& q: tpc::load_questions(tpc::text::read_file(a.questions)))
        question_text[q.qid] = q.question;
    std::map<std::string, const tpc::eval::TopKPrediction*> topk_by_qid;
    for (const auto& t: topk)
        topk_by_qid[t.qid] = &t;

    std::shared_ptr<tpc::agent::LlmBackend> backend;
    if (!a.script.empty())
        backend = scripted_from_file(a.script);
    else if (cfg.backend == "http")
        backend = http_backend(cfg);
    else
        throw tpc::Error(tpc::ErrorKind::InvalidConfig, "the scripted backend needs --script");

    std::string out;
    for (auto p: preds)
    {
        auto t = topk_by_qid.find(p.qid);
        auto q = question_text.find(p.qid);
        if (q == question_text.end())
            throw tpc::Error(tpc::ErrorKind::UnknownQid, "question " + p.qid + " is not in " + a.questions);
        if (t == topk_by_qid.end())
            warn("no top-k answers for " + p.qid + "; keeping the agent answer");
        else
        {
            try
            {
                auto prompt = tpc::eval::build_ensemble_prompt(q->second, p.answer, *t->second, tmpl);
                note(prompt);
                auto reply = backend->complete({{tpc::agent::Role::User, prompt}});
                p.answer = tpc::eval::parse_ensemble_response(reply);
            }
            catch (const tpc::BackendError&)
            {
                throw;
            }
            catch (const tpc::Error& e)
            {
                if (e.kind() != tpc::ErrorKind::EmptyTopK && e.kind() != tpc::ErrorKind::EmptyResponse)
                    throw;
                warn(p.qid + ": " + e.what() + "; keeping the agent answer");
            }
        }
        out += tpc::eval::prediction_to_jsonl(p) + "\n";
        std::cout << p.qid << "\t" << p.answer << "\n";
    }
    write_output(a.output, out);
    return kOk;
}

// relations --------------------------------------------------------------

struct RelationsArgs
{
    std::string scene;
    std::string situation;
    std::string object;
    std::string reference;
};

std::size_t index_of(const tpc::Scene& scene, const std::string& id)
{
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        if (scene.objects[i].id == id)
            return i;
    throw tpc::Error(tpc::ErrorKind::UnknownObjectId, "no object with id '" + id + "' in scene " + scene.scene_id);
}

int cmd_relations(const RelationsArgs& a)
{
    auto cfg = load_run_config();
    for (const auto* p: {&a.scene, &a.situation})
        if (!fs::is_regular_file(*p))
            throw tpc::Error(tpc::ErrorKind::Io, "file not found: " + *p);
    auto scene = std::make_shared<const tpc::Scene>(tpc::load_scene_file(a.scene));
    tpc::ApiContext ctx(scene, tpc::load_situation_file(a.situation), cfg.relation);
    auto obj = index_of(*scene, a.object);
    const auto& target = ctx.object(obj);

    std::vector<std::string> labels;
    double distance = 0;
    std::cout << "object: " << target.id << " (" << target.category << ")\n";
    if (a.reference.empty())
    {
        std::cout << "reference: agent\n";
        distance = ctx.agent_distance(obj);
        labels = tpc::api_query_relation_agent(ctx, obj);
        for (auto l: tpc::proximity_labels(distance, cfg.relation))
            labels.push_back(l.to_string());
    }
    else
    {
        auto ref = index_of(*scene, a.reference);
        if (ref == obj)
            throw tpc::Error(tpc::ErrorKind::UnknownObjectId, "object and reference must differ");
        const auto& anchor = ctx.object(ref);
        std::cout << "reference: " << anchor.id << " (" << anchor.category << ")\n";
        distance = tpc::pairwise_distance(target, anchor);
        labels = tpc::api_query_relation(ctx, obj, ref);
        if (auto v = tpc::vertical_relation(target, anchor, cfg.relation))
            labels.push_back(v->to_string());
        for (auto l: tpc::proximity_labels(target, anchor, cfg.relation))
            labels.push_back(l.to_string());
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", distance);
    std::cout << "distance: " << buf << "\n";
    std::cout << "relations: " << tpc::text::join(labels, ", ") << "\n";
    return kOk;
}

// classify ---------------------------------------------------------------

struct ClassifyArgs
{
    std::string scene;
    std::string output;
};

int cmd_classify(const ClassifyArgs& a)
{
    auto cfg = load_run_config();
    if (cfg.knn_references.empty())
        throw tpc::Error(tpc::ErrorKind::InvalidConfig, "classify needs knn_references in the config");
    if (!fs::is_regular_file(a.scene))
        throw tpc::Error(tpc::ErrorKind::Io, "scene file not found: " + a.scene);
    auto scene = tpc::load_scene_file(a.scene);
    auto refs = tpc::load_knn_references(tpc::text::read_file(cfg.knn_references));
    std::map<std::string, std::string> mapping;
    if (!cfg.category_mapping.empty())
        mapping = tpc::load_category_mapping(tpc::text::read_file(cfg.category_mapping));
    auto changed = tpc::refine_categories(scene, mapping, refs, static_cast<std::size_t>(cfg.knn_k));
    write_output(a.output, tpc::serialize_scene(scene));
    std::cout << "recategorized " << changed << " of " << scene.objects.size() << " objects\n";
    return kOk;
}

int exit_code_for(const tpc::Error& e)
{
    switch (e.kind())
    {
        case tpc::ErrorKind::Io: return kIo;
        case tpc::ErrorKind::BackendUnavailable:
        case tpc::ErrorKind::AuthError:
        case tpc::ErrorKind::ScriptExhausted: return kBackend;
        default: return kDomain;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app {"Situated question answering over 3D scenes with program-writing LLM agents"};
    app.require_subcommand(1);
    app.add_option("--config", g_globals.config_path, "run configuration file");
    app.add_flag("-v,--verbose", g_globals.verbose, "print prompts and transcripts to stderr");

    ValidateArgs validate;
    auto* v = app.add_subcommand("validate", "load a scene bundle and report problems");
    v->add_option("scene", validate.scene, "scene bundle")->required();
    v->add_option("--situation", validate.situation, "situation file to check as well");

    AskArgs ask;
    auto* k = app.add_subcommand("ask", "answer one question");
    k->add_option("--scene", ask.scene, "scene bundle")->required();
    k->add_option("--situation", ask.situation, "situation file")->required();
    k->add_option("--question", ask.question, "question text")->required();
    k->add_option("--script", ask.script, "scripted backend turns (JSON array of strings)");
    k->add_option("--base-url", ask.base_url, "use the HTTP backend at this URL");
    k->add_option("--max-iterations", ask.max_iterations, "program attempts before summarization");
    k->add_option("-o,--output", ask.output, "write the session transcript as JSON");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "run every question of the configured suite");
    b->add_option("-o,--output", bench.output, "predictions file (overrides predictions_out)");
    b->add_option("--parallelism", bench.parallelism, "worker threads");
    b->add_option("--max-iterations", bench.max_iterations, "program attempts before summarization");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "score predictions against gold answers");
    e->add_option("--predictions", ev.predictions, "predictions JSONL")->required();
    e->add_option("--gold", ev.gold, "questions JSONL with gold answers")->required();
    e->add_option("--protocol", ev.protocol, "soft or strict")->check(CLI::IsMember({"soft", "strict"}));
    e->add_option("--synonyms", ev.synonyms, "synonym table (overrides the config)");
    e->add_flag("--breakdown", ev.breakdown, "print per question-type accuracy");
    e->add_option("--report", ev.report, "write the full report as JSON");

    EnsembleArgs ens;
    auto* n = app.add_subcommand("ensemble", "merge agent answers with top-k answers of another model");
    n->add_option("--predictions", ens.predictions, "agent predictions JSONL")->required();
    n->add_option("--topk", ens.topk, "top-k answers JSONL")->required();
    n->add_option("--questions", ens.questions, "questions JSONL")->required();
    n->add_option("--script", ens.script, "scripted backend turns");
    n->add_option("--template", ens.template_path, "prompt template (default: <prompt_dir>/ensemble.txt)");
    n->add_option("-o,--output", ens.output, "merged predictions JSONL");

    RelationsArgs rel;
    auto* r = app.add_subcommand("relations", "print the relations of one object");
    r->add_option("--scene", rel.scene, "scene bundle")->required();
    r->add_option("--situation", rel.situation, "situation file")->required();
    r->add_option("--object", rel.object, "object id")->required();
    r->add_option("--reference", rel.reference, "reference object id (default: the agent)");

    ClassifyArgs cls;
    auto* c = app.add_subcommand("classify", "refine object categories with the KNN references");
    c->add_option("scene", cls.scene, "scene bundle")->required();
    c->add_option("-o,--output", cls.output, "refined scene bundle")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& err)
    {
        int code = app.exit(err);
        return code == 0 ? kOk : kDomain;
    }

    try
    {
        if (*v)
            return cmd_validate(validate);
        if (*k)
            return cmd_ask(ask);
        if (*b)
            return cmd_bench(bench);
        if (*e)
            return cmd_eval(ev);
        if (*n)
            return cmd_ensemble(ens);
        if (*r)
            return cmd_relations(rel);
        if (*c)
            return cmd_classify(cls);
    }
    catch (const tpc::Error& err)
    {
        std::cerr << "error: " << tpc::kind_name(err.kind()) << ": " << err.what() << "\n";
        return exit_code_for(err);
    }
    catch (const std::exception& err)
    {
        std::cerr << "error: " << err.what() << "\n";
        return kDomain;
    }
    return kDomain;
}
