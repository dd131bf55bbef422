// SPDX-License-Identifier: Apache-2.0
//
// The Think / Program / reCtify loop over an abstract chat backend.
#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "backend.hpp"
#include "dsl/interpreter.hpp"
#include "error.hpp"
#include "scene.hpp"
#include "scene_api.hpp"
#include "text.hpp"

namespace tpc::agent
{

inline constexpr std::string_view kErrorPlaceholder = "ERROR INFORMATION";

struct PromptAssets
{
    std::string task_definition;
    std::string format_spec;
    std::string api_doc;
    std::vector<std::pair<std::string, std::string>> examples; ///< (user, assistant) turns
    std::string rectify_error;
    std::string rectify_parse;
    std::string summarize;
};

namespace detail
{

/// Asset files end with one newline that is not part of the prompt text.
inline std::string read_asset(const std::filesystem::path& path)
{
    if (!std::filesystem::is_regular_file(path))
        throw Error(ErrorKind::MissingAsset, "missing prompt asset: " + path.string());
    auto content = text::read_file(path.string());
    if (!content.empty() && content.back() == '\n')
        content.pop_back();
    if (!content.empty() && content.back() == '\r')
        content.pop_back();
    return content;
}

} // namespace detail

/// Loads a prompt-asset directory. Examples are examples/NN_user.txt and
/// examples/NN_assistant.txt, ordered by NN; the directory may be empty.
inline PromptAssets load_prompt_assets(const std::filesystem::path& dir)
{
    PromptAssets a;
    a.task_definition = detail::read_asset(dir / "task_definition.txt");
    a.format_spec = detail::read_asset(dir / "format_spec.txt");
    a.api_doc = detail::read_asset(dir / "api_doc.txt");
    a.rectify_error = detail::read_asset(dir / "rectify_error.txt");
    a.rectify_parse = detail::read_asset(dir / "rectify_parse.txt");
    a.summarize = detail::read_asset(dir / "summarize.txt");
    if (a.rectify_error.find(kErrorPlaceholder) == std::string::npos)
        throw Error(ErrorKind::MissingAsset, "rectify_error.txt lacks the placeholder '" + std::string(kErrorPlaceholder) + "'");

    auto ex_dir = dir / "examples";
    if (!std::filesystem::is_directory(ex_dir))
        throw Error(ErrorKind::MissingAsset, "missing prompt asset directory: " + ex_dir.string());
    std::map<std::string, std::pair<std::optional<std::string>, std::optional<std::string>>> turns;
    for (const auto& entry: std::filesystem::directory_iterator(ex_dir))
    {
        auto name = entry.path().filename().string();
        auto split = name.find('_');
        if (split == std::string::npos || entry.path().extension() != ".txt")
            continue;
        auto key = name.substr(0, split);
        auto kind = entry.path().stem().string().substr(split + 1);
        if (kind == "user")
            turns[key].first = detail::read_asset(entry.path());
        else if (kind == "assistant")
            turns[key].second = detail::read_asset(entry.path());
    }
    for (auto& [key, pair]: turns)
    {
        if (!pair.first || !pair.second)
            throw Error(ErrorKind::MissingAsset, "example " + key + " needs both a user and an assistant file");
        a.examples.emplace_back(std::move(*pair.first), std::move(*pair.second));
    }
    return a;
}

/// System prompt (task definition, format specification, API documentation)
/// followed by the in-context examples as alternating user/assistant turns.
inline std::vector<ChatMessage> assemble_system_prompt(const PromptAssets& assets)
{
    std::vector<ChatMessage> out;
    out.push_back({Role::System, assets.task_definition + "\n\n" + assets.format_spec + "\n\n" + assets.api_doc});
    for (const auto& [user, assistant]: assets.examples)
    {
        out.push_back({Role::User, user});
        out.push_back({Role::Assistant, assistant});
    }
    return out;
}

inline std::string assemble_user_message(const Scene& scene, const AgentSituation& situation, std::string_view question)
{
    return summarize_scene(scene) + "\nMy situation: " + situation.description + "\nQuestion: " + std::string(question);
}

struct ProgramAction
{
    std::string source;
};

struct FinalAnswerAction
{
    std::string text;
};

using AgentAction = std::variant<ProgramAction, FinalAnswerAction>;

class ParseFailure: public std::runtime_error
{
  public:
    explicit ParseFailure(const std::string& reason): std::runtime_error(reason) {}
};

namespace detail
{

inline std::optional<std::size_t> last_line_with(const std::vector<std::string_view>& lines,
                                                 std::string_view prefix,
                                                 std::size_t from = 0)
{
    std::optional<std::size_t> found;
    for (std::size_t i = from; i < lines.size(); ++i)
        if (text::starts_with_icase(text::trim(lines[i]), prefix))
            found = i;
    return found;
}

inline std::optional<std::size_t> action_line(const std::vector<std::string_view>& lines)
{
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        auto t = text::trim(lines[i]);
        if (text::starts_with_icase(t, "action:"))
            found = i;
    }
    return found;
}

inline std::string after_colon(std::string_view line)
{
    auto t = text::trim(line);
    auto colon = t.find(':');
    return std::string(text::trim(t.substr(colon + 1)));
}

} // namespace detail

/// Reads the last "Action:" line and its "Action Input:". Throws ParseFailure.
inline AgentAction parse_agent_response(std::string_view response)
{
    auto lines = text::split_lines(response);
    auto action_at = detail::action_line(lines);
    if (!action_at)
        throw ParseFailure("missing 'Action:' line");
    auto action = text::normalize(detail::after_colon(lines[*action_at]));
    bool is_program = action == "program";
    if (!is_program && action != "final answer")
        throw ParseFailure("unknown action '" + detail::after_colon(lines[*action_at])
                           + "'; the action should be one of [Final Answer, Program]");

    auto input_at = detail::last_line_with(lines, "action input:", *action_at + 1);
    if (!input_at)
        throw ParseFailure("missing 'Action Input:' line after 'Action:'");
    auto inline_value = detail::after_colon(lines[*input_at]);

    if (!is_program)
    {
        std::string answer = inline_value;
        for (std::size_t i = *input_at + 1; answer.empty() && i < lines.size(); ++i)
            answer = std::string(text::trim(lines[i]));
        if (answer.empty())
            throw ParseFailure("empty final answer");
        return FinalAnswerAction {answer};
    }

    // The fence may open on the Action Input line itself or below it.
    std::vector<std::string_view> tail;
    if (!inline_value.empty())
    {
        auto t = text::trim(lines[*input_at]);
        tail.push_back(t.substr(t.find(':') + 1));
    }
    tail.insert(tail.end(), lines.begin() + static_cast<std::ptrdiff_t>(*input_at + 1), lines.end());

    std::size_t open = 0;
    while (open < tail.size() && !text::trim(tail[open]).starts_with("```"))
        ++open;
    if (open == tail.size())
        throw ParseFailure("missing code fence: put the program between ```Python and ``` lines");
    auto info = text::trim(text::trim(tail[open]).substr(3));
    if (!info.empty() && !text::iequals(info, "python"))
        throw ParseFailure("code fence must be marked Python, found '" + std::string(info) + "'");

    std::string source;
    for (std::size_t i = open + 1; i < tail.size(); ++i)
    {
        if (text::trim(tail[i]) == "```")
            return ProgramAction {source};
        source += tail[i];
        source += '\n';
    }
    throw ParseFailure("unterminated code fence: close the program with a ``` line");
}

/// Best-effort answer after summarization: the Action Input value if
/// present, otherwise the last non-empty line.
inline std::string extract_answer(std::string_view response)
{
    auto lines = text::split_lines(response);
    if (auto at = detail::last_line_with(lines, "action input:"))
    {
        auto value = detail::after_colon(lines[*at]);
        for (std::size_t i = *at + 1; value.empty() && i < lines.size(); ++i)
            value = std::string(text::trim(lines[i]));
        if (!value.empty())
            return value;
    }
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
        if (auto t = text::trim(*it); !t.empty())
            return std::string(t);
    return {};
}

struct SessionConfig
{
    int max_iterations = 3;
    dsl::Limits limits;
};

struct SessionResult
{
    std::string final_answer;
    int iterations = 0;
    bool program_passed = false;
    bool summarized = false;
    std::vector<ChatMessage> transcript;
    int llm_calls = 0;
    std::vector<dsl::ExecutionOutcome> executions;
};

inline std::string rstrip(std::string_view s)
{
    while (!s.empty() && text::is_space(s.back()))
        s.remove_suffix(1);
    return std::string(s);
}

inline std::string observation_message(const std::string& output)
{
    return "Observation: " + rstrip(output);
}

/// One question through the loop. Only backend errors escape; program and
/// format problems become dialogue.
inline SessionResult run_session(const PromptAssets& assets,
                                 const ApiContext& ctx,
                                 std::string_view question,
                                 LlmBackend& backend,
                                 const SessionConfig& cfg = {})
{
    if (cfg.max_iterations < 1)
        throw Error(ErrorKind::InvalidConfig, "max_iterations must be >= 1");

    SessionResult result;
    auto& msgs = result.transcript;
    msgs = assemble_system_prompt(assets);
    msgs.push_back({Role::User, assemble_user_message(ctx.scene(), ctx.situation(), question)});

    auto call = [&] {
        ++result.llm_calls;
        auto reply = backend.complete(msgs);
        msgs.push_back({Role::Assistant, reply});
        return reply;
    };
    auto summarize = [&] {
        result.summarized = true;
        msgs.push_back({Role::User, assets.summarize});
        result.final_answer = extract_answer(call());
        return result;
    };

    int attempts = 0;
    while (true)
    {
        auto reply = call();
        AgentAction action;
        try
        {
            action = parse_agent_response(reply);
        }
        catch (const ParseFailure&)
        {
            if (++attempts >= cfg.max_iterations)
                return summarize();
            msgs.push_back({Role::User, assets.rectify_parse});
            continue;
        }

        if (auto* fin = std::get_if<FinalAnswerAction>(&action))
        {
            result.final_answer = fin->text;
            return result;
        }

        ++attempts;
        ++result.iterations;
        auto outcome = dsl::execute_source(std::get<ProgramAction>(action).source, ctx, cfg.limits);
        result.executions.push_back(outcome);
        if (outcome.ok())
        {
            result.program_passed = true;
            msgs.push_back({Role::User, observation_message(outcome.output)});
            if (attempts < cfg.max_iterations)
                continue;
            // Budget spent: one more turn to read the observation.
            auto last = call();
            try
            {
                auto next = parse_agent_response(last);
                if (auto* f = std::get_if<FinalAnswerAction>(&next))
                {
                    result.final_answer = f->text;
                    return result;
                }
            }
            catch (const ParseFailure&)
            {
            }
            return summarize();
        }

        if (attempts >= cfg.max_iterations)
            return summarize();
        auto rectify = assets.rectify_error;
        auto detail = outcome.error->describe();
        if (!outcome.output.empty())
            detail += "\nOutput before the error:\n" + rstrip(outcome.output);
        text::replace_all(rectify, kErrorPlaceholder, detail);
        msgs.push_back({Role::User, rectify});
    }
}

inline nlohmann::json session_to_json(const SessionResult& r)
{
    auto execs = nlohmann::json::array();
    for (const auto& e: r.executions)
    {
        nlohmann::json j = {{"stdout", e.output}, {"steps", e.steps}, {"api_calls", e.api_calls}};
        if (e.error)
            j["error"] = {{"kind", e.error->kind}, {"message", e.error->message}, {"line", e.error->line}};
        execs.push_back(std::move(j));
    }
    return {{"final_answer", r.final_answer},
            {"iterations", r.iterations},
            {"program_passed", r.program_passed},
            {"summarized", r.summarized},
            {"llm_calls", r.llm_calls},
            {"executions", execs},
            {"transcript", messages_to_json(r.transcript)}};
}

} // namespace tpc::agent
