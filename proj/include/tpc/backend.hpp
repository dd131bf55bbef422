// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "text.hpp"

namespace tpc::agent
{

enum class Role
{
    System,
    User,
    Assistant,
};

constexpr std::string_view role_name(Role r) noexcept
{
    switch (r)
    {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage
{
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

inline nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages)
{
    auto out = nlohmann::json::array();
    for (const auto& m: messages)
        out.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return out;
}

/// complete() may be called concurrently by independent sessions.
class LlmBackend
{
  public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

inline constexpr std::string_view kObservationPlaceholder = "{{observation}}";

/// Replays canned turns in order. A turn may contain {{observation}}, which is
/// replaced by the last non-empty line of the latest observation in the
/// conversation, so scripted answers can echo what the program printed.
class ScriptedBackend: public LlmBackend
{
  public:
    explicit ScriptedBackend(std::vector<std::string> turns): _turns(std::move(turns))
    {
        if (_turns.empty())
            throw Error(ErrorKind::ScriptExhausted, "scripted backend needs at least one turn");
    }

    std::string complete(const std::vector<ChatMessage>& messages) override
    {
        std::string turn;
        {
            std::lock_guard lock(_mutex);
            if (_next >= _turns.size())
                throw BackendError(ErrorKind::ScriptExhausted,
                                   "scripted backend exhausted after " + std::to_string(_turns.size()) + " turns");
            turn = _turns[_next++];
        }
        if (turn.find(kObservationPlaceholder) != std::string::npos)
            text::replace_all(turn, kObservationPlaceholder, last_observation_line(messages));
        return turn;
    }

    [[nodiscard]] std::size_t calls() const
    {
        std::lock_guard lock(_mutex);
        return _next;
    }

    static std::string last_observation_line(const std::vector<ChatMessage>& messages)
    {
        static constexpr std::string_view kPrefix = "Observation:";
        for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        {
            if (it->role != Role::User || !it->content.starts_with(kPrefix))
                continue;
            auto lines = text::split_lines(std::string_view(it->content).substr(kPrefix.size()));
            for (auto line = lines.rbegin(); line != lines.rend(); ++line)
                if (auto t = text::trim(*line); !t.empty())
                    return std::string(t);
            return {};
        }
        return {};
    }

  private:
    std::vector<std::string> _turns;
    std::size_t _next = 0;
    mutable std::mutex _mutex;
};

/// Reads a script: a JSON array of strings.
inline std::vector<std::string> load_script(std::string_view json_text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(json_text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw Error(ErrorKind::Io, std::string("script is not valid JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw Error(ErrorKind::Io, "script must be a JSON array of strings");
    std::vector<std::string> turns;
    for (const auto& t: doc)
    {
        if (!t.is_string())
            throw Error(ErrorKind::Io, "script turns must be strings");
        turns.push_back(t.get<std::string>());
    }
    return turns;
}

inline std::vector<std::string> load_script_file(const std::string& path)
{
    return load_script(text::read_file(path));
}

} // namespace tpc::agent
