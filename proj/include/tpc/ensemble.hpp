// SPDX-License-Identifier: Apache-2.0
//
// Merging the agent's open-ended answer with an end-to-end model's top-k
// answers through one more LLM call.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "text.hpp"

namespace tpc::eval
{

struct TopKEntry
{
    std::string answer;
    double probability = 0.0;
    std::string probability_text; ///< as written in the input, echoed into prompts
};

struct TopKPrediction
{
    std::string qid;
    std::vector<TopKEntry> entries;
};

inline constexpr std::size_t kMaxTopK = 5;

namespace detail
{

/// Builds a DOM like nlohmann::json::parse, except floating-point numbers are
/// kept as their source text (strings) so they can be echoed unchanged.
class RawNumberSax: public nlohmann::json_sax<nlohmann::json>
{
  public:
    nlohmann::json root;

    bool null() override { return put(nullptr); }
    bool boolean(bool v) override { return put(v); }
    bool number_integer(number_integer_t v) override { return put(v); }
    bool number_unsigned(number_unsigned_t v) override { return put(v); }
    bool number_float(number_float_t, const string_t& s) override { return put(s); }
    bool string(string_t& v) override { return put(v); }
    bool binary(binary_t&) override { return false; }
    bool start_object(std::size_t) override { return open(nlohmann::json::object()); }
    bool key(string_t& k) override
    {
        _key = k;
        return true;
    }
    bool end_object() override { return close(); }
    bool start_array(std::size_t) override { return open(nlohmann::json::array()); }
    bool end_array() override { return close(); }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& e) override
    {
        _error = e.what();
        return false;
    }

    [[nodiscard]] const std::string& error() const noexcept { return _error; }

  private:
    nlohmann::json* place(nlohmann::json value)
    {
        if (_stack.empty())
        {
            root = std::move(value);
            return &root;
        }
        auto& top = *_stack.back();
        if (top.is_array())
        {
            top.push_back(std::move(value));
            return &top.back();
        }
        top[_key] = std::move(value);
        return &top[_key];
    }

    bool put(nlohmann::json value)
    {
        place(std::move(value));
        return true;
    }

    bool open(nlohmann::json container)
    {
        _stack.push_back(place(std::move(container)));
        return true;
    }

    bool close()
    {
        _stack.pop_back();
        return true;
    }

    std::vector<nlohmann::json*> _stack;
    std::string _key;
    std::string _error;
};

inline nlohmann::json parse_keeping_raw_floats(std::string_view text)
{
    RawNumberSax sax;
    if (!nlohmann::json::sax_parse(text, &sax))
        throw Error(ErrorKind::MalformedBundle, "invalid JSON: " + sax.error());
    return std::move(sax.root);
}

} // namespace detail

/// One record per line: {"qid": ..., "entries": [[answer, probability], ...]}.
inline std::vector<TopKPrediction> load_topk(std::string_view jsonl)
{
    std::vector<TopKPrediction> out;
    std::size_t line_no = 0;
    for (auto line: text::split_lines(jsonl))
    {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        auto where = "top-k line " + std::to_string(line_no) + ": ";
        auto j = detail::parse_keeping_raw_floats(line);
        if (!j.is_object() || !j.contains("qid") || !j["qid"].is_string() || !j.contains("entries")
            || !j["entries"].is_array())
            throw Error(ErrorKind::MalformedBundle, where + "expected {qid, entries}");
        TopKPrediction rec;
        rec.qid = j["qid"].get<std::string>();
        if (j["entries"].size() > kMaxTopK)
            throw Error(ErrorKind::MalformedBundle, where + "more than 5 entries");
        for (const auto& e: j["entries"])
        {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string())
                throw Error(ErrorKind::MalformedBundle, where + "entries must be [answer, probability] pairs");
            TopKEntry entry;
            entry.answer = e[0].get<std::string>();
            const auto& p = e[1];
            if (p.is_string())
                entry.probability_text = p.get<std::string>();
            else if (p.is_number_integer())
                entry.probability_text = p.dump();
            else
                throw Error(ErrorKind::MalformedBundle, where + "probability must be a number");
            if (!text::parse_double(entry.probability_text, entry.probability) || entry.probability < 0.0
                || entry.probability > 1.0)
                throw Error(ErrorKind::MalformedBundle, where + "probability must lie in [0, 1]");
            if (!rec.entries.empty() && entry.probability > rec.entries.back().probability)
                throw Error(ErrorKind::MalformedBundle, where + "probabilities must be non-increasing");
            rec.entries.push_back(std::move(entry));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

namespace detail
{

/// Single left-to-right pass, so substituted text is never rescanned.
inline std::string substitute(std::string_view line, const std::vector<std::pair<std::string, std::string>>& values)
{
    std::string out;
    std::size_t i = 0;
    while (i < line.size())
    {
        bool hit = false;
        if (line[i] == '{')
            for (const auto& [key, value]: values)
                if (line.substr(i, key.size()) == key)
                {
                    out += value;
                    i += key.size();
                    hit = true;
                    break;
                }
        if (!hit)
            out += line[i++];
    }
    return out;
}

} // namespace detail

/// Fills the template. Candidate lines whose slot exceeds the top-k length
/// are dropped; everything else is kept byte for byte.
inline std::string build_ensemble_prompt(std::string_view question,
                                         std::string_view llm_answer,
                                         const TopKPrediction& topk,
                                         std::string_view tmpl)
{
    if (topk.entries.empty())
        throw Error(ErrorKind::EmptyTopK, "top-k list for '" + topk.qid + "' is empty");

    std::vector<std::pair<std::string, std::string>> values;
    for (std::size_t n = 1; n <= topk.entries.size(); ++n)
    {
        values.emplace_back("{ans" + std::to_string(n) + "}", topk.entries[n - 1].answer);
        values.emplace_back("{prob" + std::to_string(n) + "}", topk.entries[n - 1].probability_text);
    }
    values.emplace_back("{question}", std::string(question));
    values.emplace_back("{ans}", std::string(llm_answer));

    auto lines = text::split_lines(tmpl);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        bool unused_slot = false;
        for (std::size_t n = topk.entries.size() + 1; n <= kMaxTopK; ++n)
            if (lines[i].find("{ans" + std::to_string(n) + "}") != std::string_view::npos
                || lines[i].find("{prob" + std::to_string(n) + "}") != std::string_view::npos)
                unused_slot = true;
        if (unused_slot)
            continue;
        kept.push_back(detail::substitute(lines[i], values));
    }
    return text::join(kept, "\n");
}

inline constexpr std::string_view kEnsembleMarker = "Reasonable answers:";

inline std::string parse_ensemble_response(std::string_view response)
{
    auto at = response.rfind(kEnsembleMarker);
    auto body = at == std::string_view::npos ? response : response.substr(at + kEnsembleMarker.size());
    auto answer = text::trim(body);
    if (answer.empty())
        throw Error(ErrorKind::EmptyResponse, "ensemble response contains no answer");
    return std::string(answer);
}

} // namespace tpc::eval
