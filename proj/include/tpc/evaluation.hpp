// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "scene.hpp"
#include "text.hpp"

namespace tpc::eval
{

inline std::string number_to_words(int n)
{
    static const char* kOnes[] = {"zero",    "one",     "two",       "three",    "four",    "five",    "six",
                                  "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
                                  "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
    static const char* kTens[] = {"", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
    if (n < 20)
        return kOnes[n];
    std::string out = kTens[n / 10];
    if (n % 10)
        out += std::string(" ") + kOnes[n % 10];
    return out;
}

/// Lowercase, drop everything but letters, digits, spaces and non-ASCII
/// bytes, collapse whitespace, spell out standalone integers 0-99.
inline std::string clean_answer(std::string_view raw)
{
    std::string kept;
    kept.reserve(raw.size());
    for (char c: raw)
    {
        auto u = static_cast<unsigned char>(c);
        if (u >= 0x80)
            kept += c;
        else if (std::isalnum(u))
            kept += static_cast<char>(std::tolower(u));
        else if (std::isspace(u))
            kept += ' ';
    }
    auto words = text::split_words(kept);
    for (auto& w: words)
    {
        bool digits = !w.empty() && w.size() <= 2
                      && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (digits)
            w = number_to_words(std::stoi(w));
    }
    return text::join(words, " ");
}

/// Rows of interchangeable answers. Entries are stored cleaned.
class SynonymTable
{
  public:
    void add_row(const std::vector<std::string>& entries)
    {
        std::set<std::string> row;
        for (const auto& e: entries)
            if (auto c = clean_answer(e); !c.empty())
                row.insert(std::move(c));
        if (row.empty())
            return;
        auto id = _rows.size();
        for (const auto& e: row)
            _index[e].push_back(id);
        _rows.push_back(std::move(row));
    }

    /// Both inputs must already be cleaned.
    [[nodiscard]] bool is_synonym(std::string_view a, std::string_view b) const
    {
        auto it = _index.find(std::string(a));
        if (it == _index.end())
            return false;
        for (auto id: it->second)
            if (_rows[id].count(std::string(b)))
                return true;
        return false;
    }

    [[nodiscard]] const std::vector<std::set<std::string>>& rows() const noexcept { return _rows; }

  private:
    std::vector<std::set<std::string>> _rows;
    std::map<std::string, std::vector<std::size_t>> _index;
};

/// Format: one row per line, "answer<TAB>expr, expr, ..."; the answer itself
/// joins the row. Blank lines and lines starting with '#' are skipped.
inline SynonymTable parse_synonym_table(std::string_view content)
{
    SynonymTable table;
    for (auto line: text::split_lines(content))
    {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        std::vector<std::string> entries;
        auto tab = t.find('\t');
        entries.emplace_back(text::trim(t.substr(0, tab)));
        if (tab != std::string_view::npos)
        {
            auto rest = t.substr(tab + 1);
            std::size_t start = 0;
            while (start <= rest.size())
            {
                auto comma = rest.find(',', start);
                auto piece = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
                entries.emplace_back(text::trim(piece));
                if (comma == std::string_view::npos)
                    break;
                start = comma + 1;
            }
        }
        table.add_row(entries);
    }
    return table;
}

inline SynonymTable load_synonym_table(const std::string& path)
{
    return parse_synonym_table(text::read_file(path));
}

namespace detail
{

inline std::string without_spaces(const std::string& s)
{
    std::string out;
    for (char c: s)
        if (c != ' ')
            out += c;
    return out;
}

} // namespace detail

/// Lenient equivalence: equality, containment, containment with spaces
/// removed, a shared word, or a synonym row. Empty answers never match.
inline bool soft_match(std::string_view pred, std::string_view gt, const SynonymTable& table)
{
    auto a = clean_answer(pred);
    auto b = clean_answer(gt);
    if (a.empty() || b.empty())
        return false;
    if (a == b || b.find(a) != std::string::npos || a.find(b) != std::string::npos)
        return true;
    auto a_ns = detail::without_spaces(a);
    auto b_ns = detail::without_spaces(b);
    if (b_ns.find(a_ns) != std::string::npos || a_ns.find(b_ns) != std::string::npos)
        return true;
    auto wa = text::split_words(a);
    auto wb = text::split_words(b);
    std::set<std::string> sa(wa.begin(), wa.end());
    for (const auto& w: wb)
        if (sa.count(w))
            return true;
    return table.is_synonym(a, b);
}

inline bool strict_match(std::string_view pred, std::string_view gt)
{
    auto a = clean_answer(pred);
    return !a.empty() && a == clean_answer(gt);
}

enum class Protocol
{
    Soft,
    Strict,
};

struct Bucket
{
    std::size_t total = 0;
    std::size_t correct = 0;

    [[nodiscard]] double accuracy() const noexcept
    {
        return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }
};

struct EvalReport
{
    std::size_t total = 0;
    std::size_t correct = 0;
    std::map<std::string, Bucket> per_type;
    std::vector<std::string> incorrect_qids;

    [[nodiscard]] double accuracy() const noexcept
    {
        return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }
};

struct Prediction
{
    std::string qid;
    std::string answer;
    std::optional<int> iterations;
    std::optional<bool> program_passed;
};

inline std::vector<Prediction> load_predictions(std::string_view jsonl)
{
    std::vector<Prediction> out;
    std::size_t line_no = 0;
    for (auto line: text::split_lines(jsonl))
    {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        try
        {
            auto j = nlohmann::json::parse(line);
            Prediction p;
            p.qid = j.at("qid").get<std::string>();
            p.answer = j.at("answer").get<std::string>();
            if (j.contains("iterations"))
                p.iterations = j["iterations"].get<int>();
            if (j.contains("program_passed"))
                p.program_passed = j["program_passed"].get<bool>();
            out.push_back(std::move(p));
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorKind::MalformedBundle,
                        "predictions line " + std::to_string(line_no) + ": " + std::string(e.what()));
        }
    }
    return out;
}

inline std::string prediction_to_jsonl(const Prediction& p)
{
    nlohmann::json j = {{"qid", p.qid}, {"answer", p.answer}};
    if (p.iterations)
        j["iterations"] = *p.iterations;
    if (p.program_passed)
        j["program_passed"] = *p.program_passed;
    return j.dump();
}

/// A prediction is correct when it matches any gold answer of its question.
inline EvalReport score(const std::vector<Prediction>& predictions,
                        const std::vector<QuestionRecord>& gold,
                        Protocol protocol,
                        const SynonymTable& table)
{
    std::map<std::string, const QuestionRecord*> by_qid;
    for (const auto& q: gold)
        by_qid[q.qid] = &q;

    std::vector<std::string> unknown;
    for (const auto& p: predictions)
        if (!by_qid.count(p.qid))
            unknown.push_back(p.qid);
    if (!unknown.empty())
        throw Error(ErrorKind::UnknownQid, "predictions reference unknown qids: " + text::join(unknown, ", "));

    EvalReport report;
    for (const auto& p: predictions)
    {
        const auto& q = *by_qid.at(p.qid);
        bool ok = std::any_of(q.answers.begin(), q.answers.end(), [&](const std::string& g) {
            return protocol == Protocol::Soft ? soft_match(p.answer, g, table) : strict_match(p.answer, g);
        });
        ++report.total;
        report.correct += ok ? 1 : 0;
        if (!ok)
            report.incorrect_qids.push_back(p.qid);
        for (const auto& tag: q.question_types)
        {
            auto& b = report.per_type[tag];
            ++b.total;
            b.correct += ok ? 1 : 0;
        }
    }
    std::sort(report.incorrect_qids.begin(), report.incorrect_qids.end());
    return report;
}

inline std::string format_percent(double ratio)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", ratio * 100.0);
    return buf;
}

inline std::string report_to_text(const EvalReport& r, Protocol protocol)
{
    std::string out = std::string("protocol: ") + (protocol == Protocol::Soft ? "soft" : "strict") + "\n";
    out += "accuracy: " + format_percent(r.accuracy()) + "% (" + std::to_string(r.correct) + "/"
           + std::to_string(r.total) + ")\n";
    if (!r.per_type.empty())
    {
        out += "per type:\n";
        for (const auto& [tag, b]: r.per_type)
            out += "  " + tag + ": " + format_percent(b.accuracy()) + "% (" + std::to_string(b.correct) + "/"
                   + std::to_string(b.total) + ")\n";
    }
    return out;
}

inline nlohmann::json report_to_json(const EvalReport& r, Protocol protocol)
{
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [tag, b]: r.per_type)
        per[tag] = {{"total", b.total}, {"correct", b.correct}, {"accuracy", b.accuracy()}};
    return {{"protocol", protocol == Protocol::Soft ? "soft" : "strict"},
            {"total", r.total},
            {"correct", r.correct},
            {"accuracy", r.accuracy()},
            {"per_type", per},
            {"incorrect", r.incorrect_qids}};
}

} // namespace tpc::eval
