// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ast.hpp"

namespace tpc::dsl
{

/// Parse failure with a 1-based position and a one-line reason.
class SyntaxError: public std::runtime_error
{
  public:
    SyntaxError(SourcePos pos, const std::string& reason):
        std::runtime_error("SyntaxError at line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column)
                           + ": " + reason),
        _pos(pos),
        _reason(reason)
    {
    }

    [[nodiscard]] int line() const noexcept { return _pos.line; }
    [[nodiscard]] int column() const noexcept { return _pos.column; }
    [[nodiscard]] const std::string& reason() const noexcept { return _reason; }

  private:
    SourcePos _pos;
    std::string _reason;
};

enum class Tok
{
    Name,
    Number,
    String,
    FString,
    Op,
    Newline,
    Indent,
    Dedent,
    End,
};

struct Token
{
    Tok type;
    std::string text; ///< identifier, operator, decoded string, or raw f-string body
    double number = 0.0;
    SourcePos pos;
    SourcePos body_pos; ///< f-strings: position of the first body character
};

namespace detail
{

inline bool is_ident_start(char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_ident_char(char c) noexcept
{
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

inline bool is_digit(char c) noexcept
{
    return c >= '0' && c <= '9';
}

/// Decodes the common backslash escapes; unknown escapes keep the backslash.
inline std::string decode_escapes(std::string_view raw)
{
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i)
    {
        if (raw[i] != '\\' || i + 1 == raw.size())
        {
            out += raw[i];
            continue;
        }
        char next = raw[++i];
        switch (next)
        {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            default:
                out += '\\';
                out += next;
        }
    }
    return out;
}

} // namespace detail

class Lexer
{
  public:
    explicit Lexer(std::string_view source, SourcePos origin = {}): _src(source), _line(origin.line), _col(origin.column)
    {
    }

    /// Tokenizes a whole program, emitting Indent/Dedent for block structure.
    std::vector<Token> tokenize_program()
    {
        std::vector<Token> out;
        std::vector<int> indents {0};
        bool at_line_start = true;

        while (true)
        {
            if (at_line_start && _depth == 0)
            {
                int width = 0;
                while (_i < _src.size() && (_src[_i] == ' ' || _src[_i] == '\t'))
                {
                    width = _src[_i] == '\t' ? (width / 8 + 1) * 8 : width + 1;
                    advance();
                }
                if (_i >= _src.size())
                    break;
                if (_src[_i] == '#' || _src[_i] == '\n' || _src[_i] == '\r')
                {
                    skip_comment();
                    if (_i < _src.size())
                        consume_newline();
                    continue;
                }
                SourcePos pos = here();
                if (width > indents.back())
                {
                    indents.push_back(width);
                    out.push_back({Tok::Indent, {}, 0.0, pos, {}});
                }
                else
                {
                    while (width < indents.back())
                    {
                        indents.pop_back();
                        out.push_back({Tok::Dedent, {}, 0.0, pos, {}});
                    }
                    if (width != indents.back())
                        throw SyntaxError(pos, "unindent does not match any outer indentation level");
                }
                at_line_start = false;
            }

            skip_inline_space();
            if (_i >= _src.size())
                break;
            char c = _src[_i];
            if (c == '#')
            {
                skip_comment();
                continue;
            }
            if (c == '\n' || c == '\r')
            {
                SourcePos pos = here();
                consume_newline();
                if (_depth == 0)
                {
                    out.push_back({Tok::Newline, {}, 0.0, pos, {}});
                    at_line_start = true;
                }
                continue;
            }
            if (c == '\\' && _i + 1 < _src.size() && (_src[_i + 1] == '\n' || _src[_i + 1] == '\r'))
            {
                advance();
                consume_newline();
                continue;
            }
            out.push_back(next_token());
        }

        SourcePos end = here();
        if (!out.empty() && out.back().type != Tok::Newline && out.back().type != Tok::Dedent)
            out.push_back({Tok::Newline, {}, 0.0, end, {}});
        while (indents.size() > 1)
        {
            indents.pop_back();
            out.push_back({Tok::Dedent, {}, 0.0, end, {}});
        }
        out.push_back({Tok::End, {}, 0.0, end, {}});
        return out;
    }

    /// Tokenizes a single expression (f-string replacement fields); newlines are not allowed.
    std::vector<Token> tokenize_expression()
    {
        std::vector<Token> out;
        while (true)
        {
            skip_inline_space();
            if (_i >= _src.size())
                break;
            if (_src[_i] == '\n' || _src[_i] == '\r' || _src[_i] == '#')
                throw SyntaxError(here(), "unexpected character in f-string expression");
            out.push_back(next_token());
        }
        out.push_back({Tok::End, {}, 0.0, here(), {}});
        return out;
    }

  private:
    [[nodiscard]] SourcePos here() const noexcept { return {_line, _col}; }

    void advance() noexcept
    {
        if (_src[_i] == '\n')
        {
            ++_line;
            _col = 1;
        }
        else
            ++_col;
        ++_i;
    }

    void consume_newline()
    {
        if (_src[_i] == '\r')
        {
            ++_i;
            if (_i < _src.size() && _src[_i] == '\n')
                ++_i;
            ++_line;
            _col = 1;
            return;
        }
        advance();
    }

    void skip_inline_space()
    {
        while (_i < _src.size() && (_src[_i] == ' ' || _src[_i] == '\t' || _src[_i] == '\f'))
            advance();
    }

    void skip_comment()
    {
        while (_i < _src.size() && _src[_i] != '\n' && _src[_i] != '\r')
            advance();
    }

    Token next_token()
    {
        SourcePos pos = here();
        char c = _src[_i];

        if ((c == 'f' || c == 'F') && _i + 1 < _src.size() && (_src[_i + 1] == '"' || _src[_i + 1] == '\''))
        {
            advance();
            SourcePos body;
            auto raw = scan_string_body(pos, body, true);
            return {Tok::FString, std::move(raw), 0.0, pos, body};
        }
        if (detail::is_ident_start(c))
        {
            auto start = _i;
            while (_i < _src.size() && detail::is_ident_char(_src[_i]))
                advance();
            return {Tok::Name, std::string(_src.substr(start, _i - start)), 0.0, pos, {}};
        }
        if (detail::is_digit(c) || (c == '.' && _i + 1 < _src.size() && detail::is_digit(_src[_i + 1])))
            return scan_number(pos);
        if (c == '"' || c == '\'')
        {
            SourcePos body;
            auto raw = scan_string_body(pos, body, false);
            return {Tok::String, detail::decode_escapes(raw), 0.0, pos, body};
        }

        static constexpr std::string_view two_char[] = {"==", "!=", "<=", ">=", "+=", "-=", "*=", "/="};
        for (auto op: two_char)
            if (_src.substr(_i, 2) == op)
            {
                advance();
                advance();
                return {Tok::Op, std::string(op), 0.0, pos, {}};
            }

        static constexpr std::string_view singles = "()[]{},:.=<>+-*/%|&";
        if (singles.find(c) != std::string_view::npos)
        {
            if (c == '(' || c == '[' || c == '{')
                ++_depth;
            else if ((c == ')' || c == ']' || c == '}') && _depth > 0)
                --_depth;
            advance();
            return {Tok::Op, std::string(1, c), 0.0, pos, {}};
        }
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
    }

    Token scan_number(SourcePos pos)
    {
        auto start = _i;
        while (_i < _src.size() && detail::is_digit(_src[_i]))
            advance();
        if (_i < _src.size() && _src[_i] == '.')
        {
            advance();
            while (_i < _src.size() && detail::is_digit(_src[_i]))
                advance();
        }
        if (_i < _src.size() && (_src[_i] == 'e' || _src[_i] == 'E'))
        {
            auto save_i = _i;
            auto save_col = _col;
            advance();
            if (_i < _src.size() && (_src[_i] == '+' || _src[_i] == '-'))
                advance();
            if (_i < _src.size() && detail::is_digit(_src[_i]))
                while (_i < _src.size() && detail::is_digit(_src[_i]))
                    advance();
            else
            {
                _i = save_i;
                _col = save_col;
            }
        }
        if (_i < _src.size() && detail::is_ident_start(_src[_i]))
            throw SyntaxError(here(), "invalid number literal");
        auto text = std::string(_src.substr(start, _i - start));
        return {Tok::Number, text, std::stod(text), pos, {}};
    }

    /// Returns the raw body between matching quotes. Inside replacement fields
    /// of f-strings nested quotes are skipped, so both quote styles may nest.
    std::string scan_string_body(SourcePos start, SourcePos& body_pos, bool interpolated)
    {
        char quote = _src[_i];
        advance();
        body_pos = here();
        auto begin = _i;
        int braces = 0;
        char inner_quote = 0;
        while (true)
        {
            if (_i >= _src.size() || _src[_i] == '\n' || _src[_i] == '\r')
                throw SyntaxError(start, "unterminated string literal");
            char c = _src[_i];
            if (c == '\\' && _i + 1 < _src.size() && _src[_i + 1] != '\n')
            {
                advance();
                advance();
                continue;
            }
            if (inner_quote)
            {
                if (c == inner_quote)
                    inner_quote = 0;
            }
            else if (c == quote && braces == 0)
                break;
            else if (braces > 0 && (c == '"' || c == '\''))
                inner_quote = c;
            else if (c == '{' && interpolated)
            {
                if (braces == 0 && _i + 1 < _src.size() && _src[_i + 1] == '{')
                    advance();
                else
                    ++braces;
            }
            else if (c == '}' && braces > 0)
                --braces;
            advance();
        }
        auto raw = std::string(_src.substr(begin, _i - begin));
        advance();
        return raw;
    }

    std::string_view _src;
    std::size_t _i = 0;
    int _line;
    int _col;
    int _depth = 0;
};

} // namespace tpc::dsl
