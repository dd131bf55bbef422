// SPDX-License-Identifier: Apache-2.0
//
// Recursive-descent parser for TPC-Script. Blocks are indentation-delimited;
// anything outside the grammar (methods, lambdas, while, def, import, ...)
// is a SyntaxError whose message is meant to be read by the program author.
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ast.hpp"
#include "lexer.hpp"

namespace tpc::dsl
{

namespace detail
{

inline const std::set<std::string, std::less<>>& reserved_words()
{
    static const std::set<std::string, std::less<>> kWords {
        "for", "in", "if", "elif", "else", "not", "and", "or", "True", "False", "None",
        "def", "lambda", "import", "from", "while", "return", "class", "try", "except", "finally",
        "with", "as", "break", "continue", "pass", "del", "global", "nonlocal", "yield", "assert", "raise", "is",
    };
    return kWords;
}

inline bool is_unsupported_keyword(std::string_view word)
{
    static constexpr std::string_view kUnsupported[] = {
        "def", "lambda", "import", "from", "while", "return", "class", "try", "except", "finally", "with", "as",
        "break", "continue", "pass", "del", "global", "nonlocal", "yield", "assert", "raise", "is",
    };
    return std::find(std::begin(kUnsupported), std::end(kUnsupported), word) != std::end(kUnsupported);
}

inline bool text_is_blank(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

inline bool valid_format_spec(std::string_view spec)
{
    if (spec.empty())
        return true;
    if (spec.size() < 3 || spec.front() != '.' || spec.back() != 'f')
        return false;
    auto digits = spec.substr(1, spec.size() - 2);
    return digits.size() <= 2 && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace detail

class Parser
{
  public:
    explicit Parser(std::vector<Token> tokens): _toks(std::move(tokens)) {}

    Program parse_program()
    {
        Program program;
        while (!at(Tok::End))
        {
            if (at(Tok::Indent))
                throw SyntaxError(peek().pos, "unexpected indent");
            if (at(Tok::Newline))
            {
                ++_i;
                continue;
            }
            program.body.push_back(parse_statement());
        }
        return program;
    }

    ExprPtr parse_lone_expression()
    {
        auto e = parse_expr();
        if (!at(Tok::End))
            throw SyntaxError(peek().pos, "unexpected '" + describe(peek()) + "' in f-string expression");
        return e;
    }

  private:
    // -- token helpers -------------------------------------------------------

    [[nodiscard]] const Token& peek(std::size_t ahead = 0) const
    {
        return _toks[std::min(_i + ahead, _toks.size() - 1)];
    }
    [[nodiscard]] bool at(Tok type) const { return peek().type == type; }
    [[nodiscard]] bool at_op(std::string_view op, std::size_t ahead = 0) const
    {
        return peek(ahead).type == Tok::Op && peek(ahead).text == op;
    }
    [[nodiscard]] bool at_word(std::string_view word, std::size_t ahead = 0) const
    {
        return peek(ahead).type == Tok::Name && peek(ahead).text == word;
    }

    static std::string describe(const Token& t)
    {
        switch (t.type)
        {
            case Tok::Newline: return "end of line";
            case Tok::Indent: return "indent";
            case Tok::Dedent: return "dedent";
            case Tok::End: return "end of input";
            case Tok::String:
            case Tok::FString: return "string";
            default: return t.text;
        }
    }

    [[noreturn]] void fail_expected(std::string_view what) const
    {
        throw SyntaxError(peek().pos, "expected " + std::string(what) + ", found '" + describe(peek()) + "'");
    }

    void expect_op(std::string_view op)
    {
        if (!at_op(op))
            fail_expected("'" + std::string(op) + "'");
        ++_i;
    }

    void expect_word(std::string_view word)
    {
        if (!at_word(word))
            fail_expected("'" + std::string(word) + "'");
        ++_i;
    }

    std::string expect_identifier()
    {
        const auto& t = peek();
        if (t.type != Tok::Name)
            fail_expected("a name");
        if (detail::reserved_words().count(t.text))
            throw SyntaxError(t.pos, "'" + t.text + "' cannot be used as a name");
        ++_i;
        return t.text;
    }

    void reject_unsupported_keyword() const
    {
        const auto& t = peek();
        if (t.type == Tok::Name && detail::is_unsupported_keyword(t.text))
            throw SyntaxError(t.pos, "'" + t.text + "' is not supported in TPC-Script");
    }

    // -- statements ----------------------------------------------------------

    Stmt parse_statement()
    {
        reject_unsupported_keyword();
        SourcePos pos = peek().pos;
        if (at_word("for"))
            return parse_for();
        if (at_word("if"))
            return parse_if();
        if (at_word("else") || at_word("elif"))
            throw SyntaxError(pos, "'" + peek().text + "' without a matching 'if'");

        Stmt stmt = parse_simple_statement();
        end_of_statement();
        return stmt;
    }

    Stmt parse_simple_statement()
    {
        reject_unsupported_keyword();
        SourcePos pos = peek().pos;
        if (at(Tok::Name) && at_op("=", 1))
        {
            auto target = expect_identifier();
            ++_i;
            auto value = parse_expr();
            return Stmt {Assign {std::move(target), std::move(value)}, pos};
        }
        if (at(Tok::Name) && peek(1).type == Tok::Op
            && (peek(1).text == "+=" || peek(1).text == "-=" || peek(1).text == "*=" || peek(1).text == "/="))
        {
            auto target_pos = peek().pos;
            auto target = expect_identifier();
            auto op_text = peek().text;
            ++_i;
            auto value = parse_expr();
            BinaryOp op = op_text == "+=" ? BinaryOp::Add
                          : op_text == "-=" ? BinaryOp::Sub
                          : op_text == "*=" ? BinaryOp::Mul
                                            : BinaryOp::Div;
            auto lhs = make_expr(NameRef {target}, target_pos);
            auto combined = make_expr(Binary {op, std::move(lhs), std::move(value)}, target_pos);
            return Stmt {Assign {std::move(target), std::move(combined)}, pos};
        }

        auto expr = parse_expr();
        if (at_op("="))
            throw SyntaxError(peek().pos, "can only assign to a plain variable name");
        if (peek().type == Tok::Op && (peek().text == "+=" || peek().text == "-="))
            throw SyntaxError(peek().pos, "augmented assignment requires a plain variable name");
        return Stmt {ExprStmt {std::move(expr)}, pos};
    }

    void end_of_statement()
    {
        if (at(Tok::Newline))
        {
            ++_i;
            return;
        }
        if (at(Tok::End) || at(Tok::Dedent))
            return;
        fail_expected("end of line");
    }

    Block parse_suite()
    {
        auto guard = nest();
        expect_op(":");
        Block block;
        if (!at(Tok::Newline))
        {
            block.push_back(parse_simple_statement());
            end_of_statement();
            return block;
        }
        ++_i;
        if (!at(Tok::Indent))
            throw SyntaxError(peek().pos, "expected an indented block");
        ++_i;
        while (!at(Tok::Dedent) && !at(Tok::End))
        {
            if (at(Tok::Newline))
            {
                ++_i;
                continue;
            }
            block.push_back(parse_statement());
        }
        if (at(Tok::Dedent))
            ++_i;
        return block;
    }

    Stmt parse_for()
    {
        SourcePos pos = peek().pos;
        expect_word("for");
        auto var = expect_identifier();
        if (at_op(","))
            throw SyntaxError(peek().pos, "tuple unpacking is not supported; loop over a single name");
        expect_word("in");
        auto iterable = parse_expr();
        auto body = parse_suite();
        return Stmt {ForLoop {std::move(var), std::move(iterable), std::move(body)}, pos};
    }

    Stmt parse_if()
    {
        SourcePos pos = peek().pos;
        ++_i; // 'if' or 'elif'
        auto cond = parse_expr();
        auto then_body = parse_suite();
        Block else_body;
        if (at_word("elif"))
            else_body.push_back(parse_if());
        else if (at_word("else"))
        {
            ++_i;
            else_body = parse_suite();
        }
        return Stmt {IfElse {std::move(cond), std::move(then_body), std::move(else_body)}, pos};
    }

    // -- expressions ---------------------------------------------------------

    ExprPtr parse_expr()
    {
        auto guard = nest();
        return parse_or();
    }

    struct DepthGuard
    {
        int& depth;
        ~DepthGuard() { --depth; }
    };

    DepthGuard nest()
    {
        if (++_nesting > kMaxNesting)
        {
            --_nesting;
            throw SyntaxError(peek().pos, "program is nested too deeply");
        }
        return DepthGuard {_nesting};
    }

    ExprPtr parse_or()
    {
        auto lhs = parse_and();
        while (at_word("or"))
        {
            auto pos = peek().pos;
            ++_i;
            lhs = make_expr(Binary {BinaryOp::Or, std::move(lhs), parse_and()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_and()
    {
        auto lhs = parse_not();
        while (at_word("and"))
        {
            auto pos = peek().pos;
            ++_i;
            lhs = make_expr(Binary {BinaryOp::And, std::move(lhs), parse_not()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_not()
    {
        if (at_word("not"))
        {
            auto pos = peek().pos;
            ++_i;
            auto guard = nest();
            return make_expr(Unary {UnaryOp::Not, parse_not()}, pos);
        }
        return parse_comparison();
    }

    bool comparison_ahead(BinaryOp& op, std::size_t& width) const
    {
        const auto& t = peek();
        if (t.type == Tok::Op)
        {
            static const std::pair<std::string_view, BinaryOp> kOps[] = {
                {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
                {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},  {">=", BinaryOp::Ge},
            };
            for (const auto& [text, kind]: kOps)
                if (t.text == text)
                {
                    op = kind;
                    width = 1;
                    return true;
                }
            return false;
        }
        if (at_word("in"))
        {
            op = BinaryOp::In;
            width = 1;
            return true;
        }
        if (at_word("not") && at_word("in", 1))
        {
            op = BinaryOp::NotIn;
            width = 2;
            return true;
        }
        if (at_word("is"))
            throw SyntaxError(t.pos, "'is' is not supported; use == or !=");
        return false;
    }

    ExprPtr parse_comparison()
    {
        auto lhs = parse_bitor();
        BinaryOp op {};
        std::size_t width = 0;
        if (comparison_ahead(op, width))
        {
            auto pos = peek().pos;
            _i += width;
            lhs = make_expr(Binary {op, std::move(lhs), parse_bitor()}, pos);
            if (comparison_ahead(op, width))
                throw SyntaxError(peek().pos, "chained comparisons are not supported; combine with 'and'");
        }
        return lhs;
    }

    ExprPtr parse_bitor()
    {
        auto lhs = parse_bitand();
        while (at_op("|"))
        {
            auto pos = peek().pos;
            ++_i;
            lhs = make_expr(Binary {BinaryOp::BitOr, std::move(lhs), parse_bitand()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_bitand()
    {
        auto lhs = parse_arith();
        while (at_op("&"))
        {
            auto pos = peek().pos;
            ++_i;
            lhs = make_expr(Binary {BinaryOp::BitAnd, std::move(lhs), parse_arith()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_arith()
    {
        auto lhs = parse_term();
        while (at_op("+") || at_op("-"))
        {
            auto pos = peek().pos;
            auto op = peek().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            ++_i;
            lhs = make_expr(Binary {op, std::move(lhs), parse_term()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_term()
    {
        auto lhs = parse_unary();
        while (at_op("*") || at_op("/") || at_op("%"))
        {
            auto pos = peek().pos;
            auto op = peek().text == "*" ? BinaryOp::Mul : peek().text == "/" ? BinaryOp::Div : BinaryOp::Mod;
            ++_i;
            if (at_op("*") || at_op("/"))
                throw SyntaxError(peek().pos, "operators '**' and '//' are not supported");
            lhs = make_expr(Binary {op, std::move(lhs), parse_unary()}, pos);
        }
        return lhs;
    }

    ExprPtr parse_unary()
    {
        if (at_op("-"))
        {
            auto pos = peek().pos;
            ++_i;
            auto guard = nest();
            return make_expr(Unary {UnaryOp::Neg, parse_unary()}, pos);
        }
        if (at_op("+"))
        {
            ++_i;
            auto guard = nest();
            return parse_unary();
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix()
    {
        auto expr = parse_atom();
        while (true)
        {
            if (at_op("("))
                throw SyntaxError(peek().pos, "only builtin functions can be called, by name");
            if (at_op("["))
            {
                auto pos = peek().pos;
                ++_i;
                expr = parse_subscript(std::move(expr), pos);
                continue;
            }
            if (at_op("."))
            {
                auto pos = peek().pos;
                ++_i;
                if (!at(Tok::Name))
                    fail_expected("a field name after '.'");
                const auto& name = peek();
                if (at_op("(", 1))
                    throw SyntaxError(name.pos,
                                      "method calls are not supported ('." + name.text
                                          + "(...)'); use builtin functions such as sort_by_distance(...), len(...), "
                                            "list(...) or set operators | and &");
                if (name.text != "category" && name.text != "xyz")
                    throw SyntaxError(name.pos,
                                      "attribute '" + name.text + "' is not accessible; objects expose only .category and .xyz");
                auto field = name.text == "category" ? Field::Category : Field::Xyz;
                ++_i;
                expr = make_expr(Member {std::move(expr), field}, pos);
                continue;
            }
            return expr;
        }
    }

    ExprPtr parse_subscript(ExprPtr target, SourcePos pos)
    {
        ExprPtr lower;
        if (!at_op(":"))
            lower = parse_expr();
        if (at_op(":"))
        {
            ++_i;
            ExprPtr upper;
            if (!at_op("]"))
                upper = parse_expr();
            if (at_op(":"))
                throw SyntaxError(peek().pos, "slice steps are not supported");
            expect_op("]");
            return make_expr(Slice {std::move(target), std::move(lower), std::move(upper)}, pos);
        }
        expect_op("]");
        return make_expr(Index {std::move(target), std::move(lower)}, pos);
    }

    ExprPtr parse_atom()
    {
        const auto& t = peek();
        SourcePos pos = t.pos;
        switch (t.type)
        {
            case Tok::Number: ++_i; return make_expr(NumberLit {t.number}, pos);
            case Tok::String:
            {
                std::string value;
                while (at(Tok::String))
                {
                    value += peek().text;
                    ++_i;
                }
                return make_expr(StringLit {std::move(value)}, pos);
            }
            case Tok::FString: ++_i; return parse_fstring(t);
            case Tok::Name: return parse_name_atom();
            case Tok::Op:
                if (t.text == "(")
                {
                    ++_i;
                    auto inner = parse_expr();
                    if (at_op(","))
                        throw SyntaxError(peek().pos, "tuples are not supported; use a list [...]");
                    expect_op(")");
                    return inner;
                }
                if (t.text == "[")
                    return parse_list();
                if (t.text == "{")
                    throw SyntaxError(pos, "dict and set literals are not supported; use set() or a list");
                break;
            default: break;
        }
        fail_expected("an expression");
    }

    ExprPtr parse_name_atom()
    {
        const auto& t = peek();
        SourcePos pos = t.pos;
        if (t.text == "True" || t.text == "False")
        {
            ++_i;
            return make_expr(BoolLit {t.text == "True"}, pos);
        }
        if (t.text == "None")
        {
            ++_i;
            return make_expr(NoneLit {}, pos);
        }
        reject_unsupported_keyword();
        auto name = expect_identifier();
        if (!at_op("("))
            return make_expr(NameRef {std::move(name)}, pos);

        ++_i;
        Call call {std::move(name), {}, {}};
        while (!at_op(")"))
        {
            if (at(Tok::Name) && at_op("=", 1))
            {
                auto kw_pos = peek().pos;
                auto kw = expect_identifier();
                ++_i;
                for (const auto& existing: call.kwargs)
                    if (existing.name == kw)
                        throw SyntaxError(kw_pos, "keyword argument '" + kw + "' repeated");
                call.kwargs.push_back({std::move(kw), parse_expr()});
            }
            else
            {
                if (!call.kwargs.empty())
                    throw SyntaxError(peek().pos, "positional argument follows keyword argument");
                if (at_op("*"))
                    throw SyntaxError(peek().pos, "argument unpacking is not supported");
                call.args.push_back(parse_expr());
            }
            if (!at_op(","))
                break;
            ++_i;
        }
        expect_op(")");
        return make_expr(std::move(call), pos);
    }

    ExprPtr parse_list()
    {
        SourcePos pos = peek().pos;
        expect_op("[");
        if (at_op("]"))
        {
            ++_i;
            return make_expr(ListLit {}, pos);
        }
        auto first = parse_expr();
        if (at_word("for"))
        {
            ++_i;
            auto var = expect_identifier();
            expect_word("in");
            auto iterable = parse_or();
            ExprPtr cond;
            if (at_word("if"))
            {
                ++_i;
                cond = parse_or();
            }
            if (at_word("for"))
                throw SyntaxError(peek().pos, "nested comprehensions are not supported");
            expect_op("]");
            return make_expr(ListComp {std::move(first), std::move(var), std::move(iterable), std::move(cond)}, pos);
        }
        ListLit list;
        list.items.push_back(std::move(first));
        while (at_op(","))
        {
            ++_i;
            if (at_op("]"))
                break;
            list.items.push_back(parse_expr());
        }
        expect_op("]");
        return make_expr(std::move(list), pos);
    }

    ExprPtr parse_fstring(const Token& tok);

    static constexpr int kMaxNesting = 100;

    std::vector<Token> _toks;
    std::size_t _i = 0;
    int _nesting = 0;
};

inline ExprPtr Parser::parse_fstring(const Token& tok)
{
    const std::string& raw = tok.text;
    FString out;
    std::string literal;
    auto flush = [&] {
        if (!literal.empty())
        {
            out.segments.push_back({detail::decode_escapes(literal), nullptr, {}});
            literal.clear();
        }
    };
    auto pos_at = [&](std::size_t offset) {
        return SourcePos {tok.body_pos.line, tok.body_pos.column + static_cast<int>(offset)};
    };

    std::size_t i = 0;
    while (i < raw.size())
    {
        char c = raw[i];
        if (c == '\\' && i + 1 < raw.size())
        {
            literal += raw.substr(i, 2);
            i += 2;
            continue;
        }
        if (c == '{' && i + 1 < raw.size() && raw[i + 1] == '{')
        {
            literal += '{';
            i += 2;
            continue;
        }
        if (c == '}')
        {
            if (i + 1 < raw.size() && raw[i + 1] == '}')
            {
                literal += '}';
                i += 2;
                continue;
            }
            throw SyntaxError(pos_at(i), "single '}' is not allowed in f-string");
        }
        if (c != '{')
        {
            literal += c;
            ++i;
            continue;
        }

        // Replacement field: find the closing brace and an optional format spec.
        std::size_t start = i + 1;
        std::size_t j = start;
        int depth = 0;
        char quote = 0;
        std::size_t colon = std::string::npos;
        for (; j < raw.size(); ++j)
        {
            char d = raw[j];
            if (quote)
            {
                if (d == '\\')
                    ++j;
                else if (d == quote)
                    quote = 0;
                continue;
            }
            if (d == '\'' || d == '"')
                quote = d;
            else if (d == '(' || d == '[' || d == '{')
                ++depth;
            else if ((d == ')' || d == ']') && depth > 0)
                --depth;
            else if (d == '}' && depth > 0)
                --depth;
            else if (d == '}')
                break;
            else if (d == ':' && depth == 0 && colon == std::string::npos)
                colon = j;
            else if (d == '!' && depth == 0 && j + 1 < raw.size() && raw[j + 1] != '=')
                throw SyntaxError(pos_at(j), "f-string conversions (!r, !s) are not supported");
        }
        if (j >= raw.size())
            throw SyntaxError(pos_at(i), "expected '}' in f-string");

        std::size_t expr_end = colon == std::string::npos ? j : colon;
        std::string spec = colon == std::string::npos ? std::string() : raw.substr(colon + 1, j - colon - 1);
        if (!detail::valid_format_spec(spec))
            throw SyntaxError(pos_at(colon + 1), "unsupported format spec '" + spec + "'; only .Nf is supported");
        auto expr_text = std::string_view(raw).substr(start, expr_end - start);
        if (detail::text_is_blank(expr_text))
            throw SyntaxError(pos_at(i), "empty expression in f-string");

        Parser sub(Lexer(expr_text, pos_at(start)).tokenize_expression());
        auto expr = sub.parse_lone_expression();
        flush();
        out.segments.push_back({{}, std::move(expr), std::move(spec)});
        i = j + 1;
    }
    flush();
    return make_expr(std::move(out), tok.pos);
}

/// Parses a whole program; throws SyntaxError.
inline Program parse(std::string_view source)
{
    Parser parser(Lexer(source).tokenize_program());
    return parser.parse_program();
}

} // namespace tpc::dsl
