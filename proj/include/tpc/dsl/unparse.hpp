// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "../text.hpp"
#include "ast.hpp"

namespace tpc::dsl
{

namespace detail
{

enum Prec
{
    kPrecOr = 1,
    kPrecAnd,
    kPrecNot,
    kPrecCompare,
    kPrecBitOr,
    kPrecBitAnd,
    kPrecArith,
    kPrecTerm,
    kPrecUnary,
    kPrecPostfix,
    kPrecAtom,
};

inline int binary_prec(BinaryOp op) noexcept
{
    switch (op)
    {
        case BinaryOp::Or: return kPrecOr;
        case BinaryOp::And: return kPrecAnd;
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
        case BinaryOp::In:
        case BinaryOp::NotIn: return kPrecCompare;
        case BinaryOp::BitOr: return kPrecBitOr;
        case BinaryOp::BitAnd: return kPrecBitAnd;
        case BinaryOp::Add:
        case BinaryOp::Sub: return kPrecArith;
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Mod: return kPrecTerm;
    }
    return kPrecAtom;
}

inline const char* binary_symbol(BinaryOp op) noexcept
{
    switch (op)
    {
        case BinaryOp::Or: return "or";
        case BinaryOp::And: return "and";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::In: return "in";
        case BinaryOp::NotIn: return "not in";
        case BinaryOp::BitOr: return "|";
        case BinaryOp::BitAnd: return "&";
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
    }
    return "?";
}

inline std::string quote_string(const std::string& value, char quote, bool in_fstring_text = false)
{
    std::string out;
    if (!in_fstring_text)
        out += quote;
    for (char c: value)
    {
        switch (c)
        {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '{':
                out += in_fstring_text ? "{{" : "{";
                break;
            case '}':
                out += in_fstring_text ? "}}" : "}";
                break;
            default:
                if (c == quote)
                {
                    out += '\\';
                    out += c;
                }
                else
                    out += c;
        }
    }
    if (!in_fstring_text)
        out += quote;
    return out;
}

class Unparser
{
  public:
    /// `nested` selects single quotes, used inside f-string replacement fields.
    explicit Unparser(bool nested = false): _quote(nested ? '\'' : '"') {}

    std::string expr(const Expr& e, int min_prec = kPrecOr) const
    {
        int prec = precedence(e);
        auto body = std::visit([this](const auto& node) { return render(node); }, e.node);
        return prec < min_prec ? "(" + body + ")" : body;
    }

    void block(const Block& b, int depth, std::string& out) const
    {
        for (const auto& s: b)
            stmt(s, depth, out);
    }

  private:
    static int precedence(const Expr& e)
    {
        if (auto* b = std::get_if<Binary>(&e.node))
            return binary_prec(b->op);
        if (auto* u = std::get_if<Unary>(&e.node))
            return u->op == UnaryOp::Not ? kPrecNot : kPrecUnary;
        if (std::holds_alternative<Member>(e.node) || std::holds_alternative<Index>(e.node)
            || std::holds_alternative<Slice>(e.node))
            return kPrecPostfix;
        return kPrecAtom;
    }

    std::string postfix_target(const Expr& e) const
    {
        if (std::holds_alternative<NumberLit>(e.node))
            return "(" + expr(e) + ")";
        return expr(e, kPrecPostfix);
    }

    std::string render(const NoneLit&) const { return "None"; }
    std::string render(const BoolLit& b) const { return b.value ? "True" : "False"; }
    std::string render(const NumberLit& n) const { return text::format_double(n.value); }
    std::string render(const StringLit& s) const { return quote_string(s.value, _quote); }
    std::string render(const NameRef& n) const { return n.name; }
    std::string render(const Member& m) const
    {
        return postfix_target(*m.object) + (m.field == Field::Category ? ".category" : ".xyz");
    }
    std::string render(const Call& c) const
    {
        std::string out = c.callee + "(";
        bool first = true;
        for (const auto& a: c.args)
        {
            if (!first)
                out += ", ";
            first = false;
            out += expr(*a);
        }
        for (const auto& kw: c.kwargs)
        {
            if (!first)
                out += ", ";
            first = false;
            out += kw.name + "=" + expr(*kw.value);
        }
        return out + ")";
    }
    std::string render(const ListLit& l) const
    {
        std::string out = "[";
        for (std::size_t i = 0; i < l.items.size(); ++i)
        {
            if (i)
                out += ", ";
            out += expr(*l.items[i]);
        }
        return out + "]";
    }
    std::string render(const ListComp& c) const
    {
        std::string out = "[" + expr(*c.element) + " for " + c.var + " in " + expr(*c.iterable);
        if (c.condition)
            out += " if " + expr(*c.condition);
        return out + "]";
    }
    std::string render(const FString& f) const
    {
        // Replacement fields always use the opposite quote style.
        Unparser inner(true);
        char quote = _quote;
        std::string out = "f";
        out += quote;
        for (const auto& seg: f.segments)
        {
            if (!seg.expr)
            {
                out += quote_string(seg.text, quote, true);
                continue;
            }
            auto body = inner.expr(*seg.expr);
            out += "{";
            if (!body.empty() && body.front() == '{')
                out += " ";
            out += body;
            if (!seg.format_spec.empty())
                out += ":" + seg.format_spec;
            out += "}";
        }
        out += quote;
        return out;
    }
    std::string render(const Unary& u) const
    {
        if (u.op == UnaryOp::Not)
            return "not " + expr(*u.operand, kPrecNot);
        return "-" + expr(*u.operand, kPrecUnary);
    }
    std::string render(const Binary& b) const
    {
        int prec = binary_prec(b.op);
        int rhs_prec = prec + 1;
        int lhs_prec = prec == kPrecCompare ? prec + 1 : prec;
        return expr(*b.lhs, lhs_prec) + " " + binary_symbol(b.op) + " " + expr(*b.rhs, rhs_prec);
    }
    std::string render(const Index& i) const { return postfix_target(*i.target) + "[" + expr(*i.index) + "]"; }
    std::string render(const Slice& s) const
    {
        std::string out = postfix_target(*s.target) + "[";
        if (s.lower)
            out += expr(*s.lower);
        out += ":";
        if (s.upper)
            out += expr(*s.upper);
        return out + "]";
    }

    void stmt(const Stmt& s, int depth, std::string& out) const
    {
        std::string indent(static_cast<std::size_t>(depth) * 4, ' ');
        if (auto* a = std::get_if<Assign>(&s.node))
            out += indent + a->target + " = " + expr(*a->value) + "\n";
        else if (auto* e = std::get_if<ExprStmt>(&s.node))
            out += indent + expr(*e->expr) + "\n";
        else if (auto* f = std::get_if<ForLoop>(&s.node))
        {
            out += indent + "for " + f->var + " in " + expr(*f->iterable) + ":\n";
            block(f->body, depth + 1, out);
        }
        else if (auto* i = std::get_if<IfElse>(&s.node))
        {
            out += indent + "if " + expr(*i->condition) + ":\n";
            block(i->then_body, depth + 1, out);
            const IfElse* chain = i;
            while (!chain->else_body.empty())
            {
                if (chain->else_body.size() == 1 && std::holds_alternative<IfElse>(chain->else_body.front().node))
                {
                    chain = &std::get<IfElse>(chain->else_body.front().node);
                    out += indent + "elif " + expr(*chain->condition) + ":\n";
                    block(chain->then_body, depth + 1, out);
                    continue;
                }
                out += indent + "else:\n";
                block(chain->else_body, depth + 1, out);
                break;
            }
        }
    }

    char _quote;
};

} // namespace detail

/// Canonical source text; parse(unparse(p)) is structurally equal to p.
inline std::string unparse(const Program& program)
{
    std::string out;
    detail::Unparser().block(program.body, 0, out);
    return out;
}

inline std::string unparse(const Expr& expr)
{
    return detail::Unparser().expr(expr);
}

} // namespace tpc::dsl
