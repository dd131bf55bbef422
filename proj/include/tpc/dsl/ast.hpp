// SPDX-License-Identifier: Apache-2.0
//
// Syntax tree for TPC-Script, the restricted imperative language generated
// programs are written in.
#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tpc::dsl
{

struct SourcePos
{
    int line = 1;
    int column = 1;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class Field
{
    Category,
    Xyz,
};

enum class UnaryOp
{
    Neg,
    Not,
};

enum class BinaryOp
{
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    BitOr,
    BitAnd,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
};

struct NoneLit
{
};
struct BoolLit
{
    bool value = false;
};
struct NumberLit
{
    double value = 0.0;
};
struct StringLit
{
    std::string value;
};
struct NameRef
{
    std::string name;
};
struct Member
{
    ExprPtr object;
    Field field;
};
struct KeywordArg
{
    std::string name;
    ExprPtr value;
};
struct Call
{
    std::string callee;
    std::vector<ExprPtr> args;
    std::vector<KeywordArg> kwargs;
};
struct ListLit
{
    std::vector<ExprPtr> items;
};
struct ListComp
{
    ExprPtr element;
    std::string var;
    ExprPtr iterable;
    ExprPtr condition; ///< may be null
};
/// One piece of an interpolated string: literal text when `expr` is null.
struct FSegment
{
    std::string text;
    ExprPtr expr;
    std::string format_spec;
};
struct FString
{
    std::vector<FSegment> segments;
};
struct Unary
{
    UnaryOp op;
    ExprPtr operand;
};
struct Binary
{
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct Index
{
    ExprPtr target;
    ExprPtr index;
};
struct Slice
{
    ExprPtr target;
    ExprPtr lower; ///< may be null
    ExprPtr upper; ///< may be null
};

struct Expr
{
    using Node = std::variant<NoneLit, BoolLit, NumberLit, StringLit, NameRef, Member, Call, ListLit, ListComp, FString,
                              Unary, Binary, Index, Slice>;
    Node node;
    SourcePos pos;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Assign
{
    std::string target;
    ExprPtr value;
};
struct ForLoop
{
    std::string var;
    ExprPtr iterable;
    Block body;
};
struct IfElse
{
    ExprPtr condition;
    Block then_body;
    Block else_body;
};
struct ExprStmt
{
    ExprPtr expr;
};

struct Stmt
{
    using Node = std::variant<Assign, ForLoop, IfElse, ExprStmt>;
    Node node;
    SourcePos pos;
};

struct Program
{
    Block body;
};

template<typename T>
ExprPtr make_expr(T node, SourcePos pos = {})
{
    return std::make_unique<Expr>(Expr {std::move(node), pos});
}

namespace detail
{

inline bool same(const ExprPtr& a, const ExprPtr& b);
inline bool same_block(const Block& a, const Block& b);

struct ExprEqual
{
    const Expr::Node& other;

    bool operator()(const NoneLit&) const { return true; }
    bool operator()(const BoolLit& a) const { return a.value == std::get<BoolLit>(other).value; }
    bool operator()(const NumberLit& a) const { return a.value == std::get<NumberLit>(other).value; }
    bool operator()(const StringLit& a) const { return a.value == std::get<StringLit>(other).value; }
    bool operator()(const NameRef& a) const { return a.name == std::get<NameRef>(other).name; }
    bool operator()(const Member& a) const
    {
        const auto& b = std::get<Member>(other);
        return a.field == b.field && same(a.object, b.object);
    }
    bool operator()(const Call& a) const
    {
        const auto& b = std::get<Call>(other);
        if (a.callee != b.callee || a.args.size() != b.args.size() || a.kwargs.size() != b.kwargs.size())
            return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!same(a.args[i], b.args[i]))
                return false;
        for (std::size_t i = 0; i < a.kwargs.size(); ++i)
            if (a.kwargs[i].name != b.kwargs[i].name || !same(a.kwargs[i].value, b.kwargs[i].value))
                return false;
        return true;
    }
    bool operator()(const ListLit& a) const
    {
        const auto& b = std::get<ListLit>(other);
        if (a.items.size() != b.items.size())
            return false;
        for (std::size_t i = 0; i < a.items.size(); ++i)
            if (!same(a.items[i], b.items[i]))
                return false;
        return true;
    }
    bool operator()(const ListComp& a) const
    {
        const auto& b = std::get<ListComp>(other);
        return a.var == b.var && same(a.element, b.element) && same(a.iterable, b.iterable)
               && same(a.condition, b.condition);
    }
    bool operator()(const FString& a) const
    {
        const auto& b = std::get<FString>(other);
        if (a.segments.size() != b.segments.size())
            return false;
        for (std::size_t i = 0; i < a.segments.size(); ++i)
        {
            const auto& x = a.segments[i];
            const auto& y = b.segments[i];
            if (x.text != y.text || x.format_spec != y.format_spec || !same(x.expr, y.expr))
                return false;
        }
        return true;
    }
    bool operator()(const Unary& a) const
    {
        const auto& b = std::get<Unary>(other);
        return a.op == b.op && same(a.operand, b.operand);
    }
    bool operator()(const Binary& a) const
    {
        const auto& b = std::get<Binary>(other);
        return a.op == b.op && same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
    }
    bool operator()(const Index& a) const
    {
        const auto& b = std::get<Index>(other);
        return same(a.target, b.target) && same(a.index, b.index);
    }
    bool operator()(const Slice& a) const
    {
        const auto& b = std::get<Slice>(other);
        return same(a.target, b.target) && same(a.lower, b.lower) && same(a.upper, b.upper);
    }
};

inline bool same(const ExprPtr& a, const ExprPtr& b)
{
    if (!a || !b)
        return !a && !b;
    if (a->node.index() != b->node.index())
        return false;
    return std::visit(ExprEqual {b->node}, a->node);
}

struct StmtEqual
{
    const Stmt::Node& other;

    bool operator()(const Assign& a) const
    {
        const auto& b = std::get<Assign>(other);
        return a.target == b.target && same(a.value, b.value);
    }
    bool operator()(const ForLoop& a) const
    {
        const auto& b = std::get<ForLoop>(other);
        return a.var == b.var && same(a.iterable, b.iterable) && same_block(a.body, b.body);
    }
    bool operator()(const IfElse& a) const
    {
        const auto& b = std::get<IfElse>(other);
        return same(a.condition, b.condition) && same_block(a.then_body, b.then_body)
               && same_block(a.else_body, b.else_body);
    }
    bool operator()(const ExprStmt& a) const { return same(a.expr, std::get<ExprStmt>(other).expr); }
};

inline bool same_block(const Block& a, const Block& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (a[i].node.index() != b[i].node.index())
            return false;
        if (!std::visit(StmtEqual {b[i].node}, a[i].node))
            return false;
    }
    return true;
}

} // namespace detail

/// Structural equality; source positions are ignored.
inline bool structurally_equal(const Program& a, const Program& b)
{
    return detail::same_block(a.body, b.body);
}

inline bool structurally_equal(const Expr& a, const Expr& b)
{
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(detail::ExprEqual {b.node}, a.node);
}

} // namespace tpc::dsl
