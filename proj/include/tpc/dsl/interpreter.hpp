// SPDX-License-Identifier: Apache-2.0
//
// Sandboxed evaluator for TPC-Script. The builtin table below is the whole
// capability surface a program can reach.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../scene_api.hpp"
#include "ast.hpp"
#include "parser.hpp"
#include "value.hpp"

namespace tpc::dsl
{

struct Limits
{
    std::size_t max_steps = 10000;
    std::size_t max_api_calls = 200;
    std::size_t max_stdout_bytes = 4096;
};

struct RuntimeFault
{
    std::string kind;
    std::string message;
    int line = 0;

    /// One-line rendering used in rectify prompts.
    [[nodiscard]] std::string describe() const
    {
        std::string out = kind;
        if (line > 0)
            out += " at line " + std::to_string(line);
        return out + ": " + message;
    }
};

struct ExecutionOutcome
{
    std::string output;
    std::size_t steps = 0;
    std::size_t api_calls = 0;
    std::optional<RuntimeFault> error;

    [[nodiscard]] bool ok() const noexcept { return !error; }
};

namespace fault
{
inline constexpr const char* kNameError = "NameError";
inline constexpr const char* kUnknownBuiltin = "UnknownBuiltin";
inline constexpr const char* kArityError = "ArityError";
inline constexpr const char* kTypeError = "TypeError";
inline constexpr const char* kValueError = "ValueError";
inline constexpr const char* kIndexError = "IndexError";
inline constexpr const char* kZeroDivision = "ZeroDivisionError";
inline constexpr const char* kStepLimit = "StepLimitExceeded";
inline constexpr const char* kApiCallLimit = "ApiCallLimitExceeded";
inline constexpr const char* kOutputTruncated = "OutputTruncated";
inline constexpr const char* kSyntaxError = "SyntaxError";
} // namespace fault

/// Functions from the host language that programs commonly reach for but
/// which are not part of the builtin table.
inline constexpr std::string_view kUnavailableBuiltins[] = {
    "range", "enumerate", "zip",  "map",    "any",     "all",     "int",     "float",      "dict",  "tuple",
    "bool",  "type",      "open", "eval",   "exec",    "input",   "getattr", "setattr",    "vars",  "globals",
    "dir",   "reversed",  "iter", "next",   "compile", "hasattr", "locals",  "isinstance", "repr",  "format",
    "ord",   "chr",       "hash", "object", "super",   "id",      "help",    "__import__", "sort",  "lambda",
};

class Interpreter
{
  public:
    explicit Interpreter(const ApiContext& ctx, Limits limits = {}): _ctx(ctx), _limits(limits) {}

    ExecutionOutcome run(const Program& program)
    {
        _vars.clear();
        _out.clear();
        _steps = 0;
        _api_calls = 0;
        ExecutionOutcome outcome;
        try
        {
            exec_block(program.body);
        }
        catch (const RuntimeFault& f)
        {
            outcome.error = f;
        }
        catch (const std::bad_alloc&)
        {
            outcome.error = RuntimeFault {"MemoryError", "program exhausted memory", 0};
        }
        outcome.output = _out;
        outcome.steps = _steps;
        outcome.api_calls = _api_calls;
        return outcome;
    }

  private:
    struct Args
    {
        std::vector<std::optional<Value>> slots;
        std::vector<Value> rest;
    };

    using Handler = Value (Interpreter::*)(Args&, SourcePos);

    struct Builtin
    {
        std::vector<std::string_view> params;
        std::size_t required = 0;
        bool variadic = false;
        Handler handler = nullptr;
    };

    static const std::map<std::string, Builtin, std::less<>>& builtins()
    {
        static const std::map<std::string, Builtin, std::less<>> table = {
            {"scene", {{}, 0, false, &Interpreter::b_scene}},
            {"filter", {{"object_set", "category"}, 2, false, &Interpreter::b_filter}},
            {"relate", {{"object_set", "reference_object", "relation"}, 3, false, &Interpreter::b_relate}},
            {"relate_agent", {{"object_set", "relation"}, 2, false, &Interpreter::b_relate_agent}},
            {"query_relation",
             {{"object", "reference_object", "candidate_relations"}, 2, false, &Interpreter::b_query_relation}},
            {"query_relation_agent",
             {{"object", "candidate_relations"}, 1, false, &Interpreter::b_query_relation_agent}},
            {"query_attribute",
             {{"object", "attribute_type", "candidate_attribute_values"}, 2, false, &Interpreter::b_query_attribute}},
            {"query_state", {{"object", "candidate_states"}, 2, false, &Interpreter::b_query_state}},
            {"sort_by_distance", {{"objects"}, 1, false, &Interpreter::b_sort_by_distance}},
            {"len", {{"obj"}, 1, false, &Interpreter::b_len}},
            {"print", {{}, 0, true, &Interpreter::b_print}},
            {"str", {{"obj"}, 0, false, &Interpreter::b_str}},
            {"min", {{}, 1, true, &Interpreter::b_min}},
            {"max", {{}, 1, true, &Interpreter::b_max}},
            {"sum", {{"iterable"}, 1, false, &Interpreter::b_sum}},
            {"round", {{"number", "ndigits"}, 1, false, &Interpreter::b_round}},
            {"abs", {{"x"}, 1, false, &Interpreter::b_abs}},
            {"list", {{"iterable"}, 0, false, &Interpreter::b_list}},
            {"set", {{"iterable"}, 0, false, &Interpreter::b_set}},
            {"sorted", {{"iterable"}, 1, false, &Interpreter::b_sorted}},
        };
        return table;
    }

    [[noreturn]] static void raise(SourcePos pos, const char* kind, std::string message)
    {
        throw RuntimeFault {kind, std::move(message), pos.line};
    }

    void charge(std::size_t n, SourcePos pos)
    {
        if (_steps + n > _limits.max_steps)
        {
            _steps = _limits.max_steps;
            raise(pos, fault::kStepLimit, "program exceeded " + std::to_string(_limits.max_steps) + " steps");
        }
        _steps += n;
    }

    void charge_string(const std::string& s, SourcePos pos) { charge(s.size() / 64, pos); }

    void api_call(SourcePos pos)
    {
        if (_api_calls >= _limits.max_api_calls)
            raise(pos, fault::kApiCallLimit,
                  "program exceeded " + std::to_string(_limits.max_api_calls) + " scene API calls");
        ++_api_calls;
    }

    void emit(const std::string& line, SourcePos pos)
    {
        if (_out.size() + line.size() > _limits.max_stdout_bytes)
        {
            _out += line.substr(0, _limits.max_stdout_bytes - _out.size());
            raise(pos, fault::kOutputTruncated,
                  "printed output exceeded " + std::to_string(_limits.max_stdout_bytes) + " bytes");
        }
        _out += line;
    }

    // -- statements ------------------------------------------------------------

    void exec_block(const Block& block)
    {
        for (const auto& s: block)
            exec(s);
    }

    void exec(const Stmt& s)
    {
        charge(1, s.pos);
        if (auto* a = std::get_if<Assign>(&s.node))
            _vars[a->target] = eval(*a->value);
        else if (auto* e = std::get_if<ExprStmt>(&s.node))
            eval(*e->expr);
        else if (auto* f = std::get_if<ForLoop>(&s.node))
        {
            for (auto& item: iterate(eval(*f->iterable), s.pos))
            {
                _vars[f->var] = std::move(item);
                exec_block(f->body);
            }
        }
        else if (auto* i = std::get_if<IfElse>(&s.node))
        {
            if (truthy(eval(*i->condition)))
                exec_block(i->then_body);
            else
                exec_block(i->else_body);
        }
    }

    // -- expressions -----------------------------------------------------------

    Value eval(const Expr& e)
    {
        charge(1, e.pos);
        return std::visit([&](const auto& node) { return eval_node(node, e.pos); }, e.node);
    }

    Value eval_node(const NoneLit&, SourcePos) { return {}; }
    Value eval_node(const BoolLit& b, SourcePos) { return b.value; }
    Value eval_node(const NumberLit& n, SourcePos) { return n.value; }
    Value eval_node(const StringLit& s, SourcePos) { return s.value; }

    Value eval_node(const NameRef& n, SourcePos pos)
    {
        if (auto it = _vars.find(n.name); it != _vars.end())
            return it->second;
        if (builtins().count(n.name))
            raise(pos, fault::kTypeError, "builtin '" + n.name + "' can only be called, not used as a value");
        raise(pos, fault::kNameError, "name '" + n.name + "' is not defined");
    }

    Value eval_node(const Member& m, SourcePos pos)
    {
        auto target = eval(*m.object);
        auto* o = target.as_object();
        const char* field = m.field == Field::Category ? "category" : "xyz";
        if (!o)
            raise(pos, fault::kTypeError,
                  std::string("'") + type_name(target) + "' value has no attribute '" + field + "'");
        const auto& obj = _ctx.object(o->index);
        if (m.field == Field::Category)
            return obj.category;
        return List {obj.centroid.x, obj.centroid.y, obj.centroid.z};
    }

    Value eval_node(const Call& c, SourcePos pos)
    {
        if (_vars.count(c.callee))
            raise(pos, fault::kTypeError, "'" + c.callee + "' is a variable and cannot be called");
        auto it = builtins().find(c.callee);
        if (it == builtins().end())
        {
            if (std::find(std::begin(kUnavailableBuiltins), std::end(kUnavailableBuiltins), c.callee)
                != std::end(kUnavailableBuiltins))
                raise(pos, fault::kUnknownBuiltin, "function '" + c.callee + "' is not available; " + available_list());
            raise(pos, fault::kNameError, "name '" + c.callee + "' is not defined; " + available_list());
        }
        const auto& b = it->second;
        Args args;
        if (b.variadic)
        {
            if (!c.kwargs.empty())
                raise(pos, fault::kArityError, c.callee + "() takes no keyword arguments");
            for (const auto& a: c.args)
                args.rest.push_back(eval(*a));
            if (args.rest.size() < b.required)
                raise(pos, fault::kArityError, c.callee + "() expected at least " + std::to_string(b.required)
                                                   + " argument" + (b.required == 1 ? "" : "s") + ", got "
                                                   + std::to_string(args.rest.size()));
        }
        else
        {
            if (c.args.size() > b.params.size())
                raise(pos, fault::kArityError, c.callee + "() takes at most " + std::to_string(b.params.size())
                                                   + " argument" + (b.params.size() == 1 ? "" : "s") + " ("
                                                   + std::to_string(c.args.size()) + " given)");
            args.slots.resize(b.params.size());
            for (std::size_t i = 0; i < c.args.size(); ++i)
                args.slots[i] = eval(*c.args[i]);
            for (const auto& kw: c.kwargs)
            {
                auto p = std::find(b.params.begin(), b.params.end(), kw.name);
                if (p == b.params.end())
                    raise(pos, fault::kArityError,
                          c.callee + "() got an unexpected keyword argument '" + kw.name + "'; parameters are "
                              + param_list(b));
                auto idx = static_cast<std::size_t>(p - b.params.begin());
                if (args.slots[idx])
                    raise(pos, fault::kArityError, c.callee + "() got multiple values for argument '" + kw.name + "'");
                args.slots[idx] = eval(*kw.value);
            }
            for (std::size_t i = 0; i < b.required; ++i)
                if (!args.slots[i])
                    raise(pos, fault::kArityError,
                          c.callee + "() missing required argument '" + std::string(b.params[i]) + "'");
        }
        return (this->*b.handler)(args, pos);
    }

    Value eval_node(const ListLit& l, SourcePos pos)
    {
        List items;
        items.reserve(l.items.size());
        for (const auto& item: l.items)
            items.push_back(eval(*item));
        charge(items.size(), pos);
        return items;
    }

    Value eval_node(const ListComp& c, SourcePos pos)
    {
        auto source = iterate(eval(*c.iterable), pos);
        std::optional<Value> saved;
        if (auto it = _vars.find(c.var); it != _vars.end())
            saved = it->second;
        List out;
        for (auto& item: source)
        {
            _vars[c.var] = std::move(item);
            if (c.condition && !truthy(eval(*c.condition)))
                continue;
            out.push_back(eval(*c.element));
        }
        if (saved)
            _vars[c.var] = *saved;
        else
            _vars.erase(c.var);
        charge(out.size(), pos);
        return out;
    }

    Value eval_node(const FString& f, SourcePos pos)
    {
        std::string out;
        for (const auto& seg: f.segments)
        {
            if (!seg.expr)
            {
                out += seg.text;
                continue;
            }
            auto v = eval(*seg.expr);
            if (seg.format_spec.empty())
                out += display(v, _ctx);
            else
            {
                double scratch = 0;
                auto* d = numeric(v, scratch);
                if (!d)
                    raise(seg.expr->pos, fault::kTypeError,
                          "format spec '" + seg.format_spec + "' needs a number, got " + type_name(v));
                out += format_fixed(*d, std::stoi(seg.format_spec.substr(1, seg.format_spec.size() - 2)));
            }
        }
        charge_string(out, pos);
        return out;
    }

    Value eval_node(const Unary& u, SourcePos pos)
    {
        auto v = eval(*u.operand);
        if (u.op == UnaryOp::Not)
            return !truthy(v);
        double scratch = 0;
        auto* d = numeric(v, scratch);
        if (!d)
            raise(pos, fault::kTypeError, std::string("bad operand type for unary -: '") + type_name(v) + "'");
        return -*d;
    }

    Value eval_node(const Binary& b, SourcePos pos)
    {
        if (b.op == BinaryOp::And)
        {
            auto lhs = eval(*b.lhs);
            return truthy(lhs) ? eval(*b.rhs) : lhs;
        }
        if (b.op == BinaryOp::Or)
        {
            auto lhs = eval(*b.lhs);
            return truthy(lhs) ? lhs : eval(*b.rhs);
        }
        auto lhs = eval(*b.lhs);
        auto rhs = eval(*b.rhs);
        switch (b.op)
        {
            case BinaryOp::Eq: return values_equal(lhs, rhs);
            case BinaryOp::Ne: return !values_equal(lhs, rhs);
            case BinaryOp::Lt: return compare(lhs, rhs, "<", pos) < 0;
            case BinaryOp::Le: return compare(lhs, rhs, "<=", pos) <= 0;
            case BinaryOp::Gt: return compare(lhs, rhs, ">", pos) > 0;
            case BinaryOp::Ge: return compare(lhs, rhs, ">=", pos) >= 0;
            case BinaryOp::In: return contains(rhs, lhs, pos);
            case BinaryOp::NotIn: return !contains(rhs, lhs, pos);
            default: return arithmetic(b.op, lhs, rhs, pos);
        }
    }

    Value eval_node(const Index& ix, SourcePos pos)
    {
        auto target = eval(*ix.target);
        auto index = eval(*ix.index);
        if (target.as_set())
            raise(pos, fault::kTypeError, "a set cannot be indexed; convert it with list(...) first");
        std::size_t size = 0;
        if (auto* l = target.as_list())
            size = l->size();
        else if (auto* s = target.as_string())
            size = s->size();
        else
            raise(pos, fault::kTypeError, std::string("'") + type_name(target) + "' value is not subscriptable");
        auto i = to_integer(index, "index", pos);
        auto n = static_cast<long long>(size);
        if (i < 0)
            i += n;
        if (i < 0 || i >= n)
            raise(pos, fault::kIndexError, "index " + std::to_string(to_integer(index, "index", pos))
                                               + " out of range for length " + std::to_string(size));
        if (auto* l = target.as_list())
            return (*l)[static_cast<std::size_t>(i)];
        return std::string(1, (*target.as_string())[static_cast<std::size_t>(i)]);
    }

    Value eval_node(const Slice& s, SourcePos pos)
    {
        auto target = eval(*s.target);
        std::optional<long long> lower, upper;
        if (s.lower)
            lower = to_integer(eval(*s.lower), "slice bound", pos);
        if (s.upper)
            upper = to_integer(eval(*s.upper), "slice bound", pos);
        std::size_t size = 0;
        if (auto* l = target.as_list())
            size = l->size();
        else if (auto* str = target.as_string())
            size = str->size();
        else
            raise(pos, fault::kTypeError, std::string("'") + type_name(target) + "' value cannot be sliced");
        auto n = static_cast<long long>(size);
        auto clamp = [n](long long v) {
            if (v < 0)
                v += n;
            return std::clamp(v, 0LL, n);
        };
        auto lo = static_cast<std::size_t>(lower ? clamp(*lower) : 0);
        auto hi = static_cast<std::size_t>(upper ? clamp(*upper) : n);
        if (hi < lo)
            hi = lo;
        if (auto* l = target.as_list())
            return List(l->begin() + static_cast<std::ptrdiff_t>(lo), l->begin() + static_cast<std::ptrdiff_t>(hi));
        return target.as_string()->substr(lo, hi - lo);
    }

    // -- operator helpers ------------------------------------------------------

    static long long to_integer(const Value& v, const char* what, SourcePos pos)
    {
        double scratch = 0;
        auto* d = numeric(v, scratch);
        if (!d || *d != std::trunc(*d) || std::fabs(*d) > 1e15)
            raise(pos, fault::kTypeError, std::string(what) + " must be an integer, got " + type_name(v)
                                              + (d ? " " + format_number(*d) : std::string()));
        return static_cast<long long>(*d);
    }

    static int compare(const Value& a, const Value& b, const char* op, SourcePos pos)
    {
        double sa = 0, sb = 0;
        auto* na = numeric(a, sa);
        auto* nb = numeric(b, sb);
        if (na && nb)
            return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
        auto* x = a.as_string();
        auto* y = b.as_string();
        if (x && y)
            return x->compare(*y) < 0 ? -1 : (x->compare(*y) > 0 ? 1 : 0);
        raise(pos, fault::kTypeError, std::string("'") + op + "' not supported between '" + type_name(a) + "' and '"
                                          + type_name(b) + "'");
    }

    static bool contains(const Value& container, const Value& item, SourcePos pos)
    {
        if (auto* l = container.as_list())
            return std::any_of(l->begin(), l->end(), [&](const Value& v) { return values_equal(v, item); });
        if (auto* s = container.as_set())
        {
            auto* o = item.as_object();
            return o && std::binary_search(s->begin(), s->end(), o->index);
        }
        if (auto* s = container.as_string())
        {
            auto* needle = item.as_string();
            if (!needle)
                raise(pos, fault::kTypeError,
                      std::string("'in <str>' requires a string on the left, got ") + type_name(item));
            return s->find(*needle) != std::string::npos;
        }
        raise(pos, fault::kTypeError, std::string("'") + type_name(container) + "' value is not a container");
    }

    Value arithmetic(BinaryOp op, const Value& a, const Value& b, SourcePos pos)
    {
        double sa = 0, sb = 0;
        auto* x = numeric(a, sa);
        auto* y = numeric(b, sb);
        auto* set_a = a.as_set();
        auto* set_b = b.as_set();

        if (op == BinaryOp::BitOr || op == BinaryOp::BitAnd)
        {
            if (set_a && set_b)
            {
                ObjectSet out;
                if (op == BinaryOp::BitOr)
                    std::set_union(set_a->begin(), set_a->end(), set_b->begin(), set_b->end(), std::back_inserter(out));
                else
                    std::set_intersection(set_a->begin(), set_a->end(), set_b->begin(), set_b->end(),
                                          std::back_inserter(out));
                charge(out.size(), pos);
                return out;
            }
            if (a.as_bool() && b.as_bool())
                return op == BinaryOp::BitOr ? (*a.as_bool() || *b.as_bool()) : (*a.as_bool() && *b.as_bool());
            bad_operands(op, a, b, pos);
        }

        if (x && y)
        {
            switch (op)
            {
                case BinaryOp::Add: return *x + *y;
                case BinaryOp::Sub: return *x - *y;
                case BinaryOp::Mul: return *x * *y;
                case BinaryOp::Div:
                    if (*y == 0.0)
                        raise(pos, fault::kZeroDivision, "division by zero");
                    return *x / *y;
                case BinaryOp::Mod:
                {
                    if (*y == 0.0)
                        raise(pos, fault::kZeroDivision, "modulo by zero");
                    double r = std::fmod(*x, *y);
                    if (r != 0.0 && ((r < 0) != (*y < 0)))
                        r += *y;
                    return r;
                }
                default: break;
            }
        }

        if (op == BinaryOp::Add)
        {
            if (a.as_string() && b.as_string())
            {
                auto out = *a.as_string() + *b.as_string();
                charge_string(out, pos);
                return out;
            }
            if (a.as_list() && b.as_list())
            {
                List out = *a.as_list();
                out.insert(out.end(), b.as_list()->begin(), b.as_list()->end());
                charge(out.size(), pos);
                return out;
            }
        }
        if (op == BinaryOp::Sub && set_a && set_b)
        {
            ObjectSet out;
            std::set_difference(set_a->begin(), set_a->end(), set_b->begin(), set_b->end(), std::back_inserter(out));
            charge(out.size(), pos);
            return out;
        }
        if (op == BinaryOp::Mul)
        {
            const Value* seq = (a.as_list() || a.as_string()) ? &a : ((b.as_list() || b.as_string()) ? &b : nullptr);
            const Value* count = seq == &a ? &b : &a;
            if (seq && numeric(*count, sa))
            {
                auto n = std::max(0LL, to_integer(*count, "repeat count", pos));
                if (auto* l = seq->as_list())
                {
                    charge(l->size() * static_cast<std::size_t>(n), pos);
                    List out;
                    for (long long k = 0; k < n; ++k)
                        out.insert(out.end(), l->begin(), l->end());
                    return out;
                }
                const auto& s = *seq->as_string();
                charge(s.size() * static_cast<std::size_t>(n) / 64, pos);
                std::string out;
                for (long long k = 0; k < n; ++k)
                    out += s;
                return out;
            }
        }
        bad_operands(op, a, b, pos);
    }

    [[noreturn]] static void bad_operands(BinaryOp op, const Value& a, const Value& b, SourcePos pos)
    {
        static const std::map<BinaryOp, const char*> kSymbols = {
            {BinaryOp::Add, "+"}, {BinaryOp::Sub, "-"},    {BinaryOp::Mul, "*"}, {BinaryOp::Div, "/"},
            {BinaryOp::Mod, "%"}, {BinaryOp::BitOr, "|"}, {BinaryOp::BitAnd, "&"},
        };
        raise(pos, fault::kTypeError, std::string("unsupported operand types for ") + kSymbols.at(op) + ": '"
                                          + type_name(a) + "' and '" + type_name(b) + "'");
    }

    std::vector<Value> iterate(const Value& v, SourcePos pos)
    {
        if (auto* l = v.as_list())
            return *l;
        if (auto* s = v.as_set())
        {
            std::vector<Value> out;
            out.reserve(s->size());
            for (auto i: *s)
                out.emplace_back(ObjectRef {i});
            return out;
        }
        if (auto* s = v.as_string())
        {
            std::vector<Value> out;
            for (char c: *s)
                out.emplace_back(std::string(1, c));
            return out;
        }
        raise(pos, fault::kTypeError, std::string("'") + type_name(v) + "' value is not iterable");
    }

    static std::string available_list()
    {
        std::string out = "available functions: ";
        bool first = true;
        for (const auto& [name, b]: builtins())
        {
            out += first ? "" : ", ";
            first = false;
            out += name;
        }
        return out;
    }

    static std::string param_list(const Builtin& b)
    {
        std::string out;
        for (std::size_t i = 0; i < b.params.size(); ++i)
            out += (i ? ", " : "") + std::string(b.params[i]);
        return out.empty() ? "(none)" : out;
    }

    // -- argument coercion -----------------------------------------------------

    std::size_t want_object(const Value& v, const char* fn, const char* param, SourcePos pos) const
    {
        if (auto* o = v.as_object())
            return o->index;
        std::string hint;
        if (v.as_set() || v.as_list())
            hint = "; iterate with a for loop to get individual objects";
        raise(pos, fault::kTypeError, std::string(fn) + "() argument '" + param + "' must be an object, got "
                                          + type_name(v) + hint);
    }

    ObjectSet want_object_set(const Value& v, const char* fn, const char* param, SourcePos pos) const
    {
        if (auto* s = v.as_set())
            return *s;
        if (auto* l = v.as_list())
        {
            ObjectSet out;
            for (const auto& item: *l)
            {
                auto* o = item.as_object();
                if (!o)
                    raise(pos, fault::kTypeError, std::string(fn) + "() argument '" + param
                                                      + "' must contain only objects, found " + type_name(item));
                out.push_back(o->index);
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        }
        std::string hint = v.as_object() ? "; wrap a single object as [obj]" : "";
        raise(pos, fault::kTypeError, std::string(fn) + "() argument '" + param + "' must be a set of objects, got "
                                          + type_name(v) + hint);
    }

    static std::string want_string(const Value& v, const char* fn, const char* param, SourcePos pos)
    {
        if (auto* s = v.as_string())
            return *s;
        raise(pos, fault::kTypeError,
              std::string(fn) + "() argument '" + param + "' must be a string, got " + type_name(v));
    }

    static std::optional<std::vector<std::string>> want_strings(const std::optional<Value>& v,
                                                                const char* fn,
                                                                const char* param,
                                                                SourcePos pos)
    {
        if (!v || v->is_none())
            return std::nullopt;
        auto* l = v->as_list();
        if (!l)
            raise(pos, fault::kTypeError,
                  std::string(fn) + "() argument '" + param + "' must be a list of strings, got " + type_name(*v));
        std::vector<std::string> out;
        for (const auto& item: *l)
        {
            auto* s = item.as_string();
            if (!s)
                raise(pos, fault::kTypeError, std::string(fn) + "() argument '" + param
                                                  + "' must contain only strings, found " + type_name(item));
            out.push_back(*s);
        }
        return out;
    }

    template<typename F>
    auto scene_api(SourcePos pos, F&& fn) -> decltype(fn())
    {
        api_call(pos);
        try
        {
            return fn();
        }
        catch (const Error& e)
        {
            raise(pos, std::string(kind_name(e.kind())).c_str(), e.what());
        }
    }

    static Value objects_to_value(const ObjectSet& set) { return set; }

    // -- builtins --------------------------------------------------------------

    Value b_scene(Args&, SourcePos pos)
    {
        auto out = scene_api(pos, [&] { return api_scene(_ctx); });
        charge(out.size(), pos);
        return out;
    }

    Value b_filter(Args& a, SourcePos pos)
    {
        auto objs = want_object_set(*a.slots[0], "filter", "object_set", pos);
        auto category = want_string(*a.slots[1], "filter", "category", pos);
        return scene_api(pos, [&] { return api_filter(_ctx, objs, category); });
    }

    Value b_relate(Args& a, SourcePos pos)
    {
        auto objs = want_object_set(*a.slots[0], "relate", "object_set", pos);
        auto ref = want_object(*a.slots[1], "relate", "reference_object", pos);
        auto rel = want_string(*a.slots[2], "relate", "relation", pos);
        charge(objs.size(), pos);
        return scene_api(pos, [&] { return api_relate(_ctx, objs, ref, std::string_view(rel)); });
    }

    Value b_relate_agent(Args& a, SourcePos pos)
    {
        auto objs = want_object_set(*a.slots[0], "relate_agent", "object_set", pos);
        auto rel = want_string(*a.slots[1], "relate_agent", "relation", pos);
        charge(objs.size(), pos);
        return scene_api(pos, [&] { return api_relate_agent(_ctx, objs, std::string_view(rel)); });
    }

    static Value strings_to_value(const std::vector<std::string>& items)
    {
        List out;
        for (const auto& s: items)
            out.emplace_back(s);
        return out;
    }

    Value b_query_relation(Args& a, SourcePos pos)
    {
        auto obj = want_object(*a.slots[0], "query_relation", "object", pos);
        auto ref = want_object(*a.slots[1], "query_relation", "reference_object", pos);
        auto cands = want_strings(a.slots[2], "query_relation", "candidate_relations", pos);
        return strings_to_value(scene_api(pos, [&] {
            return api_query_relation(_ctx, obj, ref, cands ? *cands : default_pair_candidates());
        }));
    }

    Value b_query_relation_agent(Args& a, SourcePos pos)
    {
        auto obj = want_object(*a.slots[0], "query_relation_agent", "object", pos);
        auto cands = want_strings(a.slots[1], "query_relation_agent", "candidate_relations", pos);
        return strings_to_value(scene_api(
            pos, [&] { return api_query_relation_agent(_ctx, obj, cands ? *cands : default_agent_candidates()); }));
    }

    Value b_query_attribute(Args& a, SourcePos pos)
    {
        auto obj = want_object(*a.slots[0], "query_attribute", "object", pos);
        auto type = want_string(*a.slots[1], "query_attribute", "attribute_type", pos);
        auto cands = want_strings(a.slots[2], "query_attribute", "candidate_attribute_values", pos);
        auto value = scene_api(pos, [&] {
            return api_query_attribute(_ctx, obj, type, cands ? *cands : std::vector<std::string> {});
        });
        if (auto* vec = std::get_if<std::vector<double>>(&value))
        {
            List out;
            for (double d: *vec)
                out.emplace_back(d);
            return out;
        }
        if (auto* d = std::get_if<double>(&value))
            return *d;
        return std::get<std::string>(value);
    }

    Value b_query_state(Args& a, SourcePos pos)
    {
        auto obj = want_object(*a.slots[0], "query_state", "object", pos);
        auto cands = want_strings(a.slots[1], "query_state", "candidate_states", pos);
        return scene_api(pos, [&] { return api_query_state(_ctx, obj, cands ? *cands : std::vector<std::string> {}); });
    }

    Value b_sort_by_distance(Args& a, SourcePos pos)
    {
        std::vector<std::size_t> order;
        const auto& v = *a.slots[0];
        if (auto* s = v.as_set())
            order = *s;
        else if (auto* l = v.as_list())
            for (const auto& item: *l)
                order.push_back(want_object(item, "sort_by_distance", "objects", pos));
        else
            raise(pos, fault::kTypeError,
                  std::string("sort_by_distance() argument 'objects' must be a set or list of objects, got ")
                      + type_name(v));
        charge(order.size(), pos);
        std::vector<std::pair<double, std::size_t>> keyed;
        for (auto i: order)
            keyed.emplace_back(_ctx.agent_distance(i), i);
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        List out;
        for (const auto& [d, i]: keyed)
            out.emplace_back(ObjectRef {i});
        return out;
    }

    Value b_len(Args& a, SourcePos pos)
    {
        const auto& v = *a.slots[0];
        if (auto* l = v.as_list())
            return static_cast<double>(l->size());
        if (auto* s = v.as_set())
            return static_cast<double>(s->size());
        if (auto* s = v.as_string())
            return static_cast<double>(s->size());
        raise(pos, fault::kTypeError, std::string("object of type '") + type_name(v) + "' has no len()");
    }

    Value b_print(Args& a, SourcePos pos)
    {
        std::string line;
        for (std::size_t i = 0; i < a.rest.size(); ++i)
        {
            if (i)
                line += ' ';
            line += display(a.rest[i], _ctx);
        }
        charge_string(line, pos);
        emit(line + "\n", pos);
        return {};
    }

    Value b_str(Args& a, SourcePos pos)
    {
        if (!a.slots[0])
            return std::string();
        auto out = display(*a.slots[0], _ctx);
        charge_string(out, pos);
        return out;
    }

    Value extremum(Args& a, SourcePos pos, const char* fn, bool want_max)
    {
        auto items = a.rest.size() == 1 ? iterate(a.rest[0], pos) : a.rest;
        if (items.empty())
            raise(pos, fault::kValueError, std::string(fn) + "() arg is an empty sequence");
        std::size_t best = 0;
        for (std::size_t i = 1; i < items.size(); ++i)
        {
            int c = compare(items[i], items[best], want_max ? ">" : "<", pos);
            if (want_max ? c > 0 : c < 0)
                best = i;
        }
        if (items.size() == 1)
            compare(items[0], items[0], want_max ? ">" : "<", pos);
        return items[best];
    }

    Value b_min(Args& a, SourcePos pos) { return extremum(a, pos, "min", false); }
    Value b_max(Args& a, SourcePos pos) { return extremum(a, pos, "max", true); }

    Value b_sum(Args& a, SourcePos pos)
    {
        double total = 0;
        for (const auto& item: iterate(*a.slots[0], pos))
        {
            double scratch = 0;
            auto* d = numeric(item, scratch);
            if (!d)
                raise(pos, fault::kTypeError, std::string("sum() can only add numbers, found ") + type_name(item));
            total += *d;
        }
        return total;
    }

    Value b_round(Args& a, SourcePos pos)
    {
        double scratch = 0;
        auto* d = numeric(*a.slots[0], scratch);
        if (!d)
            raise(pos, fault::kTypeError, std::string("round() needs a number, got ") + type_name(*a.slots[0]));
        long long digits = 0;
        if (a.slots[1] && !a.slots[1]->is_none())
            digits = std::clamp(to_integer(*a.slots[1], "ndigits", pos), -15LL, 15LL);
        // nearbyint in the default rounding mode sends ties to the even neighbour.
        double scale = std::pow(10.0, static_cast<double>(digits));
        double r = std::nearbyint(*d * scale) / scale;
        return std::isfinite(r) ? r : *d;
    }

    Value b_abs(Args& a, SourcePos pos)
    {
        double scratch = 0;
        auto* d = numeric(*a.slots[0], scratch);
        if (!d)
            raise(pos, fault::kTypeError, std::string("abs() needs a number, got ") + type_name(*a.slots[0]));
        return std::fabs(*d);
    }

    Value b_list(Args& a, SourcePos pos)
    {
        if (!a.slots[0])
            return List {};
        auto items = iterate(*a.slots[0], pos);
        charge(items.size(), pos);
        return List(std::move(items));
    }

    /// Sets hold scene objects; a set of plain values becomes a list with
    /// duplicates removed, keeping first occurrences.
    Value b_set(Args& a, SourcePos pos)
    {
        if (!a.slots[0])
            return ObjectSet {};
        if (auto* s = a.slots[0]->as_set())
            return *s;
        auto items = iterate(*a.slots[0], pos);
        charge(items.size(), pos);
        bool all_objects = std::all_of(items.begin(), items.end(), [](const Value& v) { return v.as_object(); });
        if (all_objects)
        {
            ObjectSet out;
            for (const auto& v: items)
                out.push_back(v.as_object()->index);
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        }
        List out;
        for (auto& v: items)
            if (std::none_of(out.begin(), out.end(), [&](const Value& seen) { return values_equal(seen, v); }))
                out.push_back(std::move(v));
        return out;
    }

    Value b_sorted(Args& a, SourcePos pos)
    {
        auto items = iterate(*a.slots[0], pos);
        charge(items.size(), pos);
        for (std::size_t i = 1; i < items.size(); ++i)
            compare(items[i - 1], items[i], "<", pos);
        if (items.size() == 1)
            compare(items[0], items[0], "<", pos);
        std::stable_sort(items.begin(), items.end(),
                         [&](const Value& x, const Value& y) { return compare(x, y, "<", pos) < 0; });
        return List(std::move(items));
    }

    const ApiContext& _ctx;
    Limits _limits;
    std::map<std::string, Value, std::less<>> _vars;
    std::string _out;
    std::size_t _steps = 0;
    std::size_t _api_calls = 0;
};

/// Runs a parsed program against a context; never throws for program faults.
inline ExecutionOutcome execute(const Program& program, const ApiContext& ctx, Limits limits = {})
{
    return Interpreter(ctx, limits).run(program);
}

/// Parses and runs source text. Syntax errors are reported as an outcome
/// error of kind SyntaxError.
inline ExecutionOutcome execute_source(std::string_view source, const ApiContext& ctx, Limits limits = {})
{
    try
    {
        return execute(parse(source), ctx, limits);
    }
    catch (const SyntaxError& e)
    {
        ExecutionOutcome out;
        out.error = RuntimeFault {fault::kSyntaxError, e.reason() + " (column " + std::to_string(e.column()) + ")",
                                  e.line()};
        return out;
    }
}

} // namespace tpc::dsl
