// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "../scene_api.hpp"
#include "../text.hpp"

namespace tpc::dsl
{

struct Value;
using List = std::vector<Value>;

struct ObjectRef
{
    std::size_t index = 0;
    bool operator==(const ObjectRef&) const = default;
};

/// Runtime values. Lists and sets are immutable once built, so they are
/// shared rather than copied.
struct Value
{
    using Node = std::variant<std::monostate,
                              bool,
                              double,
                              std::string,
                              ObjectRef,
                              std::shared_ptr<const List>,
                              std::shared_ptr<const ObjectSet>>;
    Node node;

    Value() = default;
    Value(bool b): node(b) {}
    Value(double d): node(d) {}
    Value(std::string s): node(std::move(s)) {}
    Value(const char* s): node(std::string(s)) {}
    Value(ObjectRef o): node(o) {}
    Value(List items): node(std::make_shared<const List>(std::move(items))) {}
    Value(ObjectSet set): node(std::make_shared<const ObjectSet>(std::move(set))) {}

    [[nodiscard]] bool is_none() const noexcept { return std::holds_alternative<std::monostate>(node); }
    [[nodiscard]] const bool* as_bool() const noexcept { return std::get_if<bool>(&node); }
    [[nodiscard]] const double* as_number() const noexcept { return std::get_if<double>(&node); }
    [[nodiscard]] const std::string* as_string() const noexcept { return std::get_if<std::string>(&node); }
    [[nodiscard]] const ObjectRef* as_object() const noexcept { return std::get_if<ObjectRef>(&node); }
    [[nodiscard]] const List* as_list() const noexcept
    {
        auto* p = std::get_if<std::shared_ptr<const List>>(&node);
        return p ? p->get() : nullptr;
    }
    [[nodiscard]] const ObjectSet* as_set() const noexcept
    {
        auto* p = std::get_if<std::shared_ptr<const ObjectSet>>(&node);
        return p ? p->get() : nullptr;
    }
};

inline const char* type_name(const Value& v) noexcept
{
    switch (v.node.index())
    {
        case 0: return "NoneType";
        case 1: return "bool";
        case 2: return "number";
        case 3: return "str";
        case 4: return "object";
        case 5: return "list";
        default: return "set";
    }
}

/// Integral values print without a fractional part; others use the shortest
/// round-trip form.
inline std::string format_number(double d)
{
    if (std::isfinite(d) && d == std::trunc(d) && std::fabs(d) < 1e16)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", d);
        std::string s = buf;
        return s == "-0" ? "0" : s;
    }
    if (std::isnan(d))
        return "nan";
    if (std::isinf(d))
        return d > 0 ? "inf" : "-inf";
    return text::format_double(d);
}

inline std::string format_fixed(double d, int decimals)
{
    decimals = std::clamp(decimals, 0, 60);
    std::vector<char> buf(static_cast<std::size_t>(decimals) + 64);
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, d);
    return buf.data();
}

inline std::string python_quote(const std::string& s)
{
    char q = s.find('\'') != std::string::npos && s.find('"') == std::string::npos ? '"' : '\'';
    std::string out(1, q);
    for (char c: s)
    {
        if (c == '\\')
            out += "\\\\";
        else if (c == '\n')
            out += "\\n";
        else if (c == q)
            out += std::string("\\") + c;
        else
            out += c;
    }
    return out + q;
}

inline std::string repr(const Value& v, const ApiContext& ctx);

inline std::string object_repr(ObjectRef o, const ApiContext& ctx)
{
    const auto& obj = ctx.object(o.index);
    return "<" + obj.category + " " + obj.id + ">";
}

/// str(): strings are bare, containers show their elements' repr.
inline std::string display(const Value& v, const ApiContext& ctx)
{
    if (auto* s = v.as_string())
        return *s;
    return repr(v, ctx);
}

inline std::string repr(const Value& v, const ApiContext& ctx)
{
    if (v.is_none())
        return "None";
    if (auto* b = v.as_bool())
        return *b ? "True" : "False";
    if (auto* d = v.as_number())
        return format_number(*d);
    if (auto* s = v.as_string())
        return python_quote(*s);
    if (auto* o = v.as_object())
        return object_repr(*o, ctx);
    if (auto* l = v.as_list())
    {
        std::string out = "[";
        for (std::size_t i = 0; i < l->size(); ++i)
        {
            if (i)
                out += ", ";
            out += repr((*l)[i], ctx);
        }
        return out + "]";
    }
    const auto& set = *v.as_set();
    if (set.empty())
        return "set()";
    std::string out = "{";
    for (std::size_t i = 0; i < set.size(); ++i)
    {
        if (i)
            out += ", ";
        out += object_repr({set[i]}, ctx);
    }
    return out + "}";
}

inline bool truthy(const Value& v) noexcept
{
    if (v.is_none())
        return false;
    if (auto* b = v.as_bool())
        return *b;
    if (auto* d = v.as_number())
        return *d != 0.0;
    if (auto* s = v.as_string())
        return !s->empty();
    if (v.as_object())
        return true;
    if (auto* l = v.as_list())
        return !l->empty();
    return !v.as_set()->empty();
}

/// Numeric view of bools and numbers, as in Python.
inline const double* numeric(const Value& v, double& scratch) noexcept
{
    if (auto* d = v.as_number())
        return d;
    if (auto* b = v.as_bool())
    {
        scratch = *b ? 1.0 : 0.0;
        return &scratch;
    }
    return nullptr;
}

inline bool values_equal(const Value& a, const Value& b)
{
    double sa = 0, sb = 0;
    auto* na = numeric(a, sa);
    auto* nb = numeric(b, sb);
    if (na && nb)
        return *na == *nb;
    if (a.node.index() != b.node.index())
        return false;
    if (a.is_none())
        return true;
    if (auto* s = a.as_string())
        return *s == *b.as_string();
    if (auto* o = a.as_object())
        return *o == *b.as_object();
    if (auto* l = a.as_list())
    {
        const auto& r = *b.as_list();
        if (l->size() != r.size())
            return false;
        for (std::size_t i = 0; i < l->size(); ++i)
            if (!values_equal((*l)[i], r[i]))
                return false;
        return true;
    }
    return *a.as_set() == *b.as_set();
}

} // namespace tpc::dsl
