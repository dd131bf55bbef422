// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <random>

#include "program_corpus.hpp"
#include "tpc/dsl/parser.hpp"
#include "tpc/dsl/unparse.hpp"

using namespace tpc::dsl;

namespace
{

SyntaxError syntax_error(const std::string& src)
{
    try
    {
        parse(src);
    }
    catch (const SyntaxError& e)
    {
        return e;
    }
    FAIL("expected a SyntaxError for: " << src);
    throw;
}

void check_round_trip(const std::string& src)
{
    CAPTURE(src);
    auto first = parse(src);
    auto text = unparse(first);
    CAPTURE(text);
    auto second = parse(text);
    CHECK(structurally_equal(first, second));
    CHECK(unparse(second) == text);
}

/// Random program text drawn from the supported grammar.
class ProgramGen
{
  public:
    explicit ProgramGen(std::uint64_t seed): _rng(seed) {}

    std::string program()
    {
        std::string out;
        int n = pick(1, 5);
        for (int i = 0; i < n; ++i)
            out += statement(0, 2);
        return out;
    }

  private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(_rng); }

    std::string name()
    {
        static const char* kNames[] = {"x", "objs", "total", "item", "n"};
        return kNames[pick(0, 4)];
    }

    std::string literal()
    {
        switch (pick(0, 6))
        {
            case 0: return std::to_string(pick(0, 100));
            case 1: return std::to_string(pick(0, 9)) + "." + std::to_string(pick(1, 9));
            case 2: return "\"chair\"";
            case 3: return "'it\\'s'";
            case 4: return "True";
            case 5: return "None";
            default: return "\"a\\nb\"";
        }
    }

    std::string expr(int depth)
    {
        if (depth <= 0)
            return pick(0, 1) ? literal() : name();
        switch (pick(0, 13))
        {
            case 0: return literal();
            case 1: return name();
            case 2:
            {
                static const char* kOps[] = {"+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "and", "or", "|", "&", "in", "not in"};
                return "(" + expr(depth - 1) + " " + kOps[pick(0, 16)] + " " + expr(depth - 1) + ")";
            }
            case 3: return "(" + expr(depth - 1) + ")";
            case 4: return pick(0, 1) ? "-" + expr(depth - 1) : "(not " + expr(depth - 1) + ")";
            case 5: return "len(" + expr(depth - 1) + ")";
            case 6: return "relate_agent(object_set=scene(), relation=\"left\")";
            case 7: return "[" + expr(depth - 1) + ", " + expr(depth - 1) + "]";
            case 8: return "[o.category for o in " + expr(depth - 1) + " if o.xyz]";
            case 9: return name() + "[" + expr(depth - 1) + "]";
            case 10: return name() + "[" + (pick(0, 1) ? expr(depth - 1) : "") + ":" + (pick(0, 1) ? expr(depth - 1) : "") + "]";
            case 11: return "f\"v={" + name() + " * " + std::to_string(pick(1, 9)) + "} d={" + name() + ":.2f} {{x}}\"";
            case 12: return "query_relation(" + name() + ", " + name() + ", candidate_relations=[\"left\", \"front\"])";
            default: return name() + ".category";
        }
    }

    std::string statement(int indent, int depth)
    {
        std::string pad(indent * 4, ' ');
        int kind = depth > 0 ? pick(0, 5) : pick(0, 2);
        switch (kind)
        {
            case 0: return pad + name() + " = " + expr(3) + "\n";
            case 1: return pad + "print(" + expr(2) + ", " + expr(1) + ")\n";
            case 2: return pad + name() + " += " + expr(2) + "\n";
            case 3: return pad + "for " + name() + " in " + expr(2) + ":\n" + block(indent + 1, depth - 1);
            case 4:
            {
                auto out = pad + "if " + expr(2) + ":\n" + block(indent + 1, depth - 1);
                if (pick(0, 1))
                    out += pad + "elif " + expr(2) + ":\n" + block(indent + 1, depth - 1);
                if (pick(0, 1))
                    out += pad + "else:\n" + block(indent + 1, depth - 1);
                return out;
            }
            default: return pad + "# comment\n" + pad + expr(2) + "\n";
        }
    }

    std::string block(int indent, int depth)
    {
        std::string out;
        int n = pick(1, 3);
        for (int i = 0; i < n; ++i)
            out += statement(indent, depth);
        return out;
    }

    std::mt19937_64 _rng;
};

} // namespace

TEST_CASE("corpus programs round-trip")
{
    for (const auto& src: testing::program_corpus())
        check_round_trip(src);
}

TEST_CASE("random programs round-trip")
{
    ProgramGen gen(61);
    for (int i = 0; i < 500; ++i)
        check_round_trip(gen.program());
}

TEST_CASE("operator precedence survives unparsing")
{
    auto p = parse("x = (1 + 2) * 3\ny = 1 + 2 * 3\nz = -(a - b)\nw = not (a and b)\n");
    auto text = unparse(p);
    CHECK(text.find("(1 + 2) * 3") != std::string::npos);
    CHECK(text.find("1 + 2 * 3") != std::string::npos);
    CHECK(text.find("-(a - b)") != std::string::npos);
    CHECK(text.find("not (a and b)") != std::string::npos);
}

TEST_CASE("syntax errors carry positions")
{
    auto e = syntax_error("x = 1\ny = (2 +\n");
    CHECK(e.line() >= 2);
    CHECK(std::string(e.what()).starts_with("SyntaxError at line"));

    auto m = syntax_error("objs = scene()\nobjs.sort()\n");
    CHECK(m.line() == 2);
    CHECK(m.column() == 6);
    CHECK(m.reason().find("method calls are not supported") != std::string::npos);
}

TEST_CASE("unsupported constructs are rejected")
{
    for (const char* src: {"import os\n", "def f():\n    pass\n", "while True:\n    x = 1\n", "lambda x: x\n",
                           "x = {1: 2}\n", "a, b = 1, 2\n", "x = 2 ** 3\n", "x = 7 // 2\n", "x = obj.id\n",
                           "x = 1 < 2 < 3\n", "x = a is None\n", "f = print\nf(1)(2)\n", "x = [i for i in a for j in b]\n",
                           "x = a[1:2:3]\n", "print(f\"{x!r}\")\n", "print(f\"{x:>10}\")\n", "print(f\"}\")\n",
                           "x = 'unterminated\n", "x = 1\n  y = 2\n", "for a, b in c:\n    print(a)\n",
                           "print(x=1, 2)\n", "print(x=1, x=2)\n", "else:\n    x = 1\n", "x = $\n"})
    {
        CAPTURE(src);
        CHECK_THROWS_AS(parse(src), SyntaxError);
    }
}

TEST_CASE("nesting depth is bounded")
{
    std::string deep = "x = " + std::string(150, '(') + "1" + std::string(150, ')') + "\n";
    auto e = syntax_error(deep);
    CHECK(e.reason().find("nested too deeply") != std::string::npos);

    std::string ok = "x = " + std::string(40, '(') + "1" + std::string(40, ')') + "\n";
    CHECK_NOTHROW(parse(ok));
}

TEST_CASE("empty and comment-only programs parse")
{
    CHECK(parse("").body.empty());
    CHECK(parse("# nothing here\n\n   \n").body.empty());
}
