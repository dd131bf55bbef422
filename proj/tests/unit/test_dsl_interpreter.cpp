// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "program_corpus.hpp"

using namespace tpc;
using namespace tpc::dsl;
using namespace tpc::dsl::fault;

namespace
{

const ApiContext& living_room()
{
    static const ApiContext ctx = testing::fixture_context("living_room");
    return ctx;
}

std::string run_ok(const std::string& src, const ApiContext& ctx = living_room())
{
    auto out = execute_source(src, ctx);
    INFO(src);
    if (out.error)
        FAIL(out.error->describe());
    return out.output;
}

std::string error_kind(const std::string& src, Limits limits = {})
{
    auto out = execute_source(src, living_room(), limits);
    INFO(src);
    REQUIRE(out.error);
    return out.error->kind;
}

const char* kDemoProgram = R"(# Get object set in the scene
object_set = scene()

# Identify objects behind me
object_behind_set = relate_agent(object_set=object_set, relation="behind")

# Sort the objects behind me by distance
object_behind_by_distance = sort_by_distance(object_behind_set)

# Determine what object is directly behind me
category_behind_by_distance = [obj.category for obj in object_behind_by_distance][:3]
print(f"Objects directly behind me: {category_behind_by_distance}")
)";

} // namespace

TEST_CASE("demo program output")
{
    CHECK(run_ok(kDemoProgram) == "Objects directly behind me: ['coffee table', 'couch', 'pillow']\n");
}

TEST_CASE("value formatting follows Python")
{
    CHECK(run_ok("print(1)") == "1\n");
    CHECK(run_ok("print(1, 2.5, 7 / 2, True, None, \"s\", [1, \"a\"], [])") == "1 2.5 3.5 True None s [1, 'a'] []\n");
    CHECK(run_ok("print(1 / 3)") == "0.3333333333333333\n");
    CHECK(run_ok("print([\"11 o'clock\"])") == "[\"11 o'clock\"]\n");
    CHECK(run_ok("print(round(2.5), round(3.5), round(3.14159, 2))") == "2 4 3.14\n");
    CHECK(run_ok("print(f\"{1 / 3:.3f}|{[1, 2]}|{None}|{{}}\")") == "0.333|[1, 2]|None|{}\n");
    CHECK(run_ok("print(str(1.0) + \"x\", \"ab\" * 2)") == "1x abab\n");
    CHECK(run_ok("print(list(scene())[0].xyz, list(scene())[0].category)") == "[0, 2, 0.45] chair\n");
}

TEST_CASE("lists, slices and comprehensions")
{
    CHECK(run_ok("x = [1, 2, 3]\nprint(x[-1], x[0:-1], x[5:], x[:])") == "3 [1, 2] [] [1, 2, 3]\n");
    CHECK(run_ok("print([n * n for n in [1, 2, 3, 4] if n % 2 == 0])") == "[4, 16]\n");
    CHECK(run_ok("print(sorted([3, 1, 2]), set([1, 1, 2]), sum([]), min([3, 1]), max(4, 9), abs(-2))")
          == "[1, 2, 3] [1, 2] 0 1 9 2\n");
    CHECK(run_ok("print(\"a\" in [\"a\"], 3 not in [1, 2])") == "True True\n");
}

TEST_CASE("control flow")
{
    CHECK(run_ok("x = 5\nif x < 0:\n    print(\"a\")\nelif x < 10:\n    print(\"b\")\nelse:\n    print(\"c\")\n") == "b\n");
    CHECK(run_ok("t = 0\nfor n in [1, 2, 3]:\n    t += n\nprint(t)\n") == "6\n");
    CHECK(run_ok("print(1 > 2 or 3)") == "3\n");
    CHECK(run_ok("print(0 and 1 / 0)") == "0\n");
}

TEST_CASE("scene builtins")
{
    CHECK(run_ok("print(len(relate_agent(scene(), \"behind\") & filter(scene(), \"couch\")))") == "1\n");
    CHECK(run_ok("print(len(filter(scene(), \"chair\") | filter(scene(), \"lamp\")))") == "4\n");
    CHECK(run_ok("print(query_relation_agent(list(scene())[1]))") == "['left', 'front', \"10 o'clock\"]\n");
    CHECK(run_ok("print([o.category for o in sort_by_distance(scene())][:2])") == "['coffee table', 'lamp']\n");
    CHECK(run_ok("c = filter(scene(), \"chair\")\nprint(query_relation(list(c)[1], list(c)[0]))") == "['left']\n");
    CHECK(run_ok("print(query_attribute(list(scene())[0], attribute_type=\"color\"))") == "brown\n");

    auto bedroom = testing::fixture_context("bedroom");
    CHECK(run_ok("print(query_state(list(filter(scene(), \"door\"))[0], [\"open\", \"closed\"]))", bedroom) == "closed\n");
    CHECK(run_ok("for b in filter(scene(), \"bed\"):\n    print([o.category for o in relate(scene(), b, \"on\")])", bedroom)
          == "['blanket']\n");
}

TEST_CASE("runtime error kinds")
{
    CHECK(error_kind("print(find(scene()))") == kNameError);
    CHECK(error_kind("x = y") == kNameError);
    CHECK(error_kind("print(int(\"3\"))") == kUnknownBuiltin);
    CHECK(error_kind("print(open(\"x\"))") == kUnknownBuiltin);
    CHECK(error_kind("print(len())") == kArityError);
    CHECK(error_kind("print(len(1))") == kTypeError);
    CHECK(error_kind("print(\"a\" + 1)") == kTypeError);
    CHECK(error_kind("print(\"x\" < 1)") == kTypeError);
    CHECK(error_kind("print([1][3])") == kIndexError);
    CHECK(error_kind("print(1 / 0)") == kZeroDivision);
    CHECK(error_kind("print(2 % 0)") == kZeroDivision);
    CHECK(error_kind("print(relate_agent(scene(), \"under\"))") == "UnknownRelation");
    CHECK(error_kind("print(query_attribute(list(scene())[0], \"weight\"))") == "UnknownAttributeType");
    CHECK(error_kind("print(1 if 2 else 3)") == kSyntaxError);
    CHECK(error_kind("x = scene()\nx.sort()") == kSyntaxError);
}

TEST_CASE("error descriptions name the line")
{
    auto out = execute_source("x = 1\ny = 2\nprint(find(x))\n", living_room());
    REQUIRE(out.error);
    CHECK(out.error->line == 3);
    CHECK(out.error->describe().starts_with("NameError at line 3: name 'find' is not defined"));
    CHECK(out.error->describe().find("sort_by_distance") != std::string::npos);
}

TEST_CASE("output before an error is kept")
{
    auto out = execute_source("print(\"first\")\nprint(1 / 0)\nprint(\"never\")\n", living_room());
    CHECK(out.output == "first\n");
    REQUIRE(out.error);
    CHECK(out.error->kind == kZeroDivision);
}

TEST_CASE("step budget stops unbounded work")
{
    std::string loops = "r = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]\n";
    for (int d = 0; d < 6; ++d)
        loops += std::string(d * 4, ' ') + "for i" + std::to_string(d) + " in r:\n";
    loops += std::string(24, ' ') + "x = 1\n";

    Limits limits;
    auto out = execute_source(loops, living_room(), limits);
    REQUIRE(out.error);
    CHECK(out.error->kind == kStepLimit);
    CHECK(out.steps <= limits.max_steps);

    limits.max_steps = 50;
    auto small = execute_source(loops, living_room(), limits);
    REQUIRE(small.error);
    CHECK(small.error->kind == kStepLimit);
    CHECK(small.steps <= 50);
}

TEST_CASE("api call budget")
{
    Limits limits;
    limits.max_api_calls = 5;
    CHECK(error_kind("for i in [1, 2, 3, 4, 5, 6, 7]:\n    s = scene()\n", limits) == kApiCallLimit);
    auto out = execute_source("for i in [1, 2, 3]:\n    s = scene()\n", living_room(), limits);
    CHECK(out.ok());
    CHECK(out.api_calls == 3);
}

TEST_CASE("stdout budget")
{
    Limits limits;
    limits.max_stdout_bytes = 64;
    auto out = execute_source("for i in [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]:\n    print(\"0123456789\")\n", living_room(), limits);
    REQUIRE(out.error);
    CHECK(out.error->kind == kOutputTruncated);
    CHECK(out.output.size() <= 64);
}

TEST_CASE("execution is deterministic and side-effect free")
{
    auto ctx = testing::fixture_context("living_room");
    auto before = serialize_scene(ctx.scene());
    for (const auto& src: testing::program_corpus())
    {
        auto a = execute_source(src, ctx);
        auto b = execute_source(src, ctx);
        CHECK(a.output == b.output);
        CHECK(a.steps == b.steps);
        CHECK(a.api_calls == b.api_calls);
        CHECK(a.ok());
    }
    CHECK(serialize_scene(ctx.scene()) == before);
}
