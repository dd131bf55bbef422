// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fixtures.hpp"

using namespace tpc;
using Catch::Matchers::WithinAbs;

namespace
{

ErrorKind load_error(const std::string& source)
{
    try
    {
        load_scene(source);
    }
    catch (const Error& e)
    {
        return e.kind();
    }
    FAIL("expected load_scene to throw");
    return ErrorKind::Io;
}

} // namespace

TEST_CASE("living room bundle loads")
{
    auto scene = testing::load_fixture_scene("living_room");
    REQUIRE(scene->scene_id == "living_room");
    REQUIRE(scene->objects.size() == 11);
    auto chair = scene->find("chair1");
    REQUIRE(chair);
    CHECK(scene->objects[*chair].category == "chair");
    CHECK(scene->objects[*chair].attributes.at("color") == "brown");
    CHECK_FALSE(scene->find("nothing"));
}

TEST_CASE("categories are normalized")
{
    auto scene = load_scene(R"({"scene_id": "s", "objects": [
        {"id": "a", "category": "  Coffee Table ", "centroid": [0, 0, 0], "lwh": [1, 1, 1]}]})");
    CHECK(scene.objects[0].category == "coffee table");
}

TEST_CASE("malformed bundles are rejected with their kind")
{
    CHECK(load_error("not json") == ErrorKind::MalformedBundle);
    CHECK(load_error("[]") == ErrorKind::MalformedBundle);
    CHECK(load_error(R"({"objects": []})") == ErrorKind::MalformedBundle);
    CHECK(load_error(R"({"scene_id": "s", "objects": [{"id": "a", "category": "x", "centroid": [0, 0], "lwh": [1, 1, 1]}]})")
          == ErrorKind::MalformedBundle);
    CHECK(load_error(R"({"scene_id": "s", "objects": [{"id": "a", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 0, 1]}]})")
          == ErrorKind::NonPositiveExtent);
    CHECK(load_error(R"({"scene_id": "s", "objects": [
        {"id": "a", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 1, 1]},
        {"id": "a", "category": "y", "centroid": [1, 0, 0], "lwh": [1, 1, 1]}]})")
          == ErrorKind::DuplicateObjectId);
    CHECK(load_error(R"({"scene_id": "s", "embedding_dim": 3, "objects": [
        {"id": "a", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 1, 1], "embedding": [1, 0]}]})")
          == ErrorKind::EmbeddingDimMismatch);
    CHECK(load_error(R"({"scene_id": "s", "objects": [
        {"id": "a", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 1, 1], "embedding": [1, 0]},
        {"id": "b", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 1, 1], "embedding": [1, 0, 0]}]})")
          == ErrorKind::EmbeddingDimMismatch);
    CHECK(load_error(R"({"scene_id": "s", "objects": [
        {"id": "a", "category": "x", "centroid": [0, 0, 0], "lwh": [1, 1, 1], "embedding": [2, 0]}]})")
          == ErrorKind::MalformedBundle);
}

TEST_CASE("duplicate id error names the id")
{
    try
    {
        load_scene_file(testing::fixture_path("scenes/duplicate_ids.json"));
        FAIL("expected throw");
    }
    catch (const Error& e)
    {
        CHECK(e.kind() == ErrorKind::DuplicateObjectId);
        CHECK(std::string(e.what()).find("c1") != std::string::npos);
    }
}

TEST_CASE("missing file is an Io error")
{
    try
    {
        load_scene_file(testing::fixture_path("scenes/absent.json"));
        FAIL("expected throw");
    }
    catch (const Error& e)
    {
        CHECK(e.kind() == ErrorKind::Io);
    }
}

TEST_CASE("serialize and load round-trip")
{
    auto original = *testing::load_fixture_scene("bedroom");
    auto again = load_scene(serialize_scene(original));
    CHECK(again == original);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial)
    {
        auto scene = testing::random_scene(rng);
        CHECK(load_scene(serialize_scene(scene)) == scene);
    }
}

TEST_CASE("situation loading")
{
    auto sit = testing::load_fixture_situation("living_room");
    CHECK(sit.heading.x == 0.0);
    CHECK(sit.heading.y == 1.0);
    CHECK(sit.description.find("coffee table behind me") != std::string::npos);

    auto again = load_situation(serialize_situation(sit));
    CHECK(again.heading.y == sit.heading.y);
    CHECK(again.description == sit.description);

    for (const char* bad: {R"({"position": [0, 0, 0], "heading": [1, 1]})",
                           R"({"position": [0, 0, 0], "heading": [0, 0]})",
                           R"({"position": [0], "heading": [1, 0]})",
                           R"({"heading": [1, 0]})"})
    {
        CAPTURE(bad);
        try
        {
            load_situation(bad);
            FAIL("expected throw");
        }
        catch (const Error& e)
        {
            CHECK(e.kind() == ErrorKind::InvalidSituation);
        }
    }
}

TEST_CASE("summary counts categories alphabetically")
{
    auto scene = testing::load_fixture_scene("living_room");
    CHECK(summarize_scene(*scene)
          == "I am in a room. Looking around me, I see some objects: 2 chair, 1 coffee table, 1 couch, 2 lamp, "
             "1 pillow, 2 table, 2 window.");
    CHECK(summarize_scene(Scene {}) == "I am in a room. Looking around me, I see no objects.");

    auto three = testing::make_scene({testing::make_object("a", "chair", {0, 0, 0}, {1, 1, 1}),
                                      testing::make_object("b", "chair", {1, 0, 0}, {1, 1, 1}),
                                      testing::make_object("c", "chair", {2, 0, 0}, {1, 1, 1})});
    CHECK(summarize_scene(three) == "I am in a room. Looking around me, I see some objects: 3 chair.");
}

TEST_CASE("summary ignores object order")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial)
    {
        auto scene = testing::random_scene(rng);
        auto shuffled = scene;
        std::shuffle(shuffled.objects.begin(), shuffled.objects.end(), rng);
        CHECK(summarize_scene(scene) == summarize_scene(shuffled));
    }
}

TEST_CASE("agent frame examples")
{
    auto sit = testing::make_situation({1, 1, 0}, 0.0);
    sit.heading = {1, 0};
    auto p = to_agent_frame({2, 1, 0.5}, sit);
    CHECK_THAT(p.x, WithinAbs(0.0, 1e-12));
    CHECK_THAT(p.y, WithinAbs(1.0, 1e-12));
    CHECK_THAT(p.z, WithinAbs(0.5, 1e-12));

    auto right = to_agent_frame({1, 0, 0}, sit);
    CHECK_THAT(right.x, WithinAbs(1.0, 1e-12));
    CHECK_THAT(right.y, WithinAbs(0.0, 1e-12));
}

TEST_CASE("agent frame is a rigid transform")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int trial = 0; trial < 500; ++trial)
    {
        auto sit = testing::random_situation(rng);
        Vec3 a {u(rng), u(rng), u(rng)};
        Vec3 b {u(rng), u(rng), u(rng)};
        auto fa = to_agent_frame(a, sit);
        auto fb = to_agent_frame(b, sit);
        CHECK_THAT((fa - fb).norm(), WithinAbs((a - b).norm(), 1e-9));

        auto origin = to_agent_frame(sit.position, sit);
        CHECK_THAT(origin.norm(), WithinAbs(0.0, 1e-12));

        Vec3 ahead {sit.position.x + sit.heading.x, sit.position.y + sit.heading.y, sit.position.z};
        auto f = to_agent_frame(ahead, sit);
        CHECK_THAT(f.x, WithinAbs(0.0, 1e-9));
        CHECK_THAT(f.y, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("questions file parsing")
{
    auto qs = load_questions(R"({"qid": 7, "scene_id": "s", "situation_ref": "r", "question": "Q?", "answers": ["a"], "question_types": ["what"]}

{"qid": "x", "question": "Other?"}
)");
    REQUIRE(qs.size() == 2);
    CHECK(qs[0].qid == "7");
    CHECK(qs[0].answers == std::vector<std::string> {"a"});
    CHECK(qs[1].scene_id.empty());

    CHECK_THROWS_AS(load_questions(R"({"qid": "x"})"), Error);
    CHECK_THROWS_AS(load_questions("{"), Error);
}
