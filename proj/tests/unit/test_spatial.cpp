// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace tpc;
using K = RelationLabel::Kind;
using Catch::Matchers::WithinAbs;

namespace
{

std::vector<std::string> names(const std::vector<RelationLabel>& labels)
{
    std::vector<std::string> out;
    for (const auto& l: labels)
        out.push_back(l.to_string());
    return out;
}

Vec2 polar(double deg)
{
    double r = deg * std::numbers::pi / 180.0;
    return {std::sin(r), std::cos(r)};
}

} // namespace

TEST_CASE("relation vocabulary parsing")
{
    CHECK(parse_relation("behind") == RelationLabel(K::Back));
    CHECK(parse_relation(" Within Reach ") == RelationLabel(K::WithinReach));
    CHECK(parse_relation("3 o'clock") == RelationLabel::oclock(3));
    CHECK(parse_relation("12 o'clock").hour() == 12);
    for (const char* bad: {"under", "0 o'clock", "13 o'clock", "03 o'clock", "o'clock", ""})
    {
        CAPTURE(bad);
        CHECK_FALSE(try_parse_relation(bad));
    }
    try
    {
        parse_relation("beneath");
        FAIL("expected throw");
    }
    catch (const Error& e)
    {
        CHECK(e.kind() == ErrorKind::UnknownRelation);
        CHECK(std::string(e.what()).find("within reach") != std::string::npos);
    }
    for (const auto& label: testing::relation_vocabulary())
        CHECK(parse_relation(parse_relation(label).to_string()) == parse_relation(label));
}

TEST_CASE("distance and footprint overlap")
{
    CHECK_THAT(pairwise_distance(Vec3 {0, 0, 0}, Vec3 {3, 4, 0}), WithinAbs(5.0, 1e-12));
    Rect a {0, 0, 1, 1};
    Rect b {0.5, 0, 1.5, 1};
    CHECK_THAT(iou_2d(a, b), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK(iou_2d(a, Rect {2, 2, 3, 3}) == 0.0);
    CHECK_THAT(iou_2d(a, a), WithinAbs(1.0, 1e-12));
}

TEST_CASE("extremal selection with margin")
{
    std::vector<double> d {1.0, 1.05, 3.0};
    CHECK_FALSE(extremal_index(d, Extremum::Closest, 0.1));
    CHECK(extremal_index(d, Extremum::Closest, 0.0) == 0u);
    CHECK(extremal_index(d, Extremum::Farthest, 0.1) == 2u);
    std::vector<double> one {7.0};
    CHECK(extremal_index(one, Extremum::Farthest, 0.1) == 0u);
    std::vector<double> none;
    CHECK_THROWS_AS(extremal_index(none, Extremum::Closest, 0.1), Error);
}

TEST_CASE("extremal agrees with linear scan")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 10);
    std::uniform_int_distribution<int> n(1, 12);
    for (int trial = 0; trial < 2000; ++trial)
    {
        std::vector<double> d(n(rng));
        for (auto& x: d)
            x = u(rng);
        for (double eps: {0.0, 0.1, 1.0})
        {
            auto c = extremal_index(d, Extremum::Closest, eps);
            auto f = extremal_index(d, Extremum::Farthest, eps);
            CHECK((c ? static_cast<int>(*c) : -1) == oracle::extremal(d, true, eps));
            CHECK((f ? static_cast<int>(*f) : -1) == oracle::extremal(d, false, eps));
            if (d.size() >= 3 && eps == 0.0 && c && f)
                CHECK(*c != *f);
        }
    }
}

TEST_CASE("proximity thresholds are strict")
{
    RelationConfig cfg;
    CHECK(names(proximity_labels(0.5, cfg)) == std::vector<std::string> {"within reach", "around"});
    CHECK(names(proximity_labels(1.0, cfg)) == std::vector<std::string> {"around"});
    CHECK(names(proximity_labels(2.9, cfg)) == std::vector<std::string> {"around"});
    CHECK(proximity_labels(3.0, cfg).empty());
}

TEST_CASE("vertical relations")
{
    RelationConfig cfg;
    auto table = testing::make_object("t", "table", {0, 0, 0.375}, {1, 1, 0.75});
    auto book = testing::make_object("b", "book", {0, 0, 0.785}, {0.6, 0.6, 0.05});
    auto lamp_high = testing::make_object("l", "lamp", {0, 0, 2.0}, {0.8, 0.8, 0.2});
    auto far = testing::make_object("f", "box", {5, 5, 0.2}, {0.4, 0.4, 0.4});

    CHECK(vertical_relation(book, table, cfg) == RelationLabel(K::On));
    CHECK(vertical_relation(lamp_high, table, cfg) == RelationLabel(K::Above));
    CHECK(vertical_relation(table, lamp_high, cfg) == RelationLabel(K::Below));
    CHECK_FALSE(vertical_relation(far, table, cfg));

    auto tiny = testing::make_object("s", "coin", {0, 0, 0.76}, {0.1, 0.1, 0.02});
    CHECK_FALSE(vertical_relation(tiny, table, cfg));

    auto huge = testing::make_object("h", "sheet", {0, 0, 0.76}, {1.4, 1.4, 0.02});
    CHECK(vertical_relation(huge, table, cfg) != RelationLabel(K::On));
}

TEST_CASE("vertical relations agree with box oracle and are antisymmetric")
{
    RelationConfig cfg;
    std::mt19937_64 rng(17);
    int on_seen = 0, above_seen = 0;
    for (int trial = 0; trial < 300; ++trial)
    {
        auto scene = testing::random_scene(rng, 12);
        for (const auto& a: scene.objects)
            for (const auto& b: scene.objects)
            {
                if (&a == &b)
                    continue;
                auto got = vertical_relation(a, b, cfg);
                auto want = oracle::vertical(oracle::box_of(a), oracle::box_of(b), cfg);
                CHECK((got ? got->to_string() : std::string()) == want);
                on_seen += want == "on";
                above_seen += want == "above";

                auto back = vertical_relation(b, a, cfg);
                if (got == RelationLabel(K::Above))
                    CHECK(back == RelationLabel(K::Below));
                if (got == RelationLabel(K::Below))
                    CHECK((back == RelationLabel(K::Above) || back == RelationLabel(K::On)));
            }
    }
    CHECK(on_seen > 0);
    CHECK(above_seen > 0);
}

TEST_CASE("allocentric sectors")
{
    RelationConfig cfg;
    CHECK(names(allocentric_labels({-1, 1}, cfg)) == std::vector<std::string> {"left", "front"});
    CHECK(names(allocentric_labels({0, -1}, cfg)) == std::vector<std::string> {"back"});
    CHECK(names(allocentric_labels({3, 0.2}, cfg)) == std::vector<std::string> {"right"});
    CHECK_THROWS_AS(allocentric_labels({0, 0}, cfg), Error);

    for (double deg = 0; deg < 360; deg += 0.5)
        CHECK_FALSE(allocentric_labels(polar(deg), cfg).empty());
}

TEST_CASE("opposite directions get opposite sectors")
{
    RelationConfig cfg;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-5, 5);
    auto opposite = [](K k) {
        switch (k)
        {
            case K::Left: return K::Right;
            case K::Right: return K::Left;
            case K::Front: return K::Back;
            default: return K::Front;
        }
    };
    for (int trial = 0; trial < 1000; ++trial)
    {
        Vec2 d {u(rng), u(rng)};
        auto fwd = allocentric_labels(d, cfg);
        auto rev = allocentric_labels({-d.x, -d.y}, cfg);
        REQUIRE(fwd.size() == rev.size());
        for (const auto& l: fwd)
            CHECK(std::find(rev.begin(), rev.end(), RelationLabel(opposite(l.kind()))) != rev.end());
        for (const char* side: {"left", "right", "front", "back"})
        {
            bool want = oracle::sector(d.x, d.y, side, cfg.sector_half_width);
            bool got = std::find(fwd.begin(), fwd.end(), parse_relation(side)) != fwd.end();
            CHECK(got == want);
        }
    }
}

TEST_CASE("clock-face bearing")
{
    CHECK(oclock_label({0, 1}).to_string() == "12 o'clock");
    CHECK(oclock_label({1, 0}).to_string() == "3 o'clock");
    CHECK(oclock_label({0, -2}).to_string() == "6 o'clock");
    CHECK(oclock_label({-1, 0}).to_string() == "9 o'clock");
    CHECK(oclock_label(polar(-20)).to_string() == "11 o'clock");
    CHECK(oclock_label(polar(14)).to_string() == "12 o'clock");
    CHECK(oclock_label(polar(16)).to_string() == "1 o'clock");
    CHECK_THROWS_AS(oclock_label({0, 0}), Error);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 2000; ++trial)
    {
        Vec2 d {u(rng), u(rng)};
        CHECK(oclock_label(d).hour() == oracle::clock_hour(d.x, d.y));
    }
}

TEST_CASE("labels are invariant under a joint rotation of direction and heading")
{
    RelationConfig cfg;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5, 5);
    std::uniform_real_distribution<double> ang(-3.1, 3.1);
    for (int trial = 0; trial < 1000; ++trial)
    {
        Vec2 d {u(rng), u(rng)};
        auto sit = testing::make_situation({0, 0, 0}, ang(rng));
        double phi = ang(rng);
        double c = std::cos(phi), s = std::sin(phi);
        auto turned = sit;
        turned.heading = {c * sit.heading.x - s * sit.heading.y, s * sit.heading.x + c * sit.heading.y};
        Vec2 rd {c * d.x - s * d.y, s * d.x + c * d.y};

        auto a = rotate_to_agent(d, sit);
        auto b = rotate_to_agent(rd, turned);
        CHECK_THAT(a.x, WithinAbs(b.x, 1e-9));
        CHECK_THAT(a.y, WithinAbs(b.y, 1e-9));
    }
}

TEST_CASE("relation config validation")
{
    RelationConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = [](auto mutate) {
        RelationConfig c;
        mutate(c);
        try
        {
            c.validate();
        }
        catch (const Error& e)
        {
            return e.kind() == ErrorKind::InvalidConfig;
        }
        return false;
    };
    CHECK(bad([](auto& c) { c.epsilon = -1; }));
    CHECK(bad([](auto& c) { c.min_iou = 1.5; }));
    CHECK(bad([](auto& c) { c.min_on_ratio = 0; }));
    CHECK(bad([](auto& c) { c.sector_half_width = 90; }));
    CHECK(bad([](auto& c) { c.wr_dist = std::nan(""); }));
}
