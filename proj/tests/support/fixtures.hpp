// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tpc/tpc.hpp"

namespace testing
{

inline std::string data_path(const std::string& rel)
{
    return std::string(TPC_DATA_DIR) + "/" + rel;
}

inline std::string fixture_path(const std::string& rel)
{
    return data_path("fixtures/" + rel);
}

inline std::shared_ptr<const tpc::Scene> load_fixture_scene(const std::string& name)
{
    return std::make_shared<const tpc::Scene>(tpc::load_scene_file(fixture_path("scenes/" + name + ".json")));
}

inline tpc::AgentSituation load_fixture_situation(const std::string& name)
{
    return tpc::load_situation_file(fixture_path("scenes/" + name + "_situation.json"));
}

inline std::shared_ptr<const tpc::LabelEmbeddings> fixture_label_embeddings()
{
    return std::make_shared<const tpc::LabelEmbeddings>(
        tpc::load_label_embeddings(tpc::text::read_file(fixture_path("label_embeddings.json"))));
}

inline tpc::ApiContext fixture_context(const std::string& name)
{
    return tpc::ApiContext(load_fixture_scene(name), load_fixture_situation(name), {}, fixture_label_embeddings());
}

inline tpc::ObjectInstance make_object(std::string id, std::string category, tpc::Vec3 centroid, tpc::Vec3 lwh)
{
    tpc::ObjectInstance o;
    o.id = std::move(id);
    o.category = std::move(category);
    o.centroid = centroid;
    o.lwh = lwh;
    return o;
}

inline tpc::Scene make_scene(std::vector<tpc::ObjectInstance> objects, std::string id = "synthetic")
{
    tpc::Scene s;
    s.scene_id = std::move(id);
    s.objects = std::move(objects);
    return s;
}

inline tpc::AgentSituation make_situation(tpc::Vec3 position, double heading_rad, std::string description = "")
{
    tpc::AgentSituation s;
    s.position = position;
    s.heading = {std::cos(heading_rad), std::sin(heading_rad)};
    s.description = std::move(description);
    return s;
}

/// Random room-scale scene. Some objects are stacked on earlier ones so the
/// vertical relations are exercised.
inline tpc::Scene random_scene(std::mt19937_64& rng, std::size_t max_objects = 20)
{
    static const char* kCategories[] = {"chair", "table", "lamp", "box", "book", "plant", "bed", "desk"};
    std::uniform_int_distribution<std::size_t> count(1, max_objects);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> size(0.1, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> cat(0, std::size(kCategories) - 1);

    std::vector<tpc::ObjectInstance> objs;
    auto n = count(rng);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto o = make_object("o" + std::to_string(i), kCategories[cat(rng)], {pos(rng), pos(rng), 0}, {size(rng), size(rng), size(rng)});
        o.centroid.z = o.lwh.z / 2;
        if (!objs.empty() && unit(rng) < 0.35)
        {
            const auto& base = objs[std::uniform_int_distribution<std::size_t>(0, objs.size() - 1)(rng)];
            o.lwh.x = base.lwh.x * (0.2 + 1.2 * unit(rng));
            o.lwh.y = base.lwh.y * (0.2 + 1.2 * unit(rng));
            o.centroid.x = base.centroid.x + (unit(rng) - 0.5) * base.lwh.x * 0.6;
            o.centroid.y = base.centroid.y + (unit(rng) - 0.5) * base.lwh.y * 0.6;
            double gap = unit(rng) < 0.6 ? (unit(rng) - 0.5) * 0.15 : unit(rng) * 1.5;
            o.centroid.z = base.top_z() + gap + o.lwh.z / 2;
        }
        objs.push_back(std::move(o));
    }
    return make_scene(std::move(objs));
}

inline tpc::AgentSituation random_situation(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    return make_situation({pos(rng), pos(rng), 0.0}, angle(rng));
}

inline std::vector<std::string> relation_vocabulary()
{
    return {"closest", "farthest", "within reach", "around", "on", "above", "below",
            "left", "right", "front", "back", "behind", "3 o'clock", "12 o'clock", "7 o'clock"};
}

} // namespace testing
