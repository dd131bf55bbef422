// SPDX-License-Identifier: Apache-2.0
//
// Object-centric scene model: object instances with axis-aligned boxes, the
// agent's situation, the on-disk bundle formats and the egocentric frame.
#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "text.hpp"

namespace tpc
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;

    [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
};

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
    friend Vec3 operator-(const Vec3& a, const Vec3& b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator+(const Vec3& a, const Vec3& b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

    [[nodiscard]] double norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }
};

/// Axis-aligned rectangle in the XY plane.
struct Rect
{
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    [[nodiscard]] double area() const noexcept { return (max_x - min_x) * (max_y - min_y); }
};

struct ObjectInstance
{
    std::string id;
    std::string category;
    Vec3 centroid;
    Vec3 lwh; ///< (length, width, height); length along x, width along y.
    std::map<std::string, std::string> attributes;
    std::map<std::string, std::string> states;
    std::optional<std::vector<double>> embedding;

    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;

    [[nodiscard]] Rect footprint() const noexcept
    {
        return {centroid.x - lwh.x / 2, centroid.y - lwh.y / 2, centroid.x + lwh.x / 2, centroid.y + lwh.y / 2};
    }
    [[nodiscard]] double bottom_z() const noexcept { return centroid.z - lwh.z / 2; }
    [[nodiscard]] double top_z() const noexcept { return centroid.z + lwh.z / 2; }
};

struct AgentSituation
{
    Vec3 position;
    Vec2 heading {0.0, 1.0};
    std::string description;

    friend bool operator==(const AgentSituation&, const AgentSituation&) = default;
};

struct Scene
{
    std::string scene_id;
    std::vector<ObjectInstance> objects;
    std::optional<std::size_t> embedding_dim;

    friend bool operator==(const Scene&, const Scene&) = default;

    /// Index of the object with the given id, if any.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const
    {
        for (std::size_t i = 0; i < objects.size(); ++i)
            if (objects[i].id == id)
                return i;
        return std::nullopt;
    }
};

/// One line of a questions file.
struct QuestionRecord
{
    std::string qid;
    std::string scene_id;
    std::string situation_ref;
    std::string question;
    std::vector<std::string> answers;
    std::vector<std::string> question_types;
};

inline constexpr double kUnitNormTolerance = 1e-6;

namespace detail
{

using json = nlohmann::json;

[[noreturn]] inline void malformed(const std::string& where, const std::string& what)
{
    throw Error(ErrorKind::MalformedBundle, where + ": " + what);
}

inline json parse_json(std::string_view source, const std::string& what)
{
    try
    {
        return json::parse(source);
    }
    catch (const json::parse_error& e)
    {
        malformed(what, std::string("invalid JSON: ") + e.what());
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        malformed(where, std::string("missing field '") + key + "'");
    return *it;
}

inline double as_number(const json& value, const std::string& where, const char* field)
{
    if (!value.is_number())
        malformed(where, std::string("field '") + field + "' must be a number");
    return value.get<double>();
}

inline std::vector<double> number_array(const json& value, const std::string& where, const char* field)
{
    if (!value.is_array())
        malformed(where, std::string("field '") + field + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v: value)
        out.push_back(as_number(v, where, field));
    return out;
}

inline Vec3 vec3_field(const json& obj, const char* field, const std::string& where)
{
    auto values = number_array(require(obj, field, where), where, field);
    if (values.size() != 3)
        malformed(where, std::string("field '") + field + "' must have 3 components");
    return {values[0], values[1], values[2]};
}

inline std::map<std::string, std::string> string_map(const json& obj, const char* field, const std::string& where)
{
    std::map<std::string, std::string> out;
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null())
        return out;
    if (!it->is_object())
        malformed(where, std::string("field '") + field + "' must be an object");
    for (const auto& [key, value]: it->items())
    {
        if (!value.is_string())
            malformed(where, std::string("field '") + field + "." + key + "' must be a string");
        out.emplace(text::normalize(key), std::string(text::trim(value.get<std::string>())));
    }
    return out;
}

inline double l2_norm(const std::vector<double>& v) noexcept
{
    double sum = 0.0;
    for (double x: v)
        sum += x * x;
    return std::sqrt(sum);
}

inline json vec3_json(const Vec3& v)
{
    return json::array({v.x, v.y, v.z});
}

} // namespace detail

/// Parses and validates a scene bundle. Categories are normalized to
/// lowercase/trimmed form; errors name the offending object id.
inline Scene load_scene(std::string_view source)
{
    using detail::json;
    auto root = detail::parse_json(source, "scene bundle");
    if (!root.is_object())
        detail::malformed("scene bundle", "top level must be an object");

    Scene scene;
    const auto& scene_id = detail::require(root, "scene_id", "scene bundle");
    if (!scene_id.is_string())
        detail::malformed("scene bundle", "field 'scene_id' must be a string");
    scene.scene_id = scene_id.get<std::string>();

    if (auto it = root.find("embedding_dim"); it != root.end() && !it->is_null())
    {
        if (!it->is_number_unsigned() || it->get<std::size_t>() == 0)
            detail::malformed("scene bundle", "field 'embedding_dim' must be a positive integer");
        scene.embedding_dim = it->get<std::size_t>();
    }

    const auto& objects = detail::require(root, "objects", "scene bundle");
    if (!objects.is_array())
        detail::malformed("scene bundle", "field 'objects' must be an array");

    std::set<std::string> seen;
    std::size_t position = 0;
    for (const auto& entry: objects)
    {
        auto where = "object #" + std::to_string(position++);
        if (!entry.is_object())
            detail::malformed(where, "must be an object");
        const auto& id = detail::require(entry, "id", where);
        if (!id.is_string() || id.get<std::string>().empty())
            detail::malformed(where, "field 'id' must be a non-empty string");

        ObjectInstance obj;
        obj.id = id.get<std::string>();
        where = "object '" + obj.id + "'";

        const auto& category = detail::require(entry, "category", where);
        if (!category.is_string())
            detail::malformed(where, "field 'category' must be a string");
        obj.category = text::normalize(category.get<std::string>());
        if (obj.category.empty())
            detail::malformed(where, "field 'category' must be non-empty");

        obj.centroid = detail::vec3_field(entry, "centroid", where);
        obj.lwh = detail::vec3_field(entry, "lwh", where);
        obj.attributes = detail::string_map(entry, "attributes", where);
        obj.states = detail::string_map(entry, "states", where);

        if (!seen.insert(obj.id).second)
            throw Error(ErrorKind::DuplicateObjectId, "duplicate object id '" + obj.id + "'");
        if (!(obj.lwh.x > 0 && obj.lwh.y > 0 && obj.lwh.z > 0))
            throw Error(ErrorKind::NonPositiveExtent, where + ": lwh components must all be > 0");

        if (auto it = entry.find("embedding"); it != entry.end() && !it->is_null())
        {
            auto values = detail::number_array(*it, where, "embedding");
            if (!scene.embedding_dim)
                scene.embedding_dim = values.size();
            if (values.size() != *scene.embedding_dim)
                throw Error(ErrorKind::EmbeddingDimMismatch,
                            where + ": embedding has dimension " + std::to_string(values.size()) + ", expected "
                                + std::to_string(*scene.embedding_dim));
            if (std::abs(detail::l2_norm(values) - 1.0) > kUnitNormTolerance)
                detail::malformed(where, "embedding is not unit-norm");
            obj.embedding = std::move(values);
        }
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

inline Scene load_scene_file(const std::string& path)
{
    return load_scene(text::read_file(path));
}

inline nlohmann::json scene_to_json(const Scene& scene)
{
    using detail::json;
    json root = json::object();
    root["scene_id"] = scene.scene_id;
    if (scene.embedding_dim)
        root["embedding_dim"] = *scene.embedding_dim;
    json objects = json::array();
    for (const auto& obj: scene.objects)
    {
        json entry = json::object();
        entry["id"] = obj.id;
        entry["category"] = obj.category;
        entry["centroid"] = detail::vec3_json(obj.centroid);
        entry["lwh"] = detail::vec3_json(obj.lwh);
        if (!obj.attributes.empty())
            entry["attributes"] = obj.attributes;
        if (!obj.states.empty())
            entry["states"] = obj.states;
        if (obj.embedding)
            entry["embedding"] = *obj.embedding;
        objects.push_back(std::move(entry));
    }
    root["objects"] = std::move(objects);
    return root;
}

inline std::string serialize_scene(const Scene& scene)
{
    return scene_to_json(scene).dump(2) + "\n";
}

inline AgentSituation load_situation(std::string_view source)
{
    using detail::json;
    auto root = detail::parse_json(source, "situation");
    if (!root.is_object())
        throw Error(ErrorKind::InvalidSituation, "situation: top level must be an object");

    AgentSituation situation;
    try
    {
        auto pos = detail::number_array(detail::require(root, "position", "situation"), "situation", "position");
        if (pos.size() != 2 && pos.size() != 3)
            detail::malformed("situation", "field 'position' must have 2 or 3 components");
        situation.position = {pos[0], pos[1], pos.size() == 3 ? pos[2] : 0.0};

        auto heading = detail::number_array(detail::require(root, "heading", "situation"), "situation", "heading");
        if (heading.size() != 2)
            detail::malformed("situation", "field 'heading' must have 2 components");
        situation.heading = {heading[0], heading[1]};
    }
    catch (const Error& e)
    {
        throw Error(ErrorKind::InvalidSituation, e.what());
    }

    if (auto it = root.find("description"); it != root.end() && it->is_string())
        situation.description = it->get<std::string>();

    if (std::abs(situation.heading.norm() - 1.0) > kUnitNormTolerance)
        throw Error(ErrorKind::InvalidSituation, "situation: heading must be a unit vector");
    return situation;
}

inline AgentSituation load_situation_file(const std::string& path)
{
    return load_situation(text::read_file(path));
}

inline std::string serialize_situation(const AgentSituation& situation)
{
    nlohmann::json root = nlohmann::json::object();
    root["position"] = detail::vec3_json(situation.position);
    root["heading"] = nlohmann::json::array({situation.heading.x, situation.heading.y});
    root["description"] = situation.description;
    return root.dump(2) + "\n";
}

/// Parses a questions file (one JSON record per line; blank lines ignored).
inline std::vector<QuestionRecord> load_questions(std::string_view source)
{
    std::vector<QuestionRecord> out;
    std::size_t lineno = 0;
    for (auto line: text::split_lines(source))
    {
        ++lineno;
        if (text::trim(line).empty())
            continue;
        auto where = "questions line " + std::to_string(lineno);
        auto rec = detail::parse_json(line, where);
        if (!rec.is_object())
            detail::malformed(where, "record must be an object");

        QuestionRecord q;
        auto str = [&](const char* key, bool required) -> std::string {
            auto it = rec.find(key);
            if (it == rec.end() || it->is_null())
            {
                if (required)
                    detail::malformed(where, std::string("missing field '") + key + "'");
                return {};
            }
            if (it->is_number_integer())
                return std::to_string(it->get<long long>());
            if (!it->is_string())
                detail::malformed(where, std::string("field '") + key + "' must be a string");
            return it->get<std::string>();
        };
        auto strings = [&](const char* key) {
            std::vector<std::string> values;
            auto it = rec.find(key);
            if (it == rec.end() || it->is_null())
                return values;
            if (!it->is_array())
                detail::malformed(where, std::string("field '") + key + "' must be an array of strings");
            for (const auto& v: *it)
            {
                if (!v.is_string())
                    detail::malformed(where, std::string("field '") + key + "' must be an array of strings");
                values.push_back(v.get<std::string>());
            }
            return values;
        };
        q.qid = str("qid", true);
        q.scene_id = str("scene_id", false);
        q.situation_ref = str("situation_ref", false);
        q.question = str("question", true);
        q.answers = strings("answers");
        q.question_types = strings("question_types");
        out.push_back(std::move(q));
    }
    return out;
}

/// Prompt-ready count of categories, alphabetical by category.
inline std::string summarize_scene(const Scene& scene)
{
    if (scene.objects.empty())
        return "I am in a room. Looking around me, I see no objects.";

    std::map<std::string, std::size_t> counts;
    for (const auto& obj: scene.objects)
        ++counts[obj.category];

    std::string out = "I am in a room. Looking around me, I see some objects: ";
    bool first = true;
    for (const auto& [category, count]: counts)
    {
        if (!first)
            out += ", ";
        first = false;
        out += std::to_string(count) + " " + category;
    }
    out += ".";
    return out;
}

/// Expresses a planar direction in the agent frame (forward = +y, right = +x).
inline Vec2 rotate_to_agent(const Vec2& direction, const AgentSituation& situation) noexcept
{
    const auto& h = situation.heading;
    return {direction.x * h.y - direction.y * h.x, direction.x * h.x + direction.y * h.y};
}

/// Rigid transform into the egocentric frame: translate by -position, rotate
/// about z so the heading maps to +y.
inline Vec3 to_agent_frame(const Vec3& point, const AgentSituation& situation) noexcept
{
    auto d = point - situation.position;
    auto planar = rotate_to_agent({d.x, d.y}, situation);
    return {planar.x, planar.y, d.z};
}

} // namespace tpc
