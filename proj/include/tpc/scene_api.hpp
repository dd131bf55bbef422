// SPDX-License-Identifier: Apache-2.0
//
// The callable scene operations exposed to generated programs, bound to one
// immutable (scene, situation, relation config, embeddings) context.
#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "classify.hpp"
#include "error.hpp"
#include "scene.hpp"
#include "spatial.hpp"
#include "text.hpp"

namespace tpc
{

/// Indices into Scene::objects, ascending (bundle order), no duplicates.
using ObjectSet = std::vector<std::size_t>;

class ApiContext
{
  public:
    ApiContext(std::shared_ptr<const Scene> scene,
               AgentSituation situation,
               RelationConfig cfg = {},
               std::shared_ptr<const LabelEmbeddings> label_embeddings = nullptr,
               std::shared_ptr<const KnnReferences> knn_references = nullptr):
        _scene(std::move(scene)),
        _situation(std::move(situation)),
        _cfg(cfg),
        _labels(std::move(label_embeddings)),
        _knn(std::move(knn_references))
    {
        _cfg.validate();
        auto dim = _scene->embedding_dim;
        auto check = [&](std::size_t size, const std::string& what) {
            if (dim && size != *dim)
                throw Error(ErrorKind::DimensionMismatch,
                            what + " has dimension " + std::to_string(size) + ", scene uses " + std::to_string(*dim));
        };
        if (_labels)
            for (const auto& [label, vec]: *_labels)
                check(vec.size(), "label embedding '" + label + "'");
        if (_knn)
            for (const auto& [group, refs]: *_knn)
                for (const auto& ref: refs)
                    check(ref.vector.size(), "knn reference '" + ref.label + "' in group '" + group + "'");
    }

    [[nodiscard]] const Scene& scene() const noexcept { return *_scene; }
    [[nodiscard]] const AgentSituation& situation() const noexcept { return _situation; }
    [[nodiscard]] const RelationConfig& config() const noexcept { return _cfg; }
    [[nodiscard]] const LabelEmbeddings* label_embeddings() const noexcept { return _labels.get(); }
    [[nodiscard]] const KnnReferences* knn_references() const noexcept { return _knn.get(); }

    [[nodiscard]] const ObjectInstance& object(std::size_t index) const { return _scene->objects.at(index); }

    [[nodiscard]] double agent_distance(std::size_t index) const
    {
        return pairwise_distance(_situation.position, object(index).centroid);
    }

    /// Planar direction from `from` to `to`, expressed in the agent frame.
    [[nodiscard]] Vec2 agent_direction(const Vec3& from, const Vec3& to) const noexcept
    {
        return rotate_to_agent({to.x - from.x, to.y - from.y}, _situation);
    }

  private:
    std::shared_ptr<const Scene> _scene;
    AgentSituation _situation;
    RelationConfig _cfg;
    std::shared_ptr<const LabelEmbeddings> _labels;
    std::shared_ptr<const KnnReferences> _knn;
};

using AttributeValue = std::variant<std::vector<double>, double, std::string>;

inline constexpr std::string_view kAttributeTypes[] = {"lwh", "distance", "color", "shape", "material"};

namespace detail
{

inline bool holds_allocentric(const ApiContext& ctx, const Vec3& from, const Vec3& to, RelationLabel relation)
{
    auto dir = ctx.agent_direction(from, to);
    if (dir.x == 0.0 && dir.y == 0.0)
        return false;
    if (relation.kind() == RelationLabel::Kind::OClock)
        return oclock_label(dir) == relation;
    auto labels = allocentric_labels(dir, ctx.config());
    return std::find(labels.begin(), labels.end(), relation) != labels.end();
}

inline bool holds_proximity(double distance, const RelationConfig& cfg, RelationLabel relation)
{
    auto labels = proximity_labels(distance, cfg);
    return std::find(labels.begin(), labels.end(), relation) != labels.end();
}

inline Extremum extremum_of(RelationLabel relation)
{
    return relation.kind() == RelationLabel::Kind::Closest ? Extremum::Closest : Extremum::Farthest;
}

/// Resolves the candidate list against the label embeddings, preserving order.
inline std::vector<LabeledVector> candidate_vectors(const ApiContext& ctx, const std::vector<std::string>& candidates)
{
    const auto* labels = ctx.label_embeddings();
    std::vector<LabeledVector> out;
    for (const auto& c: candidates)
    {
        auto key = text::normalize(c);
        auto it = labels ? labels->find(key) : LabelEmbeddings::const_iterator {};
        if (!labels || it == labels->end())
            throw Error(ErrorKind::UnknownLabel, "no label embedding for candidate '" + c + "'");
        out.push_back({c, it->second});
    }
    return out;
}

inline std::optional<std::string> pick_annotation(const std::string& annotation, const std::vector<std::string>& candidates)
{
    if (annotation.empty())
        return std::nullopt;
    if (candidates.empty())
        return annotation;
    for (const auto& c: candidates)
        if (text::iequals(text::trim(c), annotation))
            return c;
    return std::nullopt;
}

} // namespace detail

inline ObjectSet api_scene(const ApiContext& ctx)
{
    ObjectSet out(ctx.scene().objects.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = i;
    return out;
}

inline ObjectSet api_filter(const ApiContext& ctx, const ObjectSet& objs, std::string_view category)
{
    auto wanted = text::normalize(category);
    ObjectSet out;
    for (auto i: objs)
        if (ctx.object(i).category == wanted)
            out.push_back(i);
    return out;
}

/// Members of `objs` (excluding the reference) standing in `relation` to the
/// reference object as anchor.
inline ObjectSet api_relate(const ApiContext& ctx, const ObjectSet& objs, std::size_t reference, RelationLabel relation)
{
    const auto& ref = ctx.object(reference);
    ObjectSet others;
    for (auto i: objs)
        if (i != reference)
            others.push_back(i);

    ObjectSet out;
    if (others.empty())
        return out;

    if (relation.is_extremal())
    {
        std::vector<double> distances;
        for (auto i: others)
            distances.push_back(pairwise_distance(ref, ctx.object(i)));
        if (auto pick = extremal_index(distances, detail::extremum_of(relation), ctx.config().epsilon))
            out.push_back(others[*pick]);
        return out;
    }

    for (auto i: others)
    {
        const auto& cand = ctx.object(i);
        bool holds = false;
        if (relation.is_proximity())
            holds = detail::holds_proximity(pairwise_distance(cand, ref), ctx.config(), relation);
        else if (relation.is_vertical())
            holds = vertical_relation(cand, ref, ctx.config()) == relation;
        else
            holds = detail::holds_allocentric(ctx, ref.centroid, cand.centroid, relation);
        if (holds)
            out.push_back(i);
    }
    return out;
}

inline ObjectSet api_relate(const ApiContext& ctx, const ObjectSet& objs, std::size_t reference, std::string_view relation)
{
    return api_relate(ctx, objs, reference, parse_relation(relation));
}

/// Members of `objs` standing in `relation` to the agent.
inline ObjectSet api_relate_agent(const ApiContext& ctx, const ObjectSet& objs, RelationLabel relation)
{
    if (relation.is_vertical())
        throw Error(ErrorKind::UnknownRelation,
                    "relation '" + relation.to_string()
                        + "' is not defined relative to the agent; use one of left, right, front, back, behind, "
                          "closest, farthest, within reach, around, <1-12> o'clock");

    ObjectSet out;
    if (objs.empty())
        return out;
    const auto& agent = ctx.situation().position;

    if (relation.is_extremal())
    {
        std::vector<double> distances;
        for (auto i: objs)
            distances.push_back(ctx.agent_distance(i));
        if (auto pick = extremal_index(distances, detail::extremum_of(relation), ctx.config().epsilon))
            out.push_back(objs[*pick]);
        return out;
    }

    for (auto i: objs)
    {
        bool holds = relation.is_proximity()
                         ? detail::holds_proximity(ctx.agent_distance(i), ctx.config(), relation)
                         : detail::holds_allocentric(ctx, agent, ctx.object(i).centroid, relation);
        if (holds)
            out.push_back(i);
    }
    return out;
}

inline ObjectSet api_relate_agent(const ApiContext& ctx, const ObjectSet& objs, std::string_view relation)
{
    return api_relate_agent(ctx, objs, parse_relation(relation));
}

inline const std::vector<std::string>& default_pair_candidates()
{
    static const std::vector<std::string> kDefault {"left", "right", "front", "back"};
    return kDefault;
}

inline const std::vector<std::string>& default_agent_candidates()
{
    static const std::vector<std::string> kDefault {"left", "right", "front", "back", "o'clock"};
    return kDefault;
}

/// Allocentric labels of `object` relative to `reference`, restricted to the
/// candidates and reported in candidate order using the candidates' spelling.
inline std::vector<std::string> api_query_relation(const ApiContext& ctx,
                                                   std::size_t object,
                                                   std::size_t reference,
                                                   const std::vector<std::string>& candidates = default_pair_candidates())
{
    std::vector<RelationLabel> parsed;
    for (const auto& c: candidates)
        parsed.push_back(parse_relation(c));

    std::vector<std::string> out;
    if (object == reference)
        return out;
    ObjectSet single {object};
    for (std::size_t k = 0; k < candidates.size(); ++k)
        if (!api_relate(ctx, single, reference, parsed[k]).empty())
            out.push_back(candidates[k]);
    return out;
}

/// As api_query_relation, anchored at the agent. The candidate "o'clock"
/// contributes the single clock-face label of the object's bearing.
inline std::vector<std::string> api_query_relation_agent(const ApiContext& ctx,
                                                         std::size_t object,
                                                         const std::vector<std::string>& candidates
                                                         = default_agent_candidates())
{
    std::vector<std::optional<RelationLabel>> parsed;
    for (const auto& c: candidates)
        parsed.push_back(text::normalize(c) == "o'clock" ? std::nullopt : std::optional(parse_relation(c)));

    std::vector<std::string> out;
    auto dir = ctx.agent_direction(ctx.situation().position, ctx.object(object).centroid);
    bool degenerate = dir.x == 0.0 && dir.y == 0.0;
    ObjectSet single {object};
    for (std::size_t k = 0; k < candidates.size(); ++k)
    {
        if (!parsed[k])
        {
            if (!degenerate)
                out.push_back(oclock_label(dir).to_string());
        }
        else if (!api_relate_agent(ctx, single, *parsed[k]).empty())
            out.push_back(candidates[k]);
    }
    return out;
}

inline AttributeValue api_query_attribute(const ApiContext& ctx,
                                          std::size_t object,
                                          std::string_view attribute_type,
                                          const std::vector<std::string>& candidates = {})
{
    auto type = text::normalize(attribute_type);
    if (std::find(std::begin(kAttributeTypes), std::end(kAttributeTypes), type) == std::end(kAttributeTypes))
        throw Error(ErrorKind::UnknownAttributeType,
                    "unknown attribute_type '" + std::string(attribute_type)
                        + "'; must be one of: lwh, distance, color, shape, material");

    const auto& obj = ctx.object(object);
    if (type == "lwh")
        return std::vector<double> {obj.lwh.x, obj.lwh.y, obj.lwh.z};
    if (type == "distance")
        return ctx.agent_distance(object);

    if (auto it = obj.attributes.find(type); it != obj.attributes.end())
        if (auto pick = detail::pick_annotation(it->second, candidates))
            return *pick;

    if (candidates.empty())
        throw Error(ErrorKind::MissingCandidates,
                    "attribute '" + type + "' of " + obj.category + " is not annotated; provide candidate_attribute_values");
    if (!obj.embedding)
        throw Error(ErrorKind::MissingEmbedding,
                    "attribute '" + type + "' of " + obj.category + " cannot be classified: object has no embedding");
    return cosine_classify(*obj.embedding, detail::candidate_vectors(ctx, candidates));
}

inline std::string api_query_state(const ApiContext& ctx, std::size_t object, const std::vector<std::string>& candidates)
{
    if (candidates.empty())
        throw Error(ErrorKind::MissingCandidates, "query_state requires a non-empty candidate_states list");
    const auto& obj = ctx.object(object);
    for (const auto& [group, value]: obj.states)
        if (auto pick = detail::pick_annotation(value, candidates))
            return *pick;
    if (!obj.embedding || !ctx.label_embeddings())
        throw Error(ErrorKind::Unresolvable,
                    "state of " + obj.category + " is unknown: no matching annotation and no embeddings");
    return cosine_classify(*obj.embedding, detail::candidate_vectors(ctx, candidates));
}

} // namespace tpc
