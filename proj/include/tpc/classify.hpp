// SPDX-License-Identifier: Apache-2.0
//
// Embedding-based classification: zero-shot cosine matching against label
// embeddings, and per-group KNN over precomputed reference embeddings.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "scene.hpp"
#include "text.hpp"

namespace tpc
{

struct LabeledVector
{
    std::string label;
    std::vector<double> vector;
};

using LabelEmbeddings = std::map<std::string, std::vector<double>>;
using KnnReferences = std::map<std::string, std::vector<LabeledVector>>;

namespace detail
{

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += (a[i] - b[i]) * (a[i] - b[i]);
    return sum;
}

} // namespace detail

/// Label whose vector has maximal cosine similarity with `query`; the first
/// occurrence wins ties.
inline std::string cosine_classify(std::span<const double> query, std::span<const LabeledVector> labeled)
{
    if (labeled.empty())
        throw Error(ErrorKind::EmptyCandidates, "no candidate labels to classify against");

    double qnorm = std::sqrt(detail::dot(query, query));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < labeled.size(); ++i)
    {
        const auto& v = labeled[i].vector;
        if (v.size() != query.size())
            throw Error(ErrorKind::DimensionMismatch,
                        "label '" + labeled[i].label + "' has dimension " + std::to_string(v.size()) + ", query has "
                            + std::to_string(query.size()));
        double denom = qnorm * std::sqrt(detail::dot(v, v));
        double score = denom > 0 ? detail::dot(query, v) / denom : 0.0;
        if (score > best_score)
        {
            best_score = score;
            best = i;
        }
    }
    return labeled[best].label;
}

/// Majority label among the k nearest references (Euclidean). Ties go to the
/// smaller mean distance, then to the label listed first.
inline std::string knn_classify(std::span<const double> query, std::span<const LabeledVector> references, std::size_t k)
{
    if (references.empty())
        throw Error(ErrorKind::EmptyReferences, "no reference vectors for KNN");
    if (k < 1 || k > references.size())
        throw Error(ErrorKind::BadK,
                    "k must be in [1, " + std::to_string(references.size()) + "], got " + std::to_string(k));

    std::vector<double> dist(references.size());
    for (std::size_t i = 0; i < references.size(); ++i)
    {
        if (references[i].vector.size() != query.size())
            throw Error(ErrorKind::DimensionMismatch,
                        "reference #" + std::to_string(i) + " has dimension " + std::to_string(references[i].vector.size())
                            + ", query has " + std::to_string(query.size()));
        dist[i] = std::sqrt(detail::squared_distance(query, references[i].vector));
    }

    std::vector<std::size_t> order(references.size());
    std::iota(order.begin(), order.end(), std::size_t {0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });

    struct Vote
    {
        std::size_t count = 0;
        double total = 0.0;
        std::size_t first_listed = 0;
    };
    std::map<std::string, Vote> votes;
    for (std::size_t r = 0; r < k; ++r)
    {
        auto i = order[r];
        auto [it, inserted] = votes.try_emplace(references[i].label);
        if (inserted)
        {
            auto pos = std::find_if(references.begin(), references.end(),
                                    [&](const auto& ref) { return ref.label == references[i].label; });
            it->second.first_listed = static_cast<std::size_t>(pos - references.begin());
        }
        ++it->second.count;
        it->second.total += dist[i];
    }

    const std::string* best = nullptr;
    const Vote* best_vote = nullptr;
    for (const auto& [label, vote]: votes)
    {
        if (!best_vote)
        {
            best = &label;
            best_vote = &vote;
            continue;
        }
        double mean = vote.total / static_cast<double>(vote.count);
        double best_mean = best_vote->total / static_cast<double>(best_vote->count);
        bool better = vote.count > best_vote->count
                      || (vote.count == best_vote->count
                          && (mean < best_mean || (mean == best_mean && vote.first_listed < best_vote->first_listed)));
        if (better)
        {
            best = &label;
            best_vote = &vote;
        }
    }
    return *best;
}

/// Label-embedding sidecar: {dim, entries:[{label, vector}]}; vectors unit-norm.
inline LabelEmbeddings load_label_embeddings(std::string_view source)
{
    auto root = detail::parse_json(source, "label embeddings");
    if (!root.is_object())
        detail::malformed("label embeddings", "top level must be an object");
    const auto& dim_field = detail::require(root, "dim", "label embeddings");
    if (!dim_field.is_number_unsigned() || dim_field.get<std::size_t>() == 0)
        detail::malformed("label embeddings", "field 'dim' must be a positive integer");
    auto dim = dim_field.get<std::size_t>();
    const auto& entries = detail::require(root, "entries", "label embeddings");
    if (!entries.is_array())
        detail::malformed("label embeddings", "field 'entries' must be an array");

    LabelEmbeddings out;
    for (const auto& entry: entries)
    {
        const auto& label = detail::require(entry, "label", "label embeddings entry");
        if (!label.is_string())
            detail::malformed("label embeddings entry", "field 'label' must be a string");
        auto name = text::normalize(label.get<std::string>());
        auto where = "label '" + name + "'";
        auto vec = detail::number_array(detail::require(entry, "vector", where), where, "vector");
        if (vec.size() != dim)
            throw Error(ErrorKind::DimensionMismatch,
                        where + " has dimension " + std::to_string(vec.size()) + ", expected " + std::to_string(dim));
        if (std::abs(detail::l2_norm(vec) - 1.0) > kUnitNormTolerance)
            detail::malformed(where, "vector is not unit-norm");
        out[name] = std::move(vec);
    }
    return out;
}

/// KNN reference file: {group: [{label, vector}, ...], ...}.
inline KnnReferences load_knn_references(std::string_view source)
{
    auto root = detail::parse_json(source, "knn references");
    if (!root.is_object())
        detail::malformed("knn references", "top level must be an object");
    KnnReferences out;
    for (const auto& [group, list]: root.items())
    {
        auto where = "knn group '" + group + "'";
        if (!list.is_array())
            detail::malformed(where, "must be an array");
        auto& refs = out[text::normalize(group)];
        for (const auto& entry: list)
        {
            const auto& label = detail::require(entry, "label", where);
            if (!label.is_string())
                detail::malformed(where, "field 'label' must be a string");
            refs.push_back({text::normalize(label.get<std::string>()),
                            detail::number_array(detail::require(entry, "vector", where), where, "vector")});
        }
    }
    return out;
}

/// Two-column mapping table (raw category TAB high-level class); '#' comments.
inline std::map<std::string, std::string> load_category_mapping(std::string_view source)
{
    std::map<std::string, std::string> out;
    std::size_t lineno = 0;
    for (auto line: text::split_lines(source))
    {
        ++lineno;
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#')
            continue;
        auto tab = trimmed.find('\t');
        if (tab == std::string_view::npos)
            detail::malformed("category mapping line " + std::to_string(lineno), "expected 'raw<TAB>class'");
        out[text::normalize(trimmed.substr(0, tab))] = text::normalize(trimmed.substr(tab + 1));
    }
    return out;
}

/// Two-stage category refinement: raw category -> high-level class via the
/// mapping, then KNN over that class's references. Objects without an
/// embedding or without references for their class keep their category.
/// Returns the number of objects whose category changed.
inline std::size_t refine_categories(Scene& scene,
                                     const std::map<std::string, std::string>& mapping,
                                     const KnnReferences& references,
                                     std::size_t k)
{
    std::size_t changed = 0;
    for (auto& obj: scene.objects)
    {
        if (!obj.embedding)
            continue;
        auto high = mapping.find(obj.category);
        const auto& group = high != mapping.end() ? high->second : obj.category;
        auto refs = references.find(group);
        if (refs == references.end() || refs->second.empty())
            continue;
        auto label = knn_classify(*obj.embedding, refs->second, std::min(k, refs->second.size()));
        if (label != obj.category)
        {
            obj.category = label;
            ++changed;
        }
    }
    return changed;
}

} // namespace tpc
