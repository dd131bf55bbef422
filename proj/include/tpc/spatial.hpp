// SPDX-License-Identifier: Apache-2.0
//
// Geometric recognition of horizontal (closest, farthest, within reach,
// around), vertical (on, above, below) and allocentric (left, right, front,
// back, o'clock) relations.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "scene.hpp"
#include "text.hpp"

namespace tpc
{

struct RelationConfig
{
    double epsilon = 0.1;         ///< margin for closest/farthest, meters
    double wr_dist = 1.0;         ///< within reach, meters
    double ar_dist = 3.0;         ///< around, meters
    double min_iou = 0.1;         ///< footprint gate for vertical relations
    double min_on_ratio = 0.3;    ///< intersect / area(anchor) lower bound
    double max_on_dist = 0.1;     ///< |bottom(target) - top(anchor)| upper bound, meters
    double max_on_ratio = 1.5;    ///< area(target) / area(anchor) upper bound
    double sector_half_width = 67.5; ///< degrees

    friend bool operator==(const RelationConfig&, const RelationConfig&) = default;

    void validate() const
    {
        auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, "relation config: " + what); };
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(epsilon) || epsilon < 0)
            fail("epsilon must be >= 0");
        if (!finite(wr_dist) || wr_dist < 0)
            fail("wr_dist must be >= 0");
        if (!finite(ar_dist) || ar_dist < 0)
            fail("ar_dist must be >= 0");
        if (!finite(max_on_dist) || max_on_dist < 0)
            fail("max_on_dist must be >= 0");
        if (!(min_iou >= 0 && min_iou <= 1))
            fail("min_iou must be in [0, 1]");
        if (!(min_on_ratio > 0 && min_on_ratio <= 1))
            fail("min_on_ratio must be in (0, 1]");
        if (!(max_on_ratio > 0) || !finite(max_on_ratio))
            fail("max_on_ratio must be > 0");
        if (!(sector_half_width > 0 && sector_half_width < 90))
            fail("sector_half_width must be in (0, 90) degrees");
    }
};

/// Closed relation vocabulary. Clock-face labels carry their hour.
class RelationLabel
{
  public:
    enum class Kind
    {
        Closest,
        Farthest,
        WithinReach,
        Around,
        On,
        Above,
        Below,
        Left,
        Right,
        Front,
        Back,
        OClock,
    };

    constexpr RelationLabel(Kind kind) noexcept: _kind(kind) {}

    static constexpr RelationLabel oclock(int hour) noexcept { return RelationLabel(Kind::OClock, hour); }

    [[nodiscard]] constexpr Kind kind() const noexcept { return _kind; }
    [[nodiscard]] constexpr int hour() const noexcept { return _hour; }

    [[nodiscard]] constexpr bool is_allocentric() const noexcept
    {
        return _kind == Kind::Left || _kind == Kind::Right || _kind == Kind::Front || _kind == Kind::Back;
    }
    [[nodiscard]] constexpr bool is_vertical() const noexcept
    {
        return _kind == Kind::On || _kind == Kind::Above || _kind == Kind::Below;
    }
    [[nodiscard]] constexpr bool is_proximity() const noexcept
    {
        return _kind == Kind::WithinReach || _kind == Kind::Around;
    }
    [[nodiscard]] constexpr bool is_extremal() const noexcept
    {
        return _kind == Kind::Closest || _kind == Kind::Farthest;
    }

    [[nodiscard]] std::string to_string() const
    {
        switch (_kind)
        {
            case Kind::Closest: return "closest";
            case Kind::Farthest: return "farthest";
            case Kind::WithinReach: return "within reach";
            case Kind::Around: return "around";
            case Kind::On: return "on";
            case Kind::Above: return "above";
            case Kind::Below: return "below";
            case Kind::Left: return "left";
            case Kind::Right: return "right";
            case Kind::Front: return "front";
            case Kind::Back: return "back";
            case Kind::OClock: return std::to_string(_hour) + " o'clock";
        }
        return {};
    }

    friend constexpr bool operator==(const RelationLabel&, const RelationLabel&) = default;

  private:
    constexpr RelationLabel(Kind kind, int hour) noexcept: _kind(kind), _hour(hour) {}

    Kind _kind;
    int _hour = 0;
};

inline constexpr std::string_view kRelationVocabulary =
    "closest, farthest, within reach, around, on, above, below, left, right, front, back (alias: behind), "
    "<1-12> o'clock";

inline std::optional<RelationLabel> try_parse_relation(std::string_view name)
{
    using K = RelationLabel::Kind;
    auto n = text::normalize(name);
    if (n == "closest")
        return RelationLabel(K::Closest);
    if (n == "farthest")
        return RelationLabel(K::Farthest);
    if (n == "within reach")
        return RelationLabel(K::WithinReach);
    if (n == "around")
        return RelationLabel(K::Around);
    if (n == "on")
        return RelationLabel(K::On);
    if (n == "above")
        return RelationLabel(K::Above);
    if (n == "below")
        return RelationLabel(K::Below);
    if (n == "left")
        return RelationLabel(K::Left);
    if (n == "right")
        return RelationLabel(K::Right);
    if (n == "front")
        return RelationLabel(K::Front);
    if (n == "back" || n == "behind")
        return RelationLabel(K::Back);

    constexpr std::string_view suffix = " o'clock";
    if (n.size() > suffix.size() && n.ends_with(suffix))
    {
        auto digits = std::string_view(n).substr(0, n.size() - suffix.size());
        if (digits.size() <= 2 && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })
            && digits.front() != '0')
        {
            int hour = std::stoi(std::string(digits));
            if (hour >= 1 && hour <= 12)
                return RelationLabel::oclock(hour);
        }
    }
    return std::nullopt;
}

inline RelationLabel parse_relation(std::string_view name)
{
    if (auto label = try_parse_relation(name))
        return *label;
    throw Error(ErrorKind::UnknownRelation,
                "unknown relation '" + std::string(name) + "'; valid relations: " + std::string(kRelationVocabulary));
}

inline double pairwise_distance(const Vec3& a, const Vec3& b) noexcept
{
    return (a - b).norm();
}

inline double pairwise_distance(const ObjectInstance& a, const ObjectInstance& b) noexcept
{
    return pairwise_distance(a.centroid, b.centroid);
}

inline double intersection_area(const Rect& a, const Rect& b) noexcept
{
    double w = std::min(a.max_x, b.max_x) - std::max(a.min_x, b.min_x);
    double h = std::min(a.max_y, b.max_y) - std::max(a.min_y, b.min_y);
    return (w > 0 && h > 0) ? w * h : 0.0;
}

inline double iou_2d(const Rect& a, const Rect& b) noexcept
{
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

enum class Extremum
{
    Closest,
    Farthest,
};

/// Index (into `distances`) of the closest/farthest candidate, if it wins by
/// more than the margin. Ties in distance keep input order.
inline std::optional<std::size_t> extremal_index(std::span<const double> distances, Extremum which, double epsilon)
{
    if (distances.empty())
        throw Error(ErrorKind::EmptyCandidates, "no candidate objects to compare");
    if (distances.size() == 1)
        return 0;

    std::vector<std::size_t> order(distances.size());
    std::iota(order.begin(), order.end(), std::size_t {0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return distances[a] < distances[b]; });

    auto n = order.size();
    if (which == Extremum::Closest)
    {
        if (distances[order[0]] + epsilon < distances[order[1]])
            return order[0];
    }
    else if (distances[order[n - 2]] + epsilon < distances[order[n - 1]])
        return order[n - 1];
    return std::nullopt;
}

/// Closest or farthest of `others` with respect to `target`.
inline std::optional<std::size_t> extremal_neighbor(const ObjectInstance& target,
                                                    std::span<const ObjectInstance> others,
                                                    Extremum which,
                                                    const RelationConfig& cfg)
{
    std::vector<double> distances;
    distances.reserve(others.size());
    for (const auto& o: others)
        distances.push_back(pairwise_distance(target, o));
    return extremal_index(distances, which, cfg.epsilon);
}

inline std::vector<RelationLabel> proximity_labels(double distance, const RelationConfig& cfg)
{
    std::vector<RelationLabel> out;
    if (distance < cfg.wr_dist)
        out.emplace_back(RelationLabel::Kind::WithinReach);
    if (distance < cfg.ar_dist)
        out.emplace_back(RelationLabel::Kind::Around);
    return out;
}

inline std::vector<RelationLabel> proximity_labels(const ObjectInstance& target,
                                                   const ObjectInstance& anchor,
                                                   const RelationConfig& cfg)
{
    return proximity_labels(pairwise_distance(target, anchor), cfg);
}

/// on > above > below, gated by footprint IoU.
inline std::optional<RelationLabel> vertical_relation(const ObjectInstance& target,
                                                      const ObjectInstance& anchor,
                                                      const RelationConfig& cfg)
{
    auto ft = target.footprint();
    auto fa = anchor.footprint();
    if (iou_2d(ft, fa) < cfg.min_iou)
        return std::nullopt;

    double inter = intersection_area(ft, fa);
    bool covers = inter / fa.area() > cfg.min_on_ratio;
    bool touches = std::abs(target.bottom_z() - anchor.top_z()) <= cfg.max_on_dist;
    bool smaller = ft.area() / fa.area() < cfg.max_on_ratio;
    if (covers && touches && smaller)
        return RelationLabel(RelationLabel::Kind::On);
    if (target.bottom_z() - anchor.top_z() > cfg.max_on_dist)
        return RelationLabel(RelationLabel::Kind::Above);
    if (anchor.bottom_z() - target.top_z() > cfg.max_on_dist)
        return RelationLabel(RelationLabel::Kind::Below);
    return std::nullopt;
}

namespace detail
{

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Unsigned angle between two planar vectors, degrees in [0, 180].
inline double angle_between(const Vec2& a, const Vec2& b) noexcept
{
    double cross = a.x * b.y - a.y * b.x;
    double dot = a.x * b.x + a.y * b.y;
    return std::atan2(std::abs(cross), dot) * kRadToDeg;
}

} // namespace detail

/// Sector membership in the egocentric frame; several labels may hold.
/// Returned in the order left, right, front, back.
inline std::vector<RelationLabel> allocentric_labels(const Vec2& direction, const RelationConfig& cfg)
{
    if (direction.x == 0.0 && direction.y == 0.0)
        throw Error(ErrorKind::ZeroDirection, "direction is zero; allocentric relation undefined");

    using K = RelationLabel::Kind;
    struct Axis
    {
        K kind;
        Vec2 dir;
    };
    static constexpr Axis axes[] = {
        {K::Left, {-1.0, 0.0}},
        {K::Right, {1.0, 0.0}},
        {K::Front, {0.0, 1.0}},
        {K::Back, {0.0, -1.0}},
    };

    std::vector<RelationLabel> out;
    for (const auto& axis: axes)
        if (detail::angle_between(direction, axis.dir) < cfg.sector_half_width)
            out.emplace_back(axis.kind);
    return out;
}

/// Clock-face bearing: 12 is straight ahead, hours run clockwise.
inline RelationLabel oclock_label(const Vec2& direction)
{
    if (direction.x == 0.0 && direction.y == 0.0)
        throw Error(ErrorKind::ZeroDirection, "direction is zero; o'clock bearing undefined");
    double clockwise = std::atan2(direction.x, direction.y) * detail::kRadToDeg;
    if (clockwise < 0)
        clockwise += 360.0;
    int hour = static_cast<int>(std::lround(clockwise / 30.0)) % 12;
    return RelationLabel::oclock(hour == 0 ? 12 : hour);
}

} // namespace tpc
