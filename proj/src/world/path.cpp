#include "langmpc/world/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace langmpc::world {

ReferencePath::ReferencePath(std::vector<Vec2> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw InvalidWorld("reference path needs at least two waypoints");
  }
  arc_lengths_.reserve(waypoints_.size());
  arc_lengths_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    const double seg = (waypoints_[i] - waypoints_[i - 1]).norm();
    if (!(seg > 0.0)) {
      throw InvalidWorld(fmt::format("reference path waypoints {} and {} coincide", i - 1, i));
    }
    arc_lengths_.push_back(arc_lengths_.back() + seg);
  }
}

std::size_t ReferencePath::segment_for(double s) const {
  const auto it = std::upper_bound(arc_lengths_.begin(), arc_lengths_.end(), s);
  if (it == arc_lengths_.begin()) {
    return 0;
  }
  const auto idx = static_cast<std::size_t>(std::distance(arc_lengths_.begin(), it)) - 1;
  return std::min(idx, segment_count() - 1);
}

Vec2 ReferencePath::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_for(s);
  const double seg_len = arc_lengths_[i + 1] - arc_lengths_[i];
  const double t = (s - arc_lengths_[i]) / seg_len;
  return waypoints_[i] + t * (waypoints_[i + 1] - waypoints_[i]);
}

Vec2 ReferencePath::tangent_at(double s) const {
  const std::size_t i = segment_for(std::clamp(s, 0.0, length()));
  return (waypoints_[i + 1] - waypoints_[i]).normalized();
}

PathProjection path_project(const ReferencePath& path, const Vec2& point) {
  const auto& wp = path.waypoints();
  const auto& arc = path.arc_lengths();

  PathProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Vec2 seg = wp[i + 1] - wp[i];
    const double len2 = seg.squaredNorm();
    const double t = std::clamp((point - wp[i]).dot(seg) / len2, 0.0, 1.0);
    const Vec2 candidate = wp[i] + t * seg;
    const double d2 = (point - candidate).squaredNorm();
    // strict comparison keeps the lower-s segment on ties
    if (d2 < best_d2) {
      best_d2 = d2;
      best.segment = i;
      best.closest = candidate;
      best.s = arc[i] + t * (arc[i + 1] - arc[i]);
      best.tangent = seg / std::sqrt(len2);
    }
  }
  best.normal = Vec2(-best.tangent.y(), best.tangent.x());
  return best;
}

}  // namespace langmpc::world
