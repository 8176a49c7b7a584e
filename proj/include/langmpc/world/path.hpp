#ifndef LANGMPC_WORLD_PATH_HPP_
#define LANGMPC_WORLD_PATH_HPP_

#include "langmpc/world/types.hpp"

#include <cstddef>
#include <vector>

namespace langmpc::world {

/// Polyline reference path with cumulative arc length per waypoint.
class ReferencePath {
 public:
  /// Throws InvalidWorld on fewer than two waypoints or coincident neighbours.
  explicit ReferencePath(std::vector<Vec2> waypoints);

  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  const std::vector<double>& arc_lengths() const { return arc_lengths_; }
  double length() const { return arc_lengths_.back(); }
  std::size_t segment_count() const { return waypoints_.size() - 1; }

  /// Point at arc length s, clamped to [0, length()].
  Vec2 point_at(double s) const;
  /// Unit direction of the segment containing s.
  Vec2 tangent_at(double s) const;

 private:
  std::size_t segment_for(double s) const;

  std::vector<Vec2> waypoints_;
  std::vector<double> arc_lengths_;
};

struct PathProjection {
  double s{0.0};
  Vec2 closest{Vec2::Zero()};
  Vec2 tangent{Vec2::UnitX()};
  Vec2 normal{Vec2::UnitY()};  // tangent rotated by +90 deg
  std::size_t segment{0};
};

/// Euclidean projection onto the polyline. Ties go to the lower-s segment.
PathProjection path_project(const ReferencePath& path, const Vec2& point);

}  // namespace langmpc::world

#endif  // LANGMPC_WORLD_PATH_HPP_
