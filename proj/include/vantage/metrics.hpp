#pragma once

#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "vantage/camera.hpp"
#include "vantage/robot.hpp"

namespace vantage {

/// Fitness pair: coverage is maximised, distance minimised.
struct ObjectiveVector {
  double coverage = 0.0;
  double distance = 0.0;
  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

/// Bit k set iff envelope point k lies in the view.
inline boost::dynamic_bitset<> coverage_mask(const CameraView& view, std::span<const Vec3> points) {
  boost::dynamic_bitset<> mask(points.size());
  for (std::size_t k = 0; k < points.size(); ++k)
    if (contains_point(view, points[k])) mask.set(k);
  return mask;
}

/// Fraction of envelope points inside at least one frustum (denominator 8KL).
inline double coverage(std::span<const CameraView> views, const MotionEnvelope& envelope) {
  if (envelope.empty()) throw Error("coverage: empty envelope");
  std::size_t covered = 0;
  for (const auto& p : envelope.points) {
    for (const auto& v : views)
      if (contains_point(v, p)) {
        ++covered;
        break;
      }
  }
  return static_cast<double>(covered) / static_cast<double>(envelope.size());
}

inline Vec3 centroid(std::span<const Vec3> points) {
  if (points.empty()) throw Error("centroid: empty point set");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

/// Mean distance from the envelope centroid to each camera.
inline double distance_pick(std::span<const CameraView> views, const MotionEnvelope& envelope) {
  if (views.empty()) throw Error("distance_pick: no views");
  const Vec3 c = centroid(envelope.points);
  double sum = 0.0;
  for (const auto& v : views) sum += (c - v.position()).norm();
  return sum / static_cast<double>(views.size());
}

/// Per-view term of distance_place: mean over states of the distance from the
/// object centroid at that state to the camera.
inline double object_distance(const CameraView& view, std::span<const Vec3> state_centroids) {
  double sum = 0.0;
  for (const auto& c : state_centroids) sum += (c - view.position()).norm();
  return sum / static_cast<double>(state_centroids.size());
}

inline std::vector<Vec3> state_centroids(const TargetPointSet& targets) {
  std::vector<Vec3> out;
  out.reserve(targets.states());
  for (const auto& s : targets.per_state) out.push_back(centroid(s));
  return out;
}

/// Mean over cameras of the trajectory-averaged object-centroid distance.
inline double distance_place(std::span<const CameraView> views, const TargetPointSet& targets) {
  if (views.empty()) throw Error("distance_place: no views");
  if (targets.states() == 0) throw Error("distance_place: no states");
  const auto centroids = state_centroids(targets);
  double sum = 0.0;
  for (const auto& v : views) sum += object_distance(v, centroids);
  return sum / static_cast<double>(views.size());
}

}  // namespace vantage
