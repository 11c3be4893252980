#pragma once

// Per-object pose error: the cube-vertex distance error and its upper bound.

#include <string>

#include "rbench/core/error.hpp"
#include "rbench/core/geometry.hpp"
#include "rbench/core/model.hpp"

namespace rbench::scoring {

/// How the per-object error cap is chosen.
struct UebPolicy {
  enum class Variant {
    SizeBased,  ///< 5 * (L + W + H) / 3
    Constant,   ///< same value for every object
  };

  Variant variant = Variant::SizeBased;
  double constant_value = 0.0;  ///< cm, Constant only

  static UebPolicy size_based() { return {}; }

  /// No default: the cap must be chosen explicitly.
  static UebPolicy constant(double value_cm) {
    if (!(value_cm > 0.0) || !std::isfinite(value_cm)) {
      throw Error(ErrorCode::InvalidArgument, "constant UEB must be a positive finite value");
    }
    return {Variant::Constant, value_cm};
  }

  std::string name() const { return variant == Variant::SizeBased ? "size_based" : "constant"; }

  friend bool operator==(const UebPolicy&, const UebPolicy&) = default;
};

inline double ueb(const BoundingBox& bbox, const UebPolicy& policy) {
  if (policy.variant == UebPolicy::Variant::Constant) return policy.constant_value;
  return 5.0 * (bbox.length + bbox.width + bbox.height) / 3.0;
}

inline double ueb(const ObjectModel& model, const UebPolicy& policy) { return ueb(model.bbox, policy); }

/// Mean distance between the cube vertices placed by the target pose and by
/// the solution pose. Each vertex is transformed independently before the
/// difference is taken, which makes the result exactly symmetric in its
/// pose arguments.
inline double ede(const BoundingBox& bbox, const Pose& target, const Pose& solution) {
  double sum = 0.0;
  for (const Vec3& p : cube_vertices(bbox)) {
    sum += (target.apply(p) - solution.apply(p)).norm();
  }
  return sum / 8.0;
}

inline double ede(const ObjectModel& model, const Pose& target, const Pose& solution) {
  return ede(model.bbox, target, solution);
}

}  // namespace rbench::scoring
