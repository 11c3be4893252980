#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "rbench/rbench.hpp"

namespace fixture {

using namespace rbench;

inline ObjectModel model(const std::string& id, double l, double w, double h, const std::string& category = "box") {
  return {id, category, BoundingBox::make(l, w, h), std::nullopt, SetTag::Trial};
}

inline Pose at(double x, double y, double z = 0.0, double yaw_deg = 0.0) {
  return {Rotation::about_z(deg_to_rad(yaw_deg)), Vec3(x, y, z)};
}

/// Task whose objects all start where `initial` says and should end at `target`.
inline Task task(const std::string& id, const std::vector<std::pair<std::string, ObjectModel>>& objects,
                 SceneConfiguration initial, SceneConfiguration target) {
  Task t;
  t.task_id = id;
  for (const auto& [inst, m] : objects) t.objects.push_back({inst, m});
  t.initial = std::move(initial);
  t.target = std::move(target);
  return t;
}

/// Random proper rotation from a uniformly sampled unit quaternion.
inline Rotation random_rotation(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  const double x = n(g), y = n(g), z = n(g), w = n(g);
  const double s = std::sqrt(x * x + y * y + z * z + w * w);
  return Rotation::from_quaternion({x / s, y / s, z / s, w / s});
}

inline Pose random_pose(std::mt19937_64& g, double spread = 50.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  return {random_rotation(g), Vec3(u(g), u(g), u(g))};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rbench_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
