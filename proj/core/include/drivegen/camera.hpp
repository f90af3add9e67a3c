// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "drivegen/geometry.hpp"

namespace drivegen {

// View names follow the six-camera surround convention.
enum class ViewName {
  kFrontLeft,
  kFront,
  kFrontRight,
  kBackRight,
  kBack,
  kBackLeft,
};

const std::string& to_string(ViewName v);
ViewName view_from_string(const std::string& s);

// Pinhole camera. Extrinsics map ego frame -> camera frame: p_cam = R p + t.
// Camera frame: x right, y down, z forward.
struct Camera {
  ViewName name = ViewName::kFront;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Mat3 rotation;
  Vec3 translation;
  int width = 0;
  int height = 0;

  Vec3 center_ego() const;  // camera position in ego frame
};

struct CameraRig {
  std::vector<Camera> cameras;
};

// Surround rig: cameras share the ego position at the given height and fan
// out by yaw. num_views must be 2 (FRONT/BACK) or 6 (60 degree spacing).
CameraRig make_rig(int num_views, int height_px, int width_px, double fov_deg = 90.0,
                   double camera_height_m = 1.5);

// Throws CalibrationError / ConfigError on invalid parameters (zero focal
// length, non-orthonormal rotation, duplicate view names).
void validate_rig(const CameraRig& rig);

}  // namespace drivegen
