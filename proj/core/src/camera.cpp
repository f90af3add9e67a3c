// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/camera.hpp"

#include <cmath>
#include <set>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {
const std::vector<std::string> kViewNames = {"CAM_FRONT_LEFT", "CAM_FRONT", "CAM_FRONT_RIGHT",
                                             "CAM_BACK_RIGHT", "CAM_BACK",  "CAM_BACK_LEFT"};
}

const std::string& to_string(ViewName v) { return kViewNames[static_cast<size_t>(v)]; }

ViewName view_from_string(const std::string& s) {
  for (size_t i = 0; i < kViewNames.size(); ++i) {
    if (kViewNames[i] == s) return static_cast<ViewName>(i);
  }
  throw ValidationError("unknown view name: '" + s + "'");
}

Vec3 Camera::center_ego() const {
  // C solves R C + t = 0.
  Mat3 rt = rotation.transpose();
  return rt * (translation * -1.0);
}

namespace {

Camera make_camera(ViewName name, double yaw, int h, int w, double fov_deg, double cam_height) {
  Camera cam;
  cam.name = name;
  cam.width = w;
  cam.height = h;
  double fov = fov_deg * M_PI / 180.0;
  cam.fx = (w / 2.0) / std::tan(fov / 2.0);
  cam.fy = cam.fx;  // square pixels
  cam.cx = w / 2.0;
  cam.cy = h / 2.0;
  // Camera axes in ego coordinates (ego: x forward, y left, z up).
  double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  // rows: x_cam (right), y_cam (down), z_cam (forward)
  r.m = {s, -c, 0, 0, 0, -1, c, s, 0};
  cam.rotation = r;
  Vec3 center{0, 0, cam_height};
  cam.translation = (r * center) * -1.0;
  return cam;
}

}  // namespace

CameraRig make_rig(int num_views, int height_px, int width_px, double fov_deg,
                   double camera_height_m) {
  if (height_px <= 0 || width_px <= 0) throw ConfigError("image size must be positive");
  CameraRig rig;
  if (num_views == 2) {
    rig.cameras.push_back(
        make_camera(ViewName::kFront, 0.0, height_px, width_px, fov_deg, camera_height_m));
    rig.cameras.push_back(
        make_camera(ViewName::kBack, M_PI, height_px, width_px, fov_deg, camera_height_m));
  } else if (num_views == 6) {
    const ViewName order[6] = {ViewName::kFront,     ViewName::kFrontLeft, ViewName::kBackLeft,
                               ViewName::kBack,      ViewName::kBackRight, ViewName::kFrontRight};
    const double yaws[6] = {0, M_PI / 3, 2 * M_PI / 3, M_PI, -2 * M_PI / 3, -M_PI / 3};
    for (int i = 0; i < 6; ++i) {
      rig.cameras.push_back(
          make_camera(order[i], yaws[i], height_px, width_px, fov_deg, camera_height_m));
    }
  } else {
    throw ConfigError("rig supports 2 or 6 views, got " + std::to_string(num_views));
  }
  validate_rig(rig);
  return rig;
}

void validate_rig(const CameraRig& rig) {
  if (rig.cameras.empty()) throw ConfigError("rig has no cameras");
  std::set<ViewName> names;
  for (const auto& cam : rig.cameras) {
    if (cam.fx <= 0 || cam.fy <= 0)
      throw CalibrationError("camera " + to_string(cam.name) + " has non-positive focal length");
    if (cam.rotation.orthonormality_error() > 1e-6)
      throw CalibrationError("camera " + to_string(cam.name) + " rotation is not orthonormal");
    if (cam.width <= 0 || cam.height <= 0)
      throw CalibrationError("camera " + to_string(cam.name) + " has empty image plane");
    if (!names.insert(cam.name).second)
      throw CalibrationError("duplicate view name " + to_string(cam.name));
  }
}

}  // namespace drivegen
