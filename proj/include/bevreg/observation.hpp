#pragma once

#include <optional>
#include <vector>

#include "bevreg/geometry.hpp"

namespace bevreg {

using ViewId = int;

// One detected person in a camera-relative frame: the camera sits at the
// origin facing angle 0 (along +x).
struct Detection {
  Pose2D pose;
  std::optional<int> identity;
  std::vector<double> descriptor;
};

struct ViewObservation {
  ViewId view_id = 0;
  std::vector<Detection> detections;

  std::vector<Pose2D> poses() const {
    std::vector<Pose2D> out;
    out.reserve(detections.size());
    for (const auto& d : detections) out.push_back(d.pose);
    return out;
  }
};

}  // namespace bevreg
