#pragma once

#include <string>
#include <vector>

#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/grid.hpp"
#include "apf/movability.hpp"
#include "apf/volumes.hpp"

namespace apf {

enum class Lighting { well_lit, dark };
enum class Clutter { clean, cluttered };

struct Condition {
  Lighting lighting = Lighting::well_lit;
  Clutter clutter = Clutter::clean;
};

inline std::string to_string(Lighting l) { return l == Lighting::well_lit ? "well_lit" : "dark"; }
inline std::string to_string(Clutter c) { return c == Clutter::clean ? "clean" : "cluttered"; }

/// One observed timestep: depth, flow to the next frame, both measurement
/// streams, and (when known) the ground-truth interaction volumes in camera
/// frame. Replayed recordings may omit ground truth.
struct SceneFrame {
  DepthImage depth;
  FlowField flow;
  CameraModel cam;
  GraspCandidateSet grasp_meas;
  MovabilityMeasurement move_meas;
  std::vector<ManipVolume> ground_truth;
  bool has_ground_truth = false;
  int frame_id = 0;
};

}  // namespace apf
