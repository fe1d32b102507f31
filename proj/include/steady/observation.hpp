#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "steady/hovercraft.hpp"

namespace steady {

struct LandmarkMap {
  std::vector<Vec2> positions;  // length L >= 1
};

struct Observation {
  std::vector<double> bearings;  // length L, each in (-pi, pi]
};

// Per-step optional observations; absent entries mark steps with no sensor
// reading (the filter skips weighting and resampling there).
struct ObservationSequence {
  std::vector<std::optional<Observation>> steps;  // length T
  double sigma_bearing = 0.0873;                  // rad
};

// Relative angle from the robot's heading to the landmark.
double bearing(const Pose& pose, Vec2 landmark);

// Bearings to every landmark with N(0, sigma^2) noise, wrapped.
Observation sample_observation(const Pose& pose, const LandmarkMap& map, double sigma,
                               RngStream& rng);

// Sum over landmarks of the wrapped-residual Gaussian log-density.
double log_likelihood(const Observation& obs, const Pose& pose, const LandmarkMap& map,
                      double sigma);

// Batched form over a particle array: states is N x >=3 with columns
// (x, y, theta, ...); adds each particle's log-density into out.
void log_likelihood_batch(const Observation& obs,
                          const Eigen::Ref<const Eigen::MatrixXd>& states,
                          const LandmarkMap& map, double sigma,
                          Eigen::Ref<Eigen::VectorXd> out);

// Observations at t = 0, stride, 2*stride, ... (0-based), missing elsewhere.
ObservationSequence observe_trajectory(const Trajectory& traj, const LandmarkMap& map,
                                       double sigma, int stride, RngStream& rng);

// Uniform landmark placement over a square of the given half-width, fixed by
// the dataset seed.
LandmarkMap place_landmarks(std::uint64_t seed, int count, double halfwidth);

}  // namespace steady
