#include "steady/observation.hpp"

#include <cmath>
#include <stdexcept>

namespace steady {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)
}

double bearing(const Pose& pose, Vec2 landmark) {
  const double dx = landmark.x - pose.x;
  const double dy = landmark.y - pose.y;
  if (dx == 0.0 && dy == 0.0)
    throw std::invalid_argument("bearing: robot is exactly at the landmark");
  return wrap_angle(std::atan2(dy, dx) - pose.theta);
}

Observation sample_observation(const Pose& pose, const LandmarkMap& map, double sigma,
                               RngStream& rng) {
  if (sigma <= 0.0) throw std::invalid_argument("sample_observation: sigma must be positive");
  Observation obs;
  obs.bearings.reserve(map.positions.size());
  for (const Vec2& l : map.positions)
    obs.bearings.push_back(wrap_angle(bearing(pose, l) + rng.normal(0.0, sigma)));
  return obs;
}

double log_likelihood(const Observation& obs, const Pose& pose, const LandmarkMap& map,
                      double sigma) {
  const double log_norm = -0.5 * kLogTwoPi - std::log(sigma);
  const double inv_two_var = 0.5 / (sigma * sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < map.positions.size(); ++i) {
    const double r = wrap_angle(obs.bearings[i] - bearing(pose, map.positions[i]));
    total += log_norm - r * r * inv_two_var;
  }
  return total;
}

void log_likelihood_batch(const Observation& obs,
                          const Eigen::Ref<const Eigen::MatrixXd>& states,
                          const LandmarkMap& map, double sigma,
                          Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index n = states.rows();
  const double log_norm = -0.5 * kLogTwoPi - std::log(sigma);
  const double inv_two_var = 0.5 / (sigma * sigma);
  out.array() += static_cast<double>(map.positions.size()) * log_norm;
  for (std::size_t k = 0; k < map.positions.size(); ++k) {
    const Vec2 l = map.positions[k];
    const double b = obs.bearings[k];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = l.x - states(i, 0);
      const double dy = l.y - states(i, 1);
      const double r = wrap_angle(b - (std::atan2(dy, dx) - states(i, 2)));
      out(i) -= r * r * inv_two_var;
    }
  }
}

ObservationSequence observe_trajectory(const Trajectory& traj, const LandmarkMap& map,
                                       double sigma, int stride, RngStream& rng) {
  if (stride < 1) throw std::invalid_argument("observe_trajectory: stride must be >= 1");
  ObservationSequence seq;
  seq.sigma_bearing = sigma;
  seq.steps.resize(traj.states.size());
  for (std::size_t t = 0; t < traj.states.size(); t += static_cast<std::size_t>(stride))
    seq.steps[t] = sample_observation(traj.states[t].pose, map, sigma, rng);
  return seq;
}

LandmarkMap place_landmarks(std::uint64_t seed, int count, double halfwidth) {
  if (count < 1) throw std::invalid_argument("place_landmarks: need at least one landmark");
  RngStream rng(seed, rng_salt::kLandmarks);
  LandmarkMap map;
  map.positions.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform(-halfwidth, halfwidth);
    const double y = rng.uniform(-halfwidth, halfwidth);
    map.positions.push_back({x, y});
  }
  return map;
}

}  // namespace steady
