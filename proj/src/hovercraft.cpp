#include "steady/hovercraft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steady {

Accel true_accel(const State& s, const Control& c, const HovParams& p) {
  const Vec2 v_body = to_local(s.pose.theta, {s.vx, s.vy});
  const double v_lon = v_body.x, v_lat = v_body.y;
  const double a_lon = (c.u_left + c.u_right - p.drag_lin * v_lon * std::abs(v_lon)) / p.mass;
  const double a_lat = (-p.drag_lin * v_lat * std::abs(v_lat)) / p.mass;
  const double alpha =
      (p.arm * (c.u_right - c.u_left) - p.drag_rot * s.omega * std::abs(s.omega)) / p.inertia;
  return {a_lon, a_lat, alpha};
}

State integrate_step(const State& s, const Accel& accel, double dt) {
  const Vec2 v_body = to_local(s.pose.theta, {s.vx, s.vy});
  const double v_lon = v_body.x + accel[0] * dt;
  const double v_lat = v_body.y + accel[1] * dt;
  const double omega = s.omega + accel[2] * dt;
  const Vec2 v_global = from_local(s.pose.theta, {v_lon, v_lat});
  State next;
  next.vx = v_global.x;
  next.vy = v_global.y;
  next.omega = omega;
  next.pose.x = s.pose.x + v_global.x * dt;
  next.pose.y = s.pose.y + v_global.y * dt;
  next.pose.theta = wrap_angle(s.pose.theta + omega * dt);
  return next;
}

State step_truth(const State& s, const Control& c, const HovParams& p, const Accel& noise) {
  const Accel a = true_accel(s, c, p);
  const Accel realized{a[0] + noise[0], a[1] + noise[1], a[2] + noise[2]};
  return integrate_step(s, realized, p.dt);
}

State step_truth(const State& s, const Control& c, const HovParams& p, RngStream& rng) {
  const Accel noise{rng.normal(0.0, p.sigma_acc), rng.normal(0.0, p.sigma_acc),
                    rng.normal(0.0, p.sigma_alpha)};
  return step_truth(s, c, p, noise);
}

HovParams hand_model_params(const HovParams& p) {
  HovParams hand = p;
  hand.drag_lin = 0.0;
  hand.drag_rot = 0.0;
  const double k = std::sqrt(2.0);
  hand.sigma_acc *= k;
  hand.sigma_alpha *= k;
  return hand;
}

GaussianDiag hand_model_accel(const State& s, const Control& c, const HovParams& p) {
  const HovParams hand = hand_model_params(p);
  GaussianDiag out;
  out.mean = true_accel(s, c, hand);
  out.std = {hand.sigma_acc, hand.sigma_acc, hand.sigma_alpha};
  return out;
}

namespace {

// Thrust excitation: independent OU process per propeller, mean u_max/2,
// reversion rate 0.5 1/s, volatility 0.6 N s^-1/2, clipped to [0, u_max].
constexpr double kOuRate = 0.5;
constexpr double kOuVol = 0.6;

Trajectory generate_trajectory(std::uint64_t seed, std::uint64_t split, std::uint64_t index,
                               int n_steps, const DatasetSpec& spec, const HovParams& p) {
  RngStream init_rng(seed ^ (split << 32), rng_salt::kDatasetInit, index);
  RngStream control_rng(seed ^ (split << 32), rng_salt::kDatasetControls, index);
  RngStream noise_rng(seed ^ (split << 32), rng_salt::kDatasetNoise, index);

  Trajectory traj;
  traj.dt = p.dt;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.controls.reserve(static_cast<std::size_t>(n_steps));

  State s;
  s.pose.x = init_rng.uniform(-spec.init_pos_halfwidth, spec.init_pos_halfwidth);
  s.pose.y = init_rng.uniform(-spec.init_pos_halfwidth, spec.init_pos_halfwidth);
  s.pose.theta = wrap_angle(init_rng.uniform(-kPi, kPi));
  traj.states.push_back(s);

  const double u_mean = 0.5 * p.u_max;
  const double stationary_std = kOuVol / std::sqrt(2.0 * kOuRate);
  auto clip = [&](double u) { return std::clamp(u, 0.0, p.u_max); };
  double u_l = clip(control_rng.normal(u_mean, stationary_std));
  double u_r = clip(control_rng.normal(u_mean, stationary_std));
  const double sqrt_dt = std::sqrt(p.dt);

  for (int t = 0; t < n_steps; ++t) {
    traj.controls.push_back({u_l, u_r});
    s = step_truth(s, traj.controls.back(), p, noise_rng);
    traj.states.push_back(s);
    u_l = clip(u_l + kOuRate * (u_mean - u_l) * p.dt + kOuVol * sqrt_dt * control_rng.normal());
    u_r = clip(u_r + kOuRate * (u_mean - u_r) * p.dt + kOuVol * sqrt_dt * control_rng.normal());
  }
  return traj;
}

}  // namespace

Dataset generate_dataset(std::uint64_t seed, const DatasetSpec& spec, const HovParams& p) {
  if (spec.n_train < 1 || spec.n_valid < 0 || spec.n_test < 0)
    throw std::invalid_argument("generate_dataset: invalid split counts");
  const double steps_real = spec.duration / p.dt;
  const int n_steps = static_cast<int>(std::lround(steps_real));
  if (n_steps < 1 || std::abs(steps_real - n_steps) > 1e-9)
    throw std::invalid_argument("generate_dataset: duration must be an integral number of steps");

  Dataset out;
  auto fill = [&](std::vector<Trajectory>& dst, int count, std::uint64_t split) {
    dst.reserve(count);
    for (int i = 0; i < count; ++i)
      dst.push_back(generate_trajectory(seed, split, static_cast<std::uint64_t>(i), n_steps, spec, p));
  };
  fill(out.train, spec.n_train, 0);
  fill(out.valid, spec.n_valid, 1);
  fill(out.test, spec.n_test, 2);
  return out;
}

}  // namespace steady
