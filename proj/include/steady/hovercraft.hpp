#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "steady/geometry.hpp"
#include "steady/rng.hpp"

namespace steady {

// Full planar state: pose plus global-frame linear velocity and yaw rate.
struct State {
  Pose pose;
  double vx = 0.0;     // m/s, global frame
  double vy = 0.0;     // m/s, global frame
  double omega = 0.0;  // rad/s
};

struct Control {
  double u_left = 0.0;   // N
  double u_right = 0.0;  // N
};

// Ground-truth simulator constants. All strictly positive.
struct HovParams {
  double mass = 1.5;         // kg
  double inertia = 0.1;      // kg m^2
  double arm = 0.2;          // m, propeller lever arm
  double drag_lin = 0.3;     // N s^2/m^2, quadratic drag on linear velocity
  double drag_rot = 0.02;    // N m s^2/rad^2, quadratic drag on yaw rate
  double u_max = 1.0;        // N
  double sigma_acc = 0.1;    // m/s^2, process noise std on linear acceleration
  double sigma_alpha = 0.05; // rad/s^2, process noise std on angular acceleration
  double dt = 0.1;           // s
};

struct Trajectory {
  double dt = 0.1;
  std::vector<State> states;     // length T
  std::vector<Control> controls; // length T-1
};

struct Dataset {
  std::vector<Trajectory> train;
  std::vector<Trajectory> valid;
  std::vector<Trajectory> test;
};

struct DatasetSpec {
  int n_train = 4;
  int n_valid = 4;
  int n_test = 8;
  double duration = 10.0;        // s
  double init_pos_halfwidth = 1.0; // initial position uniform in [-w, w]^2
};

// Body-frame acceleration (a_lon, a_lat, alpha).
using Accel = std::array<double, 3>;

// Mean and diagonal std of a body-frame acceleration distribution.
struct GaussianDiag {
  Accel mean{0.0, 0.0, 0.0};
  Accel std{0.0, 0.0, 0.0};
};

// Ground-truth deterministic body-frame acceleration: propeller thrust with
// quadratic air resistance on both linear and angular velocity.
Accel true_accel(const State& s, const Control& c, const HovParams& p);

// One semi-implicit Euler step of the true stochastic dynamics. The noise
// (when given) is the standardized 3-vector eps; the realized acceleration is
// a + sigma .* eps. Velocity updates first, then pose integrates the new
// velocity.
State step_truth(const State& s, const Control& c, const HovParams& p, const Accel& noise);
State step_truth(const State& s, const Control& c, const HovParams& p, RngStream& rng);

// Shared integrator: advances a state given a realized body-frame acceleration.
State integrate_step(const State& s, const Accel& accel, double dt);

// Parameters of the hand-written baseline model: air-friction terms removed
// and the disturbance variance doubled.
HovParams hand_model_params(const HovParams& p);

// Hand-written baseline model prediction for a single state.
GaussianDiag hand_model_accel(const State& s, const Control& c, const HovParams& p);

// Samples train/valid/test trajectories from randomized initial states under
// the scripted Ornstein-Uhlenbeck thrust policy. Pure function of arguments.
Dataset generate_dataset(std::uint64_t seed, const DatasetSpec& spec, const HovParams& p);

}  // namespace steady
