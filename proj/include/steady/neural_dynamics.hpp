#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "steady/hovercraft.hpp"

namespace steady {

// Fixed architecture: one 64-unit ReLU hidden layer feeding the mean head,
// a linear skip path from the inputs to the mean, and a linear-softplus head
// for the per-component std of the predicted body-frame acceleration.
inline constexpr int kNetInputDim = 5;   // v_lon, v_lat, omega, u_left, u_right
inline constexpr int kNetHiddenDim = 64;
inline constexpr int kNetOutputDim = 3;  // a_lon, a_lat, alpha

// Inputs are divided by fixed scales so the hidden layer sees unit-order
// values: velocities by 3 m/s, yaw rate by 3 rad/s, thrusts by u_max.
struct InputScales {
  double velocity = 3.0;
  double omega = 3.0;
  double thrust = 1.0;  // u_max
};

struct DynamicsParams {
  Eigen::MatrixXd w1;      // 64 x 5
  Eigen::VectorXd b1;      // 64
  Eigen::MatrixXd w_mu;    // 3 x 64
  Eigen::VectorXd b_mu;    // 3
  Eigen::MatrixXd w_skip;  // 3 x 5
  Eigen::MatrixXd w_sig;   // 3 x 5
  Eigen::VectorXd b_sig;   // 3

  InputScales scales;

  static DynamicsParams zeros();

  DynamicsParams& operator+=(const DynamicsParams& other);
  DynamicsParams& operator*=(double k);

  // Applies fn to every tensor of *this paired with the same tensor of the
  // others; used by the optimizer to avoid seven near-identical loops.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn(w1); fn(b1); fn(w_mu); fn(b_mu); fn(w_skip); fn(w_sig); fn(b_sig);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    fn(w1); fn(b1); fn(w_mu); fn(b_mu); fn(w_skip); fn(w_sig); fn(b_sig);
  }

  bool all_finite() const;
  bool same_shape(const DynamicsParams& other) const;
};

// Normalized network input; build only via make_input so the local-frame
// transform cannot be skipped.
struct NetInput {
  Eigen::Matrix<double, kNetInputDim, 1> z;
};

NetInput make_input(const State& s, const Control& c, const InputScales& scales);

// Mean-zero, large-sigma initialization: the mean heads start at exactly zero
// (so the model predicts pure velocity carry-over) and softplus(b_sig) equals
// sigma0 componentwise. W1 is He-scaled random.
DynamicsParams init_params(std::uint64_t seed, const Accel& sigma0,
                           const InputScales& scales = {});

// Overflow-safe softplus and its inverse.
double softplus(double x);
double softplus_inv(double y);

GaussianDiag predict(const DynamicsParams& params, const NetInput& inp);

// Batched prediction: inputs is B x 5 (already normalized, one row per
// sample); mean/std outputs are B x 3.
void predict_batch(const DynamicsParams& params,
                   const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                   Eigen::Ref<Eigen::MatrixXd> mean, Eigen::Ref<Eigen::MatrixXd> std);

// Samples (or, with eps = 0, takes the mean of) the predicted acceleration
// and advances the state with the shared semi-implicit integrator.
struct StepOutcome {
  State next;
  Accel realized_accel;
};
StepOutcome step_model(const DynamicsParams& params, const State& s, const Control& c, double dt,
                       const Accel& eps);
StepOutcome step_model(const DynamicsParams& params, const State& s, const Control& c, double dt,
                       RngStream& rng);

// Body-frame acceleration realized by the transition s -> s_next, using s's
// heading for both frames (matches the integrator exactly).
Accel realized_accel(const State& s, const State& s_next, double dt);

// Log-density of s_next's velocity coordinates under the predicted Gaussian;
// pose coordinates are deterministic and ignored.
double transition_log_density(const DynamicsParams& params, const State& s, const Control& c,
                              const State& s_next, double dt);

struct Transition {
  State s;
  Control c;
  State s_next;
};

// Mean transition log-density over the batch and its exact reverse-mode
// gradient with respect to every parameter tensor.
struct ValueAndGrad {
  double value = 0.0;
  DynamicsParams grad;
};
ValueAndGrad grad_log_density(const DynamicsParams& params, const std::vector<Transition>& batch,
                              double dt);

}  // namespace steady
