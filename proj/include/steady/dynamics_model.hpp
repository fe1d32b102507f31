#pragma once

#include <Eigen/Core>

#include "steady/hovercraft.hpp"
#include "steady/neural_dynamics.hpp"
#include "steady/rng.hpp"

namespace steady {

// A stochastic body-frame acceleration model: given per-row inputs
// (v_lon, v_lat, omega, u_left, u_right) in physical units it fills the mean
// and standard deviation of the Gaussian over (a_lon, a_lat, alpha). All
// filters, learners and evaluators talk to dynamics through this interface so
// that the learned network, the analytic hand model and the simulator's own
// equations are interchangeable.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual void accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          Eigen::Ref<Eigen::MatrixXd> mean,
                          Eigen::Ref<Eigen::MatrixXd> std) const = 0;
};

class NeuralDynamicsModel final : public DynamicsModel {
 public:
  explicit NeuralDynamicsModel(const DynamicsParams& params) : params_(&params) {}
  void accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                  Eigen::Ref<Eigen::MatrixXd> mean,
                  Eigen::Ref<Eigen::MatrixXd> std) const override;

 private:
  const DynamicsParams* params_;
};

// The simplified analytic model (drag terms dropped, inflated noise).
class HandModel final : public DynamicsModel {
 public:
  explicit HandModel(const HovParams& params) : params_(hand_model_params(params)) {}
  void accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                  Eigen::Ref<Eigen::MatrixXd> mean,
                  Eigen::Ref<Eigen::MatrixXd> std) const override;

 private:
  HovParams params_;
};

// The simulator's exact equations wrapped as a model (reference/testing).
class TrueModel final : public DynamicsModel {
 public:
  explicit TrueModel(const HovParams& params) : params_(params) {}
  void accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                  Eigen::Ref<Eigen::MatrixXd> mean,
                  Eigen::Ref<Eigen::MatrixXd> std) const override;

 private:
  HovParams params_;
};

// Builds the N x 5 model-input matrix (body-frame velocities + controls) for
// a batch of packed states sharing one control.
void model_inputs(const Eigen::Ref<const Eigen::MatrixXd>& states, const Control& control,
                  Eigen::Ref<Eigen::MatrixXd> inputs);

// Semi-implicit Euler step of a packed state batch under a dynamics model.
// `noise` of shape N x 3 holds standard normal draws scaled by the model's
// std (pass zeros for the mean rollout); per-row controls via `u`.
void step_states_batch(const DynamicsModel& model,
                       const Eigen::Ref<const Eigen::MatrixXd>& states,
                       const Eigen::Ref<const Eigen::MatrixXd>& u,
                       const Eigen::Ref<const Eigen::MatrixXd>& noise, double dt,
                       Eigen::Ref<Eigen::MatrixXd> next);

}  // namespace steady
