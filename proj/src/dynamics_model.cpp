#include "steady/dynamics_model.hpp"

#include <stdexcept>

#include "steady/geometry.hpp"

namespace steady {

void NeuralDynamicsModel::accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                     Eigen::Ref<Eigen::MatrixXd> mean,
                                     Eigen::Ref<Eigen::MatrixXd> std) const {
  Eigen::MatrixXd z = inputs;
  z.col(0) /= params_->scales.velocity;
  z.col(1) /= params_->scales.velocity;
  z.col(2) /= params_->scales.omega;
  z.col(3) /= params_->scales.thrust;
  z.col(4) /= params_->scales.thrust;
  predict_batch(*params_, z, mean, std);
}

namespace {

// Shared analytic form: thrust and lever-arm torque with quadratic drag.
void analytic_accel(const HovParams& p, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                    Eigen::Ref<Eigen::MatrixXd> mean, Eigen::Ref<Eigen::MatrixXd> std) {
  const auto v_lon = inputs.col(0).array();
  const auto v_lat = inputs.col(1).array();
  const auto omega = inputs.col(2).array();
  const auto u_l = inputs.col(3).array();
  const auto u_r = inputs.col(4).array();
  mean.col(0) = (u_l + u_r - p.drag_lin * v_lon * v_lon.abs()) / p.mass;
  mean.col(1) = (-p.drag_lin * v_lat * v_lat.abs()) / p.mass;
  mean.col(2) = (p.arm * (u_r - u_l) - p.drag_rot * omega * omega.abs()) / p.inertia;
  std.col(0).setConstant(p.sigma_acc);
  std.col(1).setConstant(p.sigma_acc);
  std.col(2).setConstant(p.sigma_alpha);
}

}  // namespace

void HandModel::accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                           Eigen::Ref<Eigen::MatrixXd> mean,
                           Eigen::Ref<Eigen::MatrixXd> std) const {
  analytic_accel(params_, inputs, mean, std);
}

void TrueModel::accel_dist(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                           Eigen::Ref<Eigen::MatrixXd> mean,
                           Eigen::Ref<Eigen::MatrixXd> std) const {
  analytic_accel(params_, inputs, mean, std);
}

void model_inputs(const Eigen::Ref<const Eigen::MatrixXd>& states, const Control& control,
                  Eigen::Ref<Eigen::MatrixXd> inputs) {
  const auto theta = states.col(2).array();
  const Eigen::ArrayXd c = theta.cos();
  const Eigen::ArrayXd s = theta.sin();
  const auto vx = states.col(3).array();
  const auto vy = states.col(4).array();
  inputs.col(0) = c * vx + s * vy;
  inputs.col(1) = -s * vx + c * vy;
  inputs.col(2) = states.col(5);
  inputs.col(3).setConstant(control.u_left);
  inputs.col(4).setConstant(control.u_right);
}

void step_states_batch(const DynamicsModel& model,
                       const Eigen::Ref<const Eigen::MatrixXd>& states,
                       const Eigen::Ref<const Eigen::MatrixXd>& u,
                       const Eigen::Ref<const Eigen::MatrixXd>& noise, double dt,
                       Eigen::Ref<Eigen::MatrixXd> next) {
  const Eigen::Index n = states.rows();
  if (u.rows() != n || noise.rows() != n || next.rows() != n)
    throw std::invalid_argument("step_states_batch: row count mismatch");

  const auto theta = states.col(2).array();
  const Eigen::ArrayXd c = theta.cos();
  const Eigen::ArrayXd s = theta.sin();
  const auto vx = states.col(3).array();
  const auto vy = states.col(4).array();

  Eigen::MatrixXd inputs(n, 5);
  inputs.col(0) = c * vx + s * vy;
  inputs.col(1) = -s * vx + c * vy;
  inputs.col(2) = states.col(5);
  inputs.col(3) = u.col(0);
  inputs.col(4) = u.col(1);

  Eigen::MatrixXd mean(n, 3), std(n, 3);
  model.accel_dist(inputs, mean, std);
  const Eigen::MatrixXd accel = mean + std.cwiseProduct(noise);

  // Velocity first (body frame, rotated out with the pre-step heading), then
  // the pose integrates the updated velocity.
  const Eigen::ArrayXd v_lon = inputs.col(0).array() + accel.col(0).array() * dt;
  const Eigen::ArrayXd v_lat = inputs.col(1).array() + accel.col(1).array() * dt;
  const Eigen::ArrayXd omega = states.col(5).array() + accel.col(2).array() * dt;
  const Eigen::ArrayXd vx_next = c * v_lon - s * v_lat;
  const Eigen::ArrayXd vy_next = s * v_lon + c * v_lat;

  next.col(0) = states.col(0).array() + vx_next * dt;
  next.col(1) = states.col(1).array() + vy_next * dt;
  next.col(2) = (theta + omega * dt).unaryExpr([](double a) { return wrap_angle(a); });
  next.col(3) = vx_next;
  next.col(4) = vy_next;
  next.col(5) = omega;
}

}  // namespace steady
