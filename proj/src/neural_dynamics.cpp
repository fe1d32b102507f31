#include "steady/neural_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace steady {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;

inline double softplus_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double softplus_inv(double y) {
  if (y <= 0.0) throw std::invalid_argument("softplus_inv: argument must be positive");
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

DynamicsParams DynamicsParams::zeros() {
  DynamicsParams p;
  p.w1 = Eigen::MatrixXd::Zero(kNetHiddenDim, kNetInputDim);
  p.b1 = Eigen::VectorXd::Zero(kNetHiddenDim);
  p.w_mu = Eigen::MatrixXd::Zero(kNetOutputDim, kNetHiddenDim);
  p.b_mu = Eigen::VectorXd::Zero(kNetOutputDim);
  p.w_skip = Eigen::MatrixXd::Zero(kNetOutputDim, kNetInputDim);
  p.w_sig = Eigen::MatrixXd::Zero(kNetOutputDim, kNetInputDim);
  p.b_sig = Eigen::VectorXd::Zero(kNetOutputDim);
  return p;
}

DynamicsParams& DynamicsParams::operator+=(const DynamicsParams& other) {
  w1 += other.w1;
  b1 += other.b1;
  w_mu += other.w_mu;
  b_mu += other.b_mu;
  w_skip += other.w_skip;
  w_sig += other.w_sig;
  b_sig += other.b_sig;
  return *this;
}

DynamicsParams& DynamicsParams::operator*=(double k) {
  for_each_tensor([k](Eigen::Ref<Eigen::MatrixXd> t) { t *= k; });
  return *this;
}

bool DynamicsParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&ok](const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

bool DynamicsParams::same_shape(const DynamicsParams& other) const {
  return w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
         b1.size() == other.b1.size() && w_mu.rows() == other.w_mu.rows() &&
         w_mu.cols() == other.w_mu.cols() && b_mu.size() == other.b_mu.size() &&
         w_skip.rows() == other.w_skip.rows() && w_skip.cols() == other.w_skip.cols() &&
         w_sig.rows() == other.w_sig.rows() && w_sig.cols() == other.w_sig.cols() &&
         b_sig.size() == other.b_sig.size();
}

NetInput make_input(const State& s, const Control& c, const InputScales& scales) {
  const Vec2 v_body = to_local(s.pose.theta, {s.vx, s.vy});
  NetInput inp;
  inp.z << v_body.x / scales.velocity, v_body.y / scales.velocity, s.omega / scales.omega,
      c.u_left / scales.thrust, c.u_right / scales.thrust;
  return inp;
}

DynamicsParams init_params(std::uint64_t seed, const Accel& sigma0, const InputScales& scales) {
  for (double s : sigma0)
    if (s <= 0.0) throw std::invalid_argument("init_params: sigma0 must be positive");
  DynamicsParams p = DynamicsParams::zeros();
  p.scales = scales;
  RngStream rng(seed, rng_salt::kParamInit);
  const double he_std = std::sqrt(2.0 / kNetInputDim);
  for (int i = 0; i < kNetHiddenDim; ++i)
    for (int j = 0; j < kNetInputDim; ++j) p.w1(i, j) = rng.normal(0.0, he_std);
  for (int k = 0; k < kNetOutputDim; ++k) p.b_sig(k) = softplus_inv(sigma0[k]);
  return p;
}

GaussianDiag predict(const DynamicsParams& params, const NetInput& inp) {
  const Eigen::VectorXd h = ((params.w1 * inp.z + params.b1).array().max(0.0)).matrix();
  const Eigen::Vector3d mu = params.w_mu * h + params.w_skip * inp.z + params.b_mu;
  const Eigen::Vector3d pre = params.w_sig * inp.z + params.b_sig;
  GaussianDiag out;
  for (int k = 0; k < kNetOutputDim; ++k) {
    out.mean[k] = mu(k);
    out.std[k] = softplus(pre(k));
  }
  return out;
}

void predict_batch(const DynamicsParams& params,
                   const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                   Eigen::Ref<Eigen::MatrixXd> mean, Eigen::Ref<Eigen::MatrixXd> std) {
  // Row-per-sample layout keeps each input column contiguous; the products
  // below run as (B x in) * (in x hidden) GEMMs.
  Eigen::MatrixXd h = inputs * params.w1.transpose();
  h.rowwise() += params.b1.transpose();
  h = h.cwiseMax(0.0);
  mean.noalias() = h * params.w_mu.transpose() + inputs * params.w_skip.transpose();
  mean.rowwise() += params.b_mu.transpose();
  std.noalias() = inputs * params.w_sig.transpose();
  std.rowwise() += params.b_sig.transpose();
  std = std.unaryExpr([](double x) { return softplus(x); });
}

StepOutcome step_model(const DynamicsParams& params, const State& s, const Control& c, double dt,
                       const Accel& eps) {
  if (dt <= 0.0) throw std::invalid_argument("step_model: dt must be positive");
  const GaussianDiag dist = predict(params, make_input(s, c, params.scales));
  StepOutcome out;
  for (int k = 0; k < kNetOutputDim; ++k)
    out.realized_accel[k] = dist.mean[k] + dist.std[k] * eps[k];
  out.next = integrate_step(s, out.realized_accel, dt);
  return out;
}

StepOutcome step_model(const DynamicsParams& params, const State& s, const Control& c, double dt,
                       RngStream& rng) {
  const Accel eps{rng.normal(), rng.normal(), rng.normal()};
  return step_model(params, s, c, dt, eps);
}

Accel realized_accel(const State& s, const State& s_next, double dt) {
  const Vec2 v0 = to_local(s.pose.theta, {s.vx, s.vy});
  const Vec2 v1 = to_local(s.pose.theta, {s_next.vx, s_next.vy});
  return {(v1.x - v0.x) / dt, (v1.y - v0.y) / dt, (s_next.omega - s.omega) / dt};
}

double transition_log_density(const DynamicsParams& params, const State& s, const Control& c,
                              const State& s_next, double dt) {
  const GaussianDiag dist = predict(params, make_input(s, c, params.scales));
  const Accel a = realized_accel(s, s_next, dt);
  double total = 0.0;
  for (int k = 0; k < kNetOutputDim; ++k) {
    const double r = (a[k] - dist.mean[k]) / dist.std[k];
    total += -0.5 * kLogTwoPi - std::log(dist.std[k]) - 0.5 * r * r;
  }
  return total;
}

ValueAndGrad grad_log_density(const DynamicsParams& params, const std::vector<Transition>& batch,
                              double dt) {
  if (batch.empty()) throw std::invalid_argument("grad_log_density: empty batch");
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());

  // Forward pass, column per sample.
  Eigen::MatrixXd z(kNetInputDim, n);
  Eigen::MatrixXd target(kNetOutputDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& tr = batch[i];
    z.col(i) = make_input(tr.s, tr.c, params.scales).z;
    const Accel a = realized_accel(tr.s, tr.s_next, dt);
    target.col(i) << a[0], a[1], a[2];
  }

  Eigen::MatrixXd pre_h = params.w1 * z;
  pre_h.colwise() += params.b1;
  const Eigen::MatrixXd h = pre_h.cwiseMax(0.0);
  Eigen::MatrixXd mu = params.w_mu * h + params.w_skip * z;
  mu.colwise() += params.b_mu;
  Eigen::MatrixXd pre_sig = params.w_sig * z;
  pre_sig.colwise() += params.b_sig;
  const Eigen::MatrixXd sig = pre_sig.unaryExpr([](double x) { return softplus(x); });

  const Eigen::ArrayXXd resid = (target - mu).array();
  const Eigen::ArrayXXd inv_sig = sig.array().inverse();
  const Eigen::ArrayXXd scaled = resid * inv_sig;

  const double inv_n = 1.0 / static_cast<double>(n);
  ValueAndGrad out;
  out.value = inv_n * (-0.5 * kLogTwoPi * static_cast<double>(kNetOutputDim * n) -
                       sig.array().log().sum() - 0.5 * (scaled * scaled).sum());

  // d value / d mu and d value / d pre_sig.
  const Eigen::MatrixXd g_mu = (inv_n * scaled * inv_sig).matrix();
  const Eigen::MatrixXd g_pre_sig =
      (inv_n * (scaled * scaled - 1.0) * inv_sig *
       pre_sig.array().unaryExpr([](double x) { return softplus_deriv(x); }))
          .matrix();

  out.grad = DynamicsParams::zeros();
  out.grad.scales = params.scales;
  out.grad.w_mu.noalias() = g_mu * h.transpose();
  out.grad.b_mu = g_mu.rowwise().sum();
  out.grad.w_skip.noalias() = g_mu * z.transpose();
  out.grad.w_sig.noalias() = g_pre_sig * z.transpose();
  out.grad.b_sig = g_pre_sig.rowwise().sum();

  Eigen::MatrixXd g_h = params.w_mu.transpose() * g_mu;
  g_h = (pre_h.array() > 0.0).select(g_h, 0.0);
  out.grad.w1.noalias() = g_h * z.transpose();
  out.grad.b1 = g_h.rowwise().sum();
  return out;
}

}  // namespace steady
