#pragma once

// Exact linear-Gaussian references used to cross-check the particle filter:
// a scalar Kalman filter / RTS smoother pair with the exact log marginal
// likelihood, plus a StateSpaceSystem wrapper around the same model so the
// particle filter can run on it unchanged.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "steady/particle_filter.hpp"
#include "steady/rng.hpp"

namespace steady::test {

// x_0 ~ N(mu0, var0); x_{t+1} = a x_t + b + N(0, q); y_t = x_t + N(0, r).
struct Lg1Model {
  double mu0 = 0.0;
  double var0 = 1.0;
  double a = 0.9;
  double b = 0.1;
  double q = 0.04;
  double r = 0.25;
};

struct KalmanRun {
  std::vector<double> filt_mean;    // posterior mean after conditioning on y_t
  std::vector<double> filt_var;
  std::vector<double> smooth_mean;  // RTS smoother
  std::vector<double> smooth_var;
  double log_marginal = 0.0;        // exact log p(y_{observed})
};

// `ys[t]` empty marks an unobserved step.
inline KalmanRun kalman_reference(const Lg1Model& m, const std::vector<std::optional<double>>& ys) {
  const int T = static_cast<int>(ys.size());
  KalmanRun out;
  out.filt_mean.resize(T);
  out.filt_var.resize(T);
  out.smooth_mean.resize(T);
  out.smooth_var.resize(T);

  for (int t = 0; t < T; ++t) {
    double pred_mean = m.mu0;
    double pred_var = m.var0;
    if (t > 0) {
      pred_mean = m.a * out.filt_mean[t - 1] + m.b;
      pred_var = m.a * m.a * out.filt_var[t - 1] + m.q;
    }
    if (ys[t]) {
      const double s = pred_var + m.r;
      const double resid = *ys[t] - pred_mean;
      out.log_marginal += -0.5 * std::log(2.0 * M_PI * s) - 0.5 * resid * resid / s;
      const double k = pred_var / s;
      out.filt_mean[t] = pred_mean + k * resid;
      out.filt_var[t] = (1.0 - k) * pred_var;
    } else {
      out.filt_mean[t] = pred_mean;
      out.filt_var[t] = pred_var;
    }
  }

  out.smooth_mean[T - 1] = out.filt_mean[T - 1];
  out.smooth_var[T - 1] = out.filt_var[T - 1];
  for (int t = T - 2; t >= 0; --t) {
    const double pred_mean = m.a * out.filt_mean[t] + m.b;
    const double pred_var = m.a * m.a * out.filt_var[t] + m.q;
    const double g = out.filt_var[t] * m.a / pred_var;
    out.smooth_mean[t] = out.filt_mean[t] + g * (out.smooth_mean[t + 1] - pred_mean);
    out.smooth_var[t] = out.filt_var[t] + g * g * (out.smooth_var[t + 1] - pred_var);
  }
  return out;
}

struct Lg1Data {
  std::vector<double> xs;
  std::vector<std::optional<double>> ys;
};

// Simulates one trajectory; `stride` controls which steps carry observations
// (step t observed iff t % stride == 0).
inline Lg1Data simulate_lg1(const Lg1Model& m, int T, int stride, RngStream& rng) {
  Lg1Data data;
  data.xs.resize(T);
  data.ys.resize(T);
  data.xs[0] = rng.normal(m.mu0, std::sqrt(m.var0));
  for (int t = 1; t < T; ++t) data.xs[t] = rng.normal(m.a * data.xs[t - 1] + m.b, std::sqrt(m.q));
  for (int t = 0; t < T; ++t)
    if (t % stride == 0) data.ys[t] = rng.normal(data.xs[t], std::sqrt(m.r));
  return data;
}

// The same scalar model exposed through the filter's system interface.
class Lg1System final : public StateSpaceSystem {
 public:
  Lg1System(Lg1Model model, std::vector<std::optional<double>> ys)
      : model_(model), ys_(std::move(ys)) {}

  int state_dim() const override { return 1; }
  int num_steps() const override { return static_cast<int>(ys_.size()); }

  void sample_initial(RngStream& rng, Eigen::Ref<Eigen::MatrixXd> states) const override {
    const double sd = std::sqrt(model_.var0);
    for (Eigen::Index i = 0; i < states.rows(); ++i) states(i, 0) = rng.normal(model_.mu0, sd);
  }

  void propagate(const Eigen::Ref<const Eigen::MatrixXd>& current, int /*step*/, RngStream& rng,
                 Eigen::Ref<Eigen::MatrixXd> next) const override {
    const double sd = std::sqrt(model_.q);
    for (Eigen::Index i = 0; i < current.rows(); ++i)
      next(i, 0) = rng.normal(model_.a * current(i, 0) + model_.b, sd);
  }

  bool has_observation(int t) const override { return ys_[t].has_value(); }

  void observation_log_density(const Eigen::Ref<const Eigen::MatrixXd>& states, int t,
                               Eigen::Ref<Eigen::VectorXd> out) const override {
    const double y = *ys_[t];
    const double norm = -0.5 * std::log(2.0 * M_PI * model_.r);
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      const double resid = y - states(i, 0);
      out(i) += norm - 0.5 * resid * resid / model_.r;
    }
  }

 private:
  Lg1Model model_;
  std::vector<std::optional<double>> ys_;
};

}  // namespace steady::test
