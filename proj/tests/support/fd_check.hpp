#pragma once

// Central finite-difference verification of grad_log_density, shared by the
// unit suite and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "steady/neural_dynamics.hpp"
#include "steady/rng.hpp"

namespace steady::test {

// Max over parameter components of |analytic - central FD| relative error,
// with the denominator floored so FD roundoff on near-zero components cannot
// dominate.
inline double fd_max_rel_err(DynamicsParams params, const std::vector<Transition>& batch,
                             double dt, double h = 1e-5, double floor = 1e-5) {
  const DynamicsParams grad = grad_log_density(params, batch, dt).grad;

  std::vector<std::pair<double*, Eigen::Index>> live;
  params.for_each_tensor([&](auto& t) { live.push_back({t.data(), t.size()}); });
  std::vector<std::pair<const double*, Eigen::Index>> grads;
  grad.for_each_tensor([&](const auto& t) { grads.push_back({t.data(), t.size()}); });

  double worst = 0.0;
  for (std::size_t k = 0; k < live.size(); ++k) {
    for (Eigen::Index i = 0; i < live[k].second; ++i) {
      double* x = live[k].first + i;
      const double save = *x;
      *x = save + h;
      const double fp = grad_log_density(params, batch, dt).value;
      *x = save - h;
      const double fm = grad_log_density(params, batch, dt).value;
      *x = save;
      const double fd = (fp - fm) / (2.0 * h);
      const double g = grads[k].first[i];
      const double denom = std::max({std::abs(fd), std::abs(g), floor});
      worst = std::max(worst, std::abs(fd - g) / denom);
    }
  }
  return worst;
}

// Random parameters with every tensor populated (unlike init_params, which
// zeroes the mean heads) so gradient checks exercise all paths.
inline DynamicsParams random_params(RngStream& rng, double scale = 0.3) {
  DynamicsParams p = init_params(rng.next_u64(), Accel{0.5, 0.5, 0.25});
  p.for_each_tensor([&](auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += rng.normal(0.0, scale);
  });
  return p;
}

// A batch of transitions whose successors really come from the model, so the
// residuals have typical magnitude.
inline std::vector<Transition> random_batch(const DynamicsParams& params, int size, double dt,
                                            RngStream& rng) {
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    State s;
    s.pose = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-kPi, kPi)};
    s.vx = rng.normal(0.0, 1.0);
    s.vy = rng.normal(0.0, 1.0);
    s.omega = rng.normal(0.0, 0.8);
    const Control c{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    const StepOutcome step = step_model(params, s, c, dt, rng);
    batch.push_back({s, c, step.next});
  }
  return batch;
}

}  // namespace steady::test
