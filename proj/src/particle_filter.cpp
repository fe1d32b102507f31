#include "steady/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace steady {

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& log_weights) {
  const double lse = log_sum_exp(log_weights);
  const Eigen::ArrayXd w = (log_weights.array() - lse).exp();
  return 1.0 / (w * w).sum();
}

Eigen::VectorXi systematic_resample(const Eigen::Ref<const Eigen::VectorXd>& log_weights,
                                    RngStream& rng) {
  const int n = static_cast<int>(log_weights.size());
  if (n < 1) throw std::invalid_argument("systematic_resample: empty weight vector");
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse))
    throw std::invalid_argument("systematic_resample: all weights are zero");
  Eigen::ArrayXd w = (log_weights.array() - lse).exp();
  w /= w.sum();  // remove residual normalization drift

  // One shared offset in (0, 1]: target i sits at (i + u0)/n, so the number
  // of targets landing in particle j's cumulative-weight slot is either
  // floor(n*w_j) or ceil(n*w_j). The half-open-at-zero offset keeps uniform
  // weights mapping to the identity permutation.
  const double u0 = 1.0 - rng.uniform();
  Eigen::VectorXi out(n);
  double cum = w(0);
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double target = (static_cast<double>(i) + u0) / n;
    while (cum < target && j < n - 1) cum += w(++j);
    out(i) = j;
  }
  return out;
}

FilterResult filter_forward(const StateSpaceSystem& system, const FilterConfig& cfg) {
  const int n = cfg.n_particles;
  const int t_end = system.num_steps();
  const int dim = system.state_dim();
  if (n < 1) throw std::invalid_argument("filter_forward: need at least one particle");
  if (t_end < 1) throw std::invalid_argument("filter_forward: need at least one time step");
  if (cfg.w_obs < 0.0 || cfg.w_obs > 1.0)
    throw std::invalid_argument("filter_forward: w_obs must lie in [0, 1]");

  FilterResult result;
  result.cloud.states.resize(t_end);
  result.cloud.log_weights.resize(t_end);
  result.cloud.ancestors.resize(t_end);
  result.ess.resize(t_end);

  const double log_uniform = -std::log(static_cast<double>(n));
  Eigen::VectorXi identity(n);
  std::iota(identity.data(), identity.data() + n, 0);

  Eigen::MatrixXd proposed(n, dim);
  Eigen::VectorXd log_lik(n);

  for (int t = 0; t < t_end; ++t) {
    if (t == 0) {
      RngStream init_rng(cfg.rng_seed, rng_salt::kFilterInit);
      system.sample_initial(init_rng, proposed);
    } else {
      RngStream step_rng(cfg.rng_seed, rng_salt::kFilterStep, static_cast<std::uint64_t>(t));
      system.propagate(result.cloud.states[t - 1], t - 1, step_rng, proposed);
    }

    if (system.has_observation(t) && cfg.w_obs > 0.0) {
      log_lik.setZero();
      system.observation_log_density(proposed, t, log_lik);
      log_lik *= cfg.w_obs;
      const double lse = log_sum_exp(log_lik);
      if (!std::isfinite(lse)) throw ParticleDeathError(t, "all observation weights underflowed");
      result.log_marginal += lse + log_uniform;
      result.ess[t] = effective_sample_size(log_lik);
      RngStream resample_rng(cfg.rng_seed, rng_salt::kFilterResample,
                             static_cast<std::uint64_t>(t));
      const Eigen::VectorXi idx = systematic_resample(log_lik, resample_rng);
      result.cloud.states[t] = proposed(idx, Eigen::all);
      result.cloud.ancestors[t] = idx;
    } else {
      result.cloud.states[t] = proposed;
      result.cloud.ancestors[t] = identity;
      result.ess[t] = static_cast<double>(n);
    }
    result.cloud.log_weights[t] = Eigen::VectorXd::Constant(n, log_uniform);
  }
  return result;
}

std::vector<Eigen::MatrixXd> sample_trajectories(const FilterResult& result, int m,
                                                 RngStream& rng) {
  const int t_end = result.cloud.num_steps();
  const int n = result.cloud.num_particles();
  if (t_end < 1 || n < 1) throw std::invalid_argument("sample_trajectories: empty filter result");
  if (m < 1) throw std::invalid_argument("sample_trajectories: need at least one draw");
  const int dim = static_cast<int>(result.cloud.states[0].cols());

  // Cumulative weights of the final step for the categorical draw.
  const Eigen::VectorXd& lw = result.cloud.log_weights[t_end - 1];
  Eigen::VectorXd cum = (lw.array() - log_sum_exp(lw)).exp();
  for (int i = 1; i < n; ++i) cum(i) += cum(i - 1);

  std::vector<Eigen::MatrixXd> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double u = rng.uniform() * cum(n - 1);
    int j = static_cast<int>(std::lower_bound(cum.data(), cum.data() + n, u) - cum.data());
    j = std::min(j, n - 1);
    Eigen::MatrixXd traj(t_end, dim);
    traj.row(t_end - 1) = result.cloud.states[t_end - 1].row(j);
    for (int t = t_end - 1; t > 0; --t) {
      j = result.cloud.ancestors[t](j);
      traj.row(t - 1) = result.cloud.states[t - 1].row(j);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

Eigen::MatrixXd posterior_means(const FilterResult& result, const std::vector<int>& angular_dims) {
  const int t_end = result.cloud.num_steps();
  if (t_end < 1) throw std::invalid_argument("posterior_means: empty filter result");
  const int dim = static_cast<int>(result.cloud.states[0].cols());
  Eigen::MatrixXd out(t_end, dim);
  for (int t = 0; t < t_end; ++t) {
    const Eigen::VectorXd& lw = result.cloud.log_weights[t];
    const Eigen::VectorXd w = (lw.array() - log_sum_exp(lw)).exp();
    out.row(t) = w.transpose() * result.cloud.states[t];
    for (int a : angular_dims) {
      const auto col = result.cloud.states[t].col(a).array();
      out(t, a) = std::atan2((w.array() * col.sin()).sum(), (w.array() * col.cos()).sum());
    }
  }
  return out;
}

Eigen::VectorXd posterior_quantile(const FilterResult& result, int column, double q) {
  const int t_end = result.cloud.num_steps();
  if (t_end < 1) throw std::invalid_argument("posterior_quantile: empty filter result");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("posterior_quantile: q outside [0, 1]");
  const int n = result.cloud.num_particles();
  Eigen::VectorXd out(t_end);
  std::vector<int> order(n);
  for (int t = 0; t < t_end; ++t) {
    const auto col = result.cloud.states[t].col(column);
    const Eigen::VectorXd& lw = result.cloud.log_weights[t];
    const Eigen::VectorXd w = (lw.array() - log_sum_exp(lw)).exp();
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return col(a) < col(b); });
    double cum = 0.0;
    out(t) = col(order.back());
    for (int i : order) {
      cum += w(i);
      if (cum >= q) {
        out(t) = col(i);
        break;
      }
    }
  }
  return out;
}

// --- Hovercraft instantiation -------------------------------------------

Eigen::Matrix<double, 1, kStateDim> pack_state(const State& s) {
  Eigen::Matrix<double, 1, kStateDim> row;
  row << s.pose.x, s.pose.y, s.pose.theta, s.vx, s.vy, s.omega;
  return row;
}

State unpack_state(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  State s;
  s.pose.x = row(kStateX);
  s.pose.y = row(kStateY);
  s.pose.theta = row(kStateTheta);
  s.vx = row(kStateVx);
  s.vy = row(kStateVy);
  s.omega = row(kStateOmega);
  return s;
}

HovFilterProblem::HovFilterProblem(const DynamicsModel& model, const ObservationSequence& obs,
                                   const std::vector<Control>& controls, const LandmarkMap& map,
                                   InitialStateDist q_x1, double dt)
    : model_(&model), obs_(&obs), controls_(&controls), map_(&map), q_x1_(q_x1), dt_(dt) {
  if (obs.steps.empty()) throw std::invalid_argument("HovFilterProblem: empty observation sequence");
  if (controls.size() + 1 < obs.steps.size())
    throw std::invalid_argument("HovFilterProblem: control sequence shorter than steps - 1");
  if (dt <= 0.0) throw std::invalid_argument("HovFilterProblem: dt must be positive");
}

void HovFilterProblem::sample_initial(RngStream& rng,
                                      Eigen::Ref<Eigen::MatrixXd> states) const {
  const Eigen::Index n = states.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    states(i, kStateX) = rng.uniform(-q_x1_.pos_halfwidth, q_x1_.pos_halfwidth);
    states(i, kStateY) = rng.uniform(-q_x1_.pos_halfwidth, q_x1_.pos_halfwidth);
    states(i, kStateTheta) = wrap_angle(rng.uniform(-kPi, kPi));
  }
  states.col(kStateVx).setZero();
  states.col(kStateVy).setZero();
  states.col(kStateOmega).setZero();
}

void HovFilterProblem::propagate(const Eigen::Ref<const Eigen::MatrixXd>& current, int step,
                                 RngStream& rng, Eigen::Ref<Eigen::MatrixXd> next) const {
  const Eigen::Index n = current.rows();
  const Control& c = (*controls_)[static_cast<std::size_t>(step)];
  Eigen::MatrixXd u(n, 2);
  u.col(0).setConstant(c.u_left);
  u.col(1).setConstant(c.u_right);
  Eigen::MatrixXd noise(n, 3);
  rng.fill_normal(noise);
  step_states_batch(*model_, current, u, noise, dt_, next);
}

void HovFilterProblem::observation_log_density(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                               int t, Eigen::Ref<Eigen::VectorXd> out) const {
  log_likelihood_batch(*obs_->steps[t], states, *map_, obs_->sigma_bearing, out);
}

FilterResult filter_forward(const DynamicsModel& model, const ObservationSequence& obs,
                            const std::vector<Control>& controls, const LandmarkMap& map,
                            const InitialStateDist& q_x1, double dt, const FilterConfig& cfg) {
  const HovFilterProblem problem(model, obs, controls, map, q_x1, dt);
  return filter_forward(problem, cfg);
}

}  // namespace steady
