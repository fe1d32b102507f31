#include "steady/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace steady {

namespace {

double holdout_score(const DynamicsParams& params, const std::vector<Transition>& holdout,
                     double dt) {
  return grad_log_density(params, holdout, dt).value;
}

}  // namespace

SupervisedFitResult fit_supervised(const SupervisedDataset& data, const SupervisedFitConfig& cfg) {
  const int n = static_cast<int>(data.transitions.size());
  if (n < 1) throw std::invalid_argument("fit_supervised: empty dataset");
  if (cfg.batch_size < 1 || cfg.max_steps < 0 || cfg.validation_every < 1 || cfg.patience < 1)
    throw std::invalid_argument("fit_supervised: invalid config");

  RngStream rng(cfg.seed, rng_salt::kSupervisedFit);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  // Held-out split for early stopping; tiny datasets score on themselves.
  const int n_hold =
      n >= 10 ? std::max(1, static_cast<int>(std::lround(cfg.holdout_fraction * n))) : 0;
  std::vector<Transition> holdout, pool;
  for (int i = 0; i < n; ++i) {
    const Transition& tr = data.transitions[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    (i < n_hold ? holdout : pool).push_back(tr);
  }
  if (holdout.empty()) holdout = pool;

  SupervisedFitResult out;
  out.params = init_params(derive_seed(cfg.seed, rng_salt::kParamInit), cfg.sigma0);
  AdamState adam = AdamState::init(cfg.lr);
  out.best_score = holdout_score(out.params, holdout, data.dt);
  out.best_step = 0;

  DynamicsParams params = out.params;
  std::vector<Transition> batch(static_cast<std::size_t>(cfg.batch_size));
  int bad_checks = 0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    for (Transition& slot : batch)
      slot = pool[static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(pool.size())))];
    const ValueAndGrad vg = grad_log_density(params, batch, data.dt);
    adam_update(adam, params, vg.grad);
    out.steps_run = step;
    if (step % cfg.validation_every == 0 || step == cfg.max_steps) {
      const double score = holdout_score(params, holdout, data.dt);
      if (score > out.best_score) {
        out.best_score = score;
        out.best_step = step;
        out.params = params;
        bad_checks = 0;
      } else if (++bad_checks >= cfg.patience) {
        break;
      }
    }
  }
  return out;
}

SupervisedDataset make_supervised_from_truth(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw std::invalid_argument("make_supervised_from_truth: no trajectories");
  SupervisedDataset out;
  out.dt = trajs[0].dt;
  for (const Trajectory& traj : trajs)
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t)
      out.transitions.push_back({traj.states[t], traj.controls[t], traj.states[t + 1]});
  return out;
}

SupervisedDataset fithand_estimate(const DynamicsModel& model,
                                   const std::vector<ObservedTrajectory>& trajs,
                                   const LandmarkMap& map, const InitialStateDist& q_x1,
                                   double dt, int n_particles, std::uint64_t seed) {
  if (trajs.empty()) throw std::invalid_argument("fithand_estimate: no trajectories");
  SupervisedDataset out;
  out.dt = dt;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    FilterConfig fc;
    fc.n_particles = n_particles;
    fc.w_obs = 1.0;
    fc.rng_seed = derive_seed(seed, rng_salt::kBaselineFilter, i);
    const FilterResult fr =
        filter_forward(model, trajs[i].obs, trajs[i].controls, map, q_x1, dt, fc);
    const Eigen::MatrixXd means = posterior_means(fr, {kStateTheta});
    for (Eigen::Index t = 0; t + 1 < means.rows(); ++t)
      out.transitions.push_back({unpack_state(means.row(t)),
                                 trajs[i].controls[static_cast<std::size_t>(t)],
                                 unpack_state(means.row(t + 1))});
  }
  return out;
}

// --- FitTV -----------------------------------------------------------------

namespace {

double pose_cost(const Observation& obs, const LandmarkMap& map, const Pose& p) {
  double cost = 0.0;
  for (std::size_t i = 0; i < map.positions.size(); ++i) {
    const double r = angle_diff(obs.bearings[i], bearing(p, map.positions[i]));
    cost += r * r;
  }
  return cost;
}

}  // namespace

PoseEstimate pose_mle(const Observation& obs, const LandmarkMap& map, const Pose& init) {
  const std::size_t n_lm = map.positions.size();
  if (n_lm < 3) throw std::invalid_argument("pose_mle: need >= 3 landmarks for 3 pose dof");
  if (obs.bearings.size() != n_lm)
    throw std::invalid_argument("pose_mle: bearing/landmark count mismatch");

  PoseEstimate est;
  est.pose = init;
  Eigen::VectorXd r(static_cast<Eigen::Index>(n_lm));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_lm), 3);
  double step_norm = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50 && step_norm > 1e-10; ++iter) {
    for (std::size_t i = 0; i < n_lm; ++i) {
      const double dx = map.positions[i].x - est.pose.x;
      const double dy = map.positions[i].y - est.pose.y;
      const double d2 = std::max(dx * dx + dy * dy, 1e-12);
      r(static_cast<Eigen::Index>(i)) =
          angle_diff(obs.bearings[i], bearing(est.pose, map.positions[i]));
      // d(residual)/d(pose) = -d(bearing)/d(pose)
      jac(static_cast<Eigen::Index>(i), 0) = -dy / d2;
      jac(static_cast<Eigen::Index>(i), 1) = dx / d2;
      jac(static_cast<Eigen::Index>(i), 2) = 1.0;
    }
    Eigen::Matrix3d jtj = jac.transpose() * jac;
    jtj.diagonal().array() += 1e-12;
    const Eigen::Vector3d delta = jtj.ldlt().solve(-jac.transpose() * r);
    est.pose.x += delta(0);
    est.pose.y += delta(1);
    est.pose.theta = wrap_angle(est.pose.theta + delta(2));
    step_norm = delta.norm();
  }
  est.flagged = !(step_norm <= 1e-8) || !std::isfinite(est.pose.x) || !std::isfinite(est.pose.y);
  return est;
}

PoseEstimate pose_mle_grid(const Observation& obs, const LandmarkMap& map,
                           double workspace_halfwidth) {
  constexpr int kGridPerAxis = 61;
  constexpr int kHeadings = 16;
  double best_cost = std::numeric_limits<double>::infinity();
  Pose best;
  for (int ix = 0; ix < kGridPerAxis; ++ix) {
    for (int iy = 0; iy < kGridPerAxis; ++iy) {
      Pose p;
      p.x = -workspace_halfwidth + 2.0 * workspace_halfwidth * ix / (kGridPerAxis - 1);
      p.y = -workspace_halfwidth + 2.0 * workspace_halfwidth * iy / (kGridPerAxis - 1);
      for (int ik = 0; ik < kHeadings; ++ik) {
        p.theta = wrap_angle(-kPi + kTwoPi * ik / kHeadings);
        const double cost = pose_cost(obs, map, p);
        if (cost < best_cost) {
          best_cost = cost;
          best = p;
        }
      }
    }
  }
  return pose_mle(obs, map, best);
}

PoseTrack estimate_pose_track(const ObservationSequence& obs, const LandmarkMap& map,
                              double workspace_halfwidth) {
  if (obs.steps.empty()) throw std::invalid_argument("estimate_pose_track: empty sequence");
  PoseTrack track;
  track.poses.reserve(obs.steps.size());
  track.flagged.reserve(obs.steps.size());
  for (std::size_t t = 0; t < obs.steps.size(); ++t) {
    if (!obs.steps[t].has_value())
      throw std::invalid_argument("estimate_pose_track: missing observation at step " +
                                  std::to_string(t));
    const PoseEstimate est = t == 0
                                 ? pose_mle_grid(*obs.steps[t], map, workspace_halfwidth)
                                 : pose_mle(*obs.steps[t], map, track.poses.back());
    track.poses.push_back(est.pose);
    track.flagged.push_back(est.flagged ? 1 : 0);
  }
  return track;
}

namespace {

double huber(double z, double eps) {
  const double a = std::abs(z);
  return a <= eps ? z * z / (2.0 * eps) : a - 0.5 * eps;
}

double huber_grad(double z, double eps) { return std::clamp(z / eps, -1.0, 1.0); }

struct TvProblem {
  const std::vector<Pose>* poses;
  std::vector<char> skip_data;  // per-step: no data-term contribution
  double dt;
  double lambda;
  double eps;

  int t_end() const { return static_cast<int>(poses->size()); }

  // Integrated pose at every step given velocities v ((T-1) x 3); theta is
  // accumulated unwrapped, residuals are wrapped.
  Eigen::MatrixXd integrate(const Eigen::MatrixXd& v) const {
    const int t = t_end();
    Eigen::MatrixXd p(t, 3);
    p(0, 0) = (*poses)[0].x;
    p(0, 1) = (*poses)[0].y;
    p(0, 2) = (*poses)[0].theta;
    for (int k = 1; k < t; ++k) p.row(k) = p.row(k - 1) + dt * v.row(k - 1);
    return p;
  }

  // Per-step data residuals (zero where skipped).
  Eigen::MatrixXd residuals(const Eigen::MatrixXd& p_hat) const {
    const int t = t_end();
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(t, 3);
    for (int k = 1; k < t; ++k) {
      if (skip_data[static_cast<std::size_t>(k)]) continue;
      e(k, 0) = p_hat(k, 0) - (*poses)[static_cast<std::size_t>(k)].x;
      e(k, 1) = p_hat(k, 1) - (*poses)[static_cast<std::size_t>(k)].y;
      e(k, 2) = angle_diff(p_hat(k, 2), (*poses)[static_cast<std::size_t>(k)].theta);
    }
    return e;
  }

  double objective(const Eigen::MatrixXd& v) const {
    const Eigen::MatrixXd e = residuals(integrate(v));
    double f = e.squaredNorm();
    for (Eigen::Index k = 0; k + 1 < v.rows(); ++k)
      for (Eigen::Index c = 0; c < 3; ++c) f += lambda * huber(v(k + 1, c) - v(k, c), eps);
    return f;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& v) const {
    const Eigen::MatrixXd e = residuals(integrate(v));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(v.rows(), 3);
    // v_j moves every integrated pose after step j: reverse cumulative sum.
    Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
    for (Eigen::Index j = v.rows() - 1; j >= 0; --j) {
      acc += 2.0 * dt * e.row(j + 1);
      g.row(j) = acc;
    }
    for (Eigen::Index k = 0; k + 1 < v.rows(); ++k) {
      for (Eigen::Index c = 0; c < 3; ++c) {
        const double d = lambda * huber_grad(v(k + 1, c) - v(k, c), eps);
        g(k + 1, c) += d;
        g(k, c) -= d;
      }
    }
    return g;
  }
};

}  // namespace

VelocityEstimate tv_velocities(const std::vector<Pose>& poses, const std::vector<char>& flagged,
                               double dt, const TvConfig& cfg,
                               const std::vector<char>& exclude_data) {
  const int t_end = static_cast<int>(poses.size());
  if (t_end < 3) throw std::invalid_argument("tv_velocities: need at least 3 poses");
  if (!flagged.empty() && flagged.size() != poses.size())
    throw std::invalid_argument("tv_velocities: flag/pose length mismatch");
  if (!exclude_data.empty() && exclude_data.size() != poses.size())
    throw std::invalid_argument("tv_velocities: exclusion/pose length mismatch");
  if (dt <= 0.0 || cfg.huber_eps <= 0.0 || cfg.step_size <= 0.0 || cfg.iters < 0 ||
      cfg.lambda < 0.0)
    throw std::invalid_argument("tv_velocities: invalid config");

  TvProblem prob;
  prob.poses = &poses;
  prob.dt = dt;
  prob.lambda = cfg.lambda;
  prob.eps = cfg.huber_eps;
  prob.skip_data.assign(poses.size(), 0);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    if (!flagged.empty() && flagged[k]) prob.skip_data[k] = 1;
    if (!exclude_data.empty() && exclude_data[k]) prob.skip_data[k] = 1;
  }

  // Finite-difference initialization, bridged across data-excluded poses: an
  // outlier pose from a failed solve would otherwise bake a velocity spike
  // into the start point that first-order TV transport removes far too slowly.
  // Differencing between consecutive trusted poses keeps every trusted
  // integrated pose exact; with nothing excluded this is plain per-step FD.
  std::vector<int> trusted;  // pose 0 anchors the integration regardless
  trusted.push_back(0);
  for (int k = 1; k < t_end; ++k)
    if (!prob.skip_data[static_cast<std::size_t>(k)]) trusted.push_back(k);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(t_end - 1, 3);
  for (std::size_t i = 0; i + 1 < trusted.size(); ++i) {
    const Pose& pl = poses[static_cast<std::size_t>(trusted[i])];
    const Pose& pr = poses[static_cast<std::size_t>(trusted[i + 1])];
    const double span = (trusted[i + 1] - trusted[i]) * dt;
    Eigen::RowVector3d vel;
    vel << (pr.x - pl.x) / span, (pr.y - pl.y) / span, angle_diff(pr.theta, pl.theta) / span;
    for (int k = trusted[i]; k < trusted[i + 1]; ++k) v.row(k) = vel;
  }
  for (int k = trusted.back(); k + 1 < t_end; ++k)
    if (k > 0) v.row(k) = v.row(k - 1);

  VelocityEstimate out;
  double f = prob.objective(v);
  out.objective_trace.reserve(static_cast<std::size_t>(cfg.iters) + 1);
  out.objective_trace.push_back(f);
  double step = cfg.step_size;
  for (int it = 0; it < cfg.iters; ++it) {
    const Eigen::MatrixXd g = prob.gradient(v);
    double trial = step;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::MatrixXd v_try = v - trial * g;
      const double f_try = prob.objective(v_try);
      if (f_try <= f) {
        v = v_try;
        f = f_try;
        step = std::min(cfg.step_size, trial * 2.0);
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    out.objective_trace.push_back(f);
    if (!accepted) break;  // at numerical stationarity; objective cannot move
  }
  out.velocities = std::move(v);
  return out;
}

SupervisedDataset fittv_estimate(const std::vector<ObservedTrajectory>& trajs,
                                 const LandmarkMap& map, double dt,
                                 double workspace_halfwidth, const TvConfig& cfg) {
  if (trajs.empty()) throw std::invalid_argument("fittv_estimate: no trajectories");
  SupervisedDataset out;
  out.dt = dt;
  for (const ObservedTrajectory& ot : trajs) {
    const PoseTrack track = estimate_pose_track(ot.obs, map, workspace_halfwidth);
    const int t_end = static_cast<int>(track.poses.size());

    // Lambda selection: fit with every 5th step held out of the data term,
    // score by pose reconstruction on the held-out steps.
    std::vector<char> holdout(track.poses.size(), 0);
    for (int k = 2; k < t_end; k += 5) holdout[static_cast<std::size_t>(k)] = 1;
    const std::vector<double>& grid =
        cfg.lambda_grid.empty() ? std::vector<double>{cfg.lambda} : cfg.lambda_grid;
    double best_err = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();
    for (double lam : grid) {
      TvConfig trial = cfg;
      trial.lambda = lam;
      const VelocityEstimate ve = tv_velocities(track.poses, track.flagged, dt, trial, holdout);
      TvProblem prob;
      prob.poses = &track.poses;
      prob.dt = dt;
      prob.lambda = 0.0;
      prob.eps = cfg.huber_eps;
      prob.skip_data.assign(track.poses.size(), 1);
      for (int k = 0; k < t_end; ++k)
        if (holdout[static_cast<std::size_t>(k)] && !track.flagged[static_cast<std::size_t>(k)])
          prob.skip_data[static_cast<std::size_t>(k)] = 0;
      const double err = prob.residuals(prob.integrate(ve.velocities)).squaredNorm();
      if (err < best_err) {
        best_err = err;
        best_lambda = lam;
      }
    }

    TvConfig chosen = cfg;
    chosen.lambda = best_lambda;
    const VelocityEstimate ve = tv_velocities(track.poses, track.flagged, dt, chosen);

    // State k carries the velocity realized over [k-1, k] (the integrator's
    // convention); the first state extrapolates backward at constant
    // acceleration.
    std::vector<State> states(static_cast<std::size_t>(t_end));
    for (int k = 0; k < t_end; ++k) {
      State s;
      s.pose = track.poses[static_cast<std::size_t>(k)];
      const Eigen::RowVector3d vel =
          k == 0 ? Eigen::RowVector3d(2.0 * ve.velocities.row(0) - ve.velocities.row(1))
                 : Eigen::RowVector3d(ve.velocities.row(k - 1));
      s.vx = vel(0);
      s.vy = vel(1);
      s.omega = vel(2);
      states[static_cast<std::size_t>(k)] = s;
    }
    for (int k = 0; k + 1 < t_end; ++k) {
      if (track.flagged[static_cast<std::size_t>(k)] || track.flagged[static_cast<std::size_t>(k + 1)])
        continue;
      out.transitions.push_back({states[static_cast<std::size_t>(k)],
                                 ot.controls[static_cast<std::size_t>(k)],
                                 states[static_cast<std::size_t>(k + 1)]});
    }
  }
  return out;
}

}  // namespace steady
