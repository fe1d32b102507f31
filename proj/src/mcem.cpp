#include "steady/mcem.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace steady {

namespace {

template <typename Fn>
void zip_tensors(DynamicsParams& p, DynamicsParams& m, DynamicsParams& v,
                 const DynamicsParams& g, Fn&& fn) {
  fn(p.w1, m.w1, v.w1, g.w1);
  fn(p.b1, m.b1, v.b1, g.b1);
  fn(p.w_mu, m.w_mu, v.w_mu, g.w_mu);
  fn(p.b_mu, m.b_mu, v.b_mu, g.b_mu);
  fn(p.w_skip, m.w_skip, v.w_skip, g.w_skip);
  fn(p.w_sig, m.w_sig, v.w_sig, g.w_sig);
  fn(p.b_sig, m.b_sig, v.b_sig, g.b_sig);
}

double elapsed_ms(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}

void check_config(const TrainingData& data, const TrainConfig& cfg) {
  if (data.train.empty()) throw std::invalid_argument("train: empty training split");
  if (cfg.max_steps < 0) throw std::invalid_argument("train: max_steps must be non-negative");
  if (cfg.n_particles < 2) throw std::invalid_argument("train: need at least two particles");
  if (cfg.n_traj_samples < 1) throw std::invalid_argument("train: n_traj_samples must be positive");
  if (cfg.validation_every < 1)
    throw std::invalid_argument("train: validation_every must be positive");
  if (cfg.patience < 1) throw std::invalid_argument("train: patience must be positive");
  if (cfg.resolved_anneal_steps() > cfg.max_steps && cfg.max_steps > 0)
    throw std::invalid_argument("train: anneal_steps exceeds max_steps");
}

}  // namespace

AdamState AdamState::init(double lr) {
  AdamState adam;
  adam.m = DynamicsParams::zeros();
  adam.v = DynamicsParams::zeros();
  adam.lr = lr;
  return adam;
}

void adam_update(AdamState& adam, DynamicsParams& params, const DynamicsParams& grad) {
  if (!params.same_shape(grad)) throw std::invalid_argument("adam_update: shape mismatch");
  if (!grad.all_finite()) throw std::invalid_argument("adam_update: non-finite gradient");
  adam.t += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
  const double lr = adam.lr, b1 = adam.beta1, b2 = adam.beta2, eps = adam.eps_hat;
  zip_tensors(params, adam.m, adam.v, grad, [&](auto& p, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
    p.array() += lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  });
}

void em_step(TrainRun& run, const TrainingData& data, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const int traj_idx = run.step % static_cast<int>(data.train.size());
  const ObservedTrajectory& ot = data.train[static_cast<std::size_t>(traj_idx)];
  run.w_obs = cfg.w_obs_at(run.step);

  FilterConfig fc;
  fc.n_particles = cfg.n_particles;
  fc.w_obs = run.w_obs;
  fc.rng_seed = derive_seed(cfg.seed, rng_salt::kTrainStep, static_cast<std::uint64_t>(run.step));

  const NeuralDynamicsModel model(run.params);
  FilterResult fr;
  try {
    fr = filter_forward(model, ot.obs, ot.controls, data.map, data.q_x1, data.dt, fc);
  } catch (const ParticleDeathError& e) {
    throw ParticleDeathError(e.time_step, "EM step " + std::to_string(run.step) +
                                              ", training trajectory " + std::to_string(traj_idx));
  }

  RngStream trace_rng(cfg.seed, rng_salt::kFilterTraceback, static_cast<std::uint64_t>(run.step));
  const std::vector<Eigen::MatrixXd> trajs =
      sample_trajectories(fr, cfg.n_traj_samples, trace_rng);

  const int t_end = static_cast<int>(trajs[0].rows());
  std::vector<Transition> batch;
  batch.reserve(trajs.size() * static_cast<std::size_t>(t_end - 1));
  for (const Eigen::MatrixXd& traj : trajs)
    for (int t = 0; t + 1 < t_end; ++t)
      batch.push_back({unpack_state(traj.row(t)), ot.controls[static_cast<std::size_t>(t)],
                       unpack_state(traj.row(t + 1))});

  const ValueAndGrad vg = grad_log_density(run.params, batch, data.dt);
  adam_update(run.adam, run.params, vg.grad);

  HistoryEntry entry;
  entry.objective = vg.value;
  entry.w_obs = run.w_obs;
  run.step += 1;
  run.w_obs = cfg.w_obs_at(run.step);
  entry.step = run.step;
  entry.wall_ms = elapsed_ms(start);
  run.history.push_back(entry);
}

ValidationScore validate(const DynamicsParams& params, const TrainingData& data,
                         const TrainConfig& cfg) {
  if (data.valid.empty()) throw std::invalid_argument("validate: empty validation split");
  const NeuralDynamicsModel model(params);
  ValidationScore out;
  double sum = 0.0;
  int scored = 0;
  for (std::size_t i = 0; i < data.valid.size(); ++i) {
    const ObservedTrajectory& ot = data.valid[i];
    FilterConfig fc;
    fc.n_particles = cfg.validation_particles > 0 ? cfg.validation_particles : cfg.n_particles;
    fc.w_obs = 1.0;
    fc.rng_seed = derive_seed(cfg.seed, rng_salt::kValidation, static_cast<std::uint64_t>(i));
    try {
      const FilterResult fr =
          filter_forward(model, ot.obs, ot.controls, data.map, data.q_x1, data.dt, fc);
      sum += fr.log_marginal / static_cast<double>(ot.obs.steps.size());
      scored += 1;
    } catch (const ParticleDeathError&) {
      out.skipped += 1;
    }
  }
  out.score = scored > 0 ? sum / scored : -std::numeric_limits<double>::infinity();
  return out;
}

TrainResult train_resume(TrainRun run, const TrainingData& data, const TrainConfig& cfg,
                         const std::function<void(const HistoryEntry&)>& on_entry) {
  check_config(data, cfg);

  auto record_validation = [&](TrainRun& r, double score) {
    HistoryEntry entry;
    entry.step = r.step;
    entry.w_obs = cfg.w_obs_at(r.step);
    entry.validation = score;
    r.history.push_back(entry);
    if (on_entry) on_entry(r.history.back());
  };

  TrainResult out;
  const ValidationScore v0 = validate(run.params, data, cfg);
  out.initial_score = v0.score;
  out.best_params = run.params;
  out.best_score = v0.score;
  out.best_step = run.step;
  record_validation(run, v0.score);

  int bad_checks = 0;
  while (run.step < cfg.max_steps) {
    em_step(run, data, cfg);
    if (on_entry) on_entry(run.history.back());
    if (run.step % cfg.validation_every == 0 || run.step == cfg.max_steps) {
      const ValidationScore v = validate(run.params, data, cfg);
      record_validation(run, v.score);
      if (v.score > out.best_score) {
        out.best_score = v.score;
        out.best_params = run.params;
        out.best_step = run.step;
        bad_checks = 0;
      } else if (++bad_checks >= cfg.patience) {
        break;
      }
    }
  }
  out.run = std::move(run);
  return out;
}

TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  const std::function<void(const HistoryEntry&)>& on_entry) {
  TrainRun run;
  run.params = init_params(derive_seed(cfg.seed, rng_salt::kParamInit), cfg.sigma0);
  run.adam = AdamState::init(cfg.lr);
  run.w_obs = cfg.w_obs_at(0);
  return train_resume(std::move(run), data, cfg, on_entry);
}

TrainingData make_training_data(const Dataset& dataset, const LandmarkMap& map,
                                double sigma_bearing, int stride, std::uint64_t obs_seed,
                                const DatasetSpec& spec) {
  if (dataset.train.empty()) throw std::invalid_argument("make_training_data: no train trajectories");
  TrainingData td;
  td.map = map;
  td.dt = dataset.train[0].dt;
  td.q_x1.pos_halfwidth = spec.init_pos_halfwidth;
  auto build = [&](const std::vector<Trajectory>& src, std::uint64_t split) {
    std::vector<ObservedTrajectory> out;
    out.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      RngStream rng(obs_seed ^ (split << 32), rng_salt::kObservation, i);
      out.push_back({src[i].controls, observe_trajectory(src[i], map, sigma_bearing, stride, rng)});
    }
    return out;
  };
  td.train = build(dataset.train, 0);
  td.valid = build(dataset.valid, 1);
  return td;
}

}  // namespace steady
