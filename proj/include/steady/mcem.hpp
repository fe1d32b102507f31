#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "steady/neural_dynamics.hpp"
#include "steady/observation.hpp"
#include "steady/particle_filter.hpp"

namespace steady {

// What the learner is allowed to see of one trajectory: controls and noisy
// bearings, never states.
struct ObservedTrajectory {
  std::vector<Control> controls;  // length T-1
  ObservationSequence obs;        // steps has length T
};

struct TrainingData {
  std::vector<ObservedTrajectory> train;
  std::vector<ObservedTrajectory> valid;
  LandmarkMap map;
  double dt = 0.1;
  InitialStateDist q_x1;
};

// ADAM with bias correction, applied as ascent.
struct AdamState {
  DynamicsParams m;
  DynamicsParams v;
  long t = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  static AdamState init(double lr);
};

void adam_update(AdamState& adam, DynamicsParams& params, const DynamicsParams& grad);

struct TrainConfig {
  int max_steps = 5000;
  int n_particles = 2000;
  int n_traj_samples = 10;  // M
  // Steps over which w_obs ramps linearly 0 -> 1; 0 pins w_obs = 1 from the
  // start (the no-flattening ablation). Negative means "max_steps / 2".
  int anneal_steps = -1;
  int validation_every = 200;
  int patience = 10;
  // Particle count used for validation filters; 0 means n_particles.
  int validation_particles = 0;
  double lr = 1e-4;
  Accel sigma0{0.5, 0.5, 0.25};
  std::uint64_t seed = 0;

  int resolved_anneal_steps() const { return anneal_steps < 0 ? max_steps / 2 : anneal_steps; }
  double w_obs_at(int step) const {
    const int a = resolved_anneal_steps();
    if (a <= 0) return 1.0;
    return std::min(1.0, static_cast<double>(step) / a);
  }
};

struct HistoryEntry {
  int step = 0;  // EM steps completed when the entry was written
  // M-step mean transition log-density (dynamics term); absent on
  // validation-only records.
  std::optional<double> objective;
  double w_obs = 0.0;
  double wall_ms = 0.0;
  std::optional<double> validation;  // set on validation checks
};

struct TrainRun {
  DynamicsParams params;
  AdamState adam;
  int step = 0;
  double w_obs = 0.0;
  std::vector<HistoryEntry> history;
};

struct ValidationScore {
  double score = 0.0;  // mean per-step log-marginal across scored trajectories
  int skipped = 0;     // trajectories dropped due to particle death
};

struct TrainResult {
  DynamicsParams best_params;
  double best_score = 0.0;
  int best_step = 0;
  double initial_score = 0.0;  // validation of the freshly initialized model
  TrainRun run;
};

// One EM iteration: filter one training trajectory (round-robin on step
// index) at the current w_obs, trace back M posterior trajectories, and take
// a single ADAM ascent step on their mean transition log-density.
void em_step(TrainRun& run, const TrainingData& data, const TrainConfig& cfg);

// Mean length-normalized log-marginal over the validation split at
// w_obs = 1, fixed seed derived from cfg.seed.
ValidationScore validate(const DynamicsParams& params, const TrainingData& data,
                         const TrainConfig& cfg);

// Full training loop with periodic validation, best-checkpoint tracking and
// patience-based early stopping. `on_entry`, when set, observes every
// history record as it is appended (for live logging).
TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  const std::function<void(const HistoryEntry&)>& on_entry = {});

// Resumes the loop from a restored run (step, params, optimizer moments kept).
TrainResult train_resume(TrainRun run, const TrainingData& data, const TrainConfig& cfg,
                         const std::function<void(const HistoryEntry&)>& on_entry = {});

// Strips states out of simulated trajectories and attaches observations:
// the bridge from simulator output to learner input.
TrainingData make_training_data(const Dataset& dataset, const LandmarkMap& map,
                                double sigma_bearing, int stride, std::uint64_t obs_seed,
                                const DatasetSpec& spec);

}  // namespace steady
