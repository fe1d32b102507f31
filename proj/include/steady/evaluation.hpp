#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steady/baselines.hpp"
#include "steady/dynamics_model.hpp"
#include "steady/mcem.hpp"
#include "steady/observation.hpp"
#include "steady/particle_filter.hpp"

namespace steady {

struct EvalConfig {
  int n_particles = 2000;
  int stride = 10;  // observation stride at evaluation time (1 Hz vs 10 Hz training)
  int horizon = 10; // forward-prediction rollout length in steps
  double sigma_bearing = 0.0873;
  std::uint64_t seed = 0;
  InitialStateDist q_x1;
};

struct StateEstMetrics {
  double loc_rmse = 0.0;  // pooled over every step of every scored trajectory
  double ang_rmse = 0.0;
  std::vector<double> per_traj_loc;
  std::vector<double> per_traj_ang;
  int flagged = 0;  // trajectories excluded due to particle death
};

struct FwdPredMetrics {
  double loc_rmse = 0.0;  // pooled over every valid start index
  double ang_rmse = 0.0;
  std::vector<double> per_traj_loc;
  std::vector<double> per_traj_ang;
};

struct MetricReport {
  std::string method;
  StateEstMetrics state;
  FwdPredMetrics fwd;
};

// State-estimation metric: filter each test trajectory at the evaluation
// stride with w_obs = 1, compare posterior mean poses to ground truth.
StateEstMetrics eval_state_estimation(const DynamicsModel& model,
                                      const std::vector<Trajectory>& test, const LandmarkMap& map,
                                      const EvalConfig& cfg);

// Forward-prediction metric: from every ground-truth state, roll the model
// mean (zero process noise) for `horizon` steps under the recorded controls
// and compare the final pose to ground truth.
FwdPredMetrics eval_forward_prediction(const DynamicsModel& model,
                                       const std::vector<Trajectory>& test, int horizon,
                                       double dt);

// --- Experiment orchestration (sweeps, method fitting) ---------------------

// Everything one experiment cell needs: data, physics, and per-method
// configuration.
struct ExperimentSetup {
  Dataset dataset;
  LandmarkMap map;
  DatasetSpec spec;
  HovParams hov;
  double sigma_bearing = 0.0873;
  int train_stride = 1;
  TrainConfig train;
  SupervisedFitConfig supervised;
  TvConfig tv;
  EvalConfig eval;
  double workspace_halfwidth = 12.0;
  std::uint64_t seed = 0;

  InitialStateDist q_x1() const { return {spec.init_pos_halfwidth}; }
};

// A trained/fit model tagged with its method name. `analytic` marks the
// hand-written model (no parameters).
struct FittedMethod {
  std::string method;
  bool analytic = false;
  DynamicsParams params;
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"steady", "steady-minus", "hand",
                                                "fithand", "fittv", "fittruth"};
  return methods;
}

// Trains/fits one method on the setup's dataset. `sigma_override`, when
// non-negative, replaces the training bearing noise (noise sweep cells).
FittedMethod fit_method(const std::string& method, const ExperimentSetup& setup,
                        double sigma_override = -1.0, std::uint64_t seed_override = 0);

MetricReport evaluate_method(const FittedMethod& fitted, const ExperimentSetup& setup,
                             bool with_state_estimation, bool with_forward_prediction);

struct NoiseSweepRow {
  std::string method;
  double sigma_deg = 0.0;
  double fwd_loc_rmse = 0.0;
  double fwd_ang_rmse = 0.0;
  bool ok = true;
  std::string note;
};

// Fig.-4-style sweep: retrain observation-dependent methods per noise level,
// evaluate forward prediction; Hand and FitTruth are fit/evaluated once and
// replicated across levels. Failed cells are recorded, not fatal. `repeats`
// refits each cell with distinct seeds and keeps the best row (lowest
// forward location RMSE).
std::vector<NoiseSweepRow> noise_sweep(const ExperimentSetup& setup,
                                       const std::vector<double>& sigma_deg_levels,
                                       const std::vector<std::string>& methods, int jobs = 1,
                                       int repeats = 1);

struct ParticleSweepPoint {
  int n_particles = 0;
  int step = 0;
  double wall_s = 0.0;  // cumulative EM-step wall time when the check ran
  double score = 0.0;   // validation log-marginal
};

struct ParticleSweepSummary {
  int n_particles = 0;
  double best_score = 0.0;
  double mean_step_ms = 0.0;
};

struct ParticleSweepResult {
  std::vector<ParticleSweepPoint> points;
  std::vector<ParticleSweepSummary> summary;
};

// Fig.-5-style sweep: train with each particle count on shared data/seed,
// recording validation score against step index and wall time. Validation
// particle count is pinned across cells so scores are comparable.
ParticleSweepResult particle_sweep(const ExperimentSetup& setup, const std::vector<int>& counts,
                                   int jobs = 1);

struct PosteriorVelocityTable {
  std::vector<std::string> columns;  // time, truth, then quantile bands
  Eigen::MatrixXd rows;              // T x 13
};

// Fig.-3-style plot data: per-step ground-truth body-frame velocities and
// filter-posterior quantiles (5/25/50/75/95%) of v_lon and v_lat.
PosteriorVelocityTable posterior_velocity_export(const DynamicsModel& model,
                                                 const Trajectory& truth,
                                                 const ObservationSequence& obs,
                                                 const LandmarkMap& map,
                                                 const InitialStateDist& q_x1, int n_particles,
                                                 std::uint64_t seed);

}  // namespace steady
