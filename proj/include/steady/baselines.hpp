#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "steady/dynamics_model.hpp"
#include "steady/mcem.hpp"
#include "steady/neural_dynamics.hpp"
#include "steady/observation.hpp"
#include "steady/particle_filter.hpp"

namespace steady {

// State/control/next-state triples with a common time step; the input to
// plain supervised dynamics learning.
struct SupervisedDataset {
  std::vector<Transition> transitions;
  double dt = 0.1;
};

struct SupervisedFitConfig {
  int max_steps = 30000;
  int batch_size = 256;
  int validation_every = 500;
  int patience = 10;
  double holdout_fraction = 0.1;
  double lr = 1e-4;
  Accel sigma0{0.5, 0.5, 0.25};
  std::uint64_t seed = 0;
};

struct SupervisedFitResult {
  DynamicsParams params;   // best holdout-scoring parameters
  double best_score = 0.0; // mean holdout transition log-density
  int best_step = 0;
  int steps_run = 0;
};

// Maximizes mean transition log-density with minibatch ADAM, early-stopped on
// a held-out split. Shared by FitHand / FitTV / FitTruth.
SupervisedFitResult fit_supervised(const SupervisedDataset& data, const SupervisedFitConfig& cfg);

// FitTruth's input: ground-truth trajectories reshaped into transitions.
SupervisedDataset make_supervised_from_truth(const std::vector<Trajectory>& trajs);

// FitHand's estimation stage: filter each trajectory with the given
// (hand-written) model at w_obs = 1, take posterior mean states, and emit
// consecutive-mean transitions.
SupervisedDataset fithand_estimate(const DynamicsModel& model,
                                   const std::vector<ObservedTrajectory>& trajs,
                                   const LandmarkMap& map, const InitialStateDist& q_x1,
                                   double dt, int n_particles, std::uint64_t seed);

// --- FitTV -----------------------------------------------------------------

struct PoseEstimate {
  Pose pose;
  bool flagged = false;  // Gauss-Newton failed to converge; carried, not fatal
};

// Bearing-residual least squares (the pose MLE under the Gaussian bearing
// model, whose optimum is independent of sigma). Gauss-Newton from `init`.
PoseEstimate pose_mle(const Observation& obs, const LandmarkMap& map, const Pose& init);

// First-step variant: coarse grid search over the workspace square and 16
// headings picks the Gauss-Newton basin.
PoseEstimate pose_mle_grid(const Observation& obs, const LandmarkMap& map,
                           double workspace_halfwidth);

struct PoseTrack {
  std::vector<Pose> poses;
  std::vector<char> flagged;
};

// Chains pose_mle over a fully observed sequence: grid init at the first
// step, warm starts afterwards.
PoseTrack estimate_pose_track(const ObservationSequence& obs, const LandmarkMap& map,
                              double workspace_halfwidth);

struct TvConfig {
  double lambda = 0.1;
  double huber_eps = 1e-3;
  int iters = 2000;
  double step_size = 0.05;
  // fittv_estimate picks lambda per trajectory from this grid by held-out
  // pose reconstruction error.
  std::vector<double> lambda_grid{0.01, 0.1, 1.0};
};

struct VelocityEstimate {
  // (T-1) x 3 rows (vx, vy, omega); row k is the velocity realized over
  // [k, k+1], i.e. the velocity the integrator attaches to state k+1.
  Eigen::MatrixXd velocities;
  std::vector<double> objective_trace;  // per-iteration, non-increasing
};

// Total-variation-regularized velocity estimation: minimizes the pose
// reconstruction error plus lambda times the Huber-smoothed total variation
// of the velocity sequence, by monotone (backtracking) gradient descent from
// the finite-difference initialization. Steps listed in `exclude_data` (and
// flagged ones, via fittv_estimate) contribute no data term.
VelocityEstimate tv_velocities(const std::vector<Pose>& poses, const std::vector<char>& flagged,
                               double dt, const TvConfig& cfg,
                               const std::vector<char>& exclude_data = {});

// FitTV's estimation stage: per-step pose MLE, TV velocity estimation with
// per-trajectory lambda selection, state assembly; transitions touching a
// flagged pose are dropped.
SupervisedDataset fittv_estimate(const std::vector<ObservedTrajectory>& trajs,
                                 const LandmarkMap& map, double dt,
                                 double workspace_halfwidth, const TvConfig& cfg);

}  // namespace steady
