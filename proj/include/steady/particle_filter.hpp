#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "steady/dynamics_model.hpp"
#include "steady/observation.hpp"
#include "steady/rng.hpp"

namespace steady {

// Raised when every particle's weight underflows to -inf at some step.
class ParticleDeathError : public std::runtime_error {
 public:
  ParticleDeathError(int time_step, std::string context)
      : std::runtime_error("particle death at step " + std::to_string(time_step) +
                           (context.empty() ? "" : " (" + context + ")")),
        time_step(time_step),
        context(std::move(context)) {}
  int time_step;
  std::string context;
};

struct FilterConfig {
  int n_particles = 2000;
  double w_obs = 1.0;  // flattening exponent on the observation likelihood
  std::uint64_t rng_seed = 0;
};

// Structure-of-arrays particle history. states[t] is N x dim (column per
// state component); ancestors[t](i) is the index into step t-1 that particle
// i at step t descends from (undefined at t = 0). Weights are stored
// normalized (logsumexp = 0); after a resampling step they are uniform.
struct ParticleCloud {
  std::vector<Eigen::MatrixXd> states;
  std::vector<Eigen::VectorXd> log_weights;
  std::vector<Eigen::VectorXi> ancestors;

  int num_steps() const { return static_cast<int>(states.size()); }
  int num_particles() const { return states.empty() ? 0 : static_cast<int>(states[0].rows()); }
};

struct FilterResult {
  ParticleCloud cloud;
  double log_marginal = 0.0;
  // Effective sample size of the post-weighting, pre-resampling weights at
  // each observed step (diagnostic; empty entries for unobserved steps are
  // set to the particle count).
  std::vector<double> ess;
};

// A generic state-space instance the filter can run on: production code feeds
// the hovercraft model/observations through this, tests substitute
// linear-Gaussian systems with exact solutions.
class StateSpaceSystem {
 public:
  virtual ~StateSpaceSystem() = default;
  virtual int state_dim() const = 0;
  virtual int num_steps() const = 0;
  // Column indices holding angles; their posterior means are circular.
  virtual std::vector<int> angular_dims() const { return {}; }
  virtual void sample_initial(RngStream& rng, Eigen::Ref<Eigen::MatrixXd> states) const = 0;
  // Propagate all particles through transition `step` (0-based, advancing
  // from time step `step` to `step + 1`).
  virtual void propagate(const Eigen::Ref<const Eigen::MatrixXd>& current, int step,
                         RngStream& rng, Eigen::Ref<Eigen::MatrixXd> next) const = 0;
  virtual bool has_observation(int t) const = 0;
  // Adds each particle's observation log-density at step t into `out`.
  virtual void observation_log_density(const Eigen::Ref<const Eigen::MatrixXd>& states, int t,
                                       Eigen::Ref<Eigen::VectorXd> out) const = 0;
};

// Low-variance systematic resampling. Input log-weights need not be
// normalized. Counts satisfy floor(N*w_i) <= c_i <= ceil(N*w_i).
Eigen::VectorXi systematic_resample(const Eigen::Ref<const Eigen::VectorXd>& log_weights,
                                    RngStream& rng);

// Forward particle filter with resampling at every observed step; weights
// are tempered by cfg.w_obs and the tempered log-marginal is accumulated as
// sum of logsumexp(increment) - log N.
FilterResult filter_forward(const StateSpaceSystem& system, const FilterConfig& cfg);

// Draws M posterior trajectories by sampling a final particle and tracing
// its ancestral lineage. Each entry is T x dim.
std::vector<Eigen::MatrixXd> sample_trajectories(const FilterResult& result, int m,
                                                 RngStream& rng);

// Per-step weighted particle means; angular columns use the circular mean.
Eigen::MatrixXd posterior_means(const FilterResult& result, const std::vector<int>& angular_dims);

// Per-step weighted quantile of one state column (weights taken from the
// stored cloud).
Eigen::VectorXd posterior_quantile(const FilterResult& result, int column, double q);

double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& log_weights);

// --- Hovercraft instantiation -------------------------------------------

// Initial-state distribution Q_{x1}: position uniform over a centered box,
// heading uniform, velocities zero.
struct InitialStateDist {
  double pos_halfwidth = 1.0;
};

// Column layout of hovercraft particle matrices.
enum HovStateCol { kStateX = 0, kStateY, kStateTheta, kStateVx, kStateVy, kStateOmega, kStateDim };

Eigen::Matrix<double, 1, kStateDim> pack_state(const State& s);
State unpack_state(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Binds a dynamics model, an observation sequence, the control sequence and
// Q_{x1} into a filterable system.
class HovFilterProblem final : public StateSpaceSystem {
 public:
  HovFilterProblem(const DynamicsModel& model, const ObservationSequence& obs,
                   const std::vector<Control>& controls, const LandmarkMap& map,
                   InitialStateDist q_x1, double dt);

  int state_dim() const override { return kStateDim; }
  int num_steps() const override { return static_cast<int>(obs_->steps.size()); }
  std::vector<int> angular_dims() const override { return {kStateTheta}; }
  void sample_initial(RngStream& rng, Eigen::Ref<Eigen::MatrixXd> states) const override;
  void propagate(const Eigen::Ref<const Eigen::MatrixXd>& current, int step, RngStream& rng,
                 Eigen::Ref<Eigen::MatrixXd> next) const override;
  bool has_observation(int t) const override { return obs_->steps[t].has_value(); }
  void observation_log_density(const Eigen::Ref<const Eigen::MatrixXd>& states, int t,
                               Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  const DynamicsModel* model_;
  const ObservationSequence* obs_;
  const std::vector<Control>* controls_;
  const LandmarkMap* map_;
  InitialStateDist q_x1_;
  double dt_;
};

FilterResult filter_forward(const DynamicsModel& model, const ObservationSequence& obs,
                            const std::vector<Control>& controls, const LandmarkMap& map,
                            const InitialStateDist& q_x1, double dt, const FilterConfig& cfg);

}  // namespace steady
