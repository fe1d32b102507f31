#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steady/baselines.hpp"
#include "steady/evaluation.hpp"
#include "steady/mcem.hpp"
#include "steady/observation.hpp"

namespace steady {

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

// FNV-1a over raw bytes; the content-hash primitive for configs/datasets.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string hash_file(const std::filesystem::path& path);

// --- dataset artifacts (line-delimited JSON records) ------------------------

void save_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);

void save_observations(const std::filesystem::path& path,
                       const std::vector<ObservationSequence>& seqs);
std::vector<ObservationSequence> load_observations(const std::filesystem::path& path);

void save_landmarks(const std::filesystem::path& path, const LandmarkMap& map);
LandmarkMap load_landmarks(const std::filesystem::path& path);

// --- checkpoints -------------------------------------------------------------

// Model snapshot: parameters plus (for resumable training runs) optimizer
// state. Doubles are serialized with round-trip-exact formatting, so
// save/load is bit-exact.
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  std::string method;        // steady | steady-minus | hand | fithand | fittv | fittruth
  std::string config_hash;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  int step = 0;              // optimizer steps taken so far
  bool analytic = false;     // hand marker: no learned parameters
  DynamicsParams params;     // live parameters (what --resume continues from)
  // Best-validation parameters for EM runs; evaluation prefers these.
  std::optional<DynamicsParams> best_params;
  std::optional<double> best_score;
  int best_step = 0;
  std::optional<AdamState> adam;
  std::vector<HistoryEntry> history;  // persisted for --resume continuity

  const DynamicsParams& eval_params() const { return best_params ? *best_params : params; }
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// --- training history (append-only JSONL) ------------------------------------

void append_history(const std::filesystem::path& path, const HistoryEntry& entry);
std::vector<HistoryEntry> load_history(const std::filesystem::path& path);

// --- run configuration --------------------------------------------------------

// The full experiment configuration: simulator constants, dataset shape,
// observation model, training/baseline/evaluation settings. One file drives
// every subcommand.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/desk";
  HovParams hov;
  DatasetSpec dataset;
  int n_landmarks = 4;
  double landmark_halfwidth = 10.0;
  double sigma_bearing_deg = 5.0;
  int train_stride = 1;   // 10 Hz observations while training
  int eval_stride = 10;   // 1 Hz observations at evaluation time
  int eval_particles = 2000;
  int horizon = 10;
  double workspace_halfwidth = 12.0;  // pose-MLE grid extent (FitTV)
  TrainConfig train;
  SupervisedFitConfig supervised;
  TvConfig tv;
  std::vector<double> noise_levels_deg{1.25, 2.5, 5.0, 10.0, 20.0};
  std::vector<int> particle_counts{200, 2000, 20000};

  double sigma_bearing_rad() const { return sigma_bearing_deg * kPi / 180.0; }
};

RunConfig default_run_config();
// Full-scale variant: 16/32/32 trajectories, N = 20,000, 40,000 EM steps.
RunConfig full_scale_config();

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);
// Throws std::runtime_error with a field-level message on malformed input.
RunConfig load_run_config(const std::filesystem::path& path);

// Content hash of the canonical serialized config.
std::string config_hash(const RunConfig& cfg);

// Assembles the orchestration bundle from a config plus loaded data.
ExperimentSetup make_setup(const RunConfig& cfg, Dataset dataset, LandmarkMap map);

}  // namespace steady
