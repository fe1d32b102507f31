// Command-line driver: dataset generation, training, baselines, evaluation,
// sweeps, and plot-data export. Every artifact embeds (config hash, code
// version, seed); evaluation refuses checkpoints whose dataset hash does not
// match the dataset on disk.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "steady/baselines.hpp"
#include "steady/evaluation.hpp"
#include "steady/hovercraft.hpp"
#include "steady/mcem.hpp"
#include "steady/observation.hpp"
#include "steady/particle_filter.hpp"
#include "steady/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace steady;

namespace {

// Errors attributable to how the tool was invoked (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error(path.string() + ": malformed JSON");
  return j;
}

fs::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("STEADY_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path(cfg.output_dir);
}

int resolve_jobs(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("STEADY_JOBS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::string provenance(const RunConfig& cfg) {
  return "config_hash=" + config_hash(cfg) + " code_version=" + kCodeVersion +
         " seed=" + std::to_string(cfg.seed);
}

// --- dataset directory --------------------------------------------------------

fs::path data_dir(const fs::path& out) { return out / "data"; }

const std::vector<std::string>& dataset_files() {
  static const std::vector<std::string> files{"train.jsonl",     "valid.jsonl",
                                              "test.jsonl",      "train_obs.jsonl",
                                              "valid_obs.jsonl", "landmarks.json"};
  return files;
}

std::string combined_dataset_hash(const fs::path& data) {
  std::string acc;
  for (const std::string& name : dataset_files())
    acc += name + ":" + hash_file(data / name) + "\n";
  return hex64(fnv1a64(acc));
}

struct LoadedDataset {
  Dataset ds;
  LandmarkMap map;
  std::string dataset_hash;
};

LoadedDataset load_dataset_dir(const fs::path& out) {
  const fs::path data = data_dir(out);
  if (!fs::exists(data / "meta.json"))
    throw std::runtime_error("no dataset under " + data.string() +
                             " (run `steady simulate --config <file>` first)");
  LoadedDataset loaded;
  loaded.ds.train = load_trajectories(data / "train.jsonl");
  loaded.ds.valid = load_trajectories(data / "valid.jsonl");
  loaded.ds.test = load_trajectories(data / "test.jsonl");
  loaded.map = load_landmarks(data / "landmarks.json");
  const json meta = read_json(data / "meta.json");
  loaded.dataset_hash = meta.at("dataset_hash").get<std::string>();
  return loaded;
}

// Reassembles the learner's view (controls + bearings) from files written by
// `simulate`.
TrainingData load_training_data(const RunConfig& cfg, const fs::path& out,
                                const LoadedDataset& loaded) {
  const fs::path data = data_dir(out);
  TrainingData td;
  td.map = loaded.map;
  td.q_x1 = InitialStateDist{cfg.dataset.init_pos_halfwidth};
  if (loaded.ds.train.empty()) throw std::runtime_error("dataset has no training trajectories");
  td.dt = loaded.ds.train.front().dt;

  auto attach = [&](const std::vector<Trajectory>& trajs, const fs::path& obs_path,
                    std::vector<ObservedTrajectory>& dest) {
    const std::vector<ObservationSequence> obs = load_observations(obs_path);
    if (obs.size() != trajs.size())
      throw std::runtime_error(obs_path.string() + ": observation/trajectory count mismatch");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      if (obs[i].steps.size() != trajs[i].states.size())
        throw std::runtime_error(obs_path.string() + ": observation/trajectory length mismatch");
      dest.push_back(ObservedTrajectory{trajs[i].controls, obs[i]});
    }
  };
  attach(loaded.ds.train, data / "train_obs.jsonl", td.train);
  attach(loaded.ds.valid, data / "valid_obs.jsonl", td.valid);
  return td;
}

Checkpoint load_checkpoint_for(const fs::path& path, const LoadedDataset& loaded) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.dataset_hash != loaded.dataset_hash)
    throw UsageError(path.string() + ": dataset hash mismatch (checkpoint " + ckpt.dataset_hash +
                     ", dataset on disk " + loaded.dataset_hash +
                     "); refusing to compare models across datasets");
  return ckpt;
}

// --- subcommands ---------------------------------------------------------------

int run_init_config(const std::string& output, bool full_scale, bool force) {
  const fs::path path(output);
  if (fs::exists(path) && !force)
    throw UsageError(path.string() + " already exists (pass --force to overwrite)");
  save_run_config(path, full_scale ? full_scale_config() : default_run_config());
  std::printf("wrote %s%s\n", path.string().c_str(), full_scale ? " (full scale)" : "");
  return 0;
}

int run_simulate(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const fs::path data = data_dir(out);
  fs::create_directories(data);

  const Dataset ds = generate_dataset(cfg.seed, cfg.dataset, cfg.hov);
  const LandmarkMap map =
      place_landmarks(cfg.seed, cfg.n_landmarks, cfg.landmark_halfwidth);
  // Observations come from the same deterministic scheme training uses, so
  // the files and any in-memory regeneration agree bit for bit.
  const TrainingData td = make_training_data(ds, map, cfg.sigma_bearing_rad(), cfg.train_stride,
                                             cfg.seed, cfg.dataset);

  save_run_config(out / "config.json", cfg);
  save_trajectories(data / "train.jsonl", ds.train);
  save_trajectories(data / "valid.jsonl", ds.valid);
  save_trajectories(data / "test.jsonl", ds.test);
  save_landmarks(data / "landmarks.json", map);
  std::vector<ObservationSequence> obs;
  for (const ObservedTrajectory& t : td.train) obs.push_back(t.obs);
  save_observations(data / "train_obs.jsonl", obs);
  obs.clear();
  for (const ObservedTrajectory& t : td.valid) obs.push_back(t.obs);
  save_observations(data / "valid_obs.jsonl", obs);

  json files = json::object();
  for (const std::string& name : dataset_files()) files[name] = hash_file(data / name);
  const json meta{{"kind", "dataset-meta"},
                  {"code_version", kCodeVersion},
                  {"config_hash", config_hash(cfg)},
                  {"seed", cfg.seed},
                  {"dataset_hash", combined_dataset_hash(data)},
                  {"files", files}};
  write_text(data / "meta.json", meta.dump(2) + "\n");

  auto report = [&](const char* split, const std::vector<Trajectory>& trajs, bool with_obs) {
    std::printf("%s: %zu trajectories x %zu states -> %s%s\n", split, trajs.size(),
                trajs.empty() ? 0 : trajs.front().states.size(),
                (data / (std::string(split) + ".jsonl")).string().c_str(),
                with_obs ? " (+ observations)" : "");
  };
  report("train", ds.train, true);
  report("valid", ds.valid, true);
  report("test", ds.test, false);
  std::printf("landmarks: %zu -> %s\n", map.positions.size(),
              (data / "landmarks.json").string().c_str());
  std::printf("dataset_hash=%s %s\n", meta.at("dataset_hash").get<std::string>().c_str(),
              provenance(cfg).c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& method,
              const std::string& resume_path) {
  if (method != "steady" && method != "steady-minus")
    throw UsageError("train supports --method steady|steady-minus (use `steady baseline` for " +
                     method + ")");
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const LoadedDataset loaded = load_dataset_dir(out);
  const TrainingData td = load_training_data(cfg, out, loaded);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  if (method == "steady-minus") tc.anneal_steps = 0;  // w_obs pinned to 1 from step 0

  const fs::path history_path = out / (method + ".history.jsonl");
  const fs::path ckpt_path = out / (method + ".ckpt.json");
  auto on_entry = [&](const HistoryEntry& e) { append_history(history_path, e); };

  TrainResult res;
  Checkpoint prior;
  bool resumed = false;
  if (!resume_path.empty()) {
    prior = load_checkpoint_for(resume_path, loaded);
    if (prior.method != method)
      throw UsageError(resume_path + ": checkpoint method '" + prior.method +
                       "' does not match --method " + method);
    if (!prior.adam.has_value())
      throw UsageError(resume_path + ": checkpoint has no optimizer state; cannot resume");
    resumed = true;
    TrainRun run;
    run.params = prior.params;
    run.adam = *prior.adam;
    run.step = prior.step;
    run.w_obs = tc.w_obs_at(prior.step);
    run.history = prior.history;
    std::printf("resuming %s from step %d (budget %d steps)\n", resume_path.c_str(), prior.step,
                tc.max_steps);
    res = train_resume(std::move(run), td, tc, on_entry);
  } else {
    std::error_code ec;
    fs::remove(history_path, ec);  // fresh run, fresh log
    res = train(td, tc, on_entry);
  }

  Checkpoint ckpt;
  ckpt.method = method;
  ckpt.config_hash = config_hash(cfg);
  ckpt.dataset_hash = loaded.dataset_hash;
  ckpt.seed = cfg.seed;
  ckpt.step = res.run.step;
  ckpt.analytic = false;
  ckpt.params = res.run.params;
  ckpt.best_params = res.best_params;
  ckpt.best_score = res.best_score;
  ckpt.best_step = res.best_step;
  ckpt.adam = res.run.adam;
  ckpt.history = res.run.history;
  // A resumed run keeps the previously stored best if it was never beaten
  // (validation scores share seed and particle count, so they compare).
  if (resumed && prior.best_params.has_value() && prior.best_score.has_value() &&
      *prior.best_score > *ckpt.best_score) {
    ckpt.best_params = prior.best_params;
    ckpt.best_score = prior.best_score;
    ckpt.best_step = prior.best_step;
  }
  save_checkpoint(ckpt_path, ckpt);

  std::printf("%s: %d steps, w_obs %.3f, initial validation %.4f\n", method.c_str(), res.run.step,
              res.run.w_obs, res.initial_score);
  std::printf("best validation %.4f at step %d\n",
              ckpt.best_score ? *ckpt.best_score : res.best_score,
              ckpt.best_score ? ckpt.best_step : res.best_step);
  std::printf("checkpoint -> %s\nhistory -> %s\n", ckpt_path.string().c_str(),
              history_path.string().c_str());
  return 0;
}

int run_baseline(const std::string& config_path, const std::string& method) {
  if (method != "hand" && method != "fithand" && method != "fittv" && method != "fittruth")
    throw UsageError("baseline supports --method hand|fithand|fittv|fittruth (use `steady "
                     "train` for steady/steady-minus)");
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const LoadedDataset loaded = load_dataset_dir(out);
  const ExperimentSetup setup = make_setup(cfg, loaded.ds, loaded.map);

  const FittedMethod fitted = fit_method(method, setup);

  Checkpoint ckpt;
  ckpt.method = method;
  ckpt.config_hash = config_hash(cfg);
  ckpt.dataset_hash = loaded.dataset_hash;
  ckpt.seed = cfg.seed;
  ckpt.analytic = fitted.analytic;
  ckpt.params = fitted.analytic ? DynamicsParams::zeros() : fitted.params;
  const fs::path ckpt_path = out / (method + ".ckpt.json");
  save_checkpoint(ckpt_path, ckpt);
  std::printf("%s: %s -> %s\n", method.c_str(),
              fitted.analytic ? "analytic model (no learned parameters)" : "fitted model",
              ckpt_path.string().c_str());
  return 0;
}

int run_eval(const std::string& config_path, const std::vector<std::string>& ckpt_paths) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const LoadedDataset loaded = load_dataset_dir(out);
  const ExperimentSetup setup = make_setup(cfg, loaded.ds, loaded.map);

  json rows = json::array();
  std::printf("%-14s %14s %14s %14s %14s\n", "method", "se_loc[m]", "se_ang[rad]", "fp_loc[m]",
              "fp_ang[rad]");
  for (const std::string& path : ckpt_paths) {
    const Checkpoint ckpt = load_checkpoint_for(path, loaded);
    FittedMethod fitted;
    fitted.method = ckpt.method;
    fitted.analytic = ckpt.analytic;
    fitted.params = ckpt.eval_params();
    const MetricReport rep = evaluate_method(fitted, setup, true, true);
    std::printf("%-14s %14.5f %14.5f %14.5f %14.5f%s\n", rep.method.c_str(), rep.state.loc_rmse,
                rep.state.ang_rmse, rep.fwd.loc_rmse, rep.fwd.ang_rmse,
                rep.state.flagged > 0
                    ? (" (" + std::to_string(rep.state.flagged) + " trajectories flagged)").c_str()
                    : "");
    rows.push_back(json{{"method", rep.method},
                        {"checkpoint", path},
                        {"se_loc_rmse", rep.state.loc_rmse},
                        {"se_ang_rmse", rep.state.ang_rmse},
                        {"se_flagged", rep.state.flagged},
                        {"se_per_traj_loc", rep.state.per_traj_loc},
                        {"se_per_traj_ang", rep.state.per_traj_ang},
                        {"fp_loc_rmse", rep.fwd.loc_rmse},
                        {"fp_ang_rmse", rep.fwd.ang_rmse}});
  }
  const json report{{"kind", "eval-report"},
                    {"code_version", kCodeVersion},
                    {"config_hash", config_hash(cfg)},
                    {"dataset_hash", loaded.dataset_hash},
                    {"seed", cfg.seed},
                    {"rows", rows}};
  const fs::path report_path = out / "eval" / "metrics.json";
  write_text(report_path, report.dump(2) + "\n");
  std::printf("report -> %s\n", report_path.string().c_str());
  return 0;
}

std::vector<std::string> parse_methods(const std::string& csv) {
  std::vector<std::string> methods;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bool known = false;
    for (const std::string& m : known_methods()) known = known || m == item;
    if (!known) throw UsageError("unknown method '" + item + "' in --methods");
    methods.push_back(item);
  }
  if (methods.empty()) throw UsageError("--methods lists no methods");
  return methods;
}

int run_sweep(const std::string& config_path, bool noise, bool particles, int jobs_flag,
              int repeats, const std::string& methods_csv) {
  if (noise == particles) throw UsageError("pass exactly one of --noise or --particles");
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const LoadedDataset loaded = load_dataset_dir(out);
  const ExperimentSetup setup = make_setup(cfg, loaded.ds, loaded.map);
  const int jobs = resolve_jobs(jobs_flag);

  if (noise) {
    const std::vector<std::string> methods = parse_methods(methods_csv);
    const std::vector<NoiseSweepRow> rows =
        noise_sweep(setup, cfg.noise_levels_deg, methods, jobs, repeats);
    std::string tsv = "# kind=noise-sweep " + provenance(cfg) +
                      " repeats=" + std::to_string(repeats) + "\n" +
                      "method\tsigma_deg\tfwd_loc_rmse\tfwd_ang_rmse\tok\tnote\n";
    std::printf("%-14s %10s %14s %14s  %s\n", "method", "sigma_deg", "fwd_loc[m]", "fwd_ang[rad]",
                "status");
    for (const NoiseSweepRow& r : rows) {
      tsv += r.method + "\t" + format_double(r.sigma_deg) + "\t" + format_double(r.fwd_loc_rmse) +
             "\t" + format_double(r.fwd_ang_rmse) + "\t" + (r.ok ? "1" : "0") + "\t" + r.note +
             "\n";
      std::printf("%-14s %10.3g %14.5f %14.5f  %s\n", r.method.c_str(), r.sigma_deg,
                  r.fwd_loc_rmse, r.fwd_ang_rmse, r.ok ? "ok" : r.note.c_str());
    }
    const fs::path path = out / "sweeps" / "noise.tsv";
    write_text(path, tsv);
    std::printf("table -> %s\n", path.string().c_str());
    return 0;
  }

  const ParticleSweepResult res = particle_sweep(setup, cfg.particle_counts, jobs);
  std::string points = "# kind=particle-sweep-points " + provenance(cfg) + "\n" +
                       "n_particles\tstep\twall_s\tscore\n";
  for (const ParticleSweepPoint& p : res.points)
    points += std::to_string(p.n_particles) + "\t" + std::to_string(p.step) + "\t" +
              format_double(p.wall_s) + "\t" + format_double(p.score) + "\n";
  std::string summary = "# kind=particle-sweep-summary " + provenance(cfg) + "\n" +
                        "n_particles\tbest_score\tmean_step_ms\n";
  std::printf("%12s %14s %14s\n", "n_particles", "best_score", "mean_step_ms");
  for (const ParticleSweepSummary& s : res.summary) {
    summary += std::to_string(s.n_particles) + "\t" + format_double(s.best_score) + "\t" +
               format_double(s.mean_step_ms) + "\n";
    std::printf("%12d %14.4f %14.2f\n", s.n_particles, s.best_score, s.mean_step_ms);
  }
  const fs::path points_path = out / "sweeps" / "particles_points.tsv";
  const fs::path summary_path = out / "sweeps" / "particles_summary.tsv";
  write_text(points_path, points);
  write_text(summary_path, summary);
  std::printf("tables -> %s, %s\n", points_path.string().c_str(), summary_path.string().c_str());
  return 0;
}

int run_export_posterior(const std::string& config_path, const std::string& ckpt_path,
                         int traj_index, std::string output) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = resolve_output_dir(cfg);
  const LoadedDataset loaded = load_dataset_dir(out);
  const Checkpoint ckpt = load_checkpoint_for(ckpt_path, loaded);
  if (traj_index < 0 || traj_index >= static_cast<int>(loaded.ds.test.size()))
    throw UsageError("--trajectory " + std::to_string(traj_index) +
                     " out of range (test split has " + std::to_string(loaded.ds.test.size()) +
                     " trajectories)");

  const Trajectory& truth = loaded.ds.test[static_cast<std::size_t>(traj_index)];
  const HandModel hand(cfg.hov);
  const DynamicsParams params = ckpt.eval_params();
  const NeuralDynamicsModel net(params);
  const DynamicsModel& model =
      ckpt.analytic ? static_cast<const DynamicsModel&>(hand) : net;

  // Mirror the evaluation filter exactly: same observation draw, same filter
  // seed, so the export shows the run the metrics came from.
  const std::uint64_t eval_seed = derive_seed(cfg.seed, rng_salt::kEvaluation);
  RngStream obs_rng(eval_seed, rng_salt::kEvaluation, static_cast<std::uint64_t>(traj_index));
  const ObservationSequence obs = observe_trajectory(truth, loaded.map, cfg.sigma_bearing_rad(),
                                                     cfg.eval_stride, obs_rng);
  const PosteriorVelocityTable table = posterior_velocity_export(
      model, truth, obs, loaded.map, InitialStateDist{cfg.dataset.init_pos_halfwidth},
      cfg.eval_particles,
      derive_seed(eval_seed, rng_salt::kEvalFilter, static_cast<std::uint64_t>(traj_index)));

  std::string tsv = "# kind=posterior-velocity method=" + ckpt.method +
                    " trajectory=" + std::to_string(traj_index) + " " + provenance(cfg) + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    tsv += table.columns[c] + (c + 1 < table.columns.size() ? "\t" : "\n");
  for (Eigen::Index r = 0; r < table.rows.rows(); ++r)
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c)
      tsv += format_double(table.rows(r, c)) + (c + 1 < table.rows.cols() ? "\t" : "\n");

  if (output.empty())
    output = (out / ("posterior_traj" + std::to_string(traj_index) + "_" + ckpt.method + ".tsv"))
                 .string();
  write_text(output, tsv);
  std::printf("%zu rows x %zu columns -> %s\n", static_cast<std::size_t>(table.rows.rows()),
              table.columns.size(), output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "steady: learns a stochastic hovercraft dynamics model from bearing-only\n"
      "observations (Monte Carlo EM), with baselines, evaluation and sweeps.\n"
      "Environment: STEADY_OUTPUT_DIR overrides the config output directory;\n"
      "STEADY_JOBS sets the default worker count for sweeps."};
  app.require_subcommand(1);

  std::string config_path = "config.json";
  std::string method = "steady";
  std::string resume_path;
  std::string init_output = "config.json";
  std::string export_output;
  std::string methods_csv = "steady,hand,fithand,fittv,fittruth";
  std::vector<std::string> ckpt_paths;
  std::string ckpt_path;
  bool full_scale = false;
  bool force = false;
  bool noise = false;
  bool particles = false;
  int jobs = 0;
  int repeats = 1;
  int traj_index = 0;

  CLI::App* init = app.add_subcommand("init-config", "Write a config file with full defaults");
  init->add_option("-o,--output", init_output, "Destination path")->capture_default_str();
  init->add_flag("--full-scale", full_scale,
                 "Full-scale preset: 16/32/32 trajectories, 20k particles, 40k EM steps");
  init->add_flag("--force", force, "Overwrite an existing file");

  CLI::App* sim = app.add_subcommand("simulate", "Generate dataset + observation files");
  sim->add_option("-c,--config", config_path, "Run config file")->required();

  CLI::App* train_cmd =
      app.add_subcommand("train", "Train a dynamics model with Monte Carlo EM");
  train_cmd->add_option("-c,--config", config_path, "Run config file")->required();
  train_cmd->add_option("-m,--method", method, "steady | steady-minus (no posterior flattening)")
      ->capture_default_str();
  train_cmd->add_option("--resume", resume_path, "Continue from a saved checkpoint");

  CLI::App* base = app.add_subcommand("baseline", "Fit a baseline model");
  base->add_option("-c,--config", config_path, "Run config file")->required();
  base->add_option("-m,--method", method, "hand | fithand | fittv | fittruth")->required();

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate checkpoints on the test split");
  eval_cmd->add_option("-c,--config", config_path, "Run config file")->required();
  eval_cmd->add_option("checkpoints", ckpt_paths, "Checkpoint files to evaluate")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Noise or particle-count sweep");
  sweep->add_option("-c,--config", config_path, "Run config file")->required();
  sweep->add_flag("--noise", noise, "Sweep bearing noise levels (retrains per level)");
  sweep->add_flag("--particles", particles, "Sweep particle counts (shared data and seed)");
  sweep->add_option("-j,--jobs", jobs, "Worker threads (default: STEADY_JOBS or 1)");
  sweep->add_option("--repeats", repeats, "Fits per cell, best kept")->capture_default_str();
  sweep->add_option("--methods", methods_csv, "Comma-separated methods for --noise")
      ->capture_default_str();

  CLI::App* expo = app.add_subcommand("export-posterior",
                                      "Export posterior velocity quantiles for one trajectory");
  expo->add_option("-c,--config", config_path, "Run config file")->required();
  expo->add_option("checkpoint", ckpt_path, "Checkpoint file")->required();
  expo->add_option("-t,--trajectory", traj_index, "Test-split trajectory index")
      ->capture_default_str();
  expo->add_option("-o,--output", export_output, "Destination path (default: derived)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (init->parsed()) return run_init_config(init_output, full_scale, force);
    if (sim->parsed()) return run_simulate(config_path);
    if (train_cmd->parsed()) return run_train(config_path, method, resume_path);
    if (base->parsed()) return run_baseline(config_path, method);
    if (eval_cmd->parsed()) return run_eval(config_path, ckpt_paths);
    if (sweep->parsed()) return run_sweep(config_path, noise, particles, jobs, repeats, methods_csv);
    if (expo->parsed()) return run_export_posterior(config_path, ckpt_path, traj_index, export_output);
    return 2;  // unreachable: require_subcommand(1)
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    return msg.rfind("config error:", 0) == 0 ? 2 : 1;
  }
}
