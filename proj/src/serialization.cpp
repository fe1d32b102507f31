#include "steady/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace steady {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json parse_json(const std::string& text, const std::string& context) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error(context + ": malformed JSON");
  return j;
}

// --- tensors -----------------------------------------------------------------

template <typename Mat>
json tensor_to_json(const Mat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

template <typename Mat>
void tensor_from_json(const json& j, Mat& m, Eigen::Index rows, Eigen::Index cols,
                      const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::runtime_error(name + ": malformed tensor record");
  if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols)
    throw std::runtime_error(name + ": unexpected tensor shape");
  const json& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::runtime_error(name + ": tensor data size mismatch");
  m.resize(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(i++)].get<double>();
}

json params_to_json(const DynamicsParams& p) {
  return json{{"w1", tensor_to_json(p.w1)},
              {"b1", tensor_to_json(p.b1)},
              {"w_mu", tensor_to_json(p.w_mu)},
              {"b_mu", tensor_to_json(p.b_mu)},
              {"w_skip", tensor_to_json(p.w_skip)},
              {"w_sig", tensor_to_json(p.w_sig)},
              {"b_sig", tensor_to_json(p.b_sig)},
              {"scales",
               {{"velocity", p.scales.velocity},
                {"omega", p.scales.omega},
                {"thrust", p.scales.thrust}}}};
}

DynamicsParams params_from_json(const json& j, const std::string& name) {
  if (!j.is_object()) throw std::runtime_error(name + ": expected an object");
  DynamicsParams p = DynamicsParams::zeros();
  tensor_from_json(j.at("w1"), p.w1, kNetHiddenDim, kNetInputDim, name + ".w1");
  tensor_from_json(j.at("b1"), p.b1, kNetHiddenDim, 1, name + ".b1");
  tensor_from_json(j.at("w_mu"), p.w_mu, kNetOutputDim, kNetHiddenDim, name + ".w_mu");
  tensor_from_json(j.at("b_mu"), p.b_mu, kNetOutputDim, 1, name + ".b_mu");
  tensor_from_json(j.at("w_skip"), p.w_skip, kNetOutputDim, kNetInputDim, name + ".w_skip");
  tensor_from_json(j.at("w_sig"), p.w_sig, kNetOutputDim, kNetInputDim, name + ".w_sig");
  tensor_from_json(j.at("b_sig"), p.b_sig, kNetOutputDim, 1, name + ".b_sig");
  if (j.contains("scales")) {
    const json& s = j.at("scales");
    p.scales.velocity = s.at("velocity").get<double>();
    p.scales.omega = s.at("omega").get<double>();
    p.scales.thrust = s.at("thrust").get<double>();
  }
  return p;
}

json adam_to_json(const AdamState& a) {
  return json{{"t", a.t},           {"lr", a.lr},
              {"beta1", a.beta1},   {"beta2", a.beta2},
              {"eps_hat", a.eps_hat}, {"m", params_to_json(a.m)},
              {"v", params_to_json(a.v)}};
}

AdamState adam_from_json(const json& j) {
  AdamState a;
  a.t = j.at("t").get<long>();
  a.lr = j.at("lr").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.eps_hat = j.at("eps_hat").get<double>();
  a.m = params_from_json(j.at("m"), "adam.m");
  a.v = params_from_json(j.at("v"), "adam.v");
  return a;
}

json history_entry_to_json(const HistoryEntry& e) {
  json j{{"step", e.step}, {"w_obs", e.w_obs}, {"wall_ms", e.wall_ms}};
  j["objective"] = e.objective.has_value() ? json(*e.objective) : json(nullptr);
  j["validation"] = e.validation.has_value() ? json(*e.validation) : json(nullptr);
  return j;
}

HistoryEntry history_entry_from_json(const json& j) {
  HistoryEntry e;
  e.step = j.at("step").get<int>();
  e.w_obs = j.at("w_obs").get<double>();
  e.wall_ms = j.at("wall_ms").get<double>();
  if (j.contains("objective") && !j.at("objective").is_null())
    e.objective = j.at("objective").get<double>();
  if (j.contains("validation") && !j.at("validation").is_null())
    e.validation = j.at("validation").get<double>();
  return e;
}

// --- line-delimited record files ----------------------------------------------

void save_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<json> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    records.push_back(parse_json(line, path.string() + ":" + std::to_string(line_no)));
  }
  return records;
}

}  // namespace

std::string hash_file(const std::filesystem::path& path) {
  return hex64(fnv1a64(read_file(path)));
}

void save_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajs) {
  std::vector<json> records;
  records.reserve(trajs.size());
  for (const Trajectory& traj : trajs) {
    json states = json::array();
    for (const State& s : traj.states)
      states.push_back({s.pose.x, s.pose.y, s.pose.theta, s.vx, s.vy, s.omega});
    json controls = json::array();
    for (const Control& c : traj.controls) controls.push_back({c.u_left, c.u_right});
    records.push_back(
        json{{"dt", traj.dt}, {"states", std::move(states)}, {"controls", std::move(controls)}});
  }
  save_jsonl(path, records);
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  std::vector<Trajectory> out;
  for (const json& r : load_jsonl(path)) {
    Trajectory traj;
    traj.dt = r.at("dt").get<double>();
    const json& states = r.at("states");
    const json& controls = r.at("controls");
    if (!states.is_array() || states.empty())
      throw std::runtime_error(path.string() + ": trajectory record without states");
    if (!controls.is_array() || controls.size() + 1 != states.size())
      throw std::runtime_error(path.string() + ": control count must be one less than states");
    for (const json& row : states) {
      if (!row.is_array() || row.size() != 6)
        throw std::runtime_error(path.string() + ": state rows need 6 components");
      State s;
      s.pose.x = row[0].get<double>();
      s.pose.y = row[1].get<double>();
      s.pose.theta = row[2].get<double>();
      s.vx = row[3].get<double>();
      s.vy = row[4].get<double>();
      s.omega = row[5].get<double>();
      traj.states.push_back(s);
    }
    for (const json& row : controls) {
      if (!row.is_array() || row.size() != 2)
        throw std::runtime_error(path.string() + ": control rows need 2 components");
      traj.controls.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    out.push_back(std::move(traj));
  }
  return out;
}

void save_observations(const std::filesystem::path& path,
                       const std::vector<ObservationSequence>& seqs) {
  std::vector<json> records;
  records.reserve(seqs.size());
  for (const ObservationSequence& seq : seqs) {
    json steps = json::array();
    for (const auto& step : seq.steps) {
      if (step.has_value())
        steps.push_back(step->bearings);
      else
        steps.push_back(nullptr);
    }
    records.push_back(json{{"sigma_bearing", seq.sigma_bearing}, {"steps", std::move(steps)}});
  }
  save_jsonl(path, records);
}

std::vector<ObservationSequence> load_observations(const std::filesystem::path& path) {
  std::vector<ObservationSequence> out;
  for (const json& r : load_jsonl(path)) {
    ObservationSequence seq;
    seq.sigma_bearing = r.at("sigma_bearing").get<double>();
    for (const json& step : r.at("steps")) {
      if (step.is_null()) {
        seq.steps.push_back(std::nullopt);
      } else {
        Observation obs;
        obs.bearings = step.get<std::vector<double>>();
        seq.steps.push_back(std::move(obs));
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void save_landmarks(const std::filesystem::path& path, const LandmarkMap& map) {
  json positions = json::array();
  for (const Vec2& p : map.positions) positions.push_back({p.x, p.y});
  write_file(path, json{{"positions", std::move(positions)}}.dump(2) + "\n");
}

LandmarkMap load_landmarks(const std::filesystem::path& path) {
  const json j = parse_json(read_file(path), path.string());
  LandmarkMap map;
  for (const json& row : j.at("positions")) map.positions.push_back({row[0].get<double>(), row[1].get<double>()});
  return map;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json j{{"kind", "checkpoint"},
         {"format_version", ckpt.format_version},
         {"code_version", kCodeVersion},
         {"method", ckpt.method},
         {"config_hash", ckpt.config_hash},
         {"dataset_hash", ckpt.dataset_hash},
         {"seed", ckpt.seed},
         {"step", ckpt.step},
         {"analytic", ckpt.analytic},
         {"params", params_to_json(ckpt.params)},
         {"best_step", ckpt.best_step}};
  j["best_params"] =
      ckpt.best_params.has_value() ? params_to_json(*ckpt.best_params) : json(nullptr);
  j["best_score"] = ckpt.best_score.has_value() ? json(*ckpt.best_score) : json(nullptr);
  j["adam"] = ckpt.adam.has_value() ? adam_to_json(*ckpt.adam) : json(nullptr);
  json history = json::array();
  for (const HistoryEntry& e : ckpt.history) history.push_back(history_entry_to_json(e));
  j["history"] = std::move(history);
  write_file(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const json j = parse_json(read_file(path), path.string());
  Checkpoint ckpt;
  if (!j.contains("format_version"))
    throw std::runtime_error(path.string() + ": not a checkpoint file");
  ckpt.format_version = j.at("format_version").get<int>();
  if (ckpt.format_version != kCheckpointFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported checkpoint format version " +
                             std::to_string(ckpt.format_version));
  ckpt.method = j.at("method").get<std::string>();
  ckpt.config_hash = j.at("config_hash").get<std::string>();
  ckpt.dataset_hash = j.at("dataset_hash").get<std::string>();
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.step = j.at("step").get<int>();
  ckpt.analytic = j.at("analytic").get<bool>();
  ckpt.params = params_from_json(j.at("params"), "params");
  if (j.contains("best_params") && !j.at("best_params").is_null())
    ckpt.best_params = params_from_json(j.at("best_params"), "best_params");
  if (j.contains("best_score") && !j.at("best_score").is_null())
    ckpt.best_score = j.at("best_score").get<double>();
  if (j.contains("best_step")) ckpt.best_step = j.at("best_step").get<int>();
  if (j.contains("adam") && !j.at("adam").is_null()) ckpt.adam = adam_from_json(j.at("adam"));
  if (j.contains("history"))
    for (const json& e : j.at("history")) ckpt.history.push_back(history_entry_from_json(e));
  return ckpt;
}

void append_history(const std::filesystem::path& path, const HistoryEntry& entry) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to history file: " + path.string());
  out << history_entry_to_json(entry).dump() << '\n';
}

std::vector<HistoryEntry> load_history(const std::filesystem::path& path) {
  std::vector<HistoryEntry> out;
  for (const json& r : load_jsonl(path)) out.push_back(history_entry_from_json(r));
  return out;
}

// --- run configuration ----------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw std::runtime_error("config error: " + field + ": " + what);
}

// Reads one JSON object section, overlaying present keys onto defaults and
// rejecting unknown keys (typo protection).
class SectionReader {
 public:
  SectionReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) config_error(display_name(), "expected an object");
  }

  void real(const char* key, double& target, bool require_positive = false) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) config_error(prefix_ + key, "expected a number");
    target = v.get<double>();
    if (require_positive && !(target > 0.0)) config_error(prefix_ + key, "must be positive");
  }

  void integer(const char* key, int& target, int min_value) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) config_error(prefix_ + key, "expected an integer");
    target = v.get<int>();
    if (target < min_value)
      config_error(prefix_ + key, "must be at least " + std::to_string(min_value));
  }

  void u64(const char* key, std::uint64_t& target) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
      config_error(prefix_ + key, "expected a non-negative integer");
    target = v.get<std::uint64_t>();
  }

  void text(const char* key, std::string& target) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) config_error(prefix_ + key, "expected a string");
    target = v.get<std::string>();
  }

  void real_list(const char* key, std::vector<double>& target) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(prefix_ + key, "expected an array of numbers");
    std::vector<double> values;
    for (const json& e : v) {
      if (!e.is_number()) config_error(prefix_ + key, "expected an array of numbers");
      values.push_back(e.get<double>());
    }
    target = std::move(values);
  }

  void int_list(const char* key, std::vector<int>& target) {
    consumed_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(prefix_ + key, "expected an array of integers");
    std::vector<int> values;
    for (const json& e : v) {
      if (!e.is_number_integer()) config_error(prefix_ + key, "expected an array of integers");
      values.push_back(e.get<int>());
    }
    target = std::move(values);
  }

  void triple(const char* key, Accel& target) {
    std::vector<double> values{target[0], target[1], target[2]};
    real_list(key, values);
    if (values.size() != 3) config_error(prefix_ + key, "expected exactly 3 numbers");
    target = {values[0], values[1], values[2]};
  }

  const json* section(const char* key) {
    consumed_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!consumed_.count(item.key())) config_error(prefix_ + item.key(), "unknown field");
  }

 private:
  std::string display_name() const { return prefix_.empty() ? "<root>" : prefix_; }
  const json& j_;
  std::string prefix_;
  std::set<std::string> consumed_;
};

json run_config_to_json(const RunConfig& c) {
  return json{
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"hovercraft",
       {{"mass", c.hov.mass},
        {"inertia", c.hov.inertia},
        {"arm", c.hov.arm},
        {"drag_lin", c.hov.drag_lin},
        {"drag_rot", c.hov.drag_rot},
        {"u_max", c.hov.u_max},
        {"sigma_acc", c.hov.sigma_acc},
        {"sigma_alpha", c.hov.sigma_alpha},
        {"dt", c.hov.dt}}},
      {"dataset",
       {{"n_train", c.dataset.n_train},
        {"n_valid", c.dataset.n_valid},
        {"n_test", c.dataset.n_test},
        {"duration", c.dataset.duration},
        {"init_pos_halfwidth", c.dataset.init_pos_halfwidth}}},
      {"observation",
       {{"n_landmarks", c.n_landmarks},
        {"landmark_halfwidth", c.landmark_halfwidth},
        {"sigma_bearing_deg", c.sigma_bearing_deg},
        {"train_stride", c.train_stride},
        {"eval_stride", c.eval_stride}}},
      {"train",
       {{"max_steps", c.train.max_steps},
        {"n_particles", c.train.n_particles},
        {"n_traj_samples", c.train.n_traj_samples},
        {"anneal_steps", c.train.anneal_steps},
        {"validation_every", c.train.validation_every},
        {"patience", c.train.patience},
        {"validation_particles", c.train.validation_particles},
        {"lr", c.train.lr},
        {"sigma0", {c.train.sigma0[0], c.train.sigma0[1], c.train.sigma0[2]}}}},
      {"supervised",
       {{"max_steps", c.supervised.max_steps},
        {"batch_size", c.supervised.batch_size},
        {"validation_every", c.supervised.validation_every},
        {"patience", c.supervised.patience},
        {"holdout_fraction", c.supervised.holdout_fraction},
        {"lr", c.supervised.lr},
        {"sigma0", {c.supervised.sigma0[0], c.supervised.sigma0[1], c.supervised.sigma0[2]}}}},
      {"tv",
       {{"lambda_grid", c.tv.lambda_grid},
        {"huber_eps", c.tv.huber_eps},
        {"iters", c.tv.iters},
        {"step_size", c.tv.step_size}}},
      {"eval",
       {{"n_particles", c.eval_particles},
        {"horizon", c.horizon},
        {"workspace_halfwidth", c.workspace_halfwidth}}},
      {"sweep",
       {{"noise_levels_deg", c.noise_levels_deg}, {"particle_counts", c.particle_counts}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = default_run_config();
  SectionReader root(j, "");
  root.u64("seed", c.seed);
  root.text("output_dir", c.output_dir);
  if (const json* s = root.section("hovercraft")) {
    SectionReader r(*s, "hovercraft.");
    r.real("mass", c.hov.mass, true);
    r.real("inertia", c.hov.inertia, true);
    r.real("arm", c.hov.arm, true);
    r.real("drag_lin", c.hov.drag_lin);
    r.real("drag_rot", c.hov.drag_rot);
    r.real("u_max", c.hov.u_max, true);
    r.real("sigma_acc", c.hov.sigma_acc, true);
    r.real("sigma_alpha", c.hov.sigma_alpha, true);
    r.real("dt", c.hov.dt, true);
    r.finish();
  }
  if (const json* s = root.section("dataset")) {
    SectionReader r(*s, "dataset.");
    r.integer("n_train", c.dataset.n_train, 1);
    r.integer("n_valid", c.dataset.n_valid, 1);
    r.integer("n_test", c.dataset.n_test, 1);
    r.real("duration", c.dataset.duration, true);
    r.real("init_pos_halfwidth", c.dataset.init_pos_halfwidth, true);
    r.finish();
  }
  if (const json* s = root.section("observation")) {
    SectionReader r(*s, "observation.");
    r.integer("n_landmarks", c.n_landmarks, 1);
    r.real("landmark_halfwidth", c.landmark_halfwidth, true);
    r.real("sigma_bearing_deg", c.sigma_bearing_deg, true);
    r.integer("train_stride", c.train_stride, 1);
    r.integer("eval_stride", c.eval_stride, 1);
    r.finish();
  }
  if (const json* s = root.section("train")) {
    SectionReader r(*s, "train.");
    r.integer("max_steps", c.train.max_steps, 0);
    r.integer("n_particles", c.train.n_particles, 2);
    r.integer("n_traj_samples", c.train.n_traj_samples, 1);
    r.integer("anneal_steps", c.train.anneal_steps, -1);
    r.integer("validation_every", c.train.validation_every, 1);
    r.integer("patience", c.train.patience, 1);
    r.integer("validation_particles", c.train.validation_particles, 0);
    r.real("lr", c.train.lr, true);
    r.triple("sigma0", c.train.sigma0);
    r.finish();
  }
  if (const json* s = root.section("supervised")) {
    SectionReader r(*s, "supervised.");
    r.integer("max_steps", c.supervised.max_steps, 0);
    r.integer("batch_size", c.supervised.batch_size, 1);
    r.integer("validation_every", c.supervised.validation_every, 1);
    r.integer("patience", c.supervised.patience, 1);
    r.real("holdout_fraction", c.supervised.holdout_fraction, true);
    r.real("lr", c.supervised.lr, true);
    r.triple("sigma0", c.supervised.sigma0);
    r.finish();
  }
  if (const json* s = root.section("tv")) {
    SectionReader r(*s, "tv.");
    r.real_list("lambda_grid", c.tv.lambda_grid);
    r.real("huber_eps", c.tv.huber_eps, true);
    r.integer("iters", c.tv.iters, 0);
    r.real("step_size", c.tv.step_size, true);
    r.finish();
  }
  if (const json* s = root.section("eval")) {
    SectionReader r(*s, "eval.");
    r.integer("n_particles", c.eval_particles, 2);
    r.integer("horizon", c.horizon, 0);
    r.real("workspace_halfwidth", c.workspace_halfwidth, true);
    r.finish();
  }
  if (const json* s = root.section("sweep")) {
    SectionReader r(*s, "sweep.");
    r.real_list("noise_levels_deg", c.noise_levels_deg);
    r.int_list("particle_counts", c.particle_counts);
    r.finish();
  }
  root.finish();

  for (double level : c.noise_levels_deg)
    if (!(level > 0.0)) config_error("sweep.noise_levels_deg", "levels must be positive");
  for (int count : c.particle_counts)
    if (count < 2) config_error("sweep.particle_counts", "counts must be at least 2");
  for (double lam : c.tv.lambda_grid)
    if (!(lam > 0.0)) config_error("tv.lambda_grid", "lambdas must be positive");
  return c;
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig full_scale_config() {
  RunConfig c;
  c.dataset.n_train = 16;
  c.dataset.n_valid = 32;
  c.dataset.n_test = 32;
  c.train.max_steps = 40000;
  c.train.n_particles = 20000;
  c.eval_particles = 20000;
  return c;
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  write_file(path, run_config_to_json(cfg).dump(2) + "\n");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(parse_json(read_file(path), path.string()));
}

std::string config_hash(const RunConfig& cfg) {
  return hex64(fnv1a64(run_config_to_json(cfg).dump()));
}

ExperimentSetup make_setup(const RunConfig& cfg, Dataset dataset, LandmarkMap map) {
  ExperimentSetup s;
  s.dataset = std::move(dataset);
  s.map = std::move(map);
  s.spec = cfg.dataset;
  s.hov = cfg.hov;
  s.sigma_bearing = cfg.sigma_bearing_rad();
  s.train_stride = cfg.train_stride;
  s.train = cfg.train;
  s.supervised = cfg.supervised;
  s.tv = cfg.tv;
  s.eval.n_particles = cfg.eval_particles;
  s.eval.stride = cfg.eval_stride;
  s.eval.horizon = cfg.horizon;
  s.eval.sigma_bearing = cfg.sigma_bearing_rad();
  s.eval.q_x1 = {cfg.dataset.init_pos_halfwidth};
  s.workspace_halfwidth = cfg.workspace_halfwidth;
  s.seed = cfg.seed;
  return s;
}

}  // namespace steady
