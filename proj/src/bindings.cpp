// Python bindings for the core operations: simulation, observation,
// dynamics-model prediction, particle filtering, EM training, evaluation and
// checkpoint IO. Matrices cross the boundary as numpy arrays (copies; the
// C++ side keeps ownership semantics simple).

#include <memory>
#include <stdexcept>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steady/baselines.hpp"
#include "steady/evaluation.hpp"
#include "steady/hovercraft.hpp"
#include "steady/mcem.hpp"
#include "steady/neural_dynamics.hpp"
#include "steady/observation.hpp"
#include "steady/particle_filter.hpp"
#include "steady/serialization.hpp"

namespace py = pybind11;
using namespace steady;

namespace {

Eigen::MatrixXd states_to_matrix(const std::vector<State>& states) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), kStateDim);
  for (std::size_t i = 0; i < states.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = pack_state(states[i]);
  return m;
}

std::vector<State> matrix_to_states(const Eigen::MatrixXd& m) {
  if (m.cols() != kStateDim) throw std::invalid_argument("state matrix must have 6 columns");
  std::vector<State> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = unpack_state(m.row(i));
  return out;
}

Eigen::MatrixXd controls_to_matrix(const std::vector<Control>& controls) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(controls.size()), 2);
  for (std::size_t i = 0; i < controls.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = controls[i].u_left;
    m(static_cast<Eigen::Index>(i), 1) = controls[i].u_right;
  }
  return m;
}

std::vector<Control> matrix_to_controls(const Eigen::MatrixXd& m) {
  if (m.cols() != 2) throw std::invalid_argument("control matrix must have 2 columns");
  std::vector<Control> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = {m(i, 0), m(i, 1)};
  return out;
}

Accel triple_to_accel(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw std::invalid_argument(std::string(what) + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

// Model wrapper owning its parameters (the C++ NeuralDynamicsModel holds a
// pointer; sharing the parameter block keeps copies safe).
struct PyModel {
  std::shared_ptr<DynamicsParams> params;  // null for analytic models
  bool analytic = false;
  std::shared_ptr<DynamicsModel> model;

  const DynamicsModel& ref() const { return *model; }
};

PyModel make_neural_model(const DynamicsParams& p) {
  PyModel m;
  m.params = std::make_shared<DynamicsParams>(p);
  m.model = std::make_shared<NeuralDynamicsModel>(*m.params);
  return m;
}

PyModel make_hand_model(const HovParams& p) {
  PyModel m;
  m.analytic = true;
  m.model = std::make_shared<HandModel>(p);
  return m;
}

PyModel make_true_model(const HovParams& p) {
  PyModel m;
  m.analytic = true;
  m.model = std::make_shared<TrueModel>(p);
  return m;
}

// N x 5 model inputs (body-frame velocities + per-row controls) from packed
// states.
Eigen::MatrixXd inputs_from_states(const Eigen::MatrixXd& states, const Eigen::MatrixXd& u) {
  if (states.cols() != kStateDim) throw std::invalid_argument("state matrix must have 6 columns");
  if (u.cols() != 2 || u.rows() != states.rows())
    throw std::invalid_argument("control matrix must be N x 2");
  Eigen::MatrixXd inputs(states.rows(), kNetInputDim);
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const double c = std::cos(states(i, kStateTheta));
    const double s = std::sin(states(i, kStateTheta));
    inputs(i, 0) = c * states(i, kStateVx) + s * states(i, kStateVy);
    inputs(i, 1) = -s * states(i, kStateVx) + c * states(i, kStateVy);
    inputs(i, 2) = states(i, kStateOmega);
    inputs(i, 3) = u(i, 0);
    inputs(i, 4) = u(i, 1);
  }
  return inputs;
}

py::dict history_to_dict(const HistoryEntry& e) {
  py::dict d;
  d["step"] = e.step;
  d["objective"] = e.objective ? py::cast(*e.objective) : py::none();
  d["w_obs"] = e.w_obs;
  d["wall_ms"] = e.wall_ms;
  d["validation"] = e.validation ? py::cast(*e.validation) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_steady, m) {
  m.doc() = "Simultaneous state estimation and dynamics learning for a planar "
            "hovercraft observed through noisy landmark bearings.";
  m.attr("__version__") = kCodeVersion;

  py::register_exception<ParticleDeathError>(m, "ParticleDeathError");

  py::class_<HovParams>(m, "HovParams")
      .def(py::init<>())
      .def_readwrite("mass", &HovParams::mass)
      .def_readwrite("inertia", &HovParams::inertia)
      .def_readwrite("arm", &HovParams::arm)
      .def_readwrite("drag_lin", &HovParams::drag_lin)
      .def_readwrite("drag_rot", &HovParams::drag_rot)
      .def_readwrite("u_max", &HovParams::u_max)
      .def_readwrite("sigma_acc", &HovParams::sigma_acc)
      .def_readwrite("sigma_alpha", &HovParams::sigma_alpha)
      .def_readwrite("dt", &HovParams::dt);

  py::class_<DatasetSpec>(m, "DatasetSpec")
      .def(py::init<>())
      .def_readwrite("n_train", &DatasetSpec::n_train)
      .def_readwrite("n_valid", &DatasetSpec::n_valid)
      .def_readwrite("n_test", &DatasetSpec::n_test)
      .def_readwrite("duration", &DatasetSpec::duration)
      .def_readwrite("init_pos_halfwidth", &DatasetSpec::init_pos_halfwidth);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](double dt, const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls) {
             if (states.rows() < 2 || controls.rows() + 1 != states.rows())
               throw std::invalid_argument("need T states and T-1 controls");
             Trajectory t;
             t.dt = dt;
             t.states = matrix_to_states(states);
             t.controls = matrix_to_controls(controls);
             return t;
           }),
           py::arg("dt"), py::arg("states"), py::arg("controls"))
      .def_readonly("dt", &Trajectory::dt)
      .def_property_readonly("states", [](const Trajectory& t) { return states_to_matrix(t.states); })
      .def_property_readonly("controls",
                             [](const Trajectory& t) { return controls_to_matrix(t.controls); })
      .def("__len__", [](const Trajectory& t) { return t.states.size(); });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("train", &Dataset::train)
      .def_readonly("valid", &Dataset::valid)
      .def_readonly("test", &Dataset::test);

  py::class_<LandmarkMap>(m, "LandmarkMap")
      .def(py::init([](const Eigen::MatrixXd& positions) {
             if (positions.cols() != 2) throw std::invalid_argument("landmarks must be L x 2");
             LandmarkMap map;
             for (Eigen::Index i = 0; i < positions.rows(); ++i)
               map.positions.push_back({positions(i, 0), positions(i, 1)});
             return map;
           }),
           py::arg("positions"))
      .def_property_readonly("positions", [](const LandmarkMap& map) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(map.positions.size()), 2);
        for (std::size_t i = 0; i < map.positions.size(); ++i) {
          m(static_cast<Eigen::Index>(i), 0) = map.positions[i].x;
          m(static_cast<Eigen::Index>(i), 1) = map.positions[i].y;
        }
        return m;
      });

  py::class_<ObservationSequence>(m, "ObservationSequence")
      .def_readonly("sigma_bearing", &ObservationSequence::sigma_bearing)
      .def("__len__", [](const ObservationSequence& s) { return s.steps.size(); })
      .def_property_readonly("steps", [](const ObservationSequence& s) {
        py::list out;
        for (const auto& step : s.steps) {
          if (!step.has_value()) {
            out.append(py::none());
            continue;
          }
          Eigen::VectorXd b(static_cast<Eigen::Index>(step->bearings.size()));
          for (std::size_t i = 0; i < step->bearings.size(); ++i)
            b(static_cast<Eigen::Index>(i)) = step->bearings[i];
          out.append(py::cast(b));
        }
        return out;
      });

  py::class_<DynamicsParams>(m, "DynamicsParams")
      .def_property_readonly("w1", [](const DynamicsParams& p) { return p.w1; })
      .def_property_readonly("b1", [](const DynamicsParams& p) { return p.b1; })
      .def_property_readonly("w_mu", [](const DynamicsParams& p) { return p.w_mu; })
      .def_property_readonly("b_mu", [](const DynamicsParams& p) { return p.b_mu; })
      .def_property_readonly("w_skip", [](const DynamicsParams& p) { return p.w_skip; })
      .def_property_readonly("w_sig", [](const DynamicsParams& p) { return p.w_sig; })
      .def_property_readonly("b_sig", [](const DynamicsParams& p) { return p.b_sig; })
      .def("equals", [](const DynamicsParams& a, const DynamicsParams& b) {
        bool same = a.w1.rows() == b.w1.rows();
        const auto eq = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
          same = same && x.rows() == y.rows() && x.cols() == y.cols() &&
                 (x.array() == y.array()).all();
        };
        eq(a.w1, b.w1);
        eq(a.b1, b.b1);
        eq(a.w_mu, b.w_mu);
        eq(a.b_mu, b.b_mu);
        eq(a.w_skip, b.w_skip);
        eq(a.w_sig, b.w_sig);
        eq(a.b_sig, b.b_sig);
        return same && a.scales.velocity == b.scales.velocity &&
               a.scales.omega == b.scales.omega && a.scales.thrust == b.scales.thrust;
      });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_steps", &TrainConfig::max_steps)
      .def_readwrite("n_particles", &TrainConfig::n_particles)
      .def_readwrite("n_traj_samples", &TrainConfig::n_traj_samples)
      .def_readwrite("anneal_steps", &TrainConfig::anneal_steps)
      .def_readwrite("validation_every", &TrainConfig::validation_every)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("validation_particles", &TrainConfig::validation_particles)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("w_obs_at", &TrainConfig::w_obs_at, py::arg("step"));

  py::class_<TrainingData>(m, "TrainingData")
      .def_property_readonly("n_train",
                             [](const TrainingData& d) { return d.train.size(); })
      .def_property_readonly("n_valid",
                             [](const TrainingData& d) { return d.valid.size(); })
      .def_readonly("dt", &TrainingData::dt);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("best_params", &TrainResult::best_params)
      .def_readonly("best_score", &TrainResult::best_score)
      .def_readonly("best_step", &TrainResult::best_step)
      .def_readonly("initial_score", &TrainResult::initial_score)
      .def_property_readonly("steps", [](const TrainResult& r) { return r.run.step; })
      .def_property_readonly("history", [](const TrainResult& r) {
        py::list out;
        for (const HistoryEntry& e : r.run.history) out.append(history_to_dict(e));
        return out;
      });

  py::class_<PyModel>(m, "Model")
      .def_static("neural", &make_neural_model, py::arg("params"),
                  "Learned-network model from a parameter block")
      .def_static("hand", &make_hand_model, py::arg("hov"),
                  "Hand-written analytic model (drag dropped, noise inflated)")
      .def_static("truth", &make_true_model, py::arg("hov"), "Simulator equations as a model")
      .def_readonly("analytic", &PyModel::analytic)
      .def(
          "accel_dist",
          [](const PyModel& self, const Eigen::MatrixXd& states, const Eigen::MatrixXd& u) {
            const Eigen::MatrixXd inputs = inputs_from_states(states, u);
            Eigen::MatrixXd mean(inputs.rows(), 3), std(inputs.rows(), 3);
            self.ref().accel_dist(inputs, mean, std);
            return py::make_tuple(mean, std);
          },
          py::arg("states"), py::arg("controls"),
          "Gaussian body-frame acceleration (mean, std) for packed states (N x 6) "
          "and per-row controls (N x 2)")
      .def(
          "step",
          [](const PyModel& self, const Eigen::MatrixXd& states, const Eigen::MatrixXd& u,
             const Eigen::MatrixXd& noise, double dt) {
            Eigen::MatrixXd next(states.rows(), states.cols());
            step_states_batch(self.ref(), states, u, noise, dt, next);
            return next;
          },
          py::arg("states"), py::arg("controls"), py::arg("noise"), py::arg("dt"),
          "Semi-implicit Euler step; `noise` is N x 3 standard normal (zeros = mean rollout)")
      .def(
          "filter",
          [](const PyModel& self, const ObservationSequence& obs, const Eigen::MatrixXd& controls,
             const LandmarkMap& map, double pos_halfwidth, double dt, int n_particles,
             double w_obs, std::uint64_t seed) {
            FilterConfig fc;
            fc.n_particles = n_particles;
            fc.w_obs = w_obs;
            fc.rng_seed = seed;
            const FilterResult res =
                filter_forward(self.ref(), obs, matrix_to_controls(controls), map,
                               InitialStateDist{pos_halfwidth}, dt, fc);
            py::dict out;
            out["log_marginal"] = res.log_marginal;
            out["means"] = posterior_means(res, {kStateTheta});
            Eigen::VectorXd ess(static_cast<Eigen::Index>(res.ess.size()));
            for (std::size_t i = 0; i < res.ess.size(); ++i)
              ess(static_cast<Eigen::Index>(i)) = res.ess[i];
            out["ess"] = ess;
            return out;
          },
          py::arg("obs"), py::arg("controls"), py::arg("map"), py::arg("pos_halfwidth"),
          py::arg("dt"), py::arg("n_particles") = 2000, py::arg("w_obs") = 1.0,
          py::arg("seed") = 0,
          "Particle filter over one observed trajectory; returns posterior mean "
          "states, per-step ESS and the log-marginal");

  m.def("generate_dataset", &generate_dataset, py::arg("seed"), py::arg("spec"), py::arg("hov"),
        "Simulate train/valid/test trajectories under the scripted thrust policy");
  m.def("place_landmarks", &place_landmarks, py::arg("seed"), py::arg("count"),
        py::arg("halfwidth"));
  m.def(
      "observe_trajectory",
      [](const Trajectory& traj, const LandmarkMap& map, double sigma, int stride,
         std::uint64_t seed) {
        RngStream rng(seed, rng_salt::kObservation);
        return observe_trajectory(traj, map, sigma, stride, rng);
      },
      py::arg("trajectory"), py::arg("map"), py::arg("sigma"), py::arg("stride") = 1,
      py::arg("seed") = 0, "Noisy bearings at every stride-th step");
  m.def(
      "init_params",
      [](std::uint64_t seed, const std::vector<double>& sigma0) {
        return init_params(seed, triple_to_accel(sigma0, "sigma0"));
      },
      py::arg("seed"), py::arg("sigma0") = std::vector<double>{0.5, 0.5, 0.25},
      "Freshly initialized network parameters (zero mean heads, He-scaled hidden layer)");
  m.def("make_training_data", &make_training_data, py::arg("dataset"), py::arg("map"),
        py::arg("sigma_bearing"), py::arg("stride"), py::arg("obs_seed"), py::arg("spec"),
        "Attach observations to simulated trajectories and drop the states");
  m.def(
      "train",
      [](const TrainingData& data, const TrainConfig& cfg) { return train(data, cfg); },
      py::arg("data"), py::arg("config"),
      "Monte Carlo EM: particle-filter E step, single ADAM ascent M step",
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "eval_forward_prediction",
      [](const PyModel& model, const std::vector<Trajectory>& test, int horizon, double dt) {
        const FwdPredMetrics f = eval_forward_prediction(model.ref(), test, horizon, dt);
        py::dict out;
        out["loc_rmse"] = f.loc_rmse;
        out["ang_rmse"] = f.ang_rmse;
        out["per_traj_loc"] = f.per_traj_loc;
        out["per_traj_ang"] = f.per_traj_ang;
        return out;
      },
      py::arg("model"), py::arg("test"), py::arg("horizon"), py::arg("dt"));
  m.def(
      "eval_state_estimation",
      [](const PyModel& model, const std::vector<Trajectory>& test, const LandmarkMap& map,
         int n_particles, int stride, double sigma_bearing, std::uint64_t seed,
         double pos_halfwidth) {
        EvalConfig ec;
        ec.n_particles = n_particles;
        ec.stride = stride;
        ec.sigma_bearing = sigma_bearing;
        ec.seed = seed;
        ec.q_x1 = InitialStateDist{pos_halfwidth};
        const StateEstMetrics s = eval_state_estimation(model.ref(), test, map, ec);
        py::dict out;
        out["loc_rmse"] = s.loc_rmse;
        out["ang_rmse"] = s.ang_rmse;
        out["per_traj_loc"] = s.per_traj_loc;
        out["per_traj_ang"] = s.per_traj_ang;
        out["flagged"] = s.flagged;
        return out;
      },
      py::arg("model"), py::arg("test"), py::arg("map"), py::arg("n_particles") = 2000,
      py::arg("stride") = 10, py::arg("sigma_bearing") = 0.0873, py::arg("seed") = 0,
      py::arg("pos_halfwidth") = 1.0);
  m.def(
      "save_checkpoint",
      [](const std::string& path, const DynamicsParams& params, const std::string& method,
         std::uint64_t seed) {
        Checkpoint ckpt;
        ckpt.method = method;
        ckpt.seed = seed;
        ckpt.params = params;
        save_checkpoint(path, ckpt);
      },
      py::arg("path"), py::arg("params"), py::arg("method") = "steady", py::arg("seed") = 0,
      "Write a parameter checkpoint (bit-exact round trip)");
  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        const Checkpoint ckpt = load_checkpoint(path);
        py::dict out;
        out["method"] = ckpt.method;
        out["analytic"] = ckpt.analytic;
        out["seed"] = ckpt.seed;
        out["step"] = ckpt.step;
        out["params"] = ckpt.eval_params();
        return out;
      },
      py::arg("path"));
}
