#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "steady/observation.hpp"
#include "steady/rng.hpp"

using namespace steady;

namespace {

constexpr double kSigmaDefault = 0.0873;  // 5 degrees in radians

LandmarkMap square_map() {
  return LandmarkMap{{{5.0, 5.0}, {-5.0, 5.0}, {-5.0, -5.0}, {5.0, -5.0}}};
}

Observation exact_observation(const Pose& pose, const LandmarkMap& map) {
  Observation obs;
  for (const Vec2& l : map.positions) obs.bearings.push_back(bearing(pose, l));
  return obs;
}

Trajectory constant_velocity_trajectory(int T, double dt) {
  Trajectory traj;
  traj.dt = dt;
  State s;
  s.vx = 0.3;
  s.vy = 0.1;
  for (int t = 0; t < T; ++t) {
    traj.states.push_back(s);
    s.pose.x += s.vx * dt;
    s.pose.y += s.vy * dt;
  }
  traj.controls.assign(T - 1, Control{0.5, 0.5});
  return traj;
}

}  // namespace

TEST_SUITE("observation") {

TEST_CASE("bearing matches the analytic angles") {
  CHECK(bearing({0, 0, 0}, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(bearing({0, 0, 0}, {0.0, 1.0}) == doctest::Approx(kPi / 2.0));
  CHECK(bearing({0, 0, kPi / 2.0}, {0.0, 1.0}) == doctest::Approx(0.0));
  // Result is wrapped into (-pi, pi].
  CHECK(bearing({0, 0, -3.0}, {-1.0, -0.1}) > -kPi);
  CHECK(bearing({0, 0, -3.0}, {-1.0, -0.1}) <= kPi);
}

TEST_CASE("bearing at the landmark itself is an error") {
  CHECK_THROWS_AS(bearing({2.0, 3.0, 0.1}, {2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("sample_observation: empirical std matches sigma within 2 percent") {
  const LandmarkMap map = square_map();
  const Pose pose{0.5, -0.3, 0.7};
  const Observation clean = exact_observation(pose, map);
  RngStream rng(5, rng_salt::kObservation);
  const int n = 100000;
  double sumsq = 0.0;
  long count = 0;
  for (int i = 0; i < n; ++i) {
    const Observation obs = sample_observation(pose, map, kSigmaDefault, rng);
    REQUIRE(obs.bearings.size() == map.positions.size());
    for (std::size_t l = 0; l < obs.bearings.size(); ++l) {
      const double r = angle_diff(obs.bearings[l], clean.bearings[l]);
      sumsq += r * r;
      ++count;
    }
  }
  const double emp = std::sqrt(sumsq / count);
  CHECK(emp == doctest::Approx(kSigmaDefault).epsilon(0.02));
}

TEST_CASE("sampled bearings are wrapped") {
  const LandmarkMap map = square_map();
  RngStream rng(6, rng_salt::kObservation);
  for (int i = 0; i < 2000; ++i) {
    const Observation obs = sample_observation({0, 0, 3.1}, map, 1.0, rng);
    for (double b : obs.bearings) {
      CHECK(b > -kPi);
      CHECK(b <= kPi);
    }
  }
}

TEST_CASE("log_likelihood at zero residual matches the closed form") {
  const LandmarkMap map = square_map();
  const Pose pose{1.0, 0.5, -0.4};
  const Observation obs = exact_observation(pose, map);
  // Independent evaluation of the Gaussian log-density at zero residual.
  const double expect = 4.0 * (-0.5 * std::log(2.0 * kPi) - std::log(kSigmaDefault));
  CHECK(log_likelihood(obs, pose, map, kSigmaDefault) ==
        doctest::Approx(expect).epsilon(1e-12));
  // Numeric value of that expression, for the record: about 6.078.
  CHECK(expect == doctest::Approx(6.0778676).epsilon(1e-6));
}

TEST_CASE("one residual of exactly sigma costs 0.5") {
  const LandmarkMap map = square_map();
  const Pose pose{1.0, 0.5, -0.4};
  Observation obs = exact_observation(pose, map);
  const double base = log_likelihood(obs, pose, map, kSigmaDefault);
  obs.bearings[2] = wrap_angle(obs.bearings[2] + kSigmaDefault);
  CHECK(log_likelihood(obs, pose, map, kSigmaDefault) ==
        doctest::Approx(base - 0.5).epsilon(1e-12));
}

TEST_CASE("log_likelihood is invariant to adding 2*pi to a bearing") {
  const LandmarkMap map = square_map();
  const Pose pose{-0.2, 0.8, 2.9};
  RngStream rng(8, rng_salt::kObservation);
  Observation obs = sample_observation(pose, map, kSigmaDefault, rng);
  const double base = log_likelihood(obs, pose, map, kSigmaDefault);
  obs.bearings[0] += 2.0 * kPi;
  obs.bearings[3] -= 2.0 * kPi;
  CHECK(log_likelihood(obs, pose, map, kSigmaDefault) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("noiseless observations peak at the true pose") {
  const LandmarkMap map = square_map();
  const Pose pose{0.3, -0.6, 1.1};
  const Observation obs = exact_observation(pose, map);
  const double best = log_likelihood(obs, pose, map, kSigmaDefault);
  for (double dx : {-0.05, 0.0, 0.05})
    for (double dy : {-0.05, 0.0, 0.05})
      for (double dth : {-0.05, 0.0, 0.05}) {
        if (dx == 0.0 && dy == 0.0 && dth == 0.0) continue;
        const Pose other{pose.x + dx, pose.y + dy, wrap_angle(pose.theta + dth)};
        CHECK(log_likelihood(obs, other, map, kSigmaDefault) < best);
      }
}

TEST_CASE("expected log-likelihood at the generating pose matches theory") {
  // E[log q(y|pose)] = L * (-0.5 log(2 pi sigma^2) - 0.5).
  const LandmarkMap map = square_map();
  const Pose pose{0.0, 1.0, 0.4};
  RngStream rng(9, rng_salt::kObservation);
  const int n = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Observation obs = sample_observation(pose, map, kSigmaDefault, rng);
    const double ll = log_likelihood(obs, pose, map, kSigmaDefault);
    sum += ll;
    sumsq += ll * ll;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  const double L = static_cast<double>(map.positions.size());
  const double expect = L * (-0.5 * std::log(2.0 * kPi * kSigmaDefault * kSigmaDefault) - 0.5);
  CHECK(std::abs(mean - expect) <= 3.0 * se + 1e-9);
}

TEST_CASE("batched log-likelihood adds the scalar values into the output") {
  const LandmarkMap map = square_map();
  RngStream rng(10, rng_salt::kObservation);
  const Observation obs = sample_observation({0.1, 0.2, 0.3}, map, kSigmaDefault, rng);

  const int n = 50;
  Eigen::MatrixXd states(n, 6);
  for (int i = 0; i < n; ++i) {
    states(i, 0) = rng.uniform(-2.0, 2.0);
    states(i, 1) = rng.uniform(-2.0, 2.0);
    states(i, 2) = rng.uniform(-kPi, kPi);
    states(i, 3) = rng.normal();
    states(i, 4) = rng.normal();
    states(i, 5) = rng.normal();
  }
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, 7.5);  // pre-filled: call must add
  log_likelihood_batch(obs, states, map, kSigmaDefault, out);
  for (int i = 0; i < n; ++i) {
    const Pose pose{states(i, 0), states(i, 1), states(i, 2)};
    CHECK(out(i) == doctest::Approx(7.5 + log_likelihood(obs, pose, map, kSigmaDefault))
                        .epsilon(1e-12));
  }
}

TEST_CASE("observe_trajectory stride patterns") {
  const LandmarkMap map = square_map();
  const Trajectory traj = constant_velocity_trajectory(101, 0.1);
  RngStream rng(12, rng_salt::kObservation);

  const ObservationSequence dense = observe_trajectory(traj, map, kSigmaDefault, 1, rng);
  REQUIRE(dense.steps.size() == 101);
  int present = 0;
  for (const auto& s : dense.steps) present += s.has_value();
  CHECK(present == 101);
  CHECK(dense.sigma_bearing == doctest::Approx(kSigmaDefault));

  const ObservationSequence sparse = observe_trajectory(traj, map, kSigmaDefault, 10, rng);
  present = 0;
  for (std::size_t t = 0; t < sparse.steps.size(); ++t) {
    present += sparse.steps[t].has_value();
    CHECK(sparse.steps[t].has_value() == (t % 10 == 0));
  }
  CHECK(present == 11);

  const ObservationSequence first_only =
      observe_trajectory(traj, map, kSigmaDefault, 101, rng);
  present = 0;
  for (const auto& s : first_only.steps) present += s.has_value();
  CHECK(present == 1);
  CHECK(first_only.steps[0].has_value());
}

TEST_CASE("place_landmarks is deterministic and stays in the square") {
  const LandmarkMap a = place_landmarks(77, 4, 10.0);
  const LandmarkMap b = place_landmarks(77, 4, 10.0);
  const LandmarkMap c = place_landmarks(78, 4, 10.0);
  REQUIRE(a.positions.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
    CHECK(std::abs(a.positions[i].x) <= 10.0);
    CHECK(std::abs(a.positions[i].y) <= 10.0);
  }
  bool differs = false;
  for (std::size_t i = 0; i < 4; ++i) differs = differs || a.positions[i].x != c.positions[i].x;
  CHECK(differs);
}

}  // TEST_SUITE
