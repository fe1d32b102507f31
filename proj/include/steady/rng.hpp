#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace steady {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// A seeded random stream. Streams are derived from (seed, salts...) so that
// every consumer (per trajectory, per filter step, ...) owns its own
// deterministic sequence regardless of how other streams are consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}
  RngStream(std::uint64_t seed, std::uint64_t salt)
      : engine_(mix64(mix64(seed) ^ salt)) {}
  RngStream(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b)
      : engine_(mix64(mix64(mix64(seed) ^ salt_a) ^ salt_b)) {}

  double normal() { return normal_(engine_); }
  double normal(double mean, double std) { return mean + std * normal_(engine_); }
  // uniform in [0, 1)
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  template <typename Derived>
  void fill_normal(Eigen::DenseBase<Derived>& out) {
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal_(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Derives a plain sub-seed the same way RngStream combines its salts; used
// where a consumer wants a uint64 seed rather than a stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt, std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ salt) ^ index);
}

// Salt constants for deriving sub-streams; arbitrary distinct values.
namespace rng_salt {
constexpr std::uint64_t kDatasetInit = 0x11;
constexpr std::uint64_t kDatasetControls = 0x12;
constexpr std::uint64_t kDatasetNoise = 0x13;
constexpr std::uint64_t kLandmarks = 0x21;
constexpr std::uint64_t kObservation = 0x22;
constexpr std::uint64_t kFilterInit = 0x31;
constexpr std::uint64_t kFilterStep = 0x32;
constexpr std::uint64_t kFilterResample = 0x33;
constexpr std::uint64_t kFilterTraceback = 0x34;
constexpr std::uint64_t kTrainStep = 0x41;
constexpr std::uint64_t kValidation = 0x42;
constexpr std::uint64_t kParamInit = 0x43;
constexpr std::uint64_t kSupervisedFit = 0x44;
constexpr std::uint64_t kBaselineFilter = 0x45;
constexpr std::uint64_t kEvaluation = 0x51;
constexpr std::uint64_t kEvalFilter = 0x52;
constexpr std::uint64_t kSweep = 0x61;
}  // namespace rng_salt

}  // namespace steady
