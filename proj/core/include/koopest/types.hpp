#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace koopest {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension_mismatch", what) {}
};

class IntegrationDivergence : public Error {
 public:
  IntegrationDivergence(const std::string& what, std::size_t step)
      : Error("integration_divergence", what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class RankDeficiency : public Error {
 public:
  explicit RankDeficiency(const std::string& what) : Error("rank_deficiency", what) {}
};

class InversionError : public Error {
 public:
  explicit InversionError(const std::string& what) : Error("inversion_error", what) {}
};

class TrainingDivergence : public Error {
 public:
  explicit TrainingDivergence(const std::string& what) : Error("training_divergence", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io_error", what) {}
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline void require_dims(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(want) +
                            ", got " + std::to_string(got));
  }
}

// splitmix64 step; used to derive independent child seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace koopest
