// Copyright 2026 The eee-dynamics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EEE_COMMON_HPP_
#define EEE_COMMON_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eee {

// Dense row-stochastic kernels and general matrices share one storage type.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr double kStationaryMassFloor = 1e-12;
inline constexpr std::size_t kMaxJointStates = 1'000'000;

enum class ErrorKind {
  kDomain,         // argument outside its mathematical domain
  kStructural,     // dimension or shape mismatch
  kConfiguration,  // missing optional inputs an operation needs
  kChain,          // ergodicity / stationary-mass failures
  kIo,             // unreadable or malformed files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::kDomain, what) {}
};

class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what)
      : Error(ErrorKind::kStructural, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorKind::kConfiguration, what) {}
};

// Raised when a chain cannot be solved or a conditional is undefined.
// `residual` is the best stationary residual reached, or the offending
// mass for vanishing-mass failures.
class ChainError : public Error {
 public:
  ChainError(const std::string& what, double residual)
      : Error(ErrorKind::kChain, what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Dense three-axis table, row-major with the last axis contiguous. Used for
// per-agent Q_i(z,x,a), sigma_i(z,x)[a] and mu_i(z,x)[s].
class Table3 {
 public:
  Table3() = default;
  Table3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2),
        data_(static_cast<std::size_t>(d0) * d1 * d2, fill) {
    if (d0 < 0 || d1 < 0 || d2 < 0) {
      throw StructuralError("Table3: negative dimension");
    }
  }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j, int k) { return data_[Offset(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[Offset(i, j, k)]; }

  // The contiguous last-axis slice at (i, j).
  std::span<double> slice(int i, int j) {
    return {data_.data() + Offset(i, j, 0), static_cast<std::size_t>(d2_)};
  }
  std::span<const double> slice(int i, int j) const {
    return {data_.data() + Offset(i, j, 0), static_cast<std::size_t>(d2_)};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool SameShape(const Table3& other) const {
    return d0_ == other.d0_ && d1_ == other.d1_ && d2_ == other.d2_;
  }

  bool operator==(const Table3& other) const = default;

 private:
  std::size_t Offset(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * d1_ + j) * d2_ + k;
  }

  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<double> data_;
};

// Max absolute entrywise difference; throws StructuralError on shape mismatch.
double MaxAbsDiff(const Table3& a, const Table3& b);

// Row-sum (induced infinity) norm: max_i sum_j |A_ij|.
double RowSumNorm(const Matrix& m);

}  // namespace eee

#endif  // EEE_COMMON_HPP_
