#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace opcert {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<Complex>;
using SpMatR = Eigen::SparseMatrix<double>;

// Equality gate for "exact" identity checks at double precision.
inline constexpr double kExactTol = 1e-12;

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iteration budget exhausted; carries the last residual for diagnostics.
struct NonConvergenceError : NumericalError {
  NonConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual(residual) {}
  double residual;
};

// A classification that could not be decided either way is an error,
// never a silent guess.
struct InconclusiveError : NumericalError {
  using NumericalError::NumericalError;
};

// Deterministic 64-bit mix for deriving per-task seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Chunked deterministic parallel loop: results depend only on indices,
// never on scheduling.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  jobs = std::min<int>(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([=]() {
      for (int i = t; i < n; i += jobs) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace opcert
