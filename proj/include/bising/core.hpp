/**
 * @file core.hpp
 * @brief Shared scalar types, error types, the seeded generator and small helpers.
 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace bising {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;
using SpMatC = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

constexpr double kPi = 3.14159265358979323846;
constexpr cplx kI{0.0, 1.0};

/** @brief Invalid configuration, unknown identifiers, mismatched inputs. */
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** @brief A resolution, cutoff or headroom requirement is not met. */
struct ResolutionError : std::runtime_error {
  ResolutionError(const std::string& what, double required)
      : std::runtime_error(what + " (required minimum: " + std::to_string(required) + ")"),
        required_minimum(required) {}
  double required_minimum;
};

/** @brief A difference operator would read outside the exact band. */
struct MarginError : std::runtime_error {
  MarginError(const std::string& what, double required)
      : std::runtime_error(what + " (required cutoff headroom: " + std::to_string(required) + ")"),
        required_headroom(required) {}
  double required_headroom;
};

/**
 * @brief xorshift64* generator.
 *
 * State update: x ^= x >> 12; x ^= x << 25; x ^= x >> 27; output x * 2685821657736338717.
 * Seeds are mixed once with splitmix64 (constants 0x9E3779B97F4A7C15,
 * 0xBF58476D1CE4E5B9, 0x94D049BB133111EB) so that small seeds give unrelated streams.
 */
class XorShift {
 public:
  explicit XorShift(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    state_ = z ? z : 0x2545F4914F6CDD1DULL;
  }
  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ULL;
  }
  /** @brief Uniform in [0,1). */
  double uniform() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
  /** @brief Uniform in [lo,hi). */
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /** @brief Standard normal via Box-Muller (one value per call). */
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  cplx complex_normal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

 private:
  std::uint64_t state_;
};

/** @brief Worker cap from BISING_THREADS (default 1 when unset or invalid). */
inline int worker_count() {
  const char* v = std::getenv("BISING_THREADS");
  if (!v) return 1;
  int n = std::atoi(v);
  return n > 0 ? n : 1;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

/** @brief Largest singular value by power iteration on M^*M, all-ones normalized start. */
inline double op_norm(const MatC& m, double tol = 1e-10, int max_iter = 500) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  VecC v = VecC::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    VecC w = m.adjoint() * (m * v);
    double nw = w.norm();
    if (nw == 0.0) {
      // start vector in the null space; fall back to a dense decomposition
      return Eigen::JacobiSVD<MatC>(m).singularValues()(0);
    }
    double est = std::sqrt(nw);
    v = w / nw;
    if (std::abs(est - prev) <= tol * std::max(1.0, est)) return est;
    prev = est;
  }
  return Eigen::JacobiSVD<MatC>(m).singularValues()(0);
}

/** @brief Least-squares slope and intercept of y against x. */
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = static_cast<int>(x.size());
  if (x.size() < 2) return f;
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace bising
