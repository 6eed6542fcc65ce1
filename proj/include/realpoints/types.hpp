#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace realpoints {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline bool is_finite(const Complex& c) {
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

inline bool is_finite(const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!is_finite(v[i])) return false;
  return true;
}

/// splitmix64 step, used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded RNG wrapper; every random draw in the library goes through one of
/// these so runs are reproducible from a single seed.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(gen);
  }

  /// Complex number of unit modulus with uniform phase.
  Complex unit_complex() {
    double th = uniform(0.0, 2.0 * M_PI);
    return Complex(std::cos(th), std::sin(th));
  }

  /// Vector whose entries all have modulus 1/sqrt(n) and uniform phases,
  /// so the vector itself has unit norm.
  CVec unit_complex_vector(int n) {
    CVec v(n);
    double s = 1.0 / std::sqrt(double(n));
    for (int i = 0; i < n; ++i) v[i] = s * unit_complex();
    return v;
  }

  /// Entries uniform in [-1,1], then normalized to unit norm.
  RVec unit_real_vector(int n) {
    RVec v(n);
    double nrm = 0.0;
    do {
      for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
      nrm = v.norm();
    } while (nrm < 1e-12);
    return v / nrm;
  }
};

/// Smallest singular value after scaling each row to unit 2-norm.
/// Zero rows are left alone (they force a zero singular value anyway).
inline double smin_row_scaled(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  CMat s = m;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double r = s.row(i).norm();
    if (r > 0) s.row(i) /= r;
  }
  Eigen::JacobiSVD<CMat> svd(s);
  return svd.singularValues().minCoeff();
}

/// Smallest singular value after scaling each column to unit 2-norm.
inline double smin_col_scaled(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  CMat s = m;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    double c = s.col(j).norm();
    if (c > 0) s.col(j) /= c;
  }
  Eigen::JacobiSVD<CMat> svd(s);
  return svd.singularValues().minCoeff();
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace realpoints
