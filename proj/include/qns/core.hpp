#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qns {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency (rad/s) from a frequency in MHz.
inline constexpr double mhz(double f) { return two_pi * 1e6 * f; }
inline constexpr double to_mhz(double omega) { return omega / (two_pi * 1e6); }

class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class GridError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative method gives up; keeps whatever it had.
class NonConvergenceError : public std::runtime_error {
public:
  NonConvergenceError(const std::string& what, Vec best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const Vec& best_iterate() const noexcept { return best_; }

private:
  Vec best_;
};

class UndefinedRatioError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ModelTypeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// N constant segments of length dt; samples are Rabi rates in rad/s.
struct PiecewiseConstantWaveform {
  Vec samples;
  double dt = 0.0;

  PiecewiseConstantWaveform() = default;
  PiecewiseConstantWaveform(Vec s, double step);

  Index size() const noexcept { return samples.size(); }
  double total_time() const noexcept { return static_cast<double>(samples.size()) * dt; }
  double net_rotation() const { return dt * samples.sum(); }
  bool identity_gate() const;
};

} // namespace qns
