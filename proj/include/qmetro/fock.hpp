#pragma once

// Exact truncated Fock-space states and operations for one or two bosonic modes.
//
// Two-mode amplitudes are stored flattened with index na * (cutoff + 1) + nb.
// Every operation that can push weight past the cutoff measures that weight
// and either records it in the state's truncation tolerance or throws
// TruncationError when it exceeds the configured bound.

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace qmetro::fock {

using Complex = std::complex<double>;

inline constexpr double kDefaultTruncationTol = 1e-10;
// Constructors and two-mode operations refuse states whose norm deficit exceeds this.
inline constexpr double kMaxNormDeficit = 1e-6;
// apply_squeeze refuses to lose more than this much weight above the cutoff.
inline constexpr double kSqueezeHeadroom = 1e-8;

class PureState {
 public:
  PureState(int modes, int cutoff, Eigen::VectorXcd amplitudes,
            double truncation_tol = kDefaultTruncationTol);

  // Measures the norm deficit of truncated amplitudes, throws TruncationError
  // above kMaxNormDeficit, and records max(kDefaultTruncationTol, deficit).
  static PureState from_truncated(int modes, int cutoff, Eigen::VectorXcd amplitudes,
                                  double inherited_tol = 0.0);

  int modes() const noexcept { return modes_; }
  int cutoff() const noexcept { return cutoff_; }
  int levels() const noexcept { return cutoff_ + 1; }
  Eigen::Index dim() const noexcept { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  double truncation_tol() const noexcept { return truncation_tol_; }

  Complex amplitude(int n) const;
  Complex amplitude(int na, int nb) const;
  double norm_squared() const { return amplitudes_.squaredNorm(); }
  double norm_deficit() const { return 1.0 - norm_squared(); }

 private:
  int modes_;
  int cutoff_;
  Eigen::VectorXcd amplitudes_;
  double truncation_tol_;
};

class MixedState {
 public:
  MixedState(int modes, int cutoff, Eigen::MatrixXcd matrix,
             double truncation_tol = kDefaultTruncationTol);

  int modes() const noexcept { return modes_; }
  int cutoff() const noexcept { return cutoff_; }
  int levels() const noexcept { return cutoff_ + 1; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  double truncation_tol() const noexcept { return truncation_tol_; }

  double trace() const { return matrix_.trace().real(); }
  double trace_deficit() const { return 1.0 - trace(); }
  double min_eigenvalue() const;

 private:
  int modes_;
  int cutoff_;
  Eigen::MatrixXcd matrix_;
  double truncation_tol_;
};

enum class PhaseConvention {
  kSingleMode,    // exp(i phi n)
  kRelativeHalf,  // exp(i phi (na - nb) / 2)
};

enum class Observable {
  kN,        // a^dag a of the selected mode
  kN2,       // (a^dag a)^2
  kCrossNN,  // na nb (two-mode only)
  kA2,       // a^2
  kAdAdAA,   // a^dag a^dag a a
};

struct ObservableMoments {
  int modes = 1;
  std::array<double, 2> mean_n{};
  std::array<double, 2> mean_n2{};
  std::array<Complex, 2> mean_a2{};
  std::array<double, 2> variance_n{};
  double cross_nn = 0.0;  // <na nb>; zero for one mode
  double covariance() const { return cross_nn - mean_n[0] * mean_n[1]; }
};

// Constructors
PureState vacuum(int modes, int cutoff);
PureState make_fock(int n, int cutoff);
PureState make_fock(int na, int nb, int cutoff);
PureState make_coherent(Complex alpha, int cutoff);
PureState make_squeezed_vacuum(double r, double phi, int cutoff);
PureState make_noon(int n, int cutoff);
PureState make_twin_fock(int n_half, int cutoff);
PureState make_ecs(Complex alpha, int cutoff);
PureState make_tmsv(double r, int cutoff);
// |a> (x) |b>; both single-mode with the same cutoff.
PureState tensor(const PureState& a, const PureState& b);
MixedState to_density(const PureState& state);

// Unitaries
PureState apply_beam_splitter(const PureState& state);
PureState apply_phase(const PureState& state, double phi, PhaseConvention convention);
MixedState apply_phase(const MixedState& state, double phi, PhaseConvention convention);
// S(r) = exp(r/2 (a^2 - a^dag^2)); negative r gives S^dag(|r|).
PureState apply_squeeze(const PureState& state, double r);
MixedState apply_squeeze(const MixedState& state, double r);

// Amplitude damping with transmissivity eta on the given mode.
MixedState apply_loss(const PureState& state, double eta, int mode = 0);
MixedState apply_loss(const MixedState& state, double eta, int mode = 0);

// Expectation values are normalized by the truncated norm (trace).
Complex expectation(const PureState& state, Observable observable, int mode = 0);
Complex expectation(const MixedState& state, Observable observable, int mode = 0);
ObservableMoments observable_moments(const PureState& state);
ObservableMoments observable_moments(const MixedState& state);

PureState project_total_photon(const PureState& state, int total);

// Column vector for one mode, (cutoff+1) x (cutoff+1) matrix [na, nb] for two.
Eigen::MatrixXd photon_number_distribution(const PureState& state);
Eigen::MatrixXd photon_number_distribution(const MixedState& state);

double fidelity(const PureState& a, const PureState& b);
double fidelity(const MixedState& rho, const PureState& psi);

}  // namespace qmetro::fock
