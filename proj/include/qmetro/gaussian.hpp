#pragma once

// Zero-mean single-mode Gaussian second moments (<a^2>, <a^dag^2>, <a^dag a>)
// propagated through squeezing, phase rotation and loss as affine maps, plus
// the closed forms of the squeeze / phase / anti-squeeze protocol.
//
// Phase convention: the rotation is U(phi) = exp(i phi a^dag a) acting on the
// state, so <a^2> picks up e^{2 i phi}. This matches the Fock engine.

#include <complex>

#include <Eigen/Dense>

namespace qmetro::gaussian {

using Complex = std::complex<double>;

struct MomentVector {
  Complex m_aa{0.0, 0.0};    // <a^2>
  Complex m_adad{0.0, 0.0};  // <a^dag^2>
  double m_n = 0.0;          // <a^dag a>

  static MomentVector vacuum() { return {}; }
  static MomentVector from_vector(const Eigen::Vector3cd& v);
  Eigen::Vector3cd as_vector() const { return {m_aa, m_adad, Complex{m_n, 0.0}}; }

  // m_n (m_n + 1) - |m_aa|^2; nonnegative for physical zero-mean Gaussian states.
  double uncertainty_margin() const { return m_n * (m_n + 1.0) - std::norm(m_aa); }
  bool is_physical() const;
};

class AffineMap {
 public:
  AffineMap() : matrix_(Eigen::Matrix3cd::Identity()), translation_(Eigen::Vector3cd::Zero()) {}
  AffineMap(Eigen::Matrix3cd matrix, Eigen::Vector3cd translation)
      : matrix_(std::move(matrix)), translation_(std::move(translation)) {}

  const Eigen::Matrix3cd& matrix() const { return matrix_; }
  const Eigen::Vector3cd& translation() const { return translation_; }

  MomentVector apply(const MomentVector& v) const;
  // The map "this, then next".
  AffineMap then(const AffineMap& next) const;
  // Rows 0 and 1 are complex-conjugate mirrors and row 2 maps conjugate
  // pairs to reals.
  bool preserves_conjugate_pairs(double tol = 1e-12) const;

 private:
  Eigen::Matrix3cd matrix_;
  Eigen::Vector3cd translation_;
};

// S(r) = exp(r/2 (a^2 - a^dag^2)); negative r is the anti-squeeze.
AffineMap squeeze_map(double r);
AffineMap rotation_map(double phi);
AffineMap loss_map(double eta);

// n = sinh^2 r
double mean_photons(double r);
double squeeze_parameter(double n_bar);

// Moments after squeeze(r), phase(phi), loss(eta1), anti-squeeze(r), loss(eta2)
// starting from vacuum, by composing the affine maps.
MomentVector protocol_moments(double r, double phi, double eta1, double eta2);
// Same quantity from the closed-form expressions (eta1 = eta2 = eta).
MomentVector protocol_moments_closed_form(double n_bar, double phi, double eta);

// <a^dag a> of the output, eta1 = eta2 = eta.
double signal(double n_bar, double phi, double eta);
// dS/dphi, analytic.
double signal_slope(double n_bar, double phi, double eta);

// Var(a^dag a) of a zero-mean Gaussian state: m_n^2 + m_n + |m_aa|^2.
double variance_number(const MomentVector& moments);

// Lossless closed forms.
double lossless_signal(double n_bar, double phi);
double lossless_variance(double n_bar, double phi);
double lossless_phase_error(double n_bar);  // phi -> 0 limit, 1/sqrt(8n(n+1))

struct PhaseError {
  double value = 0.0;
  bool analytic_limit = false;  // phi = 0 at eta = 1: the limit value is returned
};

// Error-propagation phase error for eta1 = eta2 = eta. Evaluated in the
// sin^2(phi) form of the closed expression, which has no cancellation.
PhaseError phase_error(double n_bar, double phi, double eta);
// Delta^2 phi transcribed term by term in cos(2 phi), cos(4 phi), csc^2(2 phi).
// Loses precision to cancellation for large n_bar; kept for cross-checking.
double phase_error_sq_literal(double n_bar, double phi, double eta);

// (1 / sqrt(4 n)) / phase_error
double snl_ratio(double n_bar, double phi, double eta);

}  // namespace qmetro::gaussian
