#include "qmetro/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmetro/error.hpp"

namespace qmetro::gaussian {
namespace {

void check_eta(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + format_real(eta));
  }
}

void check_n_bar(double n_bar) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
    throw DomainError("mean photon number must be nonnegative and finite");
  }
}

}  // namespace

MomentVector MomentVector::from_vector(const Eigen::Vector3cd& v) {
  return MomentVector{v[0], v[1], v[2].real()};
}

bool MomentVector::is_physical() const {
  const double scale = std::max(1.0, m_n * m_n);
  return m_n >= -1e-10 && uncertainty_margin() >= -1e-10 * scale &&
         std::abs(m_adad - std::conj(m_aa)) <= 1e-12 * std::max(1.0, std::abs(m_aa));
}

MomentVector AffineMap::apply(const MomentVector& v) const {
  return MomentVector::from_vector(matrix_ * v.as_vector() + translation_);
}

AffineMap AffineMap::then(const AffineMap& next) const {
  return AffineMap(next.matrix_ * matrix_, next.matrix_ * translation_ + next.translation_);
}

bool AffineMap::preserves_conjugate_pairs(double tol) const {
  const auto& m = matrix_;
  const auto& f = translation_;
  auto close = [tol](Complex a, Complex b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); };
  return close(m(1, 0), std::conj(m(0, 1))) && close(m(1, 1), std::conj(m(0, 0))) &&
         close(m(1, 2), std::conj(m(0, 2))) && close(m(2, 0), std::conj(m(2, 1))) &&
         std::abs(m(2, 2).imag()) <= tol && close(f[1], std::conj(f[0])) &&
         std::abs(f[2].imag()) <= tol;
}

AffineMap squeeze_map(double r) {
  // a -> a cosh r - a^dag sinh r
  const double c = std::cosh(r);
  const double s = std::sinh(r);
  const double s2 = std::sinh(2.0 * r);
  const double c2 = std::cosh(2.0 * r);
  Eigen::Matrix3cd m;
  m << c * c, s * s, -s2,
       s * s, c * c, -s2,
       -c * s, -c * s, c2;
  Eigen::Vector3cd e(-c * s, -c * s, s * s);
  return AffineMap(m, e);
}

AffineMap rotation_map(double phi) {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = std::polar(1.0, 2.0 * phi);
  m(1, 1) = std::polar(1.0, -2.0 * phi);
  m(2, 2) = 1.0;
  return AffineMap(m, Eigen::Vector3cd::Zero());
}

AffineMap loss_map(double eta) {
  check_eta(eta, "eta");
  return AffineMap(eta * Eigen::Matrix3cd::Identity(), Eigen::Vector3cd::Zero());
}

double mean_photons(double r) {
  const double s = std::sinh(r);
  return s * s;
}

double squeeze_parameter(double n_bar) {
  check_n_bar(n_bar);
  return std::asinh(std::sqrt(n_bar));
}

MomentVector protocol_moments(double r, double phi, double eta1, double eta2) {
  check_eta(eta1, "eta1");
  check_eta(eta2, "eta2");
  const AffineMap pipeline = squeeze_map(r)
                                 .then(rotation_map(phi))
                                 .then(loss_map(eta1))
                                 .then(squeeze_map(-r))
                                 .then(loss_map(eta2));
  MomentVector v = pipeline.apply(MomentVector::vacuum());
  // Intermediate moments grow like cosh(2r), so rounding can push a pure output
  // marginally past the uncertainty bound. Pull it back onto the boundary.
  const double c = std::cosh(2.0 * r);
  const double tol =
      64.0 * std::numeric_limits<double>::epsilon() * c * c * (1.0 + v.m_n + std::abs(v.m_aa));
  const double margin = v.uncertainty_margin();
  if (margin < 0.0 && margin >= -tol && v.m_n >= 0.0 && std::abs(v.m_aa) > 0.0) {
    v.m_aa *= std::sqrt(v.m_n * (v.m_n + 1.0)) / std::abs(v.m_aa);
    v.m_adad = std::conj(v.m_aa);
  }
  return v;
}

MomentVector protocol_moments_closed_form(double n, double phi, double eta) {
  check_n_bar(n);
  check_eta(eta, "eta");
  MomentVector v;
  v.m_n = signal(n, phi, eta);
  const Complex e2{std::cos(2.0 * phi), std::sin(2.0 * phi)};
  v.m_aa = eta * std::sqrt(n) * std::sqrt(n + 1.0) *
           (eta * n * (2.0 - std::conj(e2)) - eta * (n + 1.0) * e2 + 1.0);
  v.m_adad = std::conj(v.m_aa);
  return v;
}

double signal(double n, double phi, double eta) {
  check_n_bar(n);
  check_eta(eta, "eta");
  return eta * n * (1.0 + eta + 2.0 * n * eta - 2.0 * (n + 1.0) * eta * std::cos(2.0 * phi));
}

double signal_slope(double n, double phi, double eta) {
  check_n_bar(n);
  check_eta(eta, "eta");
  return 4.0 * eta * eta * n * (n + 1.0) * std::sin(2.0 * phi);
}

double variance_number(const MomentVector& v) {
  if (!v.is_physical()) {
    throw DomainError("moment vector violates the Gaussian uncertainty bound (margin " +
                      format_real(v.uncertainty_margin()) + ")");
  }
  // <a^dag a^dag a a> = 2 m_n^2 + |m_aa|^2 for zero-mean Gaussian states
  const double fourth = 2.0 * v.m_n * v.m_n + std::norm(v.m_aa);
  return std::max(0.0, fourth + v.m_n - v.m_n * v.m_n);
}

double lossless_signal(double n, double phi) {
  const double s = std::sin(phi);
  return 4.0 * n * (n + 1.0) * s * s;
}

double lossless_variance(double n, double phi) {
  const double s = std::sin(phi);
  return 8.0 * (n * (n + 1.0) * s * s) *
         (1.0 + 2.0 * n + 2.0 * n * n - 2.0 * n * (n + 1.0) * std::cos(2.0 * phi));
}

double lossless_phase_error(double n) {
  if (!(n > 0.0)) throw DomainError("mean photon number must be positive");
  return 1.0 / std::sqrt(8.0 * n + 8.0 * n * n);
}

double phase_error_sq_literal(double n, double phi, double eta) {
  const double e = eta;
  const double e2 = e * e;
  const double e3 = e2 * e;
  const double bracket =
      e3 + 2.0 * e + 12.0 * e3 * n * n * n + 16.0 * e3 * n * n + 8.0 * e2 * n * n +
      4.0 * e3 * n * (n + 1.0) * (n + 1.0) * std::cos(4.0 * phi) + 6.0 * e3 * n -
      2.0 * e * (n + 1.0) * (e + 4.0 * e2 * n * (2.0 * n + 1.0) + 4.0 * e * n + 1.0) *
          std::cos(2.0 * phi) +
      6.0 * e2 * n + 4.0 * e * n + 1.0;
  const double csc = 1.0 / std::sin(2.0 * phi);
  return bracket * csc * csc / (16.0 * e3 * n * (n + 1.0) * (n + 1.0));
}

PhaseError phase_error(double n, double phi, double eta) {
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("mean photon number must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw DomainError("eta must lie in (0, 1] for the phase error, got " + format_real(eta));
  }
  if (phi == 0.0 && eta == 1.0) return {lossless_phase_error(n), true};
  if (std::abs(std::sin(2.0 * phi)) < 1e-12) {
    throw SingularOperatingPoint(
        "phase error diverges at phi = " + format_real(phi) +
        " with eta = " + format_real(eta) +
        ": the signal slope vanishes there (csc^2(2 phi) term); choose phi in (0, pi/2)");
  }
  // Bracket as a polynomial in s = sin^2 phi, with cos 2phi = 1 - 2s and
  // cos 4phi = 1 - 8s + 8s^2; csc^2 2phi = 1 / (4 s (1 - s)).
  const double s = std::sin(phi) * std::sin(phi);
  const double c = std::cos(phi) * std::cos(phi);
  const double loss = 1.0 - eta;
  const double np1 = n + 1.0;
  const double quad = 32.0 * eta * eta * eta * n * np1 * np1;
  const double lin = 4.0 * eta * np1 * (1.0 + eta + 4.0 * eta * n * loss);
  const double constant = loss * (1.0 + eta - eta * eta + 2.0 * eta * n * loss);
  const double bracket = (quad * s + lin) * s + constant;
  const double denom = 64.0 * eta * eta * eta * n * np1 * np1 * s * c;
  return {std::sqrt(bracket / denom), false};
}

double snl_ratio(double n, double phi, double eta) {
  return (1.0 / std::sqrt(4.0 * n)) / phase_error(n, phi, eta).value;
}

}  // namespace qmetro::gaussian
