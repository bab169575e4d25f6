#pragma once

// Reference implementation with explicit operator matrices. Slow and simple:
// ladder operators are built as dense matrices, unitaries come from a full
// matrix exponential on a padded space, and loss is applied with literal
// Kraus matrices (1-eta)^{j/2} eta^{n/2} a^j / sqrt(j!).

#include <complex>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

Eigen::MatrixXcd annihilation(int levels);
Eigen::MatrixXcd number(int levels);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// exp(alpha a^dag - conj(alpha) a)|0>, cropped to `levels`.
Eigen::VectorXcd coherent(Complex alpha, int levels, int padding = 40);
// exp(r (a^2 - a^dag^2) / 2) |0>, cropped.
Eigen::VectorXcd squeezed(double r, int levels, int padding = 40);

// exp(r (a^2 - a^dag^2) / 2) applied to a truncated vector (padded, then cropped).
Eigen::VectorXcd squeeze(const Eigen::VectorXcd& psi, double r, int padding = 40);
// exp(i pi/4 (a^dag b + a b^dag)) applied to a 2-mode vector of `levels`^2 entries.
Eigen::VectorXcd beam_splitter(const Eigen::VectorXcd& psi, int levels);

// Amplitude damping on one mode of a 1- or 2-mode density matrix.
Eigen::MatrixXcd loss(const Eigen::MatrixXcd& rho, double eta, int levels, int modes, int mode);

// Tr(rho op) for the given operator.
Complex expect(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op);
Complex expect(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& op);

}  // namespace oracle
