#include "qmetro/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qmetro/error.hpp"

namespace qmetro::fock {
namespace {

void check_shape(int modes, int cutoff, Eigen::Index size) {
  if (modes != 1 && modes != 2) {
    throw DomainError("mode count must be 1 or 2, got " + std::to_string(modes));
  }
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  const Eigen::Index levels = cutoff + 1;
  const Eigen::Index expected = modes == 1 ? levels : levels * levels;
  if (size != expected) {
    throw DomainError("basis size " + std::to_string(size) + " does not match modes/cutoff (" +
                      std::to_string(expected) + ")");
  }
}

void require_modes(int actual, int wanted, const char* op) {
  if (actual != wanted) {
    throw DomainError(std::string(op) + " requires a " + std::to_string(wanted) +
                      "-mode state, got " + std::to_string(actual));
  }
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Record or reject extra weight lost past the cutoff.
double accumulate_deficit(double tol, double lost, double bound, const char* op) {
  if (lost > bound) {
    throw TruncationError(std::string(op) + ": weight beyond cutoff " + format_real(lost) +
                              " exceeds bound " + format_real(bound),
                          lost);
  }
  return tol + std::max(lost, 0.0);
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

// Index helpers for acting on one mode of a flattened basis.
struct ModeIndexer {
  int modes;
  int levels;
  int mode;

  int occupation(Eigen::Index idx) const {
    if (modes == 1) return static_cast<int>(idx);
    return mode == 0 ? static_cast<int>(idx / levels) : static_cast<int>(idx % levels);
  }
  Eigen::Index rest(Eigen::Index idx) const {
    if (modes == 1) return 0;
    return mode == 0 ? idx % levels : idx / levels;
  }
  Eigen::Index compose(int n, Eigen::Index rest) const {
    if (modes == 1) return n;
    return mode == 0 ? n * levels + rest : rest * levels + n;
  }
};

void check_mode_index(int modes, int mode) {
  if (mode < 0 || mode >= modes) {
    throw DomainError("mode index " + std::to_string(mode) + " out of range for " +
                      std::to_string(modes) + "-mode state");
  }
}

// diag entries e^{i theta(index)} for the requested convention.
Eigen::VectorXcd phase_diagonal(int modes, int levels, double phi, PhaseConvention convention) {
  if (convention == PhaseConvention::kSingleMode && modes != 1) {
    throw DomainError("single-mode phase convention requires a 1-mode state");
  }
  if (convention == PhaseConvention::kRelativeHalf && modes != 2) {
    throw DomainError("relative-half phase convention requires a 2-mode state");
  }
  const Eigen::Index dim = modes == 1 ? levels : static_cast<Eigen::Index>(levels) * levels;
  Eigen::VectorXcd diag(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double theta;
    if (modes == 1) {
      theta = phi * static_cast<double>(i);
    } else {
      const auto na = static_cast<double>(i / levels);
      const auto nb = static_cast<double>(i % levels);
      theta = 0.5 * phi * (na - nb);
    }
    diag[i] = std::polar(1.0, theta);
  }
  return diag;
}

int squeeze_padding(int cutoff) { return std::max(16, cutoff / 2); }

// exp(r (a^2 - a^dag^2) / 2) on `dim` levels. The generator only couples
// levels of equal parity, so the exponential is formed per parity block.
struct SqueezeBlocks {
  int dim = 0;
  std::array<Eigen::MatrixXd, 2> block;  // [parity], indexed by n / 2

  SqueezeBlocks(double r, int d) : dim(d) {
    for (int p = 0; p < 2; ++p) {
      const int size = (dim - p + 1) / 2;
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size, size);
      for (int k = 0; k + 1 < size; ++k) {
        const int n = 2 * k + p;
        const double v = 0.5 * r * std::sqrt(static_cast<double>(n + 1) * (n + 2));
        g(k, k + 1) = v;
        g(k + 1, k) = -v;
      }
      block[p] = g.exp();
    }
  }

  // S m S^T, real and imaginary parts separately.
  Eigen::MatrixXcd conjugate(const Eigen::MatrixXcd& m) const {
    Eigen::MatrixXcd out(dim, dim);
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        const auto ip = Eigen::seq(p, dim - 1, 2);
        const auto iq = Eigen::seq(q, dim - 1, 2);
        const Eigen::MatrixXcd part = m(ip, iq);
        const Eigen::MatrixXd re = block[p] * part.real() * block[q].transpose();
        const Eigen::MatrixXd im = block[p] * part.imag() * block[q].transpose();
        out(ip, iq) = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
      }
    }
    return out;
  }
};

// exp(r (a^2 - a^dag^2) / 2) v without forming the matrix: Taylor series
// over substeps of unit generator norm, per parity block.
Eigen::VectorXcd squeeze_action(double r, const Eigen::VectorXcd& v) {
  const int dim = static_cast<int>(v.size());
  Eigen::VectorXcd out(dim);
  for (int p = 0; p < 2; ++p) {
    const int size = (dim - p + 1) / 2;
    Eigen::VectorXd c(std::max(size - 1, 0));
    for (int k = 0; k + 1 < size; ++k) {
      const int n = 2 * k + p;
      c[k] = 0.5 * r * std::sqrt(static_cast<double>(n + 1) * (n + 2));
    }
    const double norm1 = size > 1 ? 2.0 * c.cwiseAbs().maxCoeff() : 0.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(norm1)));
    c /= steps;
    auto matvec = [&](const Eigen::VectorXcd& x) {
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(size);
      for (int k = 0; k + 1 < size; ++k) {
        y[k] += c[k] * x[k + 1];
        y[k + 1] -= c[k] * x[k];
      }
      return y;
    };
    const auto idx = Eigen::seq(p, dim - 1, 2);
    Eigen::VectorXcd x = v(idx);
    for (int s = 0; s < steps; ++s) {
      Eigen::VectorXcd term = x;
      Eigen::VectorXcd sum = x;
      const double scale = x.norm();
      for (int m = 1; m < 60; ++m) {
        term = matvec(term) / static_cast<double>(m);
        sum += term;
        if (term.norm() <= 1e-18 * scale) break;
      }
      x = std::move(sum);
    }
    out(idx) = x;
  }
  return out;
}

// sqrt(C(n,j)) (1-eta)^{j/2} eta^{(n-j)/2}, the matrix element <n-j|Gamma_j|n>.
std::vector<std::vector<double>> kraus_table(int levels, double eta) {
  std::vector<std::vector<double>> table(levels);
  for (int n = 0; n < levels; ++n) {
    table[n].resize(n + 1);
    for (int j = 0; j <= n; ++j) {
      const double log_binom = log_factorial(n) - log_factorial(j) - log_factorial(n - j);
      table[n][j] = std::exp(0.5 * log_binom) * std::pow(1.0 - eta, 0.5 * j) *
                    std::pow(eta, 0.5 * (n - j));
    }
  }
  return table;
}

Complex pure_expectation_a2(const Eigen::VectorXcd& psi, const ModeIndexer& ix) {
  Complex acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const int n = ix.occupation(i);
    if (n + 2 >= ix.levels) continue;
    const Eigen::Index up = ix.compose(n + 2, ix.rest(i));
    acc += std::conj(psi[i]) * psi[up] * std::sqrt(static_cast<double>(n + 1) * (n + 2));
  }
  return acc;
}

Complex mixed_expectation_a2(const Eigen::MatrixXcd& rho, const ModeIndexer& ix) {
  // Tr(rho a^2) = sum_i <i| a^2 rho |i> = sum sqrt((n+1)(n+2)) rho[(n+2,rest),(n,rest)]
  Complex acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    const int n = ix.occupation(i);
    if (n + 2 >= ix.levels) continue;
    const Eigen::Index up = ix.compose(n + 2, ix.rest(i));
    acc += rho(up, i) * std::sqrt(static_cast<double>(n + 1) * (n + 2));
  }
  return acc;
}

double diagonal_weight(Observable obs, int na, int nb, int mode) {
  const double n = mode == 0 ? na : nb;
  switch (obs) {
    case Observable::kN:
      return n;
    case Observable::kN2:
      return n * n;
    case Observable::kCrossNN:
      return static_cast<double>(na) * nb;
    case Observable::kAdAdAA:
      return n * (n - 1.0);
    case Observable::kA2:
      break;
  }
  return 0.0;
}

Complex expectation_from_diagonal(const Eigen::VectorXd& probs, int modes, int levels,
                                  Observable obs, int mode) {
  double acc = 0.0;
  double norm = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const int na = modes == 1 ? static_cast<int>(i) : static_cast<int>(i / levels);
    const int nb = modes == 1 ? 0 : static_cast<int>(i % levels);
    acc += probs[i] * diagonal_weight(obs, na, nb, mode);
    norm += probs[i];
  }
  return {acc / norm, 0.0};
}

void check_observable(int modes, Observable obs, int mode) {
  check_mode_index(modes, mode);
  if (obs == Observable::kCrossNN && modes != 2) {
    throw DomainError("cross_nn requires a 2-mode state");
  }
}

ObservableMoments moments_from(int modes, const auto& expect) {
  ObservableMoments m;
  m.modes = modes;
  for (int k = 0; k < modes; ++k) {
    m.mean_n[k] = expect(Observable::kN, k).real();
    m.mean_n2[k] = expect(Observable::kN2, k).real();
    m.mean_a2[k] = expect(Observable::kA2, k);
    m.variance_n[k] = m.mean_n2[k] - m.mean_n[k] * m.mean_n[k];
  }
  if (modes == 2) m.cross_nn = expect(Observable::kCrossNN, 0).real();
  return m;
}

}  // namespace

PureState::PureState(int modes, int cutoff, Eigen::VectorXcd amplitudes, double truncation_tol)
    : modes_(modes), cutoff_(cutoff), amplitudes_(std::move(amplitudes)),
      truncation_tol_(truncation_tol) {
  check_shape(modes_, cutoff_, amplitudes_.size());
  const double norm2 = amplitudes_.squaredNorm();
  if (norm2 > 1.0 + 1e-10 || norm2 < 1.0 - truncation_tol_ - 1e-12) {
    throw DomainError("amplitude norm^2 " + format_real(norm2) +
                      " outside [1 - truncation_tol, 1]");
  }
}

PureState PureState::from_truncated(int modes, int cutoff, Eigen::VectorXcd amplitudes,
                                    double inherited_tol) {
  const double deficit = 1.0 - amplitudes.squaredNorm();
  if (deficit > kMaxNormDeficit) {
    throw TruncationError("norm deficit " + format_real(deficit) + " at cutoff " +
                              std::to_string(cutoff) + " exceeds " +
                              format_real(kMaxNormDeficit),
                          deficit);
  }
  const double tol = std::max({kDefaultTruncationTol, deficit, inherited_tol});
  return PureState(modes, cutoff, std::move(amplitudes), tol);
}

Complex PureState::amplitude(int n) const {
  if (modes_ != 1) throw DomainError("amplitude(n) requires a 1-mode state");
  if (n < 0 || n > cutoff_) return {0.0, 0.0};
  return amplitudes_[n];
}

Complex PureState::amplitude(int na, int nb) const {
  if (modes_ != 2) throw DomainError("amplitude(na, nb) requires a 2-mode state");
  if (na < 0 || nb < 0 || na > cutoff_ || nb > cutoff_) return {0.0, 0.0};
  return amplitudes_[static_cast<Eigen::Index>(na) * levels() + nb];
}

MixedState::MixedState(int modes, int cutoff, Eigen::MatrixXcd matrix, double truncation_tol)
    : modes_(modes), cutoff_(cutoff), matrix_(std::move(matrix)), truncation_tol_(truncation_tol) {
  if (matrix_.rows() != matrix_.cols()) throw DomainError("density matrix must be square");
  check_shape(modes_, cutoff_, matrix_.rows());
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw DomainError("density matrix not Hermitian (max deviation " + format_real(asym) + ")");
  }
  const double tr = matrix_.trace().real();
  if (tr > 1.0 + 1e-10 || tr < 1.0 - truncation_tol_ - 1e-12) {
    throw DomainError("trace " + format_real(tr) + " outside [1 - truncation_tol, 1]");
  }
}

double MixedState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PureState vacuum(int modes, int cutoff) {
  const Eigen::Index levels = cutoff + 1;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(modes == 2 ? levels * levels : levels);
  amps[0] = 1.0;
  return PureState(modes, cutoff, std::move(amps));
}

PureState make_fock(int n, int cutoff) {
  if (n < 0 || n > cutoff) throw DomainError("Fock level outside [0, cutoff]");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(cutoff + 1);
  amps[n] = 1.0;
  return PureState(1, cutoff, std::move(amps));
}

PureState make_fock(int na, int nb, int cutoff) {
  if (na < 0 || nb < 0 || na > cutoff || nb > cutoff) {
    throw DomainError("Fock levels outside [0, cutoff]");
  }
  const Eigen::Index levels = cutoff + 1;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(levels * levels);
  amps[na * levels + nb] = 1.0;
  return PureState(2, cutoff, std::move(amps));
}

PureState make_coherent(Complex alpha, int cutoff) {
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  Eigen::VectorXcd amps(cutoff + 1);
  amps[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= cutoff; ++n) {
    amps[n] = amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  }
  return PureState::from_truncated(1, cutoff, std::move(amps));
}

PureState make_squeezed_vacuum(double r, double phi, int cutoff) {
  if (r < 0.0) throw DomainError("squeezing parameter r must be nonnegative");
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(cutoff + 1);
  const double prefactor = 1.0 / std::sqrt(std::cosh(r));
  amps[0] = prefactor;
  if (r > 0.0) {
    const double log_t = std::log(std::tanh(r));
    for (int j = 1; 2 * j <= cutoff; ++j) {
      // sqrt((2j)!) / (2^j j!) tanh^j r
      const double log_mag = 0.5 * log_factorial(2 * j) - j * std::numbers::ln2 -
                             log_factorial(j) + j * log_t;
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      amps[2 * j] = sign * prefactor * std::exp(log_mag) * std::polar(1.0, 2.0 * j * phi);
    }
  }
  return PureState::from_truncated(1, cutoff, std::move(amps));
}

PureState make_noon(int n, int cutoff) {
  if (n < 0) throw DomainError("NOON photon number must be nonnegative");
  if (cutoff < n) throw DomainError("cutoff must be at least the NOON photon number");
  const Eigen::Index levels = cutoff + 1;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(levels * levels);
  if (n == 0) {
    amps[0] = 1.0;
  } else {
    amps[n * levels] = std::numbers::sqrt2 / 2.0;
    amps[n] = std::numbers::sqrt2 / 2.0;
  }
  return PureState(2, cutoff, std::move(amps));
}

PureState make_twin_fock(int n_half, int cutoff) { return make_fock(n_half, n_half, cutoff); }

PureState make_ecs(Complex alpha, int cutoff) {
  if (std::norm(alpha) < 1e-8) {
    throw DomainError("entangled coherent state needs |alpha|^2 >= 1e-8 (normalization vanishes)");
  }
  const PureState coh = make_coherent(alpha, cutoff);
  const Eigen::Index levels = cutoff + 1;
  // <alpha,0|0,alpha> = |<0|alpha>|^2 = e^{-|alpha|^2}
  const double norm = std::sqrt(2.0 + 2.0 * std::exp(-std::norm(alpha)));
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(levels * levels);
  for (Eigen::Index n = 0; n < levels; ++n) {
    amps[n * levels] += coh.amplitudes()[n] / norm;
    amps[n] += coh.amplitudes()[n] / norm;
  }
  return PureState::from_truncated(2, cutoff, std::move(amps));
}

PureState make_tmsv(double r, int cutoff) {
  if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
  const Eigen::Index levels = cutoff + 1;
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(levels * levels);
  const double t = std::tanh(r);
  double coeff = 1.0 / std::cosh(r);
  for (Eigen::Index n = 0; n < levels; ++n) {
    amps[n * levels + n] = coeff;
    coeff *= t;
  }
  return PureState::from_truncated(2, cutoff, std::move(amps));
}

PureState tensor(const PureState& a, const PureState& b) {
  require_modes(a.modes(), 1, "tensor");
  require_modes(b.modes(), 1, "tensor");
  if (a.cutoff() != b.cutoff()) throw DomainError("tensor requires equal cutoffs");
  const Eigen::Index levels = a.levels();
  Eigen::VectorXcd amps(levels * levels);
  for (Eigen::Index i = 0; i < levels; ++i) {
    for (Eigen::Index j = 0; j < levels; ++j) {
      amps[i * levels + j] = a.amplitudes()[i] * b.amplitudes()[j];
    }
  }
  return PureState::from_truncated(2, a.cutoff(), std::move(amps),
                                   a.truncation_tol() + b.truncation_tol());
}

MixedState to_density(const PureState& state) {
  const Eigen::VectorXcd& psi = state.amplitudes();
  return MixedState(state.modes(), state.cutoff(), hermitize(psi * psi.adjoint()),
                    state.truncation_tol());
}

PureState apply_beam_splitter(const PureState& state) {
  require_modes(state.modes(), 2, "apply_beam_splitter");
  const int cutoff = state.cutoff();
  const Eigen::Index levels = state.levels();
  const Eigen::VectorXcd& psi = state.amplitudes();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  double leaked = 0.0;
  const Complex i_quarter_pi{0.0, std::numbers::pi / 4.0};

  // V = exp(i pi/4 (a^dag b + a b^dag)) conserves na + nb; act on each block
  // {|k, N-k>} in full (both occupations up to N) and keep the part inside the box.
  for (int total = 0; total <= 2 * cutoff; ++total) {
    const int kmin = std::max(0, total - cutoff);
    const int kmax = std::min(total, cutoff);
    Eigen::VectorXcd block_in = Eigen::VectorXcd::Zero(total + 1);
    bool any = false;
    for (int k = kmin; k <= kmax; ++k) {
      block_in[k] = psi[k * levels + (total - k)];
      any = any || block_in[k] != Complex{0.0, 0.0};
    }
    if (!any) continue;

    Eigen::MatrixXd generator = Eigen::MatrixXd::Zero(total + 1, total + 1);
    for (int k = 0; k < total; ++k) {
      const double v = std::sqrt(static_cast<double>(k + 1) * (total - k));
      generator(k + 1, k) = v;
      generator(k, k + 1) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(generator);
    const Eigen::MatrixXd& q = solver.eigenvectors();
    Eigen::VectorXcd coeffs = q.transpose().cast<Complex>() * block_in;
    for (int m = 0; m <= total; ++m) coeffs[m] *= std::exp(i_quarter_pi * solver.eigenvalues()[m]);
    const Eigen::VectorXcd block_out = q.cast<Complex>() * coeffs;

    for (int k = 0; k <= total; ++k) {
      if (k >= kmin && k <= kmax) {
        out[k * levels + (total - k)] = block_out[k];
      } else {
        leaked += std::norm(block_out[k]);
      }
    }
  }
  const double tol = accumulate_deficit(state.truncation_tol(), leaked,
                                        kMaxNormDeficit - state.norm_deficit(),
                                        "apply_beam_splitter");
  return PureState(2, cutoff, std::move(out), tol);
}

PureState apply_phase(const PureState& state, double phi, PhaseConvention convention) {
  const Eigen::VectorXcd diag = phase_diagonal(state.modes(), state.levels(), phi, convention);
  return PureState(state.modes(), state.cutoff(), diag.cwiseProduct(state.amplitudes()),
                   state.truncation_tol());
}

MixedState apply_phase(const MixedState& state, double phi, PhaseConvention convention) {
  const Eigen::VectorXcd diag = phase_diagonal(state.modes(), state.levels(), phi, convention);
  Eigen::MatrixXcd out = diag.asDiagonal() * state.matrix() * diag.conjugate().asDiagonal();
  return MixedState(state.modes(), state.cutoff(), hermitize(out), state.truncation_tol());
}

PureState apply_squeeze(const PureState& state, double r) {
  require_modes(state.modes(), 1, "apply_squeeze");
  if (r == 0.0) return state;
  const int levels = state.levels();
  const int dim = levels + squeeze_padding(state.cutoff());
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(dim);
  padded.head(levels) = state.amplitudes();
  const Eigen::VectorXcd moved = squeeze_action(r, padded);
  const double lost = moved.tail(dim - levels).squaredNorm();
  const double tol = accumulate_deficit(state.truncation_tol(), lost, kSqueezeHeadroom,
                                        "apply_squeeze");
  return PureState(1, state.cutoff(), moved.head(levels), tol);
}

MixedState apply_squeeze(const MixedState& state, double r) {
  require_modes(state.modes(), 1, "apply_squeeze");
  if (r == 0.0) return state;
  const int levels = state.levels();
  const int dim = levels + squeeze_padding(state.cutoff());
  Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(dim, dim);
  padded.topLeftCorner(levels, levels) = state.matrix();
  const Eigen::MatrixXcd moved = SqueezeBlocks(r, dim).conjugate(padded);
  double lost = 0.0;
  for (int n = levels; n < dim; ++n) lost += moved(n, n).real();
  const double tol = accumulate_deficit(state.truncation_tol(), lost, kSqueezeHeadroom,
                                        "apply_squeeze");
  return MixedState(1, state.cutoff(), hermitize(moved.topLeftCorner(levels, levels)), tol);
}

MixedState apply_loss(const PureState& state, double eta, int mode) {
  return apply_loss(to_density(state), eta, mode);
}

MixedState apply_loss(const MixedState& state, double eta, int mode) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError("transmissivity eta must lie in [0, 1], got " + format_real(eta));
  }
  check_mode_index(state.modes(), mode);
  if (eta == 1.0) return state;

  const ModeIndexer ix{state.modes(), state.levels(), mode};
  const auto kraus = kraus_table(state.levels(), eta);
  const Eigen::MatrixXcd& rho = state.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  // sigma = sum_j Gamma_j rho Gamma_j^dag with Gamma_j |n> = kraus[n][j] |n - j>,
  // j running to the cutoff (higher j annihilates the truncated space).
  for (Eigen::Index col = 0; col < rho.cols(); ++col) {
    const int m_col = ix.occupation(col);
    const Eigen::Index rest_col = ix.rest(col);
    for (Eigen::Index row = 0; row < rho.rows(); ++row) {
      const Complex value = rho(row, col);
      if (value == Complex{0.0, 0.0}) continue;
      const int m_row = ix.occupation(row);
      const Eigen::Index rest_row = ix.rest(row);
      const int jmax = std::min(m_row, m_col);
      for (int j = 0; j <= jmax; ++j) {
        out(ix.compose(m_row - j, rest_row), ix.compose(m_col - j, rest_col)) +=
            kraus[m_row][j] * kraus[m_col][j] * value;
      }
    }
  }
  return MixedState(state.modes(), state.cutoff(), hermitize(out), state.truncation_tol());
}

Complex expectation(const PureState& state, Observable observable, int mode) {
  check_observable(state.modes(), observable, mode);
  if (observable == Observable::kA2) {
    const ModeIndexer ix{state.modes(), state.levels(), mode};
    return pure_expectation_a2(state.amplitudes(), ix) / state.norm_squared();
  }
  return expectation_from_diagonal(state.amplitudes().cwiseAbs2(), state.modes(), state.levels(),
                                   observable, mode);
}

Complex expectation(const MixedState& state, Observable observable, int mode) {
  check_observable(state.modes(), observable, mode);
  if (observable == Observable::kA2) {
    const ModeIndexer ix{state.modes(), state.levels(), mode};
    return mixed_expectation_a2(state.matrix(), ix) / state.trace();
  }
  return expectation_from_diagonal(state.matrix().diagonal().real(), state.modes(),
                                   state.levels(), observable, mode);
}

ObservableMoments observable_moments(const PureState& state) {
  return moments_from(state.modes(),
                      [&](Observable o, int m) { return expectation(state, o, m); });
}

ObservableMoments observable_moments(const MixedState& state) {
  return moments_from(state.modes(),
                      [&](Observable o, int m) { return expectation(state, o, m); });
}

PureState project_total_photon(const PureState& state, int total) {
  require_modes(state.modes(), 2, "project_total_photon");
  const Eigen::Index levels = state.levels();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(state.dim());
  for (Eigen::Index na = 0; na < levels; ++na) {
    const Eigen::Index nb = total - na;
    if (nb < 0 || nb >= levels) continue;
    out[na * levels + nb] = state.amplitudes()[na * levels + nb];
  }
  const double weight = out.squaredNorm();
  if (weight <= 1e-12) {
    throw EmptyProjection("no weight in the " + std::to_string(total) + "-photon subspace");
  }
  out /= std::sqrt(weight);
  return PureState(2, state.cutoff(), std::move(out));
}

Eigen::MatrixXd photon_number_distribution(const PureState& state) {
  const Eigen::VectorXd probs = state.amplitudes().cwiseAbs2();
  if (state.modes() == 1) return probs;
  // stored row-major (na outer); Eigen maps are column-major, so transpose the view.
  return Eigen::Map<const Eigen::MatrixXd>(probs.data(), state.levels(), state.levels())
      .transpose();
}

Eigen::MatrixXd photon_number_distribution(const MixedState& state) {
  const Eigen::VectorXd probs = state.matrix().diagonal().real().cwiseMax(0.0);
  if (state.modes() == 1) return probs;
  return Eigen::Map<const Eigen::MatrixXd>(probs.data(), state.levels(), state.levels())
      .transpose();
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.modes() != b.modes() || a.cutoff() != b.cutoff()) {
    throw DomainError("fidelity requires matching modes and cutoff");
  }
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const MixedState& rho, const PureState& psi) {
  if (rho.modes() != psi.modes() || rho.cutoff() != psi.cutoff()) {
    throw DomainError("fidelity requires matching modes and cutoff");
  }
  return psi.amplitudes().dot(rho.matrix() * psi.amplitudes()).real();
}

}  // namespace qmetro::fock
