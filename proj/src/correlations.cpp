#include "qmetro/correlations.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qmetro/error.hpp"

namespace qmetro::correlations {
namespace {

constexpr std::array<TableState, 8> kTableStates = {
    TableState::kLaser,         TableState::kNoon,     TableState::kTwinSqueezed,
    TableState::kCaves,         TableState::kAmplifiedBell, TableState::kTwinFock,
    TableState::kTmsv,          TableState::kEcs,
};

constexpr double kSkipProbability = 1e-12;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// Integer photon number when n_bar is within 1e-9 of one.
std::optional<int> as_count(double n_bar) {
  const double rounded = std::round(n_bar);
  if (std::abs(n_bar - rounded) > 1e-9 || rounded < 0.0) return std::nullopt;
  return static_cast<int>(rounded);
}

Eigen::VectorXd checked_probabilities(const Eigen::VectorXd& p) {
  if (p.size() > 0 && p.minCoeff() < -1e-12) {
    throw DomainError("negative probability " + format_real(p.minCoeff()));
  }
  return p.cwiseMax(0.0);
}

}  // namespace

ProbeStatistics probe_statistics(const fock::ObservableMoments& moments) {
  if (moments.modes != 2) throw DomainError("probe statistics need two-mode moments");
  ProbeStatistics s;
  s.mean_n_a = moments.mean_n[0];
  s.mean_n_b = moments.mean_n[1];
  s.var_n_a = moments.variance_n[0];
  s.var_n_b = moments.variance_n[1];
  s.cov_nn = moments.covariance();
  if (s.mean_n_a > 0.0) s.q_a = mandel_q(s.mean_n_a, s.var_n_a);
  if (s.mean_n_b > 0.0) s.q_b = mandel_q(s.mean_n_b, s.var_n_b);
  s.j = mode_correlation_j(s.var_n_a, s.var_n_b, s.cov_nn);
  s.qfi = s.var_n_a + s.var_n_b - 2.0 * s.cov_nn;
  return s;
}

ProbeStatistics probe_statistics(const fock::PureState& two_mode) {
  return probe_statistics(fock::observable_moments(two_mode));
}

double mandel_q(double mean_n, double var_n) {
  if (!(mean_n > 0.0)) throw UndefinedStatistic("Mandel Q is undefined at zero mean photon number");
  if (var_n < -1e-10) throw DomainError("photon-number variance must be nonnegative");
  return (var_n - mean_n) / mean_n;
}

std::optional<double> mode_correlation_j(double var_a, double var_b, double cov) {
  constexpr double kZeroVariance = 1e-14;
  if (var_a <= kZeroVariance || var_b <= kZeroVariance) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

double qfi_pure(const fock::PureState& state, Generator generator) {
  if (state.norm_deficit() > fock::kMaxNormDeficit) {
    throw DomainError("qfi_pure needs a normalized state (norm deficit " +
                      format_real(state.norm_deficit()) + ")");
  }
  const Eigen::VectorXd probs = state.amplitudes().cwiseAbs2();
  const int levels = state.levels();
  const double scale = generator == Generator::kHalfDifference ? 0.5 : 1.0;
  double norm = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double g;
    if (state.modes() == 1) {
      if (generator != Generator::kNumber) {
        throw DomainError("mode-difference generators require a two-mode state");
      }
      g = static_cast<double>(i);
    } else {
      const auto na = static_cast<double>(i / levels);
      const auto nb = static_cast<double>(i % levels);
      g = generator == Generator::kNumber ? na + nb : scale * (na - nb);
    }
    norm += probs[i];
    mean += probs[i] * g;
    second += probs[i] * g * g;
  }
  mean /= norm;
  second /= norm;
  return 4.0 * (second - mean * mean);
}

double qfi_path_symmetric(double n_bar, double q, double j) {
  return n_bar * (1.0 + q) * (1.0 - j);
}

FisherEstimate classical_fisher(const ProbabilityCurve& curve, double phi, double step) {
  require_positive(step, "finite-difference step");
  const Eigen::VectorXd p0 = checked_probabilities(curve(phi));
  const Eigen::VectorXd p_hi = checked_probabilities(curve(phi + step));
  const Eigen::VectorXd p_lo = checked_probabilities(curve(phi - step));
  const Eigen::VectorXd p_hi2 = checked_probabilities(curve(phi + 0.5 * step));
  const Eigen::VectorXd p_lo2 = checked_probabilities(curve(phi - 0.5 * step));

  const double total = p0.sum();
  for (const Eigen::VectorXd* p : {&p_hi, &p_lo, &p_hi2, &p_lo2}) {
    if (p->size() != p0.size()) throw DomainError("outcome count changed across the stencil");
    if (std::abs(p->sum() - total) > 1e-8) {
      throw DomainError("total probability not constant across the finite-difference stencil");
    }
  }

  const Eigen::VectorXd d_full = (p_hi - p_lo) / (2.0 * step);
  const Eigen::VectorXd d_half = (p_hi2 - p_lo2) / step;

  FisherEstimate est;
  auto fisher = [&](const Eigen::VectorXd& d) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
      if (p0[i] >= kSkipProbability) f += d[i] * d[i] / p0[i];
    }
    return f;
  };
  const double f_full = fisher(d_full);
  const double f_half = fisher(d_half);
  Eigen::VectorXd d = d_half;
  if (std::abs(f_half - f_full) > 1e-4 * std::abs(f_half)) {
    d = (4.0 * d_half - d_full) / 3.0;
    est.richardson = true;
  }
  est.value = fisher(d);
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    if (p0[i] < kSkipProbability) {
      ++est.skipped_outcomes;
      est.skipped_probability += p0[i];
      est.skipped_slope += std::abs(d[i]);
    }
  }
  return est;
}

double cramer_rao(double fisher) {
  require_positive(fisher, "Fisher information");
  return 1.0 / std::sqrt(fisher);
}

double snl(double n_bar, SnlConvention convention) {
  require_positive(n_bar, "mean photon number");
  return convention == SnlConvention::kTwoMode ? 1.0 / std::sqrt(n_bar)
                                               : 1.0 / std::sqrt(4.0 * n_bar);
}

double heisenberg(double n_bar) {
  require_positive(n_bar, "mean photon number");
  return 1.0 / n_bar;
}

std::span<const TableState> table_states() { return kTableStates; }

std::string_view to_string(TableState state) {
  switch (state) {
    case TableState::kLaser:
      return "laser";
    case TableState::kNoon:
      return "noon";
    case TableState::kTwinSqueezed:
      return "twin_squeezed_vacuum";
    case TableState::kCaves:
      return "caves";
    case TableState::kAmplifiedBell:
      return "amplified_bell";
    case TableState::kTwinFock:
      return "twin_fock";
    case TableState::kTmsv:
      return "two_mode_squeezed_vacuum";
    case TableState::kEcs:
      return "entangled_coherent";
  }
  return "unknown";
}

std::optional<TableState> table_state_from_string(std::string_view name) {
  for (TableState s : kTableStates) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

TableRow table_row(TableState state, double n) {
  require_positive(n, "mean photon number");
  TableRow row{state, n, 0.0, 0.0, 0.0};
  switch (state) {
    case TableState::kLaser:
      row.q = 0.0;
      row.j = 0.0;
      row.qfi = n;
      break;
    case TableState::kNoon:
      row.q = n / 2.0 - 1.0;
      row.j = -1.0;
      row.qfi = n * n;
      break;
    case TableState::kTwinSqueezed:
      row.q = n + 1.0;
      row.j = 0.0;
      row.qfi = n * n + 2.0 * n;
      break;
    case TableState::kCaves: {
      const double s = std::sqrt(n * (n + 2.0));
      row.q = (1.0 + 2.0 * n + s) / 4.0;
      row.j = (1.0 - s) / (5.0 + 2.0 * n + s);
      row.qfi = (2.0 * n + n * s + n * n) / 2.0;
      break;
    }
    case TableState::kAmplifiedBell:
      row.q = (5.0 * n - 11.0 / n + 2.0) / 8.0;
      row.j = -(n + 1.0) * (n + 1.0) / (5.0 * n * n + 10.0 * n - 11.0);
      row.qfi = (3.0 * n * n + 6.0 * n - 5.0) / 4.0;
      break;
    case TableState::kTwinFock:
      row.q = (n / 2.0 - 1.0) / 2.0;
      row.j = -1.0;
      row.qfi = n * n / 2.0 + n;
      break;
    case TableState::kTmsv:
      row.q = n;
      row.j = 1.0;
      row.qfi = 0.0;
      break;
    case TableState::kEcs:
      if (std::exp(-n) >= 1e-6) {
        throw DomainError("entangled coherent state row assumes exp(-n) << 1; need n > " +
                          format_real(-std::log(1e-6)));
      }
      row.q = n / 2.0;
      row.j = -1.0 / (1.0 + 2.0 / n);
      row.qfi = n * n + n;
      break;
    default:
      throw DomainError("unknown table state");
  }
  return row;
}

std::optional<fock::PureState> table_probe(TableState state, double n, int cutoff) {
  require_positive(n, "mean photon number");
  using fock::Complex;
  switch (state) {
    case TableState::kLaser: {
      // V (|0> (x) |alpha>) = |i alpha/sqrt2> (x) |alpha/sqrt2>
      const auto input = fock::tensor(fock::vacuum(1, cutoff),
                                      fock::make_coherent(Complex{std::sqrt(n), 0.0}, cutoff));
      return fock::apply_beam_splitter(input);
    }
    case TableState::kNoon: {
      const auto count = as_count(n);
      if (!count) return std::nullopt;
      return fock::make_noon(*count, cutoff);
    }
    case TableState::kTwinSqueezed: {
      const double r = std::asinh(std::sqrt(n / 2.0));
      const auto single = fock::make_squeezed_vacuum(r, 0.0, cutoff);
      return fock::tensor(single, single);
    }
    case TableState::kCaves: {
      // Equal intensities: |alpha|^2 = sinh^2 r = n/2, alpha real, squeezing phase 0.
      const double r = std::asinh(std::sqrt(n / 2.0));
      const auto input =
          fock::tensor(fock::make_coherent(Complex{std::sqrt(n / 2.0), 0.0}, cutoff),
                       fock::make_squeezed_vacuum(r, 0.0, cutoff));
      return fock::apply_beam_splitter(input);
    }
    case TableState::kAmplifiedBell:
      return std::nullopt;
    case TableState::kTwinFock: {
      const auto count = as_count(n);
      if (!count || *count % 2 != 0) return std::nullopt;
      return fock::apply_beam_splitter(fock::make_twin_fock(*count / 2, cutoff));
    }
    case TableState::kTmsv:
      return fock::make_tmsv(std::asinh(std::sqrt(n)), cutoff);
    case TableState::kEcs:
      return fock::make_ecs(Complex{std::sqrt(n), 0.0}, cutoff);
  }
  return std::nullopt;
}

}  // namespace qmetro::correlations
