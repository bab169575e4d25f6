#pragma once

// Photon-statistics correlation parameters, Fisher information, and the
// closed-form probe-state table.

#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "qmetro/fock.hpp"

namespace qmetro::correlations {

struct ProbeStatistics {
  double mean_n_a = 0.0;
  double mean_n_b = 0.0;
  double var_n_a = 0.0;
  double var_n_b = 0.0;
  double cov_nn = 0.0;
  std::optional<double> q_a;  // empty when the mode mean is zero
  std::optional<double> q_b;
  std::optional<double> j;    // empty when either variance vanishes
  double qfi = 0.0;           // var_a + var_b - 2 cov

  double n_bar() const { return mean_n_a + mean_n_b; }
};

ProbeStatistics probe_statistics(const fock::ObservableMoments& moments);
ProbeStatistics probe_statistics(const fock::PureState& two_mode);

// (var - mean) / mean. Throws UndefinedStatistic when mean <= 0.
double mandel_q(double mean_n, double var_n);

// Cov / (sd_a sd_b); nullopt when either variance is (numerically) zero.
std::optional<double> mode_correlation_j(double var_a, double var_b, double cov);

enum class Generator {
  kNumber,          // total photon number
  kDifference,      // na - nb
  kHalfDifference,  // (na - nb) / 2
};

// 4 Var(G) for a pure state under exp(i phi G), G diagonal in the Fock basis.
double qfi_pure(const fock::PureState& state, Generator generator);

// n (1 + Q)(1 - J) for path-symmetric probes.
double qfi_path_symmetric(double n_bar, double q, double j);

using ProbabilityCurve = std::function<Eigen::VectorXd(double phi)>;

struct FisherEstimate {
  double value = 0.0;
  int skipped_outcomes = 0;        // outcomes with p < 1e-12 at the operating point
  double skipped_probability = 0.0;
  double skipped_slope = 0.0;      // sum |dp/dphi| over skipped outcomes
  bool richardson = false;         // step-halving disagreed; extrapolated derivatives used
};

inline constexpr double kDefaultFiniteDifferenceStep = 1e-4;

// Classical Fisher information of a phase-dependent outcome distribution,
// by central differences.
FisherEstimate classical_fisher(const ProbabilityCurve& curve, double phi,
                                double step = kDefaultFiniteDifferenceStep);

double cramer_rao(double fisher);

enum class SnlConvention {
  kTwoMode,     // 1 / sqrt(n)
  kSingleMode,  // 1 / sqrt(4 n)
};

double snl(double n_bar, SnlConvention convention);
double heisenberg(double n_bar);

enum class TableState {
  kLaser,
  kNoon,
  kTwinSqueezed,
  kCaves,
  kAmplifiedBell,
  kTwinFock,
  kTmsv,
  kEcs,
};

struct TableRow {
  TableState state = TableState::kLaser;
  double n_bar = 0.0;
  double q = 0.0;
  double j = 0.0;
  double qfi = 0.0;
};

std::span<const TableState> table_states();
std::string_view to_string(TableState state);
std::optional<TableState> table_state_from_string(std::string_view name);

// Closed-form (Q, J, QFI) row. The ECS row requires exp(-n) < 1e-6.
TableRow table_row(TableState state, double n_bar);

// Fock-space probe inside the interferometer for a table row, or nullopt
// when the row has no construction (amplified Bell) or n_bar does not admit
// one (NOON and twin Fock need integer photon numbers).
//
// The TMSV row is built with per-mode mean sinh^2 r = n_bar, which is the
// normalization under which its printed Q = n_bar holds.
std::optional<fock::PureState> table_probe(TableState state, double n_bar, int cutoff);

}  // namespace qmetro::correlations
