#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qmetro/correlations.hpp"
#include "qmetro/error.hpp"

using namespace qmetro;
using namespace qmetro::correlations;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(MandelQ, Values) {
  EXPECT_DOUBLE_EQ(mandel_q(3.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(mandel_q(4.0, 0.0), -1.0);
  // single-mode squeezed vacuum with mean n/2 = 1: Var = 2 m (m + 1) = 4
  EXPECT_DOUBLE_EQ(mandel_q(1.0, 4.0), 3.0);
  EXPECT_THROW(mandel_q(0.0, 1.0), UndefinedStatistic);
}

TEST(CorrelationJ, Values) {
  EXPECT_FALSE(mode_correlation_j(0.0, 1.0, 0.0).has_value());
  EXPECT_DOUBLE_EQ(*mode_correlation_j(4.0, 4.0, -4.0), -1.0);
  const auto noon = probe_statistics(fock::make_noon(3, 4));
  ASSERT_TRUE(noon.j);
  EXPECT_NEAR(*noon.j, -1.0, 1e-14);
  const auto product = probe_statistics(fock::tensor(fock::make_coherent(1.0, 30), fock::make_coherent(0.5, 30)));
  EXPECT_NEAR(*product.j, 0.0, 1e-12);
  const auto tmsv = probe_statistics(fock::make_tmsv(0.6, 80));
  EXPECT_NEAR(*tmsv.j, 1.0, 1e-12);
}

TEST(Qfi, PureStates) {
  EXPECT_NEAR(qfi_pure(fock::make_noon(4, 5), Generator::kHalfDifference), 16.0, 1e-13);
  EXPECT_EQ(qfi_pure(fock::vacuum(2, 3), Generator::kDifference), 0.0);
  EXPECT_EQ(qfi_pure(fock::vacuum(1, 3), Generator::kNumber), 0.0);
  EXPECT_NEAR(qfi_pure(fock::make_squeezed_vacuum(std::asinh(1.0), 0.0, 160), Generator::kNumber), 16.0,
              1e-9);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(3);
  v[0] = 0.5;
  EXPECT_THROW(qfi_pure(fock::PureState(1, 2, v), Generator::kNumber), DomainError);
}

TEST(Qfi, PathSymmetric) {
  EXPECT_DOUBLE_EQ(qfi_path_symmetric(4.0, 0.0, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(qfi_path_symmetric(2.0, 3.0, 0.0), 8.0);
  EXPECT_DOUBLE_EQ(qfi_path_symmetric(7.0, -1.0, 0.3), 0.0);
}

TEST(Fisher, BinomialModel) {
  const ProbabilityCurve curve = [](double phi) {
    Eigen::VectorXd p(2);
    p << std::pow(std::cos(phi / 2.0), 2), std::pow(std::sin(phi / 2.0), 2);
    return p;
  };
  EXPECT_NEAR(classical_fisher(curve, std::numbers::pi / 2.0).value, 1.0, 1e-8);
  const ProbabilityCurve flat = [](double) { return Eigen::VectorXd::Constant(4, 0.25); };
  EXPECT_EQ(classical_fisher(flat, 0.3).value, 0.0);
  const ProbabilityCurve negative = [](double) {
    Eigen::VectorXd p(2);
    p << 1.1, -0.1;
    return p;
  };
  EXPECT_THROW(classical_fisher(negative, 0.3), DomainError);
}

TEST(Benchmarks, Limits) {
  EXPECT_DOUBLE_EQ(cramer_rao(16.0), 0.25);
  EXPECT_NEAR(snl(1.5e4, SnlConvention::kSingleMode), 4.0824829e-3, 1e-9);
  EXPECT_DOUBLE_EQ(snl(4.0, SnlConvention::kTwoMode), 0.5);
  EXPECT_DOUBLE_EQ(heisenberg(4.0), 0.25);
  EXPECT_THROW(cramer_rao(0.0), DomainError);
  EXPECT_THROW(snl(-1.0, SnlConvention::kTwoMode), DomainError);
}

TEST(Table, ClosedForms) {
  const auto noon = table_row(TableState::kNoon, 4.0);
  EXPECT_DOUBLE_EQ(noon.q, 1.0);
  EXPECT_DOUBLE_EQ(noon.j, -1.0);
  EXPECT_DOUBLE_EQ(noon.qfi, 16.0);
  EXPECT_NEAR(table_row(TableState::kCaves, 2.0).qfi, 4.0 + 2.0 * std::numbers::sqrt2, 1e-14);
  const auto twin = table_row(TableState::kTwinFock, 2.0);
  EXPECT_DOUBLE_EQ(twin.q, 0.0);
  EXPECT_DOUBLE_EQ(twin.j, -1.0);
  EXPECT_DOUBLE_EQ(twin.qfi, 4.0);
  EXPECT_THROW(table_row(TableState::kEcs, 2.0), DomainError);
  EXPECT_NO_THROW(table_row(TableState::kEcs, 20.0));
}

TEST(Table, Names) {
  for (auto s : table_states()) EXPECT_EQ(table_state_from_string(to_string(s)), s);
  EXPECT_FALSE(table_state_from_string("squeezed_cat"));
  EXPECT_EQ(table_states().size(), 8u);
}

TEST(Table, OracleRows) {
  struct Case {
    TableState state;
    double n;
  };
  for (auto [state, n] : {Case{TableState::kNoon, 2}, Case{TableState::kNoon, 4},
                          Case{TableState::kTwinFock, 2}, Case{TableState::kTwinFock, 4},
                          Case{TableState::kTwinSqueezed, 1}, Case{TableState::kTwinSqueezed, 2},
                          Case{TableState::kLaser, 4}, Case{TableState::kTmsv, 1},
                          Case{TableState::kTmsv, 2}, Case{TableState::kCaves, 2}}) {
    const auto row = table_row(state, n);
    const auto probe = table_probe(state, n, 80);
    ASSERT_TRUE(probe) << to_string(state);
    const auto stats = probe_statistics(*probe);
    SCOPED_TRACE(std::string(to_string(state)) + " n=" + std::to_string(n));
    // the TMSV row counts photons per mode
    const double total = state == TableState::kTmsv ? 2.0 * n : n;
    EXPECT_NEAR(stats.n_bar(), total, 1e-9 * total);
    ASSERT_TRUE(stats.q_a);
    EXPECT_LT(std::abs(*stats.q_a - row.q), 1e-8 * std::max(1.0, std::abs(row.q)));
    ASSERT_TRUE(stats.j);
    EXPECT_LT(std::abs(*stats.j - row.j), 1e-8 * std::max(1.0, std::abs(row.j)));
    EXPECT_LT(std::abs(stats.qfi - row.qfi), 1e-8 * std::max(1.0, row.qfi));
  }
}

TEST(Table, EcsOracleApproximate) {
  const auto row = table_row(TableState::kEcs, 20.0);
  const auto stats = probe_statistics(*table_probe(TableState::kEcs, 20.0, 60));
  EXPECT_LT(rel(*stats.q_a, row.q), 1e-3);
  EXPECT_LT(rel(*stats.j, row.j), 1e-3);
  EXPECT_LT(rel(stats.qfi, row.qfi), 1e-3);
}

TEST(Table, NonConstructible) {
  EXPECT_FALSE(table_probe(TableState::kAmplifiedBell, 2.0, 20));
  EXPECT_FALSE(table_probe(TableState::kNoon, 2.5, 20));
  EXPECT_FALSE(table_probe(TableState::kTwinFock, 3.0, 20));
}

TEST(Fisher, CramerRaoOrderingNoon) {
  // Photon counting after a second beam splitter never beats the QFI.
  const auto noon = fock::make_noon(2, 3);
  const ProbabilityCurve curve = [&](double phi) {
    const auto shifted = fock::apply_phase(noon, phi, fock::PhaseConvention::kRelativeHalf);
    const auto out = fock::apply_beam_splitter(shifted);
    const Eigen::MatrixXd p = fock::photon_number_distribution(out);
    return Eigen::VectorXd(p.reshaped());
  };
  const double f = classical_fisher(curve, 0.4).value;
  EXPECT_LE(f, qfi_pure(noon, Generator::kHalfDifference) + 1e-6);
}
