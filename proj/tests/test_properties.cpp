// Randomized property suites. Every suite draws >= 200 cases from a fixed seed.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle/dense.hpp"
#include "qmetro/correlations.hpp"
#include "qmetro/fock.hpp"
#include "qmetro/gaussian.hpp"

using namespace qmetro;
using fock::Complex;

namespace {

constexpr int kCases = 200;
constexpr std::uint64_t kSeed = 0x5eed2024;

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex gaussian() {
    std::normal_distribution<double> n;
    return {n(rng_), n(rng_)};
  }

  // Random normalized 2-mode state supported on na + nb <= support.
  fock::PureState two_mode(int cutoff, int support) {
    const int l = cutoff + 1;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(l * l);
    for (int na = 0; na < l; ++na)
      for (int nb = 0; na + nb <= support && nb < l; ++nb) v[na * l + nb] = gaussian();
    v.normalize();
    return fock::PureState(2, cutoff, v);
  }

  fock::PureState one_mode(int cutoff, int support) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cutoff + 1);
    for (int n = 0; n <= support; ++n) v[n] = gaussian();
    v.normalize();
    return fock::PureState(1, cutoff, v);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TEST(Property, KrausTracePreservation) {
  Random rnd(kSeed);
  for (int i = 0; i < kCases; ++i) {
    const int modes = rnd.integer(1, 2);
    const int cutoff = rnd.integer(2, 7);
    const double eta = rnd.uniform(0.0, 1.0);
    const auto psi = modes == 1 ? rnd.one_mode(cutoff, cutoff) : rnd.two_mode(cutoff, cutoff);
    const int mode = modes == 1 ? 0 : rnd.integer(0, 1);
    const auto out = fock::apply_loss(psi, eta, mode);
    SCOPED_TRACE("case " + std::to_string(i));
    EXPECT_NEAR(out.trace(), 1.0, 1e-12);
    EXPECT_LT((out.matrix() - out.matrix().adjoint()).norm(), 1e-13);
    EXPECT_GT(out.min_eigenvalue(), -1e-12);
    // mean photon number of the damped mode scales by eta
    const double before = fock::expectation(psi, fock::Observable::kN, mode).real();
    const double after = fock::expectation(out, fock::Observable::kN, mode).real();
    EXPECT_NEAR(after, eta * before, 1e-11);
  }
}

TEST(Property, KrausMatchesDenseOracle) {
  Random rnd(kSeed + 1);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = rnd.integer(1, 4);
    const double eta = rnd.uniform(0.0, 1.0);
    const int mode = rnd.integer(0, 1);
    const auto rho = fock::to_density(rnd.two_mode(cutoff, cutoff));
    const auto out = fock::apply_loss(rho, eta, mode);
    const Eigen::MatrixXcd ref = oracle::loss(rho.matrix(), eta, cutoff + 1, 2, mode);
    EXPECT_LT((out.matrix() - ref).norm(), 1e-12) << "case " << i;
  }
}

TEST(Property, BeamSplitterConservesPhotons) {
  Random rnd(kSeed + 2);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = rnd.integer(2, 10);
    const auto psi = rnd.two_mode(cutoff, cutoff);  // all sectors fit in the box
    const auto out = fock::apply_beam_splitter(psi);
    SCOPED_TRACE("case " + std::to_string(i));
    EXPECT_NEAR(out.norm_squared(), 1.0, 1e-12);
    const Eigen::MatrixXd p_in = fock::photon_number_distribution(psi);
    const Eigen::MatrixXd p_out = fock::photon_number_distribution(out);
    for (int total = 0; total <= cutoff; ++total) {
      double a = 0.0;
      double b = 0.0;
      for (int na = 0; na <= total; ++na) {
        a += p_in(na, total - na);
        b += p_out(na, total - na);
      }
      EXPECT_NEAR(a, b, 1e-12) << "N=" << total;
    }
    const double n_in = fock::expectation(psi, fock::Observable::kN, 0).real() +
                        fock::expectation(psi, fock::Observable::kN, 1).real();
    const double n_out = fock::expectation(out, fock::Observable::kN, 0).real() +
                         fock::expectation(out, fock::Observable::kN, 1).real();
    EXPECT_NEAR(n_in, n_out, 1e-11);
  }
}

TEST(Property, BeamSplitterMatchesDenseOracle) {
  Random rnd(kSeed + 3);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = rnd.integer(1, 4);
    const auto psi = rnd.two_mode(cutoff, 2 * cutoff);  // includes sectors that leak
    Eigen::VectorXcd ref = oracle::beam_splitter(psi.amplitudes(), cutoff + 1);
    try {
      const auto out = fock::apply_beam_splitter(psi);
      EXPECT_LT((out.amplitudes() - ref).norm(), 1e-12) << "case " << i;
    } catch (const std::exception&) {
      // Leaked weight above the library's bound: the oracle must agree it is large.
      EXPECT_GT(1.0 - ref.squaredNorm(), 1e-6) << "case " << i;
    }
  }
}

TEST(Property, SqueezeRoundTrip) {
  Random rnd(kSeed + 4);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = 100;
    const double r = rnd.uniform(-0.8, 0.8);
    const auto psi = rnd.one_mode(cutoff, rnd.integer(0, 6));
    const auto back = fock::apply_squeeze(fock::apply_squeeze(psi, r), -r);
    EXPECT_GE(fock::fidelity(back, psi), 1.0 - 1e-8) << "case " << i << " r=" << r;
  }
}

TEST(Property, SqueezeMatchesDenseOracle) {
  Random rnd(kSeed + 5);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = 64;
    const double r = rnd.uniform(-0.6, 0.6);
    const auto psi = rnd.one_mode(cutoff, rnd.integer(0, 5));
    const auto out = fock::apply_squeeze(psi, r);
    const Eigen::VectorXcd ref = oracle::squeeze(psi.amplitudes(), r);
    EXPECT_LT((out.amplitudes() - ref).norm(), 1e-10) << "case " << i << " r=" << r;
  }
}

TEST(Property, CauchySchwarzOnJ) {
  Random rnd(kSeed + 6);
  int evaluated = 0;
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = rnd.integer(2, 8);
    auto psi = rnd.two_mode(cutoff, cutoff);
    if (rnd.integer(0, 1) == 1) psi = fock::apply_beam_splitter(psi);
    const auto stats = correlations::probe_statistics(psi);
    if (!stats.j) continue;
    ++evaluated;
    EXPECT_LE(std::abs(*stats.j), 1.0 + 1e-10) << "case " << i;
    EXPECT_GE(stats.qfi, -1e-10);
  }
  EXPECT_GE(evaluated, kCases * 9 / 10);
}

TEST(Property, PathSymmetricQfiForms) {
  Random rnd(kSeed + 7);
  for (int i = 0; i < kCases; ++i) {
    const int cutoff = rnd.integer(2, 8);
    const int l = cutoff + 1;
    // psi(na, nb) = psi(nb, na) makes both arms statistically identical.
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(l * l);
    for (int na = 0; na < l; ++na) {
      for (int nb = 0; nb <= na; ++nb) {
        const Complex c = rnd.gaussian();
        v[na * l + nb] = c;
        v[nb * l + na] = c;
      }
    }
    v.normalize();
    const auto stats = correlations::probe_statistics(fock::PureState(2, cutoff, v));
    ASSERT_NEAR(stats.mean_n_a, stats.mean_n_b, 1e-10);
    ASSERT_TRUE(stats.q_a && stats.j);
    const double symmetric = correlations::qfi_path_symmetric(stats.n_bar(), *stats.q_a, *stats.j);
    EXPECT_NEAR(symmetric, stats.qfi, 1e-8 * std::max(1.0, stats.qfi)) << "case " << i;
  }
}

TEST(Property, GaussianMapsStayPhysical) {
  Random rnd(kSeed + 8);
  for (int i = 0; i < kCases; ++i) {
    const double r = rnd.uniform(0.0, 3.0);
    const double phi = rnd.uniform(-3.2, 3.2);
    const double e1 = rnd.uniform(0.0, 1.0);
    const double e2 = rnd.uniform(0.0, 1.0);
    const auto v = gaussian::protocol_moments(r, phi, e1, e2);
    EXPECT_TRUE(v.is_physical()) << "case " << i;
    EXPECT_GE(gaussian::variance_number(v), 0.0);
  }
}

TEST(Property, PhaseErrorTranscriptionConsistency) {
  Random rnd(kSeed + 9);
  for (int i = 0; i < kCases; ++i) {
    const double n = std::pow(10.0, rnd.uniform(-1.0, 4.0));
    const double phi = rnd.uniform(1e-3, 1.5);
    const double eta = rnd.uniform(0.5, 1.0);
    const auto m = gaussian::protocol_moments(gaussian::squeeze_parameter(n), phi, eta, eta);
    const double routed =
        std::sqrt(gaussian::variance_number(m)) / std::abs(gaussian::signal_slope(n, phi, eta));
    const double closed = gaussian::phase_error(n, phi, eta).value;
    EXPECT_NEAR(closed / routed, 1.0, 1e-10) << "n=" << n << " phi=" << phi << " eta=" << eta;
  }
}
