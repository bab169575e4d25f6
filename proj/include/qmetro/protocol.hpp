#pragma once

// Squeeze -> phase -> loss(eta1) -> anti-squeeze -> loss(eta2) -> intensity
// readout, run through the Gaussian moment engine, the Fock density-matrix
// oracle, or both.

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "qmetro/fock.hpp"
#include "qmetro/gaussian.hpp"

namespace qmetro::protocol {

enum class Engine { kGaussian, kFock, kBoth };

std::string_view to_string(Engine engine);
std::optional<Engine> engine_from_string(std::string_view name);

struct ProtocolConfig {
  double n_bar = 1.0;  // sinh^2 r
  double r = 0.0;
  double phi = 0.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  std::optional<int> cutoff;  // Fock engine only; default_cutoff(config) when empty
  Engine engine = Engine::kBoth;

  bool equal_etas() const { return eta1 == eta2; }
  // Canonical text form; identical configs give identical keys.
  std::string key() const;
};

// Exactly one of n_bar, r is normally given; when both are, they must satisfy
// n_bar = sinh^2 r within 1e-10 (relative).
ProtocolConfig make_config(std::optional<double> n_bar, std::optional<double> r, double phi,
                           double eta1, double eta2, std::optional<int> cutoff = std::nullopt,
                           Engine engine = Engine::kBoth);

inline constexpr int kMaxDefaultCutoff = 128;
inline constexpr double kFockTraceBound = 1e-8;
inline constexpr double kDefaultStep = 1e-4;
inline constexpr double kDefaultTailBound = 1e-12;

// Smallest even cutoff >= 8 (m + 1), raised in steps of 8 until a squeezed
// vacuum with mean m has tail weight < tail_bound beyond it, capped.
int cutoff_for_mean(double mean_photons, int cap = kMaxDefaultCutoff,
                    double tail_bound = kDefaultTailBound);

// cutoff_for_mean(n_bar). The QMETRO_DEFAULT_CUTOFF environment variable
// overrides the policy.
int default_cutoff(double n_bar);
// Same policy sized for the larger of the probe and the output mean photon
// number (the anti-squeezer amplifies up to 4 n (n + 1)).
int default_cutoff(const ProtocolConfig& config);

struct ProtocolResult {
  gaussian::MomentVector moments;
  double signal = 0.0;
  double variance = 0.0;
  std::optional<gaussian::PhaseError> phase_error;
  std::string phase_error_note;  // why phase_error is empty, if it is

  // Fock engine diagnostics.
  int cutoff = 0;
  double trace_deficit = 0.0;
  double fourth_moment = 0.0;  // <a^dag a^dag a a>

  // Gaussian engine, equal etas: relative disagreement between the map
  // composition and the closed forms (signal and phase error).
  std::optional<double> closed_form_deviation;
};

ProtocolResult run_gaussian(const ProtocolConfig& config);
ProtocolResult run_fock(const ProtocolConfig& config);

// Output density matrix of the Fock pipeline. Truncation failures name the stage.
fock::MixedState fock_output_state(const ProtocolConfig& config);

// phi -> (signal, variance)
using SignalCurve = std::function<std::pair<double, double>(double phi)>;

// Delta phi = sqrt(Var) / |dS/dphi| with a central-difference slope; throws
// SingularOperatingPoint when the slope vanishes.
double error_propagation(const SignalCurve& curve, double phi, double step = kDefaultStep);

struct EngineValues {
  double signal = 0.0;
  double variance = 0.0;
  std::optional<double> phase_error;
  bool phase_error_limit = false;
  std::string phase_error_note;
};

struct Deviation {
  double absolute = 0.0;
  double relative = 0.0;
};

struct ComparisonReport {
  ProtocolConfig config;
  std::optional<EngineValues> gaussian;
  std::optional<EngineValues> fock;
  std::string fock_error;  // set when the Fock engine was requested but failed
  int cutoff = 0;
  double trace_deficit = 0.0;
  std::optional<double> closed_form_deviation;
  double snl = 0.0;  // single-mode convention 1/sqrt(4 n)
  std::optional<double> snl_ratio;

  std::optional<Deviation> signal_deviation() const;
  std::optional<Deviation> variance_deviation() const;
  std::optional<Deviation> phase_error_deviation() const;
};

ComparisonReport run(const ProtocolConfig& config);

Deviation deviation(double reference, double value);

}  // namespace qmetro::protocol
