#include "qmetro/protocol.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

#include "qmetro/error.hpp"

namespace qmetro::protocol {
namespace {

std::string shortest(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

double relative_gap(double value, double reference) {
  const double gap = std::abs(value - reference);
  return std::abs(reference) > 1e-12 ? gap / std::abs(reference) : gap;
}

// Probability weight of the squeezed vacuum with mean n above `cutoff`.
double squeezed_tail(double n, int cutoff) {
  if (n <= 0.0) return 0.0;
  const double r = std::asinh(std::sqrt(n));
  const double log_t2 = 2.0 * std::log(std::tanh(r));
  const double log_pref = -std::log(std::cosh(r));
  double tail = 0.0;
  for (int j = cutoff / 2 + 1; j < cutoff / 2 + 100000; ++j) {
    // |c_2j|^2 = (2j)! / (4^j (j!)^2) tanh^{2j} r / cosh r
    const double log_p = std::lgamma(2.0 * j + 1.0) - 2.0 * j * std::log(2.0) -
                         2.0 * std::lgamma(j + 1.0) + j * log_t2 + log_pref;
    const double p = std::exp(log_p);
    tail += p;
    if (p < 1e-18 * std::max(tail, 1e-300)) break;
    if (p < 1e-30) break;
  }
  return tail;
}

// Run one stage and name it if it overflows the truncation.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const TruncationError& e) {
    throw TruncationError(std::string("stage '") + name + "': " + e.what(), e.deficit());
  }
}

ProtocolResult result_from_state(const fock::MixedState& out) {
  ProtocolResult res;
  const auto moments = fock::observable_moments(out);
  res.moments.m_n = moments.mean_n[0];
  res.moments.m_aa = moments.mean_a2[0];
  res.moments.m_adad = std::conj(moments.mean_a2[0]);
  res.signal = moments.mean_n[0];
  res.variance = moments.variance_n[0];
  res.fourth_moment = fock::expectation(out, fock::Observable::kAdAdAA).real();
  res.cutoff = out.cutoff();
  res.trace_deficit = out.trace_deficit();
  return res;
}

}  // namespace

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::kGaussian:
      return "gaussian";
    case Engine::kFock:
      return "fock";
    case Engine::kBoth:
      return "both";
  }
  return "unknown";
}

std::optional<Engine> engine_from_string(std::string_view name) {
  for (Engine e : {Engine::kGaussian, Engine::kFock, Engine::kBoth}) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

std::string ProtocolConfig::key() const {
  std::string k = "n_bar=" + shortest(n_bar) + ";phi=" + shortest(phi) + ";eta1=" +
                  shortest(eta1) + ";eta2=" + shortest(eta2) + ";engine=" +
                  std::string(to_string(engine));
  if (cutoff) k += ";cutoff=" + std::to_string(*cutoff);
  return k;
}

ProtocolConfig make_config(std::optional<double> n_bar, std::optional<double> r, double phi,
                           double eta1, double eta2, std::optional<int> cutoff, Engine engine) {
  if (!n_bar && !r) throw DomainError("one of n_bar or r is required");
  ProtocolConfig cfg;
  if (n_bar && r) {
    const double implied = gaussian::mean_photons(*r);
    if (std::abs(implied - *n_bar) > 1e-10 * std::max(1.0, *n_bar)) {
      throw DomainError("n_bar " + shortest(*n_bar) + " inconsistent with r " + shortest(*r) +
                        " (sinh^2 r = " + shortest(implied) + ")");
    }
  }
  if (n_bar) {
    if (!(*n_bar > 0.0) || !std::isfinite(*n_bar)) throw DomainError("n_bar must be positive");
    cfg.n_bar = *n_bar;
    cfg.r = r ? *r : gaussian::squeeze_parameter(*n_bar);
  } else {
    if (!(*r > 0.0) || !std::isfinite(*r)) throw DomainError("r must be positive");
    cfg.r = *r;
    cfg.n_bar = gaussian::mean_photons(*r);
  }
  if (!std::isfinite(phi)) throw DomainError("phi must be finite");
  for (double eta : {eta1, eta2}) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
      throw DomainError("transmissivities must lie in [0, 1], got " + shortest(eta));
    }
  }
  if (cutoff && *cutoff < 2) throw DomainError("cutoff must be at least 2");
  cfg.phi = phi;
  cfg.eta1 = eta1;
  cfg.eta2 = eta2;
  cfg.cutoff = cutoff;
  cfg.engine = engine;
  return cfg;
}

namespace {

std::optional<int> cutoff_override() {
  const char* env = std::getenv("QMETRO_DEFAULT_CUTOFF");
  if (env == nullptr || *env == '\0') return std::nullopt;
  int value = 0;
  const std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 2) {
    throw DomainError("QMETRO_DEFAULT_CUTOFF must be an integer >= 2, got '" + std::string(text) +
                      "'");
  }
  return value;
}

}  // namespace

int cutoff_for_mean(double mean_photons, int cap, double tail_bound) {
  const double start = std::ceil(8.0 * (std::max(mean_photons, 0.0) + 1.0));
  if (start >= cap) return cap;
  int cutoff = static_cast<int>(start);
  if (cutoff % 2 != 0) ++cutoff;
  while (cutoff < cap && squeezed_tail(mean_photons, cutoff) > tail_bound) cutoff += 8;
  return std::min(cutoff, cap);
}

int default_cutoff(double n_bar) {
  if (auto v = cutoff_override()) return *v;
  return cutoff_for_mean(n_bar);
}

int default_cutoff(const ProtocolConfig& config) {
  if (auto v = cutoff_override()) return *v;
  const auto out = gaussian::protocol_moments(config.r, config.phi, config.eta1, config.eta2);
  return cutoff_for_mean(std::max(config.n_bar, out.m_n));
}

ProtocolResult run_gaussian(const ProtocolConfig& config) {
  ProtocolResult res;
  res.moments = gaussian::protocol_moments(config.r, config.phi, config.eta1, config.eta2);
  res.signal = res.moments.m_n;
  res.variance = gaussian::variance_number(res.moments);
  res.fourth_moment = 2.0 * res.moments.m_n * res.moments.m_n + std::norm(res.moments.m_aa);

  double dev = 0.0;
  if (config.equal_etas()) {
    dev = relative_gap(res.signal, gaussian::signal(config.n_bar, config.phi, config.eta1));
  }
  try {
    if (config.equal_etas()) {
      const double eta = config.eta1;
      res.phase_error = gaussian::phase_error(config.n_bar, config.phi, eta);
      if (!res.phase_error->analytic_limit) {
        const double slope = gaussian::signal_slope(config.n_bar, config.phi, eta);
        const double routed = std::sqrt(res.variance) / std::abs(slope);
        dev = std::max(dev, relative_gap(routed, res.phase_error->value));
      }
    } else {
      const double r = config.r;
      const double e1 = config.eta1;
      const double e2 = config.eta2;
      const double value = error_propagation(
          [&](double phi) {
            const auto m = gaussian::protocol_moments(r, phi, e1, e2);
            return std::pair{m.m_n, gaussian::variance_number(m)};
          },
          config.phi);
      res.phase_error = gaussian::PhaseError{value, false};
    }
  } catch (const SingularOperatingPoint& e) {
    res.phase_error_note = e.what();
  }
  if (config.equal_etas()) res.closed_form_deviation = dev;
  return res;
}

fock::MixedState fock_output_state(const ProtocolConfig& config) {
  const int cutoff = config.cutoff ? *config.cutoff : default_cutoff(config);
  const auto squeezed =
      stage("squeeze", [&] { return fock::apply_squeeze(fock::vacuum(1, cutoff), config.r); });
  const auto shifted =
      fock::apply_phase(squeezed, config.phi, fock::PhaseConvention::kSingleMode);
  fock::MixedState out = [&] {
    if (config.eta1 == 1.0 && config.eta2 == 1.0) {
      // No loss: stay pure until readout.
      return fock::to_density(
          stage("anti-squeeze", [&] { return fock::apply_squeeze(shifted, -config.r); }));
    }
    const auto damped = fock::apply_loss(shifted, config.eta1);
    const auto unsqueezed =
        stage("anti-squeeze", [&] { return fock::apply_squeeze(damped, -config.r); });
    return fock::apply_loss(unsqueezed, config.eta2);
  }();
  if (out.trace_deficit() > kFockTraceBound) {
    throw TruncationError("stage 'readout': trace deficit " + shortest(out.trace_deficit()) +
                              " at cutoff " + std::to_string(cutoff) + " exceeds " +
                              shortest(kFockTraceBound),
                          out.trace_deficit());
  }
  return out;
}

ProtocolResult run_fock(const ProtocolConfig& config) {
  ProtocolResult res = result_from_state(fock_output_state(config));
  try {
    ProtocolConfig probe = config;
    probe.cutoff = res.cutoff;
    const double value = error_propagation(
        [&](double phi) {
          probe.phi = phi;
          const auto r = result_from_state(fock_output_state(probe));
          return std::pair{r.signal, r.variance};
        },
        config.phi);
    res.phase_error = gaussian::PhaseError{value, false};
  } catch (const SingularOperatingPoint& e) {
    res.phase_error_note = e.what();
  }
  return res;
}

double error_propagation(const SignalCurve& curve, double phi, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  const auto [signal, variance] = curve(phi);
  const double s_hi = curve(phi + step).first;
  const double s_lo = curve(phi - step).first;
  const double s_hi2 = curve(phi + 0.5 * step).first;
  const double s_lo2 = curve(phi - 0.5 * step).first;
  const double d_full = (s_hi - s_lo) / (2.0 * step);
  const double d_half = (s_hi2 - s_lo2) / step;
  double slope = d_half;
  if (std::abs(d_half - d_full) > 1e-4 * std::abs(d_half)) {
    slope = (4.0 * d_half - d_full) / 3.0;
  }
  const double scale = std::max({1.0, std::abs(signal), std::abs(s_hi), std::abs(s_lo)});
  if (std::abs(slope) * step <= 1e-10 * scale) {
    throw SingularOperatingPoint("signal slope vanishes at phi = " + shortest(phi) +
                                 "; error propagation is undefined at this operating point");
  }
  return std::sqrt(std::max(variance, 0.0)) / std::abs(slope);
}

Deviation deviation(double reference, double value) {
  const double abs_dev = std::abs(value - reference);
  return {abs_dev, std::abs(reference) > 0.0 ? abs_dev / std::abs(reference) : abs_dev};
}

std::optional<Deviation> ComparisonReport::signal_deviation() const {
  if (!gaussian || !fock) return std::nullopt;
  return deviation(gaussian->signal, fock->signal);
}

std::optional<Deviation> ComparisonReport::variance_deviation() const {
  if (!gaussian || !fock) return std::nullopt;
  return deviation(gaussian->variance, fock->variance);
}

std::optional<Deviation> ComparisonReport::phase_error_deviation() const {
  if (!gaussian || !fock || !gaussian->phase_error || !fock->phase_error) return std::nullopt;
  return deviation(*gaussian->phase_error, *fock->phase_error);
}

ComparisonReport run(const ProtocolConfig& config) {
  ComparisonReport report;
  report.config = config;
  report.snl = 1.0 / std::sqrt(4.0 * config.n_bar);
  auto values_of = [](const ProtocolResult& r) {
    EngineValues v;
    v.signal = r.signal;
    v.variance = r.variance;
    if (r.phase_error) {
      v.phase_error = r.phase_error->value;
      v.phase_error_limit = r.phase_error->analytic_limit;
    }
    v.phase_error_note = r.phase_error_note;
    return v;
  };

  if (config.engine != Engine::kFock) {
    const ProtocolResult g = run_gaussian(config);
    report.gaussian = values_of(g);
    report.closed_form_deviation = g.closed_form_deviation;
  }
  if (config.engine != Engine::kGaussian) {
    try {
      const ProtocolResult f = run_fock(config);
      report.fock = values_of(f);
      report.cutoff = f.cutoff;
      report.trace_deficit = f.trace_deficit;
    } catch (const TruncationError& e) {
      if (config.engine == Engine::kFock) throw;
      report.fock_error = e.what();
      report.cutoff = config.cutoff ? *config.cutoff : default_cutoff(config);
    }
  }
  const auto& primary = report.gaussian ? report.gaussian : report.fock;
  if (primary && primary->phase_error && *primary->phase_error > 0.0) {
    report.snl_ratio = report.snl / *primary->phase_error;
  }
  return report;
}

}  // namespace qmetro::protocol
