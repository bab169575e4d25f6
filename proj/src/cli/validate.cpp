#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include <json.hpp>

#include "qmetro/cli.hpp"
#include "qmetro/error.hpp"
#include "qmetro/fock.hpp"
#include "qmetro/gaussian.hpp"

namespace qmetro::cli {
namespace {

using Json = nlohmann::ordered_json;

double rel(double value, double reference) {
  const double d = std::abs(value - reference);
  return std::abs(reference) > 1e-12 ? d / std::abs(reference) : d;
}

double rel(std::complex<double> value, std::complex<double> reference) {
  const double d = std::abs(value - reference);
  return std::abs(reference) > 1e-12 ? d / std::abs(reference) : d;
}

class CheckBuilder {
 public:
  CheckBuilder(std::string name, double tolerance) {
    check_.name = std::move(name);
    check_.tolerance = tolerance;
  }
  void observe(double deviation, const std::string& where) {
    if (!(deviation <= check_.worst) || std::isnan(deviation)) {
      check_.worst = deviation;
      worst_at_ = where;
    }
  }
  void fail(const std::string& why) { errors_ += (errors_.empty() ? "" : "; ") + why; }
  Check finish() {
    check_.passed = errors_.empty() && check_.worst <= check_.tolerance;
    check_.detail = errors_.empty() ? "worst at " + worst_at_ : errors_;
    return check_;
  }

 private:
  Check check_;
  std::string worst_at_ = "-";
  std::string errors_;
};

std::string at(std::initializer_list<std::pair<const char*, double>> params) {
  std::string s;
  for (const auto& [k, v] : params) {
    if (!s.empty()) s += ' ';
    s += std::string(k) + '=' + format_real(v);
  }
  return s;
}

Check table_oracle_check(ValidationLevel level) {
  CheckBuilder b("table-oracle", 1e-8);
  (void)level;
  const std::vector<double> grid{1.0, 2.0, 4.0};
  for (double n : grid) {
    for (const auto& e : evaluate_table(n, true, std::nullopt)) {
      if (e.state == correlations::TableState::kEcs) continue;  // separate tolerance below
      if (e.status == "oracle-error") b.fail(std::string(correlations::to_string(e.state)) + ": " + e.note);
      if (e.max_rel_dev) {
        b.observe(*e.max_rel_dev, std::string(correlations::to_string(e.state)) + " " + at({{"n_bar", n}}));
      }
    }
  }
  return b.finish();
}

Check ecs_oracle_check() {
  CheckBuilder b("table-oracle-ecs", 1e-3);
  const double n = 20.0;
  const auto row = correlations::table_row(correlations::TableState::kEcs, n);
  const auto probe = correlations::table_probe(correlations::TableState::kEcs, n, 60);
  b.observe(table_deviation(row, correlations::probe_statistics(*probe)), at({{"n_bar", n}, {"cutoff", 60}}));
  return b.finish();
}

Check table_consistency_check() {
  CheckBuilder b("table-rows-satisfy-path-symmetric-qfi", 1e-12);
  for (double n : {1.0, 2.0, 4.0, 20.0, 150.0}) {
    for (auto state : correlations::table_states()) {
      if (state == correlations::TableState::kEcs && std::exp(-n) >= 1e-6) continue;
      const auto row = correlations::table_row(state, n);
      const double symmetric = correlations::qfi_path_symmetric(n, row.q, row.j);
      b.observe(rel(symmetric, row.qfi), std::string(correlations::to_string(state)) + " " + at({{"n_bar", n}}));
    }
  }
  return b.finish();
}

Check lossless_check(ValidationLevel level) {
  CheckBuilder b("lossless-signal-variance-vs-fock", 1e-8);
  std::vector<double> ns{1.0};
  std::vector<double> phis{0.1, std::numbers::pi / 4.0};
  if (level == ValidationLevel::kFull) {
    ns = {0.5, 1.0, 2.0};
    phis.push_back(std::numbers::pi / 2.0);
  }
  for (double n : ns) {
    for (double phi : phis) {
      const auto where = at({{"n_bar", n}, {"phi", phi}});
      try {
        // Sized for the larger of the probe and the output (4 n (n + 1) sin^2 phi photons);
        // a 1e-20 tail keeps amplitude errors near 1e-10.
        const int cutoff = protocol::cutoff_for_mean(std::max(n, gaussian::lossless_signal(n, phi)), 4096, 1e-20);
        const auto cfg = protocol::make_config(n, std::nullopt, phi, 1.0, 1.0, cutoff);
        const auto m = fock::observable_moments(protocol::fock_output_state(cfg));
        b.observe(rel(m.mean_n[0], gaussian::lossless_signal(n, phi)), where);
        b.observe(rel(m.variance_n[0], gaussian::lossless_variance(n, phi)), where);
      } catch (const std::exception& e) {
        b.fail(where + ": " + e.what());
      }
    }
  }
  return b.finish();
}

}  // namespace

int engine_cutoff(double r, double phi, double eta1, double eta2) {
  const double out = gaussian::protocol_moments(r, phi, eta1, eta2).m_n;
  return std::max(kEngineCutoff, protocol::cutoff_for_mean(std::max(gaussian::mean_photons(r), out), 512));
}

namespace {

Check engine_check(ValidationLevel level) {
  CheckBuilder b("gaussian-vs-fock-moments", 1e-6);
  std::vector<double> rs{0.5};
  std::vector<double> phis{0.05, 0.3};
  std::vector<std::pair<double, double>> etas{{0.95, 0.95}, {0.8, 0.8}};
  if (level == ValidationLevel::kFull) {
    rs = {0.2, 0.5, 0.8814};
    phis = {0.05, 0.3, 1.0};
    etas = {{0.95, 0.95}, {0.8, 0.8}, {1.0, 0.9}, {0.9, 1.0}, {0.95, 0.8}};
  }
  for (double r : rs) {
    for (double phi : phis) {
      for (auto [e1, e2] : etas) {
        const auto where = at({{"r", r}, {"phi", phi}, {"eta1", e1}, {"eta2", e2}});
        try {
          const auto cfg = protocol::make_config(std::nullopt, r, phi, e1, e2, engine_cutoff(r, phi, e1, e2));
          const auto g = gaussian::protocol_moments(r, phi, e1, e2);
          const auto f = fock::observable_moments(protocol::fock_output_state(cfg));
          const double g_n2 = gaussian::variance_number(g) + g.m_n * g.m_n;
          b.observe(rel(f.mean_n[0], g.m_n), where);
          b.observe(rel(f.mean_n2[0], g_n2), where);
          b.observe(rel(f.mean_a2[0], g.m_aa), where);
        } catch (const std::exception& e) {
          b.fail(where + ": " + e.what());
        }
      }
    }
  }
  return b.finish();
}

Check phase_error_check(const PhaseErrorSquared& phase_error_sq) {
  CheckBuilder b("closed-form-phase-error-vs-moment-route", 1e-10);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> log_n(-1.0, 4.0);
  std::uniform_real_distribution<double> phi_dist(1e-3, 1.5);
  std::uniform_real_distribution<double> eta_dist(0.5, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double n = std::pow(10.0, log_n(rng));
    const double phi = phi_dist(rng);
    const double eta = eta_dist(rng);
    const auto m = gaussian::protocol_moments(gaussian::squeeze_parameter(n), phi, eta, eta);
    const double routed =
        std::sqrt(gaussian::variance_number(m)) / std::abs(gaussian::signal_slope(n, phi, eta));
    const double transcribed = std::sqrt(phase_error_sq(n, phi, eta));
    b.observe(rel(transcribed, routed), at({{"n_bar", n}, {"phi", phi}, {"eta", eta}}));
  }
  return b.finish();
}

Check signal_check() {
  CheckBuilder b("closed-form-signal-vs-moment-route", 1e-10);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_n(-1.0, 4.0);
  std::uniform_real_distribution<double> phi_dist(1e-3, 1.5);
  std::uniform_real_distribution<double> eta_dist(0.5, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double n = std::pow(10.0, log_n(rng));
    const double phi = phi_dist(rng);
    const double eta = eta_dist(rng);
    const auto m = gaussian::protocol_moments(gaussian::squeeze_parameter(n), phi, eta, eta);
    b.observe(rel(m.m_n, gaussian::signal(n, phi, eta)), at({{"n_bar", n}, {"phi", phi}, {"eta", eta}}));
  }
  return b.finish();
}

Check headline_check() {
  CheckBuilder b("headline-snl-ratios", 0.1);
  b.observe(rel(gaussian::snl_ratio(1.5e4, 1e-3, 0.99), 5.0), "n_bar=15000 eta=0.99");
  b.observe(rel(gaussian::snl_ratio(2e4, 1e-3, 0.95), 3.0), "n_bar=20000 eta=0.95");
  return b.finish();
}

Check qcrb_check() {
  CheckBuilder b("qcrb-saturation-photon-counting", 0.01);
  for (double n : {0.5, 1.0}) {
    const auto base = protocol::make_config(n, std::nullopt, 0.01, 1.0, 1.0);
    const auto est = correlations::classical_fisher(
        [&](double phi) {
          auto cfg = base;
          cfg.phi = phi;
          const Eigen::MatrixXd p = fock::photon_number_distribution(protocol::fock_output_state(cfg));
          return Eigen::VectorXd(p.reshaped());
        },
        0.01);
    b.observe(rel(est.value, 8.0 * n * (n + 1.0)), at({{"n_bar", n}}));
  }
  return b.finish();
}

Check projection_check() {
  CheckBuilder b("two-photon-projection", 1e-10);
  const int cutoff = 40;
  const auto sq = fock::make_squeezed_vacuum(0.5, 0.0, cutoff);
  const auto projected = fock::project_total_photon(fock::tensor(sq, sq), 2);
  Eigen::VectorXcd target = Eigen::VectorXcd::Zero(projected.dim());
  target[2 * (cutoff + 1)] = std::numbers::sqrt2 / 2.0;
  target[2] = std::numbers::sqrt2 / 2.0;
  const double f = fock::fidelity(projected, fock::PureState(2, cutoff, target));
  b.observe(1.0 - f, "r=0.5");
  return b.finish();
}

Check header_check() {
  CheckBuilder b("golden-csv-headers", 0.0);
  auto join = [](std::span<const std::string_view> cols) {
    std::string s;
    for (auto c : cols) s += (s.empty() ? "" : ",") + std::string(c);
    return s;
  };
  const std::string sweep = "n_bar,phi,eta,signal,variance,delta_phi,snl,snl_ratio";
  const std::string table = "state,n_bar,q,j,qfi,status,oracle_q,oracle_j,oracle_qfi,max_rel_dev,note";
  const std::string proto =
      "n_bar,r,phi,eta1,eta2,engine,cutoff,gaussian_signal,gaussian_variance,gaussian_delta_phi,"
      "fock_signal,fock_variance,fock_delta_phi,delta_phi_limit,snl_single_mode,snl_ratio,"
      "signal_abs_dev,signal_rel_dev,variance_abs_dev,variance_rel_dev,delta_phi_rel_dev,"
      "trace_deficit,note";
  if (join(sweep_columns()) != sweep) b.fail("sweep header changed");
  if (join(table_columns()) != table) b.fail("table header changed");
  if (join(protocol_columns()) != proto) b.fail("protocol header changed");
  return b.finish();
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ValidationReport run_validation(const ValidationOptions& options) {
  ValidationReport report;
  report.level = options.level;
  const PhaseErrorSquared pe_sq =
      options.phase_error_sq ? options.phase_error_sq : [](double n, double phi, double eta) {
        const double v = gaussian::phase_error(n, phi, eta).value;
        return v * v;
      };
  auto guarded = [&report](const char* name, auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const std::exception& e) {
      report.checks.push_back(Check{name, false, 0.0, 0.0, e.what()});
    }
  };
  guarded("golden-csv-headers", header_check);
  guarded("table-rows-satisfy-path-symmetric-qfi", table_consistency_check);
  guarded("table-oracle", [&] { return table_oracle_check(options.level); });
  guarded("lossless-signal-variance-vs-fock", [&] { return lossless_check(options.level); });
  guarded("gaussian-vs-fock-moments", [&] { return engine_check(options.level); });
  guarded("closed-form-signal-vs-moment-route", signal_check);
  guarded("closed-form-phase-error-vs-moment-route", [&] { return phase_error_check(pe_sq); });
  guarded("headline-snl-ratios", headline_check);
  if (options.level == ValidationLevel::kFull) {
    guarded("table-oracle-ecs", ecs_oracle_check);
    guarded("qcrb-saturation-photon-counting", qcrb_check);
    guarded("two-photon-projection", projection_check);
  }
  return report;
}

void write_validation(std::ostream& os, const ValidationReport& report) {
  Json doc;
  doc["level"] = report.level == ValidationLevel::kQuick ? "quick" : "full";
  doc["passed"] = report.passed();
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"passed", c.passed},
                          {"worst", c.worst},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
  }
  doc["checks"] = std::move(checks);
  os << doc.dump(2) << '\n';
}

}  // namespace qmetro::cli
