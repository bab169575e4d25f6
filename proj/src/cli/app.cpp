#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qmetro/cli.hpp"
#include "qmetro/error.hpp"

namespace qmetro::cli {
namespace {

const std::map<std::string, Format> kFormats{{"csv", Format::kCsv}, {"json", Format::kJson}};
const std::map<std::string, protocol::Engine> kEngines{{"gaussian", protocol::Engine::kGaussian},
                                                        {"fock", protocol::Engine::kFock},
                                                        {"both", protocol::Engine::kBoth}};

struct Common {
  std::string format = "csv";
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember(kFormats));
  cmd->add_option("--out", c.out, "Write to PATH instead of stdout");
}

// Writes `body` to --out or to `out`. Returns false if the file cannot be written.
bool emit(const Common& c, const std::string& body, std::ostream& out, std::ostream& err) {
  if (c.out.empty()) {
    out << body;
    return true;
  }
  std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
  if (!file || !(file << body) || !file.flush()) {
    err << "error: cannot write '" << c.out << "'\n";
    return false;
  }
  return true;
}

struct ProtocolArgs {
  std::optional<double> n_bar;
  std::optional<double> r;
  double phi = 0.0;
  std::optional<double> eta;
  std::optional<double> eta1;
  std::optional<double> eta2;
  std::optional<int> cutoff;
  std::string engine = "both";
};

struct SweepArgs {
  std::vector<double> n_bar;
  std::vector<double> n_bar_log;
  std::vector<double> n_bar_lin;
  std::vector<double> phi;
  std::vector<double> phi_lin;
  std::vector<double> eta;
};

std::vector<double> grid_from(const std::vector<double>& spec, bool log) {
  const double count = spec[2];
  if (count < 1.0 || count != std::floor(count)) throw DomainError("grid count must be a positive integer");
  return log ? log_grid(spec[0], spec[1], static_cast<int>(count))
             : linear_grid(spec[0], spec[1], static_cast<int>(count));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-light interferometry: probe statistics and phase-estimation protocol"};
  app.name("qmetro");
  app.require_subcommand(1);

  // table
  Common table_io;
  double table_n = 0.0;
  bool table_oracle = false;
  std::optional<int> table_cutoff;
  auto* table = app.add_subcommand("table", "Closed-form probe statistics, optionally checked in Fock space");
  table->add_option("--nbar", table_n, "Mean photon number")->required();
  table->add_flag("--oracle", table_oracle, "Recompute each row from an explicit Fock state");
  table->add_option("--cutoff", table_cutoff, "Fock cutoff per mode")->check(CLI::Range(2, 4096));
  add_common(table, table_io);

  // protocol
  Common proto_io;
  ProtocolArgs pa;
  auto* proto = app.add_subcommand("protocol", "One operating point through the selected engine(s)");
  auto* o_n = proto->add_option("--nbar", pa.n_bar, "Mean photons of the squeezed probe");
  auto* o_r = proto->add_option("--r", pa.r, "Squeeze parameter");
  o_n->excludes(o_r);
  o_r->excludes(o_n);
  proto->add_option("--phi", pa.phi, "Phase shift")->required();
  auto* o_eta = proto->add_option("--eta", pa.eta, "Transmission of both loss stages");
  auto* o_eta1 = proto->add_option("--eta1", pa.eta1, "Transmission before the anti-squeezer");
  auto* o_eta2 = proto->add_option("--eta2", pa.eta2, "Transmission before detection");
  o_eta->excludes(o_eta1)->excludes(o_eta2);
  o_eta1->excludes(o_eta);
  o_eta2->excludes(o_eta);
  proto->add_option("--cutoff", pa.cutoff, "Fock cutoff")->check(CLI::Range(2, 4096));
  proto->add_option("--engine", pa.engine, "gaussian, fock or both")->check(CLI::IsMember(kEngines));
  add_common(proto, proto_io);

  // sweep
  Common sweep_io;
  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Gaussian engine over an (n_bar, phi, eta) grid");
  auto* s_n = sweep->add_option("--nbar", sa.n_bar, "Comma-separated n_bar values")->delimiter(',');
  auto* s_nl = sweep->add_option("--nbar-log", sa.n_bar_log, "START,STOP,COUNT log-spaced")
                   ->delimiter(',')
                   ->expected(3);
  auto* s_nn = sweep->add_option("--nbar-lin", sa.n_bar_lin, "START,STOP,COUNT evenly spaced")
                   ->delimiter(',')
                   ->expected(3);
  s_n->excludes(s_nl)->excludes(s_nn);
  s_nl->excludes(s_n)->excludes(s_nn);
  s_nn->excludes(s_n)->excludes(s_nl);
  auto* s_p = sweep->add_option("--phi", sa.phi, "Comma-separated phases")->delimiter(',');
  auto* s_pl = sweep->add_option("--phi-lin", sa.phi_lin, "START,STOP,COUNT evenly spaced")
                   ->delimiter(',')
                   ->expected(3);
  s_p->excludes(s_pl);
  s_pl->excludes(s_p);
  sweep->add_option("--eta", sa.eta, "Comma-separated transmissions")->delimiter(',')->required();
  add_common(sweep, sweep_io);

  // validate
  std::string level = "quick";
  std::string validate_out;
  auto* validate = app.add_subcommand("validate", "Run the built-in consistency checks");
  validate->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  validate->add_option("--out", validate_out, "Write the JSON report to PATH");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::ostringstream body;
    if (*table) {
      write_table(body, evaluate_table(table_n, table_oracle, table_cutoff), kFormats.at(table_io.format));
      return emit(table_io, body.str(), out, err) ? kExitOk : kExitUsage;
    }
    if (*proto) {
      if (!pa.n_bar && !pa.r) {
        err << "error: one of --nbar, --r is required\n";
        return kExitUsage;
      }
      if (pa.eta1.has_value() != pa.eta2.has_value()) {
        err << "error: --eta1 and --eta2 must be given together\n";
        return kExitUsage;
      }
      const double e1 = pa.eta ? *pa.eta : pa.eta1.value_or(1.0);
      const double e2 = pa.eta ? *pa.eta : pa.eta2.value_or(1.0);
      const auto cfg = protocol::make_config(pa.n_bar, pa.r, pa.phi, e1, e2, pa.cutoff, kEngines.at(pa.engine));
      if (cfg.phi == 0.0 && (e1 < 1.0 || e2 < 1.0)) {
        throw SingularOperatingPoint(
            "phi = 0 with eta < 1 is a singular operating point (the signal slope vanishes, so the "
            "phase error diverges); choose phi > 0 or eta = 1");
      }
      const auto report = protocol::run(cfg);
      write_protocol(body, report, kFormats.at(proto_io.format));
      if (!report.fock_error.empty()) err << "warning: fock engine: " << report.fock_error << '\n';
      return emit(proto_io, body.str(), out, err) ? kExitOk : kExitUsage;
    }
    if (*sweep) {
      SweepSpec spec;
      if (!sa.n_bar.empty()) {
        spec.n_bar = sa.n_bar;
      } else if (!sa.n_bar_log.empty()) {
        spec.n_bar = grid_from(sa.n_bar_log, true);
      } else if (!sa.n_bar_lin.empty()) {
        spec.n_bar = grid_from(sa.n_bar_lin, false);
      } else {
        err << "error: one of --nbar, --nbar-log, --nbar-lin is required\n";
        return kExitUsage;
      }
      if (!sa.phi.empty()) {
        spec.phi = sa.phi;
      } else if (!sa.phi_lin.empty()) {
        spec.phi = grid_from(sa.phi_lin, false);
      } else {
        err << "error: one of --phi, --phi-lin is required\n";
        return kExitUsage;
      }
      spec.eta = sa.eta;
      spec.format = kFormats.at(sweep_io.format);
      write_sweep(body, evaluate_sweep(spec), kFormats.at(sweep_io.format));
      return emit(sweep_io, body.str(), out, err) ? kExitOk : kExitUsage;
    }
    if (*validate) {
      ValidationOptions options;
      options.level = level == "full" ? ValidationLevel::kFull : ValidationLevel::kQuick;
      const auto report = run_validation(options);
      write_validation(body, report);
      for (const auto& c : report.checks) {
        if (!c.passed) err << "FAILED " << c.name << ": " << c.detail << '\n';
      }
      Common io;
      io.out = validate_out;
      if (!emit(io, body.str(), out, err)) return kExitUsage;
      return report.passed() ? kExitOk : kExitValidationFailure;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidationFailure;
  }
  return kExitUsage;
}

}  // namespace qmetro::cli
