#pragma once

// Command-line surface: table, protocol, sweep, validate.
//
// Data files are deterministic: reals use shortest round-trip formatting,
// metadata goes in a single leading line starting with '#', and column
// names/order are fixed (see the *_columns() functions).

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmetro/correlations.hpp"
#include "qmetro/protocol.hpp"

namespace qmetro::cli {

enum class Format { kCsv, kJson };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;

// Shortest decimal string that parses back to the same double.
std::string format_real(double x);

// ---- table ---------------------------------------------------------------

struct TableEntry {
  correlations::TableState state{};
  double n_bar = 0.0;
  std::optional<correlations::TableRow> row;  // empty when the closed form's premise fails
  std::optional<correlations::ProbeStatistics> oracle;
  std::optional<double> max_rel_dev;
  std::string status;  // closed-form | ok | formula-only | not-constructible | invalid | oracle-error
  std::string note;
};

std::vector<TableEntry> evaluate_table(double n_bar, bool oracle, std::optional<int> cutoff);
// Cutoff used for table oracles when none is given.
int default_table_cutoff(double n_bar);
// Largest relative deviation over (Q_a, Q_b, J, QFI); absolute when the closed value is 0.
double table_deviation(const correlations::TableRow& row,
                       const correlations::ProbeStatistics& stats);

std::span<const std::string_view> table_columns();
void write_table(std::ostream& os, const std::vector<TableEntry>& entries, Format format);

// ---- protocol ------------------------------------------------------------

std::span<const std::string_view> protocol_columns();
void write_protocol(std::ostream& os, const protocol::ComparisonReport& report, Format format);

// ---- sweep ---------------------------------------------------------------

struct SweepSpec {
  std::vector<double> n_bar;
  std::vector<double> phi;
  std::vector<double> eta;
  Format format = Format::kCsv;
  std::optional<std::string> out;
};

struct SweepRow {
  double n_bar = 0.0;
  double phi = 0.0;
  double eta = 0.0;
  double signal = 0.0;
  double variance = 0.0;
  double delta_phi = 0.0;
  double snl = 0.0;
  double snl_ratio = 0.0;
};

std::vector<double> log_grid(double start, double stop, int count);
std::vector<double> linear_grid(double start, double stop, int count);

// Throws DomainError when an axis is empty, not strictly increasing, or
// contains an out-of-range or singular operating point.
void check_sweep(const SweepSpec& spec);
// Rows ordered lexicographically by (n_bar, phi, eta).
std::vector<SweepRow> evaluate_sweep(const SweepSpec& spec);

std::span<const std::string_view> sweep_columns();
void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows, Format format);

// ---- validate ------------------------------------------------------------

enum class ValidationLevel { kQuick, kFull };

struct Check {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed deviation
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  ValidationLevel level = ValidationLevel::kQuick;
  std::vector<Check> checks;
  bool passed() const;
};

// Delta^2 phi(n_bar, phi, eta) as used by the closed-form identity check.
using PhaseErrorSquared = std::function<double(double n_bar, double phi, double eta)>;

struct ValidationOptions {
  ValidationLevel level = ValidationLevel::kQuick;
  // Defaults to gaussian::phase_error squared; injectable so the check can be
  // shown to catch a mistranscribed formula.
  PhaseErrorSquared phase_error_sq;
};

// Cutoff for cross-engine comparisons: kEngineCutoff, raised where the
// anti-squeezed output would overflow it.
inline constexpr int kEngineCutoff = 60;
int engine_cutoff(double r, double phi, double eta1, double eta2);

ValidationReport run_validation(const ValidationOptions& options);
void write_validation(std::ostream& os, const ValidationReport& report);

// ---- entry point -----------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmetro::cli
