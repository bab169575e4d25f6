#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qmetro/cli.hpp"
#include "qmetro/error.hpp"
#include "qmetro/gaussian.hpp"

namespace qmetro::cli {
namespace {

using Json = nlohmann::ordered_json;
using correlations::TableState;

constexpr std::array<std::string_view, 11> kTableColumns = {
    "state", "n_bar", "q", "j", "qfi", "status",
    "oracle_q", "oracle_j", "oracle_qfi", "max_rel_dev", "note",
};

constexpr std::array<std::string_view, 23> kProtocolColumns = {
    "n_bar",         "r",
    "phi",           "eta1",
    "eta2",          "engine",
    "cutoff",        "gaussian_signal",
    "gaussian_variance", "gaussian_delta_phi",
    "fock_signal",   "fock_variance",
    "fock_delta_phi", "delta_phi_limit",
    "snl_single_mode", "snl_ratio",
    "signal_abs_dev", "signal_rel_dev",
    "variance_abs_dev", "variance_rel_dev",
    "delta_phi_rel_dev", "trace_deficit",
    "note",
};

constexpr std::array<std::string_view, 8> kSweepColumns = {
    "n_bar", "phi", "eta", "signal", "variance", "delta_phi", "snl", "snl_ratio",
};

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_csv_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) os << ',';
    os << csv_field(fields[i]);
  }
  os << '\n';
}

void write_csv_header(std::ostream& os, std::span<const std::string_view> columns) {
  write_csv_line(os, std::vector<std::string>(columns.begin(), columns.end()));
}

std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

Json opt_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

// ---- table ---------------------------------------------------------------

int default_table_cutoff(double n_bar) { return protocol::default_cutoff(n_bar); }

double table_deviation(const correlations::TableRow& row,
                       const correlations::ProbeStatistics& stats) {
  auto gap = [](double reference, const std::optional<double>& value) {
    if (!value) return std::numeric_limits<double>::infinity();
    const double d = std::abs(*value - reference);
    return std::abs(reference) > 1e-12 ? d / std::abs(reference) : d;
  };
  return std::max({gap(row.q, stats.q_a), gap(row.q, stats.q_b), gap(row.j, stats.j),
                   gap(row.qfi, stats.qfi)});
}

std::vector<TableEntry> evaluate_table(double n_bar, bool oracle, std::optional<int> cutoff) {
  if (!(n_bar > 0.0) || !std::isfinite(n_bar)) {
    throw DomainError("n_bar must be positive (an empty probe has no statistics)");
  }
  const int oracle_cutoff = cutoff ? *cutoff : default_table_cutoff(n_bar);
  std::vector<TableEntry> entries;
  for (TableState state : correlations::table_states()) {
    TableEntry e;
    e.state = state;
    e.n_bar = n_bar;
    if (state == TableState::kTmsv) e.note = "n_bar is the per-mode mean sinh^2 r";
    if (state == TableState::kCaves) e.note = "alpha real, squeezing phase 0";
    try {
      e.row = correlations::table_row(state, n_bar);
    } catch (const DomainError& ex) {
      e.status = "invalid";
      e.note = ex.what();
      entries.push_back(std::move(e));
      continue;
    }
    if (state == TableState::kAmplifiedBell) {
      e.status = "formula-only";
      e.note = "no Fock construction; closed form only";
    } else if (!oracle) {
      e.status = "closed-form";
    } else {
      try {
        const auto probe = correlations::table_probe(state, n_bar, oracle_cutoff);
        if (!probe) {
          e.status = "not-constructible";
          e.note = "needs an integer (even for twin Fock) photon number";
        } else {
          e.oracle = correlations::probe_statistics(*probe);
          e.max_rel_dev = table_deviation(*e.row, *e.oracle);
          e.status = "ok";
        }
      } catch (const std::exception& ex) {
        e.status = "oracle-error";
        e.note = ex.what();
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::span<const std::string_view> table_columns() { return kTableColumns; }

void write_table(std::ostream& os, const std::vector<TableEntry>& entries, Format format) {
  const double n_bar = entries.empty() ? 0.0 : entries.front().n_bar;
  if (format == Format::kCsv) {
    os << "# qmetro table n_bar=" << format_real(n_bar) << " rows=" << entries.size() << '\n';
    write_csv_header(os, kTableColumns);
    for (const auto& e : entries) {
      std::vector<std::string> f;
      f.emplace_back(correlations::to_string(e.state));
      f.push_back(format_real(e.n_bar));
      f.push_back(e.row ? format_real(e.row->q) : "");
      f.push_back(e.row ? format_real(e.row->j) : "");
      f.push_back(e.row ? format_real(e.row->qfi) : "");
      f.push_back(e.status);
      f.push_back(e.oracle ? opt_real(e.oracle->q_a) : "");
      f.push_back(e.oracle ? opt_real(e.oracle->j) : "");
      f.push_back(e.oracle ? format_real(e.oracle->qfi) : "");
      f.push_back(opt_real(e.max_rel_dev));
      f.push_back(e.note);
      write_csv_line(os, f);
    }
    return;
  }
  Json doc;
  doc["meta"] = {{"command", "table"}, {"n_bar", n_bar}};
  Json rows = Json::array();
  for (const auto& e : entries) {
    Json row;
    row["state"] = correlations::to_string(e.state);
    row["n_bar"] = e.n_bar;
    row["q"] = e.row ? Json(e.row->q) : Json(nullptr);
    row["j"] = e.row ? Json(e.row->j) : Json(nullptr);
    row["qfi"] = e.row ? Json(e.row->qfi) : Json(nullptr);
    row["status"] = e.status;
    row["oracle_q"] = e.oracle ? opt_json(e.oracle->q_a) : Json(nullptr);
    row["oracle_j"] = e.oracle ? opt_json(e.oracle->j) : Json(nullptr);
    row["oracle_qfi"] = e.oracle ? Json(e.oracle->qfi) : Json(nullptr);
    row["max_rel_dev"] = opt_json(e.max_rel_dev);
    row["note"] = e.note;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << '\n';
}

// ---- protocol --------------------------------------------------------------

std::span<const std::string_view> protocol_columns() { return kProtocolColumns; }

void write_protocol(std::ostream& os, const protocol::ComparisonReport& rep, Format format) {
  const auto& cfg = rep.config;
  const auto sig = rep.signal_deviation();
  const auto var = rep.variance_deviation();
  const auto pe = rep.phase_error_deviation();
  const bool limit = rep.gaussian && rep.gaussian->phase_error_limit;
  std::string note = rep.fock_error;
  auto add_note = [&note](const std::string& n) {
    if (n.empty()) return;
    if (!note.empty()) note += "; ";
    note += n;
  };
  if (rep.gaussian) add_note(rep.gaussian->phase_error_note);
  if (rep.fock) add_note(rep.fock->phase_error_note);
  const bool has_cutoff = cfg.engine != protocol::Engine::kGaussian;

  if (format == Format::kCsv) {
    os << "# qmetro protocol " << cfg.key() << " snl=single-mode\n";
    write_csv_header(os, kProtocolColumns);
    std::vector<std::string> f = {
        format_real(cfg.n_bar),
        format_real(cfg.r),
        format_real(cfg.phi),
        format_real(cfg.eta1),
        format_real(cfg.eta2),
        std::string(protocol::to_string(cfg.engine)),
        has_cutoff ? std::to_string(rep.cutoff) : "",
        rep.gaussian ? format_real(rep.gaussian->signal) : "",
        rep.gaussian ? format_real(rep.gaussian->variance) : "",
        rep.gaussian ? opt_real(rep.gaussian->phase_error) : "",
        rep.fock ? format_real(rep.fock->signal) : "",
        rep.fock ? format_real(rep.fock->variance) : "",
        rep.fock ? opt_real(rep.fock->phase_error) : "",
        limit ? "1" : "0",
        format_real(rep.snl),
        opt_real(rep.snl_ratio),
        sig ? format_real(sig->absolute) : "",
        sig ? format_real(sig->relative) : "",
        var ? format_real(var->absolute) : "",
        var ? format_real(var->relative) : "",
        pe ? format_real(pe->relative) : "",
        rep.fock ? format_real(rep.trace_deficit) : "",
        note,
    };
    write_csv_line(os, f);
    return;
  }
  Json doc;
  doc["meta"] = {{"command", "protocol"}, {"key", cfg.key()}, {"snl_convention", "single-mode"}};
  Json rec;
  rec["n_bar"] = cfg.n_bar;
  rec["r"] = cfg.r;
  rec["phi"] = cfg.phi;
  rec["eta1"] = cfg.eta1;
  rec["eta2"] = cfg.eta2;
  rec["engine"] = protocol::to_string(cfg.engine);
  rec["cutoff"] = has_cutoff ? Json(rep.cutoff) : Json(nullptr);
  rec["gaussian_signal"] = rep.gaussian ? Json(rep.gaussian->signal) : Json(nullptr);
  rec["gaussian_variance"] = rep.gaussian ? Json(rep.gaussian->variance) : Json(nullptr);
  rec["gaussian_delta_phi"] = rep.gaussian ? opt_json(rep.gaussian->phase_error) : Json(nullptr);
  rec["fock_signal"] = rep.fock ? Json(rep.fock->signal) : Json(nullptr);
  rec["fock_variance"] = rep.fock ? Json(rep.fock->variance) : Json(nullptr);
  rec["fock_delta_phi"] = rep.fock ? opt_json(rep.fock->phase_error) : Json(nullptr);
  rec["delta_phi_limit"] = limit;
  rec["snl_single_mode"] = rep.snl;
  rec["snl_ratio"] = opt_json(rep.snl_ratio);
  rec["signal_abs_dev"] = sig ? Json(sig->absolute) : Json(nullptr);
  rec["signal_rel_dev"] = sig ? Json(sig->relative) : Json(nullptr);
  rec["variance_abs_dev"] = var ? Json(var->absolute) : Json(nullptr);
  rec["variance_rel_dev"] = var ? Json(var->relative) : Json(nullptr);
  rec["delta_phi_rel_dev"] = pe ? Json(pe->relative) : Json(nullptr);
  rec["trace_deficit"] = rep.fock ? Json(rep.trace_deficit) : Json(nullptr);
  rec["note"] = note;
  doc["record"] = std::move(rec);
  os << doc.dump(2) << '\n';
}

// ---- sweep -------------------------------------------------------------------

std::vector<double> log_grid(double start, double stop, int count) {
  if (count < 1) throw DomainError("grid needs at least one point");
  if (!(start > 0.0) || !(stop > 0.0)) throw DomainError("log grid endpoints must be positive");
  std::vector<double> grid(count);
  const double lo = std::log10(start);
  const double hi = std::log10(stop);
  for (int k = 0; k < count; ++k) {
    grid[k] = count == 1 ? start : std::pow(10.0, lo + (hi - lo) * k / (count - 1));
  }
  grid.front() = start;
  if (count > 1) grid.back() = stop;
  return grid;
}

std::vector<double> linear_grid(double start, double stop, int count) {
  if (count < 1) throw DomainError("grid needs at least one point");
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) {
    grid[k] = count == 1 ? start : start + (stop - start) * k / (count - 1);
  }
  if (count > 1) grid.back() = stop;
  return grid;
}

void check_sweep(const SweepSpec& spec) {
  auto check_axis = [](const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw DomainError(std::string(name) + " grid is empty");
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (!(axis[i] > axis[i - 1])) {
        throw DomainError(std::string(name) + " grid must be strictly increasing");
      }
    }
  };
  check_axis(spec.n_bar, "n_bar");
  check_axis(spec.phi, "phi");
  check_axis(spec.eta, "eta");
  for (double n : spec.n_bar) {
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("n_bar values must be positive");
  }
  for (double p : spec.phi) {
    if (!(p >= 0.0 && p < std::numbers::pi / 2.0)) {
      throw DomainError("phi values must lie in [0, pi/2)");
    }
  }
  for (double e : spec.eta) {
    if (!(e > 0.0 && e <= 1.0)) throw DomainError("eta values must lie in (0, 1]");
  }
  if (spec.phi.front() == 0.0 && spec.eta.front() < 1.0) {
    throw SingularOperatingPoint(
        "phi = 0 with eta < 1 is a singular operating point (the signal slope vanishes); "
        "drop phi = 0 or restrict eta to 1");
  }
}

std::vector<SweepRow> evaluate_sweep(const SweepSpec& spec) {
  check_sweep(spec);
  std::vector<SweepRow> rows;
  rows.reserve(spec.n_bar.size() * spec.phi.size() * spec.eta.size());
  for (double n : spec.n_bar) {
    for (double p : spec.phi) {
      for (double e : spec.eta) {
        const auto cfg =
            protocol::make_config(n, std::nullopt, p, e, e, std::nullopt, protocol::Engine::kGaussian);
        const auto res = protocol::run_gaussian(cfg);
        SweepRow row;
        row.n_bar = n;
        row.phi = p;
        row.eta = e;
        row.signal = res.signal;
        row.variance = res.variance;
        row.delta_phi = res.phase_error->value;
        row.snl = 1.0 / std::sqrt(4.0 * n);
        row.snl_ratio = row.snl / row.delta_phi;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::span<const std::string_view> sweep_columns() { return kSweepColumns; }

void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows, Format format) {
  if (format == Format::kCsv) {
    os << "# qmetro sweep rows=" << rows.size() << " snl=single-mode order=n_bar,phi,eta\n";
    write_csv_header(os, kSweepColumns);
    for (const auto& r : rows) {
      write_csv_line(os, {format_real(r.n_bar), format_real(r.phi), format_real(r.eta),
                          format_real(r.signal), format_real(r.variance),
                          format_real(r.delta_phi), format_real(r.snl),
                          format_real(r.snl_ratio)});
    }
    return;
  }
  Json doc;
  doc["meta"] = {{"command", "sweep"},
                 {"rows", rows.size()},
                 {"snl_convention", "single-mode"},
                 {"order", "n_bar,phi,eta"}};
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"n_bar", r.n_bar},
                       {"phi", r.phi},
                       {"eta", r.eta},
                       {"signal", r.signal},
                       {"variance", r.variance},
                       {"delta_phi", r.delta_phi},
                       {"snl", r.snl},
                       {"snl_ratio", r.snl_ratio}});
  }
  doc["rows"] = std::move(arr);
  os << doc.dump(2) << '\n';
}

}  // namespace qmetro::cli
