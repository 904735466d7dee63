#pragma once

// Command-line front end: argument parsing, command dispatch, JSON/CSV/SVG
// output.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "acceptance.hpp"
#include "determinant_core.hpp"
#include "region_atlas.hpp"
#include "spectral_solver.hpp"

namespace fermipair::cli {

inline constexpr int kSchemaVersion = 1;

enum class Command { classify, spectrum, curves, sweep, verify, constants };
enum class Format { json, csv };

enum ExitCode : int { ok = 0, verification_failed = 1, invalid_config = 2, degenerate_band = 3 };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Range {
  double lo;
  double hi;
  std::size_t steps;
};

struct RunConfig {
  Command command = Command::constants;
  std::optional<CouplingPair> coupling;
  Quasimomentum k{0.0, 0.0};
  std::size_t grid_n = 512;
  std::optional<Format> format;  ///< per-command default when unset
  std::optional<std::string> output_path;
  std::optional<std::string> svg_path;

  // curves
  std::optional<Side> side;  ///< both sides when unset
  Range curve_mu{-30.0, 30.0, 2001};
  // sweep
  Range sweep_lambda{-60.0, 60.0, 121};
  Range sweep_mu{-30.0, 30.0, 61};
  bool sweep_solve = false;
  unsigned threads = 1;
  // verify
  std::uint64_t seed = 0;
  std::vector<int> criteria;
};

inline const char* to_string(Command c) {
  switch (c) {
    case Command::classify: return "classify";
    case Command::spectrum: return "spectrum";
    case Command::curves: return "curves";
    case Command::sweep: return "sweep";
    case Command::verify: return "verify";
    case Command::constants: return "constants";
  }
  return "";
}

inline Format default_format(Command c) {
  return (c == Command::curves || c == Command::sweep) ? Format::csv : Format::json;
}

/// Grid size from FERMIPAIR_GRID_N, or the fallback.
inline std::size_t grid_from_environment(std::size_t fallback = 512) {
  const char* env = std::getenv("FERMIPAIR_GRID_N");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0) throw ConfigError("FERMIPAIR_GRID_N must be a positive integer");
  return static_cast<std::size_t>(v);
}

inline void validate(const RunConfig& c) {
  if (c.grid_n < 8 || c.grid_n % 2 != 0 || c.grid_n > GridSpec::kMaxPoints)
    throw ConfigError("grid size must be even and in [8, 4096]");
  if ((c.command == Command::classify || c.command == Command::spectrum) && !c.coupling)
    throw ConfigError(std::string(to_string(c.command)) + " needs --lambda and --mu");
  if (c.command == Command::curves && (c.curve_mu.steps < 2 || !(c.curve_mu.hi > c.curve_mu.lo)))
    throw ConfigError("curves needs mu-max > mu-min and at least two samples");
  if (c.command == Command::sweep) {
    for (const Range& r : {c.sweep_lambda, c.sweep_mu})
      if (r.steps < 1 || r.hi < r.lo) throw ConfigError("sweep ranges need max >= min and steps >= 1");
    if (c.threads < 1) throw ConfigError("--threads must be at least 1");
  }
  for (int id : c.criteria)
    if (id < 1 || id > static_cast<int>(acceptance::criteria().size()))
      throw ConfigError("no acceptance criterion " + std::to_string(id));
}

/// Parses argv into a RunConfig. Throws ConfigError on anything invalid;
/// returns nullopt when help was requested (already printed to out).
inline std::optional<RunConfig> parse(int argc, const char* const* argv, std::ostream& out) {
  RunConfig cfg;
  cfg.grid_n = grid_from_environment();
  CLI::App app{"Bound states of a fermion pair on the square lattice"};
  app.require_subcommand(1, 1);

  std::string format, side;
  std::optional<double> lambda, mu;
  double k1 = 0.0, k2 = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output,-o", cfg.output_path, "write the result to this file");
    sub->add_option("--grid-n", cfg.grid_n, "quadrature points per axis (default 512 or FERMIPAIR_GRID_N)");
  };
  auto add_coupling = [&](CLI::App* sub) {
    sub->add_option("--lambda", lambda, "nearest-neighbour coupling")->required();
    sub->add_option("--mu", mu, "next-nearest-neighbour coupling")->required();
  };

  CLI::App* classify_cmd = app.add_subcommand("classify", "region of a coupling pair");
  add_common(classify_cmd);
  add_coupling(classify_cmd);

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "discrete eigenvalues outside the band");
  add_common(spectrum_cmd);
  add_coupling(spectrum_cmd);
  spectrum_cmd->add_option("--k1", k1, "first quasimomentum component");
  spectrum_cmd->add_option("--k2", k2, "second quasimomentum component");

  CLI::App* curves_cmd = app.add_subcommand("curves", "phase boundary curves as CSV");
  add_common(curves_cmd);
  curves_cmd->add_option("--side", side, "below, above or both")->check(CLI::IsMember({"below", "above", "both"}));
  curves_cmd->add_option("--mu-min", cfg.curve_mu.lo);
  curves_cmd->add_option("--mu-max", cfg.curve_mu.hi);
  curves_cmd->add_option("--samples", cfg.curve_mu.steps);
  curves_cmd->add_option("--svg", cfg.svg_path, "also draw the curves to this SVG file");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "region map over a coupling grid");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--lambda-min", cfg.sweep_lambda.lo);
  sweep_cmd->add_option("--lambda-max", cfg.sweep_lambda.hi);
  sweep_cmd->add_option("--lambda-steps", cfg.sweep_lambda.steps);
  sweep_cmd->add_option("--mu-min", cfg.sweep_mu.lo);
  sweep_cmd->add_option("--mu-max", cfg.sweep_mu.hi);
  sweep_cmd->add_option("--mu-steps", cfg.sweep_mu.steps);
  sweep_cmd->add_flag("--solve", cfg.sweep_solve, "count eigenvalues with the solver instead of the region table");
  sweep_cmd->add_option("--threads", cfg.threads, "worker threads");
  sweep_cmd->add_option("--svg", cfg.svg_path, "also draw the region map to this SVG file");

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
  add_common(verify_cmd);
  verify_cmd->add_option("--seed", cfg.seed, "seed for sampled couplings");
  verify_cmd->add_option("--criterion", cfg.criteria, "run only these criteria");

  CLI::App* constants_cmd = app.add_subcommand("constants", "threshold constants and C^-/C^+ coefficients");
  add_common(constants_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  const std::vector<std::pair<CLI::App*, Command>> table{
      {classify_cmd, Command::classify}, {spectrum_cmd, Command::spectrum}, {curves_cmd, Command::curves},
      {sweep_cmd, Command::sweep},       {verify_cmd, Command::verify},     {constants_cmd, Command::constants}};
  for (const auto& [sub, cmd] : table)
    if (sub->parsed()) cfg.command = cmd;

  if (!format.empty()) cfg.format = format == "csv" ? Format::csv : Format::json;
  if (side == "below") cfg.side = Side::below;
  if (side == "above") cfg.side = Side::above;
  if (lambda && mu) {
    try {
      cfg.coupling = CouplingPair(*lambda, *mu);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!std::isfinite(k1) || !std::isfinite(k2)) throw ConfigError("quasimomentum must be finite");
  cfg.k = Quasimomentum(k1, k2);
  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// serialization

using Json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string csv_number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

inline Json envelope(Command c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(c);
  return j;
}

inline Json to_json(const CouplingPair& g) { return Json{{"lambda", g.lambda()}, {"mu", g.mu()}}; }

inline Json to_json(const RegionLabel& r, const CouplingPair& g) {
  Json j;
  j["coupling"] = to_json(g);
  j["region"] = r.name();
  j["minus_component"] = r.minus_component;
  j["plus_component"] = r.plus_component;
  j["on_boundary"] = r.on_boundary;
  if (r.on_boundary) {
    j["expected"] = nullptr;
  } else {
    j["expected"] = r.tag();
    j["expected_n_below"] = r.expected_n_below;
    j["expected_n_above"] = r.expected_n_above;
  }
  j["c_minus"] = c_constant(Side::below, g);
  j["c_plus"] = c_constant(Side::above, g);
  return j;
}

inline Json to_json(const SpectralReport& r) {
  Json j;
  j["coupling"] = to_json(r.coupling);
  j["k"] = {r.k.k1(), r.k.k2()};
  j["band"] = {{"e_min", r.band.min}, {"e_max", r.band.max}};
  Json list = Json::array();
  for (const Eigenvalue& e : r.eigenvalues)
    list.push_back({{"z", e.z}, {"side", to_string(e.side)}, {"multiplicity", e.multiplicity}});
  j["eigenvalues"] = list;
  j["n_below"] = r.n_below;
  j["n_above"] = r.n_above;
  j["boundary_uncertain"] = r.boundary_uncertain;
  return j;
}

inline Json constants_json() {
  const ThresholdConstants k = constants();
  Json j;
  j["mu0_minus"] = k.mu0_minus;
  j["mu0_plus"] = k.mu0_plus;
  j["mu1_minus"] = k.mu1_minus;
  j["mu1_plus"] = k.mu1_plus;
  j["prefactor"] = k.prefactor;
  // C = prefactor * sum of coefficient * monomial, monomials 1, mu, mu^2,
  // lambda, lambda mu, lambda mu^2.
  auto expand = [&](double s) {
    const double p0 = s * k.mu0_plus, p1 = s * k.mu0_minus, q0 = s * k.mu1_plus, q1 = s * k.mu1_minus;
    const double sl = -s;  // sign in front of lambda
    return Json{{"1", 8.0 * p0 * p1},      {"mu", 8.0 * (p0 + p1)},      {"mu^2", 8.0},
                {"lambda", sl * q0 * q1},  {"lambda*mu", sl * (q0 + q1)}, {"lambda*mu^2", sl}};
  };
  j["c_minus_coefficients"] = expand(-1.0);
  j["c_plus_coefficients"] = expand(1.0);
  return j;
}

// ---------------------------------------------------------------------------
// svg

struct Frame {
  double x0, x1, y0, y1;
  double width = 640.0, height = 480.0, pad = 40.0;
  double px(double x) const { return pad + (x - x0) / (x1 - x0) * (width - 2.0 * pad); }
  double py(double y) const { return height - pad - (y - y0) / (y1 - y0) * (height - 2.0 * pad); }
};

inline void svg_open(std::ostream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << f.pad << "\" y=\"" << f.pad << "\" width=\"" << f.width - 2 * f.pad << "\" height=\""
     << f.height - 2 * f.pad << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (f.x0 < 0 && f.x1 > 0)
    os << "<line x1=\"" << f.px(0) << "\" y1=\"" << f.pad << "\" x2=\"" << f.px(0) << "\" y2=\""
       << f.height - f.pad << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  if (f.y0 < 0 && f.y1 > 0)
    os << "<line x1=\"" << f.pad << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.width - f.pad << "\" y2=\""
       << f.py(0) << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 8 << "\" text-anchor=\"middle\">" << xlabel
     << " [" << f.x0 << ", " << f.x1 << "]</text>\n";
  os << "<text x=\"12\" y=\"" << f.height / 2 << "\" transform=\"rotate(-90 12 " << f.height / 2
     << ")\" text-anchor=\"middle\">" << ylabel << " [" << f.y0 << ", " << f.y1 << "]</text>\n";
}

// ---------------------------------------------------------------------------
// commands

struct SweepRow {
  double lambda;
  double mu;
  RegionLabel label;
  int n_below = -1;
  int n_above = -1;
};

inline double range_point(const Range& r, std::size_t i) {
  if (r.steps == 1) return r.lo;
  return r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(r.steps - 1);
}

inline std::vector<SweepRow> sweep_rows(const RunConfig& c) {
  const std::size_t nl = c.sweep_lambda.steps, nm = c.sweep_mu.steps;
  std::vector<SweepRow> rows(nl * nm);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      row.mu = range_point(c.sweep_mu, i / nl);
      row.lambda = range_point(c.sweep_lambda, i % nl);
      const CouplingPair g(row.lambda, row.mu);
      row.label = classify(g);
      if (c.sweep_solve) {
        const SpectralReport r = spectrum(g, Quasimomentum(0.0, 0.0), GridSpec(c.grid_n));
        row.n_below = r.n_below;
        row.n_above = r.n_above;
      } else if (!row.label.on_boundary) {
        row.n_below = row.label.expected_n_below;
        row.n_above = row.label.expected_n_above;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < c.threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline void write_sweep_svg(std::ostream& os, const RunConfig& c, const std::vector<SweepRow>& rows) {
  static const std::array<const char*, 16> palette{
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
      "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94"};
  const Frame f{c.sweep_lambda.lo, c.sweep_lambda.hi, c.sweep_mu.lo, c.sweep_mu.hi};
  svg_open(os, f, "lambda", "mu");
  const double cw = (f.width - 2 * f.pad) / static_cast<double>(c.sweep_lambda.steps);
  const double ch = (f.height - 2 * f.pad) / static_cast<double>(c.sweep_mu.steps);
  for (const SweepRow& r : rows) {
    const std::size_t colour = static_cast<std::size_t>(4 * r.label.minus_component + r.label.plus_component);
    const double x = f.pad + (c.sweep_lambda.hi > c.sweep_lambda.lo
                                  ? (r.lambda - f.x0) / (f.x1 - f.x0) * (f.width - 2 * f.pad - cw)
                                  : 0.0);
    const double y = f.height - f.pad - ch -
                     (c.sweep_mu.hi > c.sweep_mu.lo ? (r.mu - f.y0) / (f.y1 - f.y0) * (f.height - 2 * f.pad - ch)
                                                    : 0.0);
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
       << palette[colour] << "\"><title>" << r.label.name() << "</title></rect>\n";
  }
  os << "</svg>\n";
}

inline void write_curves_svg(std::ostream& os, const RunConfig& c,
                             const std::vector<std::pair<Side, std::array<std::vector<CurvePoint>, 3>>>& sides) {
  const double lmax = 60.0;
  const Frame f{-lmax, lmax, c.curve_mu.lo, c.curve_mu.hi};
  svg_open(os, f, "lambda", "mu");
  for (const auto& [side, branches] : sides) {
    const char* colour = side == Side::below ? "#1f77b4" : "#d62728";
    for (const auto& branch : branches) {
      // Break the polyline where it leaves the plotted lambda window.
      std::vector<std::vector<CurvePoint>> pieces(1);
      for (const CurvePoint& p : branch) {
        if (std::abs(p.lambda) > lmax) {
          if (!pieces.back().empty()) pieces.emplace_back();
          continue;
        }
        pieces.back().push_back(p);
      }
      for (const auto& piece : pieces) {
        if (piece.size() < 2) continue;
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (const CurvePoint& p : piece) os << f.px(p.lambda) << "," << f.py(p.mu) << " ";
        os << "\"/>\n";
      }
    }
  }
  os << "</svg>\n";
}

inline void write_svg_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open " + path);
  body(file);
}

/// Executes the command. Results go to `out` (or the output file), messages
/// to `err`; the return value is the process exit code.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  std::ostream* dest = &out;
  if (c.output_path) {
    file.open(*c.output_path);
    if (!file) {
      err << "error: cannot open " << *c.output_path << "\n";
      return invalid_config;
    }
    dest = &file;
  }
  std::ostream& os = *dest;
  const Format format = c.format.value_or(default_format(c.command));
  const GridSpec grid(c.grid_n);

  try {
    switch (c.command) {
      case Command::constants: {
        const Json k = constants_json();
        if (format == Format::json) {
          Json j = envelope(c.command);
          j.update(k);
          os << j.dump(2) << "\n";
        } else {
          os << "name,value\n";
          for (const char* key : {"mu0_minus", "mu0_plus", "mu1_minus", "mu1_plus", "prefactor"})
            os << key << "," << csv_number(k[key].get<double>()) << "\n";
        }
        return ok;
      }
      case Command::classify: {
        const RegionLabel r = classify(*c.coupling);
        if (format == Format::json) {
          Json j = envelope(c.command);
          j.update(to_json(r, *c.coupling));
          os << j.dump(2) << "\n";
        } else {
          os << "lambda,mu,region,n_below,n_above,on_boundary\n"
             << csv_number(c.coupling->lambda()) << "," << csv_number(c.coupling->mu()) << "," << r.name() << ",";
          if (r.on_boundary) os << ",,1\n";
          else os << r.expected_n_below << "," << r.expected_n_above << ",0\n";
        }
        return ok;
      }
      case Command::spectrum: {
        const SpectralReport r = spectrum(*c.coupling, c.k, grid);
        if (format == Format::json) {
          Json j = envelope(c.command);
          j.update(to_json(r));
          os << j.dump(2) << "\n";
        } else {
          os << "z,side,multiplicity\n";
          for (const Eigenvalue& e : r.eigenvalues)
            os << csv_number(e.z) << "," << to_string(e.side) << "," << e.multiplicity << "\n";
        }
        return ok;
      }
      case Command::curves: {
        std::vector<std::pair<Side, std::array<std::vector<CurvePoint>, 3>>> sides;
        for (Side s : {Side::below, Side::above})
          if (!c.side || *c.side == s)
            sides.emplace_back(s, boundary_curves(s, c.curve_mu.lo, c.curve_mu.hi, c.curve_mu.steps));
        if (format == Format::csv) {
          os << "side,branch,mu,lambda\n";
          for (const auto& [s, branches] : sides)
            for (std::size_t b = 0; b < 3; ++b)
              for (const CurvePoint& p : branches[b])
                os << to_string(s) << "," << b << "," << csv_number(p.mu) << "," << csv_number(p.lambda) << "\n";
        } else {
          Json j = envelope(c.command);
          Json list = Json::array();
          for (const auto& [s, branches] : sides)
            for (std::size_t b = 0; b < 3; ++b) {
              Json pts = Json::array();
              for (const CurvePoint& p : branches[b]) pts.push_back({p.mu, p.lambda});
              list.push_back({{"side", to_string(s)}, {"branch", b}, {"points_mu_lambda", pts}});
            }
          j["branches"] = list;
          os << j.dump(2) << "\n";
        }
        if (c.svg_path) write_svg_file(*c.svg_path, [&](std::ostream& s) { write_curves_svg(s, c, sides); });
        return ok;
      }
      case Command::sweep: {
        const std::vector<SweepRow> rows = sweep_rows(c);
        if (format == Format::csv) {
          os << "lambda,mu,region,n_below,n_above\n";
          for (const SweepRow& r : rows) {
            os << csv_number(r.lambda) << "," << csv_number(r.mu) << "," << r.label.name() << ",";
            if (r.n_below >= 0) os << r.n_below << "," << r.n_above << "\n";
            else os << ",\n";
          }
        } else {
          Json j = envelope(c.command);
          Json list = Json::array();
          for (const SweepRow& r : rows) {
            Json row{{"lambda", r.lambda}, {"mu", r.mu}, {"region", r.label.name()}, {"on_boundary", r.label.on_boundary}};
            if (r.n_below >= 0) {
              row["n_below"] = r.n_below;
              row["n_above"] = r.n_above;
            }
            list.push_back(row);
          }
          j["rows"] = list;
          os << j.dump(2) << "\n";
        }
        if (c.svg_path) write_svg_file(*c.svg_path, [&](std::ostream& s) { write_sweep_svg(s, c, rows); });
        return ok;
      }
      case Command::verify: {
        std::vector<int> ids = c.criteria;
        if (ids.empty())
          for (int id = 1; id <= static_cast<int>(acceptance::criteria().size()); ++id) ids.push_back(id);
        acceptance::Settings settings{c.seed};
        bool all = true;
        Json list = Json::array();
        for (int id : ids) {
          const acceptance::Outcome o = acceptance::run(id, settings);
          all = all && o.pass;
          if (format == Format::json)
            list.push_back({{"id", o.id}, {"title", o.title}, {"pass", o.pass}, {"seconds", o.seconds}, {"detail", o.detail}});
          else
            os << acceptance::format(o) << std::endl;
        }
        if (format == Format::json) {
          Json j = envelope(c.command);
          j["seed"] = c.seed;
          j["criteria"] = list;
          j["pass"] = all;
          os << j.dump(2) << "\n";
        }
        return all ? ok : verification_failed;
      }
    }
  } catch (const DegenerateBandError& e) {
    err << "error: " << e.what() << "\n";
    return degenerate_band;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_config;
  }
  return ok;
}

/// parse + run, mapping configuration errors to exit code 2.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const std::optional<RunConfig> cfg = parse(argc, argv, out);
    if (!cfg) return ok;
    return run(*cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_config;
  }
}

}  // namespace fermipair::cli
