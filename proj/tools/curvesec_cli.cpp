// Command-line front end: validate section configs, evaluate surfaces,
// export plot grids, run the criterion checks and the checkerboard LP
// comparison. All output is byte-deterministic for fixed inputs.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvesec/checkerboard.hpp"
#include "curvesec/checks.hpp"
#include "curvesec/config.hpp"
#include "curvesec/format.hpp"
#include "curvesec/grid.hpp"
#include "curvesec/section.hpp"
#include "curvesec/surfaces.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFail = 1;
constexpr int kExitInvalidSection = 2;
constexpr int kExitParseError = 3;
constexpr int kExitEvalError = 4;
constexpr int kExitIoError = 5;
constexpr int kExitBoundaryOnly = 6;
constexpr int kExitSolverError = 7;

struct SectionSource {
  std::string builtin;
  std::string config_path;
  int samples = 1024;

  curvesec::SectionPair load() const {
    if (!builtin.empty()) return curvesec::builtin_section(builtin, samples);
    return curvesec::load_section_file(config_path, samples);
  }
};

void add_section_options(CLI::App* cmd, SectionSource& src) {
  auto* b = cmd->add_option("--builtin", src.builtin, "built-in section name");
  auto* c = cmd->add_option("--config", src.config_path, "section config JSON path");
  b->excludes(c);
  cmd->add_option("--samples", src.samples, "validation sample count")->default_val(1024);
}

int write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return kExitPass;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << path << "\n";
    return kExitIoError;
  }
  out << body;
  if (!out.good()) {
    std::cerr << "write failed: " << path << "\n";
    return kExitIoError;
  }
  return kExitPass;
}

/// Uniform n-point axes enriched so every curve knot (x, phi(x)) over the
/// x-axis is a grid node, plus the section's own trend breakpoints.
void enriched_grid_coords(const curvesec::SectionPair& s, int n, std::vector<double>& xs,
                          std::vector<double>& ys) {
  xs = curvesec::uniform_coords(n);
  for (double b : s.all_breaks()) xs.push_back(b);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  ys = curvesec::uniform_coords(n);
  for (double x : xs) ys.push_back(s.phi(x));
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
}

std::string grid_to_csv(const curvesec::GridSurface& g) {
  std::string out = "x,y,value\n";
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.ny(); ++j) {
      out += curvesec::format_double(g.xs[i]);
      out += ',';
      out += curvesec::format_double(g.ys[j]);
      out += ',';
      out += curvesec::format_double(g.at(i, j));
      out += '\n';
    }
  }
  return out;
}

nlohmann::json run_all_checks(const curvesec::SectionPair& s, int n, double tol, int workers) {
  curvesec::EvalContext ctx(s);
  nlohmann::json out;
  out["copula"] = curvesec::copulahood_criterion(ctx, n, tol).to_json();
  out["coincidence"] = curvesec::coincidence_criterion(ctx, n, tol).to_json();
  out["phi-simple"] = curvesec::phi_simple_check(ctx, n, tol);
  out["k-condition"] = curvesec::k_copula_condition(ctx, std::max(n, 512), tol);
  auto grid = curvesec::fill_grid(ctx, curvesec::SurfaceKind::Splice, curvesec::uniform_coords(n),
                                  curvesec::uniform_coords(n), workers);
  out["quasi"] = curvesec::check_quasi_copula(grid, tol).to_json();
  return out;
}

nlohmann::json oracle_table(const curvesec::SectionPair& s, int n, int off_nodes,
                            const std::string& dump_path, int& exit_code) {
  curvesec::EvalContext ctx(s);
  const double mesh = curvesec::checkerboard_mesh(s, n);
  nlohmann::json rows = nlohmann::json::array();
  bool all_in_band = true;
  auto run_node = [&](int a, int b) {
    const double x = static_cast<double>(a) / n;
    const double y = s.phi(static_cast<double>(b) / n);
    const double splice = curvesec::surface(ctx, curvesec::SurfaceKind::Splice, x, y);
    const double lp = curvesec::lp_sup_at(ctx, n, a, b);
    const double gap = lp - splice;
    const bool in_band = gap >= -1e-7 && gap <= 2.0 * mesh;
    all_in_band = all_in_band && in_band;
    rows.push_back({{"a", a},
                    {"b", b},
                    {"x", x},
                    {"y", y},
                    {"splice", splice},
                    {"lp", lp},
                    {"gap", gap},
                    {"in_band", in_band}});
  };
  for (int k = 1; k < n; ++k) run_node(k, k);
  bool dumped = dump_path.empty();
  for (int k = 1; k <= off_nodes; ++k) {
    int a = 1 + ((2 * k - 1) * (n - 1)) / (2 * off_nodes);
    a = std::clamp(a, 1, n - 1);
    int b = n - a;
    b = std::clamp(b, 1, n - 1);
    if (a == b) {  // keep the node off the curve when the grid allows it
      if (b + 1 <= n - 1) {
        ++b;
      } else if (b > 1) {
        --b;
      } else {
        continue;
      }
    }
    if (!dumped) {
      const auto lp = curvesec::build_checkerboard_lp(ctx, n, a, b);
      std::ofstream out(dump_path, std::ios::binary);
      if (out) {
        curvesec::write_lp(lp, out);
        dumped = true;
      }
    }
    run_node(a, b);
  }
  exit_code = all_in_band ? kExitPass : kExitCheckFail;
  return {{"n", n}, {"mesh", mesh}, {"band", {-1e-7, 2.0 * mesh}}, {"nodes", rows}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bivariate copula surfaces with a prescribed curvilinear section"};
  app.require_subcommand(1);

  SectionSource src;

  auto* validate_cmd = app.add_subcommand("validate", "validate a section config");
  add_section_options(validate_cmd, src);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate one surface at a point");
  add_section_options(eval_cmd, src);
  std::string kind_name = "splice";
  double eval_x = 0.0, eval_y = 0.0;
  eval_cmd->add_option("--kind", kind_name, "surface kind")->default_val("splice");
  eval_cmd->add_option("--x", eval_x, "x coordinate")->required();
  eval_cmd->add_option("--y", eval_y, "y coordinate")->required();

  auto* grid_cmd = app.add_subcommand("grid", "export a surface grid as CSV");
  add_section_options(grid_cmd, src);
  int grid_n = 101;
  int workers = 1;
  std::string out_path;
  grid_cmd->add_option("--kind", kind_name, "surface kind")->default_val("splice");
  grid_cmd->add_option("--n", grid_n, "grid points per axis")->check(CLI::Range(3, 4096));
  grid_cmd->add_option("--workers", workers, "parallel fill workers")->default_val(1);
  grid_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* check_cmd = app.add_subcommand("check", "run a criterion check");
  add_section_options(check_cmd, src);
  std::string which = "all";
  int check_n = 400;
  double tol = 1e-9;
  check_cmd->add_option("--which", which, "copula|coincidence|phi-simple|k-condition|quasi|all")
      ->default_val("all");
  check_cmd->add_option("--n", check_n, "pair/grid resolution")->check(CLI::Range(3, 4096));
  check_cmd->add_option("--tol", tol, "slack tolerance")->check(CLI::PositiveNumber);
  check_cmd->add_option("--workers", workers, "parallel fill workers")->default_val(1);
  check_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* oracle_cmd = app.add_subcommand("oracle", "LP upper bound vs analytic splice");
  add_section_options(oracle_cmd, src);
  int oracle_n = 16;
  int off_nodes = 5;
  std::string dump_path;
  oracle_cmd->add_option("--n", oracle_n, "checkerboard knot count")->check(CLI::Range(2, 64));
  oracle_cmd->add_option("--nodes", off_nodes, "off-curve node count")->check(CLI::Range(0, 64));
  oracle_cmd->add_option("--dump-lp", dump_path, "dump one LP instance as plain text");
  oracle_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* report_cmd = app.add_subcommand("report", "run everything into one report");
  add_section_options(report_cmd, src);
  int report_n = 200;
  int report_oracle_n = 8;
  report_cmd->add_option("--n", report_n, "check/grid resolution")->check(CLI::Range(3, 4096));
  report_cmd->add_option("--oracle-n", report_oracle_n, "checkerboard knot count")
      ->check(CLI::Range(2, 64));
  report_cmd->add_option("--tol", tol, "slack tolerance")->check(CLI::PositiveNumber);
  report_cmd->add_option("--workers", workers, "parallel fill workers")->default_val(1);
  report_cmd->add_option("--out", out_path, "output prefix (writes PREFIX.json and PREFIX.csv)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      try {
        const auto s = src.load();
        nlohmann::json j{{"section", s.name},
                         {"valid", true},
                         {"hat_breaks", s.hat_breaks},
                         {"tilde_breaks", s.tilde_breaks}};
        std::cout << j.dump(2) << "\n";
        return kExitPass;
      } catch (const curvesec::validation_error& e) {
        nlohmann::json j{{"valid", false}, {"error", e.what()}};
        std::cout << j.dump(2) << "\n";
        return kExitInvalidSection;
      }
    }

    if (eval_cmd->parsed()) {
      const auto s = src.load();
      try {
        curvesec::EvalContext ctx(s);
        const double v = curvesec::surface(ctx, curvesec::surface_kind_from(kind_name), eval_x, eval_y);
        std::cout << curvesec::format_double(v) << "\n";
        return kExitPass;
      } catch (const std::exception& e) {
        std::cerr << "evaluation failed: " << e.what() << "\n";
        return kExitEvalError;
      }
    }

    if (grid_cmd->parsed()) {
      const auto s = src.load();
      std::vector<double> xs, ys;
      enriched_grid_coords(s, grid_n, xs, ys);
      curvesec::EvalContext ctx(s);
      const auto g = curvesec::fill_grid(ctx, curvesec::surface_kind_from(kind_name), xs, ys, workers);
      return write_text(out_path, grid_to_csv(g));
    }

    if (check_cmd->parsed()) {
      const auto s = src.load();
      curvesec::EvalContext ctx(s);
      nlohmann::json out;
      bool any_fail = false, any_boundary = false;
      auto absorb = [&](const curvesec::VerdictReport& r) {
        any_fail = any_fail || !r.pass;
        any_boundary = any_boundary || r.boundary_flagged();
        return r.to_json();
      };
      if (which == "copula") {
        out = absorb(curvesec::copulahood_criterion(ctx, check_n, tol));
      } else if (which == "coincidence") {
        out = absorb(curvesec::coincidence_criterion(ctx, check_n, tol));
      } else if (which == "phi-simple") {
        const bool ok = curvesec::phi_simple_check(ctx, check_n, tol);
        any_fail = !ok;
        out = {{"check", "phi-simple"}, {"verdict", ok ? "pass-at-resolution" : "fail"},
               {"resolution", check_n}, {"tolerance", tol}};
      } else if (which == "k-condition") {
        const bool ok = curvesec::k_copula_condition(ctx, std::max(check_n, 512), tol);
        any_fail = !ok;
        out = {{"check", "k-condition"}, {"verdict", ok ? "pass-at-resolution" : "fail"},
               {"resolution", check_n}, {"tolerance", tol}};
      } else if (which == "quasi") {
        auto grid = curvesec::fill_grid(ctx, curvesec::SurfaceKind::Splice,
                                        curvesec::uniform_coords(check_n),
                                        curvesec::uniform_coords(check_n), workers);
        out = absorb(curvesec::check_quasi_copula(grid, tol));
      } else if (which == "all") {
        out = run_all_checks(s, check_n, tol, workers);
        any_fail = out["copula"]["verdict"] != "pass-at-resolution" ||
                   out["coincidence"]["verdict"] != "pass-at-resolution" ||
                   !out["phi-simple"].get<bool>() || !out["k-condition"].get<bool>() ||
                   out["quasi"]["verdict"] != "pass-at-resolution";
        for (const char* key : {"copula", "coincidence"}) {
          for (const auto& w : out[key]["witnesses"]) {
            any_boundary = any_boundary || w["boundary"].get<bool>();
          }
        }
      } else {
        std::cerr << "unknown check: " << which << "\n";
        return kExitParseError;
      }
      const int rc = write_text(out_path, out.dump(2) + "\n");
      if (rc != kExitPass) return rc;
      if (any_fail) return kExitCheckFail;
      if (any_boundary) return kExitBoundaryOnly;
      return kExitPass;
    }

    if (oracle_cmd->parsed()) {
      const auto s = src.load();
      int rc = kExitPass;
      nlohmann::json out;
      try {
        out = oracle_table(s, oracle_n, off_nodes, dump_path, rc);
      } catch (const curvesec::convergence_error& e) {
        std::cerr << "solver failed: " << e.what() << "\n";
        return kExitSolverError;
      }
      const int wrc = write_text(out_path, out.dump(2) + "\n");
      return wrc != kExitPass ? wrc : rc;
    }

    if (report_cmd->parsed()) {
      const auto s = src.load();
      nlohmann::json rep;
      rep["section"] = s.name.empty() ? "(config)" : s.name;
      rep["hat_breaks"] = s.hat_breaks;
      rep["tilde_breaks"] = s.tilde_breaks;
      rep["checks"] = run_all_checks(s, report_n, tol, workers);
      int oracle_rc = kExitPass;
      rep["oracle"] = oracle_table(s, report_oracle_n, 3, "", oracle_rc);
      {
        // Exploratory only: how far the splice sits from the K surface.
        curvesec::EvalContext ctx(s);
        double max_diff = 0.0;
        const auto cs = curvesec::uniform_coords(101);
        for (double x : cs) {
          for (double y : cs) {
            const double d = std::abs(curvesec::surface(ctx, curvesec::SurfaceKind::Splice, x, y) -
                                      curvesec::surface(ctx, curvesec::SurfaceKind::K, x, y));
            max_diff = std::max(max_diff, d);
          }
        }
        rep["k_comparison"] = {{"max_abs_diff", max_diff},
                               {"k_is_copula", curvesec::k_copula_condition(ctx, 2048, tol)}};
      }
      std::vector<double> xs, ys;
      enriched_grid_coords(s, std::min(report_n, 201), xs, ys);
      curvesec::EvalContext ctx(s);
      const auto g = curvesec::fill_grid(ctx, curvesec::SurfaceKind::Splice, xs, ys, workers);
      int rc = write_text(out_path + ".json", rep.dump(2) + "\n");
      if (rc != kExitPass) return rc;
      rc = write_text(out_path + ".csv", grid_to_csv(g));
      if (rc != kExitPass) return rc;
      return kExitPass;
    }
  } catch (const curvesec::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const curvesec::validation_error& e) {
    std::cerr << "invalid section: " << e.what() << "\n";
    return kExitInvalidSection;
  } catch (const curvesec::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitEvalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  return kExitPass;
}
