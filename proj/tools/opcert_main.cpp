#include <iostream>

#include <CLI11.hpp>

#include "opcert/deficiency.hpp"
#include "opcert/expr.hpp"
#include "opcert/report.hpp"
#include "opcert/scenario.hpp"
#include "opcert/svg.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  double half_width = -1.0;
  int grid_n = -1;
  int refine = -1;
  long long seed = -1;
  int jobs = -1;
  std::string json_out, svg_out, csv_out;
};

void apply_overrides(opcert::Scenario& s, const CommonFlags& f) {
  if (f.half_width > 0) s.half_width = f.half_width;
  if (f.grid_n > 0) s.n_points = f.grid_n;
  if (f.refine >= 0) s.refine_levels = f.refine;
  if (f.seed >= 0) s.seed = static_cast<std::uint64_t>(f.seed);
  if (f.jobs > 0) s.jobs = f.jobs;
  if (!f.json_out.empty()) s.json_out = f.json_out;
  if (!f.svg_out.empty()) s.svg_out = f.svg_out;
  if (!f.csv_out.empty()) s.csv_out = f.csv_out;
}

int run_command(const std::string& config_path, const CommonFlags& flags) {
  opcert::Config cfg = opcert::Config::parse_file(config_path);
  opcert::Scenario s = opcert::scenario_from_config(cfg);
  apply_overrides(s, flags);
  opcert::RunResult res = opcert::run_scenario(s, opcert::fnv1a_hex(cfg.raw_text()));
  if (!s.json_out.empty()) opcert::write_text_atomic(s.json_out, res.report.dump(2) + "\n");
  if (!s.svg_out.empty()) opcert::emit_plot(res.report, s.svg_out);
  if (!s.csv_out.empty()) opcert::write_spectra_csv(s.csv_out, opcert::compute_spectrum(s));
  std::cout << res.report["checks"].dump(2) << "\n"
            << (res.all_pass ? "ALL CHECKS PASS" : "CHECK FAILURES") << "\n";
  return res.all_pass ? kExitPass : kExitCheckFailed;
}

int deficiency_command(const std::string& op_expr, const std::string& interval,
                       const std::string& json_out) {
  const opcert::OperatorExpr oe = opcert::parse_operator(op_expr);
  opcert::ContinuumOp op;
  op.kind = oe.kind;
  if (oe.potential) {
    auto p = oe.potential;
    op.potential = [p](double x) { return p->eval(x); };
    op.potential_label = oe.potential_label;
  }
  opcert::parse_interval(interval, op.a, op.b);
  const opcert::DeficiencyReport rep = opcert::deficiency_indices(op);
  opcert::Json j;
  j["operator"] = rep.operator_label;
  j["interval"] = interval;
  j["n_plus"] = rep.n_plus;
  j["n_minus"] = rep.n_minus;
  j["left_endpoint"] = to_string(rep.left_class);
  j["right_endpoint"] = to_string(rep.right_class);
  j["esa"] = rep.esa;
  std::cout << j.dump(2) << "\n";
  if (!json_out.empty()) opcert::write_text_atomic(json_out, j.dump(2) + "\n");
  return rep.esa ? kExitPass : kExitCheckFailed;
}

int spectrum_command(const std::string& config_path, const CommonFlags& flags) {
  opcert::Config cfg = opcert::Config::parse_file(config_path);
  opcert::Scenario s = opcert::scenario_from_config(cfg);
  apply_overrides(s, flags);
  const std::vector<opcert::SpectrumRow> rows = opcert::compute_spectrum(s);
  const std::string out = !s.csv_out.empty() ? s.csv_out : "spectra.csv";
  opcert::write_spectra_csv(out, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  if (!s.svg_out.empty()) {
    opcert::Json rep;
    std::vector<double> eigs;
    for (const auto& r : rows)
      if (r.domain_tag == "L0") eigs.push_back(r.eigenvalue);
    rep["spectrum"]["eigenvalues"] = eigs;
    opcert::emit_plot(rep, s.svg_out);
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator certification laboratory"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--half-width", flags.half_width, "override grid half width");
    cmd->add_option("--grid-n", flags.grid_n, "override grid point count");
    cmd->add_option("--refine", flags.refine, "override refinement levels");
    cmd->add_option("--seed", flags.seed, "override RNG seed");
    cmd->add_option("--jobs", flags.jobs, "worker count for parallel sections");
    cmd->add_option("--json-out", flags.json_out, "report path (report.json)");
    cmd->add_option("--svg-out", flags.svg_out, "plot path (plots.svg)");
    cmd->add_option("--csv-out", flags.csv_out, "spectra path (spectra.csv)");
  };

  std::string config_path, op_expr, interval = "-inf,inf";

  CLI::App* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "scenario config file")->required();
  add_common(run);

  CLI::App* defi = app.add_subcommand("deficiency", "deficiency indices of a continuum operator");
  defi->add_option("operator", op_expr, "operator expression, e.g. \"i_d_dx + x\"")->required();
  defi->add_option("--interval", interval, "interval a,b with inf endpoints");
  add_common(defi);

  CLI::App* spec = app.add_subcommand("spectrum", "eigenvalues of the discretized operator");
  spec->add_option("config", config_path, "scenario config file")->required();
  add_common(spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (run->parsed()) return run_command(config_path, flags);
    if (defi->parsed()) return deficiency_command(op_expr, interval, flags.json_out);
    if (spec->parsed()) return spectrum_command(config_path, flags);
  } catch (const opcert::ExprParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const opcert::ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const opcert::PreconditionError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
