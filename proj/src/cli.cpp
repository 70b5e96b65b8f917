#include "levymc/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "levymc/config.hpp"

namespace levymc {

namespace {

// Locale-independent shortest-roundtrip formatting keeps CSV output
// byte-identical across runs with the same seed.
std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw ConfigError(path + ": cannot open output file");
    out_ << header << "\n";
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ",";
      out_ << format_g(v);
      first = false;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

struct NamedPhi {
  std::function<double(const Vec&)> phi;
  std::function<Vec(const Vec&)> grad;
};

NamedPhi phi_by_key(const std::string& key) {
  if (key == "sin")
    return {[](const Vec& x) { return std::sin(x(0)); },
            [](const Vec& x) { return vec1(std::cos(x(0))); }};
  if (key == "cos")
    return {[](const Vec& x) { return std::cos(x(0)); },
            [](const Vec& x) { return vec1(-std::sin(x(0))); }};
  if (key == "quadratic")
    return {[](const Vec& x) { return x(0) * x(0); },
            [](const Vec& x) { return vec1(2.0 * x(0)); }};
  throw ConfigError("--phi: expected sin | cos | quadratic, got '" + key + "'");
}

struct CommonFlags {
  std::string problem = "linear-symbol";
  std::string config_path;
  std::string output;
  std::uint64_t seed = 1;
};

RunSetup build_setup(const CommonFlags& flags) {
  RunSetup setup = default_setup(flags.problem);
  if (!flags.config_path.empty()) apply_config_file(setup, flags.config_path);
  setup.scheme.seed = flags.seed;
  return setup;
}

int run_solve(const CommonFlags& flags, int n, long samples, bool monotonized,
              const std::string& rule, double kappa, double spacing) {
  RunSetup setup = build_setup(flags);
  if (n > 0) setup.scheme.n = n;
  if (samples > 0) setup.scheme.samples_per_node = samples;
  if (monotonized) setup.scheme.monotonized = true;
  if (!rule.empty()) {
    if (rule == "fixed")
      setup.scheme.kappa_rule = KappaRule::Fixed;
    else if (rule == "convergence")
      setup.scheme.kappa_rule = KappaRule::Convergence;
    else if (rule == "rate")
      setup.scheme.kappa_rule = KappaRule::Rate;
    else
      throw ConfigError("--kappa-rule: expected fixed | convergence | rate");
  }
  if (kappa >= 0.0) setup.scheme.fixed_kappa = kappa;
  if (spacing > 0.0)
    setup.scheme.grid = SpatialGrid::uniform_1d(
        setup.scheme.grid.lo(0), setup.scheme.grid.hi(0),
        std::max(2, 1 + static_cast<int>(std::ceil(
                         (setup.scheme.grid.hi(0) - setup.scheme.grid.lo(0)) / spacing -
                         1e-9))));

  // Preview kappa for the localization check before the (long) solve.
  DomainSample domain = scheme_domain_sample(setup.scheme.grid, setup.scheme.T);
  double kappa_preview = setup.scheme.fixed_kappa;
  if (setup.scheme.kappa_rule == KappaRule::Convergence)
    kappa_preview = select_kappa_convergence(setup.problem.problem, setup.problem.measure,
                                             setup.scheme.h(), domain);
  else if (setup.scheme.kappa_rule == KappaRule::Rate) {
    RateKappaResult r = select_kappa_rate(setup.problem.problem, setup.problem.measure,
                                          setup.scheme.h(), domain);
    if (!r.feasible) throw NumericError("rate rule infeasible: " + r.failed_condition);
    kappa_preview = r.kappa;
  }
  check_box_padding(setup.problem.problem, setup.problem.measure, kappa_preview,
                    setup.scheme.grid, setup.problem.interior_halfwidth,
                    setup.scheme.T);

  ValueSurface surf = solve_backward(setup.problem.problem, setup.problem.measure,
                                     setup.scheme, setup.problem.terminal);
  if (surf.grid.dim() != 1) throw ConfigError("CSV output supports d = 1 only");
  CsvWriter csv(flags.output, "t,x,value");
  for (std::size_t i = 0; i < surf.times.size(); ++i)
    for (long j = 0; j < surf.grid.size(); ++j)
      csv.row({surf.times[i], surf.grid.node(j)(0), surf.values[i][j]});
  return 0;
}

int run_rate(const CommonFlags& flags, const std::string& ladder_text, long samples_base,
             bool monotonized, const std::string& rule) {
  RunSetup setup = build_setup(flags);
  std::vector<double> ladder = parse_list(ladder_text, "--ladder");
  StudyTemplate tmpl;
  tmpl.seed = flags.seed;
  if (samples_base > 0) tmpl.samples_base = samples_base;
  tmpl.monotonized = monotonized;
  if (!rule.empty()) {
    if (rule == "fixed")
      tmpl.rule_override = KappaRule::Fixed;
    else if (rule == "convergence")
      tmpl.rule_override = KappaRule::Convergence;
    else if (rule == "rate")
      tmpl.rule_override = KappaRule::Rate;
    else
      throw ConfigError("--kappa-rule: expected fixed | convergence | rate");
  }
  RateReport report = run_convergence_study(setup.problem, ladder, tmpl);
  CsvWriter csv(flags.output, "h,kappa,theta_kappa,error");
  for (std::size_t i = 0; i < report.ladder.size(); ++i)
    csv.row({report.ladder[i], report.kappas[i], report.thetas[i], report.errors[i]});
  std::cerr << "fitted log-log slope " << format_g(report.slope) << " (R^2 "
            << format_g(report.slope_r2) << ")\n";
  return 0;
}

int run_mcq(const CommonFlags& flags, const std::string& kappas_text,
            const std::string& hs_text, long samples, double x0,
            const std::string& phi_key) {
  RunSetup setup = build_setup(flags);
  std::vector<double> kappas = parse_list(kappas_text, "--kappas");
  std::vector<double> hs = parse_list(hs_text, "--hs");
  NamedPhi fn = phi_by_key(phi_key);
  const Vec x = vec1(x0);
  const CoefficientField& cf = setup.problem.problem.dominating;
  const LevyMeasure& m = setup.problem.measure;

  CsvWriter csv(flags.output,
                "kappa,h,n_samples,mcq_value,std_error,quadrature_value,abs_error");
  std::uint64_t row_index = 0;
  for (double kappa : kappas)
    for (double h : hs) {
      RngStream rng = RngStream::derived(flags.seed, row_index++, 0);
      std::vector<OneStepSample> batch =
          simulate_batch(cf, m, kappa, 0.0, x, h, samples, rng);
      McqEstimate est = levy_operator_mcq(fn.phi, fn.grad, cf, m, kappa, 0.0, x, h, batch);
      double quad = levy_operator_quadrature(fn.phi, fn.grad, cf, m, kappa, 0.0, x);
      csv.row({kappa, h, static_cast<double>(est.n_samples), est.value, est.std_error,
               quad, std::abs(est.value - quad)});
    }
  return 0;
}

int run_validate_measure(const CommonFlags& flags, const std::string& kappas_text) {
  RunSetup setup = build_setup(flags);
  const LevyMeasure& m = setup.problem.measure;
  std::vector<double> kappas = parse_list(kappas_text, "--kappas");

  CsvWriter csv(flags.output, "kappa,functional,closed_form,quadrature,abs_error");
  for (double kappa : kappas) {
    // functional codes: 0 tail mass, 1 truncated first moment, 2 small-jump
    // second moment
    double closed[3] = {m.tail_mass(kappa), m.truncated_first_moment(kappa),
                        m.small_jump_second_moment(kappa)};
    auto one = [](double) { return 1.0; };
    auto ident = [](double z) { return z; };
    auto square = [](double z) { return z * z; };
    double quad[3] = {
        m.integrate_abs_band(one, kappa, kInf).value,
        m.integrate_abs_band(ident, kappa, 1.0).value,
        m.integrate_abs_band(square, 0.0, kappa).value,
    };
    for (int f = 0; f < 3; ++f)
      csv.row({kappa, static_cast<double>(f), closed[f], quad[f],
               std::abs(closed[f] - quad[f])});
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo solver for fully nonlinear nonlocal parabolic PDEs"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* cmd, bool need_problem) {
    if (need_problem)
      cmd->add_option("--problem", flags.problem, "built-in problem key");
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "master random seed");
    cmd->add_option("--output", flags.output, "output CSV path")->required();
  };

  // solve
  int n = 0;
  long samples = 0;
  bool monotonized = false;
  std::string rule;
  double kappa = -1.0, spacing = 0.0;
  CLI::App* solve = app.add_subcommand("solve", "backward scheme solve, CSV surface");
  add_common(solve, true);
  solve->add_option("--n", n, "time steps");
  solve->add_option("--samples", samples, "Monte Carlo samples per node");
  solve->add_flag("--monotonized", monotonized, "use the monotonized operator");
  solve->add_option("--kappa-rule", rule, "fixed | convergence | rate");
  solve->add_option("--kappa", kappa, "fixed truncation level");
  solve->add_option("--spacing", spacing, "node spacing");

  // rate
  std::string ladder;
  long samples_base = 0;
  bool rate_monotonized = false;
  std::string rate_rule;
  CLI::App* rate = app.add_subcommand("rate", "convergence study over an h ladder");
  add_common(rate, true);
  rate->add_option("--ladder", ladder, "comma-separated h values, decreasing")
      ->required();
  rate->add_option("--samples-base", samples_base, "samples at the coarsest rung");
  rate->add_flag("--monotonized", rate_monotonized, "use the monotonized operator");
  rate->add_option("--kappa-rule", rate_rule, "fixed | convergence | rate");

  // mcq
  std::string kappas_text = "0", hs_text = "0.01", phi_key = "sin";
  long mcq_samples = 100000;
  double x0 = 0.0;
  CLI::App* mcq = app.add_subcommand("mcq", "MCQ vs quadrature error table");
  add_common(mcq, true);
  mcq->add_option("--kappas", kappas_text, "comma-separated truncation levels");
  mcq->add_option("--hs", hs_text, "comma-separated step sizes");
  mcq->add_option("--samples", mcq_samples, "Monte Carlo samples");
  mcq->add_option("--x", x0, "evaluation point");
  mcq->add_option("--phi", phi_key, "test function: sin | cos | quadratic");

  // validate-measure
  std::string val_kappas = "0.05,0.1,0.2,0.5,1.0";
  CLI::App* validate =
      app.add_subcommand("validate-measure", "closed forms vs quadrature");
  add_common(validate, true);
  validate->add_option("--kappas", val_kappas, "comma-separated truncation levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed())
      return run_solve(flags, n, samples, monotonized, rule, kappa, spacing);
    if (rate->parsed())
      return run_rate(flags, ladder, samples_base, rate_monotonized, rate_rule);
    if (mcq->parsed())
      return run_mcq(flags, kappas_text, hs_text, mcq_samples, x0, phi_key);
    if (validate->parsed()) return run_validate_measure(flags, val_kappas);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace levymc
