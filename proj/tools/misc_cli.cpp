#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "misc/driver.hpp"
#include "misc/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "configuration file (key = value lines)");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides output.directory)");
  cmd->add_option("--seed", c.seed, "random seed for the Monte Carlo comparator");
  cmd->add_option("--threads", c.threads, "worker threads for solves")->check(CLI::PositiveNumber);
}

misc::RunConfig load(const Common& c) {
  misc::Config cfg = c.config.empty() ? misc::Config{} : misc::Config::load(c.config);
  misc::RunConfig rc = misc::RunConfig::from(cfg);
  if (!c.out.empty()) rc.directory = c.out;
  rc.seed = c.seed;
  rc.threads = c.threads;
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-index stochastic collocation for elliptic PDEs with random coefficients"};
  app.require_subcommand(1);

  Common leb_opts, pred_opts, fit_opts, run_opts, cmp_opts, solve_opts;
  int max_beta = 12;
  auto* leb = app.add_subcommand("lebesgue", "tabulate nested-difference Lebesgue constants");
  add_common(leb, leb_opts, false);
  leb->add_option("--max-beta", max_beta, "largest quadrature level")->check(CLI::Range(1, 30));
  auto* pred = app.add_subcommand("predict", "predicted convergence rates for the example field");
  add_common(pred, pred_opts, true);
  auto* fit = app.add_subcommand("fit", "pilot sweeps and least-squares fit of stochastic rates");
  add_common(fit, fit_opts, true);
  auto* run = app.add_subcommand("run", "convergence study over a budget ladder");
  add_common(run, run_opts, true);
  auto* cmp = app.add_subcommand("compare", "collocation versus Monte Carlo comparison");
  add_common(cmp, cmp_opts, true);
  auto* slv = app.add_subcommand("solve", "one deterministic solve at solve.alpha, solve.y");
  add_common(slv, solve_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*leb) {
      const std::string csv = misc::lebesgue_csv(max_beta);
      if (leb_opts.out.empty()) {
        std::cout << csv;
      } else {
        misc::write_text(std::filesystem::path(leb_opts.out) / "lebesgue.csv", csv);
      }
    } else if (*pred) {
      const auto rc = load(pred_opts);
      const std::string text = misc::predict_report(rc).dump(2) + "\n";
      std::cout << text;
      if (!pred_opts.out.empty()) misc::write_text(rc.directory / "predict.json", text);
    } else if (*fit) {
      const auto rc = load(fit_opts);
      auto ctx = misc::make_context(rc);
      misc::Estimator estimator(ctx.problem, rc.threads);
      const auto model = misc::fit_model(rc, estimator);
      const auto path = rc.directory / "model.json";
      misc::write_text(path, misc::model_to_json(model).dump(2) + "\n");
      std::cout << "wrote " << path.string() << " (" << model.g_tilde.size()
                << " rates, residual " << model.residual << ")\n";
    } else if (*run) {
      const auto rc = load(run_opts);
      const auto summary = misc::run_study(rc);
      std::cout << misc::runs_csv(summary);
    } else if (*cmp) {
      const auto rc = load(cmp_opts);
      std::cout << misc::compare_csv(misc::compare_study(rc));
    } else if (*slv) {
      const auto rc = load(solve_opts);
      std::printf("%.17g\n", misc::solve_single(rc));
    }
  } catch (const misc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const misc::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
