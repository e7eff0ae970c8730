#include "misc/driver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "misc/errors.hpp"
#include "misc/mimc.hpp"

namespace misc {

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "problem.d",           "problem.nu",              "problem.sigma",
      "problem.x0",          "problem.modes",           "problem.deterministic",
      "solver.tolerance",    "solver.gamma",            "solver.preconditioner",
      "adaptivity.mode",     "adaptivity.budgets",      "adaptivity.budget_count",
      "adaptivity.pilot_depth", "adaptivity.frontier_width", "adaptivity.model",
      "adaptivity.r_fem",    "adaptivity.universe_level", "adaptivity.universe_vars",
      "output.directory",    "output.reference",        "mimc.levels",
      "mimc.pilot_samples",  "mimc.repetitions",        "mimc.variables",
      "fit.variables",       "fit.synthetic",           "solve.alpha",
      "solve.y",
  };
  return keys;
}

namespace {

SparsePoint parse_point(const std::string& text) {
  SparsePoint y;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto colon = item.find(':');
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    if (colon == std::string::npos) throw ConfigError("solve.y entries look like 'j:value'");
    try {
      const int j = std::stoi(item.substr(0, colon));
      const double v = std::stod(item.substr(colon + 1));
      if (j < 1) throw ConfigError("solve.y directions start at 1");
      if (v < -1.0 || v > 1.0) throw ConfigError("solve.y values must lie in [-1, 1]");
      if (v != 0.0) y.emplace_back(j, v);
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError("cannot parse solve.y entry '" + item + "'");
    }
  }
  std::sort(y.begin(), y.end());
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i].first == y[i - 1].first) throw ConfigError("solve.y repeats a direction");
  }
  return y;
}

}  // namespace

RunConfig RunConfig::from(const Config& cfg) {
  cfg.require_known(known_config_keys());
  RunConfig rc;
  rc.d = static_cast<int>(cfg.get_int("problem.d", 1));
  if (rc.d < 1) throw ConfigError("problem.d must be at least 1");
  rc.nu = cfg.get_double("problem.nu", 2.5);
  if (!(rc.nu > 0.0)) throw ConfigError("problem.nu must be positive");
  rc.sigma = cfg.get_double("problem.sigma", 0.2);
  if (!(rc.sigma > 0.0)) throw ConfigError("problem.sigma must be positive");
  rc.x0 = cfg.has("problem.x0") ? cfg.get_doubles("problem.x0") : QoISpec::defaults(rc.d).x0;
  if (static_cast<int>(rc.x0.size()) != rc.d) throw ConfigError("problem.x0 needs d entries");
  for (double x : rc.x0) {
    if (!(x > 0.0 && x < 1.0)) throw ConfigError("problem.x0 must be interior to the unit cube");
  }
  rc.deterministic = cfg.get_bool("problem.deterministic", false);
  rc.modes = static_cast<int>(cfg.get_int("problem.modes", rc.d == 1 ? 128 : 64));
  if (rc.modes < 1) throw ConfigError("problem.modes must be at least 1");

  rc.tolerance = cfg.get_double("solver.tolerance", 1e-10);
  if (!(rc.tolerance > 0.0 && rc.tolerance < 1e-2)) {
    throw ConfigError("solver.tolerance must lie in (0, 1e-2)");
  }
  rc.gamma = cfg.get_double("solver.gamma", 1.0);
  if (!(rc.gamma >= 1.0)) throw ConfigError("solver.gamma must be at least 1");
  rc.preconditioner = parse_preconditioner(cfg.get_string("solver.preconditioner", "poisson"));

  rc.mode = cfg.get_string("adaptivity.mode", "apriori");
  if (rc.mode != "apriori" && rc.mode != "bruteforce") {
    throw ConfigError("adaptivity.mode must be apriori or bruteforce");
  }
  rc.budgets = cfg.get_doubles("adaptivity.budgets");
  for (std::size_t i = 0; i < rc.budgets.size(); ++i) {
    if (!(rc.budgets[i] > 0.0)) throw ConfigError("budgets must be positive");
    if (i > 0 && !(rc.budgets[i] > rc.budgets[i - 1])) {
      throw ConfigError("adaptivity.budgets must be strictly increasing");
    }
  }
  rc.budget_count = static_cast<int>(cfg.get_int("adaptivity.budget_count", 6));
  if (rc.budget_count < 1) throw ConfigError("adaptivity.budget_count must be at least 1");
  rc.pilot_depth = static_cast<int>(cfg.get_int("adaptivity.pilot_depth", 3));
  if (rc.pilot_depth < 2) throw ConfigError("adaptivity.pilot_depth must be at least 2");
  rc.frontier_width = static_cast<int>(cfg.get_int("adaptivity.frontier_width", 2));
  if (rc.frontier_width < 1) throw ConfigError("adaptivity.frontier_width must be at least 1");
  if (cfg.has("adaptivity.model")) {
    rc.model_path = cfg.resolve(cfg.get_string("adaptivity.model", ""));
    if (!std::filesystem::exists(*rc.model_path)) {
      throw ConfigError("model file " + rc.model_path->string() + " does not exist");
    }
  }
  rc.r_fem = cfg.get_double("adaptivity.r_fem",
                            rc.deterministic ? 2.0 : 2.0 * std::min(1.0, rc.nu / rc.d));
  if (!(rc.r_fem > 0.0)) throw ConfigError("adaptivity.r_fem must be positive");
  rc.universe_level = static_cast<int>(cfg.get_int("adaptivity.universe_level", 4));
  rc.universe_vars = static_cast<int>(cfg.get_int("adaptivity.universe_vars", 2));

  rc.directory = cfg.has("output.directory") ? cfg.resolve(cfg.get_string("output.directory", "."))
                                              : std::filesystem::path(".");
  rc.reference = cfg.get_string("output.reference", "auto");
  if (rc.reference != "auto") {
    double v = 0.0;
    std::istringstream is(rc.reference);
    if (!(is >> v) || !is.eof()) {
      const auto path = cfg.resolve(rc.reference);
      if (!std::filesystem::exists(path)) {
        throw ConfigError("reference file " + path.string() + " does not exist");
      }
      rc.reference = path.string();
    }
  }

  const int default_vars = rc.deterministic ? 0 : std::min(rc.modes, rc.d == 1 ? 24 : 8);
  rc.fit_variables = static_cast<int>(cfg.get_int("fit.variables", default_vars));
  if (rc.fit_variables < 0 || rc.fit_variables > rc.modes) {
    throw ConfigError("fit.variables must lie in 0..problem.modes");
  }
  if (rc.deterministic) rc.fit_variables = 0;
  rc.fit_synthetic = cfg.get_bool("fit.synthetic", false);

  rc.mimc_levels = static_cast<int>(cfg.get_int("mimc.levels", 4));
  rc.mimc_pilot = static_cast<int>(cfg.get_int("mimc.pilot_samples", 16));
  rc.mimc_repetitions = static_cast<int>(cfg.get_int("mimc.repetitions", 4));
  if (rc.mimc_repetitions < 1) throw ConfigError("mimc.repetitions must be at least 1");
  rc.mimc_variables = static_cast<int>(cfg.get_int("mimc.variables", rc.fit_variables));
  if (rc.deterministic) rc.mimc_variables = 0;
  if (rc.mimc_variables < 0 || rc.mimc_variables > rc.modes) {
    throw ConfigError("mimc.variables must lie in 0..problem.modes");
  }

  rc.solve_alpha = cfg.has("solve.alpha") ? cfg.get_ints("solve.alpha")
                                          : std::vector<int>(static_cast<std::size_t>(rc.d), 1);
  if (static_cast<int>(rc.solve_alpha.size()) != rc.d) throw ConfigError("solve.alpha needs d entries");
  for (int a : rc.solve_alpha) {
    if (a < 1) throw ConfigError("solve.alpha entries start at 1");
  }
  rc.solve_y = parse_point(cfg.get_string("solve.y", ""));
  if (!rc.solve_y.empty() && rc.solve_y.back().first > rc.modes) {
    throw ConfigError("solve.y activates a direction beyond problem.modes");
  }

  std::string text;
  for (const auto& [k, v] : cfg.values()) {
    if (k.rfind("output.", 0) == 0) continue;
    text += k + " = " + v + "\n";
  }
  rc.canonical_text = text;
  return rc;
}

Context make_context(const RunConfig& cfg) {
  Context ctx;
  FieldSpec spec{cfg.d, cfg.nu, cfg.modes};
  ctx.field = std::make_shared<const RandomField>(spec);
  ctx.qoi.sigma = cfg.sigma;
  ctx.qoi.x0 = cfg.x0;
  ctx.solver.tolerance = cfg.tolerance;
  ctx.solver.preconditioner = cfg.preconditioner;
  ctx.problem = make_pde_problem(ctx.field, ctx.qoi, ctx.solver);
  if (cfg.deterministic) ctx.problem.max_variable = 0;
  return ctx;
}

std::vector<std::pair<int, double>> lebesgue_rows(int max_beta) {
  if (max_beta < 1 || max_beta > kMaxQuadLevel) {
    throw ConfigError("max beta must lie in 1.." + std::to_string(kMaxQuadLevel));
  }
  std::vector<std::pair<int, double>> rows;
  for (int b = 1; b <= max_beta; ++b) rows.emplace_back(b, leb_delta(b));
  return rows;
}

std::string lebesgue_csv(int max_beta) {
  std::string out = "beta,leb_delta\n";
  for (const auto& [b, v] : lebesgue_rows(max_beta)) {
    out += std::to_string(b) + "," + format_double(v) + "\n";
  }
  return out;
}

json predict_report(const RunConfig& cfg) {
  json variants = json::array();
  for (auto v : {SummabilityVariant::theory, SummabilityVariant::square, SummabilityVariant::improved}) {
    json entry;
    try {
      entry = prediction_to_json(predict_example(cfg.nu, cfg.d, cfg.gamma, v));
    } catch (const ConfigError& e) {
      entry = {{"variant", to_string(v)}, {"r_misc", nullptr}, {"error", e.what()}};
    }
    variants.push_back(entry);
  }
  bool any = false;
  for (const auto& v : variants) any = any || !v["r_misc"].is_null();
  if (!any) throw ConfigError("nu is inadmissible for every variant");

  const std::vector<double> gamma(static_cast<std::size_t>(cfg.d), cfg.gamma);
  const std::vector<double> dims(static_cast<std::size_t>(cfg.d), 1.0);
  json table = json::array();
  for (int s = 0; s <= static_cast<int>(std::ceil(cfg.nu)); ++s) {
    table.push_back({{"s", s}, {"r_det", r_det(s, gamma, dims)}});
  }
  return {{"inputs", {{"nu", cfg.nu}, {"d", cfg.d}, {"gamma", cfg.gamma}}},
          {"variants", variants},
          {"r_det", table}};
}

ErrorModel fit_model(const RunConfig& cfg, Estimator& estimator) {
  if (cfg.fit_synthetic) {
    const int nv = cfg.fit_variables > 0 ? cfg.fit_variables : 4;
    ErrorModel truth;
    truth.r_fem = cfg.r_fem;
    truth.C_E = 0.7;
    for (int j = 1; j <= nv; ++j) truth.g_tilde.push_back(0.4 + 0.25 * j);
    std::vector<RateSample> samples;
    for (const auto& idx : pilot_design(estimator.problem().spatial_dims, nv, cfg.pilot_depth)) {
      samples.push_back(RateSample{idx, error_contribution_model(idx, truth)});
    }
    return fit_rates(samples, cfg.r_fem);
  }
  if (cfg.fit_variables == 0) {
    ErrorModel m;
    m.r_fem = cfg.r_fem;
    return m;
  }
  const double root = std::fabs(estimator.tensor(root_index(cfg.d).alpha, {}));
  const double floor = (cfg.d == 1 ? 1e-12 : 100.0 * cfg.tolerance) * root;
  const auto samples = pilot_samples(estimator, cfg.fit_variables, cfg.pilot_depth, floor);
  ErrorModel m = fit_rates(samples, cfg.r_fem);
  for (std::size_t j = 0; j < m.g_tilde.size(); ++j) {
    if (!(m.g_tilde[j] > 0.0)) {
      throw NumericalError("fitted rate for direction " + std::to_string(j + 1) +
                           " is not positive");
    }
  }
  return m;
}

ErrorModel resolve_model(const RunConfig& cfg, Estimator& estimator) {
  if (cfg.model_path) return model_from_json(json::parse(read_text(*cfg.model_path)));
  return fit_model(cfg, estimator);
}

std::vector<double> budget_ladder(const RunConfig& cfg) {
  if (!cfg.budgets.empty()) return cfg.budgets;
  const double root = static_cast<double>(work_of(root_index(cfg.d)));
  std::vector<double> out;
  for (int k = 1; k <= cfg.budget_count; ++k) out.push_back(root * std::pow(4.0, k));
  return out;
}

IndexSet build_for_budget(const RunConfig& cfg, Estimator& estimator, const ErrorModel& model,
                          double budget) {
  const WorkModel work = WorkModel::uniform(cfg.d, cfg.gamma);
  if (cfg.mode == "bruteforce") {
    const IndexSet universe = make_universe(cfg.d, cfg.universe_level,
                                            std::min(cfg.universe_vars, estimator.problem().max_variable));
    return build_set_bruteforce(universe, estimator, SelectionCriterion::budget(budget), &work,
                                &model)
        .selection.set;
  }
  return build_set_apriori(cfg.d, work, model, SelectionCriterion::budget(budget),
                           cfg.frontier_width)
      .set;
}

double fit_slope(const std::vector<double>& work, const std::vector<double>& error) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (work[i] > 0.0 && error[i] > 0.0) {
      x.push_back(std::log(work[i]));
      y.push_back(std::log(error[i]));
    }
  }
  if (x.size() < 2) throw NumericalError("need two positive (work, error) pairs to fit a slope");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw NumericalError("all runs have the same work; slope undefined");
  return sxy / sxx;
}

namespace {

double reference_value(const RunConfig& cfg, Estimator& estimator, const ErrorModel& model,
                       double max_budget, bool write) {
  if (cfg.reference != "auto") {
    double v = 0.0;
    std::istringstream is(cfg.reference);
    if ((is >> v) && is.eof()) return v;
    return json::parse(read_text(cfg.reference)).at("value").get<double>();
  }
  std::string hashed = cfg.canonical_text;
  if (cfg.model_path) hashed += read_text(*cfg.model_path);
  std::ostringstream hs;
  hs << std::hex << fnv1a(hashed);
  const std::string hash = hs.str();
  const auto path = cfg.directory / "reference.json";
  if (std::filesystem::exists(path)) {
    const json doc = json::parse(read_text(path));
    if (doc.value("hash", "") == hash) return doc.at("value").get<double>();
  }
  const double budget = 4.0 * max_budget;
  const IndexSet set = build_for_budget(cfg, estimator, model, budget);
  const double value = estimator.evaluate(set, EvalMode::combination).value;
  if (write) {
    const json doc = {{"value", value}, {"hash", hash}, {"budget", budget}, {"work", total_work(set)}};
    write_text(path, doc.dump(2) + "\n");
  }
  return value;
}

}  // namespace

RunSummary run_study(const RunConfig& cfg, bool write) {
  Context ctx = make_context(cfg);
  Estimator estimator(ctx.problem, cfg.threads);
  RunSummary summary;
  summary.model = resolve_model(cfg, estimator);
  const auto budgets = budget_ladder(cfg);

  std::vector<double> estimates;
  for (double b : budgets) {
    IndexSet set = build_for_budget(cfg, estimator, summary.model, b);
    const EstimateReport rep = estimator.evaluate(set, EvalMode::combination);
    RunRecord rec;
    rec.budget = b;
    rec.work = rep.work;
    rec.estimate = rep.value;
    rec.max_alpha = set.max_alpha();
    rec.max_beta = set.max_beta();
    rec.last_var = set.last_var();
    rec.joint_vars = set.joint_vars();
    summary.records.push_back(rec);
    summary.sets.push_back(std::move(set));
  }
  summary.reference = reference_value(cfg, estimator, summary.model, budgets.back(), write);
  std::vector<double> w, e;
  for (auto& rec : summary.records) {
    rec.abs_error = std::fabs(rec.estimate - summary.reference);
    w.push_back(static_cast<double>(rec.work));
    e.push_back(rec.abs_error);
  }
  summary.slope = fit_slope(w, e);

  if (write) {
    write_text(cfg.directory / "runs.csv", runs_csv(summary));
    for (std::size_t k = 0; k < summary.sets.size(); ++k) {
      write_text(cfg.directory / "sets" / ("set_" + std::to_string(k) + ".json"),
                 index_set_to_json(summary.sets[k]).dump(1) + "\n");
    }
  }
  return summary;
}

std::vector<CompareRow> compare_study(const RunConfig& cfg, bool write) {
  const RunSummary misc_runs = run_study(cfg, false);
  Context ctx = make_context(cfg);
  MimcSetup setup{cfg.mimc_levels, cfg.mimc_variables};

  std::vector<CompareRow> rows;
  for (const auto& rec : misc_runs.records) {
    CompareRow row;
    row.budget = rec.budget;
    row.misc_work = rec.work;
    row.misc_error = rec.abs_error;
    const auto counts =
        mimc_allocation(ctx.problem, setup, rec.budget, cfg.mimc_pilot, cfg.seed, cfg.threads);
    double sq = 0.0, work = 0.0;
    for (int r = 0; r < cfg.mimc_repetitions; ++r) {
      const auto res = mimc_estimate(ctx.problem, setup, counts,
                                     cfg.seed + 7919ULL * static_cast<std::uint64_t>(r + 1), cfg.threads);
      const double err = res.value - misc_runs.reference;
      sq += err * err;
      work += static_cast<double>(res.work);
    }
    row.mimc_error = std::sqrt(sq / cfg.mimc_repetitions);
    row.mimc_work = work / cfg.mimc_repetitions;
    rows.push_back(row);
  }
  if (write) write_text(cfg.directory / "compare.csv", compare_csv(rows));
  return rows;
}

double solve_single(const RunConfig& cfg) {
  Context ctx = make_context(cfg);
  return ctx.problem.eval(cfg.solve_alpha, cfg.solve_y);
}

std::string runs_csv(const RunSummary& summary) {
  std::string out = "budget,work,estimate,abs_error,max_alpha,max_beta,last_var,joint_vars\n";
  for (const auto& r : summary.records) {
    out += format_double(r.budget) + "," + std::to_string(r.work) + "," + format_double(r.estimate) +
           "," + format_double(r.abs_error) + "," + std::to_string(r.max_alpha) + "," +
           std::to_string(r.max_beta) + "," + std::to_string(r.last_var) + "," +
           std::to_string(r.joint_vars) + "\n";
  }
  out += "# slope = " + format_double(summary.slope) + "\n";
  out += "# reference = " + format_double(summary.reference) + "\n";
  return out;
}

std::vector<RunRecord> parse_runs_csv(const std::string& text) {
  std::vector<RunRecord> out;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      if (line != "budget,work,estimate,abs_error,max_alpha,max_beta,last_var,joint_vars") {
        throw ConfigError("unexpected runs.csv header");
      }
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ConfigError("runs.csv row with " + std::to_string(f.size()) + " fields");
    RunRecord r;
    r.budget = std::stod(f[0]);
    r.work = std::stoll(f[1]);
    r.estimate = std::stod(f[2]);
    r.abs_error = std::stod(f[3]);
    r.max_alpha = std::stoi(f[4]);
    r.max_beta = std::stoi(f[5]);
    r.last_var = std::stoi(f[6]);
    r.joint_vars = std::stoi(f[7]);
    out.push_back(r);
  }
  return out;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = "budget,misc_work,misc_error,mimc_work,mimc_error\n";
  for (const auto& r : rows) {
    out += format_double(r.budget) + "," + std::to_string(r.misc_work) + "," +
           format_double(r.misc_error) + "," + format_double(r.mimc_work) + "," +
           format_double(r.mimc_error) + "\n";
  }
  return out;
}

}  // namespace misc
