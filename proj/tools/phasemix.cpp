// Command-line front end: validate models, evaluate the conditional
// exit-time laws on grids, compute long-run limits, run the Monte Carlo
// estimator, and emit the built-in example models with their data files.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <phasemix/phasemix.hpp>

namespace {

using namespace phasemix;

/// 17 significant digits: round-trip exact for double, '.' decimal point.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct ScenarioFlags {
  double t = 0.0;
  std::size_t state = 0;    // 1-based; 0 = unconditioned (survival form)
  std::size_t initial = 0;  // 1-based; 0 = unspecified
};

Scenario build_scenario(const ScenarioFlags& f, const MixtureModel& model) {
  if (f.state > model.n || f.initial > model.n)
    throw std::invalid_argument("scenario state index out of range");
  if (f.state > 0 && f.initial > 0)
    return InitialAndCurrent{f.initial - 1, f.state - 1, f.t};
  if (f.state > 0) return CurrentOnly{f.state - 1, f.t};
  if (f.initial > 0) return AliveInitial{f.initial - 1, f.t};
  return AliveCurrentOnly{f.t};
}

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--t", f.t, "conditioning time (default 0)");
  cmd->add_option("--state", f.state,
                  "current state (1-based); omit for the survival form");
  cmd->add_option("--initial", f.initial, "initial state (1-based)");
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write output file: " + path);
  return file;
}

void emit_univariate(std::ostream& os, const EvalContext& c, double smax,
                     double step, const std::string& format) {
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  nlohmann::json rows = nlohmann::json::array();
  if (format == "csv") os << "s,survival,density\n";
  for (double s = c.wt.t; s <= smax + 1e-12; s += step) {
    const double surv = surv_uni(c.blocks, c.wt, s);
    const double dens = dens_uni(c.blocks, c.wt, s).value;
    if (format == "csv")
      os << fmt(s) << "," << fmt(surv) << "," << fmt(dens) << "\n";
    else
      rows.push_back({{"s", s}, {"survival", surv}, {"density", dens}});
  }
  if (format != "csv") os << rows.dump(2) << "\n";
}

void emit_bivariate_grid(std::ostream& os, const EvalContext& c,
                         const ClosedSetFamily& family, double lo, double hi,
                         double step, const std::string& format) {
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  nlohmann::json rows = nlohmann::json::array();
  if (format == "csv") os << "t1,t2,region,value\n";
  bool atom_emitted = false;
  auto emit = [&](double t1, double t2, const DensityDecomposition& d) {
    if (format == "csv")
      os << fmt(t1) << "," << fmt(t2) << "," << region_name(d.region) << ","
         << fmt(d.value) << "\n";
    else
      rows.push_back({{"t1", t1},
                      {"t2", t2},
                      {"region", region_name(d.region)},
                      {"value", d.value}});
  };
  for (double t1 = lo; t1 <= hi + 1e-12; t1 += step)
    for (double t2 = lo; t2 <= hi + 1e-12; t2 += step) {
      const DensityDecomposition d = dens_biv(c.blocks, family, c.wt, t1, t2);
      if (d.region == Region::Atom) atom_emitted = true;
      emit(t1, t2, d);
    }
  if (!atom_emitted)
    emit(c.wt.t, c.wt.t, dens_biv(c.blocks, family, c.wt, c.wt.t, c.wt.t));
  if (format != "csv") os << rows.dump(2) << "\n";
}

void emit_marginal(std::ostream& os, const StructuredBlocks& sb,
                   const Weighting& wt, int which, double smax, double step) {
  os << "s,density\n";
  for (double s = wt.t; s <= smax + 1e-12; s += step)
    os << fmt(s) << "," << fmt(structured_marginal(sb, wt, which, s)) << "\n";
}

int run_example(const std::string& name, const MarshallOlkinParams& mo,
                const BirthDeathParams& bd, const ScenarioFlags& sf,
                const std::string& out_dir) {
  ModelFile mf;
  if (name == "exponential") {
    MarshallOlkinParams p = mo;
    p.a3 = p.b3 = 0.0;
    mf = example_marshall_olkin(p);
  } else if (name == "marshall-olkin") {
    mf = example_marshall_olkin(mo);
  } else if (name == "birth-death") {
    mf = example_birth_death(bd);
  } else {
    throw std::invalid_argument("unknown example: " + name);
  }
  const auto rep = validate(mf.model, &mf.family);
  if (!rep.ok()) throw std::runtime_error("example model invalid:\n" + rep.to_string());

  const std::string prefix = out_dir.empty() ? name : out_dir + "/" + name;
  save_model(mf, prefix + "_model.json");

  ScenarioFlags f = sf;
  if (name != "birth-death" && f.state == 0 && f.initial == 0)
    f.state = 1;  // the small models condition on starting state 1
  const Scenario sc = build_scenario(f, mf.model);
  const EvalContext c = make_context(mf.model, sc);

  {
    std::ofstream grid(prefix + "_grid.csv");
    if (!grid) throw std::runtime_error("cannot write grid file");
    // header comment row with the conditioned state weights on the common
    // complement, then the density grid
    grid << "# alpha";
    for (std::size_t i = 0; i < c.wt.w.size(); ++i)
      grid << "," << fmt(c.wt.w[i]);
    grid << "\n";
    emit_bivariate_grid(grid, c, mf.family, f.t, f.t + 8.0, 0.1, "csv");
  }
  const StructuredBlocks sb = structured_blocks(c.blocks, mf.family);
  for (int which : {1, 2}) {
    std::ofstream marg(prefix + "_marginal" + std::to_string(which) + ".csv");
    if (!marg) throw std::runtime_error("cannot write marginal file");
    emit_marginal(marg, sb, c.wt, which, f.t + 8.0, 0.1);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional exit-time laws of Markov mixture processes"};
  app.require_subcommand(1);

  std::string model_path, out_path, format = "csv";
  std::uint64_t seed = 0;
  ScenarioFlags sf;

  auto add_common = [&](CLI::App* cmd, bool need_model) {
    if (need_model)
      cmd->add_option("--model", model_path, "model JSON file")->required();
    cmd->add_option("--out", out_path, "output file (default stdout)");
    cmd->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", seed, "random seed");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check model invariants");
  add_common(validate_cmd, true);

  auto* uni_cmd = app.add_subcommand("univariate",
                                     "survival and density of the absorption time");
  add_common(uni_cmd, true);
  add_scenario_flags(uni_cmd, sf);
  double smax = -1.0, step = 0.1;
  uni_cmd->add_option("--smax", smax, "grid end (default t+8)");
  uni_cmd->add_option("--step", step, "grid step (default 0.1)");

  auto* biv_cmd = app.add_subcommand("bivariate-grid",
                                     "bivariate density decomposition on a grid");
  add_common(biv_cmd, true);
  add_scenario_flags(biv_cmd, sf);
  double lo = -1.0, hi = -1.0;
  biv_cmd->add_option("--min", lo, "grid start (default t)");
  biv_cmd->add_option("--max", hi, "grid end (default t+8)");
  biv_cmd->add_option("--step", step, "grid step (default 0.1)");

  auto* multi_cmd = app.add_subcommand("multivariate",
                                       "joint survival (and density) at one point");
  add_common(multi_cmd, true);
  add_scenario_flags(multi_cmd, sf);
  std::vector<double> times;
  multi_cmd->add_option("--times", times, "one time per closed set")
      ->required()
      ->delimiter(',');

  auto* limits_cmd = app.add_subcommand("limits", "long-run filter limits");
  add_common(limits_cmd, true);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimates");
  add_common(sim_cmd, true);
  add_scenario_flags(sim_cmd, sf);
  std::string kind = "surv";
  std::size_t n_paths = 100000;
  double horizon = 0.0;
  bool antithetic = false;
  unsigned moment_order = 1;
  sim_cmd->add_option("--kind", kind, "surv|diag-mass|moment|cross-moment")
      ->check(CLI::IsMember({"surv", "diag-mass", "moment", "cross-moment"}));
  sim_cmd->add_option("--times", times, "one time per closed set (surv)")
      ->delimiter(',');
  sim_cmd->add_option("--paths", n_paths, "number of paths");
  sim_cmd->add_option("--horizon", horizon, "censoring horizon (0 = auto)");
  sim_cmd->add_option("--order", moment_order, "moment order (kind=moment)");
  sim_cmd->add_flag("--antithetic", antithetic, "antithetic path pairs");

  auto* ex_cmd = app.add_subcommand("example", "emit a built-in example model");
  std::string ex_name, out_dir;
  ex_cmd->add_option("name", ex_name, "exponential|marshall-olkin|birth-death")
      ->required();
  ex_cmd->add_option("--out", out_dir, "output directory (default cwd)");
  add_scenario_flags(ex_cmd, sf);
  MarshallOlkinParams mo;
  BirthDeathParams bd;
  ex_cmd->add_option("--a1", mo.a1);
  ex_cmd->add_option("--a2", mo.a2);
  ex_cmd->add_option("--a3", mo.a3);
  ex_cmd->add_option("--b1", mo.b1);
  ex_cmd->add_option("--b2", mo.b2);
  ex_cmd->add_option("--b3", mo.b3);
  ex_cmd->add_option("--p1", mo.p1);
  ex_cmd->add_option("--psi", bd.psi);
  ex_cmd->add_option("--delta2", bd.delta2);

  CLI11_PARSE(app, argc, argv);

  try {
    std::ofstream file;
    if (app.got_subcommand("example"))
      return run_example(ex_name, mo, bd, sf, out_dir);

    const ModelFile mf = load_model(model_path);
    const auto rep = validate(mf.model, &mf.family);

    if (app.got_subcommand("validate")) {
      nlohmann::json j;
      j["ok"] = rep.ok();
      j["violations"] = nlohmann::json::array();
      for (const auto& v : rep.violations)
        j["violations"].push_back({{"where", v.where}, {"what", v.what}});
      open_out(file, out_path) << j.dump(2) << "\n";
      return rep.ok() ? 0 : 1;
    }
    if (!rep.ok()) throw std::runtime_error("invalid model:\n" + rep.to_string());

    const Scenario sc = build_scenario(sf, mf.model);

    if (app.got_subcommand("univariate")) {
      const EvalContext c = make_context(mf.model, sc);
      if (smax < 0.0) smax = sf.t + 8.0;
      emit_univariate(open_out(file, out_path), c, smax, step, format);
    } else if (app.got_subcommand("bivariate-grid")) {
      const EvalContext c = make_context(mf.model, sc);
      if (lo < 0.0) lo = sf.t;
      if (hi < 0.0) hi = sf.t + 8.0;
      emit_bivariate_grid(open_out(file, out_path), c, mf.family, lo, hi, step,
                          format);
    } else if (app.got_subcommand("multivariate")) {
      const EvalContext c = make_context(mf.model, sc);
      nlohmann::json j;
      j["times"] = times;
      j["survival"] = surv_multi(c.blocks, mf.family, c.wt, times);
      try {
        j["density"] = dens_multi(c.blocks, mf.family, c.wt, times);
      } catch (const std::invalid_argument&) {
        j["density"] = nullptr;  // tied or boundary times
      }
      open_out(file, out_path) << j.dump(2) << "\n";
    } else if (app.got_subcommand("limits")) {
      nlohmann::json j;
      j["state_limit"] = state_limit(mf.model);
      j["switching_limit"] = nlohmann::json::object();
      for (std::size_t s = 0; s < mf.model.n; ++s)
        j["switching_limit"][std::to_string(s + 1)] =
            switching_limit(mf.model, s);
      j["switching_limit"]["delta"] =
          switching_limit(mf.model, mf.model.delta());
      open_out(file, out_path) << j.dump(2) << "\n";
    } else if (app.got_subcommand("simulate")) {
      SimConfig cfg;
      cfg.n_paths = n_paths;
      cfg.seed = seed;
      cfg.horizon = horizon;
      cfg.antithetic = antithetic;
      Estimate est;
      if (kind == "surv") {
        est = estimate_surv(mf.model, mf.family, sc, times, cfg);
      } else if (kind == "diag-mass") {
        est = estimate_diag_mass(mf.model, mf.family, cfg);
      } else if (kind == "moment") {
        est = estimate_moment(mf.model, moment_order, cfg);
      } else {
        est = estimate_cross_moment(mf.model, mf.family, cfg);
      }
      nlohmann::json j;
      j["estimate"] = est.value;
      j["stderr"] = est.std_error;
      j["n_paths"] = cfg.n_paths;
      j["seed"] = cfg.seed;
      j["n_used"] = est.n_used;
      if (est.censored_fraction > 0.001)
        j["warning"] = "censoring above 0.1%; moment estimates may be biased";
      open_out(file, out_path) << j.dump(2) << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cout << err.dump(2) << "\n";
    return 1;
  }
}
