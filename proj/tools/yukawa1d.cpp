// Command-line front end: spectrum | correlator | tadpole | selfenergy | loops | mc | verify.

#include "run_config.hpp"

#include <yukawa1d/analytic.hpp>
#include <yukawa1d/exactdiag.hpp>
#include <yukawa1d/format.hpp>
#include <yukawa1d/lattice.hpp>
#include <yukawa1d/loops.hpp>
#include <yukawa1d/matsubara.hpp>
#include <yukawa1d/model.hpp>
#include <yukawa1d/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace yukawa1d;
using cli::RunConfig;
using json = nlohmann::ordered_json;

json to_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(std::vector<std::complex<double>> const& zs)
{
  json a = json::array();
  for (auto const& z : zs)
    a.push_back(to_json(z));
  return a;
}

json to_json(lattice::ChainEstimate const& e)
{
  return json{{"mean", e.mean},           {"stderr", e.std_error},   {"tau_int", e.tau_int},
              {"samples", e.samples},     {"block_size", e.block_size}, {"plateau", e.plateau}};
}

json params_json(RunConfig const& c)
{
  return json{{"m", c.m},
              {"mu", c.mu},
              {"lambda", c.lambda},
              {"beta", c.beta.is_finite() ? json(c.beta.value()) : json("inf")}};
}

std::string csv(double v) { return format_double(v); }

double finite_beta(RunConfig const& c, char const* command)
{
  if (c.beta.is_infinite())
    throw cli::ConfigError(std::string("invalid value for beta: '") + command + "' needs a finite beta");
  return c.beta.value();
}

void cmd_spectrum(RunConfig const& c, std::ostream& os)
{
  auto p = c.params();
  p.beta = InverseTemperature::infinite();
  auto const eig = exactdiag::solve(p, c.n_max);
  int const levels = std::min(c.levels, c.n_max + 1);
  os << "sector,n,analytic,exactdiag,difference\n";
  for (auto s : {analytic::Sector::Bosonic, analytic::Sector::Fermionic}) {
    std::vector<double> e;
    for (std::size_t i = 0; i < eig.size(); ++i)
      if (eig.sectors[i] == s)
        e.push_back(eig.energies[i]);
    for (int n = 0; n < levels; ++n) {
      double const a = analytic::energy(p, {s, n});
      double const d = e[static_cast<std::size_t>(n)];
      os << (s == analytic::Sector::Bosonic ? "boson" : "fermion") << ',' << n << ',' << csv(a) << ',' << csv(d)
         << ',' << csv(d - a) << '\n';
    }
  }
}

void cmd_correlator(RunConfig const& c, std::ostream& os)
{
  double const beta = finite_beta(c, "correlator");
  auto const p = c.params();

  std::optional<lattice::ChainResult> chain;
  std::vector<double> taus = c.taus;
  if (c.mc) {
    if (!taus.empty())
      throw cli::ConfigError("invalid value for tau: the Monte Carlo columns use the lattice grid");
    lattice::McParams mc;
    mc.sweeps = c.sweeps;
    mc.thermalization = c.thermalization;
    mc.seed = c.seed;
    mc.stream = c.stream;
    chain = lattice::run_chain(p, {c.n_tau, beta}, mc);
    taus = chain->tau;
  } else if (taus.empty()) {
    for (int i = 0; i < c.points; ++i)
      taus.push_back(beta * i / (c.points - 1));
  }
  for (double t : taus)
    if (!(t >= 0.0 && t <= beta))
      throw cli::ConfigError("invalid value for tau: '" + csv(t) + "' lies outside [0, beta]");

  auto const eig = exactdiag::solve(p, c.n_max);
  auto const q = exactdiag::position_operator(eig.basis, p.m);
  exactdiag::TwoPointFunction const g(q, q, eig, p.beta, Statistics::Bosonic);
  NumericPolicy policy;
  policy.winding_cutoff = c.winding_cutoff;

  os << "tau,analytic,exactdiag,perturbative,mc_mean,mc_stderr\n";
  for (std::size_t i = 0; i < taus.size(); ++i) {
    double const t = taus[i];
    os << csv(t) << ',' << csv(analytic::exact_thermal_two_point(p, t)) << ',' << csv(g(t)) << ',';
    if (p.mu > 0.0)
      os << csv(matsubara::perturbative_thermal_two_point(p, t, policy));
    os << ',';
    if (chain)
      os << csv(chain->correlator[i].mean) << ',' << csv(chain->correlator[i].std_error);
    else
      os << ',';
    os << '\n';
  }
}

void cmd_tadpole(RunConfig const& c, std::ostream& os)
{
  auto p = c.params();
  json out;
  out["params"] = params_json(c);

  auto zero = p;
  zero.beta = InverseTemperature::infinite();
  json zt = json::object();
  for (auto scheme : {RegularizationScheme::TimeSplitting, RegularizationScheme::Symmetric}) {
    auto const r = matsubara::tadpole_phi(zero, scheme);
    zt[to_string(scheme)] = json{{"value", r.value}, {"loop_integral", r.loop_integral}};
  }
  auto const eig0 = exactdiag::solve(zero, c.n_max);
  auto const q0 = exactdiag::position_operator(eig0.basis, p.m);
  zt["exactdiag_ground_q"] = exactdiag::thermal_expectation(q0, eig0, zero.beta);
  zt["selected_scheme"] = to_string(c.scheme);
  out["zero_temperature"] = zt;

  if (p.beta.is_finite()) {
    auto const r = matsubara::tadpole_phi_thermal(p, c.winding_cutoff);
    auto const eig = exactdiag::solve(p, c.n_max);
    auto const q = exactdiag::position_operator(eig.basis, p.m);
    out["thermal"] = json{{"first_order", r.value},
                          {"winding_sum", r.winding_sum},
                          {"tail_bound", r.tail_bound},
                          {"windings", r.windings},
                          {"exactdiag_q", exactdiag::thermal_expectation(q, eig, p.beta)}};
  }
  os << out.dump(2) << '\n';
}

json self_energy_json(matsubara::SelfEnergyValue const& s)
{
  return json{{"momentum", s.momentum},
              {"value", to_json(s.value)},
              {"check", to_json(s.check)},
              {"check_error", s.check_error},
              {"beta_delta", s.beta_delta},
              {"route", s.route}};
}

void cmd_selfenergy(RunConfig const& c, std::ostream& os)
{
  auto const p = c.params();
  json out;
  out["params"] = params_json(c);
  out["kind"] = c.kind;
  json samples = json::array();

  if (c.kind == "fermion") {
    auto zero = p;
    zero.beta = InverseTemperature::infinite();
    for (double k : matsubara::pole_fit_grid(p.m))
      samples.push_back(self_energy_json(matsubara::fermion_self_energy_2(zero, k)));
    out["samples"] = samples;
    auto const fit = matsubara::extract_pole_decomposition(zero);
    auto const pred = analytic::predicted_pole_decomposition(zero);
    out["pole_fit"] = json{{"delta_mu", fit.delta_mu}, {"z1f", fit.z1f}};
    out["predicted"] = json{{"delta_mu", pred.delta_mu}, {"z1f", pred.z1f}};
  } else {
    NumericPolicy policy;
    policy.winding_cutoff = c.winding_cutoff;
    if (p.beta.is_infinite()) {
      for (double k : matsubara::pole_fit_grid(p.m))
        samples.push_back(self_energy_json(matsubara::boson_self_energy_2(p, k, policy)));
    } else {
      for (int n = -c.frequencies; n <= c.frequencies; ++n)
        samples.push_back(self_energy_json(matsubara::boson_self_energy_2(
          p, MatsubaraFrequency{Statistics::Bosonic, n, p.beta.value()}, policy)));
      out["real_space_correction"] = matsubara::boson_correction_real_space(p, policy);
    }
    out["samples"] = samples;
  }
  os << out.dump(2) << '\n';
}

void cmd_loops(RunConfig const& c, std::ostream& os)
{
  double const beta = finite_beta(c, "loops");
  int j = c.j;
  std::vector<std::int64_t> momenta = c.momenta;
  if (j == 0)
    j = static_cast<int>(momenta.size());
  if (j == 0)
    throw cli::ConfigError("invalid value for j: give j or a momenta list");
  if (momenta.empty())
    momenta.assign(static_cast<std::size_t>(j), 0);

  loops::LoopSpec const spec{j, momenta, c.mu, beta, c.winding_cutoff};
  auto const r = loops::connected_loop(spec);
  auto const sym = loops::permutation_symmetrized_loop(j, momenta, c.mu, beta, c.winding_cutoff);

  json out;
  out["params"] = params_json(c);
  out["j"] = j;
  out["momenta"] = momenta;
  out["value"] = to_json(r.value);
  out["closed_form"] = to_json(r.closed_form);
  out["degeneracy"] = r.degeneracy;
  out["polynomial"] = to_json(r.polynomial);
  out["windings"] = to_json(r.windings);
  out["tail_bound"] = r.tail_bound;
  out["fast_path"] = r.fast_path;
  out["symmetrized"] = json{{"value", sym.value},
                            {"imaginary_residual", sym.imaginary_residual},
                            {"orderings", to_json(sym.orderings)}};
  os << out.dump(2) << '\n';
}

void cmd_mc(RunConfig const& c, std::ostream& os)
{
  double const beta = finite_beta(c, "mc");
  lattice::McParams mc;
  mc.sweeps = c.sweeps;
  mc.thermalization = c.thermalization;
  mc.seed = c.seed;
  mc.stream = c.stream;
  std::ofstream samples;
  if (!c.samples.empty()) {
    samples.open(c.samples);
    if (!samples)
      throw cli::ConfigError("invalid value for samples: cannot open '" + c.samples + "'");
    mc.samples = &samples;
  }
  auto const r = lattice::run_chain(c.params(), {c.n_tau, beta}, mc);

  json corr = json::array();
  for (std::size_t k = 0; k < r.tau.size(); ++k) {
    json e = to_json(r.correlator[k]);
    corr.push_back(json{{"tau", r.tau[k]}, {"mean", e["mean"]}, {"stderr", e["stderr"]}, {"tau_int", e["tau_int"]}});
  }
  json out;
  out["params"] = params_json(c);
  out["lattice"] = json{{"n_tau", c.n_tau}, {"spacing", beta / c.n_tau}};
  out["phi"] = to_json(r.phi);
  out["correlator"] = corr;
  out["steps"] = json{{"local", r.steps.local}, {"zero_mode", r.steps.zero_mode}};
  out["local_acceptance"] = r.local_acceptance;
  out["zero_mode_acceptance"] = r.zero_mode_acceptance;
  out["thermalized"] = r.thermalized;
  out["drift_sigma"] = r.drift_sigma;
  out["provenance"] = json{{"generator", r.generator},
                           {"seed", r.seed},
                           {"stream", r.stream},
                           {"sweeps", c.sweeps},
                           {"thermalization", c.thermalization}};
  os << out.dump(2) << '\n';
}

bool cmd_verify(RunConfig const& c, std::ostream& os)
{
  verify::Options o;
  o.params = c.params();
  o.scheme = c.scheme;
  o.n_max = c.n_max;
  o.n_tau = c.n_tau;
  o.sweeps = c.sweeps;
  o.thermalization = c.thermalization;
  o.seed = c.seed;
  o.winding_cutoff = c.winding_cutoff;
  auto const r = verify::run(o);

  json checks = json::array();
  for (auto const& k : r.checks)
    checks.push_back(json{{"name", k.name},
                          {"route_a", k.route_a},
                          {"route_b", k.route_b},
                          {"expected", k.expected},
                          {"actual", k.actual},
                          {"abs_err", k.abs_err},
                          {"tolerance", k.tolerance},
                          {"pass", k.pass}});
  json prov = json::object();
  for (auto const& [k, v] : r.provenance)
    prov[k] = v;
  os << json{{"checks", checks}, {"pass", r.pass}, {"provenance", prov}}.dump(2) << '\n';
  return r.pass;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"yukawa1d: Yukawa quantum mechanics in 0+1 dimensions"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);

  // flag -> config key; values are parsed by the config layer so that file and
  // command line share one set of rules and error messages
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> overrides;
  auto add = [&](CLI::App* where, std::string const& flag, std::string const& key, std::string const& help) {
    overrides.emplace_back(where->add_option(flag, values[flag], help), key);
  };

  add(&app, "--out", "out", "output path (default: standard output)");
  add(&app, "--seed", "seed", "Monte Carlo seed");
  add(&app, "--beta", "beta", "inverse temperature, or inf");
  add(&app, "--m", "m", "boson mass");
  add(&app, "--mu", "mu", "fermion mass");
  add(&app, "--lambda", "lambda", "Yukawa coupling");
  add(&app, "--nmax", "n_max", "oscillator truncation");
  add(&app, "--ntau", "n_tau", "lattice sites");
  add(&app, "--sweeps", "sweeps", "Monte Carlo measurement sweeps");
  add(&app, "--thermalization", "thermalization", "Monte Carlo thermalization sweeps");
  add(&app, "--scheme", "scheme", "time-splitting | symmetric");
  add(&app, "--winding-cutoff", "winding_cutoff", "maximum winding number");

  auto* spectrum = app.add_subcommand("spectrum", "analytic vs diagonalized levels (CSV)");
  add(spectrum, "--levels", "levels", "levels per sector");

  auto* correlator = app.add_subcommand("correlator", "thermal <phi(tau) phi(0)> (CSV)");
  add(correlator, "--points", "points", "uniform tau grid size");
  add(correlator, "--tau", "tau", "comma-separated tau values");
  add(correlator, "--stream", "stream", "Monte Carlo stream");
  bool with_mc = false;
  correlator->add_flag("--mc", with_mc, "add Monte Carlo columns on the lattice grid");

  auto* tadpole = app.add_subcommand("tadpole", "<phi> at zero and finite temperature (JSON)");

  auto* selfenergy = app.add_subcommand("selfenergy", "order lambda^2 self-energies (JSON)");
  add(selfenergy, "--kind", "kind", "fermion | boson");
  add(selfenergy, "--frequencies", "frequencies", "bosonic grid |n| <= N");

  auto* loops_cmd = app.add_subcommand("loops", "connected fermion loop (JSON)");
  add(loops_cmd, "--j", "j", "number of insertions");
  add(loops_cmd, "--momenta", "momenta", "comma-separated bosonic grid indices");

  auto* mc = app.add_subcommand("mc", "lattice Monte Carlo chain (JSON)");
  add(mc, "--stream", "stream", "Monte Carlo stream");
  add(mc, "--samples", "samples", "write per-sweep measurements to this file");

  auto* verify_cmd = app.add_subcommand("verify", "cross-route verification report (JSON)");

  for (auto* sub : app.get_subcommands({}))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e);
  }

  RunConfig cfg;
  std::ostringstream buffer;
  bool ok = true;
  try {
    if (!config_path.empty())
      cli::load_config_file(cfg, config_path);
    for (auto const& [opt, key] : overrides)
      if (opt->count() > 0)
        cli::apply(cfg, key, opt->as<std::string>());
    if (with_mc)
      cfg.mc = true;
    cli::validate(cfg);
    cfg.params().validate();

    if (spectrum->parsed())
      cmd_spectrum(cfg, buffer);
    else if (correlator->parsed())
      cmd_correlator(cfg, buffer);
    else if (tadpole->parsed())
      cmd_tadpole(cfg, buffer);
    else if (selfenergy->parsed())
      cmd_selfenergy(cfg, buffer);
    else if (loops_cmd->parsed())
      cmd_loops(cfg, buffer);
    else if (mc->parsed())
      cmd_mc(cfg, buffer);
    else if (verify_cmd->parsed())
      ok = cmd_verify(cfg, buffer);
  } catch (cli::ConfigError const& e) {
    std::cerr << "yukawa1d: " << e.what() << '\n';
    return 2;
  } catch (std::exception const& e) {
    std::cerr << "yukawa1d: " << e.what() << '\n';
    return 1;
  }

  if (cfg.out.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "yukawa1d: invalid value for out: cannot open '" << cfg.out << "'\n";
      return 2;
    }
    f << buffer.str();
  }
  if (!ok) {
    std::cerr << "yukawa1d: verification failed\n";
    return 1;
  }
  return 0;
}
