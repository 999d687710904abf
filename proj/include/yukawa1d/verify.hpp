#ifndef YUKAWA1D_VERIFY_HPP
#define YUKAWA1D_VERIFY_HPP

// Cross-route verification suite. Every check evaluates one quantity by two
// independent routes and records both numbers; the report passes only if
// every check does.

#include <yukawa1d/analytic.hpp>
#include <yukawa1d/exactdiag.hpp>
#include <yukawa1d/format.hpp>
#include <yukawa1d/lattice.hpp>
#include <yukawa1d/loops.hpp>
#include <yukawa1d/matsubara.hpp>
#include <yukawa1d/model.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace yukawa1d::verify {

inline constexpr char const* version = "0.1.0";

struct Check
{
  std::string name;
  std::string route_a;
  std::string route_b;
  double expected{0.0};
  double actual{0.0};
  double abs_err{0.0};
  double tolerance{0.0};
  bool pass{false};
};

struct Report
{
  std::vector<Check> checks;
  bool pass{false};
  std::vector<std::pair<std::string, std::string>> provenance; // insertion ordered
};

struct Options
{
  ModelParams params{1.0, 1.0, 1.0, InverseTemperature::finite(4.0)};
  RegularizationScheme scheme{RegularizationScheme::TimeSplitting};
  int n_max{60};
  int n_tau{64};
  std::int64_t sweeps{1000000}; // 0 skips the Monte Carlo checks
  std::int64_t thermalization{20000};
  std::uint64_t seed{1};
  int winding_cutoff{4000};
  double thermal_beta_fallback{4.0}; // used by thermal checks when beta = inf
};

namespace detail {

inline Check compare(std::string name, std::string route_a, std::string route_b, double expected, double actual,
                     double tolerance)
{
  Check c{std::move(name), std::move(route_a), std::move(route_b), expected, actual, 0.0, tolerance, false};
  c.abs_err = std::abs(actual - expected);
  c.pass = std::isfinite(c.abs_err) && c.abs_err <= tolerance;
  return c;
}

// Runs a block of checks; an exception becomes one failing check carrying the
// message so that a broken route never hides the rest of the report.
inline void guarded(std::vector<Check>& out, std::string const& name, std::function<void()> const& body)
{
  try {
    body();
  } catch (std::exception const& e) {
    double const nan = std::numeric_limits<double>::quiet_NaN();
    out.push_back({name, "error", e.what(), nan, nan, nan, 0.0, false});
  }
}

inline ModelParams with(ModelParams p, double mu, InverseTemperature beta)
{
  p.mu = mu;
  p.beta = beta;
  return p;
}

inline std::vector<double> sector_energies(exactdiag::EigenSystem const& eig, analytic::Sector s)
{
  std::vector<double> out;
  for (std::size_t i = 0; i < eig.size(); ++i)
    if (eig.sectors[i] == s)
      out.push_back(eig.energies[i]);
  return out;
}

} // namespace detail

inline void check_spectrum(Options const& o, std::vector<Check>& out)
{
  using analytic::Sector;
  auto const p = detail::with(o.params, o.params.mu, InverseTemperature::infinite());
  auto const eig = exactdiag::solve(p, o.n_max);
  int const top = std::min(10, o.n_max);
  for (Sector s : {Sector::Bosonic, Sector::Fermionic}) {
    auto const levels = detail::sector_energies(eig, s);
    double worst = 0.0;
    for (int n = 0; n <= top; ++n)
      worst = std::max(worst, std::abs(levels[n] - analytic::energy(p, {s, n})));
    out.push_back(detail::compare(s == Sector::Bosonic ? "spectrum.bosonic_levels" : "spectrum.fermionic_levels",
                                  "exactdiag eigenvalues, n <= 10", "analytic (n+1/2)m [+ mu - lambda^2/2m^2]", 0.0,
                                  worst, 1e-8));
  }

  for (auto obs : {exactdiag::Observable::GroundOverlapSquared, exactdiag::Observable::FermionGroundShift}) {
    std::array<int, 2> const list{o.n_max, o.n_max + 20};
    auto const r = exactdiag::truncation_sweep(p, obs, list, 1e-8);
    out.push_back(detail::compare("truncation_convergence." + exactdiag::to_string(obs),
                                  "exactdiag at n_max = " + std::to_string(o.n_max),
                                  "exactdiag at n_max = " + std::to_string(o.n_max + 20), r.values[1], r.values[0],
                                  1e-8));
  }
}

inline void check_tadpole(Options const& o, std::vector<Check>& out)
{
  double const mu = std::abs(o.params.mu);
  for (double sign : {1.0, -1.0}) {
    auto const p = detail::with(o.params, sign * mu, InverseTemperature::infinite());
    double const first_order = matsubara::tadpole_phi(p, RegularizationScheme::TimeSplitting).value;
    auto const eig = exactdiag::solve(p, o.n_max);
    double const exact = exactdiag::evaluate(exactdiag::Observable::PositionExpectation, p, eig);
    out.push_back(detail::compare(sign > 0 ? "tadpole.time_splitting.mu_positive" : "tadpole.time_splitting.mu_negative",
                                  "matsubara time-splitting tadpole", "exactdiag ground-state <q>", exact,
                                  first_order, 1e-12));
  }
  auto const p = detail::with(o.params, mu, InverseTemperature::infinite());
  double const loop = matsubara::tadpole_phi(p, RegularizationScheme::Symmetric).loop_integral;
  auto const integrand = [&](double k) { return std::complex<double>(mu / (k * k + mu * mu) / (2.0 * std::numbers::pi)); };
  double const quad = matsubara::detail::integrate_line(integrand, matsubara::detail::breakpoints({0.0}, mu), 1e-12).real();
  out.push_back(detail::compare("tadpole.symmetric.loop_integral", "matsubara symmetric scheme",
                                "quadrature of mu/(k^2+mu^2)/2pi", quad, loop, 1e-12));
}

inline void check_pole(Options const& o, std::vector<Check>& out)
{
  auto const p = detail::with(o.params, std::abs(o.params.mu), InverseTemperature::infinite());
  auto const fit = matsubara::extract_pole_decomposition(p);
  auto const pred = analytic::predicted_pole_decomposition(p);
  out.push_back(detail::compare("pole.delta_mu", "self-energy pole fit", "analytic -lambda^2/2m^2", pred.delta_mu,
                                fit.delta_mu, 1e-10));
  out.push_back(detail::compare("pole.z1f", "self-energy pole fit", "analytic lambda^2/2m^3", pred.z1f, fit.z1f, 1e-10));

  auto residual = [&](double lambda) {
    auto const q = p.with_lambda(lambda);
    double const overlap = analytic::ground_state_overlap(q);
    return 1.0 - overlap * overlap - matsubara::extract_pole_decomposition(q).z1f;
  };
  out.push_back(detail::compare("pole.overlap_residual_ratio", "(1 - overlap^2 - Z) at lambda 0.5 over 0.25",
                                "fourth-order scaling", 16.0, residual(0.5) / residual(0.25), 0.2 * 16.0));
}

inline void check_zero_t_boson_loop(Options const& o, std::vector<Check>& out)
{
  auto const p = detail::with(o.params, std::abs(o.params.mu), InverseTemperature::infinite());
  double worst = 0.0;
  for (double q : matsubara::pole_fit_grid(p.m)) {
    auto const r = matsubara::boson_self_energy_2(p, q);
    worst = std::max({worst, std::abs(r.value), std::abs(r.check)});
  }
  out.push_back(detail::compare("selfenergy.zero_T_boson_loop", "quadrature of the fermion loop, 16 momenta",
                                "contour closed above: 0", 0.0, worst, 1e-12));
}

inline void check_thermal_boson(Options const& o, std::vector<Check>& out)
{
  double const mu = std::abs(o.params.mu);
  double const beta = std::log(3.0) / mu;
  auto const p = detail::with(o.params, mu, InverseTemperature::finite(beta));
  NumericPolicy policy;
  policy.winding_cutoff = o.winding_cutoff;
  double const f = fermi_occupation(mu, beta);
  double const coupling = p.lambda * p.lambda / std::pow(p.m, 4);

  auto const connected = matsubara::boson_self_energy_2(p, MatsubaraFrequency{Statistics::Bosonic, 0, beta}, policy);
  out.push_back(detail::compare("thermal.boson_connected_p0", "winding expansion, p = 0 coefficient of beta",
                                "(lambda^2/m^4) f (1 - f)", coupling * f * (1.0 - f), connected.value.real(), 1e-12));
  double const tadpole = matsubara::tadpole_phi_thermal(p, o.winding_cutoff, policy.abs_tol).value;
  out.push_back(detail::compare("thermal.boson_disconnected", "thermal tadpole squared", "(lambda^2/m^4) f^2",
                                coupling * f * f, tadpole * tadpole, 1e-12));
  out.push_back(detail::compare("thermal.boson_total", "boson_correction_real_space", "(lambda^2/m^4) f", coupling * f,
                                matsubara::boson_correction_real_space(p, policy), 1e-12));
  double worst = 0.0;
  for (std::int64_t n = 1; n <= 16; ++n)
    for (std::int64_t s : {n, -n})
      worst = std::max(worst, std::abs(matsubara::boson_self_energy_2(
                                  p, MatsubaraFrequency{Statistics::Bosonic, s, beta}, policy).value));
  out.push_back(detail::compare("thermal.boson_nonzero_grid", "winding phases on the bosonic grid, |n| <= 16",
                                "exact zero", 0.0, worst, 0.0));
}

inline void check_number_correlators(Options const& o, std::vector<Check>& out)
{
  double const mu = std::abs(o.params.mu);
  lattice::Rng rng(o.seed, 1);
  std::vector<double> betas;
  for (int i = 0; i < 10; ++i)
    betas.push_back((0.5 + 2.5 * rng.uniform()) / mu);

  for (int j = 1; j <= 6; ++j)
    detail::guarded(out, "loops.number_correlator.j" + std::to_string(j), [&] {
      double worst = 0.0;
      for (double beta : betas) {
        auto const r = loops::full_number_correlator(j, mu, beta, o.winding_cutoff, 1e-10);
        worst = std::max(worst, std::abs(r.value - r.fermi));
      }
      out.push_back(detail::compare("loops.number_correlator.j" + std::to_string(j),
                                    "sum over set partitions of connected loops", "fermi_occupation", 0.0, worst, 1e-10));
    });
  for (int j = 2; j <= 6; ++j) {
    double worst = 0.0;
    bool all = true;
    for (double beta : betas) {
      auto const r = loops::telescoping_check(j, mu, beta, o.winding_cutoff, 1e-12);
      worst = std::max(worst, r.residual);
      all = all && r.pass;
    }
    auto c = detail::compare("loops.telescoping.j" + std::to_string(j), "term-by-term telescoped series", "-f", 0.0,
                             worst, 1e-12);
    c.pass = c.pass && all;
    out.push_back(std::move(c));
  }
}

inline void check_permutation_cancellation(Options const& o, std::vector<Check>& out)
{
  double const mu = std::abs(o.params.mu);
  double const beta = o.params.beta.is_finite() ? o.params.beta.value() : o.thermal_beta_fallback;
  std::int64_t const n_freq = 100000;

  auto single = [&](std::string const& name, std::vector<std::int64_t> const& mom, bool require_nonzero) {
    loops::LoopSpec const spec{static_cast<int>(mom.size()), mom, mu, beta, o.winding_cutoff, 1e-12};
    auto const a = loops::connected_loop(spec).value;
    auto const b = loops::matsubara_sum_loop(spec, n_freq);
    auto c = detail::compare(name, "winding expansion (complex modulus)",
                             require_nonzero ? "direct frequency sum; ordering must be nonzero" : "direct frequency sum",
                             std::abs(b), std::abs(a), 1e-8 * std::max(1.0, std::abs(b)));
    c.abs_err = std::abs(a - b);
    c.pass = c.abs_err <= c.tolerance && (!require_nonzero || std::abs(b) > 1e-6);
    out.push_back(std::move(c));
  };
  auto symmetrized = [&](std::string const& name, std::vector<std::int64_t> const& mom) {
    auto const s = loops::permutation_symmetrized_loop(static_cast<int>(mom.size()), mom, mu, beta, o.winding_cutoff);
    out.push_back(detail::compare(name, "sum over cyclic orderings", "cancellation", 0.0,
                                  std::max(std::abs(s.value), s.imaginary_residual), 1e-10));
  };

  single("loops.single_ordering.j3.0_p_-p", {0, 1, -1}, true);
  single("loops.single_ordering.j3.0_-p_p", {0, -1, 1}, true);
  symmetrized("loops.symmetrized.j3", {0, 1, -1});

  // (p, -p, q, -q): with q = 0 every ordering has a repeated partial sum and is
  // nonzero; for generic q the orderings whose partial sums are all distinct
  // vanish on their own, so only the sum is required to cancel.
  auto orderings = [&](std::vector<std::int64_t> const& base, bool require_nonzero) {
    std::vector<int> idx{1, 2, 3};
    do {
      std::vector<std::int64_t> const mom{base[0], base[idx[0]], base[idx[1]], base[idx[2]]};
      std::string label;
      for (auto v : mom)
        label += (label.empty() ? "" : "_") + std::to_string(v);
      single("loops.single_ordering.j4." + label, mom, require_nonzero);
    } while (std::next_permutation(idx.begin(), idx.end()));
  };
  orderings({1, -1, 0, 0}, true);
  symmetrized("loops.symmetrized.j4.p_-p_0_0", {1, -1, 0, 0});
  orderings({1, -1, 2, -2}, false);
  symmetrized("loops.symmetrized.j4.p_-p_q_-q", {1, -1, 2, -2});
}

inline void check_thermal_two_point(Options const& o, std::vector<Check>& out)
{
  double const beta = o.params.beta.is_finite() ? o.params.beta.value() : o.thermal_beta_fallback;
  auto const b = InverseTemperature::finite(beta);
  for (bool interacting : {true, false}) {
    auto p = detail::with(o.params, o.params.mu, b);
    if (!interacting)
      p = p.with_lambda(0.0);
    auto const eig = exactdiag::solve(p, o.n_max);
    auto const q = exactdiag::position_operator(eig.basis, p.m);
    exactdiag::TwoPointFunction g(q, q, eig, b, Statistics::Bosonic);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i) {
      double const tau = beta * i / 31.0;
      double const ref = interacting ? analytic::exact_thermal_two_point(p, tau)
                                     : analytic::ho_thermal_correlator(p.m, b, tau);
      worst = std::max(worst, std::abs(g(tau) - ref));
    }
    out.push_back(detail::compare(interacting ? "exactdiag.thermal_two_point" : "exactdiag.free_thermal_two_point",
                                  "exactdiag spectral sum, 32 tau points",
                                  interacting ? "analytic exact_thermal_two_point" : "analytic ho_thermal_correlator", 0.0,
                                  worst, interacting ? 1e-7 : 1e-10));
  }
}

inline void check_thermal_tadpole(Options const& o, std::vector<Check>& out)
{
  double const beta = o.params.beta.is_finite() ? o.params.beta.value() : o.thermal_beta_fallback;
  auto const b = InverseTemperature::finite(beta);
  auto exact_q = [&](ModelParams const& p) {
    return exactdiag::evaluate(exactdiag::Observable::PositionExpectation, p, exactdiag::solve(p, o.n_max));
  };
  auto const p = detail::with(o.params, o.params.mu, b);
  out.push_back(detail::compare("thermal_tadpole.exact", "exactdiag <q>", "-(lambda/m^2) f(mu_lambda)",
                                analytic::phi_vev_fermion(p) * fermi_occupation(analytic::mass_shift(p), beta),
                                exact_q(p), 1e-8));
  out.push_back(detail::compare("thermal_tadpole.first_order", "winding sum", "-(lambda/m^2) f(mu)",
                                analytic::phi_vev_fermion(p) * fermi_occupation(p.mu, beta),
                                matsubara::tadpole_phi_thermal(p, o.winding_cutoff).value, 1e-12));
  auto diff = [&](double lambda) {
    auto const q = p.with_lambda(lambda);
    return exact_q(q) - matsubara::tadpole_phi_thermal(q, o.winding_cutoff).value;
  };
  out.push_back(detail::compare("thermal_tadpole.cubic_scaling", "(exact - first order) at lambda 0.25 over 0.125",
                                "third-order scaling", 8.0, diff(0.25) / diff(0.125), 0.25 * 8.0));
}

inline void check_monte_carlo(Options const& o, std::vector<Check>& out)
{
  double const beta = o.params.beta.is_finite() ? o.params.beta.value() : o.thermal_beta_fallback;
  auto const b = InverseTemperature::finite(beta);
  auto const p = detail::with(o.params, o.params.mu, b);
  lattice::LatticeConfig const lat{o.n_tau, beta};
  lattice::McParams mc;
  mc.sweeps = o.sweeps;
  mc.thermalization = o.thermalization;
  mc.seed = o.seed;
  auto const chain = lattice::run_chain(p, lat, mc);

  auto const eig = exactdiag::solve(p, o.n_max);
  auto const q = exactdiag::position_operator(eig.basis, p.m);
  double const phi_exact = exactdiag::thermal_expectation(q, eig, b);
  double const corr_exact = exactdiag::time_ordered_two_point(q, q, beta / 2.0, eig, b, Statistics::Bosonic);
  auto const& half = chain.correlator[static_cast<std::size_t>(o.n_tau / 2)];

  out.push_back(detail::compare("mc.phi", "lattice Monte Carlo", "exactdiag <q>, tolerance 3 stderr", phi_exact,
                                chain.phi.mean, 3.0 * chain.phi.std_error));
  out.push_back(detail::compare("mc.phi_phi_half_beta", "lattice Monte Carlo",
                                "exactdiag <q(beta/2) q(0)>, tolerance 3 stderr", corr_exact, half.mean,
                                3.0 * half.std_error));
  out.push_back(detail::compare("mc.phi.relative_stderr", "binned stderr / |mean|", "target", 0.0,
                                chain.phi.std_error / std::abs(chain.phi.mean), 0.01));
  out.push_back(detail::compare("mc.phi_phi_half_beta.relative_stderr", "binned stderr / |mean|", "target", 0.0,
                                half.std_error / std::abs(half.mean), 0.01));
  out.push_back(detail::compare("mc.thermalization_drift", "first-half vs second-half mean, in sigma", "no drift",
                                0.0, chain.drift_sigma, 4.0));
}

inline Report run(Options const& o)
{
  o.params.validate();
  Report r;
  auto& c = r.checks;
  detail::guarded(c, "spectrum", [&] { check_spectrum(o, c); });
  detail::guarded(c, "tadpole", [&] { check_tadpole(o, c); });
  detail::guarded(c, "pole", [&] { check_pole(o, c); });
  detail::guarded(c, "selfenergy", [&] { check_zero_t_boson_loop(o, c); });
  detail::guarded(c, "thermal", [&] { check_thermal_boson(o, c); });
  detail::guarded(c, "loops.number_correlator", [&] { check_number_correlators(o, c); });
  detail::guarded(c, "loops.permutation", [&] { check_permutation_cancellation(o, c); });
  detail::guarded(c, "exactdiag", [&] { check_thermal_two_point(o, c); });
  detail::guarded(c, "thermal_tadpole", [&] { check_thermal_tadpole(o, c); });
  if (o.sweeps > 0)
    detail::guarded(c, "mc", [&] { check_monte_carlo(o, c); });

  r.pass = !c.empty() && std::all_of(c.begin(), c.end(), [](Check const& k) { return k.pass; });

  auto& pv = r.provenance;
  pv.emplace_back("artifact", "yukawa1d");
  pv.emplace_back("version", version);
  pv.emplace_back("seed", std::to_string(o.seed));
  pv.emplace_back("m", format_double(o.params.m));
  pv.emplace_back("mu", format_double(o.params.mu));
  pv.emplace_back("lambda", format_double(o.params.lambda));
  pv.emplace_back("beta", o.params.beta.is_finite() ? format_double(o.params.beta.value()) : "inf");
  pv.emplace_back("thermal_beta",
                  format_double(o.params.beta.is_finite() ? o.params.beta.value() : o.thermal_beta_fallback));
  pv.emplace_back("scheme", to_string(o.scheme));
  pv.emplace_back("n_max", std::to_string(o.n_max));
  pv.emplace_back("n_tau", std::to_string(o.n_tau));
  pv.emplace_back("sweeps", std::to_string(o.sweeps));
  pv.emplace_back("thermalization", std::to_string(o.thermalization));
  pv.emplace_back("winding_cutoff", std::to_string(o.winding_cutoff));
  pv.emplace_back("generator", lattice::Rng::name);
  pv.emplace_back("monte_carlo", o.sweeps > 0 ? "run" : "skipped (sweeps = 0)");
  return r;
}

} // namespace yukawa1d::verify

#endif
