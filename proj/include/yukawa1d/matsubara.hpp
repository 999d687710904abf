#ifndef YUKAWA1D_MATSUBARA_HPP
#define YUKAWA1D_MATSUBARA_HPP

// Perturbative route: regularized tadpoles and the order-λ² self-energies,
// at zero temperature by contour integration and at finite temperature by
// rewriting each Matsubara sum as a sum over windings n with weight
// (−e^{−μβ})^n. Every winding term's k-integral is done by residues.

#include <yukawa1d/analytic.hpp>
#include <yukawa1d/model.hpp>
#include <yukawa1d/series.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace yukawa1d::matsubara {

using cplx = std::complex<double>;

struct TadpoleResult
{
  double value{0.0};
  double loop_integral{0.0}; // ∫dk/2π of the single fermion propagator under the scheme
  RegularizationScheme scheme{RegularizationScheme::TimeSplitting};
};

/// ⟨φ⟩ at first order and zero temperature: (λ/m²)·∫dk/2π e^{ikε}/(−ik+μ).
///
/// Time splitting closes the contour in the upper half plane (the side on
/// which e^{ikε} decays), so the pole at k = −iμ contributes only for μ < 0,
/// giving −1. The symmetric scheme drops the odd part of the integrand and
/// keeps ∫dk/2π μ/(k²+μ²) = ½·sgn μ.
inline TadpoleResult tadpole_phi(ModelParams const& p, RegularizationScheme scheme)
{
  p.validate();
  if (p.beta.is_finite())
    throw DomainError("tadpole_phi is the zero-temperature tadpole; use tadpole_phi_thermal");
  if (p.mu == 0.0)
    throw DomainError("ground-state sector degenerate");

  double loop = 0.0;
  if (scheme == RegularizationScheme::TimeSplitting)
    loop = p.mu > 0.0 ? 0.0 : -1.0;
  else
    loop = p.mu > 0.0 ? 0.5 : -0.5;
  return {p.lambda / (p.m * p.m) * loop, loop, scheme};
}

enum class WindingBranch {
  PositiveMu,         // windings n > 0, weight (−e^{−μβ})^n
  NegativeMuContinuum // n = 0 continuum term plus windings n < 0, weight (−e^{μβ})^{|n|}
};

struct ThermalTadpole
{
  double value{0.0};
  double closed_form{0.0};
  double winding_sum{0.0};
  double tail_bound{0.0};
  std::int64_t windings{0};
  WindingBranch branch{WindingBranch::PositiveMu};
};

/// ⟨φ⟩_β at first order, evaluated both as a truncated winding sum and by
/// geometric resummation.
inline ThermalTadpole tadpole_phi_thermal(ModelParams const& p, int max_winding, double abs_tol = 1e-10)
{
  p.validate();
  double const beta = p.beta.value();
  if (p.mu == 0.0)
    throw DomainError("winding expansion does not converge at mu = 0");
  if (max_winding < 1)
    throw DomainError("max_winding must be >= 1");

  double const coupling = p.lambda / (p.m * p.m);
  ThermalTadpole r;
  // weight of one winding; both branches reduce to Σ (−y)^n with 0 < y < 1
  double const y = std::exp(-std::abs(p.mu) * beta);
  double const tail = std::abs(coupling) * std::pow(y, max_winding + 1) / (1.0 - y);
  if (tail > abs_tol)
    throw series::WindingCutoffError(tail, abs_tol);

  series::CompensatedSum sum;
  double term = 1.0;
  for (int n = 1; n <= max_winding; ++n) {
    term *= -y;
    sum.add(term);
  }
  if (p.mu > 0.0) {
    r.branch = WindingBranch::PositiveMu;
    r.winding_sum = coupling * sum.value();
  } else {
    // n = 0: the continuum contour encloses the pole and gives −1; windings
    // n < 0 close in the upper half plane and give −(−y)^{|n|}.
    r.branch = WindingBranch::NegativeMuContinuum;
    r.winding_sum = coupling * (-1.0 - sum.value());
  }
  r.closed_form = -coupling * fermi_occupation(p.mu, beta);
  r.tail_bound = tail;
  r.windings = max_winding;
  if (std::abs(r.winding_sum - r.closed_form) > tail + abs_tol)
    throw ConsistencyError("thermal tadpole: winding sum disagrees with closed form");
  r.value = r.closed_form;
  return r;
}

struct SelfEnergyValue
{
  double momentum{0.0};
  std::optional<MatsubaraFrequency> frequency; // set at finite temperature
  int order{2};
  cplx value{};
  cplx check{};           // independent evaluation (quadrature or winding sum)
  double check_error{0.0}; // |value − check|
  bool beta_delta{false};  // value is the coefficient of β·δ_{p,0}
  std::string route;
};

namespace detail {

// ∫_{-∞}^{∞} f(s) ds for a complex integrand, split at the given breakpoints.
// tol is relative to the L1 norm of each piece; values below ~1e-13 are not
// reachable in double precision and only deepen the recursion.
template <typename F>
cplx integrate_line(F const& f, std::vector<double> breaks, double tol)
{
  tol = std::max(tol, 1e-12);
  using boost::math::quadrature::gauss_kronrod;
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double const inf = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, double>> pieces;
  pieces.emplace_back(-inf, breaks.front());
  for (std::size_t i = 1; i < breaks.size(); ++i)
    pieces.emplace_back(breaks[i - 1], breaks[i]);
  pieces.emplace_back(breaks.back(), inf);

  series::CompensatedSum re, im;
  for (auto [a, b] : pieces) {
    auto fr = [&](double s) { return f(s).real(); };
    auto fi = [&](double s) { return f(s).imag(); };
    re.add(gauss_kronrod<double, 61>::integrate(fr, a, b, 12, tol));
    im.add(gauss_kronrod<double, 61>::integrate(fi, a, b, 12, tol));
  }
  return {re.value(), im.value()};
}

inline std::vector<double> breakpoints(std::initializer_list<double> centres, double width)
{
  std::vector<double> out;
  for (double c : centres)
    for (double d : {-4.0 * width, -width, 0.0, width, 4.0 * width})
      out.push_back(c + d);
  return out;
}

} // namespace detail

/// ∫dk/2π 1/((−ik+μ)((p−k)²+m²)) by adaptive quadrature.
inline cplx fermion_loop_integral_quadrature(ModelParams const& params, double p)
{
  // s = k − p puts the boson peak at the origin and the fermion pole at s = −p
  auto f = [&](double s) {
    cplx const fermion{params.mu, -(p + s)};
    return 1.0 / (fermion * (s * s + params.m * params.m)) / (2.0 * std::numbers::pi);
  };
  double const width = std::max(params.m, std::abs(params.mu));
  return detail::integrate_line(f, detail::breakpoints({0.0, -p}, width), 1e-14);
}

/// S⁽²⁾(p) = λ²/(−ip+μ)² · 1/(2m(−ip+μ+m)) at zero temperature, checked
/// against quadrature of its defining k-integral.
inline SelfEnergyValue fermion_self_energy_2(ModelParams const& params, double p, double abs_tol = 1e-10)
{
  params.validate();
  if (params.beta.is_finite())
    throw DomainError("fermion_self_energy_2 is a zero-temperature quantity");
  if (!(params.mu > 0.0))
    throw DomainError("fermion_self_energy_2 requires mu > 0");

  cplx const prop{params.mu, -p};
  cplx const l2 = params.lambda * params.lambda;
  SelfEnergyValue r;
  r.momentum = p;
  r.value = l2 / (prop * prop) / (2.0 * params.m * (prop + params.m));
  r.check = l2 / (prop * prop) * fermion_loop_integral_quadrature(params, p);
  r.check_error = std::abs(r.value - r.check);
  r.route = "residue at k = p + im; checked by gauss-kronrod quadrature";
  if (r.check_error > abs_tol * std::max(1.0, std::abs(r.value)))
    throw ConsistencyError("fermion self-energy: closed form and quadrature disagree");
  return r;
}

/// Sixteen log-spaced momenta in [m/10, 10m].
inline std::array<double, 16> pole_fit_grid(double m)
{
  std::array<double, 16> grid{};
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = m * std::pow(10.0, -1.0 + 2.0 * static_cast<double>(i) / 15.0);
  return grid;
}

/// Matches S⁽²⁾ to the two-pole spectral form. The numerator
/// S⁽²⁾·(−ip+μ)²(−ip+μ+m) is fitted to A·(−ip+μ) + B; A must vanish, which
/// forces Z_{1,F} = −δμ/m, and B = −δμ·m.
inline analytic::PoleDecomposition extract_pole_decomposition(ModelParams const& params, double abs_tol = 1e-10)
{
  auto const grid = pole_fit_grid(params.m);
  // least squares for real (A, B): rows are the real and imaginary parts of
  // A·(μ − ip) + B = numerator
  double saa = 0.0, sab = 0.0, sbb = 0.0, sya = 0.0, syb = 0.0;
  std::vector<std::pair<cplx, cplx>> samples;
  for (double p : grid) {
    cplx const prop{params.mu, -p};
    cplx const numerator = fermion_self_energy_2(params, p, abs_tol).value * prop * prop * (prop + params.m);
    samples.emplace_back(prop, numerator);
    // basis columns: a = prop, b = 1
    saa += std::norm(prop);
    sab += prop.real();
    sbb += 1.0;
    sya += numerator.real() * prop.real() + numerator.imag() * prop.imag();
    syb += numerator.real();
  }
  double const det = saa * sbb - sab * sab;
  double const a = (sya * sbb - syb * sab) / det;
  double const b = (saa * syb - sab * sya) / det;

  double const scale = std::max(1.0, std::abs(b));
  double residual = 0.0;
  for (auto const& [prop, numerator] : samples)
    residual = std::max(residual, std::abs(numerator - (a * prop + b)));
  if (std::abs(a) * params.m > abs_tol * scale || residual > abs_tol * scale)
    throw ConsistencyError("self-energy numerator depends on p; pole matching failed");

  double const delta_mu = -b / params.m + 0.0;
  double const z1f = (-a - delta_mu) / params.m + 0.0;
  return {delta_mu, z1f};
}

/// Momentum argument: a real number, or a point on a thermal grid.
using Momentum = std::variant<double, MatsubaraFrequency>;

namespace detail {

// Bosonic grid index for a momentum at finite β.
inline std::int64_t bosonic_index(Momentum const& p, double beta)
{
  if (auto const* f = std::get_if<MatsubaraFrequency>(&p)) {
    if (f->kind != Statistics::Bosonic)
      throw DomainError("boson self-energy needs a bosonic frequency");
    if (std::abs(f->beta - beta) > 1e-14 * beta)
      throw DomainError("frequency grid built for a different beta");
    return f->index;
  }
  double const x = std::get<double>(p) * beta / (2.0 * std::numbers::pi);
  double const n = std::round(x);
  if (std::abs(x - n) > 1e-9 * std::max(1.0, std::abs(x)))
    throw DomainError("momentum must be discretized in a periodic way");
  return static_cast<std::int64_t>(n);
}

inline double real_momentum(Momentum const& p)
{
  if (auto const* f = std::get_if<MatsubaraFrequency>(&p))
    return f->value();
  return std::get<double>(p);
}

} // namespace detail

/// Connected order-λ² boson self-energy.
///
/// Zero temperature: both fermion poles lie in the lower half plane, so the
/// loop vanishes; the returned check is the numerically integrated loop.
/// Finite temperature: the winding-n term is (i/p)(1 − e^{−ipβn}), which is
/// zero on the bosonic grid except at p = 0, where it becomes −βn and the
/// result is reported as the coefficient of β·δ_{p,0}.
inline SelfEnergyValue boson_self_energy_2(ModelParams const& params, Momentum const& p,
                                           NumericPolicy const& policy = {})
{
  params.validate();
  if (!(params.mu > 0.0))
    throw DomainError("boson_self_energy_2 requires mu > 0");

  double const l2 = params.lambda * params.lambda;
  SelfEnergyValue r;

  if (params.beta.is_infinite()) {
    double const q = detail::real_momentum(p);
    r.momentum = q;
    double const pre = l2 / std::pow(q * q + params.m * params.m, 2);
    auto f = [&](double k) {
      return 1.0 / (cplx{k, params.mu} * cplx{k - q, params.mu}) / (2.0 * std::numbers::pi);
    };
    double const width = std::max(params.m, params.mu);
    r.value = 0.0;
    r.check = pre * detail::integrate_line(f, detail::breakpoints({0.0, q}, width), 1e-15);
    r.check_error = std::abs(r.check);
    r.route = "both poles below the real axis; contour closed above";
    if (r.check_error > 1e-12)
      throw ConsistencyError("zero-temperature fermion loop failed to vanish numerically");
    return r;
  }

  double const beta = params.beta.value();
  std::int64_t const index = detail::bosonic_index(p, beta);
  MatsubaraFrequency const freq{Statistics::Bosonic, index, beta};
  r.frequency = freq;
  r.momentum = freq.value();
  double const x = std::exp(-params.mu * beta);

  if (index != 0) {
    // e^{−ipβn} = e^{−2πi·index·n} = 1 exactly for every winding
    r.value = 0.0;
    r.check = 0.0;
    r.route = "winding phases equal one on the bosonic grid";
    return r;
  }

  double const pre = l2 / std::pow(params.m, 4);
  std::int64_t const cutoff = series::cutoff_for(1, x, policy.abs_tol / std::max(pre, 1e-300), policy.winding_cutoff);
  if (cutoff < 0)
    throw series::WindingCutoffError(pre * series::power_tail_bound(1, x, policy.winding_cutoff), policy.abs_tol);
  auto const direct = series::power_series_direct(1, -x, cutoff);
  r.beta_delta = true;
  r.value = pre * x / ((1.0 + x) * (1.0 + x));
  r.check = -pre * direct.value;
  r.check_error = std::abs(r.value - r.check);
  r.route = "double pole at p = 0; coefficient of beta*delta(p,0)";
  if (r.check_error > pre * direct.tail_bound + policy.abs_tol)
    throw ConsistencyError("boson self-energy: winding sum disagrees with closed form");
  return r;
}

/// τ-independent O(λ²) correction to ⟨φ(τ)φ(0)⟩_β: the p = 0 connected
/// piece plus the squared tadpole, (λ²/m⁴)·x/(1+x) with x = e^{−μβ}.
inline double boson_correction_real_space(ModelParams const& params, NumericPolicy const& policy = {})
{
  params.validate();
  double const beta = params.beta.value();
  double const connected = boson_self_energy_2(params, MatsubaraFrequency{Statistics::Bosonic, 0, beta}, policy).value.real();
  double const tadpole = tadpole_phi_thermal(params, policy.winding_cutoff, policy.abs_tol).value;
  return connected + tadpole * tadpole;
}

/// ⟨φ(τ)φ(0)⟩_β through order λ²: the free thermal oscillator plus the
/// constant correction.
inline double perturbative_thermal_two_point(ModelParams const& params, double tau, NumericPolicy const& policy = {})
{
  return analytic::ho_thermal_correlator(params.m, params.beta, tau) + boson_correction_real_space(params, policy);
}

} // namespace yukawa1d::matsubara

#endif
