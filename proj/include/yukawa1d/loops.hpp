#ifndef YUKAWA1D_LOOPS_HPP
#define YUKAWA1D_LOOPS_HPP

// Finite-temperature connected fermion loops with j insertions of ψ̄ψ
// carrying bosonic Matsubara momenta p_1..p_j (Σp = 0).
//
// One cyclic ordering of the insertions evaluates to
//
//   L = −β iʲ Σ_{n>0} (−x)ⁿ ∮ dk/2π e^{−i(k+iμ)βn} / Π_r (k + q_r + iμ),
//
// x = e^{−μβ}, q_r = p_1 + … + p_r (q_0 = 0). With u = k + iμ every pole sits
// at u = −q_r on the real axis, below the contour, and the exponential
// e^{iq_rβn} = 1 on the grid. Coincident q_r give higher-order poles. Each
// winding integral is therefore a polynomial in n whose coefficients come
// from Taylor expanding the rational factor around each pole.

#include <yukawa1d/model.hpp>
#include <yukawa1d/series.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace yukawa1d::loops {

using cplx = std::complex<double>;

inline constexpr int max_insertions = 10;

struct LoopSpec
{
  int j{1};
  std::vector<std::int64_t> momenta; // bosonic Matsubara indices, p_r = 2π·momenta[r]/β
  double mu{1.0};
  double beta{1.0};
  int max_winding{4000};
  double abs_tol{1e-12};

  void validate() const
  {
    if (j < 1)
      throw DomainError("a loop needs at least one insertion");
    if (j > max_insertions)
      throw DomainError("loop order above " + std::to_string(max_insertions) + " not supported");
    if (static_cast<int>(momenta.size()) != j)
      throw DomainError("momentum list length must equal j");
    if (std::accumulate(momenta.begin(), momenta.end(), std::int64_t{0}) != 0)
      throw DomainError("external momenta must sum to zero (overall momentum conservation delta function)");
    if (!(mu > 0.0))
      throw DomainError("fermion loops are implemented for mu > 0 only");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("beta must be positive and finite");
    if (max_winding < 1)
      throw DomainError("max_winding must be >= 1");
  }
};

struct LoopResult
{
  cplx value{};
  std::vector<cplx> windings;         // contribution of winding n = 1, 2, ...; sums to value up to tail and rounding
  std::vector<int> degeneracy;        // multiplicity of each distinct partial sum, descending
  std::vector<cplx> polynomial;       // ∮-integral as Σ_k c_k n^k
  cplx closed_form{};                 // Σ_k c_k Σ_n n^k (−x)^n resummed exactly
  double tail_bound{0.0};
  bool fast_path{false};
};

struct LoopOptions
{
  bool fast_path{true};
};

namespace detail {

// Taylor coefficients (order 0..len-1 in h) of (d + h)^{−mult}.
inline std::vector<double> inverse_power_series(double d, int mult, int len)
{
  std::vector<double> c(len);
  double const base = std::pow(d, -mult);
  double binom = 1.0; // C(mult+k−1, k)
  for (int k = 0; k < len; ++k) {
    if (k > 0)
      binom *= static_cast<double>(mult + k - 1) / k;
    c[k] = base * binom * ((k % 2) ? -1.0 : 1.0) / std::pow(d, k);
  }
  return c;
}

inline std::vector<double> multiply_truncated(std::vector<double> const& a, std::vector<double> const& b)
{
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; i + k < a.size() && k < b.size(); ++k)
      out[i + k] += a[i] * b[k];
  return out;
}

} // namespace detail

/// Coefficients c_k of I(n) = ∮ dk/2π e^{−i(k+iμ)βn}/Π_r(k+q_r+iμ) = Σ_k c_k n^k
/// for n > 0, given the grid indices of the partial sums.
inline std::vector<cplx> winding_polynomial(std::vector<std::int64_t> const& partial_sums, double beta)
{
  std::map<std::int64_t, int> poles;
  for (auto q : partial_sums)
    ++poles[q];

  int const j = static_cast<int>(partial_sums.size());
  double const step = 2.0 * std::numbers::pi / beta;
  std::vector<cplx> coeff(j, cplx{});
  cplx const minus_i_beta{0.0, -beta};

  for (auto const& [qa, ma] : poles) {
    // Taylor series of the remaining factors around u = −Q_a
    std::vector<double> g(ma, 0.0);
    g[0] = 1.0;
    for (auto const& [qb, mb] : poles) {
      if (qb == qa)
        continue;
      double const d = step * static_cast<double>(qb - qa);
      g = detail::multiply_truncated(g, detail::inverse_power_series(d, mb, ma));
    }
    // residue = Σ_k (−iβn)^k/k! · g[ma−1−k]
    cplx pow_term{1.0, 0.0};
    double factorial = 1.0;
    for (int k = 0; k < ma; ++k) {
      if (k > 0) {
        pow_term *= minus_i_beta;
        factorial *= k;
      }
      coeff[k] += pow_term / factorial * g[ma - 1 - k];
    }
  }
  // clockwise contour below the axis: ∮ = −2πi/(2π) Σ Res
  for (auto& c : coeff)
    c *= cplx{0.0, -1.0};
  return coeff;
}

inline std::vector<std::int64_t> partial_sums(std::vector<std::int64_t> const& momenta)
{
  std::vector<std::int64_t> q(momenta.size(), 0);
  for (std::size_t r = 1; r < momenta.size(); ++r)
    q[r] = q[r - 1] + momenta[r - 1];
  return q;
}

inline std::vector<int> degeneracy_profile(std::vector<std::int64_t> const& q)
{
  std::map<std::int64_t, int> poles;
  for (auto v : q)
    ++poles[v];
  std::vector<int> out;
  for (auto const& [v, m] : poles)
    out.push_back(m);
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// A single cyclic ordering of a connected loop (the overall fermion-loop
/// sign included).
inline LoopResult connected_loop(LoopSpec const& spec, LoopOptions options = {})
{
  spec.validate();
  LoopResult r;
  auto const q = partial_sums(spec.momenta);
  r.degeneracy = degeneracy_profile(q);

  if (options.fast_path && spec.j >= 2 && r.degeneracy.front() == 1) {
    // simple poles only: the residues of a rational function decaying as
    // u^{−j} sum to zero, winding by winding
    r.fast_path = true;
    r.polynomial.assign(spec.j, cplx{});
    return r;
  }

  r.polynomial = winding_polynomial(q, spec.beta);
  double const x = std::exp(-spec.mu * spec.beta);
  cplx const prefactor = -spec.beta * std::pow(cplx{0.0, 1.0}, spec.j);

  // cutoff from the tail bound of Σ_k |c_k| Σ_{n>N} n^k x^n
  auto tail = [&](std::int64_t n_cut) {
    double t = 0.0;
    for (std::size_t k = 0; k < r.polynomial.size(); ++k)
      if (r.polynomial[k] != cplx{})
        t += std::abs(r.polynomial[k]) * series::power_tail_bound(static_cast<int>(k), x, n_cut);
    return std::abs(prefactor) * t;
  };
  std::int64_t cutoff = -1;
  for (std::int64_t n = 1; n <= spec.max_winding; ++n)
    if (tail(n) <= spec.abs_tol) {
      cutoff = n;
      break;
    }
  if (cutoff < 0)
    throw series::WindingCutoffError(tail(spec.max_winding), spec.abs_tol);

  series::CompensatedSum re, im;
  double magnitude = 0.0; // Σ|term|, sets the rounding floor of the direct sum
  double xn = 1.0;
  for (std::int64_t n = 1; n <= cutoff; ++n) {
    xn *= -x;
    cplx poly{};
    double nk = 1.0;
    for (auto const& c : r.polynomial) {
      poly += c * nk;
      nk *= static_cast<double>(n);
    }
    cplx const term = prefactor * xn * poly;
    r.windings.push_back(term);
    magnitude += std::abs(term);
    re.add(term.real());
    im.add(term.imag());
  }
  cplx const direct{re.value(), im.value()};
  r.tail_bound = tail(cutoff);

  cplx closed{};
  for (std::size_t k = 0; k < r.polynomial.size(); ++k)
    closed += r.polynomial[k] * series::power_series_closed_form(static_cast<int>(k), -x);
  r.closed_form = prefactor * closed;

  // alternating winding terms can grow far beyond the result, so the
  // resummed form is reported and the direct sum serves as the check
  double const rounding = 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
  if (std::abs(direct - r.closed_form) > r.tail_bound + rounding + spec.abs_tol)
    throw ConsistencyError("connected loop: winding sum disagrees with resummed form");
  r.value = r.closed_form;
  return r;
}

/// Same loop as a direct sum over fermionic frequencies k = (2n+1)π/β with
/// |n| bounded by n_freq: −i^j Σ_k Π_r 1/(k + q_r + iμ). Absolutely
/// convergent only for j ≥ 2; the truncation error is O(n_freq^{1−j}).
inline cplx matsubara_sum_loop(LoopSpec const& spec, std::int64_t n_freq)
{
  spec.validate();
  if (spec.j < 2)
    throw DomainError("direct frequency sum needs j >= 2");
  if (n_freq < 1)
    throw DomainError("n_freq must be >= 1");
  auto const q = partial_sums(spec.momenta);
  double const step = std::numbers::pi / spec.beta;
  series::CompensatedSum re, im;
  for (std::int64_t n = -n_freq; n < n_freq; ++n) {
    double const k = static_cast<double>(2 * n + 1) * step;
    cplx prod{1.0, 0.0};
    for (auto qr : q)
      prod /= cplx{k + 2.0 * step * static_cast<double>(qr), spec.mu};
    re.add(prod.real());
    im.add(prod.imag());
  }
  return -std::pow(cplx{0.0, 1.0}, spec.j) * cplx{re.value(), im.value()};
}

struct SymmetrizedLoop
{
  double value{0.0};
  std::vector<cplx> orderings; // one entry per cyclic ordering, in lexicographic order
  double imaginary_residual{0.0};
};

/// Sum of connected_loop over the (j−1)! cyclic orderings of the insertions:
/// the first momentum stays in place and the rest are permuted.
inline SymmetrizedLoop permutation_symmetrized_loop(int j, std::vector<std::int64_t> const& momenta, double mu,
                                                    double beta, int max_winding = 4000, double abs_tol = 1e-12)
{
  LoopSpec base{j, momenta, mu, beta, max_winding, abs_tol};
  base.validate();

  std::vector<int> idx(j - 1);
  std::iota(idx.begin(), idx.end(), 1);
  std::map<std::vector<std::int64_t>, cplx> cache;
  SymmetrizedLoop out;
  series::CompensatedSum re, im;
  do {
    LoopSpec s = base;
    for (int r = 1; r < j; ++r)
      s.momenta[r] = momenta[idx[r - 1]];
    auto it = cache.find(s.momenta);
    if (it == cache.end())
      it = cache.emplace(s.momenta, connected_loop(s).value).first;
    out.orderings.push_back(it->second);
    re.add(it->second.real());
    im.add(it->second.imag());
  } while (std::next_permutation(idx.begin(), idx.end()));

  out.value = re.value();
  out.imaginary_residual = std::abs(im.value());
  return out;
}

struct ZeroMomentumLoop
{
  double value{0.0};       // −β^j Σ n^{j−1}(−x)^n, closed form
  double direct{0.0};      // same series summed term by term
  double tail_bound{0.0};
  std::int64_t terms{0};
};

/// All-orderings connected loop at vanishing external momenta.
inline ZeroMomentumLoop connected_loop_zero_momenta(int j, double mu, double beta, int max_winding = 4000,
                                                    double abs_tol = 1e-10)
{
  if (j < 1)
    throw DomainError("j must be >= 1");
  if (!(mu * beta > 0.0))
    throw DomainError("connected_loop_zero_momenta requires mu*beta > 0");
  double const x = std::exp(-mu * beta);
  int const k = j - 1;

  double const closed = -series::power_series_closed_form(k, -x);
  double const tol = abs_tol * std::max(1.0, std::abs(closed));
  std::int64_t const cutoff = series::cutoff_for(k, x, tol / 4.0, max_winding);
  if (cutoff < 0)
    throw series::WindingCutoffError(series::power_tail_bound(k, x, max_winding), tol);
  auto const direct = series::power_series_direct(k, -x, cutoff);

  if (std::abs(-direct.value - closed) > direct.tail_bound + tol)
    throw ConsistencyError("zero-momentum loop: direct series and closed form disagree");

  double const bj = std::pow(beta, j);
  return {bj * closed, -bj * direct.value, bj * direct.tail_bound, cutoff};
}

/// Calls visit(blocks) for every set partition of {0..n-1}, in
/// lexicographic order of restricted growth strings.
template <typename Visitor>
void for_each_set_partition(int n, Visitor&& visit)
{
  if (n < 1)
    return;
  std::vector<int> rgs(n, 0);
  std::vector<int> maxima(n, 0);
  while (true) {
    int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
    std::vector<std::vector<int>> parts(blocks);
    for (int i = 0; i < n; ++i)
      parts[rgs[i]].push_back(i);
    visit(parts);

    int i = n - 1;
    while (i > 0 && rgs[i] == maxima[i - 1] + 1)
      --i;
    if (i == 0)
      return;
    ++rgs[i];
    maxima[i] = std::max(maxima[i - 1], rgs[i]);
    for (int t = i + 1; t < n; ++t) {
      rgs[t] = 0;
      maxima[t] = maxima[i];
    }
  }
}

struct NumberCorrelator
{
  double value{0.0};
  double connected{0.0};    // single-loop partition
  double disconnected{0.0}; // everything else
  std::int64_t partitions{0};
  double fermi{0.0};
};

/// ⟨N(τ_1)…N(τ_j)⟩_β assembled from fermion loops: every set partition of the
/// insertions is a product of connected loops, each loop summed over its
/// cyclic orderings at zero momentum with its β^s stripped.
inline NumberCorrelator full_number_correlator(int j, double mu, double beta, int max_winding = 4000,
                                               double abs_tol = 1e-10)
{
  if (j < 1)
    throw DomainError("j must be >= 1");
  if (j > max_insertions)
    throw DomainError("set partition enumeration capped at j = " + std::to_string(max_insertions));
  if (!(mu * beta > 0.0))
    throw DomainError("full_number_correlator requires mu*beta > 0");

  std::vector<double> block(j + 1, 0.0);
  for (int s = 1; s <= j; ++s) {
    auto const loop = permutation_symmetrized_loop(s, std::vector<std::int64_t>(s, 0), mu, beta, max_winding, 1e-14);
    block[s] = loop.value / std::pow(beta, s);
  }

  NumberCorrelator out;
  series::CompensatedSum total, disconnected;
  for_each_set_partition(j, [&](std::vector<std::vector<int>> const& parts) {
    double product = 1.0;
    for (auto const& p : parts)
      product *= block[p.size()];
    total.add(product);
    if (parts.size() == 1)
      out.connected = product;
    else
      disconnected.add(product);
    ++out.partitions;
  });
  out.value = total.value();
  out.disconnected = disconnected.value();
  out.fermi = fermi_occupation(mu, beta);
  if (std::abs(out.value - out.fermi) > abs_tol)
    throw ConsistencyError("number correlator assembled from loops differs from the Fermi factor");
  return out;
}

struct TelescopingReport
{
  int j{2};
  double x{0.0};
  double lhs{0.0};  // Σ_{n>0} (−x)^n [n^{j−1} + f((n+1)^{j−1} − n^{j−1})]
  double rhs{0.0};  // −f, f = x/(1+x)
  double residual{0.0};
  double tail_bound{0.0};
  std::vector<double> partial_sums;
  double max_trajectory_error{0.0}; // partial sums vs the telescoped closed partial sum
  double max_binomial_error{0.0};   // Σ_i C(j−1,i−1) n^{i−1} vs (n+1)^{j−1} − n^{j−1}, relative
  bool pass{false};
};

/// Term-by-term check of the telescoping identity behind the all-orders
/// number correlator.
inline TelescopingReport telescoping_check(int j, double mu, double beta, int max_winding = 4000, double tol = 1e-12)
{
  if (j < 2)
    throw DomainError("telescoping check needs j >= 2");
  double const x = std::exp(-mu * beta);
  if (!(x < 1.0))
    throw DomainError("telescoping check requires mu*beta > 0");
  double const f = x / (1.0 + x);
  int const k = j - 1;

  TelescopingReport r;
  r.j = j;
  r.x = x;
  r.rhs = -f;

  std::int64_t cutoff = series::cutoff_for(k, x, tol / 8.0, max_winding);
  if (cutoff < 0)
    cutoff = max_winding;

  series::CompensatedSum acc;
  double term_scale = 1.0;
  double xn = 1.0;
  for (std::int64_t n = 1; n <= cutoff; ++n) {
    xn *= -x;
    double const dn = static_cast<double>(n);
    double const nk = std::pow(dn, k);
    double const np1k = std::pow(dn + 1.0, k);

    double binom = 0.0, c = 1.0; // C(k, i−1) for i = 1..k
    for (int i = 1; i <= k; ++i) {
      binom += c * std::pow(dn, i - 1);
      c = c * (k - (i - 1)) / i;
    }
    double const diff = np1k - nk;
    r.max_binomial_error = std::max(r.max_binomial_error, std::abs(binom - diff) / std::max(1.0, std::abs(diff)));

    double const term = xn * (nk + f * diff);
    term_scale = std::max(term_scale, std::abs(term));
    acc.add(term);
    r.partial_sums.push_back(acc.value());
    double const telescoped = (-x - std::pow(dn + 1.0, k) * xn * -x) / (1.0 + x);
    r.max_trajectory_error = std::max(r.max_trajectory_error, std::abs(acc.value() - telescoped));
  }
  r.lhs = acc.value();
  r.residual = std::abs(r.lhs - r.rhs);
  // tail of Σ x^n (n^k + f((n+1)^k − n^k)) ≤ (1 + f·2^k) Σ n^k x^n
  r.tail_bound = (1.0 + f * std::pow(2.0, k)) * series::power_tail_bound(k, x, cutoff);
  // partial sums pass through terms of size term_scale; rounding scales with it
  r.pass = r.residual <= tol * term_scale + r.tail_bound && r.max_trajectory_error <= tol * term_scale &&
           r.max_binomial_error <= 1e-13;
  return r;
}

} // namespace yukawa1d::loops

#endif
