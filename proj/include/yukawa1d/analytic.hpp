#ifndef YUKAWA1D_ANALYTIC_HPP
#define YUKAWA1D_ANALYTIC_HPP

// Closed-form results from the operator picture. H commutes with N = c†c,
// the N=0 sector is a plain oscillator and the N=1 sector is the same
// oscillator displaced by -λ/m² and lifted by μ_λ = μ - λ²/2m².

#include <yukawa1d/model.hpp>

#include <cmath>
#include <complex>
#include <string_view>

namespace yukawa1d::analytic {

enum class Sector { Bosonic = 0, Fermionic = 1 };

struct SectorLevel
{
  Sector sector{Sector::Bosonic};
  int n{0};
};

/// Fermion mass correction δμ and the first excited residue Z_{1,F}.
struct PoleDecomposition
{
  double delta_mu{0.0};
  double z1f{0.0};
};

/// A value together with the route that produced it.
struct TracedValue
{
  double value{0.0};
  std::string_view provenance;
};

inline double mass_shift(ModelParams const& p)
{
  return p.mu - p.lambda * p.lambda / (2.0 * p.m * p.m);
}

inline double phi_vev_fermion(ModelParams const& p)
{
  return -p.lambda / (p.m * p.m);
}

inline double energy(ModelParams const& p, SectorLevel level)
{
  if (level.n < 0)
    throw DomainError("oscillator level must be non-negative");
  double const e = (level.n + 0.5) * p.m;
  return level.sector == Sector::Bosonic ? e : e + mass_shift(p);
}

inline double free_boson_propagator(double momentum, double m)
{
  return 1.0 / (momentum * momentum + m * m);
}

inline std::complex<double> free_fermion_propagator(double momentum, double mu)
{
  if (momentum == 0.0 && mu == 0.0)
    throw DomainError("fermion propagator has a pole at p = 0 when mu = 0");
  return 1.0 / std::complex<double>{mu, -momentum};
}

/// ⟨0|T q(τ) q(0)|0⟩. The Yukawa coupling leaves the connected boson
/// propagator untouched at zero temperature, so the free form is returned
/// for any λ.
inline TracedValue zero_T_boson_two_point(ModelParams const& p, double tau)
{
  double const v = std::exp(-p.m * std::abs(tau)) / (2.0 * p.m);
  if (p.lambda == 0.0)
    return {v, "free oscillator closed form"};
  return {v, "free closed form; zero-temperature fermion loops vanish"};
}

/// θ(τ)e^{-μτ} with θ(0) = 0 (time-splitting ordering).
inline double zero_T_fermion_two_point_free(ModelParams const& p, double tau)
{
  return tau > 0.0 ? std::exp(-p.mu * tau) : 0.0;
}

inline double ho_thermal_correlator(double m, InverseTemperature beta, double tau)
{
  if (beta.is_infinite())
    return std::exp(-m * std::abs(tau)) / (2.0 * m);
  double const b = beta.value();
  if (tau < 0.0 || tau > b)
    throw DomainError("tau must lie in [0, beta]; reduce modulo beta first");
  return (std::exp(-m * tau) + std::exp(-m * (b - tau))) / (2.0 * m * -std::expm1(-m * b));
}

/// Full ⟨q(τ)q(0)⟩_β: oscillator correlator plus the disconnected
/// (λ/m²)² weight of the fermionic sector.
inline double exact_thermal_two_point(ModelParams const& p, double tau)
{
  double const shift = p.lambda / (p.m * p.m);
  return ho_thermal_correlator(p.m, p.beta, tau) +
         shift * shift * fermi_occupation(mass_shift(p), p.beta);
}

/// |⟨0_F|c†|0_B⟩| for two unit Gaussians of width 1/√m displaced by λ/m².
inline double ground_state_overlap(ModelParams const& p)
{
  return std::exp(-p.lambda * p.lambda / (4.0 * p.m * p.m * p.m));
}

inline PoleDecomposition predicted_pole_decomposition(ModelParams const& p)
{
  double const l2 = p.lambda * p.lambda;
  return {-l2 / (2.0 * p.m * p.m), l2 / (2.0 * p.m * p.m * p.m)};
}

} // namespace yukawa1d::analytic

#endif
