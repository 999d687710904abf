#ifndef YUKAWA1D_MODEL_HPP
#define YUKAWA1D_MODEL_HPP

// Parameters, thermal grids and shared numeric policy for the 0+1 dimensional
// Yukawa model
//
//   S = ∫ dτ [ ½((∂φ)² + m²φ²) + ψ̄(∂ + μ)ψ + λ φ ψ̄ψ ]
//
// Everything here is a plain value type; all functions are pure.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace yukawa1d {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Raised when two independent evaluation routes disagree beyond tolerance.
class ConsistencyError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Inverse temperature: either a positive finite number or the distinguished
/// zero-temperature state. Never encoded as a large float.
class InverseTemperature
{
public:
  static constexpr InverseTemperature infinite() noexcept { return InverseTemperature{}; }

  static InverseTemperature finite(double beta)
  {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("beta must be a positive finite number (or infinite)");
    InverseTemperature b;
    b.value_ = beta;
    b.infinite_ = false;
    return b;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }

  /// Finite value. Throws at zero temperature.
  double value() const
  {
    if (infinite_)
      throw DomainError("thermal grid undefined at zero temperature");
    return value_;
  }

  friend constexpr bool operator==(InverseTemperature const&, InverseTemperature const&) = default;

private:
  constexpr InverseTemperature() noexcept = default;
  double value_{0.0};
  bool infinite_{true};
};

struct ModelParams
{
  double m{1.0};      // boson mass, > 0
  double mu{1.0};     // fermion bare mass, any sign
  double lambda{0.0}; // Yukawa coupling, any sign
  InverseTemperature beta{InverseTemperature::infinite()};

  void validate() const
  {
    if (!(m > 0.0) || !std::isfinite(m))
      throw DomainError("boson mass m must be positive");
    if (!std::isfinite(mu))
      throw DomainError("fermion mass mu must be finite");
    if (!std::isfinite(lambda))
      throw DomainError("coupling lambda must be finite");
  }

  ModelParams with_lambda(double l) const
  {
    ModelParams p = *this;
    p.lambda = l;
    return p;
  }

  ModelParams with_beta(InverseTemperature b) const
  {
    ModelParams p = *this;
    p.beta = b;
    return p;
  }
};

enum class Statistics { Bosonic, Fermionic };

/// Ordering prescription for the equal-time product ψ̄ψ.
/// TimeSplitting is the ε→0⁺ limit of ψ̄(τ+ε)ψ(τ) (ordering c†c);
/// Symmetric is the ½[c†,c] ordering.
enum class RegularizationScheme { TimeSplitting, Symmetric };

inline std::string to_string(RegularizationScheme s)
{
  return s == RegularizationScheme::TimeSplitting ? "time-splitting" : "symmetric";
}

struct NumericPolicy
{
  double abs_tol{1e-10};
  int winding_cutoff{4000};
  int truncation_nmax{60};

  void validate() const
  {
    if (!(abs_tol > 0.0))
      throw DomainError("abs_tol must be positive");
    if (winding_cutoff < 1)
      throw DomainError("winding_cutoff must be >= 1");
    if (truncation_nmax < 1)
      throw DomainError("truncation_nmax must be >= 1");
  }
};

/// A point on a thermal frequency grid.
struct MatsubaraFrequency
{
  Statistics kind{Statistics::Bosonic};
  std::int64_t index{0};
  double beta{1.0};

  double value() const
  {
    double const step = 2.0 * std::numbers::pi / beta;
    return kind == Statistics::Bosonic ? step * static_cast<double>(index)
                                       : step * (static_cast<double>(index) + 0.5);
  }
};

inline double matsubara_value(Statistics kind, std::int64_t n, InverseTemperature beta)
{
  return MatsubaraFrequency{kind, n, beta.value()}.value();
}

/// e^{-μβ}/(1+e^{-μβ}) evaluated as 1/(1+e^{μβ}) or its mirror, whichever
/// keeps the exponent non-positive.
inline double fermi_occupation(double mu, double beta)
{
  double const s = mu * beta;
  if (s >= 0.0) {
    double const x = std::exp(-s);
    return x / (1.0 + x);
  }
  return 1.0 / (1.0 + std::exp(s));
}

inline double fermi_occupation(double mu, InverseTemperature beta)
{
  if (beta.is_infinite()) {
    if (mu == 0.0)
      throw DomainError("fermi occupation undefined at mu = 0 and zero temperature");
    return mu > 0.0 ? 0.0 : 1.0;
  }
  return fermi_occupation(mu, beta.value());
}

} // namespace yukawa1d

#endif
