#ifndef YUKAWA1D_EXACTDIAG_HPP
#define YUKAWA1D_EXACTDIAG_HPP

// Truncated exact diagonalization of
//
//   H = ½(p² + m²q²) ⊗ 1 + (μ + λq) ⊗ N
//
// on (oscillator levels 0..n_max) ⊗ (N = 0, 1). Basis ordering is
// (N=0, n=0..n_max) followed by (N=1, n=0..n_max).

#include <yukawa1d/analytic.hpp>
#include <yukawa1d/model.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace yukawa1d::exactdiag {

using analytic::Sector;

struct TruncatedBasis
{
  int n_max{60};

  int levels() const { return n_max + 1; }
  int dimension() const { return 2 * levels(); }
  int index(Sector s, int n) const { return (s == Sector::Bosonic ? 0 : levels()) + n; }
  Sector sector_of(int i) const { return i < levels() ? Sector::Bosonic : Sector::Fermionic; }

  void validate() const
  {
    if (n_max < 1)
      throw DomainError("n_max must be >= 1");
  }
};

enum class OperatorLabel { H, Q, MinusIP, C, CDagger, N };

/// Dense real matrix on a truncated basis. MinusIP stores -i·p, which is real
/// and antisymmetric.
struct OperatorMatrix
{
  OperatorLabel label{OperatorLabel::H};
  TruncatedBasis basis;
  Eigen::MatrixXd data;
};

namespace detail {

// Oscillator lowering operator a on levels 0..n_max: a|n⟩ = √n |n-1⟩.
inline Eigen::MatrixXd lowering(int levels)
{
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(levels, levels);
  for (int n = 1; n < levels; ++n)
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Embed an oscillator operator into both fermion-number blocks.
inline Eigen::MatrixXd tensor_identity(Eigen::MatrixXd const& osc)
{
  auto const k = osc.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  out.topLeftCorner(k, k) = osc;
  out.bottomRightCorner(k, k) = osc;
  return out;
}

} // namespace detail

inline OperatorMatrix position_operator(TruncatedBasis basis, double m)
{
  basis.validate();
  Eigen::MatrixXd const a = detail::lowering(basis.levels());
  Eigen::MatrixXd const q = (a + a.transpose()) / std::sqrt(2.0 * m);
  return {OperatorLabel::Q, basis, detail::tensor_identity(q)};
}

inline OperatorMatrix momentum_generator(TruncatedBasis basis, double m)
{
  basis.validate();
  Eigen::MatrixXd const a = detail::lowering(basis.levels());
  // p = i√(m/2)(a† - a)  ⇒  -i p = √(m/2)(a† - a)
  Eigen::MatrixXd const g = std::sqrt(m / 2.0) * (a.transpose() - a);
  return {OperatorLabel::MinusIP, basis, detail::tensor_identity(g)};
}

inline OperatorMatrix number_operator(TruncatedBasis basis)
{
  basis.validate();
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
  for (int i = basis.levels(); i < basis.dimension(); ++i)
    n(i, i) = 1.0;
  return {OperatorLabel::N, basis, n};
}

/// c|1,n⟩ = |0,n⟩.
inline OperatorMatrix annihilation_operator(TruncatedBasis basis)
{
  basis.validate();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
  for (int n = 0; n < basis.levels(); ++n)
    c(basis.index(Sector::Bosonic, n), basis.index(Sector::Fermionic, n)) = 1.0;
  return {OperatorLabel::C, basis, c};
}

inline OperatorMatrix creation_operator(TruncatedBasis basis)
{
  OperatorMatrix c = annihilation_operator(basis);
  return {OperatorLabel::CDagger, basis, c.data.transpose()};
}

/// The oscillator term is the exact diagonal m(n + ½); only the λq coupling
/// is built from truncated ladder matrices.
inline OperatorMatrix build_hamiltonian(ModelParams const& params, int n_max)
{
  params.validate();
  TruncatedBasis const basis{n_max};
  basis.validate();
  int const k = basis.levels();

  Eigen::MatrixXd osc = Eigen::MatrixXd::Zero(k, k);
  for (int n = 0; n < k; ++n)
    osc(n, n) = params.m * (n + 0.5);

  Eigen::MatrixXd const a = detail::lowering(k);
  Eigen::MatrixXd const q = (a + a.transpose()) / std::sqrt(2.0 * params.m);

  Eigen::MatrixXd h = detail::tensor_identity(osc);
  h.bottomRightCorner(k, k) += params.mu * Eigen::MatrixXd::Identity(k, k) + params.lambda * q;
  return {OperatorLabel::H, basis, h};
}

/// Frobenius norm of [A, B].
inline double commutator_norm(OperatorMatrix const& a, OperatorMatrix const& b)
{
  return (a.data * b.data - b.data * a.data).norm();
}

struct EigenSystem
{
  TruncatedBasis basis;
  std::vector<double> energies;    // ascending
  Eigen::MatrixXd vectors;         // column i pairs with energies[i]
  std::vector<Sector> sectors;     // fermion number of each eigenvector
  std::vector<double> residuals;   // ‖Hv − Ev‖

  std::size_t size() const { return energies.size(); }

  /// Index of the lowest eigenpair in a sector.
  std::size_t sector_ground(Sector s) const
  {
    for (std::size_t i = 0; i < size(); ++i)
      if (sectors[i] == s)
        return i;
    throw DomainError("sector not present in eigensystem");
  }
};

/// Diagonalizes each fermion-number block separately and merges the pairs
/// in ascending energy order. Off-block entries must vanish exactly.
inline EigenSystem diagonalize(OperatorMatrix const& h)
{
  if (h.label != OperatorLabel::H)
    throw DomainError("diagonalize expects a Hamiltonian");
  int const k = h.basis.levels();
  if (h.data.topRightCorner(k, k).cwiseAbs().maxCoeff() != 0.0 ||
      h.data.bottomLeftCorner(k, k).cwiseAbs().maxCoeff() != 0.0)
    throw ConsistencyError("Hamiltonian does not commute with the number operator");

  EigenSystem out;
  out.basis = h.basis;
  int const dim = h.basis.dimension();
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> energies(dim);
  std::vector<Sector> sectors(dim);

  for (int block = 0; block < 2; ++block) {
    int const offset = block * k;
    Eigen::MatrixXd const hb = h.data.block(offset, offset, k, k);
    // a diagonal block is already solved; the iterative solver would rescale
    // and round its entries
    if ((hb - Eigen::MatrixXd(hb.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
      for (int i = 0; i < k; ++i) {
        energies[offset + i] = hb(i, i);
        vectors(offset + i, offset + i) = 1.0;
        sectors[offset + i] = block == 0 ? Sector::Bosonic : Sector::Fermionic;
      }
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hb);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigensolver failed to converge");
    for (int i = 0; i < k; ++i) {
      energies[offset + i] = solver.eigenvalues()(i);
      vectors.block(offset, offset + i, k, 1) = solver.eigenvectors().col(i);
      sectors[offset + i] = block == 0 ? Sector::Bosonic : Sector::Fermionic;
    }
  }

  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return energies[i] < energies[j]; });

  out.vectors.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    out.energies.push_back(energies[order[i]]);
    out.sectors.push_back(sectors[order[i]]);
    out.vectors.col(i) = vectors.col(order[i]);
    Eigen::VectorXd const v = out.vectors.col(i);
    out.residuals.push_back((h.data * v - out.energies.back() * v).norm());
  }
  return out;
}

inline EigenSystem solve(ModelParams const& params, int n_max)
{
  return diagonalize(build_hamiltonian(params, n_max));
}

namespace detail {

// Boltzmann weights e^{-t(E_n - E_0)}. At zero temperature (infinite t) the
// weight is 1 on the ground manifold and 0 elsewhere.
inline Eigen::VectorXd shifted_weights(std::span<double const> energies, double t, bool infinite)
{
  auto const n = static_cast<Eigen::Index>(energies.size());
  Eigen::VectorXd w(n);
  double const e0 = energies.front();
  double const scale = std::max(1.0, std::abs(e0));
  for (Eigen::Index i = 0; i < n; ++i) {
    double const de = energies[i] - e0;
    if (infinite)
      w(i) = de <= 1e-12 * scale ? 1.0 : 0.0;
    else
      w(i) = std::exp(-t * de);
  }
  return w;
}

} // namespace detail

inline double thermal_expectation(OperatorMatrix const& op, EigenSystem const& eig, InverseTemperature beta)
{
  if (eig.size() == 0)
    throw DomainError("empty eigensystem");
  Eigen::VectorXd const w =
    detail::shifted_weights(eig.energies, beta.is_infinite() ? 0.0 : beta.value(), beta.is_infinite());
  Eigen::VectorXd const diag = (eig.vectors.transpose() * op.data * eig.vectors).diagonal();
  return w.dot(diag) / w.sum();
}

/// Spectral evaluation of ⟨T A(τ) B(0)⟩_β with A and B rotated into the
/// eigenbasis once.
class TwoPointFunction
{
public:
  TwoPointFunction(OperatorMatrix const& a, OperatorMatrix const& b, EigenSystem const& eig,
                   InverseTemperature beta, Statistics statistics)
    : energies_(eig.energies), beta_(beta), statistics_(statistics)
  {
    if (eig.size() == 0)
      throw DomainError("empty eigensystem");
    a_ = eig.vectors.transpose() * a.data * eig.vectors;
    b_ = eig.vectors.transpose() * b.data * eig.vectors;
    z_ = detail::shifted_weights(eig.energies, beta.is_infinite() ? 0.0 : beta.value(), beta.is_infinite()).sum();
  }

  /// Domain: |τ| ≤ β at finite temperature, any τ at zero temperature.
  /// Fermionic statistics uses θ(0) = 0, so τ = 0 takes the anti-ordered branch.
  double operator()(double tau) const
  {
    if (beta_.is_finite() && std::abs(tau) > beta_.value())
      throw DomainError("tau outside [-beta, beta]");
    bool const ordered = tau > 0.0 || (tau == 0.0 && statistics_ == Statistics::Bosonic);
    double const t = std::abs(tau);
    double const sign = (!ordered && statistics_ == Statistics::Fermionic) ? -1.0 : 1.0;
    Eigen::MatrixXd const& left = ordered ? a_ : b_;
    Eigen::MatrixXd const& right = ordered ? b_ : a_;

    Eigen::VectorXd outer;
    if (beta_.is_infinite())
      outer = detail::shifted_weights(energies_, 0.0, true);
    else
      outer = detail::shifted_weights(energies_, beta_.value() - t, false);
    Eigen::VectorXd const inner = detail::shifted_weights(energies_, t, false);

    // Σ_{n,n'} outer_n L_{nn'} inner_{n'} R_{n'n}
    double acc = 0.0;
    for (Eigen::Index n = 0; n < left.rows(); ++n) {
      if (outer(n) == 0.0)
        continue;
      acc += outer(n) * (left.row(n).transpose().cwiseProduct(inner).cwiseProduct(right.col(n))).sum();
    }
    return sign * acc / z_;
  }

private:
  std::vector<double> energies_;
  InverseTemperature beta_;
  Statistics statistics_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  double z_{1.0};
};

inline double time_ordered_two_point(OperatorMatrix const& a, OperatorMatrix const& b, double tau,
                                     EigenSystem const& eig, InverseTemperature beta, Statistics statistics)
{
  return TwoPointFunction(a, b, eig, beta, statistics)(tau);
}

/// Whether the fermionic sector's displaced Gaussian needs an explicit
/// truncation check at the default n_max.
inline bool needs_convergence_check(ModelParams const& p)
{
  return p.lambda * p.lambda / (p.m * p.m * p.m) > 0.5;
}

enum class Observable {
  PositionExpectation,  // ⟨q⟩_β
  NumberExpectation,    // ⟨N⟩_β
  FermionGroundShift,   // E_{0,F} − E_{0,B}
  GroundOverlapSquared, // |⟨0_F|c†|0_B⟩|²
};

inline std::string to_string(Observable o)
{
  switch (o) {
  case Observable::PositionExpectation: return "position_expectation";
  case Observable::NumberExpectation: return "number_expectation";
  case Observable::FermionGroundShift: return "fermion_ground_shift";
  case Observable::GroundOverlapSquared: return "ground_overlap_squared";
  }
  return "unknown";
}

inline double evaluate(Observable o, ModelParams const& params, EigenSystem const& eig)
{
  TruncatedBasis const basis = eig.basis;
  switch (o) {
  case Observable::PositionExpectation:
    return thermal_expectation(position_operator(basis, params.m), eig, params.beta);
  case Observable::NumberExpectation:
    return thermal_expectation(number_operator(basis), eig, params.beta);
  case Observable::FermionGroundShift:
    return eig.energies[eig.sector_ground(Sector::Fermionic)] - eig.energies[eig.sector_ground(Sector::Bosonic)];
  case Observable::GroundOverlapSquared: {
    Eigen::VectorXd const f = eig.vectors.col(static_cast<Eigen::Index>(eig.sector_ground(Sector::Fermionic)));
    Eigen::VectorXd const b = eig.vectors.col(static_cast<Eigen::Index>(eig.sector_ground(Sector::Bosonic)));
    double const amp = f.dot(creation_operator(basis).data * b);
    return amp * amp;
  }
  }
  throw DomainError("unknown observable");
}

struct ConvergenceReport
{
  Observable observable{};
  std::vector<int> n_max;
  std::vector<double> values;
  std::vector<double> differences; // values[i+1] - values[i]
  bool monotone{true};             // |differences| non-increasing above the roundoff floor
  bool converged{false};           // last |difference| within tolerance
  double tolerance{1e-8};
};

inline ConvergenceReport truncation_sweep(ModelParams const& params, Observable observable,
                                          std::span<int const> n_max_list, double tolerance = 1e-8)
{
  if (n_max_list.size() < 2)
    throw DomainError("truncation sweep needs at least two n_max values");
  if (!std::is_sorted(n_max_list.begin(), n_max_list.end()))
    throw DomainError("n_max list must be ascending");

  ConvergenceReport r;
  r.observable = observable;
  r.tolerance = tolerance;
  for (int n : n_max_list) {
    r.n_max.push_back(n);
    r.values.push_back(evaluate(observable, params, solve(params, n)));
  }
  double scale = 0.0;
  for (double v : r.values)
    scale = std::max(scale, std::abs(v));
  double const floor = 1e-13 * std::max(1.0, scale);
  for (std::size_t i = 1; i < r.values.size(); ++i)
    r.differences.push_back(r.values[i] - r.values[i - 1]);
  for (std::size_t i = 1; i < r.differences.size(); ++i) {
    double const cur = std::abs(r.differences[i]);
    if (cur > floor && cur > std::abs(r.differences[i - 1]))
      r.monotone = false;
  }
  r.converged = std::abs(r.differences.back()) <= tolerance;
  return r;
}

} // namespace yukawa1d::exactdiag

#endif
