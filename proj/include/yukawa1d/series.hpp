#ifndef YUKAWA1D_SERIES_HPP
#define YUKAWA1D_SERIES_HPP

// Helpers for the winding sums Σ_{n>0} n^k (−x)^n that appear in every
// finite-temperature fermion loop.

#include <yukawa1d/model.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace yukawa1d::series {

/// Thrown when a winding cutoff cannot reach the requested tolerance.
class WindingCutoffError : public DomainError
{
public:
  WindingCutoffError(double achievable, double requested)
    : DomainError("winding cutoff too small: tail bound " + std::to_string(achievable) +
                  " exceeds tolerance " + std::to_string(requested)),
      achievable_bound(achievable)
  {
  }

  double achievable_bound;
};

/// Neumaier compensated accumulator.
class CompensatedSum
{
public:
  void add(double v)
  {
    double const t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_{0.0};
  double comp_{0.0};
};

/// Upper bound on Σ_{n>cutoff} n^k x^n for 0 ≤ x < 1, from the ratio test.
/// Returns +∞ when the term ratio past the cutoff is not yet below one.
inline double power_tail_bound(int k, double x, std::int64_t cutoff)
{
  if (x == 0.0)
    return 0.0;
  double const n1 = static_cast<double>(cutoff + 1);
  double const ratio = std::pow((n1 + 1.0) / n1, k) * x;
  if (ratio >= 1.0)
    return std::numeric_limits<double>::infinity();
  double const first = std::exp(k * std::log(n1) + n1 * std::log(x));
  return first / (1.0 - ratio);
}

/// Smallest cutoff N such that power_tail_bound(k, x, N) ≤ tol, or -1 if it
/// exceeds max_cutoff.
inline std::int64_t cutoff_for(int k, double x, double tol, std::int64_t max_cutoff)
{
  for (std::int64_t n = 1; n <= max_cutoff; ++n)
    if (power_tail_bound(k, x, n) <= tol)
      return n;
  return -1;
}

/// Eulerian numbers A(k, 0..k-1), with A(0, 0) = 1.
inline std::vector<std::int64_t> eulerian_row(int k)
{
  std::vector<std::int64_t> row{1};
  for (int r = 1; r <= k; ++r) {
    std::vector<std::int64_t> next(r, 0);
    for (int m = 0; m < r; ++m) {
      std::int64_t v = 0;
      if (m < static_cast<int>(row.size()))
        v += (m + 1) * row[m];
      if (m >= 1)
        v += (r - m) * row[m - 1];
      next[m] = v;
    }
    row = std::move(next);
  }
  return row;
}

/// Σ_{n≥1} n^k y^n = y·A_k(y)/(1−y)^{k+1} for |y| < 1 (a polylogarithm of
/// order −k).
inline double power_series_closed_form(int k, double y)
{
  if (k < 0)
    throw DomainError("power series order must be non-negative");
  if (!(std::abs(y) < 1.0))
    throw DomainError("power series requires |y| < 1");
  auto const row = eulerian_row(k);
  double poly = 0.0;
  for (auto it = row.rbegin(); it != row.rend(); ++it)
    poly = poly * y + static_cast<double>(*it);
  return y * poly / std::pow(1.0 - y, k + 1);
}

struct TruncatedSum
{
  double value{0.0};
  double tail_bound{0.0};
  std::int64_t terms{0};
};

/// Direct evaluation of Σ_{n=1}^{N} n^k y^n with the tail bound for |y|.
inline TruncatedSum power_series_direct(int k, double y, std::int64_t cutoff)
{
  CompensatedSum acc;
  double yn = 1.0;
  for (std::int64_t n = 1; n <= cutoff; ++n) {
    yn *= y;
    acc.add(std::pow(static_cast<double>(n), k) * yn);
  }
  return {acc.value(), power_tail_bound(k, std::abs(y), cutoff), cutoff};
}

} // namespace yukawa1d::series

#endif
