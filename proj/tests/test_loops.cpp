#include <yukawa1d/loops.hpp>
#include <yukawa1d/series.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

using namespace yukawa1d;
using namespace yukawa1d::loops;
using cplx = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

// −i^j Σ_k Π_r 1/(k + q_r + iμ) over fermionic frequencies k, symmetric cutoff;
// absolutely convergent for j ≥ 2
cplx brute_force_loop(std::vector<std::int64_t> const& momenta, double mu, double beta, long m)
{
  std::vector<double> q(momenta.size(), 0.0);
  for (std::size_t r = 1; r < momenta.size(); ++r)
    q[r] = q[r - 1] + 2.0 * pi * static_cast<double>(momenta[r - 1]) / beta;
  cplx s = 0.0;
  for (long n = -m; n < m; ++n) {
    double const k = (2.0 * n + 1.0) * pi / beta;
    cplx prod = 1.0;
    for (double qr : q)
      prod /= cplx{k + qr, mu};
    s += prod;
  }
  return -std::pow(cplx{0.0, 1.0}, static_cast<int>(momenta.size())) * s;
}

struct DirectSum
{
  double value;
  double largest_term;
};

DirectSum direct_power_sum(int k, double y, int terms)
{
  DirectSum s{0.0, 0.0};
  for (int n = 1; n <= terms; ++n) {
    double const t = std::pow(n, k) * std::pow(y, n);
    s.value += t;
    s.largest_term = std::max(s.largest_term, std::abs(t));
  }
  return s;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::int64_t bell(int n)
{
  // Bell triangle
  std::vector<std::int64_t> row{1};
  for (int i = 1; i < n; ++i) {
    std::vector<std::int64_t> next{row.back()};
    for (auto v : row)
      next.push_back(next.back() + v);
    row = next;
  }
  return row.back();
}

} // namespace

TEST(Series, EulerianRows)
{
  EXPECT_EQ(series::eulerian_row(0), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(series::eulerian_row(1), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(series::eulerian_row(2), (std::vector<std::int64_t>{1, 1}));
  EXPECT_EQ(series::eulerian_row(3), (std::vector<std::int64_t>{1, 4, 1}));
  EXPECT_EQ(series::eulerian_row(4), (std::vector<std::int64_t>{1, 11, 11, 1}));
  for (int k = 1; k < 12; ++k) {
    std::int64_t sum = 0;
    for (auto v : series::eulerian_row(k))
      sum += v;
    EXPECT_EQ(static_cast<double>(sum), factorial(k));
  }
}

TEST(Series, ClosedFormMatchesDirect)
{
  for (int k = 0; k <= 9; ++k)
    for (double y : {-0.9, -0.5, -1.0 / 3.0, 0.1, 0.6}) {
      double const closed = series::power_series_closed_form(k, y);
      // the alternating direct sum loses digits in proportion to its largest term
      auto const direct = direct_power_sum(k, y, 3000);
      EXPECT_NEAR(closed, direct.value, 1e-12 * std::max(1.0, direct.largest_term)) << "k=" << k << " y=" << y;
    }
  EXPECT_THROW(series::power_series_closed_form(2, 1.0), DomainError);
  EXPECT_THROW(series::power_series_closed_form(-1, 0.5), DomainError);
}

TEST(Series, TailBoundIsAnUpperBound)
{
  for (int k : {0, 3, 8})
    for (double x : {0.2, 0.7, 0.95})
      for (std::int64_t n : {10, 50, 200}) {
        double const bound = series::power_tail_bound(k, x, n);
        double tail = 0.0;
        for (std::int64_t i = n + 1; i < n + 5000; ++i)
          tail += std::pow(static_cast<double>(i), k) * std::pow(x, static_cast<double>(i));
        EXPECT_GE(bound, tail * (1 - 1e-12));
      }
  EXPECT_EQ(series::cutoff_for(5, 0.999, 1e-12, 100), -1);
  std::int64_t const c = series::cutoff_for(2, 0.5, 1e-12, 4000);
  ASSERT_GT(c, 0);
  EXPECT_LE(series::power_tail_bound(2, 0.5, c), 1e-12);
  EXPECT_GT(series::power_tail_bound(2, 0.5, c - 1), 1e-12);
}

TEST(Series, CompensatedSum)
{
  series::CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(Loops, Validation)
{
  LoopSpec spec{3, {1, 1, 1}, 1.0, 2.0};
  try {
    connected_loop(spec);
    FAIL();
  } catch (DomainError const& e) {
    EXPECT_NE(std::string(e.what()).find("overall momentum conservation delta function"), std::string::npos);
  }
  EXPECT_THROW(connected_loop({11, std::vector<std::int64_t>(11, 0), 1.0, 2.0}), DomainError);
  EXPECT_THROW(connected_loop({2, {0, 0}, -1.0, 2.0}), DomainError);
  EXPECT_THROW(connected_loop({2, {0}, 1.0, 2.0}), DomainError);
  EXPECT_THROW(connected_loop({0, {}, 1.0, 2.0}), DomainError);
}

TEST(Loops, SingleInsertionIsOccupation)
{
  for (double beta : {0.3, 1.0, 5.0}) {
    auto const r = connected_loop({1, {0}, 0.8, beta});
    double const f = 1.0 / (std::exp(0.8 * beta) + 1.0);
    EXPECT_NEAR(r.value.real(), beta * f, 1e-12);
    EXPECT_NEAR(r.value.imag(), 0.0, 1e-14);
  }
}

TEST(Loops, ZeroMomentaAgainstBruteForce)
{
  double const mu = 0.7, beta = 1.9;
  for (int j = 2; j <= 5; ++j) {
    auto const r = connected_loop({j, std::vector<std::int64_t>(j, 0), mu, beta});
    cplx const oracle = brute_force_loop(std::vector<std::int64_t>(j, 0), mu, beta, 200000);
    double const tol = j == 2 ? 1e-4 : 1e-8;
    EXPECT_NEAR(r.value.real(), oracle.real(), tol * std::abs(oracle)) << "j=" << j;
    EXPECT_NEAR(r.value.imag(), oracle.imag(), tol * std::abs(oracle)) << "j=" << j;
    EXPECT_FALSE(r.fast_path);
    EXPECT_EQ(r.degeneracy, (std::vector<int>{j}));
  }
}

TEST(Loops, ZeroMomentaSingleOrderingNormalization)
{
  // x = 1/3: Σ n²(−x)^n = −3/32, one ordering carries 1/2! of it
  double const beta = 1.5, mu = std::log(3.0) / beta;
  auto const r = connected_loop({3, {0, 0, 0}, mu, beta});
  EXPECT_NEAR(r.value.real(), std::pow(beta, 3) * 3.0 / 64.0, 1e-12);
  auto const z = connected_loop_zero_momenta(3, mu, beta);
  EXPECT_NEAR(z.value, std::pow(beta, 3) * 3.0 / 32.0, 1e-12);
  EXPECT_NEAR(z.direct, z.value, 1e-9);
  for (int j = 1; j <= 8; ++j) {
    auto const single = connected_loop({j, std::vector<std::int64_t>(j, 0), mu, beta});
    auto const all = connected_loop_zero_momenta(j, mu, beta);
    EXPECT_NEAR(single.value.real() * factorial(j - 1), all.value, 1e-10 * std::max(1.0, std::abs(all.value)));
  }
}

TEST(Loops, MixedMomentaAgainstBruteForce)
{
  double const mu = 1.1, beta = 2.3;
  std::vector<std::vector<std::int64_t>> const cases{
      {0, 1, -1}, {1, -1, 0}, {1, 1, -2}, {2, -1, -1, 0}, {1, -1, 1, -1}, {0, 0, 3, -3}, {1, 0, -1, 0}, {2, -2, 0, 0, 0}};
  for (auto const& mom : cases) {
    int const j = static_cast<int>(mom.size());
    auto const r = connected_loop({j, mom, mu, beta});
    cplx const oracle = brute_force_loop(mom, mu, beta, 200000);
    double const scale = std::max(std::abs(oracle), 1e-3);
    EXPECT_NEAR(std::abs(r.value - oracle), 0.0, 1e-7 * scale) << "case of length " << j;
    if (!r.fast_path) {
      cplx wsum = 0.0;
      for (auto const& w : r.windings)
        wsum += w;
      EXPECT_LE(std::abs(wsum - r.value), r.tail_bound + 1e-12);
      EXPECT_EQ(r.closed_form, r.value);
    }
  }
}

TEST(Loops, FastPathAgreesWithPolynomialRoute)
{
  double const mu = 0.9, beta = 3.0;
  for (auto const& mom : std::vector<std::vector<std::int64_t>>{{1, -1}, {1, 2, -3}, {3, -1, -1, -1}}) {
    int const j = static_cast<int>(mom.size());
    auto const fast = connected_loop({j, mom, mu, beta});
    auto const slow = connected_loop({j, mom, mu, beta}, LoopOptions{false});
    EXPECT_TRUE(fast.fast_path);
    EXPECT_FALSE(slow.fast_path);
    EXPECT_EQ(fast.value, cplx{});
    EXPECT_NEAR(std::abs(slow.value), 0.0, 1e-12);
    cplx const oracle = brute_force_loop(mom, mu, beta, 200000);
    EXPECT_NEAR(std::abs(oracle), 0.0, j == 2 ? 1e-4 : 1e-8);
  }
}

TEST(Loops, DegeneracyProfile)
{
  EXPECT_EQ(degeneracy_profile(partial_sums({1, -1, 1, -1})), (std::vector<int>{2, 2}));
  EXPECT_EQ(degeneracy_profile(partial_sums({0, 0, 3, -3})), (std::vector<int>{3, 1}));
  EXPECT_EQ(degeneracy_profile(partial_sums({1, 2, -3})), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(partial_sums({2, -1, -1, 0}), (std::vector<std::int64_t>{0, 2, 1, 0}));
}

TEST(Loops, CutoffError)
{
  LoopSpec spec{4, {0, 0, 0, 0}, 1e-3, 1.0, 50, 1e-12};
  try {
    connected_loop(spec);
    FAIL();
  } catch (series::WindingCutoffError const& e) {
    EXPECT_GT(e.achievable_bound, 1e-12);
  }
}

TEST(Loops, SymmetrizedAgainstBruteForce)
{
  double const mu = 1.0, beta = 2.0;
  std::vector<std::int64_t> const mom{1, -1, 2, -2};
  auto const s = permutation_symmetrized_loop(4, mom, mu, beta);
  ASSERT_EQ(s.orderings.size(), 6u);
  // the insertions after the first, in every order
  std::vector<int> idx{1, 2, 3};
  cplx oracle = 0.0;
  do {
    oracle += brute_force_loop({mom[0], mom[idx[0]], mom[idx[1]], mom[idx[2]]}, mu, beta, 100000);
  } while (std::next_permutation(idx.begin(), idx.end()));
  EXPECT_NEAR(s.value, oracle.real(), 1e-7 * std::max(1.0, std::abs(oracle)));
  EXPECT_NEAR(oracle.imag(), 0.0, 1e-7);
  EXPECT_LT(s.imaginary_residual, 1e-12);
}

TEST(Loops, SymmetrizedZeroMomentaIsFullLoop)
{
  for (int j = 1; j <= 7; ++j) {
    auto const s = permutation_symmetrized_loop(j, std::vector<std::int64_t>(j, 0), 0.6, 2.5);
    auto const z = connected_loop_zero_momenta(j, 0.6, 2.5);
    EXPECT_EQ(s.orderings.size(), static_cast<std::size_t>(factorial(j - 1)));
    EXPECT_NEAR(s.value, z.value, 1e-10 * std::max(1.0, std::abs(z.value)));
  }
}

TEST(SetPartitions, CountsAreBellNumbers)
{
  for (int n = 1; n <= 10; ++n) {
    std::int64_t count = 0;
    for_each_set_partition(n, [&](auto const&) { ++count; });
    EXPECT_EQ(count, bell(n)) << "n=" << n;
  }
  EXPECT_EQ(bell(10), 115975);
}

TEST(SetPartitions, PartitionsAreDistinctAndComplete)
{
  std::set<std::vector<std::vector<int>>> seen;
  for_each_set_partition(5, [&](std::vector<std::vector<int>> const& parts) {
    std::vector<int> all;
    for (auto const& p : parts) {
      EXPECT_FALSE(p.empty());
      EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
      all.insert(all.end(), p.begin(), p.end());
    }
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_TRUE(seen.insert(parts).second);
  });
  EXPECT_EQ(seen.size(), 52u);
}

TEST(NumberCorrelator, EqualsOccupationForAllOrders)
{
  // N² = N, so every time-ordered product of N collapses to ⟨N⟩
  for (double mu : {0.4, 1.0, 2.0})
    for (double beta : {0.5, 1.0, 3.0})
      for (int j = 1; j <= 10; ++j) {
        auto const r = full_number_correlator(j, mu, beta);
        double const f = 1.0 / (std::exp(mu * beta) + 1.0);
        EXPECT_NEAR(r.value, f, 1e-10) << "j=" << j;
        EXPECT_EQ(r.partitions, bell(j));
        EXPECT_NEAR(r.connected + r.disconnected, r.value, 1e-12);
      }
  EXPECT_THROW(full_number_correlator(11, 1.0, 1.0), DomainError);
}

TEST(Telescoping, PassesForAllOrders)
{
  for (double x : {0.1, 0.5, 0.9})
    for (int j = 2; j <= 10; ++j) {
      auto const r = telescoping_check(j, -std::log(x), 1.0);
      EXPECT_TRUE(r.pass) << "j=" << j << " x=" << x << " residual=" << r.residual
                          << " traj=" << r.max_trajectory_error << " binom=" << r.max_binomial_error;
      EXPECT_NEAR(r.rhs, -x / (1 + x), 1e-15);
      EXPECT_FALSE(r.partial_sums.empty());
    }
  EXPECT_THROW(telescoping_check(1, 1.0, 1.0), DomainError);
}
