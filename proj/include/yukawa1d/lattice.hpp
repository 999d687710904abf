#ifndef YUKAWA1D_LATTICE_HPP
#define YUKAWA1D_LATTICE_HPP

// Euclidean lattice Monte Carlo at finite β. The fermion is integrated out
// exactly: N is conserved, so the fermionic trace of the time-ordered
// exponential is 1 + exp(−a Σ_i (μ + λφ_i)), which is strictly positive.

#include <yukawa1d/format.hpp>
#include <yukawa1d/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace yukawa1d::lattice {

struct LatticeConfig
{
  int n_tau{64};
  double beta{4.0};

  double spacing() const { return beta / n_tau; }

  void validate() const
  {
    if (n_tau < 8 || n_tau % 2 != 0)
      throw DomainError("n_tau must be even and >= 8");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw DomainError("lattice beta must be positive and finite");
  }
};

using FieldConfiguration = std::vector<double>;

/// Σ_i a[½((φ_{i+1} − φ_i)/a)² + ½m²φ_i²] with periodic wraparound.
inline double boson_action(std::span<double const> phi, LatticeConfig const& lat, double m)
{
  double const a = lat.spacing();
  std::size_t const n = phi.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double const d = phi[(i + 1) % n] - phi[i];
    s += 0.5 * d * d / a + 0.5 * a * m * m * phi[i] * phi[i];
  }
  return s;
}

/// a Σ_i (μ + λφ_i): the fermion's Euclidean action in the occupied sector.
inline double fermion_exponent(std::span<double const> phi, ModelParams const& p, LatticeConfig const& lat)
{
  double sum = 0.0;
  for (double v : phi)
    sum += p.mu + p.lambda * v;
  return lat.spacing() * sum;
}

/// log(1 + e^{−s}), stable for either sign of s.
inline double softplus_neg(double s)
{
  return s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

inline double log_fermion_weight(std::span<double const> phi, ModelParams const& p, LatticeConfig const& lat)
{
  return softplus_neg(fermion_exponent(phi, p, lat));
}

inline double fermion_weight(std::span<double const> phi, ModelParams const& p, LatticeConfig const& lat)
{
  double const w = std::exp(log_fermion_weight(phi, p, lat));
  if (!std::isfinite(w))
    throw DomainError("fermion weight overflows; use log_fermion_weight");
  return w;
}

/// 64-bit Mersenne twister with streams derived from (seed, stream) through
/// std::seed_seq, and a portable [0,1) conversion.
class Rng
{
public:
  static constexpr char const* name = "mt19937_64/seed_seq";

  Rng(std::uint64_t seed, std::uint64_t stream)
  {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

/// Field plus the cached quantities the local update needs.
struct FieldState
{
  FieldConfiguration phi;
  double sum{0.0};

  explicit FieldState(FieldConfiguration f) : phi(std::move(f))
  {
    for (double v : phi)
      sum += v;
  }

  void resync()
  {
    sum = 0.0;
    for (double v : phi)
      sum += v;
  }
};

/// Metropolis ratio min(1, P(new)/P(old)) for changing site i to new_value
/// under P ∝ e^{−S_B}·w_F.
inline double local_acceptance_probability(FieldState const& st, std::size_t i, double new_value,
                                           ModelParams const& p, LatticeConfig const& lat)
{
  std::size_t const n = st.phi.size();
  double const a = lat.spacing();
  double const old = st.phi[i];
  double const next = st.phi[(i + 1) % n];
  double const prev = st.phi[(i + n - 1) % n];
  double const kinetic = ((next - new_value) * (next - new_value) - (next - old) * (next - old) +
                          (new_value - prev) * (new_value - prev) - (old - prev) * (old - prev)) /
                         (2.0 * a);
  double const mass = 0.5 * a * p.m * p.m * (new_value * new_value - old * old);
  double const s_old = a * (n * p.mu + p.lambda * st.sum);
  double const s_new = s_old + a * p.lambda * (new_value - old);
  double const log_ratio = -(kinetic + mass) + softplus_neg(s_new) - softplus_neg(s_old);
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

/// Same for a uniform shift φ_i → φ_i + shift of every site.
inline double zero_mode_acceptance_probability(FieldState const& st, double shift, ModelParams const& p,
                                               LatticeConfig const& lat)
{
  double const a = lat.spacing();
  auto const n = static_cast<double>(st.phi.size());
  double const mass = a * p.m * p.m * (shift * st.sum + 0.5 * n * shift * shift);
  double const s_old = a * (n * p.mu + p.lambda * st.sum);
  double const s_new = s_old + a * p.lambda * n * shift;
  double const log_ratio = -mass + softplus_neg(s_new) - softplus_neg(s_old);
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

struct SweepSteps
{
  double local{0.5};
  double zero_mode{0.5};
  int zero_mode_hits{8}; // uniform-shift proposals after the site pass; 0 disables
};

struct SweepStats
{
  double local_acceptance{0.0};
  double zero_mode_acceptance{0.0};
};

/// One site-by-site Metropolis pass followed by zero_mode_hits uniform-shift
/// proposals. Every proposal is symmetric and accepted with the Metropolis
/// ratio, so each step preserves e^{−S_B}·w_F.
inline SweepStats metropolis_sweep(FieldState& st, ModelParams const& p, LatticeConfig const& lat,
                                   SweepSteps const& steps, Rng& rng)
{
  if (!(steps.local > 0.0))
    throw DomainError("proposal step must be positive");
  SweepStats stats;
  std::size_t const n = st.phi.size();
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double const proposal = st.phi[i] + steps.local * (2.0 * rng.uniform() - 1.0);
    if (rng.uniform() < local_acceptance_probability(st, i, proposal, p, lat)) {
      st.sum += proposal - st.phi[i];
      st.phi[i] = proposal;
      ++accepted;
    }
  }
  stats.local_acceptance = static_cast<double>(accepted) / static_cast<double>(n);

  if (steps.zero_mode_hits > 0) {
    int zacc = 0;
    for (int h = 0; h < steps.zero_mode_hits; ++h) {
      double const shift = steps.zero_mode * (2.0 * rng.uniform() - 1.0);
      if (rng.uniform() < zero_mode_acceptance_probability(st, shift, p, lat)) {
        for (double& v : st.phi)
          v += shift;
        st.sum += static_cast<double>(n) * shift;
        ++zacc;
      }
    }
    st.resync();
    stats.zero_mode_acceptance = static_cast<double>(zacc) / steps.zero_mode_hits;
  }
  return stats;
}

struct ChainEstimate
{
  double mean{0.0};
  double std_error{0.0};
  double tau_int{0.5};
  std::int64_t samples{0};
  std::uint64_t seed{0};
  std::int64_t block_size{1};
  bool plateau{false};
};

/// Online binning: level l holds block means of 2^l consecutive samples.
class BinningAccumulator
{
public:
  void add(double x)
  {
    for (std::size_t level = 0;; ++level) {
      if (level == sum_.size()) {
        sum_.push_back(0.0);
        sumsq_.push_back(0.0);
        count_.push_back(0);
        pending_.push_back(0.0);
        has_pending_.push_back(false);
      }
      sum_[level] += x;
      sumsq_[level] += x * x;
      ++count_[level];
      if (!has_pending_[level]) {
        pending_[level] = x;
        has_pending_[level] = true;
        return;
      }
      x = 0.5 * (pending_[level] + x);
      has_pending_[level] = false;
    }
  }

  std::int64_t count() const { return count_.empty() ? 0 : count_[0]; }
  double mean() const { return count() ? sum_[0] / count() : 0.0; }

  /// Standard error of the mean from level l block means.
  double level_error(std::size_t l) const
  {
    auto const nb = static_cast<double>(count_[l]);
    double const m = sum_[l] / nb;
    double const var = std::max(0.0, sumsq_[l] / nb - m * m);
    return std::sqrt(var / (nb - 1.0));
  }

  /// Grows the block size until the error estimate stops increasing beyond
  /// its own statistical uncertainty; requires at least min_blocks blocks.
  ChainEstimate estimate(std::uint64_t seed, std::int64_t min_blocks = 64) const
  {
    ChainEstimate e;
    e.mean = mean();
    e.samples = count();
    e.seed = seed;
    std::vector<double> err;
    for (std::size_t l = 0; l < count_.size() && count_[l] >= min_blocks; ++l)
      err.push_back(level_error(l));
    if (err.empty()) {
      e.std_error = count() > 1 ? level_error(0) : 0.0;
      return e;
    }
    std::size_t chosen = err.size() - 1;
    for (std::size_t l = 0; l + 2 < err.size(); ++l) {
      auto within = [&](std::size_t k) {
        double const rel = std::sqrt(2.0 / static_cast<double>(count_[k] - 1));
        return err[k] <= err[l] * (1.0 + 2.0 * rel);
      };
      if (within(l + 1) && within(l + 2)) {
        chosen = l;
        e.plateau = true;
        break;
      }
    }
    // the plateau value is the largest estimate from the chosen level up to
    // the next two levels
    double best = err[chosen];
    for (std::size_t k = chosen; k < std::min(err.size(), chosen + 3); ++k)
      best = std::max(best, err[k]);
    e.std_error = best;
    e.block_size = std::int64_t{1} << chosen;
    double const naive = err[0];
    e.tau_int = naive > 0.0 ? 0.5 * (best / naive) * (best / naive) : 0.5;
    return e;
  }

private:
  std::vector<double> sum_, sumsq_, pending_;
  std::vector<std::int64_t> count_;
  std::vector<bool> has_pending_;
};

struct McParams
{
  std::int64_t thermalization{20000};
  std::int64_t sweeps{1000000};
  std::uint64_t seed{1};
  std::uint64_t stream{0};
  SweepSteps steps{};
  double target_acceptance{0.5};
  std::int64_t tune_interval{200};
  std::ostream* samples{nullptr}; // one measurement per line when set

  void validate() const
  {
    if (thermalization <= 0 || sweeps <= 0)
      throw DomainError("thermalization and measurement sweep counts must be positive");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
      throw DomainError("target acceptance must lie in (0, 1)");
  }
};

struct ChainResult
{
  ChainEstimate phi;                    // ⟨φ⟩
  std::vector<double> tau;              // k·a for k = 0..n_tau
  std::vector<ChainEstimate> correlator; // ⟨φ(τ_k)φ(0)⟩, translation averaged
  SweepSteps steps;                     // frozen after thermalization
  double local_acceptance{0.0};
  double zero_mode_acceptance{0.0};
  bool thermalized{true};
  double drift_sigma{0.0};
  std::string generator{Rng::name};
  std::uint64_t seed{0};
  std::uint64_t stream{0};
};

namespace detail {

inline void write_number(std::ostream& os, double v) { os << format_double(v); }

} // namespace detail

/// Runs one Markov chain: cold start, step tuning towards the target
/// acceptance during thermalization, then frozen-step measurement.
/// Deterministic given (seed, stream, parameters).
inline ChainResult run_chain(ModelParams const& params, LatticeConfig const& lat, McParams const& mc)
{
  params.validate();
  lat.validate();
  mc.validate();

  Rng rng(mc.seed, mc.stream);
  FieldState st(FieldConfiguration(static_cast<std::size_t>(lat.n_tau), 0.0));
  SweepSteps steps = mc.steps;

  double acc_local = 0.0, acc_zero = 0.0;
  for (std::int64_t s = 1; s <= mc.thermalization; ++s) {
    auto const stats = metropolis_sweep(st, params, lat, steps, rng);
    acc_local += stats.local_acceptance;
    acc_zero += stats.zero_mode_acceptance;
    if (s % mc.tune_interval == 0) {
      auto retune = [&](double& step, double acc) {
        double const ratio = std::clamp(acc / mc.target_acceptance, 0.5, 2.0);
        step = std::clamp(step * ratio, 1e-6, 1e3);
      };
      retune(steps.local, acc_local / mc.tune_interval);
      if (steps.zero_mode_hits > 0)
        retune(steps.zero_mode, acc_zero / mc.tune_interval);
      acc_local = acc_zero = 0.0;
    }
  }

  auto const n = static_cast<std::size_t>(lat.n_tau);
  std::size_t const half = n / 2;
  BinningAccumulator phi_acc, first_half, second_half;
  std::vector<BinningAccumulator> corr_acc(half + 1);
  std::vector<double> corr(half + 1);
  double sum_local = 0.0, sum_zero = 0.0;

  for (std::int64_t s = 0; s < mc.sweeps; ++s) {
    auto const stats = metropolis_sweep(st, params, lat, steps, rng);
    sum_local += stats.local_acceptance;
    sum_zero += stats.zero_mode_acceptance;

    double const mean = st.sum / static_cast<double>(n);
    phi_acc.add(mean);
    (s < mc.sweeps / 2 ? first_half : second_half).add(mean);
    for (std::size_t k = 0; k <= half; ++k) {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        c += st.phi[i] * st.phi[(i + k) % n];
      corr[k] = c / static_cast<double>(n);
      corr_acc[k].add(corr[k]);
    }
    if (mc.samples) {
      detail::write_number(*mc.samples, mean);
      for (double c : corr) {
        *mc.samples << ' ';
        detail::write_number(*mc.samples, c);
      }
      *mc.samples << '\n';
    }
  }

  ChainResult r;
  r.seed = mc.seed;
  r.stream = mc.stream;
  r.steps = steps;
  r.local_acceptance = sum_local / static_cast<double>(mc.sweeps);
  r.zero_mode_acceptance = sum_zero / static_cast<double>(mc.sweeps);
  r.phi = phi_acc.estimate(mc.seed);
  for (std::size_t k = 0; k <= n; ++k) {
    r.tau.push_back(static_cast<double>(k) * lat.spacing());
    r.correlator.push_back(corr_acc[std::min(k, n - k)].estimate(mc.seed));
  }

  if (first_half.count() > 1 && second_half.count() > 1) {
    auto const e1 = first_half.estimate(mc.seed, 32);
    auto const e2 = second_half.estimate(mc.seed, 32);
    double const sigma = std::hypot(e1.std_error, e2.std_error);
    r.drift_sigma = sigma > 0.0 ? std::abs(e1.mean - e2.mean) / sigma : 0.0;
    r.thermalized = r.drift_sigma < 4.0;
  }
  return r;
}

/// Inverse-variance weighted combination, reduced in the given order.
inline ChainEstimate merge_estimates(std::span<ChainEstimate const> parts)
{
  if (parts.empty())
    throw DomainError("nothing to merge");
  double wsum = 0.0, wmean = 0.0;
  ChainEstimate out;
  out.seed = parts.front().seed;
  for (auto const& e : parts) {
    if (!(e.std_error > 0.0))
      throw DomainError("cannot merge an estimate with zero error");
    double const w = 1.0 / (e.std_error * e.std_error);
    wsum += w;
    wmean += w * e.mean;
    out.samples += e.samples;
    out.tau_int = std::max(out.tau_int, e.tau_int);
  }
  out.mean = wmean / wsum;
  out.std_error = 1.0 / std::sqrt(wsum);
  return out;
}

} // namespace yukawa1d::lattice

#endif
