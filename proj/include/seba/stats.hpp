// Spacing statistics, heat-trace sums and the 3D greedy approximation.
//
// Level j pairs the norm n_j with the perturbed eigenvalue just below it:
// d_j = n_j - lambda_j (d_0 = -lambda_0) and delta_j = n_{j+1} - n_j. Every
// average over "j up to x" runs over the levels with n_j <= x, j = 0 included.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "seba/error.hpp"
#include "seba/lattice.hpp"
#include "seba/secular.hpp"
#include "seba/summation.hpp"

namespace seba {

struct GapSequence {
  double x = 0.0;
  std::vector<double> d;       // d_j, j < N(x)
  std::vector<double> delta;   // delta_j, j < N(x)
  std::vector<double> lambda;  // lambda_j, j < N(x)
  std::vector<double> A;       // A at lambda_j: sum_{i <= j} d_i

  std::size_t size() const noexcept { return d.size(); }
};

namespace detail {

inline void check_alignment(const NormSpectrum& spec, const PerturbedSpectrum& pert) {
  if (pert.lambdas.size() != pert.d.size() || pert.residuals.size() != pert.d.size())
    throw ConsistencyError("perturbed spectrum columns have different lengths");
  if (pert.x_max > spec.cutoff() || pert.size() != spec.count_upto(pert.x_max))
    throw ConsistencyError("perturbed spectrum does not match the norm spectrum: expected " +
                           std::to_string(spec.count_upto(std::min(pert.x_max, spec.cutoff()))) +
                           " levels up to x_max, got " + std::to_string(pert.size()));
  for (std::size_t j = 0; j < pert.size(); ++j) {
    const double n = spec.norm(j);
    const double below = j == 0 ? -std::numeric_limits<double>::infinity() : spec.norm(j - 1);
    const double lam = pert.lambdas[j];
    if (!(lam > below && lam < n && pert.d[j] > 0.0))
      throw ConsistencyError("perturbed level " + std::to_string(j) + " does not interlace with the norms");
    if (std::abs(pert.d[j] - (n - lam)) > 1e-9 * std::max(1.0, std::abs(lam)))
      throw ConsistencyError("gap d at level " + std::to_string(j) + " disagrees with the norms");
  }
}

inline void check_range(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x) {
  if (!(x >= 0.0)) throw DomainError("analysis cutoff must be non-negative");
  if (x > pert.x_max) throw RangeError("analysis cutoff exceeds the perturbed spectrum range");
  if (spec.count_upto(x) >= spec.size()) throw RangeError("analysis cutoff needs the next norm inside the cutoff");
}

}  // namespace detail

inline GapSequence gap_sequence(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x) {
  detail::check_alignment(spec, pert);
  detail::check_range(spec, pert, x);
  const std::size_t N = spec.count_upto(x);
  GapSequence g;
  g.x = x;
  g.d.assign(pert.d.begin(), pert.d.begin() + static_cast<std::ptrdiff_t>(N));
  g.lambda.assign(pert.lambdas.begin(), pert.lambdas.begin() + static_cast<std::ptrdiff_t>(N));
  g.delta.resize(N);
  g.A.resize(N);
  CompensatedSum acc;
  for (std::size_t j = 0; j < N; ++j) {
    g.delta[j] = spec.norm(j + 1) - spec.norm(j);
    acc.add(g.d[j]);
    g.A[j] = acc.value();
  }
  return g;
}

/// <d_j>_x / <delta_j>_x; the delta sum telescopes to n_{N(x)}.
inline double mean_gap_ratio(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x) {
  const auto g = gap_sequence(spec, pert, x);
  return g.A.back() / (spec.norm(g.size()) - spec.norm(0));
}

/// Fraction of levels up to x with d_j > threshold * <delta_j>_x.
inline double large_gap_fraction(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x,
                                 double threshold = 0.5) {
  const auto g = gap_sequence(spec, pert, x);
  const double mean = (spec.norm(g.size()) - spec.norm(0)) / static_cast<double>(g.size());
  const auto big = std::count_if(g.d.begin(), g.d.end(), [&](double d) { return d > threshold * mean; });
  return static_cast<double>(big) / static_cast<double>(g.size());
}

struct Histogram {
  double lo = 0.0;
  double hi = 5.0;
  std::vector<double> edges;
  std::vector<double> densities;
};

/// Equal bins on [lo, hi]; samples beyond hi are pooled into the last bin.
inline Histogram density_histogram(const std::vector<double>& xs, int bins, double lo = 0.0, double hi = 5.0) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  if (xs.empty()) throw SampleSizeError("histogram of an empty sample");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  const double w = (hi - lo) / bins;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + w * i;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double x : xs) {
    if (x < lo) throw DomainError("sample below the histogram support");
    const auto b = std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>((x - lo) / w));
    ++counts[static_cast<std::size_t>(b)];
  }
  h.densities.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    h.densities[i] = static_cast<double>(counts[i]) / (static_cast<double>(xs.size()) * w);
  return h;
}

/// sup_s |F_emp(s) - (1 - e^{-s})|.
inline double ks_exponential(std::vector<double> xs) {
  if (xs.empty()) throw SampleSizeError("KS distance of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = -std::expm1(-std::max(0.0, xs[i]));
    sup = std::max({sup, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return sup;
}

/// sup_s |F_a(s) - F_b(s)| for two empirical CDFs.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw SampleSizeError("KS distance of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double s = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= s) ++i;
    while (j < b.size() && b[j] <= s) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

/// x / <x>, with the mean taken by compensated summation.
inline std::vector<double> normalize_by_mean(const std::vector<double>& xs, double* mean_out = nullptr) {
  const double mean = compensated_total(xs) / static_cast<double>(xs.size());
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] / mean;
  if (mean_out) *mean_out = mean;
  return out;
}

struct SpacingReport {
  double x = 0.0;
  std::size_t N = 0;
  double mean_delta = 0.0;       // <delta_j>_x as a finite sum
  double mean_delta_weyl = 0.0;  // x / N(x)
  double mean_d = 0.0;
  double ratio = 0.0;
  double mean_delta_phi = 0.0;
  std::vector<double> norm_spacings;       // delta_j / <delta_j>_x
  std::vector<double> perturbed_spacings;  // delta_j^phi / <delta_j^phi>_x
  Histogram norm_histogram;
  Histogram perturbed_histogram;
  double ks_poisson = 0.0;
  double ks_poisson_perturbed = 0.0;
  double ks_between = 0.0;
  std::vector<double> A_lambda;  // jump points of A
  std::vector<double> A_of_x;    // A just after each jump
};

inline constexpr std::size_t kMinSpacingSample = 1000;

/// Perturbed spacings are delta_j^phi = lambda_{j+1} - lambda_j for j + 1 < N(x).
inline SpacingReport spacing_report(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x, int bins) {
  const auto g = gap_sequence(spec, pert, x);
  if (g.size() < kMinSpacingSample)
    throw SampleSizeError("spacing statistics need at least " + std::to_string(kMinSpacingSample) +
                          " levels up to x, got " + std::to_string(g.size()));
  SpacingReport r;
  r.x = x;
  r.N = g.size();
  r.norm_spacings = normalize_by_mean(g.delta, &r.mean_delta);
  r.mean_delta_weyl = x / static_cast<double>(r.N);
  r.mean_d = g.A.back() / static_cast<double>(r.N);
  r.ratio = g.A.back() / (spec.norm(r.N) - spec.norm(0));
  std::vector<double> dphi(r.N - 1);
  for (std::size_t j = 0; j + 1 < r.N; ++j) dphi[j] = g.lambda[j + 1] - g.lambda[j];
  r.perturbed_spacings = normalize_by_mean(dphi, &r.mean_delta_phi);
  r.norm_histogram = density_histogram(r.norm_spacings, bins);
  r.perturbed_histogram = density_histogram(r.perturbed_spacings, bins);
  r.ks_poisson = ks_exponential(r.norm_spacings);
  r.ks_poisson_perturbed = ks_exponential(r.perturbed_spacings);
  r.ks_between = ks_two_sample(r.norm_spacings, r.perturbed_spacings);
  r.A_lambda = g.lambda;
  r.A_of_x = g.A;
  return r;
}

struct HeatTracePoint {
  double beta = 0.0;
  double A_tilde = 0.0;          // sum d_j e^{-beta lambda_j}
  double difference_form = 0.0;  // (1/beta) sum e^{-beta lambda_j} - e^{-beta n_j}
  double discrepancy = 0.0;
  double scaled_2d = 0.0;  // beta A_tilde log(1/beta)
  double scaled_3d = 0.0;  // beta A_tilde
};

inline constexpr double kHeatExponentCut = 40.0;

inline HeatTracePoint heat_sums(const NormSpectrum& spec, const PerturbedSpectrum& pert, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  detail::check_alignment(spec, pert);
  const double need = kHeatExponentCut / beta;
  if (pert.x_max < need)
    throw RangeError("heat sums at beta=" + std::to_string(beta) + " need x_max >= " + std::to_string(need));
  CompensatedSum a, diff;
  for (std::size_t j = 0; j < pert.size(); ++j) {
    const double w = std::exp(-beta * pert.lambdas[j]);
    a.add(pert.d[j] * w);
    // e^{-beta lambda} - e^{-beta n} = e^{-beta lambda} (1 - e^{-beta d}).
    diff.add(w * -std::expm1(-beta * pert.d[j]) / beta);
  }
  HeatTracePoint p;
  p.beta = beta;
  p.A_tilde = a.value();
  p.difference_form = diff.value();
  p.discrepancy = p.A_tilde - p.difference_form;
  p.scaled_2d = beta * p.A_tilde * std::log(1.0 / beta);
  p.scaled_3d = beta * p.A_tilde;
  return p;
}

struct GreedyResult {
  std::int64_t m = 0, n = 0, k = 0;
  double s1 = 0.0, s2 = 0.0, final = 0.0;
};

namespace detail {

/// m = floor(sqrt(t/a)) with the remainder t - a m^2, corrected so that
/// 0 <= t - a m^2 < a (2m + 1) holds for the stored doubles.
inline std::pair<std::int64_t, double> greedy_step(double a, double t) {
  auto m = static_cast<std::int64_t>(std::floor(std::sqrt(t / a)));
  auto rem = [&](std::int64_t q) {
    const double qq = static_cast<double>(q) * static_cast<double>(q);
    return std::fma(-a, qq, t);
  };
  while (m > 0 && rem(m) < 0.0) --m;
  while (rem(m + 1) >= 0.0) ++m;
  return {m, rem(m)};
}

}  // namespace detail

inline GreedyResult greedy_approx_3d(const DiagonalForm& form, double t) {
  if (form.dim() != 3) throw DomainError("greedy approximation needs a 3D form");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("greedy target must be finite and non-negative");
  GreedyResult g;
  std::tie(g.m, g.s1) = detail::greedy_step(form.coeff(0), t);
  std::tie(g.n, g.s2) = detail::greedy_step(form.coeff(1), g.s1);
  std::tie(g.k, g.final) = detail::greedy_step(form.coeff(2), g.s2);
  return g;
}

/// s1 <= 2 sqrt(a t), s2 <= 2 sqrt(b s1), final <= 2 sqrt(c s2).
inline bool greedy_bounds_hold(const DiagonalForm& form, double t, const GreedyResult& g) {
  return g.s1 <= 2.0 * std::sqrt(form.coeff(0) * t) && g.s2 <= 2.0 * std::sqrt(form.coeff(1) * g.s1) &&
         g.final <= 2.0 * std::sqrt(form.coeff(2) * g.s2);
}

}  // namespace seba
