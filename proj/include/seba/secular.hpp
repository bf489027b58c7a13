// Secular function of a point scatterer on a flat torus and its roots.
//
//   F(lambda) = sum_j r_j [1/(n_j - lambda) - n_j/(n_j^2 + 1)] + tail(lambda)
//
// The n_0 = 0 term contributes -1/lambda. Perturbed eigenvalues solve
// F(lambda) = c0 tan(phi/2): one negative ground state and one root strictly
// inside every gap (n_j, n_{j+1}).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seba/error.hpp"
#include "seba/lattice.hpp"
#include "seba/parallel.hpp"
#include "seba/summation.hpp"

namespace seba {

/// Self-adjoint extension phase phi in (-pi, pi). phi = pi is the
/// unperturbed Laplacian and has no secular equation.
class ScattererPhase {
 public:
  explicit ScattererPhase(double phi) : phi_(phi) {
    if (!std::isfinite(phi)) throw DomainError("phase must be finite");
    if (std::abs(phi) >= std::numbers::pi)
      throw DomainError(
          "phase must lie in (-pi, pi); phi = pi is the unperturbed Laplacian (no scatterer)");
    tan_half_ = std::tan(0.5 * phi);
  }
  double phi() const noexcept { return phi_; }
  double tan_half() const noexcept { return tan_half_; }
  /// Right-hand side c0 tan(phi/2) of the secular equation.
  double rhs(double c0) const noexcept { return c0 * tan_half_; }

 private:
  double phi_;
  double tan_half_;
};

enum class TailModel { None, Analytic };

inline const char* to_string(TailModel t) { return t == TailModel::None ? "none" : "analytic"; }

inline TailModel parse_tail_model(const std::string& s) {
  if (s == "none") return TailModel::None;
  if (s == "analytic") return TailModel::Analytic;
  throw DomainError("tail model must be 'analytic' or 'none', got '" + s + "'");
}

namespace detail {

// int_a^inf dt / (1 + t^4)
inline double quartic_tail_0(double a) {
  if (a >= 2.0) {
    double s = 0.0, p = 1.0 / (a * a * a);
    const double r = 1.0 / (a * a * a * a);
    for (int k = 0; k < 60 && std::abs(p) > 1e-18 * std::abs(s); ++k, p *= -r) s += p / (4 * k + 3);
    return s;
  }
  const double s2 = std::numbers::sqrt2;
  auto prim = [s2](double t) {
    return (std::log((t * t + s2 * t + 1) / (t * t - s2 * t + 1)) + 2 * std::atan(s2 * t + 1) +
            2 * std::atan(s2 * t - 1)) /
           (4 * s2);
  };
  return std::numbers::pi / (2 * s2) - prim(a);
}

// int_a^inf t^2 dt / (1 + t^4)
inline double quartic_tail_2(double a) {
  if (a >= 2.0) {
    double s = 0.0, p = 1.0 / a;
    const double r = 1.0 / (a * a * a * a);
    for (int k = 0; k < 60 && std::abs(p) > 1e-18 * std::abs(s); ++k, p *= -r) s += p / (4 * k + 1);
    return s;
  }
  const double s2 = std::numbers::sqrt2;
  auto prim = [s2](double t) {
    return (std::log((t * t - s2 * t + 1) / (t * t + s2 * t + 1)) + 2 * std::atan(s2 * t + 1) +
            2 * std::atan(s2 * t - 1)) /
           (4 * s2);
  };
  return std::numbers::pi / (2 * s2) - prim(a);
}

}  // namespace detail

/// Density-integral model for the lattice terms beyond the cutoff L,
///   sum_{n > L} r(n) g(n) ~ int_L^inf g dW - g(L) E(L),
/// where W is the Weyl count and E(L) = N(L) - W(L) the stored excess. The
/// boundary term removes the first-order dependence on where the cutoff
/// falls relative to the lattice.
class TailCorrection {
 public:
  TailCorrection() = default;
  TailCorrection(const NormSpectrum& spec, TailModel model) : model_(model) {
    if (model_ == TailModel::None) return;
    if (spec.form().dim() != 2 && spec.form().dim() != 3)
      throw DomainError("analytic tail needs a 2D or 3D form");
    dim_ = spec.form().dim();
    cutoff_ = spec.cutoff();
    root_ = std::sqrt(cutoff_);
    weight_ = (dim_ == 2 ? std::numbers::pi : 4.0 * std::numbers::pi) / spec.form().dual_covolume();
    excess_ = static_cast<double>(spec.vector_total()) - weyl_count(spec.form(), cutoff_);
    i4_ = dim_ == 3 ? detail::quartic_tail_0(root_) : 0.0;
  }

  TailModel model() const noexcept { return model_; }
  double excess() const noexcept { return excess_; }

  double value(double lambda) const {
    if (model_ == TailModel::None) return 0.0;
    const double L = cutoff_;
    const double boundary = (1.0 / (L - lambda) - L / (L * L + 1.0)) * excess_;
    if (dim_ == 2)
      return -weight_ * (std::log1p(-lambda / L) - 0.5 * std::log1p(1.0 / (L * L))) - boundary;
    return weight_ * (g3(lambda) + i4_) - boundary;
  }

  double derivative(double lambda) const {
    if (model_ == TailModel::None) return 0.0;
    const double gap = cutoff_ - lambda;
    const double boundary = excess_ / (gap * gap);
    if (dim_ == 2) return weight_ / gap - boundary;
    return weight_ * g3_prime(lambda) - boundary;
  }

  /// Tail of sum_{n > L} r(n)/(n^2 + 1).
  double c0_tail() const {
    if (model_ == TailModel::None) return 0.0;
    const double L = cutoff_;
    const double boundary = excess_ / (L * L + 1.0);
    if (dim_ == 2) return weight_ * std::atan(1.0 / L) - boundary;
    return weight_ * detail::quartic_tail_2(root_) - boundary;
  }

  /// Size of the boundary correction, used as the tail error scale.
  double c0_tail_bound() const {
    if (model_ == TailModel::None) return 0.0;
    return std::abs(excess_) / (cutoff_ * cutoff_ + 1.0);
  }

 private:
  // lambda * int_a^inf dt / (t^2 - lambda), a = sqrt(L).
  double g3(double lambda) const {
    if (lambda > 0.0) {
      const double mu = std::sqrt(lambda);
      return mu * std::atanh(mu / root_);
    }
    if (lambda < 0.0) {
      const double kappa = std::sqrt(-lambda);
      return -kappa * std::atan(kappa / root_);
    }
    return 0.0;
  }

  double g3_prime(double lambda) const {
    const double a = root_;
    const double y2 = std::abs(lambda) / (a * a);
    double lead;
    if (y2 < 1e-6) {
      const double sgn = lambda >= 0.0 ? 1.0 : -1.0;
      lead = (1.0 + sgn * y2 / 3.0 + y2 * y2 / 5.0) / (2.0 * a);
    } else if (lambda > 0.0) {
      const double mu = std::sqrt(lambda);
      lead = std::atanh(mu / a) / (2.0 * mu);
    } else {
      const double kappa = std::sqrt(-lambda);
      lead = std::atan(kappa / a) / (2.0 * kappa);
    }
    return lead + a / (2.0 * (a * a - lambda));
  }

  TailModel model_ = TailModel::None;
  int dim_ = 0;
  double cutoff_ = 0.0;
  double root_ = 0.0;
  double weight_ = 0.0;
  double excess_ = 0.0;
  double i4_ = 0.0;
};

struct C0Value {
  double value = 1.0;       // 1 + sum_{j>=1} r_j/(n_j^2 + 1) + tail
  double tail = 0.0;        // analytic estimate beyond the cutoff
  double tail_error = 0.0;  // scale of the tail uncertainty
};

inline C0Value c0(const NormSpectrum& spec, TailModel tail = TailModel::Analytic) {
  CompensatedSum s(1.0);
  for (std::size_t j = 1; j < spec.size(); ++j) {
    const double n = spec.norm(j);
    s.add(static_cast<double>(spec.mult(j)) / (n * n + 1.0));
  }
  C0Value out;
  const TailCorrection t(spec, tail);
  out.tail = t.c0_tail();
  out.tail_error = t.c0_tail_bound();
  s.add(out.tail);
  out.value = s.value();
  return out;
}

/// Value and derivative of F.
struct SecularValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Pole sums split by side of the evaluation point, with the derivative of
/// each side and the sum of absolute term sizes.
struct SplitSum {
  double left = 0.0, left_d = 0.0;    // poles below lambda
  double right = 0.0, right_d = 0.0;  // poles above lambda
  double scale = 0.0;
};

/// Direct O(M) evaluation of F(lambda), the reference for the fast evaluator.
inline SecularValue naive_secular(const NormSpectrum& spec, TailModel tail, double lambda) {
  CompensatedSum v, d, k;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double n = spec.norm(j);
    const double r = static_cast<double>(spec.mult(j));
    const double t = 1.0 / (n - lambda);
    v.add(r * t);
    d.add(r * t * t);
    if (j > 0) k.add(r * n / (n * n + 1.0));
  }
  const TailCorrection tc(spec, tail);
  v.add(-k.value());
  v.add(tc.value(lambda));
  d.add(tc.derivative(lambda));
  return {v.value(), d.value()};
}

struct SecularOptions {
  TailModel tail = TailModel::Analytic;
  double eps_eval = 1e-10;
  std::size_t validation_probes = 100;  // random oracle probes at build time; 0 disables
  std::uint64_t validation_seed = 0x5eba;
};

/// Fast evaluator of F over an immutable spectrum.
///
/// Norms are grouped in a binary tree over index ranges. A node whose poles
/// lie in [c - R, c + R] is summed through its moments
/// m_k = sum r ((n - c)/R)^k whenever |lambda - c| >= 3R; leaves near lambda are
/// summed directly. Evaluation is done relative to an anchor norm n_a,
/// lambda = n_a + x, so that roots very close to a pole keep full relative
/// precision in their distance to it.
class SecularEvaluator {
 public:
  static constexpr int kMoments = 40;
  static constexpr std::size_t kLeaf = 32;
  static constexpr double kSeparation = 3.0;
  static constexpr double kRangeGuard = 0.5;  // lambda <= guard * cutoff

  SecularEvaluator(NormSpectrum spec, const SecularOptions& opt = {})
      : spec_(std::move(spec)), tail_(spec_, opt.tail), model_(opt.tail), eps_eval_(opt.eps_eval) {
    if (!(opt.eps_eval >= 1e-12)) throw DomainError("eps_eval must be at least 1e-12");
    CompensatedSum k;
    for (std::size_t j = 1; j < spec_.size(); ++j) {
      const double n = spec_.norm(j);
      k.add(static_cast<double>(spec_.mult(j)) * n / (n * n + 1.0));
    }
    K_ = k.value();
    c0_ = seba::c0(spec_, opt.tail);
    build_tree();
    if (opt.validation_probes > 0) {
      const double err = self_check(opt.validation_probes, opt.validation_seed);
      if (err > eps_eval_) {
        std::ostringstream os;
        os << "fast secular evaluation disagrees with direct summation: relative error " << err;
        throw ConsistencyError(os.str());
      }
    }
  }

  const NormSpectrum& spectrum() const noexcept { return spec_; }
  TailModel tail_model() const noexcept { return model_; }
  const TailCorrection& tail() const noexcept { return tail_; }
  double K() const noexcept { return K_; }
  const C0Value& c0() const noexcept { return c0_; }
  double eps_eval() const noexcept { return eps_eval_; }
  double max_lambda() const noexcept { return kRangeGuard * spec_.cutoff(); }

  /// F(lambda) and F'(lambda).
  SecularValue eval(double lambda) const {
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    if (lambda > max_lambda()) throw RangeError("lambda beyond the valid range of the tail model");
    const std::size_t a = nearest_norm(lambda);
    const double na = spec_.norm(a);
    if (std::abs(lambda - na) <= 1e-14 * std::max(1.0, na))
      throw PoleProximityError("secular function evaluated at a pole", a);
    const auto s = eval_local(a, lambda - na);
    return {s.left + s.right - K_ + tail_.value(lambda), s.left_d + s.right_d + tail_.derivative(lambda)};
  }

  /// Pole sums at lambda = n_anchor + x (x != 0 relative to every pole).
  SplitSum eval_local(std::size_t anchor, double x) const {
    SplitSum out;
    const double a = spec_.norm(anchor);
    const auto& norms = spec_.norms();
    const auto& mults = spec_.mults();
    std::size_t stack[128];
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& nd = nodes_[stack[--top]];
      const double u = (nd.center - a) - x;
      if (nd.child < 0) {
        for (std::size_t i = nd.lo; i < nd.hi; ++i) {
          const double delta = (norms[i] - a) - x;
          const double r = static_cast<double>(mults[i]);
          const double t = r / delta;
          const double dt = t / delta;
          if (delta > 0) {
            out.right += t;
            out.right_d += dt;
          } else {
            out.left += t;
            out.left_d += dt;
          }
          out.scale += std::abs(t);
        }
        continue;
      }
      if (std::abs(u) >= kSeparation * nd.radius) {
        // sum r/(n - lambda) = (1/u) sum_k m_k (-R/u)^k
        const double q = -nd.radius / u;
        const double* m = &moments_[nd.moment_offset];
        double pk = 1.0, sv = 0.0, sd = 0.0;
        for (int k = 0; k < kMoments; ++k) {
          sv += m[k] * pk;
          sd += (k + 1) * m[k] * pk;
          pk *= q;
          if (std::abs(pk) < 1e-17) break;
        }
        const double v = sv / u;
        const double dv = sd / (u * u);
        if (u > 0) {
          out.right += v;
          out.right_d += dv;
        } else {
          out.left += v;
          out.left_d += dv;
        }
        out.scale += std::abs(v);
        continue;
      }
      stack[top++] = static_cast<std::size_t>(nd.child) + 1;
      stack[top++] = static_cast<std::size_t>(nd.child);
    }
    return out;
  }

  /// Largest relative deviation from direct summation over random probes in
  /// [-1, max_lambda], relative to the summed absolute term size.
  double self_check(std::size_t probes, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    const double hi = max_lambda();
    std::uniform_real_distribution<double> dist(-1.0, hi);
    double worst = 0.0;
    for (std::size_t p = 0; p < probes; ++p) {
      const double lambda = dist(rng);
      const std::size_t a = nearest_norm(lambda);
      const double na = spec_.norm(a);
      if (std::abs(lambda - na) <= 1e-8 * std::max(1.0, na)) continue;
      const auto fast = eval(lambda);
      const auto ref = naive_secular(spec_, model_, lambda);
      const auto s = eval_local(a, lambda - na);
      const double scale = s.scale + std::abs(K_) + std::abs(tail_.value(lambda));
      worst = std::max(worst, std::abs(fast.value - ref.value) / scale);
      worst = std::max(worst, std::abs(fast.derivative - ref.derivative) / std::abs(ref.derivative));
    }
    return worst;
  }

  std::size_t nearest_norm(double lambda) const {
    const auto& n = spec_.norms();
    const auto it = std::lower_bound(n.begin(), n.end(), lambda);
    if (it == n.begin()) return 0;
    if (it == n.end()) return n.size() - 1;
    const auto hi = static_cast<std::size_t>(it - n.begin());
    return (n[hi] - lambda) < (lambda - n[hi - 1]) ? hi : hi - 1;
  }

 private:
  struct Node {
    std::size_t lo, hi;
    std::ptrdiff_t child;  // index of the left child; right child follows it; -1 for leaves
    double center, radius;
    std::size_t moment_offset;
  };

  void build_tree() {
    nodes_.push_back({});
    fill(0, 0, spec_.size());
  }

  // Children of a node occupy adjacent slots, so one index addresses both.
  void fill(std::size_t id, std::size_t lo, std::size_t hi) {
    const double a = spec_.norm(lo), b = spec_.norm(hi - 1);
    const double c = 0.5 * (a + b);
    const double radius = 0.5 * (b - a);
    const std::size_t offset = moments_.size();
    moments_.resize(offset + kMoments, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const double r = static_cast<double>(spec_.mult(i));
      double* m = &moments_[offset];
      if (radius == 0.0) {
        m[0] += r;
        continue;
      }
      const double t = (spec_.norm(i) - c) / radius;
      double p = r;
      for (int k = 0; k < kMoments; ++k, p *= t) m[k] += p;
    }
    nodes_[id] = {lo, hi, -1, c, radius, offset};
    if (hi - lo <= kLeaf) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t left = nodes_.size();
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[id].child = static_cast<std::ptrdiff_t>(left);
    fill(left, lo, mid);
    fill(left + 1, mid, hi);
  }

  NormSpectrum spec_;
  TailCorrection tail_;
  TailModel model_;
  double eps_eval_;
  double K_ = 0.0;
  C0Value c0_;
  std::vector<Node> nodes_;
  std::vector<double> moments_;
};

/// A root of F(lambda) = rhs with its upper-gap distance d and normalized
/// residual |F - rhs| / (sum of absolute term sizes).
struct SecularRoot {
  double lambda = 0.0;
  double d = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Pole guard eps_b = max(1e-13, 1e-13 n).
inline double pole_guard(double n) { return std::max(1e-13, 1e-13 * n); }

namespace detail {

struct LocalEval {
  double g = 0.0;      // F - rhs
  double scale = 0.0;  // |terms| + |K| + |tail| + |rhs|
  SplitSum split;
  double tail_v = 0.0, tail_d = 0.0;
};

inline LocalEval eval_shifted(const SecularEvaluator& F, std::size_t anchor, double x, double rhs) {
  LocalEval e;
  const double lambda = F.spectrum().norm(anchor) + x;
  e.split = F.eval_local(anchor, x);
  e.tail_v = F.tail().value(lambda);
  e.tail_d = F.tail().derivative(lambda);
  e.g = e.split.left + e.split.right - F.K() + e.tail_v - rhs;
  e.scale = e.split.scale + std::abs(F.K()) + std::abs(e.tail_v) + std::abs(rhs);
  return e;
}

// Root in (p1, p2) of C + sL/(p1 - x) + sU/(p2 - x), NaN if none is found.
inline double two_pole_root(double C, double sL, double sU, double p1, double p2) {
  const double b = -(C * (p1 + p2) + sL + sU);
  const double c = C * p1 * p2 + sL * p2 + sU * p1;
  const double disc = std::max(0.0, b * b - 4.0 * C * c);
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double cand[2] = {C != 0.0 ? q / C : std::numeric_limits<double>::quiet_NaN(),
                          q != 0.0 ? c / q : std::numeric_limits<double>::quiet_NaN()};
  for (double x : cand)
    if (x > p1 && x < p2) return x;
  return std::numeric_limits<double>::quiet_NaN();
}

inline bool converged(const LocalEval& e, double step, double x, double lo, double hi) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (e.g == 0.0 || std::abs(e.g) <= 2.0 * eps * e.scale) return true;
  if (std::abs(step) <= 2.0 * eps * std::abs(x)) return true;
  return hi - lo <= 4.0 * eps * std::max(std::abs(lo), std::abs(hi));
}

}  // namespace detail

/// Root of F(lambda) = rhs in gap j, i.e. in (n_j, n_{j+1}).
///
/// The gap is halved once to choose the nearer pole as the coordinate anchor.
/// Iterates then fit each side of the pole sum by one pole at the gap end
/// matching value and slope, and solve the resulting quadratic model. Steps
/// leaving the current bracket are replaced by bisection.
inline SecularRoot solve_gap_root(const SecularEvaluator& F, double rhs, std::size_t j, double tol) {
  const auto& spec = F.spectrum();
  if (!(tol >= 1e-13)) throw DomainError("solve tolerance must be at least 1e-13");
  if (j + 1 >= spec.size()) throw RangeError("gap index beyond the stored norms");
  const double n1 = spec.norm(j), n2 = spec.norm(j + 1);
  if (n2 > F.max_lambda()) throw RangeError("gap beyond the valid range of the tail model");
  const double w = n2 - n1;
  const double eb = pole_guard(n2);
  if (w < 4.0 * eb) throw DegenerateGapError("gap narrower than four pole guards", j);

  const auto mid = detail::eval_shifted(F, j, 0.5 * w, rhs);
  const bool lower = mid.g > 0.0;
  const std::size_t anchor = lower ? j : j + 1;
  const double P1 = lower ? 0.0 : -w;
  const double P2 = lower ? w : 0.0;
  double lo = lower ? eb : -0.5 * w;
  double hi = lower ? 0.5 * w : -eb;
  const double guard_x = lower ? lo : hi;
  const auto guard = detail::eval_shifted(F, anchor, guard_x, rhs);
  if (lower ? guard.g >= 0.0 : guard.g <= 0.0) {
    std::ostringstream os;
    os.precision(17);
    os << "root of gap (" << n1 << ", " << n2 << ") lies within the pole guard " << eb;
    throw BracketError(os.str() + " (gap index " + std::to_string(j) + ")");
  }

  double x = lower ? 0.5 * w : -0.5 * w;
  detail::LocalEval e = mid;
  SecularRoot out;
  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    const double sL = e.split.left_d * (P1 - x) * (P1 - x);
    const double uR = e.split.right_d + e.tail_d;
    const double sU = uR * (P2 - x) * (P2 - x);
    const double C = (e.split.left - sL / (P1 - x)) + (e.split.right + e.tail_v - sU / (P2 - x)) -
                     F.K() - rhs;
    double next = detail::two_pole_root(C, sL, sU, P1, P2);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    const double step = next - x;
    x = next;
    e = detail::eval_shifted(F, anchor, x, rhs);
    if (e.g < 0.0) lo = x;
    if (e.g > 0.0) hi = x;
    if (detail::converged(e, step, x, lo, hi)) break;
  }
  out.lambda = spec.norm(anchor) + x;
  out.d = lower ? w - x : -x;
  out.residual = std::abs(e.g) / e.scale;
  if (out.residual > tol * std::max(1.0, std::abs(rhs))) {
    std::ostringstream os;
    os << "gap solve did not reach tolerance: residual " << out.residual;
    throw DegenerateGapError(os.str(), j);
  }
  return out;
}

inline double solve_in_gap(const SecularEvaluator& F, double rhs, std::size_t j, double tol) {
  return solve_gap_root(F, rhs, j, tol).lambda;
}

/// Negative root of F(lambda) = rhs. The bracket is grown geometrically from
/// -1 in both directions; iterates use a one-pole model at n_0 = 0 with
/// geometric bisection as the safeguard.
inline SecularRoot solve_ground_root(const SecularEvaluator& F, double rhs, double tol,
                                     double b_max = 1e12) {
  if (!(tol >= 1e-13)) throw DomainError("solve tolerance must be at least 1e-13");
  const double eb = pole_guard(0.0);
  auto at = [&](double x) { return detail::eval_shifted(F, 0, x, rhs); };
  double lo, hi;
  auto e = at(-1.0);
  if (e.g > 0.0) {
    hi = -1.0;
    double b = 2.0;
    while (true) {
      e = at(-b);
      if (e.g < 0.0) break;
      if (b >= b_max) {
        std::ostringstream os;
        os.precision(17);
        os << "no ground-state bracket: F(-" << b_max << ") - rhs = " << e.g;
        throw BracketError(os.str());
      }
      hi = -b;
      b = std::min(2.0 * b, b_max);
    }
    lo = -b;
  } else {
    lo = -1.0;
    double b = 0.5;
    while (true) {
      if (b < eb) throw BracketError("ground state lies within the pole guard of 0");
      e = at(-b);
      if (e.g > 0.0) break;
      lo = -b;
      b *= 0.5;
    }
    hi = -b;
  }
  double x = e.g < 0.0 ? lo : hi;
  SecularRoot out;
  if (e.g != 0.0) {
    for (int it = 0; it < 400; ++it) {
      out.iterations = it + 1;
      const double uR = e.split.right_d + e.tail_d;
      const double sU = uR * x * x;
      const double C = e.split.right + e.tail_v + sU / x - F.K() - rhs;
      double next = C < 0.0 ? sU / C : std::numeric_limits<double>::quiet_NaN();
      if (!(next > lo && next < hi))
        next = lo / hi > 4.0 ? -std::sqrt(lo * hi) : 0.5 * (lo + hi);
      if (next == x) break;
      const double step = next - x;
      x = next;
      e = at(x);
      if (e.g < 0.0) lo = x;
      if (e.g > 0.0) hi = x;
      if (detail::converged(e, step, x, lo, hi)) break;
    }
  }
  out.lambda = x;
  out.d = -x;
  out.residual = std::abs(e.g) / e.scale;
  if (out.residual > tol * std::max(1.0, std::abs(rhs))) {
    std::ostringstream os;
    os << "ground-state solve did not reach tolerance: residual " << out.residual;
    throw BracketError(os.str());
  }
  return out;
}

inline double solve_ground_state(const SecularEvaluator& F, double rhs, double tol) {
  return solve_ground_root(F, rhs, tol).lambda;
}

/// Perturbed eigenvalues lambda_0 < 0 < lambda_1 < ... with lambda_j in
/// (n_{j-1}, n_j) for j >= 1, and d_j = n_j - lambda_j (d_0 = -lambda_0).
struct PerturbedSpectrum {
  double phi = 0.0;
  double rhs = 0.0;
  double tol = 0.0;
  double x_max = 0.0;
  std::vector<double> lambdas;
  std::vector<double> residuals;
  std::vector<double> d;

  std::size_t size() const noexcept { return lambdas.size(); }
};

struct SolveOptions {
  double tol = 1e-12;
  unsigned workers = 1;
};

/// Ground state and one root per gap with n_{j+1} <= x_max.
inline PerturbedSpectrum solve_spectrum(const SecularEvaluator& F, const ScattererPhase& phase,
                                        double x_max, const SolveOptions& opt = {}) {
  const auto& spec = F.spectrum();
  if (x_max > 0.5 * spec.cutoff()) throw RangeError("x_max must not exceed half the enumeration cutoff");
  if (!(x_max >= 0.0)) throw DomainError("x_max must be non-negative");
  const double rhs = phase.rhs(F.c0().value);
  const std::size_t levels = spec.count_upto(x_max);  // lambda_0 .. lambda_{levels-1}
  PerturbedSpectrum out;
  out.phi = phase.phi();
  out.rhs = rhs;
  out.tol = opt.tol;
  out.x_max = x_max;
  out.lambdas.assign(levels, 0.0);
  out.residuals.assign(levels, 0.0);
  out.d.assign(levels, 0.0);
  parallel_for(levels, opt.workers, [&](std::size_t i) {
    const SecularRoot r = i == 0 ? solve_ground_root(F, rhs, opt.tol) : solve_gap_root(F, rhs, i - 1, opt.tol);
    out.lambdas[i] = r.lambda;
    out.residuals[i] = r.residual;
    out.d[i] = r.d;
  });
  for (std::size_t i = 0; i < levels; ++i) {
    const double below = i == 0 ? -std::numeric_limits<double>::infinity() : spec.norm(i - 1);
    if (!(out.lambdas[i] > below && out.lambdas[i] < spec.norm(i) && out.d[i] > 0.0))
      throw ConsistencyError("interlacing violated at level " + std::to_string(i));
  }
  return out;
}

inline PerturbedSpectrum solve_spectrum(const NormSpectrum& spec, const ScattererPhase& phase,
                                        double x_max, const SolveOptions& opt = {},
                                        const SecularOptions& sopt = {}) {
  return solve_spectrum(SecularEvaluator(spec, sopt), phase, x_max, opt);
}

}  // namespace seba
