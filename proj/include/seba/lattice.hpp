// Unperturbed torus spectra: norms of a diagonal quadratic form with
// multiplicities.
//
// A flat torus R^d / 2*pi*L0 with rectangular L0 has Laplace eigenvalues
// q(v) = sum_i c_i v_i^2 over integer vectors v, where the c_i are the
// squared lengths of the dual basis. The distinct values ("norms") are stored
// sorted, each with its multiplicity r(n).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seba/error.hpp"

namespace seba {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Positive diagonal quadratic form q(v) = sum_i c_i v_i^2 in dimension 2 or 3.
class DiagonalForm {
 public:
  DiagonalForm() = default;

  explicit DiagonalForm(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { validate(); }

  /// Every coefficient exact; enumeration then merges norms exactly.
  explicit DiagonalForm(const std::vector<Rational>& exact) {
    for (const auto& q : exact) {
      if (q.den <= 0) throw DomainError("rational coefficient needs a positive denominator");
      coeffs_.push_back(q.value());
    }
    exact_ = exact;
    validate();
  }

  int dim() const noexcept { return static_cast<int>(coeffs_.size()); }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  bool is_exact() const noexcept { return exact_.has_value(); }
  const std::optional<std::vector<Rational>>& exact_coeffs() const noexcept { return exact_; }

  /// Covolume of the spectral lattice, sqrt(prod c_i).
  double dual_covolume() const noexcept {
    double p = 1.0;
    for (double c : coeffs_) p *= c;
    return std::sqrt(p);
  }

  /// Volume of the torus itself, (2*pi)^d / dual_covolume.
  double torus_volume() const noexcept {
    return std::pow(2.0 * std::numbers::pi, dim()) / dual_covolume();
  }

  template <class Vec>
  double value(const Vec& v) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double x = static_cast<double>(v[static_cast<std::size_t>(i)]);
      s += coeffs_[static_cast<std::size_t>(i)] * x * x;
    }
    return s;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < dim(); ++i) {
      if (i) os << ',';
      if (exact_) {
        const auto& q = (*exact_)[static_cast<std::size_t>(i)];
        os << q.num;
        if (q.den != 1) os << '/' << q.den;
      } else {
        os << coeffs_[static_cast<std::size_t>(i)];
      }
    }
    return os.str();
  }

  /// Parses "c1,c2[,c3]". Integers and p/q literals are exact; when every
  /// entry is exact the form is tagged exact.
  static DiagonalForm parse(const std::string& text) {
    std::vector<double> values;
    std::vector<Rational> exact;
    bool all_exact = true;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok.erase(0, tok.find_first_not_of(" \t"));
      tok.erase(tok.find_last_not_of(" \t") + 1);
      if (tok.empty()) throw DomainError("empty coefficient in '" + text + "'");
      auto rat = parse_rational(tok);
      if (rat) {
        exact.push_back(*rat);
        values.push_back(rat->value());
      } else {
        all_exact = false;
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          throw DomainError("cannot parse coefficient '" + tok + "'");
        }
        if (used != tok.size()) throw DomainError("cannot parse coefficient '" + tok + "'");
        values.push_back(v);
      }
    }
    if (all_exact && !exact.empty()) return DiagonalForm(exact);
    return DiagonalForm(values);
  }

  friend bool operator==(const DiagonalForm& a, const DiagonalForm& b) {
    return a.coeffs_ == b.coeffs_;
  }

 private:
  static std::optional<Rational> parse_rational(const std::string& tok) {
    auto is_int = [](const std::string& s) {
      if (s.empty()) return false;
      std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
      if (i == s.size()) return false;
      return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                         [](char c) { return c >= '0' && c <= '9'; });
    };
    const auto slash = tok.find('/');
    const std::string a = tok.substr(0, slash);
    const std::string b = slash == std::string::npos ? "1" : tok.substr(slash + 1);
    if (!is_int(a) || !is_int(b) || a.size() > 15 || b.size() > 15) return std::nullopt;
    Rational q{std::stoll(a), std::stoll(b)};
    if (q.den == 0) throw DomainError("zero denominator in '" + tok + "'");
    if (q.den < 0) q = {-q.num, -q.den};
    const auto g = std::gcd(q.num, q.den);
    if (g > 1) q = {q.num / g, q.den / g};
    return q;
  }

  void validate() const {
    if (coeffs_.size() != 2 && coeffs_.size() != 3)
      throw DomainError("diagonal form must have 2 or 3 coefficients");
    for (double c : coeffs_)
      if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("form coefficients must be positive");
  }

  std::vector<double> coeffs_;
  std::optional<std::vector<Rational>> exact_;
};

/// Form whose values are the squared lengths of the period lattice 2*pi*L0:
/// coefficients 4*pi^2 / c_i. Its norms are the image distances entering the
/// method-of-images Green's function.
inline DiagonalForm image_form(const DiagonalForm& form) {
  std::vector<double> c;
  for (double ci : form.coeffs()) c.push_back(4.0 * std::numbers::pi * std::numbers::pi / ci);
  return DiagonalForm(c);
}

/// Leading Weyl term for the number of lattice vectors with q(v) <= x.
inline double weyl_count(const DiagonalForm& form, double x) {
  if (x <= 0.0) return 0.0;
  const double v = form.dual_covolume();
  if (form.dim() == 2) return std::numbers::pi * x / v;
  return 4.0 * std::numbers::pi / 3.0 * x * std::sqrt(x) / v;
}

/// Weyl density dW/dx of lattice vectors per unit norm.
inline double weyl_density(const DiagonalForm& form, double x) {
  const double v = form.dual_covolume();
  if (form.dim() == 2) return std::numbers::pi / v;
  return 2.0 * std::numbers::pi * std::sqrt(std::max(x, 0.0)) / v;
}

struct EnumerationOptions {
  double merge_tol = 1e-10;
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
};

/// Distinct norms n_0 = 0 < n_1 < ... <= cutoff with multiplicities r(n_j).
/// Immutable after construction.
class NormSpectrum {
 public:
  NormSpectrum() = default;
  NormSpectrum(DiagonalForm form, double cutoff, double merge_tol, std::vector<double> norms,
               std::vector<std::int64_t> mults, bool exact)
      : form_(std::move(form)),
        cutoff_(cutoff),
        merge_tol_(merge_tol),
        norms_(std::move(norms)),
        mults_(std::move(mults)),
        exact_(exact) {
    if (norms_.size() != mults_.size() || norms_.empty())
      throw ConsistencyError("norm and multiplicity arrays must be non-empty and equal length");
    prefix_.resize(mults_.size());
    std::int64_t run = 0;
    for (std::size_t j = 0; j < mults_.size(); ++j) prefix_[j] = (run += mults_[j]);
  }

  const DiagonalForm& form() const noexcept { return form_; }
  double cutoff() const noexcept { return cutoff_; }
  double merge_tol() const noexcept { return merge_tol_; }
  bool exact() const noexcept { return exact_; }
  std::size_t size() const noexcept { return norms_.size(); }
  const std::vector<double>& norms() const noexcept { return norms_; }
  const std::vector<std::int64_t>& mults() const noexcept { return mults_; }
  double norm(std::size_t j) const { return norms_.at(j); }
  std::int64_t mult(std::size_t j) const { return mults_.at(j); }

  /// Number of stored lattice vectors (the zero vector included).
  std::int64_t vector_total() const noexcept { return prefix_.empty() ? 0 : prefix_.back(); }

  /// Number of stored norms n_j <= x.
  std::size_t count_upto(double x) const noexcept {
    return static_cast<std::size_t>(std::upper_bound(norms_.begin(), norms_.end(), x) -
                                    norms_.begin());
  }

  /// Number of lattice vectors with q(v) <= x, from the stored multiplicities.
  std::int64_t vectors_upto(double x) const noexcept {
    const auto k = count_upto(x);
    return k == 0 ? 0 : prefix_[k - 1];
  }

 private:
  DiagonalForm form_;
  double cutoff_ = 0.0;
  double merge_tol_ = 0.0;
  std::vector<double> norms_;
  std::vector<std::int64_t> mults_;
  std::vector<std::int64_t> prefix_;
  bool exact_ = false;
};

namespace detail {

inline std::int64_t isqrt_floor(double x) {
  if (x <= 0.0) return 0;
  auto s = static_cast<std::int64_t>(std::sqrt(x));
  while (static_cast<double>(s + 1) * static_cast<double>(s + 1) <= x) ++s;
  while (s > 0 && static_cast<double>(s) * static_cast<double>(s) > x) --s;
  return s;
}

inline std::int64_t sign_weight(std::int64_t v) { return v == 0 ? 1 : 2; }

// Visits every v in the non-negative orthant with q(v) <= cutoff, in
// lexicographic order, passing the orthant-symmetry weight 2^{#nonzero}.
template <class Fn>
void for_each_orthant_vector(const DiagonalForm& form, double cutoff, Fn&& fn) {
  const auto& c = form.coeffs();
  std::int64_t v[3] = {0, 0, 0};
  const std::int64_t b0 = isqrt_floor(cutoff / c[0]);
  for (v[0] = 0; v[0] <= b0; ++v[0]) {
    const double q0 = c[0] * static_cast<double>(v[0]) * static_cast<double>(v[0]);
    const double rem0 = cutoff - q0;
    if (rem0 < 0.0) break;
    const std::int64_t b1 = isqrt_floor(rem0 / c[1]) + 1;
    for (v[1] = 0; v[1] <= b1; ++v[1]) {
      const double q1 = q0 + c[1] * static_cast<double>(v[1]) * static_cast<double>(v[1]);
      if (q1 > cutoff) break;
      const std::int64_t w01 = sign_weight(v[0]) * sign_weight(v[1]);
      if (form.dim() == 2) {
        fn(v, w01);
        continue;
      }
      const std::int64_t b2 = isqrt_floor((cutoff - q1) / c[2]) + 1;
      for (v[2] = 0; v[2] <= b2; ++v[2]) {
        const double q2 = q1 + c[2] * static_cast<double>(v[2]) * static_cast<double>(v[2]);
        if (q2 > cutoff) break;
        fn(v, w01 * sign_weight(v[2]));
      }
    }
  }
}

}  // namespace detail

/// Enumerates the norms of `form` up to `cutoff`.
///
/// Exact-rational forms are keyed by integer numerators over the common
/// denominator, so equal norms merge exactly. Floating forms merge two values
/// when |n - n'| <= merge_tol * max(1, n).
inline NormSpectrum enumerate_norms(const DiagonalForm& form, double cutoff,
                                    const EnumerationOptions& opt = {}) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw DomainError("cutoff must be positive");
  if (!(opt.merge_tol >= 0.0 && opt.merge_tol <= 1e-6))
    throw DomainError("merge_tol must lie in [0, 1e-6]");

  const double orthant = weyl_count(form, cutoff) / std::pow(2.0, form.dim());
  double surface = 0.0;
  for (double c : form.coeffs()) surface += std::sqrt(cutoff / c) + 1.0;
  const double entries = orthant + surface * (form.dim() == 3 ? std::sqrt(cutoff) + 1.0 : 1.0);
  const double bytes = 16.0 * (entries + 16.0);
  if (bytes > static_cast<double>(opt.memory_budget_bytes))
    throw CapacityError("norm enumeration exceeds memory budget", static_cast<std::size_t>(bytes));

  std::vector<double> norms;
  std::vector<std::int64_t> mults;

  // Exact path: integer coefficients a_i = c_i * Q over the common denominator Q.
  bool exact = false;
  if (form.is_exact()) {
    const auto& ex = *form.exact_coeffs();
    std::int64_t q = 1;
    bool ok = true;
    for (const auto& c : ex) {
      const auto l = std::lcm(q, c.den);
      if (l <= 0 || l > (std::int64_t{1} << 40)) ok = false;
      q = l;
    }
    std::vector<std::int64_t> a;
    for (const auto& c : ex) a.push_back(c.num * (q / c.den));
    if (ok && cutoff * static_cast<double>(q) < 0x1p52) {
      exact = true;
      const double limit = cutoff * static_cast<double>(q);
      std::vector<std::pair<std::int64_t, std::int64_t>> keyed;
      keyed.reserve(static_cast<std::size_t>(entries));
      detail::for_each_orthant_vector(form, cutoff * (1.0 + 1e-12), [&](const std::int64_t* v, std::int64_t w) {
        std::int64_t key = 0;
        for (int i = 0; i < form.dim(); ++i) key += a[static_cast<std::size_t>(i)] * v[i] * v[i];
        if (static_cast<double>(key) <= limit) keyed.emplace_back(key, w);
      });
      std::sort(keyed.begin(), keyed.end());
      for (const auto& [key, w] : keyed) {
        const double n = static_cast<double>(key) / static_cast<double>(q);
        if (!norms.empty() && norms.back() == n) {
          mults.back() += w;
        } else {
          norms.push_back(n);
          mults.push_back(w);
        }
      }
    }
  }

  if (!exact) {
    std::vector<std::pair<double, std::int64_t>> keyed;
    keyed.reserve(static_cast<std::size_t>(entries));
    detail::for_each_orthant_vector(form, cutoff, [&](const std::int64_t* v, std::int64_t w) {
      keyed.emplace_back(form.value(v), w);
    });
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [n, w] : keyed) {
      if (!norms.empty() && n - norms.back() <= opt.merge_tol * std::max(1.0, n)) {
        mults.back() += w;
      } else {
        norms.push_back(n);
        mults.push_back(w);
      }
    }
  }
  return NormSpectrum(form, cutoff, exact ? 0.0 : opt.merge_tol, std::move(norms), std::move(mults),
                      exact);
}

/// Exhaustive count of integer vectors with q(v) <= x over the full box.
/// A test oracle: deliberately independent of the orthant enumeration.
inline std::int64_t brute_force_count(const DiagonalForm& form, double x,
                                      std::size_t max_visits = 1'000'000) {
  if (x < 0.0) throw DomainError("count bound must be non-negative");
  std::int64_t b[3] = {0, 0, 0};
  double visits = 1.0;
  for (int i = 0; i < form.dim(); ++i) {
    b[i] = static_cast<std::int64_t>(std::floor(std::sqrt(x / form.coeff(i))));
    visits *= static_cast<double>(2 * b[i] + 1);
  }
  if (visits > static_cast<double>(max_visits))
    throw CapacityError("brute-force box too large", static_cast<std::size_t>(visits));
  std::int64_t count = 0;
  std::int64_t v2max = form.dim() == 3 ? b[2] : 0;
  for (std::int64_t v0 = -b[0]; v0 <= b[0]; ++v0)
    for (std::int64_t v1 = -b[1]; v1 <= b[1]; ++v1)
      for (std::int64_t v2 = -v2max; v2 <= v2max; ++v2) {
        const std::int64_t v[3] = {v0, v1, v2};
        if (form.value(v) <= x) ++count;
      }
  return count;
}

/// N(x) = #{j : n_j <= x}, counting n_0 = 0.
inline std::size_t norm_count(const NormSpectrum& spec, double x) {
  if (x > spec.cutoff()) throw RangeError("x exceeds the enumeration cutoff");
  if (x < 0.0) throw DomainError("x must be non-negative");
  return spec.count_upto(x);
}

/// <delta_j>_x = (1/N(x)) sum_{n_j <= x} (n_{j+1} - n_j). The norm following
/// the last one <= x must be stored.
inline double mean_spacing(const NormSpectrum& spec, double x) {
  const auto n = norm_count(spec, x);
  if (n == 0 || n >= spec.size())
    throw DomainError("mean spacing needs the norm following x inside the cutoff");
  // The spacings telescope to n_{N(x)} - n_0.
  return (spec.norm(n) - spec.norm(0)) / static_cast<double>(n);
}

}  // namespace seba
