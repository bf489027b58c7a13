// Both sides of the exact trace formulas for a point scatterer on 2D and 3D
// flat tori, tested against Gaussians h(rho) = exp(-beta rho^2).
//
// The secular function has the geometric representation (lambda = rho^2,
// Im rho = -sigma < 0, vol = torus volume)
//   2D: F - rhs = -(vol/2pi) [log(i rho) - 2pi c(phi) - D(rho)],
//       D(rho) = sum_{l != 0} r K0(i rho |l|),
//   3D: F - rhs = vol [-i rho/4pi + D3(rho)],
// where the sums run over the image lattice 2pi L0 (squared lengths are the
// values of image_form). The trace identities are then
//   2D: sum_j h(rho_j^phi) - h(rho_j) = (1/2pi i) Int h/(rho (log i rho - 2pi c))
//                                      - (1/2pi i) Int h' log(1 - D/(log i rho - 2pi c)),
//   3D: sum_j h(rho_j^phi) - h(rho_j) = h(0)/2 - (1/2pi i) Int h' log(1 + 4pi i D3/rho),
// with both integrals along Im rho = -sigma.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "seba/bessel.hpp"
#include "seba/error.hpp"
#include "seba/lattice.hpp"
#include "seba/quadrature.hpp"
#include "seba/secular.hpp"
#include "seba/summation.hpp"

namespace seba {

using cplx = std::complex<double>;

/// Gaussian test function h(rho) = exp(-beta rho^2).
class GaussianTest {
 public:
  explicit GaussianTest(double beta) : beta_(beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
  }
  double beta() const noexcept { return beta_; }
  cplx h(cplx rho) const { return std::exp(-beta_ * rho * rho); }
  cplx h_prime(cplx rho) const { return -2.0 * beta_ * rho * h(rho); }
  /// h at rho = sqrt(lambda) for either sign of lambda.
  double of_eigenvalue(double lambda) const { return std::exp(-beta_ * lambda); }

 private:
  double beta_;
};

/// Terms with exponent sigma*|l| above this are dropped from lattice sums.
inline constexpr double kExponentCut = 45.0;

/// Image-lattice cutoff needed by every sum on the line Im rho = -sigma.
/// The regularizing terms exp(-|l|/sqrt2) are cut at |l|/sqrt2 = 45.
inline double image_cutoff(double sigma) {
  const double reg = 2.0 * kExponentCut * kExponentCut;
  const double line = (kExponentCut / sigma) * (kExponentCut / sigma);
  return 1.01 * std::max(reg, line);
}

namespace detail {

// Bound on sum_{|l| > L} r exp(-s |l|) |l|^p over a lattice with covolume A
// in dimension d, from the shell density of the lattice term count.
inline double lattice_exp_tail(int d, double A, double s, double L, double p) {
  // int_L^inf (area of sphere) t^{d-1+p} e^{-s t} dt, doubled as a margin for
  // the lattice-point discrepancy near L.
  const double sphere = d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  const double k = d - 1 + p;
  const double lead = std::pow(L + 1.0, k) * std::exp(-s * L) / s;
  return 2.0 * sphere / A * lead * (1.0 + std::max(k, 0.0) / (s * L + 1.0));
}

}  // namespace detail

/// D(rho) with the dropped-tail bound.
struct DiffractiveSum {
  cplx value{};
  double truncation = 0.0;
};

/// D(rho) = sum_{m != 0} r(m) K0(i rho sqrt(m)) over the norms m of `image`,
/// truncated at sigma sqrt(m) > 45.
inline DiffractiveSum diffractive_D(const NormSpectrum& image, cplx rho) {
  const double sigma = -rho.imag();
  if (!(sigma > 0.0)) throw DomainError("diffractive sum needs Im rho < 0");
  const double mmax = (kExponentCut / sigma) * (kExponentCut / sigma);
  if (mmax > image.cutoff()) throw RangeError("image spectrum too short for this sigma");
  CompensatedComplexSum s;
  const cplx irho(0.0, 1.0);
  for (std::size_t j = 1; j < image.size() && image.norm(j) <= mmax; ++j)
    s.add(static_cast<double>(image.mult(j)) * k0_complex(irho * rho * std::sqrt(image.norm(j))));
  DiffractiveSum out;
  out.value = s.value();
  // K0(z) <= sqrt(pi/(2 Re z)) exp(-Re z) for the dropped terms.
  const double L = std::sqrt(mmax);
  out.truncation = std::sqrt(std::numbers::pi / (2.0 * sigma * L)) *
                   detail::lattice_exp_tail(image.form().dim(), image.form().dual_covolume(), sigma, L, 0.0);
  return out;
}

/// f(sigma) = sum_{m != 0} r(m) K0(sigma sqrt(m)), the bound on |D| along the line.
inline double diffractive_bound(const NormSpectrum& image, double sigma) {
  const auto d = diffractive_D(image, cplx(0.0, -sigma));
  return std::abs(d.value) + d.truncation;
}

/// c1 = -(1/2pi) sum_{m != 0} r(m) Re K0(sqrt(m) e^{i pi/4}) over image norms m.
inline double c1_constant(const NormSpectrum& image) {
  const double reg_cut = 2.0 * kExponentCut * kExponentCut;
  if (image.cutoff() < reg_cut) throw RangeError("image spectrum too short for the c1 sum");
  CompensatedSum s;
  const cplx rot = std::polar(1.0, std::numbers::pi / 4.0);
  for (std::size_t j = 1; j < image.size() && image.norm(j) <= reg_cut; ++j)
    s.add(static_cast<double>(image.mult(j)) * k0_complex(rot * std::sqrt(image.norm(j))).real());
  return -s.value() / (2.0 * std::numbers::pi);
}

/// Phase-free constant of D3: 1/(4pi sqrt2) - (1/4pi) sum r exp(-l/sqrt2) cos(l/sqrt2)/l.
inline double d3_regularization(const NormSpectrum& image) {
  const double reg_cut = 2.0 * kExponentCut * kExponentCut;
  if (image.cutoff() < reg_cut) throw RangeError("image spectrum too short for the D3 constant");
  CompensatedSum s;
  for (std::size_t j = 1; j < image.size() && image.norm(j) <= reg_cut; ++j) {
    const double l = std::sqrt(image.norm(j));
    s.add(static_cast<double>(image.mult(j)) * std::exp(-l / std::numbers::sqrt2) *
          std::cos(l / std::numbers::sqrt2) / l);
  }
  return 1.0 / (4.0 * std::numbers::pi * std::numbers::sqrt2) - s.value() / (4.0 * std::numbers::pi);
}

/// Everything the trace formulas need about one torus and phase: the torus
/// volume, c0, the right-hand side, the image-lattice spectrum and the
/// constants of the geometric representation.
class TraceContext {
 public:
  TraceContext(const NormSpectrum& spec, const ScattererPhase& phase,
               TailModel tail = TailModel::Analytic, double min_sigma = 2.0)
      : form_(spec.form()), phase_(phase) {
    dim_ = form_.dim();
    covolume_ = form_.dual_covolume();
    volume_ = form_.torus_volume();
    c0_ = seba::c0(spec, tail);
    rhs_ = phase.rhs(c0_.value);
    image_ = enumerate_norms(image_form(form_), image_cutoff(min_sigma));
    if (dim_ == 2) {
      c1_ = c1_constant(image_);
      c_phi_ = c1_ - rhs_ / volume_;
    } else {
      d3_const_ = d3_regularization(image_) - rhs_ / volume_;
    }
  }

  int dim() const noexcept { return dim_; }
  const DiagonalForm& form() const noexcept { return form_; }
  const ScattererPhase& phase() const noexcept { return phase_; }
  double covolume() const noexcept { return covolume_; }
  double volume() const noexcept { return volume_; }
  const C0Value& c0() const noexcept { return c0_; }
  double rhs() const noexcept { return rhs_; }
  const NormSpectrum& image() const noexcept { return image_; }
  double c1() const noexcept { return c1_; }
  double c_phi() const noexcept { return c_phi_; }
  double d3_constant() const noexcept { return d3_const_; }

  /// D3(rho) with the dropped-tail bound.
  DiffractiveSum d3(cplx rho) const {
    const double sigma = -rho.imag();
    if (!(sigma > 0.0)) throw DomainError("D3 needs Im rho < 0");
    const double lmax = kExponentCut / sigma;
    if (lmax * lmax > image_.cutoff()) throw RangeError("image spectrum too short for this sigma");
    CompensatedComplexSum s;
    const cplx mi(0.0, -1.0);
    for (std::size_t j = 1; j < image_.size() && image_.norm(j) <= lmax * lmax; ++j) {
      const double l = std::sqrt(image_.norm(j));
      s.add(static_cast<double>(image_.mult(j)) * std::exp(mi * rho * l) / l);
    }
    DiffractiveSum out;
    out.value = d3_const_ + s.value() / (4.0 * std::numbers::pi);
    out.truncation = detail::lattice_exp_tail(3, image_.form().dual_covolume(), sigma, lmax, -1.0) /
                     (4.0 * std::numbers::pi);
    return out;
  }

  /// Upper bound on |D3| along Im rho = -sigma.
  double d3_bound(double sigma) const {
    const double lmax = kExponentCut / sigma;
    CompensatedSum s;
    for (std::size_t j = 1; j < image_.size() && image_.norm(j) <= lmax * lmax; ++j) {
      const double l = std::sqrt(image_.norm(j));
      s.add(static_cast<double>(image_.mult(j)) * std::exp(-sigma * l) / l);
    }
    return std::abs(d3_const_) + s.value() / (4.0 * std::numbers::pi) + d3(cplx(0.0, -sigma)).truncation;
  }

 private:
  DiagonalForm form_;
  ScattererPhase phase_;
  int dim_ = 0;
  double covolume_ = 0.0, volume_ = 0.0;
  C0Value c0_;
  double rhs_ = 0.0;
  NormSpectrum image_;
  double c1_ = 0.0, c_phi_ = 0.0, d3_const_ = 0.0;
};

struct CConstants {
  double c1 = 0.0;
  double c_phi = 0.0;
};

/// c1 and c(phi) = c1 - c0 tan(phi/2) / vol of the 2D representation.
inline CConstants c_constants(const TraceContext& ctx) {
  if (ctx.dim() != 2) throw DomainError("c constants are defined for 2D tori");
  return {ctx.c1(), ctx.c_phi()};
}

inline CConstants c_constants(const NormSpectrum& spec, const ScattererPhase& phase) {
  return c_constants(TraceContext(spec, phase));
}

/// Smallest sigma = 2^k, k >= 1, with sigma^2 > -ground and
/// f(sigma)/(log sigma - 2pi|c|) <= 0.9, log sigma > 2pi|c| (2D), or
/// 4pi sup|D3|/sigma <= 0.9 (3D).
inline double find_sigma(const TraceContext& ctx, double ground = 0.0, double sigma_max = 1e6) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (double sigma = 2.0; sigma <= sigma_max; sigma *= 2.0) {
    if (sigma * sigma <= -ground) continue;
    if (ctx.dim() == 2) {
      const double gap = std::log(sigma) - two_pi * std::abs(ctx.c_phi());
      if (gap > 0.0 && diffractive_bound(ctx.image(), sigma) / gap <= 0.9) return sigma;
    } else {
      if (4.0 * std::numbers::pi * ctx.d3_bound(sigma) / sigma <= 0.9) return sigma;
    }
  }
  throw BracketError("no admissible sigma below the search limit; |c(phi)| too large");
}

inline double find_sigma(const NormSpectrum& spec, const ScattererPhase& phase, double ground = 0.0) {
  return find_sigma(TraceContext(spec, phase), ground);
}

/// sum_j exp(-beta lambda_j) - exp(-beta n_j) over all solved levels,
/// including the ground state paired with n_0 = 0.
inline double trace_lhs(const NormSpectrum& spec, const PerturbedSpectrum& pert, const GaussianTest& test) {
  const double need = 37.0 / test.beta();
  if (pert.x_max < need) {
    std::ostringstream os;
    os << "perturbed spectrum reaches x_max = " << pert.x_max << "; this beta requires x_max >= " << need;
    throw RangeError(os.str());
  }
  if (pert.size() > spec.size()) throw ConsistencyError("perturbed spectrum longer than the norm list");
  CompensatedSum s;
  for (std::size_t j = 0; j < pert.size(); ++j)
    s.add(test.of_eigenvalue(pert.lambdas[j]) * -std::expm1(-test.beta() * pert.d[j]));
  return s.value();
}

struct QuadratureSettings {
  double abs_tol = 1e-9;
  std::size_t initial_panels = 32;
  std::size_t max_panels = 200000;
};

/// Integration half-range sqrt(46/beta) + sigma.
inline double contour_half_range(double beta, double sigma) { return std::sqrt(46.0 / beta) + sigma; }

/// A real contour integral with its diagnostics.
struct ContourValue {
  double value = 0.0;
  double imag = 0.0;         // imaginary residue dropped from the result
  double quad_error = 0.0;
  double trunc_s = 0.0;      // integrand mass beyond the half-range
  double trunc_m = 0.0;      // effect of the lattice-sum truncation
  double max_condition = 0.0;
};

namespace detail {

inline ContourValue finish_contour(const quad::Result<cplx>& r, cplx scale, double max_cond,
                                   double trunc_s, double trunc_m, double quad_tol) {
  ContourValue out;
  const cplx v = r.value * scale;
  out.value = v.real();
  out.imag = v.imag();
  out.quad_error = r.error * std::abs(scale);
  out.trunc_s = trunc_s;
  out.trunc_m = trunc_m;
  out.max_condition = max_cond;
  if (std::abs(out.imag) > 1e-10 + 10.0 * quad_tol) {
    std::ostringstream os;
    os << "contour integral has imaginary residue " << out.imag;
    throw ConsistencyError(os.str());
  }
  return out;
}

// Bound on (1/2pi) int_{|s| > S} |g(s - i sigma)| ds for |g| <= (a|rho| + b) e^{beta sigma^2 - beta s^2}.
inline double gaussian_outside(double beta, double sigma, double S, double a, double b) {
  const double tail = std::exp(beta * sigma * sigma - beta * S * S) / (2.0 * beta * S);
  return (a * (S + sigma) + b) * tail / std::numbers::pi;
}

}  // namespace detail

/// Smooth 2D term (1/2pi i) Int h(rho) / (rho (log i rho - 2pi c)) on Im rho = -sigma.
inline ContourValue smooth_term_2d(double c_phi, const GaussianTest& test, double sigma,
                                   const QuadratureSettings& qs = {}) {
  const double S = contour_half_range(test.beta(), sigma);
  const cplx I(0.0, 1.0);
  const double two_pi_c = 2.0 * std::numbers::pi * c_phi;
  auto f = [&](double s) {
    const cplx rho(s, -sigma);
    return test.h(rho) / (rho * (std::log(I * rho) - two_pi_c));
  };
  const auto r = quad::integrate<cplx>(f, -S, S, {qs.abs_tol * 2.0 * std::numbers::pi, 0.0, qs.max_panels, qs.initial_panels});
  const double denom_min = std::log(sigma) - std::abs(two_pi_c);
  const double ts = detail::gaussian_outside(test.beta(), sigma, S, 0.0, 1.0 / (sigma * std::max(denom_min, 1e-3)));
  return detail::finish_contour(r, 1.0 / (2.0 * std::numbers::pi * I), 0.0, ts, 0.0, qs.abs_tol);
}

/// Diffractive 2D term -(1/2pi i) Int h'(rho) log(1 - D/(log i rho - 2pi c)). The
/// integrand callable returns D(rho) and its truncation bound.
inline ContourValue diffractive_term_2d(const std::function<DiffractiveSum(cplx)>& D, double c_phi,
                                        const GaussianTest& test, double sigma,
                                        const QuadratureSettings& qs = {}) {
  const double S = contour_half_range(test.beta(), sigma);
  const cplx I(0.0, 1.0);
  const double two_pi_c = 2.0 * std::numbers::pi * c_phi;
  double max_cond = 0.0, max_trunc = 0.0;
  auto f = [&](double s) {
    const cplx rho(s, -sigma);
    const auto d = D(rho);
    const cplx L = std::log(I * rho) - two_pi_c;
    const double cond = std::abs(d.value) / std::abs(L);
    max_cond = std::max(max_cond, cond);
    max_trunc = std::max(max_trunc, d.truncation / std::abs(L));
    if (cond > 0.95) {
      std::ostringstream os;
      os << "admissibility |D|/|log(i rho) - 2 pi c| = " << cond << " > 0.95 at s = " << s;
      throw AdmissibilityError(os.str());
    }
    return test.h_prime(rho) * std::log(1.0 - d.value / L);
  };
  const auto r = quad::integrate<cplx>(f, -S, S, {qs.abs_tol * 2.0 * std::numbers::pi, 0.0, qs.max_panels, qs.initial_panels});
  // |log(1 - w)| <= |w|/(1 - |w|) and |h'| <= 2 beta |rho| |h|.
  const double ts = detail::gaussian_outside(test.beta(), sigma, S, 2.0 * test.beta() * 0.95 / 0.05, 0.0);
  const double hp_l1 = 2.0 * test.beta() * (S + sigma) * std::exp(test.beta() * sigma * sigma) *
                       std::sqrt(std::numbers::pi / test.beta());
  const double tm = hp_l1 * max_trunc / 0.05 / (2.0 * std::numbers::pi);
  return detail::finish_contour(r, -1.0 / (2.0 * std::numbers::pi * I), max_cond, ts, tm, qs.abs_tol);
}

struct TraceRHS2D {
  ContourValue smooth;
  ContourValue diffractive;
  double rhs() const { return smooth.value + diffractive.value; }
};

inline TraceRHS2D trace_rhs_2d(const TraceContext& ctx, const GaussianTest& test, double sigma,
                               const QuadratureSettings& qs = {}) {
  if (ctx.dim() != 2) throw DomainError("trace_rhs_2d needs a 2D torus");
  TraceRHS2D out;
  out.smooth = smooth_term_2d(ctx.c_phi(), test, sigma, qs);
  out.diffractive = diffractive_term_2d([&](cplx rho) { return diffractive_D(ctx.image(), rho); },
                                        ctx.c_phi(), test, sigma, qs);
  return out;
}

inline TraceRHS2D trace_rhs_2d(const NormSpectrum& spec, const ScattererPhase& phase,
                               const GaussianTest& test, double sigma, const QuadratureSettings& qs = {}) {
  return trace_rhs_2d(TraceContext(spec, phase, TailModel::Analytic, sigma), test, sigma, qs);
}

/// D3(rho) of the 3D representation.
inline DiffractiveSum d3_diffractive(const TraceContext& ctx, cplx rho) { return ctx.d3(rho); }

inline DiffractiveSum d3_diffractive(const NormSpectrum& spec3, const ScattererPhase& phase, cplx rho) {
  return TraceContext(spec3, phase, TailModel::Analytic, std::max(1e-3, -rho.imag())).d3(rho);
}

/// 3D contour term -(1/2pi i) Int h'(rho) log(1 + 4 pi i D3(rho)/rho).
inline ContourValue contour_term_3d(const std::function<DiffractiveSum(cplx)>& D3, const GaussianTest& test,
                                    double sigma, const QuadratureSettings& qs = {}) {
  const double S = contour_half_range(test.beta(), sigma);
  const cplx I(0.0, 1.0);
  const double four_pi = 4.0 * std::numbers::pi;
  double max_cond = 0.0, max_trunc = 0.0;
  auto f = [&](double s) {
    const cplx rho(s, -sigma);
    const auto d = D3(rho);
    const double cond = four_pi * std::abs(d.value) / std::abs(rho);
    max_cond = std::max(max_cond, cond);
    max_trunc = std::max(max_trunc, four_pi * d.truncation / std::abs(rho));
    if (cond > 0.95) {
      std::ostringstream os;
      os << "admissibility 4 pi |D3|/|rho| = " << cond << " > 0.95 at s = " << s;
      throw AdmissibilityError(os.str());
    }
    return test.h_prime(rho) * std::log(1.0 + four_pi * I * d.value / rho);
  };
  const auto r = quad::integrate<cplx>(f, -S, S, {qs.abs_tol * 2.0 * std::numbers::pi, 0.0, qs.max_panels, qs.initial_panels});
  const double ts = detail::gaussian_outside(test.beta(), sigma, S, 2.0 * test.beta() * 0.95 / 0.05, 0.0);
  const double hp_l1 = 2.0 * test.beta() * (S + sigma) * std::exp(test.beta() * sigma * sigma) *
                       std::sqrt(std::numbers::pi / test.beta());
  const double tm = hp_l1 * max_trunc / 0.05 / (2.0 * std::numbers::pi);
  return detail::finish_contour(r, -1.0 / (2.0 * std::numbers::pi * I), max_cond, ts, tm, qs.abs_tol);
}

struct TraceRHS3D {
  double half_h0 = 0.5;
  ContourValue contour;
  double rhs() const { return half_h0 + contour.value; }
};

inline TraceRHS3D trace_rhs_3d(const TraceContext& ctx, const GaussianTest& test, double sigma,
                               const QuadratureSettings& qs = {}) {
  if (ctx.dim() != 3) throw DomainError("trace_rhs_3d needs a 3D torus");
  if (4.0 * std::numbers::pi * ctx.d3_bound(sigma) / sigma > 0.9)
    throw AdmissibilityError("sigma violates 4 pi sup|D3|/sigma <= 0.9");
  TraceRHS3D out;
  out.half_h0 = 0.5 * test.h(0.0).real();
  out.contour = contour_term_3d([&](cplx rho) { return ctx.d3(rho); }, test, sigma, qs);
  return out;
}

inline TraceRHS3D trace_rhs_3d(const NormSpectrum& spec3, const ScattererPhase& phase,
                               const GaussianTest& test, double sigma, const QuadratureSettings& qs = {}) {
  return trace_rhs_3d(TraceContext(spec3, phase, TailModel::Analytic, sigma), test, sigma, qs);
}

struct TraceBudget {
  double quad = 0.0;
  double trunc_m = 0.0;
  double trunc_s = 0.0;
  double spectral = 0.0;
  double total() const { return quad + trunc_m + trunc_s + spectral; }
};

struct TraceCheckReport {
  int dim = 2;
  double beta = 0.0;
  double sigma = 0.0;
  double lhs = 0.0;
  double smooth = 0.0;       // 3D: h(0)/2
  double diffractive = 0.0;  // 3D: the logarithmic contour term
  double rhs = 0.0;
  double abs_error = 0.0;
  double imag_residue = 0.0;
  double max_condition = 0.0;
  TraceBudget budget;
};

/// Evaluates both sides of the trace identity. sigma <= 0 selects it with find_sigma.
inline TraceCheckReport trace_check(const NormSpectrum& spec, const PerturbedSpectrum& pert,
                                    const ScattererPhase& phase, const GaussianTest& test,
                                    double sigma = 0.0, const QuadratureSettings& qs = {}) {
  TraceCheckReport rep;
  rep.dim = spec.form().dim();
  rep.beta = test.beta();
  if (pert.size() == 0) throw RangeError("trace check needs a solved ground state");
  const double ground = pert.lambdas[0];
  if (sigma > 0.0 && sigma * sigma <= -ground)
    throw AdmissibilityError("sigma^2 must exceed -lambda_0 = " + std::to_string(-ground) +
                             " so the contour passes below the ground state");
  const double s = sigma > 0.0 ? sigma : find_sigma(TraceContext(spec, phase), ground);
  const TraceContext ctx(spec, phase, TailModel::Analytic, s);
  rep.sigma = s;
  rep.lhs = trace_lhs(spec, pert, test);
  if (rep.dim == 2) {
    const auto r = trace_rhs_2d(ctx, test, s, qs);
    rep.smooth = r.smooth.value;
    rep.diffractive = r.diffractive.value;
    rep.imag_residue = std::abs(r.smooth.imag) + std::abs(r.diffractive.imag);
    rep.max_condition = r.diffractive.max_condition;
    rep.budget.quad = r.smooth.quad_error + r.diffractive.quad_error;
    rep.budget.trunc_s = r.smooth.trunc_s + r.diffractive.trunc_s;
    rep.budget.trunc_m = r.diffractive.trunc_m;
  } else {
    const auto r = trace_rhs_3d(ctx, test, s, qs);
    rep.smooth = r.half_h0;
    rep.diffractive = r.contour.value;
    rep.imag_residue = std::abs(r.contour.imag);
    rep.max_condition = r.contour.max_condition;
    rep.budget.quad = r.contour.quad_error;
    rep.budget.trunc_s = r.contour.trunc_s;
    rep.budget.trunc_m = r.contour.trunc_m;
  }
  rep.rhs = rep.smooth + rep.diffractive;
  rep.abs_error = std::abs(rep.lhs - rep.rhs);
  // Levels beyond x_max, weighted by the Weyl density of distinct values.
  const double b = test.beta();
  rep.budget.spectral = weyl_density(spec.form(), pert.x_max) * std::exp(-b * pert.x_max) / b +
                        static_cast<double>(pert.size()) * pert.tol * b;
  return rep;
}

}  // namespace seba
