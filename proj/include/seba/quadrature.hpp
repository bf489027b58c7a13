// Globally adaptive Gauss-Kronrod (7/15) quadrature for real or complex
// integrands on finite intervals.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <vector>

#include "seba/error.hpp"

namespace seba::quad {

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights on kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(std::complex<double> z) { return std::abs(z); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[static_cast<std::size_t>(i)];
    const T s = f(c - dx) + f(c + dx);
    kron += s * kWgk[static_cast<std::size_t>(i)];
    if (i % 2 == 1) gauss += s * kWg[static_cast<std::size_t>(i / 2)];
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, magnitude(kron - gauss)};
}

}  // namespace detail

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  std::size_t panels = 0;
};

struct Options {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  std::size_t max_panels = 20000;
  std::size_t initial_panels = 1;
};

/// Integrates f over [a, b]. Panels are bisected in order of largest error
/// estimate until the summed estimate meets max(abs_tol, rel_tol*|I|).
/// Panel values are summed in left-to-right order, so the result does not
/// depend on the refinement history beyond the final partition.
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, const Options& opt = {}) {
  using detail::Panel;
  if (!(b > a)) return {};
  std::priority_queue<Panel<T>> heap;
  const std::size_t n0 = std::max<std::size_t>(1, opt.initial_panels);
  for (std::size_t i = 0; i < n0; ++i) {
    const double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(n0);
    const double hi = i + 1 == n0 ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n0);
    heap.push(detail::gk15<T>(f, lo, hi));
  }
  std::size_t evals = 15 * n0;
  auto totals = [&heap]() {
    auto copy = heap;
    T v{};
    double e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair<T, double>{v, e};
  };
  double err_sum = 0.0;
  T val_sum{};
  {
    auto [v, e] = totals();
    val_sum = v;
    err_sum = e;
  }
  while (err_sum > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(val_sum))) {
    if (heap.size() >= opt.max_panels) {
      const auto& w = heap.top();
      std::ostringstream os;
      os.precision(10);
      os << "adaptive quadrature did not converge: error " << err_sum << ", worst panel [" << w.a
         << ", " << w.b << "] error " << w.error;
      throw QuadratureError(os.str());
    }
    const Panel<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15<T>(f, worst.a, mid);
    const auto right = detail::gk15<T>(f, mid, worst.b);
    evals += 30;
    err_sum += left.error + right.error - worst.error;
    val_sum += left.value + right.value - worst.value;
    heap.push(left);
    heap.push(right);
    if (heap.size() % 64 == 0) {
      auto [v, e] = totals();
      val_sum = v;
      err_sum = e;
    }
  }
  // Final deterministic left-to-right reduction.
  std::vector<Panel<T>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  Result<T> out;
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  out.evaluations = evals;
  out.panels = panels.size();
  return out;
}

}  // namespace seba::quad
