#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "seba/lattice.hpp"

using namespace seba;

namespace {

// Classical count of representations n = a^2 + b^2 by direct pair loop.
std::map<std::int64_t, std::int64_t> two_square_counts(std::int64_t limit) {
  std::map<std::int64_t, std::int64_t> r;
  const auto b = static_cast<std::int64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  for (std::int64_t x = -b; x <= b; ++x)
    for (std::int64_t y = -b; y <= b; ++y) {
      const auto n = x * x + y * y;
      if (n <= limit) ++r[n];
    }
  return r;
}

}  // namespace

TEST(DiagonalForm, RejectsBadCoefficients) {
  EXPECT_THROW(DiagonalForm(std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(DiagonalForm(std::vector<double>{1.0, -2.0}), DomainError);
  EXPECT_THROW(DiagonalForm(std::vector<double>{1.0, 0.0, 1.0}), DomainError);
  EXPECT_THROW(DiagonalForm::parse("1,x"), DomainError);
}

TEST(DiagonalForm, ParseTagsExactness) {
  const auto a = DiagonalForm::parse("1,3/2");
  EXPECT_TRUE(a.is_exact());
  EXPECT_DOUBLE_EQ(a.coeff(1), 1.5);
  EXPECT_EQ(a.to_string(), "1,3/2");
  const auto b = DiagonalForm::parse("1,1.4142135623730951");
  EXPECT_FALSE(b.is_exact());
  EXPECT_EQ(DiagonalForm::parse("2,4,6").dim(), 3);
}

TEST(DiagonalForm, Covolume) {
  const DiagonalForm f(std::vector<double>{2.0, 8.0});
  EXPECT_DOUBLE_EQ(f.dual_covolume(), 4.0);
  EXPECT_NEAR(f.torus_volume(), 4.0 * M_PI * M_PI / 4.0, 1e-14);
  const auto img = image_form(f);
  EXPECT_NEAR(img.coeff(0), 2.0 * M_PI * M_PI, 1e-13);
}

TEST(EnumerateNorms, SquareLatticeToCutoffTen) {
  const auto s = enumerate_norms(DiagonalForm::parse("1,1"), 10.0);
  EXPECT_TRUE(s.exact());
  const std::vector<double> n{0, 1, 2, 4, 5, 8, 9, 10};
  const std::vector<std::int64_t> r{1, 4, 4, 4, 8, 4, 4, 8};
  EXPECT_EQ(s.norms(), n);
  EXPECT_EQ(s.mults(), r);
}

TEST(EnumerateNorms, CubicLatticeToCutoffThree) {
  const auto s = enumerate_norms(DiagonalForm::parse("1,1,1"), 3.0);
  EXPECT_EQ(s.norms(), (std::vector<double>{0, 1, 2, 3}));
  EXPECT_EQ(s.mults(), (std::vector<std::int64_t>{1, 6, 12, 8}));
}

TEST(EnumerateNorms, OnlyOriginBelowSmallestCoefficient) {
  const auto s = enumerate_norms(DiagonalForm(std::vector<double>{0.7, 1.3}), 0.5);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.mult(0), 1);
}

TEST(EnumerateNorms, FloatingPathMatchesExactPath) {
  const auto exact = enumerate_norms(DiagonalForm::parse("1,2"), 500.0);
  const auto flt = enumerate_norms(DiagonalForm(std::vector<double>{1.0, 2.0}), 500.0);
  EXPECT_FALSE(flt.exact());
  EXPECT_EQ(exact.norms(), flt.norms());
  EXPECT_EQ(exact.mults(), flt.mults());
}

TEST(EnumerateNorms, RationalCoefficientsMergeExactly) {
  const auto s = enumerate_norms(DiagonalForm::parse("1/3,1/7"), 50.0);
  for (std::size_t j = 1; j < s.size(); ++j) EXPECT_GT(s.norm(j), s.norm(j - 1));
  EXPECT_EQ(s.vector_total(), brute_force_count(s.form(), 50.0));
}

TEST(EnumerateNorms, Invariants) {
  for (const char* f : {"1,1", "1.6180339887498949,0.6180339887498949", "1,1.4142135623730951,1.7320508075688772"}) {
    const auto form = DiagonalForm::parse(f);
    const double cutoff = form.dim() == 2 ? 2000.0 : 300.0;
    const auto s = enumerate_norms(form, cutoff);
    EXPECT_EQ(s.norm(0), 0.0);
    EXPECT_EQ(s.mult(0), 1);
    for (std::size_t j = 1; j < s.size(); ++j) {
      EXPECT_GT(s.norm(j) - s.norm(j - 1), s.merge_tol() * std::max(1.0, s.norm(j)));
      EXPECT_EQ(s.mult(j) % 2, 0);
      EXPECT_LE(s.norm(j), cutoff);
    }
    EXPECT_EQ(s.vector_total(), brute_force_count(form, cutoff));
  }
}

TEST(EnumerateNorms, Errors) {
  const auto f = DiagonalForm::parse("1,1");
  EXPECT_THROW(enumerate_norms(f, 0.0), DomainError);
  EXPECT_THROW(enumerate_norms(f, -1.0), DomainError);
  EXPECT_THROW(enumerate_norms(f, 10.0, {.merge_tol = 1e-5}), DomainError);
  try {
    enumerate_norms(f, 1e6, {.merge_tol = 1e-10, .memory_budget_bytes = 1000});
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_GT(e.required(), 1000u);
  }
}

TEST(BruteForceCount, Examples) {
  EXPECT_EQ(brute_force_count(DiagonalForm::parse("1,1"), 10.0), 37);
  EXPECT_EQ(brute_force_count(DiagonalForm::parse("2,3"), 0.0), 1);
  EXPECT_EQ(brute_force_count(DiagonalForm::parse("1,1,1"), 0.0), 1);
  EXPECT_EQ(brute_force_count(DiagonalForm::parse("1,1,1"), 1.0), 7);
  EXPECT_THROW(brute_force_count(DiagonalForm::parse("1,1"), 1e8), CapacityError);
}

TEST(EnumerateNorms, CumulativeCountsMatchBruteForce) {
  std::mt19937_64 rng(11);
  for (const char* f : {"1,1", "1.4142135623730951,0.70710678118654757"}) {
    const auto form = DiagonalForm::parse(f);
    const auto s = enumerate_norms(form, 1e4);
    std::uniform_real_distribution<double> u(0.0, 1e4);
    for (int i = 0; i < 20; ++i) {
      const double x = u(rng);
      EXPECT_EQ(s.vectors_upto(x), brute_force_count(form, x)) << f << " x=" << x;
    }
  }
}

TEST(EnumerateNorms, SumOfTwoSquaresOracle) {
  const auto s = enumerate_norms(DiagonalForm::parse("1,1"), 1e4);
  const auto oracle = two_square_counts(10000);
  ASSERT_EQ(s.size(), oracle.size());
  std::size_t j = 0;
  for (const auto& [n, r] : oracle) {
    EXPECT_EQ(s.norm(j), static_cast<double>(n));
    EXPECT_EQ(s.mult(j), r);
    ++j;
  }
}

TEST(EnumerateNorms, WeylDensity) {
  const auto f2 = DiagonalForm::parse("1.6180339887498949,0.6180339887498949");
  const auto s2 = enumerate_norms(f2, 1e4);
  const double w2 = weyl_count(f2, 1e4);
  EXPECT_LE(std::abs(static_cast<double>(s2.vector_total()) - w2) / w2, 0.05);
  const auto f3 = DiagonalForm::parse("1,1.4142135623730951,1.7320508075688772");
  const auto s3 = enumerate_norms(f3, 1e3);
  const double w3 = weyl_count(f3, 1e3);
  EXPECT_LE(std::abs(static_cast<double>(s3.vector_total()) - w3) / w3, 0.05);
}

TEST(EnumerateNorms, Deterministic) {
  const auto f = DiagonalForm::parse("1.6180339887498949,0.6180339887498949");
  const auto a = enumerate_norms(f, 3000.0);
  const auto b = enumerate_norms(f, 3000.0);
  EXPECT_EQ(a.norms(), b.norms());
  EXPECT_EQ(a.mults(), b.mults());
}

TEST(NormCount, Examples) {
  const auto s = enumerate_norms(DiagonalForm::parse("1,1"), 10.0);
  EXPECT_EQ(norm_count(s, 5.0), 5u);
  EXPECT_EQ(norm_count(s, 0.0), 1u);
  EXPECT_EQ(norm_count(s, 10.0), s.size());
  EXPECT_THROW(norm_count(s, 10.5), RangeError);
}

TEST(MeanSpacing, Examples) {
  const auto s = enumerate_norms(DiagonalForm::parse("1,1"), 10.0);
  EXPECT_DOUBLE_EQ(mean_spacing(s, 9.0), 10.0 / 7.0);
  EXPECT_THROW(mean_spacing(s, 10.0), DomainError);
  const NormSpectrum two(DiagonalForm::parse("1,1"), 3.0, 0.0, {0.0, 2.5}, {1, 4}, false);
  EXPECT_DOUBLE_EQ(mean_spacing(two, 0.0), 2.5);
}

TEST(MeanSpacing, ApproachesWeylRatio) {
  const auto s = enumerate_norms(DiagonalForm::parse("1.6180339887498949,0.6180339887498949"), 2.1e4);
  double prev = 1e9;
  for (double x : {1e3, 4e3, 2e4}) {
    const double dev = std::abs(mean_spacing(s, x) * static_cast<double>(norm_count(s, x)) / x - 1.0);
    EXPECT_LT(dev, prev + 1e-3);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-3);
}
