#include <gtest/gtest.h>

#include <vector>

#include "seba/summation.hpp"

using namespace seba;

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(CompensatedSum, ManySmallTerms) {
  std::vector<double> xs(1000000, 0.1);
  EXPECT_NEAR(compensated_total(xs), 100000.0, 1e-9);
}

TEST(CompensatedComplexSum, Components) {
  CompensatedComplexSum s;
  s += {1.0, 1e100};
  s += {1e100, 1.0};
  s += {-1e100, -1e100};
  EXPECT_EQ(s.value(), std::complex<double>(1.0, 1.0));
}
