#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pcjoin/error.hpp"
#include "pcjoin/fit.hpp"

using namespace pcj;

TEST(PowerFit, RecoversExactPowerLaw) {
  std::vector<double> x = {10, 100, 1000}, y;
  for (double v : x) y.push_back(3 * std::pow(v, 1.5));
  auto fit = fit_power_law(x, y);
  EXPECT_NEAR(fit.exponent, 1.5, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-9);
  EXPECT_NEAR(fit.residual, 0.0, 1e-12);
}

TEST(PowerFit, ResidualOfNoisyPoints) {
  // Two points always fit exactly; a bent third point leaves a residual.
  std::vector<double> x = {1, 2, 4}, y = {1, 4, 8};
  auto fit = fit_power_law(x, y);
  EXPECT_GT(fit.residual, 0.05);
  EXPECT_GT(fit.exponent, 1.0);
  EXPECT_LT(fit.exponent, 2.0);
}

TEST(PowerFit, RejectsDegenerateInput) {
  std::vector<double> one = {1}, two = {2, 2}, neg = {1, -1};
  EXPECT_THROW(fit_power_law(one, one), Error);
  EXPECT_THROW(fit_power_law(two, two), Error);
  EXPECT_THROW(fit_power_law(two, neg), Error);
}
