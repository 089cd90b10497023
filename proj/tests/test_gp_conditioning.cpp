#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "padams/gp_conditioning.hpp"

namespace {

using padams::Family;
using padams::Rational;
using padams::Scheme;

Rational q(long long n, long long d = 1) { return padams::make_rational(n, d); }

std::vector<Rational> qs(std::initializer_list<std::pair<long long, long long>> values) {
  std::vector<Rational> out;
  for (const auto& [n, d] : values) out.push_back(q(n, d));
  return out;
}

TEST(BuildPrior, EulerCase) {
  const auto prior = padams::build_prior(padams::build_basis({Family::adams_bashforth, 1}, false));
  ASSERT_EQ(prior.size(), 3u);
  EXPECT_EQ(prior.entries[1][1], padams::Polynomial::constant(q(1)));
  EXPECT_EQ(prior.entries[2][2], padams::Polynomial::constant(q(1)));
  EXPECT_TRUE(prior.entries[1][2].is_zero());
  EXPECT_EQ(prior.entries[0][2], padams::Polynomial::constant(q(1)));
  EXPECT_EQ(prior.labels.front(), "y_{i+1}");
  EXPECT_EQ(prior.labels.back(), "f_i");
}

TEST(BuildPrior, ThirdOrderBlocks) {
  const auto prior = padams::build_prior(padams::build_basis({Family::adams_bashforth, 3}, false));
  ASSERT_EQ(prior.size(), 5u);
  EXPECT_EQ(prior.entries[0][2], padams::Polynomial::constant(q(23, 12)));
  for (std::size_t r = 1; r < 5; ++r) {
    for (std::size_t c = 1; c < 5; ++c) {
      EXPECT_EQ(prior.entries[r][c], padams::Polynomial::constant(q(r == c ? 1 : 0)));
    }
  }
}

TEST(BuildPrior, SymmetricWithNonnegativeDiagonal) {
  for (int s = 1; s <= padams::kMaxSteps; ++s) {
    for (const Family family : {Family::adams_bashforth, Family::adams_moulton}) {
      const auto prior = padams::build_prior(padams::build_basis({family, s}, true));
      for (std::size_t r = 0; r < prior.size(); ++r) {
        for (std::size_t c = 0; c < prior.size(); ++c) {
          EXPECT_EQ(prior.entries[r][c], prior.entries[c][r]);
        }
        // Diagonal entries are sums of squares: every coefficient of a^1 is zero.
        EXPECT_EQ(prior.entries[r][r].coefficient(1), q(0));
        EXPECT_GE(prior.entries[r][r].coefficient(0), q(0));
        EXPECT_GE(prior.entries[r][r].coefficient(2), q(0));
      }
    }
  }
}

TEST(Condition, ThirdOrderDeterministic) {
  const auto law = padams::derive_law({Family::adams_bashforth, 3}, false);
  EXPECT_EQ(law.y_weight, q(1));
  EXPECT_EQ(law.f_weights, qs({{23, 12}, {-4, 3}, {5, 12}}));
  EXPECT_EQ(law.sd_constant, q(0));
}

TEST(Condition, ThirdOrderAugmented) {
  const auto law = padams::derive_law({Family::adams_bashforth, 3}, true);
  EXPECT_EQ(law.f_weights, qs({{23, 12}, {-4, 3}, {5, 12}}));
  EXPECT_EQ(law.sd_constant, q(3, 8));
  EXPECT_EQ(law.h_power(), 4);
}

TEST(Condition, MoultonFourStepAugmented) {
  const auto law = padams::derive_law({Family::adams_moulton, 3}, true);
  EXPECT_EQ(law.y_weight, q(1));
  EXPECT_EQ(law.f_weights, qs({{3, 8}, {19, 24}, {-5, 24}, {1, 24}}));
  EXPECT_EQ(law.sd_constant, q(19, 720));
  EXPECT_EQ(law.h_power(), 5);
}

TEST(Condition, SingularBlockIsDerivationError) {
  auto prior = padams::build_prior(padams::build_basis({Family::adams_bashforth, 2}, false));
  for (auto& row : prior.entries) row[2] = padams::Polynomial{};
  for (auto& entry : prior.entries[2]) entry = padams::Polynomial{};
  EXPECT_THROW((void)padams::condition(prior), padams::DerivationError);
}

TEST(Condition, NoiseDependentBlockIsDerivationError) {
  auto prior = padams::build_prior(padams::build_basis({Family::adams_bashforth, 2}, true));
  prior.entries[2][2] = padams::Polynomial({q(1), q(0), q(1)});
  EXPECT_THROW((void)padams::condition(prior), padams::DerivationError);
}

TEST(Condition, PropertiesAcrossRange) {
  for (int s = 1; s <= padams::kMaxSteps; ++s) {
    for (const Family family : {Family::adams_bashforth, Family::adams_moulton}) {
      const Scheme scheme{family, s};
      const auto plain = padams::derive_law(scheme, false);
      const auto noisy = padams::derive_law(scheme, true);
      EXPECT_EQ(plain.f_weights, padams::scheme_coefficients(scheme)) << scheme.label();
      EXPECT_EQ(noisy.f_weights, plain.f_weights) << scheme.label();
      EXPECT_EQ(plain.sd_constant, q(0));
      EXPECT_EQ(noisy.sd_constant, padams::truncation_constant(scheme)) << scheme.label();
      Rational sum(0);
      for (const auto& w : plain.f_weights) sum += w;
      EXPECT_EQ(sum, q(1));
      if (family == Family::adams_bashforth) {
        EXPECT_EQ(noisy.sd_constant, padams::am_coefficients(s + 1).front());
      }
    }
  }
}

// Independent floating-point route: evaluate the prior at a concrete noise
// scale and condition with an LU solve. The variance is a difference of
// O(|Sigma_11|) terms, so at small noise scales its error is judged against
// that magnitude; the relative sd check uses a scale where it dominates.
TEST(Condition, FloatingPointRouteAgrees) {
  const double alpha = 1.7;
  const double h = 0.3;
  for (int s = 1; s <= 5; ++s) {
    for (const Family family : {Family::adams_bashforth, Family::adams_moulton}) {
      const Scheme scheme{family, s};
      const auto prior = padams::build_prior(padams::build_basis(scheme, true));
      const auto law = padams::derive_law(scheme, true);
      for (const double noise_scale : {1e3, alpha * std::pow(h, scheme.order())}) {
        const auto cov = prior.evaluate(noise_scale);
        const auto n = static_cast<Eigen::Index>(cov.size() - 1);
        Eigen::MatrixXd s22(n, n);
        Eigen::VectorXd s21(n);
        for (Eigen::Index r = 0; r < n; ++r) {
          for (Eigen::Index c = 0; c < n; ++c) s22(r, c) = cov[r + 1][c + 1];
          s21(r) = cov[r + 1][0];
        }
        const Eigen::VectorXd w = s22.partialPivLu().solve(s21);
        const double var = cov[0][0] - s21.dot(w);

        EXPECT_NEAR(w(0), padams::to_double(law.y_weight), 1e-12);
        for (Eigen::Index j = 1; j < n; ++j) {
          const double exact = padams::to_double(law.f_weights[j - 1]);
          EXPECT_NEAR(w(j), exact, 1e-12 * std::abs(exact)) << scheme.label();
        }
        const double sd_exact = noise_scale * padams::to_double(law.sd_constant);
        EXPECT_NEAR(var, sd_exact * sd_exact, 1e-12 * cov[0][0]) << scheme.label();
        if (noise_scale == 1e3) {
          EXPECT_NEAR(std::sqrt(var), sd_exact, 1e-12 * sd_exact) << scheme.label();
        }
      }
    }
  }
}

TEST(VerifyPropositions, Cells) {
  const auto one = padams::verify_propositions(1);
  ASSERT_EQ(one.rows.size(), 2u);
  EXPECT_TRUE(one.all_pass());
  EXPECT_EQ(one.rows[0].mean_weights, qs({{1, 1}}));
  EXPECT_EQ(one.rows[0].sd_constant, q(1, 2));

  const auto three = padams::verify_propositions(3);
  EXPECT_TRUE(three.all_pass());
  EXPECT_EQ(three.rows[2].scheme.label(), "AB3");
  EXPECT_EQ(three.rows[2].sd_constant, q(3, 8));

  const auto four = padams::verify_propositions(4);
  const auto& am4 = four.rows[4 + 2];
  EXPECT_EQ(am4.scheme.label(), "AM4");
  EXPECT_TRUE(am4.pass);
  EXPECT_EQ(am4.mean_weights, qs({{3, 8}, {19, 24}, {-5, 24}, {1, 24}}));
  EXPECT_EQ(am4.sd_constant, q(19, 720));

  EXPECT_TRUE(padams::verify_propositions(padams::kMaxSteps).all_pass());
  EXPECT_THROW((void)padams::verify_propositions(0), std::invalid_argument);
  EXPECT_THROW((void)padams::verify_propositions(7), std::invalid_argument);
}

}  // namespace
