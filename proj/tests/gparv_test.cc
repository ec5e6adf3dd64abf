// Copyright 2026 The shuffleamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuffleamp/gparv.h"

#include <cmath>
#include <functional>
#include <random>

#include "gtest/gtest.h"
#include "shuffleamp/catalog.h"
#include "shuffleamp/errors.h"
#include "shuffleamp/randomizers.h"

namespace shuffleamp {
namespace {

RandomizerSpec Spec(RandomizerKind kind, double eps0,
                    std::optional<int> k_or_d = std::nullopt) {
  RandomizerSpec spec;
  spec.kind = kind;
  spec.eps0 = eps0;
  spec.k_or_d = k_or_d;
  return spec;
}

double AtomMassAt(const Gparv& g, double value, double tol = 1e-11) {
  double mass = 0;
  for (const auto& [v, m] : g.atoms()) {
    if (std::abs(v - value) <= tol) mass += m;
  }
  return mass;
}

// Adaptive Simpson quadrature for the quadrature oracle below.
double Simpson(const std::function<double(double)>& f, double a, double b,
               int depth, double fa, double fm, double fb) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 1e-13) {
    return left + right;
  }
  return Simpson(f, a, m, depth - 1, fa, flm, fm) +
         Simpson(f, m, b, depth - 1, fm, frm, fb);
}

double Integrate(const std::function<double(double)>& f, double a, double b) {
  const double m = 0.5 * (a + b);
  return Simpson(f, a, b, 40, f(a), f(m), f(b));
}

TEST(GparvUpperTest, KrrAtomsMatchCatalogTable) {
  const double eps0 = 1.2, eps = 0.3;
  const int k = 10;
  const double e0 = std::exp(eps0), ee = std::exp(eps);
  const Gparv g = GparvUpper(
      UpperDecomposition(Spec(RandomizerKind::kKrr, eps0, k)), eps, eps0);
  const double p = 1 / (e0 + k - 1);
  EXPECT_NEAR(AtomMassAt(g, 1 - e0 * ee), p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, 1 - ee), (k - 2) * p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, 0.0), (e0 - 1) * p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, e0 - ee), p, 1e-14);
  EXPECT_EQ(g.atoms().size(), 4u);
}

TEST(GparvUpperTest, OueAsymptoticCarriesTheFifthValue) {
  const double eps0 = 0.9, eps = 0.2;
  const double e0 = std::exp(eps0), ee = std::exp(eps);
  const Gparv g = GparvUpper(
      UpperDecomposition(Spec(RandomizerKind::kOue, eps0)), eps, eps0);
  EXPECT_NEAR(AtomMassAt(g, e0 - e0 * ee), 1 / (2 * e0 * (e0 + 1)), 1e-14);
}

TEST(GparvUpperTest, AsymptoticCatalogMatchesPublishedDistributions) {
  const double eps0 = 1.3, eps = 0.4;
  const double e0 = std::exp(eps0), ee = std::exp(eps);
  const double h = std::exp(eps0 / 2);
  struct Row {
    RandomizerKind kind;
    double at_lo, at_mid, at_flat, at_zero, at_hi;
  };
  const std::vector<Row> rows = {
      {RandomizerKind::kBlh, 1 / (2 * (e0 + 1)), 1 / (2 * (e0 + 1)),
       1 / (2 * (e0 + 1)), (e0 - 1) / (e0 + 1), 1 / (2 * (e0 + 1))},
      {RandomizerKind::kRappor, 1 / ((h + 1) * (h + 1)),
       1 / (h * (h + 1) * (h + 1)), h / ((h + 1) * (h + 1)), 1 - 1 / h,
       1 / ((h + 1) * (h + 1))},
      {RandomizerKind::kOue, 1 / (2 * (e0 + 1)), 1 / (2 * e0 * (e0 + 1)),
       e0 / (2 * (e0 + 1)), 0.5 * (1 - 1 / e0), 1 / (2 * (e0 + 1))},
      {RandomizerKind::kHr, 1 / (2 * (e0 + 1)), 1 / (2 * (e0 + 1)),
       1 / (2 * (e0 + 1)), (e0 - 1) / (e0 + 1), 1 / (2 * (e0 + 1))},
  };
  for (const auto& row : rows) {
    const Gparv g =
        GparvUpper(UpperDecomposition(Spec(row.kind, eps0)), eps, eps0);
    EXPECT_NEAR(AtomMassAt(g, 1 - e0 * ee), row.at_lo, 1e-13)
        << ToString(row.kind);
    EXPECT_NEAR(AtomMassAt(g, e0 - e0 * ee), row.at_mid, 1e-13)
        << ToString(row.kind);
    EXPECT_NEAR(AtomMassAt(g, 1 - ee), row.at_flat, 1e-13)
        << ToString(row.kind);
    EXPECT_NEAR(AtomMassAt(g, 0.0), row.at_zero, 1e-13) << ToString(row.kind);
    EXPECT_NEAR(AtomMassAt(g, e0 - ee), row.at_hi, 1e-13)
        << ToString(row.kind);
  }
}

TEST(GparvUpperTest, MeanZeroAtEpsZero) {
  const Gparv g = GparvUpper(
      UpperDecomposition(Spec(RandomizerKind::kRappor, 1.5, 6)), 0.0, 1.5);
  EXPECT_NEAR(g.Mean(), 0.0, 1e-12);
}

TEST(GparvUpperTest, Property2SupportOnCatalog) {
  for (double eps0 : {0.2, 1.0, 3.0}) {
    for (double eps : {0.0, eps0 / 2, eps0}) {
      for (const auto& spec :
           {Spec(RandomizerKind::kKrr, eps0, 10),
            Spec(RandomizerKind::kBlh, eps0),
            Spec(RandomizerKind::kHr, eps0, 8)}) {
        const Gparv g = GparvUpper(UpperDecomposition(spec), eps, eps0);
        const auto [lo, hi] = Property2Bounds(eps0, eps);
        EXPECT_GE(g.MinSupport(), lo - 1e-12);
        EXPECT_LE(g.MaxSupport(), hi + 1e-12);
      }
    }
  }
}

TEST(GparvUpperTest, DominanceViolationRejected) {
  CloneDecomposition dec;
  dec.components.push_back({1.0, 1.0, 0.0, std::nullopt});
  dec.beta = 1.0;
  EXPECT_THROW(GparvUpper(dec, 0.1, 1.0), ValidationError);
}

TEST(GparvLowerTest, KrrFourValueSupport) {
  const double eps0 = 1.0, eps = 0.2;
  const double e0 = std::exp(eps0), ee = std::exp(eps);
  const Kernel table = BuildTable(Spec(RandomizerKind::kKrr, eps0, 5));
  const Gparv g = GparvLower(table.RowDist("1"), table.RowDist("2"),
                             table.RowDist("3"), eps, eps0);
  ASSERT_EQ(g.atoms().size(), 4u);
  const double p = 1 / (e0 + 4);
  EXPECT_NEAR(AtomMassAt(g, e0 - ee), p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, 1 - e0 * ee), p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, 1 - ee), 2 * p, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, (1 - ee) / e0), e0 * p, 1e-14);
}

TEST(GparvLowerTest, KrrThreeSymbolsDropTheFlatValue) {
  // k = 3: the (1 - e^eps) group is empty; masses (p, p, e^{eps0} p).
  const double eps0 = 0.8, eps = 0.3;
  const double e0 = std::exp(eps0), ee = std::exp(eps);
  const Kernel table = BuildTable(Spec(RandomizerKind::kKrr, eps0, 3));
  const Gparv g = GparvLower(table.RowDist("1"), table.RowDist("2"),
                             table.RowDist("3"), eps, eps0);
  const double p = 1 / (e0 + 2);
  EXPECT_NEAR(AtomMassAt(g, 1 - ee), 0.0, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, (1 - ee) / e0), e0 * p, 1e-14);
  EXPECT_NEAR(g.Mean(), 1 - ee, 1e-12);
}

TEST(GparvLowerTest, EqualFirstRowsCollapse) {
  const FiniteDist a({"x", "y"}, {0.6, 0.4});
  const FiniteDist ref({"x", "y"}, {0.5, 0.5});
  const double eps = 0.4;
  const Gparv g = GparvLower(a, a, ref, eps, 1.0);
  // Values (1 - e^eps) a(y) / ref(y).
  EXPECT_NEAR(AtomMassAt(g, (1 - std::exp(eps)) * 1.2), 0.5, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, (1 - std::exp(eps)) * 0.8), 0.5, 1e-14);
  const Gparv degenerate = GparvLower(ref, ref, ref, eps, 1.0);
  ASSERT_EQ(degenerate.atoms().size(), 1u);
  EXPECT_NEAR(degenerate.atoms()[0].first, 1 - std::exp(eps), 1e-14);
}

TEST(GparvLaplaceUpperTest, SupportAndMass) {
  const double eps0 = 1.0, eps = 0.1;
  const Gparv g = GparvLaplaceUpper(eps0, eps);
  ASSERT_TRUE(g.continuous().has_value());
  EXPECT_NEAR(g.continuous()->weight, std::exp(-eps0 / 2), 1e-15);
  EXPECT_NEAR(g.continuous()->cdf->lo(), 1 - std::exp(eps0 + eps), 1e-12);
  EXPECT_NEAR(g.continuous()->cdf->hi(), std::exp(eps0) - std::exp(eps),
              1e-12);
  EXPECT_NEAR(AtomMassAt(g, 0.0), 1 - std::exp(-eps0 / 2), 1e-15);
  double mass = AtomMassAt(g, 0.0) + g.continuous()->weight;
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(GparvLaplaceUpperTest, MeanMatchesQuadratureOracle) {
  for (double eps0 : {0.6, 1.0, 2.0}) {
    for (double eps : {0.0, 0.3 * eps0, 0.9 * eps0}) {
      const Gparv g = GparvLaplaceUpper(eps0, eps);
      const auto& cdf = *g.continuous()->cdf;
      // E[X] = hi - integral of F over [lo, hi] (valid with endpoint atoms);
      // split at the interior knee where the CDF changes branch.
      const double knee = 1 - std::exp(eps);
      auto f = [&](double t) { return cdf.Cdf(t); };
      const double integral = Integrate(f, cdf.lo(), knee) +
                              Integrate(f, knee, cdf.hi());
      const double segment_mean = cdf.hi() - integral;
      EXPECT_NEAR(segment_mean, cdf.Mean(), 1e-9);
      EXPECT_NEAR(g.Mean(), 1 - std::exp(eps), 1e-10);
    }
  }
}

TEST(GparvLaplaceLowerTest, MeanAndSupport) {
  const double eps0 = 1.3, eps = 0.4;
  const Gparv g = GparvLaplaceLower(eps0, eps);
  EXPECT_NEAR(g.Mean(), 1 - std::exp(eps), 1e-12);
  EXPECT_NEAR(g.MinSupport(), std::exp(-eps0) - std::exp(eps), 1e-12);
  EXPECT_NEAR(g.MaxSupport(), std::exp(eps0) - std::exp(eps), 1e-12);
}

TEST(GparvStdCloneTest, LeftoverAtomAtZero) {
  const double eps0 = 0.9, eps = 0.2;
  const Gparv g = GparvStdClone(eps0, eps);
  EXPECT_NEAR(AtomMassAt(g, 0.0), 1 - std::exp(-eps0), 1e-14);
  EXPECT_NEAR(g.Mean(), 1 - std::exp(eps), 1e-12);
}

TEST(GparvStdCloneTest, Ln2PlugIn) {
  const Gparv g = GparvStdClone(std::log(2.0), 0.0);
  ASSERT_EQ(g.atoms().size(), 3u);
  EXPECT_NEAR(AtomMassAt(g, 4.0 / 3), 0.25, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, -4.0 / 3), 0.25, 1e-14);
  EXPECT_NEAR(AtomMassAt(g, 0.0), 0.5, 1e-14);
  EXPECT_NEAR(g.Mean(), 0.0, 1e-14);
}

TEST(GparvPropertyTest, MergingInvariance) {
  const double eps0 = 1.0;
  const Kernel table = BuildTable(Spec(RandomizerKind::kOue, eps0, 4));
  const CloneDecomposition primary = PrimaryOptimal(table, "1", "2");
  const CloneDecomposition simplified = Simplify(primary);
  for (double eps : {0.0, 0.5, 1.0}) {
    const Gparv a = GparvUpper(primary, eps, eps0);
    const Gparv b = GparvUpper(simplified, eps, eps0);
    ASSERT_EQ(a.atoms().size(), b.atoms().size());
    for (std::size_t i = 0; i < a.atoms().size(); ++i) {
      EXPECT_NEAR(a.atoms()[i].first, b.atoms()[i].first, 1e-11);
      EXPECT_NEAR(a.atoms()[i].second, b.atoms()[i].second, 1e-11);
    }
  }
}

TEST(GparvPropertyTest, ParallelLowerIsMixtureOfLowers) {
  const double eps0 = 1.1, eps = 0.25;
  const CloneDecomposition krr =
      LowerTripleDecomposition(Spec(RandomizerKind::kKrr, eps0, 6));
  const CloneDecomposition blh =
      LowerTripleDecomposition(Spec(RandomizerKind::kBlh, eps0, 3));
  const Gparv combined = GparvLowerFromDecomposition(
      Parallel({{0.4, krr}, {0.6, blh}}), eps, eps0);
  const Gparv mixed =
      MixGparvs({{0.4, GparvLowerFromDecomposition(krr, eps, eps0)},
                 {0.6, GparvLowerFromDecomposition(blh, eps, eps0)}});
  ASSERT_EQ(combined.atoms().size(), mixed.atoms().size());
  for (std::size_t i = 0; i < combined.atoms().size(); ++i) {
    EXPECT_NEAR(combined.atoms()[i].first, mixed.atoms()[i].first, 1e-11);
    EXPECT_NEAR(combined.atoms()[i].second, mixed.atoms()[i].second, 1e-11);
  }
}

TEST(GparvPropertyTest, DirectionReverseSwapsSign) {
  // Catalog mechanisms are direction-symmetric.
  const double eps0 = 1.0, eps = 0.3;
  const Gparv forward = GparvUpper(
      UpperDecomposition(Spec(RandomizerKind::kKrr, eps0, 10)), eps, eps0,
      Direction::kForward);
  const Gparv reverse = GparvUpper(
      UpperDecomposition(Spec(RandomizerKind::kKrr, eps0, 10)), eps, eps0,
      Direction::kReverse);
  ASSERT_EQ(forward.atoms().size(), reverse.atoms().size());
  for (std::size_t i = 0; i < forward.atoms().size(); ++i) {
    EXPECT_NEAR(forward.atoms()[i].first, reverse.atoms()[i].first, 1e-12);
    EXPECT_NEAR(forward.atoms()[i].second, reverse.atoms()[i].second, 1e-12);
  }
}

TEST(MixGparvsTest, RejectsTwoContinuousBranches) {
  const Gparv a = GparvLaplaceUpper(1.0, 0.1);
  const Gparv b = GparvLaplaceUpper(2.0, 0.1);
  EXPECT_THROW(MixGparvs({{0.5, a}, {0.5, b}}), ValidationError);
}

}  // namespace
}  // namespace shuffleamp
