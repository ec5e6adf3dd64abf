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

#ifndef SHUFFLEAMP_GPARV_H_
#define SHUFFLEAMP_GPARV_H_

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "shuffleamp/decomposition.h"
#include "shuffleamp/finite_dist.h"

namespace shuffleamp {

// Which hockey-stick order the amplification variable targets. Reverse swaps
// the roles of the two neighboring inputs. (epsilon, delta)-
// indistinguishability takes the max over both orders; the catalog
// mechanisms are direction-symmetric.
enum class Direction { kForward, kReverse };

// Right-continuous CDF of an absolutely continuous (up to endpoint atoms)
// distribution on [lo, hi].
class AnalyticCdf {
 public:
  virtual ~AnalyticCdf() = default;
  virtual double lo() const = 0;
  virtual double hi() const = 0;
  virtual double Cdf(double t) const = 0;      // Pr[X <= t]
  virtual double CdfLeft(double t) const = 0;  // Pr[X < t]
  virtual double Mean() const = 0;
};

struct ContinuousSegment {
  double weight = 0.0;
  std::shared_ptr<const AnalyticCdf> cdf;
};

// The amplification random variable: finite atoms plus an optional analytic
// continuous segment. Construction validates unit total mass and the mean
// identity E[G] = 1 - e^eps.
class Gparv {
 public:
  enum class Kind { kUpper, kLower };

  Gparv(std::vector<std::pair<double, double>> atoms,
        std::optional<ContinuousSegment> continuous, double eps0, double eps,
        Kind kind);

  // (value, mass) pairs sorted by value, equal values coalesced.
  const std::vector<std::pair<double, double>>& atoms() const {
    return atoms_;
  }
  const std::optional<ContinuousSegment>& continuous() const {
    return continuous_;
  }
  double eps0() const { return eps0_; }
  double eps() const { return eps_; }
  Kind kind() const { return kind_; }

  double Mean() const;
  double MinSupport() const;
  double MaxSupport() const;

 private:
  std::vector<std::pair<double, double>> atoms_;
  std::optional<ContinuousSegment> continuous_;
  double eps0_;
  double eps_;
  Kind kind_;
};

// Support interval [1 - e^{eps0+eps}, e^{eps0} - e^{eps}] guaranteed for
// upper-bound variables built from eps0-LDP sources.
std::pair<double, double> Property2Bounds(double eps0, double eps);

// Upper-bound variable of a decomposition: one atom (a - e^eps b) / c with
// mass c per component (reverse direction swaps a and b), plus an atom at 0
// with the leftover mass beta. A component with c = 0 but a + b > 0 violates
// absolute continuity and is rejected.
Gparv GparvUpper(const CloneDecomposition& dec, double eps, double eps0,
                 Direction direction = Direction::kForward);

// Lower-bound variable of Theorem-style neighboring datasets
// (x1^0, x2, ..., x2) vs (x1^1, x2, ..., x2): atom (a0(y) - e^eps a1(y))
// / a2(y) with mass a2(y).
Gparv GparvLower(const FiniteDist& a0, const FiniteDist& a1,
                 const FiniteDist& a2, double eps, double eps0);

// Same construction from a beta = 0 triple decomposition (used for joint and
// parallel compositions of lower-bound triples).
Gparv GparvLowerFromDecomposition(const CloneDecomposition& triple, double eps,
                                  double eps0);

// Laplace mechanism on {0,1}: continuous segment of weight
// g = e^{-eps0/2} carrying the scaled four-branch CDF, plus atom (0, 1-g).
Gparv GparvLaplaceUpper(double eps0, double eps);

// Lower-bound variable for the Laplace mechanism on {0,1} with datasets
// (0, 1, ..., 1) vs (1, 1, ..., 1): e^{eps0(|y-1|-|y|)} - e^{eps} with
// y ~ Laplace(mean 1, scale 1/eps0), in closed form.
Gparv GparvLaplaceLower(double eps0, double eps);

// The three-point standard-clone reduction pair fed through the histogram
// expectation identity.
Gparv GparvStdClone(double eps0, double eps,
                    Direction direction = Direction::kForward);

// The two-component general-clone decomposition behind GparvStdClone.
CloneDecomposition StdCloneDecomposition(double eps0);

// Weighted mixture; the amplification variable of a parallel composition is
// the p_i-mixture of the branch variables. At most one branch may carry a
// continuous segment.
Gparv MixGparvs(const std::vector<std::pair<double, Gparv>>& parts);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_GPARV_H_
