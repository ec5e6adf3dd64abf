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

#ifndef SHUFFLEAMP_DECOMPOSITION_H_
#define SHUFFLEAMP_DECOMPOSITION_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shuffleamp/finite_dist.h"
#include "shuffleamp/randomizers.h"

namespace shuffleamp {

// Tolerance on the mass constraints of a clone decomposition.
inline constexpr double kDecompositionTolerance = 1e-10;
// Two ratio pairs merge iff both coordinates agree within this relative
// tolerance.
inline constexpr double kRatioMergeTolerance = 1e-9;

// One shared component: mass a under R(x1^0), b under R(x1^1), and c under
// the common part of every R(x_i).
struct CloneComponent {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  // Ratio pair (a/c, b/c), set by the merging operations.
  std::optional<std::pair<double, double>> tag;
};

// A general-clone decomposition: shared components plus leftover mass beta.
// Valid instances satisfy sum(a) = 1, sum(b) = 1, beta + sum(c) = 1.
struct CloneDecomposition {
  std::vector<CloneComponent> components;
  double beta = 0.0;

  // Total variation similarity gamma = sum of c = 1 - beta.
  double gamma() const;
};

struct Diagnostics {
  bool pass = true;
  double max_violation = 0.0;
  std::vector<std::string> violations;
};

// One component per outcome y: a = R(x0)(y), b = R(x1)(y),
// c = inf over inputs of R(x)(y); beta = 1 - sum(c). Outcomes with zero mass
// under every input are dropped. x0 == x1 is allowed and models a coordinate
// whose input is unchanged between the neighboring datasets.
CloneDecomposition PrimaryOptimal(const Kernel& kernel, std::string_view x0,
                                  std::string_view x1);

// Merges components sharing the ratio pair (a/c, b/c); beta is unchanged and
// the induced amplification random variable is identical. Components with
// c = 0 must have a = b = 0.
CloneDecomposition Simplify(const CloneDecomposition& dec);

// The five-component form [(e^eps0 p, p, p), (p, e^eps0 p, p),
// (e^eps0 q, e^eps0 q, q), (r, r, r)] with beta = 1 - 2p - q - r; zero-mass
// components are dropped.
CloneDecomposition FiveComponent(const PqrGamma& pqr, double eps0);

// Closed-form decomposition of a catalog mechanism at an unchanged input
// pair (x0 == x1): the ratio-e^eps0 class carries mass p + q, the ratio-1
// class p + r, and a = b componentwise.
CloneDecomposition FiveComponentEqualInputs(const PqrGamma& pqr, double eps0);

// Cartesian product: components are all tuples with a = prod a_i,
// b = prod b_i, c = prod c_i; beta = 1 - prod gamma_i; ratio-merged.
CloneDecomposition Joint(const std::vector<CloneDecomposition>& decs);

// Weighted combination: the union of the component lists scaled by the
// weights; beta = sum p_i beta_i; ratio-merged. Weights must be non-negative
// and sum to 1 within 1e-9.
CloneDecomposition Parallel(
    const std::vector<std::pair<double, CloneDecomposition>>& weighted);

// Reports every violated mass constraint with its magnitude; passes iff all
// constraints hold within kDecompositionTolerance.
Diagnostics Validate(const CloneDecomposition& dec);

// Decomposition of the constant mechanism (single component a = b = c = 1,
// beta = 0); the "bot" branch of Poisson subsampling.
CloneDecomposition ConstantDecomposition();

// The lower-bound triple of distributions (rows at x1^0, x1^1 and the value
// x2 shared by users 2..n) expressed in decomposition form with beta = 0:
// one component per outcome with a = a0(y), b = a1(y), c = a2(y).
CloneDecomposition LowerBoundTriple(const FiniteDist& a0, const FiniteDist& a1,
                                    const FiniteDist& a2);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_DECOMPOSITION_H_
