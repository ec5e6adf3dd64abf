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

#ifndef SHUFFLEAMP_RANDOMIZERS_H_
#define SHUFFLEAMP_RANDOMIZERS_H_

#include <optional>
#include <string>

#include "shuffleamp/finite_dist.h"

namespace shuffleamp {

enum class RandomizerKind {
  kKrr,
  kBlh,
  kRappor,
  kOue,
  kHr,
  kLaplace01,
  kTabular,
};

std::string ToString(RandomizerKind kind);

// A local randomizer description. For kKrr, k_or_d is the alphabet size k;
// for kBlh/kRappor/kOue/kHr it is the input domain size D, and leaving it
// unset selects the asymptotic (D >> 1) closed forms. kLaplace01 takes no
// domain size. kTabular carries an explicit kernel that must be eps0-LDP.
struct RandomizerSpec {
  RandomizerKind kind = RandomizerKind::kKrr;
  double eps0 = 0.0;
  std::optional<int> k_or_d;
  std::optional<Kernel> table;

  bool asymptotic() const { return !k_or_d.has_value(); }

  // Throws ValidationError when the spec is malformed (eps0 <= 0, k < 2,
  // HR domain not a power of two, tabular kernel failing the LDP check).
  void Validate() const;
};

// Masses of the five-component simplified optimal decomposition: components
// with ratio pairs (e^eps0, 1), (1, e^eps0) carry mass p each, the
// (e^eps0, e^eps0) component carries q, the (1, 1) component carries r, and
// beta = 1 - 2p - q - r is the leftover.
struct PqrGamma {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;

  double gamma() const { return 2 * p + q + r; }
  double beta() const { return 1.0 - gamma(); }
};

// Closed-form (p, q, r) for the catalog mechanisms: exact domain-dependent
// values when k_or_d is set, asymptotic values otherwise. Unsupported for
// kLaplace01 and kTabular.
PqrGamma ClosedFormPqr(const RandomizerSpec& spec);

// Explicit probability table. Supported for kKrr and kTabular at any size
// and for kBlh/kRappor/kOue/kHr while the output space stays at or below
// 2^20 entries; larger requests raise ResourceError.
Kernel BuildTable(const RandomizerSpec& spec);

// Canonical distinct input pair used for the catalog mechanisms (all are
// input-symmetric). HR with D = 2 has a single admissible input, so both
// labels coincide there.
std::pair<std::string, std::string> CanonicalPair(const RandomizerSpec& spec);

// CDF of the privacy amplification random variable L of the Laplace
// mechanism on {0,1}, evaluated at t. Four branches with knees at
// g(1-e^{eps0+eps}), g(1-e^{eps}), g(e^{eps0}-e^{eps}) where g = e^{-eps0/2}.
double Laplace01CdfParv(double eps0, double eps, double t);

// Parses the tabular-kernel JSON document
//   {"inputs": [...], "outputs": [...], "rows": [[...], ...]}
// with row-major probabilities. Rows whose sums deviate from 1 by more than
// 1e-9 are rejected; accepted rows are normalized exactly. The resulting
// kernel must satisfy eps0-LDP within ratio slack 1e-9.
Kernel LoadTabularKernel(const std::string& json_text, double eps0);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_RANDOMIZERS_H_
