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

#include "shuffleamp/catalog.h"

#include <cmath>

#include "shuffleamp/errors.h"

namespace shuffleamp {
namespace {

// k-RR rows grouped by outcome class {x1^0}, {x1^1}, {x2}, rest; exact for
// every k without materializing the k x k table.
CloneDecomposition KrrLowerTriple(int k, double eps0, bool changed) {
  const double e0 = std::exp(eps0);
  const double p = 1.0 / (e0 + k - 1);
  CloneDecomposition dec;
  dec.beta = 0.0;
  if (changed) {
    if (k == 2) {
      // x2 = x1^1.
      dec.components.push_back({e0 * p, p, p, std::nullopt});
      dec.components.push_back({p, e0 * p, e0 * p, std::nullopt});
      return dec;
    }
    dec.components.push_back({e0 * p, p, p, std::nullopt});
    dec.components.push_back({p, e0 * p, p, std::nullopt});
    dec.components.push_back({p, p, e0 * p, std::nullopt});
    if (k > 3) {
      const double rest = (k - 3) * p;
      dec.components.push_back({rest, rest, rest, std::nullopt});
    }
    return dec;
  }
  // Unchanged coordinate: x1^0 = x1^1 = x, x2 the next symbol.
  dec.components.push_back({e0 * p, e0 * p, p, std::nullopt});
  dec.components.push_back({p, p, e0 * p, std::nullopt});
  if (k > 2) {
    const double rest = (k - 2) * p;
    dec.components.push_back({rest, rest, rest, std::nullopt});
  }
  return dec;
}

// D -> infinity Hadamard response triple over the eight sign classes of
// (x1^0 . y, x1^1 . y, x2 . y) for linearly independent inputs.
CloneDecomposition HrAsymptoticLowerTriple(double eps0, bool changed) {
  const double h = std::exp(eps0 / 2);
  const double z = 0.5 * (h + 1.0 / h);
  auto row_mass = [&](int s) { return (s == 0 ? h : 1.0 / h); };
  CloneDecomposition dec;
  dec.beta = 0.0;
  for (int s0 = 0; s0 < 2; ++s0) {
    for (int s1 = 0; s1 < 2; ++s1) {
      if (!changed && s1 != s0) continue;
      for (int s2 = 0; s2 < 2; ++s2) {
        const double cells = changed ? 8.0 : 4.0;
        dec.components.push_back({row_mass(s0) / (cells * z),
                                  row_mass(s1) / (cells * z),
                                  row_mass(s2) / (cells * z), std::nullopt});
      }
    }
  }
  return dec;
}

CloneDecomposition TableLowerTriple(const Kernel& table,
                                    const std::string& x0,
                                    const std::string& x1,
                                    const std::string& x2) {
  return LowerBoundTriple(table.RowDist(x0), table.RowDist(x1),
                          table.RowDist(x2));
}

}  // namespace

CloneDecomposition UpperDecomposition(const RandomizerSpec& spec,
                                      bool changed) {
  switch (spec.kind) {
    case RandomizerKind::kKrr:
    case RandomizerKind::kBlh:
    case RandomizerKind::kRappor:
    case RandomizerKind::kOue:
    case RandomizerKind::kHr: {
      const PqrGamma pqr = ClosedFormPqr(spec);
      return changed ? FiveComponent(pqr, spec.eps0)
                     : FiveComponentEqualInputs(pqr, spec.eps0);
    }
    case RandomizerKind::kTabular: {
      auto [x0, x1] = CanonicalPair(spec);
      return Simplify(
          PrimaryOptimal(*spec.table, x0, changed ? x1 : x0));
    }
    case RandomizerKind::kLaplace01:
      throw ValidationError(
          "UpperDecomposition: laplace01 has no finite decomposition");
  }
  throw ValidationError("UpperDecomposition: unknown kind");
}

CloneDecomposition LowerTripleDecomposition(const RandomizerSpec& spec,
                                            bool changed) {
  spec.Validate();
  switch (spec.kind) {
    case RandomizerKind::kKrr:
      return KrrLowerTriple(*spec.k_or_d, spec.eps0, changed);
    case RandomizerKind::kBlh:
    case RandomizerKind::kRappor:
    case RandomizerKind::kOue: {
      RandomizerSpec concrete = spec;
      if (concrete.asymptotic()) concrete.k_or_d = 3;
      const Kernel table = BuildTable(concrete);
      const int d = *concrete.k_or_d;
      const std::string x0 = "1";
      const std::string x1 = changed ? "2" : "1";
      const std::string x2 = d >= 3 ? "3" : "2";
      return TableLowerTriple(table, x0, x1, x2);
    }
    case RandomizerKind::kHr: {
      if (spec.asymptotic()) return HrAsymptoticLowerTriple(spec.eps0, changed);
      const int d = *spec.k_or_d;
      const Kernel table = BuildTable(spec);
      if (d == 2) return TableLowerTriple(table, "1", "1", "1");
      const std::string x1 = changed ? "2" : "1";
      return TableLowerTriple(table, "1", x1, "3");
    }
    case RandomizerKind::kTabular:
    case RandomizerKind::kLaplace01:
      throw ValidationError(
          "LowerTripleDecomposition: unsupported kind " + ToString(spec.kind));
  }
  throw ValidationError("LowerTripleDecomposition: unknown kind");
}

}  // namespace shuffleamp
