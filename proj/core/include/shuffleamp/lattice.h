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

#ifndef SHUFFLEAMP_LATTICE_H_
#define SHUFFLEAMP_LATTICE_H_

#include <cstdint>
#include <vector>

#include "shuffleamp/gparv.h"

namespace shuffleamp {

// Probability masses on the integer lattice {(min_index + i) * step}.
struct LatticeDist {
  double step = 0.0;
  std::int64_t min_index = 0;
  std::vector<double> masses;

  double ValueAt(std::size_t i) const {
    return (min_index + static_cast<std::int64_t>(i)) * step;
  }
  double TotalMass() const;
};

enum class RoundMode { kRoundUp, kRoundDown };

// Largest zero-padded transform length attempted before SelfConvolve raises
// ResourceError (suggesting a larger step).
inline constexpr std::size_t kDefaultMaxTransformLength = std::size_t{1} << 26;

// Rounds every atom to the lattice: up to l*ceil(v/l) or down to
// l*floor(v/l); values within 1e-12 relative of an exact multiple snap to
// it, so exact multiples stay fixed under both modes. A continuous segment
// contributes per-cell masses CDF(u_{i+1}) - CDF(u_i) placed on the upper
// (round-up) or lower (round-down) cell endpoint.
LatticeDist Discretize(const Gparv& g, double step, RoundMode mode);

struct ConvolveStats {
  double mass_defect = 0.0;       // |1 - total mass| after the transform
  std::size_t transform_length = 0;
};

// Distribution of the sum of n independent copies, via a real FFT over a
// zero-padded buffer of power-of-two length >= n*(width-1)+1, raising the
// transform pointwise to the n-th power. Negative round-off masses are
// clamped to zero and never renormalized; the defect is reported.
LatticeDist SelfConvolve(const LatticeDist& d, std::int64_t n,
                         ConvolveStats* stats = nullptr,
                         std::size_t max_transform_length =
                             kDefaultMaxTransformLength);

// Sum of value * mass over lattice points with strictly positive value.
double PositivePartMean(const LatticeDist& d);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_LATTICE_H_
