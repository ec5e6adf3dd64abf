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

#ifndef SHUFFLEAMP_AMPLIFIER_H_
#define SHUFFLEAMP_AMPLIFIER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "shuffleamp/gparv.h"
#include "shuffleamp/lattice.h"

namespace shuffleamp {

// delta values with the grid parameters and discretization-error
// certificate. discretization_slack is the coarse n*l bound on the gap
// E[conv(rounded)]_+ - E[conv(true)]_+; hoeffding_slack is the refined
// n*l*exp(-(2a^2/b^2 - l) n) bound, present when l <= 2a^2/b^2 with
// a = e^eps - 1 and b = (e^eps0 - 1)(e^eps + 1).
struct BoundReport {
  std::optional<double> delta_upper;
  std::optional<double> delta_lower;
  double eps = 0.0;
  double eps0 = 0.0;
  std::int64_t n = 0;
  double step = 0.0;
  double mass_defect = 0.0;
  double discretization_slack = 0.0;
  std::optional<double> hoeffding_slack;
};

// delta = PositivePartMean(SelfConvolve(Discretize(g, step, mode), n)) / n.
// Round-up certifies an upper bound on the divergence of the reduction
// pair, round-down a lower estimate; the result lands in delta_upper or
// delta_lower accordingly. Exactly zero (no transform run) when the support
// of g is non-positive, which covers every eps >= eps0.
BoundReport DeltaBound(const Gparv& g, std::int64_t n, double step,
                       RoundMode mode,
                       std::size_t max_transform_length =
                           kDefaultMaxTransformLength);

// Exact (1/n) E[sum of n copies]_+ by multinomial enumeration. Requires
// n <= 12, at most 8 atoms and no continuous segment.
double DeltaExactSmallN(const Gparv& g, int n);

// A family of amplification variables indexed by eps. Returning several
// variables means the bound is their pointwise max (used when sweeping
// worst-case input pairs of a tabular randomizer).
using GparvFamily = std::function<std::vector<Gparv>(double eps)>;

// Default lattice step (e^{eps0} - 1) / 1000.
double DefaultStep(double eps0);

// Smallest eps on the bisection grid over [0, eps0] with
// delta(eps) <= delta_target, within absolute tolerance tol. delta is
// evaluated with the given rounding mode (round-up for certified upper
// curves, round-down for lower curves).
double FindEpsilon(const GparvFamily& family, double eps0, std::int64_t n,
                   double delta_target, double step, double tol = 1e-3,
                   RoundMode mode = RoundMode::kRoundUp,
                   std::size_t max_transform_length =
                       kDefaultMaxTransformLength);

// Upper/lower amplification variables of one mechanism configuration as a
// function of (eps0, eps), with the lattice step to use at each eps0.
struct AmplificationModel {
  std::function<std::vector<Gparv>(double eps0, double eps)> upper;
  std::function<std::vector<Gparv>(double eps0, double eps)> lower;
  std::function<double(double eps0)> step = DefaultStep;
};

// Largest eps0 on the grid {grid_step, 2 grid_step, ...} whose amplified
// epsilon (FindEpsilon on the model's upper family) stays at or below
// eps_target. Throws ValidationError when no grid point qualifies or the
// whole scanned range does.
double FindEps0(const AmplificationModel& model, std::int64_t n,
                double delta_target, double eps_target,
                double grid_step = 0.01, double max_eps0 = 16.0,
                std::size_t max_transform_length =
                    kDefaultMaxTransformLength);

struct CurveRow {
  double eps0 = 0.0;
  double eps_upper = 0.0;
  double eps_lower = 0.0;
};

// Per eps0: eps_upper from the round-up upper family and eps_lower from the
// round-down lower family. workers > 1 fans the grid out across threads;
// results are ordered by input position either way.
std::vector<CurveRow> Curve(const AmplificationModel& model, std::int64_t n,
                            double delta_target,
                            const std::vector<double>& eps0_values,
                            int workers = 1,
                            std::size_t max_transform_length =
                                kDefaultMaxTransformLength);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_AMPLIFIER_H_
