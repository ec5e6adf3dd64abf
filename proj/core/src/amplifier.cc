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

#include "shuffleamp/amplifier.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "shuffleamp/errors.h"
#include "src/kahan.h"

namespace shuffleamp {
namespace {

// Bisection tolerance used while refining the eps0 grid boundary. Finer than
// the public FindEpsilon default so that one-grid-step decisions at small
// eps_target are not dominated by the eps bracket width.
constexpr double kEps0RefineTol = 1e-4;

double MaxDelta(const std::vector<Gparv>& gs, std::int64_t n, double step,
                RoundMode mode, std::size_t max_len, double short_circuit_above,
                double* mass_defect = nullptr) {
  double worst = 0.0;
  double defect = 0.0;
  for (const auto& g : gs) {
    BoundReport report = DeltaBound(g, n, step, mode, max_len);
    const double value = mode == RoundMode::kRoundUp ? *report.delta_upper
                                                     : *report.delta_lower;
    defect = std::max(defect, report.mass_defect);
    worst = std::max(worst, value);
    if (worst > short_circuit_above) break;
  }
  if (mass_defect != nullptr) *mass_defect = defect;
  return worst;
}

}  // namespace

double DefaultStep(double eps0) { return (std::exp(eps0) - 1.0) / 1000.0; }

BoundReport DeltaBound(const Gparv& g, std::int64_t n, double step,
                       RoundMode mode, std::size_t max_transform_length) {
  if (n < 1) {
    throw ValidationError("DeltaBound: n must be >= 1");
  }
  if (!(step > 0)) {
    throw ValidationError("DeltaBound: step must be positive");
  }
  BoundReport report;
  report.eps = g.eps();
  report.eps0 = g.eps0();
  report.n = n;
  report.step = step;
  report.discretization_slack = static_cast<double>(n) * step;
  const double a = std::exp(g.eps()) - 1.0;
  const double b = (std::exp(g.eps0()) - 1.0) * (std::exp(g.eps()) + 1.0);
  if (a > 0.0 && step <= 2 * a * a / (b * b)) {
    report.hoeffding_slack =
        static_cast<double>(n) * step *
        std::exp(-(2 * a * a / (b * b) - step) * static_cast<double>(n));
  }

  double delta = 0.0;
  if (g.MaxSupport() > 0.0) {
    ConvolveStats stats;
    const LatticeDist single = Discretize(g, step, mode);
    const LatticeDist convolved =
        SelfConvolve(single, n, &stats, max_transform_length);
    delta = PositivePartMean(convolved) / static_cast<double>(n);
    report.mass_defect = stats.mass_defect;
  }
  // With every value <= 0 the rounded-up lattice is still non-positive, so
  // both modes give exactly zero without running a transform.
  if (mode == RoundMode::kRoundUp) {
    report.delta_upper = delta;
  } else {
    report.delta_lower = delta;
  }
  return report;
}

double DeltaExactSmallN(const Gparv& g, int n) {
  if (n < 1 || n > 12) {
    throw ValidationError("DeltaExactSmallN: n must be in [1, 12]");
  }
  if (g.continuous().has_value() && g.continuous()->weight > 0) {
    throw ValidationError("DeltaExactSmallN: continuous segments unsupported");
  }
  if (g.atoms().size() > 8) {
    throw ValidationError("DeltaExactSmallN: at most 8 atoms supported");
  }
  // n! / prod(counts!) via an exact factorial table (12! < 2^53).
  double factorial[13];
  factorial[0] = 1.0;
  for (int i = 1; i <= 12; ++i) factorial[i] = factorial[i - 1] * i;

  const auto& atoms = g.atoms();
  internal::KahanSum total;
  std::vector<int> counts(atoms.size(), 0);
  // Enumerate all count vectors summing to n.
  auto recurse = [&](auto&& self, std::size_t atom, int remaining) -> void {
    if (atom + 1 == counts.size()) {
      counts[atom] = remaining;
      double coef = factorial[n];
      double prob = 1.0;
      double sum_value = 0.0;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        coef /= factorial[counts[i]];
        prob *= std::pow(atoms[i].second, counts[i]);
        sum_value += counts[i] * atoms[i].first;
      }
      if (sum_value > 0.0) total.Add(coef * prob * sum_value);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[atom] = c;
      self(self, atom + 1, remaining - c);
    }
  };
  recurse(recurse, 0, n);
  return total.Value() / n;
}

double FindEpsilon(const GparvFamily& family, double eps0, std::int64_t n,
                   double delta_target, double step, double tol,
                   RoundMode mode, std::size_t max_transform_length) {
  if (!(delta_target > 0)) {
    throw ValidationError("FindEpsilon: delta_target must be positive");
  }
  auto delta_at = [&](double eps) {
    return MaxDelta(family(eps), n, step, mode, max_transform_length,
                    delta_target);
  };
  if (delta_at(0.0) <= delta_target) return 0.0;
  // Guard: at eps = eps0 the support is non-positive and delta is 0.
  if (delta_at(eps0) > delta_target) {
    throw ValidationError(
        "FindEpsilon: delta(eps0) exceeds the target; the family violates "
        "the support bound");
  }
  double lo = 0.0;
  double hi = eps0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (delta_at(mid) <= delta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double FindEps0(const AmplificationModel& model, std::int64_t n,
                double delta_target, double eps_target, double grid_step,
                double max_eps0, std::size_t max_transform_length) {
  if (!(eps_target >= 0)) {
    throw ValidationError("FindEps0: eps_target must be non-negative");
  }
  const std::int64_t max_grid =
      static_cast<std::int64_t>(std::floor(max_eps0 / grid_step));
  // Cheap one-convolution screen: the amplified epsilon is at or below the
  // target iff delta at the target clears delta_target (delta is
  // nonincreasing in eps). The exact grid decision below re-checks with the
  // full bisection.
  auto screen = [&](std::int64_t g) {
    const double eps0 = g * grid_step;
    if (eps_target >= eps0) return true;
    return MaxDelta(model.upper(eps0, eps_target), n, model.step(eps0),
                    RoundMode::kRoundUp, max_transform_length,
                    delta_target) <= delta_target;
  };
  auto exact = [&](std::int64_t g) {
    const double eps0 = g * grid_step;
    const double achieved = FindEpsilon(
        [&](double eps) { return model.upper(eps0, eps); }, eps0, n,
        delta_target, model.step(eps0), kEps0RefineTol, RoundMode::kRoundUp,
        max_transform_length);
    return achieved <= eps_target + 1e-12;
  };

  if (!screen(1) && !exact(1)) {
    throw ValidationError(
        "FindEps0: no grid point achieves the target epsilon");
  }
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  while (hi <= max_grid && screen(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > max_grid) {
    if (screen(max_grid)) {
      lo = max_grid;
      hi = max_grid + 1;
    } else {
      hi = max_grid + 1;
    }
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (screen(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Resolve the boundary with the full bisection-based predicate.
  std::int64_t g = lo;
  while (g >= 1 && !exact(g)) --g;
  if (g < 1) {
    throw ValidationError(
        "FindEps0: no grid point achieves the target epsilon");
  }
  while (g + 1 <= max_grid && exact(g + 1)) ++g;
  if (g >= max_grid) {
    std::ostringstream msg;
    msg << "FindEps0: grid exhausted at eps0 = " << max_eps0
        << " with the target still achievable; raise the scan range";
    throw ValidationError(msg.str());
  }
  return g * grid_step;
}

std::vector<CurveRow> Curve(const AmplificationModel& model, std::int64_t n,
                            double delta_target,
                            const std::vector<double>& eps0_values,
                            int workers, std::size_t max_transform_length) {
  auto row_at = [&](double eps0) {
    CurveRow row;
    row.eps0 = eps0;
    const double step = model.step(eps0);
    row.eps_upper = FindEpsilon(
        [&](double eps) { return model.upper(eps0, eps); }, eps0, n,
        delta_target, step, 1e-3, RoundMode::kRoundUp, max_transform_length);
    row.eps_lower = FindEpsilon(
        [&](double eps) { return model.lower(eps0, eps); }, eps0, n,
        delta_target, step, 1e-3, RoundMode::kRoundDown, max_transform_length);
    return row;
  };
  std::vector<CurveRow> rows(eps0_values.size());
  if (workers <= 1 || eps0_values.size() <= 1) {
    for (std::size_t i = 0; i < eps0_values.size(); ++i) {
      rows[i] = row_at(eps0_values[i]);
    }
    return rows;
  }
  std::atomic<std::size_t> next{0};
  // Bounded fan-out: at most `workers` rows in flight.
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr error;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= eps0_values.size()) return;
        try {
          rows[i] = row_at(eps0_values[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace shuffleamp
