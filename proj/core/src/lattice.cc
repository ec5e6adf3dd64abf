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

#include "shuffleamp/lattice.h"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "shuffleamp/errors.h"
#include "src/kahan.h"

namespace shuffleamp {
namespace {

// FFTW plan creation and destruction are not thread-safe.
std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

constexpr double kSnapTolerance = 1e-12;

std::int64_t LatticeIndex(double value, double step, RoundMode mode) {
  const double q = value / step;
  const double nearest = std::nearbyint(q);
  if (std::abs(q - nearest) <= kSnapTolerance * std::max(1.0, std::abs(q))) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(mode == RoundMode::kRoundUp ? std::ceil(q)
                                                               : std::floor(q));
}

// z^n by repeated squaring; |z| <= 1 for transforms of sub-probability
// vectors, so powers cannot overflow.
std::complex<double> ComplexPow(std::complex<double> z, std::int64_t n) {
  std::complex<double> result(1.0, 0.0);
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

}  // namespace

double LatticeDist::TotalMass() const {
  internal::KahanSum sum;
  for (double m : masses) sum.Add(m);
  return sum.Value();
}

LatticeDist Discretize(const Gparv& g, double step, RoundMode mode) {
  if (!(step > 0)) {
    throw ValidationError("Discretize: step must be positive");
  }
  std::int64_t lo_index = 0;
  std::int64_t hi_index = 0;
  bool have_range = false;
  auto widen = [&](std::int64_t k) {
    if (!have_range) {
      lo_index = hi_index = k;
      have_range = true;
    } else {
      lo_index = std::min(lo_index, k);
      hi_index = std::max(hi_index, k);
    }
  };
  for (const auto& [value, mass] : g.atoms()) {
    if (mass > 0) widen(LatticeIndex(value, step, mode));
  }
  std::int64_t seg_lo = 0, seg_hi = 0;
  const bool has_segment =
      g.continuous().has_value() && g.continuous()->weight > 0;
  if (has_segment) {
    const auto& cdf = *g.continuous()->cdf;
    if (mode == RoundMode::kRoundUp) {
      seg_lo = LatticeIndex(cdf.lo(), step, RoundMode::kRoundUp);
      seg_hi = LatticeIndex(cdf.hi(), step, RoundMode::kRoundUp);
    } else {
      seg_lo = LatticeIndex(cdf.lo(), step, RoundMode::kRoundDown);
      seg_hi = LatticeIndex(cdf.hi(), step, RoundMode::kRoundDown);
    }
    widen(seg_lo);
    widen(seg_hi);
  }
  if (!have_range) {
    throw ValidationError("Discretize: distribution has no mass");
  }

  LatticeDist out;
  out.step = step;
  out.min_index = lo_index;
  out.masses.assign(static_cast<std::size_t>(hi_index - lo_index + 1), 0.0);
  for (const auto& [value, mass] : g.atoms()) {
    if (mass <= 0) continue;
    out.masses[LatticeIndex(value, step, mode) - lo_index] += mass;
  }
  if (has_segment) {
    // The outer cells absorb the full CDF range so endpoint atoms sitting
    // within the snap tolerance of a lattice point are never dropped.
    const auto& seg = *g.continuous();
    const auto& cdf = *seg.cdf;
    if (mode == RoundMode::kRoundUp) {
      // Cell (u_{k-1}, u_k] collapses onto u_k.
      double prev = 0.0;
      for (std::int64_t k = seg_lo; k <= seg_hi; ++k) {
        const double cur = k == seg_hi ? 1.0 : cdf.Cdf(k * step);
        out.masses[k - lo_index] += seg.weight * (cur - prev);
        prev = cur;
      }
    } else {
      // Cell [u_k, u_{k+1}) collapses onto u_k; left limits keep mass
      // sitting exactly on a lattice point in place.
      double prev = 0.0;
      for (std::int64_t k = seg_lo; k <= seg_hi; ++k) {
        const double cur = k == seg_hi ? 1.0 : cdf.CdfLeft((k + 1) * step);
        out.masses[k - lo_index] += seg.weight * (cur - prev);
        prev = cur;
      }
    }
  }
  return out;
}

LatticeDist SelfConvolve(const LatticeDist& d, std::int64_t n,
                         ConvolveStats* stats,
                         std::size_t max_transform_length) {
  if (n < 1) {
    throw ValidationError("SelfConvolve: n must be >= 1");
  }
  // Trim zero margins so the padded transform stays as small as possible.
  std::size_t first = 0;
  std::size_t last = d.masses.size();
  while (first < last && d.masses[first] == 0.0) ++first;
  while (last > first && d.masses[last - 1] == 0.0) --last;
  if (first == last) {
    throw ValidationError("SelfConvolve: distribution has no mass");
  }
  const std::size_t width = last - first;
  const std::int64_t base = d.min_index + static_cast<std::int64_t>(first);

  if (n == 1) {
    LatticeDist out;
    out.step = d.step;
    out.min_index = base;
    out.masses.assign(d.masses.begin() + first, d.masses.begin() + last);
    if (stats != nullptr) *stats = {0.0, 0};
    return out;
  }

  const std::size_t out_len = static_cast<std::size_t>(n) * (width - 1) + 1;
  std::size_t transform_len = 1;
  while (transform_len < out_len) transform_len <<= 1;
  if (transform_len > max_transform_length) {
    std::ostringstream msg;
    msg << "SelfConvolve: transform length " << transform_len
        << " exceeds the limit " << max_transform_length
        << "; increase the lattice step l";
    throw ResourceError(msg.str());
  }

  double* buffer = fftw_alloc_real(transform_len);
  fftw_complex* spectrum = fftw_alloc_complex(transform_len / 2 + 1);
  if (buffer == nullptr || spectrum == nullptr) {
    fftw_free(buffer);
    fftw_free(spectrum);
    throw ResourceError("SelfConvolve: allocation failed; increase step l");
  }
  fftw_plan forward, backward;
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(transform_len), buffer,
                                   spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(transform_len), spectrum,
                                    buffer, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < transform_len; ++i) buffer[i] = 0.0;
  for (std::size_t i = 0; i < width; ++i) buffer[i] = d.masses[first + i];
  fftw_execute(forward);
  for (std::size_t i = 0; i <= transform_len / 2; ++i) {
    const std::complex<double> z(spectrum[i][0], spectrum[i][1]);
    const std::complex<double> p = ComplexPow(z, n);
    spectrum[i][0] = p.real();
    spectrum[i][1] = p.imag();
  }
  fftw_execute(backward);

  LatticeDist out;
  out.step = d.step;
  out.min_index = n * base;
  out.masses.resize(out_len);
  const double scale = 1.0 / static_cast<double>(transform_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double v = buffer[i] * scale;
    out.masses[i] = v > 0.0 ? v : 0.0;
  }
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(buffer);
  fftw_free(spectrum);

  if (stats != nullptr) {
    stats->mass_defect = std::abs(1.0 - out.TotalMass());
    stats->transform_length = transform_len;
  }
  return out;
}

double PositivePartMean(const LatticeDist& d) {
  internal::KahanSum sum;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    const std::int64_t index = d.min_index + static_cast<std::int64_t>(i);
    if (index > 0 && d.masses[i] > 0.0) {
      sum.Add(index * d.step * d.masses[i]);
    }
  }
  return sum.Value();
}

}  // namespace shuffleamp
