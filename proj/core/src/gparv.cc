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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shuffleamp/errors.h"
#include "shuffleamp/randomizers.h"
#include "src/kahan.h"

namespace shuffleamp {
namespace {

constexpr double kMassCheckTolerance = 1e-10;
constexpr double kMeanCheckTolerance = 1e-9;

std::vector<std::pair<double, double>> CoalesceAtoms(
    std::vector<std::pair<double, double>> atoms, double eps0, double eps) {
  std::sort(atoms.begin(), atoms.end());
  const double tol = 1e-12 * std::exp(eps0 + eps);
  std::vector<std::pair<double, double>> out;
  for (const auto& [value, mass] : atoms) {
    if (!out.empty() && value - out.back().first <= tol) {
      out.back().second += mass;
    } else {
      out.emplace_back(value, mass);
    }
  }
  return out;
}

class LaplaceUpperCdf : public AnalyticCdf {
 public:
  LaplaceUpperCdf(double eps0, double eps)
      : eps0_(eps0),
        eps_(eps),
        g_(std::exp(-eps0 / 2)),
        lo_(1.0 - std::exp(eps0 + eps)),
        knee_(1.0 - std::exp(eps)),
        hi_(std::exp(eps0) - std::exp(eps)) {}

  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  double Cdf(double t) const override {
    return Laplace01CdfParv(eps0_, eps_, g_ * t);
  }
  double CdfLeft(double t) const override {
    // Differs from Cdf only at the endpoint atoms of the scaled variable.
    if (t <= lo_) return 0.0;
    if (t <= knee_) return 0.5 * std::sqrt(std::exp(eps_) / (1.0 - t));
    if (t <= hi_) return 1.0 - 0.5 / std::sqrt(t + std::exp(eps_));
    return 1.0;
  }
  double Mean() const override { return (1.0 - std::exp(eps_)) / g_; }

 private:
  double eps0_, eps_, g_, lo_, knee_, hi_;
};

class LaplaceLowerCdf : public AnalyticCdf {
 public:
  LaplaceLowerCdf(double eps0, double eps)
      : eps_(eps),
        half_g_(0.5 * std::exp(-eps0 / 2)),
        lo_(std::exp(-eps0) - std::exp(eps)),
        hi_(std::exp(eps0) - std::exp(eps)) {}

  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  double Cdf(double t) const override {
    if (t < lo_) return 0.0;
    if (t < hi_) return 1.0 - half_g_ / std::sqrt(t + std::exp(eps_));
    return 1.0;
  }
  double CdfLeft(double t) const override {
    if (t <= lo_) return 0.0;
    if (t <= hi_) return 1.0 - half_g_ / std::sqrt(t + std::exp(eps_));
    return 1.0;
  }
  double Mean() const override { return 1.0 - std::exp(eps_); }

 private:
  double eps_, half_g_, lo_, hi_;
};

Gparv FromDecomposition(const CloneDecomposition& dec, double eps, double eps0,
                        Direction direction, Gparv::Kind kind) {
  const Diagnostics diag = Validate(dec);
  if (!diag.pass) {
    std::ostringstream msg;
    msg << "GparvUpper: invalid decomposition (" << diag.violations.front()
        << ")";
    throw ValidationError(msg.str());
  }
  const double ee = std::exp(eps);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(dec.components.size() + 1);
  for (const auto& comp : dec.components) {
    const double a = direction == Direction::kForward ? comp.a : comp.b;
    const double b = direction == Direction::kForward ? comp.b : comp.a;
    if (comp.c <= 0.0) {
      if (a == 0.0 && b == 0.0) continue;
      throw ValidationError(
          "GparvUpper: component with c = 0 carries mass under the first "
          "user's rows; the numerator is not absolutely continuous w.r.t. "
          "the shared part");
    }
    atoms.emplace_back((a - ee * b) / comp.c, comp.c);
  }
  if (dec.beta > 0.0) atoms.emplace_back(0.0, dec.beta);
  return Gparv(std::move(atoms), std::nullopt, eps0, eps, kind);
}

}  // namespace

Gparv::Gparv(std::vector<std::pair<double, double>> atoms,
             std::optional<ContinuousSegment> continuous, double eps0,
             double eps, Kind kind)
    : atoms_(CoalesceAtoms(std::move(atoms), eps0, eps)),
      continuous_(std::move(continuous)),
      eps0_(eps0),
      eps_(eps),
      kind_(kind) {
  internal::KahanSum mass;
  for (const auto& [value, m] : atoms_) {
    if (!(m >= 0.0)) {
      throw ValidationError("Gparv: negative atom mass");
    }
    mass.Add(m);
  }
  if (continuous_.has_value()) {
    if (!(continuous_->weight >= 0.0) || continuous_->cdf == nullptr) {
      throw ValidationError("Gparv: malformed continuous segment");
    }
    mass.Add(continuous_->weight);
  }
  if (std::abs(mass.Value() - 1.0) > kMassCheckTolerance) {
    std::ostringstream msg;
    msg << "Gparv: total mass " << mass.Value() << ", expected 1";
    throw ValidationError(msg.str());
  }
  const double expected_mean = 1.0 - std::exp(eps_);
  if (std::abs(Mean() - expected_mean) > kMeanCheckTolerance) {
    std::ostringstream msg;
    msg << "Gparv: mean " << Mean() << " differs from 1 - e^eps = "
        << expected_mean;
    throw ValidationError(msg.str());
  }
}

double Gparv::Mean() const {
  internal::KahanSum sum;
  for (const auto& [value, m] : atoms_) sum.Add(value * m);
  if (continuous_.has_value()) {
    sum.Add(continuous_->weight * continuous_->cdf->Mean());
  }
  return sum.Value();
}

double Gparv::MinSupport() const {
  double lo = std::numeric_limits<double>::infinity();
  if (!atoms_.empty()) lo = atoms_.front().first;
  if (continuous_.has_value() && continuous_->weight > 0) {
    lo = std::min(lo, continuous_->cdf->lo());
  }
  return lo;
}

double Gparv::MaxSupport() const {
  double hi = -std::numeric_limits<double>::infinity();
  if (!atoms_.empty()) hi = atoms_.back().first;
  if (continuous_.has_value() && continuous_->weight > 0) {
    hi = std::max(hi, continuous_->cdf->hi());
  }
  return hi;
}

std::pair<double, double> Property2Bounds(double eps0, double eps) {
  return {1.0 - std::exp(eps0 + eps), std::exp(eps0) - std::exp(eps)};
}

Gparv GparvUpper(const CloneDecomposition& dec, double eps, double eps0,
                 Direction direction) {
  return FromDecomposition(dec, eps, eps0, direction, Gparv::Kind::kUpper);
}

Gparv GparvLower(const FiniteDist& a0, const FiniteDist& a1,
                 const FiniteDist& a2, double eps, double eps0) {
  return GparvLowerFromDecomposition(LowerBoundTriple(a0, a1, a2), eps, eps0);
}

Gparv GparvLowerFromDecomposition(const CloneDecomposition& triple, double eps,
                                  double eps0) {
  return FromDecomposition(triple, eps, eps0, Direction::kForward,
                           Gparv::Kind::kLower);
}

Gparv GparvLaplaceUpper(double eps0, double eps) {
  if (!(eps0 > 0)) {
    throw ValidationError("GparvLaplaceUpper: eps0 must be positive");
  }
  const double g = std::exp(-eps0 / 2);
  std::vector<std::pair<double, double>> atoms{{0.0, 1.0 - g}};
  ContinuousSegment segment{g, std::make_shared<LaplaceUpperCdf>(eps0, eps)};
  return Gparv(std::move(atoms), segment, eps0, eps, Gparv::Kind::kUpper);
}

Gparv GparvLaplaceLower(double eps0, double eps) {
  if (!(eps0 > 0)) {
    throw ValidationError("GparvLaplaceLower: eps0 must be positive");
  }
  ContinuousSegment segment{1.0, std::make_shared<LaplaceLowerCdf>(eps0, eps)};
  return Gparv({}, segment, eps0, eps, Gparv::Kind::kLower);
}

CloneDecomposition StdCloneDecomposition(double eps0) {
  const double e0 = std::exp(eps0);
  CloneDecomposition dec;
  dec.components.push_back(
      {e0 / (e0 + 1), 1.0 / (e0 + 1), 1.0 / (2 * e0), std::nullopt});
  dec.components.push_back(
      {1.0 / (e0 + 1), e0 / (e0 + 1), 1.0 / (2 * e0), std::nullopt});
  dec.beta = 1.0 - 1.0 / e0;
  return dec;
}

Gparv GparvStdClone(double eps0, double eps, Direction direction) {
  return FromDecomposition(StdCloneDecomposition(eps0), eps, eps0, direction,
                           Gparv::Kind::kUpper);
}

Gparv MixGparvs(const std::vector<std::pair<double, Gparv>>& parts) {
  if (parts.empty()) {
    throw ValidationError("MixGparvs: no parts");
  }
  internal::KahanSum weight_total;
  for (const auto& [w, g] : parts) {
    if (!(w >= 0.0)) throw ValidationError("MixGparvs: negative weight");
    weight_total.Add(w);
  }
  if (std::abs(weight_total.Value() - 1.0) > 1e-9) {
    throw ValidationError("MixGparvs: weights must sum to 1");
  }
  std::vector<std::pair<double, double>> atoms;
  std::optional<ContinuousSegment> segment;
  double eps0 = 0.0;
  const double eps = parts.front().second.eps();
  Gparv::Kind kind = parts.front().second.kind();
  for (const auto& [w, g] : parts) {
    if (w == 0.0) continue;
    eps0 = std::max(eps0, g.eps0());
    for (const auto& [value, mass] : g.atoms()) {
      atoms.emplace_back(value, w * mass);
    }
    if (g.continuous().has_value() && g.continuous()->weight > 0) {
      if (segment.has_value()) {
        throw ValidationError(
            "MixGparvs: at most one branch may carry a continuous segment");
      }
      segment = ContinuousSegment{w * g.continuous()->weight,
                                  g.continuous()->cdf};
    }
  }
  return Gparv(std::move(atoms), std::move(segment), eps0, eps, kind);
}

}  // namespace shuffleamp
