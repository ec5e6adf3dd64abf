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

#include "shuffleamp/finite_dist.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "shuffleamp/errors.h"
#include "src/kahan.h"

namespace shuffleamp {

FiniteDist::FiniteDist(std::vector<std::string> outcomes,
                       std::vector<double> masses)
    : outcomes_(std::move(outcomes)), masses_(std::move(masses)) {
  if (outcomes_.size() != masses_.size()) {
    throw ValidationError("FiniteDist: outcomes and masses differ in length");
  }
  if (outcomes_.empty()) {
    throw ValidationError("FiniteDist: empty distribution");
  }
  index_.reserve(outcomes_.size());
  internal::KahanSum total;
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (!(masses_[i] >= 0.0)) {
      throw ValidationError("FiniteDist: negative mass at outcome '" +
                            outcomes_[i] + "'");
    }
    total.Add(masses_[i]);
    if (!index_.emplace(outcomes_[i], i).second) {
      throw ValidationError("FiniteDist: duplicate outcome label '" +
                            outcomes_[i] + "'");
    }
  }
  if (std::abs(total.Value() - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << "FiniteDist: masses sum to " << total.Value() << ", expected 1";
    throw ValidationError(msg.str());
  }
}

double FiniteDist::Mass(std::string_view outcome) const {
  auto it = index_.find(std::string(outcome));
  return it == index_.end() ? 0.0 : masses_[it->second];
}

bool FiniteDist::Contains(std::string_view outcome) const {
  return index_.find(std::string(outcome)) != index_.end();
}

FiniteDist FiniteDist::PointMass(std::string label) {
  return FiniteDist({std::move(label)}, {1.0});
}

double HockeyStick(const FiniteDist& p, const FiniteDist& q, double alpha) {
  if (!(alpha > 0)) {
    throw ValidationError("HockeyStick: alpha must be positive");
  }
  if (p.size() != q.size()) {
    throw ValidationError("HockeyStick: outcome sets differ in size");
  }
  internal::KahanSum sum;
  const bool aligned = p.outcomes() == q.outcomes();
  for (std::size_t i = 0; i < p.size(); ++i) {
    double qi;
    if (aligned) {
      qi = q.masses()[i];
    } else {
      // Same set, different order: realign by label.
      if (!q.Contains(p.outcomes()[i])) {
        throw ValidationError("HockeyStick: outcome sets differ (label '" +
                              p.outcomes()[i] + "' missing)");
      }
      qi = q.Mass(p.outcomes()[i]);
    }
    const double gap = p.masses()[i] - alpha * qi;
    if (gap > 0) sum.Add(gap);
  }
  return sum.Value();
}

FiniteDist Mixture(const std::vector<std::pair<double, FiniteDist>>& parts) {
  if (parts.empty()) {
    throw ValidationError("Mixture: no parts");
  }
  internal::KahanSum weight_total;
  for (const auto& [w, dist] : parts) {
    if (!(w >= 0.0)) {
      throw ValidationError("Mixture: negative weight");
    }
    weight_total.Add(w);
  }
  if (std::abs(weight_total.Value() - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << "Mixture: weights sum to " << weight_total.Value() << ", expected 1";
    throw ValidationError(msg.str());
  }
  // Union of outcomes in first-seen order; absent outcomes contribute 0.
  std::vector<std::string> outcomes;
  std::unordered_map<std::string, std::size_t> where;
  std::vector<internal::KahanSum> mass;
  for (const auto& [w, dist] : parts) {
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      auto [it, inserted] = where.emplace(dist.outcomes()[i], outcomes.size());
      if (inserted) {
        outcomes.push_back(dist.outcomes()[i]);
        mass.emplace_back();
      }
      mass[it->second].Add(w * dist.masses()[i]);
    }
  }
  std::vector<double> masses(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) masses[i] = mass[i].Value();
  return FiniteDist(std::move(outcomes), std::move(masses));
}

FiniteDist Product(const FiniteDist& p, const FiniteDist& q) {
  std::vector<std::string> outcomes;
  std::vector<double> masses;
  outcomes.reserve(p.size() * q.size());
  masses.reserve(p.size() * q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      outcomes.push_back("(" + p.outcomes()[i] + "," + q.outcomes()[j] + ")");
      masses.push_back(p.masses()[i] * q.masses()[j]);
    }
  }
  return FiniteDist(std::move(outcomes), std::move(masses));
}

Kernel::Kernel(std::vector<std::string> inputs,
               std::vector<std::string> outcomes,
               std::vector<std::vector<double>> rows)
    : inputs_(std::move(inputs)),
      outcomes_(std::move(outcomes)),
      rows_(std::move(rows)) {
  if (inputs_.empty()) {
    throw ValidationError("Kernel: no inputs");
  }
  if (rows_.size() != inputs_.size()) {
    throw ValidationError("Kernel: one row per input required");
  }
  input_index_.reserve(inputs_.size());
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (!input_index_.emplace(inputs_[i], i).second) {
      throw ValidationError("Kernel: duplicate input label '" + inputs_[i] +
                            "'");
    }
  }
  {
    std::unordered_set<std::string> seen;
    seen.reserve(outcomes_.size());
    for (const auto& outcome : outcomes_) {
      if (!seen.insert(outcome).second) {
        throw ValidationError("Kernel: duplicate outcome label '" + outcome +
                              "'");
      }
    }
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != outcomes_.size()) {
      throw ValidationError("Kernel: row for input '" + inputs_[i] +
                            "' does not match the outcome list");
    }
    internal::KahanSum total;
    for (double v : rows_[i]) {
      if (!(v >= 0.0)) {
        throw ValidationError("Kernel: negative mass in row for input '" +
                              inputs_[i] + "'");
      }
      total.Add(v);
    }
    if (std::abs(total.Value() - 1.0) > kMassTolerance) {
      std::ostringstream msg;
      msg << "Kernel: row for input '" << inputs_[i] << "' sums to "
          << total.Value();
      throw ValidationError(msg.str());
    }
  }
}

std::size_t Kernel::InputIndex(std::string_view input) const {
  auto it = input_index_.find(std::string(input));
  if (it == input_index_.end()) {
    throw ValidationError("Kernel: unknown input label '" +
                          std::string(input) + "'");
  }
  return it->second;
}

FiniteDist Kernel::RowDist(std::string_view input) const {
  return FiniteDist(outcomes_, rows_[InputIndex(input)]);
}

double Kernel::MaxLdpRatio() const {
  double worst = 1.0;
  for (std::size_t y = 0; y < outcomes_.size(); ++y) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& row : rows_) {
      lo = std::min(lo, row[y]);
      hi = std::max(hi, row[y]);
    }
    if (hi == 0.0) continue;  // outcome unused by every input
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, hi / lo);
  }
  return worst;
}

}  // namespace shuffleamp
