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

#ifndef SHUFFLEAMP_FINITE_DIST_H_
#define SHUFFLEAMP_FINITE_DIST_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shuffleamp {

// Tolerance on the total mass of a probability vector at construction time.
inline constexpr double kMassTolerance = 1e-12;

// A probability mass function over opaque outcome labels. Immutable after
// construction; construction validates non-negativity, distinct labels, and
// unit total mass.
class FiniteDist {
 public:
  FiniteDist(std::vector<std::string> outcomes, std::vector<double> masses);

  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }

  // Mass of the given outcome; 0 if the label is not present.
  double Mass(std::string_view outcome) const;
  bool Contains(std::string_view outcome) const;

  // Point mass on a single label.
  static FiniteDist PointMass(std::string label);

 private:
  std::vector<std::string> outcomes_;
  std::vector<double> masses_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Hockey-stick divergence D_alpha(p || q) = sum_y max{0, p(y) - alpha q(y)}.
// p and q must be defined over the same outcome set (order may differ).
double HockeyStick(const FiniteDist& p, const FiniteDist& q, double alpha);

// Pointwise weighted sum over the union of the parts' outcome sets. Weights
// must be non-negative and sum to 1 within kMassTolerance.
FiniteDist Mixture(const std::vector<std::pair<double, FiniteDist>>& parts);

// Independent product; outcome labels are "(a,b)" pairs.
FiniteDist Product(const FiniteDist& p, const FiniteDist& q);

// A conditional kernel: one FiniteDist per input, all rows aligned over the
// same outcome list (zero-mass outcomes retained so supports stay aligned).
class Kernel {
 public:
  Kernel(std::vector<std::string> inputs, std::vector<std::string> outcomes,
         std::vector<std::vector<double>> rows);

  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  const std::vector<double>& row(std::size_t input_index) const {
    return rows_[input_index];
  }
  // Throws ValidationError for an unknown input label.
  std::size_t InputIndex(std::string_view input) const;
  FiniteDist RowDist(std::string_view input) const;

  // Largest ratio R(x)(y) / R(x')(y) over all x, x', y. Returns +infinity if
  // some outcome has positive mass under one input and zero under another.
  double MaxLdpRatio() const;

 private:
  std::vector<std::string> inputs_;
  std::vector<std::string> outcomes_;
  std::vector<std::vector<double>> rows_;
  std::unordered_map<std::string, std::size_t> input_index_;
};

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_FINITE_DIST_H_
