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

#include "shuffleamp/randomizers.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "shuffleamp/errors.h"

namespace shuffleamp {
namespace {

constexpr std::size_t kMaxOutputEntries = std::size_t{1} << 20;
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 24;
constexpr double kLdpRatioSlack = 1e-9;

bool IsPowerOfTwo(int d) { return d >= 1 && std::has_single_bit(unsigned(d)); }

int PopcountParity(unsigned x) { return std::popcount(x) & 1; }

std::vector<std::string> NumberedLabels(int from, int to_inclusive) {
  std::vector<std::string> labels;
  labels.reserve(to_inclusive - from + 1);
  for (int i = from; i <= to_inclusive; ++i) labels.push_back(std::to_string(i));
  return labels;
}

std::string BitstringLabel(unsigned bits, int width) {
  std::string s(width, '0');
  for (int j = 0; j < width; ++j) {
    if (bits & (1u << j)) s[j] = '1';
  }
  return s;
}

void CheckLdp(const Kernel& kernel, double eps0, const char* what) {
  const double bound = std::exp(eps0) * (1.0 + kLdpRatioSlack);
  if (kernel.MaxLdpRatio() > bound) {
    std::ostringstream msg;
    msg << what << ": kernel violates " << eps0
        << "-LDP (max probability ratio " << kernel.MaxLdpRatio() << ")";
    throw ValidationError(msg.str());
  }
}

Kernel BuildKrr(int k, double eps0) {
  const double denom = std::exp(eps0) + k - 1;
  std::vector<std::string> labels = NumberedLabels(1, k);
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 1.0 / denom));
  for (int x = 0; x < k; ++x) rows[x][x] = std::exp(eps0) / denom;
  return Kernel(labels, labels, std::move(rows));
}

// Full hash family H = {f : [D] -> [2]}; output labels pair the hash index
// (bit j of the index is f(j+1)) with the reported bit.
Kernel BuildBlh(int d, double eps0) {
  const std::size_t num_hashes = std::size_t{1} << d;
  const double e0 = std::exp(eps0);
  const double keep = e0 / (1.0 + e0);
  const double flip = 1.0 / (1.0 + e0);
  std::vector<std::string> outcomes;
  outcomes.reserve(num_hashes * 2);
  for (std::size_t h = 0; h < num_hashes; ++h) {
    for (int bit = 0; bit < 2; ++bit) {
      outcomes.push_back("h" + std::to_string(h) + ":" + std::to_string(bit));
    }
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(d);
  for (int x = 1; x <= d; ++x) {
    std::vector<double> row(num_hashes * 2);
    for (std::size_t h = 0; h < num_hashes; ++h) {
      const int hx = (h >> (x - 1)) & 1;
      row[2 * h + hx] = keep / num_hashes;
      row[2 * h + (1 - hx)] = flip / num_hashes;
    }
    rows.push_back(std::move(row));
  }
  return Kernel(NumberedLabels(1, d), std::move(outcomes), std::move(rows));
}

Kernel BuildRappor(int d, double eps0) {
  const std::size_t num_outputs = std::size_t{1} << d;
  const double h = std::exp(eps0 / 2);
  const double denom = std::pow(1.0 + h, d);
  std::vector<std::string> outcomes;
  outcomes.reserve(num_outputs);
  for (std::size_t y = 0; y < num_outputs; ++y) {
    outcomes.push_back(BitstringLabel(unsigned(y), d));
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(d);
  for (int x = 1; x <= d; ++x) {
    const unsigned ue = 1u << (x - 1);
    std::vector<double> row(num_outputs);
    for (std::size_t y = 0; y < num_outputs; ++y) {
      const int dist = std::popcount(unsigned(y) ^ ue);
      row[y] = std::pow(h, d - dist) / denom;
    }
    rows.push_back(std::move(row));
  }
  return Kernel(NumberedLabels(1, d), std::move(outcomes), std::move(rows));
}

Kernel BuildOue(int d, double eps0) {
  const std::size_t num_outputs = std::size_t{1} << d;
  const double e0 = std::exp(eps0);
  const double denom = 2.0 * std::pow(1.0 + e0, d - 1);
  std::vector<std::string> outcomes;
  outcomes.reserve(num_outputs);
  for (std::size_t y = 0; y < num_outputs; ++y) {
    outcomes.push_back(BitstringLabel(unsigned(y), d));
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(d);
  for (int x = 1; x <= d; ++x) {
    std::vector<double> row(num_outputs);
    for (std::size_t y = 0; y < num_outputs; ++y) {
      const int ones_off_x = std::popcount(unsigned(y) & ~(1u << (x - 1)));
      row[y] = std::pow(e0, d - 1 - ones_off_x) / denom;
    }
    rows.push_back(std::move(row));
  }
  return Kernel(NumberedLabels(1, d), std::move(outcomes), std::move(rows));
}

// Inputs exclude symbol 0 (its Hadamard row is constant); outputs cover all
// D indices. The row normalizer comes from the row sum rather than a closed
// form.
Kernel BuildHr(int d, double eps0) {
  const double h = std::exp(eps0 / 2);
  std::vector<std::string> outcomes = NumberedLabels(0, d - 1);
  std::vector<std::string> inputs = NumberedLabels(1, d - 1);
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (int x = 1; x <= d - 1; ++x) {
    std::vector<double> row(d);
    double z = 0.0;
    for (int y = 0; y < d; ++y) {
      row[y] = PopcountParity(unsigned(x) & unsigned(y)) ? 1.0 / h : h;
      z += row[y];
    }
    for (int y = 0; y < d; ++y) row[y] /= z;
    rows.push_back(std::move(row));
  }
  return Kernel(std::move(inputs), std::move(outcomes), std::move(rows));
}

}  // namespace

std::string ToString(RandomizerKind kind) {
  switch (kind) {
    case RandomizerKind::kKrr: return "krr";
    case RandomizerKind::kBlh: return "blh";
    case RandomizerKind::kRappor: return "rappor";
    case RandomizerKind::kOue: return "oue";
    case RandomizerKind::kHr: return "hr";
    case RandomizerKind::kLaplace01: return "laplace01";
    case RandomizerKind::kTabular: return "tabular";
  }
  return "unknown";
}

void RandomizerSpec::Validate() const {
  if (!(eps0 > 0)) {
    throw ValidationError("RandomizerSpec: eps0 must be positive");
  }
  switch (kind) {
    case RandomizerKind::kKrr:
      if (!k_or_d.has_value() || *k_or_d < 2) {
        throw ValidationError("RandomizerSpec: krr requires k >= 2");
      }
      break;
    case RandomizerKind::kHr:
      if (k_or_d.has_value() && !IsPowerOfTwo(*k_or_d)) {
        throw ValidationError("RandomizerSpec: hr requires D = 2^r, r >= 1");
      }
      if (k_or_d.has_value() && *k_or_d < 2) {
        throw ValidationError("RandomizerSpec: hr requires D >= 2");
      }
      break;
    case RandomizerKind::kBlh:
    case RandomizerKind::kRappor:
    case RandomizerKind::kOue:
      if (k_or_d.has_value() && *k_or_d < 2) {
        throw ValidationError("RandomizerSpec: domain size must be >= 2");
      }
      break;
    case RandomizerKind::kLaplace01:
      if (k_or_d.has_value()) {
        throw ValidationError("RandomizerSpec: laplace01 takes no domain size");
      }
      break;
    case RandomizerKind::kTabular:
      if (!table.has_value()) {
        throw ValidationError("RandomizerSpec: tabular requires a kernel");
      }
      CheckLdp(*table, eps0, "RandomizerSpec");
      break;
  }
}

PqrGamma ClosedFormPqr(const RandomizerSpec& spec) {
  spec.Validate();
  const double s = std::exp(spec.eps0);
  const double h = std::exp(spec.eps0 / 2);
  PqrGamma out;
  switch (spec.kind) {
    case RandomizerKind::kKrr: {
      const int k = *spec.k_or_d;
      out.p = 1.0 / (s + k - 1);
      out.q = 0.0;
      out.r = (k - 2) * out.p;
      return out;
    }
    case RandomizerKind::kBlh: {
      out.p = 1.0 / (2 * (s + 1));
      out.q = out.p;
      out.r = out.p;
      if (!spec.asymptotic()) {
        // Factored so the D = 2 cancellation is exact.
        const double shrink = std::ldexp(1.0, 2 - *spec.k_or_d);
        out.q = (1.0 - shrink) / (2 * (s + 1));
        out.r = (1.0 + s * shrink) / (2 * (s + 1));
      }
      return out;
    }
    case RandomizerKind::kRappor: {
      out.p = 1.0 / ((h + 1) * (h + 1));
      out.q = out.p / h;
      out.r = out.p * h;
      if (!spec.asymptotic()) {
        const double shrink = std::pow(h + 1, 2.0 - *spec.k_or_d);
        out.q = (1.0 - shrink) * out.p / h;
        out.r = (1.0 + shrink) * out.p * h;
      }
      return out;
    }
    case RandomizerKind::kOue: {
      out.p = 1.0 / (2 * (s + 1));
      out.q = out.p / s;
      out.r = out.p * s;
      if (!spec.asymptotic()) {
        const double shrink = std::pow(s + 1, 2.0 - *spec.k_or_d);
        out.q = (1.0 - shrink) / (2 * s * (s + 1));
        out.r = (s + shrink) / (2 * (s + 1));
      }
      return out;
    }
    case RandomizerKind::kHr: {
      out.p = 1.0 / (2 * (s + 1));
      out.q = out.p;
      out.r = out.p;
      if (!spec.asymptotic()) {
        const int d = *spec.k_or_d;
        if (d == 2) {
          // Single admissible input: the decomposition degenerates to the
          // whole row sitting in the (1,1) component.
          return PqrGamma{0.0, 0.0, 1.0};
        }
        out.q = (d - 4.0) / (2.0 * d * (s + 1));
        out.r = (d + 4.0 * s) / (2.0 * d * (s + 1));
      }
      return out;
    }
    case RandomizerKind::kLaplace01:
    case RandomizerKind::kTabular:
      throw ValidationError("ClosedFormPqr: unsupported kind " +
                            ToString(spec.kind));
  }
  throw ValidationError("ClosedFormPqr: unknown kind");
}

Kernel BuildTable(const RandomizerSpec& spec) {
  spec.Validate();
  auto check_size = [](std::size_t outputs, std::size_t inputs) {
    if (outputs > kMaxOutputEntries || outputs * inputs > kMaxTableEntries) {
      std::ostringstream msg;
      msg << "BuildTable: output space of " << outputs
          << " entries exceeds the size limit";
      throw ResourceError(msg.str());
    }
  };
  switch (spec.kind) {
    case RandomizerKind::kKrr: {
      check_size(std::size_t(*spec.k_or_d), std::size_t(*spec.k_or_d));
      Kernel kernel = BuildKrr(*spec.k_or_d, spec.eps0);
      CheckLdp(kernel, spec.eps0, "BuildTable");
      return kernel;
    }
    case RandomizerKind::kBlh: {
      if (spec.asymptotic()) {
        throw ValidationError("BuildTable: blh requires an explicit D");
      }
      if (*spec.k_or_d > 19) {
        throw ResourceError("BuildTable: blh output space exceeds 2^20");
      }
      check_size((std::size_t{1} << *spec.k_or_d) * 2, std::size_t(*spec.k_or_d));
      Kernel kernel = BuildBlh(*spec.k_or_d, spec.eps0);
      CheckLdp(kernel, spec.eps0, "BuildTable");
      return kernel;
    }
    case RandomizerKind::kRappor:
    case RandomizerKind::kOue: {
      if (spec.asymptotic()) {
        throw ValidationError("BuildTable: requires an explicit D");
      }
      if (*spec.k_or_d > 20) {
        throw ResourceError("BuildTable: output space exceeds 2^20");
      }
      check_size(std::size_t{1} << *spec.k_or_d, std::size_t(*spec.k_or_d));
      Kernel kernel = spec.kind == RandomizerKind::kRappor
                          ? BuildRappor(*spec.k_or_d, spec.eps0)
                          : BuildOue(*spec.k_or_d, spec.eps0);
      CheckLdp(kernel, spec.eps0, "BuildTable");
      return kernel;
    }
    case RandomizerKind::kHr: {
      if (spec.asymptotic()) {
        throw ValidationError("BuildTable: hr requires an explicit D");
      }
      check_size(std::size_t(*spec.k_or_d), std::size_t(*spec.k_or_d));
      Kernel kernel = BuildHr(*spec.k_or_d, spec.eps0);
      CheckLdp(kernel, spec.eps0, "BuildTable");
      return kernel;
    }
    case RandomizerKind::kTabular:
      return *spec.table;
    case RandomizerKind::kLaplace01:
      throw ValidationError("BuildTable: laplace01 has no finite table");
  }
  throw ValidationError("BuildTable: unknown kind");
}

std::pair<std::string, std::string> CanonicalPair(const RandomizerSpec& spec) {
  if (spec.kind == RandomizerKind::kHr && spec.k_or_d.has_value() &&
      *spec.k_or_d == 2) {
    return {"1", "1"};
  }
  if (spec.kind == RandomizerKind::kTabular) {
    const auto& inputs = spec.table->inputs();
    return inputs.size() >= 2 ? std::make_pair(inputs[0], inputs[1])
                              : std::make_pair(inputs[0], inputs[0]);
  }
  return {"1", "2"};
}

double Laplace01CdfParv(double eps0, double eps, double t) {
  if (!(eps0 > 0)) {
    throw ValidationError("Laplace01CdfParv: eps0 must be positive");
  }
  const double g = std::exp(-eps0 / 2);
  const double ee = std::exp(eps);
  const double knee1 = g * (1.0 - std::exp(eps0 + eps));
  const double knee2 = g * (1.0 - ee);
  const double knee3 = g * (std::exp(eps0) - ee);
  if (t < knee1) return 0.0;
  if (t < knee2) return 0.5 * std::sqrt(ee / (1.0 - t / g));
  if (t < knee3) return 1.0 - 0.5 / std::sqrt(t / g + ee);
  return 1.0;
}

Kernel LoadTabularKernel(const std::string& json_text, double eps0) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("LoadTabularKernel: bad JSON: ") +
                          e.what());
  }
  if (!doc.contains("inputs") || !doc.contains("outputs") ||
      !doc.contains("rows")) {
    throw ValidationError(
        "LoadTabularKernel: document needs inputs, outputs, rows");
  }
  std::vector<std::string> inputs =
      doc["inputs"].get<std::vector<std::string>>();
  std::vector<std::string> outputs =
      doc["outputs"].get<std::vector<std::string>>();
  std::vector<std::vector<double>> rows =
      doc["rows"].get<std::vector<std::vector<double>>>();
  if (rows.size() != inputs.size()) {
    throw ValidationError("LoadTabularKernel: one row per input required");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != outputs.size()) {
      throw ValidationError("LoadTabularKernel: row " + std::to_string(i) +
                            " has wrong length");
    }
    double sum = 0.0;
    for (double v : rows[i]) {
      if (!(v >= 0.0)) {
        throw ValidationError("LoadTabularKernel: negative probability");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "LoadTabularKernel: row " << i << " sums to " << sum;
      throw ValidationError(msg.str());
    }
    for (double& v : rows[i]) v /= sum;
  }
  Kernel kernel(std::move(inputs), std::move(outputs), std::move(rows));
  CheckLdp(kernel, eps0, "LoadTabularKernel");
  return kernel;
}

}  // namespace shuffleamp
