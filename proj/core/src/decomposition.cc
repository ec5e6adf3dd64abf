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

#include "shuffleamp/decomposition.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "shuffleamp/errors.h"
#include "src/kahan.h"

namespace shuffleamp {
namespace {

bool RatioClose(double x, double y) {
  return std::abs(x - y) <=
         kRatioMergeTolerance * std::max({std::abs(x), std::abs(y), 1.0});
}

// Canonical component order: ascending ratio tags.
void SortByTag(std::vector<CloneComponent>& components) {
  std::sort(components.begin(), components.end(),
            [](const CloneComponent& x, const CloneComponent& y) {
              return *x.tag < *y.tag;
            });
}

}  // namespace

double CloneDecomposition::gamma() const {
  internal::KahanSum sum;
  for (const auto& comp : components) sum.Add(comp.c);
  return sum.Value();
}

CloneDecomposition PrimaryOptimal(const Kernel& kernel, std::string_view x0,
                                  std::string_view x1) {
  const auto& row0 = kernel.row(kernel.InputIndex(x0));
  const auto& row1 = kernel.row(kernel.InputIndex(x1));
  CloneDecomposition dec;
  dec.components.reserve(kernel.outcomes().size());
  internal::KahanSum gamma;
  for (std::size_t y = 0; y < kernel.outcomes().size(); ++y) {
    double inf = row0[y];
    for (const auto& row : kernel.rows()) inf = std::min(inf, row[y]);
    if (row0[y] == 0.0 && row1[y] == 0.0 && inf == 0.0) continue;
    dec.components.push_back({row0[y], row1[y], inf, std::nullopt});
    gamma.Add(inf);
  }
  dec.beta = 1.0 - gamma.Value();
  return dec;
}

namespace {

// Clusters the given ratio values (1D, relative tolerance) and returns each
// entry's cluster index; clusters are numbered in ascending value order.
std::vector<std::size_t> ClusterRatios(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&values](std::size_t x, std::size_t y) {
    return values[x] < values[y];
  });
  std::vector<std::size_t> cluster(values.size());
  std::size_t current = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && !RatioClose(values[order[k]], values[order[k - 1]])) {
      ++current;
    }
    cluster[order[k]] = current;
  }
  return cluster;
}

}  // namespace

CloneDecomposition Simplify(const CloneDecomposition& dec) {
  std::vector<double> r0s, r1s, as, bs, cs;
  for (const auto& comp : dec.components) {
    if (comp.c <= 0.0) {
      if (comp.a == 0.0 && comp.b == 0.0) continue;
      throw ValidationError(
          "Simplify: component with c = 0 but positive a or b is not part of "
          "a blanket decomposition");
    }
    r0s.push_back(comp.a / comp.c);
    r1s.push_back(comp.b / comp.c);
    as.push_back(comp.a);
    bs.push_back(comp.b);
    cs.push_back(comp.c);
  }
  // Cluster each ratio coordinate on its own, then group by the cluster
  // pair; float noise cannot interleave distinct pairs this way.
  const std::vector<std::size_t> cluster0 = ClusterRatios(r0s);
  const std::vector<std::size_t> cluster1 = ClusterRatios(r1s);
  std::map<std::pair<std::size_t, std::size_t>,
           std::array<internal::KahanSum, 3>>
      groups;
  for (std::size_t i = 0; i < r0s.size(); ++i) {
    auto& sums = groups[{cluster0[i], cluster1[i]}];
    sums[0].Add(as[i]);
    sums[1].Add(bs[i]);
    sums[2].Add(cs[i]);
  }
  // The map iterates in ascending cluster order, which is the canonical
  // sorted-tag order without ulp-level noise from the merged ratios.
  CloneDecomposition out;
  out.beta = dec.beta;
  for (const auto& [key, sums] : groups) {
    CloneComponent merged{sums[0].Value(), sums[1].Value(), sums[2].Value(),
                          std::nullopt};
    merged.tag = {merged.a / merged.c, merged.b / merged.c};
    out.components.push_back(merged);
  }
  return out;
}

CloneDecomposition FiveComponent(const PqrGamma& pqr, double eps0) {
  const double s = std::exp(eps0);
  CloneDecomposition dec;
  auto push = [&dec](double a, double b, double c, double r0, double r1) {
    if (c > 0.0) dec.components.push_back({a, b, c, {{r0, r1}}});
  };
  push(s * pqr.p, pqr.p, pqr.p, s, 1.0);
  push(pqr.p, s * pqr.p, pqr.p, 1.0, s);
  push(s * pqr.q, s * pqr.q, pqr.q, s, s);
  push(pqr.r, pqr.r, pqr.r, 1.0, 1.0);
  dec.beta = pqr.beta();
  SortByTag(dec.components);
  return dec;
}

CloneDecomposition FiveComponentEqualInputs(const PqrGamma& pqr, double eps0) {
  const double s = std::exp(eps0);
  CloneDecomposition dec;
  const double high = pqr.p + pqr.q;
  const double low = pqr.p + pqr.r;
  if (low > 0.0) dec.components.push_back({low, low, low, {{1.0, 1.0}}});
  if (high > 0.0) dec.components.push_back({s * high, s * high, high, {{s, s}}});
  dec.beta = pqr.beta();
  return dec;
}

CloneDecomposition Joint(const std::vector<CloneDecomposition>& decs) {
  if (decs.empty()) {
    throw ValidationError("Joint: empty composition");
  }
  CloneDecomposition acc;
  acc.components.push_back({1.0, 1.0, 1.0, std::nullopt});
  double gamma_product = 1.0;
  for (const auto& dec : decs) {
    std::vector<CloneComponent> next;
    next.reserve(acc.components.size() * dec.components.size());
    for (const auto& lhs : acc.components) {
      for (const auto& rhs : dec.components) {
        next.push_back(
            {lhs.a * rhs.a, lhs.b * rhs.b, lhs.c * rhs.c, std::nullopt});
      }
    }
    acc.components = std::move(next);
    gamma_product *= dec.gamma();
    // Merge eagerly so the component count stays polynomial in the number of
    // coordinates.
    acc.beta = 1.0 - gamma_product;
    acc = Simplify(acc);
  }
  return acc;
}

CloneDecomposition Parallel(
    const std::vector<std::pair<double, CloneDecomposition>>& weighted) {
  if (weighted.empty()) {
    throw ValidationError("Parallel: empty composition");
  }
  internal::KahanSum weight_total;
  for (const auto& [w, dec] : weighted) {
    if (!(w >= 0.0)) {
      throw ValidationError("Parallel: negative weight");
    }
    weight_total.Add(w);
  }
  if (std::abs(weight_total.Value() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "Parallel: weights sum to " << weight_total.Value()
        << ", expected 1";
    throw ValidationError(msg.str());
  }
  CloneDecomposition out;
  internal::KahanSum beta;
  for (const auto& [w, dec] : weighted) {
    if (w == 0.0) continue;
    for (const auto& comp : dec.components) {
      out.components.push_back({w * comp.a, w * comp.b, w * comp.c,
                                std::nullopt});
    }
    beta.Add(w * dec.beta);
  }
  out.beta = beta.Value();
  return Simplify(out);
}

Diagnostics Validate(const CloneDecomposition& dec) {
  Diagnostics diag;
  auto fail = [&diag](const std::string& what, double magnitude) {
    diag.pass = false;
    diag.max_violation = std::max(diag.max_violation, magnitude);
    std::ostringstream msg;
    msg << what << " (magnitude " << magnitude << ")";
    diag.violations.push_back(msg.str());
  };
  internal::KahanSum a, b, c;
  for (std::size_t i = 0; i < dec.components.size(); ++i) {
    const auto& comp = dec.components[i];
    for (double v : {comp.a, comp.b, comp.c}) {
      if (v < 0.0) fail("negative component mass", -v);
    }
    a.Add(comp.a);
    b.Add(comp.b);
    c.Add(comp.c);
  }
  if (dec.beta < 0.0) fail("negative beta", -dec.beta);
  if (std::abs(a.Value() - 1.0) > kDecompositionTolerance) {
    fail("sum of a differs from 1", std::abs(a.Value() - 1.0));
  }
  if (std::abs(b.Value() - 1.0) > kDecompositionTolerance) {
    fail("sum of b differs from 1", std::abs(b.Value() - 1.0));
  }
  if (std::abs(dec.beta + c.Value() - 1.0) > kDecompositionTolerance) {
    fail("beta + sum of c differs from 1",
         std::abs(dec.beta + c.Value() - 1.0));
  }
  return diag;
}

CloneDecomposition ConstantDecomposition() {
  CloneDecomposition dec;
  dec.components.push_back({1.0, 1.0, 1.0, {{1.0, 1.0}}});
  dec.beta = 0.0;
  return dec;
}

CloneDecomposition LowerBoundTriple(const FiniteDist& a0, const FiniteDist& a1,
                                    const FiniteDist& a2) {
  if (a0.size() != a2.size() || a1.size() != a2.size()) {
    throw ValidationError("LowerBoundTriple: outcome sets differ");
  }
  CloneDecomposition dec;
  dec.beta = 0.0;
  dec.components.reserve(a2.size());
  for (std::size_t y = 0; y < a2.size(); ++y) {
    const auto& label = a2.outcomes()[y];
    if (!a0.Contains(label) || !a1.Contains(label)) {
      throw ValidationError("LowerBoundTriple: outcome sets differ (label '" +
                            label + "' missing)");
    }
    const double pa = a0.Mass(label);
    const double pb = a1.Mass(label);
    const double pc = a2.masses()[y];
    if (pa == 0.0 && pb == 0.0 && pc == 0.0) continue;
    dec.components.push_back({pa, pb, pc, std::nullopt});
  }
  return dec;
}

}  // namespace shuffleamp
