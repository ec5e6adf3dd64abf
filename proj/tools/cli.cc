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

#include "cli.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuffleamp/amplifier.h"
#include "shuffleamp/catalog.h"
#include "shuffleamp/errors.h"
#include "shuffleamp/gparv.h"

namespace shuffleamp::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitTopLevel(const std::string& text, char sep) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string current;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == sep && depth == 0) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  return parts;
}

std::string Trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

RandomizerKind KindFromName(const std::string& name) {
  if (name == "krr") return RandomizerKind::kKrr;
  if (name == "blh") return RandomizerKind::kBlh;
  if (name == "rappor") return RandomizerKind::kRappor;
  if (name == "oue") return RandomizerKind::kOue;
  if (name == "hr") return RandomizerKind::kHr;
  if (name == "laplace01") return RandomizerKind::kLaplace01;
  if (name == "tabular") return RandomizerKind::kTabular;
  throw ValidationError("unknown randomizer kind '" + name + "'");
}

// A resolved leaf: either a concrete randomizer or the constant mechanism.
struct Leaf {
  bool is_bot = false;
  RandomizerSpec spec;
};

Leaf ResolveLeaf(const MechSpec& mech, double default_eps0) {
  Leaf leaf;
  if (mech.is_bot) {
    leaf.is_bot = true;
    return leaf;
  }
  leaf.spec.kind = mech.kind;
  leaf.spec.eps0 = mech.eps0.value_or(default_eps0);
  leaf.spec.k_or_d = mech.k_or_d;
  if (mech.kind == RandomizerKind::kTabular) {
    if (!mech.table_file.has_value()) {
      throw ValidationError("tabular randomizer requires file=<path>");
    }
    std::ifstream in(*mech.table_file);
    if (!in) {
      throw ValidationError("cannot open table file '" + *mech.table_file +
                            "'");
    }
    std::stringstream text;
    text << in.rdbuf();
    leaf.spec.table = LoadTabularKernel(text.str(), leaf.spec.eps0);
  }
  leaf.spec.Validate();
  return leaf;
}

bool IsLaplaceMech(const MechSpec& mech) {
  return !mech.is_bot && mech.kind == RandomizerKind::kLaplace01;
}

struct JointCoordinate {
  MechSpec mech;
  bool changed = true;
};

std::vector<JointCoordinate> ResolveJointCoordinates(const RunConfig& config) {
  std::vector<JointCoordinate> coords;
  if (!config.joint_coords.empty()) {
    if (config.hamming.has_value()) {
      throw ValidationError(
          "--adjacency-hamming conflicts with per-coordinate changed flags");
    }
    for (std::size_t i = 0; i < config.joint_coords.size(); ++i) {
      const bool changed =
          i < config.joint_changed.size() ? config.joint_changed[i] : true;
      coords.push_back({config.joint_coords[i], changed});
    }
    return coords;
  }
  const int m = config.joint.value_or(0);
  if (m < 1) {
    throw ValidationError("--joint must be a positive integer");
  }
  const int d = config.hamming.value_or(m);
  if (d < 1 || d > m) {
    throw ValidationError("--adjacency-hamming must be in [1, joint]");
  }
  for (int i = 0; i < m; ++i) {
    coords.push_back({config.base, i < d});
  }
  return coords;
}

// Worst-case sweep members for a tabular randomizer: ordered input pairs,
// optionally restricted to the explicit (x0, x1) and its reverse.
std::vector<std::pair<std::string, std::string>> TabularPairs(
    const RunConfig& config, const Kernel& table) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (config.x0.has_value() || config.x1.has_value()) {
    if (!config.x0.has_value() || !config.x1.has_value()) {
      throw ValidationError("--x0 and --x1 must be given together");
    }
    table.InputIndex(*config.x0);
    table.InputIndex(*config.x1);
    pairs.emplace_back(*config.x0, *config.x1);
    if (*config.x0 != *config.x1) pairs.emplace_back(*config.x1, *config.x0);
    return pairs;
  }
  const auto& inputs = table.inputs();
  if (inputs.size() < 2) {
    pairs.emplace_back(inputs[0], inputs[0]);
    return pairs;
  }
  for (const auto& a : inputs) {
    for (const auto& b : inputs) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

struct LabeledGparv {
  std::string label;
  Gparv g;
};

// The total local budget the composed mechanism satisfies; the bisection in
// the epsilon searches runs over [0, cap].
double EpsCap(const RunConfig& config, double eps0) {
  if (config.joint.has_value() || !config.joint_coords.empty()) {
    if (!config.joint_coords.empty()) {
      double total = 0.0;
      const double even = eps0 / config.joint_coords.size();
      for (const auto& mech : config.joint_coords) {
        total += mech.eps0.value_or(even);
      }
      return total;
    }
    return eps0;  // m coordinates at eps0/m each
  }
  if (!config.parallel.empty()) {
    double cap = 0.0;
    for (const auto& [w, mech] : config.parallel) {
      if (mech.is_bot) continue;
      cap = std::max(cap, mech.eps0.value_or(eps0));
    }
    return cap;
  }
  return config.base.eps0.value_or(eps0);
}

std::vector<LabeledGparv> BuildGparvs(const RunConfig& config, double eps0,
                                      double eps, bool upper) {
  const double cap = EpsCap(config, eps0);
  std::vector<LabeledGparv> out;

  auto leaf_upper_dec = [&](const Leaf& leaf, bool changed) {
    return leaf.is_bot ? ConstantDecomposition()
                       : UpperDecomposition(leaf.spec, changed);
  };
  auto leaf_lower_dec = [&](const Leaf& leaf, bool changed) {
    return leaf.is_bot ? ConstantDecomposition()
                       : LowerTripleDecomposition(leaf.spec, changed);
  };
  if (config.joint.has_value() || !config.joint_coords.empty()) {
    const auto coords = ResolveJointCoordinates(config);
    const double even = eps0 / coords.size();
    std::vector<CloneDecomposition> decs;
    decs.reserve(coords.size());
    for (const auto& coord : coords) {
      if (IsLaplaceMech(coord.mech) ||
          (!coord.mech.is_bot && coord.mech.kind == RandomizerKind::kTabular)) {
        throw ValidationError(
            "joint composition supports catalog randomizers only");
      }
      const Leaf leaf = ResolveLeaf(coord.mech, even);
      decs.push_back(upper ? leaf_upper_dec(leaf, coord.changed)
                           : leaf_lower_dec(leaf, coord.changed));
    }
    const CloneDecomposition dec = Joint(decs);
    out.push_back({"joint",
                   upper ? GparvUpper(dec, eps, cap)
                         : GparvLowerFromDecomposition(dec, eps, cap)});
  } else if (!config.parallel.empty()) {
    bool any_laplace = false;
    for (const auto& [w, mech] : config.parallel) {
      if (IsLaplaceMech(mech)) any_laplace = true;
      if (!mech.is_bot && mech.kind == RandomizerKind::kTabular) {
        throw ValidationError(
            "parallel composition supports catalog randomizers only");
      }
    }
    if (any_laplace) {
      std::vector<std::pair<double, Gparv>> parts;
      for (const auto& [w, mech] : config.parallel) {
        if (IsLaplaceMech(mech)) {
          const double leaf_eps0 = mech.eps0.value_or(eps0);
          parts.emplace_back(w, upper ? GparvLaplaceUpper(leaf_eps0, eps)
                                      : GparvLaplaceLower(leaf_eps0, eps));
        } else {
          const Leaf leaf = ResolveLeaf(mech, eps0);
          const CloneDecomposition dec =
              upper ? leaf_upper_dec(leaf, true) : leaf_lower_dec(leaf, true);
          parts.emplace_back(w, upper
                                    ? GparvUpper(dec, eps, cap)
                                    : GparvLowerFromDecomposition(dec, eps,
                                                                  cap));
        }
      }
      out.push_back({"parallel", MixGparvs(parts)});
    } else {
      std::vector<std::pair<double, CloneDecomposition>> weighted;
      for (const auto& [w, mech] : config.parallel) {
        const Leaf leaf = ResolveLeaf(mech, eps0);
        weighted.emplace_back(w, upper ? leaf_upper_dec(leaf, true)
                                       : leaf_lower_dec(leaf, true));
      }
      const CloneDecomposition dec = Parallel(weighted);
      out.push_back({"parallel",
                     upper ? GparvUpper(dec, eps, cap)
                           : GparvLowerFromDecomposition(dec, eps, cap)});
    }
  } else {
    const Leaf leaf = ResolveLeaf(config.base, eps0);
    if (leaf.is_bot) {
      throw ValidationError("'bot' is only meaningful inside --parallel");
    }
    if (leaf.spec.kind == RandomizerKind::kLaplace01) {
      out.push_back({"laplace01", upper
                                      ? GparvLaplaceUpper(leaf.spec.eps0, eps)
                                      : GparvLaplaceLower(leaf.spec.eps0,
                                                          eps)});
    } else if (leaf.spec.kind == RandomizerKind::kTabular) {
      const Kernel& table = *leaf.spec.table;
      for (const auto& [a, b] : TabularPairs(config, table)) {
        if (upper) {
          const CloneDecomposition dec =
              Simplify(PrimaryOptimal(table, a, b));
          out.push_back({a + "->" + b, GparvUpper(dec, eps, cap)});
        } else {
          std::vector<std::string> thirds;
          for (const auto& x : table.inputs()) {
            if (x != a && x != b) thirds.push_back(x);
          }
          if (thirds.empty()) thirds.push_back(b);
          for (const auto& x2 : thirds) {
            const CloneDecomposition triple = LowerBoundTriple(
                table.RowDist(a), table.RowDist(b), table.RowDist(x2));
            out.push_back({a + "->" + b + "|" + x2,
                           GparvLowerFromDecomposition(triple, eps, cap)});
          }
        }
      }
    } else {
      const CloneDecomposition dec =
          upper ? leaf_upper_dec(leaf, true) : leaf_lower_dec(leaf, true);
      out.push_back({ToString(leaf.spec.kind),
                     upper ? GparvUpper(dec, eps, cap)
                           : GparvLowerFromDecomposition(dec, eps, cap)});
    }
  }

  if (config.subsample.has_value()) {
    const double p = *config.subsample;
    if (!(p > 0.0) || p > 1.0) {
      throw ValidationError("--subsample probability must be in (0, 1]");
    }
    const CloneDecomposition bot = ConstantDecomposition();
    for (auto& member : out) {
      const Gparv bot_g = upper
                              ? GparvUpper(bot, eps, cap)
                              : GparvLowerFromDecomposition(bot, eps, cap);
      member.g = MixGparvs({{p, member.g}, {1.0 - p, bot_g}});
    }
  }
  return out;
}

// Composed finite decomposition for the `decompose` command.
CloneDecomposition FiniteUpperDec(const RunConfig& config) {
  const double eps0 = config.eps0;
  CloneDecomposition dec;
  if (config.joint.has_value() || !config.joint_coords.empty()) {
    const auto coords = ResolveJointCoordinates(config);
    const double even = eps0 / coords.size();
    std::vector<CloneDecomposition> decs;
    for (const auto& coord : coords) {
      const Leaf leaf = ResolveLeaf(coord.mech, even);
      if (leaf.is_bot || leaf.spec.kind == RandomizerKind::kLaplace01 ||
          leaf.spec.kind == RandomizerKind::kTabular) {
        throw ValidationError(
            "decompose supports catalog randomizers in joint compositions");
      }
      decs.push_back(UpperDecomposition(leaf.spec, coord.changed));
    }
    dec = Joint(decs);
  } else if (!config.parallel.empty()) {
    std::vector<std::pair<double, CloneDecomposition>> weighted;
    for (const auto& [w, mech] : config.parallel) {
      if (IsLaplaceMech(mech)) {
        throw ValidationError("decompose does not support laplace01");
      }
      const Leaf leaf = ResolveLeaf(mech, eps0);
      weighted.emplace_back(w, leaf.is_bot
                                   ? ConstantDecomposition()
                                   : UpperDecomposition(leaf.spec, true));
    }
    dec = Parallel(weighted);
  } else {
    const Leaf leaf = ResolveLeaf(config.base, eps0);
    if (leaf.is_bot) {
      throw ValidationError("'bot' is only meaningful inside --parallel");
    }
    if (leaf.spec.kind == RandomizerKind::kLaplace01) {
      throw ValidationError("laplace01 has no finite decomposition");
    }
    if (leaf.spec.kind == RandomizerKind::kTabular) {
      if (config.x0.has_value() != config.x1.has_value()) {
        throw ValidationError("--x0 and --x1 must be given together");
      }
      auto [a, b] = config.x0.has_value()
                        ? std::make_pair(*config.x0, *config.x1)
                        : CanonicalPair(leaf.spec);
      dec = Simplify(PrimaryOptimal(*leaf.spec.table, a, b));
    } else {
      dec = UpperDecomposition(leaf.spec, true);
    }
  }
  if (config.subsample.has_value()) {
    dec = Parallel({{*config.subsample, dec},
                    {1.0 - *config.subsample, ConstantDecomposition()}});
  }
  return dec;
}

AmplificationModel BuildModel(const RunConfig& config) {
  AmplificationModel model;
  model.upper = [config](double eps0, double eps) {
    std::vector<Gparv> gs;
    for (auto& member : BuildGparvs(config, eps0, eps, /*upper=*/true)) {
      gs.push_back(std::move(member.g));
    }
    return gs;
  };
  model.lower = [config](double eps0, double eps) {
    std::vector<Gparv> gs;
    for (auto& member : BuildGparvs(config, eps0, eps, /*upper=*/false)) {
      gs.push_back(std::move(member.g));
    }
    return gs;
  };
  if (config.step.has_value()) {
    const double fixed = *config.step;
    model.step = [fixed](double) { return fixed; };
  }
  return model;
}

std::size_t MaxTransformLength(const RunConfig& config) {
  return config.max_transform_length == 0 ? kDefaultMaxTransformLength
                                          : config.max_transform_length;
}

Json BoundReportJson(const RunConfig& config, double eps) {
  const double cap = EpsCap(config, config.eps0);
  const double step = config.step.value_or(DefaultStep(cap));
  const std::size_t max_len = MaxTransformLength(config);

  double delta_upper = -1.0;
  double mass_defect = 0.0;
  std::string worst_label;
  BoundReport upper_report;
  for (const auto& member :
       BuildGparvs(config, config.eps0, eps, /*upper=*/true)) {
    BoundReport r =
        DeltaBound(member.g, config.n, step, RoundMode::kRoundUp, max_len);
    mass_defect = std::max(mass_defect, r.mass_defect);
    if (*r.delta_upper > delta_upper) {
      delta_upper = *r.delta_upper;
      worst_label = member.label;
      upper_report = r;
    }
  }
  double delta_lower = 0.0;
  for (const auto& member :
       BuildGparvs(config, config.eps0, eps, /*upper=*/false)) {
    BoundReport r =
        DeltaBound(member.g, config.n, step, RoundMode::kRoundDown, max_len);
    mass_defect = std::max(mass_defect, r.mass_defect);
    delta_lower = std::max(delta_lower, *r.delta_lower);
  }

  Json doc;
  doc["schema"] = "shuffle-amp/1";
  doc["delta_upper"] = delta_upper;
  doc["delta_lower"] = delta_lower;
  doc["eps"] = eps;
  doc["eps0"] = cap;
  doc["n"] = config.n;
  doc["step"] = step;
  doc["mass_defect"] = mass_defect;
  doc["discretization_slack"] = upper_report.discretization_slack;
  if (upper_report.hoeffding_slack.has_value()) {
    doc["hoeffding_slack"] = *upper_report.hoeffding_slack;
  }
  if (config.base.kind == RandomizerKind::kTabular && !config.base.is_bot &&
      config.parallel.empty() && !config.joint.has_value()) {
    doc["worst_pair"] = worst_label;
  }
  return doc;
}

void RejectNonParametric(const RunConfig& config, const char* command) {
  auto reject = [&](const MechSpec& mech) {
    if (mech.is_bot) return;
    if (mech.kind == RandomizerKind::kTabular) {
      throw ValidationError(std::string(command) +
                            ": tabular kernels do not scale with eps0");
    }
    if (mech.eps0.has_value()) {
      throw ValidationError(std::string(command) +
                            ": per-mechanism eps0 overrides conflict with an "
                            "eps0 sweep");
    }
  };
  reject(config.base);
  for (const auto& mech : config.joint_coords) reject(mech);
  for (const auto& [w, mech] : config.parallel) reject(mech);
}

std::string RunBound(const RunConfig& config) {
  if (!config.eps.has_value()) {
    throw ValidationError("bound requires --eps");
  }
  return BoundReportJson(config, *config.eps).dump(2) + "\n";
}

std::string RunEpsilon(const RunConfig& config) {
  const double cap = EpsCap(config, config.eps0);
  const AmplificationModel model = BuildModel(config);
  const double eps = FindEpsilon(
      [&](double e) { return model.upper(config.eps0, e); }, cap, config.n,
      config.delta, model.step(cap), 1e-3, RoundMode::kRoundUp,
      MaxTransformLength(config));
  Json doc;
  doc["schema"] = "shuffle-amp/1";
  doc["epsilon"] = eps;
  doc["report"] = BoundReportJson(config, eps);
  return doc.dump(2) + "\n";
}

std::string RunEps0(const RunConfig& config) {
  if (!config.eps.has_value()) {
    throw ValidationError("eps0 requires --eps (the target epsilon)");
  }
  RejectNonParametric(config, "eps0");
  const AmplificationModel model = BuildModel(config);
  const double found =
      FindEps0(model, config.n, config.delta, *config.eps,
               config.eps0_grid_step, config.max_eps0,
               MaxTransformLength(config));
  RunConfig at = config;
  at.eps0 = found;
  const double achieved = FindEpsilon(
      [&](double e) { return model.upper(found, e); }, EpsCap(at, found),
      config.n, config.delta, model.step(found), 1e-4, RoundMode::kRoundUp,
      MaxTransformLength(config));
  Json doc;
  doc["schema"] = "shuffle-amp/1";
  doc["eps0"] = found;
  doc["epsilon"] = achieved;
  doc["report"] = BoundReportJson(at, achieved);
  return doc.dump(2) + "\n";
}

std::string RunCurve(const RunConfig& config) {
  if (config.eps0_values.empty()) {
    throw ValidationError("curve requires --eps0-grid");
  }
  RejectNonParametric(config, "curve");
  const AmplificationModel model = BuildModel(config);
  const std::vector<CurveRow> rows =
      Curve(model, config.n, config.delta, config.eps0_values, config.workers,
            MaxTransformLength(config));
  std::ostringstream csv;
  csv << "eps0,n,eps_upper,eps_lower,delta_target,grid_step\n";
  for (const auto& row : rows) {
    csv << FormatDouble(row.eps0) << ',' << config.n << ','
        << FormatDouble(row.eps_upper) << ',' << FormatDouble(row.eps_lower)
        << ',' << FormatDouble(config.delta) << ','
        << FormatDouble(model.step(row.eps0)) << '\n';
  }
  return csv.str();
}

std::string RunDecompose(const RunConfig& config) {
  const CloneDecomposition dec = FiniteUpperDec(config);
  Json doc;
  doc["schema"] = "shuffle-amp/1";
  Json components = Json::array();
  for (const auto& comp : dec.components) {
    Json c;
    c["a"] = comp.a;
    c["b"] = comp.b;
    c["c"] = comp.c;
    if (comp.tag.has_value()) {
      c["r0"] = comp.tag->first;
      c["r1"] = comp.tag->second;
    }
    components.push_back(c);
  }
  doc["components"] = components;
  doc["beta"] = dec.beta;
  doc["gamma"] = dec.gamma();
  const bool plain_catalog = !config.joint.has_value() &&
                             config.joint_coords.empty() &&
                             config.parallel.empty() &&
                             !config.subsample.has_value() &&
                             !config.base.is_bot &&
                             config.base.kind != RandomizerKind::kTabular &&
                             config.base.kind != RandomizerKind::kLaplace01;
  if (plain_catalog) {
    const Leaf leaf = ResolveLeaf(config.base, config.eps0);
    const PqrGamma pqr = ClosedFormPqr(leaf.spec);
    doc["pqr"] = {{"p", pqr.p},
                  {"q", pqr.q},
                  {"r", pqr.r},
                  {"gamma", pqr.gamma()}};
  }
  return doc.dump(2) + "\n";
}

std::string RunGparvDump(const RunConfig& config) {
  if (!config.eps.has_value()) {
    throw ValidationError("gparv-dump requires --eps");
  }
  RunConfig fixed = config;
  if (config.base.kind == RandomizerKind::kTabular &&
      !config.x0.has_value() && config.parallel.empty() &&
      !config.joint.has_value()) {
    const Leaf leaf = ResolveLeaf(config.base, config.eps0);
    auto pair = CanonicalPair(leaf.spec);
    fixed.x0 = pair.first;
    fixed.x1 = pair.second;
  }
  const bool upper = config.side != "lower";
  const auto members =
      BuildGparvs(fixed, config.eps0, *config.eps, upper);
  Json doc;
  doc["schema"] = "shuffle-amp/1";
  doc["side"] = upper ? "upper" : "lower";
  doc["eps0"] = EpsCap(config, config.eps0);
  doc["eps"] = *config.eps;
  Json list = Json::array();
  for (const auto& member : members) {
    Json entry;
    entry["label"] = member.label;
    Json atoms = Json::array();
    for (const auto& [value, mass] : member.g.atoms()) {
      atoms.push_back({{"value", value}, {"mass", mass}});
    }
    entry["atoms"] = atoms;
    entry["mean"] = member.g.Mean();
    if (member.g.continuous().has_value() &&
        member.g.continuous()->weight > 0) {
      const auto& seg = *member.g.continuous();
      entry["continuous"] = {{"weight", seg.weight},
                             {"lo", seg.cdf->lo()},
                             {"hi", seg.cdf->hi()}};
    }
    list.push_back(entry);
  }
  doc["gparvs"] = list;
  return doc.dump(2) + "\n";
}

}  // namespace

MechSpec ParseMechSpec(const std::string& raw) {
  const std::string text = Trim(raw);
  if (text.empty()) {
    throw ValidationError("empty randomizer spec");
  }
  MechSpec mech;
  std::string name = text;
  std::string args;
  const std::size_t paren = text.find('(');
  if (paren != std::string::npos) {
    if (text.back() != ')') {
      throw ValidationError("unbalanced parentheses in '" + text + "'");
    }
    name = text.substr(0, paren);
    args = text.substr(paren + 1, text.size() - paren - 2);
  }
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (name == "bot") {
    if (!args.empty()) {
      throw ValidationError("'bot' takes no arguments");
    }
    mech.is_bot = true;
    return mech;
  }
  mech.kind = KindFromName(name);
  if (args.empty()) return mech;
  for (const std::string& part : SplitTopLevel(args, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("expected key=value in '" + part + "'");
    }
    std::string key = Trim(part.substr(0, eq));
    std::string value = Trim(part.substr(eq + 1));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    try {
      if (key == "k" || key == "d" || key == "domain") {
        mech.k_or_d = std::stoi(value);
      } else if (key == "eps0") {
        mech.eps0 = std::stod(value);
      } else if (key == "file") {
        mech.table_file = value;
      } else {
        throw ValidationError("unknown randomizer argument '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad value for '" + key + "' in '" + raw + "'");
    }
  }
  return mech;
}

std::vector<std::pair<double, MechSpec>> ParseParallelSpec(
    const std::string& text) {
  std::vector<std::pair<double, MechSpec>> parts;
  double total = 0.0;
  for (const std::string& entry : SplitTopLevel(text, ',')) {
    const std::size_t colon = entry.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("expected weight:spec in '" + entry + "'");
    }
    double weight;
    try {
      weight = std::stod(Trim(entry.substr(0, colon)));
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad weight in '" + entry + "'");
    }
    if (!(weight >= 0.0)) {
      throw ValidationError("negative weight in '" + entry + "'");
    }
    total += weight;
    parts.emplace_back(weight, ParseMechSpec(entry.substr(colon + 1)));
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "parallel weights sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
  return parts;
}

std::string Run(const RunConfig& config) {
  if (!(config.eps0 > 0)) {
    throw ValidationError("--eps0 must be positive");
  }
  if (config.n < 1) {
    throw ValidationError("--n must be >= 1");
  }
  if ((config.joint.has_value() || !config.joint_coords.empty()) &&
      !config.parallel.empty()) {
    throw ValidationError("--joint and --parallel are mutually exclusive");
  }
  if (!config.format.empty()) {
    const bool want_csv = config.command == "curve";
    if ((want_csv && config.format != "csv") ||
        (!want_csv && config.format != "json")) {
      throw ValidationError("command '" + config.command +
                            "' emits " + (want_csv ? "csv" : "json") +
                            " output");
    }
  }
  if (config.command == "bound") return RunBound(config);
  if (config.command == "epsilon") return RunEpsilon(config);
  if (config.command == "eps0") return RunEps0(config);
  if (config.command == "curve") return RunCurve(config);
  if (config.command == "decompose") return RunDecompose(config);
  if (config.command == "gparv-dump") return RunGparvDump(config);
  throw ValidationError("unknown command '" + config.command + "'");
}

int RunCli(int argc, char** argv) {
  CLI::App app{
      "Optimal privacy amplification bounds for shuffled local randomizers"};
  app.require_subcommand(1);

  RunConfig config;
  std::string randomizer = "krr";
  std::string parallel_text;
  std::string joint_coords_text;
  std::string eps0_grid_text;
  std::string table_file;

  auto add_common = [&](CLI::App* cmd, bool need_n = true,
                        bool need_eps0 = true) {
    cmd->add_option("--randomizer", randomizer,
                    "krr | blh | rappor | oue | hr | laplace01 | tabular");
    auto* eps0_opt =
        cmd->add_option("--eps0", config.eps0, "local privacy budget (nats)");
    if (need_eps0) eps0_opt->required();
    cmd->add_option("--k", config.base.k_or_d, "alphabet size for krr");
    cmd->add_option("--D,--domain", config.base.k_or_d,
                    "domain size for blh/rappor/oue/hr (omit for the "
                    "asymptotic forms)");
    cmd->add_option("--table-file", table_file,
                    "JSON kernel for --randomizer tabular");
    auto* n_opt = cmd->add_option("--n", config.n, "number of users");
    if (need_n) n_opt->required();
    cmd->add_option("--step", config.step,
                    "lattice step l (default (e^eps0 - 1)/1000)");
    cmd->add_option("--joint", config.joint,
                    "joint composition of m copies, each at eps0/m");
    cmd->add_option("--joint-coords", joint_coords_text,
                    "per-coordinate specs, e.g. "
                    "'krr(k=4):c,krr(k=4):u' (c = changed, u = unchanged)");
    cmd->add_option("--adjacency-hamming", config.hamming,
                    "number of changed coordinates (default: all)");
    cmd->add_option("--parallel", parallel_text,
                    "weighted branches, e.g. '0.5:krr(k=10),0.5:blh'");
    cmd->add_option("--subsample", config.subsample,
                    "Poisson subsampling probability p*");
    cmd->add_option("--x0", config.x0, "tabular: first input of the pair");
    cmd->add_option("--x1", config.x1, "tabular: second input of the pair");
    cmd->add_option("--max-lattice", config.max_transform_length,
                    "transform length limit (default 2^26)");
    cmd->add_option("--format", config.format, "json | csv");
    cmd->add_option("--output,-o", config.output_path,
                    "write the document here instead of stdout");
  };

  CLI::App* bound = app.add_subcommand("bound", "delta at a fixed epsilon");
  add_common(bound);
  bound->add_option("--eps", config.eps, "target epsilon")->required();

  CLI::App* epsilon =
      app.add_subcommand("epsilon", "smallest epsilon with delta <= target");
  add_common(epsilon);
  epsilon->add_option("--delta", config.delta, "delta target (default 1e-6)");

  CLI::App* eps0 = app.add_subcommand(
      "eps0", "largest eps0 whose amplified epsilon meets the target");
  add_common(eps0, /*need_n=*/true, /*need_eps0=*/false);
  config.eps0 = 1.0;  // placeholder scale; the search scans the grid
  eps0->add_option("--eps", config.eps, "target epsilon")->required();
  eps0->add_option("--delta", config.delta, "delta target (default 1e-6)");
  eps0->add_option("--grid-step", config.eps0_grid_step,
                   "eps0 grid resolution (default 0.01)");
  eps0->add_option("--max-eps0", config.max_eps0,
                   "upper end of the scanned range (default 16)");

  CLI::App* curve = app.add_subcommand("curve", "amplification curve CSV");
  add_common(curve);
  curve->add_option("--delta", config.delta, "delta target (default 1e-6)");
  curve->add_option("--eps0-grid", eps0_grid_text,
                    "comma list of eps0 values, e.g. '0.5,1.0,2.0'")
      ->required();

  CLI::App* decompose =
      app.add_subcommand("decompose", "simplified optimal decomposition");
  add_common(decompose, /*need_n=*/false);

  CLI::App* dump = app.add_subcommand("gparv-dump",
                                      "amplification variable atoms");
  add_common(dump, /*need_n=*/false);
  dump->add_option("--eps", config.eps, "epsilon")->required();
  dump->add_option("--side", config.side, "upper | lower (default upper)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    config.command = app.get_subcommands().front()->get_name();
    config.base.kind = KindFromName(randomizer);
    if (!table_file.empty()) config.base.table_file = table_file;
    if (!parallel_text.empty()) {
      config.parallel = ParseParallelSpec(parallel_text);
    }
    if (!joint_coords_text.empty()) {
      for (const std::string& entry : SplitTopLevel(joint_coords_text, ',')) {
        // Optional ":c"/":u" suffix outside the parentheses.
        std::string body = Trim(entry);
        bool changed = true;
        const std::size_t colon = body.rfind(':');
        if (colon != std::string::npos && body.find('(', colon) ==
            std::string::npos) {
          const std::string flag = Trim(body.substr(colon + 1));
          if (flag == "c" || flag == "changed") {
            changed = true;
          } else if (flag == "u" || flag == "unchanged") {
            changed = false;
          } else {
            throw ValidationError("unknown coordinate flag ':" + flag + "'");
          }
          body = Trim(body.substr(0, colon));
        }
        MechSpec mech = ParseMechSpec(body);
        config.joint_coords.push_back(mech);
        config.joint_changed.push_back(changed);
      }
    }
    if (!eps0_grid_text.empty()) {
      for (const std::string& entry : SplitTopLevel(eps0_grid_text, ',')) {
        config.eps0_values.push_back(std::stod(Trim(entry)));
      }
    }
    if (const char* workers = std::getenv("SHUFFLEAMP_WORKERS")) {
      config.workers = std::max(1, std::atoi(workers));
    }

    const std::string output = Run(config);
    if (config.output_path.empty()) {
      std::cout << output;
    } else {
      std::ofstream out(config.output_path);
      if (!out) {
        throw ValidationError("cannot write to '" + config.output_path + "'");
      }
      out << output;
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace shuffleamp::cli
