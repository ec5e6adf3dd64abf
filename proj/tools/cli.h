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

#ifndef SHUFFLEAMP_TOOLS_CLI_H_
#define SHUFFLEAMP_TOOLS_CLI_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shuffleamp/randomizers.h"

namespace shuffleamp::cli {

// One leaf mechanism as written on the command line, e.g. "krr(k=10)",
// "blh(d=8,eps0=1.5)", "bot", "tabular(file=kernel.json)".
struct MechSpec {
  bool is_bot = false;
  RandomizerKind kind = RandomizerKind::kKrr;
  std::optional<int> k_or_d;
  std::optional<double> eps0;
  std::optional<std::string> table_file;
};

MechSpec ParseMechSpec(const std::string& text);

// Parses "w1:spec1,w2:spec2,..."; weights must sum to 1 within 1e-9.
std::vector<std::pair<double, MechSpec>> ParseParallelSpec(
    const std::string& text);

struct RunConfig {
  std::string command;  // bound | epsilon | eps0 | curve | decompose | gparv-dump
  MechSpec base;
  double eps0 = 0.0;
  std::int64_t n = 1;
  std::optional<double> eps;
  double delta = 1e-6;
  std::optional<double> step;

  // Composition. joint and parallel are mutually exclusive; subsample wraps
  // whichever is present (or the base mechanism).
  std::optional<int> joint;
  std::vector<MechSpec> joint_coords;
  std::vector<bool> joint_changed;  // aligned with joint_coords
  std::optional<int> hamming;
  std::vector<std::pair<double, MechSpec>> parallel;
  std::optional<double> subsample;

  // eps0 search / curve parameters.
  double eps0_grid_step = 0.01;
  double max_eps0 = 16.0;
  std::vector<double> eps0_values;

  // Tabular input pair override (defaults to sweeping all ordered pairs).
  std::optional<std::string> x0;
  std::optional<std::string> x1;

  std::string side = "upper";  // gparv-dump: upper | lower
  std::string format;          // json | csv (defaulted per command)
  std::string output_path;     // empty = stdout
  int workers = 1;
  std::size_t max_transform_length = 0;  // 0 = library default
};

// Executes the command and returns the emitted document. Throws
// ValidationError / ResourceError on bad configurations.
std::string Run(const RunConfig& config);

// Full argv-level entry point: parses flags, runs, writes the output, maps
// exceptions to exit codes (0 ok, 2 validation, 3 resource).
int RunCli(int argc, char** argv);

}  // namespace shuffleamp::cli

#endif  // SHUFFLEAMP_TOOLS_CLI_H_
