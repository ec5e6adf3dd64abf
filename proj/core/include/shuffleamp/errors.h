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

#ifndef SHUFFLEAMP_ERRORS_H_
#define SHUFFLEAMP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace shuffleamp {

// Invalid inputs or violated invariants (domain mismatches, bad weights,
// failed decomposition checks). The CLI maps this family to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested computation exceeds configured size or memory limits.
// The CLI maps this family to exit code 3.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_ERRORS_H_
