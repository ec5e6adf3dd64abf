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

#ifndef SHUFFLEAMP_CATALOG_H_
#define SHUFFLEAMP_CATALOG_H_

#include "shuffleamp/decomposition.h"
#include "shuffleamp/randomizers.h"

namespace shuffleamp {

// Simplified optimal decomposition of a catalog mechanism at its canonical
// input pair (closed forms; no table is materialized). changed = false
// models a coordinate whose input is identical under both neighboring
// datasets. Unsupported for kLaplace01 (no finite decomposition) and
// kTabular (use PrimaryOptimal on the kernel).
CloneDecomposition UpperDecomposition(const RandomizerSpec& spec,
                                      bool changed = true);

// The lower-bound triple (rows at x1^0, x1^1, x2) of a catalog mechanism in
// beta = 0 decomposition form. x2 is the third input symbol when one
// exists, otherwise x1^1. Asymptotic BLH/RAPPOR/OUE use the D = 3 tables
// (their triples do not depend on D beyond 3); asymptotic HR uses the
// D -> infinity eight-class form with independent inputs.
CloneDecomposition LowerTripleDecomposition(const RandomizerSpec& spec,
                                            bool changed = true);

}  // namespace shuffleamp

#endif  // SHUFFLEAMP_CATALOG_H_
