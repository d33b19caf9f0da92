// Copyright 2026 The crackres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "crackres/tensor.hpp"

namespace crackres {

/// Orthogonal initializer.
///
/// The tensor is viewed as a (product of leading extents) x (last extent)
/// matrix, i.e. (k*k*Cin) x Cout for a conv kernel and n x m for a dense
/// layer. A seeded standard-normal matrix of that shape (transposed first if
/// it is wide) is QR-decomposed; Q's columns are sign-fixed by diag(R) and
/// the result is reshaped back. Rank-1 shapes are treated as a column.
/// Identical seeds give bit-identical output.
Tensor orthogonal_init(const Shape& shape, std::uint64_t seed, double gain = 1.0);

}  // namespace crackres
