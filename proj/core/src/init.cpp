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

#include "crackres/init.hpp"

#include <Eigen/Dense>

#include "crackres/rng.hpp"

namespace crackres {

Tensor orthogonal_init(const Shape& shape, std::uint64_t seed, double gain) {
  if (shape.empty()) throw ShapeError("orthogonal_init: empty shape");
  const std::size_t cols = shape.size() == 1 ? 1 : shape.back();
  const std::size_t rows = num_elements(shape) / cols;

  // Decompose the tall orientation so Q has orthonormal columns.
  const bool wide = rows < cols;
  const auto tall_rows = static_cast<Eigen::Index>(wide ? cols : rows);
  const auto tall_cols = static_cast<Eigen::Index>(wide ? rows : cols);

  Rng rng(seed);
  Eigen::MatrixXd gaussian(tall_rows, tall_cols);
  for (Eigen::Index r = 0; r < tall_rows; ++r) {
    for (Eigen::Index c = 0; c < tall_cols; ++c) gaussian(r, c) = rng.normal();
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(tall_rows, tall_cols);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(tall_cols).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < tall_cols; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  if (wide) q.transposeInPlace();

  Tensor out(shape);
  std::size_t i = 0;
  for (Eigen::Index row = 0; row < q.rows(); ++row) {
    for (Eigen::Index col = 0; col < q.cols(); ++col) {
      out[i++] = static_cast<float>(gain * q(row, col));
    }
  }
  return out;
}

}  // namespace crackres
