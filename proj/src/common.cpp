// Copyright 2026 The eee-dynamics Authors
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

#include "eee/common.hpp"

#include <algorithm>
#include <cmath>

namespace eee {

double MaxAbsDiff(const Table3& a, const Table3& b) {
  if (!a.SameShape(b)) throw StructuralError("MaxAbsDiff: shape mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  }
  return d;
}

double RowSumNorm(const Matrix& m) {
  // Left-to-right sums keep the result independent of vectorization.
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) sum += std::abs(m(r, c));
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace eee
