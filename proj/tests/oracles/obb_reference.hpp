// Copyright 2026 The nsplan Authors
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

#ifndef NSPLAN_TESTS_ORACLES_OBB_REFERENCE_HPP_
#define NSPLAN_TESTS_ORACLES_OBB_REFERENCE_HPP_

#include <cmath>

#include "nsplan/scenario.hpp"

// Dense point-sampling overlap oracle: sample a grid of interior points of box a
// (shrunk by eps so edge contact never counts) and test containment in box
// b, then the reverse. Quadratic and slow, used only to cross-check the
// separating-axis implementation away from exact-tangency boundaries.

namespace oracle
{

inline bool point_in_obb(double px, double py, const nsplan::scen::Obb & b, double eps)
{
  const double dx = px - b.cx;
  const double dy = py - b.cy;
  const double c = std::cos(b.heading);
  const double s = std::sin(b.heading);
  const double along = c * dx + s * dy;
  const double across = -s * dx + c * dy;
  return std::fabs(along) < b.half_len - eps && std::fabs(across) < b.half_wid - eps;
}

inline bool sampled_overlap_one_way(
  const nsplan::scen::Obb & a, const nsplan::scen::Obb & b, int grid, double eps)
{
  const double c = std::cos(a.heading);
  const double s = std::sin(a.heading);
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      const double u = (2.0 * i / grid - 1.0) * (a.half_len - eps);
      const double w = (2.0 * j / grid - 1.0) * (a.half_wid - eps);
      const double px = a.cx + c * u - s * w;
      const double py = a.cy + s * u + c * w;
      if (point_in_obb(px, py, b, eps)) {
        return true;
      }
    }
  }
  return false;
}

// True iff interior points of one box land inside the other. eps shrinks
// both boxes so the answer is reliable for pairs separated or overlapping by
// clearly more than eps * grid resolution.
inline bool sampled_overlap(
  const nsplan::scen::Obb & a, const nsplan::scen::Obb & b, int grid = 80, double eps = 1e-9)
{
  return sampled_overlap_one_way(a, b, grid, eps) || sampled_overlap_one_way(b, a, grid, eps);
}

}  // namespace oracle

#endif  // NSPLAN_TESTS_ORACLES_OBB_REFERENCE_HPP_
