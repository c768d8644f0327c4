// Copyright 2026 The linswap Authors
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

#ifndef LINSWAP_TOLERANCES_HPP_
#define LINSWAP_TOLERANCES_HPP_

namespace linswap {

// All numerical tolerances live here. Production solves run one order
// tighter than the audits that check them.
struct Tolerances {
  double feasibility = 1e-9;  // constraint residuals of produced points
  double fixed_point = 1e-8;  // ‖Ax − x‖∞ of fixed-point solves
  double audit = 1e-7;        // membership / equivalence verification
  double lp_gap = 1e-8;       // LP duality gap at optimality
  double prob_sum = 1e-12;    // chance distributions, plan mixtures
};

inline const Tolerances& tols() {
  static const Tolerances t;
  return t;
}

}  // namespace linswap

#endif  // LINSWAP_TOLERANCES_HPP_
