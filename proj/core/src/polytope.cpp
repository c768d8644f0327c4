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

#include "linswap/polytope.hpp"

#include <cmath>
#include <stdexcept>

namespace linswap {

double StandardPolytope::residual(const Eigen::VectorXd& x) const {
  double r = (P * x - p).cwiseAbs().maxCoeff();
  for (int i = 0; i < x.size(); ++i) {
    r = std::max(r, -x[i]);
    r = std::max(r, x[i] - gamma);
  }
  return r;
}

InequalityLift inequality_to_standard(const Eigen::MatrixXd& C,
                                      const Eigen::VectorXd& c, double gamma) {
  const int m = static_cast<int>(C.rows());
  const int n = static_cast<int>(C.cols());
  double k = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < m; ++i) k = std::max(k, C.row(i).cwiseAbs().sum());
  if (k <= 0) k = 1.0;
  const double slack_scale = k * n;

  InequalityLift lift;
  lift.original_dim = n;
  lift.shift = gamma;
  StandardPolytope& std_form = lift.standard;
  std_form.gamma = 2 * gamma;
  std_form.p = c + gamma * C.rowwise().sum();
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      if (C(i, j) != 0) trips.emplace_back(i, j, C(i, j));
    trips.emplace_back(i, n + i, slack_scale);
  }
  std_form.P.resize(m, n + m);
  std_form.P.setFromTriplets(trips.begin(), trips.end());
  for (int j = 0; j < n; ++j)
    std_form.var_names.push_back("y" + std::to_string(j));
  for (int i = 0; i < m; ++i)
    std_form.var_names.push_back("s" + std::to_string(i));
  return lift;
}

Eigen::VectorXd InequalityLift::to_original(const Eigen::VectorXd& lifted) const {
  return lifted.head(original_dim).array() - shift;
}

}  // namespace linswap
