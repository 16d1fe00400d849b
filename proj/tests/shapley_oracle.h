/*
 * Copyright 2026 The shuffle-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reference Shapley values by averaging marginal contributions over every
// feature ordering. Shares no code with the library engines: imputation,
// value function and weighting are re-derived here.

#ifndef SHUFFLE_AUDIT_TESTS_SHAPLEY_ORACLE_H_
#define SHUFFLE_AUDIT_TESTS_SHAPLEY_ORACLE_H_

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace shuffle_audit::testing {

using RowMatrix = std::vector<std::vector<double>>;
using RowBatchFn = std::function<std::vector<double>(const RowMatrix&)>;

inline double OracleValue(const RowBatchFn& f, const std::vector<double>& x,
                          const std::vector<bool>& present, const RowMatrix& background) {
  RowMatrix batch = background;
  for (auto& row : batch) {
    for (size_t j = 0; j < x.size(); ++j) {
      if (present[j]) row[j] = x[j];
    }
  }
  const auto y = f(batch);
  double sum = 0.0;
  for (double v : y) sum += v;
  return sum / static_cast<double>(y.size());
}

// Returns phi (size d) and writes v(empty) to *base.
inline std::vector<double> PermutationShapley(const RowBatchFn& f,
                                              const std::vector<double>& x,
                                              const RowMatrix& background,
                                              double* base) {
  const size_t d = x.size();
  std::map<std::vector<bool>, double> memo;
  const auto value = [&](const std::vector<bool>& present) {
    auto it = memo.find(present);
    if (it == memo.end()) it = memo.emplace(present, OracleValue(f, x, present, background)).first;
    return it->second;
  };
  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<double> phi(d, 0.0);
  double count = 0.0;
  do {
    std::vector<bool> present(d, false);
    double prev = value(present);
    for (size_t j : order) {
      present[j] = true;
      const double next = value(present);
      phi[j] += next - prev;
      prev = next;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& p : phi) p /= count;
  if (base != nullptr) *base = value(std::vector<bool>(d, false));
  return phi;
}

}  // namespace shuffle_audit::testing

#endif  // SHUFFLE_AUDIT_TESTS_SHAPLEY_ORACLE_H_
