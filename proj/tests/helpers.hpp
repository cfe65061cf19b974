#ifndef SRCRIB_TESTS_HELPERS_HPP
#define SRCRIB_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "srcrib/prob.hpp"

namespace srcrib::testing {

// Symmetric one-parameter binary family meeting Hamming budgets (D1, D2)
// with equality: p-vector (p1, 1-D1-p1, 1-D2-p1, p1+D1+D2-1) over the
// four (Xh1, Xh2) agreement patterns, mirrored across the uniform X.
inline JointPmf family_joint(double p1, double D1, double D2) {
  double pv[4] = {p1, 1 - D1 - p1, 1 - D2 - p1, p1 + D1 + D2 - 1};
  std::vector<double> t(8);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int aa = x ? 1 - a : a, bb = x ? 1 - b : b;
        t[static_cast<std::size_t>(x * 4 + a * 2 + b)] = 0.5 * pv[aa * 2 + bb];
      }
  return JointPmf({{kVarX, 2}, {kVarXh1, 2}, {kVarXh2, 2}}, t);
}

// Dirichlet(1,...,1) table over the given shape.
inline JointPmf random_joint(const std::vector<Alphabet>& vars, std::mt19937& rng) {
  std::size_t total = 1;
  for (const auto& v : vars) total *= static_cast<std::size_t>(v.size);
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> t(total);
  double sum = 0;
  for (auto& v : t) sum += (v = exp1(rng));
  for (auto& v : t) v /= sum;
  return JointPmf(vars, t);
}

inline JointPmf random_sr_joint(std::mt19937& rng) {
  return random_joint({{kVarX, 2}, {kVarXh1, 2}, {kVarXh2, 2}}, rng);
}

}  // namespace srcrib::testing

#endif
