#include "srcrib/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace srcrib {

namespace {
constexpr double kNormTol = 1e-6;

double plog2p(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }
}  // namespace

double binary_entropy(double a) {
  if (a < 0.0 || a > 1.0) throw std::domain_error("binary_entropy: argument outside [0,1]");
  return plog2p(a) + plog2p(1.0 - a);
}

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h += plog2p(v);
  return h;
}

CribFunction CribFunction::identity(int n) {
  CribFunction g;
  g.map.resize(static_cast<size_t>(n));
  std::iota(g.map.begin(), g.map.end(), 0);
  return g;
}

CribFunction CribFunction::constant(int n, int value) {
  CribFunction g;
  g.map.assign(static_cast<size_t>(n), value);
  return g.compacted();
}

CribFunction CribFunction::parity(int n) {
  CribFunction g;
  g.map.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) g.map[static_cast<size_t>(i)] = i & 1;
  return g;
}

CribFunction CribFunction::compacted() const {
  std::set<int> used(map.begin(), map.end());
  CribFunction out;
  out.map.reserve(map.size());
  for (int z : map) {
    out.map.push_back(static_cast<int>(std::distance(used.begin(), used.find(z))));
  }
  return out;
}

int CribFunction::range_size() const {
  if (map.empty()) return 0;
  return *std::max_element(map.begin(), map.end()) + 1;
}

JointPmf::JointPmf(std::vector<Alphabet> vars, std::vector<double> probs)
    : vars_(std::move(vars)), probs_(std::move(probs)) {
  size_t expected = 1;
  std::set<std::string> names;
  for (const auto& v : vars_) {
    if (v.size < 1) throw UsageError("JointPmf: alphabet size must be >= 1");
    if (!names.insert(v.name).second) throw UsageError("JointPmf: duplicate variable " + v.name);
    expected *= static_cast<size_t>(v.size);
  }
  if (probs_.size() != expected) throw UsageError("JointPmf: table size mismatch");
  double sum = 0.0;
  for (double& p : probs_) {
    if (p < 0.0) {
      if (p < -1e-12) throw UsageError("JointPmf: negative probability entry");
      p = 0.0;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTol) throw UsageError("JointPmf: entries do not sum to 1");
  for (double& p : probs_) p /= sum;

  strides_.assign(vars_.size(), 1);
  for (size_t i = vars_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * static_cast<size_t>(vars_[i].size);
  }
}

bool JointPmf::has_variable(const std::string& name) const {
  for (const auto& v : vars_)
    if (v.name == name) return true;
  return false;
}

int JointPmf::axis(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  throw UsageError("JointPmf: unknown variable " + name);
}

int JointPmf::size_of(const std::string& name) const {
  return vars_[static_cast<size_t>(axis(name))].size;
}

int JointPmf::symbol_at(size_t idx, int ax) const {
  return static_cast<int>((idx / strides_[static_cast<size_t>(ax)]) %
                          static_cast<size_t>(vars_[static_cast<size_t>(ax)].size));
}

JointPmf JointPmf::marginalize(const std::vector<std::string>& keep) const {
  if (keep.empty()) throw UsageError("marginalize: empty keep list");
  std::vector<int> axes;
  std::vector<Alphabet> out_vars;
  for (const auto& name : keep) {
    int ax = axis(name);
    if (std::find(axes.begin(), axes.end(), ax) != axes.end())
      throw UsageError("marginalize: repeated variable " + name);
    axes.push_back(ax);
    out_vars.push_back(vars_[static_cast<size_t>(ax)]);
  }
  std::vector<size_t> out_strides(axes.size(), 1);
  for (size_t i = axes.size(); i-- > 1;)
    out_strides[i - 1] = out_strides[i] * static_cast<size_t>(out_vars[i].size);
  size_t out_size = out_strides.empty() ? 1 : out_strides[0] * static_cast<size_t>(out_vars[0].size);

  std::vector<double> out(out_size, 0.0);
  for (size_t idx = 0; idx < probs_.size(); ++idx) {
    if (probs_[idx] == 0.0) continue;
    size_t o = 0;
    for (size_t k = 0; k < axes.size(); ++k)
      o += static_cast<size_t>(symbol_at(idx, axes[k])) * out_strides[k];
    out[o] += probs_[idx];
  }
  return JointPmf(std::move(out_vars), std::move(out));
}

double JointPmf::entropy(const std::vector<std::string>& names) const {
  if (names.empty()) throw UsageError("entropy: empty variable list");
  if (names.size() == vars_.size()) {
    bool all = true;
    for (const auto& n : names) all = all && has_variable(n);
    if (all) return entropy_bits(probs_);
  }
  JointPmf m = marginalize(names);
  return entropy_bits(m.probs_);
}

double JointPmf::conditional_entropy(const std::vector<std::string>& target,
                                     const std::vector<std::string>& given) const {
  for (const auto& t : target)
    if (std::find(given.begin(), given.end(), t) != given.end())
      throw UsageError("conditional_entropy: overlapping variable sets");
  if (given.empty()) return entropy(target);
  std::vector<std::string> both = target;
  both.insert(both.end(), given.begin(), given.end());
  return entropy(both) - entropy(given);
}

double JointPmf::mutual_information(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b,
                                    const std::vector<std::string>& given) const {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end() ||
        std::find(given.begin(), given.end(), x) != given.end())
      throw UsageError("mutual_information: variable sets must be disjoint");
  }
  for (const auto& x : b)
    if (std::find(given.begin(), given.end(), x) != given.end())
      throw UsageError("mutual_information: variable sets must be disjoint");
  std::vector<std::string> b_given = b;
  b_given.insert(b_given.end(), given.begin(), given.end());
  double mi = conditional_entropy(a, given) - conditional_entropy(a, b_given);
  return mi > 0.0 ? mi : 0.0;
}

JointPmf JointPmf::extend_with_function(const std::string& source_var,
                                        const CribFunction& g,
                                        const std::string& new_var) const {
  if (has_variable(new_var)) throw UsageError("extend_with_function: name clash on " + new_var);
  int src_ax = axis(source_var);
  if (g.map.size() != static_cast<size_t>(vars_[static_cast<size_t>(src_ax)].size))
    throw UsageError("extend_with_function: g not total over source alphabet");
  CribFunction gc = g.compacted();
  int z_size = gc.range_size();

  std::vector<Alphabet> out_vars = vars_;
  out_vars.push_back({new_var, z_size});
  std::vector<double> out(probs_.size() * static_cast<size_t>(z_size), 0.0);
  for (size_t idx = 0; idx < probs_.size(); ++idx) {
    int z = gc(symbol_at(idx, src_ax));
    out[idx * static_cast<size_t>(z_size) + static_cast<size_t>(z)] = probs_[idx];
  }
  return JointPmf(std::move(out_vars), std::move(out));
}

std::vector<double> JointPmf::conditional_table(
    const std::string& target, const std::vector<std::string>& given) const {
  std::vector<std::string> order = given;
  order.push_back(target);
  JointPmf m = marginalize(order);
  int t_size = m.vars_.back().size;
  size_t rows = m.probs_.size() / static_cast<size_t>(t_size);
  std::vector<double> out = m.probs_;
  for (size_t r = 0; r < rows; ++r) {
    double mass = 0.0;
    for (int t = 0; t < t_size; ++t) mass += out[r * static_cast<size_t>(t_size) + static_cast<size_t>(t)];
    for (int t = 0; t < t_size; ++t) {
      double& cell = out[r * static_cast<size_t>(t_size) + static_cast<size_t>(t)];
      cell = mass > 0.0 ? cell / mass : 1.0 / t_size;
    }
  }
  return out;
}

DistortionSpec DistortionSpec::hamming(int x_size, double D1, double D2) {
  DistortionSpec s;
  s.d1.assign(static_cast<size_t>(x_size), std::vector<double>(static_cast<size_t>(x_size), 1.0));
  for (int i = 0; i < x_size; ++i) s.d1[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0.0;
  s.d2 = s.d1;
  s.budget1 = D1;
  s.budget2 = D2;
  return s;
}

double DistortionSpec::d_max() const {
  double m = 0.0;
  for (const auto& row : d1)
    for (double v : row) m = std::max(m, v);
  for (const auto& row : d2)
    for (double v : row) m = std::max(m, v);
  return m;
}

double expected_distortion(const JointPmf& p, const DistortionSpec& spec, int decoder) {
  if (decoder != 1 && decoder != 2) throw UsageError("expected_distortion: decoder must be 1 or 2");
  const auto& table = decoder == 1 ? spec.d1 : spec.d2;
  const char* xh = decoder == 1 ? kVarXh1 : kVarXh2;
  int ax_x = p.axis(kVarX);
  int ax_h = p.axis(xh);
  double total = 0.0;
  const auto& probs = p.probs();
  for (size_t idx = 0; idx < probs.size(); ++idx) {
    if (probs[idx] == 0.0) continue;
    total += probs[idx] * table[static_cast<size_t>(p.symbol_at(idx, ax_x))]
                               [static_cast<size_t>(p.symbol_at(idx, ax_h))];
  }
  return total;
}

}  // namespace srcrib
