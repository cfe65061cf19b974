#include "srcrib/mac.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace srcrib {

namespace {

constexpr double kMatchTol = 1e-9;

double pos_part(double a) { return a > 0.0 ? a : 0.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// MacInstance
// ---------------------------------------------------------------------------

MacInstance::MacInstance(JointPmf input, std::vector<double> channel, int y_size,
                         CribFunction g) {
  const auto& vars = input.variables();
  const bool with_u = input.has_variable(kVarU);
  const size_t expect = with_u ? 3 : 2;
  if (vars.size() != expect || !input.has_variable(kVarX1) ||
      !input.has_variable(kVarX2)) {
    throw UsageError("MacInstance: input must be a joint over {X1, X2} or {U, X1, X2}");
  }
  if (y_size < 1) throw UsageError("MacInstance: y_size must be positive");
  const int x1s = input.size_of(kVarX1);
  const int x2s = input.size_of(kVarX2);
  if (channel.size() != static_cast<size_t>(x1s) * x2s * y_size)
    throw UsageError("MacInstance: channel table has the wrong shape");
  for (int r = 0; r < x1s * x2s; ++r) {
    double s = 0.0;
    for (int y = 0; y < y_size; ++y) {
      const double v = channel[static_cast<size_t>(r) * y_size + y];
      if (v < -1e-12) throw UsageError("MacInstance: negative channel entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw UsageError("MacInstance: channel row does not sum to 1");
  }
  if (g.map.empty()) g = CribFunction::identity(x1s);
  if (static_cast<int>(g.map.size()) != x1s)
    throw UsageError("MacInstance: crib function not total over X1");
  g_ = g.compacted();

  std::vector<Alphabet> jvars = vars;
  jvars.push_back({kVarY, y_size});
  const int a1 = input.axis(kVarX1);
  const int a2 = input.axis(kVarX2);
  std::vector<double> probs(input.table_size() * static_cast<size_t>(y_size));
  for (size_t i = 0; i < input.table_size(); ++i) {
    const int x1 = input.symbol_at(i, a1);
    const int x2 = input.symbol_at(i, a2);
    const size_t row = static_cast<size_t>(x1 * x2s + x2) * y_size;
    for (int y = 0; y < y_size; ++y)
      probs[i * static_cast<size_t>(y_size) + y] =
          input.probs()[i] * channel[row + static_cast<size_t>(y)];
  }
  joint_ = JointPmf(std::move(jvars), std::move(probs))
               .extend_with_function(kVarX1, g_, kVarZ1);
}

MacInstance MacInstance::from_sr_joint(const JointPmf& sr, const CribFunction& g) {
  if (!sr.has_variable(kVarX) || !sr.has_variable(kVarXh1) ||
      !sr.has_variable(kVarXh2)) {
    throw UsageError("from_sr_joint: joint must contain X, Xh1, Xh2");
  }
  std::vector<std::string> keep;
  if (sr.has_variable(kVarU)) keep.push_back(kVarU);
  keep.push_back(kVarXh1);
  keep.push_back(kVarXh2);
  JointPmf marg = sr.marginalize(keep);
  std::vector<Alphabet> renamed = marg.variables();
  for (auto& a : renamed) {
    if (a.name == kVarXh1) a.name = kVarX1;
    else if (a.name == kVarXh2) a.name = kVarX2;
  }
  JointPmf input(std::move(renamed), marg.probs());
  std::vector<double> channel = sr.conditional_table(kVarX, {kVarXh1, kVarXh2});
  return MacInstance(std::move(input), std::move(channel), sr.size_of(kVarX), g);
}

// ---------------------------------------------------------------------------
// Regions and corners
// ---------------------------------------------------------------------------

MacRegionSpec mac_region(const MacInstance& m, CribbingMode mode) {
  const JointPmf& j = m.joint();
  MacRegionSpec r;
  r.sum_rate_ub = j.mutual_information({kVarY}, {kVarX1, kVarX2});
  switch (mode) {
    case CribbingMode::NonCausal:
      r.r1_ub = j.mutual_information({kVarY}, {kVarX1}, {kVarX2, kVarZ1}) +
                j.entropy({kVarZ1});
      break;
    case CribbingMode::StrictlyCausal:
      r.r1_ub = j.mutual_information({kVarY}, {kVarX1}, {kVarX2, kVarZ1}) +
                j.conditional_entropy({kVarZ1}, {kVarX2});
      break;
    case CribbingMode::Causal: {
      if (!m.has_u())
        throw UsageError("mac_region: causal mode needs the U structure");
      if (j.conditional_entropy({kVarX2}, {kVarU, kVarZ1}) > kMatchTol)
        throw StructuralError("mac_region: X2 is not a function of (U, Z1)");
      const double i_x1u = j.mutual_information({kVarY}, {kVarX1, kVarU});
      if (std::abs(i_x1u - r.sum_rate_ub) > kMatchTol)
        throw StructuralError("mac_region: I(Y;X1,U) != I(Y;X1,X2) by " +
                              fmt(std::abs(i_x1u - r.sum_rate_ub)));
      r.r1_ub = j.mutual_information({kVarY}, {kVarX1}, {kVarU, kVarZ1}) +
                j.conditional_entropy({kVarZ1}, {kVarU});
      break;
    }
  }
  return r;
}

MacRegionSpec mac_conferencing_region(const MacInstance& m, double r12) {
  if (!(r12 >= 0.0)) throw UsageError("mac_conferencing_region: r12 must be >= 0");
  const JointPmf& j = m.joint();
  MacRegionSpec r;
  r.sum_rate_ub = j.mutual_information({kVarY}, {kVarX1, kVarX2});
  r.r1_ub = j.mutual_information({kVarY}, {kVarX1}, {kVarX2}) + r12;
  return r;
}

std::vector<CornerPoint> mac_corner_points(const MacRegionSpec& r,
                                           CribbingMode mode,
                                           const MacInstance& m) {
  const JointPmf& j = m.joint();
  double r0 = 0.0;
  switch (mode) {
    case CribbingMode::NonCausal:
      r0 = pos_part(j.mutual_information({kVarY}, {kVarX2, kVarZ1}) -
                    j.entropy({kVarZ1}));
      break;
    case CribbingMode::StrictlyCausal:
      r0 = pos_part(j.mutual_information({kVarY}, {kVarX2, kVarZ1}) -
                    j.conditional_entropy({kVarZ1}, {kVarX2}));
      break;
    case CribbingMode::Causal:
      r0 = pos_part(j.mutual_information({kVarY}, {kVarU, kVarZ1}) -
                    j.conditional_entropy({kVarZ1}, {kVarU}));
      break;
  }
  return {{r.sum_rate_ub, 0.0, "all-common"},
          {r0, r.sum_rate_ub - r0, "max-private"}};
}

std::vector<CornerPoint> sr_corner_points(const JointPmf& p, CribbingMode mode) {
  const bool has_z = p.has_variable(kVarZh1);
  const std::string z = has_z ? kVarZh1 : kVarXh1;
  const std::string second = mode == CribbingMode::Causal ? kVarU : kVarXh2;
  const double sum = p.mutual_information({kVarX}, {kVarXh1, second});
  double r0 = 0.0;
  switch (mode) {
    case CribbingMode::NonCausal:
      r0 = pos_part(p.mutual_information({kVarX}, {kVarXh2, z}) - p.entropy({z}));
      break;
    case CribbingMode::StrictlyCausal:
      r0 = pos_part(p.mutual_information({kVarX}, {kVarXh2, z}) -
                    p.conditional_entropy({z}, {kVarXh2}));
      break;
    case CribbingMode::Causal:
      r0 = pos_part(p.mutual_information({kVarX}, {kVarU, z}) -
                    p.conditional_entropy({z}, {kVarU}));
      break;
  }
  return {{sum, 0.0, "all-common"}, {r0, sum - r0, "max-private"}};
}

std::vector<CornerPoint> mac_conferencing_corners(const MacInstance& m, double r12) {
  if (!(r12 >= 0.0)) throw UsageError("mac_conferencing_corners: r12 must be >= 0");
  const JointPmf& j = m.joint();
  const double sum = j.mutual_information({kVarY}, {kVarX1, kVarX2});
  const double i1 = j.mutual_information({kVarY}, {kVarX1}, {kVarX2});
  const double i2 = j.mutual_information({kVarY}, {kVarX2});
  return {{sum, 0.0, "all-common"},
          {pos_part(i2 - r12), std::min(sum, i1 + r12), "max-private"}};
}

std::vector<CornerPoint> sr_conferencing_corners(const JointPmf& p, double r12) {
  if (!(r12 >= 0.0)) throw UsageError("sr_conferencing_corners: r12 must be >= 0");
  const double sum = p.mutual_information({kVarX}, {kVarXh1, kVarXh2});
  const double i1 = p.mutual_information({kVarX}, {kVarXh1}, {kVarXh2});
  const double i2 = p.mutual_information({kVarX}, {kVarXh2});
  return {{sum, 0.0, "all-common"},
          {pos_part(i2 - r12), std::min(sum, i1 + r12), "max-private"}};
}

// ---------------------------------------------------------------------------
// Duality
// ---------------------------------------------------------------------------

namespace {

// Max-norm distance between the SR joint and the MAC joint under the
// renaming X -> Y, Xh1 -> X1, Xh2 -> X2, Zh1 -> Z1.
double joint_mismatch(const JointPmf& sr_in, const MacInstance& mac) {
  JointPmf sr = sr_in;
  if (!sr.has_variable(kVarZh1))
    sr = sr.extend_with_function(kVarXh1, mac.crib(), kVarZh1);
  std::vector<std::string> sr_keep, mac_keep;
  if (sr.has_variable(kVarU) && mac.has_u()) {
    sr_keep.push_back(kVarU);
    mac_keep.push_back(kVarU);
  }
  for (auto [s, t] : {std::pair{kVarX, kVarY}, {kVarXh1, kVarX1},
                      {kVarXh2, kVarX2}, {kVarZh1, kVarZ1}}) {
    sr_keep.push_back(s);
    mac_keep.push_back(t);
  }
  JointPmf a = sr.marginalize(sr_keep);
  JointPmf b = mac.joint().marginalize(mac_keep);
  if (a.table_size() != b.table_size())
    throw UsageError("duality_check: alphabet sizes differ between the pair");
  double worst = 0.0;
  for (size_t i = 0; i < a.table_size(); ++i)
    worst = std::max(worst, std::abs(a.probs()[i] - b.probs()[i]));
  return worst;
}

DualityReport compare_corners(std::vector<CornerPoint> sr,
                              std::vector<CornerPoint> mac, double mismatch) {
  DualityReport rep;
  rep.joint_max_norm = mismatch;
  rep.sr_corners = std::move(sr);
  rep.mac_corners = std::move(mac);
  for (size_t i = 0; i < rep.sr_corners.size(); ++i) {
    rep.max_discrepancy = std::max(
        {rep.max_discrepancy, std::abs(rep.sr_corners[i].r0 - rep.mac_corners[i].r0),
         std::abs(rep.sr_corners[i].r1 - rep.mac_corners[i].r1)});
  }
  rep.ok = rep.max_discrepancy <= kMatchTol;
  return rep;
}

}  // namespace

DualityReport duality_check(const JointPmf& sr_joint, const MacInstance& mac,
                            CribbingMode mode) {
  const double mismatch = joint_mismatch(sr_joint, mac);
  if (mismatch > kMatchTol)
    throw UsageError("duality_check: renamed joints differ by " + fmt(mismatch));
  JointPmf sr = sr_joint;
  if (!sr.has_variable(kVarZh1))
    sr = sr.extend_with_function(kVarXh1, mac.crib(), kVarZh1);
  DualityReport rep =
      compare_corners(sr_corner_points(sr, mode),
                      mac_corner_points(mac_region(mac, mode), mode, mac), mismatch);
  if (mode == CribbingMode::StrictlyCausal) {
    rep.notes.push_back(
        "strictly-causal corner uses the X2-conditioned crib entropy H(Z1|X2); "
        "the U-conditioned variant is intentionally not used here");
  }
  return rep;
}

DualityReport duality_check_conferencing(const JointPmf& sr_joint,
                                         const MacInstance& mac, double r12) {
  const double mismatch = joint_mismatch(sr_joint, mac);
  if (mismatch > kMatchTol)
    throw UsageError("duality_check: renamed joints differ by " + fmt(mismatch));
  return compare_corners(sr_conferencing_corners(sr_joint, r12),
                         mac_conferencing_corners(mac, r12), mismatch);
}

// ---------------------------------------------------------------------------
// Inequality systems and Fourier-Motzkin elimination
// ---------------------------------------------------------------------------

void IneqSystem::add(const std::vector<std::pair<std::string, double>>& terms,
                     double rhs, std::string label) {
  Ineq q;
  q.coef.assign(vars.size(), 0.0);
  for (const auto& [name, c] : terms) {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw UsageError("IneqSystem: unknown variable " + name);
    q.coef[static_cast<size_t>(it - vars.begin())] += c;
  }
  q.rhs = rhs;
  q.label = label.empty() ? ("row" + std::to_string(ineqs.size())) : std::move(label);
  ineqs.push_back(std::move(q));
}

void IneqSystem::add_equality(const std::vector<std::pair<std::string, double>>& terms,
                              double rhs, const std::string& label) {
  add(terms, rhs, label.empty() ? "" : label + "<=");
  std::vector<std::pair<std::string, double>> neg = terms;
  for (auto& [n, c] : neg) c = -c;
  add(neg, -rhs, label.empty() ? "" : label + ">=");
}

double IneqSystem::box_half_width() const {
  if (box > 0.0) return box;
  double s = 0.0;
  for (const auto& q : ineqs) s += std::abs(q.rhs);
  return s > 0.0 ? s : 1.0;
}

namespace {

constexpr double kCoefTol = 1e-12;

bool all_zero(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(),
                     [](double v) { return std::abs(v) < kCoefTol; });
}

// Gaussian elimination with partial pivoting; empty on singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (size_t c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// max c.v subject to rows (A v <= b) intersected with [-B, B]^k, by
// enumerating vertices. Returns -inf when that region is empty.
double max_over_polytope(const std::vector<Ineq>& rows, const std::vector<double>& c,
                         double B) {
  const size_t k = c.size();
  std::vector<Ineq> all = rows;
  for (size_t i = 0; i < k; ++i) {
    Ineq up, dn;
    up.coef.assign(k, 0.0);
    dn.coef.assign(k, 0.0);
    up.coef[i] = 1.0;
    up.rhs = B;
    dn.coef[i] = -1.0;
    dn.rhs = B;
    all.push_back(up);
    all.push_back(dn);
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<size_t> idx(k, 0);
  std::vector<size_t> comb(k);
  // enumerate k-subsets of `all`
  std::function<void(size_t, size_t)> rec = [&](size_t start, size_t depth) {
    if (depth == k) {
      std::vector<std::vector<double>> a(k);
      std::vector<double> b(k);
      for (size_t i = 0; i < k; ++i) {
        a[i] = all[comb[i]].coef;
        b[i] = all[comb[i]].rhs;
      }
      auto v = solve_square(std::move(a), std::move(b));
      if (!v) return;
      for (const auto& q : all) {
        double lhs = 0.0;
        for (size_t i = 0; i < k; ++i) lhs += q.coef[i] * (*v)[i];
        if (lhs > q.rhs + 1e-7) return;
      }
      double obj = 0.0;
      for (size_t i = 0; i < k; ++i) obj += c[i] * (*v)[i];
      best = std::max(best, obj);
      return;
    }
    for (size_t i = start; i < all.size(); ++i) {
      comb[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Normalized fingerprint for duplicate elimination.
std::vector<long long> fingerprint(const Ineq& q) {
  double scale = 0.0;
  for (double c : q.coef) scale = std::max(scale, std::abs(c));
  if (scale < kCoefTol) scale = 1.0;
  std::vector<long long> key;
  key.reserve(q.coef.size() + 1);
  for (double c : q.coef) key.push_back(std::llround(c / scale * 1e9));
  key.push_back(std::llround(q.rhs / scale * 1e9));
  return key;
}

}  // namespace

FmTranscript fm_eliminate_verbose(const IneqSystem& sys,
                                  const std::vector<std::string>& eliminate) {
  FmTranscript t;
  IneqSystem cur = sys;
  for (const auto& name : eliminate) {
    auto it = std::find(cur.vars.begin(), cur.vars.end(), name);
    if (it == cur.vars.end())
      throw UsageError("fm_eliminate: unknown variable " + name);
    const size_t ax = static_cast<size_t>(it - cur.vars.begin());

    std::vector<Ineq> pos, neg, zero;
    for (const auto& q : cur.ineqs) {
      if (q.coef[ax] > kCoefTol) pos.push_back(q);
      else if (q.coef[ax] < -kCoefTol) neg.push_back(q);
      else zero.push_back(q);
    }
    std::vector<Ineq> next = std::move(zero);
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        const double wp = 1.0 / p.coef[ax];
        const double wn = -1.0 / n.coef[ax];
        Ineq q;
        q.coef.resize(cur.vars.size());
        for (size_t i = 0; i < cur.vars.size(); ++i)
          q.coef[i] = p.coef[i] * wp + n.coef[i] * wn;
        q.coef[ax] = 0.0;
        q.rhs = p.rhs * wp + n.rhs * wn;
        q.label = p.label + "+" + n.label;
        next.push_back(std::move(q));
      }
    }
    t.steps.push_back("eliminate " + name + ": " + std::to_string(pos.size()) +
                      " upper x " + std::to_string(neg.size()) + " lower, " +
                      std::to_string(next.size()) + " rows before cleanup");

    // drop the variable's axis
    cur.vars.erase(cur.vars.begin() + static_cast<long>(ax));
    for (auto& q : next) q.coef.erase(q.coef.begin() + static_cast<long>(ax));

    // drop vacuous rows and duplicates
    std::vector<Ineq> kept;
    std::map<std::vector<long long>, bool> seen;
    for (auto& q : next) {
      if (all_zero(q.coef)) {
        if (q.rhs >= -1e-9) {
          t.steps.push_back("dropped vacuous row " + q.label);
          continue;
        }
        t.steps.push_back("kept infeasibility witness " + q.label);
      }
      auto key = fingerprint(q);
      if (seen.count(key)) {
        t.steps.push_back("dropped duplicate row " + q.label);
        continue;
      }
      seen[key] = true;
      kept.push_back(std::move(q));
    }
    cur.ineqs = std::move(kept);
  }

  // Redundancy pruning over the symmetric box, one row at a time.
  const size_t k = cur.vars.size();
  if (k >= 1 && k <= 6 && cur.ineqs.size() > 1) {
    const double B = sys.box_half_width();
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < cur.ineqs.size(); ++i) {
        std::vector<Ineq> others;
        for (size_t j2 = 0; j2 < cur.ineqs.size(); ++j2)
          if (j2 != i) others.push_back(cur.ineqs[j2]);
        const double mx = max_over_polytope(others, cur.ineqs[i].coef, B);
        if (std::isfinite(mx) && mx <= cur.ineqs[i].rhs + 1e-9) {
          t.steps.push_back("dropped redundant row " + cur.ineqs[i].label +
                            " (max lhs " + fmt(mx) + " <= rhs " +
                            fmt(cur.ineqs[i].rhs) + ")");
          t.dropped_redundant.push_back(cur.ineqs[i].label);
          cur.ineqs.erase(cur.ineqs.begin() + static_cast<long>(i));
          changed = true;
          break;
        }
      }
    }
  }
  t.result = std::move(cur);
  return t;
}

IneqSystem fm_eliminate(const IneqSystem& sys,
                        const std::vector<std::string>& eliminate) {
  return fm_eliminate_verbose(sys, eliminate).result;
}

IneqSystem binning_rate_system(const MacInstance& m) {
  const JointPmf& j = m.joint();
  const double hz = j.entropy({kVarZ1});
  const double i_full = j.mutual_information({kVarY}, {kVarX1, kVarX2});
  const double i_given_z = j.mutual_information({kVarY}, {kVarX1, kVarX2}, {kVarZ1});
  const double i_x1 = j.mutual_information({kVarY}, {kVarX1}, {kVarZ1, kVarX2});
  IneqSystem sys;
  sys.vars = {"R0", "R1", "R1p", "R1pp"};
  sys.add({{"R1p", 1.0}}, hz, "R1p<=H(Z1)");
  sys.add({{"R0", 1.0}, {"R1p", 1.0}, {"R1pp", 1.0}}, i_full,
          "R0+R1p+R1pp<=I(Y;X1,X2)");
  sys.add({{"R0", 1.0}, {"R1pp", 1.0}}, i_given_z, "R0+R1pp<=I(Y;X1,X2|Z1)");
  sys.add({{"R1pp", 1.0}}, i_x1, "R1pp<=I(Y;X1|Z1,X2)");
  sys.add_equality({{"R1", 1.0}, {"R1p", -1.0}, {"R1pp", -1.0}}, 0.0, "R1-split");
  return sys;
}

}  // namespace srcrib
