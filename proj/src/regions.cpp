#include "srcrib/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srcrib {

namespace {

constexpr double kTol = 1e-9;

double pos_part(double a) { return a > 0.0 ? a : 0.0; }

double plog2p(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

std::vector<std::string> names_xh12() { return {kVarXh1, kVarXh2}; }

}  // namespace

bool RegionSpec::contains(double r0, double r1, double r12, double tol) const {
  if (r0 + r1 < sum_rate_lb - tol) return false;
  if (r0 < r0_lb - tol) return false;
  if (r0_plus_r12_lb && r0 + r12 < *r0_plus_r12_lb - tol) return false;
  return true;
}

RegionSpec sr_region(const JointPmf& p, CribbingMode mode, const CribbingVariant& variant) {
  const bool causal = mode == CribbingMode::Causal;
  JointPmf q = p;
  if (!variant.perfect && !q.has_variable(kVarZh1)) {
    q = q.extend_with_function(kVarXh1, variant.g, kVarZh1);
  }
  const std::string second = causal ? kVarU : kVarXh2;
  if (causal) {
    // Xh2 must be a deterministic function of (U, Xh1) / (U, Zh1).
    const std::string crib = variant.perfect ? kVarXh1 : kVarZh1;
    if (q.conditional_entropy({kVarXh2}, {kVarU, crib}) > 1e-9) {
      throw StructuralError("sr_region: causal input where Xh2 is not a function of (U, " +
                            crib + ")");
    }
  }

  RegionSpec r;
  r.sum_rate_lb = q.mutual_information({kVarX}, {kVarXh1, second});
  switch (mode) {
    case CribbingMode::NonCausal:
      r.r0_lb = variant.perfect
                    ? pos_part(r.sum_rate_lb - q.entropy({kVarXh1}))
                    : pos_part(q.mutual_information({kVarX}, {kVarZh1, kVarXh2}) -
                               q.entropy({kVarZh1}));
      break;
    case CribbingMode::StrictlyCausal:
      r.r0_lb = variant.perfect
                    ? pos_part(r.sum_rate_lb - q.conditional_entropy({kVarXh1}, {kVarXh2}))
                    : pos_part(q.mutual_information({kVarX}, {kVarZh1, kVarXh2}) -
                               q.conditional_entropy({kVarZh1}, {kVarXh2}));
      break;
    case CribbingMode::Causal:
      r.r0_lb = variant.perfect
                    ? pos_part(r.sum_rate_lb - q.conditional_entropy({kVarXh1}, {kVarU}))
                    : pos_part(q.mutual_information({kVarX}, {kVarZh1, kVarU}) -
                               q.conditional_entropy({kVarZh1}, {kVarU}));
      break;
  }
  return r;
}

RegionSpec equitz_cover_region(const JointPmf& p) {
  RegionSpec r;
  r.sum_rate_lb = p.mutual_information({kVarX}, names_xh12());
  r.r0_lb = p.mutual_information({kVarX}, {kVarXh2});
  return r;
}

RegionSpec conferencing_region(const JointPmf& p) {
  RegionSpec r;
  r.sum_rate_lb = p.mutual_information({kVarX}, names_xh12());
  r.r0_lb = 0.0;
  r.r0_plus_r12_lb = p.mutual_information({kVarX}, {kVarXh2});
  return r;
}

std::string to_string(FrontierKind kind) {
  switch (kind) {
    case FrontierKind::NonCausal: return "noncausal";
    case FrontierKind::StrictlyCausal: return "strictly-causal";
    case FrontierKind::Causal: return "causal";
    case FrontierKind::NoCribbing: return "no-cribbing";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Frontier search machinery.
//
// The searchable family is the set of conditionals P(Xh1, B | X) on a grid,
// where B is Xh2 (non-causal / strictly causal / no cribbing) or U (causal,
// with Xh2 = f(U, crib) enumerated over all function tables). A candidate is
// a vector of per-x cell counts summing to N = 1/step, plus an f index.
// ---------------------------------------------------------------------------

namespace {

struct Quant {
  double sum_lb = 0.0;
  double r0_lb = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct SearchCtx {
  FrontierKind kind = FrontierKind::NonCausal;
  bool perfect = true;
  CribFunction g;  // compacted; identity when perfect
  std::vector<double> px;
  int xs = 0, as = 0, bs = 0, zs = 0;
  const DistortionSpec* dist = nullptr;
  // Causal: all function tables f[u*crib_size + crib] -> xh2, flattened.
  std::vector<std::vector<int>> f_tables;
  int crib_size = 0;
  int xh2_size = 0;  // range of f (causal)
  double hx = 0.0;

  int cells() const { return as * bs; }
  bool causal() const { return kind == FrontierKind::Causal; }
};

// Evaluates all Table-I quantities on the normalized joint
// j[(x*as + a)*bs + b] (b = Xh2, or U in causal mode).
Quant evaluate(const SearchCtx& c, const double* j, const std::vector<int>* f) {
  const int as = c.as, bs = c.bs, zs = c.zs;
  Quant q;
  double h_xab = 0.0;
  std::vector<double> ab(static_cast<size_t>(as * bs), 0.0);
  std::vector<double> zb(static_cast<size_t>(zs * bs), 0.0);
  double h_xzb = 0.0;
  std::vector<double> xzb_row;  // reused per (x) for detfn aggregation
  if (!c.perfect) xzb_row.resize(static_cast<size_t>(zs * bs));

  for (int x = 0; x < c.xs; ++x) {
    if (!c.perfect) std::fill(xzb_row.begin(), xzb_row.end(), 0.0);
    for (int a = 0; a < as; ++a) {
      const int z = c.perfect ? a : c.g(a);
      for (int b = 0; b < bs; ++b) {
        const double v = j[(static_cast<size_t>(x) * as + static_cast<size_t>(a)) * bs + b];
        if (v == 0.0) continue;
        h_xab += plog2p(v);
        ab[static_cast<size_t>(a * bs + b)] += v;
        q.d1 += v * c.dist->d1[static_cast<size_t>(x)][static_cast<size_t>(a)];
        int xh2;
        if (c.causal()) {
          const int crib = c.perfect ? a : z;
          xh2 = (*f)[static_cast<size_t>(b * c.crib_size + crib)];
        } else {
          xh2 = b;
        }
        q.d2 += v * c.dist->d2[static_cast<size_t>(x)][static_cast<size_t>(xh2)];
        if (!c.perfect) {
          zb[static_cast<size_t>(z * bs + b)] += v;
          xzb_row[static_cast<size_t>(z * bs + b)] += v;
        }
      }
    }
    if (!c.perfect)
      for (double v : xzb_row) h_xzb += plog2p(v);
  }

  double h_ab = 0.0, h_a = 0.0, h_b = 0.0;
  {
    std::vector<double> ma(static_cast<size_t>(as), 0.0), mb(static_cast<size_t>(bs), 0.0);
    for (int a = 0; a < as; ++a)
      for (int b = 0; b < bs; ++b) {
        const double v = ab[static_cast<size_t>(a * bs + b)];
        h_ab += plog2p(v);
        ma[static_cast<size_t>(a)] += v;
        mb[static_cast<size_t>(b)] += v;
      }
    for (double v : ma) h_a += plog2p(v);
    for (double v : mb) h_b += plog2p(v);
  }

  const double i_xab = h_ab - h_xab + c.hx;  // I(X; Xh1, B)
  q.sum_lb = pos_part(i_xab);

  double h_z = 0.0, h_zb = 0.0, i_xzb = 0.0;
  if (!c.perfect) {
    std::vector<double> mz(static_cast<size_t>(zs), 0.0);
    for (int z = 0; z < zs; ++z)
      for (int b = 0; b < bs; ++b) {
        const double v = zb[static_cast<size_t>(z * bs + b)];
        h_zb += plog2p(v);
        mz[static_cast<size_t>(z)] += v;
      }
    for (double v : mz) h_z += plog2p(v);
    i_xzb = pos_part(h_zb - h_xzb + c.hx);  // I(X; Zh1, B)
  }

  switch (c.kind) {
    case FrontierKind::NoCribbing: {
      // I(X; Xh2) = H(B) - H(X,B) + H(X)
      double h_xb = 0.0;
      std::vector<double> row(static_cast<size_t>(bs));
      for (int x = 0; x < c.xs; ++x) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int a = 0; a < as; ++a)
          for (int b = 0; b < bs; ++b)
            row[static_cast<size_t>(b)] +=
                j[(static_cast<size_t>(x) * as + static_cast<size_t>(a)) * bs + b];
        for (double v : row) h_xb += plog2p(v);
      }
      q.r0_lb = pos_part(h_b - h_xb + c.hx);
      break;
    }
    case FrontierKind::NonCausal:
      q.r0_lb = c.perfect ? pos_part(i_xab - h_a) : pos_part(i_xzb - h_z);
      break;
    case FrontierKind::StrictlyCausal:
    case FrontierKind::Causal:
      q.r0_lb = c.perfect ? pos_part(i_xab - (h_ab - h_b))
                          : pos_part(i_xzb - (h_zb - h_b));
      break;
  }
  return q;
}

struct Entry {
  double r0 = 0.0;
  double sum = 0.0;
  std::vector<double> theta;  // per-x conditional cells, flattened
  int f_idx = 0;
};

// Total preference order used everywhere a tie must break
// deterministically: smaller (r0, sum), then lexicographically
// smallest parameter vector.
bool better_for_bucket(const Entry& a, const Entry& b) {
  if (a.sum != b.sum) return a.sum < b.sum;
  if (a.r0 != b.r0) return a.r0 < b.r0;
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.f_idx < b.f_idx;
}

using BucketMap = std::map<long long, Entry>;  // key: ceil(r0 / 1e-4)

void bucket_insert(BucketMap& m, Entry e) {
  const long long key = static_cast<long long>(std::ceil(e.r0 / 1e-4 - 1e-12));
  auto it = m.find(key);
  if (it == m.end() || better_for_bucket(e, it->second)) m[key] = std::move(e);
}

void bucket_merge(BucketMap& dst, BucketMap& src) {
  for (auto& [k, e] : src) {
    auto it = dst.find(k);
    if (it == dst.end() || better_for_bucket(e, it->second)) dst[k] = std::move(e);
  }
}

Quant eval_theta(const SearchCtx& c, const std::vector<double>& theta, int f_idx) {
  std::vector<double> j(theta.size());
  const int cells = c.cells();
  for (int x = 0; x < c.xs; ++x)
    for (int i = 0; i < cells; ++i)
      j[static_cast<size_t>(x * cells + i)] =
          c.px[static_cast<size_t>(x)] * theta[static_cast<size_t>(x * cells + i)];
  const std::vector<int>* f = c.causal() ? &c.f_tables[static_cast<size_t>(f_idx)] : nullptr;
  return evaluate(c, j.data(), f);
}

// Per-unit distortion weights for count pruning, for one f table.
struct CellWeights {
  std::vector<double> w1, w2;       // per flattened (x, cell)
  std::vector<double> sfx1, sfx2;   // suffix minima within each x block
};

CellWeights make_weights(const SearchCtx& c, int f_idx, int grid_n) {
  const int cells = c.cells();
  CellWeights w;
  w.w1.resize(static_cast<size_t>(c.xs * cells));
  w.w2.resize(static_cast<size_t>(c.xs * cells));
  for (int x = 0; x < c.xs; ++x)
    for (int a = 0; a < c.as; ++a)
      for (int b = 0; b < c.bs; ++b) {
        const int i = x * cells + a * c.bs + b;
        const double scale = c.px[static_cast<size_t>(x)] / grid_n;
        w.w1[static_cast<size_t>(i)] =
            scale * c.dist->d1[static_cast<size_t>(x)][static_cast<size_t>(a)];
        int xh2 = b;
        if (c.causal()) {
          const int crib = c.perfect ? a : c.g(a);
          xh2 = c.f_tables[static_cast<size_t>(f_idx)][static_cast<size_t>(b * c.crib_size + crib)];
        }
        w.w2[static_cast<size_t>(i)] =
            scale * c.dist->d2[static_cast<size_t>(x)][static_cast<size_t>(xh2)];
      }
  const size_t total = w.w1.size();
  w.sfx1.assign(total + 1, 0.0);
  w.sfx2.assign(total + 1, 0.0);
  w.sfx1[total] = w.sfx2[total] = std::numeric_limits<double>::infinity();
  for (size_t i = total; i-- > 0;) {
    w.sfx1[i] = std::min(w.w1[i], w.sfx1[i + 1]);
    w.sfx2[i] = std::min(w.w2[i], w.sfx2[i + 1]);
  }
  return w;
}

// Enumerates per-x compositions of grid_n over the cells with distortion
// pruning, calling leaf(counts) for every candidate meeting both budgets.
template <typename Leaf>
void enumerate_counts(const SearchCtx& c, const CellWeights& w, int grid_n,
                      std::vector<int>& counts, size_t cell, int remaining_in_block,
                      double d1p, double d2p, const Leaf& leaf) {
  const int cells = c.cells();
  const size_t total = counts.size();
  if (cell == total) {
    leaf(counts, d1p, d2p);
    return;
  }
  const bool last_in_block = (static_cast<int>(cell) % cells) == cells - 1;
  const int lo = last_in_block ? remaining_in_block : 0;
  const int hi = remaining_in_block;
  for (int k = lo; k <= hi; ++k) {
    const double d1n = d1p + k * w.w1[cell];
    const double d2n = d2p + k * w.w2[cell];
    if (d1n > c.dist->budget1 + kTol || d2n > c.dist->budget2 + kTol) {
      // weights are nonnegative so larger k only gets worse
      break;
    }
    // Cheap look-ahead: the rest of this block still has to place
    // remaining-k units at at least the suffix-minimum weight.
    const int rem = remaining_in_block - k;
    if (!last_in_block && rem > 0) {
      if (d1n + rem * w.sfx1[cell + 1] > c.dist->budget1 + kTol) continue;
      if (d2n + rem * w.sfx2[cell + 1] > c.dist->budget2 + kTol) continue;
    }
    counts[cell] = k;
    const int next_rem = last_in_block ? grid_n : rem;
    enumerate_counts(c, w, grid_n, counts, cell + 1, next_rem, d1n, d2n, leaf);
  }
  counts[cell] = 0;
}

std::vector<double> counts_to_theta(const std::vector<int>& counts, int grid_n) {
  std::vector<double> t(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) t[i] = static_cast<double>(counts[i]) / grid_n;
  return t;
}

// Coordinate descent with step halving. Minimizes (primary, secondary) of
// the Quant, subject to distortion budgets and a fixed cap on r0_lb. The
// move set has single mass transfers within one x block plus all composite
// pairs of transfers; singles stall when both budgets are active, since
// staying on two active constraints needs a move in a >=2-dim direction.
// Returns the number of step levels used.
int polish(const SearchCtx& c, Entry& e, double start_step, double r0_cap,
           bool minimize_r0) {
  const int cells = c.cells();
  struct Move {
    size_t up, dn;
  };
  std::vector<Move> singles;
  for (int x = 0; x < c.xs; ++x)
    for (int i = 0; i < cells; ++i)
      for (int j2 = 0; j2 < cells; ++j2)
        if (i != j2)
          singles.push_back({static_cast<size_t>(x * cells + i),
                             static_cast<size_t>(x * cells + j2)});

  // Leading coordinate is the cap violation, so a start outside the cap
  // first descends back into feasibility instead of being rejected; the
  // warm-start sweep below relies on that.
  auto score = [&](const Quant& q) {
    const double viol = std::max(q.r0_lb - r0_cap, 0.0);
    return minimize_r0 ? std::tuple<double, double, double>(viol, q.r0_lb, q.sum_lb)
                       : std::tuple<double, double, double>(viol, q.sum_lb, q.r0_lb);
  };
  Quant cur = eval_theta(c, e.theta, e.f_idx);
  auto cur_score = score(cur);
  int levels = 0;
  for (double step = start_step; step >= 1e-6; step /= 2, ++levels) {
    bool improved = true;
    while (improved) {
      improved = false;
      auto attempt = [&](const Move* a, const Move* b) {
        e.theta[a->up] += step;
        e.theta[a->dn] -= step;
        if (b) {
          e.theta[b->up] += step;
          e.theta[b->dn] -= step;
        }
        bool ok = e.theta[a->dn] >= -1e-15 && (!b || e.theta[b->dn] >= -1e-15);
        if (ok) {
          Quant q = eval_theta(c, e.theta, e.f_idx);
          auto s = score(q);
          ok = q.d1 <= c.dist->budget1 + kTol && q.d2 <= c.dist->budget2 + kTol &&
               s < cur_score;
          if (ok) {
            cur_score = s;
            cur = q;
            improved = true;
          }
        }
        if (!ok) {
          e.theta[a->up] -= step;
          e.theta[a->dn] += step;
          if (b) {
            e.theta[b->up] -= step;
            e.theta[b->dn] += step;
          }
        }
      };
      for (const Move& m : singles) attempt(&m, nullptr);
      if (!improved) {
        for (const Move& m : singles)
          for (const Move& m2 : singles) attempt(&m, &m2);
      }
    }
  }
  e.sum = cur.sum_lb;
  e.r0 = cur.r0_lb;
  return levels;
}

SearchCtx make_ctx(const JointPmf& source, const DistortionSpec& spec,
                   FrontierKind kind, const CribbingVariant& variant,
                   const FeasibleParameterization& param) {
  SearchCtx c;
  c.kind = kind;
  c.perfect = variant.perfect;
  c.dist = &spec;
  JointPmf sx = source.marginalize({kVarX});
  c.px = sx.probs();
  c.xs = static_cast<int>(c.px.size());
  c.hx = entropy_bits(c.px);
  c.as = param.xh1_size;
  c.g = variant.perfect ? CribFunction::identity(c.as) : variant.g.compacted();
  if (static_cast<int>(c.g.map.size()) != c.as)
    throw UsageError("frontier: crib function not total over Xh1 alphabet");
  c.zs = c.perfect ? c.as : c.g.range_size();
  if (kind == FrontierKind::Causal) {
    const int u_bound = c.xs * c.as + 4;
    c.bs = std::min(u_bound, param.u_cap);
    c.xh2_size = param.xh2_size;
    c.crib_size = c.perfect ? c.as : c.zs;
    // Enumerate all f: (U, crib) -> Xh2.
    const int slots = c.bs * c.crib_size;
    uint64_t n_f = 1;
    for (int s = 0; s < slots; ++s) {
      n_f *= static_cast<uint64_t>(c.xh2_size);
      if (n_f > 1'000'000) throw SizingError("frontier: causal function enumeration too large");
    }
    c.f_tables.reserve(n_f);
    std::vector<int> f(static_cast<size_t>(slots), 0);
    for (uint64_t id = 0; id < n_f; ++id) {
      uint64_t v = id;
      for (int s = 0; s < slots; ++s) {
        f[static_cast<size_t>(s)] = static_cast<int>(v % static_cast<uint64_t>(c.xh2_size));
        v /= static_cast<uint64_t>(c.xh2_size);
      }
      c.f_tables.push_back(f);
    }
  } else {
    c.bs = param.xh2_size;
  }
  return c;
}

struct SearchResult {
  std::vector<Entry> entries;  // Pareto set, sorted by r0 ascending
  int refine_passes = 0;
};

SearchResult run_search(const SearchCtx& c, const FeasibleParameterization& param) {
  if (param.grid_step <= 0.0 || param.grid_step > 0.25)
    throw UsageError("frontier: grid step must lie in (0, 0.25]");
  const int grid_n = std::max(4, static_cast<int>(std::llround(1.0 / param.grid_step)));
  const int cells = c.cells();
  const size_t total_cells = static_cast<size_t>(c.xs * cells);
  const int n_f = c.causal() ? static_cast<int>(c.f_tables.size()) : 1;

  // First-block candidate lists double as work units and a sizing probe.
  struct Unit {
    int f_idx;
    std::vector<int> block0;
    double d1p, d2p;
  };
  std::vector<Unit> units;
  uint64_t bound = 0;
  for (int fi = 0; fi < n_f; ++fi) {
    CellWeights w = make_weights(c, fi, grid_n);
    std::vector<int> counts(total_cells, 0);
    SearchCtx first = c;  // enumerate only cells of x = 0
    std::vector<int> c0(static_cast<size_t>(cells), 0);
    // reuse enumerate over a single block: emulate by recursion on block 0
    std::function<void(size_t, int, double, double)> rec =
        [&](size_t cell, int rem, double d1p, double d2p) {
          if (cell == static_cast<size_t>(cells)) {
            units.push_back({fi, c0, d1p, d2p});
            return;
          }
          const bool last = cell == static_cast<size_t>(cells) - 1;
          const int lo = last ? rem : 0;
          for (int k = lo; k <= rem; ++k) {
            const double d1n = d1p + k * w.w1[cell];
            const double d2n = d2p + k * w.w2[cell];
            if (d1n > c.dist->budget1 + kTol || d2n > c.dist->budget2 + kTol) break;
            c0[cell] = k;
            rec(cell + 1, last ? 0 : rem - k, d1n, d2n);
          }
          c0[cell] = 0;
        };
    rec(0, grid_n, 0.0, 0.0);
    (void)first;
    (void)counts;
  }
  {
    // Crude total-work bound: |units| candidates for the first block and
    // at most as many per remaining block.
    const uint64_t per_block = units.empty() ? 0 : units.size() / static_cast<uint64_t>(n_f) + 1;
    bound = units.size();
    for (int x = 1; x < c.xs; ++x) {
      if (bound > param.max_nodes / std::max<uint64_t>(per_block, 1)) {
        throw SizingError("frontier: grid enumeration exceeds max_nodes; coarsen grid_step");
      }
      bound *= std::max<uint64_t>(per_block, 1);
    }
  }

  int n_threads = 1;
#ifdef _OPENMP
  n_threads = param.parallel ? omp_get_max_threads() : 1;
#endif
  std::vector<BucketMap> local(static_cast<size_t>(n_threads));
  std::vector<CellWeights> weights;
  weights.reserve(static_cast<size_t>(n_f));
  for (int fi = 0; fi < n_f; ++fi) weights.push_back(make_weights(c, fi, grid_n));

#pragma omp parallel for schedule(dynamic) if (param.parallel)
  for (long long ui = 0; ui < static_cast<long long>(units.size()); ++ui) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    const Unit& u = units[static_cast<size_t>(ui)];
    BucketMap& sink = local[static_cast<size_t>(tid)];
    std::vector<int> counts(total_cells, 0);
    std::copy(u.block0.begin(), u.block0.end(), counts.begin());
    auto leaf = [&](const std::vector<int>& cnt, double, double) {
      std::vector<double> theta = counts_to_theta(cnt, grid_n);
      Quant q = eval_theta(c, theta, u.f_idx);
      if (q.d1 > c.dist->budget1 + kTol || q.d2 > c.dist->budget2 + kTol) return;
      bucket_insert(sink, Entry{q.r0_lb, q.sum_lb, std::move(theta), u.f_idx});
    };
    if (c.xs == 1) {
      leaf(counts, u.d1p, u.d2p);
    } else {
      enumerate_counts(c, weights[static_cast<size_t>(u.f_idx)], grid_n, counts,
                       static_cast<size_t>(cells), grid_n, u.d1p, u.d2p, leaf);
    }
  }

  BucketMap merged;
  for (auto& m : local) bucket_merge(merged, m);

  SearchResult res;
  if (merged.empty()) return res;

  // Pareto reduction: keep entries whose sum strictly improves as r0 grows.
  std::vector<Entry> sorted;
  sorted.reserve(merged.size());
  for (auto& [k, e] : merged) sorted.push_back(std::move(e));
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    if (a.r0 != b.r0) return a.r0 < b.r0;
    return better_for_bucket(a, b);
  });
  double best_sum = std::numeric_limits<double>::infinity();
  for (auto& e : sorted) {
    if (e.sum < best_sum - 1e-12) {
      best_sum = e.sum;
      res.entries.push_back(std::move(e));
    }
  }

  // Refinement: polish each Pareto representative (objective: sum subject
  // to its own r0 cap) and the minimum-r0 endpoint.
  int passes = 0;
#pragma omp parallel for schedule(dynamic) reduction(max : passes) if (param.parallel)
  for (long long i = 0; i < static_cast<long long>(res.entries.size()); ++i) {
    Entry& e = res.entries[static_cast<size_t>(i)];
    passes = std::max(passes, polish(c, e, param.grid_step, e.r0, false));
  }
  res.refine_passes = passes;
  {
    Entry lo = res.entries.front();
    polish(c, lo, param.grid_step, std::numeric_limits<double>::infinity(), true);
    res.entries.push_back(std::move(lo));
  }

  // Warm-start sweep: near the minimum-r0 boundary the feasible grid
  // cells thin out and a cold polish stalls in a poor local optimum, so
  // drag the best interior optimum down through descending r0 caps,
  // reusing each cap's solution as the next start.
  {
    double sum_min = std::numeric_limits<double>::infinity();
    double r0_min = std::numeric_limits<double>::infinity();
    const Entry* seed = nullptr;
    for (const auto& e : res.entries) {
      r0_min = std::min(r0_min, e.r0);
      if (e.sum < sum_min - 1e-12) {
        sum_min = e.sum;
        seed = &e;
      }
    }
    if (seed != nullptr) {
      Entry carry = *seed;
      std::vector<Entry> extra;
      const int pts = std::max(param.r0_points, 2);
      for (int k = pts - 1; k >= 0; --k) {
        const double cap = sum_min * k / (pts - 1);
        if (cap < r0_min - kTol) break;
        if (carry.r0 <= cap + kTol && k < pts - 1) continue;  // already feasible
        Entry cand = carry;
        polish(c, cand, param.grid_step, cap, false);
        // a cold start from the best in-cap grid entry sometimes beats
        // the dragged one; keep whichever lands better
        const Entry* alt = nullptr;
        for (const auto& e : res.entries)
          if (e.r0 <= cap + kTol && (alt == nullptr || e.sum < alt->sum)) alt = &e;
        if (alt != nullptr) {
          Entry cand2 = *alt;
          polish(c, cand2, param.grid_step, cap, false);
          if (cand2.r0 <= cap + kTol &&
              (cand.r0 > cap + kTol || cand2.sum < cand.sum))
            cand = std::move(cand2);
        }
        if (cand.r0 <= cap + kTol) {
          carry = cand;
          extra.push_back(std::move(cand));
        }
      }
      for (auto& e : extra) res.entries.push_back(std::move(e));
    }
  }
  std::sort(res.entries.begin(), res.entries.end(), [](const Entry& a, const Entry& b) {
    if (a.r0 != b.r0) return a.r0 < b.r0;
    return better_for_bucket(a, b);
  });
  return res;
}

Frontier assemble_frontier(const SearchResult& res, FrontierKind kind, bool perfect,
                           const DistortionSpec& spec, double grid_step, int r0_points) {
  Frontier f;
  f.kind = kind;
  f.perfect = perfect;
  f.d1 = spec.budget1;
  f.d2 = spec.budget2;
  f.grid_step = grid_step;
  f.r0_points = r0_points;
  f.refine_passes = res.refine_passes;
  if (res.entries.empty()) return f;

  f.r0_min = res.entries.front().r0;
  double sum_min = std::numeric_limits<double>::infinity();
  for (const auto& e : res.entries) sum_min = std::min(sum_min, e.sum);

  const double r0_max = sum_min;
  for (int k = 0; k < r0_points; ++k) {
    const double t = r0_max * k / (r0_points - 1);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : res.entries) {
      if (e.r0 <= t + kTol) best = std::min(best, e.sum);
    }
    if (!std::isfinite(best)) continue;
    f.points.push_back({t, pos_part(best - t)});
  }
  return f;
}

}  // namespace

Frontier frontier(const JointPmf& source, const DistortionSpec& spec,
                  FrontierKind kind, const CribbingVariant& variant,
                  const FeasibleParameterization& param) {
  if (param.r0_points < 2) throw UsageError("frontier: need at least 2 R0 grid points");
  SearchCtx c = make_ctx(source, spec, kind, variant, param);
  SearchResult res = run_search(c, param);
  return assemble_frontier(res, kind, variant.perfect, spec, param.grid_step, param.r0_points);
}

// ---------------------------------------------------------------------------
// Bern(0.5) example, one-parameter family of reproduction joints.
// ---------------------------------------------------------------------------

namespace {

struct BernQuant {
  double sum = 0.0, r0_nc = 0.0, r0_sc = 0.0, r0_ec = 0.0;
};

BernQuant bern_eval(double p1, double D1, double D2) {
  const double p2 = 1.0 - D1 - p1;
  const double p3 = 1.0 - D2 - p1;
  const double p4 = p1 + D1 + D2 - 1.0;
  const double q = p1 + p4, r = p2 + p3;
  const std::array<double, 4> joint = {q / 2, r / 2, r / 2, q / 2};
  const std::array<double, 4> cond = {p1, p2, p3, p4};
  BernQuant b;
  b.sum = entropy_bits(std::span<const double>(joint)) -
          entropy_bits(std::span<const double>(cond));
  b.r0_nc = pos_part(b.sum - 1.0);  // H(Xh1) = 1 by symmetry
  b.r0_sc = pos_part(b.sum - binary_entropy(q));
  b.r0_ec = pos_part(1.0 - binary_entropy(p1 + p3));
  return b;
}

Frontier bern_frontier(double D1, double D2, FrontierKind kind, int r0_points) {
  const double lo = 1.0 - D1 - D2;
  const double hi = std::min({1.0 - D1, 1.0 - D2, 2.0 - D1 - D2});
  const int samples = 20001;
  const double step = (hi - lo) / (samples - 1);

  auto pick_r0 = [&](const BernQuant& q) {
    switch (kind) {
      case FrontierKind::NonCausal: return q.r0_nc;
      case FrontierKind::StrictlyCausal: return q.r0_sc;
      default: return q.r0_ec;
    }
  };

  BucketMap buckets;
  for (int i = 0; i < samples; ++i) {
    const double p1 = lo + step * i;
    BernQuant q = bern_eval(p1, D1, D2);
    bucket_insert(buckets, Entry{pick_r0(q), q.sum, {p1}, 0});
  }

  // Local polish on p1 with step halving (both objectives).
  auto polish_1d = [&](Entry e, bool min_r0) {
    const double cap = e.r0;  // fixed, or the descent creeps along the bound
    for (double s = step; s >= 1e-12; s /= 2) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (double cand : {e.theta[0] - s, e.theta[0] + s}) {
          if (cand < lo || cand > hi) continue;
          BernQuant q = bern_eval(cand, D1, D2);
          auto sc = min_r0 ? std::pair(pick_r0(q), q.sum) : std::pair(q.sum, pick_r0(q));
          auto cur = min_r0 ? std::pair(e.r0, e.sum) : std::pair(e.sum, e.r0);
          if (sc < cur && (min_r0 || pick_r0(q) <= cap + kTol)) {
            e.theta[0] = cand;
            e.r0 = pick_r0(q);
            e.sum = q.sum;
            improved = true;
          }
        }
      }
    }
    return e;
  };

  SearchResult res;
  std::vector<Entry> sorted;
  for (auto& [k, e] : buckets) sorted.push_back(std::move(e));
  std::sort(sorted.begin(), sorted.end(),
            [](const Entry& a, const Entry& b) { return a.r0 < b.r0; });
  double best = std::numeric_limits<double>::infinity();
  for (auto& e : sorted) {
    if (e.sum < best - 1e-12) {
      best = e.sum;
      res.entries.push_back(polish_1d(e, false));
    }
  }
  if (!res.entries.empty()) {
    res.entries.push_back(polish_1d(res.entries.front(), true));
    std::sort(res.entries.begin(), res.entries.end(),
              [](const Entry& a, const Entry& b) { return a.r0 < b.r0; });
  }
  res.refine_passes = 1;

  DistortionSpec spec = DistortionSpec::hamming(2, D1, D2);
  return assemble_frontier(res, kind, true, spec, step, r0_points);
}

}  // namespace

BernoulliFrontiers bernoulli_example(double D1, double D2, int r0_points) {
  if (!(0.0 < D1 && D1 <= D2 && D2 < 0.5))
    throw UsageError("bernoulli_example: need 0 < D1 <= D2 < 0.5");
  BernoulliFrontiers out;
  out.non_causal = bern_frontier(D1, D2, FrontierKind::NonCausal, r0_points);
  out.strictly_causal = bern_frontier(D1, D2, FrontierKind::StrictlyCausal, r0_points);
  out.no_cribbing = bern_frontier(D1, D2, FrontierKind::NoCribbing, r0_points);
  return out;
}

BernoulliCorners bernoulli_corners(double D1, double D2) {
  if (!(0.0 < D1 && D1 <= D2 && D2 < 0.5))
    throw UsageError("bernoulli_corners: need 0 < D1 <= D2 < 0.5");
  BernoulliCorners c;
  const double rd1 = 1.0 - binary_entropy(D1);
  c.a = {0.0, rd1};
  c.d = {rd1, 0.0};
  c.b_r0 = 1.0 - binary_entropy(D1) - binary_entropy(D2);
  c.c_r0 = 1.0 - binary_entropy(D2);
  return c;
}

double r0_zero_min_rate(const JointPmf& source, const DistortionSpec& spec,
                        CribbingMode mode, const CribFunction& g,
                        const FeasibleParameterization& param) {
  FrontierKind kind = FrontierKind::NonCausal;
  switch (mode) {
    case CribbingMode::NonCausal: kind = FrontierKind::NonCausal; break;
    case CribbingMode::StrictlyCausal: kind = FrontierKind::StrictlyCausal; break;
    case CribbingMode::Causal: kind = FrontierKind::Causal; break;
  }
  SearchCtx c = make_ctx(source, spec, kind, CribbingVariant::DetFn(g), param);
  SearchResult res = run_search(c, param);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : res.entries) {
    if (e.r0 <= kTol) best = std::min(best, e.sum);
  }
  return best;
}

Frontier cascade_transform(const Frontier& f) {
  Frontier out = f;
  for (auto& p : out.points) p.r1_min = p.r0 + p.r1_min;
  return out;
}

}  // namespace srcrib
