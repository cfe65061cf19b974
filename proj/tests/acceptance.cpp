// End-to-end acceptance gate: one pass/fail line per criterion, exit
// status reflects the conjunction. Numeric tolerances and seeds are
// pinned; timed criteria print their runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "srcrib/mac.hpp"
#include "srcrib/prob.hpp"
#include "srcrib/regions.hpp"
#include "srcrib/sim.hpp"

using namespace srcrib;
using srcrib::testing::family_joint;
using srcrib::testing::random_joint;
using srcrib::testing::random_sr_joint;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%-28s %s  %s\n", name, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void corner_reproduction() {
  auto t0 = std::chrono::steady_clock::now();
  const double D1 = 0.05, D2 = 0.1;
  BernoulliCorners c = bernoulli_corners(D1, D2);
  BernoulliFrontiers bf = bernoulli_example(D1, D2, 129);
  double a_ref = 1 - binary_entropy(D1);
  double b_ref = 1 - binary_entropy(D1) - binary_entropy(D2);
  double c_ref = 1 - binary_entropy(D2);
  double worst = std::max({std::abs(c.a.r0), std::abs(c.a.r1_min - a_ref),
                           std::abs(c.b_r0 - b_ref), std::abs(c.c_r0 - c_ref),
                           std::abs(c.d.r0 - a_ref), std::abs(c.d.r1_min),
                           std::abs(c.a.r1_min - 0.713603) - 1e-6,
                           std::abs(c.b_r0 - 0.244607) - 1e-6,
                           std::abs(c.c_r0 - 0.531004) - 1e-6,
                           std::abs(bf.non_causal.points.front().r1_min - a_ref),
                           std::abs(bf.strictly_causal.r0_min - b_ref),
                           std::abs(bf.no_cribbing.r0_min - c_ref)});
  double secs = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max dev %.2e, %.2f s", worst, secs);
  report("corner-reproduction", worst <= 1e-6 && secs < 1.0, buf);
}

void frontier_vs_closed_form() {
  auto t0 = std::chrono::steady_clock::now();
  JointPmf src({{kVarX, 2}}, {0.5, 0.5});
  double worst = 0.0;
  for (auto [d1, d2] : {std::pair{0.05, 0.1}, {0.1, 0.2}}) {
    DistortionSpec spec = DistortionSpec::hamming(2, d1, d2);
    FeasibleParameterization param;  // grid step 1/64
    param.r0_points = 20;
    BernoulliFrontiers bf = bernoulli_example(d1, d2, 20);
    const Frontier* refs[2] = {&bf.non_causal, &bf.strictly_causal};
    FrontierKind kinds[2] = {FrontierKind::NonCausal, FrontierKind::StrictlyCausal};
    for (int k = 0; k < 2; ++k) {
      Frontier g = frontier(src, spec, kinds[k], CribbingVariant::Perfect(), param);
      if (g.points.size() != refs[k]->points.size()) {
        worst = 1.0;
        continue;
      }
      for (std::size_t i = 0; i < g.points.size(); ++i)
        worst = std::max(worst,
                         std::abs(g.points[i].r1_min - refs[k]->points[i].r1_min));
    }
  }
  double secs = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max dev %.5f bits, %.1f s", worst, secs);
  report("frontier-vs-closed-form", worst <= 0.01 && secs < 60.0, buf);
}

void region_nesting() {
  std::mt19937 rng(2024);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    JointPmf p = random_sr_joint(rng);
    double nc = sr_region(p, CribbingMode::NonCausal, CribbingVariant::Perfect()).r0_lb;
    double sc = sr_region(p, CribbingMode::StrictlyCausal, CribbingVariant::Perfect()).r0_lb;
    double ec = equitz_cover_region(p).r0_lb;
    if (!(ec >= sc - 1e-9 && sc >= nc - 1e-9)) ++violations;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d violations / 100 joints", violations);
  report("region-nesting", violations == 0, buf);
}

void reduction_identities() {
  std::mt19937 rng(2025);
  CribbingVariant idv = CribbingVariant::DetFn(CribFunction::identity(2));
  CribbingVariant cnv = CribbingVariant::DetFn(CribFunction::constant(2));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    JointPmf p = random_sr_joint(rng);
    RegionSpec ec = equitz_cover_region(p);
    for (CribbingMode mode :
         {CribbingMode::NonCausal, CribbingMode::StrictlyCausal}) {
      RegionSpec a = sr_region(p, mode, CribbingVariant::Perfect());
      RegionSpec b = sr_region(p, mode, idv);
      RegionSpec c = sr_region(p, mode, cnv);
      worst = std::max({worst, std::abs(a.sum_rate_lb - b.sum_rate_lb),
                        std::abs(a.r0_lb - b.r0_lb),
                        std::abs(c.sum_rate_lb - ec.sum_rate_lb),
                        std::abs(c.r0_lb - ec.r0_lb)});
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max dev %.2e", worst);
  report("reduction-identities", worst <= 1e-9, buf);
}

bool point_in(const IneqSystem& sys, const std::vector<double>& v) {
  for (const auto& q : sys.ineqs) {
    double lhs = 0;
    for (std::size_t j = 0; j < q.coef.size(); ++j) lhs += q.coef[j] * v[j];
    if (lhs > q.rhs + 1e-9) return false;
  }
  return true;
}

MacInstance random_mac(std::mt19937& rng, const CribFunction& g) {
  JointPmf input = random_joint({{kVarX1, 2}, {kVarX2, 2}}, rng);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<double> ch(4 * 3, 0.0);
  for (int r = 0; r < 4; ++r) {
    double a = unif(rng), b = unif(rng), c = unif(rng), s = a + b + c;
    ch[static_cast<std::size_t>(r * 3)] = a / s;
    ch[static_cast<std::size_t>(r * 3 + 1)] = b / s;
    ch[static_cast<std::size_t>(r * 3 + 2)] = c / s;
  }
  return MacInstance(std::move(input), std::move(ch), 3, g);
}

void fourier_motzkin_oracle() {
  std::mt19937 rng(4242);
  int bad = 0, not_flagged = 0;

  // random boxed 3-variable systems vs a grid oracle
  std::uniform_real_distribution<double> rhs(0.2, 1.5);
  std::uniform_int_distribution<int> coef(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    IneqSystem sys;
    sys.vars = {"a", "b", "c"};
    int rows = 3 + static_cast<int>(rng() % 4);
    for (int i = 0; i < rows; ++i) {
      std::vector<std::pair<std::string, double>> terms;
      bool any = false;
      for (const auto& v : sys.vars) {
        int ci = coef(rng);
        if (ci != 0) { terms.push_back({v, static_cast<double>(ci)}); any = true; }
      }
      if (!any) terms.push_back({"a", 1.0});
      sys.add(terms, rhs(rng));
    }
    for (const char* v : {"a", "b"}) {
      sys.add({{v, 1.0}}, 2.0);
      sys.add({{v, -1.0}}, 2.0);
    }
    IneqSystem proj = fm_eliminate(sys, {"c"});
    for (double a = -2; a <= 2 + 1e-9; a += 1.0 / 8)
      for (double b = -2; b <= 2 + 1e-9; b += 1.0 / 8) {
        bool full = false;
        for (double cc = -8; cc <= 8 + 1e-9 && !full; cc += 1.0 / 32)
          full = point_in(sys, {a, b, cc});
        // the projection may legitimately contain points whose witness
        // c falls between oracle grid lines, but never the reverse
        if (full && !point_in(proj, {a, b})) ++bad;
      }
  }

  // split-rate systems from random channel instances
  for (int trial = 0; trial < 10; ++trial) {
    MacInstance m = random_mac(rng, CribFunction::identity(2));
    IneqSystem sys = binning_rate_system(m);
    FmTranscript tr = fm_eliminate_verbose(sys, {"R1p", "R1pp"});
    const JointPmf& j = m.joint();
    double sum = j.mutual_information({kVarY}, {kVarX1, kVarX2});
    double csum = j.mutual_information({kVarY}, {kVarX1, kVarX2}, {kVarZ1});
    double hz = j.entropy({kVarZ1});
    if (sum <= csum + hz + 1e-9 && tr.dropped_redundant.empty()) ++not_flagged;
    // projected region vs oracle over (R0, R1)
    int r0i = 0, r1i = 1;
    if (tr.result.vars[0] != "R0") { r0i = 1; r1i = 0; }
    for (double r0v = 0; r0v <= 2 + 1e-9; r0v += 1.0 / 16)
      for (double r1v = 0; r1v <= 2 + 1e-9; r1v += 1.0 / 16) {
        bool full = false;
        for (double p = 0; p <= r1v + 1e-9 && !full; p += 1.0 / 32) {
          std::vector<double> v(sys.vars.size(), 0.0);
          for (std::size_t k = 0; k < sys.vars.size(); ++k) {
            if (sys.vars[k] == "R0") v[k] = r0v;
            if (sys.vars[k] == "R1") v[k] = r1v;
            if (sys.vars[k] == "R1p") v[k] = p;
            if (sys.vars[k] == "R1pp") v[k] = r1v - p;
          }
          full = point_in(sys, v);
        }
        std::vector<double> pv(2, 0.0);
        pv[static_cast<std::size_t>(r0i)] = r0v;
        pv[static_cast<std::size_t>(r1i)] = r1v;
        if (full && !point_in(tr.result, pv)) ++bad;
      }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d oracle mismatches, %d unflagged redundancies",
                bad, not_flagged);
  report("fourier-motzkin-oracle", bad == 0 && not_flagged == 0, buf);
}

// U, crib random; Xh2 = u XOR crib; X through a random binary channel
JointPmf random_causal_sr(std::mt19937& rng) {
  JointPmf base = random_joint({{kVarU, 2}, {kVarXh1, 2}}, rng);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<double> full(16, 0.0);
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a) {
      double mass = base.probs()[static_cast<std::size_t>(u * 2 + a)];
      double q = unif(rng);
      int b = u ^ a;
      full[static_cast<std::size_t>(((u * 2 + a) * 2 + b) * 2)] = mass * q;
      full[static_cast<std::size_t>(((u * 2 + a) * 2 + b) * 2 + 1)] = mass * (1 - q);
    }
  return JointPmf({{kVarU, 2}, {kVarXh1, 2}, {kVarXh2, 2}, {kVarX, 2}}, full);
}

void duality() {
  std::mt19937 rng(777);
  CribFunction id = CribFunction::identity(2);
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    JointPmf sr = random_sr_joint(rng);
    MacInstance mac = MacInstance::from_sr_joint(sr, id);
    for (CribbingMode mode :
         {CribbingMode::NonCausal, CribbingMode::StrictlyCausal}) {
      DualityReport rep = duality_check(sr, mac, mode);
      worst = std::max(worst, rep.max_discrepancy);
      if (!rep.ok) ++failures;
    }
    DualityReport conf = duality_check_conferencing(sr, mac, 0.3);
    worst = std::max(worst, conf.max_discrepancy);
    if (!conf.ok) ++failures;

    JointPmf csr = random_causal_sr(rng);
    MacInstance cmac = MacInstance::from_sr_joint(csr, id);
    DualityReport crep = duality_check(csr, cmac, CribbingMode::Causal);
    worst = std::max(worst, crep.max_discrepancy);
    if (!crep.ok) ++failures;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d failures, max dev %.2e", failures, worst);
  report("duality", failures == 0 && worst <= 1e-9, buf);
}

void simulator_sign_test() {
  auto t0 = std::chrono::steady_clock::now();
  const double D1 = 0.05, D2 = 0.1;
  SimConfig cfg{family_joint(0.855, D1, D2)};
  cfg.n = 12;
  cfg.blocks = 10;
  cfg.eps = 0.45;
  cfg.seed = 12345;
  cfg.mode = CribbingMode::StrictlyCausal;
  cfg.dist = DistortionSpec::hamming(2, D1, D2);
  double it = cfg.target.mutual_information({kVarX}, {kVarXh1, kVarXh2});
  double r0_lb = sr_region(cfg.target, CribbingMode::StrictlyCausal,
                           CribbingVariant::Perfect()).r0_lb;
  cfg.r0 = 1.15 * r0_lb;
  cfg.r1 = 1.15 * it - cfg.r0;
  SimReport inside = simulate(cfg, 200);

  SimConfig out = cfg;
  out.r1 = 0.85 * it - out.r0;
  SimReport outside = simulate(out, 200);

  double ratio = outside.encode_failure_rate /
                 std::max(inside.encode_failure_rate, 1e-12);
  double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "d1=%.4f d2=%.4f fail-ratio=%.2f, %.1f s", inside.d1,
                inside.d2, ratio, secs);
  report("simulator-sign-test",
         inside.d1 <= 0.10 && inside.d2 <= 0.15 && ratio >= 5.0 && secs < 300.0,
         buf);
}

void simulator_monotonicity() {
  const double D1 = 0.05, D2 = 0.1;
  // double binning, sum margin 1.7x at the sum-optimal family point
  SimConfig nc{family_joint(0.897222, D1, D2)};
  nc.eps = 0.45;
  nc.seed = 99;
  nc.dist = DistortionSpec::hamming(2, D1, D2);
  double it_nc = nc.target.mutual_information({kVarX}, {kVarXh1, kVarXh2});
  nc.r0 = 0.3;
  nc.r1 = 1.7 * it_nc - nc.r0;
  nc.n = 8;
  double nc8 = simulate(nc, 200).total_event_rate;
  nc.n = 16;
  double nc16 = simulate(nc, 200).total_event_rate;

  // forward encoding at the sign-test rate point
  SimConfig bm{family_joint(0.855, D1, D2)};
  bm.blocks = 10;
  bm.eps = 0.45;
  bm.seed = 12345;
  bm.mode = CribbingMode::StrictlyCausal;
  bm.dist = DistortionSpec::hamming(2, D1, D2);
  double it_bm = bm.target.mutual_information({kVarX}, {kVarXh1, kVarXh2});
  bm.r0 = 1.15 * 0.2446074;
  bm.r1 = 1.15 * it_bm - bm.r0;
  // total_event_rate saturates for the chained scheme (benign fallback
  // events fire in nearly every trial), so track encoder failures instead
  bm.n = 8;
  double bm8 = simulate(bm, 200).encode_failure_rate;
  bm.n = 16;
  double bm16 = simulate(bm, 200).encode_failure_rate;

  char buf[128];
  std::snprintf(buf, sizeof buf, "binning %.3f->%.3f, forward %.3f->%.3f", nc8,
                nc16, bm8, bm16);
  report("simulator-monotonicity", nc16 <= nc8 + 0.1 && bm16 <= bm8 + 0.1, buf);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void determinism(const std::string& cli) {
  if (cli.empty()) {
    report("determinism", false, "CLI path not provided");
    return;
  }
  std::string base = cli + " simulate --trials 60 --seed 7 --n 12 --eps 0.45";
  std::string a = "/tmp/accept_det_a.json", b = "/tmp/accept_det_b.json";
  int rc1 = std::system((base + " --out " + a).c_str());
  int rc2 = std::system(("OMP_NUM_THREADS=1 " + base + " --out " + b).c_str());
  bool ok = rc1 == 0 && rc2 == 0;
  std::string ja = slurp(a), jb = slurp(b);
  ok = ok && !ja.empty() && ja == jb;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu bytes, parallel vs single-thread %s",
                ja.size(), ja == jb ? "identical" : "differ");
  report("determinism", ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : "";
  corner_reproduction();
  frontier_vs_closed_form();
  region_nesting();
  reduction_identities();
  fourier_motzkin_oracle();
  duality();
  simulator_sign_test();
  simulator_monotonicity();
  determinism(cli);
  if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
