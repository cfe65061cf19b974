// Command-line front end: region/frontier evaluation, Monte Carlo
// simulation, rate-region duality reports, and CSV/JSON emission.
// Exit codes: 0 success, 2 config error, 3 infeasible budgets,
// 4 sizing cap, 5 duality mismatch.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "srcrib/mac.hpp"
#include "srcrib/prob.hpp"
#include "srcrib/regions.hpp"
#include "srcrib/sim.hpp"

using nlohmann::json;
using namespace srcrib;

namespace {

constexpr const char* kVersion = "srcrib 1.0.0";
constexpr std::uint64_t kDefaultSeed = 1;  // fixed, never entropy-based

struct RunConfig {
  std::string format = "json";
  std::string out;  // empty -> stdout
  std::uint64_t seed = kDefaultSeed;
  double d1 = 0.05, d2 = 0.1;
  CribbingMode mode = CribbingMode::NonCausal;
  CribbingVariant variant = CribbingVariant::Perfect();
  std::optional<JointPmf> joint;
  std::optional<DistortionSpec> dist;
  FeasibleParameterization solver;
  bool general_search = false;
  // simulator knobs; rates default to 15% above the mode's bounds
  int n = 12, blocks = 1, trials = 200;
  double eps = 0.1;
  std::optional<double> r0, r1;
  DecodePolicy policy = DecodePolicy::BinLookup;
  bool parallel = true;
  json echo;  // effective configuration, embedded in every output
};

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || it.key() == k;
    if (!ok) throw UsageError("unknown config key '" + it.key() + "' in " + where);
  }
}

CribbingMode parse_mode(const std::string& s) {
  if (s == "noncausal") return CribbingMode::NonCausal;
  if (s == "strictly-causal") return CribbingMode::StrictlyCausal;
  if (s == "causal") return CribbingMode::Causal;
  throw UsageError("mode must be noncausal|strictly-causal|causal");
}

JointPmf parse_joint(const json& j) {
  reject_unknown(j, {"vars", "probs"}, "joint");
  std::vector<Alphabet> vars;
  for (const auto& v : j.at("vars")) {
    reject_unknown(v, {"name", "size"}, "joint.vars");
    vars.push_back({v.at("name").get<std::string>(), v.at("size").get<int>()});
  }
  return JointPmf(vars, j.at("probs").get<std::vector<double>>());
}

void load_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j = json::parse(in);
  reject_unknown(j,
                 {"format", "out", "seed", "d1", "d2", "mode", "variant", "g",
                  "joint", "distortion", "solver", "sim", "general"},
                 "top level");
  if (j.contains("format")) rc.format = j["format"].get<std::string>();
  if (j.contains("out")) rc.out = j["out"].get<std::string>();
  if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("d1")) rc.d1 = j["d1"].get<double>();
  if (j.contains("d2")) rc.d2 = j["d2"].get<double>();
  if (j.contains("mode")) rc.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("general")) rc.general_search = j["general"].get<bool>();
  if (j.contains("variant")) {
    std::string v = j["variant"].get<std::string>();
    if (v == "perfect") {
      rc.variant = CribbingVariant::Perfect();
    } else if (v == "detfn") {
      CribFunction g = CribFunction::identity(2);
      if (j.contains("g")) g.map = j["g"].get<std::vector<int>>();
      rc.variant = CribbingVariant::DetFn(g);
    } else {
      throw UsageError("variant must be perfect|detfn");
    }
  }
  if (j.contains("joint")) rc.joint = parse_joint(j["joint"]);
  if (j.contains("distortion")) {
    const json& d = j["distortion"];
    reject_unknown(d, {"d1_table", "d2_table", "budget1", "budget2"}, "distortion");
    DistortionSpec s;
    s.d1 = d.at("d1_table").get<std::vector<std::vector<double>>>();
    s.d2 = d.at("d2_table").get<std::vector<std::vector<double>>>();
    s.budget1 = d.at("budget1").get<double>();
    s.budget2 = d.at("budget2").get<double>();
    rc.dist = s;
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"grid_step", "r0_points", "u_cap", "xh1_size", "xh2_size"},
                   "solver");
    if (s.contains("grid_step")) rc.solver.grid_step = s["grid_step"].get<double>();
    if (s.contains("r0_points")) rc.solver.r0_points = s["r0_points"].get<int>();
    if (s.contains("u_cap")) rc.solver.u_cap = s["u_cap"].get<int>();
    if (s.contains("xh1_size")) rc.solver.xh1_size = s["xh1_size"].get<int>();
    if (s.contains("xh2_size")) rc.solver.xh2_size = s["xh2_size"].get<int>();
  }
  if (j.contains("sim")) {
    const json& s = j["sim"];
    reject_unknown(s, {"n", "blocks", "trials", "eps", "r0", "r1", "policy",
                       "parallel"},
                   "sim");
    if (s.contains("n")) rc.n = s["n"].get<int>();
    if (s.contains("blocks")) rc.blocks = s["blocks"].get<int>();
    if (s.contains("trials")) rc.trials = s["trials"].get<int>();
    if (s.contains("eps")) rc.eps = s["eps"].get<double>();
    if (s.contains("r0")) rc.r0 = s["r0"].get<double>();
    if (s.contains("r1")) rc.r1 = s["r1"].get<double>();
    if (s.contains("parallel")) rc.parallel = s["parallel"].get<bool>();
    if (s.contains("policy")) {
      std::string p = s["policy"].get<std::string>();
      if (p == "bin-lookup") rc.policy = DecodePolicy::BinLookup;
      else if (p == "joint-typicality") rc.policy = DecodePolicy::JointTypicality;
      else throw UsageError("policy must be bin-lookup|joint-typicality");
    }
  }
}

std::string mode_name(CribbingMode m) {
  switch (m) {
    case CribbingMode::NonCausal: return "noncausal";
    case CribbingMode::StrictlyCausal: return "strictly-causal";
    default: return "causal";
  }
}

json effective_config(const RunConfig& rc) {
  json j{{"version", kVersion},
         {"format", rc.format},
         {"seed", rc.seed},
         {"d1", rc.d1},
         {"d2", rc.d2},
         {"mode", mode_name(rc.mode)},
         {"variant", rc.variant.perfect ? "perfect" : "detfn"},
         {"solver", {{"grid_step", rc.solver.grid_step},
                     {"r0_points", rc.solver.r0_points},
                     {"u_cap", rc.solver.u_cap}}},
         {"sim", {{"n", rc.n},
                  {"blocks", rc.blocks},
                  {"trials", rc.trials},
                  {"eps", rc.eps},
                  {"policy", rc.policy == DecodePolicy::BinLookup
                                 ? "bin-lookup"
                                 : "joint-typicality"},
                  {"parallel", rc.parallel}}}};
  if (!rc.variant.perfect) j["g"] = rc.variant.g.map;
  if (rc.joint) {
    json vars = json::array();
    for (const auto& v : rc.joint->variables())
      vars.push_back({{"name", v.name}, {"size", v.size}});
    j["joint"] = {{"vars", vars}, {"probs", rc.joint->probs()}};
  }
  if (rc.r0) j["sim"]["r0"] = *rc.r0;
  if (rc.r1) j["sim"]["r1"] = *rc.r1;
  return j;
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream f(rc.out, std::ios::binary);
    if (!f) throw UsageError("cannot open output file: " + rc.out);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
  }
}

std::string fmt6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// One-parameter binary family meeting both budgets with equality; p1
// picks the operating point inside [1-D1-D2, min(1-D1,1-D2,2-D1-D2)].
JointPmf family_joint(double p1, double D1, double D2) {
  double p2 = 1 - D1 - p1, p3 = 1 - D2 - p1, p4 = p1 + D1 + D2 - 1;
  std::vector<double> pv{p1, p2, p3, p4};
  std::vector<double> t(8);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int aa = x ? 1 - a : a, bb = x ? 1 - b : b;
        t[static_cast<std::size_t>(x * 4 + a * 2 + b)] = 0.5 * pv[static_cast<std::size_t>(aa * 2 + bb)];
      }
  return JointPmf({{kVarX, 2}, {kVarXh1, 2}, {kVarXh2, 2}}, t);
}

json region_json(const RegionSpec& r) {
  json j{{"sum_rate_lb", r.sum_rate_lb}, {"r0_lb", r.r0_lb}};
  if (r.r0_plus_r12_lb) j["r0_plus_r12_lb"] = *r.r0_plus_r12_lb;
  return j;
}

int cmd_region(RunConfig& rc) {
  if (!rc.joint) throw UsageError("region needs a joint pmf (config key 'joint')");
  const JointPmf& p = *rc.joint;
  DistortionSpec dist = rc.dist ? *rc.dist
                                : DistortionSpec::hamming(p.size_of(kVarX), rc.d1, rc.d2);
  if (expected_distortion(p, dist, 1) > dist.budget1 + 1e-12 ||
      expected_distortion(p, dist, 2) > dist.budget2 + 1e-12) {
    std::cerr << "joint violates the distortion budgets\n";
    return 3;
  }
  json out{{"config", rc.echo},
           {"region", region_json(sr_region(p, rc.mode, rc.variant))},
           {"equitz_cover", region_json(equitz_cover_region(p))},
           {"conferencing", region_json(conferencing_region(p))}};
  emit(rc, out.dump(2));
  return 0;
}

void frontier_csv_rows(std::ostringstream& os, const Frontier& f,
                       const std::string& label, double D1, double D2) {
  for (const auto& pt : f.points)
    os << label << ',' << fmt6(D1) << ',' << fmt6(D2) << ',' << fmt6(pt.r0)
       << ',' << fmt6(pt.r1_min) << '\n';
}

int emit_frontiers(RunConfig& rc, const BernoulliFrontiers& bf) {
  BernoulliCorners c = bernoulli_corners(rc.d1, rc.d2);
  if (rc.format == "csv") {
    std::ostringstream os;
    os << "# " << kVersion << " config=" << rc.echo.dump() << '\n';
    os << "mode,D1,D2,R0,R1_min\n";
    frontier_csv_rows(os, bf.non_causal, "noncausal", rc.d1, rc.d2);
    frontier_csv_rows(os, bf.strictly_causal, "strictly-causal", rc.d1, rc.d2);
    frontier_csv_rows(os, bf.no_cribbing, "no-cribbing", rc.d1, rc.d2);
    os << "corner-A," << fmt6(rc.d1) << ',' << fmt6(rc.d2) << ',' << fmt6(c.a.r0)
       << ',' << fmt6(c.a.r1_min) << '\n';
    os << "corner-B," << fmt6(rc.d1) << ',' << fmt6(rc.d2) << ',' << fmt6(c.b_r0)
       << ",inf\n";
    os << "corner-C," << fmt6(rc.d1) << ',' << fmt6(rc.d2) << ',' << fmt6(c.c_r0)
       << ",inf\n";
    os << "corner-D," << fmt6(rc.d1) << ',' << fmt6(rc.d2) << ',' << fmt6(c.d.r0)
       << ',' << fmt6(c.d.r1_min) << '\n';
    emit(rc, os.str());
  } else {
    auto fr = [](const Frontier& f) {
      json pts = json::array();
      for (const auto& pt : f.points) pts.push_back({{"r0", pt.r0}, {"r1_min", pt.r1_min}});
      return json{{"points", pts}, {"r0_min", f.r0_min}};
    };
    json out{{"config", rc.echo},
             {"noncausal", fr(bf.non_causal)},
             {"strictly_causal", fr(bf.strictly_causal)},
             {"no_cribbing", fr(bf.no_cribbing)},
             {"corners",
              {{"A", {c.a.r0, c.a.r1_min}},
               {"B_r0", c.b_r0},
               {"C_r0", c.c_r0},
               {"D", {c.d.r0, c.d.r1_min}}}}};
    emit(rc, out.dump(2));
  }
  return 0;
}

int cmd_frontier(RunConfig& rc) {
  if (rc.general_search) {
    JointPmf src({{kVarX, 2}}, {0.5, 0.5});
    DistortionSpec dist = DistortionSpec::hamming(2, rc.d1, rc.d2);
    Frontier f = frontier(src, dist,
                          rc.mode == CribbingMode::NonCausal
                              ? FrontierKind::NonCausal
                              : FrontierKind::StrictlyCausal,
                          rc.variant, rc.solver);
    if (f.empty()) {
      std::cerr << "empty feasible set\n";
      std::ostringstream os;
      os << "# " << kVersion << " config=" << rc.echo.dump() << '\n';
      os << "mode,D1,D2,R0,R1_min\n";
      emit(rc, os.str());
      return 3;
    }
    std::ostringstream os;
    os << "# " << kVersion << " config=" << rc.echo.dump() << '\n';
    os << "mode,D1,D2,R0,R1_min\n";
    frontier_csv_rows(os, f, mode_name(rc.mode), rc.d1, rc.d2);
    emit(rc, os.str());
    return 0;
  }
  BernoulliFrontiers bf = bernoulli_example(rc.d1, rc.d2, rc.solver.r0_points);
  if (bf.non_causal.empty()) {
    std::cerr << "empty feasible set\n";
    return 3;
  }
  return emit_frontiers(rc, bf);
}

int cmd_example(RunConfig& rc) {
  rc.d1 = 0.05;
  rc.d2 = 0.1;
  rc.echo = effective_config(rc);
  BernoulliFrontiers bf = bernoulli_example(rc.d1, rc.d2, rc.solver.r0_points);
  return emit_frontiers(rc, bf);
}

json sim_json(const SimReport& r) {
  json sz = json::array();
  for (const auto& s : r.sizing)
    sz.push_back({{"layer", s.layer},
                  {"rate", s.rate},
                  {"log2_count", s.log2_count},
                  {"count", s.count}});
  return json{{"trials", r.trials},
              {"seed", r.seed},
              {"d1", r.d1},
              {"d2", r.d2},
              {"d2_decoded", r.d2_decoded},
              {"d2_block1", r.d2_block1},
              {"d1_per_block", r.d1_per_block},
              {"d2_per_block", r.d2_per_block},
              {"d2_decoded_per_block", r.d2_decoded_per_block},
              {"events",
               {{"e1", r.e1}, {"e2", r.e2}, {"e3", r.e3}, {"e4", r.e4},
                {"ee1", r.ee1}, {"ee2", r.ee2}, {"ed1", r.ed1}, {"ed2", r.ed2}}},
              {"encode_failure_rate", r.encode_failure_rate},
              {"decode_failure_rate", r.decode_failure_rate},
              {"total_event_rate", r.total_event_rate},
              {"sizing", sz}};
}

int cmd_simulate(RunConfig& rc) {
  JointPmf target = rc.joint ? *rc.joint
                             : family_joint((1 - rc.d1) * (1 - rc.d2), rc.d1, rc.d2);
  SimConfig cfg{target};
  cfg.n = rc.n;
  cfg.blocks = rc.blocks;
  cfg.eps = rc.eps;
  cfg.mode = rc.mode;
  cfg.variant = rc.variant;
  cfg.policy = rc.policy;
  cfg.seed = rc.seed;
  cfg.parallel = rc.parallel;
  cfg.dist = rc.dist ? *rc.dist
                     : DistortionSpec::hamming(target.size_of(kVarX), rc.d1, rc.d2);
  if (rc.r0 && rc.r1) {
    cfg.r0 = *rc.r0;
    cfg.r1 = *rc.r1;
  } else {
    // default rate point: 15% above the mode's bounds at the target
    RegionSpec reg = sr_region(target, cfg.mode, cfg.variant);
    cfg.r0 = rc.r0 ? *rc.r0 : std::max(1.15 * reg.r0_lb, 0.05);
    cfg.r1 = rc.r1 ? *rc.r1 : std::max(1.15 * reg.sum_rate_lb - cfg.r0, 0.0);
  }
  rc.echo["sim"]["r0"] = cfg.r0;
  rc.echo["sim"]["r1"] = cfg.r1;
  SimReport rep = simulate(cfg, rc.trials);
  json out{{"config", rc.echo}, {"report", sim_json(rep)}};
  emit(rc, out.dump(2));
  return 0;
}

json corners_json(const std::vector<CornerPoint>& cs) {
  json a = json::array();
  for (const auto& c : cs)
    a.push_back({{"r0", c.r0}, {"r1", c.r1}, {"label", c.label}});
  return a;
}

int cmd_duality(RunConfig& rc) {
  JointPmf sr =
      rc.joint ? *rc.joint : family_joint((1 - rc.d1) * (1 - rc.d2), rc.d1, rc.d2);
  CribFunction g = rc.variant.perfect
                       ? CribFunction::identity(sr.size_of(kVarXh1))
                       : rc.variant.g;
  MacInstance mac = MacInstance::from_sr_joint(sr, g);
  DualityReport rep = duality_check(sr, mac, rc.mode);

  // projection transcript for the split-rate binning system
  IneqSystem sys = binning_rate_system(mac);
  FmTranscript tr = fm_eliminate_verbose(sys, {"R1p", "R1pp"});
  json steps = json::array();
  for (const auto& s : tr.steps) steps.push_back(s);
  json rows = json::array();
  for (const auto& q : tr.result.ineqs) {
    json terms = json::array();
    for (std::size_t k = 0; k < q.coef.size(); ++k)
      if (std::abs(q.coef[k]) > 1e-12)
        terms.push_back({{"var", tr.result.vars[k]}, {"coef", q.coef[k]}});
    rows.push_back({{"terms", terms}, {"rhs", q.rhs}, {"label", q.label}});
  }
  json out{{"config", rc.echo},
           {"duality",
            {{"ok", rep.ok},
             {"joint_max_norm", rep.joint_max_norm},
             {"max_discrepancy", rep.max_discrepancy},
             {"source_corners", corners_json(rep.sr_corners)},
             {"channel_corners", corners_json(rep.mac_corners)},
             {"notes", rep.notes}}},
           {"projection", {{"steps", steps}, {"surviving", rows},
                           {"dropped_redundant", tr.dropped_redundant}}}};
  emit(rc, out.dump(2));
  if (!rep.ok) {
    std::cerr << "corner mismatch: " << rep.max_discrepancy << "\n";
    return 5;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"successive-refinement rate regions, duality and Monte Carlo"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path, mode_s, variant_s, format_s, out_s, policy_s;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  double grid_step = 0, eps_flag = 0, d1_flag = -1, d2_flag = -1;
  int trials_flag = 0, n_flag = 0, blocks_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_s, "output path (default stdout)");
    sub->add_option("--format", format_s)->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", seed_flag)->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--grid-step", grid_step);
    sub->add_option("--trials", trials_flag);
    sub->add_option("--n", n_flag);
    sub->add_option("--blocks", blocks_flag);
    sub->add_option("--eps", eps_flag);
    sub->add_option("--mode", mode_s)
        ->check(CLI::IsMember({"noncausal", "strictly-causal", "causal"}));
    sub->add_option("--variant", variant_s)->check(CLI::IsMember({"perfect", "detfn"}));
    sub->add_option("--d1", d1_flag);
    sub->add_option("--d2", d2_flag);
  };

  CLI::App* region = app.add_subcommand("region", "evaluate rate regions on one joint");
  CLI::App* frontier_c = app.add_subcommand("frontier", "trace (R0, R1_min) frontiers");
  CLI::App* simulate_c = app.add_subcommand("simulate", "Monte Carlo scheme validation");
  CLI::App* duality_c = app.add_subcommand("duality", "source/channel corner comparison");
  CLI::App* example_c = app.add_subcommand("example", "zero-config (0.05, 0.1) reproduction");
  for (CLI::App* s : {region, frontier_c, simulate_c, duality_c, example_c})
    add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) load_config_file(rc, config_path);
    if (!format_s.empty()) rc.format = format_s;
    if (!out_s.empty()) rc.out = out_s;
    if (seed_set) rc.seed = seed_flag;
    if (grid_step > 0) rc.solver.grid_step = grid_step;
    if (eps_flag > 0) rc.eps = eps_flag;
    if (d1_flag >= 0) rc.d1 = d1_flag;
    if (d2_flag >= 0) rc.d2 = d2_flag;
    if (trials_flag > 0) rc.trials = trials_flag;
    if (n_flag > 0) rc.n = n_flag;
    if (blocks_flag > 0) rc.blocks = blocks_flag;
    if (!mode_s.empty()) rc.mode = parse_mode(mode_s);
    if (!variant_s.empty())
      rc.variant = variant_s == "perfect"
                       ? CribbingVariant::Perfect()
                       : CribbingVariant::DetFn(
                             rc.variant.perfect
                                 ? CribFunction::identity(2)
                                 : rc.variant.g);
    if (example_c->parsed() && rc.format.empty()) rc.format = "csv";
    rc.echo = effective_config(rc);

    if (region->parsed()) return cmd_region(rc);
    if (frontier_c->parsed()) return cmd_frontier(rc);
    if (simulate_c->parsed()) return cmd_simulate(rc);
    if (duality_c->parsed()) return cmd_duality(rc);
    if (example_c->parsed()) return cmd_example(rc);
  } catch (const SizingError& e) {
    std::cerr << "sizing: " << e.what() << "\n";
    return 4;
  } catch (const UsageError& e) {
    std::cerr << "config: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
