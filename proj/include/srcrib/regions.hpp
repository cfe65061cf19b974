#ifndef SRCRIB_REGIONS_HPP
#define SRCRIB_REGIONS_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "srcrib/prob.hpp"

// Rate regions for successive refinement with cribbing decoders, the
// conferencing and Equitz-Cover baselines, and frontier optimization
// over feasible joint distributions at fixed distortion budgets.
namespace srcrib {

struct SizingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CribbingMode { NonCausal, StrictlyCausal, Causal };

struct CribbingVariant {
  bool perfect = true;
  CribFunction g;  // crib map, used when !perfect

  static CribbingVariant Perfect() { return {true, {}}; }
  static CribbingVariant DetFn(CribFunction fn) { return {false, std::move(fn)}; }
};

// Linear lower bounds on (R0, R1[, R12]); {a}+ already applied.
struct RegionSpec {
  double sum_rate_lb = 0.0;  // R0 + R1 >= sum_rate_lb
  double r0_lb = 0.0;        // R0 >= r0_lb
  std::optional<double> r0_plus_r12_lb;  // conferencing: R0 + R12 >= bound

  bool contains(double r0, double r1,
                double r12 = std::numeric_limits<double>::infinity(),
                double tol = 1e-12) const;
};

// Rate bounds for one mode, evaluated on one joint. Requires X, Xh1, Xh2 (and U for the
// causal mode). For the deterministic-function variant Zh1 is adjoined
// via extend_with_function when not already present.
RegionSpec sr_region(const JointPmf& p, CribbingMode mode, const CribbingVariant& variant);

// Classical successive refinement (no cribbing).
RegionSpec equitz_cover_region(const JointPmf& p);

// Conferencing decoders: R0+R1 >= I(X;Xh1,Xh2) and R0+R12 >= I(X;Xh2).
RegionSpec conferencing_region(const JointPmf& p);

enum class FrontierKind { NonCausal, StrictlyCausal, Causal, NoCribbing };
std::string to_string(FrontierKind kind);

struct FrontierPoint {
  double r0 = 0.0;
  double r1_min = 0.0;
};

// Lower boundary {(R0, R1_min(R0))} of an achievable region at fixed
// distortions, plus the R1->infinity endpoint (minimum feasible R0).
struct Frontier {
  FrontierKind kind = FrontierKind::NonCausal;
  bool perfect = true;
  double d1 = 0.0, d2 = 0.0;
  std::vector<FrontierPoint> points;  // sorted by r0, r1_min nonincreasing
  double r0_min = std::numeric_limits<double>::infinity();  // R1->inf endpoint
  // provenance
  double grid_step = 0.0;
  int r0_points = 0;
  int refine_passes = 0;

  bool empty() const { return points.empty(); }
};

// Searchable joint-distribution family for the frontier sweep.
struct FeasibleParameterization {
  int xh1_size = 2;
  int xh2_size = 2;
  // Causal only: effective |U| = min(|X|*|Xh1|+4, u_cap).
  int u_cap = 6;
  double grid_step = 1.0 / 64;  // step per simplex parameter, in (0, 0.25]
  int r0_points = 129;
  bool parallel = true;
  // Guard against runaway enumeration (causal mode with a large U grid).
  uint64_t max_nodes = 2'000'000'000ULL;
};

// Grid search plus coordinate-descent refinement. Infeasible budgets
// yield an empty frontier, not an exception.
Frontier frontier(const JointPmf& source, const DistortionSpec& spec,
                  FrontierKind kind, const CribbingVariant& variant,
                  const FeasibleParameterization& param);

// Bern(0.5) source, Hamming distortion, one-parameter symmetric family
// p1 in [1-D1-D2, min(1-D1, 1-D2, 2-D1-D2)] with distortions holding
// with equality.
struct BernoulliFrontiers {
  Frontier non_causal;
  Frontier strictly_causal;
  Frontier no_cribbing;
};
BernoulliFrontiers bernoulli_example(double D1, double D2, int r0_points = 129);

// Closed-form corner points of the Bern(0.5) example:
//   A = (0, 1-h2(D1))           non-causal, R0 = 0
//   B:  R0 = 1-h2(D1)-h2(D2)    strictly causal, R1 -> inf
//   C:  R0 = 1-h2(D2)           no cribbing, R1 -> inf
//   D = (1-h2(D1), 0)           non-causal, R1 = 0
struct BernoulliCorners {
  FrontierPoint a;
  double b_r0 = 0.0;
  double c_r0 = 0.0;
  FrontierPoint d;
};
BernoulliCorners bernoulli_corners(double D1, double D2);

// Minimum private rate at R0 = 0 for the deterministic-function
// variant (mode-specific common-rate constraint); +infinity when the
// constraint excludes every feasible joint.
double r0_zero_min_rate(const JointPmf& source, const DistortionSpec& spec,
                        CribbingMode mode, const CribFunction& g,
                        const FeasibleParameterization& param);

// Rate transform to cascade coordinates (R12, R1) = (R0, R0+R1).
Frontier cascade_transform(const Frontier& f);

}  // namespace srcrib

#endif  // SRCRIB_REGIONS_HPP
