#ifndef SRCRIB_MAC_HPP
#define SRCRIB_MAC_HPP

#include <string>
#include <vector>

#include "srcrib/prob.hpp"
#include "srcrib/regions.hpp"

// Dual side: multiple-access channel with a common message and cribbing
// encoders, restricted to a fixed input distribution. Upper-bound rate
// regions, corner points, Fourier-Motzkin elimination for the binning
// rate system, and the corner-point duality check against the source
// coding formulas.
namespace srcrib {

inline constexpr const char* kVarY = "Y";
inline constexpr const char* kVarX1 = "X1";
inline constexpr const char* kVarX2 = "X2";
inline constexpr const char* kVarZ1 = "Z1";

// Channel P(y|x1,x2) restricted to a fixed code distribution P(x1,x2)
// (optionally with an auxiliary U for the causal mode, where X2 must be
// a deterministic function of (U, Z1)). Z1 = g(X1) is adjoined to the
// internal joint on construction.
class MacInstance {
 public:
  // input: joint over {X1, X2} or {U, X1, X2}. channel: row-major
  // P(y|x1, x2), rows indexed by (x1 * |X2| + x2); rows must sum to 1
  // within 1e-9.
  MacInstance(JointPmf input, std::vector<double> channel, int y_size,
              CribFunction g);

  // Derives the instance whose joint equals `sr` under the renaming
  // X -> Y, Xh1 -> X1, Xh2 -> X2, U -> U (the channel is read off as
  // P(x | xh1, xh2), so X must be conditionally independent of U given
  // (Xh1, Xh2) for the joints to match).
  static MacInstance from_sr_joint(const JointPmf& sr, const CribFunction& g);

  // Joint over {[U,] X1, X2, Y, Z1}.
  const JointPmf& joint() const { return joint_; }
  bool has_u() const { return joint_.has_variable(kVarU); }
  const CribFunction& crib() const { return g_; }

 private:
  MacInstance() = default;
  JointPmf joint_{{{kVarX1, 1}}, {1.0}};
  CribFunction g_;
};

// Upper bounds on (R0, R1): R1 <= r1_ub and R0 + R1 <= sum_rate_ub.
struct MacRegionSpec {
  double sum_rate_ub = 0.0;
  double r1_ub = 0.0;

  bool contains(double r0, double r1, double tol = 1e-12) const {
    return r0 + r1 <= sum_rate_ub + tol && r1 <= r1_ub + tol && r0 >= -tol &&
           r1 >= -tol;
  }
};

// R1 bound per mode: I(Y;X1|X2,Z1) + H(Z1) (non-causal), + H(Z1|X2)
// (strictly causal), or I(Y;X1|U,Z1) + H(Z1|U) (causal). Causal mode
// requires the U structure and checks I(Y;X1,U) = I(Y;X1,X2).
MacRegionSpec mac_region(const MacInstance& m, CribbingMode mode);

// Conferencing encoders with link rate r12 (infinity allowed):
// R0+R1 <= I(X1,X2;Y), R1 <= I(X1;Y|X2) + r12.
MacRegionSpec mac_conferencing_region(const MacInstance& m, double r12);

struct CornerPoint {
  double r0 = 0.0;
  double r1 = 0.0;
  std::string label;
};

// The two extreme points of the mode's region: (sum_rate, 0) and the
// maximal-R1 point with R0 at its own bound.
std::vector<CornerPoint> mac_corner_points(const MacRegionSpec& r,
                                           CribbingMode mode,
                                           const MacInstance& m);

// Source-coding corner points in the same coordinates, evaluated on a
// joint over {X, Xh1, Xh2 [, Zh1][, U]}; with no Zh1 the crib is Xh1
// itself (perfect cribbing).
std::vector<CornerPoint> sr_corner_points(const JointPmf& p, CribbingMode mode);

// Conferencing corner: (min(sum, I(.;X1|X2)+r12), {I(.;X2) - r12}+).
std::vector<CornerPoint> mac_conferencing_corners(const MacInstance& m, double r12);
std::vector<CornerPoint> sr_conferencing_corners(const JointPmf& p, double r12);

struct DualityReport {
  bool ok = false;
  double joint_max_norm = 0.0;   // renamed-joint mismatch (precondition)
  double max_discrepancy = 0.0;  // over corner coordinates
  std::vector<CornerPoint> sr_corners;
  std::vector<CornerPoint> mac_corners;
  std::vector<std::string> notes;
};

// Verifies, coordinate by coordinate, that the source and channel corner
// formulas agree to 1e-9 on a matched pair. Throws UsageError when the
// renamed joints differ beyond 1e-9 in max norm.
DualityReport duality_check(const JointPmf& sr_joint, const MacInstance& mac,
                            CribbingMode mode);
DualityReport duality_check_conferencing(const JointPmf& sr_joint,
                                         const MacInstance& mac, double r12);

// ---------------------------------------------------------------------------
// Linear inequality systems and Fourier-Motzkin elimination.
// ---------------------------------------------------------------------------

// One inequality sum_j coef[j] * var[j] <= rhs over the owning system's
// variable list.
struct Ineq {
  std::vector<double> coef;
  double rhs = 0.0;
  std::string label;
};

struct IneqSystem {
  std::vector<std::string> vars;
  std::vector<Ineq> ineqs;
  // Half-width of the box used for redundancy certification; defaults
  // to the sum of |rhs| when non-positive.
  double box = 0.0;

  // coefficient list given as (name, value) pairs; unknown names throw.
  void add(const std::vector<std::pair<std::string, double>>& terms, double rhs,
           std::string label = {});
  void add_equality(const std::vector<std::pair<std::string, double>>& terms,
                    double rhs, const std::string& label = {});
  double box_half_width() const;
};

struct FmTranscript {
  IneqSystem result;
  std::vector<std::string> steps;            // one line per event
  std::vector<std::string> dropped_redundant;  // labels of pruned rows
};

// Projects the feasible set onto the remaining variables. Strictness is
// not modeled (closures). Redundant rows are pruned when implied by the
// conjunction of the others over the symmetric box [-B, B]^k, certified
// by vertex enumeration (k <= 6; larger systems skip pruning).
FmTranscript fm_eliminate_verbose(const IneqSystem& sys,
                                  const std::vector<std::string>& eliminate);
IneqSystem fm_eliminate(const IneqSystem& sys,
                        const std::vector<std::string>& eliminate);

// The double-binning achievable rate system over {R0, R1, R1p, R1pp}:
// R1p <= H(Z1), R0+R1p+R1pp <= I(X1,X2;Y), R0+R1pp <= I(X1,X2;Y|Z1),
// R1pp <= I(X1;Y|Z1,X2), R1 = R1p + R1pp. Eliminating {R1p, R1pp}
// reproduces the mode's outer bounds with the middle row redundant.
IneqSystem binning_rate_system(const MacInstance& m);

}  // namespace srcrib

#endif  // SRCRIB_MAC_HPP
