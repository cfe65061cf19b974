#ifndef SRCRIB_PROB_HPP
#define SRCRIB_PROB_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Exact finite-alphabet probability machinery: joint pmfs over named
// variables, entropies, mutual informations, deterministic-function
// extension and distortion evaluation. All information quantities are
// in bits (log base 2); 0*log(0) is treated as 0.
namespace srcrib {

// Canonical variable names used across the library.
inline constexpr const char* kVarX = "X";
inline constexpr const char* kVarXh1 = "Xh1";
inline constexpr const char* kVarXh2 = "Xh2";
inline constexpr const char* kVarZh1 = "Zh1";
inline constexpr const char* kVarU = "U";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary entropy h2(a) in bits; h2(0) = h2(1) = 0.
double binary_entropy(double a);

// Entropy in bits of an arbitrary probability vector (entries need not
// be normalized beyond the caller's responsibility).
double entropy_bits(std::span<const double> p);

struct Alphabet {
  std::string name;
  int size = 0;  // symbols indexed 0..size-1
};

// Total mapping g: source symbol -> crib symbol. The range is compacted
// so the crib alphabet never exceeds the source alphabet.
struct CribFunction {
  std::vector<int> map;  // map[x] = z

  static CribFunction identity(int n);
  static CribFunction constant(int n, int value = 0);
  static CribFunction parity(int n);

  // Remaps range values onto 0..k-1 preserving numeric order.
  CribFunction compacted() const;
  int range_size() const;
  int operator()(int x) const { return map.at(static_cast<size_t>(x)); }
};

// Dense joint pmf over an ordered list of named finite variables.
// Entries are nonnegative and sum to one; inputs within 1e-6 of unit
// mass are renormalized, anything further off is rejected.
class JointPmf {
 public:
  JointPmf(std::vector<Alphabet> vars, std::vector<double> probs);

  const std::vector<Alphabet>& variables() const { return vars_; }
  const std::vector<double>& probs() const { return probs_; }
  size_t table_size() const { return probs_.size(); }

  bool has_variable(const std::string& name) const;
  int axis(const std::string& name) const;  // UsageError if unknown
  int size_of(const std::string& name) const;

  // Symbol of variable `axis` at flat table index `idx`.
  int symbol_at(size_t idx, int axis) const;

  double entropy(const std::vector<std::string>& vars) const;
  double conditional_entropy(const std::vector<std::string>& target,
                             const std::vector<std::string>& given) const;
  // I(a;b|given), computed via entropy differences and clamped to 0.
  double mutual_information(const std::vector<std::string>& a,
                            const std::vector<std::string>& b,
                            const std::vector<std::string>& given = {}) const;

  JointPmf marginalize(const std::vector<std::string>& keep) const;

  // Adjoins new_var = g(source_var); the Markov chain (rest)-source-new
  // holds exactly and H(new_var | source_var) = 0.
  JointPmf extend_with_function(const std::string& source_var,
                                const CribFunction& g,
                                const std::string& new_var) const;

  // Conditional table P(target | given) as a flat row-major table
  // indexed by (given symbols..., target symbol). Rows with zero mass
  // are filled uniformly.
  std::vector<double> conditional_table(const std::string& target,
                                        const std::vector<std::string>& given) const;

 private:
  std::vector<Alphabet> vars_;
  std::vector<double> probs_;
  std::vector<size_t> strides_;
};

// Per-decoder single-letter distortion tables and budgets.
struct DistortionSpec {
  std::vector<std::vector<double>> d1;  // d1[x][xh1]
  std::vector<std::vector<double>> d2;  // d2[x][xh2]
  double budget1 = 0.0;
  double budget2 = 0.0;

  static DistortionSpec hamming(int x_size, double D1, double D2);
  double d_max() const;
};

// E[d_decoder(X, Xh_decoder)] under p; decoder is 1 or 2.
double expected_distortion(const JointPmf& p, const DistortionSpec& spec,
                           int decoder);

}  // namespace srcrib

#endif  // SRCRIB_PROB_HPP
