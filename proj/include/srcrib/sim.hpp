#ifndef SRCRIB_SIM_HPP
#define SRCRIB_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "srcrib/prob.hpp"
#include "srcrib/regions.hpp"

// Monte Carlo validation of the binning-based achievability schemes:
// double binning for the non-causal mode, forward encoding with
// block-Markov decoding for the (strictly) causal ones. Desk scale by
// design -- the point is event bookkeeping and trend checks, not
// throughput, so block lengths and codebook layers are capped.
namespace srcrib {

using Block = std::vector<std::uint8_t>;

enum class DecodePolicy { BinLookup, JointTypicality };

struct SimConfig {
  JointPmf target;  // over {X, Xh1, Xh2}, plus U for the causal mode
  int n = 12;
  int blocks = 1;  // B; the forward-encoding scheme needs B >= 2
  double r0 = 0.0;  // common rate, bits/symbol
  double r1 = 0.0;  // refinement rate, bits/symbol
  double eps = 0.1;
  CribbingMode mode = CribbingMode::NonCausal;
  CribbingVariant variant = CribbingVariant::Perfect();
  DistortionSpec dist;
  DecodePolicy policy = DecodePolicy::BinLookup;
  std::uint64_t seed = 1;
  bool parallel = true;
};

// Robust typicality with an integer slack: every cell count must obey
// |count - n*p| <= eps*n*p + 1, and zero-probability cells must be
// absent. The +1 keeps desk-scale typical sets nonempty (pure relative
// deviation admits no integer count once n*p < 1/(1+eps)) and washes
// out as n grows. Sequences are matched positionally to the joint's
// variable order.
bool is_typical(const std::vector<const Block*>& seqs, const JointPmf& joint,
                double eps);
bool is_typical(const Block& a, const JointPmf& joint, double eps);
bool is_typical(const Block& a, const Block& b, const JointPmf& joint,
                double eps);

struct LayerSizing {
  std::string layer;
  double rate = 0.0;   // nominal bits/symbol assigned to the layer
  int log2_count = 0;  // ceil(n * rate)
  std::size_t count = 0;
};

// Immutable per-trial codebook. Codewords are derived lazily from a
// keyed counter stream, so repeated lookups of one index agree exactly
// and distinct trials never share randomness. Binning is a seeded
// permutation followed by contiguous slicing, which makes the +-1
// occupancy guarantee exact rather than statistical.
class Codebook {
 public:
  Codebook(const SimConfig& cfg, std::uint64_t trial_seed);

  bool block_markov() const { return block_markov_; }
  std::size_t rows() const { return rows_; }            // Xh2 layer (U layer when block-Markov)
  std::size_t words_per_row() const { return words_; }  // crib layer
  std::size_t columns() const { return cols_; }
  std::size_t refinements() const { return refs_; }  // det-fn Xh1 layer, 1 otherwise
  const std::vector<LayerSizing>& sizing() const { return sizing_; }

  // Double-binning accessors.
  Block xh2_word(std::size_t row) const;
  Block crib_word(std::size_t row, std::size_t j) const;  // Xh1, or Zh1 for det-fn
  Block xh1_word(std::size_t row, std::size_t j, std::size_t k) const;
  std::size_t column_of(std::size_t row, std::size_t j) const;
  // Word indices landing in (row, col), ordered by in-bin position.
  std::vector<std::size_t> bin_members(std::size_t row, std::size_t col) const;

  // Forward-encoding accessors; `slab` is the conditioning U index.
  Block u_word(int block, std::size_t m) const;
  Block bm_word(int block, std::size_t slab, std::size_t row, std::size_t j) const;
  std::size_t bm_column_of(int block, std::size_t slab, std::size_t row,
                           std::size_t j) const;
  std::vector<std::size_t> bm_bin_members(int block, std::size_t slab,
                                          std::size_t row, std::size_t col) const;

  const JointPmf& pair_x_row() const { return pair_x_row_; }      // P(X, Xh2) or P(X, U)
  const JointPmf& pair_crib_row() const { return pair_crib_row_; }  // P(crib, Xh2)
  const JointPmf& triple() const { return triple_; }  // P(X, crib, Xh2) / P(X, Xh1, U)
  const JointPmf& quad() const { return quad_; }      // det-fn P(X, Xh1, Zh1, Xh2)

 private:
  Block draw(const std::vector<double>& table, int sym_size,
             const std::vector<std::pair<const Block*, int>>& cond,
             std::uint64_t tag, std::uint64_t a, std::uint64_t b,
             std::uint64_t c) const;
  std::vector<std::size_t> perm(std::uint64_t tag, std::uint64_t a,
                                std::uint64_t b, std::uint64_t c) const;

  bool block_markov_ = false;
  bool det_fn_ = false;
  int n_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t rows_ = 1, words_ = 1, cols_ = 1, refs_ = 1;
  int row_sym_ = 2, crib_sym_ = 2, xh1_sym_ = 2;
  std::vector<double> t_row_;   // P(Xh2) / P(U), flat
  std::vector<double> t_crib_;  // P(crib | row var)
  std::vector<double> t_ref_;   // det-fn P(Xh1 | Zh1, Xh2)
  std::vector<LayerSizing> sizing_;
  JointPmf pair_x_row_, pair_crib_row_, triple_, quad_;
};

struct EncodeOutcome {
  bool ok = false;
  int fail_layer = 0;  // 1 -> no typical row (E1), 2 -> no typical word (E2)
  std::size_t row = 0, col = 0, idx = 0, ref = 0;  // idx = in-bin position
};

// Smallest-index jointly-typical selection at each layer, no
// backtracking across layers. Failure is a value, not an exception.
EncodeOutcome encode_noncausal(const Block& x, const Codebook& cb, double eps);

struct Decode2Outcome {
  bool ok = false;
  int fail_event = 0;  // 3 -> crib in no row, 4 -> ambiguous row
  std::size_t row = 0;
  Block xh2;
};

// Decoder 2 recovers the row from the crib plus the column index.
// BinLookup demands a verbatim crib match in the scanned bin;
// JointTypicality additionally requires the matched codeword to be
// jointly typical with the row's Xh2 word, so it can reject a verbatim
// hit that lies outside the typical set.
Decode2Outcome decode2_noncausal(const Block& crib, std::size_t col,
                                 const Codebook& cb, DecodePolicy policy,
                                 double eps);

struct SimReport {
  long trials = 0;
  std::uint64_t seed = 0;
  // Mean distortions over trials. For block-Markov runs d2 excludes
  // block 1, whose distortion is charged at d_max and kept separate.
  // d2 measures the committed descriptions (the reconstruction decoder
  // 2 obtains whenever its index chain holds); d2_decoded measures the
  // chained decoder output as-is, so chain breaks show up here and in
  // the ed1/ed2 counts. At desk-scale block lengths the chain margin
  // n*(I(X;U) - H(Xh1|U)) is a fraction of a bit, so the two can
  // differ substantially; both are reported. They coincide for the
  // double-binning scheme.
  std::vector<double> d1_per_block, d2_per_block, d2_decoded_per_block;
  double d1 = 0.0, d2 = 0.0, d2_decoded = 0.0;
  double d2_block1 = 0.0;
  // Double-binning events: e1 no typical row, e2 no typical word,
  // e3 crib absent from its bin, e4 ambiguous row. Block-Markov
  // analogues: ee1/ee2 encoder-side, ed1 crib absent, ed2 ambiguous.
  long e1 = 0, e2 = 0, e3 = 0, e4 = 0;
  long ee1 = 0, ee2 = 0, ed1 = 0, ed2 = 0;
  double encode_failure_rate = 0.0;
  double decode_failure_rate = 0.0;
  double total_event_rate = 0.0;  // trials hitting any event
  std::vector<LayerSizing> sizing;
};

// One forward-encoding trial over an explicit source stream. Encoder
// tie-breaking inside the typical set picks the least-distortion
// candidate (smallest index on ties); once a chain break occurs the
// wrong slab is measured as-is, with no oracle reset.
SimReport run_block_markov(const std::vector<Block>& x_stream,
                           const SimConfig& cfg, std::uint64_t seed);

// Independent trials with per-trial seeds derived from cfg.seed; the
// merged report is identical for any thread count.
SimReport simulate(const SimConfig& cfg, long trials);

}  // namespace srcrib

#endif  // SRCRIB_SIM_HPP
