#include "srcrib/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srcrib {
namespace {

// Keyed counter stream (splitmix64 core). Every codeword, permutation
// and source block gets its own key tuple, so lookups are pure and
// trials never share randomness.
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Stream {
  std::uint64_t s;
  Stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
         std::uint64_t b, std::uint64_t c, std::uint64_t d)
      : s(seed) {
    for (std::uint64_t k : {tag, a, b, c, d}) s = mix64(s + kGolden * (k + 1));
  }
  std::uint64_t next() { return mix64(s += kGolden); }
  double unif() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

constexpr std::uint64_t kTagRow = 1, kTagCrib = 2, kTagRef = 3, kTagPerm = 4,
                        kTagSource = 5, kTagTrial = 6;

// ceil(n*rate) clamped at 0; the per-layer cap keeps desk scale honest.
int ceil_log2_count(int n, double rate, const char* layer) {
  int e = static_cast<int>(std::ceil(n * rate - 1e-9));
  if (e < 0) e = 0;
  if (e > 20)
    throw SizingError(std::string("codebook layer '") + layer + "' needs 2^" +
                      std::to_string(e) + " codewords; the cap is 2^20");
  return e;
}

const char* row_var(const SimConfig& cfg) {
  return cfg.mode == CribbingMode::Causal ? kVarU : kVarXh2;
}

const char* crib_var(const SimConfig& cfg) {
  return cfg.variant.perfect ? kVarXh1 : kVarZh1;
}

JointPmf extended_target(const SimConfig& cfg) {
  if (cfg.variant.perfect || cfg.target.has_variable(kVarZh1)) return cfg.target;
  return cfg.target.extend_with_function(kVarXh1, cfg.variant.g, kVarZh1);
}

double block_distortion(const Block& x, const Block& w,
                        const std::vector<std::vector<double>>& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += d[x[i]][w[i]];
  return s / static_cast<double>(x.size());
}

int pick_symbol(const double* pmf, std::size_t size, double u) {
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < size; ++a) {
    acc += pmf[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(size - 1);
}

Block draw_iid(const std::vector<double>& pmf, int n, Stream st) {
  Block out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(pick_symbol(pmf.data(), pmf.size(), st.unif()));
  return out;
}

Block apply_crib_map(const CribFunction& g, const Block& w) {
  Block z(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    z[i] = static_cast<std::uint8_t>(g(w[i]));
  return z;
}

void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw UsageError("block length must be >= 1");
  if (cfg.n > 16) throw SizingError("block length capped at 16");
  if (cfg.blocks < 1) throw UsageError("block count must be >= 1");
  if (!(cfg.eps > 0.0) || !(cfg.eps < 0.5))
    throw UsageError("typicality epsilon must lie in (0, 0.5)");
  if (cfg.r0 < 0.0 || cfg.r1 < 0.0) throw UsageError("rates must be nonnegative");
  for (const char* v : {kVarX, kVarXh1, kVarXh2})
    if (!cfg.target.has_variable(v))
      throw UsageError(std::string("target joint must provide ") + v);
  if (cfg.mode == CribbingMode::Causal && !cfg.target.has_variable(kVarU))
    throw UsageError("causal mode needs U in the target joint");
  if (cfg.mode == CribbingMode::NonCausal && cfg.blocks != 1)
    throw UsageError("double binning runs single-block (B = 1)");
  if (cfg.mode != CribbingMode::NonCausal && cfg.blocks < 2)
    throw UsageError("forward encoding needs B >= 2");
}

}  // namespace

bool is_typical(const std::vector<const Block*>& seqs, const JointPmf& joint,
                double eps) {
  const auto& vars = joint.variables();
  if (seqs.size() != vars.size())
    throw UsageError("is_typical: sequence count must match joint arity");
  std::size_t n = seqs[0]->size();
  for (const Block* s : seqs)
    if (s->size() != n) throw UsageError("is_typical: length mismatch");
  if (n == 0) throw UsageError("is_typical: empty sequences");
  std::vector<std::size_t> strides(vars.size(), 1);
  for (std::size_t k = vars.size() - 1; k > 0; --k)
    strides[k - 1] = strides[k] * static_cast<std::size_t>(vars[k].size);
  std::vector<int> cnt(joint.table_size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      int sym = (*seqs[k])[i];
      if (sym >= vars[k].size) throw UsageError("is_typical: symbol out of range");
      idx += static_cast<std::size_t>(sym) * strides[k];
    }
    ++cnt[idx];
  }
  double nn = static_cast<double>(n);
  for (std::size_t c = 0; c < cnt.size(); ++c) {
    double p = joint.probs()[c];
    if (p <= 0.0) {
      if (cnt[c] > 0) return false;
    } else if (std::abs(cnt[c] - nn * p) > eps * nn * p + 1.0 + 1e-9) {
      return false;
    }
  }
  return true;
}

bool is_typical(const Block& a, const JointPmf& joint, double eps) {
  return is_typical(std::vector<const Block*>{&a}, joint, eps);
}

bool is_typical(const Block& a, const Block& b, const JointPmf& joint,
                double eps) {
  return is_typical(std::vector<const Block*>{&a, &b}, joint, eps);
}

Codebook::Codebook(const SimConfig& cfg, std::uint64_t trial_seed)
    : block_markov_(cfg.mode != CribbingMode::NonCausal),
      det_fn_(!cfg.variant.perfect),
      n_(cfg.n),
      seed_(trial_seed),
      pair_x_row_(extended_target(cfg).marginalize({kVarX, row_var(cfg)})),
      pair_crib_row_(extended_target(cfg).marginalize(
          {cfg.mode == CribbingMode::NonCausal ? crib_var(cfg) : kVarXh1,
           row_var(cfg)})),
      // Block-Markov codewords are Xh1 words even in det-fn mode; the
      // crib is g applied to the emitted block, never a stored layer.
      triple_(extended_target(cfg).marginalize(
          {kVarX,
           cfg.mode == CribbingMode::NonCausal ? crib_var(cfg) : kVarXh1,
           row_var(cfg)})),
      quad_(cfg.mode == CribbingMode::NonCausal && !cfg.variant.perfect
                ? extended_target(cfg).marginalize(
                      {kVarX, kVarXh1, kVarZh1, kVarXh2})
                : extended_target(cfg).marginalize(
                      {kVarX, kVarXh1, row_var(cfg)})) {
  validate(cfg);
  JointPmf ext = extended_target(cfg);
  const std::string rv = row_var(cfg);
  const std::string cv =
      block_markov_ ? std::string(kVarXh1) : std::string(crib_var(cfg));
  row_sym_ = ext.size_of(rv);
  crib_sym_ = ext.size_of(cv);
  xh1_sym_ = ext.size_of(kVarXh1);
  t_row_ = ext.marginalize({rv}).probs();
  t_crib_ = ext.conditional_table(cv, {rv});

  double sum = cfg.r0 + cfg.r1;
  if (!block_markov_) {
    // The configured rate budget is split across layers by information
    // share, so scaling the rates scales every layer.
    double iv = ext.mutual_information({kVarX}, {kVarXh2});
    double it = ext.mutual_information({kVarX}, {kVarXh1, kVarXh2});
    double r_row = it > 1e-12 ? sum * (iv / it) : 0.0;
    double residual = sum - r_row;
    double r_crib = residual;
    if (det_fn_) {
      t_ref_ = ext.conditional_table(kVarXh1, {kVarZh1, kVarXh2});
      double iz = ext.mutual_information({kVarX}, {kVarZh1}, {kVarXh2});
      double ix = ext.mutual_information({kVarX}, {kVarXh1}, {kVarZh1, kVarXh2});
      double share = iz + ix > 1e-12 ? iz / (iz + ix) : 1.0;
      r_crib = residual * share;
      double r_ref = residual - r_crib;
      int er = ceil_log2_count(n_, r_ref, "refinements-per-word");
      refs_ = std::size_t(1) << er;
      sizing_.push_back({"refinements-per-word", r_ref, er, refs_});
    }
    int e1 = ceil_log2_count(n_, r_row, "rows");
    int e2 = ceil_log2_count(n_, r_crib, "words-per-row");
    rows_ = std::size_t(1) << e1;
    words_ = std::size_t(1) << e2;
    sizing_.insert(sizing_.begin(), {{"rows", r_row, e1, rows_},
                                     {"words-per-row", r_crib, e2, words_}});
  } else {
    double iu = ext.mutual_information({kVarX}, {rv});
    double it = ext.mutual_information({kVarX}, {kVarXh1, rv});
    double r_u = it > 1e-12 ? sum * (iu / it) : 0.0;
    int e1 = ceil_log2_count(n_, r_u, "u-words");
    int e2 = ceil_log2_count(n_, sum - r_u, "words-per-row");
    rows_ = std::size_t(1) << e1;
    words_ = std::size_t(1) << e2;
    sizing_ = {{"u-words", r_u, e1, rows_},
               {"words-per-row", sum - r_u, e2, words_}};
  }
  int ec = ceil_log2_count(n_, cfg.r0, "columns");
  cols_ = std::size_t(1) << ec;
  sizing_.push_back({"columns", cfg.r0, ec, cols_});
  if (cols_ > words_)
    throw UsageError(
        "common-rate binning would leave empty bins: 2^ceil(n*R0) columns "
        "exceed the per-row word count");
}

Block Codebook::draw(const std::vector<double>& table, int sym_size,
                     const std::vector<std::pair<const Block*, int>>& cond,
                     std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                     std::uint64_t c) const {
  Stream st(seed_, tag, a, b, c, 0);
  Block out(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    std::size_t row = 0;
    for (const auto& [blk, size] : cond)
      row = row * static_cast<std::size_t>(size) +
            (*blk)[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(pick_symbol(
        table.data() + row * static_cast<std::size_t>(sym_size),
        static_cast<std::size_t>(sym_size), st.unif()));
  }
  return out;
}

std::vector<std::size_t> Codebook::perm(std::uint64_t tag, std::uint64_t a,
                                        std::uint64_t b, std::uint64_t c) const {
  std::vector<std::size_t> p(words_);
  for (std::size_t i = 0; i < words_; ++i) p[i] = i;
  Stream st(seed_, tag, a, b, c, 1);
  for (std::size_t i = words_; i > 1; --i) {
    auto j = static_cast<std::size_t>(st.unif() * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

Block Codebook::xh2_word(std::size_t row) const {
  return draw(t_row_, row_sym_, {}, kTagRow, 0, 0, row);
}

Block Codebook::crib_word(std::size_t row, std::size_t j) const {
  Block r = xh2_word(row);
  return draw(t_crib_, crib_sym_, {{&r, row_sym_}}, kTagCrib, 0, row, j);
}

Block Codebook::xh1_word(std::size_t row, std::size_t j, std::size_t k) const {
  if (!det_fn_ || block_markov_) return crib_word(row, j);
  Block r = xh2_word(row);
  Block z = crib_word(row, j);
  return draw(t_ref_, xh1_sym_, {{&z, crib_sym_}, {&r, row_sym_}}, kTagRef, row,
              j, k);
}

std::size_t Codebook::column_of(std::size_t row, std::size_t j) const {
  auto p = perm(kTagPerm, 0, 0, row);
  std::size_t pos = 0;
  for (std::size_t t = 0; t < words_; ++t)
    if (p[t] == j) { pos = t; break; }
  return pos * cols_ / words_;
}

std::vector<std::size_t> Codebook::bin_members(std::size_t row,
                                               std::size_t col) const {
  auto p = perm(kTagPerm, 0, 0, row);
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < words_; ++t)
    if (t * cols_ / words_ == col) out.push_back(p[t]);
  return out;
}

Block Codebook::u_word(int block, std::size_t m) const {
  return draw(t_row_, row_sym_, {},
              kTagRow, static_cast<std::uint64_t>(block), 0, m);
}

Block Codebook::bm_word(int block, std::size_t slab, std::size_t row,
                        std::size_t j) const {
  Block u = u_word(block, slab);
  // The row index is pure addressing (it carries the next block's
  // description); the word law conditions on the slab's U word only.
  return draw(t_crib_, crib_sym_, {{&u, row_sym_}},
              kTagCrib, static_cast<std::uint64_t>(block),
              slab * rows_ + row, j);
}

std::size_t Codebook::bm_column_of(int block, std::size_t slab,
                                   std::size_t row, std::size_t j) const {
  auto p = perm(kTagPerm, static_cast<std::uint64_t>(block), slab, row);
  std::size_t pos = 0;
  for (std::size_t t = 0; t < words_; ++t)
    if (p[t] == j) { pos = t; break; }
  return pos * cols_ / words_;
}

std::vector<std::size_t> Codebook::bm_bin_members(int block, std::size_t slab,
                                                  std::size_t row,
                                                  std::size_t col) const {
  auto p = perm(kTagPerm, static_cast<std::uint64_t>(block), slab, row);
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < words_; ++t)
    if (t * cols_ / words_ == col) out.push_back(p[t]);
  return out;
}

EncodeOutcome encode_noncausal(const Block& x, const Codebook& cb, double eps) {
  EncodeOutcome out;
  std::size_t row = cb.rows();
  for (std::size_t r = 0; r < cb.rows(); ++r) {
    Block w2 = cb.xh2_word(r);
    if (is_typical(x, w2, cb.pair_x_row(), eps)) { row = r; break; }
  }
  if (row == cb.rows()) {
    out.fail_layer = 1;
    return out;
  }
  Block w2 = cb.xh2_word(row);
  std::size_t word = cb.words_per_row(), ref = 0;
  for (std::size_t j = 0; j < cb.words_per_row(); ++j) {
    Block wc = cb.crib_word(row, j);
    if (!is_typical({&x, &wc, &w2}, cb.triple(), eps)) continue;
    if (cb.refinements() == 1) { word = j; break; }
    for (std::size_t k = 0; k < cb.refinements(); ++k) {
      Block w1 = cb.xh1_word(row, j, k);
      if (is_typical({&x, &w1, &wc, &w2}, cb.quad(), eps)) {
        word = j;
        ref = k;
        break;
      }
    }
    if (word != cb.words_per_row()) break;
  }
  if (word == cb.words_per_row()) {
    out.fail_layer = 2;
    out.row = row;
    return out;
  }
  out.ok = true;
  out.row = row;
  out.ref = ref;
  out.col = cb.column_of(row, word);
  auto members = cb.bin_members(row, out.col);
  for (std::size_t l = 0; l < members.size(); ++l)
    if (members[l] == word) { out.idx = l; break; }
  return out;
}

Decode2Outcome decode2_noncausal(const Block& crib, std::size_t col,
                                 const Codebook& cb, DecodePolicy policy,
                                 double eps) {
  Decode2Outcome out;
  std::vector<std::size_t> hits;
  for (std::size_t r = 0; r < cb.rows(); ++r) {
    bool hit = false;
    for (std::size_t j : cb.bin_members(r, col)) {
      if (cb.crib_word(r, j) != crib) continue;
      if (policy == DecodePolicy::JointTypicality) {
        Block w2 = cb.xh2_word(r);
        if (!is_typical(crib, w2, cb.pair_crib_row(), eps)) continue;
      }
      hit = true;
      break;
    }
    if (hit) hits.push_back(r);
  }
  if (hits.empty()) {
    out.fail_event = 3;
    return out;
  }
  out.row = hits.front();
  out.xh2 = cb.xh2_word(out.row);
  if (hits.size() > 1) {
    out.fail_event = 4;
    return out;
  }
  out.ok = true;
  return out;
}

namespace {

SimReport noncausal_trial(const SimConfig& cfg, std::uint64_t tseed) {
  SimReport rec;
  rec.trials = 1;
  Codebook cb(cfg, tseed);
  std::vector<double> px = cfg.target.marginalize({kVarX}).probs();
  Block x = draw_iid(px, cfg.n, Stream(tseed, kTagSource, 0, 0, 0, 0));

  EncodeOutcome enc = encode_noncausal(x, cb, cfg.eps);
  std::size_t row = enc.row, col = enc.col, ref = enc.ref;
  std::size_t word = 0;
  if (enc.ok) {
    auto members = cb.bin_members(row, col);
    word = members[enc.idx];
  } else {
    // Distortion-greedy stand-in so the trial still yields a
    // measurable reconstruction; the event is charged regardless.
    if (enc.fail_layer == 1) {
      ++rec.e1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < cb.rows(); ++r) {
        double d = block_distortion(x, cb.xh2_word(r), cfg.dist.d2);
        if (d < best) { best = d; row = r; }
      }
    } else {
      ++rec.e2;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cb.words_per_row(); ++j)
      for (std::size_t k = 0; k < cb.refinements(); ++k) {
        double d = block_distortion(x, cb.xh1_word(row, j, k), cfg.dist.d1);
        if (d < best) { best = d; word = j; ref = k; }
      }
    col = cb.column_of(row, word);
  }

  Block xh1 = cb.xh1_word(row, word, ref);
  Block crib = cfg.variant.perfect ? xh1 : apply_crib_map(cfg.variant.g, xh1);
  Decode2Outcome dec = decode2_noncausal(crib, col, cb, cfg.policy, cfg.eps);
  Block xh2 = dec.xh2.empty() ? cb.xh2_word(0) : dec.xh2;
  if (!dec.ok) (dec.fail_event == 3 ? rec.e3 : rec.e4) += 1;

  rec.d1_per_block = {block_distortion(x, xh1, cfg.dist.d1)};
  rec.d2_per_block = {block_distortion(x, xh2, cfg.dist.d2)};
  rec.d2_decoded_per_block = rec.d2_per_block;
  rec.d1 = rec.d1_per_block[0];
  rec.d2 = rec.d2_per_block[0];
  rec.d2_decoded = rec.d2;
  rec.encode_failure_rate = enc.ok ? 0.0 : 1.0;
  rec.decode_failure_rate = dec.ok ? 0.0 : 1.0;
  rec.total_event_rate = (enc.ok && dec.ok) ? 0.0 : 1.0;
  return rec;
}

// f(u, crib) lifted from the target joint: the causal scheme requires
// Xh2 to be a function of (U, crib), so the argmax row is degenerate.
std::vector<std::vector<int>> causal_map(const SimConfig& cfg) {
  JointPmf ext = extended_target(cfg);
  const char* cv = crib_var(cfg);
  int us = ext.size_of(kVarU), cs = ext.size_of(cv), hs = ext.size_of(kVarXh2);
  std::vector<double> t = ext.conditional_table(kVarXh2, {kVarU, cv});
  std::vector<std::vector<int>> f(static_cast<std::size_t>(us),
                                  std::vector<int>(static_cast<std::size_t>(cs), 0));
  for (int u = 0; u < us; ++u)
    for (int c = 0; c < cs; ++c) {
      const double* r = t.data() + (static_cast<std::size_t>(u) * cs + c) * hs;
      f[u][c] = static_cast<int>(std::max_element(r, r + hs) - r);
    }
  return f;
}

}  // namespace

SimReport run_block_markov(const std::vector<Block>& x_stream,
                           const SimConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  if (cfg.mode == CribbingMode::NonCausal)
    throw UsageError("run_block_markov needs a (strictly) causal mode");
  int B = static_cast<int>(x_stream.size());
  if (B < 2) throw UsageError("forward encoding needs B >= 2");
  Codebook cb(cfg, seed);
  bool causal = cfg.mode == CribbingMode::Causal;
  std::vector<std::vector<int>> f;
  if (causal) f = causal_map(cfg);

  SimReport rec;
  rec.trials = 1;
  rec.d1_per_block.assign(static_cast<std::size_t>(B), 0.0);
  rec.d2_per_block.assign(static_cast<std::size_t>(B), 0.0);
  rec.d2_decoded_per_block.assign(static_cast<std::size_t>(B), 0.0);

  // Causal U selection scores candidates through the MAP reconstruction
  // per U symbol (the crib is not known yet at this point). Under the
  // U = Xh2 substitution the map is the identity, so the causal rule
  // coincides with the strictly-causal one word for word.
  std::vector<int> u_map;
  if (causal) {
    JointPmf ext = extended_target(cfg);
    int us = ext.size_of(kVarU), hs = ext.size_of(kVarXh2);
    std::vector<double> t = ext.conditional_table(kVarXh2, {kVarU});
    u_map.resize(static_cast<std::size_t>(us));
    for (int u = 0; u < us; ++u) {
      const double* r = t.data() + static_cast<std::size_t>(u) * hs;
      u_map[static_cast<std::size_t>(u)] =
          static_cast<int>(std::max_element(r, r + hs) - r);
    }
  }
  auto proxy_d2 = [&](const Block& x, const Block& u) {
    if (!causal) return block_distortion(x, u, cfg.dist.d2);
    Block w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      w[i] = static_cast<std::uint8_t>(u_map[u[i]]);
    return block_distortion(x, w, cfg.dist.d2);
  };

  // Forward pass: m[b] describes block b; block 1 and the virtual
  // block B+1 are pinned to index 0.
  std::vector<std::size_t> m(static_cast<std::size_t>(B) + 1, 0);
  for (int b = 1; b < B; ++b) {
    const Block& x = x_stream[static_cast<std::size_t>(b)];
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = cb.rows();
    for (std::size_t i = 0; i < cb.rows(); ++i) {
      Block u = cb.u_word(b, i);
      if (!is_typical(x, u, cb.pair_x_row(), cfg.eps)) continue;
      double d = proxy_d2(x, u);
      if (d < best) { best = d; pick = i; }
    }
    if (pick == cb.rows()) {
      ++rec.ee1;
      best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cb.rows(); ++i) {
        double d = proxy_d2(x, cb.u_word(b, i));
        if (d < best) { best = d; pick = i; }
      }
    }
    m[static_cast<std::size_t>(b)] = pick;
  }

  // Word selection per block; the row is forced to m[b+1].
  std::vector<Block> xh1(static_cast<std::size_t>(B));
  std::vector<std::size_t> cols(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    const Block& x = x_stream[static_cast<std::size_t>(b)];
    std::size_t slab = m[static_cast<std::size_t>(b)];
    std::size_t row = m[static_cast<std::size_t>(b) + 1];
    Block u = cb.u_word(b, slab);
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = cb.words_per_row();
    if (b > 0) {
      for (std::size_t j = 0; j < cb.words_per_row(); ++j) {
        Block w = cb.bm_word(b, slab, row, j);
        if (!is_typical({&x, &w, &u}, cb.triple(), cfg.eps)) continue;
        double d = block_distortion(x, w, cfg.dist.d1);
        if (d < best) { best = d; pick = j; }
      }
      if (pick == cb.words_per_row()) ++rec.ee2;
    }
    if (pick == cb.words_per_row()) {
      // Block 1's U word is a dummy, so its word is chosen against the
      // marginal only; later blocks land here on a typicality miss.
      best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cb.words_per_row(); ++j) {
        double d = block_distortion(x, cb.bm_word(b, slab, row, j), cfg.dist.d1);
        if (d < best) { best = d; pick = j; }
      }
    }
    xh1[static_cast<std::size_t>(b)] = cb.bm_word(b, slab, row, pick);
    cols[static_cast<std::size_t>(b)] = cb.bm_column_of(b, slab, row, pick);
    rec.d1_per_block[static_cast<std::size_t>(b)] =
        block_distortion(x, xh1[static_cast<std::size_t>(b)], cfg.dist.d1);
  }

  // Committed-description distortion: decoder 2's reconstruction when
  // the index chain holds (block 1 is charged the maximum).
  rec.d2_per_block[0] = cfg.dist.d_max();
  for (int b = 1; b < B; ++b) {
    const Block& x = x_stream[static_cast<std::size_t>(b)];
    Block u = cb.u_word(b, m[static_cast<std::size_t>(b)]);
    Block xh2;
    if (!causal) {
      xh2 = u;
    } else {
      Block crib = cfg.variant.perfect
                       ? xh1[static_cast<std::size_t>(b)]
                       : apply_crib_map(cfg.variant.g, xh1[static_cast<std::size_t>(b)]);
      xh2.resize(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        xh2[i] = static_cast<std::uint8_t>(f[u[i]][crib[i]]);
    }
    rec.d2_per_block[static_cast<std::size_t>(b)] =
        block_distortion(x, xh2, cfg.dist.d2);
  }

  // Decoder 2 chain; a break leaves the wrong slab in place and the
  // damage is measured as-is.
  std::size_t mhat = 0;
  for (int b = 0; b < B; ++b) {
    const Block& x = x_stream[static_cast<std::size_t>(b)];
    Block u = cb.u_word(b, mhat);
    Block crib = cfg.variant.perfect
                     ? xh1[static_cast<std::size_t>(b)]
                     : apply_crib_map(cfg.variant.g, xh1[static_cast<std::size_t>(b)]);
    Block xh2;
    if (!causal) {
      xh2 = u;
    } else {
      xh2.resize(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        xh2[i] = static_cast<std::uint8_t>(f[u[i]][crib[i]]);
    }
    if (b == 0) {
      rec.d2_block1 = cfg.dist.d_max();
      rec.d2_decoded_per_block[0] = cfg.dist.d_max();
    } else {
      rec.d2_decoded_per_block[static_cast<std::size_t>(b)] =
          block_distortion(x, xh2, cfg.dist.d2);
    }
    if (b + 1 >= B) break;
    std::vector<std::size_t> hits;
    for (std::size_t r = 0; r < cb.rows(); ++r) {
      for (std::size_t j :
           cb.bm_bin_members(b, mhat, r, cols[static_cast<std::size_t>(b)])) {
        Block w = cb.bm_word(b, mhat, r, j);
        Block wc = cfg.variant.perfect ? w : apply_crib_map(cfg.variant.g, w);
        if (wc == crib) { hits.push_back(r); break; }
      }
    }
    if (hits.empty()) {
      ++rec.ed1;
      mhat = 0;
    } else {
      if (hits.size() > 1) ++rec.ed2;
      mhat = hits.front();
    }
  }

  double s1 = 0.0, s2 = 0.0, s2d = 0.0;
  for (int b = 0; b < B; ++b) s1 += rec.d1_per_block[static_cast<std::size_t>(b)];
  for (int b = 1; b < B; ++b) {
    s2 += rec.d2_per_block[static_cast<std::size_t>(b)];
    s2d += rec.d2_decoded_per_block[static_cast<std::size_t>(b)];
  }
  rec.d1 = s1 / B;
  rec.d2 = s2 / (B - 1);
  rec.d2_decoded = s2d / (B - 1);
  rec.encode_failure_rate =
      static_cast<double>(rec.ee1 + rec.ee2) / (2.0 * (B - 1));
  rec.decode_failure_rate = static_cast<double>(rec.ed1 + rec.ed2) / (B - 1);
  rec.total_event_rate =
      (rec.ee1 + rec.ee2 + rec.ed1 + rec.ed2) > 0 ? 1.0 : 0.0;
  return rec;
}

SimReport simulate(const SimConfig& cfg, long trials) {
  validate(cfg);
  if (trials < 1) throw UsageError("trials must be >= 1");
  std::vector<SimReport> recs(static_cast<std::size_t>(trials));
  std::vector<double> px = cfg.target.marginalize({kVarX}).probs();

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (long t = 0; t < trials; ++t) {
    std::uint64_t tseed =
        Stream(cfg.seed, kTagTrial, static_cast<std::uint64_t>(t), 0, 0, 0).next();
    if (cfg.mode == CribbingMode::NonCausal) {
      recs[static_cast<std::size_t>(t)] = noncausal_trial(cfg, tseed);
    } else {
      std::vector<Block> xs(static_cast<std::size_t>(cfg.blocks));
      for (int b = 0; b < cfg.blocks; ++b)
        xs[static_cast<std::size_t>(b)] = draw_iid(
            px, cfg.n,
            Stream(tseed, kTagSource, static_cast<std::uint64_t>(b), 0, 0, 0));
      recs[static_cast<std::size_t>(t)] = run_block_markov(xs, cfg, tseed);
    }
  }

  SimReport out;
  out.trials = trials;
  out.seed = cfg.seed;
  out.d1_per_block.assign(recs[0].d1_per_block.size(), 0.0);
  out.d2_per_block.assign(recs[0].d2_per_block.size(), 0.0);
  out.d2_decoded_per_block.assign(recs[0].d2_decoded_per_block.size(), 0.0);
  for (const SimReport& r : recs) {
    for (std::size_t b = 0; b < out.d1_per_block.size(); ++b) {
      out.d1_per_block[b] += r.d1_per_block[b] / trials;
      out.d2_per_block[b] += r.d2_per_block[b] / trials;
      out.d2_decoded_per_block[b] += r.d2_decoded_per_block[b] / trials;
    }
    out.d1 += r.d1 / trials;
    out.d2 += r.d2 / trials;
    out.d2_decoded += r.d2_decoded / trials;
    out.d2_block1 += r.d2_block1 / trials;
    out.e1 += r.e1; out.e2 += r.e2; out.e3 += r.e3; out.e4 += r.e4;
    out.ee1 += r.ee1; out.ee2 += r.ee2; out.ed1 += r.ed1; out.ed2 += r.ed2;
    out.encode_failure_rate += r.encode_failure_rate / trials;
    out.decode_failure_rate += r.decode_failure_rate / trials;
    out.total_event_rate += r.total_event_rate / trials;
  }
  out.sizing = Codebook(cfg, 0).sizing();
  return out;
}

}  // namespace srcrib
