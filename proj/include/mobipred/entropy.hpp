#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mobipred/types.hpp"

namespace mobipred {

struct EntropyReport {
  std::string device;
  DeviceClass cls = DeviceClass::Other;
  std::int64_t n = 0;            // series length fed to the estimators
  std::int64_t n_locations = 0;  // distinct symbols (Unknown excluded by default)
  double s_unc = 0, s_lz = 0, s_bwt = 0;      // bits/symbol
  double pi_unc = 0, pi_lz = 0, pi_bwt = 0;   // maximum predictability
};

// Zeroth-order Shannon entropy of the empirical symbol frequencies, bits.
double entropy_unconditional(std::span<const Symbol> seq);

// Lambda_i for every position (1-based in the usual statement): one plus the
// length of the longest prefix of seq[i..] that occurs as a contiguous
// substring of seq[..i-1]. Capped by the remaining suffix, so Lambda_i <=
// n-i+2. Amortized-linear via an online suffix automaton.
std::vector<std::int64_t> lz_match_lengths(std::span<const Symbol> seq);

// Match-length entropy-rate estimate: n*log2(n) / sum(Lambda_i).
double entropy_lz(std::span<const Symbol> seq);

inline constexpr Symbol kBwtSentinel = -1;  // sorts below every real symbol

struct BwtOutput {
  std::vector<Symbol> transformed;  // last column, sentinel included
  std::size_t primary_index = 0;    // row of the original rotation
};

// Last column of the lexicographically sorted rotations of seq+sentinel.
// Built from a suffix array, not by materializing rotations.
BwtOutput bwt_forward(std::span<const Symbol> seq);
std::vector<Symbol> bwt_inverse(const BwtOutput& bwt);

// Block-entropy estimate: BWT, drop the sentinel, cut into ceil(sqrt(n))
// contiguous segments, return the length-weighted mean of the per-segment
// zeroth-order entropies. segments == 0 picks ceil(sqrt(n)).
double entropy_bwt(std::span<const Symbol> seq, std::int64_t segments = 0);

// Solves S = H_b(pi) + (1-pi)*log2(N-1) for pi. Clamps: N == 1 or S <= 0
// give 1; S >= log2(N) gives 1/N. Bisection to residual < 1e-9.
double max_predictability(double s_bits, std::int64_t n_locations);
double fano_residual(double pi, double s_bits, std::int64_t n_locations);

std::vector<Symbol> strip_unknown(std::span<const Symbol> seq);

// Per-device report over a discrete series. Unknown symbols are dropped and
// excluded from N unless keep_unknown is set.
EntropyReport entropy_report(const DiscreteSeries& series, bool keep_unknown = false,
                             std::int64_t bwt_segments = 0);

void write_entropy_csv(std::ostream& os, const std::vector<EntropyReport>& reports);

namespace ref {
// Quadratic brute-force match lengths, the test oracle for lz_match_lengths.
std::vector<std::int64_t> lz_match_lengths(std::span<const Symbol> seq);
// Rotation-sort BWT, the test oracle for bwt_forward.
BwtOutput bwt_forward(std::span<const Symbol> seq);
}  // namespace ref

}  // namespace mobipred
