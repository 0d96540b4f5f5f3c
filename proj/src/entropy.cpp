#include "mobipred/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_map>

#include "mobipred/errors.hpp"

namespace mobipred {

double entropy_unconditional(std::span<const Symbol> seq) {
  if (seq.empty()) throw EmptyAfterFilter("empty sequence");
  std::unordered_map<Symbol, std::int64_t> counts;
  for (Symbol s : seq) counts[s] += 1;
  double n = static_cast<double>(seq.size());
  double h = 0.0;
  for (const auto& [sym, c] : counts) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

// Online suffix automaton over int symbols.
struct SuffixAutomaton {
  struct State {
    std::map<Symbol, int> next;
    int link = -1;
    std::int64_t len = 0;
  };
  std::vector<State> st;
  int last = 0;

  explicit SuffixAutomaton(std::size_t reserve_hint) {
    st.reserve(2 * reserve_hint + 4);
    st.emplace_back();  // root
  }

  void extend(Symbol c) {
    int cur = static_cast<int>(st.size());
    st.emplace_back();
    st[cur].len = st[last].len + 1;
    int p = last;
    while (p != -1 && !st[p].next.count(c)) {
      st[p].next[c] = cur;
      p = st[p].link;
    }
    if (p == -1) {
      st[cur].link = 0;
    } else {
      int q = st[p].next[c];
      if (st[p].len + 1 == st[q].len) {
        st[cur].link = q;
      } else {
        int clone = static_cast<int>(st.size());
        st.push_back(st[q]);
        st[clone].len = st[p].len + 1;
        while (p != -1 && st[p].next[c] == q) {
          st[p].next[c] = clone;
          p = st[p].link;
        }
        st[q].link = clone;
        st[cur].link = clone;
      }
    }
    last = cur;
  }
};

}  // namespace

std::vector<std::int64_t> lz_match_lengths(std::span<const Symbol> seq) {
  const std::size_t n = seq.size();
  std::vector<std::int64_t> lambdas(n);
  SuffixAutomaton sam(n);
  int v = 0;
  std::int64_t len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // Extend the carried match of seq[i..i+len-1] as far as the automaton
    // of seq[..i-1] allows.
    while (i + static_cast<std::size_t>(len) < n) {
      auto it = sam.st[v].next.find(seq[i + static_cast<std::size_t>(len)]);
      if (it == sam.st[v].next.end()) break;
      v = it->second;
      ++len;
    }
    lambdas[i] = len + 1;
    sam.extend(seq[i]);
    // A clone may have re-split v's class; renormalize so len stays inside
    // (len(link(v)), len(v)].
    while (v != 0 && sam.st[sam.st[v].link].len >= len) v = sam.st[v].link;
    if (len > 0) {
      --len;  // drop the first character of the match for position i+1
      while (v != 0 && sam.st[sam.st[v].link].len >= len) v = sam.st[v].link;
    }
  }
  return lambdas;
}

double entropy_lz(std::span<const Symbol> seq) {
  const std::size_t n = seq.size();
  if (n < 2) throw SeriesTooShort("entropy_lz needs n >= 2");
  auto lambdas = lz_match_lengths(seq);
  std::int64_t sum = 0;
  for (std::int64_t l : lambdas) sum += l;
  return static_cast<double>(n) * std::log2(static_cast<double>(n)) /
         static_cast<double>(sum);
}

BwtOutput bwt_forward(std::span<const Symbol> seq) {
  if (seq.empty()) throw SeriesTooShort("bwt_forward needs a nonempty sequence");
  const std::size_t n = seq.size() + 1;  // with sentinel
  auto at = [&](std::size_t i) -> Symbol {
    return i < seq.size() ? seq[i] : kBwtSentinel;
  };
  // Prefix-doubling suffix array of seq+sentinel. The sentinel is unique and
  // smallest, so suffix order equals rotation order.
  std::vector<std::int32_t> rank(n), tmp(n);
  std::vector<std::int32_t> sa(n);
  {
    // initial ranks from single symbols
    std::vector<std::pair<Symbol, std::int32_t>> init(n);
    for (std::size_t i = 0; i < n; ++i) init[i] = {at(i), static_cast<std::int32_t>(i)};
    std::sort(init.begin(), init.end());
    std::int32_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && init[i].first != init[i - 1].first) ++r;
      rank[static_cast<std::size_t>(init[i].second)] = r;
    }
  }
  for (std::size_t k = 1;; k *= 2) {
    auto key = [&](std::int32_t i) {
      std::int32_t second =
          static_cast<std::size_t>(i) + k < n ? rank[static_cast<std::size_t>(i) + k] : -1;
      return std::pair<std::int32_t, std::int32_t>(rank[static_cast<std::size_t>(i)], second);
    };
    for (std::size_t i = 0; i < n; ++i) sa[i] = static_cast<std::int32_t>(i);
    std::sort(sa.begin(), sa.end(),
              [&](std::int32_t a, std::int32_t b) { return key(a) < key(b); });
    tmp[static_cast<std::size_t>(sa[0])] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      tmp[static_cast<std::size_t>(sa[i])] =
          tmp[static_cast<std::size_t>(sa[i - 1])] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    }
    rank = tmp;
    if (rank[static_cast<std::size_t>(sa[n - 1])] == static_cast<std::int32_t>(n) - 1) break;
  }
  BwtOutput out;
  out.transformed.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t start = static_cast<std::size_t>(sa[r]);
    out.transformed[r] = at((start + n - 1) % n);
    if (start == 0) out.primary_index = r;
  }
  return out;
}

std::vector<Symbol> bwt_inverse(const BwtOutput& bwt) {
  const std::size_t n = bwt.transformed.size();
  if (n == 0) return {};
  // LF mapping: position p in the last column maps to the row of the
  // rotation obtained by prepending transformed[p].
  std::map<Symbol, std::size_t> counts;
  for (Symbol s : bwt.transformed) counts[s] += 1;
  std::map<Symbol, std::size_t> first_row;
  std::size_t acc = 0;
  for (const auto& [sym, c] : counts) {
    first_row[sym] = acc;
    acc += c;
  }
  std::vector<std::size_t> lf(n);
  std::map<Symbol, std::size_t> seen;
  for (std::size_t p = 0; p < n; ++p) {
    Symbol s = bwt.transformed[p];
    lf[p] = first_row[s] + seen[s];
    seen[s] += 1;
  }
  // Walking LF from the primary row yields the sequence right to left.
  std::vector<Symbol> out(n);
  std::size_t row = bwt.primary_index;
  for (std::size_t i = 0; i < n; ++i) {
    out[n - 1 - i] = bwt.transformed[row];
    row = lf[row];
  }
  // out now ends with the sentinel
  if (out.back() != kBwtSentinel) throw DataError("bwt_inverse: sentinel misplaced");
  out.pop_back();
  return out;
}

double entropy_bwt(std::span<const Symbol> seq, std::int64_t segments) {
  const std::size_t n = seq.size();
  if (n < 4) throw SeriesTooShort("entropy_bwt needs n >= 4");
  BwtOutput bwt = bwt_forward(seq);
  std::vector<Symbol> t;
  t.reserve(n);
  for (Symbol s : bwt.transformed)
    if (s != kBwtSentinel) t.push_back(s);

  std::int64_t b = segments > 0
                       ? segments
                       : static_cast<std::int64_t>(
                             std::ceil(std::sqrt(static_cast<double>(n))));
  b = std::max<std::int64_t>(1, std::min<std::int64_t>(b, static_cast<std::int64_t>(n)));
  std::size_t seg = (n + static_cast<std::size_t>(b) - 1) / static_cast<std::size_t>(b);
  double weighted = 0.0;
  for (std::size_t off = 0; off < n; off += seg) {
    std::size_t len = std::min(seg, n - off);
    std::span<const Symbol> chunk(t.data() + off, len);
    weighted += entropy_unconditional(chunk) * static_cast<double>(len);
  }
  return weighted / static_cast<double>(n);
}

namespace {

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

}  // namespace

double fano_residual(double pi, double s_bits, std::int64_t n_locations) {
  double extra = n_locations > 1
                     ? (1.0 - pi) * std::log2(static_cast<double>(n_locations - 1))
                     : 0.0;
  return binary_entropy(pi) + extra - s_bits;
}

double max_predictability(double s_bits, std::int64_t n_locations) {
  if (n_locations < 1) throw DataError("max_predictability needs N >= 1");
  if (n_locations == 1) return 1.0;
  if (s_bits <= 0.0) return 1.0;
  double log_n = std::log2(static_cast<double>(n_locations));
  if (s_bits >= log_n) return 1.0 / static_cast<double>(n_locations);
  double lo = 1.0 / static_cast<double>(n_locations);  // F(lo) = log2 N > S
  double hi = 1.0;                                     // F(hi) = 0 < S
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    double r = fano_residual(mid, s_bits, n_locations);
    if (std::abs(r) < 1e-12) break;
    if (r > 0.0)
      lo = mid;  // entropy still above target: move toward 1
    else
      hi = mid;
    if (hi - lo < 1e-16) break;
  }
  return mid;
}

std::vector<Symbol> strip_unknown(std::span<const Symbol> seq) {
  std::vector<Symbol> out;
  out.reserve(seq.size());
  for (Symbol s : seq)
    if (s != kUnknown) out.push_back(s);
  return out;
}

EntropyReport entropy_report(const DiscreteSeries& series, bool keep_unknown,
                             std::int64_t bwt_segments) {
  EntropyReport rep;
  rep.device = series.device;
  rep.cls = series.cls;
  std::vector<Symbol> seq =
      keep_unknown ? std::vector<Symbol>(series.symbols.begin(), series.symbols.end())
                   : strip_unknown(series.symbols);
  if (seq.empty()) throw EmptyAfterFilter("series is all Unknown: " + series.device);
  rep.n = static_cast<std::int64_t>(seq.size());
  {
    std::vector<Symbol> sorted(seq);
    std::sort(sorted.begin(), sorted.end());
    rep.n_locations =
        std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  }
  rep.s_unc = entropy_unconditional(seq);
  rep.s_lz = entropy_lz(seq);
  rep.s_bwt = entropy_bwt(seq, bwt_segments);
  rep.pi_unc = max_predictability(rep.s_unc, rep.n_locations);
  rep.pi_lz = max_predictability(rep.s_lz, rep.n_locations);
  rep.pi_bwt = max_predictability(rep.s_bwt, rep.n_locations);
  return rep;
}

void write_entropy_csv(std::ostream& os, const std::vector<EntropyReport>& reports) {
  os << "device,class,n,N,s_unc,s_lz,s_bwt,pi_unc,pi_lz,pi_bwt\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.s_unc, r.s_lz,
                  r.s_bwt, r.pi_unc, r.pi_lz, r.pi_bwt);
    os << r.device << ',' << to_string(r.cls) << ',' << r.n << ',' << r.n_locations
       << ',' << buf << '\n';
  }
}

namespace ref {

std::vector<std::int64_t> lz_match_lengths(std::span<const Symbol> seq) {
  const std::size_t n = seq.size();
  std::vector<std::int64_t> lambdas(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pfx_begin = seq.begin();
    const auto pfx_end = seq.begin() + static_cast<std::ptrdiff_t>(i);
    std::size_t len = 0;
    while (i + len < n) {
      auto pat_begin = seq.begin() + static_cast<std::ptrdiff_t>(i);
      auto pat_end = seq.begin() + static_cast<std::ptrdiff_t>(i + len + 1);
      if (std::search(pfx_begin, pfx_end, pat_begin, pat_end) == pfx_end) break;
      ++len;
    }
    lambdas[i] = static_cast<std::int64_t>(len) + 1;
  }
  return lambdas;
}

BwtOutput bwt_forward(std::span<const Symbol> seq) {
  std::vector<Symbol> s(seq.begin(), seq.end());
  s.push_back(kBwtSentinel);
  const std::size_t n = s.size();
  std::vector<std::size_t> rot(n);
  for (std::size_t i = 0; i < n; ++i) rot[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < n; ++i) {
      Symbol x = s[(a + i) % n];
      Symbol y = s[(b + i) % n];
      if (x != y) return x < y;
    }
    return false;
  };
  std::sort(rot.begin(), rot.end(), less);
  BwtOutput out;
  out.transformed.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.transformed[r] = s[(rot[r] + n - 1) % n];
    if (rot[r] == 0) out.primary_index = r;
  }
  return out;
}

}  // namespace ref

}  // namespace mobipred
