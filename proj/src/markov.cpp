#include "mobipred/markov.hpp"

#include <algorithm>
#include <ostream>

#include "mobipred/errors.hpp"

namespace mobipred {

MarkovModel::MarkovModel(int k) : k_(k) {
  if (k < 0) throw ConfigInvalid("markov order must be >= 0");
  tables_.resize(static_cast<std::size_t>(k) + 1);
}

void MarkovModel::update(std::span<const Symbol> context, Symbol next) {
  int max_j = std::min<int>(k_, static_cast<int>(context.size()));
  for (int j = 0; j <= max_j; ++j) {
    std::vector<Symbol> key(context.end() - j, context.end());
    tables_[static_cast<std::size_t>(j)][std::move(key)][next] += 1;
  }
  ++updates_;
}

std::optional<Symbol> MarkovModel::predict(std::span<const Symbol> context) const {
  int max_j = std::min<int>(k_, static_cast<int>(context.size()));
  for (int j = max_j; j >= 0; --j) {
    const Table& table = tables_[static_cast<std::size_t>(j)];
    std::vector<Symbol> key(context.end() - j, context.end());
    auto it = table.find(key);
    if (it == table.end()) continue;
    Symbol best = -1;
    std::uint64_t best_count = 0;
    for (const auto& [sym, count] : it->second) {
      if (count > best_count || (count == best_count && (best < 0 || sym < best))) {
        best = sym;
        best_count = count;
      }
    }
    if (best >= 0) return best;
  }
  return std::nullopt;  // cold model
}

std::uint64_t MarkovModel::order_total(int j) const {
  std::uint64_t total = 0;
  for (const auto& [ctx, counts] : tables_.at(static_cast<std::size_t>(j)))
    for (const auto& [sym, count] : counts) total += count;
  return total;
}

void MarkovModel::dump(std::ostream& os) const {
  struct Row {
    int order;
    std::vector<Symbol> ctx;
    Symbol next;
    std::uint64_t count;
  };
  std::vector<Row> rows;
  for (int j = 0; j <= k_; ++j)
    for (const auto& [ctx, counts] : tables_[static_cast<std::size_t>(j)])
      for (const auto& [sym, count] : counts) rows.push_back({j, ctx, sym, count});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.order != b.order) return a.order < b.order;
    if (a.ctx != b.ctx) return a.ctx < b.ctx;
    return a.next < b.next;
  });
  for (const auto& r : rows) {
    os << r.order << '\t';
    for (std::size_t i = 0; i < r.ctx.size(); ++i) {
      if (i) os << ',';
      os << r.ctx[i];
    }
    os << '\t' << r.next << '\t' << r.count << '\n';
  }
}

}  // namespace mobipred
