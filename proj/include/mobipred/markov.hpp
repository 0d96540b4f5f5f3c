#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mobipred/types.hpp"

namespace mobipred {

// Order-k Markov next-symbol predictor with recursive fallback: the highest
// order whose context tuple has been seen wins, down to the order-0 symbol
// frequency table. Counts are raw reappearance frequencies.
class MarkovModel {
 public:
  explicit MarkovModel(int k);

  int order() const { return k_; }

  // Increments (suffix of length j -> next) for every order j in
  // [0, min(k, |context|)].
  void update(std::span<const Symbol> context, Symbol next);

  // Argmax over the deepest populated table; ties go to the smaller symbol
  // id. nullopt while the model has seen no update (cold model).
  std::optional<Symbol> predict(std::span<const Symbol> context) const;

  // Total count mass in the order-j table.
  std::uint64_t order_total(int j) const;
  std::uint64_t updates() const { return updates_; }

  // Debug dump: order<TAB>ctx(comma ids)<TAB>next<TAB>count, sorted.
  void dump(std::ostream& os) const;

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<Symbol>& v) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (Symbol s : v) {
        h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(s));
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  using Counts = std::unordered_map<Symbol, std::uint64_t>;
  using Table = std::unordered_map<std::vector<Symbol>, Counts, VecHash>;

  int k_;
  std::vector<Table> tables_;  // tables_[j] keyed by j-tuples
  std::uint64_t updates_ = 0;
};

}  // namespace mobipred
