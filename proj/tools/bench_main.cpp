// Micro-benchmarks for the hot kernels, each against the simple reference
// implementation that the tests use as oracle:
//   - match-length scan: suffix automaton vs quadratic substring search
//   - block-sort transform: suffix-array construction vs naive rotation sort
//   - population map: parallel_for vs the same loop serially
#include <CLI11.hpp>

#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "mobipred/entropy.hpp"
#include "mobipred/parallel.hpp"
#include "mobipred/rng.hpp"
#include "mobipred/types.hpp"

using namespace mobipred;

namespace {

std::vector<Symbol> markov_sequence(std::size_t n, int alphabet, double stay,
                                    std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Symbol> seq;
  seq.reserve(n);
  Symbol cur = static_cast<Symbol>(rng.next_below(alphabet));
  for (std::size_t i = 0; i < n; ++i) {
    seq.push_back(cur);
    if (rng.next_double() >= stay) {
      Symbol next = static_cast<Symbol>(rng.next_below(alphabet - 1));
      cur = next >= cur ? next + 1 : next;
    }
  }
  return seq;
}

template <typename F>
double time_once(F&& fn) {
  double t0 = wall_seconds();
  fn();
  return wall_seconds() - t0;
}

void print_row(const char* kernel, std::size_t n, double ref_s, double fast_s,
               bool match) {
  if (ref_s > 0.0)
    std::printf("%-22s n=%8zu  ref %9.4fs  fast %9.4fs  speedup %7.1fx  %s\n", kernel, n,
                ref_s, fast_s, ref_s / fast_s, match ? "ok" : "MISMATCH");
  else
    std::printf("%-22s n=%8zu  ref      (skipped)  fast %9.4fs\n", kernel, n, fast_s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmarks: optimized vs reference implementations"};
  std::size_t max_n = 200000;
  std::size_t max_ref_n = 20000;
  int jobs = 0;
  app.add_option("--max-n", max_n, "largest sequence for the fast kernels");
  app.add_option("--max-ref-n", max_ref_n,
                 "largest sequence the quadratic references run on");
  app.add_option("--jobs", jobs, "threads for the parallel map (0 = hardware)");
  CLI11_PARSE(app, argc, argv);
  if (jobs <= 0) jobs = hardware_threads();

  std::printf("openmp: %s, threads: %d\n\n", openmp_enabled() ? "enabled" : "disabled",
              jobs);

  std::vector<std::size_t> sizes{2000, 20000, 200000};
  for (std::size_t& s : sizes)
    if (s > max_n) s = max_n;
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  for (std::size_t n : sizes) {
    auto seq = markov_sequence(n, 16, 0.7, 42);
    std::vector<std::int64_t> fast_l, ref_l;
    double fast_s = time_once([&] { fast_l = lz_match_lengths(seq); });
    double ref_s = 0.0;
    bool match = true;
    if (n <= max_ref_n) {
      ref_s = time_once([&] { ref_l = ref::lz_match_lengths(seq); });
      match = fast_l == ref_l;
    }
    print_row("match-lengths", n, ref_s, fast_s, match);
  }
  std::printf("\n");

  for (std::size_t n : sizes) {
    auto seq = markov_sequence(n, 16, 0.7, 43);
    BwtOutput fast_out, ref_out;
    double fast_s = time_once([&] { fast_out = bwt_forward(seq); });
    double ref_s = 0.0;
    bool match = true;
    if (n <= max_ref_n) {
      ref_s = time_once([&] { ref_out = ref::bwt_forward(seq); });
      match = fast_out.transformed == ref_out.transformed &&
              fast_out.primary_index == ref_out.primary_index;
    }
    print_row("block-sort", n, ref_s, fast_s, match);
  }
  std::printf("\n");

  // Population-style map: entropy estimates over many medium sequences.
  const std::size_t n_devices = 64;
  std::vector<std::vector<Symbol>> population;
  for (std::size_t d = 0; d < n_devices; ++d)
    population.push_back(markov_sequence(4000, 12, 0.8, 100 + d));
  std::vector<double> serial_out(n_devices), parallel_out(n_devices);
  double serial_s = time_once([&] {
    for (std::size_t d = 0; d < n_devices; ++d)
      serial_out[d] = entropy_lz(population[d]);
  });
  double parallel_s = time_once([&] {
    parallel_for(n_devices, jobs,
                 [&](std::size_t d) { parallel_out[d] = entropy_lz(population[d]); });
  });
  print_row("population map", n_devices, serial_s, parallel_s,
            serial_out == parallel_out);
  return 0;
}
