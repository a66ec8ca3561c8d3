#pragma once
// Shared helpers for the unit suites: seeded random generators for micro
// functions and fields. Seeds are fixed per test so failures reproduce.

#include <random>
#include <vector>

#include "nfh/micro.hpp"

namespace nfh::testutil {

inline MicroFunction random_trig(std::mt19937_64& rng, int dim = 1, int max_terms = 4,
                                 bool integer_freqs = true) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<long long> fnum(-3, 3);
  std::uniform_int_distribution<long long> fden(1, integer_freqs ? 1 : 4);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phs(0.0, kTwoPi);
  TrigPoly t;
  t.dim = dim;
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    TrigTerm term;
    for (int a = 0; a < dim; ++a) term.freq.emplace_back(fnum(rng), fden(rng));
    term.amplitude = amp(rng);
    term.phase = phs(rng);
    t.terms.push_back(term);
  }
  return MicroFunction{dim, t};
}

inline MicroFunction random_cell(std::mt19937_64& rng, int dim = 1, int resolution = 16) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::size_t count = 1;
  for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(resolution);
  std::vector<double> v(count);
  for (auto& x : v) x = val(rng);
  return micro_cell(dim, resolution, std::move(v));
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> val(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = val(rng);
  return v;
}

}  // namespace nfh::testutil
