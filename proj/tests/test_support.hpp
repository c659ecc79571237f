#pragma once

// Generators shared by the unit and acceptance suites.

#include <random>
#include <vector>

#include "dtoprank/censored_rank_test.hpp"

namespace dtoprank::testing {

// i.i.d. Poisson(mean) values; each bin is censored with probability
// censor_prob to (0, value + Poisson(2)).
template <typename Rng>
CensoredSeries random_censored_series(Rng& rng, int bins, double mean, double censor_prob) {
  std::poisson_distribution<Count> value(mean);
  std::poisson_distribution<Count> slack(2.0);
  std::bernoulli_distribution censored(censor_prob);
  CensoredSeries s;
  s.lower.resize(static_cast<std::size_t>(bins));
  s.upper.resize(static_cast<std::size_t>(bins));
  for (std::size_t t = 0; t < s.lower.size(); ++t) {
    const Count v = value(rng);
    if (censored(rng)) {
      s.lower[t] = 0;
      s.upper[t] = v + slack(rng);
    } else {
      s.lower[t] = s.upper[t] = v;
    }
  }
  return s;
}

}  // namespace dtoprank::testing
