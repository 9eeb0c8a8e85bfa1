#pragma once

#include "ltnlda/rng.hpp"

namespace ltnlda {

// Mean of PG(b, c): b/(2c) * tanh(c/2), with the c -> 0 limit b/4.
double pg_mean(double b, double c);

// Variance of PG(b, c): b/(4c^3) * sech^2(c/2) * (sinh(c) - c), limit b/24.
double pg_var(double b, double c);

// Polya-Gamma sampler. Integer count parameter b: below the threshold the
// draw is an exact sum of b PG(1, c) variates (alternating-series rejection);
// at or above it a single normal draw with the matching first two moments,
// truncated to the positive half-line.
class PolyaGammaSampler {
 public:
  explicit PolyaGammaSampler(int approx_threshold = 30) : threshold_(approx_threshold) {}

  int approx_threshold() const { return threshold_; }

  double sample(long long b, double c, Rng& rng) const;

  // Exact PG(1, c) draw.
  static double sample_pg1(double c, Rng& rng);

 private:
  int threshold_;
};

}  // namespace ltnlda
