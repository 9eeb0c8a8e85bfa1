#include "ltnlda/polya_gamma.hpp"

#include <cmath>

namespace ltnlda {

namespace {

// Truncation point splitting the J*(1,z) proposal into an inverse-Gaussian
// body and an exponential tail.
constexpr double kTrunc = 0.64;
constexpr double kPiSq = M_PI * M_PI;

// Coefficients of the alternating series for the J*(1,z) density.
double series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x > kTrunc) return M_PI * h * std::exp(-h * h * kPiSq * x * 0.5);
  return M_PI * h * std::pow(2.0 / (M_PI * x), 1.5) * std::exp(-2.0 * h * h / x);
}

// CDF at kTrunc of the inverse Gaussian with mean 1/z and shape 1; the z = 0
// limit is the one-sided stable case.
double inv_gauss_cdf_at_trunc(double z) {
  const double rt = 1.0 / std::sqrt(kTrunc);
  if (z <= 0.0) return 2.0 * normal_cdf(-rt);
  const double term1 = normal_cdf(rt * (kTrunc * z - 1.0));
  const double phi2 = normal_cdf(-rt * (kTrunc * z + 1.0));
  // exp(2z) only matters while phi2 is nonzero, which bounds it well below
  // overflow.
  const double term2 = phi2 > 0.0 ? std::exp(2.0 * z) * phi2 : 0.0;
  return term1 + term2;
}

// Inverse Gaussian with mean 1/z and shape 1, conditioned on (0, kTrunc].
double sample_trunc_inv_gauss(double z, Rng& rng) {
  const double t = kTrunc;
  if (z <= 0.0 || 1.0 / z > t) {
    while (true) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (z <= 0.0 || rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  const double mu = 1.0 / z;
  while (true) {
    double y = rng.normal();
    y = y * y;
    const double muy = mu * y;
    double x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

struct Pg1Context {
  double z;       // |c| / 2
  double rate;    // pi^2/8 + z^2/2, tail exponential rate
  double p_tail;  // proposal mass right of kTrunc
  double p_body;  // proposal mass in (0, kTrunc]

  explicit Pg1Context(double c) {
    z = std::fabs(c) * 0.5;
    rate = kPiSq * 0.125 + 0.5 * z * z;
    p_tail = M_PI / (2.0 * rate) * std::exp(-rate * kTrunc);
    p_body = 2.0 * std::exp(-z) * inv_gauss_cdf_at_trunc(z);
  }

  double draw(Rng& rng) const {
    while (true) {
      double x;
      const double total = p_tail + p_body;
      if (total > 0.0 && rng.uniform() * total < p_tail) {
        x = kTrunc + rng.exponential() / rate;
      } else {
        x = sample_trunc_inv_gauss(z, rng);
      }
      // Alternating-series squeeze on the target density.
      double partial = series_coef(0, x);
      const double u = rng.uniform() * partial;
      int n = 0;
      while (true) {
        ++n;
        if (n & 1) {
          partial -= series_coef(n, x);
          if (u <= partial) return 0.25 * x;  // PG(1,c) = J*(1, c/2) / 4
        } else {
          partial += series_coef(n, x);
          if (u > partial) break;
        }
      }
    }
  }
};

}  // namespace

double pg_mean(double b, double c) {
  const double a = std::fabs(c);
  if (a < 1e-12) return 0.25 * b;
  return b / (2.0 * a) * std::tanh(0.5 * a);
}

double pg_var(double b, double c) {
  const double a = std::fabs(c);
  if (a < 0.05) {
    const double a2 = a * a;
    return b / 24.0 * (1.0 - a2 / 5.0 + 17.0 * a2 * a2 / 560.0);
  }
  if (a > 500.0) return b / (2.0 * a * a * a);
  return b * (std::sinh(a) - a) / (2.0 * a * a * a * (1.0 + std::cosh(a)));
}

double PolyaGammaSampler::sample_pg1(double c, Rng& rng) {
  return Pg1Context(c).draw(rng);
}

double PolyaGammaSampler::sample(long long b, double c, Rng& rng) const {
  if (b <= 0) return 0.0;
  if (b < threshold_) {
    const Pg1Context ctx(c);
    double total = 0.0;
    for (long long i = 0; i < b; ++i) total += ctx.draw(rng);
    return total;
  }
  const double m = pg_mean(static_cast<double>(b), c);
  const double s = std::sqrt(pg_var(static_cast<double>(b), c));
  for (int tries = 0; tries < 100; ++tries) {
    const double x = m + s * rng.normal();
    if (x >= 0.0) return x;
  }
  return 0.0;  // unreachable for any b >= 2; the mean sits several sd above 0
}

}  // namespace ltnlda
