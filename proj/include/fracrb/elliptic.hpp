#pragma once

#include <vector>

namespace fracrb::elliptic {

/**
 * Elliptic modulus k together with its complement k' = sqrt(1 - k^2).
 *
 * Every function in this header takes the *modulus* k, never the parameter
 * m = k^2 used by some libraries (scipy, Boost's ellint_1 takes k, scipy's
 * ellipk takes m).  Passing m where k is expected silently produces wrong
 * Zolotarev points, so construct moduli through the named factories.
 *
 * Both values are stored.  When k is very close to 1 the complement cannot
 * be recovered from k in floating point, so callers that know k' exactly
 * (for instance k' = delta for the Zolotarev modulus delta' = sqrt(1 - delta^2))
 * should use from_complement().
 */
struct EllipticModulus {
  double k = 0.0;
  double k_prime = 1.0;

  /// Requires 0 <= k < 1.
  static EllipticModulus from_modulus(double k);
  /// Requires 0 < k_prime <= 1; k is derived as sqrt((1 - k')(1 + k')).
  static EllipticModulus from_complement(double k_prime);
};

/// Arithmetic-geometric mean of two positive numbers.
double agm(double a, double b);

/// Complete elliptic integral of the first kind K(k) = pi / (2 AGM(1, k')).
double elliptic_K(const EllipticModulus& modulus);
double elliptic_K(double k);

/**
 * Jacobi delta amplitude dn(u, k).
 *
 * Uses the descending Landen (AGM phase) recursion.  The argument is first
 * reduced with the period 2K and the reflection dn(K - u) = k' / dn(u), so
 * that values near the minimum k' keep full relative accuracy.
 */
double jacobi_dn(double u, const EllipticModulus& modulus);
double jacobi_dn(double u, double k);

struct ZolotarevSet {
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  std::vector<double> points;  // strictly increasing
};

/// Zolotarev points Z_1 < ... < Z_r on [delta, 1], 0 < delta < 1, r >= 1.
ZolotarevSet zolotarev_points(double delta, int r);

/// Zolotarev points on [a, b]: b * Z_j with Z_j the points on [a/b, 1].
ZolotarevSet transformed_zolotarev(double a, double b, int r);

/// Intermediate quantities of the decay-rate constant for a condition number kappa.
struct DecayRate {
  double kappa = 0.0;
  double delta = 0.0;  // 1 / kappa
  double mu = 0.0;     // ((1 - sqrt(delta)) / (1 + sqrt(delta)))^2
  double mu1 = 0.0;    // sqrt(1 - mu^2)
  double c_star = 0.0; // pi K(mu1) / (4 K(mu))
};

DecayRate decay_rate(double kappa);

/// Exponential rate constant C*(kappa) of the Zolotarev reduced basis; kappa > 1.
double decay_rate_C_star(double kappa);

}  // namespace fracrb::elliptic
