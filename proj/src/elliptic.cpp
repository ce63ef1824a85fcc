#include "fracrb/elliptic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracrb/errors.hpp"

namespace fracrb::elliptic {

namespace {

constexpr double kAgmTol = 1e-15;
constexpr int kMaxAgmSteps = 64;

// Descending Landen recursion for dn on u already reduced to [0, K/2].
double dn_landen(double u, const EllipticModulus& m) {
  if (m.k == 0.0) return 1.0;
  double a[kMaxAgmSteps + 1];
  double c[kMaxAgmSteps + 1];
  a[0] = 1.0;
  c[0] = m.k;
  double b = m.k_prime;
  int n = 0;
  while (n < kMaxAgmSteps) {
    const double an = 0.5 * (a[n] + b);
    // c_{n+1} = (a_n - b_n) / 2 without cancellation.
    const double cn = c[n] * c[n] / (4.0 * an);
    b = std::sqrt(a[n] * b);
    ++n;
    a[n] = an;
    c[n] = cn;
    if (cn <= kAgmTol * an) break;
  }
  double phi = std::ldexp(a[n] * u, n);
  double phi_prev = phi;
  for (int j = n; j >= 1; --j) {
    phi_prev = phi;
    phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
  }
  // phi is phi_0, phi_prev is phi_1.
  return std::cos(phi) / std::cos(phi_prev - phi);
}

}  // namespace

EllipticModulus EllipticModulus::from_modulus(double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw DomainError("elliptic modulus must lie in [0, 1), got " + std::to_string(k));
  }
  return {k, std::sqrt((1.0 - k) * (1.0 + k))};
}

EllipticModulus EllipticModulus::from_complement(double k_prime) {
  if (!(k_prime > 0.0 && k_prime <= 1.0)) {
    throw DomainError("complementary modulus must lie in (0, 1], got " + std::to_string(k_prime));
  }
  return {std::sqrt((1.0 - k_prime) * (1.0 + k_prime)), k_prime};
}

double agm(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("agm requires positive arguments");
  for (int i = 0; i < kMaxAgmSteps; ++i) {
    if (std::abs(a - b) <= kAgmTol * a) break;
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

double elliptic_K(const EllipticModulus& modulus) {
  return std::numbers::pi / (2.0 * agm(1.0, modulus.k_prime));
}

double elliptic_K(double k) { return elliptic_K(EllipticModulus::from_modulus(k)); }

double jacobi_dn(double u, const EllipticModulus& modulus) {
  if (!std::isfinite(u)) throw DomainError("jacobi_dn requires a finite argument");
  if (modulus.k == 0.0) return 1.0;
  const double K = elliptic_K(modulus);
  // dn is even with period 2K.
  double v = std::fmod(std::abs(u), 2.0 * K);
  if (v > K) v = 2.0 * K - v;
  if (v > 0.5 * K) return modulus.k_prime / dn_landen(K - v, modulus);
  return dn_landen(v, modulus);
}

double jacobi_dn(double u, double k) { return jacobi_dn(u, EllipticModulus::from_modulus(k)); }

ZolotarevSet zolotarev_points(double delta, int r) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("zolotarev_points: delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (r < 1) throw DomainError("zolotarev_points: r must be at least 1");

  // Modulus delta' = sqrt(1 - delta^2), whose complement is exactly delta.
  const auto modulus = EllipticModulus::from_complement(delta);
  const double K = elliptic_K(modulus);

  ZolotarevSet set{delta, 1.0, {}};
  set.points.reserve(static_cast<std::size_t>(r));
  for (int j = 1; j <= r; ++j) {
    const int numerator = 2 * (r - j) + 1;
    double z;
    if (2 * numerator > 2 * r) {
      // Argument beyond K/2: reflect with dn(K - u) = delta / dn(u), K - u = (2j - 1) / (2r) K.
      z = delta / dn_landen(static_cast<double>(2 * j - 1) / (2.0 * r) * K, modulus);
    } else {
      z = dn_landen(static_cast<double>(numerator) / (2.0 * r) * K, modulus);
    }
    set.points.push_back(z);
  }
  return set;
}

ZolotarevSet transformed_zolotarev(double a, double b, int r) {
  if (!(a > 0.0)) throw DomainError("transformed_zolotarev: a must be positive");
  if (!(b > a)) throw DomainError("transformed_zolotarev: b must exceed a");
  ZolotarevSet set = zolotarev_points(a / b, r);
  for (double& z : set.points) z *= b;
  set.interval_lo = a;
  set.interval_hi = b;
  return set;
}

DecayRate decay_rate(double kappa) {
  if (!(kappa > 1.0) || !std::isfinite(kappa)) {
    throw DomainError("decay_rate_C_star: kappa must exceed 1, got " + std::to_string(kappa));
  }
  DecayRate d;
  d.kappa = kappa;
  d.delta = 1.0 / kappa;
  const double q = std::sqrt(d.delta);
  d.mu = std::pow((1.0 - q) / (1.0 + q), 2);
  // 1 - mu = 4q / (1 + q)^2 exactly, so mu1 keeps full accuracy for large kappa.
  const double one_minus_mu = 4.0 * q / ((1.0 + q) * (1.0 + q));
  d.mu1 = std::sqrt(one_minus_mu * (1.0 + d.mu));
  const EllipticModulus m{d.mu, d.mu1};
  const EllipticModulus m1{d.mu1, d.mu};
  d.c_star = std::numbers::pi * elliptic_K(m1) / (4.0 * elliptic_K(m));
  return d;
}

double decay_rate_C_star(double kappa) { return decay_rate(kappa).c_star; }

}  // namespace fracrb::elliptic
