#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fracrb/errors.hpp"
#include "fracrb/fem.hpp"
#include "fracrb/interpolation.hpp"
#include "fracrb/linalg.hpp"
#include "fracrb/mesh.hpp"
#include "fracrb/random.hpp"
#include "fracrb/spectral.hpp"
#include "fracrb/truth.hpp"

using namespace fracrb;

namespace {

constexpr double pi = std::numbers::pi;

DofVector random_vector(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DofVector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x;
}

fem::FemMatrices interval_p1(int n) { return fem::assemble(fem::unit_interval_mesh(n), 1); }

// ||f||_{s}^2 = f^T M^{1/2} (M^{-1/2} A M^{-1/2})^{s} M^{1/2} f, from dense matrix functions.
double dense_norm_sq(const fem::FemMatrices& m, const DofVector& f, double s) {
  const Eigen::MatrixXd M = m.mass.to_dense(), A = m.stiffness.to_dense();
  const Eigen::MatrixXd Mh = linalg::spd_fractional_power(M, 0.5);
  const Eigen::MatrixXd Mmh = linalg::spd_fractional_power(M, -0.5);
  const Eigen::MatrixXd C = Mmh * A * Mmh;
  const Eigen::VectorXd g = Mh * f;
  return g.dot(linalg::spd_fractional_power(0.5 * (C + C.transpose()), s) * g);
}

}  // namespace

TEST_CASE("truth solver on eigenfunctions") {
  const auto m = interval_p1(16);
  const auto eig = linalg::gen_eig(m.stiffness, m.mass);
  for (int k : {0, 3, 10}) {
    const DofVector phi = eig.eigenvectors.col(k);
    const TruthBasis tb = make_truth_basis(eig, m.mass, phi);
    const double lam2 = eig.eigenvalues[k];
    for (double s : {0.1, 0.5, 0.9}) {
      const DofVector u = truth_solve(tb, s);
      CHECK((u - std::pow(lam2, -s) * phi).norm() <= 1e-12 * phi.norm() * std::pow(lam2, -s) + 1e-14);
      CHECK(truth_dual_norm(tb, s) == doctest::Approx(std::pow(lam2, -s / 2)).epsilon(1e-12));
      CHECK(truth_interp_norm(tb, s) == doctest::Approx(std::pow(lam2, s / 2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("truth solver endpoints match direct solves") {
  const auto m = fem::assemble(fem::unit_square_mesh(6), 1);
  const DofVector f = random_vector(m.mass.size(), 3);
  const TruthBasis tb = make_truth_basis(m.mass, m.stiffness, f);
  CHECK((detail::truth_solve_unchecked(tb, 0.0) - f).norm() <= 1e-11 * f.norm());
  const DofVector u1 = m.stiffness.to_dense().ldlt().solve(m.mass.to_dense() * f);
  CHECK((detail::truth_solve_unchecked(tb, 1.0) - u1).norm() <= 1e-11 * u1.norm());
  CHECK(detail::truth_dual_norm_unchecked(tb, 0.0) == doctest::Approx(std::sqrt(f.dot(m.mass.multiply(f)))));
  CHECK(detail::truth_dual_norm_unchecked(tb, 1.0) ==
        doctest::Approx(std::sqrt(u1.dot(m.mass.multiply(f)))).epsilon(1e-11));
}

TEST_CASE("truth norms against dense matrix functions") {
  const auto m = fem::assemble(fem::unit_square_mesh(5), 2);
  const DofVector f = random_vector(m.mass.size(), 8);
  const TruthBasis tb = make_truth_basis(m.mass, m.stiffness, f);
  for (double s : {0.2, 0.5, 0.8}) {
    // gen_eig eigenvalues are lambda^2, so ||f||_{H^s}^2 = f^T M (M^{-1} A)^s f.
    CHECK(truth_interp_norm(tb, s) * truth_interp_norm(tb, s) ==
          doctest::Approx(dense_norm_sq(m, f, s)).epsilon(1e-9));
    CHECK(truth_dual_norm(tb, s) * truth_dual_norm(tb, s) ==
          doctest::Approx(dense_norm_sq(m, f, -s)).epsilon(1e-9));
  }
}

TEST_CASE("truth solver: linearity, zero input and argument checks") {
  const auto m = interval_p1(12);
  const auto eig = linalg::gen_eig(m.stiffness, m.mass);
  const DofVector f = random_vector(m.mass.size(), 1), g = random_vector(m.mass.size(), 2);
  const DofVector lhs = truth_solve(make_truth_basis(eig, m.mass, 2.0 * f - g), 0.4);
  const DofVector rhs = 2.0 * truth_solve(make_truth_basis(eig, m.mass, f), 0.4) -
                        truth_solve(make_truth_basis(eig, m.mass, g), 0.4);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());

  const TruthBasis zero = make_truth_basis(eig, m.mass, DofVector::Zero(f.size()));
  CHECK(truth_solve(zero, 0.3).norm() == 0.0);
  CHECK(truth_dual_norm(zero, 0.3) == 0.0);

  const TruthBasis tb = make_truth_basis(eig, m.mass, f);
  for (double s : {0.0, 1.0, -0.2, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(truth_solve(tb, s), DomainError);
    CHECK_THROWS_AS(truth_dual_norm(tb, s), DomainError);
    CHECK_THROWS_AS(truth_interp_norm(tb, s), DomainError);
  }
  CHECK_THROWS_AS(make_truth_basis(eig, m.mass, DofVector::Zero(3)), ArgumentError);
  CHECK_THROWS_AS(make_truth_basis(m.mass, m.stiffness, f, 5), CapacityError);
}

TEST_CASE("dual norm is monotone in s for fixed f") {
  const auto m = interval_p1(20);
  const TruthBasis tb = make_truth_basis(m.mass, m.stiffness, random_vector(m.mass.size(), 6));
  // All lambda^2 > 1 here, so lambda^{-2s} decreases with s.
  double previous = 1e300;
  for (double s : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    const double v = truth_dual_norm(tb, s);
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("interpolation constant") {
  CHECK(interpolation_constant(0.5) == doctest::Approx(std::sqrt(2.0 / pi)));
  CHECK(interpolation_constant(0.25) == doctest::Approx(interpolation_constant(0.75)));
  CHECK_THROWS_AS(interpolation_constant(0.0), DomainError);
}

TEST_CASE("K-functional against the normal equations") {
  const auto m = interval_p1(10);
  const DofVector f = random_vector(m.mass.size(), 4);
  const PrimalCouple couple(m.mass, m.stiffness);
  const Eigen::MatrixXd M = m.mass.to_dense(), A = m.stiffness.to_dense();
  for (double t : {1e-3, 0.05, 0.3, 2.0}) {
    const Eigen::VectorXd v = (M + t * t * A).ldlt().solve(M * f);
    const Eigen::VectorXd d = f - v;
    const double brute = d.dot(M * d) + t * t * v.dot(A * v);
    CHECK(k_functional_value(couple, f, t) == doctest::Approx(brute).epsilon(1e-10));
    CHECK(k_functional_value(m.mass, m.stiffness, f, t) == doctest::Approx(brute).epsilon(1e-10));
    // v(t) minimizes: any perturbation increases the functional.
    const Eigen::VectorXd w = v + 1e-3 * random_vector(v.size(), 99);
    const Eigen::VectorXd dw = f - w;
    CHECK(dw.dot(M * dw) + t * t * w.dot(A * w) > brute);
  }
  CHECK_THROWS_AS(k_functional_value(couple, f, 0.0), DomainError);
}

TEST_CASE("K-functional is increasing and bounded") {
  const auto m = fem::assemble(fem::unit_square_mesh(6), 1);
  const DofVector f = random_vector(m.mass.size(), 5);
  const PrimalCouple couple(m.mass, m.stiffness);
  const double f0 = f.dot(m.mass.multiply(f)), f1 = f.dot(m.stiffness.multiply(f));
  double previous = 0.0;
  for (double t = 1e-4; t < 10.0; t *= 3.0) {
    const double K2 = k_functional_value(couple, f, t);
    CHECK(K2 >= previous);
    CHECK(K2 <= f0 * (1 + 1e-12));
    CHECK(K2 <= t * t * f1 * (1 + 1e-12));
    previous = K2;
  }
}

TEST_CASE("dual eigenpairs are scaled primal eigenpairs") {
  const auto m = interval_p1(8);
  const auto eig = linalg::gen_eig(m.stiffness, m.mass);
  const DualCouple dual(m.mass, m.stiffness);
  const auto deig = dual.eigenpairs();
  REQUIRE(deig.eigenvalues.size() == eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    CHECK(deig.eigenvalues[k] == doctest::Approx(eig.eigenvalues[k]).epsilon(1e-7));
    const DofVector expected = std::sqrt(eig.eigenvalues[k]) * eig.eigenvectors.col(k);
    const DofVector psi = deig.eigenvectors.col(k);
    const double sign = psi.dot(expected) >= 0 ? 1.0 : -1.0;
    CHECK((sign * psi - expected).norm() <= 1e-7 * expected.norm());
  }
}

TEST_CASE("dual and primal K-functional minimizers coincide") {
  const auto m = interval_p1(4);
  const DofVector f = random_vector(m.mass.size(), 12);
  const DualCouple dual(m.mass, m.stiffness);
  for (double t : {0.01, 0.1, 1.0, 10.0}) {
    const DofVector v = linalg::shifted_solve(m.mass, m.stiffness, t, f);
    const DofVector w = dual.minimizer(t, f);
    CHECK((v - w).norm() <= 1e-9 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("K-norm quadrature reproduces the spectral norms") {
  const auto m = interval_p1(4);
  const DofVector f = random_vector(m.mass.size(), 21);
  const TruthBasis tb = make_truth_basis(m.mass, m.stiffness, f);
  const auto& lam = tb.eig.eigenvalues;
  const SpectralInterval interval(lam[0] / 1.01, lam[lam.size() - 1] * 1.01);
  const PrimalCouple primal(m.mass, m.stiffness);
  const DualCouple dual(m.mass, m.stiffness);
  for (double s : {0.25, 0.5, 0.75}) {
    const KNormResult p = k_norm_by_quadrature(primal, f, s, interval);
    CHECK(p.tolerance_met);
    CHECK(p.value == doctest::Approx(truth_interp_norm(tb, s)).epsilon(1e-6));
    CHECK(p.value == doctest::Approx(interpolation_constant(s) * std::sqrt(p.integral)));
    // ||f||_{H^{-s}} = C_{1-s} ||f||_{K^{1-s}} of the dual couple.
    const KNormResult d = k_norm_by_quadrature(dual, f, 1.0 - s, interval);
    CHECK(interpolation_constant(1.0 - s) * std::sqrt(d.integral) ==
          doctest::Approx(truth_dual_norm(tb, s)).epsilon(1e-6));
  }
  const KNormResult auto_bounds = k_norm_by_quadrature(m.mass, m.stiffness, f, 0.4, 1e-8);
  CHECK(auto_bounds.value == doctest::Approx(truth_interp_norm(tb, 0.4)).epsilon(1e-6));
}

TEST_CASE("spectral interval") {
  const SpectralInterval iv(2.0, 50.0);
  CHECK(iv.kappa() == doctest::Approx(25.0));
  CHECK(iv.delta() == doctest::Approx(0.04));
  CHECK(iv.contains(2.0));
  CHECK_FALSE(iv.contains(51.0));
  CHECK_THROWS_AS(SpectralInterval(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(SpectralInterval(3.0, 3.0), DomainError);
}

TEST_CASE("spectral bounds bracket the closed-form interval spectrum") {
  const int n = 8;
  const double h = 1.0 / n;
  const auto m = interval_p1(n);
  const SpectralInterval iv = estimate_spectral_bounds(m.mass, m.stiffness);
  for (int k = 1; k < n; ++k) {
    const double c = std::cos(k * pi * h);
    CHECK(iv.contains(6.0 / (h * h) * (1.0 - c) / (2.0 + c)));
  }
}

TEST_CASE("spectral bounds on the unit square") {
  const auto m = fem::assemble(fem::unit_square_mesh(16), 1);
  SpectralEstimateOptions opts;
  const SpectralInterval iv = estimate_spectral_bounds(m.mass, m.stiffness, opts);
  CHECK(iv.lambda_L_sq() * opts.safety == doctest::Approx(2 * pi * pi).epsilon(0.1));
  const auto eig = linalg::gen_eig(m.stiffness, m.mass);
  CHECK(iv.lambda_L_sq() <= eig.eigenvalues[0]);
  CHECK(iv.lambda_U_sq() >= eig.eigenvalues[eig.eigenvalues.size() - 1]);
}

TEST_CASE("spectral bounds are exact on a small pencil with safety 1") {
  const auto M = SparseSymMatrix::from_entries(2, {{0, 0, 2.0}, {1, 1, 1.0}, {1, 0, 0.5}});
  const auto A = SparseSymMatrix::from_entries(2, {{0, 0, 3.0}, {1, 1, 4.0}, {1, 0, -1.0}});
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(A.to_dense(), M.to_dense());
  SpectralEstimateOptions opts;
  opts.safety = 1.0;
  const SpectralInterval iv = estimate_spectral_bounds(M, A, opts);
  CHECK(iv.lambda_L_sq() == doctest::Approx(ref.eigenvalues()[0]).epsilon(1e-6));
  CHECK(iv.lambda_U_sq() == doctest::Approx(ref.eigenvalues()[1]).epsilon(1e-6));
  opts.safety = 0.9;
  CHECK_THROWS_AS(estimate_spectral_bounds(M, A, opts), DomainError);
}
