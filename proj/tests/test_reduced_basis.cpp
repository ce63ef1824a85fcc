#include <doctest.h>

#include <cmath>
#include <future>
#include <vector>

#include <Eigen/Dense>

#include "fracrb/elliptic.hpp"
#include "fracrb/errors.hpp"
#include "fracrb/experiment.hpp"
#include "fracrb/fem.hpp"
#include "fracrb/mesh.hpp"
#include "fracrb/random.hpp"
#include "fracrb/reduced_basis.hpp"
#include "fracrb/spectral.hpp"
#include "fracrb/truth.hpp"

using namespace fracrb;

namespace {

DofVector random_rhs(const SparseSymMatrix& M, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DofVector x(static_cast<Eigen::Index>(M.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  return x / std::sqrt(x.dot(M.multiply(x)));
}

double m_norm(const SparseSymMatrix& M, const DofVector& x) { return std::sqrt(x.dot(M.multiply(x))); }

struct Setup {
  fem::FemMatrices m;
  linalg::GenEigBasis eig;
  SpectralInterval interval;
};

Setup make_setup(const fem::Mesh& mesh, int order = 1) {
  fem::FemMatrices m = fem::assemble(mesh, order);
  linalg::GenEigBasis eig = linalg::gen_eig(m.stiffness, m.mass);
  const SpectralInterval iv = estimate_spectral_bounds(m.mass, m.stiffness);
  return Setup{std::move(m), std::move(eig), iv};
}

}  // namespace

TEST_CASE("snapshot parameters") {
  const SpectralInterval iv(20.0, 6000.0);
  const auto t = zolotarev_snapshot_parameters(6, iv);
  REQUIRE(t.size() == 7);
  CHECK(t[0] == 0.0);
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (j > 1) CHECK(t[j] > t[j - 1]);
    CHECK(t[j] * t[j] >= 1.0 / 6000.0);
    CHECK(t[j] * t[j] <= 1.0 / 20.0);
  }
  const auto z = elliptic::transformed_zolotarev(1.0 / 6000.0, 1.0 / 20.0, 6);
  for (int j = 0; j < 6; ++j) CHECK(t[j + 1] * t[j + 1] == doctest::Approx(z.points[j]).epsilon(1e-14));
  CHECK(zolotarev_snapshot_parameters(0, iv) == std::vector<double>{0.0});
  CHECK_THROWS_AS(zolotarev_snapshot_parameters(-1, iv), DomainError);
}

TEST_CASE("reduced space structure") {
  const Setup su = make_setup(fem::unit_square_mesh(8));
  const DofVector f = random_rhs(su.m.mass, 3) * 2.5;
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, 6, su.interval);
  const Eigen::MatrixXd M = su.m.mass.to_dense(), A = su.m.stiffness.to_dense();
  const Eigen::MatrixXd& V = space.basis();
  REQUIRE(space.effective_dimension() == 7);
  CHECK(space.r() == 6);
  CHECK(space.dropped_snapshots().empty());
  CHECK((V.transpose() * M * V - Eigen::MatrixXd::Identity(7, 7)).norm() < 1e-12);
  CHECK(space.beta() == doctest::Approx(2.5));
  CHECK((V.col(0) - f / 2.5).norm() < 1e-13 * f.norm());
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(7);
  e1[0] = 2.5;
  CHECK((space.reduced_coordinates(su.m.mass, f) - e1).norm() < 1e-12);
  CHECK((space.projected_stiffness() - V.transpose() * A * V).norm() <= 1e-12 * space.projected_stiffness().norm());
  const Eigen::MatrixXd Astar = (M * V).transpose() * A.ldlt().solve(M * V);
  CHECK((space.projected_dual() - Astar).norm() <= 1e-10 * Astar.norm());
  CHECK(space.stiffness_eig().eigenvalues.minCoeff() > 0.0);
  CHECK(space.dual_eig().eigenvalues.minCoeff() > 0.0);
  // Every snapshot lies in the span.
  for (double t : space.snapshot_parameters()) {
    const DofVector v = linalg::shifted_solve(su.m.mass, su.m.stiffness, t, f);
    CHECK((V * (V.transpose() * (M * v)) - v).norm() <= 1e-10 * v.norm());
  }
}

TEST_CASE("eigenfunction data: exact norms and solutions for every r") {
  const Setup su = make_setup(fem::unit_interval_mesh(32));
  for (int k : {0, 1, 4}) {
    const DofVector phi = su.eig.eigenvectors.col(k);
    const double lam2 = su.eig.eigenvalues[k];
    for (int r : {0, 1, 3, 8}) {
      const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, phi, r, su.interval);
      CHECK(space.effective_dimension() == 1);
      CHECK(space.dropped_snapshots().size() == static_cast<std::size_t>(r));
      for (double s : {0.1, 0.5, 0.9}) {
        const double exact_norm = std::pow(lam2, -s / 2);
        CHECK(dual_rb_norm(space, s) == doctest::Approx(exact_norm).epsilon(1e-10));
        CHECK(extrap_rb_norm(space, s) == doctest::Approx(exact_norm).epsilon(1e-10));
        const DofVector u = std::pow(lam2, -s) * phi;
        CHECK(m_norm(su.m.mass, dual_rb_solve(space, su.m.mass, su.m.stiffness, phi, s) - u) < 1e-10);
        CHECK(m_norm(su.m.mass, extrap_rb_solve(space, su.m.mass, phi, s) - u) < 1e-10);
        CHECK(m_norm(su.m.mass, extrap_rb_solve(space, s) - u) < 1e-10);
      }
    }
  }
}

TEST_CASE("finite termination once r + 1 reaches the number of excited modes") {
  const Setup su = make_setup(fem::unit_interval_mesh(4));  // three modes
  const DofVector f = random_rhs(su.m.mass, 17);
  const TruthBasis tb = make_truth_basis(su.eig, su.m.mass, f);
  for (int r : {2, 3, 5}) {
    const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, r, su.interval);
    for (double s : {0.2, 0.7}) {
      CHECK(dual_rb_norm(space, s) == doctest::Approx(truth_dual_norm(tb, s)).epsilon(1e-9));
      CHECK(extrap_rb_norm(space, s) == doctest::Approx(truth_dual_norm(tb, s)).epsilon(1e-9));
      const DofVector u = truth_solve(tb, s);
      CHECK((extrap_rb_solve(space, su.m.mass, f, s) - u).norm() <= 1e-8 * u.norm());
      CHECK((dual_rb_solve(space, su.m.mass, su.m.stiffness, f, s) - u).norm() <= 1e-8 * u.norm());
    }
  }
}

TEST_CASE("endpoint exponents") {
  const Setup su = make_setup(fem::unit_square_mesh(6));
  const DofVector f = random_rhs(su.m.mass, 4);
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, 4, su.interval);
  const linalg::SpdSolver solver(su.m.stiffness);
  // s = 0: the M-orthogonal projection of a member of V_r is itself.
  CHECK((detail::extrap_rb_solve_unchecked(space, su.m.mass, f, 0.0) - f).norm() <= 1e-12 * f.norm());
  // s = 1: the dual method reproduces A^{-1} M f exactly.
  const DofVector u1 = solver.solve(su.m.mass.multiply(f));
  CHECK((detail::dual_rb_solve_unchecked(space, su.m.mass, solver, f, 1.0) - u1).norm() <= 1e-11 * u1.norm());
  CHECK_THROWS_AS(dual_rb_norm(space, 0.0), DomainError);
  CHECK_THROWS_AS(extrap_rb_norm(space, 1.0), DomainError);
  CHECK_THROWS_AS(extrap_rb_solve(space, su.m.mass, f, -0.1), DomainError);
  CHECK_THROWS_AS(dual_rb_solve(space, su.m.mass, solver, f, 1.0), DomainError);
}

TEST_CASE("zero data maps to zero") {
  const Setup su = make_setup(fem::unit_square_mesh(5));
  const DofVector zero = DofVector::Zero(static_cast<Eigen::Index>(su.m.mass.size()));
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, zero, 5, su.interval);
  CHECK(space.effective_dimension() == 0);
  CHECK(dual_rb_norm(space, 0.5) == 0.0);
  CHECK(extrap_rb_norm(space, 0.5) == 0.0);
  CHECK(dual_rb_solve(space, su.m.mass, su.m.stiffness, zero, 0.5).norm() == 0.0);
  CHECK(extrap_rb_solve(space, su.m.mass, zero, 0.5).norm() == 0.0);
  CHECK(extrap_rb_solve(space, 0.5).norm() == 0.0);
}

TEST_CASE("one-sided norm error over random cases") {
  for (int n : {8, 24}) {
    const Setup su = make_setup(fem::unit_interval_mesh(n));
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const DofVector f = random_rhs(su.m.mass, seed);
      const TruthBasis tb = make_truth_basis(su.eig, su.m.mass, f);
      for (int r : {1, 2, 4, 7}) {
        const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, r, su.interval);
        for (double s : {0.05, 0.3, 0.5, 0.77, 0.95}) {
          const double d = std::pow(dual_rb_norm(space, s), 2) - std::pow(truth_dual_norm(tb, s), 2);
          CHECK(d >= -1e-12);
        }
      }
    }
  }
}

TEST_CASE("exponential decay of the squared norm error") {
  struct Case {
    fem::Mesh mesh;
    const char* name;
  };
  for (const Case& c : {Case{fem::unit_interval_mesh(64), "interval 64"}, Case{fem::unit_square_mesh(16), "square 16"}}) {
    CAPTURE(c.name);
    const Setup su = make_setup(c.mesh);
    const DofVector f = random_rhs(su.m.mass, 42);
    const TruthBasis tb = make_truth_basis(su.eig, su.m.mass, f);
    const double c_star = elliptic::decay_rate_C_star(su.interval.kappa());
    for (double s : {0.1, 0.5, 0.9}) {
      CAPTURE(s);
      std::vector<int> rs;
      std::vector<double> d, E;
      const DofVector u = truth_solve(tb, s);
      for (int r = 1; r <= 16; ++r) {
        const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, r, su.interval);
        rs.push_back(r);
        d.push_back(std::pow(dual_rb_norm(space, s), 2) - std::pow(truth_dual_norm(tb, s), 2));
        E.push_back(m_norm(su.m.mass, dual_rb_solve(space, su.m.mass, space.stiffness_solver(), f, s) - u));
      }
      for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (d[i + 1] > 1e-12) CHECK(d[i + 1] <= d[i]);
      }
      const auto fit_d = fit_log_slope(rs, d);
      const auto fit_E = fit_log_slope(rs, E);
      REQUIRE(fit_d);
      REQUIRE(fit_E);
      CHECK(fit_d->slope <= -2.0 * 0.9 * c_star);
      CHECK(fit_E->slope <= -0.9 * c_star);
    }
  }
}

TEST_CASE("dual and extrapolation norms differ at small r") {
  const Setup su = make_setup(fem::unit_interval_mesh(16));
  const DofVector f = random_rhs(su.m.mass, 2024);
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, 2, su.interval);
  for (double s : {0.3, 0.5}) CHECK(std::abs(dual_rb_norm(space, s) - extrap_rb_norm(space, s)) > 1e-13);
}

TEST_CASE("parallel snapshot solves give the serial space") {
  const Setup su = make_setup(fem::unit_square_mesh(10));
  const DofVector f = random_rhs(su.m.mass, 8);
  BuildOptions serial, parallel;
  parallel.parallel = true;
  const ReducedSpace a = build_reduced_space(su.m.mass, su.m.stiffness, f, 9, su.interval, serial);
  const ReducedSpace b = build_reduced_space(su.m.mass, su.m.stiffness, f, 9, su.interval, parallel);
  CHECK((a.basis() - b.basis()).norm() == 0.0);
  CHECK((a.projected_dual() - b.projected_dual()).norm() == 0.0);
}

TEST_CASE("concurrent s-queries on one space") {
  const Setup su = make_setup(fem::unit_square_mesh(10));
  const DofVector f = random_rhs(su.m.mass, 9);
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, 8, su.interval);
  std::vector<double> ss;
  for (int i = 1; i < 40; ++i) ss.push_back(i / 40.0);
  std::vector<std::future<double>> jobs;
  for (double s : ss) {
    jobs.push_back(std::async(std::launch::async, [&space, &su, &f, s] {
      return dual_rb_norm(space, s) + m_norm(su.m.mass, extrap_rb_solve(space, s)) +
             m_norm(su.m.mass, dual_rb_solve(space, su.m.mass, space.stiffness_solver(), f, s));
    }));
  }
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const double expected = dual_rb_norm(space, ss[i]) + m_norm(su.m.mass, extrap_rb_solve(space, ss[i])) +
                            m_norm(su.m.mass, dual_rb_solve(space, su.m.mass, space.stiffness_solver(), f, ss[i]));
    CHECK(jobs[i].get() == expected);
  }
}

TEST_CASE("online extrapolation solve matches the general one for the space's own data") {
  const Setup su = make_setup(fem::lshape_mesh(8));
  const DofVector f = random_rhs(su.m.mass, 10);
  const ReducedSpace space = build_reduced_space(su.m.mass, su.m.stiffness, f, 7, su.interval);
  for (double s : {0.1, 0.6}) {
    const DofVector a = extrap_rb_solve(space, s);
    const DofVector b = extrap_rb_solve(space, su.m.mass, f, s);
    CHECK((a - b).norm() <= 1e-12 * b.norm());
  }
  CHECK_THROWS_AS(extrap_rb_solve(space, su.m.mass, DofVector::Zero(3), 0.5), ArgumentError);
}
