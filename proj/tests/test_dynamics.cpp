#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include "fockrage/dynamics.hpp"

using namespace fockrage;

namespace {

Matrix diag3(double a, double b, double c) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

}  // namespace

TEST_CASE("eigendecompose: diagonal input and singleton clusters") {
  const SpectralData s = eigendecompose(diag3(1.0, 2.0, 3.0));
  CHECK(s.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0));
  REQUIRE(s.clusters.size() == 3);
  for (const auto& c : s.clusters) CHECK(c.size() == 1);
}

TEST_CASE("eigendecompose: exact degeneracy clusters together") {
  const SpectralData s = eigendecompose(diag3(1.0, 1.0, 2.0), 1e-9);
  REQUIRE(s.clusters.size() == 2);
  CHECK(s.clusters[0] == std::vector<int>{0, 1});
  CHECK(s.clusters[1] == std::vector<int>{2});
  // within-cluster spread is bounded by the tolerance
  for (const auto& c : s.clusters) {
    CHECK(s.eigenvalues(c.back()) - s.eigenvalues(c.front()) <=
          s.cluster_tol);
  }
}

TEST_CASE("free lattice eigenvalues follow the Dirichlet closed form") {
  const int L = 64;
  LatticeSpec spec{L, 1.0, std::vector<double>(L, 0.0)};
  const OneBodyOperator h = build_lattice_one_body(spec);
  const SpectralData s = eigendecompose(h.matrix);
  for (int k = 1; k <= L; ++k) {
    const double expected = 2.0 - 2.0 * std::cos(k * M_PI / (L + 1));
    CHECK(s.eigenvalues(k - 1) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("lattice designation: free band is quasi-continuum, bound is point") {
  const int L = 32;
  LatticeSpec free_spec{L, 1.0, std::vector<double>(L, 0.0)};
  const OneBodyOperator shifted =
      shift_spectrum(build_lattice_one_body(free_spec), 0.1);
  SpectralData s = eigendecompose(shifted.matrix);
  designate_lattice_clusters(s, free_spec, shifted.shift);
  CHECK(quasi_continuum_clusters(s).size() == s.clusters.size());

  LatticeSpec well = free_spec;
  well.potential[L / 2] = -4.0;
  const OneBodyOperator hw =
      shift_spectrum(build_lattice_one_body(well), 0.1);
  SpectralData sw = eigendecompose(hw.matrix);
  designate_lattice_clusters(sw, well, hw.shift);
  // ground state is bound: below the band and localized on the well
  CHECK(sw.designation[0] == SpectralKind::point);
  CHECK(quasi_continuum_clusters(sw).size() >= sw.clusters.size() - 2);
}

TEST_CASE("evolve: identity at t = 0 and for commuting states") {
  auto rng = testsupport::rng(41);
  const Matrix h = random_hermitian(6, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix gamma = random_density(6, rng);
  CHECK((evolve(gamma, s, 0.0) - gamma).norm() < 1e-13);

  const Matrix commuting = dephase(gamma, s);
  for (double t : {0.7, 13.0}) {
    CHECK((evolve(commuting, s, t) - commuting).norm() < 1e-12);
  }
}

TEST_CASE("evolve: group law and conservation laws") {
  auto rng = testsupport::rng(42);
  const Matrix h = random_hermitian(8, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix gamma = random_density(8, rng);
  std::uniform_real_distribution<double> uni(-4.0, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double t1 = uni(rng), t2 = uni(rng);
    const Matrix two_step = evolve(evolve(gamma, s, t1), s, t2);
    const Matrix one_step = evolve(gamma, s, t1 + t2);
    CHECK((two_step - one_step).norm() < 1e-11);
  }
  const Matrix moved = evolve(gamma, s, 2.3);
  CHECK(std::abs(moved.trace().real() - 1.0) < 1e-12);
  CHECK(is_hermitian(moved));
  Eigen::SelfAdjointEigenSolver<Matrix> es(moved, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  CHECK(std::abs((h * moved).trace().real() - (h * gamma).trace().real()) <
        1e-10);
}

TEST_CASE("ergodic mean fixes commuting states and the two-level closed form") {
  auto rng = testsupport::rng(43);
  const Matrix h = random_hermitian(5, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix fixed = dephase(random_density(5, rng), s);
  CHECK((ergodic_mean(fixed, s, 7.7) - fixed).norm() < 1e-12);

  Matrix h2 = Matrix::Zero(2, 2);
  h2(1, 1) = 1.0;
  Matrix gamma2(2, 2);
  gamma2 << 0.5, 0.5, 0.5, 0.5;
  const SpectralData s2 = eigendecompose(h2);
  const Matrix mean = ergodic_mean(gamma2, s2, 2.0 * M_PI);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = 0.5;
  CHECK((mean - expected).norm() < 1e-13);
}

TEST_CASE("ergodic mean is a state and matches the quadrature cross-check") {
  auto rng = testsupport::rng(44);
  const Matrix h = random_hermitian(10, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix gamma = random_density(10, rng);
  const double big_t = 3.0;
  const Matrix mean = ergodic_mean(gamma, s, big_t);
  CHECK(std::abs(mean.trace().real() - 1.0) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(mean, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  const int steps = 400;
  const double delta = big_t / steps;
  const Matrix quad = ergodic_mean_quadrature(gamma, s, big_t, steps);
  const double err = trace_norm_hermitian(mean - quad);
  const double h_norm = operator_norm(h);
  CHECK(err <= delta * delta / 3.0 * h_norm * h_norm);

  // halving the step divides the defect by about four
  const Matrix quad2 = ergodic_mean_quadrature(gamma, s, big_t, 2 * steps);
  const double err2 = trace_norm_hermitian(mean - quad2);
  CHECK(err / err2 > 3.5);
  CHECK(err / err2 < 4.5);
}

TEST_CASE("triangle and gaussian windows agree with their quadrature") {
  auto rng = testsupport::rng(45);
  const Matrix h = random_hermitian(6, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix gamma = random_density(6, rng);
  for (const WindowFunction::Kind kind :
       {WindowFunction::Kind::triangle, WindowFunction::Kind::gaussian}) {
    WindowFunction chi;
    chi.kind = kind;
    CHECK(std::abs(chi.kappa(0.0) - Complex(1.0, 0.0)) < 1e-12);
    const Matrix mean = ergodic_mean(gamma, s, 2.0, chi);
    const Matrix quad = ergodic_mean_quadrature(gamma, s, 2.0, 4000, chi);
    CHECK(trace_norm_hermitian(mean - quad) < 1e-4);
    CHECK(std::abs(mean.trace().real() - 1.0) < 1e-9);
  }
}

TEST_CASE("dephase: projector fixed points, idempotence, commutation") {
  auto rng = testsupport::rng(46);
  const Matrix h = random_hermitian(7, rng);
  const SpectralData s = eigendecompose(h);
  const Vector phi = s.eigenvectors.col(3);
  const Matrix projector = phi * phi.adjoint();
  CHECK((dephase(projector, s) - projector).norm() < 1e-12);

  const Matrix gamma = random_density(7, rng);
  const Matrix once = dephase(gamma, s);
  CHECK((dephase(once, s) - once).norm() < 1e-12);
  CHECK((h * once - once * h).norm() < 1e-10);
}

TEST_CASE("ergodic mean converges to the dephased state as T doubles") {
  auto rng = testsupport::rng(47);
  for (int instance = 0; instance < 5; ++instance) {
    const Matrix h = random_hermitian(16, rng);
    const SpectralData s = eigendecompose(h);
    const Matrix gamma = random_density(16, rng);
    const Matrix limit = dephase(gamma, s);
    // the kappa factors oscillate, so the decay rate is a fit over a
    // doubling sequence: the envelope shrinks like 1/T
    std::vector<double> errors;
    for (double t = 32.0; t <= 2048.0; t *= 2.0) {
      errors.push_back(
          trace_norm_hermitian(ergodic_mean(gamma, s, t) - limit));
      if (errors.size() > 1) CHECK(errors.back() < errors.front());
    }
    const double fitted_factor = std::pow(
        errors.front() / errors.back(), 1.0 / double(errors.size() - 1));
    CHECK(fitted_factor >= 1.8);
  }
}

TEST_CASE("conjugation shift bound") {
  auto rng = testsupport::rng(48);
  const Matrix h = random_hermitian(16, rng);
  const SpectralData s = eigendecompose(h);
  const Matrix gamma = random_density(16, rng);

  CHECK(conjugation_shift_bound(gamma, s, 0.0, 10.0).lhs < 1e-13);

  const Matrix commuting = dephase(gamma, s);
  CHECK(conjugation_shift_bound(commuting, s, 3.7, 5.0).lhs < 1e-12);

  const ShiftBoundResult r = conjugation_shift_bound(gamma, s, 1.0, 100.0);
  CHECK(r.bound == doctest::Approx(0.02));
  CHECK(r.lhs <= 0.02 + 1e-10);
  CHECK(r.pass);

  std::uniform_real_distribution<double> s_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> t_dist(0.5, 50.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix g = random_density(16, rng);
    const ShiftBoundResult res =
        conjugation_shift_bound(g, s, s_dist(rng), t_dist(rng));
    CHECK(res.pass);
  }
}

TEST_CASE("classic RAGE statistic: selection edge cases") {
  auto rng = testsupport::rng(49);
  const Matrix h = random_hermitian(8, rng);
  const SpectralData s = eigendecompose(h);

  // eigenvector orthogonal to the selection gives zero
  const Vector x = s.eigenvectors.col(0);
  std::vector<int> others;
  for (size_t c = 1; c < s.clusters.size(); ++c) others.push_back(int(c));
  const Matrix k_obs = random_hermitian(8, rng);
  CHECK(classic_rage_statistic(x, k_obs, s, others, 50.0).value < 1e-20);

  // identity observable and full selection give ||x||^2 at any T
  std::vector<int> all;
  for (size_t c = 0; c < s.clusters.size(); ++c) all.push_back(int(c));
  const Vector y = random_unit_vector(8, rng);
  for (double t : {1.0, 31.0}) {
    const RageStatistic stat = classic_rage_statistic(
        y, Matrix::Identity(8, 8), s, all, t);
    CHECK(stat.value == doctest::Approx(1.0).epsilon(1e-11));
  }

  const RageStatistic empty =
      classic_rage_statistic(y, k_obs, s, {}, 10.0);
  CHECK(empty.value == 0.0);
  CHECK(empty.empty_selection);
}

TEST_CASE("classic RAGE statistic matches a direct quadrature on the lattice") {
  const int L = 16;
  LatticeSpec spec{L, 1.0, std::vector<double>(L, 0.0)};
  const OneBodyOperator h = shift_spectrum(build_lattice_one_body(spec), 0.1);
  SpectralData s = eigendecompose(h.matrix);
  designate_lattice_clusters(s, spec, h.shift);
  const std::vector<int> sel = quasi_continuum_clusters(s);
  Vector x = Vector::Zero(L);
  x(L / 2) = 1.0;
  const Matrix k_obs = window_projector(L, L / 2, 0);
  const double big_t = 50.0;
  const double value = classic_rage_statistic(x, k_obs, s, sel, big_t).value;

  // direct trapezoid of ||K P e^{-itH} x||^2
  const int steps = 20000;
  const double delta = big_t / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = delta * i;
    Vector phased = Vector::Zero(L);
    for (int j = 0; j < L; ++j) {
      const Complex amp = s.eigenvectors.col(j).adjoint() * x;
      phased += amp * std::exp(Complex(0.0, -t * s.eigenvalues(j))) *
                (k_obs * s.eigenvectors.col(j));
    }
    const double f = phased.squaredNorm();
    acc += (i == 0 || i == steps) ? 0.5 * f : f;
  }
  const double oracle = acc * delta / big_t;
  CHECK(value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("evolve and ergodic_mean act blockwise on Fock states") {
  auto rng = testsupport::rng(50);
  const int d = 3, N = 2;
  const Matrix h = random_hermitian(d, rng) + 4.0 * Matrix::Identity(d, d);
  const FockOperator op =
      second_quantize(h, zero_interaction(d), N, Statistics::boson);
  const std::vector<SpectralData> spectra = eigendecompose_fock(op);
  FockDensity state = zero_fock_density(d, N, Statistics::boson);
  state.blocks[0].matrix(0, 0) = 0.25;
  state.blocks[1].matrix = 0.25 * random_density(d, rng);
  state.blocks[2].matrix =
      0.5 * random_density(state.blocks[2].sector.dim(), rng);

  const FockDensity moved = evolve(state, spectra, 1.3);
  CHECK(moved.total_trace() == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 0; n <= N; ++n) {
    CHECK((moved.blocks[n].matrix -
           evolve(state.blocks[n].matrix, spectra[n], 1.3))
              .norm() < 1e-13);
  }
  const FockDensity mean = ergodic_mean(state, spectra, 9.0);
  CHECK(mean.total_trace() == doctest::Approx(1.0).epsilon(1e-12));
  const FockDensity still = dephase(state, spectra);
  CHECK((dephase(still, spectra).blocks[2].matrix - still.blocks[2].matrix)
            .norm() < 1e-12);
}

TEST_CASE("spectral data rejects non-Hermitian input and bad T") {
  Matrix bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(eigendecompose(bad), InputError);
  const SpectralData s = eigendecompose(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(ergodic_mean(Matrix::Identity(2, 2), s, 0.0), InputError);
  CHECK_THROWS_AS(ergodic_mean(Matrix::Identity(3, 3), s, 1.0), InputError);
}
