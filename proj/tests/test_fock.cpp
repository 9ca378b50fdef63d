#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "fockrage/fock.hpp"

using namespace fockrage;

namespace {

Matrix random_onebody(int d, std::mt19937_64& rng) {
  return random_hermitian(d, rng);
}

TwoBodyOperator random_pair(int d, std::mt19937_64& rng) {
  // exchange-symmetric Hermitian pair operator
  Matrix w = random_hermitian(d * d, rng);
  const Matrix swap = Matrix(pair_swap(d));
  w = (w + swap * w * swap) / 2.0;
  return two_body_from_dense(d, w);
}

// brute-force sums of one-body eigenvalues: multisets for bosons,
// subsets for fermions
std::vector<double> free_spectrum_oracle(const RealVector& levels, int n,
                                         Statistics stats) {
  std::vector<double> out;
  const int d = static_cast<int>(levels.size());
  std::vector<int> pick(n, 0);
  // non-decreasing index tuples; strictly increasing for fermions
  auto emit = [&](auto&& self, int slot, int start, double sum) -> void {
    if (slot == n) {
      out.push_back(sum);
      return;
    }
    for (int i = start; i < d; ++i) {
      self(self, slot + 1, stats == Statistics::fermion ? i + 1 : i,
           sum + levels(i));
    }
  };
  emit(emit, 0, 0, 0.0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("sector enumeration: dimensions and order") {
  const SectorBasis f21 = sector_basis(2, 1, Statistics::fermion);
  REQUIRE(f21.dim() == 2);
  CHECK(f21.states[0] == std::vector<int>{1, 0});
  CHECK(f21.states[1] == std::vector<int>{0, 1});

  const SectorBasis f22 = sector_basis(2, 2, Statistics::fermion);
  REQUIRE(f22.dim() == 1);
  CHECK(f22.states[0] == std::vector<int>{1, 1});

  const SectorBasis b32 = sector_basis(3, 2, Statistics::boson);
  CHECK(b32.dim() == 6);  // stars and bars C(4,2)

  // lexicographic descending order
  for (int i = 1; i < b32.dim(); ++i) {
    CHECK(b32.states[i - 1] > b32.states[i]);
  }
  // index map round-trip
  for (int i = 0; i < b32.dim(); ++i) {
    CHECK(b32.index_of(b32.states[i]) == i);
  }
}

TEST_CASE("sector dimensions match the binomial counts") {
  for (int d = 1; d <= 6; ++d) {
    for (int n = 0; n <= 4; ++n) {
      CHECK(sector_basis(d, n, Statistics::boson).dim() ==
            static_cast<int>(std::lround(std::tgamma(d + n) /
                                         (std::tgamma(n + 1) * std::tgamma(d)))));
      if (n <= d) {
        CHECK(sector_basis(d, n, Statistics::fermion).dim() ==
              static_cast<int>(std::lround(std::tgamma(d + 1) /
                                           (std::tgamma(n + 1) *
                                            std::tgamma(d - n + 1)))));
      }
    }
  }
  CHECK_THROWS_AS(sector_basis(2, 3, Statistics::fermion), InputError);
}

TEST_CASE("creation on the vacuum fills the requested mode") {
  const SectorBasis vac = sector_basis(3, 0, Statistics::boson);
  Vector f = Vector::Zero(3);
  f(0) = 1.0;
  const Matrix c = creation_op(f, vac);
  const SectorBasis one = sector_basis(3, 1, Statistics::boson);
  REQUIRE(c.rows() == one.dim());
  CHECK(std::abs(c(one.index_of({1, 0, 0}), 0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(c.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("single-mode boson ladder reaches sqrt(n!)") {
  Vector f = Vector::Ones(1);
  Vector state = Vector::Ones(1);  // vacuum coordinates
  double expected = 1.0;
  for (int n = 0; n < 6; ++n) {
    const SectorBasis sector = sector_basis(1, n, Statistics::boson);
    state = (creation_op(f, sector) * state).eval();
    expected *= std::sqrt(double(n + 1));
  }
  CHECK(state.norm() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fermionic creation signs follow the prefix-sum convention") {
  const SectorBasis vac = sector_basis(2, 0, Statistics::fermion);
  const SectorBasis one = sector_basis(2, 1, Statistics::fermion);
  Vector e1 = Vector::Zero(2), e2 = Vector::Zero(2);
  e1(0) = 1.0;
  e2(1) = 1.0;
  Vector v = Vector::Ones(1);
  // a*(e1) a*(e2) |vac> = +|(1,1)>
  const Vector plus = creation_op(e1, one) * (creation_op(e2, vac) * v);
  // a*(e2) a*(e1) |vac> = -|(1,1)>
  const Vector minus = creation_op(e2, one) * (creation_op(e1, vac) * v);
  CHECK(std::abs(plus(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(minus(0) + Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("canonical (anti)commutation relations on every sector pair") {
  auto rng = testsupport::rng(11);
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    const int d = 4;
    const Vector f = random_unit_vector(d, rng);
    const Vector g = random_unit_vector(d, rng);
    const int n_max = stats == Statistics::fermion ? d - 1 : 4;
    for (int n = 0; n <= n_max; ++n) {
      const SectorBasis sector = sector_basis(d, n, stats);
      const SectorBasis upper = sector_basis(d, n + 1, stats);
      const Matrix create_f = creation_op(f, sector);     // n -> n+1
      const Matrix annih_g_up = annihilation_op(g, upper);  // n+1 -> n
      Matrix commutator = annih_g_up * create_f;
      if (n > 0) {
        const Matrix create_f_down =
            creation_op(f, sector_basis(d, n - 1, stats));
        const Matrix annih_g = annihilation_op(g, sector);
        if (stats == Statistics::boson) {
          commutator -= create_f_down * annih_g;
        } else {
          commutator += create_f_down * annih_g;
        }
      }
      const Complex expected = g.adjoint() * f;  // <g, f> Id
      const Matrix target =
          expected * Matrix::Identity(sector.dim(), sector.dim());
      CHECK((commutator - target).norm() < 1e-12);
    }
  }
}

TEST_CASE("creation is linear in f and adjoint to annihilation") {
  auto rng = testsupport::rng(12);
  const int d = 4;
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    const SectorBasis sector = sector_basis(d, 2, stats);
    const Vector f = random_unit_vector(d, rng);
    const Vector g = random_unit_vector(d, rng);
    const Complex a(0.7, -0.3), b(-0.2, 1.1);
    const Matrix lhs = creation_op((a * f + b * g).eval(), sector);
    const Matrix rhs = a * creation_op(f, sector) + b * creation_op(g, sector);
    CHECK((lhs - rhs).norm() < 1e-12);

    // <a*(f) psi, phi> = <psi, a(f) phi>
    const SectorBasis upper = sector_basis(d, 3, stats);
    const Matrix create = creation_op(f, sector);
    const Matrix annih = annihilation_op(f, upper);
    CHECK((create.adjoint() - annih).norm() < 1e-12);
  }
}

TEST_CASE("lift with n = 1 returns h itself") {
  auto rng = testsupport::rng(13);
  const Matrix h = random_onebody(3, rng);
  const ManyBodyOperator lifted =
      lift_first_quantized(h, zero_interaction(3), 1, Statistics::boson);
  CHECK((lifted.matrix - h).norm() < 1e-14);
}

TEST_CASE("free lift spectrum equals sums of one-body eigenvalues") {
  auto rng = testsupport::rng(14);
  const int d = 4;
  const Matrix h = random_onebody(d, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    for (int n = 2; n <= 3; ++n) {
      const ManyBodyOperator lifted =
          lift_first_quantized(h, zero_interaction(d), n, stats);
      Eigen::SelfAdjointEigenSolver<Matrix> block(lifted.matrix,
                                                  Eigen::EigenvaluesOnly);
      const std::vector<double> oracle =
          free_spectrum_oracle(es.eigenvalues(), n, stats);
      REQUIRE(static_cast<int>(oracle.size()) == block.eigenvalues().size());
      for (size_t i = 0; i < oracle.size(); ++i) {
        CHECK(block.eigenvalues()(static_cast<int>(i)) ==
              doctest::Approx(oracle[i]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("d=2 fermion pair compresses to the wedge expectation") {
  auto rng = testsupport::rng(15);
  const Matrix h = random_onebody(2, rng);
  const TwoBodyOperator w = random_pair(2, rng);
  const ManyBodyOperator lifted =
      lift_first_quantized(h, w, 2, Statistics::fermion);
  REQUIRE(lifted.matrix.rows() == 1);
  // direct 4x4 tensor computation with the wedge (e1 x e2 - e2 x e1)/sqrt(2)
  Vector wedge = Vector::Zero(4);
  wedge(0 * 2 + 1) = 1.0 / std::sqrt(2.0);
  wedge(1 * 2 + 0) = -1.0 / std::sqrt(2.0);
  const Complex expected =
      h(0, 0) + h(1, 1) +
      Complex(wedge.adjoint() * Matrix(w.matrix) * wedge);
  CHECK(std::abs(lifted.matrix(0, 0) - expected) < 1e-12);
}

TEST_CASE("second quantization: single bosonic mode counting") {
  Matrix h(1, 1);
  h(0, 0) = 2.0;
  Matrix wdense(1, 1);
  wdense(0, 0) = 1.0;
  const TwoBodyOperator w = two_body_from_dense(1, wdense);
  const FockOperator op = second_quantize(h, w, 4, Statistics::boson);
  // H_n = 2 n + g C(n,2)
  CHECK(op.blocks[0].matrix(0, 0) == Complex(0.0, 0.0));
  CHECK(op.blocks[1].matrix(0, 0) == Complex(2.0, 0.0));
  CHECK(op.blocks[3].matrix(0, 0).real() == doctest::Approx(9.0));
  CHECK(op.blocks[4].matrix(0, 0).real() == doctest::Approx(14.0));
}

TEST_CASE("second_quantize equals the tensor-lift oracle") {
  auto rng = testsupport::rng(16);
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    for (int d = 2; d <= 4; ++d) {
      const Matrix h = random_onebody(d, rng);
      const TwoBodyOperator w = random_pair(d, rng);
      const int n_max = stats == Statistics::fermion ? d : 4;
      const FockOperator op = second_quantize(h, w, n_max, stats);
      for (int n = 0; n <= n_max; ++n) {
        const ManyBodyOperator oracle = lift_first_quantized(h, w, n, stats);
        CHECK((op.blocks[n].matrix - oracle.matrix).lpNorm<Eigen::Infinity>() <
              1e-10);
      }
    }
  }
}

TEST_CASE("every second-quantized block is Hermitian and number conserving") {
  auto rng = testsupport::rng(17);
  const Matrix h = random_onebody(3, rng);
  const TwoBodyOperator w = random_pair(3, rng);
  const FockOperator op = second_quantize(h, w, 3, Statistics::boson);
  for (const ManyBodyOperator& block : op.blocks) {
    CHECK(is_hermitian(block.matrix));
    CHECK(block.matrix.rows() == block.sector.dim());
  }
}

TEST_CASE("interaction splitting on the tensor power") {
  auto rng = testsupport::rng(18);
  const int d = 3;
  const Matrix h = random_onebody(d, rng);

  SUBCASE("zero interaction splits exactly") {
    const TwoBodyOperator w = zero_interaction(d);
    const double resid = split_interaction_residual(
        full_hamiltonian(h, w, 3), full_hamiltonian(h, w, 1),
        full_hamiltonian(h, w, 2), interaction_coupling(w, 3, 1));
    CHECK(resid < 1e-12);
  }

  SUBCASE("N=2, n=1 coupling is w itself") {
    const TwoBodyOperator w = random_pair(d, rng);
    const SparseMatrix coupling = interaction_coupling(w, 2, 1);
    CHECK((Matrix(coupling) - Matrix(w.matrix)).norm() < 1e-12);
    const double resid = split_interaction_residual(
        full_hamiltonian(h, w, 2), full_hamiltonian(h, w, 1),
        full_hamiltonian(h, w, 1), coupling);
    CHECK(resid < 1e-12);
  }

  SUBCASE("N=3, n=1 contact interaction on three sites") {
    LatticeSpec spec{3, 1.0, {0.0, 0.0, 0.0}};
    const TwoBodyOperator w =
        build_pair_interaction(spec, {InteractionProfile::Kind::contact, 0.7});
    const Matrix hl = Matrix::Identity(3, 3);
    const double resid = split_interaction_residual(
        full_hamiltonian(hl, w, 3), full_hamiltonian(hl, w, 1),
        full_hamiltonian(hl, w, 2), interaction_coupling(w, 3, 1));
    CHECK(resid <= 1e-10);
  }
}

TEST_CASE("embedding isometries are isometries") {
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    for (int d = 2; d <= 4; ++d) {
      const int n_max = stats == Statistics::fermion ? d : 3;
      for (int n = 0; n <= n_max; ++n) {
        const SparseMatrix u = embedding_isometry(sector_basis(d, n, stats));
        const Matrix gram = Matrix(u).adjoint() * Matrix(u);
        CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).norm() <
              1e-12);
      }
    }
  }
}

TEST_CASE("capacity limits raise capacity errors") {
  Matrix h = Matrix::Identity(9, 9);
  CHECK_THROWS_AS(
      lift_first_quantized(h, zero_interaction(9), 4, Statistics::boson),
      CapacityError);
  CHECK_THROWS_AS(
      second_quantize(h, zero_interaction(9), 5, Statistics::boson, 100),
      CapacityError);
}

TEST_CASE("compress_product matches the embedding adjoint") {
  auto rng = testsupport::rng(19);
  for (const Statistics stats : {Statistics::boson, Statistics::fermion}) {
    const int d = 3, n = 3;
    if (stats == Statistics::fermion && n > d) continue;
    const SectorBasis sector = sector_basis(d, n, stats);
    std::vector<Vector> factors;
    Vector kron_product = Vector::Ones(1);
    for (int k = 0; k < n; ++k) {
      factors.push_back(random_unit_vector(d, rng));
      Vector next(kron_product.size() * d);
      for (Eigen::Index i = 0; i < kron_product.size(); ++i) {
        for (int x = 0; x < d; ++x) {
          next(i * d + x) = kron_product(i) * factors.back()(x);
        }
      }
      kron_product = std::move(next);
    }
    const Vector direct = compress_product(sector, factors);
    const Vector via_embedding =
        Matrix(embedding_isometry(sector)).adjoint() * kron_product;
    CHECK((direct - via_embedding).norm() < 1e-12);
  }
}
