#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include "fockrage/rage.hpp"

using namespace fockrage;

namespace {

struct SmallModel {
  LatticeSpec lattice;
  OneBodyOperator h;
  SpectralData h_spectral;
  FockOperator hamiltonian;
  std::vector<SpectralData> spectra;
  std::vector<SectorBasis> sectors;
};

SmallModel make_model(int length, double well_depth, double g, int N,
                      Statistics stats) {
  SmallModel m;
  m.lattice.length = length;
  m.lattice.hopping = 1.0;
  m.lattice.potential.assign(length, 0.0);
  m.lattice.potential[length / 2] = well_depth;
  m.h = shift_spectrum(build_lattice_one_body(m.lattice), 0.1);
  m.h_spectral = eigendecompose(m.h.matrix);
  designate_lattice_clusters(m.h_spectral, m.lattice, m.h.shift);
  const TwoBodyOperator w =
      g == 0.0 ? zero_interaction(length)
               : build_pair_interaction(
                     m.lattice, {InteractionProfile::Kind::contact, g});
  m.hamiltonian = second_quantize(m.h.matrix, w, N, stats);
  m.spectra = eigendecompose_fock(m.hamiltonian);
  for (const ManyBodyOperator& b : m.hamiltonian.blocks) {
    m.sectors.push_back(b.sector);
  }
  return m;
}

EscapeConfig escape_config(const SmallModel& m, int N) {
  EscapeConfig config;
  config.lattice = m.lattice;
  config.interaction = {InteractionProfile::Kind::contact, 0.5};
  config.statistics = Statistics::boson;
  config.N = N;
  config.margin = 0.1;
  ParticleRecipe bound;
  bound.kind = ParticleRecipe::Kind::bound_state;
  bound.bound_index = 0;
  ParticleRecipe packet;
  packet.kind = ParticleRecipe::Kind::wavepacket;
  packet.packet = {m.lattice.length / 2.0, 2.0, M_PI / 2.0};
  config.particles = {bound, packet};
  config.t_schedule = {1.0, 2.0, 4.0};
  config.window_center = m.lattice.length / 2;
  config.window_radius = 5;
  return config;
}

}  // namespace

TEST_CASE("escape guard rejects schedules past the reflection time") {
  const SmallModel m = make_model(24, -4.0, 0.5, 2, Statistics::boson);
  EscapeConfig config = escape_config(m, 2);
  CHECK(config.t_max_guard() == doctest::Approx(24.0 / 4.0));
  CHECK_NOTHROW(config.validate());
  config.t_schedule = {2.0, 100.0};
  CHECK_THROWS_AS(config.validate(), InputError);
  config.t_schedule = {2.0, 1.0};
  CHECK_THROWS_AS(config.validate(), InputError);
}

TEST_CASE("one-particle recipes produce normalized states") {
  const SmallModel m = make_model(24, -4.0, 0.0, 1, Statistics::boson);
  ParticleRecipe bound;
  bound.kind = ParticleRecipe::Kind::bound_state;
  bound.bound_index = 0;
  const Vector phi = one_particle_state(bound, m.h_spectral, 24);
  CHECK(phi.norm() == doctest::Approx(1.0));
  // the bound state of the well is localized at the center
  CHECK(std::norm(phi(12)) > 0.5);

  ParticleRecipe packet;
  packet.kind = ParticleRecipe::Kind::wavepacket;
  packet.packet = {6.0, 2.0, 1.0};
  const Vector psi = one_particle_state(packet, m.h_spectral, 24);
  CHECK(psi.norm() == doctest::Approx(1.0));
  CHECK(std::abs(psi(6)) > std::abs(psi(17)));

  ParticleRecipe bad = bound;
  bad.bound_index = 99;
  CHECK_THROWS_AS(one_particle_state(bad, m.h_spectral, 24), InputError);
}

TEST_CASE("escape initial state is a pure top-sector state") {
  const SmallModel m = make_model(24, -4.0, 0.5, 2, Statistics::boson);
  const EscapeConfig config = escape_config(m, 2);
  const FockDensity state = escape_initial_state(config, m.h_spectral);
  state.validate();
  CHECK(state.blocks[2].trace() == doctest::Approx(1.0));
  CHECK(state.blocks[1].matrix.norm() == 0.0);
  CHECK(state.blocks[0].matrix(0, 0) == Complex(0.0, 0.0));
}

TEST_CASE("ergodic sweep: eigenstates give T-independent pairings") {
  const SmallModel m = make_model(12, -3.0, 0.4, 2, Statistics::boson);
  const Vector phi = m.spectra[2].eigenvectors.col(0);
  FockDensity state = zero_fock_density(12, 2, Statistics::boson);
  state.blocks[2].matrix = phi * phi.adjoint();
  const ObservableDictionary dict =
      window_dictionary(12, 2, Statistics::boson, 6, 3);
  const SweepTable table =
      ergodic_sweep(state, m.spectra, {1.0, 5.0, 25.0}, dict);
  for (size_t e = 0; e < table.labels.size(); ++e) {
    for (size_t row = 1; row < table.t_values.size(); ++row) {
      CHECK(std::abs(table.pairings[row][e] - table.pairings[0][e]) < 1e-10);
    }
  }
  for (double gap : table.gaps) CHECK(gap < 1e-10);
  CHECK_THROWS_AS(ergodic_sweep(state, m.spectra, {2.0, 1.0}, dict),
                  InputError);
}

TEST_CASE("sweep gaps to the dephased state vanish like 1/T") {
  auto rng = testsupport::rng(81);
  const SmallModel m = make_model(8, -2.0, 0.6, 2, Statistics::boson);
  FockDensity state = zero_fock_density(8, 2, Statistics::boson);
  state.blocks[2].matrix =
      random_density(state.blocks[2].sector.dim(), rng);
  const ObservableDictionary dict =
      window_dictionary(8, 2, Statistics::boson, 4, 4);
  const FockDensity limit = dephase(state, m.spectra);
  const ReducedSet limit_reduced = reduce_all(limit);
  double previous = std::numeric_limits<double>::infinity();
  for (double t : {50.0, 400.0, 3200.0}) {
    const double gap = weak_star_gap(
        reduce_all(ergodic_mean(state, m.spectra, t)), limit_reduced, dict);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("extract_limit without escape reproduces the dephased state") {
  auto rng = testsupport::rng(82);
  const SmallModel m = make_model(8, -5.0, 0.5, 2, Statistics::boson);
  FockDensity state = zero_fock_density(8, 2, Statistics::boson);
  state.blocks[2].matrix =
      random_density(state.blocks[2].sector.dim(), rng);
  // window covering the whole lattice: nothing is compressed away
  const LimitReport report =
      extract_limit(state, m.spectra, 40.0, 4, 8, {}, true);
  const FockDensity expected = dephase(state, m.spectra);
  for (int n = 0; n <= 2; ++n) {
    CHECK((report.candidate.blocks[n].matrix - expected.blocks[n].matrix)
              .norm() <= 1e-8);
    CHECK(report.blocks[n].commutator_residual <= 1e-8);
  }
  CHECK(report.total_trace == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("extract_limit on the vacuum returns the vacuum") {
  const SmallModel m = make_model(8, -2.0, 0.0, 2, Statistics::boson);
  const FockDensity vac = vacuum_state(8, 2, Statistics::boson);
  const LimitReport report = extract_limit(vac, m.spectra, 10.0, 4, 2, {});
  CHECK(report.candidate.blocks[0].matrix(0, 0).real() ==
        doctest::Approx(1.0));
  CHECK(report.blocks[1].trace == doctest::Approx(0.0));
  CHECK(report.blocks[2].trace == doctest::Approx(0.0));
  CHECK(report.total_trace == doctest::Approx(1.0));
}

TEST_CASE("windowed block traces grow with the window radius") {
  const SmallModel m = make_model(24, -4.0, 0.5, 2, Statistics::boson);
  const EscapeConfig config = escape_config(m, 2);
  const FockDensity state = escape_initial_state(config, m.h_spectral);
  double previous_g2 = -1.0;
  for (int radius : {2, 5, 8, 11}) {
    const LimitReport report =
        extract_limit(state, m.spectra, 4.0, 12, radius, {});
    // compression monotonicity: reported top-block trace never decreases
    CHECK(report.blocks[2].trace >= previous_g2 - 1e-12);
    previous_g2 = report.blocks[2].trace;
    CHECK(report.total_trace == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("scattering reference assembles the predicted blocks") {
  const SmallModel m = make_model(10, -3.0, 0.0, 2, Statistics::boson);

  SUBCASE("pure bound pair") {
    const std::vector<AnsatzTerm> terms = {{2, 0, 1.0}};
    const FockDensity ref = scattering_reference(terms, m.spectra, m.sectors);
    const Vector phi = m.spectra[2].eigenvectors.col(0);
    CHECK((ref.blocks[2].matrix - phi * phi.adjoint()).norm() < 1e-12);
    CHECK(ref.total_trace() == doctest::Approx(1.0));
  }

  SUBCASE("all particles escape") {
    const std::vector<AnsatzTerm> terms = {{0, 0, 1.0}};
    const FockDensity ref = scattering_reference(terms, m.spectra, m.sectors);
    CHECK(ref.blocks[0].matrix(0, 0).real() == doctest::Approx(1.0));
    CHECK(ref.blocks[1].matrix.norm() == 0.0);
  }

  SUBCASE("half bound, half outgoing") {
    const std::vector<AnsatzTerm> terms = {{1, 0, 0.5}, {0, 0, 0.5}};
    const FockDensity ref = scattering_reference(terms, m.spectra, m.sectors);
    CHECK(ref.blocks[0].matrix(0, 0).real() == doctest::Approx(0.5));
    CHECK(ref.blocks[1].trace() == doctest::Approx(0.5));
  }

  SUBCASE("weights must sum to one") {
    CHECK_THROWS_AS(
        scattering_reference({{0, 0, 0.25}}, m.spectra, m.sectors),
        InputError);
  }
}

TEST_CASE("ansatz derivation from recipes") {
  const SmallModel m = make_model(12, -4.0, 0.0, 2, Statistics::boson);
  EscapeConfig config = escape_config(m, 2);
  config.interaction = {InteractionProfile::Kind::contact, 0.0};
  config.t_schedule = {1.0, 2.0};  // within the 12-site guard

  SUBCASE("bound plus packet maps to the one-body bound term") {
    const std::vector<AnsatzTerm> terms =
        ansatz_from_recipe(config, m.h_spectral, m.spectra, m.sectors);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].sector == 1);
    CHECK(terms[0].eigenindex == 0);
    CHECK(terms[0].weight == doctest::Approx(1.0));
  }

  SUBCASE("all packets map to the vacuum") {
    config.particles[0] = config.particles[1];
    const std::vector<AnsatzTerm> terms =
        ansatz_from_recipe(config, m.h_spectral, m.spectra, m.sectors);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].sector == 0);
  }

  SUBCASE("free bound pair maps to an eigenstate of H_2") {
    ParticleRecipe b0, b1;
    b0.kind = ParticleRecipe::Kind::bound_state;
    b0.bound_index = 0;
    b1.kind = ParticleRecipe::Kind::bound_state;
    b1.bound_index = 1;
    config.particles = {b0, b1};
    const std::vector<AnsatzTerm> terms =
        ansatz_from_recipe(config, m.h_spectral, m.spectra, m.sectors);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].sector == 2);
  }
}

TEST_CASE("escape smoke run: trace bookkeeping and bound-state dominance") {
  const SmallModel m = make_model(32, -4.0, 0.5, 2, Statistics::boson);
  EscapeConfig config = escape_config(m, 2);
  config.window_center = 16;
  config.window_radius = 6;
  config.t_schedule = {2.0, 4.0, 8.0};
  const FockDensity state = escape_initial_state(config, m.h_spectral);
  const ObservableDictionary dict = window_dictionary(
      32, 2, Statistics::boson, config.window_center, config.window_radius);
  const SweepTable sweep =
      ergodic_sweep(state, m.spectra, config.t_schedule, dict);
  const LimitReport report = extract_limit(
      state, m.spectra, config.t_schedule.back(), config.window_center,
      config.window_radius, sweep.gaps, true);

  CHECK(report.total_trace == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.gap_history.size() == 3);
  // dephased candidate commutes with the block Hamiltonians
  for (const BlockReport& b : report.blocks) {
    CHECK(b.commutator_residual <= 1e-8);
  }
  // the one-particle block is dominated by the bound state
  const double tr1 = report.blocks[1].trace;
  REQUIRE(tr1 > 0.0);
  CHECK(report.blocks[1].alphas[0] / tr1 > 0.5);
}
