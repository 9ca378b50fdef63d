#include "fockrage/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

// lapacke.h (reached through Eigen's LAPACKE bindings) leaks the C99
// complex `I` macro, which collides with CLI11 template parameters
#ifdef I
#undef I
#endif
#include <CLI11.hpp>

namespace fockrage {

namespace {

struct FileSink {
  std::filesystem::path dir;
  std::string hash;
  std::string subcommand;
  bool want_csv = true;
  bool want_json = true;

  void stamp(CsvWriter& csv) const {
    csv.meta("tool", "fockrage");
    csv.meta("version", kVersion);
    csv.meta("subcommand", subcommand);
    csv.meta("config_hash", hash);
  }
  Json meta() const {
    return Json{{"tool", "fockrage"},
                {"version", kVersion},
                {"subcommand", subcommand},
                {"config_hash", hash}};
  }
  void write_csv(const std::string& name, const CsvWriter& csv) const {
    if (want_csv) atomic_write(dir / name, csv.str());
  }
  void write_json(const std::string& name, Json j) const {
    if (!want_json) return;
    j["meta"] = meta();
    atomic_write(dir / name, j.dump(2) + "\n");
  }
};

FileSink make_sink(const ExperimentConfig& config,
                   const std::filesystem::path& out_dir,
                   const std::string& subcommand) {
  FileSink sink;
  sink.dir = out_dir;
  sink.hash = config_hash(config);
  sink.subcommand = subcommand;
  sink.want_csv = false;
  sink.want_json = false;
  for (const std::string& f : config.output.formats) {
    if (f == "csv") sink.want_csv = true;
    if (f == "json") sink.want_json = true;
  }
  return sink;
}

int resolve_site(const Json& j, int length, const std::string& what) {
  if (j.is_string()) {
    if (j.get<std::string>() == "center") return length / 2;
    throw ConfigError("config: " + what + " must be an index or 'center'");
  }
  const int site = j.get<int>();
  if (site < 0 || site >= length) {
    throw ConfigError("config: " + what + " outside the lattice");
  }
  return site;
}

ParticleRecipe particle_from_json(const Json& j, int length) {
  ParticleRecipe recipe;
  const std::string kind = j.value("kind", "");
  if (kind == "bound") {
    recipe.kind = ParticleRecipe::Kind::bound_state;
    recipe.bound_index = j.value("index", 0);
  } else if (kind == "packet") {
    recipe.kind = ParticleRecipe::Kind::wavepacket;
    recipe.packet.center =
        j.contains("center") && j.at("center").is_string()
            ? length / 2
            : j.value("center", length / 2.0);
    recipe.packet.width = j.value("width", 3.0);
    recipe.packet.momentum = j.value("momentum", M_PI / 2.0);
  } else {
    throw ConfigError("config: particle kind must be 'bound' or 'packet'");
  }
  return recipe;
}

std::vector<double> times_from_json(const Json& j) {
  std::vector<double> times;
  if (j.is_array()) {
    for (const Json& t : j) times.push_back(t.get<double>());
  } else if (j.is_object()) {
    const double start = j.value("start", 0.0);
    const double stop = j.at("stop").get<double>();
    const double step = j.at("step").get<double>();
    if (!(step > 0.0) || stop < start) {
      throw ConfigError("config: bad time grid");
    }
    for (double t = start; t <= stop + 1e-12 * step; t += step) {
      times.push_back(t);
    }
  } else {
    throw ConfigError("config: times must be an array or {start, stop, step}");
  }
  if (times.empty()) throw ConfigError("config: empty time grid");
  return times;
}

double block_energy(const FockDensity& state, const FockOperator& op) {
  double energy = 0.0;
  for (int n = 0; n <= state.N; ++n) {
    energy += (op.blocks[n].matrix * state.blocks[n].matrix).trace().real();
  }
  return energy;
}

}  // namespace

ModelParts build_model(const ModelConfig& model) {
  ModelParts parts;
  parts.h_raw = build_lattice_one_body(model.lattice);
  parts.h = shift_spectrum(parts.h_raw, model.margin);
  parts.w = build_interaction(model);
  parts.hamiltonian = second_quantize(parts.h.matrix, parts.w, model.N,
                                      model.statistics, model.sector_cap);
  parts.spectra = eigendecompose_fock(parts.hamiltonian);
  parts.h_spectral = eigendecompose(parts.h.matrix);
  designate_lattice_clusters(parts.h_spectral, model.lattice, parts.h.shift);
  return parts;
}

FockDensity initial_state_from_json(const Json& recipe,
                                    const ModelParts& parts,
                                    const ModelConfig& model,
                                    std::mt19937_64& rng) {
  const std::string kind = recipe.value("kind", "");
  const int d = model.lattice.length;
  if (kind == "vacuum") {
    return vacuum_state(d, model.N, model.statistics);
  }
  if (kind == "eigenstate") {
    const int sector = recipe.value("sector", model.N);
    const int index = recipe.value("index", 0);
    if (sector < 0 || sector > model.N) {
      throw ConfigError("config: eigenstate sector out of range");
    }
    const SpectralData& s = parts.spectra[sector];
    if (index < 0 || index >= s.dim()) {
      throw ConfigError("config: eigenstate index out of range");
    }
    FockDensity state = zero_fock_density(d, model.N, model.statistics);
    const Vector phi = s.eigenvectors.col(index);
    state.blocks[sector].matrix = phi * phi.adjoint();
    return state;
  }
  if (kind == "product") {
    const Json& particles = recipe.at("particles");
    std::vector<Vector> factors;
    for (const Json& p : particles) {
      const ParticleRecipe r = particle_from_json(p, d);
      factors.push_back(one_particle_state(r, parts.h_spectral, d));
    }
    const int sector = static_cast<int>(factors.size());
    if (sector > model.N) {
      throw ConfigError("config: product recipe has more particles than N");
    }
    SectorBasis basis = sector_basis(d, sector, model.statistics);
    Vector psi = compress_product(basis, factors);
    const double norm = psi.norm();
    if (norm < 1e-12) {
      throw ConfigError("config: product recipe (anti)symmetrizes to zero");
    }
    psi /= norm;
    FockDensity state = zero_fock_density(d, model.N, model.statistics);
    state.blocks[sector].matrix = psi * psi.adjoint();
    return state;
  }
  if (kind == "random_pure" || kind == "random_mixed") {
    const int sector = recipe.value("sector", model.N);
    if (sector < 0 || sector > model.N) {
      throw ConfigError("config: random state sector out of range");
    }
    FockDensity state = zero_fock_density(d, model.N, model.statistics);
    const int dim = state.blocks[sector].sector.dim();
    if (kind == "random_pure") {
      const Vector psi = random_unit_vector(dim, rng);
      state.blocks[sector].matrix = psi * psi.adjoint();
    } else {
      state.blocks[sector].matrix = random_density(dim, rng);
    }
    return state;
  }
  throw ConfigError("config: unknown initial_state kind '" + kind + "'");
}

void run_spectrum(const ExperimentConfig& config,
                  const std::filesystem::path& out_dir) {
  const ModelParts parts = build_model(config.model);
  const FileSink sink = make_sink(config, out_dir, "spectrum");

  CsvWriter csv({"n", "index", "eigenvalue"});
  sink.stamp(csv);
  for (int n = 0; n <= config.model.N; ++n) {
    const SpectralData& s = parts.spectra[n];
    for (int i = 0; i < s.dim(); ++i) {
      csv.row({std::to_string(n), std::to_string(i),
               format_number(s.eigenvalues(i))});
    }
  }
  sink.write_csv("spectrum.csv", csv);

  Json clusters = Json::array();
  for (int n = 0; n <= config.model.N; ++n) {
    const SpectralData& s =
        n == 1 ? parts.h_spectral : parts.spectra[n];
    Json sector;
    sector["n"] = n;
    sector["cluster_tol"] = s.cluster_tol;
    Json list = Json::array();
    for (size_t c = 0; c < s.clusters.size(); ++c) {
      Json cluster;
      cluster["indices"] = s.clusters[c];
      cluster["lowest"] = s.eigenvalues(s.clusters[c].front());
      cluster["highest"] = s.eigenvalues(s.clusters[c].back());
      cluster["designation"] =
          s.designation[c] == SpectralKind::quasi_continuum
              ? "quasi_continuum"
              : "point";
      list.push_back(std::move(cluster));
    }
    sector["clusters"] = std::move(list);
    clusters.push_back(std::move(sector));
  }
  sink.write_json("clusters.json", Json{{"sectors", std::move(clusters)}});
}

void run_evolve(const ExperimentConfig& config,
                const std::filesystem::path& out_dir) {
  const ModelParts parts = build_model(config.model);
  const FileSink sink = make_sink(config, out_dir, "evolve");
  std::mt19937_64 rng(config.seed);
  const FockDensity initial = initial_state_from_json(
      config.run.value("initial_state", Json{{"kind", "vacuum"}}), parts,
      config.model, rng);
  const std::vector<double> times = times_from_json(config.run.at("times"));
  const Json window = config.run.value("window", Json::object());
  const int center = resolve_site(window.value("center", Json("center")),
                                  config.model.lattice.length, "window center");
  const int radius = window.value("radius", 8);

  const FockOperator free_op =
      second_quantize(parts.h.matrix, zero_interaction(config.model.lattice.length),
                      config.model.N, config.model.statistics,
                      config.model.sector_cap);

  CsvWriter csv({"T", "quantity_label", "value_re", "value_im"});
  sink.stamp(csv);
  double trace0 = initial.total_trace();
  double energy0 = block_energy(initial, parts.hamiltonian);
  double max_trace_drift = 0.0, max_energy_drift = 0.0;
  for (double t : times) {
    const FockDensity state = evolve(initial, parts.spectra, t);
    const std::string ts = format_number(t);
    csv.row({ts, "trace_total", format_number(state.total_trace()), "0"});
    const double energy = block_energy(state, parts.hamiltonian);
    csv.row({ts, "energy", format_number(energy), "0"});
    csv.row({ts, "energy_seminorm_free",
             format_number(energy_seminorm(state, free_op)), "0"});
    for (int n = 0; n <= state.N; ++n) {
      csv.row({ts, "trace_n" + std::to_string(n),
               format_number(state.blocks[n].trace()), "0"});
    }
    for (int n = 0; n <= state.N; ++n) {
      const DensityMatrix gamma = fock_reduce(state, n);
      const Matrix proj =
          sector_window_projector(gamma.sector, center, radius);
      const double wtrace = (proj * gamma.matrix * proj).trace().real();
      csv.row({ts, "window_trace_n" + std::to_string(n),
               format_number(wtrace), "0"});
    }
    max_trace_drift =
        std::max(max_trace_drift, std::abs(state.total_trace() - trace0));
    max_energy_drift = std::max(max_energy_drift, std::abs(energy - energy0));
  }
  sink.write_csv("evolve_series.csv", csv);
  sink.write_json("evolve_summary.json",
                  Json{{"max_trace_drift", max_trace_drift},
                       {"max_energy_drift", max_energy_drift},
                       {"times", times.size()}});
}

void run_ergodic(const ExperimentConfig& config,
                 const std::filesystem::path& out_dir) {
  const ModelParts parts = build_model(config.model);
  const FileSink sink = make_sink(config, out_dir, "ergodic");
  std::mt19937_64 rng(config.seed);
  const FockDensity initial = initial_state_from_json(
      config.run.at("initial_state"), parts, config.model, rng);
  std::vector<double> t_list;
  for (const Json& t : config.run.at("t_list")) t_list.push_back(t.get<double>());
  const Json window = config.run.value("window", Json::object());
  const int center = resolve_site(window.value("center", Json("center")),
                                  config.model.lattice.length, "window center");
  const int radius = window.value("radius", 8);
  const bool full_pairings = config.run.value("full_pairings", false);

  const ObservableDictionary dict =
      window_dictionary(config.model.lattice.length, config.model.N,
                        config.model.statistics, center, radius);
  const SweepTable sweep = ergodic_sweep(initial, parts.spectra, t_list, dict);

  CsvWriter csv({"T", "quantity_label", "value_re", "value_im"});
  sink.stamp(csv);
  for (size_t row = 0; row < sweep.t_values.size(); ++row) {
    const std::string ts = format_number(sweep.t_values[row]);
    csv.row({ts, "weak_star_gap", format_number(sweep.gaps[row]), "0"});
    for (size_t e = 0; e < sweep.labels.size(); ++e) {
      const bool diagonal =
          dict.entries[e].kind == DictionaryEntry::Kind::diagonal;
      if (!full_pairings && !diagonal) continue;
      csv.row({ts, sweep.labels[e], format_number(sweep.pairings[row][e]),
               "0"});
    }
  }
  sink.write_csv("ergodic_pairings.csv", csv);

  const double t_star = config.run.value("t_star", t_list.back());
  const bool dephase_candidate = config.run.value("dephase_candidate", true);
  const LimitReport limit =
      extract_limit(initial, parts.spectra, t_star, center, radius,
                    sweep.gaps, dephase_candidate);

  Json report;
  report["t_star"] = t_star;
  report["total_trace"] = limit.total_trace;
  report["gap_history"] = limit.gap_history;
  report["gap_nonincreasing"] = limit.gap_nonincreasing;
  Json blocks = Json::array();
  for (const BlockReport& b : limit.blocks) {
    Json jb;
    jb["sector"] = b.sector;
    jb["trace"] = b.trace;
    jb["min_eigenvalue"] = b.min_eigenvalue;
    jb["commutator_residual"] = b.commutator_residual;
    jb["offdiag_residual"] = b.offdiag_residual;
    Json alphas = Json::array();
    for (size_t j = 0; j < b.alphas.size(); ++j) {
      if (std::abs(b.alphas[j]) > 1e-12) {
        alphas.push_back(Json{{"index", j}, {"alpha", b.alphas[j]}});
      }
    }
    jb["alphas"] = std::move(alphas);
    blocks.push_back(std::move(jb));
  }
  report["blocks"] = std::move(blocks);
  if (config.model.N >= 1) {
    const int bound_index = config.run.value("bound_index", 0);
    const double tr1 = limit.blocks[1].trace;
    if (tr1 > 1e-12) {
      report["bound_overlap_fraction"] =
          limit.blocks[1].alphas[bound_index] / tr1;
    }
  }
  if (config.run.value("emit_candidate", false)) {
    report["candidate"] = fock_density_to_json(limit.candidate);
  }
  sink.write_json("limit_report.json", std::move(report));
}

void run_bbgky(const ExperimentConfig& config,
               const std::filesystem::path& out_dir) {
  const ModelParts parts = build_model(config.model);
  const FileSink sink = make_sink(config, out_dir, "bbgky");
  std::mt19937_64 rng(config.seed);
  const FockDensity initial = initial_state_from_json(
      config.run.at("initial_state"), parts, config.model, rng);
  const double T = config.run.at("T").get<double>();
  const double step = config.run.value("step", 1e-3);
  const double tolerance = config.run.value("tolerance", 1e-5);
  const bool dressed = config.run.value("dressed_residual", false);
  const std::string method_name = config.run.value("method", "rk4");
  HierarchyMethod method;
  if (method_name == "rk4") {
    method = HierarchyMethod::rk4;
  } else if (method_name == "picard") {
    method = HierarchyMethod::picard;
  } else {
    throw ConfigError("config: method must be 'rk4' or 'picard'");
  }

  const HierarchySetup setup =
      hierarchy_setup(parts.h.matrix, parts.w, config.model.N,
                      config.model.statistics, dressed, config.model.sector_cap);
  const ReducedSet r0 = reduce_all(initial);
  const HierarchyTrajectory traj =
      hierarchy_solve(r0, setup, T, step, method, tolerance);

  // consistency against the exact-evolution oracle on the same grid
  const HierarchyTrajectory exact =
      exact_reduced_trajectory(initial, parts.spectra, T, traj.step);
  double max_distance = 0.0;
  for (size_t k = 0; k < traj.times.size(); ++k) {
    for (int n = 0; n <= setup.N; ++n) {
      max_distance = std::max(
          max_distance,
          trace_norm_hermitian(traj.values[k].gammas[n].matrix -
                               exact.values[k].gammas[n].matrix));
    }
  }
  const ResidualReport residual = hierarchy_residual(exact, setup, false);

  Json summary;
  summary["method"] = method_name;
  summary["step"] = traj.step;
  summary["T"] = T;
  summary["error_estimate"] = traj.error_estimate;
  summary["trace_drift"] = traj.trace_drift;
  summary["hermiticity_drift"] = traj.hermiticity_drift;
  summary["max_trace_distance_to_exact"] = max_distance;
  summary["duhamel_residual_max"] = residual.max_defect;
  if (dressed) {
    const ResidualReport dressed_res = hierarchy_residual(exact, setup, true);
    summary["duhamel_residual_max_dressed"] = dressed_res.max_defect;
  }

  const int halving = config.run.value("halving_levels", 0);
  if (halving > 0) {
    CsvWriter conv({"step", "max_error", "observed_order"});
    sink.stamp(conv);
    Json orders = Json::array();
    double prev_err = -1.0;
    for (int k = halving - 1; k >= 0; --k) {
      const double step_k = step * std::pow(2.0, k);
      const HierarchyTrajectory t_k =
          hierarchy_solve(r0, setup, T, step_k, method, 1.0);
      const HierarchyTrajectory e_k =
          exact_reduced_trajectory(initial, parts.spectra, T, t_k.step);
      double err = 0.0;
      for (size_t i = 0; i < t_k.times.size(); ++i) {
        for (int n = 0; n <= setup.N; ++n) {
          err = std::max(err, trace_norm_hermitian(
                                  t_k.values[i].gammas[n].matrix -
                                  e_k.values[i].gammas[n].matrix));
        }
      }
      const double order =
          prev_err > 0.0 && err > 0.0 ? std::log2(prev_err / err) : 0.0;
      conv.row({format_number(step_k), format_number(err),
                format_number(order)});
      orders.push_back(Json{{"step", step_k},
                            {"max_error", err},
                            {"observed_order", order}});
      prev_err = err;
    }
    sink.write_csv("bbgky_convergence.csv", conv);
    summary["convergence"] = std::move(orders);
  }
  sink.write_json("bbgky_summary.json", std::move(summary));

  // trajectory export, subsampled under the entry cap
  const long cap = config.run.value("csv_cap", 200000L);
  long total_entries = 0;
  for (int n = 0; n <= setup.N; ++n) {
    const long dim = setup.sectors[n].dim();
    total_entries += dim * dim;
  }
  const long times_budget =
      std::max(1L, cap / std::max(total_entries, 1L));
  const long stride = std::max<long>(
      1, static_cast<long>(traj.times.size() - 1) / times_budget);
  CsvWriter tcsv({"t", "n", "p", "q", "re", "im"});
  sink.stamp(tcsv);
  for (size_t k = 0; k < traj.times.size(); k += stride) {
    for (int n = 0; n <= setup.N; ++n) {
      const Matrix& g = traj.values[k].gammas[n].matrix;
      for (Eigen::Index p = 0; p < g.rows(); ++p) {
        for (Eigen::Index q = 0; q < g.cols(); ++q) {
          tcsv.row({format_number(traj.times[k]), std::to_string(n),
                    std::to_string(p), std::to_string(q),
                    format_number(g(p, q).real()),
                    format_number(g(p, q).imag())});
        }
      }
    }
  }
  sink.write_csv("bbgky_trajectory.csv", tcsv);
}

void run_rage_classic(const ExperimentConfig& config,
                      const std::filesystem::path& out_dir) {
  const FileSink sink = make_sink(config, out_dir, "rage-classic");
  std::vector<int> lengths;
  for (const Json& l : config.run.at("lengths")) lengths.push_back(l.get<int>());
  if (lengths.empty()) throw ConfigError("config: rage-classic needs lengths");
  const double T = config.run.value("T", 1000.0);
  const bool with_quadrature = config.run.value("with_quadrature", true);
  const int qsteps = config.run.value("quadrature_steps", 20000);

  CsvWriter csv({"L", "T", "value", "value_quadrature"});
  sink.stamp(csv);
  Json rows = Json::array();
  double previous = -1.0;
  bool decreasing = true;
  for (int L : lengths) {
    LatticeSpec lattice;
    lattice.length = L;
    lattice.hopping = config.model.lattice.hopping;
    lattice.potential.assign(L, 0.0);
    if (config.run.contains("potential")) {
      const Json& pj = config.run.at("potential");
      if (pj.value("kind", "zero") == "delta") {
        const int site = resolve_site(pj.value("site", Json("center")), L,
                                      "potential site");
        lattice.potential[site] = pj.at("depth").get<double>();
      }
    }
    const OneBodyOperator h =
        shift_spectrum(build_lattice_one_body(lattice), config.model.margin);
    SpectralData spectral = eigendecompose(h.matrix);
    designate_lattice_clusters(spectral, lattice, h.shift);
    const std::vector<int> selection = quasi_continuum_clusters(spectral);

    const int x_site = resolve_site(
        config.run.value("vector", Json::object()).value("site", Json("center")),
        L, "vector site");
    Vector x = Vector::Zero(L);
    x(x_site) = 1.0;
    const int k_site = resolve_site(
        config.run.value("observable", Json::object()).value("site", Json("center")),
        L, "observable site");
    const Matrix k_obs = window_projector(
        L, k_site,
        config.run.value("observable", Json::object()).value("radius", 0));

    const RageStatistic stat =
        classic_rage_statistic(x, k_obs, spectral, selection, T);

    double quad = std::numeric_limits<double>::quiet_NaN();
    if (with_quadrature) {
      // direct trapezoid of ||K P_sel e^{-itH} x||^2
      std::vector<int> indices;
      for (int c : selection) {
        for (int idx : spectral.clusters[c]) indices.push_back(idx);
      }
      Matrix columns(L, static_cast<int>(indices.size()));
      Vector coeff(static_cast<int>(indices.size()));
      for (size_t j = 0; j < indices.size(); ++j) {
        columns.col(static_cast<int>(j)) =
            k_obs * spectral.eigenvectors.col(indices[j]);
        coeff(static_cast<int>(j)) =
            spectral.eigenvectors.col(indices[j]).adjoint() * x;
      }
      double acc = 0.0;
      const double delta = T / qsteps;
      for (int step_i = 0; step_i <= qsteps; ++step_i) {
        const double t = delta * step_i;
        Vector phased(coeff.size());
        for (Eigen::Index j = 0; j < coeff.size(); ++j) {
          phased(j) = coeff(j) * std::exp(Complex(
                                     0.0, -t * spectral.eigenvalues(indices[j])));
        }
        const double f = (columns * phased).squaredNorm();
        acc += (step_i == 0 || step_i == qsteps) ? 0.5 * f : f;
      }
      quad = acc * delta / T;
    }

    csv.row({std::to_string(L), format_number(T), format_number(stat.value),
             with_quadrature ? format_number(quad) : "nan"});
    rows.push_back(Json{{"L", L},
                        {"T", T},
                        {"value", stat.value},
                        {"value_quadrature", quad},
                        {"empty_selection", stat.empty_selection}});
    if (previous >= 0.0 && stat.value >= previous) decreasing = false;
    previous = stat.value;
  }
  sink.write_csv("rage_classic.csv", csv);
  sink.write_json("rage_classic.json",
                  Json{{"rows", std::move(rows)},
                       {"decreasing_in_L", decreasing}});
}

void run_rage_escape(const ExperimentConfig& config,
                     const std::filesystem::path& out_dir) {
  const ModelParts parts = build_model(config.model);
  const FileSink sink = make_sink(config, out_dir, "rage-escape");

  EscapeConfig escape;
  escape.lattice = config.model.lattice;
  escape.interaction = config.model.interaction;
  escape.statistics = config.model.statistics;
  escape.N = config.model.N;
  escape.margin = config.model.margin;
  for (const Json& p : config.run.at("particles")) {
    escape.particles.push_back(
        particle_from_json(p, config.model.lattice.length));
  }
  for (const Json& t : config.run.at("t_schedule")) {
    escape.t_schedule.push_back(t.get<double>());
  }
  const Json window = config.run.value("window", Json::object());
  escape.window_center = resolve_site(window.value("center", Json("center")),
                                      config.model.lattice.length,
                                      "window center");
  escape.window_radius = window.value("radius", 8);
  escape.validate();

  const FockDensity initial = escape_initial_state(escape, parts.h_spectral);
  const ObservableDictionary dict = window_dictionary(
      config.model.lattice.length, config.model.N, config.model.statistics,
      escape.window_center, escape.window_radius);
  const SweepTable sweep =
      ergodic_sweep(initial, parts.spectra, escape.t_schedule, dict);

  CsvWriter csv({"T", "quantity_label", "value_re", "value_im"});
  sink.stamp(csv);
  for (size_t row = 0; row < sweep.t_values.size(); ++row) {
    const std::string ts = format_number(sweep.t_values[row]);
    csv.row({ts, "weak_star_gap", format_number(sweep.gaps[row]), "0"});
    // windowed trace per sector: sum of the diagonal pairings
    std::vector<double> wtrace(config.model.N + 1, 0.0);
    for (size_t e = 0; e < dict.entries.size(); ++e) {
      if (dict.entries[e].kind == DictionaryEntry::Kind::diagonal) {
        wtrace[dict.entries[e].sector] += sweep.pairings[row][e];
      }
    }
    for (int n = 0; n <= config.model.N; ++n) {
      csv.row({ts, "window_trace_n" + std::to_string(n),
               format_number(wtrace[n]), "0"});
    }
  }
  sink.write_csv("escape_sweep.csv", csv);

  const double t_star =
      config.run.value("t_star", escape.t_schedule.back());
  const bool dephase_candidate = config.run.value("dephase_candidate", true);
  const LimitReport limit =
      extract_limit(initial, parts.spectra, t_star, escape.window_center,
                    escape.window_radius, sweep.gaps, dephase_candidate);

  Json report;
  report["t_star"] = t_star;
  report["t_max_guard"] = escape.t_max_guard();
  report["total_trace"] = limit.total_trace;
  report["gap_history"] = limit.gap_history;
  report["gap_nonincreasing"] = limit.gap_nonincreasing;
  Json blocks = Json::array();
  for (const BlockReport& b : limit.blocks) {
    Json jb;
    jb["sector"] = b.sector;
    jb["trace"] = b.trace;
    jb["min_eigenvalue"] = b.min_eigenvalue;
    jb["commutator_residual"] = b.commutator_residual;
    jb["offdiag_residual"] = b.offdiag_residual;
    blocks.push_back(std::move(jb));
  }
  report["blocks"] = std::move(blocks);

  const int bound_index = config.run.value("bound_index", 0);
  if (config.model.N >= 1 && limit.blocks[1].trace > 1e-12) {
    report["bound_overlap_fraction"] =
        limit.blocks[1].alphas[bound_index] / limit.blocks[1].trace;
  }

  try {
    const std::vector<AnsatzTerm> terms = ansatz_from_recipe(
        escape, parts.h_spectral, parts.spectra,
        [&] {
          std::vector<SectorBasis> sectors;
          for (const ManyBodyOperator& b : parts.hamiltonian.blocks) {
            sectors.push_back(b.sector);
          }
          return sectors;
        }());
    const FockDensity reference = scattering_reference(
        terms, parts.spectra,
        [&] {
          std::vector<SectorBasis> sectors;
          for (const ManyBodyOperator& b : parts.hamiltonian.blocks) {
            sectors.push_back(b.sector);
          }
          return sectors;
        }());
    Json ref = Json::array();
    for (int n = 0; n <= config.model.N; ++n) {
      ref.push_back(Json{
          {"sector", n},
          {"trace", reference.blocks[n].trace()},
          {"distance_to_candidate",
           (reference.blocks[n].matrix - limit.candidate.blocks[n].matrix)
               .norm()}});
    }
    report["scattering_reference"] = std::move(ref);
  } catch (const InputError& e) {
    report["scattering_reference_unsupported"] = e.what();
  }
  if (config.run.value("emit_candidate", false)) {
    report["candidate"] = fock_density_to_json(limit.candidate);
  }
  sink.write_json("escape_report.json", std::move(report));
}

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const InputError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const CapacityError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

using RunFn = void (*)(const ExperimentConfig&, const std::filesystem::path&);

RunFn runner_for(const std::string& subcommand) {
  if (subcommand == "spectrum") return run_spectrum;
  if (subcommand == "evolve") return run_evolve;
  if (subcommand == "ergodic") return run_ergodic;
  if (subcommand == "bbgky") return run_bbgky;
  if (subcommand == "rage-classic") return run_rage_classic;
  if (subcommand == "rage-escape") return run_rage_escape;
  return nullptr;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"fockrage: truncated-Fock-space ergodic-limit experiments"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string out_flag;
  int workers = 1;
  std::int64_t seed_flag = -1;

  const std::vector<std::string> names = {"spectrum",     "evolve",
                                          "ergodic",      "bbgky",
                                          "rage-classic", "rage-escape"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_paths, "experiment JSON file(s)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_flag, "output directory");
    sub->add_option("--workers", workers, "parallel jobs across configs");
    sub->add_option("--seed", seed_flag, "override the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  RunFn fn = runner_for(subcommand);

  const char* env_out = std::getenv("FOCKRAGE_OUT");

  std::atomic<int> worst{0};
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  const int pool = std::max(1, std::min<int>(workers, config_paths.size()));

  auto work = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= config_paths.size()) break;
      const std::string& path = config_paths[i];
      try {
        ExperimentConfig config = load_config(path);
        if (seed_flag >= 0) config.seed = static_cast<std::uint64_t>(seed_flag);
        std::filesystem::path base;
        if (env_out && *env_out) {
          base = env_out;
        } else if (!out_flag.empty()) {
          base = out_flag;
        } else {
          base = config.output.directory;
        }
        std::filesystem::path out_dir = base;
        if (config_paths.size() > 1) {
          out_dir /= std::filesystem::path(path).stem();
        }
        fn(config, out_dir);
      } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        int expected = worst.load();
        while (expected < code &&
               !worst.compare_exchange_weak(expected, code)) {
        }
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "error [" << path << "]: " << e.what() << "\n";
      }
    }
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < pool; ++i) threads.emplace_back(work);
  for (std::thread& t : threads) t.join();
  return worst.load();
}

}  // namespace fockrage
