#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fminimal/ambient.hpp"
#include "fminimal/catalog.hpp"
#include "fminimal/conformal.hpp"
#include "fminimal/diagnostics.hpp"
#include "fminimal/errors.hpp"
#include "fminimal/expression.hpp"
#include "fminimal/mesh.hpp"
#include "fminimal/report.hpp"
#include "fminimal/spectral.hpp"

namespace fminimal {

/// Bad or unresolvable run configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_solver = 3 };

struct RunConfig {
  std::string command;
  std::string surface = "sphere";
  std::string off_path;
  int n = 2;
  int k = 1;
  std::vector<double> radii;
  std::optional<double> truncation;
  int subdivision = 4;
  int count = 6;
  double tol_zero = 0.0;
  std::string method = "auto";
  std::vector<int> levels{2, 3, 4};
  std::vector<double> truncations;
  std::string weight = "gaussian";
  std::string expr;
  int samples = 50;
  std::uint64_t seed = 20170101;
  double sample_radius = 3.0;
  double kappa = 0.5;
  std::optional<int> genus;
  std::vector<double> growth_radii{1.0, 2.0, 4.0, 8.0};
  std::string output;
  std::string format = "json";
  bool timing = false;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"index", "residual", "identities", "bounds", "refine-study", "exhaustion"};
  return names;
}

namespace detail {

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class T>
Json to_json(const std::vector<T>& v) {
  Json a = Json::array();
  for (const T& x : v) a.push_back(x);
  return a;
}

inline Json config_echo(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  if (c.off_path.empty()) j["surface"] = c.surface;
  else j["off"] = c.off_path;
  j["n"] = c.n;
  j["k"] = c.k;
  if (!c.radii.empty()) j["radii"] = to_json(c.radii);
  if (c.truncation) j["truncation"] = *c.truncation;
  j["subdivision"] = c.subdivision;
  j["count"] = c.count;
  j["tol_zero"] = c.tol_zero;
  j["method"] = c.method;
  j["levels"] = to_json(c.levels);
  if (!c.truncations.empty()) j["truncations"] = to_json(c.truncations);
  j["weight"] = c.weight;
  if (!c.expr.empty()) j["expr"] = c.expr;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["sample_radius"] = c.sample_radius;
  j["kappa"] = c.kappa;
  if (c.genus) j["genus"] = *c.genus;
  j["growth_radii"] = to_json(c.growth_radii);
  j["format"] = c.format;
  return j;
}

inline Json mesh_stats(const TriMesh& m) {
  Json j;
  j["vertices"] = m.num_vertices();
  j["faces"] = m.num_faces();
  j["edges"] = m.num_edges();
  j["closed"] = m.closed();
  j["euler_characteristic"] = m.euler_characteristic();
  return j;
}

inline Json spectrum_json(const SpectrumResult& s) {
  Json j;
  j["method"] = s.method;
  j["eigenvalues"] = to_json(s.eigenvalues);
  j["f_index"] = s.f_index;
  j["tol_zero"] = s.tol_zero;
  j["residuals"] = to_json(s.residuals);
  j["index_saturated"] = s.index_saturated;
  j["truncated"] = s.truncated;
  return j;
}

inline Table spectrum_table(const SpectrumResult& s) {
  Table t{{"k", "eigenvalue", "residual"}, {}};
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) t.rows.push_back({i, s.eigenvalues[i], s.residuals[i]});
  return t;
}

// A resolved surface: catalog entry, OFF mesh, or both (entry meshes).
struct Surface {
  std::optional<CatalogEntry> entry;
  std::optional<TriMesh> off_mesh;
};

}  // namespace detail

/// Validates the configuration and resolves the weight (exit code 2 on failure).
inline WeightedAmbient resolve_weight(const RunConfig& c) {
  const int dim = c.n + 1;
  try {
    if (c.weight == "gaussian") return gaussian_soliton(dim);
    if (c.weight == "zero") return zero_weight(dim);
    if (c.weight == "custom") {
      if (c.expr.empty()) throw ConfigError("--weight custom needs --expr");
      return expression_weight(c.expr, dim);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
  throw ConfigError("unknown weight '" + c.weight + "' (expected gaussian, zero or custom)");
}

inline detail::Surface resolve_surface(const RunConfig& c) {
  detail::Surface s;
  try {
    if (!c.off_path.empty()) {
      if (c.n != 2) throw ConfigError("OFF meshes are surfaces in R^3 (n = 2)");
      s.off_mesh = read_off_file(c.off_path);
      return s;
    }
    CatalogParams p;
    p.n = c.n;
    p.k = c.k;
    if (c.surface == "torus" && !c.radii.empty()) {
      if (c.radii.size() != 2) throw ConfigError("--radii expects two values: major,minor");
      p.major = c.radii[0];
      p.minor = c.radii[1];
    }
    if (c.truncation) p.truncation = *c.truncation;
    else if (!c.truncations.empty()) p.truncation = *std::max_element(c.truncations.begin(), c.truncations.end());
    s.entry = make_entry(c.surface, p);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("surface: ") + e.what());
  }
  return s;
}

inline void validate(const RunConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end()) throw ConfigError("unknown command '" + c.command + "'");
  if (c.format != "json" && c.format != "csv") throw ConfigError("--format must be json or csv");
  if (c.method != "auto" && c.method != "dense" && c.method != "iterative" && c.method != "separable")
    throw ConfigError("--method must be auto, dense, iterative or separable");
  if (c.count < 1) throw ConfigError("--count must be at least 1");
  if (c.subdivision < 0 || c.subdivision > 8) throw ConfigError("--subdivision must lie in [0, 8]");
  if (c.samples < 1) throw ConfigError("--samples must be at least 1");
  if (c.tol_zero < 0.0) throw ConfigError("--tol-zero must be nonnegative");
  for (int l : c.levels)
    if (l < 0 || l > 8) throw ConfigError("--levels entries must lie in [0, 8]");
}

namespace detail {

inline SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol_zero = c.tol_zero;
  if (c.method == "dense") o.dense_threshold = std::numeric_limits<Eigen::Index>::max();
  if (c.method == "iterative") o.dense_threshold = 0;
  return o;
}

inline Json solver_provenance(const SolverOptions& o) {
  Json j;
  j["dense_threshold"] = o.dense_threshold == std::numeric_limits<Eigen::Index>::max() ? Json(nullptr) : Json(o.dense_threshold);
  j["residual_target"] = o.residual_target;
  j["tol_zero_rule"] = o.tol_zero > 0.0 ? "fixed" : "max(1e-6, 1e-3*|lambda_min|)";
  return j;
}

inline TriMesh surface_mesh(const Surface& s, int level) {
  if (s.off_mesh) return *s.off_mesh;
  return s.entry->mesh(level);
}

inline bool has_mesh(const Surface& s) { return s.off_mesh || (s.entry && s.entry->has_mesh()); }

struct IndexRun {
  SpectrumResult spectrum;
  std::optional<TriMesh> mesh;
  std::size_t free_dofs = 0;
};

inline IndexRun index_run(const RunConfig& c, const Surface& s, const WeightedAmbient& space, int level) {
  IndexRun run;
  const SolverOptions opt = solver_options(c);
  const bool separable = c.method == "separable" || (c.method == "auto" && !has_mesh(s));
  if (separable) {
    if (!s.entry || !s.entry->separable) throw ConfigError("surface has no separable form; use a mesh method");
    if (!space.is_gaussian()) throw ConfigError("the separable solver assumes the Gaussian soliton");
    run.spectrum = separable_spectrum(*s.entry->separable, c.count, opt);
    return run;
  }
  if (!has_mesh(s)) throw ConfigError("surface has no triangulation for n = " + std::to_string(c.n));
  run.mesh = surface_mesh(s, level);
  QuadraticFormSystem sys;
  try {
    sys = assemble(*run.mesh, space);
  } catch (const UnsupportedDimension& e) {
    throw ConfigError(e.what());
  }
  run.free_dofs = static_cast<std::size_t>(sys.size());
  if (c.count > sys.size()) throw ConfigError("--count exceeds the free degrees of freedom");
  run.spectrum = solve_spectrum(sys, c.count, opt);
  return run;
}

inline Json exact_json(const Surface& s) {
  Json j = Json::object();
  if (!s.entry) return j;
  if (s.entry->exact_index) j["exact_index"] = *s.entry->exact_index;
  if (s.entry->exact_low_spectrum) j["exact_low_spectrum"] = to_json(*s.entry->exact_low_spectrum);
  return j;
}

inline Report cmd_index(const RunConfig& c, const Surface& s, const WeightedAmbient& space, Json& prov) {
  const IndexRun run = index_run(c, s, space, c.subdivision);
  Report r;
  r.document = spectrum_json(run.spectrum);
  r.document.update(exact_json(s));
  if (run.mesh) {
    prov["mesh"] = mesh_stats(*run.mesh);
    prov["mesh"]["free_dofs"] = run.free_dofs;
  }
  r.table = spectrum_table(run.spectrum);
  return r;
}

inline Report cmd_residual(const RunConfig& c, const Surface& s, const WeightedAmbient& space, Json& prov) {
  if (!space.is_gaussian()) throw ConfigError("shrinker residuals are defined in the Gaussian soliton");
  Report r;
  r.table.header = {"source", "sup_residual"};
  if (s.entry && s.entry->patch) {
    const double v = shrinker_residual(*s.entry->patch, space);
    r.document["patch_residual"] = v;
    r.table.rows.push_back({"patch", v});
  }
  if (has_mesh(s)) {
    const TriMesh m = surface_mesh(s, c.subdivision);
    const double v = shrinker_residual(m, space);
    r.document["mesh_residual"] = v;
    r.table.rows.push_back({"mesh", v});
    prov["mesh"] = mesh_stats(m);
  }
  return r;
}

inline Report cmd_identities(const RunConfig& c, const WeightedAmbient& space) {
  AuditOptions opt;
  opt.samples = c.samples;
  opt.seed = c.seed;
  opt.radius = c.sample_radius;
  const std::vector<ConformalReport> reports = audit_identities(space, opt);
  Report r;
  Json list = Json::array();
  r.table.header = {"identity", "sample", "closed", "oracle", "abs_err", "rel_err"};
  double worst = 0.0;
  bool warned = false;
  for (const auto& rep : reports) {
    Json j;
    j["identity"] = rep.identity_name;
    j["n"] = space.n();
    j["weight"] = space.name();
    Json samples = Json::array();
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
      const ConformalSample& smp = rep.samples[i];
      Json e;
      e["x"] = to_json(smp.point);
      e["closed"] = smp.closed_form;
      e["oracle"] = smp.oracle;
      e["abs_err"] = smp.abs_err;
      e["rel_err"] = smp.rel_err;
      samples.push_back(std::move(e));
      r.table.rows.push_back({rep.identity_name, i, smp.closed_form, smp.oracle, smp.abs_err, smp.rel_err});
    }
    j["samples"] = std::move(samples);
    j["max_rel_err"] = rep.max_rel_err;
    j["accuracy_warning"] = rep.accuracy_warning;
    worst = std::max(worst, rep.max_rel_err);
    warned = warned || rep.accuracy_warning;
    list.push_back(std::move(j));
  }
  r.document["reports"] = std::move(list);
  r.document["max_rel_err"] = worst;
  r.document["accuracy_warning"] = warned;
  return r;
}

template <class Fn>
Json guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const PreconditionError& e) {
    return Json{{"skipped", e.what()}};
  } catch (const UnsupportedError& e) {
    return Json{{"skipped", e.what()}};
  }
}

inline Report cmd_bounds(const RunConfig& c, const Surface& s, const WeightedAmbient& space, Json& prov) {
  Report r;
  r.table.header = {"quantity", "value"};
  std::optional<TriMesh> mesh;
  const bool use_patch = s.entry && s.entry->patch;
  if (!use_patch) {
    mesh = surface_mesh(s, c.subdivision);
    prov["mesh"] = mesh_stats(*mesh);
  }
  const std::vector<Vector> centers{Vector::Zero(c.n + 1)};
  r.document["area_bound"] = guarded([&] {
    const AreaBoundRecord rec = use_patch ? area_bound_check(*s.entry->patch, space, c.kappa, c.genus)
                                          : area_bound_check(*mesh, space, c.kappa, c.genus);
    Json j;
    j["lhs"] = rec.lhs;
    j["rhs"] = rec.rhs;
    j["holds"] = rec.holds;
    j["genus"] = rec.genus;
    j["min_weight"] = rec.min_weight;
    j["kappa"] = c.kappa;
    r.table.rows.push_back({"area_bound_lhs", rec.lhs});
    r.table.rows.push_back({"area_bound_rhs", rec.rhs});
    return j;
  });
  const IndexBoundIntegrals ib = use_patch ? index_bound_integrand(*s.entry->patch, space) : index_bound_integrand(*mesh, space);
  r.document["index_bound_integrals"] = {{"selfshrinker_integral", ib.selfshrinker_integral},
                                         {"general_integral", ib.general_integral}};
  r.table.rows.push_back({"selfshrinker_integral", ib.selfshrinker_integral});
  r.table.rows.push_back({"general_integral", ib.general_integral});
  r.document["volume_growth"] = guarded([&] {
    const double ratio = use_patch ? volume_growth_ratio(*s.entry->patch, centers, c.growth_radii)
                                   : volume_growth_ratio(*mesh, centers, c.growth_radii);
    r.table.rows.push_back({"volume_growth_ratio", ratio});
    return Json{{"ratio", ratio}, {"radii", to_json(c.growth_radii)}};
  });
  return r;
}

inline double max_spectrum_error(const std::vector<double>& got, const std::vector<double>& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < std::min(got.size(), exact.size()); ++i) err = std::max(err, std::abs(got[i] - exact[i]));
  return err;
}

inline Report cmd_refine(const RunConfig& c, const Surface& s, const WeightedAmbient& space, Json& prov) {
  if (!has_mesh(s) || s.off_mesh) throw ConfigError("refine-study needs a catalog surface with a triangulation");
  Report r;
  r.table.header = {"level", "vertices", "f_index", "max_error", "error_ratio"};
  Json rows = Json::array();
  Json meshes = Json::array();
  std::optional<double> prev;
  const std::vector<double> exact =
      s.entry->exact_low_spectrum ? *s.entry->exact_low_spectrum : std::vector<double>{};
  for (int level : c.levels) {
    const IndexRun run = index_run(c, s, space, level);
    Json j;
    j["level"] = level;
    j["spectrum"] = spectrum_json(run.spectrum);
    Json ratio = nullptr;
    Json err = nullptr;
    if (!exact.empty() && space.is_gaussian()) {
      const double e = max_spectrum_error(run.spectrum.eigenvalues, exact);
      err = e;
      if (prev && e > 0.0) ratio = *prev / e;
      prev = e;
    }
    j["max_error"] = err;
    j["error_ratio"] = ratio;
    rows.push_back(j);
    meshes.push_back(mesh_stats(*run.mesh));
    r.table.rows.push_back({level, run.mesh->num_vertices(), run.spectrum.f_index, err, ratio});
  }
  r.document["levels"] = std::move(rows);
  r.document.update(exact_json(s));
  prov["meshes"] = std::move(meshes);
  return r;
}

inline Report cmd_exhaustion(const RunConfig& c, const Surface& s, const WeightedAmbient& space, Json& prov) {
  if (!has_mesh(s)) throw ConfigError("exhaustion needs a triangulated surface");
  std::vector<double> sizes = c.truncations;
  if (sizes.empty()) throw ConfigError("exhaustion needs --truncations");
  const TriMesh mesh = surface_mesh(s, c.subdivision);
  const bool slabs = s.entry && s.entry->name == "cylinder";
  const auto domains = slabs ? slab_domains(mesh, sizes) : ball_domains(mesh, sizes);
  ExhaustionResult res;
  try {
    res = f_index_exhaustion(mesh, space, domains, solver_options(c));
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  Report r;
  r.document["domain"] = slabs ? "slab" : "ball";
  r.document["sizes"] = to_json(sizes);
  r.document["indices"] = to_json(res.indices);
  r.document["lowest_eigenvalues"] = to_json(res.lowest_eigenvalues);
  r.document["free_dofs"] = to_json(res.free_dofs);
  r.document["monotone"] = res.monotone;
  r.document["f_index_estimate"] = res.indices.back();
  r.document.update(exact_json(s));
  r.table.header = {"size", "free_dofs", "f_index", "lowest_eigenvalue"};
  for (std::size_t i = 0; i < sizes.size(); ++i)
    r.table.rows.push_back({sizes[i], res.free_dofs[i], res.indices[i], res.lowest_eigenvalues[i]});
  prov["mesh"] = mesh_stats(mesh);
  return r;
}

}  // namespace detail

/// Runs one command. Configuration problems raise ConfigError; solver
/// breakdowns raise SolverError or AssemblyError.
inline Report run(const RunConfig& c) {
  validate(c);
  const WeightedAmbient space = resolve_weight(c);
  const detail::Surface surface = c.command == "identities" ? detail::Surface{} : resolve_surface(c);
  Json prov;
  prov["solver"] = detail::solver_provenance(detail::solver_options(c));
  Report body;
  try {
    if (c.command == "index") body = detail::cmd_index(c, surface, space, prov);
    else if (c.command == "residual") body = detail::cmd_residual(c, surface, space, prov);
    else if (c.command == "identities") body = detail::cmd_identities(c, space);
    else if (c.command == "bounds") body = detail::cmd_bounds(c, surface, space, prov);
    else if (c.command == "refine-study") body = detail::cmd_refine(c, surface, space, prov);
    else body = detail::cmd_exhaustion(c, surface, space, prov);
  } catch (const WrongAmbient& e) {
    throw ConfigError(e.what());
  }
  Report r;
  r.document["spec_version"] = 1;
  r.document["command"] = c.command;
  r.document["config"] = detail::config_echo(c);
  r.document["results"] = std::move(body.document);
  r.document["provenance"] = std::move(prov);
  r.table = std::move(body.table);
  return r;
}

inline std::string render(const Report& r, const std::string& format) {
  if (format == "csv") {
    if (r.table.empty()) throw ConfigError("this command has no tabular output");
    return to_csv_text(r.table);
  }
  return to_json_text(r.document);
}

/// Declares every command and flag on `app`, bound to `cfg`.
inline void configure_app(CLI::App& app, RunConfig& cfg) {
  app.require_subcommand(1);
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--surface", cfg.surface, "catalog surface: plane, sphere, cylinder, torus");
    sub->add_option("--off", cfg.off_path, "triangle mesh in OFF format (replaces --surface)");
    sub->add_option("--n", cfg.n, "hypersurface dimension");
    sub->add_option("--k", cfg.k, "sphere factor dimension of a cylinder");
    sub->add_option("--radii", cfg.radii, "torus radii major,minor")->delimiter(',');
    sub->add_option("--truncation", cfg.truncation, "disk radius or cylinder half-height");
    sub->add_option("--subdivision", cfg.subdivision, "mesh refinement level");
    sub->add_option("--count", cfg.count, "number of eigenvalues");
    sub->add_option("--tol-zero", cfg.tol_zero, "zero tolerance for the index count (0 = default rule)");
    sub->add_option("--method", cfg.method, "auto, dense, iterative or separable");
    sub->add_option("--levels", cfg.levels, "refinement levels")->delimiter(',');
    sub->add_option("--truncations", cfg.truncations, "nested domain sizes")->delimiter(',');
    sub->add_option("--weight", cfg.weight, "gaussian, zero or custom");
    sub->add_option("--expr", cfg.expr, "custom weight expression in x1..x{n+1}");
    sub->add_option("--samples", cfg.samples, "audit sample count");
    sub->add_option("--seed", cfg.seed, "audit sample seed");
    sub->add_option("--sample-radius", cfg.sample_radius, "audit sample ball radius");
    sub->add_option("--kappa", cfg.kappa, "lower bound of Ric_f for the area bound");
    sub->add_option("--genus", cfg.genus, "genus override for the area bound");
    sub->add_option("--growth-radii", cfg.growth_radii, "ball radii for volume growth")->delimiter(',');
    sub->add_option("--output", cfg.output, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv");
    sub->add_flag("--timing", cfg.timing, "include wall-clock seconds in the report");
    sub->callback([&cfg, name] { cfg.command = name; });
  }
}

/// Full command-line entry point; returns the process exit code.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Stability and f-index computations for f-minimal hypersurfaces", "fminimal"};
  RunConfig cfg;
  configure_app(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "fminimal: " << e.what() << '\n';
    return exit_config;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    Report r = run(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.timing) r.document["provenance"]["wall_clock_seconds"] = seconds;
    const std::string text = render(r, cfg.format);
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) throw ConfigError("cannot write " + cfg.output);
      file << text;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", seconds);
    err << "fminimal " << cfg.command << ": done in " << buf << " s\n";
    return exit_ok;
  } catch (const SolverError& e) {
    err << "fminimal: solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const AssemblyError& e) {
    err << "fminimal: solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const Error& e) {
    err << "fminimal: configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "fminimal: error: " << e.what() << '\n';
    return exit_solver;
  }
}

}  // namespace fminimal
