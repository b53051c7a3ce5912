// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "fminimal/catalog.hpp"
#include "fminimal/conformal.hpp"
#include "fminimal/diagnostics.hpp"
#include "fminimal/expression.hpp"
#include "fminimal/report.hpp"
#include "fminimal/spectral.hpp"

using namespace fminimal;

namespace {

const double kSphereVolume = 16.0 * M_PI / std::exp(1.0);

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(FMINIMAL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  if (pclose(pipe) != 0) return {};
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Verdict sphere_index() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string text = run_cli("index --surface sphere --n 2 --subdivision 4 --count 6");
  const double elapsed = seconds_since(t0);
  if (text.empty()) return {false, "index command failed"};
  const Json spec = Json::parse(text)["results"];
  const std::vector<double> exact = sphere_spectrum_oracle(2, 4);
  double worst = 0.0;
  for (int k = 0; k < 4; ++k)
    worst = std::max(worst, std::abs(spec["eigenvalues"][k].get<double>() - exact[k]) / std::abs(exact[k]));
  const int index = spec["f_index"].get<int>();
  return {index == 4 && worst <= 0.03 && elapsed < 60.0,
          fmt("f_index %.0f, worst relative eigenvalue error %.2e, %.1f s", index, worst, elapsed)};
}

Verdict plane_index() {
  const TriMesh disk = make_entry("plane", {.truncation = 8.0}).mesh(2);
  const ExhaustionResult r = f_index_exhaustion(disk, gaussian_soliton(3), ball_domains(disk, {2, 4, 6, 8}));
  const double lowest = r.lowest_eigenvalues.back();
  const bool close = std::abs(lowest + 0.5) <= 0.025;
  std::ostringstream d;
  d << "indices";
  for (int i : r.indices) d << ' ' << i;
  d << fmt(", lowest eigenvalue at R = 8: %.6f", lowest);
  return {r.monotone && r.indices.back() == 1 && close, d.str()};
}

Verdict cylinder_index() {
  const SpectrumResult c = separable_spectrum(*make_entry("cylinder").separable, 4);
  const std::vector<double> exact{-1.0, -0.5, -0.5, -0.5};
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(c.eigenvalues[k] - exact[k]));
  const SpectrumResult c3 = separable_spectrum(*make_entry("cylinder", {.n = 3, .k = 2}).separable, 8);
  return {c.f_index == 4 && worst <= 1e-6 && c3.f_index == 5,
          fmt("S1 x R f_index %.0f (max error %.1e), S2 x R f_index %.0f", c.f_index, worst, c3.f_index)};
}

Verdict identity_audit() {
  const auto t0 = std::chrono::steady_clock::now();
  AuditOptions opt;
  opt.samples = 50;
  opt.radius = 3.0;
  double worst = 0.0;
  std::size_t identities = 0;
  for (const WeightedAmbient& space : {gaussian_soliton(3), expression_weight("sin(x1) + x2^2/8", 3)}) {
    for (const auto& rep : audit_identities(space, opt)) {
      worst = std::max(worst, rep.max_rel_err);
      ++identities;
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-4 && identities == 7 && elapsed < 10.0,
          fmt("%.0f identity reports, max_rel_err %.2e, %.2f s", static_cast<double>(identities), worst, elapsed)};
}

Verdict shrinker_residuals() {
  double exact_sup = 0.0;
  for (const CatalogEntry& e : {make_entry("sphere"), make_entry("cylinder"), make_entry("plane"), make_entry("sphere", {.n = 3}),
                                make_entry("cylinder", {.n = 3, .k = 2}), make_entry("plane", {.n = 3})})
    exact_sup = std::max(exact_sup, shrinker_residual(*e.patch, gaussian_soliton(e.n + 1), {6, 2}));
  const double torus = shrinker_residual(*make_entry("torus").patch, gaussian_soliton(3));
  std::vector<double> mesh;
  bool decreasing = true;
  for (int level = 2; level <= 5; ++level) {
    mesh.push_back(shrinker_residual(icosphere(level, 2.0), gaussian_soliton(3)));
    if (mesh.size() > 1) decreasing = decreasing && mesh.back() < mesh[mesh.size() - 2];
  }
  return {exact_sup <= 1e-12 && torus > 0.1 && decreasing,
          fmt("catalog sup %.1e, torus %.3f, icosphere level 5 %.1e", exact_sup, torus, mesh.back())};
}

Verdict area_bound() {
  const AreaBoundRecord r = area_bound_check(*make_entry("sphere").patch, gaussian_soliton(3), 0.5, 0, {16, 2});
  const double lhs_err = std::abs(r.lhs - kSphereVolume) / kSphereVolume;
  const double rhs_err = std::abs(r.rhs - 2.0 * kSphereVolume) / (2.0 * kSphereVolume);
  return {r.holds && lhs_err <= 1e-6 && rhs_err <= 1e-6, fmt("lhs %.10f, rhs %.10f, holds %.0f", r.lhs, r.rhs, r.holds)};
}

Verdict quadratic_form() {
  const QuadraticFormSystem sys = assemble(icosphere(4, 2.0), gaussian_soliton(3));
  const Vector one = Vector::Ones(sys.size());
  const double assembled = one.dot(sys.form() * one);
  // Second variation of the constant function: -int (|A|^2 + Ric_f) e^{-f}.
  const ImmersedPatch sphere = *make_entry("sphere").patch;
  const auto space = gaussian_soliton(3);
  const double direct = -integrate_patch(sphere, {16, 2}, [&](const Vector& u) {
    const PointGeometry g = point_geometry(sphere, u, space);
    return g.stability_potential() * std::exp(-g.weight) * area_element(sphere, u);
  });
  const bool ok = std::abs(assembled + kSphereVolume) <= 0.01 * kSphereVolume &&
                  std::abs(direct + kSphereVolume) <= 1e-9 * kSphereVolume;
  return {ok, fmt("assembled %.6f, quadrature %.6f, exact %.6f", assembled, direct, -kSphereVolume)};
}

Verdict monotonicity() {
  const auto space = gaussian_soliton(3);
  int families = 0, violations = 0;
  auto check = [&](const TriMesh& mesh, const std::vector<std::vector<bool>>& domains) {
    const ExhaustionResult r = f_index_exhaustion(mesh, space, domains);
    ++families;
    for (std::size_t k = 1; k < r.indices.size(); ++k) violations += r.indices[k] < r.indices[k - 1];
  };
  const TriMesh disk = make_entry("plane", {.truncation = 8.0}).mesh(2);
  check(disk, ball_domains(disk, {2, 4, 6, 8}));
  check(disk, ball_domains(disk, {1, 1.5, 2.5, 3, 5, 7.9}));
  check(disk, ball_domains(disk, {3, 3, 3}));
  const TriMesh cyl = make_entry("cylinder", {.truncation = 6.0}).mesh(3);
  check(cyl, slab_domains(cyl, {2, 4, 6}));
  check(cyl, slab_domains(cyl, {0.5, 1, 1.5, 3}));
  const TriMesh ball = icosphere(3, 2.0);
  std::vector<std::vector<bool>> caps;
  for (double h : {-1.5, -0.5, 0.5, 1.5, 2.5}) {
    std::vector<bool> free(ball.num_vertices());
    for (std::size_t v = 0; v < free.size(); ++v) free[v] = ball.vertices()[v].z() < h;
    caps.push_back(std::move(free));
  }
  check(ball, caps);
  return {violations == 0, fmt("%.0f nested families, %.0f violations", families, violations)};
}

Verdict determinism() {
  const std::string args = "index --surface sphere --subdivision 3 --count 6";
  const std::string a = run_cli(args), b = run_cli(args);
  const std::string c = run_cli("identities --samples 20"), d = run_cli("identities --samples 20");
  const bool ok = !a.empty() && a == b && !c.empty() && c == d;
  return {ok, fmt("index reports %.0f bytes, audit reports %.0f bytes", static_cast<double>(a.size()), static_cast<double>(c.size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"sphere index", sphere_index},
      {"plane index by exhaustion", plane_index},
      {"cylinder index by separation", cylinder_index},
      {"conformal identity audit", identity_audit},
      {"shrinker residual", shrinker_residuals},
      {"weighted area bound", area_bound},
      {"quadratic form consistency", quadratic_form},
      {"index monotonicity", monotonicity},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " (" << v.detail << ")"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
