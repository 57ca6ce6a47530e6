// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// usage: acceptance <aahlab binary> <scratch directory>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aah/beam.hpp"
#include "aah/commands.hpp"
#include "aah/edge_spectrum.hpp"
#include "aah/io.hpp"
#include "aah/spectral.hpp"
#include "aah/topology.hpp"

using namespace aah;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ModulationParams params(double nu_od, double nu_d) {
  ModulationParams p;
  p.nu_od = nu_od;
  p.nu_d = nu_d;
  return p;
}

std::string fmt(double v) { return io::format_double(v); }

std::string ints(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class Cli {
 public:
  Cli(std::string binary, fs::path root) : binary_(std::move(binary)), root_(std::move(root)) {}

  // Every preset written once per thread count; later criteria reuse the files.
  const fs::path& presets(unsigned threads) {
    auto it = runs_.find(threads);
    if (it != runs_.end()) return it->second;
    const fs::path dir = root_ / ("threads" + std::to_string(threads));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& p : preset_table()) {
      const std::string cmd = "\"" + binary_ + "\" --threads " + std::to_string(threads) + " preset " + p.name +
                              " --out \"" + dir.string() + "\" >\"" + (dir / (p.name + ".log")).string() + "\" 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw std::runtime_error("preset " + p.name + " exited with status " + std::to_string(status));
    }
    return runs_.emplace(threads, dir).first->second;
  }

 private:
  std::string binary_;
  fs::path root_;
  std::map<unsigned, fs::path> runs_;
};

io::Json load_json(const fs::path& path) { return io::Json::parse(io::read_file(path)); }

Outcome chern_points() {
  std::string detail;
  bool ok = true;
  for (const auto& [r, want] : {std::pair<double, std::vector<int>>{1.0, {-1, 2, -1}}, {10.0, {2, -4, 2}}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ChernVector c = chern_numbers(params(r, 0.0));
    const double t = seconds_since(t0);
    const bool hit = c.all_defined() && c.values() == want && t < 1.0;
    ok = ok && hit;
    detail += "nu_od/J=" + fmt(r) + " -> " + c.to_string() + " in " + fmt(std::round(t * 1e3) / 1e3) + " s; ";
  }
  return {ok, detail};
}

Outcome transition() {
  std::vector<double> ratios;
  for (int i = 0; i <= 100; ++i) ratios.push_back(3.5 + 0.01 * i);
  const auto table = gap_scan(params(0.0, 0.0), ratios, 48, 48);
  const GapRow& at = table[simultaneous_closure(table)];
  const double worst = std::max(at.gaps[0], at.gaps[1]);
  const bool located = std::abs(at.nu_od_over_J - 4.0) <= 0.02 + 1e-12 && worst < 1e-3;

  // weak diagonal modulation: each gap closes at its own ratio, confirmed by
  // a change of the Chern number below that gap
  const auto split = gap_scan(params(0.0, 0.2), ratios, 48, 48);
  const double r1 = split[gap_minimum(split, 1)].nu_od_over_J;
  const double r2 = split[gap_minimum(split, 2)].nu_od_over_J;
  const auto below = [](double r, int n) {
    const auto c = chern_numbers(params(r, 0.2)).values();
    return std::accumulate(c.begin(), c.begin() + n, 0);
  };
  const bool distinct = std::abs(r1 - r2) > 0.05 && below(r1 - 0.02, 1) != below(r1 + 0.02, 1) &&
                        below(r2 - 0.02, 2) != below(r2 + 0.02, 2);
  return {located && distinct, "closure at " + fmt(at.nu_od_over_J) + " with max(G1, G2) = " + fmt(worst) +
                                   "; nu_d/J=0.2 closures at " + fmt(r1) + " (G1) and " + fmt(r2) + " (G2)"};
}

Outcome chiral() {
  double gap_diff = 0.0, mirror = 0.0;
  for (double r : {0.5, 1.0, 2.0, 6.0, 10.0}) {
    const auto g = band_gaps(band_grid(params(r, 0.0), 48, 48));
    gap_diff = std::max(gap_diff, std::abs(g[0] - g[1]));
    for (double ky : {0.0, 0.3, 1.7, 2.9, 4.4}) {
      const auto e = eigh(open_hamiltonian(params(r, 0.0), {89, ky})).values;
      for (int i = 0; i < e.size(); ++i) mirror = std::max(mirror, std::abs(e[i] + e[e.size() - 1 - i]));
    }
  }
  return {gap_diff < 1e-10 && mirror < 1e-10, "max |G1 - G2| = " + fmt(gap_diff) + ", max open-chain asymmetry " +
                                                  fmt(mirror)};
}

Outcome linear_growth() {
  std::vector<double> x, y;
  for (int i = 0; i <= 70; ++i) x.push_back(5.0 + 0.1 * i);
  for (const auto& row : gap_scan(params(0.0, 0.0), x, 48, 48)) y.push_back(row.gaps[0]);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  return {r2 > 0.999, "R^2 = " + fmt(r2) + ", slope " + fmt(sxy / sxx) + " J per unit ratio"};
}

Outcome edges() {
  bool ok = true;
  std::string detail;
  struct Case {
    double ratio;
    std::vector<int> windings;
    int branches;
  };
  for (const Case& c : {Case{1.0, {-1, 1}, 2}, Case{10.0, {2, -2}, 4}}) {
    const ModulationParams p = params(c.ratio, 0.0);
    const BulkEdgeReport report = bulk_edge_check(p);
    const auto w = report.windings.windings();
    bool branches = true;
    for (const auto& g : report.windings.gaps) branches = branches && g.edge_branches == c.branches;
    bool stable = true;
    const auto fid = gap_centers(p);
    for (int n : {149, 299}) stable = stable && winding_numbers(spectral_flow(p, n, 400), fid).windings() == w;
    ok = ok && report.consistent && w == c.windings && branches && stable;
    detail += "nu_od/J=" + fmt(c.ratio) + ": windings " + ints(w) + ", branches " +
              std::to_string(report.windings.gaps[0].edge_branches) + "/" +
              std::to_string(report.windings.gaps[1].edge_branches) + (report.consistent ? ", consistent" : ", INCONSISTENT") +
              (stable ? ", stable at N=149,299; " : ", CHANGES with N; ");
  }
  return {ok, detail};
}

Outcome zero_sum_and_gauge() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  int gapped = 0, attempts = 0, sum_fail = 0, mesh_fail = 0;
  while (gapped < 50 && attempts < 1000) {
    ++attempts;
    const ModulationParams p = params(u(rng), u(rng));
    const ChernVector fine = chern_numbers(p);
    if (!fine.all_defined()) continue;
    ++gapped;
    const auto v = fine.values();
    if (std::accumulate(v.begin(), v.end(), 0) != 0) ++sum_fail;
    ChernOptions coarse;
    coarse.nx = coarse.ny = 12;
    const ChernVector c12 = chern_numbers(p, coarse);
    if (!c12.all_defined() || c12.values() != v) ++mesh_fail;
  }
  for (double r : {1.0, 10.0}) {
    ChernOptions coarse;
    coarse.nx = coarse.ny = 12;
    const ChernVector c12 = chern_numbers(params(r, 0.0), coarse);
    if (!c12.all_defined() || c12.values() != chern_numbers(params(r, 0.0)).values()) ++mesh_fail;
  }

  std::mt19937_64 prng(99);
  std::uniform_real_distribution<double> phase(0.0, 2 * M_PI);
  double gauge = 0.0;
  for (double r : {1.0, 10.0}) {
    BandGrid g = band_grid(params(r, 0.0), 24, 24);
    std::vector<PlaquetteField> before;
    for (int b = 0; b < 3; ++b) before.push_back(plaquette_field(g, b));
    for (int b = 0; b < 3; ++b)
      for (int ix = 0; ix < 24; ++ix)
        for (int iy = 0; iy < 24; ++iy) g.state(b, ix, iy) *= std::polar(1.0, phase(prng));
    for (int b = 0; b < 3; ++b) {
      const PlaquetteField after = plaquette_field(g, b);
      for (std::size_t i = 0; i < after.values.size(); ++i)
        gauge = std::max(gauge, std::abs(after.values[i] - before[static_cast<std::size_t>(b)].values[i]));
    }
  }
  const bool ok = gapped == 50 && sum_fail == 0 && mesh_fail == 0 && gauge < 1e-12;
  return {ok, std::to_string(gapped) + " gapped draws, " + std::to_string(sum_fail) + " nonzero sums, " +
                  std::to_string(mesh_fail) + " 12x12 vs 48x48 mismatches, max gauge change " + fmt(gauge)};
}

Outcome pumping(Cli& cli) {
  const fs::path& dir = cli.presets(1);
  bool ok = true;
  std::string detail;
  for (const auto& [name, target] : {std::pair<std::string, double>{"fig5a", -0.97}, {"fig5b", -0.99}, {"fig5c", 1.97}}) {
    const io::Json s = load_json(dir / (name + "_summary.json"));
    const double c = s.at("chern_estimate").get<double>();
    const double drift = s.at("norm_drift_total").get<double>();
    const double step = s.at("norm_drift_max_step").get<double>();
    const double leak = s.at("leakage_max").get<double>();
    ok = ok && std::abs(c - target) <= 0.05 && drift < 1e-10 && step < 1e-10 && leak < 1e-4;
    detail += name + " C=" + fmt(std::round(c * 1e4) / 1e4) + " (target " + fmt(target) + "), drift " + fmt(drift) +
              ", leakage " + fmt(leak) + "; ";
  }
  return {ok, detail};
}

Outcome free_diffraction() {
  beam::OpticalConstants c;
  c.gamma = 0.0;
  beam::WaveguideArrayDesign d;
  d.variant = beam::IndexModulated{0.0, {1, 3}, 10.0, 3.0};
  d.num_guides = 1;
  d.Z_um = 1e4;
  beam::SimulationGrid g;
  g.nx = 16384;
  g.dx = 0.25;
  g.x_min = -0.5 * g.nx * g.dx;
  g.dz = 1.0;
  for (int s = 0; s <= 4; ++s) g.z_slices.push_back(d.Z_um * s / 4);
  beam::PropagationOptions o;
  o.leakage_limit = 1.0;
  const double W = 4.0;
  const beam::FieldTrajectory t = beam::split_step_propagate(beam::gaussian_input(0.0, W, g), d, c, g, o);
  double worst = 0.0;
  for (std::size_t s = 0; s < t.z.size(); ++s) {
    const std::complex<double> qz(1.0, 2.0 * t.z[s] / (c.k0() * W * W));
    beam::Field exact(static_cast<std::size_t>(g.nx));
    for (int i = 0; i < g.nx; ++i) exact[i] = std::exp(-g.x(i) * g.x(i) / (W * W * qz)) / std::sqrt(qz);
    const double scale = 1.0 / std::sqrt(beam::l2_norm_squared(exact, g));
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      num += std::norm(t.fields[s][i] - exact[i] * scale);
      den += std::norm(exact[i] * scale);
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst < 1e-3, "max relative L2 error over 1 cm " + fmt(worst)};
}

Outcome extraction(Cli& cli) {
  const fs::path& dir = cli.presets(1);
  bool ok = true;
  std::string detail;
  for (const auto& [name, target_J] : {std::pair<std::string, double>{"extract-g9", 3.76e-4}, {"extract-g5", 5.23e-4}}) {
    const io::Json s = load_json(dir / (name + "_parameters.json"));
    const double J = s.at("J_per_um").get<double>();
    const double nu_od = s.at("nu_od_per_um").get<double>();
    const double nu_d = s.at("nu_d_per_um").get<double>();
    const double phi = s.at("delta_phi_rad").get<double>();
    const bool hit = std::abs(J - target_J) <= 0.3 * target_J && nu_d < 0 && std::abs(nu_d) >= 10 * std::abs(nu_od) &&
                     std::abs(nu_od) <= 0.3 * J && std::abs(phi - M_PI / 3) <= 0.3;
    ok = ok && hit;
    detail += name + " J=" + fmt(J) + " nu_od=" + fmt(nu_od) + " nu_d=" + fmt(nu_d) + " dphi=" +
              fmt(std::round(phi * 1e4) / 1e4) + "; ";
  }
  return {ok, detail};
}

Outcome determinism(Cli& cli) {
  const fs::path& a = cli.presets(1);
  const fs::path& b = cli.presets(8);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() != ".log") files.push_back(e.path().filename().string());
  std::size_t other = 0;
  for (const auto& e : fs::directory_iterator(b)) other += e.path().extension() != ".log";
  std::sort(files.begin(), files.end());
  std::vector<std::string> differ;
  for (const auto& f : files)
    if (!fs::exists(b / f) || io::read_file(a / f) != io::read_file(b / f)) differ.push_back(f);
  const bool ok = differ.empty() && other == files.size() && !files.empty();
  std::string detail = std::to_string(files.size()) + " files from " + std::to_string(preset_table().size()) +
                       " presets compared";
  for (const auto& f : differ) detail += "; differs: " + f;
  if (other != files.size()) detail += "; file sets differ";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: acceptance <aahlab> <scratch dir>\n");
    return 2;
  }
  Cli cli(argv[1], argv[2]);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"chern numbers at the named phase points", chern_points},
      {"transition location and its split", transition},
      {"chiral symmetry", chiral},
      {"linear gap growth", linear_growth},
      {"edge branches and windings", edges},
      {"zero sum, gauge and mesh invariance", zero_sum_and_gauge},
      {"pumping reproduction", [&] { return pumping(cli); }},
      {"free diffraction oracle", free_diffraction},
      {"parameter extraction", [&] { return extraction(cli); }},
      {"thread-count determinism", [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
