#include "aah/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "aah/beam.hpp"
#include "aah/edge_spectrum.hpp"
#include "aah/error.hpp"
#include "aah/extraction.hpp"
#include "aah/spectral.hpp"
#include "aah/topology.hpp"

namespace aah {

namespace {

constexpr double kPi = std::numbers::pi;
namespace fs = std::filesystem;
using io::Json;

// ---------------------------------------------------------------- schemas

std::vector<KeySpec> model_keys(bool with_nu_od = true) {
  std::vector<KeySpec> k = {
      {"J", "1", "base hopping amplitude (energy unit)"},
      {"nu_d_over_J", "0", "diagonal modulation amplitude / J"},
      {"beta_p", "1", "modulation frequency numerator"},
      {"beta_q", "3", "modulation frequency denominator"},
      {"delta_phi_over_pi", "0", "hopping modulation phase / pi"},
  };
  if (with_nu_od) k.insert(k.begin() + 2, {"nu_od_over_J", "1", "off-diagonal modulation amplitude / J"});
  return k;
}

std::vector<KeySpec> mesh_keys() {
  return {{"nx", "48", "kx samples of the zone mesh"}, {"ny", "48", "ky samples of the zone mesh"}};
}

std::vector<KeySpec> concat(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<KeySpec> optical_keys() {
  return {
      {"gamma", "9e-4", "index contrast scale"},
      {"n0", "1.45", "background refractive index"},
      {"lambda_um", "0.63", "vacuum wavelength"},
  };
}

const std::vector<CommandInfo>& commands_impl() {
  static const std::vector<CommandInfo> table = {
      {"bands", "Bloch bands, gaps and Chern numbers on the periodic zone mesh",
       concat(concat(model_keys(), mesh_keys()), {{"pgm", "true", "write one energy image per band"}})},
      {"gaps", "gaps G_n as a function of nu_od/J",
       concat(concat(model_keys(false), mesh_keys()),
              {{"ratio_min", "0", "first nu_od/J"}, {"ratio_max", "12", "last nu_od/J"},
               {"ratio_step", "0.01", "nu_od/J step"}})},
      {"phase-diagram", "Chern numbers over the (nu_od, nu_d) plane",
       concat(concat({{"beta_p", "1", "modulation frequency numerator"},
                      {"beta_q", "3", "modulation frequency denominator"},
                      {"nu_od_min", "0", "first nu_od/J"},
                      {"nu_od_max", "8", "last nu_od/J"},
                      {"nu_od_count", "81", "nu_od samples"},
                      {"nu_d_min", "0", "first nu_d/J"},
                      {"nu_d_max", "8", "last nu_d/J"},
                      {"nu_d_count", "81", "nu_d samples"}},
                     mesh_keys()),
              {{"gap_tol", "-1", "band spacing (units of J) below which a Chern number is undefined; <0: 1e-6"},
               {"cache", "true", "resume from and record completed cells in a cache file"}})},
      {"edges", "open-chain spectral flow, edge windings and bulk-edge check",
       concat(concat(model_keys(), mesh_keys()),
              {{"num_sites", "89", "open-chain length"},
               {"n_ky", "400", "ky samples over one period"},
               {"edge_width", "5", "sites counted as each edge"},
               {"threshold", "0.5", "edge-weight threshold"},
               {"fiducials", "auto", "comma-separated in-gap energies / J, or auto (gap centres)"}})},
      {"pump", "beam propagation through one pump cycle",
       concat(optical_keys(),
              {{"variant", "index", "index | spacing modulation"},
               {"alpha", "0.5", "index modulation depth"},
               {"beta_p", "1", "modulation frequency numerator"},
               {"beta_q", "3", "modulation frequency denominator"},
               {"ws_um", "10", "guide spacing"},
               {"wx_um", "3", "guide half-width"},
               {"wm_um", "18", "spacing modulation amplitude"},
               {"phi0_over_pi", "0", "spacing modulation phase / pi"},
               {"num_guides", "21", "number of guides"},
               {"Z_cm", "30", "pump period"},
               {"input_width_um", "3.77", "input Gaussian width W"},
               {"dx_um", "0.15625", "transverse grid step"},
               {"dz_um", "1", "propagation step"},
               {"pad_guides", "3", "empty guide spacings on each side"},
               {"slices", "200", "recorded z intervals"},
               {"absorber_per_um", "0.01", "peak absorption rate of the boundary layer (0 disables)"},
               {"leakage_limit", "1e-4", "abort when a boundary zone holds more intensity"}})},
      {"extract", "effective tight-binding parameters of an index-modulated array",
       concat(optical_keys(),
              {{"alpha", "0.5", "index modulation depth"},
               {"beta_p", "1", "modulation frequency numerator"},
               {"beta_q", "3", "modulation frequency denominator"},
               {"ws_um", "10", "guide spacing"},
               {"wx_um", "3", "guide half-width"},
               {"dx_um", "0.05", "finite-difference grid step"},
               {"window_spacings", "4", "mode window width / ws"},
               {"k_points", "8", "Bloch momenta per band"}})},
  };
  return table;
}

// ---------------------------------------------------------------- helpers

int as_int(const RunConfig& c, const std::string& key, long long lo, long long hi) {
  const long long v = c.integer(key);
  if (v < lo || v > hi)
    fail(ErrorKind::ConfigError,
         "key '" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + c.text(key));
  return static_cast<int>(v);
}

double positive(const RunConfig& c, const std::string& key) {
  const double v = c.real(key);
  if (!(v > 0.0)) fail(ErrorKind::ConfigError, "key '" + key + "' must be positive, got " + c.text(key));
  return v;
}

Rational beta_of(const RunConfig& c) {
  return Rational(as_int(c, "beta_p", 0, 1 << 20), as_int(c, "beta_q", 1, 1 << 20));
}

ModulationParams model_of(const RunConfig& c) {
  ModulationParams p;
  p.J = c.real("J");
  p.nu_d = c.real("nu_d_over_J") * p.J;
  if (c.has_key("nu_od_over_J")) p.nu_od = c.real("nu_od_over_J") * p.J;
  p.beta = beta_of(c);
  p.delta_phi = c.real("delta_phi_over_pi") * kPi;
  return p;
}

Json config_echo(const RunConfig& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  return j;
}

Json optional_ints(const ChernVector& v) {
  Json a = Json::array();
  for (const auto& b : v.bands) a.push_back(b.value ? Json(*b.value) : Json(nullptr));
  return a;
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(io::number(x));
  return a;
}

std::string tuple_text(const ChernVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.bands.size(); ++i) {
    if (i) s += ", ";
    s += v.bands[i].value ? std::to_string(*v.bands[i].value) : "undef";
  }
  return s + ")";
}

class Output {
 public:
  Output(const RunOptions& o, const std::string& command)
      : dir_(o.out_dir), prefix_(o.prefix.empty() ? command : o.prefix) {}

  fs::path path(const std::string& suffix) const { return dir_ / (prefix_ + suffix); }

  void write(const std::string& suffix, const std::string& content, RunOutcome& out) const {
    const fs::path p = path(suffix);
    io::write_file(p, content);
    out.files.push_back(p);
  }

 private:
  fs::path dir_;
  std::string prefix_;
};

void note(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << msg << '\n';
}

// ---------------------------------------------------------------- commands

RunOutcome cmd_bands(const RunConfig& c, const RunOptions& o) {
  const ModulationParams p = model_of(c);
  validate(p);
  const int nx = as_int(c, "nx", 4, 4096);
  const int ny = as_int(c, "ny", 4, 4096);
  const BandGrid grid = band_grid(p, nx, ny);
  const int q = grid.bands();

  io::CsvTable csv({"kx", "ky", "band", "energy"});
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int b = 0; b < q; ++b) {
        csv.cell(grid.mesh().kx(ix)).cell(grid.mesh().ky(iy)).cell(b + 1).cell(grid.energy(b, ix, iy));
        csv.end_row();
      }

  RunOutcome out;
  Output files(o, "bands");
  files.write("_bands.csv", csv.text(), out);

  Json ranges = Json::array();
  for (int b = 0; b < q; ++b) {
    double lo = grid.energy(b, 0, 0), hi = lo;
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) {
        lo = std::min(lo, grid.energy(b, ix, iy));
        hi = std::max(hi, grid.energy(b, ix, iy));
      }
    ranges.push_back(Json::array({io::number(lo), io::number(hi)}));
    if (c.flag("pgm")) {
      // rows run from the largest ky at the top down to the smallest
      std::vector<double> img(static_cast<std::size_t>(nx) * ny);
      for (int r = 0; r < ny; ++r)
        for (int ix = 0; ix < nx; ++ix)
          img[static_cast<std::size_t>(r) * nx + ix] = grid.energy(b, ix, ny - 1 - r) - lo;
      files.write("_band" + std::to_string(b + 1) + ".pgm", io::pgm_normalized(img, nx, ny), out);
    }
  }

  Json s;
  s["command"] = "bands";
  s["config"] = config_echo(c);
  s["band_ranges"] = ranges;
  s["gaps"] = numbers(q > 1 ? band_gaps(grid) : std::vector<double>{});
  if (q % 2 == 1) {
    const ChernVector ch = chern_numbers(grid, 1e-6 * std::abs(p.J));
    s["chern"] = optional_ints(ch);
    if (!ch.error.empty()) s["chern_error"] = ch.error;
  } else {
    s["chern"] = nullptr;
    s["chern_error"] = "even denominator: bands touch at the zone centre";
  }
  files.write("_summary.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

RunOutcome cmd_gaps(const RunConfig& c, const RunOptions& o) {
  ModulationParams p = model_of(c);
  validate(p);
  const int nx = as_int(c, "nx", 4, 4096);
  const int ny = as_int(c, "ny", 4, 4096);
  const double lo = c.real("ratio_min");
  const double hi = c.real("ratio_max");
  const double step = positive(c, "ratio_step");
  if (!(hi >= lo)) fail(ErrorKind::ConfigError, "ratio_max must not be below ratio_min");
  const long long count = std::llround((hi - lo) / step) + 1;
  if (count > 1000000) fail(ErrorKind::ConfigError, "gap scan with more than 10^6 rows");
  std::vector<double> ratios;
  for (long long i = 0; i < count; ++i) ratios.push_back(lo + step * static_cast<double>(i));
  const std::vector<GapRow> table = gap_scan(p, ratios, nx, ny);
  const int q = p.q();
  if (q < 2) fail(ErrorKind::InvalidArgument, "a gap scan needs q >= 2");

  std::vector<std::string> header{"nu_od_over_J"};
  for (int n = 1; n < q; ++n) header.push_back("G" + std::to_string(n));
  io::CsvTable csv(header);
  for (const auto& row : table) {
    csv.cell(row.nu_od_over_J);
    for (double g : row.gaps) csv.cell(g);
    csv.end_row();
  }
  RunOutcome out;
  Output files(o, "gaps");
  files.write("_gaps.csv", csv.text(), out);

  // The unmodulated chain (nu_od = nu_d = 0) has touching folded bands for
  // trivial reasons and is left out of the closure search.
  std::vector<GapRow> searched;
  for (const auto& row : table)
    if (row.nu_od_over_J != 0.0 || p.nu_d != 0.0) searched.push_back(row);
  if (searched.empty()) fail(ErrorKind::InvalidArgument, "gap scan holds only the unmodulated chain");
  const std::size_t k = simultaneous_closure(searched);
  Json s;
  s["command"] = "gaps";
  s["config"] = config_echo(c);
  s["rows"] = table.size();
  s["closure"] = {{"nu_od_over_J", io::number(searched[k].nu_od_over_J)},
                  {"max_gap", io::number(*std::max_element(searched[k].gaps.begin(), searched[k].gaps.end()))}};
  Json minima = Json::array();
  for (int n = 1; n < q; ++n) {
    const std::size_t m = gap_minimum(searched, n);
    minima.push_back({{"gap", n},
                      {"nu_od_over_J", io::number(searched[m].nu_od_over_J)},
                      {"value", io::number(searched[m].gaps[n - 1])}});
  }
  s["gap_minima"] = minima;
  files.write("_summary.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

// 64-bit FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string cache_line(std::size_t index, const ChernVector& v) {
  std::string s = std::to_string(index);
  for (const auto& b : v.bands) s += ' ' + (b.value ? std::to_string(*b.value) : std::string("u"));
  return s;
}

std::vector<std::optional<ChernVector>> load_cache(const fs::path& path, const std::string& header,
                                                   std::size_t cells, int q) {
  std::vector<std::optional<ChernVector>> cached(cells);
  std::ifstream f(path);
  if (!f) return cached;
  std::string line;
  if (!std::getline(f, line) || line != header) return cached;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::size_t idx = 0;
    if (!(ls >> idx) || idx >= cells) continue;
    ChernVector v;
    std::string tok;
    bool ok = true;
    while (ls >> tok) {
      ChernEntry e;
      if (tok != "u") {
        try {
          std::size_t used = 0;
          e.value = std::stoi(tok, &used);
          if (used != tok.size()) ok = false;
        } catch (const std::exception&) {
          ok = false;
        }
      }
      v.bands.push_back(e);
    }
    // a torn last line from an interrupted run is simply recomputed
    if (ok && static_cast<int>(v.bands.size()) == q) cached[idx] = std::move(v);
  }
  return cached;
}

int gray_level(const ChernEntry& e) {
  if (!e.value) return 0;
  return std::clamp(128 + 24 * *e.value, 8, 248);
}

RunOutcome cmd_phase_diagram(const RunConfig& c, const RunOptions& o) {
  const Rational beta = beta_of(c);
  const std::vector<double> od =
      linspace(c.real("nu_od_min"), c.real("nu_od_max"), as_int(c, "nu_od_count", 1, 100000));
  const std::vector<double> nd = linspace(c.real("nu_d_min"), c.real("nu_d_max"), as_int(c, "nu_d_count", 1, 100000));
  ChernOptions opt;
  opt.nx = as_int(c, "nx", 4, 4096);
  opt.ny = as_int(c, "ny", 4, 4096);
  opt.gap_tol = c.real("gap_tol");
  const int q = static_cast<int>(beta.q());
  if (q % 2 == 0) fail(ErrorKind::EvenDenominator, "phase diagrams need an odd denominator q");

  Output files(o, "phase_diagram");
  RunOutcome out;
  const std::size_t cells = od.size() * nd.size();

  std::string canonical;
  for (const auto& [k, v] : c.entries())
    if (k != "cache") canonical += k + "=" + v + ";";
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  const std::string header = std::string("# aahlab phase-diagram cache ") + hash;
  const fs::path cache_path = files.path("_cache.txt");
  const bool use_cache = c.flag("cache");

  std::vector<std::optional<ChernVector>> cached(cells);
  std::ofstream journal;
  std::mutex journal_mutex;
  if (use_cache) {
    cached = load_cache(cache_path, header, cells, q);
    std::error_code ec;
    if (cache_path.has_parent_path()) fs::create_directories(cache_path.parent_path(), ec);
    // rewrite the valid part so appended lines always follow a good header
    std::string text = header + "\n";
    for (std::size_t i = 0; i < cells; ++i)
      if (cached[i]) text += cache_line(i, *cached[i]) + "\n";
    io::write_file(cache_path, text);
    journal.open(cache_path, std::ios::app);
    std::size_t hits = 0;
    for (const auto& e : cached) hits += e.has_value();
    note(o, "phase-diagram: " + std::to_string(hits) + " of " + std::to_string(cells) + " cells from cache");
  }
  PhaseDiagramHooks hooks;
  hooks.cached = &cached;
  if (use_cache)
    hooks.on_cell = [&](std::size_t idx, const ChernVector& v) {
      std::lock_guard<std::mutex> lock(journal_mutex);
      journal << cache_line(idx, v) << '\n' << std::flush;
    };
  const PhaseDiagram pd = phase_diagram(beta, od, nd, opt, hooks);
  if (use_cache) {
    journal.close();
    std::string text = header + "\n";
    for (std::size_t i = 0; i < cells; ++i) text += cache_line(i, pd.cells[i]) + "\n";
    io::write_file(cache_path, text);
    out.files.push_back(cache_path);
  }

  std::vector<std::string> head{"nu_od_over_J", "nu_d_over_J"};
  for (int n = 1; n <= q; ++n) head.push_back("C" + std::to_string(n));
  io::CsvTable csv(head);
  std::map<std::string, int> tally;
  std::size_t undefined = 0;
  for (std::size_t i = 0; i < od.size(); ++i)
    for (std::size_t k = 0; k < nd.size(); ++k) {
      const ChernVector& v = pd.cell(i, k);
      csv.cell(od[i]).cell(nd[k]);
      for (const auto& b : v.bands) {
        if (b.value)
          csv.cell(*b.value);
        else
          csv.cell(std::string_view("undef"));
      }
      csv.end_row();
      if (v.all_defined())
        ++tally[tuple_text(v)];
      else
        ++undefined;
    }
  files.write(".csv", csv.text(), out);

  const int w = static_cast<int>(od.size());
  const int h = static_cast<int>(nd.size());
  for (int n = 0; n < q; ++n) {
    std::vector<int> levels(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r)
      for (int i = 0; i < w; ++i)
        levels[static_cast<std::size_t>(r) * w + i] = gray_level(pd.cell(i, h - 1 - r).bands[n]);
    files.write("_C" + std::to_string(n + 1) + ".pgm", io::pgm_levels(levels, w, h), out);
  }

  Json s;
  s["command"] = "phase-diagram";
  s["config"] = config_echo(c);
  s["cells"] = cells;
  s["undefined_cells"] = undefined;
  Json t = Json::object();
  for (const auto& [k, v] : tally) t[k] = v;
  s["tuples"] = t;
  // tuples met along nu_d = 0, in nu_od order
  Json axis = Json::array();
  for (std::size_t k = 0; k < nd.size(); ++k)
    if (nd[k] == 0.0) {
      std::string last;
      for (std::size_t i = 0; i < od.size(); ++i) {
        const std::string tt = tuple_text(pd.cell(i, k));
        if (tt != last) axis.push_back({{"from_nu_od_over_J", io::number(od[i])}, {"tuple", tt}});
        last = tt;
      }
    }
  s["nu_d_zero_axis"] = axis;
  files.write("_summary.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    RunConfig tmp({{key, "0", ""}});
    tmp.assign(key + "=" + item);
    v.push_back(tmp.real(key));
  }
  return v;
}

RunOutcome cmd_edges(const RunConfig& c, const RunOptions& o) {
  const ModulationParams p = model_of(c);
  validate(p);
  const int q = p.q();
  if (q % 2 == 0) fail(ErrorKind::EvenDenominator, "edge windings need an odd denominator q");
  ChernOptions copt;
  copt.nx = as_int(c, "nx", 4, 4096);
  copt.ny = as_int(c, "ny", 4, 4096);
  EdgeOptions eopt;
  eopt.edge_width = as_int(c, "edge_width", 1, 1 << 20);
  eopt.threshold = c.real("threshold");
  const int n_sites = as_int(c, "num_sites", 2, 1 << 20);
  const int n_ky = as_int(c, "n_ky", 1, 1 << 20);

  std::vector<double> fid;
  if (c.text("fiducials") == "auto") {
    fid = gap_centers(p, copt.nx, copt.ny);
  } else {
    fid = parse_list(c.text("fiducials"), "fiducials");
    for (double& f : fid) f *= p.J;
    if (static_cast<int>(fid.size()) != q - 1)
      fail(ErrorKind::ConfigError, "key 'fiducials' needs q - 1 = " + std::to_string(q - 1) + " energies");
  }
  const SpectralFlow flow = spectral_flow(p, n_sites, n_ky, eopt);
  const WindingVector wv = winding_numbers(flow, fid);
  const ChernVector ch = chern_numbers(p, copt);
  const std::vector<int> windings = wv.windings();
  const std::vector<int> from_w = cherns_from_windings(windings);
  bool consistent = ch.all_defined() && ch.values() == from_w;
  for (const auto& g : wv.gaps) consistent = consistent && g.left_count == -g.right_count;

  io::CsvTable csv({"ky", "level", "energy", "label"});
  for (std::size_t s = 0; s < flow.ky.size(); ++s)
    for (std::size_t l = 0; l < flow.levels[s].size(); ++l) {
      csv.cell(flow.ky[s]).cell(l + 1).cell(flow.levels[s][l]).cell(std::string_view(to_string(flow.labels[s][l])));
      csv.end_row();
    }
  RunOutcome out;
  Output files(o, "edges");
  files.write("_spectral_flow.csv", csv.text(), out);

  Json s;
  s["command"] = "edges";
  s["config"] = config_echo(c);
  s["fiducials"] = numbers(fid);
  Json gw = Json::array(), br = Json::array(), lc = Json::array(), rc = Json::array();
  for (const auto& g : wv.gaps) {
    gw.push_back(g.winding);
    br.push_back(g.edge_branches);
    lc.push_back(g.left_count);
    rc.push_back(g.right_count);
  }
  s["windings"] = gw;
  s["edge_branches"] = br;
  s["left_counts"] = lc;
  s["right_counts"] = rc;
  s["chern"] = optional_ints(ch);
  s["chern_from_windings"] = from_w;
  s["consistent"] = consistent;
  files.write("_windings.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

beam::PumpSetup pump_setup(const RunConfig& c) {
  beam::PumpSetup s;
  s.constants.gamma = c.real("gamma");
  s.constants.n0 = positive(c, "n0");
  s.constants.lambda_um = positive(c, "lambda_um");
  const std::string variant = c.text("variant");
  const Rational beta = beta_of(c);
  if (variant == "index") {
    s.design.variant = beam::IndexModulated{c.real("alpha"), beta, positive(c, "ws_um"), positive(c, "wx_um")};
  } else if (variant == "spacing") {
    s.design.variant = beam::SpacingModulated{beta, positive(c, "ws_um"), positive(c, "wx_um"), c.real("wm_um"),
                                              c.real("phi0_over_pi") * kPi};
  } else {
    fail(ErrorKind::ConfigError, "key 'variant' must be index or spacing, got '" + variant + "'");
  }
  s.design.num_guides = as_int(c, "num_guides", 1, 100000);
  s.design.Z_um = positive(c, "Z_cm") * 1e4;
  s.input_width_um = positive(c, "input_width_um");
  s.dx = positive(c, "dx_um");
  s.dz = positive(c, "dz_um");
  s.pad_guides = as_int(c, "pad_guides", 0, 100000);
  s.slices = as_int(c, "slices", 1, 1000000);
  s.propagation.absorber_strength = c.real("absorber_per_um");
  s.propagation.leakage_limit = positive(c, "leakage_limit");
  return s;
}

RunOutcome cmd_pump(const RunConfig& c, const RunOptions& o) {
  const beam::PumpSetup setup = pump_setup(c);
  for (const auto& w : setup.design.warnings()) note(o, "warning: " + w);
  const beam::PumpResult r = beam::run_pump(setup);
  const auto& traj = r.trajectory;
  const int nx = r.grid.nx;
  const int rows = static_cast<int>(traj.fields.size());

  std::vector<std::string> head{"z_um"};
  for (int i = 0; i < nx; ++i) head.push_back(io::format_double(r.grid.x(i)));
  io::CsvTable csv(head);
  std::vector<int> levels(static_cast<std::size_t>(nx) * rows, 0);
  for (int s = 0; s < rows; ++s) {
    csv.cell(traj.z[s]);
    double top = 0.0;
    for (int i = 0; i < nx; ++i) top = std::max(top, std::norm(traj.fields[s][i]));
    for (int i = 0; i < nx; ++i) {
      const double v = std::norm(traj.fields[s][i]);
      csv.cell(v);
      if (top > 0.0) levels[static_cast<std::size_t>(s) * nx + i] = static_cast<int>(std::lround(v / top * 255.0));
    }
    csv.end_row();
  }
  RunOutcome out;
  Output files(o, "pump");
  files.write("_intensity.csv", csv.text(), out);
  files.write("_intensity.pgm", io::pgm_levels(levels, nx, rows), out);

  const double g1 = tb::continuum_gap(setup.constants, setup.design);
  Json s;
  s["command"] = "pump";
  s["config"] = config_echo(c);
  s["input_guide"] = r.input_guide;
  s["mean_x_start_um"] = io::number(r.mean_start);
  s["mean_x_end_um"] = io::number(r.mean_end);
  s["chern_estimate"] = io::number(r.chern_estimate);
  s["norm_drift_max_step"] = io::number(traj.max_step_drift);
  s["norm_drift_total"] = io::number(traj.total_drift);
  s["absorbed_power"] = io::number(traj.absorbed);
  s["leakage_max"] = io::number(traj.max_leakage);
  s["min_peak_guide_fraction"] = io::number(r.min_peak_fraction);
  s["continuum_gap_G1_per_um"] = io::number(g1);
  s["lz_ratio"] = io::number(beam::lz_ratio(g1, setup.design.Z_um));
  s["grid"] = {{"nx", nx},
               {"dx_um", io::number(r.grid.dx)},
               {"x_min_um", io::number(r.grid.x_min)},
               {"dz_um", io::number(r.grid.dz)},
               {"absorber_um", io::number(r.grid.absorber_um)}};
  Json warn = Json::array();
  for (const auto& w : setup.design.warnings()) warn.push_back(w);
  s["warnings"] = warn;
  files.write("_summary.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

RunOutcome cmd_extract(const RunConfig& c, const RunOptions& o) {
  beam::OpticalConstants k;
  k.gamma = c.real("gamma");
  k.n0 = positive(c, "n0");
  k.lambda_um = positive(c, "lambda_um");
  beam::WaveguideArrayDesign d;
  d.variant = beam::IndexModulated{c.real("alpha"), beta_of(c), positive(c, "ws_um"), positive(c, "wx_um")};
  tb::ExtractionOptions opt;
  opt.dx = positive(c, "dx_um");
  opt.window_spacings = positive(c, "window_spacings");
  opt.k_points = as_int(c, "k_points", 1, 4096);
  const tb::ExtractedParams p = tb::extract_parameters(k, d, opt);

  Json s;
  s["command"] = "extract";
  s["config"] = config_echo(c);
  s["gamma"] = io::number(k.gamma);
  s["J_per_um"] = io::number(p.J);
  s["J_mean_per_um"] = io::number(p.J_mean);
  s["nu_od_per_um"] = io::number(p.nu_od);
  s["nu_d_per_um"] = io::number(p.nu_d);
  s["delta_phi_rad"] = io::number(p.delta_phi);
  s["onsite_offsets_per_um"] = numbers(p.onsite);
  s["hopping_strengths_per_um"] = numbers(p.hoppings);
  s["neighbour_mode_overlaps"] = numbers(p.trial_overlaps);
  s["wannier_orthogonality_deficit"] = io::number(p.wannier_orthogonality_deficit);
  s["onsite_fit_residual_per_um"] = io::number(p.fit_residual);
  s["grid"] = {{"dx_um", io::number(opt.dx)},
               {"window_spacings", io::number(opt.window_spacings)},
               {"k_points", opt.k_points}};
  RunOutcome out;
  Output files(o, "extract");
  files.write("_parameters.json", io::dump(s), out);
  out.summary = std::move(s);
  return out;
}

// ---------------------------------------------------------------- presets

CheckResult expect(bool ok, const std::string& what) { return {ok, {(ok ? "ok: " : "MISMATCH: ") + what}}; }

CheckResult merge(std::initializer_list<CheckResult> parts) {
  CheckResult r;
  for (const auto& p : parts) {
    r.passed = r.passed && p.passed;
    r.messages.insert(r.messages.end(), p.messages.begin(), p.messages.end());
  }
  return r;
}

std::string dump_compact(const Json& j) { return j.dump(); }

std::function<CheckResult(const Json&)> chern_is(std::vector<int> want) {
  return [want](const Json& s) {
    const Json w = want;
    return expect(s.at("chern") == w, "chern " + dump_compact(s.at("chern")) + " expected " + w.dump());
  };
}

std::function<CheckResult(const Json&)> edges_are(std::vector<int> windings, int branches) {
  return [windings, branches](const Json& s) {
    bool branch_ok = true;
    for (const auto& b : s.at("edge_branches")) branch_ok = branch_ok && b.get<int>() == branches;
    return merge({expect(s.at("windings") == Json(windings),
                         "windings " + dump_compact(s.at("windings")) + " expected " + Json(windings).dump()),
                  expect(branch_ok, "edge branches per gap " + dump_compact(s.at("edge_branches")) + " expected " +
                                        std::to_string(branches)),
                  expect(s.at("consistent").get<bool>(), "bulk-edge correspondence")});
  };
}

std::function<CheckResult(const Json&)> pump_near(double target) {
  return [target](const Json& s) {
    const double cest = s.at("chern_estimate").get<double>();
    return expect(std::abs(cest - target) <= 0.05,
                  "C_est " + io::format_double(cest) + " expected " + io::format_double(target) + " +- 0.05");
  };
}

std::function<CheckResult(const Json&)> extract_near(double J_target) {
  return [J_target](const Json& s) {
    const double J = s.at("J_per_um").get<double>();
    const double od = s.at("nu_od_per_um").get<double>();
    const double d = s.at("nu_d_per_um").get<double>();
    const double phi = s.at("delta_phi_rad").get<double>();
    return merge({expect(std::abs(J - J_target) <= 0.3 * J_target,
                         "J " + io::format_double(J) + " within 30% of " + io::format_double(J_target)),
                  expect(d < 0.0, "nu_d < 0"),
                  expect(std::abs(d) >= 10.0 * std::abs(od), "|nu_d| >> |nu_od|"),
                  expect(std::abs(od) <= 0.3 * J, "nu_od << J"),
                  expect(std::abs(phi - kPi / 3.0) <= 0.3,
                         "delta_phi " + io::format_double(phi) + " within 0.3 rad of pi/3")});
  };
}

const std::vector<Preset>& presets_impl() {
  static const std::vector<Preset> table = {
      {"fig2", "phase-diagram", "Chern phase diagram over nu_od/J, nu_d/J in [0, 8] (81 x 81)", {},
       [](const Json& s) {
         bool low = false, high = false;
         for (const auto& e : s.at("nu_d_zero_axis")) {
           low = low || e.at("tuple") == "(-1, 2, -1)";
           high = high || e.at("tuple") == "(2, -4, 2)";
         }
         return merge({expect(low, "(-1, 2, -1) region on the nu_d = 0 axis"),
                       expect(high, "(2, -4, 2) region on the nu_d = 0 axis")});
       }},
      {"fig3a", "gaps", "gaps versus nu_od/J in [0, 12], nu_d = 0", {},
       [](const Json& s) {
         const double r = s.at("closure").at("nu_od_over_J").get<double>();
         const double g = s.at("closure").at("max_gap").get<double>();
         return merge({expect(std::abs(r - 4.0) <= 0.02, "closure at " + io::format_double(r) + " expected 4 +- 0.02"),
                       expect(g < 1e-3, "gap at closure " + io::format_double(g) + " < 1e-3 J")});
       }},
      {"fig3b", "bands", "bands at nu_od/J = 1", {{"nu_od_over_J", "1"}},
       [](const Json& s) {
         const double g1 = s.at("gaps")[0].get<double>(), g2 = s.at("gaps")[1].get<double>();
         return merge({chern_is({-1, 2, -1})(s),
                       expect(g1 > 0.0 && std::abs(g1 - g2) <= 1e-10, "G1 = G2 > 0")});
       }},
      {"fig3c", "bands", "bands at the transition nu_od/J = 4", {{"nu_od_over_J", "4"}},
       [](const Json& s) {
         bool all_undef = true;
         for (const auto& v : s.at("chern")) all_undef = all_undef && v.is_null();
         return expect(all_undef, "Chern numbers undefined at the closure, got " + dump_compact(s.at("chern")));
       }},
      {"fig3d", "bands", "bands at nu_od/J = 10", {{"nu_od_over_J", "10"}}, chern_is({2, -4, 2})},
      {"fig4a", "edges", "open-chain spectrum, N = 89, nu_od/J = 1", {{"nu_od_over_J", "1"}}, edges_are({-1, 1}, 2)},
      {"fig4b", "edges", "open-chain spectrum, N = 89, nu_od/J = 10", {{"nu_od_over_J", "10"}},
       edges_are({2, -2}, 4)},
      {"fig5a", "pump", "index modulation, gamma = 9e-4, Z = 30 cm",
       {{"variant", "index"}, {"gamma", "9e-4"}, {"Z_cm", "30"}, {"input_width_um", "3.77"}}, pump_near(-0.97)},
      {"fig5b", "pump", "index modulation, gamma = 5e-4, Z = 10 cm",
       {{"variant", "index"}, {"gamma", "5e-4"}, {"Z_cm", "10"}, {"input_width_um", "4.47"}}, pump_near(-0.99)},
      {"fig5c", "pump", "spacing modulation, gamma = 5e-4, Z = 15 cm",
       {{"variant", "spacing"},
        {"gamma", "5e-4"},
        {"Z_cm", "15"},
        {"ws_um", "20"},
        {"wm_um", "18"},
        {"phi0_over_pi", "0.2"},
        {"input_width_um", "4.3"}},
       pump_near(1.97)},
      {"extract-g9", "extract", "tight-binding parameters at gamma = 9e-4", {{"gamma", "9e-4"}},
       extract_near(3.76e-4)},
      {"extract-g5", "extract", "tight-binding parameters at gamma = 5e-4", {{"gamma", "5e-4"}},
       extract_near(5.23e-4)},
  };
  return table;
}

}  // namespace

const std::vector<CommandInfo>& command_table() { return commands_impl(); }

const CommandInfo& find_command(const std::string& name) {
  for (const auto& c : commands_impl())
    if (c.name == name) return c;
  fail(ErrorKind::ConfigError, "unknown command '" + name + "'");
}

const std::vector<Preset>& preset_table() { return presets_impl(); }

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets_impl())
    if (p.name == name) return p;
  fail(ErrorKind::ConfigError, "unknown preset '" + name + "' (see --list-presets)");
}

RunConfig preset_config(const Preset& preset) {
  RunConfig c(find_command(preset.command).keys);
  for (const auto& [k, v] : preset.settings) c.set(k, v);
  return c;
}

RunOutcome run_command(const std::string& command, const RunConfig& config, const RunOptions& options) {
  if (command == "bands") return cmd_bands(config, options);
  if (command == "gaps") return cmd_gaps(config, options);
  if (command == "phase-diagram") return cmd_phase_diagram(config, options);
  if (command == "edges") return cmd_edges(config, options);
  if (command == "pump") return cmd_pump(config, options);
  if (command == "extract") return cmd_extract(config, options);
  fail(ErrorKind::ConfigError, "unknown command '" + command + "'");
}

}  // namespace aah
