#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "modlab/errors.hpp"
#include "modlab/estimates.hpp"
#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"
#include "modlab/gabor.hpp"
#include "modlab/propagator.hpp"
#include "modlab/random.hpp"
#include "modlab/scenarios.hpp"
#include "modlab/seminorms.hpp"
#include "modlab/solver.hpp"

namespace modlab::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kCommands = {"partition-check", "norm",  "gabor",   "propagate", "estimate",
                                            "solve",           "picard", "blowup", "inflate",   "embed"};

json defaults_for(const std::string& cmd) {
  if (cmd == "partition-check") {
    return {{"dim", 2}, {"L", 8 * kPi}, {"N", 128}, {"seed", nullptr}, {"family_size", 20}};
  }
  if (cmd == "norm") {
    return {{"dim", 1},
            {"L", 8 * kPi},
            {"N", 256},
            {"s", 0.0},
            {"p", 2.0},
            {"q", 1.0},
            {"window_width", 1.0},
            {"field", {{"kind", "modulated-gaussian"}, {"k", {3}}, {"center", {0.0}}, {"width", 1.0}, {"amplitude", 1.0}}}};
  }
  if (cmd == "gabor") {
    return {{"dim", 1},          {"L", 16 * kPi},     {"N", 1024},        {"seed", nullptr},
            {"atoms", 5},        {"atom_k_max", 3},   {"atom_l_max", 10}, {"K", nullptr},
            {"L_rad", nullptr},  {"tolerance", 1e-10}, {"max_iterations", 500}, {"frame_bounds", true}};
  }
  if (cmd == "propagate") {
    return {{"dim", 2},          {"L", 8 * kPi},    {"N", 192},       {"signature", {1, -1}}, {"seed", nullptr},
            {"atoms", 10},       {"atom_k_max", 2}, {"atom_l_max", 8}, {"times", {0.1, 0.5, 1.0}}};
  }
  if (cmd == "estimate") {
    return {{"case", nullptr}, {"seed", nullptr},        {"dim", nullptr},         {"L", nullptr},
            {"N", nullptr},    {"signature", nullptr},   {"k_list", nullptr},      {"p", nullptr},
            {"pbar", nullptr}, {"q", nullptr},           {"qbar", nullptr},        {"r", nullptr},
            {"strichartz_p", nullptr}, {"slices", nullptr}, {"window_scale", nullptr}, {"family_size", nullptr},
            {"shift", nullptr}, {"refinement", true},    {"window", true}};
  }
  if (cmd == "solve" || cmd == "picard") {
    json j = {{"dim", 2},          {"L", 8 * kPi},      {"N", 96},          {"signature", {1, -1}},
              {"kind", "power-derivative"}, {"lambda", {1.0, 1.0}}, {"kappa", 1}, {"mu", 0.0},
              {"nu", 1},           {"padding", 2.0},    {"amplitude", 0.01}, {"seed", nullptr},
              {"atoms", 3},        {"atom_k_max", 2},   {"atom_l_max", 4}};
    if (cmd == "solve") {
      j["dt"] = 0.01;
      j["T"] = 2.0;
      j["snapshots"] = 32;
      j["raster"] = false;
    } else {
      j["iterations"] = 5;
      j["window"] = 0.5;
      j["slices"] = 32;
    }
    return j;
  }
  if (cmd == "blowup") {
    return {{"t", 0.999},       {"T", 1.0},       {"schmap_t", 1.0},   {"h", 1e-3},       {"radius", 2.0},
            {"points", 41},     {"pde_t", 2.0},   {"pde_radius", 1.0}, {"L", 6.0},        {"N", 128},
            {"threshold", 1e-2}, {"curve_half_width", 2.0}, {"curve_points", 64}};
  }
  if (cmd == "inflate") {
    return {{"kappa", 1},   {"s", 0.0},       {"N", {8, 16, 32, 64}}, {"T", 8.0},
            {"slices", 128}, {"L", 160 * kPi}, {"grid_N", 65536},      {"eps", 0.125}};
  }
  if (cmd == "embed") {
    return {{"dim", 2},   {"L", 8 * kPi}, {"N", 128},      {"s", 0.0},      {"b", 1.5},
            {"count", 20}, {"max_k", 4},   {"seed", nullptr}, {"refine", true}};
  }
  throw ValidationError("unknown subcommand '" + cmd + "'");
}

bool compatible(const json& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) return v.is_array() || v.is_number();
  if (def.is_object()) return v.is_object();
  return false;
}

void merge_config(json& cfg, const json& file, const std::string& cmd) {
  if (!file.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [k, v] : file.items()) {
    if (!cfg.contains(k)) throw ValidationError("unknown config key '" + k + "' for subcommand " + cmd);
    if (!compatible(cfg[k], v)) throw ValidationError("config key '" + k + "' has the wrong type");
    cfg[k] = v;
  }
}

double num(const json& cfg, const std::string& key) {
  const json& v = cfg.at(key);
  if (v.is_string() && (v == "inf" || v == "infinity")) return kInf;
  if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& cfg, const std::string& key) {
  const double d = num(cfg, key);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ValidationError("config key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

std::vector<double> numbers(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError("config key '" + key + "' must be a number or an array");
  for (const auto& e : v) {
    if (e.is_string() && (e == "inf" || e == "infinity")) {
      out.push_back(kInf);
    } else if (e.is_number()) {
      out.push_back(e.get<double>());
    } else {
      throw ValidationError("config key '" + key + "' must hold numbers");
    }
  }
  return out;
}

std::vector<int> integers(const json& v, const std::string& key) {
  std::vector<int> out;
  for (double d : numbers(v, key)) {
    if (d != std::floor(d)) throw ValidationError("config key '" + key + "' must hold integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

cplx complex_of(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError("config key '" + key + "' must be a number or [re, im]");
}

Grid grid_from(const json& cfg, const std::string& lkey = "L", const std::string& nkey = "N") {
  const int dim = integer(cfg, "dim");
  require(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  std::vector<double> L = numbers(cfg.at(lkey), lkey);
  std::vector<int> N = integers(cfg.at(nkey), nkey);
  if (L.size() == 1) L.assign(static_cast<std::size_t>(dim), L[0]);
  if (N.size() == 1) N.assign(static_cast<std::size_t>(dim), N[0]);
  require(static_cast<int>(L.size()) == dim && static_cast<int>(N.size()) == dim,
          "grid L and N must have one entry or one per axis");
  return make_grid(L, N);
}

Signature signature_from(const json& cfg, int dim) {
  const std::vector<int> e = integers(cfg.at("signature"), "signature");
  require(static_cast<int>(e.size()) == dim, "signature length must match dim");
  for (int x : e) require(x == 1 || x == -1, "signature entries must be +1 or -1");
  return Signature::from(e);
}

std::uint64_t seed_of(const json& cfg) {
  const json& v = cfg.at("seed");
  if (v.is_null()) throw ValidationError("a seed is required for random families (config key 'seed' or --seed)");
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError("seed must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

FrameCoefficients random_atoms(const Grid& g, const FrameTruncation& trunc, int count, int kmax, int lmax,
                               std::uint64_t seed) {
  require(count >= 1, "atoms must be positive");
  require(kmax >= 0 && kmax <= trunc.K, "atom_k_max must lie inside the modulation truncation");
  require(lmax >= 0 && lmax <= trunc.L_rad, "atom_l_max must lie inside the translation truncation");
  Rng rng(seed);
  FrameCoefficients c = FrameCoefficients::zeros(g.dim, trunc);
  for (int i = 0; i < count; ++i) {
    LatticePoint k{0, 0, 0}, l{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      k[a] = rng.integer(-kmax, kmax);
      l[a] = rng.integer(-lmax, lmax);
    }
    c.at(k, l) += rng.complex_normal();
  }
  return c;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string());
  f.precision(17);
  return f;
}

struct Ctx {
  json cfg;
  fs::path out;
  std::ostream& os;
};

int cmd_partition(Ctx& c) {
  const Grid g = grid_from(c.cfg);
  const Partition P = build_partition();
  const std::uint64_t seed = seed_of(c.cfg);
  const int count = integer(c.cfg, "family_size");
  require(count >= 1, "family_size must be positive");
  const double defect = partition_defect(g, P);
  Rng rng(seed);
  double worst = 0.0;
  for (int m = 0; m < count; ++m) {
    std::array<double, 3> ctr{}, k{};
    for (int a = 0; a < g.dim; ++a) {
      ctr[a] = rng.uniform(-0.25, 0.25) * g.half_extent[a];
      k[a] = rng.uniform(-0.3, 0.3) * g.k_max(a);
    }
    const cplx amp = rng.complex_normal();
    const double w = rng.uniform(1.5, 3.0);
    const ComplexField f = sample(g, [&](const double* x) {
      double r2 = 0.0, ph = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        r2 += (x[a] - ctr[a]) * (x[a] - ctr[a]);
        ph += k[a] * x[a];
      }
      return amp * std::exp(-r2 / (2 * w * w)) * cplx(std::cos(ph), std::sin(ph));
    });
    worst = std::max(worst, l2_norm(reconstruct(f, P) - f) / l2_norm(f));
  }
  json rep = {{"subcommand", "partition-check"}, {"config", c.cfg}, {"partition_defect", defect},
              {"max_relative_reconstruction_error", worst}, {"construction", P.construction()}};
  write_json(c.out / "partition.json", rep);
  c.os << "partition-check: defect=" << defect << " reconstruction=" << worst << '\n';
  return 0;
}

ComplexField field_from(const json& spec, const Grid& g) {
  if (!spec.is_object()) throw ValidationError("field must be an object");
  for (const auto& [k, v] : spec.items()) {
    if (k != "kind" && k != "k" && k != "center" && k != "width" && k != "amplitude") {
      throw ValidationError("unknown field key '" + k + "'");
    }
  }
  const std::string kind = spec.value("kind", std::string("modulated-gaussian"));
  std::vector<double> k = spec.contains("k") ? numbers(spec["k"], "field.k") : std::vector<double>(g.dim, 0.0);
  std::vector<double> ctr =
      spec.contains("center") ? numbers(spec["center"], "field.center") : std::vector<double>(g.dim, 0.0);
  if (k.size() == 1) k.assign(static_cast<std::size_t>(g.dim), k[0]);
  if (ctr.size() == 1) ctr.assign(static_cast<std::size_t>(g.dim), ctr[0]);
  require(static_cast<int>(k.size()) == g.dim && static_cast<int>(ctr.size()) == g.dim,
          "field.k and field.center need one entry per axis");
  const double w = spec.contains("width") ? spec["width"].get<double>() : 1.0;
  const double amp = spec.contains("amplitude") ? spec["amplitude"].get<double>() : 1.0;
  require(w > 0.0, "field.width must be positive");
  if (kind == "modulated-gaussian" || kind == "gaussian") {
    const bool mod = kind == "modulated-gaussian";
    return sample(g, [&](const double* x) {
      double r2 = 0.0, ph = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        r2 += (x[a] - ctr[a]) * (x[a] - ctr[a]);
        if (mod) ph += k[a] * x[a];
      }
      return amp * std::exp(-r2 / (2 * w * w)) * cplx(std::cos(ph), std::sin(ph));
    });
  }
  if (kind == "bump") {
    return sample(g, [&](const double* x) {
      double r2 = 0.0, ph = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        r2 += (x[a] - ctr[a]) * (x[a] - ctr[a]);
        ph += k[a] * x[a];
      }
      return amp * bump_psi(std::sqrt(r2) / w) * cplx(std::cos(ph), std::sin(ph));
    });
  }
  throw ValidationError("unknown field kind '" + kind + "'");
}

int cmd_norm(Ctx& c) {
  const Grid g = grid_from(c.cfg);
  const Partition P = build_partition();
  const ComplexField f = field_from(c.cfg.at("field"), g);
  const NormSpec spec{num(c.cfg, "s"), num(c.cfg, "p"), num(c.cfg, "q")};
  const double box = modulation_norm(f, spec, P);
  const double stft = stft_modulation_norm(f, spec, num(c.cfg, "window_width"));
  const auto pts = lattice(g);
  const auto norms = box_norms(f, spec.p, P);
  auto csv = open_out(c.out / "norm_boxes.csv");
  for (int a = 0; a < g.dim; ++a) csv << 'k' << (a + 1) << ',';
  csv << "norm\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (norms[i] == 0.0) continue;
    for (int a = 0; a < g.dim; ++a) csv << pts[i][a] << ',';
    csv << norms[i] << '\n';
  }
  write_json(c.out / "norm.json",
             {{"subcommand", "norm"}, {"config", c.cfg}, {"box_norm", box}, {"stft_norm", stft}, {"ratio", box / stft}});
  c.os << "norm: box=" << box << " stft=" << stft << '\n';
  return 0;
}

FrameTruncation truncation_from(const json& cfg, const Grid& g) {
  FrameTruncation t = default_truncation(g);
  if (!cfg.at("K").is_null()) t.K = integer(cfg, "K");
  if (!cfg.at("L_rad").is_null()) t.L_rad = integer(cfg, "L_rad");
  return t;
}

int cmd_gabor(Ctx& c) {
  const Grid g = grid_from(c.cfg);
  const FrameTruncation trunc = truncation_from(c.cfg, g);
  const FrameCoefficients src = random_atoms(g, trunc, integer(c.cfg, "atoms"), integer(c.cfg, "atom_k_max"),
                                             integer(c.cfg, "atom_l_max"), seed_of(c.cfg));
  const ComplexField f = synthesize(src, g);
  AnalyzeOptions opts;
  opts.tolerance = num(c.cfg, "tolerance");
  opts.max_iterations = integer(c.cfg, "max_iterations");
  const FrameCoefficients can = analyze(f, trunc, opts);
  const double err = l2_norm(synthesize(can, g) - f) / l2_norm(f);
  json rep = {{"subcommand", "gabor"}, {"config", c.cfg}, {"K", trunc.K}, {"L_rad", trunc.L_rad},
              {"round_trip_relative_error", err}};
  if (c.cfg.at("frame_bounds").get<bool>()) {
    const FrameBounds fb = frame_bounds(g, trunc);
    rep["frame_A"] = fb.A;
    rep["frame_B"] = fb.B;
    rep["subspace_dim"] = fb.subspace_dim;
  }
  auto coef = open_out(c.out / "gabor_coefficients.txt");
  write_coefficients(coef, can);
  write_json(c.out / "gabor.json", rep);
  c.os << "gabor: round-trip relative error " << err << '\n';
  return 0;
}

int cmd_propagate(Ctx& c) {
  const Grid g = grid_from(c.cfg);
  const Signature eps = signature_from(c.cfg, g.dim);
  const FrameTruncation trunc = default_truncation(g);
  const FrameCoefficients atoms = random_atoms(g, trunc, integer(c.cfg, "atoms"), integer(c.cfg, "atom_k_max"),
                                               integer(c.cfg, "atom_l_max"), seed_of(c.cfg));
  const ComplexField f = synthesize(atoms, g);
  auto csv = open_out(c.out / "propagate.csv");
  csv << "t,relative_l2_error\n";
  double worst = 0.0;
  for (double t : numbers(c.cfg.at("times"), "times")) {
    const ComplexField a = propagate_gabor(atoms, t, eps, g);
    const ComplexField b = propagate_spectral(f, t, eps);
    const double e = l2_norm(a - b) / l2_norm(b);
    worst = std::max(worst, e);
    csv << t << ',' << e << '\n';
  }
  write_json(c.out / "propagate.json", {{"subcommand", "propagate"}, {"config", c.cfg}, {"max_relative_error", worst}});
  c.os << "propagate: max relative error " << worst << '\n';
  return 0;
}

int cmd_estimate(Ctx& c) {
  if (c.cfg.at("case").is_null()) throw ValidationError("estimate needs a case (--case or config key 'case')");
  const std::string id = c.cfg.at("case").get<std::string>();
  EstimateConfig ec = default_estimate_config(id);
  ec.seed = seed_of(c.cfg);
  const json& j = c.cfg;
  if (!j.at("dim").is_null() || !j.at("L").is_null() || !j.at("N").is_null()) {
    const int d = ec.grid.dim;
    const json Ld(std::vector<double>(ec.grid.half_extent.begin(), ec.grid.half_extent.begin() + d));
    const json Nd(std::vector<int>(ec.grid.samples.begin(), ec.grid.samples.begin() + d));
    json gj = {{"dim", j.at("dim").is_null() ? json(d) : j.at("dim")},
               {"L", j.at("L").is_null() ? Ld : j.at("L")},
               {"N", j.at("N").is_null() ? Nd : j.at("N")}};
    ec.grid = grid_from(gj);
    if (ec.eps.dim != ec.grid.dim) ec.eps = Signature::elliptic(ec.grid.dim);
  }
  if (!j.at("signature").is_null()) ec.eps = signature_from(j, ec.grid.dim);
  if (!j.at("k_list").is_null()) ec.k_list = integers(j.at("k_list"), "k_list");
  auto opt = [&](const char* key, double& target) {
    if (!j.at(key).is_null()) target = num(j, key);
  };
  opt("p", ec.params.p);
  opt("pbar", ec.params.pbar);
  opt("q", ec.params.q);
  opt("qbar", ec.params.qbar);
  opt("r", ec.params.r);
  opt("strichartz_p", ec.params.strichartz_p);
  opt("window_scale", ec.window_scale);
  if (!j.at("slices").is_null()) ec.slices = integer(j, "slices");
  if (!j.at("family_size").is_null()) ec.family_size = integer(j, "family_size");
  if (!j.at("shift").is_null()) {
    const auto s = numbers(j.at("shift"), "shift");
    require(static_cast<int>(s.size()) == ec.grid.dim, "shift needs one entry per axis");
    for (std::size_t a = 0; a < s.size(); ++a) ec.shift[a] = s[a];
  }
  ec.check_refinement = j.at("refinement").get<bool>();
  ec.check_window = j.at("window").get<bool>();

  const EstimateReport r = run_estimate(ec);
  auto csv = open_out(c.out / ("estimate_" + r.case_id + ".csv"));
  write_report_csv(csv, r);
  json rep = {{"subcommand", "estimate"},
              {"config", c.cfg},
              {"case", r.case_id},
              {"k", r.k_values},
              {"max_ratio_per_k", r.max_ratio_per_k},
              {"max_ratio", r.max_ratio},
              {"weight_exponent", r.weight_exponent},
              {"slope", r.slope},
              {"slope_tolerance", r.slope_tolerance},
              {"slope_ok", r.slope_ok()}};
  if (r.has_secondary) {
    rep["secondary_slope"] = r.secondary_slope;
    rep["secondary_bound"] = r.secondary_bound;
  }
  if (ec.check_refinement) {
    rep["refined_max_ratio"] = r.refined_max_ratio;
    rep["refinement_change"] = r.refinement_change;
  }
  if (ec.check_window) {
    rep["window_max_ratio"] = r.window_max_ratio;
    rep["window_change"] = r.window_change;
  }
  write_json(c.out / ("estimate_" + r.case_id + ".json"), rep);
  c.os << "estimate " << r.case_id << ": slope=" << r.slope << " max_ratio=" << r.max_ratio;
  if (r.has_secondary) c.os << " secondary_slope=" << r.secondary_slope;
  if (ec.check_refinement) c.os << " refinement_change=" << r.refinement_change;
  c.os << '\n';
  return 0;
}

struct SolverSetup {
  Grid g;
  SolverParams p;
  ComplexField u0;
};

SolverSetup solver_setup(const json& cfg, bool with_time) {
  SolverSetup s;
  s.g = grid_from(cfg);
  s.p.eps = signature_from(cfg, s.g.dim);
  s.p.kind = parse_nonlinearity(cfg.at("kind").get<std::string>());
  const json& lam = cfg.at("lambda");
  require(lam.is_array() && static_cast<int>(lam.size()) == s.g.dim, "lambda needs one entry per axis");
  for (int a = 0; a < s.g.dim; ++a) s.p.lambda[a] = complex_of(lam[a], "lambda");
  s.p.kappa = integer(cfg, "kappa");
  s.p.mu = complex_of(cfg.at("mu"), "mu");
  s.p.nu = integer(cfg, "nu");
  s.p.padding = num(cfg, "padding");
  if (with_time) {
    s.p.dt = num(cfg, "dt");
    s.p.T = num(cfg, "T");
  }
  const FrameTruncation trunc = default_truncation(s.g);
  const FrameCoefficients c = random_atoms(s.g, trunc, integer(cfg, "atoms"), integer(cfg, "atom_k_max"),
                                           integer(cfg, "atom_l_max"), seed_of(cfg));
  s.u0 = synthesize(c, s.g);
  const double amp = num(cfg, "amplitude");
  require(amp >= 0.0, "amplitude must be nonnegative");
  const double n = modulation_norm(s.u0, {1.0 / (2.0 * s.p.kappa), 2.0, 1.0}, build_partition());
  s.u0 *= cplx(n > 0.0 ? amp / n : 0.0);
  return s;
}

int cmd_solve(Ctx& c) {
  const SolverSetup s = solver_setup(c.cfg, true);
  const Partition P = build_partition();
  EvolveOptions opts;
  opts.snapshots = integer(c.cfg, "snapshots");
  const Evolution ev = evolve(s.u0, s.p, P, opts);
  {
    auto f = open_out(c.out / "solve_trace.csv");
    write_trace_csv(f, ev.trace);
    auto g = open_out(c.out / "solve_free_trace.csv");
    write_trace_csv(g, ev.free_trace);
  }
  if (c.cfg.at("raster").get<bool>()) {
    std::ofstream bin(c.out / "snapshots.bin", std::ios::binary);
    for (const auto& slice : ev.u.slices) {
      for (const auto& z : slice.v) {
        const double a = std::abs(z);
        bin.write(reinterpret_cast<const char*>(&a), sizeof a);
      }
    }
    json shape = {{"format", "float64 little-endian |u|, slice-major then row-major"},
                  {"slices", ev.u.slices.size()},
                  {"samples", std::vector<int>(s.g.samples.begin(), s.g.samples.begin() + s.g.dim)},
                  {"dt", ev.u.dt}};
    write_json(c.out / "snapshots.json", shape);
  }
  json growth = json::object();
  for (std::size_t i = 0; i < ev.trace.names.size(); ++i) growth[ev.trace.names[i]] = ev.growth[i];
  const double m0 = l2_norm(s.u0), m1 = l2_norm(ev.u.slices.back());
  write_json(c.out / "solve.json", {{"subcommand", "solve"},
                                    {"config", c.cfg},
                                    {"growth_vs_free", growth},
                                    {"mass_initial", m0},
                                    {"mass_final", m1},
                                    {"max_abs_final", lp_norm(ev.u.slices.back(), kInf)}});
  c.os << "solve: T=" << s.p.T << " mass " << m0 << " -> " << m1 << '\n';
  return 0;
}

int cmd_picard(Ctx& c) {
  const SolverSetup s = solver_setup(c.cfg, false);
  const Partition P = build_partition();
  const PicardTrace tr =
      picard_iterate(s.u0, s.p, integer(c.cfg, "iterations"), num(c.cfg, "window"), integer(c.cfg, "slices"), P);
  auto csv = open_out(c.out / "picard.csv");
  csv << "iterate,distance,ratio\n";
  for (std::size_t i = 0; i < tr.distance.size(); ++i) {
    csv << tr.iterate[i] << ',' << tr.distance[i] << ',';
    if (i > 0) csv << tr.ratio[i - 1];
    csv << '\n';
  }
  write_json(c.out / "picard.json", {{"subcommand", "picard"},
                                     {"config", c.cfg},
                                     {"distance", tr.distance},
                                     {"ratio", tr.ratio},
                                     {"diverged", tr.diverged}});
  c.os << "picard: " << tr.distance.size() << " iterates";
  if (!tr.ratio.empty()) c.os << ", last ratio " << tr.ratio.back();
  c.os << (tr.diverged ? ", diverged" : "") << '\n';
  return tr.diverged ? 2 : 0;
}

int cmd_blowup(Ctx& c) {
  const json& j = c.cfg;
  const Grid g = make_grid(2, num(j, "L"), integer(j, "N"));
  const double t = num(j, "t"), T = num(j, "T"), h = num(j, "h");
  const SphereField sph = blowup_sphere(num(j, "schmap_t"), g);
  const SchmapResidual r1 = schmap_residual(num(j, "schmap_t"), num(j, "radius"), integer(j, "points"), h);
  const SchmapResidual r2 = schmap_residual(num(j, "schmap_t"), num(j, "radius"), integer(j, "points"), h / 2);
  const BlowupReport bu = blowup_u(t, T, g, num(j, "threshold"));
  const double curve = blowup_curve_max(t, T, num(j, "curve_half_width"), integer(j, "curve_points"));
  const PdeResidual pr = blowup_pde_residual(num(j, "pde_t"), T, num(j, "pde_radius"), integer(j, "points"), h);
  auto csv = open_out(c.out / "blowup_singular.csv");
  csv << "x1,x2\n";
  for (const auto& n : bu.singular_nodes) csv << n[0] << ',' << n[1] << '\n';
  write_json(c.out / "blowup.json", {{"subcommand", "blowup"},
                                     {"config", c.cfg},
                                     {"sphere_unit_defect", sph.unit_defect()},
                                     {"schmap_residual", r1.residual},
                                     {"schmap_residual_half_step", r2.residual},
                                     {"schmap_order_ratio", r1.residual / r2.residual},
                                     {"box_s2_discrepancy", r1.box_s2_discrepancy},
                                     {"box_s3_discrepancy", r1.box_s3_discrepancy},
                                     {"grid_max_abs_u", bu.max_abs},
                                     {"curve_max_abs_u", curve},
                                     {"singular_nodes", bu.singular_nodes.size()},
                                     {"values_suppressed", bu.suppressed},
                                     {"pde_residual", pr.residual},
                                     {"pde_residual_printed_sign", pr.printed_sign_residual}});
  c.os << "blowup: schmap residual " << r1.residual << ", |u| on curve " << curve << " at |t-T| = " << std::abs(t - T)
       << '\n';
  return 0;
}

int cmd_inflate(Ctx& c) {
  const json& j = c.cfg;
  IllposedSpec spec;
  spec.kappa = integer(j, "kappa");
  spec.s = num(j, "s");
  spec.eps = num(j, "eps");
  const std::vector<int> Ns = integers(j.at("N"), "N");
  require(!Ns.empty(), "N list must not be empty");
  spec.N = Ns.front();
  const Grid g = make_grid(1, num(j, "L"), integer(j, "grid_N"));
  const InflationResult r = norm_inflation_sweep(spec, Ns, num(j, "T"), integer(j, "slices"), g);
  auto csv = open_out(c.out / "inflate.csv");
  csv << "N,norm\n";
  for (std::size_t i = 0; i < r.N.size(); ++i) csv << r.N[i] << ',' << r.norm[i] << '\n';
  write_json(c.out / "inflate.json", {{"subcommand", "inflate"},
                                      {"config", c.cfg},
                                      {"N", r.N},
                                      {"norm", r.norm},
                                      {"slope", r.slope},
                                      {"predicted", 1.0 - 2.0 * spec.kappa * spec.s}});
  c.os << "inflate: slope=" << r.slope << " (1 - 2 kappa s = " << 1.0 - 2.0 * spec.kappa * spec.s << ")\n";
  return 0;
}

int cmd_embed(Ctx& c) {
  const json& j = c.cfg;
  const Grid g = grid_from(j);
  const Partition P = build_partition();
  const auto fam = embedding_family(g.dim, integer(j, "count"), integer(j, "max_k"), seed_of(j));
  const double s = num(j, "s"), b = num(j, "b");
  const EmbeddingResult r = embedding_sweep(fam, g, s, b, P);
  std::optional<EmbeddingResult> fine;
  if (j.at("refine").get<bool>()) fine = embedding_sweep(fam, refined_grid(g, 2), s, b, P);
  auto csv = open_out(c.out / "embed.csv");
  csv << "member,kind,ratio" << (fine ? ",refined_ratio" : "") << '\n';
  for (std::size_t i = 0; i < fam.size(); ++i) {
    csv << i << ',' << fam[i].kind << ',' << r.ratio[i];
    if (fine) csv << ',' << fine->ratio[i];
    csv << '\n';
  }
  json rep = {{"subcommand", "embed"}, {"config", c.cfg}, {"max_ratio", r.max_ratio}};
  if (fine) {
    rep["refined_max_ratio"] = fine->max_ratio;
    rep["refinement_change"] = std::abs(fine->max_ratio - r.max_ratio) / r.max_ratio;
  }
  write_json(c.out / "embed.json", rep);
  c.os << "embed: max ratio " << r.max_ratio;
  if (fine) c.os << " (refined " << fine->max_ratio << ")";
  c.os << '\n';
  return 0;
}

std::string usage() {
  std::ostringstream os;
  os << "usage: modlab <subcommand> [--config PATH] [--out DIR] [--seed U64] [options]\n"
     << "subcommands:";
  for (const auto& c : kCommands) os << ' ' << c;
  os << "\nrun 'modlab <subcommand> --help' for the options of a subcommand\n";
  return os.str();
}

json parse_int_list(const std::string& text) {
  json arr = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size()) throw std::invalid_argument("trailing");
      arr.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("malformed integer list '" + text + "'");
    }
  }
  if (arr.empty()) throw ValidationError("empty integer list");
  return arr;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() <= 1) {
    err << usage();
    return 1;
  }
  const std::string cmd = args[1];
  if (cmd == "--help" || cmd == "-h") {
    out << usage();
    return 0;
  }
  if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end()) {
    err << "error: unknown subcommand '" << cmd << "'\n" << usage();
    return 1;
  }

  CLI::App app{"modlab " + cmd, "modlab " + cmd};
  app.set_help_flag("--help", "print the options of this subcommand");
  std::string config_path, out_dir = ".", case_id, n_list, times_list;
  std::optional<std::uint64_t> seed;
  std::optional<double> kappa, s, b, t, T, h, dt, p, q;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for random families");
  const json defaults = defaults_for(cmd);
  std::vector<std::pair<std::string, std::optional<double>*>> numeric;
  auto flag = [&](const char* name, const char* key, std::optional<double>& target) {
    if (defaults.contains(key)) {
      app.add_option(std::string("--") + name, target, std::string("overrides config key '") + key + "'");
      numeric.emplace_back(key, &target);
    }
  };
  flag("kappa", "kappa", kappa);
  flag("s", "s", s);
  flag("b", "b", b);
  flag("t", "t", t);
  flag("T", "T", T);
  flag("h", "h", h);
  flag("dt", "dt", dt);
  flag("p", "p", p);
  flag("q", "q", q);
  if (cmd == "estimate") app.add_option("--case", case_id, "estimate case id");
  if (cmd == "inflate") app.add_option("--N", n_list, "comma-separated N values");
  if (cmd == "propagate") app.add_option("--times", times_list, "comma-separated times");

  std::vector<std::string> rest(args.begin() + 2, args.end());
  std::vector<std::string> argv_store;
  argv_store.push_back(args[0] + " " + cmd);
  argv_store.insert(argv_store.end(), rest.begin(), rest.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    json cfg = defaults;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ValidationError("cannot open config file " + config_path);
      json file;
      try {
        file = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
      }
      merge_config(cfg, file, cmd);
    }
    if (seed) cfg["seed"] = *seed;
    for (auto& [key, val] : numeric) {
      if (*val) cfg[key] = **val;
    }
    if (!case_id.empty()) cfg["case"] = case_id;
    if (!n_list.empty()) cfg["N"] = parse_int_list(n_list);
    if (!times_list.empty()) {
      json arr = json::array();
      std::stringstream ss(times_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          arr.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ValidationError("malformed time list '" + times_list + "'");
        }
      }
      cfg["times"] = arr;
    }
    fs::create_directories(out_dir);
    Ctx ctx{cfg, fs::path(out_dir), out};
    out.precision(10);
    if (cmd == "partition-check") return cmd_partition(ctx);
    if (cmd == "norm") return cmd_norm(ctx);
    if (cmd == "gabor") return cmd_gabor(ctx);
    if (cmd == "propagate") return cmd_propagate(ctx);
    if (cmd == "estimate") return cmd_estimate(ctx);
    if (cmd == "solve") return cmd_solve(ctx);
    if (cmd == "picard") return cmd_picard(ctx);
    if (cmd == "blowup") return cmd_blowup(ctx);
    if (cmd == "inflate") return cmd_inflate(ctx);
    return cmd_embed(ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: invalid config value: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace modlab::cli
