#include "nmzkit/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmzkit/errors.hpp"
#include "nmzkit/haar.hpp"
#include "nmzkit/projections.hpp"
#include "nmzkit/quantum.hpp"

namespace nmzkit::cli {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.' || k.find('.') == std::string::npos) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_')) return false;
  return true;
}

double parse_real(const KeyValues& kv, const std::string& key) {
  const std::string& s = kv.at(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigParse("config: " + key + " = '" + s + "' is not a finite real number");
  return v;
}

std::int64_t parse_int(const KeyValues& kv, const std::string& key, std::int64_t minValue) {
  const std::string& s = kv.at(key);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigParse("config: " + key + " = '" + s + "' is not an integer");
  if (v < minValue) throw ConfigParse("config: " + key + " must be at least " + std::to_string(minValue));
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigParse("config: " + key + " = '" + s + "' is not an unsigned integer");
  return v;
}

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json outcome_json(const demos::DemoOutcome& o, const std::string& mode) {
  json j;
  j["mode"] = mode;
  j["demo"] = o.demo;
  j["passed"] = o.passed();
  json params = json::object();
  for (const auto& [k, v] : o.parameters) params[k] = number(v);
  j["parameters"] = params;
  json checks = json::array();
  for (const auto& c : o.checks)
    checks.push_back({{"name", c.name}, {"value", number(c.value)}, {"tolerance", c.tolerance},
                      {"relation", c.upper ? "<=" : ">="}, {"passed", c.passed}});
  j["checks"] = checks;
  json metrics = json::object();
  for (const auto& [k, v] : o.metrics) metrics[k] = number(v);
  j["metrics"] = metrics;
  json refs = json::array();
  for (const auto& r : o.references) refs.push_back({{"name", r.name}, {"formula", r.formula}});
  j["references"] = refs;
  if (!o.notes.empty()) {
    json notes = json::object();
    for (const auto& [k, v] : o.notes) notes[k] = v;
    j["notes"] = notes;
  }
  if (!o.spectrum.empty()) {
    json spec = json::array();
    for (cplx c : o.spectrum) spec.push_back(complex_json(c));
    j["spectrum"] = spec;
  }
  if (o.solution) j["steps"] = o.solution->times.size();
  return j;
}

json table_json(const demos::Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (double v : r) row.push_back(number(v));
    rows.push_back(row);
  }
  return {{"header", t.header}, {"rows", rows}};
}

void write_outputs(const demos::DemoOutcome& o, const json& summary, const RunConfig& cfg, std::ostream& out) {
  out << summary.dump(2) << '\n';
  if (cfg.out_path.empty()) return;
  if (cfg.format == Format::Csv) {
    if (o.table.header.empty()) throw IoFailure("no result table to write for " + o.demo);
    emit_csv(o.table, cfg.out_path);
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw IoFailure("cannot open '" + cfg.out_path + "' for writing");
  json doc = summary;
  doc["table"] = table_json(o.table);
  f << doc.dump(2) << '\n';
  if (!f) throw IoFailure("write to '" + cfg.out_path + "' failed");
}

// ---- reduce ----

demos::DemoOutcome run_reduce(const RunConfig& cfg) {
  demos::DemoOutcome out;
  out.demo = "reduce";
  const auto grid = nmz::TimeGrid::span(cfg.params.tMax.value_or(5.0), cfg.params.dt.value_or(1e-3));
  quantum::BipartiteSystem sys;
  sys.dA = cfg.dA;
  sys.dB = cfg.dB;
  const int D = cfg.dA * cfg.dB;
  if (cfg.H) {
    sys.H = *cfg.H;
  } else if (D == 4) {
    sys.H = quantum::two_qubit_hamiltonian(cfg.params.omega, cfg.params.gamma);
  } else {
    throw ConfigParse("config: system.H is required unless dA = dB = 2");
  }
  if (cfg.rhoB) {
    sys.rhoB = *cfg.rhoB;
  } else {
    sys.rhoB = MatrixC::Identity(cfg.dB, cfg.dB) / static_cast<double>(cfg.dB);
    if (cfg.dB == 2) sys.rhoB.diagonal() << cfg.params.rhoBp0, 1.0 - cfg.params.rhoBp0;
  }
  if (cfg.rho0 && cfg.sigma0) throw ConfigParse("config: give system.rho0 or system.sigma0, not both");
  if (cfg.rho0) {
    sys.rho0 = *cfg.rho0;
  } else {
    MatrixC s0 = cfg.sigma0 ? *cfg.sigma0 : (cfg.dA == 2 ? demos::default_sigma0() : MatrixC(MatrixC::Identity(cfg.dA, cfg.dA) / cfg.dA));
    quantum::require_density_matrix(s0, cfg.dA, "system.sigma0");
    sys.rho0 = kron(s0, sys.rhoB);
  }
  try {
    sys.validate();
  } catch (const Error& e) {
    throw ConfigParse(std::string("config: invalid system: ") + e.what());
  }
  out.parameters = {{"dA", static_cast<double>(sys.dA)}, {"dB", static_cast<double>(sys.dB)}, {"dt", grid.dt},
                    {"tMax", grid.time(grid.nSteps)}};
  auto red = quantum::nmz_reduce_bipartite(sys, grid);
  const auto exact = quantum::exact_reduce(sys, grid);
  double opErr = 0.0;
  std::vector<VectorC> ref;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    opErr = std::max(opErr, operator_norm(red.sigma[k] - exact[k]));
    ref.push_back(vec(exact[k]));
  }
  red.solution.attach_reference(std::move(ref));
  out.references.push_back({"trajectory", "Tr_B(e^{-iHt} rho0 e^{iHt}) by eigendecomposition"});
  out.check("max_operator_norm_error", opErr, cfg.params.tolerance);
  out.metrics.push_back({"max_noise_norm", red.max_noise_norm});
  out.table = demos::solution_table(red.solution);
  out.solution = std::move(red.solution);
  return out;
}

// ---- verify ----

void add_axioms(demos::DemoOutcome& out, const std::string& prefix, const projections::ProjectionOp& P, int trials,
                std::uint64_t seed) {
  const auto rep = projections::verify_condexp_axioms(P, trials, seed);
  for (const auto& a : rep.axioms)
    if (a.applicable) out.check(prefix + "." + a.name, a.worst, projections::kAxiomTol);
  const auto sp = projections::check_state_preservation(P, trials, seed + 1);
  out.check(prefix + ".state_preservation", std::max(sp.worst_negativity, sp.worst_norm_error), projections::kAxiomTol);
}

demos::DemoOutcome run_verify(const RunConfig& cfg) {
  demos::DemoOutcome out;
  out.demo = "verify";
  const int trials = cfg.verify_trials;
  const std::uint64_t seed = cfg.params.seed;
  out.parameters = {{"trials", static_cast<double>(trials)}, {"mcSamples", static_cast<double>(cfg.mc_samples)},
                    {"seed", static_cast<double>(seed)}};

  // Level sets of a coarse observable on 60 weighted points.
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  VectorR w(60);
  VectorC h(60);
  for (int i = 0; i < 60; ++i) {
    w(i) = uni(eng);
    h(i) = static_cast<double>(i % 6);
  }
  w /= w.sum();
  const auto space = projections::FiniteMeasureSpace::make(w);
  const auto ls = projections::condexp_level_sets(space, h);
  add_axioms(out, "level_sets", ls.op, trials, seed);

  VectorR wn = VectorR::Constant(5, 0.2), wr = VectorR::Constant(7, 1.0 / 7);
  VectorR p(7);
  for (int i = 0; i < 7; ++i) p(i) = 1.0 + i;
  p /= p.sum();
  const auto ten = projections::condexp_tensor(projections::FiniteMeasureSpace::make(wn), projections::FiniteMeasureSpace::make(wr), p);
  add_axioms(out, "tensor", ten.P, trials, seed + 10);

  MatrixC rhoB = MatrixC::Zero(2, 2);
  rhoB.diagonal() << 0.7, 0.3;
  const auto pt = projections::condexp_partial_trace(2, 2, rhoB);
  add_axioms(out, "partial_trace", pt.op, trials, seed + 20);

  // Negative controls must be detected.
  VectorC e(60);
  for (int i = 0; i < 60; ++i) e(i) = (i % 2 ? 3.0 : -1.0);
  e /= (w.cast<cplx>().array() * e.array()).sum();
  const auto bad = projections::rank_one_projection(space, e);
  const bool badDetected = !projections::verify_condexp_axioms(bad, trials, seed).find("positivity").passed;
  VectorR wPrime = VectorR::Constant(60, 1.0 / 50);
  wPrime(0) = 1.0 - 59.0 / 50;
  const bool badState = !projections::verify_state_preservation(projections::signed_average_projection(wPrime), trials, seed);
  out.check("negative_control.positivity_detected", badDetected ? 1.0 : 0.0, 1.0, false);
  out.check("negative_control.state_preservation_detected", badState ? 1.0 : 0.0, 1.0, false);

  // Dyson and duality on both Lie-group examples.
  const auto su2 = demos::su2_model(1.0);
  const auto so3 = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7);
  out.check("dyson.su2", nmz::dyson_check(su2.L.matrix, su2.P.matrix, 1.0, 200), 1e-8);
  out.check("dyson.so3", nmz::dyson_check(so3.L.matrix, so3.P.matrix, 1.0, 200), 1e-8);

  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(0.1 * k);
  {
    // The state family is closed under L* (generator +iH), hence also under L = -L*.
    const MatrixC G = nmz::pairing_gram(*su2.state_basis, *su2.state_basis);
    const MatrixC L = -su2.Lstar.matrix;
    const auto rep = nmz::duality_check(L, G, VectorC::Unit(4, 1), VectorC::Unit(4, 2), times, std::nullopt,
                                        VectorC::Unit(4, 0));
    out.check("duality.su2", rep.max_discrepancy, 1e-8);
    out.check("duality.su2.normalization", rep.max_normalization_drift, 1e-8);
    out.check("duality.su2.adjoint_vs_state_rep", max_abs(rep.Lstar - su2.Lstar.matrix), 1e-8);
  }
  {
    const auto so3Adj = demos::so3_model(2.0 / 7, 3.0 / 7, 6.0 / 7, true);
    const MatrixC G = nmz::pairing_gram(*so3Adj.state_basis, *so3.obs_basis);
    const auto rep = nmz::duality_check(so3.L.matrix, G, 9.0 * VectorC::Unit(10, 2), VectorC::Unit(3, 0), times,
                                        so3Adj.Lstar.matrix);
    out.check("duality.so3", rep.max_discrepancy, 1e-8);
  }

  // Haar moments against exact cubature.
  std::mt19937_64 meng(seed + 30);
  std::normal_distribution<double> nd;
  double m1 = 0.0;
  for (haar::Group g : {haar::Group::SU2, haar::Group::SO3}) {
    const int d = haar::group_dim(g);
    for (int k = 0; k < 10; ++k) {
      MatrixC m(d, d);
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(meng), nd(meng));
      const MatrixC exact = haar::conj_moment1(m, g);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const cplx q = haar::integrate_exact(
              [&](const MatrixC& u) { return cplx((u * m * u.adjoint())(i, j)); }, g, 2);
          m1 = std::max(m1, std::abs(q - exact(i, j)));
        }
    }
  }
  out.check("haar.conj_moment1_vs_cubature", m1, 1e-12);
  for (haar::Group g : {haar::Group::SU2, haar::Group::SO3}) {
    const haar::GroupSampler s(g, seed);
    const auto est = haar::mc_mean([](const MatrixC& u) { return u.trace() * u.trace(); }, s, cfg.mc_samples);
    out.check("haar.mc_second_moment_" + haar::group_name(g) + "_sigmas", std::abs(est.mean - cplx(1.0)) / est.std_error, 3.0);
  }

  // Torus.
  double prev = -1.0;
  bool monotone = true;
  for (int n : {1, 10, 100}) {
    const double q = projections::torus_q_norm_demo(n, 4096);
    out.metrics.push_back({"torus.qNorm_n" + std::to_string(n), q});
    monotone = monotone && q >= prev;
    prev = q;
  }
  out.check("torus.qNorm_n100", prev, 1.9, false);
  out.check("torus.monotone", monotone ? 1.0 : 0.0, 1.0, false);
  return out;
}

}  // namespace

// ---- config ----

KeyValues parse_config_text(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineNo);
    if (eq == std::string::npos) throw ConfigParse(where + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key != "version" && !valid_key(key)) throw ConfigParse(where + ": malformed key '" + key + "'");
    if (value.empty()) throw ConfigParse(where + ": empty value for '" + key + "'");
    if (!kv.emplace(key, value).second) throw ConfigParse(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigParse("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys{
      {"version", "", "config format version, must be 1"},
      {"run.mode", "demo", "demo | reduce | verify"},
      {"run.demo", "su2-observable", "demo name"},
      {"run.seed", "42", "master seed"},
      {"output.path", "", "result table path (none: summary only)"},
      {"output.format", "csv", "csv | json"},
      {"grid.dt", "", "time step (1e-3; 2.5e-4 for su2-state and so3-state)"},
      {"grid.tmax", "", "final time (10; 5 for quantum-bipartite and reduce)"},
      {"su2.lambda", "1", "Hamiltonian scale, H = lambda (0.48 sx + 0.6 sy + 0.64 sz)"},
      {"so3.x", "0.2857142857142857", "rotation generator x"},
      {"so3.y", "0.42857142857142855", "rotation generator y"},
      {"so3.z", "0.8571428571428571", "rotation generator z"},
      {"quantum.omega", "1", "two-qubit level splitting"},
      {"quantum.gamma", "0.3", "two-qubit coupling"},
      {"quantum.rhoB00", "0.7", "population of |0> in rhoB"},
      {"torus.n", "100", "peak sharpness n"},
      {"torus.grid", "4096", "points on the averaged circle"},
      {"mc.samples", "100000", "Monte-Carlo samples"},
      {"verify.trials", "200", "randomized trials per axiom"},
      {"tolerance.error", "1e-6", "trajectory error tolerance"},
      {"system.dA", "2", "reduce: dimension of A"},
      {"system.dB", "2", "reduce: dimension of B"},
      {"system.H", "", "reduce: Hamiltonian, rows separated by ';'"},
      {"system.rhoB", "", "reduce: reference state of B"},
      {"system.sigma0", "", "reduce: initial state of A (rho0 = sigma0 (x) rhoB)"},
      {"system.rho0", "", "reduce: joint initial state"},
  };
  return keys;
}

MatrixC parse_matrix(const std::string& text) {
  std::vector<std::vector<cplx>> rows;
  std::istringstream rs(text);
  std::string rowText;
  while (std::getline(rs, rowText, ';')) {
    std::vector<cplx> row;
    std::string tok;
    std::istringstream ts(rowText);
    while (ts >> tok) {
      for (std::string part; !tok.empty();) {
        const auto comma = tok.find(',');
        part = tok.substr(0, comma);
        tok = comma == std::string::npos ? "" : tok.substr(comma + 1);
        if (part.empty()) continue;
        // real | imag i | real(+|-)imag i
        const char* b = part.data();
        const char* e = b + part.size();
        double re = 0.0, im = 0.0;
        if (part == "i" || part == "+i") {
          im = 1.0;
        } else if (part == "-i") {
          im = -1.0;
        } else {
          double v = 0.0;
          auto r = std::from_chars(b + (*b == '+'), e, v);
          if (r.ec != std::errc()) throw ConfigParse("config: bad matrix entry '" + part + "'");
          if (r.ptr == e) {
            re = v;
          } else if (*r.ptr == 'i' && r.ptr + 1 == e) {
            im = v;
          } else {
            re = v;
            const char* q = r.ptr;
            if (*q != '+' && *q != '-') throw ConfigParse("config: bad matrix entry '" + part + "'");
            const double sgn = *q == '-' ? -1.0 : 1.0;
            ++q;
            double w = 1.0;
            if (*q != 'i') {
              auto r2 = std::from_chars(q, e, w);
              if (r2.ec != std::errc()) throw ConfigParse("config: bad matrix entry '" + part + "'");
              q = r2.ptr;
            }
            if (q + 1 != e || *q != 'i') throw ConfigParse("config: bad matrix entry '" + part + "'");
            im = sgn * w;
          }
        }
        row.emplace_back(re, im);
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigParse("config: empty matrix");
  MatrixC m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigParse("config: ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

RunConfig build_config(const KeyValues& input, bool requireVersion) {
  KeyValues kv = input;
  if (requireVersion && !kv.count("version")) throw ConfigParse("config: missing required key 'version'");
  for (const auto& [k, v] : kv) {
    bool known = false;
    for (const auto& spec : config_keys()) known = known || spec.key == k;
    if (!known) throw ConfigParse("config: unknown key '" + k + "'");
  }
  if (kv.count("version") && kv.at("version") != "1")
    throw ConfigParse("config: unsupported version '" + kv.at("version") + "'");
  for (const auto& spec : config_keys())
    if (!spec.default_value.empty()) kv.emplace(spec.key, spec.default_value);

  RunConfig c;
  const std::string& mode = kv.at("run.mode");
  if (mode == "demo") c.mode = Mode::Demo;
  else if (mode == "reduce") c.mode = Mode::Reduce;
  else if (mode == "verify") c.mode = Mode::Verify;
  else throw ConfigParse("config: run.mode must be demo, reduce or verify");

  c.demo = kv.at("run.demo");
  const auto& names = demos::demo_names();
  if (std::find(names.begin(), names.end(), c.demo) == names.end()) throw ConfigParse("config: unknown demo '" + c.demo + "'");

  const std::string& fmt = kv.at("output.format");
  if (fmt == "csv") c.format = Format::Csv;
  else if (fmt == "json") c.format = Format::Json;
  else throw ConfigParse("config: output.format must be csv or json");
  if (kv.count("output.path")) c.out_path = kv.at("output.path");

  auto& p = c.params;
  p.seed = parse_u64("run.seed", kv.at("run.seed"));
  if (kv.count("grid.dt")) p.dt = parse_real(kv, "grid.dt");
  if (kv.count("grid.tmax")) p.tMax = parse_real(kv, "grid.tmax");
  const std::string which = c.mode == Mode::Demo ? c.demo : "quantum-bipartite";
  const double dt = p.dt.value_or(demos::default_dt(which));
  const double tMax = p.tMax.value_or(demos::default_tmax(which));
  if (!(dt > 0.0) || !(dt <= tMax)) throw ConfigParse("config: need 0 < grid.dt <= grid.tmax");
  const double steps = std::round(tMax / dt);
  if (std::abs(steps * dt - tMax) > 1e-9 * tMax) throw ConfigParse("config: grid.tmax must be a multiple of grid.dt");

  p.lambda = parse_real(kv, "su2.lambda");
  p.so3x = parse_real(kv, "so3.x");
  p.so3y = parse_real(kv, "so3.y");
  p.so3z = parse_real(kv, "so3.z");
  p.omega = parse_real(kv, "quantum.omega");
  p.gamma = parse_real(kv, "quantum.gamma");
  p.rhoBp0 = parse_real(kv, "quantum.rhoB00");
  if (p.rhoBp0 < 0.0 || p.rhoBp0 > 1.0) throw ConfigParse("config: quantum.rhoB00 must lie in [0, 1]");
  p.torusN = static_cast<int>(parse_int(kv, "torus.n", 0));
  p.torusGrid = static_cast<int>(parse_int(kv, "torus.grid", 64));
  p.tolerance = parse_real(kv, "tolerance.error");
  if (!(p.tolerance > 0.0)) throw ConfigParse("config: tolerance.error must be positive");
  c.mc_samples = static_cast<std::size_t>(parse_int(kv, "mc.samples", 1000));
  c.verify_trials = static_cast<int>(parse_int(kv, "verify.trials", 1));

  c.dA = static_cast<int>(parse_int(kv, "system.dA", 1));
  c.dB = static_cast<int>(parse_int(kv, "system.dB", 1));
  if (c.dA * c.dB > quantum::kDefaultMaxDimension)
    throw ConfigParse("config: system.dA * system.dB exceeds " + std::to_string(quantum::kDefaultMaxDimension));
  const auto matrix = [&](const char* key) -> std::optional<MatrixC> {
    if (!kv.count(key)) return std::nullopt;
    MatrixC m = parse_matrix(kv.at(key));
    if (!all_finite(m)) throw ConfigParse(std::string("config: ") + key + " has non-finite entries");
    return m;
  };
  c.H = matrix("system.H");
  c.rhoB = matrix("system.rhoB");
  c.sigma0 = matrix("system.sigma0");
  c.rho0 = matrix("system.rho0");
  return c;
}

// ---- emission ----

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  return std::string(buf, r.ptr);
}

void emit_csv(const demos::Table& table, const std::string& path) {
  if (table.header.empty()) throw IoFailure("emit_csv: empty table");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("emit_csv: cannot open '" + path + "'");
  for (std::size_t i = 0; i < table.header.size(); ++i) f << (i ? "," : "") << table.header[i];
  f << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
  f.flush();
  if (!f) throw IoFailure("emit_csv: write to '" + path + "' failed");
}

void emit_csv(const nmz::GLESolution& solution, const std::string& path) {
  if (solution.trajectory.empty()) throw std::invalid_argument("emit_csv: empty solution");
  emit_csv(demos::solution_table(solution), path);
}

// ---- run ----

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  demos::DemoOutcome o;
  std::string mode;
  switch (config.mode) {
    case Mode::Demo:
      o = demos::run_demo(config.demo, config.params);
      mode = "demo";
      break;
    case Mode::Reduce:
      o = run_reduce(config);
      mode = "reduce";
      break;
    case Mode::Verify:
      o = run_verify(config);
      mode = "verify";
      break;
  }
  json summary = outcome_json(o, mode);
  summary["seed"] = config.params.seed;
  write_outputs(o, summary, config, out);
  for (const auto& c : o.checks)
    if (!c.passed)
      err << "tolerance violated: " << c.name << " = " << format_double(c.value) << (c.upper ? " > " : " < ")
          << format_double(c.tolerance) << '\n';
  return o.passed() ? 0 : 1;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nmzkit: Mori-Zwanzig projections, memory kernels and Langevin solvers"};
  std::string configPath, demo, outPath, format;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> positional;
  app.add_option("--config", configPath, "flat key = value config file");
  app.add_option("--demo", demo, "run a built-in demo");
  app.add_option("--set", sets, "override a config key (key=value)")->take_all();
  app.add_option("--out", outPath, "result table path");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "master seed");
  app.add_option("command", positional, "demo <name> | reduce | verify");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "argument error: " << e.what() << '\n';
    return 2;
  }

  try {
    KeyValues kv;
    const bool fromFile = !configPath.empty();
    if (fromFile) kv = read_config_file(configPath);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigParse("--set expects key=value, got '" + s + "'");
      kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    if (!positional.empty()) {
      const std::string& cmd = positional.front();
      if (cmd == "demo") {
        kv["run.mode"] = "demo";
        if (positional.size() > 1) kv["run.demo"] = positional[1];
      } else if (cmd == "reduce" || cmd == "verify") {
        kv["run.mode"] = cmd;
      } else {
        throw ConfigParse("unknown command '" + cmd + "'");
      }
      if (positional.size() > (cmd == "demo" ? 2u : 1u)) throw ConfigParse("too many positional arguments");
    }
    if (!demo.empty()) {
      kv["run.mode"] = "demo";
      kv["run.demo"] = demo;
    }
    if (!outPath.empty()) kv["output.path"] = outPath;
    if (!format.empty()) kv["output.format"] = format;
    if (seed) kv["run.seed"] = std::to_string(*seed);
    const RunConfig cfg = build_config(kv, fromFile);
    return run(cfg, out, err);
  } catch (const ConfigParse& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const IoFailure& e) {
    err << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nmzkit::cli
