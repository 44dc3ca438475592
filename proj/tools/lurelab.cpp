// lurelab: scenario runs, harmonic balance, continuation and sweeps from the command line.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lurelab/diagnostics.hpp"
#include "lurelab/error.hpp"
#include "lurelab/harmonic.hpp"
#include "lurelab/linalg.hpp"
#include "lurelab/localize.hpp"
#include "lurelab/scenarios.hpp"
#include "lurelab/sim.hpp"

#ifndef LURELAB_VERSION
#define LURELAB_VERSION "0.0.0"
#endif

using namespace lurelab;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite numbers have no JSON form: ±inf become strings, NaN null.
ordered_json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json vec_json(std::span<const double> v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

ordered_json complex_json(const Spectrum& s) {
  ordered_json a = ordered_json::array();
  for (const Complex& c : s) a.push_back({num(c.real()), num(c.imag())});
  return a;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string exact_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_text(const Complex& c) {
  std::ostringstream os;
  os << csv_num(c.real()) << (c.imag() < 0 ? " - " : " + ") << csv_num(std::abs(c.imag())) << "i";
  return os.str();
}

// ---------------------------------------------------------------- options

struct Common {
  std::string scenario;
  std::string params_file;
  std::vector<std::string> overrides;
  std::string out;
  std::vector<std::string> formats{"csv", "json"};
};

struct RunOpts {
  double t_end = 30.0;
  std::vector<double> x0;
  std::string expect = "none";
  double settle = 30.0;
  double max_time = 300.0;
  std::size_t stride = 1;
};

struct LocalizeOpts {
  std::string seed = "last-state-0.1";
  int steps = 10;
  double k = NAN;
  std::string mode;
  std::string direction = "increasing";
  double budget = 60.0;
};

struct EigOpts {
  bool open_loop = false;
};

struct SweepOpts {
  std::string param;
  double from = NAN, to = NAN, step = NAN;
  std::vector<double> values;
  std::vector<double> x0;
  double settle = 30.0;
  double max_time = 300.0;
};

/// Resolved invocation: what the manifest records and replay rebuilds.
struct Invocation {
  std::string command;
  Common common;
  ScenarioConfig cfg;
  ordered_json options = ordered_json::object();
};

bool wants(const Common& c, const std::string& fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

fs::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("LURE_LAB_OUT"); env && *env) return env;
  return "lurelab-out";
}

ScenarioConfig resolve_config(const Common& c) {
  ScenarioConfig cfg;
  std::vector<ParamAssignment> assigns;
  if (!c.params_file.empty()) {
    std::ifstream in(c.params_file);
    if (!in) throw UsageError("cannot read parameter file '" + c.params_file + "'");
    assigns = parse_param_text(in);
  }
  for (const std::string& o : c.overrides) assigns.push_back(parse_override(o));
  apply_params(cfg, c.scenario, assigns);
  return cfg;
}

// Every option given on the command line except the ones that only locate inputs or outputs.
ordered_json recorded_options(const CLI::App* sub) {
  static const std::vector<std::string> skip{"--out", "--params", "--override", "--scenario", "--format", "--help"};
  ordered_json o = ordered_json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->count() == 0) continue;
    const std::string name = opt->get_name(false, true);
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    const std::string key = name.substr(2);
    if (opt->get_expected_max() == 0) {
      o[key] = true;
    } else if (opt->get_expected_max() > 1) {
      o[key] = opt->results();
    } else {
      o[key] = opt->results().back();
    }
  }
  return o;
}

// ---------------------------------------------------------------- output

class Artifacts {
 public:
  Artifacts(const Invocation& inv) : inv_(inv), dir_(output_dir(inv.common)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw UsageError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw UsageError("cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
    return os;
  }

  void json(const std::string& name, const ordered_json& j) {
    if (!wants(inv_.common, "json")) return;
    open(name) << j.dump(2) << "\n";
  }

  bool csv() const { return wants(inv_.common, "csv"); }

  void manifest(const ordered_json& verdicts) {
    ordered_json m;
    m["tool"] = "lurelab";
    m["version"] = LURELAB_VERSION;
    m["command"] = inv_.command;
    m["scenario"] = inv_.common.scenario;
    m["formats"] = inv_.common.formats;
    m["options"] = inv_.options;
    ordered_json params = ordered_json::object();
    for (const ParamEntry& p : scenario_params(inv_.cfg, inv_.common.scenario)) params[p.key] = num(p.value);
    m["parameters"] = params;
    m["verdicts"] = verdicts;
    m["artifacts"] = files_;
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    if (!os) throw UsageError("cannot write manifest in '" + dir_.string() + "'");
    os << m.dump(2) << "\n";
  }

  const fs::path& dir() const { return dir_; }

 private:
  const Invocation& inv_;
  fs::path dir_;
  std::vector<std::string> files_;
};

void write_trajectory(Artifacts& art, const std::string& name, const Trajectory& tr, const Scenario& sc,
                      std::size_t stride) {
  if (!art.csv()) return;
  std::ofstream os = art.open(name);
  write_csv(os, tr, sc.labels, stride);
}

void write_orbit(Artifacts& art, const std::string& name, const LimitCycle& lc, const Scenario& sc) {
  if (!art.csv()) return;
  std::ofstream os = art.open(name);
  os << "t";
  for (const std::string& l : sc.labels) os << "," << l;
  os << "\n";
  for (std::size_t i = 0; i < lc.orbit.size(); ++i) {
    os << csv_num(lc.orbit_times[i]);
    for (double v : lc.orbit[i]) os << "," << csv_num(v);
    os << "\n";
  }
}

ordered_json cycle_json(const LimitCycle& lc) {
  return {{"period", num(lc.period)},
          {"anchor", vec_json(lc.anchor)},
          {"amplitude", vec_json(lc.amplitude)},
          {"amplitude_norm", num(lc.amplitude_norm())},
          {"orbital_stability", std::string(to_string(lc.orbital_stability))},
          {"section_normal", vec_json(lc.section.normal)},
          {"section_offset", num(lc.section.offset)}};
}

CycleDetectOptions detect_options(const Scenario& sc, double settle, double max_time) {
  CycleDetectOptions opt;
  opt.settle_time = settle;
  opt.max_time = max_time;
  for (const EquilibriumInfo& e : sc.equilibria) opt.equilibria.push_back(e.x);
  return opt;
}

const LureSystem& require_lure(const Scenario& sc, const std::string& command) {
  if (!sc.lure) throw UsageError(command + " needs a Lur'e-form scenario (aoa, pio or fitts), not '" + sc.name + "'");
  return *sc.lure;
}

// ---------------------------------------------------------------- commands

int cmd_scenario_run(const Invocation& inv, const RunOpts& o) {
  const Scenario sc = make_scenario(inv.common.scenario, inv.cfg);
  Vec x0 = sc.default_start;
  if (!o.x0.empty()) {
    if (o.x0.size() != sc.dim) throw UsageError("--x0 needs " + std::to_string(sc.dim) + " values");
    x0 = o.x0;
  }
  Artifacts art(inv);
  const Trajectory tr = integrate(sc.field, x0, 0.0, o.t_end);
  write_trajectory(art, "trajectory.csv", tr, sc, o.stride);

  const CycleDetection d = detect_limit_cycle(sc.field, x0, detect_options(sc, o.settle, o.max_time));
  ordered_json verdicts{{"detection", std::string(to_string(d.verdict))},
                        {"final_norm", num(norm2(tr.states.back()))}};
  ordered_json report{{"x0", vec_json(x0)}, {"t_end", num(o.t_end)}, {"final_state", vec_json(tr.states.back())},
                      {"detection", std::string(to_string(d.verdict))}};
  std::cout << sc.name << ": " << to_string(d.verdict);
  if (d.cycle) {
    const Classification c = classify_attractor(*d.cycle, sc.field, sc.equilibria);
    verdicts["attractor"] = std::string(to_string(c.kind));
    verdicts["period"] = num(d.cycle->period);
    report["cycle"] = cycle_json(*d.cycle);
    report["attractor"] = {{"kind", std::string(to_string(c.kind))}, {"reason", c.reason}};
    write_orbit(art, "orbit.csv", *d.cycle, sc);
    std::cout << ", period " << csv_num(d.cycle->period) << " s, " << to_string(c.kind);
  }
  std::cout << "\n";
  art.json("report.json", report);
  art.manifest(verdicts);

  if (o.expect == "cycle" && d.verdict != CycleVerdict::CycleFound) return kVerdictFailure;
  if (o.expect == "equilibrium" && d.verdict != CycleVerdict::ConvergedToEquilibrium) return kVerdictFailure;
  return kOk;
}

int cmd_localize(const Invocation& inv, const LocalizeOpts& o) {
  const Scenario sc = make_scenario(inv.common.scenario, inv.cfg);
  const LureSystem& sys = require_lure(sc, "localize");
  const std::vector<HarmonicCandidate> cands = harmonic_candidates(sys);

  ContinuationSchedule sched;
  sched.m = o.steps;
  sched.step_budget = o.budget;
  sched.direction = o.direction == "decreasing" ? ScheduleDirection::Decreasing : ScheduleDirection::Increasing;
  if (!std::isnan(o.k)) {
    sched.k = o.k;
  } else if (!cands.empty()) {
    sched.k = cands.front().crossing.k;
  }
  if (o.mode == "psi") {
    sched.mode = EpsilonMode::ScalePsi;
  } else if (o.mode == "deviation") {
    sched.mode = EpsilonMode::ScaleDeviation;
  } else {
    sched.mode = cands.empty() && std::isnan(o.k) ? EpsilonMode::ScalePsi : EpsilonMode::ScaleDeviation;
  }

  Vec seed(sc.dim, 0.0);
  if (o.seed == "last-state-0.1") {
    seed.back() = 0.1;
  } else if (o.seed == "dfm") {
    const auto it = std::find_if(cands.begin(), cands.end(), [](const HarmonicCandidate& c) { return !c.starts.empty(); });
    if (it == cands.end()) {
      std::cerr << "localize: no harmonic-balance start point for " << sc.name << "\n";
      return kVerdictFailure;
    }
    seed = it->starts.front().x0;
    if (std::isnan(o.k)) sched.k = it->crossing.k;
  } else {
    std::vector<double> v;
    std::stringstream ss(o.seed);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw UsageError("--seed: '" + o.seed + "' is not last-state-0.1, dfm or a comma-separated state");
      }
    }
    if (v.size() != sc.dim) throw UsageError("--seed needs " + std::to_string(sc.dim) + " values");
    seed = v;
  }

  Artifacts art(inv);
  const ContinuationReport rep = continue_localization(sys, seed, sched);

  if (art.csv()) {
    std::ofstream os = art.open("steps.csv");
    os << "j,epsilon,verdict,period,end_time";
    for (const std::string& l : sc.labels) os << ",end_" << l;
    os << "\n";
    for (const ContinuationStep& s : rep.steps) {
      os << s.j << "," << csv_num(s.epsilon) << "," << to_string(s.verdict) << "," << csv_num(s.period) << ","
         << csv_num(s.end_time);
      for (double v : s.end) os << "," << csv_num(v);
      os << "\n";
    }
  }
  ordered_json steps = ordered_json::array();
  for (const ContinuationStep& s : rep.steps)
    steps.push_back({{"j", s.j},
                     {"epsilon", num(s.epsilon)},
                     {"verdict", std::string(to_string(s.verdict))},
                     {"period", num(s.period)},
                     {"end_time", num(s.end_time)},
                     {"start", vec_json(s.start)},
                     {"end", vec_json(s.end)}});
  ordered_json report{{"seed", vec_json(seed)},
                      {"k", num(sched.k)},
                      {"mode", sched.mode == EpsilonMode::ScalePsi ? "psi" : "deviation"},
                      {"m", sched.m},
                      {"outcome", std::string(to_string(rep.outcome))},
                      {"failed_step", rep.failed_step},
                      {"steps", steps}};
  ordered_json verdicts{{"outcome", std::string(to_string(rep.outcome))}};
  std::cout << sc.name << ": " << to_string(rep.outcome);
  if (rep.failed_step > 0) std::cout << " at step " << rep.failed_step;
  if (rep.cycle) {
    const Classification c = classify_attractor(*rep.cycle, sc.field, sc.equilibria);
    report["cycle"] = cycle_json(*rep.cycle);
    report["attractor"] = {{"kind", std::string(to_string(c.kind))}, {"reason", c.reason}};
    verdicts["attractor"] = std::string(to_string(c.kind));
    verdicts["period"] = num(rep.cycle->period);
    write_orbit(art, "orbit.csv", *rep.cycle, sc);
    std::cout << ", period " << csv_num(rep.cycle->period) << " s, " << to_string(c.kind);
  }
  std::cout << "\n";
  art.json("report.json", report);
  art.manifest(verdicts);
  return rep.outcome == ContinuationOutcome::Localized ? kOk : kVerdictFailure;
}

int cmd_dfm(const Invocation& inv) {
  const Scenario sc = make_scenario(inv.common.scenario, inv.cfg);
  const LureSystem& sys = require_lure(sc, "dfm");
  const std::vector<HarmonicCandidate> cands = harmonic_candidates(sys);
  Artifacts art(inv);

  if (art.csv()) {
    std::ofstream os = art.open("candidates.csv");
    os << "omega0,k,a0,phi_slope,stability_condition";
    for (const std::string& l : sc.labels) os << ",x0_" << l;
    os << "\n";
    for (const HarmonicCandidate& c : cands) {
      for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
        os << csv_num(c.crossing.omega0) << "," << csv_num(c.crossing.k) << "," << csv_num(c.amplitudes[i].a0) << ","
           << csv_num(c.amplitudes[i].phi_slope) << ",";
        if (i < c.starts.size()) {
          os << (c.starts[i].stability_condition ? 1 : 0);
          for (double v : c.starts[i].x0) os << "," << csv_num(v);
        } else {
          for (std::size_t j = 0; j <= sc.dim; ++j) os << (j ? "," : "");
        }
        os << "\n";
      }
    }
  }
  ordered_json arr = ordered_json::array();
  for (const HarmonicCandidate& c : cands) {
    ordered_json j{{"omega0", num(c.crossing.omega0)}, {"k", num(c.crossing.k)}, {"note", c.note}};
    ordered_json amps = ordered_json::array();
    for (std::size_t i = 0; i < c.amplitudes.size(); ++i) {
      ordered_json a{{"a0", num(c.amplitudes[i].a0)}, {"phi_slope", num(c.amplitudes[i].phi_slope)}};
      if (i < c.starts.size()) {
        a["x0"] = vec_json(c.starts[i].x0);
        a["stability_condition"] = c.starts[i].stability_condition;
      }
      amps.push_back(a);
    }
    j["amplitudes"] = amps;
    if (c.canonical) j["block_residual"] = num(c.canonical->block_residual(sys));
    arr.push_back(j);
    std::cout << "omega0 " << csv_num(c.crossing.omega0) << "  k " << csv_num(c.crossing.k);
    for (const AmplitudeRoot& a : c.amplitudes) std::cout << "  a0 " << csv_num(a.a0);
    if (!c.note.empty()) std::cout << "  (" << c.note << ")";
    std::cout << "\n";
  }
  if (cands.empty()) std::cout << "no frequency crossing\n";
  art.json("report.json", {{"candidates", arr}});
  art.manifest({{"candidates", cands.size()}});
  return kOk;
}

int cmd_eig(const Invocation& inv, const EigOpts& o) {
  const Scenario sc = make_scenario(inv.common.scenario, inv.cfg);
  Matrix m = sc.jacobian_at_origin;
  if (o.open_loop) {
    if (sc.lure) {
      m = sc.lure->P;
    } else {
      m = flutter_linearization(flutter_derive(inv.cfg.flutter)).A;
    }
  }
  const Spectrum ev = eigenvalues(m);
  Artifacts art(inv);
  if (art.csv()) {
    std::ofstream os = art.open("eigenvalues.csv");
    os << "re,im\n";
    for (const Complex& c : ev) os << csv_num(c.real()) << "," << csv_num(c.imag()) << "\n";
  }
  for (const Complex& c : ev) std::cout << complex_text(c) << "\n";
  const bool hurwitz = is_hurwitz(ev);
  art.json("report.json", {{"matrix", o.open_loop ? "open_loop" : "origin_jacobian"},
                           {"eigenvalues", complex_json(ev)},
                           {"spectral_abscissa", num(spectral_abscissa(ev))}});
  art.manifest({{"hurwitz", hurwitz}});
  return kOk;
}

int cmd_lqr(const Invocation& inv) {
  if (inv.common.scenario != "flutter") throw UsageError("lqr applies to the flutter scenario only");
  const FlutterDerived d = flutter_derive(inv.cfg.flutter);
  const CareSolution sol = flutter_lqr(d, inv.cfg.control);
  Artifacts art(inv);
  Vec gain(sol.gain.cols());
  for (std::size_t j = 0; j < gain.size(); ++j) gain[j] = sol.gain(0, j);
  if (art.csv()) {
    std::ofstream os = art.open("gain.csv");
    os << "k_alpha,k_alpha_dot,k_h,k_h_dot\n";
    for (std::size_t j = 0; j < gain.size(); ++j) os << (j ? "," : "") << csv_num(gain[j]);
    os << "\n";
  }
  std::cout << "K =";
  for (double g : gain) std::cout << " " << csv_num(g);
  std::cout << "\nclosed loop:\n";
  for (const Complex& c : sol.closed_loop_spectrum) std::cout << "  " << complex_text(c) << "\n";
  art.json("report.json", {{"gain", vec_json(gain)},
                           {"closed_loop", complex_json(sol.closed_loop_spectrum)},
                           {"riccati_residual", num(sol.residual)},
                           {"iterations", sol.iterations}});
  art.manifest({{"closed_loop_hurwitz", is_hurwitz(sol.closed_loop_spectrum)}});
  return kOk;
}

int cmd_sweep(const Invocation& inv, const SweepOpts& o) {
  std::vector<double> grid = o.values;
  if (grid.empty()) {
    if (std::isnan(o.from) || std::isnan(o.to) || std::isnan(o.step)) throw UsageError("sweep needs --values or --from/--to/--step");
    if (!(o.step > 0.0)) throw UsageError("--step must be positive");
    const long n = o.to < o.from ? 0 : static_cast<long>(std::floor((o.to - o.from) / o.step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) grid.push_back(o.from + static_cast<double>(i) * o.step);
  }
  const bool seed_scale = o.param == "seed_scale";
  if (!seed_scale) {
    ScenarioConfig probe = inv.cfg;
    apply_params(probe, inv.common.scenario, {parse_override(o.param + "=0")});
  }

  struct Row {
    Vec x0;
    CycleVerdict verdict = CycleVerdict::NoCycleFound;
    double period = NAN, amplitude = NAN, final_norm = NAN;
    std::string error;
  };
  auto run_point = [&](double value) {
    Row row;
    try {
      ScenarioConfig cfg = inv.cfg;
      if (!seed_scale) apply_params(cfg, inv.common.scenario, {parse_override(o.param + "=" + exact_num(value))});
      const Scenario sc = make_scenario(inv.common.scenario, cfg);
      row.x0 = o.x0.empty() ? sc.default_start : o.x0;
      if (row.x0.size() != sc.dim) throw Error(ErrorKind::DimensionMismatch, "--x0 needs " + std::to_string(sc.dim) + " values");
      if (seed_scale)
        for (double& v : row.x0) v *= value;
      const CycleDetection d = detect_limit_cycle(sc.field, row.x0, detect_options(sc, o.settle, o.max_time));
      row.verdict = d.verdict;
      row.final_norm = norm2(d.final_state);
      if (d.cycle) {
        row.period = d.cycle->period;
        row.amplitude = d.cycle->amplitude_norm();
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    return row;
  };
  std::vector<std::future<Row>> jobs;
  for (double v : grid) jobs.push_back(std::async(std::launch::async, run_point, v));
  std::vector<Row> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  const Scenario base = make_scenario(inv.common.scenario, inv.cfg);
  Artifacts art(inv);
  if (art.csv()) {
    std::ofstream os = art.open("sweep.csv");
    os << "index," << o.param;
    for (const std::string& l : base.labels) os << ",x0_" << l;
    os << ",verdict,period,amplitude_norm,final_norm\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      os << i << "," << csv_num(grid[i]);
      for (std::size_t j = 0; j < base.dim; ++j) os << "," << (j < r.x0.size() ? csv_num(r.x0[j]) : "");
      os << "," << (r.error.empty() ? std::string(to_string(r.verdict)) : "error") << "," << csv_num(r.period) << ","
         << csv_num(r.amplitude) << "," << csv_num(r.final_norm) << "\n";
    }
  }
  ordered_json pts = ordered_json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    ordered_json p{{"value", num(grid[i])}, {"x0", vec_json(r.x0)}};
    if (r.error.empty()) {
      p["verdict"] = std::string(to_string(r.verdict));
      p["period"] = num(r.period);
      p["amplitude_norm"] = num(r.amplitude);
      p["final_norm"] = num(r.final_norm);
    } else {
      p["error"] = r.error;
    }
    pts.push_back(p);
    std::cout << o.param << " = " << csv_num(grid[i]) << ": "
              << (r.error.empty() ? std::string(to_string(r.verdict)) : r.error);
    if (!std::isnan(r.period)) std::cout << ", period " << csv_num(r.period);
    std::cout << "\n";
  }
  art.json("report.json", {{"param", o.param}, {"points", pts}});
  ordered_json verdicts = ordered_json::array();
  for (const Row& r : rows) verdicts.push_back(r.error.empty() ? std::string(to_string(r.verdict)) : "error");
  art.manifest({{"points", verdicts}});
  return kOk;
}

// ---------------------------------------------------------------- parsing

struct Cli {
  CLI::App app{"Hidden oscillation analysis for Lur'e systems with saturated actuators", "lurelab"};
  Common common;
  RunOpts run;
  LocalizeOpts loc;
  EigOpts eig;
  SweepOpts sweep;
  std::string manifest_path;
  std::map<std::string, CLI::App*> subs;

  Cli() {
    app.require_subcommand(1);
    app.set_version_flag("--version", LURELAB_VERSION);
    auto add_common = [this](CLI::App* s, bool needs_scenario) {
      auto* opt = s->add_option("--scenario", common.scenario, "aoa, pio, flutter, flutter-free or fitts")
                      ->check(CLI::IsMember(kScenarioNames));
      if (needs_scenario) opt->required();
      s->add_option("--params", common.params_file, "parameter file ([section] key = value)");
      s->add_option("--override", common.overrides, "key=value, repeatable")->take_all();
      s->add_option("--out", common.out, "output directory (default: $LURE_LAB_OUT, then ./lurelab-out)");
      s->add_option("--format", common.formats, "csv and/or json")
          ->delimiter(',')
          ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* s = subs["scenario-run"] = app.add_subcommand("scenario-run", "simulate a scenario and look for a cycle");
    add_common(s, true);
    s->add_option("--t-end", run.t_end, "trajectory length in seconds")->check(CLI::PositiveNumber);
    s->add_option("--x0", run.x0, "initial state")->delimiter(',');
    s->add_option("--expect", run.expect, "exit 1 unless the verdict matches")
        ->check(CLI::IsMember({"none", "cycle", "equilibrium"}));
    s->add_option("--settle", run.settle, "cycle detection settle time")->check(CLI::NonNegativeNumber);
    s->add_option("--max-time", run.max_time, "cycle detection horizon")->check(CLI::PositiveNumber);
    s->add_option("--stride", run.stride, "write every n-th trajectory row")->check(CLI::PositiveNumber);

    s = subs["localize"] = app.add_subcommand("localize", "continuation from a seed to a cycle of the full system");
    add_common(s, true);
    s->add_option("--seed", loc.seed, "last-state-0.1, dfm, or a comma-separated state");
    s->add_option("--steps", loc.steps, "number of continuation steps")->check(CLI::PositiveNumber);
    s->add_option("--k", loc.k, "harmonic linearization coefficient (default: first crossing)");
    s->add_option("--mode", loc.mode, "deviation or psi")->check(CLI::IsMember({"deviation", "psi"}));
    s->add_option("--direction", loc.direction, "increasing or decreasing")
        ->check(CLI::IsMember({"increasing", "decreasing"}));
    s->add_option("--budget", loc.budget, "simulated seconds per step")->check(CLI::PositiveNumber);

    s = subs["dfm"] = app.add_subcommand("dfm", "harmonic-balance candidates and start points");
    add_common(s, true);

    s = subs["eig"] = app.add_subcommand("eig", "spectrum at the origin");
    add_common(s, true);
    s->add_flag("--open-loop", eig.open_loop, "linear part without feedback");

    s = subs["lqr"] = app.add_subcommand("lqr", "LQR gain for the flutter model");
    add_common(s, false);

    s = subs["sweep"] = app.add_subcommand("sweep", "cycle detection over a grid of one parameter");
    add_common(s, true);
    s->add_option("--param", sweep.param, "parameter key, or seed_scale")->required();
    s->add_option("--from", sweep.from);
    s->add_option("--to", sweep.to);
    s->add_option("--step", sweep.step);
    s->add_option("--values", sweep.values, "explicit grid")->delimiter(',');
    s->add_option("--x0", sweep.x0, "start state (default: the scenario's)")->delimiter(',');
    s->add_option("--settle", sweep.settle)->check(CLI::NonNegativeNumber);
    s->add_option("--max-time", sweep.max_time)->check(CLI::PositiveNumber);

    auto* r = app.add_subcommand("replay", "re-run the invocation recorded in a manifest");
    r->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
    r->add_option("--out", common.out, "output directory");
  }
};

int dispatch(Cli& cli, const std::string& command) {
  Invocation inv;
  inv.command = command;
  inv.common = cli.common;
  if (inv.common.scenario.empty()) inv.common.scenario = "flutter";
  try {
    inv.cfg = resolve_config(inv.common);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  inv.options = recorded_options(cli.subs.at(command));
  if (command == "scenario-run") return cmd_scenario_run(inv, cli.run);
  if (command == "localize") return cmd_localize(inv, cli.loc);
  if (command == "dfm") return cmd_dfm(inv);
  if (command == "eig") return cmd_eig(inv, cli.eig);
  if (command == "lqr") return cmd_lqr(inv);
  return cmd_sweep(inv, cli.sweep);
}

// Rebuilds an argument list from a manifest; parameters become exact overrides.
std::vector<std::string> replay_args(const std::string& path, const std::string& out) {
  std::ifstream in(path);
  ordered_json m;
  try {
    m = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("cannot parse manifest '" + path + "': " + e.what());
  }
  std::vector<std::string> args{"lurelab"};
  try {
    args.push_back(m.at("command").get<std::string>());
    if (args.back() == "replay") throw UsageError("manifest records a replay");
    args.insert(args.end(), {"--scenario", m.at("scenario").get<std::string>()});
    for (const auto& [key, v] : m.at("options").items()) {
      args.push_back("--" + key);
      if (v.is_boolean()) continue;
      if (v.is_array()) {
        for (const auto& e : v) args.push_back(e.get<std::string>());
      } else {
        args.push_back(v.get<std::string>());
      }
    }
    std::string formats;
    for (const auto& f : m.at("formats")) formats += (formats.empty() ? "" : ",") + f.get<std::string>();
    args.insert(args.end(), {"--format", formats});
    for (const auto& [key, v] : m.at("parameters").items()) {
      if (v.is_null()) continue;
      args.push_back("--override");
      args.push_back(key + "=" + (v.is_string() ? v.get<std::string>() : exact_num(v.get<double>())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed manifest '" + path + "': " + e.what());
  }
  if (!out.empty()) args.insert(args.end(), {"--out", out});
  return args;
}

int run(int argc, const char* const* argv, int depth) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.app.exit(e) == 0 ? kOk : kUsage;
  }
  for (const auto& [name, sub] : cli.subs)
    if (sub->parsed()) return dispatch(cli, name);

  if (depth > 0) throw UsageError("nested replay");
  const std::vector<std::string> args = replay_args(cli.manifest_path, cli.common.out);
  std::vector<const char*> ptrs;
  for (const std::string& a : args) ptrs.push_back(a.c_str());
  return run(static_cast<int>(ptrs.size()), ptrs.data(), depth + 1);
}

}  // namespace

int main(int argc, char** argv) {
  set_warning_sink([](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });
  try {
    return run(argc, argv, 0);
  } catch (const UsageError& e) {
    std::cerr << "lurelab: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "lurelab: " << e.what() << "\n";
    return e.kind() == ErrorKind::ParseError ? kUsage : kVerdictFailure;
  } catch (const std::exception& e) {
    std::cerr << "lurelab: " << e.what() << "\n";
    return kVerdictFailure;
  }
}
