#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "advht/adversary.hpp"
#include "advht/analysis.hpp"
#include "advht/cli.hpp"
#include "advht/drift.hpp"
#include "advht/exponents.hpp"
#include "advht/fsm.hpp"
#include "advht/lfd.hpp"
#include "advht/lp.hpp"
#include "advht/model.hpp"
#include "advht/optimize.hpp"

namespace advht {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string fmt_vec(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], 6);
  return s + ")";
}

// Each weight component rescaled on its own so its largest entry is 1.
std::vector<double> peak_one(std::span<const double> f) {
  const double m = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
  std::vector<double> out(f.begin(), f.end());
  if (m > 0.0) {
    for (auto& v : out) v /= m;
  }
  return out;
}

// Exponent values may be +inf, which JSON cannot hold as a number.
json num(double v) { return std::isinf(v) ? json("inf") : json(v); }

struct Common {
  std::string instance;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  int starts = 32;
  std::string json_path;
  std::string csv_path;
};

struct Context {
  RunReport report;
  TableRows rows;
  std::string title;
  LogLevel level = LogLevel::kInfo;
  std::ostream* err = nullptr;

  void debug(const std::string& msg) const {
    if (level == LogLevel::kDebug) *err << "[debug] " << msg << '\n';
  }
};

SolverOptions solver_options(const Common& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.seed = c.seed;
  o.starts = c.starts;
  return o;
}

ProblemInstance load_tracked(Context& ctx, const std::string& path) {
  if (path.empty()) throw ValidationError("an instance file is required (--instance PATH)");
  ctx.report.file_hashes[path] = sha256_file(path);
  return load_instance(path);
}

DetectorFSM load_fsm_tracked(Context& ctx, const std::string& path) {
  if (path.empty()) throw ValidationError("an FSM file is required (--fsm PATH)");
  ctx.report.file_hashes[path] = sha256_file(path);
  return load_fsm(path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string data_dir() {
  if (const char* v = std::getenv("ADVHT_DATA_DIR")) return v;
  return ADVHT_DATA_DIR;
}

// ---- exponent commands ----

int cmd_exponent(Context& ctx, const Common& c, const std::string& which) {
  const auto inst = load_tracked(ctx, c.instance);
  const auto opts = solver_options(c);
  ExponentSolution sol;
  if (which == "gamma") sol = solve_gamma(inst, opts);
  else if (which == "cee") sol = solve_C(inst, opts);
  else sol = solve_gamma_bar(inst, opts);
  ctx.report.outputs = to_json(sol);
  ctx.title = which;
  ctx.rows.push_back({"value", sol.unbounded ? "inf" : fmt(sol.value)});
  ctx.rows.push_back({"tolerance achieved", fmt(sol.tolerance_achieved, 3)});
  ctx.rows.push_back({"iterations", std::to_string(sol.iterations)});
  if (sol.witness_weights) {
    ctx.rows.push_back({"f+ (peak 1)", fmt_vec(peak_one(sol.witness_weights->f_plus()))});
    ctx.rows.push_back({"f- (peak 1)", fmt_vec(peak_one(sol.witness_weights->f_minus()))});
  }
  if (sol.witness_pair) {
    ctx.rows.push_back({"p", fmt_vec(sol.witness_pair->first.probs())});
    ctx.rows.push_back({"q", fmt_vec(sol.witness_pair->second.probs())});
  }
  ctx.rows.push_back({"certificate entries", std::to_string(sol.certificate.size())});
  return exit_code::kOk;
}

// ---- minimax-check ----

int cmd_minimax(Context& ctx, const Common& c, int random_count, std::size_t letters, std::size_t max_vertices,
                const std::string& archive) {
  const auto opts = solver_options(c);
  ctx.title = "minimax-check";
  if (random_count <= 0) {
    const auto inst = load_tracked(ctx, c.instance);
    const auto r = verify_minimax(inst, c.tol, opts);
    ctx.report.outputs = to_json(r);
    ctx.rows.push_back({"gamma", fmt(r.gamma)});
    ctx.rows.push_back({"gamma_bar", fmt(r.gamma_bar)});
    ctx.rows.push_back({"gap", fmt(r.gap, 3) + " (allowed " + fmt(r.allowed, 3) + ")"});
    ctx.rows.push_back({"result", r.pass ? "pass" : "FAIL"});
    return r.pass ? exit_code::kOk : exit_code::kProperty;
  }
  std::mt19937_64 rng(c.seed);
  json cases = json::array();
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < random_count; ++i) {
    const auto inst = random_instance(letters, max_vertices, rng);
    json entry{{"index", i}};
    try {
      const auto r = verify_minimax(inst, c.tol, opts);
      entry["gap"] = r.gap;
      entry["pass"] = r.pass;
      worst = std::max(worst, r.gap);
      if (!r.pass) {
        ++failures;
        const fs::path dir = archive.empty() ? fs::path("counterexamples") : fs::path(archive);
        const fs::path file = dir / ("minimax_" + std::to_string(c.seed) + "_" + std::to_string(i) + ".json");
        write_json_file(file, json{{"instance", instance_to_json(inst)}, {"report", to_json(r)}});
        entry["archived"] = file.string();
      }
    } catch (const SolverError& e) {
      ++failures;
      entry["pass"] = false;
      entry["error"] = e.what();
    }
    ctx.debug("instance " + std::to_string(i) + ": " + entry.dump());
    cases.push_back(entry);
  }
  ctx.report.outputs = json{{"instances", random_count}, {"failures", failures}, {"max_gap", worst}, {"cases", cases}};
  ctx.rows.push_back({"instances", std::to_string(random_count)});
  ctx.rows.push_back({"max gap", fmt(worst, 3)});
  ctx.rows.push_back({"failures", std::to_string(failures)});
  return failures == 0 ? exit_code::kOk : exit_code::kProperty;
}

// ---- lfd ----

Distribution distribution_arg(const std::string& text) { return parse_distribution_list(text); }

int cmd_lfd(Context& ctx, const Common& c, const std::string& pstar, const std::string& qstar,
            const std::string& mode, int scan_grid) {
  const auto inst = load_tracked(ctx, c.instance);
  ctx.title = "lfd";
  if (scan_grid > 0) {
    const auto r = scan_weak_lfd(inst, scan_grid, c.seed);
    json out{{"found", r.pair.has_value()}, {"candidates_tried", r.candidates_tried}};
    if (r.pair) {
      out["pstar"] = r.pair->first.vector();
      out["qstar"] = r.pair->second.vector();
      ctx.rows.push_back({"p*", fmt_vec(r.pair->first.probs())});
      ctx.rows.push_back({"q*", fmt_vec(r.pair->second.probs())});
    }
    out["note"] = "a failed scan proves nothing";
    ctx.report.outputs = out;
    ctx.rows.push_back({"weak LFD found", r.pair ? "yes" : "no"});
    ctx.rows.push_back({"candidates", std::to_string(r.candidates_tried)});
    return exit_code::kOk;
  }
  std::optional<Distribution> p, q;
  if (!pstar.empty()) p = distribution_arg(pstar);
  if (!qstar.empty()) q = distribution_arg(qstar);
  if (!p || !q) {
    const auto doc = read_json_file(c.instance);
    if (doc.contains("pair")) {
      std::vector<double> a, b;
      for (const auto& e : doc.at("pair").at("pstar")) a.push_back(parse_probability(e));
      for (const auto& e : doc.at("pair").at("qstar")) b.push_back(parse_probability(e));
      if (!p) p = Distribution(std::move(a));
      if (!q) q = Distribution(std::move(b));
    }
  }
  if (!p || !q) throw ValidationError("--pstar and --qstar are required unless the instance has a \"pair\" entry");
  const auto rep = is_weak_lfd(*p, *q, inst);
  json out = to_json(rep);
  if (mode == "weak") out.erase("is_strong");
  if (mode == "strong") out.erase("is_weak");
  ctx.report.outputs = out;
  if (mode != "strong") ctx.rows.push_back({"weak", rep.is_weak ? "true" : "false"});
  if (mode != "weak") ctx.rows.push_back({"strong", rep.is_strong ? "true" : "false"});
  if (mode != "strong" && rep.weak_violation) ctx.rows.push_back({"weak violation", *rep.weak_violation});
  if (mode != "weak" && rep.strong_violation) ctx.rows.push_back({"strong violation", *rep.strong_violation});
  return exit_code::kOk;
}

// ---- fsm ----

int cmd_fsm(Context& ctx, const Common& c, int S, double delta, double eta, std::optional<double> kappa,
            const std::string& out_path, bool hellman, const std::string& pstar, const std::string& qstar) {
  const auto inst = load_tracked(ctx, c.instance);
  ctx.title = "fsm";
  std::optional<DetectorFSM> fsm;
  if (hellman) {
    const auto p = pstar.empty() ? inst.p0.vertex(0) : distribution_arg(pstar);
    const auto q = qstar.empty() ? inst.p1.vertex(0) : distribution_arg(qstar);
    fsm.emplace(build_hellman_counter(p, q, S, delta, kappa));
  } else {
    const auto opts = solver_options(c);
    const auto g = solve_gamma(inst, opts);
    const auto cc = solve_C(inst, opts);
    if (!g.witness_weights || !cc.witness_weights) {
      throw ValidationError("the exponent programs are unbounded; no finite weights to build from");
    }
    fsm.emplace(build_adversarial_fsm(S, *g.witness_weights, *cc.witness_weights, delta, kappa, eta, inst));
  }
  const auto doc = fsm_to_json(*fsm);
  if (!out_path.empty()) write_json_file(out_path, doc);
  ctx.report.outputs = json{{"fsm", doc}, {"written_to", out_path}};
  ctx.rows.push_back({"states", std::to_string(fsm->num_states())});
  ctx.rows.push_back({"kappa", fmt(fsm->params().kappa)});
  ctx.rows.push_back({"initial state", std::to_string(fsm->initial_state())});
  if (!out_path.empty()) ctx.rows.push_back({"written to", out_path});
  return exit_code::kOk;
}

// ---- simulate / mdp-worst ----

AdversaryPolicy policy_arg(Context& ctx, const DetectorFSM& fsm, const ProblemInstance& inst, int h,
                           const std::string& policy_path, int vertex) {
  if (!policy_path.empty()) {
    ctx.report.file_hashes[policy_path] = sha256_file(policy_path);
    return policy_from_json(read_json_file(policy_path), inst);
  }
  if (vertex >= 0) {
    const auto& poly = inst.polytope(h);
    if (static_cast<std::size_t>(vertex) >= poly.num_vertices()) throw ValidationError("--vertex out of range");
    return AdversaryPolicy::fixed(poly.vertex(static_cast<std::size_t>(vertex)), inst, h);
  }
  return AdversaryPolicy::stationary_vertices(worst_case_adversary(fsm, inst, h).policy, inst, h);
}

int cmd_simulate(Context& ctx, const Common& c, const std::string& fsm_path, int h, std::uint64_t n, int replicas,
                 const std::string& policy_path, int vertex) {
  const auto inst = load_tracked(ctx, c.instance);
  const auto fsm = load_fsm_tracked(ctx, fsm_path);
  const auto pol = policy_arg(ctx, fsm, inst, h, policy_path, vertex);
  ctx.title = "simulate";
  std::vector<SimulationResult> runs;
  for (int r = 0; r < std::max(1, replicas); ++r) runs.push_back(simulate(fsm, pol, h, n, c.seed + static_cast<std::uint64_t>(r)));
  const auto merged = merge_replicas(runs);
  json reps = json::array();
  for (const auto& r : runs) reps.push_back(to_json(r));
  json out{{"replicas", reps}, {"average_error", merged.average_error}, {"stderr", merged.stderr_}};
  const double exact = exact_average_error(fsm, pol, h).value;
  out["exact_average_error"] = exact;
  ctx.report.outputs = out;
  if (!c.csv_path.empty()) {
    std::ofstream csv(c.csv_path);
    if (!csv) throw ValidationError("cannot write " + c.csv_path);
    write_trajectory_csv(runs.front(), csv);
  }
  ctx.rows.push_back({"steps", std::to_string(merged.total_steps)});
  ctx.rows.push_back({"average error", fmt(merged.average_error, 8) + " +- " + fmt(merged.stderr_, 3)});
  ctx.rows.push_back({"exact", fmt(exact, 8)});
  ctx.rows.push_back({"tail range", "[" + fmt(runs.front().tail_min, 6) + ", " + fmt(runs.front().tail_max, 6) + "]"});
  return exit_code::kOk;
}

int cmd_mdp(Context& ctx, const Common& c, const std::string& fsm_path, int h, const std::string& policy_out) {
  const auto inst = load_tracked(ctx, c.instance);
  const auto fsm = load_fsm_tracked(ctx, fsm_path);
  ctx.title = "mdp-worst";
  const auto sol = worst_case_adversary(fsm, inst, h, std::min(c.tol, 1e-10));
  auto out = to_json(sol);
  if (!policy_out.empty()) {
    write_json_file(policy_out, policy_to_json(sol.policy, h));
    out["policy_file"] = policy_out;
  }
  ctx.report.outputs = out;
  ctx.rows.push_back({"worst error", fmt(sol.worst_error, 12)});
  ctx.rows.push_back({"gain", fmt(sol.gain, 12)});
  ctx.rows.push_back({"residual", fmt(sol.residual, 3)});
  std::string pol;
  for (auto v : sol.policy) pol += std::to_string(v) + " ";
  ctx.rows.push_back({"policy (vertex per state)", pol});
  return exit_code::kOk;
}

// ---- verify-drift ----

int cmd_drift(Context& ctx, const Common& c, const std::string& fsm_path, const std::string& claim, int state,
              double slack) {
  const auto inst = load_tracked(ctx, c.instance);
  const auto fsm = load_fsm_tracked(ctx, fsm_path);
  ctx.title = "verify-drift";
  std::vector<DriftSpec> specs;
  const int S = fsm.num_states();
  if (claim == "1" || claim == "all") specs.push_back(build_claim1_drift(fsm));
  if (claim == "mirror" || claim == "all") specs.push_back(mirrored_claim1_drift(fsm));
  if (claim == "2" || claim == "all") {
    if (state >= 0) {
      specs.push_back(build_claim2_drift(fsm, state));
    } else {
      for (int s = 1; s <= S - 2; ++s) specs.push_back(build_claim2_drift(fsm, s));
    }
  }
  if (specs.empty()) throw ValidationError("--claim must be 1, 2, mirror or all");
  json reports = json::array();
  bool pass = true;
  for (const auto& spec : specs) {
    const auto r = verify_drift(fsm, spec, inst, slack);
    auto j = to_json(r);
    j["label"] = spec.label;
    reports.push_back(j);
    pass = pass && r.pass;
    ctx.rows.push_back({spec.label, std::string(r.pass ? "pass" : "FAIL") + " (worst " + fmt(r.worst, 3) + ")"});
  }
  ctx.report.outputs = json{{"specs", reports}, {"pass", pass}};
  return pass ? exit_code::kOk : exit_code::kProperty;
}

// ---- bounds ----

int cmd_bounds(Context& ctx, const Common& c, int S, const std::string& from_solved, std::optional<double> gamma,
               std::optional<double> cee) {
  ctx.title = "bounds";
  const std::string path = !from_solved.empty() ? from_solved : c.instance;
  if (!path.empty() && (!gamma || !cee)) {
    const auto inst = load_tracked(ctx, path);
    const auto opts = solver_options(c);
    if (!gamma) gamma = solve_gamma(inst, opts).value;
    if (!cee) cee = solve_C(inst, opts).value;
  }
  if (!gamma || !cee) throw ValidationError("give --from-solved PATH or both --gamma and --C");
  const auto b = bounds_for_S(*gamma, *cee, S);
  json out{{"S", S}, {"gamma", num(*gamma)}, {"C", num(*cee)}, {"lower", b.lower}, {"exponent", num(b.exponent)}};
  out["upper"] = b.upper ? json(*b.upper) : json(nullptr);
  ctx.report.outputs = out;
  ctx.rows.push_back({"gamma", fmt(*gamma)});
  ctx.rows.push_back({"C", fmt(*cee)});
  ctx.rows.push_back({"lower", fmt(b.lower)});
  ctx.rows.push_back({"upper", b.upper ? fmt(*b.upper) : "n/a (S < 3)"});
  ctx.rows.push_back({"exponent", fmt(b.exponent)});
  return exit_code::kOk;
}

// ---- reproduce ----

struct Row {
  std::string name;
  std::string computed;
  std::string expected;
  std::string tolerance;
  bool pass;
};

std::vector<Row> reproduce_indicator(const ProblemInstance& inst, const SolverOptions& opts) {
  std::vector<Row> rows;
  const auto g = solve_gamma(inst, opts);
  rows.push_back({"gamma", fmt(g.value), "4", "1e-4", std::abs(g.value - 4.0) <= 1e-4});
  double dist = std::numeric_limits<double>::infinity();
  if (g.witness_weights) {
    const std::vector<double> fp{1.0 / 3.0, 1.0, 0.0};
    const std::vector<double> fm{0.0, 0.0, 1.0};
    dist = std::max(linf_distance(peak_one(g.witness_weights->f_plus()), fp),
                    linf_distance(peak_one(g.witness_weights->f_minus()), fm));
  }
  rows.push_back({"witness direction (L-inf)", fmt(dist, 3), "f+ ~ (1/3,1,0), f- ~ (0,0,1)", "1e-3", dist <= 1e-3});
  const auto gb = solve_gamma_bar(inst, opts);
  const double gap = std::abs(g.value - gb.value);
  rows.push_back({"minimax equality |gamma - gamma_bar|", fmt(gap, 3), "0", "1e-3", gap <= 1e-3});
  return rows;
}

std::vector<Row> reproduce_weaklfd(const ProblemInstance& inst, const json& doc, const SolverOptions& opts) {
  std::vector<Row> rows;
  std::vector<double> a, b;
  for (const auto& e : doc.at("pair").at("pstar")) a.push_back(parse_probability(e));
  for (const auto& e : doc.at("pair").at("qstar")) b.push_back(parse_probability(e));
  const Distribution p(std::move(a)), q(std::move(b));
  const auto rep = is_weak_lfd(p, q, inst);
  rows.push_back({"weak LFD", rep.is_weak ? "true" : "false", "true", "exact", rep.is_weak});
  rows.push_back({"strong LFD", rep.is_strong ? "true" : "false", "false", "exact", !rep.is_strong});
  const auto gb = solve_gamma_bar(inst, opts);
  rows.push_back({"gamma_bar", fmt(gb.value), "81", "0.05", std::abs(gb.value - 81.0) <= 0.05});
  const double pe = weak_lfd_pe(p, q, 3);
  rows.push_back({"P_e*(3)", fmt(pe, 15), fmt(1.0 / 82.0, 15), "1e-15", std::abs(pe - 1.0 / 82.0) <= 1e-15});
  return rows;
}

int cmd_reproduce(Context& ctx, const Common& c, const std::string& example, const std::string& out_dir) {
  ctx.title = "reproduce " + example;
  if (example != "indicator" && example != "weaklfd") {
    throw ValidationError("--example must be indicator or weaklfd");
  }
  const std::string path = data_dir() + "/" + example + ".json";
  const auto inst = load_tracked(ctx, path);
  const auto opts = solver_options(c);
  const auto rows = example == "indicator" ? reproduce_indicator(inst, opts)
                                           : reproduce_weaklfd(inst, read_json_file(path), opts);
  json table = json::array();
  bool all = true;
  for (const auto& r : rows) {
    table.push_back({{"quantity", r.name},
                     {"computed", r.computed},
                     {"expected", r.expected},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass}});
    all = all && r.pass;
    ctx.rows.push_back({r.name, std::string(r.pass ? "PASS  " : "FAIL  ") + r.computed + " (expected " + r.expected +
                                    ", tol " + r.tolerance + ")"});
  }
  ctx.report.outputs = json{{"example", example}, {"rows", table}, {"pass", all}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "summary.csv");
    csv << "quantity,computed,expected,tolerance,pass\n";
    for (const auto& r : rows) {
      csv << '"' << r.name << "\"," << r.computed << ",\"" << r.expected << "\"," << r.tolerance << ','
          << (r.pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return all ? exit_code::kOk : exit_code::kMismatch;
}

void add_common(CLI::App* sub, Common& c) {
  sub->set_help_flag("--help", "show this help");
  sub->add_option("--instance,instance", c.instance, "problem instance JSON");
  sub->add_option("--tol", c.tol, "solver tolerance");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--starts", c.starts, "multistart count");
  sub->add_option("--json", c.json_path, "also write the run report here");
  sub->add_option("--csv", c.csv_path, "CSV output (trajectory for simulate)");
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-constrained adversarial hypothesis testing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ADVHT_VERSION));

  Common c;
  std::function<int(Context&)> action;
  std::string command;

  for (const char* name : {"gamma", "cee", "gamma-bar"}) {
    auto* sub = app.add_subcommand(name, std::string("solve the ") + name + " program");
    add_common(sub, c);
    sub->callback([&, name] {
      command = name;
      action = [&, name](Context& ctx) { return cmd_exponent(ctx, c, name); };
    });
  }

  int random_count = 0;
  std::size_t letters = 4, max_vertices = 3;
  std::string archive;
  {
    auto* sub = app.add_subcommand("minimax-check", "check gamma == gamma_bar");
    add_common(sub, c);
    sub->add_option("--random", random_count, "check N seeded random instances instead");
    sub->add_option("--letters", letters, "alphabet size for --random");
    sub->add_option("--max-vertices", max_vertices, "vertices per polytope for --random");
    sub->add_option("--archive", archive, "directory for counterexamples");
    sub->callback([&] {
      command = "minimax-check";
      action = [&](Context& ctx) { return cmd_minimax(ctx, c, random_count, letters, max_vertices, archive); };
    });
  }

  std::string pstar, qstar, mode = "both";
  int scan = 0;
  {
    auto* sub = app.add_subcommand("lfd", "test a candidate least favourable pair");
    add_common(sub, c);
    sub->add_option("--pstar", pstar, "candidate in P0, comma separated");
    sub->add_option("--qstar", qstar, "candidate in P1, comma separated");
    sub->add_option("--mode", mode)->check(CLI::IsMember({"weak", "strong", "both"}));
    sub->add_option("--scan", scan, "search for a weak pair with this grid size");
    sub->callback([&] {
      command = "lfd";
      action = [&](Context& ctx) { return cmd_lfd(ctx, c, pstar, qstar, mode, scan); };
    });
  }

  int S = 4;
  double delta = 1e-3, eta = 1e-3;
  std::optional<double> kappa;
  std::string out_path;
  bool hellman = false;
  {
    auto* sub = app.add_subcommand("fsm", "build a detector");
    add_common(sub, c);
    sub->add_option("--S", S, "number of states")->required();
    sub->add_option("--delta", delta, "end-state exit scale");
    sub->add_option("--eta", eta, "weight floor");
    sub->add_option("--kappa", kappa, "end-state balance (default: derived)");
    sub->add_option("--out", out_path, "write the FSM JSON here");
    sub->add_flag("--hellman", hellman, "classical counter for a single pair");
    sub->add_option("--pstar", pstar, "p for --hellman (default: first P0 vertex)");
    sub->add_option("--qstar", qstar, "q for --hellman (default: first P1 vertex)");
    sub->callback([&] {
      command = "fsm";
      action = [&](Context& ctx) { return cmd_fsm(ctx, c, S, delta, eta, kappa, out_path, hellman, pstar, qstar); };
    });
  }

  std::string fsm_path, policy_path;
  int h = 0;
  std::uint64_t n = 1'000'000;
  int replicas = 1;
  int vertex = -1;
  {
    auto* sub = app.add_subcommand("simulate", "Monte Carlo run of a detector against an adversary");
    add_common(sub, c);
    sub->add_option("--fsm", fsm_path)->required();
    sub->add_option("--h", h)->check(CLI::Range(0, 1));
    sub->add_option("--n", n, "steps per replica");
    sub->add_option("--replicas", replicas, "independent seeds seed, seed+1, ...");
    sub->add_option("--policy", policy_path, "policy JSON (default: MDP worst case)");
    sub->add_option("--vertex", vertex, "fixed adversary at this vertex");
    sub->callback([&] {
      command = "simulate";
      action = [&](Context& ctx) { return cmd_simulate(ctx, c, fsm_path, h, n, replicas, policy_path, vertex); };
    });
  }
  std::string policy_out;
  {
    auto* sub = app.add_subcommand("mdp-worst", "worst-case stationary adversary");
    add_common(sub, c);
    sub->add_option("--fsm", fsm_path)->required();
    sub->add_option("--h", h)->check(CLI::Range(0, 1));
    sub->add_option("--policy-out", policy_out, "write the policy JSON here");
    sub->callback([&] {
      command = "mdp-worst";
      action = [&](Context& ctx) { return cmd_mdp(ctx, c, fsm_path, h, policy_out); };
    });
  }

  std::string claim = "all";
  int state = -1;
  double slack = 1e-12;
  {
    auto* sub = app.add_subcommand("verify-drift", "one-step drift certificates");
    add_common(sub, c);
    sub->add_option("--fsm", fsm_path)->required();
    sub->add_option("--claim", claim)->check(CLI::IsMember({"1", "2", "mirror", "all"}));
    sub->add_option("--state", state, "internal state for --claim 2 (0-based)");
    sub->add_option("--slack", slack);
    sub->callback([&] {
      command = "verify-drift";
      action = [&](Context& ctx) { return cmd_drift(ctx, c, fsm_path, claim, state, slack); };
    });
  }

  std::string from_solved;
  std::optional<double> gamma_v, c_v;
  {
    auto* sub = app.add_subcommand("bounds", "error bounds for S states");
    add_common(sub, c);
    sub->add_option("--S", S)->required();
    sub->add_option("--from-solved", from_solved, "instance to solve for gamma and C");
    sub->add_option("--gamma", gamma_v);
    sub->add_option("--C", c_v);
    sub->callback([&] {
      command = "bounds";
      action = [&](Context& ctx) { return cmd_bounds(ctx, c, S, from_solved, gamma_v, c_v); };
    });
  }

  std::string example, out_dir;
  {
    auto* sub = app.add_subcommand("reproduce", "rerun a bundled example");
    add_common(sub, c);
    sub->add_option("--example", example)->required();
    sub->add_option("--out", out_dir, "directory for summary.csv");
    sub->callback([&] {
      command = "reproduce";
      action = [&](Context& ctx) { return cmd_reproduce(ctx, c, example, out_dir); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_code::kInput;
  }

  Context ctx;
  ctx.level = log_level_from_env();
  ctx.err = &err;
  ctx.report.command = command;
  ctx.report.version = ADVHT_VERSION;
  ctx.report.seed = c.seed;
  ctx.report.parameters = json{{"argv", std::vector<std::string>(argv + 1, argv + argc)},
                               {"tol", c.tol},
                               {"starts", c.starts},
                               {"instance", c.instance}};
  const auto t0 = std::chrono::steady_clock::now();
  int code = exit_code::kOk;
  try {
    code = action(ctx);
  } catch (const ParseError& e) {
    code = exit_code::kInput;
    ctx.report.outputs["error"] = e.what();
  } catch (const ValidationError& e) {
    code = exit_code::kInput;
    ctx.report.outputs["error"] = e.what();
  } catch (const SolverError& e) {
    code = exit_code::kSolver;
    ctx.report.outputs["error"] = e.what();
    ctx.report.outputs["best_value"] = num(e.best_value);
    ctx.report.outputs["gap"] = num(e.gap_value);
  } catch (const Error& e) {
    code = exit_code::kSolver;
    ctx.report.outputs["error"] = e.what();
  } catch (const json::exception& e) {
    code = exit_code::kInput;
    ctx.report.outputs["error"] = std::string("JSON: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    code = exit_code::kInput;
    ctx.report.outputs["error"] = e.what();
  }
  ctx.report.wall_time_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  ctx.report.exit_code = code;

  const json doc = to_json(ctx.report);
  out << doc.dump(2) << '\n';
  if (!c.json_path.empty()) {
    try {
      write_json_file(c.json_path, doc);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      if (code == exit_code::kOk) code = exit_code::kInput;
    }
  }
  if (ctx.report.outputs.contains("error")) {
    err << "error: " << ctx.report.outputs["error"].get<std::string>() << '\n';
  } else if (ctx.level != LogLevel::kError) {
    print_table(err, ctx.title, ctx.rows);
  }
  return code;
}

}  // namespace advht
