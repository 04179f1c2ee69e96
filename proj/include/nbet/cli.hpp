#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nbet/builtin.hpp"
#include "nbet/io.hpp"

namespace nbet::cli {

inline constexpr const char* kModeEnv = "NBET_MODE";

/// Exact trajectories get expensive quickly; longer runs use float.
inline constexpr std::size_t kExactStepLimit = 1000;

struct Settings {
  std::optional<std::string> mode_flag;
  std::optional<std::string> mode_env;
  std::uint64_t seed = 1;
};

namespace detail {

/// --mode, then the document's own mode, then the environment, then exact.
inline Mode resolve_mode(const Settings& s, const std::optional<Mode>& document) {
  if (s.mode_flag) return parse_mode(*s.mode_flag);
  if (document) return *document;
  if (s.mode_env && !s.mode_env->empty()) return parse_mode(*s.mode_env);
  return Mode::Exact;
}

inline std::optional<Mode> document_mode(const Json& j) {
  if (j.is_object() && j.contains("mode") && j["mode"].is_string()) return parse_mode(j["mode"].get<std::string>());
  return std::nullopt;
}

struct LoadedFamily {
  MatrixFamily<Rational> family;
  Mode mode = Mode::Exact;
  std::optional<Vector<Rational>> start;  // initial-state indicator for automata
};

inline LoadedFamily load_family(const std::string& path, bool automaton, const Settings& s) {
  const Json j = parse_json_text(read_file(path), automaton ? "automaton JSON" : "family JSON");
  LoadedFamily out;
  out.mode = resolve_mode(s, document_mode(j));
  if (automaton) {
    auto conv = to_matrix_family(automaton_from_json(j).automaton);
    out.family = std::move(conv.family);
    out.start = std::move(conv.start);
  } else {
    out.family = family_from_json(j).family;
  }
  return out;
}

inline Vector<Rational> parse_vector(const std::string& text, std::size_t dim) {
  Vector<Rational> v;
  std::string tok;
  std::istringstream ss(text);
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    if (b == std::string::npos) fail(ErrorKind::Usage, "empty entry in --vector");
    v.push_back(parse_rational(tok.substr(b, e - b + 1)));
  }
  if (v.size() != dim)
    fail(ErrorKind::Usage, "--vector has " + std::to_string(v.size()) + " entries, family dimension is " + std::to_string(dim));
  return v;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Usage, "cannot write '" + path + "'");
  out << text;
}

inline FitTarget parse_target(const std::string& s) {
  if (s == "norm") return FitTarget::Norm;
  if (s == "live") return FitTarget::Live;
  if (s == "dh" || s == "dh_to_x") return FitTarget::DistanceToX;
  fail(ErrorKind::Usage, "fit target must be norm, live or dh_to_x");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

template <class T>
int verify_with(const MatrixFamily<T>& f, std::ostream& out) {
  const auto v = validate(f);
  out << fairness_to_json(v).dump() << '\n';
  return v.kind == FairnessKind::NotSuperfair ? exit_code(ErrorKind::NotSuperfair) : 0;
}

template <class T>
Json classify_with(const MatrixFamily<T>& f, const GeneralOptions& opt) {
  if (star_check(reachability_graph(f))) return classification_to_json(classify_star(f, opt.classify), f);
  return general_to_json(classify_general(f, opt), f);
}

struct SimulateArgs {
  std::string vector;
  std::string sequence = "champernowne";
  std::size_t steps = 1000;
  bool live = false;
  std::size_t live_every = 1;
  std::string csv;
  std::string fit;
  bool fit_zero_limit = false;
};

template <class T>
int simulate_with(const MatrixFamily<T>& f, const Vector<T>& v, const SimulateArgs& a, std::ostream& out) {
  EvolveOptions<T> eo;
  eo.live = a.live;
  eo.live_every = a.live_every;
  if (star_check(reachability_graph(f)) && validate(f).kind != FairnessKind::NotSuperfair) {
    const auto c = classify_star(f);
    if (c.direction) eo.x = c.direction->x;
    if (c.subspace && a.live) eo.subspace = c.subspace;
  }
  auto src = make_source(a.sequence, f.alphabet());
  const auto records = evolve(f, v, *src, a.steps, eo);
  if (a.csv.empty()) {
    write_csv(out, records);
  } else {
    std::ofstream file(a.csv, std::ios::binary);
    if (!file) fail(ErrorKind::Usage, "cannot write '" + a.csv + "'");
    write_csv(file, records);
  }
  if (!a.fit.empty()) {
    RateFitOptions ro;
    ro.force_zero_limit = a.fit_zero_limit;
    Json j;
    j["fit"] = rate_fit_to_json(rate_fit(records, parse_target(a.fit), ro));
    j["fit"]["target"] = a.fit;
    out << j.dump() << '\n';
  }
  return 0;
}

inline Json named_example(const std::string& name, const Rational& p1, const Rational& p2, bool automaton) {
  using namespace builtin;
  if (name == "case0") return automaton ? automaton_to_json(sudden_death_automaton()) : family_to_json(sudden_death_family());
  if (name == "case1") return automaton ? automaton_to_json(ruin_automaton(p1, p2)) : family_to_json(ruin_family(p1, p2));
  if (name == "case2") return automaton ? automaton_to_json(stabilizing_automaton()) : family_to_json(stabilizing_family());
  if (name == "fig1") {
    const auto b = two_letter_automaton();
    return automaton ? automaton_to_json(b) : family_to_json(to_matrix_family(b).family);
  }
  if (name == "leakage") return automaton ? automaton_to_json(leaking_automaton()) : family_to_json(leaking_family());
  if (name == "blockdiag") {
    if (automaton) fail(ErrorKind::Usage, "blockdiag exists only as a matrix family");
    return family_to_json(mixed_family());
  }
  fail(ErrorKind::Usage, "unknown example '" + name + "' (case0, case1, case2, fig1, blockdiag, leakage)");
}

}  // namespace detail

/// Runs one command line (without the program name). Payloads go to `out`,
/// human-readable notes to `err`. Returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err, Settings settings = {}) {
  CLI::App app{"Classify and simulate finite-state betting strategies against normal sequences", "nbet"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string mode_flag;
  app.add_option("--mode", mode_flag, "Scalar mode: exact or float (default from NBET_MODE, else exact)");
  app.add_option("--seed", settings.seed, "Seed for Monte Carlo runs and probes");

  std::string family_path;
  bool as_automaton = false;
  std::string automaton_path;

  auto* verify = app.add_subcommand("verify", "Fairness verdict of a family");
  verify->add_option("family", family_path, "Family JSON")->required();

  auto* classify = app.add_subcommand("classify", "Case 0/1/2 verdict, or a per-component report");
  classify->add_option("family", family_path, "Family JSON");
  classify->add_option("--automaton", automaton_path, "Betting automaton JSON instead of a family");
  std::size_t probe_length = 50, probe_trials = 200;
  classify->add_option("--probe-length", probe_length, "Word length of the Live contraction probe");
  classify->add_option("--probe-trials", probe_trials, "Number of sampled words in the probe");

  detail::SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Trajectory of v M_X[1..n] as CSV");
  simulate->add_option("family", family_path, "Family JSON");
  simulate->add_option("--automaton", automaton_path, "Betting automaton JSON instead of a family");
  simulate->add_option("--vector", sim.vector, "Start vector, comma separated (default: uniform, or the initial state)");
  simulate->add_option("--sequence", sim.sequence, "champernowne | periodic:<word> | file:<path> | random:<seed>");
  simulate->add_option("--steps", sim.steps, "Number of symbols to read");
  simulate->add_flag("--live", sim.live, "Record Live along the trajectory");
  simulate->add_option("--live-every", sim.live_every, "Sample Live every k steps");
  simulate->add_option("--csv", sim.csv, "Write the CSV to this path instead of standard output");
  simulate->add_option("--fit", sim.fit, "Append a rate fit of norm, live or dh_to_x")
      ->expected(0, 1)
      ->default_str("norm");
  simulate->add_flag("--fit-zero-limit", sim.fit_zero_limit, "Fit with the limit fixed at zero");

  std::string sequence = "champernowne";
  std::size_t steps = 0;
  std::vector<std::string> mc;
  auto* expected = app.add_subcommand("expected", "Expected capital of a betting automaton");
  expected->add_option("automaton", family_path, "Automaton JSON")->required();
  expected->add_option("--sequence", sequence, "champernowne | periodic:<word> | file:<path> | random:<seed>");
  expected->add_option("--steps", steps, "Number of symbols to read");
  expected->add_option("--mc", mc, "Monte Carlo check: trials [seed]")->expected(1, 2);

  std::string example;
  std::string p1 = "3/10", p2 = "3/5";
  std::string output;
  auto* examples = app.add_subcommand("examples", "Emit a built-in example as JSON");
  examples->add_option("name", example, "case0 | case1 | case2 | fig1 | blockdiag | leakage")->required();
  examples->add_option("--p1", p1, "case1: stay probability of the first state");
  examples->add_option("--p2", p2, "case1: stay probability of the second state");
  examples->add_flag("--automaton", as_automaton, "Emit the betting automaton instead of its matrices");
  examples->add_option("-o,--output", output, "Write to this path instead of standard output");

  std::string dot_path, reach_dot_path;
  auto* support_cmd = app.add_subcommand("support", "Support automaton, bottom components and mixing words");
  support_cmd->add_option("family", family_path, "Family JSON");
  support_cmd->add_option("--automaton", automaton_path, "Betting automaton JSON instead of a family");
  support_cmd->add_option("--dot", dot_path, "Write the support automaton as DOT");
  support_cmd->add_option("--reachability-dot", reach_dot_path, "Write the index reachability graph as DOT");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    Json j{{"error", "Usage"}, {"message", e.what()}, {"exit_code", 1}};
    out << j.dump() << '\n';
    err << "nbet: " << e.what() << '\n';
    return 1;
  }
  if (!mode_flag.empty()) settings.mode_flag = mode_flag;

  auto source_path = [&]() -> std::pair<std::string, bool> {
    if (!automaton_path.empty() && !family_path.empty()) fail(ErrorKind::Usage, "give either a family or --automaton, not both");
    if (!automaton_path.empty()) return {automaton_path, true};
    if (family_path.empty()) fail(ErrorKind::Usage, "a family file or --automaton is required");
    return {family_path, false};
  };

  try {
    if (*verify) {
      const auto lf = detail::load_family(family_path, false, settings);
      if (lf.mode == Mode::Float) return detail::verify_with(family_cast<double>(lf.family), out);
      return detail::verify_with(lf.family, out);
    }
    if (*classify) {
      const auto [path, automaton] = source_path();
      const auto lf = detail::load_family(path, automaton, settings);
      GeneralOptions go;
      go.probe_length = probe_length;
      go.probe_trials = probe_trials;
      go.probe_seed = settings.seed;
      const Json j = lf.mode == Mode::Float ? detail::classify_with(family_cast<double>(lf.family), go)
                                            : detail::classify_with(lf.family, go);
      out << j.dump() << '\n';
      return 0;
    }
    if (*simulate) {
      const auto [path, automaton] = source_path();
      const auto lf = detail::load_family(path, automaton, settings);
      const std::size_t m = lf.family.dim();
      Vector<Rational> v;
      if (!sim.vector.empty()) {
        v = detail::parse_vector(sim.vector, m);
      } else if (lf.start) {
        v = *lf.start;
      } else {
        v.assign(m, Rational(1, static_cast<unsigned long>(m)));
      }
      if (simulate->count("--fit") && sim.fit.empty()) sim.fit = "norm";
      Mode mode = lf.mode;
      if (mode == Mode::Exact && sim.steps > kExactStepLimit) {
        err << "nbet: " << sim.steps << " steps exceed the exact limit of " << kExactStepLimit
            << "; simulating in float mode\n";
        mode = Mode::Float;
      }
      if (mode == Mode::Float) return detail::simulate_with(family_cast<double>(lf.family), vector_cast<double>(v), sim, out);
      return detail::simulate_with(lf.family, v, sim, out);
    }
    if (*expected) {
      const Json j = parse_json_text(read_file(family_path), "automaton JSON");
      const Mode mode = detail::resolve_mode(settings, detail::document_mode(j));
      const auto b = automaton_from_json(j).automaton;
      auto src = make_source(sequence, b.alphabet);
      const Word prefix = take(*src, steps);
      Json r;
      if (mode == Mode::Exact) {
        r["exact"] = expected_capital(b, prefix).get_str();
      } else {
        r["exact"] = to_string(expected_capital(automaton_cast<double>(b), prefix));
      }
      r["steps"] = steps;
      r["sequence"] = sequence;
      if (!mc.empty()) {
        std::size_t trials = 0;
        std::uint64_t seed = settings.seed;
        try {
          trials = std::stoull(mc[0]);
          if (mc.size() > 1) seed = std::stoull(mc[1]);
        } catch (const std::exception&) {
          fail(ErrorKind::Usage, "--mc expects integer trials and seed");
        }
        const auto est = mc_capital(b, prefix, trials, seed);
        r["mc"] = {{"mean", est.mean}, {"std_error", est.std_error}, {"trials", est.trials}, {"seed", est.seed}};
      }
      out << r.dump() << '\n';
      return 0;
    }
    if (*examples) {
      const Json j = detail::named_example(example, parse_rational(p1), parse_rational(p2), as_automaton);
      if (output.empty()) {
        out << j.dump(2) << '\n';
      } else {
        detail::write_text(output, j.dump(2) + "\n");
      }
      return 0;
    }
    if (*support_cmd) {
      const auto [path, automaton] = source_path();
      const auto lf = detail::load_family(path, automaton, settings);
      auto report = [&](const auto& f) {
        const auto aut = build_support_automaton(f);
        const auto bs = bscc_structure(aut);
        const Word sync = synchronizing_word(aut, bs);
        std::optional<Word> pm;
        if (bs.minimal_member) pm = pseudo_mixing_word(aut, bs, *bs.minimal_member);
        if (!dot_path.empty()) detail::write_text(dot_path, support_automaton_dot(aut, bs, f));
        if (!reach_dot_path.empty()) detail::write_text(reach_dot_path, reachability_dot(reachability_graph(f)));
        return support_report_to_json(aut, bs, f, sync, pm);
      };
      const Json j = lf.mode == Mode::Float ? report(family_cast<double>(lf.family)) : report(lf.family);
      out << j.dump() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    out << error_to_json(e).dump() << '\n';
    err << "nbet: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    err << "nbet: out of memory\n";
    return 3;
  }
  return 1;
}

/// Settings taken from the process environment.
inline Settings settings_from_environment() {
  Settings s;
  if (const char* m = std::getenv(kModeEnv)) s.mode_env = std::string(m);
  return s;
}

}  // namespace nbet::cli
