#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nbet/betting.hpp"
#include "nbet/classify.hpp"
#include "nbet/family.hpp"
#include "nbet/support.hpp"
#include "nbet/trajectory.hpp"

namespace nbet {

using Json = nlohmann::ordered_json;

enum class Mode { Exact, Float };

inline std::string_view to_string(Mode m) { return m == Mode::Exact ? "exact" : "float"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "exact") return Mode::Exact;
  if (s == "float") return Mode::Float;
  fail(ErrorKind::Parse, "mode must be \"exact\" or \"float\", got \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

inline Rational scalar_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer() || j.is_number_unsigned()) return parse_rational(j.dump());
  if (j.is_number_float()) return parse_rational(j.dump());
  fail(ErrorKind::Parse, "expected a number or a numeric string, got " + j.dump());
}

template <class T>
Json scalar_to_json(const T& x) {
  return to_string(x);
}

template <class T>
Json vector_to_json(const Vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(scalar_to_json(x));
  return a;
}

inline Json index_set_to_json(IndexSet e) {
  Json a = Json::array();
  for (auto i : e.members()) a.push_back(i + 1);
  return a;
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Parse, what + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Malformed, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline Alphabet parse_alphabet(const Json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::Malformed, "alphabet must be a non-empty array");
  Alphabet out;
  for (const auto& s : j) {
    if (!s.is_string()) fail(ErrorKind::Malformed, "alphabet symbols must be strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

struct FamilyDocument {
  Mode mode = Mode::Exact;
  MatrixFamily<Rational> family;  // exact values of the entries as written
};

inline FamilyDocument family_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::Malformed, "family must be a JSON object");
  FamilyDocument doc;
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) fail(ErrorKind::Malformed, "mode must be a string");
    doc.mode = parse_mode(j["mode"].get<std::string>());
  }
  const Alphabet alphabet = detail::parse_alphabet(detail::member(j, "alphabet"));
  const Json& dim_j = detail::member(j, "dim");
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1)
    fail(ErrorKind::Malformed, "dim must be a positive integer");
  const auto m = static_cast<std::size_t>(dim_j.get<long long>());
  if (m > kMaxDim) fail(ErrorKind::Malformed, "dim above " + std::to_string(kMaxDim) + " is not supported");
  const Json& mats = detail::member(j, "matrices");
  if (!mats.is_object()) fail(ErrorKind::Malformed, "matrices must be an object keyed by symbol");
  for (const auto& [key, _] : mats.items()) symbol_index(alphabet, key);
  std::vector<Matrix<Rational>> ms;
  for (const auto& sym : alphabet) {
    if (!mats.contains(sym)) fail(ErrorKind::Malformed, "no matrix for symbol '" + sym + "'");
    const Json& rows = mats.at(sym);
    if (!rows.is_array() || rows.size() != m)
      fail(ErrorKind::Malformed, "matrix '" + sym + "' must have " + std::to_string(m) + " rows");
    Matrix<Rational> mat(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      if (!rows[i].is_array() || rows[i].size() != m)
        fail(ErrorKind::Malformed, "matrix '" + sym + "' row " + std::to_string(i + 1) + " must have " +
                                       std::to_string(m) + " entries");
      for (std::size_t k = 0; k < m; ++k) mat(i, k) = scalar_from_json(rows[i][k]);
    }
    ms.push_back(std::move(mat));
  }
  doc.family = MatrixFamily<Rational>(alphabet, std::move(ms));
  return doc;
}

inline FamilyDocument family_from_text(const std::string& text) { return family_from_json(parse_json_text(text, "family JSON")); }

template <class T>
Json family_to_json(const MatrixFamily<T>& f) {
  Json j;
  j["alphabet"] = f.alphabet();
  j["dim"] = f.dim();
  j["mode"] = is_exact_v<T> ? "exact" : "float";
  Json mats = Json::object();
  for (std::size_t a = 0; a < f.letters(); ++a) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < f.dim(); ++i) rows.push_back(vector_to_json(f.matrix(a).row(i)));
    mats[f.alphabet()[a]] = rows;
  }
  j["matrices"] = mats;
  return j;
}

// ---------------------------------------------------------------------------
// Automata
// ---------------------------------------------------------------------------

struct AutomatonDocument {
  Mode mode = Mode::Exact;
  BettingAutomaton<Rational> automaton;
};

inline AutomatonDocument automaton_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::Malformed, "automaton must be a JSON object");
  AutomatonDocument doc;
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) fail(ErrorKind::Malformed, "mode must be a string");
    doc.mode = parse_mode(j["mode"].get<std::string>());
  }
  auto& b = doc.automaton;
  const Json& states = detail::member(j, "states");
  if (!states.is_array() || states.empty()) fail(ErrorKind::Malformed, "states must be a non-empty array");
  for (const auto& s : states) {
    if (!s.is_string()) fail(ErrorKind::Malformed, "state names must be strings");
    b.states.push_back(s.get<std::string>());
  }
  for (std::size_t s = 0; s < b.states.size(); ++s)
    for (std::size_t t = 0; t < s; ++t)
      if (b.states[s] == b.states[t]) fail(ErrorKind::Malformed, "duplicate state '" + b.states[s] + "'");
  b.alphabet = detail::parse_alphabet(detail::member(j, "alphabet"));
  const Json& init = detail::member(j, "initial");
  if (!init.is_string()) fail(ErrorKind::Malformed, "initial must be a state name");
  b.initial = b.state_index(init.get<std::string>());
  const std::size_t n = b.states.size(), k = b.alphabet.size();

  const Json& delta = detail::member(j, "delta");
  const Json& gamma = detail::member(j, "gamma");
  if (!delta.is_object() || !gamma.is_object()) fail(ErrorKind::Malformed, "delta and gamma must be objects");
  for (const auto& [s, _] : delta.items()) b.state_index(s);
  for (const auto& [s, _] : gamma.items()) b.state_index(s);
  b.delta.assign(n, std::vector<Vector<Rational>>(k, Vector<Rational>(n, Rational(0))));
  b.gamma.assign(n, std::vector<Rational>(k, Rational(0)));
  for (std::size_t s = 0; s < n; ++s) {
    const std::string& name = b.states[s];
    if (delta.contains(name)) {
      const Json& row = delta.at(name);
      if (!row.is_object()) fail(ErrorKind::Malformed, "delta of '" + name + "' must be an object");
      for (const auto& [sym, dist] : row.items()) {
        const std::size_t a = symbol_index(b.alphabet, sym);
        if (!dist.is_object()) fail(ErrorKind::Malformed, "delta of '" + name + "'/'" + sym + "' must be an object");
        for (const auto& [target, p] : dist.items()) b.delta[s][a][b.state_index(target)] = scalar_from_json(p);
      }
    }
    if (!gamma.contains(name)) fail(ErrorKind::Malformed, "no bets for state '" + name + "'");
    const Json& bets = gamma.at(name);
    if (!bets.is_object()) fail(ErrorKind::Malformed, "gamma of '" + name + "' must be an object");
    for (const auto& [sym, _] : bets.items()) symbol_index(b.alphabet, sym);
    for (std::size_t a = 0; a < k; ++a) {
      if (!bets.contains(b.alphabet[a]))
        fail(ErrorKind::Malformed, "no bet for state '" + name + "' on symbol '" + b.alphabet[a] + "'");
      b.gamma[s][a] = scalar_from_json(bets.at(b.alphabet[a]));
    }
  }
  return doc;
}

inline AutomatonDocument automaton_from_text(const std::string& text) {
  return automaton_from_json(parse_json_text(text, "automaton JSON"));
}

template <class T>
Json automaton_to_json(const BettingAutomaton<T>& b) {
  Json j;
  j["states"] = b.states;
  j["initial"] = b.states.at(b.initial);
  j["alphabet"] = b.alphabet;
  j["mode"] = is_exact_v<T> ? "exact" : "float";
  Json delta = Json::object();
  Json gamma = Json::object();
  for (std::size_t s = 0; s < b.states.size(); ++s) {
    Json row = Json::object();
    Json bets = Json::object();
    for (std::size_t a = 0; a < b.alphabet.size(); ++a) {
      Json dist = Json::object();
      for (std::size_t t = 0; t < b.states.size(); ++t)
        if (ScalarTraits<T>::sign(b.delta[s][a][t]) != 0) dist[b.states[t]] = scalar_to_json(b.delta[s][a][t]);
      row[b.alphabet[a]] = dist;
      bets[b.alphabet[a]] = scalar_to_json(b.gamma[s][a]);
    }
    delta[b.states[s]] = row;
    gamma[b.states[s]] = bets;
  }
  j["delta"] = delta;
  j["gamma"] = gamma;
  return j;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json error_to_json(const Error& e) {
  Json j;
  j["error"] = std::string(to_string(e.kind()));
  j["message"] = e.what();
  j["exit_code"] = exit_code(e.kind());
  return j;
}

template <class T>
Json fairness_to_json(const FairnessVerdict<T>& v) {
  Json j;
  j["kind"] = std::string(to_string(v.kind));
  Json w = Json::array();
  for (const auto& x : v.witnesses) w.push_back({{"index", x.index + 1}, {"row_mass", scalar_to_json(x.row_mass)}});
  j["witnesses"] = w;
  return j;
}

inline Json double_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

template <class T>
Json classification_to_json(const Classification<T>& c, const MatrixFamily<T>& f) {
  Json j;
  j["case"] = std::string(case_label(c.kind));
  j["fairness"] = std::string(to_string(c.fairness));
  if (c.f_set) j["F"] = index_set_to_json(*c.f_set);
  if (c.pseudo_mixing_word) j["pseudo_mixing_word"] = f.format_word(*c.pseudo_mixing_word);
  if (c.direction) j["x"] = vector_to_json(c.direction->x);
  if (c.kind == CaseKind::Case1) {
    j["witness"] = c.witness ? Json(f.format_word(*c.witness)) : Json(nullptr);
    if (c.delta_at_witness) j["delta_at_witness"] = *c.delta_at_witness;
  }
  if (c.live_of_x) j["live_of_x"] = scalar_to_json(*c.live_of_x);
  Json cert;
  cert["mode"] = is_exact_v<T> ? "exact" : "float";
  cert["automaton_states"] = c.automaton_states;
  cert["null_bscc_present"] = c.null_bscc_present;
  if (c.direction) {
    cert["x_exact"] = c.direction->exact;
    cert["x_residual"] = c.direction->residual;
    cert["x_iterations"] = c.direction->iterations;
    cert["eigenvalue"] = c.direction->exact_eigenvalue ? Json(c.direction->exact_eigenvalue->get_str())
                                                       : Json(c.direction->eigenvalue);
    cert["mixing_rows"] = index_set_to_json(c.direction->mixing_rows);
    cert["pseudo_mixing_length"] = c.pseudo_mixing_word->size();
  }
  if (c.subspace) {
    cert["betting_dim"] = c.subspace->basis.size();
    Json per = Json::object();
    for (std::size_t a = 0; a < f.letters(); ++a) per[f.alphabet()[a]] = c.subspace->per_letter_dims[a];
    cert["per_letter_dims"] = per;
    Json basis = Json::array();
    for (const auto& b : c.subspace->basis) basis.push_back(vector_to_json(b));
    cert["betting_basis"] = basis;
    cert["orthogonality"] = c.orthogonality_exact ? "exact" : "float";
    cert["max_orthogonality_defect"] = c.max_orthogonality_defect;
  }
  j["certificates"] = cert;
  return j;
}

inline Json probe_to_json(const ProbeResult& p) {
  Json j;
  j["alpha_hat"] = double_or_null(p.alpha_hat);
  j["alpha_infinite"] = !std::isfinite(p.alpha_hat);
  j["fraction_contracting"] = p.fraction_contracting;
  j["median_factor"] = p.median_factor;
  j["length"] = p.length;
  j["trials"] = p.trials;
  j["seed"] = p.seed;
  return j;
}

template <class T>
Json general_to_json(const GeneralReport<T>& r, const MatrixFamily<T>& f) {
  Json j;
  j["case"] = "general";
  j["mixed"] = r.mixed;
  Json comps = Json::array();
  for (const auto& c : r.components) {
    Json cj;
    cj["members"] = index_set_to_json(c.members);
    cj["fairness"] = std::string(to_string(c.fairness));
    cj["case"] = std::string(case_label(c.verdict.kind));
    const auto sub = restrict_family(f, c.members);
    cj["classification"] = classification_to_json(c.verdict, sub);
    comps.push_back(cj);
  }
  j["components"] = comps;
  Json leak = Json::array();
  for (const auto& [a, b] : r.graph.leakage_edges) leak.push_back(Json::array({a + 1, b + 1}));
  j["leakage_edges"] = leak;
  j["strict_components_consistent"] = r.strict_components_consistent;
  if (r.probe) j["probe"] = probe_to_json(*r.probe);
  if (r.probe_degenerate) j["probe"] = {{"degenerate_live_cone", true}, {"alpha_infinite", true}};
  return j;
}

template <class T>
Json support_report_to_json(const SupportAutomaton& aut, const BsccStructure& bs, const MatrixFamily<T>& f,
                            const std::optional<Word>& sync, const std::optional<Word>& pm) {
  Json j;
  Json states = Json::array();
  for (const auto& s : aut.states) states.push_back(index_set_to_json(s));
  j["states"] = states;
  Json bsccs = Json::array();
  for (auto c : bs.bsccs) {
    Json members = Json::array();
    for (auto s : bs.sccs[c]) members.push_back(index_set_to_json(aut.states[s]));
    bsccs.push_back(members);
  }
  j["bsccs"] = bsccs;
  j["null_bscc_present"] = bs.null_bscc_present;
  j["null_bscc_only"] = bs.nonnull_bsccs.empty();
  j["star"] = aut.star_holds;
  if (bs.minimal_member) j["F"] = index_set_to_json(*bs.minimal_member);
  if (sync) j["synchronizing_word"] = f.format_word(*sync);
  if (pm) {
    j["pseudo_mixing_word"] = f.format_word(*pm);
    j["pseudo_mixing_length"] = pm->size();
  }
  if (bs.nonnull_bscc) {
    const auto pi = stationary_distribution(aut, bs.sccs[*bs.nonnull_bscc]);
    Json pj = Json::array();
    for (const auto& [s, p] : pi) pj.push_back({{"state", index_set_to_json(aut.states[s])}, {"pi", p.get_str()}});
    j["stationary"] = pj;
  }
  return j;
}

inline Json rate_fit_to_json(const RateFit& r) {
  Json j;
  j["limit"] = r.limit;
  j["beta"] = r.beta ? Json(*r.beta) : Json(nullptr);
  j["slope"] = r.slope;
  j["r_squared"] = r.r_squared;
  j["window"] = Json::array({r.window_begin, r.window_end});
  j["points"] = r.points;
  j["log_domain"] = r.log_domain;
  j["low_confidence"] = r.low_confidence;
  j["no_decay"] = r.no_decay;
  return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// n,norm,log_norm,support,live,dh_to_x,dead; support as 1-based indices
/// joined by spaces, empty cells for values that were not computed.
inline void write_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
  os << "n,norm,log_norm,support,live,dh_to_x,dead\n";
  for (const auto& r : records) {
    std::string sup;
    for (auto i : r.support.members()) {
      if (!sup.empty()) sup += " ";
      sup += std::to_string(i + 1);
    }
    os << r.n << ',' << format_double(r.norm) << ',' << format_double(r.log_norm) << ',' << sup << ','
       << (r.live ? format_double(*r.live) : "") << ',' << (r.dh_to_x ? format_double(*r.dh_to_x) : "") << ','
       << (r.dead ? 1 : 0) << '\n';
  }
}

}  // namespace nbet
