#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nbet/family.hpp"
#include "nbet/linalg.hpp"

namespace nbet {

// ---------------------------------------------------------------------------
// Graph helpers
// ---------------------------------------------------------------------------

struct SccDecomposition {
  std::vector<std::size_t> component_of;             // node -> component id
  std::vector<std::vector<std::size_t>> components;  // sorted node lists
};

/// Tarjan's algorithm, iterative. Component ids are assigned in the order
/// Tarjan completes them (reverse topological).
inline SccDecomposition strongly_connected_components(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  SccDecomposition out;
  out.component_of.assign(n, unset);
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      const std::size_t v = fr.node;
      if (fr.edge < succ[v].size()) {
        const std::size_t w = succ[v][fr.edge++];
        if (index[w] == unset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component_of[w] = out.components.size();
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support action
// ---------------------------------------------------------------------------

/// Row supports of every letter matrix, so that E.a is an OR of bitmasks.
class SupportAction {
 public:
  SupportAction() = default;

  template <class T>
  explicit SupportAction(const MatrixFamily<T>& f) : dim_(f.dim()) {
    rows_.resize(f.letters());
    for (std::size_t a = 0; a < f.letters(); ++a)
      for (std::size_t i = 0; i < f.dim(); ++i) rows_[a].push_back(support(f.matrix(a).row(i), f.eps()));
  }

  std::size_t dim() const { return dim_; }
  std::size_t letters() const { return rows_.size(); }
  IndexSet row_support(std::size_t a, std::size_t i) const { return rows_[a][i]; }

  IndexSet act(IndexSet e, std::size_t a) const {
    if (a >= rows_.size()) fail(ErrorKind::UnknownSymbol, "letter index out of range");
    IndexSet out;
    for (auto i : e.members()) out = out | rows_[a][i];
    return out;
  }

  IndexSet act(IndexSet e, const Word& w) const {
    for (auto a : w) e = act(e, a);
    return e;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::vector<IndexSet>> rows_;
};

/// E . w = supp(1_E M_w).
template <class T>
IndexSet act_set(const MatrixFamily<T>& f, IndexSet e, const Word& w) {
  return SupportAction(f).act(e, w);
}

// ---------------------------------------------------------------------------
// Index reachability graph
// ---------------------------------------------------------------------------

struct ReachabilityGraph {
  std::size_t dim = 0;
  std::vector<IndexSet> successors;                                 // edges i -> j
  std::vector<IndexSet> components;                                 // topological order
  std::vector<std::size_t> component_of;                            // node -> position in `components`
  std::vector<std::pair<std::size_t, std::size_t>> leakage_edges;   // cross-component edges, 0-based
};

template <class T>
ReachabilityGraph reachability_graph(const MatrixFamily<T>& f) {
  const SupportAction act(f);
  ReachabilityGraph g;
  g.dim = f.dim();
  g.successors.assign(g.dim, IndexSet{});
  std::vector<std::vector<std::size_t>> succ(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) {
    for (std::size_t a = 0; a < act.letters(); ++a) g.successors[i] = g.successors[i] | act.row_support(a, i);
    succ[i] = g.successors[i].members();
  }
  const auto scc = strongly_connected_components(succ);
  const std::size_t k = scc.components.size();

  // Kahn's algorithm on the condensation; ties broken by smallest member.
  std::vector<std::set<std::size_t>> cond_succ(k);
  std::vector<std::size_t> indeg(k, 0);
  for (std::size_t i = 0; i < g.dim; ++i)
    for (auto j : succ[i]) {
      const auto ci = scc.component_of[i], cj = scc.component_of[j];
      if (ci != cj && cond_succ[ci].insert(cj).second) ++indeg[cj];
    }
  auto key = [&](std::size_t c) { return scc.components[c].front(); };
  auto cmp = [&](std::size_t x, std::size_t y) { return key(x) > key(y); };
  std::vector<std::size_t> ready;
  for (std::size_t c = 0; c < k; ++c)
    if (indeg[c] == 0) ready.push_back(c);
  std::vector<std::size_t> position(k);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), cmp);
    const std::size_t c = ready.back();
    ready.pop_back();
    position[c] = g.components.size();
    IndexSet members;
    for (auto i : scc.components[c]) members.insert(i);
    g.components.push_back(members);
    for (auto d : cond_succ[c])
      if (--indeg[d] == 0) ready.push_back(d);
  }
  g.component_of.resize(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) g.component_of[i] = position[scc.component_of[i]];
  for (std::size_t i = 0; i < g.dim; ++i)
    for (auto j : succ[i])
      if (g.component_of[i] != g.component_of[j]) g.leakage_edges.emplace_back(i, j);
  return g;
}

/// Every index reaches every other one through positive entries.
inline bool star_check(const ReachabilityGraph& g) { return g.components.size() == 1; }

// ---------------------------------------------------------------------------
// Support automaton
// ---------------------------------------------------------------------------

struct SupportAutomaton {
  std::size_t dim = 0;
  std::size_t letters = 0;
  std::vector<IndexSet> states;                  // BFS order from the singletons
  std::vector<std::vector<std::size_t>> next;    // [state][letter] -> state
  bool contains_null = false;
  bool star_holds = false;
  SupportAction action;

  std::optional<std::size_t> index_of(IndexSet e) const {
    auto it = lookup.find(e.bits());
    if (it == lookup.end()) return std::nullopt;
    return it->second;
  }

  std::unordered_map<std::uint64_t, std::size_t> lookup;
};

template <class T>
SupportAutomaton build_support_automaton(const MatrixFamily<T>& f) {
  SupportAutomaton aut;
  aut.dim = f.dim();
  aut.letters = f.letters();
  aut.action = SupportAction(f);
  aut.star_holds = star_check(reachability_graph(f));
  std::deque<std::size_t> queue;
  auto intern = [&](IndexSet e) {
    auto [it, inserted] = aut.lookup.emplace(e.bits(), aut.states.size());
    if (inserted) {
      aut.states.push_back(e);
      aut.next.emplace_back();
      queue.push_back(it->second);
      if (e.empty()) aut.contains_null = true;
    }
    return it->second;
  };
  for (std::size_t i = 0; i < f.dim(); ++i) intern(IndexSet::singleton(i));
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    std::vector<std::size_t> row;
    for (std::size_t a = 0; a < f.letters(); ++a) row.push_back(intern(aut.action.act(aut.states[s], a)));
    aut.next[s] = std::move(row);
  }
  return aut;
}

struct BsccStructure {
  std::vector<std::vector<std::size_t>> sccs;   // state indices
  std::vector<std::size_t> scc_of;              // state -> scc index
  std::vector<std::size_t> bsccs;               // scc indices without outgoing edges
  std::vector<std::size_t> nonnull_bsccs;
  bool null_bscc_present = false;
  std::optional<std::size_t> nonnull_bscc;      // the BSCC holding the minimal member
  std::optional<IndexSet> minimal_member;

  bool in_bscc(std::size_t state) const {
    return std::find(bsccs.begin(), bsccs.end(), scc_of[state]) != bsccs.end();
  }
  bool in_nonnull_bscc(std::size_t state) const {
    return nonnull_bscc && scc_of[state] == *nonnull_bscc;
  }
};

inline BsccStructure bscc_structure(const SupportAutomaton& aut) {
  std::vector<std::vector<std::size_t>> succ(aut.states.size());
  for (std::size_t s = 0; s < aut.states.size(); ++s) {
    succ[s] = aut.next[s];
    std::sort(succ[s].begin(), succ[s].end());
    succ[s].erase(std::unique(succ[s].begin(), succ[s].end()), succ[s].end());
  }
  const auto dec = strongly_connected_components(succ);
  BsccStructure bs;
  bs.sccs = dec.components;
  bs.scc_of = dec.component_of;
  for (std::size_t c = 0; c < bs.sccs.size(); ++c) {
    bool bottom = true;
    for (auto s : bs.sccs[c])
      for (auto t : aut.next[s])
        if (bs.scc_of[t] != c) bottom = false;
    if (!bottom) continue;
    bs.bsccs.push_back(c);
    if (bs.sccs[c].size() == 1 && aut.states[bs.sccs[c][0]].empty()) {
      bs.null_bscc_present = true;
    } else {
      bs.nonnull_bsccs.push_back(c);
    }
  }
  if (aut.star_holds && bs.nonnull_bsccs.size() > 1)
    fail(ErrorKind::InternalContradiction, "two non-null bottom components although every index reaches every other");

  // The member with the smallest mask has no proper subset among the others.
  for (auto c : bs.nonnull_bsccs)
    for (auto s : bs.sccs[c])
      if (!bs.minimal_member || aut.states[s].bits() < bs.minimal_member->bits()) {
        bs.minimal_member = aut.states[s];
        bs.nonnull_bscc = c;
      }
  return bs;
}

namespace detail {

/// Shortest word leading from `from` to any state accepted by `goal`.
template <class Goal>
std::optional<Word> shortest_path(const SupportAutomaton& aut, std::size_t from, Goal goal) {
  if (goal(from)) return Word{};
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> parent(aut.states.size());
  std::vector<bool> seen(aut.states.size(), false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < aut.letters; ++a) {
      const std::size_t t = aut.next[s][a];
      if (seen[t]) continue;
      seen[t] = true;
      parent[t] = {s, a};
      if (goal(t)) {
        Word w;
        for (std::size_t cur = t; cur != from; cur = parent[cur]->first) w.push_back(parent[cur]->second);
        std::reverse(w.begin(), w.end());
        return w;
      }
      queue.push_back(t);
    }
  }
  return std::nullopt;
}

inline std::size_t run(const SupportAutomaton& aut, std::size_t s, const Word& w) {
  for (auto a : w) s = aut.next[s][a];
  return s;
}

}  // namespace detail

/// A word sending every state of the automaton into some bottom component,
/// built by extending it state by state in ascending mask order.
inline Word synchronizing_word(const SupportAutomaton& aut, const BsccStructure& bs) {
  std::vector<std::size_t> order(aut.states.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return aut.states[x].bits() < aut.states[y].bits(); });
  Word w;
  for (auto s : order) {
    const std::size_t cur = detail::run(aut, s, w);
    auto ext = detail::shortest_path(aut, cur, [&](std::size_t t) { return bs.in_bscc(t); });
    if (!ext) fail(ErrorKind::InternalContradiction, "state cannot reach a bottom component");
    w.insert(w.end(), ext->begin(), ext->end());
  }
  return w;
}

inline Word synchronizing_word(const SupportAutomaton& aut) { return synchronizing_word(aut, bscc_structure(aut)); }

/// E.w = E and every singleton of E is sent to E or to the empty set.
inline bool is_pseudo_mixing(const SupportAction& act, const Word& w, IndexSet e) {
  if (act.act(e, w) != e) return false;
  for (auto i : e.members()) {
    const IndexSet img = act.act(IndexSet::singleton(i), w);
    if (!img.empty() && img != e) return false;
  }
  return true;
}

template <class T>
bool is_pseudo_mixing(const MatrixFamily<T>& f, const Word& w, IndexSet e) {
  return is_pseudo_mixing(SupportAction(f), w, e);
}

struct PseudoMixingOptions {
  std::size_t certificate_length = 0;   // 0 means twice the dimension
  std::size_t max_configurations = 200000;
  bool search_short = true;
};

/// The u y v construction: y extends a synchronizing word so that F returns to
/// itself, u leads E to F and v leads F back to E.
inline Word constructive_pseudo_mixing_word(const SupportAutomaton& aut, const BsccStructure& bs, IndexSet e) {
  if (!bs.minimal_member) fail(ErrorKind::NotInBscc, "no non-null bottom component");
  const auto es = aut.index_of(e);
  if (!es || !bs.in_nonnull_bscc(*es)) fail(ErrorKind::NotInBscc, e.to_string() + " is not in the non-null bottom component");
  const std::size_t fs = *aut.index_of(*bs.minimal_member);
  Word y = synchronizing_word(aut, bs);
  auto back = detail::shortest_path(aut, detail::run(aut, fs, y), [&](std::size_t t) { return t == fs; });
  auto u = detail::shortest_path(aut, *es, [&](std::size_t t) { return t == fs; });
  auto v = detail::shortest_path(aut, fs, [&](std::size_t t) { return t == *es; });
  if (!back || !u || !v) fail(ErrorKind::InternalContradiction, "bottom component is not strongly connected");
  y.insert(y.end(), back->begin(), back->end());
  Word w = *u;
  w.insert(w.end(), y.begin(), y.end());
  w.insert(w.end(), v->begin(), v->end());
  return w;
}

/// Shortest, then lexicographically first, word of length at most `limit`
/// that pseudo-mixes E. Explores tuples of singleton images.
inline std::optional<Word> short_pseudo_mixing_word(const SupportAction& act, IndexSet e, std::size_t limit,
                                                    std::size_t max_configurations) {
  const auto members = e.members();
  using Config = std::vector<std::uint64_t>;
  auto accepts = [&](const Config& c) {
    IndexSet all;
    for (auto b : c) {
      const IndexSet s(b);
      if (!s.empty() && s != e) return false;
      all = all | s;
    }
    return all == e;
  };
  Config start;
  for (auto i : members) start.push_back(IndexSet::singleton(i).bits());
  std::map<Config, std::pair<Config, std::size_t>> parent;
  std::set<Config> seen{start};
  std::vector<Config> frontier{start};
  auto rebuild = [&](Config c) {
    Word w;
    while (c != start) {
      const auto& [prev, a] = parent.at(c);
      w.push_back(a);
      c = prev;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };
  if (accepts(start)) return Word{};
  for (std::size_t depth = 0; depth < limit && !frontier.empty(); ++depth) {
    std::vector<Config> next;
    for (const auto& c : frontier)
      for (std::size_t a = 0; a < act.letters(); ++a) {
        Config d;
        d.reserve(c.size());
        for (auto b : c) d.push_back(act.act(IndexSet(b), a).bits());
        if (!seen.insert(d).second) continue;
        parent.emplace(d, std::make_pair(c, a));
        if (accepts(d)) return rebuild(d);
        if (seen.size() > max_configurations) return std::nullopt;
        next.push_back(std::move(d));
      }
    frontier = std::move(next);
  }
  return std::nullopt;
}

/// A word pseudo-mixing E, a member of the non-null bottom component.
inline Word pseudo_mixing_word(const SupportAutomaton& aut, const BsccStructure& bs, IndexSet e,
                               const PseudoMixingOptions& opt = {}) {
  const auto es = aut.index_of(e);
  if (!es || !bs.in_nonnull_bscc(*es)) fail(ErrorKind::NotInBscc, e.to_string() + " is not in the non-null bottom component");
  if (opt.search_short) {
    const std::size_t limit = opt.certificate_length ? opt.certificate_length : 2 * aut.dim;
    if (auto w = short_pseudo_mixing_word(aut.action, e, limit, opt.max_configurations)) return *w;
  }
  if (!aut.star_holds) fail(ErrorKind::StarViolated, "constructive pseudo-mixing word needs a strongly connected index graph");
  Word w = constructive_pseudo_mixing_word(aut, bs, e);
  if (!is_pseudo_mixing(aut.action, w, e)) fail(ErrorKind::InternalContradiction, "constructed word does not pseudo-mix");
  return w;
}

template <class T>
Word pseudo_mixing_word(const MatrixFamily<T>& f, IndexSet e, const PseudoMixingOptions& opt = {}) {
  const auto aut = build_support_automaton(f);
  return pseudo_mixing_word(aut, bscc_structure(aut), e, opt);
}

/// Stationary distribution of the letter-uniform walk restricted to a bottom
/// component, keyed by state index.
inline std::map<std::size_t, Rational> stationary_distribution(const SupportAutomaton& aut,
                                                               const std::vector<std::size_t>& bscc) {
  const std::size_t k = bscc.size();
  if (k == 0) fail(ErrorKind::Malformed, "empty component");
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < k; ++i) local[bscc[i]] = i;
  // Rows of (P - I)^T; a left fixed vector of P is a null vector of this.
  Matrix<Rational> sys(k, k);
  const Rational share(1, static_cast<unsigned long>(aut.letters));
  for (std::size_t i = 0; i < k; ++i) {
    sys(i, i) -= 1;
    for (std::size_t a = 0; a < aut.letters; ++a) {
      auto it = local.find(aut.next[bscc[i]][a]);
      if (it == local.end()) fail(ErrorKind::Malformed, "component is not closed");
      sys(it->second, i) += share;
    }
  }
  const auto ns = nullspace(sys);
  if (ns.size() != 1) fail(ErrorKind::NumericalFailure, "stationary distribution is not unique");
  const Rational total = norm1(ns[0]);
  if (sgn(total) == 0) fail(ErrorKind::NumericalFailure, "degenerate stationary vector");
  std::map<std::size_t, Rational> pi;
  for (std::size_t i = 0; i < k; ++i) pi[bscc[i]] = Rational(ns[0][i] / total);
  return pi;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

inline std::string dot_label(IndexSet e) { return e.empty() ? std::string("∅") : e.to_string(); }

template <class T>
std::string support_automaton_dot(const SupportAutomaton& aut, const BsccStructure& bs, const MatrixFamily<T>& f) {
  std::ostringstream os;
  os << "digraph support {\n  rankdir=LR;\n";
  for (std::size_t s = 0; s < aut.states.size(); ++s) {
    os << "  s" << s << " [label=\"" << dot_label(aut.states[s]) << "\"";
    os << ", shape=" << (bs.in_bscc(s) ? "doublecircle" : "circle");
    if (aut.states[s].empty()) os << ", style=filled, fillcolor=gray";
    os << "];\n";
  }
  for (std::size_t s = 0; s < aut.states.size(); ++s) {
    std::map<std::size_t, std::string> labels;
    for (std::size_t a = 0; a < aut.letters; ++a) {
      auto& l = labels[aut.next[s][a]];
      if (!l.empty()) l += ",";
      l += f.alphabet()[a];
    }
    for (const auto& [t, l] : labels) os << "  s" << s << " -> s" << t << " [label=\"" << l << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

inline std::string reachability_dot(const ReachabilityGraph& g) {
  std::ostringstream os;
  os << "digraph reachability {\n";
  for (std::size_t c = 0; c < g.components.size(); ++c) {
    os << "  subgraph cluster_" << c << " {\n    label=\"component " << c + 1 << "\";\n";
    for (auto i : g.components[c].members()) os << "    n" << i + 1 << " [label=\"" << i + 1 << "\"];\n";
    os << "  }\n";
  }
  for (std::size_t i = 0; i < g.dim; ++i)
    for (auto j : g.successors[i].members()) os << "  n" << i + 1 << " -> n" << j + 1 << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace nbet
