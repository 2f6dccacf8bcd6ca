//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Molecular graph data model: SMILES parsing and canonical writing, ring
// and valence perception, preprocessing, and node featurization.

#ifndef CFMASK_CHEM_HPP
#define CFMASK_CHEM_HPP

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfmask::chem {

enum class Element : std::uint8_t {
  C, N, O, S, P, F, Cl, Br, I, B, Other, Dummy
};

// Bond order codes; Aromatic participates in valence sums as 1.5.
enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::size_t pos, const std::string& reason)
      : std::runtime_error("SMILES syntax error at " + std::to_string(pos) + ": " + reason),
        position(pos) {}
};

struct UnsupportedFeature : std::runtime_error {
  std::size_t position;
  UnsupportedFeature(std::size_t pos, const std::string& what)
      : std::runtime_error("unsupported SMILES feature at " + std::to_string(pos) + ": " + what),
        position(pos) {}
};

struct ValenceError : std::runtime_error {
  int atom;
  ValenceError(int atom_idx, const std::string& why)
      : std::runtime_error("valence violation on atom " + std::to_string(atom_idx) + ": " + why),
        atom(atom_idx) {}
};

struct Atom {
  Element element = Element::C;
  int formal_charge = 0;
  int explicit_h = 0;          // hydrogen count fixed by a bracket expression
  bool aromatic = false;
  bool bracket = false;        // hydrogen count is fixed, not inferred
  std::string other_symbol;    // raw symbol when element == Other
  int stub_label = 0;          // attachment-stub label, > 0 only on Dummy atoms

  // Derived by MolGraph::perceive().
  int implicit_h = 0;
  int degree = 0;
  bool in_ring = false;
  bool in_ring5 = false;
  bool in_ring6 = false;

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  int a = -1;
  int b = -1;
  BondOrder order = BondOrder::Single;
};

inline const char* element_symbol(Element e) {
  switch (e) {
    case Element::C: return "C";
    case Element::N: return "N";
    case Element::O: return "O";
    case Element::S: return "S";
    case Element::P: return "P";
    case Element::F: return "F";
    case Element::Cl: return "Cl";
    case Element::Br: return "Br";
    case Element::I: return "I";
    case Element::B: return "B";
    case Element::Other: return "?";
    case Element::Dummy: return "*";
  }
  return "?";
}

// Allowed valence states for neutral atoms, smallest first.
inline const std::vector<int>& base_valences(Element e) {
  static const std::vector<int> vB{3}, vC{4}, vN{3}, vO{2}, vP{3, 5}, vS{2, 4, 6},
      vHal{1}, vNone{};
  switch (e) {
    case Element::B: return vB;
    case Element::C: return vC;
    case Element::N: return vN;
    case Element::O: return vO;
    case Element::P: return vP;
    case Element::S: return vS;
    case Element::F:
    case Element::Cl:
    case Element::Br:
    case Element::I: return vHal;
    default: return vNone;
  }
}

// Charge-adjusted valence list. Electronegative elements gain one bonding
// slot per positive charge and lose one per negative; B and C lose capacity
// in either direction.
inline std::vector<int> allowed_valences(Element e, int charge) {
  std::vector<int> out;
  for (int v : base_valences(e)) {
    int adj = (e == Element::B || e == Element::C) ? v - std::abs(charge) : v + charge;
    if (adj >= 0) out.push_back(adj);
  }
  return out;
}

struct ValenceViolation {
  int atom;
  int observed;   // rounded bond-order sum + fixed hydrogens
  int max_allowed;
};

struct ParseWarnings {
  std::vector<std::string> messages;
  void add(std::size_t pos, const std::string& msg) {
    messages.push_back("pos " + std::to_string(pos) + ": " + msg);
  }
};

class MolGraph {
 public:
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string name;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }

  int add_atom(Atom a) {
    atoms.push_back(std::move(a));
    return num_atoms() - 1;
  }

  void add_bond(int a, int b, BondOrder order) {
    if (a == b) throw std::invalid_argument("self-loop bond");
    if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
      throw std::invalid_argument("bond index out of range");
    if (find_bond(a, b) >= 0) throw std::invalid_argument("duplicate bond");
    bonds.push_back({a, b, order});
  }

  int find_bond(int a, int b) const {
    for (int i = 0; i < num_bonds(); ++i) {
      const Bond& bd = bonds[i];
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return i;
    }
    return -1;
  }

  // (neighbor atom, bond index) pairs, in bond insertion order.
  const std::vector<std::pair<int, int>>& neighbors(int atom) const { return adj_[atom]; }

  const std::vector<std::vector<int>>& rings() const { return sssr_; }

  bool bond_in_ring(int bond_idx) const { return bond_ring_flags_[bond_idx]; }

  // Rounded valence sum: aromatic bonds count 1.5 each and the aromatic
  // subtotal is rounded to the nearest integer (halves down, so a fused
  // junction with three aromatic bonds counts 4, not 5) before adding the
  // rest.
  int bond_order_sum(int atom) const {
    int plain = 0, n_arom = 0;
    for (auto [nb, bi] : adj_[atom]) {
      (void)nb;
      switch (bonds[bi].order) {
        case BondOrder::Single: plain += 1; break;
        case BondOrder::Double: plain += 2; break;
        case BondOrder::Triple: plain += 3; break;
        case BondOrder::Aromatic: ++n_arom; break;
      }
    }
    return plain + (3 * n_arom) / 2;
  }

  std::vector<int> component_of() const {
    std::vector<int> comp(atoms.size(), -1);
    std::vector<std::vector<int>> nb(atoms.size());
    for (const Bond& b : bonds) {
      nb[b.a].push_back(b.b);
      nb[b.b].push_back(b.a);
    }
    int c = 0;
    for (int s = 0; s < num_atoms(); ++s) {
      if (comp[s] >= 0) continue;
      std::queue<int> q;
      q.push(s);
      comp[s] = c;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : nb[v])
          if (comp[u] < 0) {
            comp[u] = c;
            q.push(u);
          }
      }
      ++c;
    }
    return comp;
  }

  int num_components() const {
    auto comp = component_of();
    return comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
  }

  bool connected() const { return num_components() <= 1; }

  // Recomputes adjacency, ring membership, degrees and implicit hydrogens.
  // Must be called after any structural edit; parse_smiles and the graph
  // surgery helpers call it on every graph they hand out.
  void perceive() {
    build_adjacency();
    perceive_rings();
    for (int i = 0; i < num_atoms(); ++i) {
      Atom& at = atoms[i];
      at.degree = static_cast<int>(adj_[i].size());
      at.implicit_h = 0;
      if (at.bracket || at.element == Element::Other || at.element == Element::Dummy) continue;
      int sum = bond_order_sum(i);
      for (int v : allowed_valences(at.element, at.formal_charge)) {
        if (v >= sum) {
          at.implicit_h = v - sum;
          break;
        }
      }
    }
  }

  std::vector<ValenceViolation> check_valence() const {
    std::vector<ValenceViolation> out;
    for (int i = 0; i < num_atoms(); ++i) {
      const Atom& at = atoms[i];
      if (at.element == Element::Other || at.element == Element::Dummy) continue;
      auto allowed = allowed_valences(at.element, at.formal_charge);
      if (allowed.empty()) continue;
      int observed = bond_order_sum(i) + at.explicit_h;
      int max_allowed = allowed.back();
      if (observed > max_allowed) out.push_back({i, observed, max_allowed});
    }
    return out;
  }

  // Structural sanity beyond plain valence: aromatic bonds pair aromatic
  // atoms and every aromatic atom sits on a ring with >= 2 aromatic bonds.
  bool aromatic_consistent() const {
    for (const Bond& b : bonds) {
      if (b.order == BondOrder::Aromatic &&
          (!atoms[b.a].aromatic || !atoms[b.b].aromatic))
        return false;
    }
    for (int i = 0; i < num_atoms(); ++i) {
      if (!atoms[i].aromatic) continue;
      if (!atoms[i].in_ring) return false;
      int n_arom = 0;
      for (auto [nb, bi] : adj_[i]) {
        (void)nb;
        if (bonds[bi].order == BondOrder::Aromatic) ++n_arom;
      }
      if (n_arom < 2) return false;
    }
    return true;
  }

 private:
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<std::vector<int>> sssr_;
  std::vector<char> bond_ring_flags_;

  void build_adjacency() {
    adj_.assign(atoms.size(), {});
    for (int i = 0; i < num_bonds(); ++i) {
      adj_[bonds[i].a].push_back({bonds[i].b, i});
      adj_[bonds[i].b].push_back({bonds[i].a, i});
    }
  }

  // Minimum cycle basis (Horton): collect shortest candidate cycles through
  // every (root, edge) pair, then greedily keep |E| - |V| + C independent
  // ones over GF(2), smallest first.
  void perceive_rings() {
    sssr_.clear();
    bond_ring_flags_.assign(bonds.size(), 0);
    for (Atom& a : atoms) a.in_ring = a.in_ring5 = a.in_ring6 = false;
    const int n = num_atoms(), m = num_bonds();
    int target = m - n + num_components();
    if (target <= 0) return;

    struct Candidate {
      int size;
      std::vector<std::uint64_t> edge_bits;
      std::vector<int> atom_set;
    };
    const int words = (m + 63) / 64;
    std::vector<Candidate> cands;

    std::vector<int> dist(n), parent(n), parent_edge(n);
    for (int root = 0; root < n; ++root) {
      std::fill(dist.begin(), dist.end(), -1);
      std::queue<int> q;
      q.push(root);
      dist[root] = 0;
      parent[root] = -1;
      parent_edge[root] = -1;
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [u, bi] : adj_[v]) {
          if (dist[u] < 0) {
            dist[u] = dist[v] + 1;
            parent[u] = v;
            parent_edge[u] = bi;
            q.push(u);
          }
        }
      }
      for (int bi = 0; bi < m; ++bi) {
        int x = bonds[bi].a, y = bonds[bi].b;
        if (dist[x] < 0 || dist[y] < 0) continue;
        if (parent_edge[x] == bi || parent_edge[y] == bi) continue;
        Candidate c;
        c.edge_bits.assign(words, 0);
        std::set<int> atom_set{root};
        auto add_edge = [&](int e) { c.edge_bits[e / 64] ^= (1ull << (e % 64)); };
        for (int v = x; v != root; v = parent[v]) {
          add_edge(parent_edge[v]);
          atom_set.insert(v);
        }
        for (int v = y; v != root; v = parent[v]) {
          add_edge(parent_edge[v]);
          atom_set.insert(v);
        }
        add_edge(bi);
        c.size = dist[x] + dist[y] + 1;
        // Keep only simple cycles: tree paths disjoint except at the root.
        if (static_cast<int>(atom_set.size()) != c.size) continue;
        c.atom_set.assign(atom_set.begin(), atom_set.end());
        cands.push_back(std::move(c));
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.size != b.size) return a.size < b.size;
      return a.edge_bits < b.edge_bits;
    });
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const Candidate& a, const Candidate& b) {
                              return a.edge_bits == b.edge_bits;
                            }),
                cands.end());

    std::vector<std::vector<std::uint64_t>> basis;
    for (const Candidate& c : cands) {
      if (static_cast<int>(sssr_.size()) >= target) break;
      std::vector<std::uint64_t> v = c.edge_bits;
      for (const auto& b : basis) {
        int pivot = lowest_bit(b);
        if (pivot >= 0 && ((v[pivot / 64] >> (pivot % 64)) & 1)) {
          for (std::size_t w = 0; w < v.size(); ++w) v[w] ^= b[w];
        }
      }
      if (std::all_of(v.begin(), v.end(), [](std::uint64_t w) { return w == 0; })) continue;
      // Re-reduce basis so every vector keeps a unique pivot.
      basis.push_back(v);
      std::sort(basis.begin(), basis.end(),
                [](const auto& a, const auto& b) { return lowest_bit(a) < lowest_bit(b); });
      sssr_.push_back(c.atom_set);
      for (int e = 0; e < m; ++e)
        if ((c.edge_bits[e / 64] >> (e % 64)) & 1) bond_ring_flags_[e] = 1;
    }

    for (const auto& ring : sssr_) {
      for (int a : ring) {
        atoms[a].in_ring = true;
        if (ring.size() == 5) atoms[a].in_ring5 = true;
        if (ring.size() == 6) atoms[a].in_ring6 = true;
      }
    }
  }

  static int lowest_bit(const std::vector<std::uint64_t>& v) {
    for (std::size_t w = 0; w < v.size(); ++w)
      if (v[w]) return static_cast<int>(w * 64 + std::countr_zero(v[w]));
    return -1;
  }
};

// ---------------------------------------------------------------------------
// SMILES parsing
// ---------------------------------------------------------------------------

namespace detail {

struct SmilesParser {
  std::string_view text;
  std::size_t pos = 0;
  MolGraph mol;
  ParseWarnings* warnings;
  std::vector<char> unspecified;  // per bond: order not written in the input

  explicit SmilesParser(std::string_view t, ParseWarnings* w) : text(t), warnings(w) {}

  [[noreturn]] void fail(const std::string& why) { throw ParseError(pos, why); }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  char take() { return pos < text.size() ? text[pos++] : '\0'; }

  int parse_digits(int fallback) {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) return fallback;
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (take() - '0');
    return v;
  }

  struct PendingBond {
    bool has = false;
    BondOrder order = BondOrder::Single;
    bool explicit_order = false;
  };

  void add_edge(int a, int b, const PendingBond& pb) {
    if (mol.find_bond(a, b) >= 0) fail("duplicate bond between atoms");
    mol.add_bond(a, b, pb.explicit_order ? pb.order : BondOrder::Single);
    unspecified.push_back(!pb.explicit_order);
  }

  static Element symbol_to_element(const std::string& sym) {
    if (sym == "C") return Element::C;
    if (sym == "N") return Element::N;
    if (sym == "O") return Element::O;
    if (sym == "S") return Element::S;
    if (sym == "P") return Element::P;
    if (sym == "F") return Element::F;
    if (sym == "Cl") return Element::Cl;
    if (sym == "Br") return Element::Br;
    if (sym == "I") return Element::I;
    if (sym == "B") return Element::B;
    return Element::Other;
  }

  int parse_bracket_atom() {
    std::size_t open = pos;
    take();  // '['
    Atom atom;
    atom.bracket = true;
    if (std::isdigit(static_cast<unsigned char>(peek())))
      throw UnsupportedFeature(pos, "isotope specification");
    char c = peek();
    if (c == '*') {
      take();
      atom.element = Element::Dummy;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      if (c != 'b' && c != 'c' && c != 'n' && c != 'o' && c != 'p' && c != 's')
        fail(std::string("aromatic symbol '") + c + "' not supported");
      take();
      atom.aromatic = true;
      atom.element = symbol_to_element(
          std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c)))));
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, take());
      if (std::islower(static_cast<unsigned char>(peek()))) sym += take();
      if (sym == "H") throw UnsupportedFeature(open, "explicit hydrogen atom node");
      atom.element = symbol_to_element(sym);
      if (atom.element == Element::Other) atom.other_symbol = sym;
    } else {
      fail("expected element symbol in bracket atom");
    }
    while (peek() == '@') {
      take();
      warnings->add(pos, "chirality marker skipped");
    }
    if (peek() == 'H') {
      take();
      atom.explicit_h = parse_digits(1);
    }
    if (peek() == '+' || peek() == '-') {
      char sign = take();
      int mag;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        mag = parse_digits(1);
      } else {
        mag = 1;
        while (peek() == sign) {
          take();
          ++mag;
        }
      }
      atom.formal_charge = (sign == '+') ? mag : -mag;
    }
    if (peek() == ':') {
      take();
      int label = parse_digits(-1);
      if (label < 0) fail("expected atom-map number after ':'");
      if (atom.element == Element::Dummy) atom.stub_label = label;
    }
    if (take() != ']') fail("expected ']' closing bracket atom");
    return mol.add_atom(atom);
  }

  int parse_organic_atom() {
    Atom atom;
    char c = peek();
    if (std::islower(static_cast<unsigned char>(c))) {
      if (c != 'b' && c != 'c' && c != 'n' && c != 'o' && c != 'p' && c != 's')
        fail(std::string("unknown aromatic atom '") + c + "'");
      take();
      atom.aromatic = true;
      atom.element = symbol_to_element(
          std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c)))));
    } else {
      std::string sym(1, take());
      if ((sym == "C" && peek() == 'l') || (sym == "B" && peek() == 'r')) sym += take();
      static const std::set<std::string> organic{"B", "C",  "N",  "O", "P",
                                                 "S", "F", "Cl", "Br", "I"};
      if (!organic.count(sym)) fail("unknown atom symbol '" + sym + "'");
      atom.element = symbol_to_element(sym);
    }
    return mol.add_atom(atom);
  }

  MolGraph run() {
    struct RingSlot {
      int atom;
      PendingBond bond;
    };
    std::map<int, RingSlot> open_rings;
    std::vector<int> branch_stack;
    int prev = -1;
    PendingBond pending;

    auto bond_symbol = [&](char c) -> bool {
      switch (c) {
        case '-': pending = {true, BondOrder::Single, true}; return true;
        case '=': pending = {true, BondOrder::Double, true}; return true;
        case '#': pending = {true, BondOrder::Triple, true}; return true;
        case ':': pending = {true, BondOrder::Aromatic, true}; return true;
        case '/':
        case '\\':
          warnings->add(pos, "stereo bond marker treated as single");
          pending = {true, BondOrder::Single, true};
          return true;
        default: return false;
      }
    };

    auto close_or_open_ring = [&](int number) {
      if (prev < 0) fail("ring closure before any atom");
      auto it = open_rings.find(number);
      if (it == open_rings.end()) {
        open_rings[number] = {prev, pending};
      } else {
        RingSlot slot = it->second;
        open_rings.erase(it);
        if (slot.atom == prev) fail("ring closure to the same atom");
        if (slot.bond.explicit_order && pending.explicit_order &&
            slot.bond.order != pending.order)
          fail("conflicting ring-closure bond orders");
        add_edge(slot.atom, prev, slot.bond.explicit_order ? slot.bond : pending);
      }
      pending = {};
    };

    while (pos < text.size()) {
      char c = peek();
      if (c == ' ' || c == '\t') {
        take();
        continue;
      }
      if (c == '.') {
        if (pending.has) fail("bond before '.' separator");
        take();
        prev = -1;
        continue;
      }
      if (bond_symbol(c)) {
        take();
        continue;
      }
      if (c == '(') {
        if (prev < 0) fail("branch start before any atom");
        take();
        branch_stack.push_back(prev);
        continue;
      }
      if (c == ')') {
        if (branch_stack.empty()) fail("unmatched ')'");
        if (pending.has) fail("dangling bond before ')'");
        take();
        prev = branch_stack.back();
        branch_stack.pop_back();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        close_or_open_ring(take() - '0');
        continue;
      }
      if (c == '%') {
        take();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digits after '%'");
        int d1 = take() - '0';
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("'%' needs two digits");
        close_or_open_ring(d1 * 10 + (take() - '0'));
        continue;
      }
      int atom;
      if (c == '[') {
        atom = parse_bracket_atom();
      } else if (c == '*') {
        take();
        Atom a;
        a.element = Element::Dummy;
        a.bracket = true;
        atom = mol.add_atom(a);
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        atom = parse_organic_atom();
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      if (prev >= 0) add_edge(prev, atom, pending);
      else if (pending.has) fail("bond with no preceding atom");
      pending = {};
      prev = atom;
    }
    if (!branch_stack.empty()) fail("unmatched '('");
    if (pending.has) fail("dangling bond at end of input");
    if (!open_rings.empty())
      fail("unclosed ring bond " + std::to_string(open_rings.begin()->first));
    if (mol.num_atoms() == 0) fail("empty SMILES");
    return std::move(mol);
  }
};

}  // namespace detail

// Parses the supported SMILES subset and returns a fully perceived graph.
// Stereo markers are skipped with a warning; isotopes are rejected.
inline MolGraph parse_smiles(std::string_view text, ParseWarnings* warnings = nullptr) {
  ParseWarnings local;
  detail::SmilesParser parser(text, warnings ? warnings : &local);
  MolGraph mol = parser.run();
  std::vector<char> unspecified = std::move(parser.unspecified);

  mol.perceive();  // ring membership is needed to resolve implicit aromatic bonds
  bool changed = false;
  for (int bi = 0; bi < mol.num_bonds(); ++bi) {
    Bond& b = mol.bonds[bi];
    if (unspecified[bi] && mol.bond_in_ring(bi) && mol.atoms[b.a].aromatic &&
        mol.atoms[b.b].aromatic) {
      b.order = BondOrder::Aromatic;
      changed = true;
    }
  }
  if (changed) mol.perceive();

  if (!mol.aromatic_consistent())
    throw ParseError(0, "aromatic atoms must lie on a ring of aromatic bonds");
  auto violations = mol.check_valence();
  if (!violations.empty())
    throw ValenceError(violations.front().atom,
                       "sum " + std::to_string(violations.front().observed) + " exceeds " +
                           std::to_string(violations.front().max_allowed));
  return mol;
}

// ---------------------------------------------------------------------------
// Canonical ranking and writing
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t atom_invariant(const Atom& a) {
  std::uint64_t h = static_cast<std::uint64_t>(a.element);
  h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 16));
  h = hash_combine(h, static_cast<std::uint64_t>(a.degree));
  h = hash_combine(h, static_cast<std::uint64_t>(a.total_h()));
  h = hash_combine(h, a.aromatic ? 1 : 0);
  h = hash_combine(h, static_cast<std::uint64_t>(a.stub_label));
  for (char c : a.other_symbol) h = hash_combine(h, static_cast<std::uint64_t>(c));
  return h;
}

// One refinement pass: rank atoms of `subset` by (old rank, sorted neighbor
// (bond order, rank) list). Returns the number of distinct classes.
inline int refine_ranks(const MolGraph& mol, const std::vector<int>& subset,
                        std::vector<int>& rank) {
  int classes = 0;
  std::vector<std::pair<std::vector<std::uint64_t>, int>> keys;
  keys.reserve(subset.size());
  for (int v : subset) {
    std::vector<std::uint64_t> key;
    key.push_back(static_cast<std::uint64_t>(rank[v]));
    std::vector<std::pair<int, int>> nb;
    for (auto [u, bi] : mol.neighbors(v))
      nb.push_back({static_cast<int>(mol.bonds[bi].order), rank[u]});
    std::sort(nb.begin(), nb.end());
    for (auto [o, r] : nb) {
      key.push_back(static_cast<std::uint64_t>(o));
      key.push_back(static_cast<std::uint64_t>(r));
    }
    keys.push_back({std::move(key), v});
  }
  std::sort(keys.begin(), keys.end());
  int cls = 0;
  std::vector<int> assigned(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i > 0 && keys[i].first != keys[i - 1].first) ++cls;
    assigned[i] = cls;
  }
  classes = keys.empty() ? 0 : cls + 1;
  for (std::size_t i = 0; i < keys.size(); ++i) rank[keys[i].second] = assigned[i];
  return classes;
}

inline void refine_to_fixpoint(const MolGraph& mol, const std::vector<int>& subset,
                               std::vector<int>& rank) {
  int classes = refine_ranks(mol, subset, rank);
  for (;;) {
    int next = refine_ranks(mol, subset, rank);
    if (next == classes) break;
    classes = next;
  }
}

// SMILES emitter for one connected component under a total atom order.
// Two passes: classify tree vs ring-closure edges along the deterministic
// DFS, then emit with ring-closure digits on both endpoints.
struct ComponentWriter {
  const MolGraph& mol;
  const std::vector<int>& rank;

  explicit ComponentWriter(const MolGraph& m, const std::vector<int>& r) : mol(m), rank(r) {}

  static bool organic_subset(Element e) {
    switch (e) {
      case Element::B:
      case Element::C:
      case Element::N:
      case Element::O:
      case Element::P:
      case Element::S:
      case Element::F:
      case Element::Cl:
      case Element::Br:
      case Element::I: return true;
      default: return false;
    }
  }

  std::string atom_token(int v) const {
    const Atom& a = mol.atoms[v];
    if (a.element == Element::Dummy) {
      std::string t = "[*";
      if (a.stub_label > 0) t += ":" + std::to_string(a.stub_label);
      return t + "]";
    }
    std::string sym = a.element == Element::Other ? a.other_symbol : element_symbol(a.element);
    if (a.aromatic)
      for (char& c : sym) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    bool need_bracket =
        a.formal_charge != 0 || a.element == Element::Other || !organic_subset(a.element);
    if (!need_bracket) {
      // A bare token implies the default hydrogen fill; bracket when the
      // stored hydrogen count differs from what a reader would infer.
      int sum = mol.bond_order_sum(v);
      int inferred = 0;
      for (int val : allowed_valences(a.element, 0))
        if (val >= sum) {
          inferred = val - sum;
          break;
        }
      if (inferred != a.total_h()) need_bracket = true;
    }
    if (!need_bracket) return sym;
    std::string t = "[" + sym;
    int h = a.total_h();
    if (h == 1) t += "H";
    else if (h > 1) t += "H" + std::to_string(h);
    if (a.formal_charge == 1) t += "+";
    else if (a.formal_charge == -1) t += "-";
    else if (a.formal_charge > 1) t += "+" + std::to_string(a.formal_charge);
    else if (a.formal_charge < -1) t += "-" + std::to_string(-a.formal_charge);
    return t + "]";
  }

  std::string bond_token(int bi) const {
    const Bond& b = mol.bonds[bi];
    switch (b.order) {
      case BondOrder::Single:
        // Explicit '-' keeps a single bond between two aromatic atoms
        // single on re-parse.
        if (mol.atoms[b.a].aromatic && mol.atoms[b.b].aromatic) return "-";
        return "";
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return "";
    }
    return "";
  }

  std::string write(int root) {
    visited_.assign(mol.num_atoms(), 0);
    tree_children_.assign(mol.num_atoms(), {});
    ring_bonds_at_.assign(mol.num_atoms(), {});
    bond_state_.assign(mol.num_bonds(), 0);
    classify(root, -1);
    visited_.assign(mol.num_atoms(), 0);
    ring_number_.clear();
    free_numbers_ = {};
    out_.clear();
    emit(root, -1);
    return std::move(out_);
  }

 private:
  std::vector<char> visited_;
  std::vector<std::vector<int>> tree_children_;   // bond indices, in emit order
  std::vector<std::vector<int>> ring_bonds_at_;   // ring-closure bonds per atom
  std::vector<char> bond_state_;                  // 0 unseen, 1 tree, 2 closure
  std::map<int, int> ring_number_;                // open closure bond -> digit
  std::priority_queue<int, std::vector<int>, std::greater<int>> free_numbers_;
  int next_number_ = 1;
  std::string out_;

  int other_end(int bi, int v) const {
    const Bond& b = mol.bonds[bi];
    return b.a == v ? b.b : b.a;
  }

  void classify(int v, int parent_bond) {
    visited_[v] = 1;
    std::vector<std::pair<int, int>> order;  // (rank of neighbor, bond)
    for (auto [u, bi] : mol.neighbors(v))
      if (bi != parent_bond && bond_state_[bi] == 0) order.push_back({rank[u], bi});
    std::sort(order.begin(), order.end());
    for (auto [r, bi] : order) {
      (void)r;
      if (bond_state_[bi] != 0) continue;  // consumed earlier in this loop
      int u = other_end(bi, v);
      if (visited_[u]) {
        // Back edge discovered at its second endpoint; record at both ends.
        bond_state_[bi] = 2;
        ring_bonds_at_[v].push_back(bi);
        ring_bonds_at_[u].push_back(bi);
      } else {
        bond_state_[bi] = 1;
        tree_children_[v].push_back(bi);
        classify(u, bi);
      }
    }
  }

  int alloc_number() {
    if (!free_numbers_.empty()) {
      int n = free_numbers_.top();
      free_numbers_.pop();
      return n;
    }
    if (next_number_ >= 100) throw std::runtime_error("ring closure numbers exhausted");
    return next_number_++;
  }

  void emit(int v, int parent_bond) {
    (void)parent_bond;
    visited_[v] = 1;
    out_ += atom_token(v);
    // Closures that terminate here first (ascending digit), then new ones
    // (neighbor rank order, as recorded during classification).
    std::vector<std::pair<int, int>> closing;  // (digit, bond)
    std::vector<int> opening;
    for (int bi : ring_bonds_at_[v]) {
      auto it = ring_number_.find(bi);
      if (it != ring_number_.end() && visited_[other_end(bi, v)]) {
        closing.push_back({it->second, bi});
      } else if (it == ring_number_.end()) {
        opening.push_back(bi);
      }
    }
    std::sort(closing.begin(), closing.end());
    for (auto [num, bi] : closing) {
      (void)bi;
      out_ += num < 10 ? std::to_string(num) : "%" + std::to_string(num);
      ring_number_.erase(bi);
      free_numbers_.push(num);
    }
    for (int bi : opening) {
      int num = alloc_number();
      ring_number_[bi] = num;
      out_ += bond_token(bi);  // order written on the opening side only
      out_ += num < 10 ? std::to_string(num) : "%" + std::to_string(num);
    }
    const auto& children = tree_children_[v];
    for (std::size_t i = 0; i < children.size(); ++i) {
      int bi = children[i];
      int u = other_end(bi, v);
      bool last = i + 1 == children.size();
      if (!last) out_ += "(";
      out_ += bond_token(bi);
      emit(u, bi);
      if (!last) out_ += ")";
    }
  }
};

inline std::string write_component_with_rank(const MolGraph& mol,
                                             const std::vector<int>& comp_atoms,
                                             const std::vector<int>& rank) {
  ComponentWriter w(mol, rank);
  int root = comp_atoms.front();
  for (int v : comp_atoms)
    if (rank[v] < rank[root]) root = v;
  return w.write(root);
}

// Fully canonical string for one component: refine, branch over the lowest
// tied class, keep the lexicographically smallest emission.
inline std::string canonical_component_string(const MolGraph& mol,
                                              const std::vector<int>& comp_atoms,
                                              std::vector<int> rank) {
  refine_to_fixpoint(mol, comp_atoms, rank);
  std::map<int, std::vector<int>> classes;
  for (int v : comp_atoms) classes[rank[v]].push_back(v);
  const std::vector<int>* tied = nullptr;
  for (auto& [r, members] : classes) {
    (void)r;
    if (members.size() > 1) {
      tied = &members;
      break;
    }
  }
  if (!tied) return write_component_with_rank(mol, comp_atoms, rank);
  std::string best;
  for (int split : *tied) {
    std::vector<int> r2 = rank;
    for (int v : comp_atoms) r2[v] = r2[v] * 2 + 1;
    r2[split] -= 1;
    std::string s = canonical_component_string(mol, comp_atoms, std::move(r2));
    if (best.empty() || s < best) best = s;
  }
  return best;
}

}  // namespace detail

// Smallest set of smallest rings, as atom-index sets (perceived form).
inline const std::vector<std::vector<int>>& find_sssr(const MolGraph& mol) {
  return mol.rings();
}

// Canonical atom ranks: unique within each connected component and chosen so
// the emitted SMILES is minimal; derived outputs are permutation-invariant.
inline std::vector<int> canonical_ranks(const MolGraph& mol) {
  std::vector<int> comp = mol.component_of();
  int ncomp = mol.num_atoms() ? 1 + *std::max_element(comp.begin(), comp.end()) : 0;
  std::vector<int> rank(mol.num_atoms(), 0);
  for (int c = 0; c < ncomp; ++c) {
    std::vector<int> atoms_in;
    for (int v = 0; v < mol.num_atoms(); ++v)
      if (comp[v] == c) atoms_in.push_back(v);
    std::vector<std::uint64_t> inv(mol.num_atoms(), 0);
    for (int v : atoms_in) inv[v] = detail::atom_invariant(mol.atoms[v]);
    std::vector<std::uint64_t> sorted_inv;
    for (int v : atoms_in) sorted_inv.push_back(inv[v]);
    std::sort(sorted_inv.begin(), sorted_inv.end());
    sorted_inv.erase(std::unique(sorted_inv.begin(), sorted_inv.end()), sorted_inv.end());
    std::vector<int> r(mol.num_atoms(), 0);
    for (int v : atoms_in)
      r[v] = static_cast<int>(std::lower_bound(sorted_inv.begin(), sorted_inv.end(), inv[v]) -
                              sorted_inv.begin());
    detail::refine_to_fixpoint(mol, atoms_in, r);
    for (;;) {
      std::map<int, std::vector<int>> classes;
      for (int v : atoms_in) classes[r[v]].push_back(v);
      const std::vector<int>* tied = nullptr;
      for (auto& [rv, members] : classes) {
        (void)rv;
        if (members.size() > 1) {
          tied = &members;
          break;
        }
      }
      if (!tied) break;
      int best_atom = -1;
      std::string best;
      for (int cand : *tied) {
        std::vector<int> r2 = r;
        for (int v : atoms_in) r2[v] = r2[v] * 2 + 1;
        r2[cand] -= 1;
        std::string s = detail::canonical_component_string(mol, atoms_in, std::move(r2));
        if (best_atom < 0 || s < best) {
          best = std::move(s);
          best_atom = cand;
        }
      }
      for (int v : atoms_in) r[v] = r[v] * 2 + 1;
      r[best_atom] -= 1;
      detail::refine_to_fixpoint(mol, atoms_in, r);
    }
    std::vector<std::pair<int, int>> order;
    for (int v : atoms_in) order.push_back({r[v], v});
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i].second] = static_cast<int>(i);
  }
  return rank;
}

// Canonical SMILES; components are written in sorted order joined by '.'.
inline std::string write_canonical(const MolGraph& mol) {
  if (mol.num_atoms() == 0) return "";
  std::vector<int> comp = mol.component_of();
  int ncomp = 1 + *std::max_element(comp.begin(), comp.end());
  std::vector<int> rank = canonical_ranks(mol);
  std::vector<std::string> parts;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<int> atoms_in;
    for (int v = 0; v < mol.num_atoms(); ++v)
      if (comp[v] == c) atoms_in.push_back(v);
    parts.push_back(detail::write_component_with_rank(mol, atoms_in, rank));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ".";
    out += parts[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Featurization
// ---------------------------------------------------------------------------

// Fixed 22-column node feature layout: symbol one-hot (8), hydrogen-count
// one-hot (5), ring/aromatic binaries (4), degree one-hot (5).
struct FeatureLayout {
  static constexpr int kSymbolBase = 0;   // C,O,N,H,S,Cl,F,Other
  static constexpr int kHCountBase = 8;   // 0,1,2,3,>=4
  static constexpr int kInRing = 13;
  static constexpr int kAromatic = 14;
  static constexpr int kRing5 = 15;
  static constexpr int kRing6 = 16;
  static constexpr int kDegreeBase = 17;  // 0,1,2,3,>=4
  static constexpr int kWidth = 22;
};

struct FeatureMatrix {
  int rows = 0;
  static constexpr int cols = FeatureLayout::kWidth;
  std::vector<double> values;  // row-major

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

inline int symbol_slot(const Atom& a) {
  switch (a.element) {
    case Element::C: return 0;
    case Element::O: return 1;
    case Element::N: return 2;
    case Element::S: return 4;
    case Element::Cl: return 5;
    case Element::F: return 6;
    default: return 7;  // the H slot (3) is reserved but never hot
  }
}

inline FeatureMatrix featurize(const MolGraph& mol) {
  FeatureMatrix fm;
  fm.rows = mol.num_atoms();
  fm.values.assign(static_cast<std::size_t>(fm.rows) * FeatureMatrix::cols, 0.0);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom& a = mol.atoms[i];
    fm.at(i, FeatureLayout::kSymbolBase + symbol_slot(a)) = 1.0;
    fm.at(i, FeatureLayout::kHCountBase + std::min(a.total_h(), 4)) = 1.0;
    fm.at(i, FeatureLayout::kInRing) = a.in_ring ? 1.0 : 0.0;
    fm.at(i, FeatureLayout::kAromatic) = a.aromatic ? 1.0 : 0.0;
    fm.at(i, FeatureLayout::kRing5) = a.in_ring5 ? 1.0 : 0.0;
    fm.at(i, FeatureLayout::kRing6) = a.in_ring6 ? 1.0 : 0.0;
    fm.at(i, FeatureLayout::kDegreeBase + std::min(a.degree, 4)) = 1.0;
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Preprocessing and helpers
// ---------------------------------------------------------------------------

// Extracts the induced subgraph on `keep` (indices into mol). Bond orders,
// charges and aromatic flags are copied; derived fields are re-perceived.
inline MolGraph induced_subgraph(const MolGraph& mol, const std::vector<int>& keep) {
  MolGraph out;
  std::vector<int> map(mol.num_atoms(), -1);
  for (int v : keep) map[v] = out.add_atom(mol.atoms[v]);
  for (const Bond& b : mol.bonds)
    if (map[b.a] >= 0 && map[b.b] >= 0) out.add_bond(map[b.a], map[b.b], b.order);
  out.perceive();
  return out;
}

// Applies an atom permutation: atom i of the result is atom perm[i] of mol.
inline MolGraph permute_atoms(const MolGraph& mol, const std::vector<int>& perm) {
  MolGraph out;
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < perm.size(); ++i) out.add_atom(mol.atoms[perm[i]]);
  for (const Bond& b : mol.bonds) out.add_bond(inverse[b.a], inverse[b.b], b.order);
  out.name = mol.name;
  out.perceive();
  return out;
}

struct PreprocessResult {
  std::optional<MolGraph> mol;
  bool ok() const { return mol.has_value(); }
};

// Keeps the connected component with the most heavy atoms (ties broken by
// smaller canonical SMILES) and rejects molecules under five heavy atoms.
inline PreprocessResult preprocess(const MolGraph& mol) {
  std::vector<int> comp = mol.component_of();
  int ncomp = mol.num_atoms() ? 1 + *std::max_element(comp.begin(), comp.end()) : 0;
  if (ncomp == 0) return {};
  std::vector<std::vector<int>> members(ncomp);
  for (int v = 0; v < mol.num_atoms(); ++v) members[comp[v]].push_back(v);

  int best = 0;
  std::string best_smiles;
  for (int c = 1; c < ncomp; ++c) {
    if (members[c].size() > members[best].size()) {
      best = c;
      best_smiles.clear();
    } else if (members[c].size() == members[best].size()) {
      if (best_smiles.empty())
        best_smiles = write_canonical(induced_subgraph(mol, members[best]));
      std::string s = write_canonical(induced_subgraph(mol, members[c]));
      if (s < best_smiles) {
        best = c;
        best_smiles = s;
      }
    }
  }
  MolGraph kept = induced_subgraph(mol, members[best]);
  if (kept.num_atoms() < 5) return {};
  kept.name = mol.name;
  return {std::move(kept)};
}

}  // namespace cfmask::chem

#endif  // CFMASK_CHEM_HPP
