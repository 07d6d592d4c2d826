#pragma once
// Permutation groups over finite opaque-id domains, handled by full element
// enumeration below a configurable bound.  At desk scale enumeration makes
// normality, intersections and products exact without a stabilizer chain;
// hitting the bound is an explicit error, never a silent truncation.

#include <functional>
#include <memory>
#include <unordered_set>

#include "serre/core.hpp"

namespace serre {

using Perm = std::vector<int>;

inline Perm perm_identity(int n) {
  Perm p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

// a then b
inline Perm perm_compose(const Perm& a, const Perm& b) {
  Perm c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = b[a[i]];
  return c;
}

inline Perm perm_inverse(const Perm& a) {
  Perm c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[a[i]] = (int)i;
  return c;
}

inline bool perm_is_identity(const Perm& a) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != (int)i) return false;
  return true;
}

inline bool perm_is_bijection(const Perm& a) {
  std::vector<char> hit(a.size(), 0);
  for (int x : a) {
    if (x < 0 || x >= (int)a.size() || hit[x]) return false;
    hit[x] = 1;
  }
  return true;
}

// group product in function-composition order: (a*b) applies b first
inline Perm gmul(const Perm& a, const Perm& b) { return perm_compose(b, a); }
inline Perm gconj(const Perm& x, const Perm& k) {  // x k x^-1
  return gmul(gmul(x, k), perm_inverse(x));
}

namespace detail {
struct PermHash {
  size_t operator()(const Perm& p) const {
    size_t h = 1469598103934665603ull;
    for (int x : p) {
      h ^= (size_t)x + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};
}  // namespace detail

inline constexpr int kDefaultElementBound = 20000;

class PermGroup {
 public:
  PermGroup() = default;
  PermGroup(std::vector<std::string> domain, std::vector<Perm> generators,
            int element_bound = kDefaultElementBound)
      : domain_(std::move(domain)),
        gens_(std::move(generators)),
        bound_(element_bound) {
    for (const auto& g : gens_) {
      if (g.size() != domain_.size() || !perm_is_bijection(g))
        throw error(errc::invalid_argument, "generator is not a bijection of the domain");
    }
  }

  static PermGroup trivial(std::vector<std::string> domain,
                           int element_bound = kDefaultElementBound) {
    return PermGroup(std::move(domain), {}, element_bound);
  }

  const std::vector<std::string>& domain() const { return domain_; }
  int domain_size() const { return (int)domain_.size(); }
  const std::vector<Perm>& generators() const { return gens_; }
  int element_bound() const { return bound_; }

  int index_of(const std::string& id) const {
    for (int i = 0; i < (int)domain_.size(); ++i)
      if (domain_[i] == id) return i;
    throw error(errc::dangling_reference, "no domain element '" + id + "'");
  }

  // Sorted full enumeration (lexicographic on image vectors).
  const std::vector<Perm>& elements() const {
    if (!elems_) {
      std::unordered_set<Perm, detail::PermHash> seen;
      std::vector<Perm> queue;
      Perm id = perm_identity((int)domain_.size());
      seen.insert(id);
      queue.push_back(id);
      for (size_t head = 0; head < queue.size(); ++head) {
        Perm cur = queue[head];
        for (const auto& g : gens_) {
          Perm nxt = perm_compose(cur, g);
          if (seen.insert(nxt).second) {
            if ((int)seen.size() > bound_)
              throw error(errc::element_bound_exceeded,
                          "group enumeration exceeds " + std::to_string(bound_) +
                              " elements");
            queue.push_back(std::move(nxt));
          }
        }
      }
      std::sort(queue.begin(), queue.end());
      elems_ = std::make_shared<const std::vector<Perm>>(std::move(queue));
    }
    return *elems_;
  }

  long long order() const { return (long long)elements().size(); }

  bool contains(const Perm& p) const {
    const auto& e = elements();
    return std::binary_search(e.begin(), e.end(), p);
  }

  bool is_subgroup_of(const PermGroup& g) const {
    if (domain_ != g.domain_) return false;
    for (const auto& h : gens_)
      if (!g.contains(h)) return false;
    return true;
  }

  PermGroup with_generators(std::vector<Perm> gens) const {
    return PermGroup(domain_, std::move(gens), bound_);
  }

  // Greedy small generating set for an explicit element list.
  PermGroup spanned_by(const std::vector<Perm>& elems) const {
    std::vector<Perm> gens;
    PermGroup h(domain_, {}, bound_);
    std::vector<Perm> sorted = elems;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& e : sorted) {
      if (!h.contains(e)) {
        gens.push_back(e);
        h = PermGroup(domain_, gens, bound_);
      }
    }
    return h;
  }

 private:
  std::vector<std::string> domain_;
  std::vector<Perm> gens_;
  int bound_ = kDefaultElementBound;
  mutable std::shared_ptr<const std::vector<Perm>> elems_;
};

// ---------------------------------------------------------------------------
// Orbits.

inline std::vector<int> orbit_of(const PermGroup& g, int x) {
  std::vector<char> in(g.domain_size(), 0);
  std::vector<int> orb{x};
  in[x] = 1;
  for (size_t h = 0; h < orb.size(); ++h)
    for (const auto& p : g.generators()) {
      int y = p[orb[h]];
      if (!in[y]) {
        in[y] = 1;
        orb.push_back(y);
      }
    }
  std::sort(orb.begin(), orb.end());
  return orb;
}

// Orbit classes intersected with a subset of the domain, as sorted lists of
// domain indices.
inline std::vector<std::vector<int>> orbit_blocks(const PermGroup& g,
                                                  const std::vector<int>& subset) {
  std::vector<char> in(g.domain_size(), 0);
  for (int x : subset) {
    if (x < 0 || x >= g.domain_size())
      throw error(errc::invalid_argument, "subset element outside the domain");
    in[x] = 1;
  }
  std::vector<char> seen(g.domain_size(), 0);
  std::vector<std::vector<int>> blocks;
  for (int x = 0; x < g.domain_size(); ++x) {
    if (!in[x] || seen[x]) continue;
    std::vector<int> block;
    for (int y : orbit_of(g, x))
      if (in[y]) {
        seen[y] = 1;
        block.push_back(y);
      }
    blocks.push_back(std::move(block));
  }
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

inline VertexPartition orbit_partition(const PermGroup& g) {
  std::vector<int> all(g.domain_size());
  for (int i = 0; i < g.domain_size(); ++i) all[i] = i;
  return VertexPartition::from_blocks(g.domain_size(), orbit_blocks(g, all));
}

inline bool is_transitive(const PermGroup& g) {
  return g.domain_size() > 0 &&
         (int)orbit_of(g, 0).size() == g.domain_size();
}

// ---------------------------------------------------------------------------
// Stabilizers.

inline PermGroup point_stabilizer(const PermGroup& g, int x) {
  if (x < 0 || x >= g.domain_size())
    throw error(errc::invalid_argument, "point outside the domain");
  std::vector<Perm> fix;
  for (const auto& p : g.elements())
    if (p[x] == x) fix.push_back(p);
  return g.spanned_by(fix);
}

// Setwise stabilizer of a subset of the domain.
inline PermGroup set_stabilizer(const PermGroup& g, const std::vector<int>& s) {
  std::vector<char> in(g.domain_size(), 0);
  for (int x : s) in[x] = 1;
  std::vector<Perm> fix;
  for (const auto& p : g.elements()) {
    bool ok = true;
    for (int x : s)
      if (!in[p[x]]) {
        ok = false;
        break;
      }
    if (ok) fix.push_back(p);
  }
  return g.spanned_by(fix);
}

// ---------------------------------------------------------------------------
// Minimal block systems of a transitive group: for the base point paired
// with every other point, the classical union-find block closure; the
// inclusion-minimal nontrivial results survive.  Empty iff primitive.

namespace detail {
// Smallest G-invariant equivalence containing (alpha,beta): iterate the
// closure rule x ~ leader(x) => g(x) ~ g(leader(x)) to a fixpoint.
inline VertexPartition block_closure(const PermGroup& g, int alpha, int beta) {
  int n = g.domain_size();
  std::vector<int> uf(n);
  for (int i = 0; i < n; ++i) uf[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  uf[std::max(alpha, beta)] = std::min(alpha, beta);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.generators())
      for (int x = 0; x < n; ++x) {
        int a = find(p[x]), b = find(p[find(x)]);
        if (a != b) {
          uf[std::max(a, b)] = std::min(a, b);
          changed = true;
        }
      }
  }
  std::vector<int> bo(n);
  for (int i = 0; i < n; ++i) bo[i] = find(i);
  std::map<int, int> renum;
  for (int& b : bo) {
    auto it = renum.emplace(b, (int)renum.size());
    b = it.first->second;
  }
  return VertexPartition::from_block_of(std::move(bo));
}
}  // namespace detail

inline std::vector<VertexPartition> minimal_block_systems(const PermGroup& g) {
  if (!is_transitive(g))
    throw error(errc::not_transitive, "block systems need a transitive group");
  int n = g.domain_size();
  std::vector<VertexPartition> found;
  for (int beta = 1; beta < n; ++beta) {
    auto p = detail::block_closure(g, 0, beta);
    if (p.num_blocks() <= 1 || p.num_blocks() >= n) continue;  // trivial
    found.push_back(std::move(p));
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  std::vector<VertexPartition> minimal;
  for (const auto& p : found) {
    bool min = true;
    for (const auto& q : found)
      if (!(q == p) && q.refines(p)) {
        min = false;
        break;
      }
    if (min) minimal.push_back(p);
  }
  return minimal;
}

// ---------------------------------------------------------------------------
// Subgroup arithmetic (exact, by enumeration).

inline void require_subgroup(const PermGroup& g, const PermGroup& h,
                             const std::string& name) {
  if (!h.is_subgroup_of(g))
    throw error(errc::not_a_subgroup, name + " is not a subgroup");
}

inline long long subgroup_index(const PermGroup& g, const PermGroup& h) {
  require_subgroup(g, h, "H");
  return g.order() / h.order();
}

inline bool is_normal_in(const PermGroup& g, const PermGroup& h) {
  require_subgroup(g, h, "H");
  for (const auto& x : g.generators())
    for (const auto& k : h.generators()) {
      Perm c = perm_compose(perm_compose(perm_inverse(x), k), x);
      if (!h.contains(c)) return false;
    }
  return true;
}

inline PermGroup subgroup_intersection(const PermGroup& g, const PermGroup& h,
                                       const PermGroup& k) {
  require_subgroup(g, h, "H");
  require_subgroup(g, k, "K");
  std::vector<Perm> both;
  for (const auto& p : h.elements())
    if (k.contains(p)) both.push_back(p);
  return g.spanned_by(both);
}

inline PermGroup conjugate_subgroup(const PermGroup& g, const PermGroup& h,
                                    const Perm& x) {
  require_subgroup(g, h, "H");
  std::vector<Perm> gens;
  Perm xi = perm_inverse(x);
  for (const auto& k : h.generators())
    gens.push_back(perm_compose(perm_compose(xi, k), x));
  return g.with_generators(std::move(gens));
}

inline PermGroup normal_core(const PermGroup& g, const PermGroup& h) {
  require_subgroup(g, h, "H");
  std::vector<Perm> core;
  for (const auto& p : h.elements()) {
    bool in_all = true;
    for (const auto& x : g.elements()) {
      Perm c = perm_compose(perm_compose(x, p), perm_inverse(x));
      if (!h.contains(c)) {
        in_all = false;
        break;
      }
    }
    if (in_all) core.push_back(p);
  }
  return g.spanned_by(core);
}

// Every subgroup of an enumerated group, built bottom-up: all cyclic
// subgroups, closed under pairwise join.
inline std::vector<PermGroup> all_subgroups(const PermGroup& g) {
  std::set<std::vector<Perm>> seen;  // keyed by sorted element list
  std::vector<PermGroup> out;
  std::vector<PermGroup> cyclic;
  auto add = [&](const PermGroup& h) {
    auto key = h.elements();
    if (seen.insert(key).second) {
      out.push_back(h);
      return true;
    }
    return false;
  };
  add(g.with_generators({}));
  for (const auto& e : g.elements()) {
    PermGroup c = g.with_generators({e});
    cyclic.push_back(c);
    add(c);
  }
  for (size_t head = 0; head < out.size(); ++head)
    for (const auto& c : cyclic) {
      std::vector<Perm> gens = out[head].generators();
      for (const auto& e : c.generators()) gens.push_back(e);
      add(g.with_generators(gens));
    }
  return out;
}

// Intersection of all subgroups of index at most max_index; characteristic,
// hence normal.  Exact for enumerated groups; choosing the index bound is
// the caller's burden.
inline PermGroup low_index_core(const PermGroup& g, long long max_index) {
  PermGroup core = g;
  for (const auto& h : all_subgroups(g))
    if (g.order() / h.order() <= max_index) core = subgroup_intersection(g, core, h);
  return core;
}

// The product set HK, as a group when it is one.
inline std::optional<PermGroup> product_set_subgroup(const PermGroup& g,
                                                     const PermGroup& h,
                                                     const PermGroup& k) {
  require_subgroup(g, h, "H");
  require_subgroup(g, k, "K");
  std::set<Perm> hk, kh;
  for (const auto& a : h.elements())
    for (const auto& b : k.elements()) {
      hk.insert(perm_compose(a, b));
      kh.insert(perm_compose(b, a));
    }
  if (hk != kh) return std::nullopt;  // HK is a subgroup iff HK = KH
  return g.spanned_by(std::vector<Perm>(hk.begin(), hk.end()));
}

}  // namespace serre
