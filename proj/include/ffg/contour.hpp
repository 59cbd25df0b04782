#pragma once

// Dual-lattice contour machinery for d = 2. A plaquette is a unit edge of
// the dual lattice; dual vertices are stored as integer pairs (a,b) standing
// for the real point (a-1/2, b-1/2), so the dual square around the spin site
// (i,j) has integer corners (i,j)..(i+1,j+1). Contours are closed (every
// vertex of even degree) connected (shared-vertex adjacency) plaquette sets;
// two contours are incompatible when their supports share a dual vertex.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "ffg/model.hpp"
#include "ffg/oracle.hpp"

namespace ffg::contour {

struct Plaquette {
  int x = 0, y = 0;  // lower endpoint (dual-integer coordinates)
  int axis = 0;      // 0: edge to (x+1,y); 1: edge to (x,y+1)

  std::pair<int, int> v0() const { return {x, y}; }
  std::pair<int, int> v1() const { return axis == 0 ? std::pair<int, int>{x + 1, y}
                                                    : std::pair<int, int>{x, y + 1}; }
  friend bool operator==(const Plaquette& a, const Plaquette& b) {
    return a.x == b.x && a.y == b.y && a.axis == b.axis;
  }
  friend bool operator<(const Plaquette& a, const Plaquette& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.axis < b.axis;
  }
};

using Support = std::vector<Plaquette>;  // kept sorted

inline std::vector<std::pair<int, int>> support_vertices(const Support& s) {
  std::vector<std::pair<int, int>> vs;
  vs.reserve(2 * s.size());
  for (const Plaquette& p : s) {
    vs.push_back(p.v0());
    vs.push_back(p.v1());
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

inline bool is_closed(const Support& s) {
  std::map<std::pair<int, int>, int> deg;
  for (const Plaquette& p : s) {
    ++deg[p.v0()];
    ++deg[p.v1()];
  }
  for (auto& [v, d] : deg)
    if (d % 2 != 0) return false;
  return !s.empty();
}

inline bool is_connected(const Support& s) {
  if (s.empty()) return false;
  std::map<std::pair<int, int>, std::vector<int>> at_vertex;
  for (std::size_t i = 0; i < s.size(); ++i) {
    at_vertex[s[i].v0()].push_back(static_cast<int>(i));
    at_vertex[s[i].v1()].push_back(static_cast<int>(i));
  }
  std::vector<char> seen(s.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t found = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (auto v : {s[i].v0(), s[i].v1()})
      for (int j : at_vertex[v])
        if (!seen[j]) {
          seen[j] = 1;
          ++found;
          stack.push_back(j);
        }
  }
  return found == s.size();
}

inline bool is_closed_connected(const Support& s) { return is_closed(s) && is_connected(s); }

// minimal vertex in dictionary order; shapes are supports translated so the
// anchor sits at the origin
inline std::pair<int, int> anchor_of(const Support& s) {
  std::pair<int, int> best = s.front().v0();
  for (const Plaquette& p : s) best = std::min({best, p.v0(), p.v1()});
  return best;
}

inline Support translate(const Support& s, int dx, int dy) {
  Support out = s;
  for (Plaquette& p : out) {
    p.x += dx;
    p.y += dy;
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Contour {
  Support support;  // absolute position, sorted
  std::pair<int, int> anchor() const { return anchor_of(support); }
  Support shape() const {
    auto [ax, ay] = anchor_of(support);
    return translate(support, -ax, -ay);
  }
  int size() const { return static_cast<int>(support.size()); }
};

inline bool compatible(const Contour& a, const Contour& b) {
  auto va = support_vertices(a.support);
  auto vb = support_vertices(b.support);
  std::vector<std::pair<int, int>> inter;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(inter));
  return inter.empty();
}

// ---------------------------------------------------------------------------
// Shape catalog: anchored shapes with stable integer ids (the spin values of
// contour particles).

struct ShapeCatalog {
  std::vector<Support> shapes;       // anchored at the origin
  std::map<Support, int> ids;
  int max_size = 0;

  int add(const Support& anchored) {
    auto it = ids.find(anchored);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(shapes.size());
    shapes.push_back(anchored);
    ids.emplace(anchored, id);
    max_size = std::max(max_size, static_cast<int>(anchored.size()));
    return id;
  }
  int id_of(const Support& anchored) const {
    auto it = ids.find(anchored);
    if (it == ids.end()) raise(errc::catalog_missing, "contour shape not in catalog");
    return it->second;
  }
  const Support& shape(int id) const {
    if (id < 0 || id >= static_cast<int>(shapes.size()))
      raise(errc::catalog_missing, "unknown shape id " + std::to_string(id));
    return shapes[static_cast<std::size_t>(id)];
  }
  std::size_t size() const { return shapes.size(); }
};

enum class ShapeConstraint { all_anchored, through_fixed_vertex };

// Exhaustive enumeration of contour shapes of size <= max_size via closed
// edge-distinct walks (every contour is Eulerian, so every contour through a
// vertex is traced by such a walk from it). all_anchored dedups by anchored
// shape; through_fixed_vertex keeps positioned supports through the origin.
inline std::vector<Support> enumerate_shapes(int max_size, ShapeConstraint constraint,
                                             std::uint64_t node_cap = 50000000) {
  std::set<Support> found;
  std::uint64_t nodes = 0;

  Support path;
  std::set<Plaquette> used;
  std::pair<int, int> start{0, 0};

  auto step = [&](auto&& self, std::pair<int, int> at) -> void {
    if (++nodes > node_cap)
      raise(errc::budget_exceeded, "shape enumeration exceeded the node cap");
    if (at == start && !path.empty()) {
      Support s = path;
      std::sort(s.begin(), s.end());
      if (is_connected(s)) {  // closed by walk construction
        if (constraint == ShapeConstraint::all_anchored) {
          auto [ax, ay] = anchor_of(s);
          found.insert(translate(s, -ax, -ay));
        } else {
          found.insert(s);
        }
      }
      // keep extending: figure-eights revisit the start vertex
    }
    if (static_cast<int>(path.size()) == max_size) return;
    const std::array<std::pair<int, int>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (auto [dx, dy] : dirs) {
      Plaquette e;
      if (dx == 1) e = {at.first, at.second, 0};
      else if (dx == -1) e = {at.first - 1, at.second, 0};
      else if (dy == 1) e = {at.first, at.second, 1};
      else e = {at.first, at.second - 1, 1};
      if (used.count(e)) continue;
      used.insert(e);
      path.push_back(e);
      self(self, {at.first + dx, at.second + dy});
      path.pop_back();
      used.erase(e);
    }
  };
  step(step, start);
  return {found.begin(), found.end()};
}

inline ShapeCatalog build_catalog(int max_size, std::uint64_t node_cap = 50000000) {
  ShapeCatalog cat;
  for (const Support& s : enumerate_shapes(max_size, ShapeConstraint::all_anchored, node_cap))
    cat.add(s);
  return cat;
}

// binary shape-catalog cache, keyed by (d=2, max_size)
inline bool save_catalog(const ShapeCatalog& cat, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  const char magic[8] = {'F', 'F', 'G', 'C', 'A', 'T', '0', '1'};
  out.write(magic, 8);
  std::int32_t dim = 2, max_size = cat.max_size;
  std::int64_t n = static_cast<std::int64_t>(cat.shapes.size());
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(&max_size), 4);
  out.write(reinterpret_cast<const char*>(&n), 8);
  for (const Support& s : cat.shapes) {
    std::int32_t k = static_cast<std::int32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&k), 4);
    for (const Plaquette& p : s) {
      std::int32_t v[3] = {p.x, p.y, p.axis};
      out.write(reinterpret_cast<const char*>(v), 12);
    }
  }
  return static_cast<bool>(out);
}

inline bool load_catalog(ShapeCatalog& cat, const std::string& path, int expect_max_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "FFGCAT01") return false;
  std::int32_t dim = 0, max_size = 0;
  std::int64_t n = 0;
  in.read(reinterpret_cast<char*>(&dim), 4);
  in.read(reinterpret_cast<char*>(&max_size), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || dim != 2 || max_size != expect_max_size) return false;
  ShapeCatalog fresh;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int32_t k = 0;
    in.read(reinterpret_cast<char*>(&k), 4);
    Support s;
    for (std::int32_t j = 0; j < k; ++j) {
      std::int32_t v[3];
      in.read(reinterpret_cast<char*>(v), 12);
      s.push_back({v[0], v[1], v[2]});
    }
    if (!in) return false;
    fresh.add(s);
  }
  cat = std::move(fresh);
  return true;
}

// ---------------------------------------------------------------------------
// Spin grids and the contour <-> spin transforms.

struct SpinGrid {
  long x0 = 0, y0 = 0;
  int w = 0, h = 0;
  std::vector<std::int8_t> s;  // +1 / -1, row-major

  static SpinGrid constant(long x0, long y0, int w, int h, std::int8_t v) {
    SpinGrid g;
    g.x0 = x0;
    g.y0 = y0;
    g.w = w;
    g.h = h;
    g.s.assign(static_cast<std::size_t>(w) * h, v);
    return g;
  }
  bool inside(long x, long y) const { return x >= x0 && x < x0 + w && y >= y0 && y < y0 + h; }
  std::int8_t at(long x, long y) const {  // +1 boundary outside the box
    if (!inside(x, y)) return +1;
    return s[static_cast<std::size_t>(y - y0) * w + (x - x0)];
  }
  void set(long x, long y, std::int8_t v) {
    s[static_cast<std::size_t>(y - y0) * w + (x - x0)] = v;
  }
  std::uint64_t minus_mask() const {  // for exhaustive scans, w*h <= 64
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] < 0) m |= (1ull << i);
    return m;
  }
};

// misaligned-bond plaquettes of a grid extended by + outside
inline Support misaligned_plaquettes(const SpinGrid& g) {
  Support out;
  for (long j = g.y0 - 1; j < g.y0 + g.h + 1; ++j)
    for (long i = g.x0 - 1; i < g.x0 + g.w + 1; ++i) {
      if (g.at(i, j) * g.at(i + 1, j) < 0)
        out.push_back({static_cast<int>(i + 1), static_cast<int>(j), 1});
      if (g.at(i, j) * g.at(i, j + 1) < 0)
        out.push_back({static_cast<int>(i), static_cast<int>(j + 1), 0});
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<Contour> split_into_contours(const Support& all) {
  std::vector<Contour> out;
  if (all.empty()) return out;
  std::map<std::pair<int, int>, std::vector<int>> at_vertex;
  for (std::size_t i = 0; i < all.size(); ++i) {
    at_vertex[all[i].v0()].push_back(static_cast<int>(i));
    at_vertex[all[i].v1()].push_back(static_cast<int>(i));
  }
  std::vector<char> seen(all.size(), 0);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (seen[i]) continue;
    Support comp;
    std::vector<int> stack{static_cast<int>(i)};
    seen[i] = 1;
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      comp.push_back(all[k]);
      for (auto v : {all[k].v0(), all[k].v1()})
        for (int j : at_vertex[v])
          if (!seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back({comp});
  }
  std::sort(out.begin(), out.end(),
            [](const Contour& a, const Contour& b) { return a.support < b.support; });
  return out;
}

inline std::vector<Contour> contours_from_spins(const SpinGrid& g) {
  return split_into_contours(misaligned_plaquettes(g));
}

// number of vertical plaquettes of `s` crossed by the +x ray from site (i,j)
inline int ray_crossings(const Support& s, long i, long j) {
  int n = 0;
  for (const Plaquette& p : s)
    if (p.axis == 1 && p.y == j && p.x >= i + 1) ++n;
  return n;
}

inline bool surrounds(const Support& s, long i, long j) { return ray_crossings(s, i, j) % 2 == 1; }

// (+)-alignment: spin at x is (-1)^{number of contours around x}; + outside.
inline SpinGrid plus_alignment(const std::vector<Contour>& contours, long x0, long y0, int w,
                               int h) {
  for (std::size_t a = 0; a < contours.size(); ++a)
    for (std::size_t b = a + 1; b < contours.size(); ++b)
      if (!compatible(contours[a], contours[b]))
        raise(errc::incompatible_family, "two contours share a dual vertex");
  SpinGrid g = SpinGrid::constant(x0, y0, w, h, +1);
  for (long j = y0; j < y0 + h; ++j)
    for (long i = x0; i < x0 + w; ++i) {
      int n = 0;
      for (const Contour& c : contours)
        if (surrounds(c.support, i, j)) ++n;
      if (n % 2 == 1) g.set(i, j, -1);
    }
  return g;
}

// ---------------------------------------------------------------------------
// Contour configurations as particle configurations: location = anchor
// (lattice point in dual-integer coordinates), spin = catalog shape id.

inline Particle contour_particle(const Contour& c, const ShapeCatalog& cat) {
  auto [ax, ay] = c.anchor();
  int id = cat.id_of(c.shape());
  return Particle{Location::lattice({ax, ay}), Spin::make_shape(id)};
}

inline ParticleConfiguration contours_to_configuration(const std::vector<Contour>& cs,
                                                       const ShapeCatalog& cat) {
  ParticleConfiguration out;
  for (const Contour& c : cs) out.add(contour_particle(c, cat));
  return out;
}

inline Contour contour_from_particle(const Particle& p, const ShapeCatalog& cat) {
  const Support& sh = cat.shape(static_cast<int>(p.spin.tag));
  return Contour{translate(sh, static_cast<int>(p.loc.site(0)), static_cast<int>(p.loc.site(1)))};
}

inline std::vector<Contour> configuration_to_contours(const ParticleConfiguration& cfg,
                                                      const ShapeCatalog& cat) {
  std::vector<Contour> out;
  for (auto& [p, mult] : cfg.entries())
    for (int i = 0; i < mult; ++i) out.push_back(contour_from_particle(p, cat));
  return out;
}

// ---------------------------------------------------------------------------
// The Ising contours model as a diluted model. nu^beta(gamma_x) = e^{-beta
// |gamma|}; the energy leap is +inf iff the new contour shares a vertex with
// the present family or fails to lie entirely inside the sampling window
// (the finite-volume clause of the contour Hamiltonian); Delta E* = 0.

struct DualBox {  // dual-integer vertex box [x0, x0+w) x [y0, y0+h)
  long x0 = 0, y0 = 0;
  int w = 0, h = 0;
  bool contains_vertex(int a, int b) const {
    return a >= x0 && a < x0 + w && b >= y0 && b < y0 + h;
  }
  bool contains_support(const Support& s) const {
    for (const Plaquette& p : s) {
      auto [a0, b0] = p.v0();
      auto [a1, b1] = p.v1();
      if (!contains_vertex(a0, b0) || !contains_vertex(a1, b1)) return false;
    }
    return true;
  }
  std::vector<Location> vertex_sites() const {
    std::vector<Location> out;
    for (long b = y0; b < y0 + h; ++b)
      for (long a = x0; a < x0 + w; ++a) out.push_back(Location::lattice({a, b}));
    std::sort(out.begin(), out.end());
    return out;
  }
};

// the dual box Lambda* of a spin box: one dual vertex ring around it
inline DualBox dual_box_of_spin_box(long x0, long y0, int w, int h) {
  return DualBox{x0, y0, w + 1, h + 1};
}

struct IsingContourModelInfo {
  double catalog_mass = 0;     // sum over catalog shapes of e^{-beta |s|}
  double tail_bound = 0;       // mass bound for shapes beyond the catalog cap
  int max_fitting_size = 0;    // largest contour size that fits the window
};

// geometric bound on the nu-mass of shapes through a fixed vertex with size
// beyond L: closed Eulerian walks give at most 4*3^{n-1} shapes of size n.
inline double shape_tail_bound(double beta, int L) {
  double t = 0;
  for (int n = L + 1; n <= L + 400; n += 1) {
    double add = 4.0 * std::pow(3.0, n - 1) * std::exp(-beta * n);
    t += add;
    if (add < 1e-18 * (t + 1e-300)) break;
  }
  if (3.0 * std::exp(-beta) >= 1.0) return kInf;
  return t;
}

inline DilutedModel ising_contour_model(double beta, const ShapeCatalog& cat, const DualBox& box,
                                        double tail_tolerance = 1e-6,
                                        bool window_complete = false) {
  if (!(beta > 0)) raise(errc::config_error, "beta must be positive");
  if (cat.size() == 0) raise(errc::catalog_missing, "empty shape catalog");

  // the window is honest only if the catalog covers every size that fits;
  // cycle-space catalogs built for this box cover everything by construction
  const int max_fitting = (box.w - 1) * box.h + box.w * (box.h - 1);  // edge count
  double tail = window_complete ? 0.0 : shape_tail_bound(beta, cat.max_size);
  if (!window_complete && cat.max_size < max_fitting && tail > tail_tolerance)
    raise(errc::truncation_too_coarse,
          "catalog cap " + std::to_string(cat.max_size) + " leaves tail mass " +
              std::to_string(tail) + " above tolerance on a window fitting size " +
              std::to_string(max_fitting));

  // per-anchor intensity and shape CDF
  auto weights = std::make_shared<std::vector<double>>();
  double mass = 0;
  for (const Support& s : cat.shapes) {
    mass += std::exp(-beta * static_cast<double>(s.size()));
    weights->push_back(mass);
  }
  auto catp = std::make_shared<ShapeCatalog>(cat);
  int max_extent = 0;
  for (const Support& s : cat.shapes)
    for (const Plaquette& p : s) max_extent = std::max({max_extent, std::abs(p.x) + 1,
                                                        std::abs(p.y) + 1});

  DilutedModel m;
  m.tag = "ising-contours";
  m.energy_loss_bound = 0.0;
  const double per_anchor = mass;
  const DualBox window = box;

  m.intensity_mass = [per_anchor](const Window& w) {
    if (w.lkind != Window::LocKind::sites)
      raise(errc::config_error, "contour model needs dual-vertex site windows");
    if (w.spins.kind != SpinSet::Kind::all)
      raise(errc::config_error, "contour windows carry the full shape set");
    return per_anchor * static_cast<double>(w.sites.size());
  };
  m.intensity_sample = [catp, weights, per_anchor](const Window& w, Rng& rng) {
    const Location& site = w.sites[rng.below(w.sites.size())];
    double u = rng.uniform() * per_anchor;
    std::size_t k = std::lower_bound(weights->begin(), weights->end(), u) - weights->begin();
    if (k >= catp->size()) k = catp->size() - 1;
    return Particle{site, Spin::make_shape(static_cast<std::int64_t>(k))};
  };
  m.energy_leap = [catp, window](const ParticleConfiguration& eta, const Particle& g) {
    Contour cg = contour_from_particle(g, *catp);
    if (!window.contains_support(cg.support)) return kInf;
    for (auto& [p, mult] : eta.entries()) {
      Contour ce = contour_from_particle(p, *catp);
      if (!compatible(cg, ce)) return kInf;
    }
    return 0.0;
  };
  m.impact_region = [catp, max_extent](const Particle& g) {
    const Support& sh = catp->shape(static_cast<int>(g.spin.tag));
    int ext = 0;
    for (const Plaquette& p : sh) ext = std::max({ext, std::abs(p.x) + 1, std::abs(p.y) + 1});
    long ax = g.loc.site(0), ay = g.loc.site(1);
    std::vector<long> lo{ax - max_extent, ay - max_extent};
    std::vector<long> hi{ax + ext + max_extent, ay + ext + max_extent};
    return Window::lattice_sites(lattice_box_sites(lo, hi), SpinSet::all());
  };
  m.size_function = [catp](const Particle& g) {
    return std::max(1.0, static_cast<double>(catp->shape(static_cast<int>(g.spin.tag)).size()));
  };
  return m;
}

// ---------------------------------------------------------------------------
// Exact enumeration on a dual box. Even subgraphs of the box grid form the
// cycle space; each one decomposes uniquely into a compatible contour family,
// and the family weight is e^{-beta * (total edge count)}.

inline std::vector<Support> even_subgraphs(const DualBox& box, int max_cycle_dim = 22) {
  // edges of the grid graph on the box vertices
  std::vector<Plaquette> edges;
  for (long b = box.y0; b < box.y0 + box.h; ++b)
    for (long a = box.x0; a < box.x0 + box.w; ++a) {
      if (a + 1 < box.x0 + box.w) edges.push_back({static_cast<int>(a), static_cast<int>(b), 0});
      if (b + 1 < box.y0 + box.h) edges.push_back({static_cast<int>(a), static_cast<int>(b), 1});
    }
  std::sort(edges.begin(), edges.end());
  const int E = static_cast<int>(edges.size());
  if (E > 64) raise(errc::region_too_large, "dual box has more than 64 edges");

  auto vid = [&](std::pair<int, int> v) {
    return static_cast<int>((v.second - box.y0) * box.w + (v.first - box.x0));
  };
  // spanning forest by BFS; non-tree edges define fundamental cycles
  const int V = box.w * box.h;
  std::vector<int> parent_edge(V, -1), parent_vertex(V, -1), depth(V, -1);
  std::vector<std::vector<std::pair<int, int>>> adj(V);  // (neighbor, edge idx)
  for (int e = 0; e < E; ++e) {
    int u = vid(edges[e].v0()), v = vid(edges[e].v1());
    adj[u].push_back({v, e});
    adj[v].push_back({u, e});
  }
  std::vector<char> tree_edge(E, 0);
  for (int root = 0; root < V; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::vector<int> queue{root};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int u = queue[qi];
      for (auto [v, e] : adj[u])
        if (depth[v] < 0) {
          depth[v] = depth[u] + 1;
          parent_edge[v] = e;
          parent_vertex[v] = u;
          tree_edge[e] = 1;
          queue.push_back(v);
        }
    }
  }
  std::vector<std::uint64_t> fundamental;
  for (int e = 0; e < E; ++e) {
    if (tree_edge[e]) continue;
    std::uint64_t mask = 1ull << e;
    int u = vid(edges[e].v0()), v = vid(edges[e].v1());
    while (u != v) {
      if (depth[u] < depth[v]) std::swap(u, v);
      mask ^= 1ull << parent_edge[u];
      u = parent_vertex[u];
    }
    fundamental.push_back(mask);
  }
  if (static_cast<int>(fundamental.size()) > max_cycle_dim)
    raise(errc::region_too_large,
          "cycle dimension " + std::to_string(fundamental.size()) + " too large to enumerate");

  std::vector<Support> out;
  const std::uint64_t combos = 1ull << fundamental.size();
  out.reserve(combos);
  for (std::uint64_t c = 0; c < combos; ++c) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < fundamental.size(); ++i)
      if (c & (1ull << i)) mask ^= fundamental[i];
    Support s;
    for (int e = 0; e < E; ++e)
      if (mask & (1ull << e)) s.push_back(edges[e]);
    out.push_back(std::move(s));
  }
  return out;
}

// Exact law of the contour Boltzmann-Gibbs distribution mu_{Lambda*|empty}.
// Shapes are registered into `cat` so sampled configurations compare equal.
inline ExactDistribution enumerate_contour_bgd(double beta, const DualBox& box,
                                               ShapeCatalog& cat) {
  ExactDistribution dist;
  double zsum = 0;
  for (const Support& sub : even_subgraphs(box)) {
    std::vector<Contour> family = split_into_contours(sub);
    ParticleConfiguration cfg;
    for (const Contour& c : family) {
      auto [ax, ay] = c.anchor();
      int id = cat.add(c.shape());
      cfg.add(Particle{Location::lattice({static_cast<long>(ax), static_cast<long>(ay)}),
                       Spin::make_shape(id)});
    }
    double w = std::exp(-beta * static_cast<double>(sub.size()));
    zsum += w;
    dist.atoms.emplace_back(std::move(cfg), w);
  }
  dist.z = zsum;  // relative to the free vacuum; constants cancel in the law
  dist.finalize();
  return dist;
}

// Exact Ising law mu^+_Lambda on a spin box (boundary +1 outside), as a map
// from minus-spin bitmasks to probabilities. w*h <= 30.
inline std::map<std::uint64_t, double> ising_plus_exact(double beta, long x0, long y0, int w,
                                                        int h) {
  if (w * h > 30) raise(errc::state_space_too_large, "spin box too large to enumerate");
  std::map<std::uint64_t, double> law;
  double z = 0;
  for (std::uint64_t m = 0; m < (1ull << (w * h)); ++m) {
    SpinGrid g = SpinGrid::constant(x0, y0, w, h, +1);
    for (int i = 0; i < w * h; ++i)
      if (m & (1ull << i)) g.s[i] = -1;
    int mis = static_cast<int>(misaligned_plaquettes(g).size());
    double wt = std::exp(-beta * mis);
    law[m] = wt;
    z += wt;
  }
  for (auto& [m, p] : law) p /= z;
  return law;
}

}  // namespace ffg::contour
