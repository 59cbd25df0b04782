#pragma once

// Low-temperature contour machinery (d = 2) for the q-Potts model of
// interaction range r and the discrete Widom-Rowlinson model: defect sets,
// labeled contours with interior decomposition, contour energies, the
// Minlos-Sinai contour model fed to the clan sampler, diluted partition
// functions, and the i-alignment sampler.
//
// Conventions pinned here: correctness uses the l1 ball for Potts and the
// sup ball for WR; defect components are joined at sup-distance <= r;
// complement components (interiors) use 4-adjacency; a contour family is
// admissible on a window Lambda only when d1(V(gamma), Lambda^c) > 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "ffg/ffg.hpp"
#include "ffg/model.hpp"
#include "ffg/oracle.hpp"

namespace ffg::ps {

using Site = std::pair<long, long>;
using Region = std::vector<Site>;  // sorted, unique

inline long l1(const Site& a, const Site& b) {
  return std::labs(a.first - b.first) + std::labs(a.second - b.second);
}
inline long lsup(const Site& a, const Site& b) {
  return std::max(std::labs(a.first - b.first), std::labs(a.second - b.second));
}

inline Region sorted_region(Region r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}
inline bool region_contains(const Region& r, const Site& s) {
  return std::binary_search(r.begin(), r.end(), s);
}
inline Region box_region(long x0, long y0, long x1, long y1) {  // inclusive corners
  Region r;
  for (long x = x0; x <= x1; ++x)
    for (long y = y0; y <= y1; ++y) r.push_back({x, y});
  return r;  // x-major generation is already sorted as pairs
}
inline long region_distance_l1(const Region& a, const Region& b) {
  long best = std::numeric_limits<long>::max();
  for (const Site& s : a)
    for (const Site& t : b) best = std::min(best, l1(s, t));
  return best;
}

// interior boundary and r-interior of a finite region
inline Region interior_boundary(const Region& r) {
  Region out;
  for (const Site& s : r) {
    const Site n4[4] = {{s.first + 1, s.second}, {s.first - 1, s.second},
                        {s.first, s.second + 1}, {s.first, s.second - 1}};
    for (const Site& n : n4)
      if (!region_contains(r, n)) {
        out.push_back(s);
        break;
      }
  }
  return out;
}

inline Region r_interior(const Region& reg, long r) {
  Region bd = interior_boundary(reg);
  Region out;
  for (const Site& s : reg) {
    long d = std::numeric_limits<long>::max();
    for (const Site& b : bd) d = std::min(d, l1(s, b));
    if (d > r) out.push_back(s);
  }
  return out;
}

inline Region dilate_l1(const Region& reg, long k) {
  std::set<Site> out;
  for (const Site& s : reg)
    for (long dx = -k; dx <= k; ++dx)
      for (long dy = -(k - std::labs(dx)); dy <= k - std::labs(dx); ++dy)
        out.insert({s.first + dx, s.second + dy});
  return Region(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// Model specification shared by the Potts and WR variants.

struct PSSpec {
  bool potts = true;
  int q = 2;          // Potts label count; WR uses {+1, 0, -1}
  long range = 1;     // interaction range r
  double beta = 1;    // Potts inverse temperature
  double lambda = 2;  // WR fugacity

  std::vector<std::int8_t> labels() const {
    std::vector<std::int8_t> out;
    if (potts) {
      for (int i = 1; i <= q; ++i) out.push_back(static_cast<std::int8_t>(i));
    } else {
      out = {+1, 0, -1};
    }
    return out;
  }
  bool ball_metric_l1() const { return potts; }  // correctness ball
  long metric(const Site& a, const Site& b) const { return potts ? l1(a, b) : lsup(a, b); }
};

// spins on a finite patch, constant boundary label outside
struct SpinPatch {
  std::map<Site, std::int8_t> values;
  std::int8_t boundary = 1;

  std::int8_t at(const Site& s) const {
    auto it = values.find(s);
    return it == values.end() ? boundary : it->second;
  }
};

// pair energy between two labeled sites (0 when not interacting)
inline double pair_energy(const PSSpec& spec, const Site& x, std::int8_t sx, const Site& y,
                          std::int8_t sy) {
  if (spec.potts) {
    if (l1(x, y) > spec.range) return 0.0;
    return sx != sy ? 1.0 : 0.0;
  }
  if (lsup(x, y) > spec.range) return 0.0;
  return (static_cast<int>(sx) * static_cast<int>(sy) == -1) ? kInf : 0.0;
}

inline double site_energy(const PSSpec& spec, std::int8_t s) {
  if (spec.potts) return 0.0;
  return s != 0 ? -std::log(spec.lambda) : 0.0;
}

inline double mean_energy(const PSSpec& spec, std::int8_t label) {
  if (spec.potts) return 0.0;
  return label != 0 ? -std::log(spec.lambda) : 0.0;
}

// ---------------------------------------------------------------------------
// Defect sets and contour extraction.

inline Region metric_ball(const PSSpec& spec, const Site& c, long r) {
  Region out;
  for (long dx = -r; dx <= r; ++dx)
    for (long dy = -r; dy <= r; ++dy) {
      Site s{c.first + dx, c.second + dy};
      if (spec.metric(c, s) <= r) out.push_back(s);
    }
  return sorted_region(out);
}

// a site is incorrect iff its correctness ball is not monochromatic
inline bool site_incorrect(const PSSpec& spec, const SpinPatch& sigma, const Site& x) {
  std::int8_t v0 = 127;
  for (long dx = -spec.range; dx <= spec.range; ++dx)
    for (long dy = -spec.range; dy <= spec.range; ++dy) {
      Site y{x.first + dx, x.second + dy};
      if (spec.metric(x, y) > spec.range) continue;
      std::int8_t v = sigma.at(y);
      if (v0 == 127) v0 = v;
      else if (v != v0) return true;
    }
  return false;
}

// all incorrect sites; the patch differs from the boundary label only on
// finitely many sites, so scanning the patch dilated by r is exhaustive
inline Region defect_set(const PSSpec& spec, const SpinPatch& sigma) {
  std::set<Site> out;
  for (auto& [s, v] : sigma.values)
    for (long dx = -spec.range; dx <= spec.range; ++dx)
      for (long dy = -spec.range; dy <= spec.range; ++dy) {
        Site x{s.first + dx, s.second + dy};
        if (out.count(x)) continue;
        if (site_incorrect(spec, sigma, x)) out.insert(x);
      }
  return Region(out.begin(), out.end());
}

// components of a site set under sup-distance <= r adjacency
inline std::vector<Region> split_components_sup(const Region& sites, long r) {
  std::vector<Region> out;
  std::vector<char> seen(sites.size(), 0);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (seen[i]) continue;
    Region comp;
    std::vector<std::size_t> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      std::size_t k = stack.back();
      stack.pop_back();
      comp.push_back(sites[k]);
      for (std::size_t j = 0; j < sites.size(); ++j)
        if (!seen[j] && lsup(sites[k], sites[j]) <= r) {
          seen[j] = 1;
          stack.push_back(j);
        }
    }
    out.push_back(sorted_region(std::move(comp)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PSContour {
  Region support;                        // sorted
  std::vector<std::int8_t> labels;       // aligned with support
  std::int8_t external_label = 1;
  // finite complement components with their labels; Int_j = union over j
  std::vector<std::pair<std::int8_t, Region>> interiors;
  double energy = 0;  // Phi(gamma)

  std::int8_t label_at(const Site& s) const {
    auto it = std::lower_bound(support.begin(), support.end(), s);
    if (it == support.end() || !(*it == s)) raise(errc::config_error, "site not in support");
    return labels[static_cast<std::size_t>(it - support.begin())];
  }
  Region interior_all() const {
    Region out;
    for (auto& [j, reg] : interiors) out.insert(out.end(), reg.begin(), reg.end());
    return sorted_region(std::move(out));
  }
  Region volume() const {  // V = supp + Int
    Region out = support;
    Region i = interior_all();
    out.insert(out.end(), i.begin(), i.end());
    return sorted_region(std::move(out));
  }
  long size() const { return static_cast<long>(support.size()); }
};

inline bool ps_incompatible(const PSContour& a, const PSContour& b) {
  return region_distance_l1(a.support, b.support) <= 1;
}

namespace detail {

// complement components of the support within its 1-inflated bounding box;
// 4-adjacent components touching the box rim belong to the infinite one
inline void decompose_complement(const Region& supp, std::vector<Region>& finite_components,
                                 Region& infinite_near) {
  long xmin = supp.front().first, xmax = xmin, ymin = supp.front().second, ymax = ymin;
  for (const Site& s : supp) {
    xmin = std::min(xmin, s.first);
    xmax = std::max(xmax, s.first);
    ymin = std::min(ymin, s.second);
    ymax = std::max(ymax, s.second);
  }
  --xmin; ++xmax; --ymin; ++ymax;
  std::map<Site, int> comp_of;
  std::vector<Region> comps;
  std::vector<char> touches_rim;
  for (long y = ymin; y <= ymax; ++y)
    for (long x = xmin; x <= xmax; ++x) {
      Site s{x, y};
      if (region_contains(supp, s) || comp_of.count(s)) continue;
      Region comp;
      bool rim = false;
      std::vector<Site> stack{s};
      comp_of[s] = static_cast<int>(comps.size());
      while (!stack.empty()) {
        Site t = stack.back();
        stack.pop_back();
        comp.push_back(t);
        if (t.first == xmin || t.first == xmax || t.second == ymin || t.second == ymax) rim = true;
        const Site n4[4] = {{t.first + 1, t.second}, {t.first - 1, t.second},
                            {t.first, t.second + 1}, {t.first, t.second - 1}};
        for (const Site& n : n4) {
          if (n.first < xmin || n.first > xmax || n.second < ymin || n.second > ymax) continue;
          if (region_contains(supp, n) || comp_of.count(n)) continue;
          comp_of[n] = static_cast<int>(comps.size());
          stack.push_back(n);
        }
      }
      comps.push_back(sorted_region(std::move(comp)));
      touches_rim.push_back(rim);
    }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (touches_rim[i]) {
      infinite_near.insert(infinite_near.end(), comps[i].begin(), comps[i].end());
    } else {
      finite_components.push_back(comps[i]);
    }
  }
  infinite_near = sorted_region(std::move(infinite_near));
}

// the label a complement component forces on the support sites near it; the
// component's own spins match it because those sites are correct
inline std::int8_t component_label(const PSSpec& spec, const SpinPatch& sigma,
                                   const Region& component) {
  for (const Site& s : component) return sigma.at(s);
  raise(errc::config_error, "empty complement component");
}

}  // namespace detail

// Phi(gamma): pair terms weighted by the fraction of the pair inside the
// support, plus site terms on the support, minus the mean energy of the
// external reference configuration.
inline double contour_energy(const PSSpec& spec, const PSContour& c) {
  SpinPatch local;
  local.boundary = c.external_label;
  for (std::size_t i = 0; i < c.support.size(); ++i) local.values[c.support[i]] = c.labels[i];
  for (auto& [j, reg] : c.interiors)
    for (const Site& s : reg) local.values[s] = j;

  double phi = 0;
  const long r = spec.range;
  for (std::size_t i = 0; i < c.support.size(); ++i) {
    const Site& x = c.support[i];
    phi += site_energy(spec, c.labels[i]);
    for (long dx = -r; dx <= r; ++dx)
      for (long dy = -r; dy <= r; ++dy) {
        if (dx == 0 && dy == 0) continue;
        Site y{x.first + dx, x.second + dy};
        double e = pair_energy(spec, x, c.labels[i], y, local.at(y));
        if (e == 0) continue;
        if (e == kInf) return kInf;
        // internal pairs are visited from both endpoints (weight 1 total),
        // boundary pairs once (weight 1/2)
        phi += e / 2.0;
      }
  }
  phi -= mean_energy(spec, c.external_label) * static_cast<double>(c.support.size());
  return phi;
}

// Contours of a spin patch. Throws unless every defect site keeps l1
// distance > 1 to the complement of `domain` (the sampling-window clause).
inline std::vector<PSContour> extract_contours(const PSSpec& spec, const SpinPatch& sigma,
                                               const Region* domain = nullptr,
                                               bool check_containment = true) {
  Region defects = defect_set(spec, sigma);
  std::vector<PSContour> out;
  if (defects.empty()) return out;
  if (domain && check_containment) {
    for (const Site& s : defects)
      if (!region_contains(*domain, s))
        raise(errc::defect_touches_boundary, "defect set leaves the domain");
  }
  for (const Region& comp : split_components_sup(defects, spec.range)) {
    PSContour c;
    c.support = comp;
    for (const Site& s : comp) c.labels.push_back(sigma.at(s));
    std::vector<Region> finite;
    Region infinite_near;
    detail::decompose_complement(comp, finite, infinite_near);
    c.external_label = detail::component_label(spec, sigma, infinite_near);
    for (const Region& f : finite)
      c.interiors.push_back({detail::component_label(spec, sigma, f), f});
    std::sort(c.interiors.begin(), c.interiors.end());
    c.energy = contour_energy(spec, c);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(),
            [](const PSContour& a, const PSContour& b) { return a.support < b.support; });
  return out;
}

// exact reconstruction: exterior label everywhere, then contours painted
// outermost-first (supports with their labels, interiors with theirs)
inline SpinPatch rebuild_spins(const std::vector<PSContour>& contours, std::int8_t exterior) {
  SpinPatch out;
  out.boundary = exterior;
  std::vector<const PSContour*> order;
  for (const PSContour& c : contours) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const PSContour* a, const PSContour* b) {
    return a->volume().size() > b->volume().size();
  });
  for (const PSContour* c : order) {
    for (std::size_t i = 0; i < c->support.size(); ++i) out.values[c->support[i]] = c->labels[i];
    for (auto& [j, reg] : c->interiors)
      for (const Site& s : reg) out.values[s] = j;
  }
  return out;
}

// exterior contours: not contained in the interior of any other member
inline std::vector<std::size_t> exterior_indices(const std::vector<PSContour>& family) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    bool inside = false;
    for (std::size_t j = 0; j < family.size() && !inside; ++j) {
      if (i == j) continue;
      Region inner = family[j].interior_all();
      inside = std::includes(inner.begin(), inner.end(), family[i].support.begin(),
                             family[i].support.end());
    }
    if (!inside) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shape catalogs, built by exhaustive spin scans on a V-box: every contour
// whose volume fits the box appears in some scanned configuration.

struct PSShape {
  Region support;  // anchored: minimal site at the origin
  std::vector<std::int8_t> labels;
  std::int8_t external_label = 1;
  std::vector<std::pair<std::int8_t, Region>> interiors;
  double energy = 0;

  friend bool operator<(const PSShape& a, const PSShape& b) {
    if (a.support != b.support) return a.support < b.support;
    if (a.labels != b.labels) return a.labels < b.labels;
    return a.external_label < b.external_label;
  }
};

inline Region translate_region(const Region& r, long dx, long dy) {
  Region out;
  out.reserve(r.size());
  for (const Site& s : r) out.push_back({s.first + dx, s.second + dy});
  return sorted_region(std::move(out));
}

inline PSShape canonical_shape(const PSContour& c) {
  PSShape s;
  Site a = c.support.front();  // support is sorted; front is the minimal site
  s.support = translate_region(c.support, -a.first, -a.second);
  s.labels = c.labels;  // translation keeps the sorted order
  s.external_label = c.external_label;
  for (auto& [j, reg] : c.interiors)
    s.interiors.push_back({j, translate_region(reg, -a.first, -a.second)});
  std::sort(s.interiors.begin(), s.interiors.end());
  s.energy = c.energy;
  return s;
}

inline PSContour place_shape(const PSShape& s, const Site& anchor) {
  PSContour c;
  c.support = translate_region(s.support, anchor.first, anchor.second);
  c.labels = s.labels;
  c.external_label = s.external_label;
  for (auto& [j, reg] : s.interiors)
    c.interiors.push_back({j, translate_region(reg, anchor.first, anchor.second)});
  c.energy = s.energy;
  return c;
}

struct PSCatalog {
  PSSpec spec;
  int vbox_w = 0, vbox_h = 0;  // contours with V fitting this box are complete
  std::vector<PSShape> shapes;
  std::map<std::pair<Region, std::vector<std::int8_t>>, int> ids;

  int add(const PSShape& s) {
    auto key = std::make_pair(s.support, s.labels);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(shapes.size());
    shapes.push_back(s);
    ids.emplace(key, id);
    return id;
  }
  int id_of(const PSContour& c) const {
    PSShape s = canonical_shape(c);
    auto it = ids.find(std::make_pair(s.support, s.labels));
    if (it == ids.end()) raise(errc::catalog_missing, "contour shape not in catalog");
    return it->second;
  }
  const PSShape& shape(int id) const {
    if (id < 0 || id >= static_cast<int>(shapes.size()))
      raise(errc::catalog_missing, "unknown shape id");
    return shapes[static_cast<std::size_t>(id)];
  }
};

// Scan every labeling of a w x h box (reference label outside), extract
// contours, canonicalize. Shapes of every external label are collected.
inline PSCatalog build_ps_catalog(const PSSpec& spec, int w, int h) {
  const std::vector<std::int8_t> labels = spec.labels();
  const double states = std::pow(static_cast<double>(labels.size()), w * h);
  if (states > 2e7) raise(errc::region_too_large, "catalog V-box scan too large");
  PSCatalog cat;
  cat.spec = spec;
  cat.vbox_w = w;
  cat.vbox_h = h;
  Region box = box_region(0, 0, w - 1, h - 1);

  for (std::int8_t reference : labels) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(w) * h, 0);
    while (true) {
      SpinPatch sigma;
      sigma.boundary = reference;
      bool nontrivial = false;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        std::int8_t v = labels[idx[k]];
        sigma.values[box[k]] = v;
        if (v != reference) nontrivial = true;
      }
      if (nontrivial) {
        Region defects = defect_set(spec, sigma);
        bool ok = !defects.empty();
        for (const Site& s : defects)
          if (!region_contains(box, s)) {
            ok = false;  // volume would overflow the scan box
            break;
          }
        if (ok)
          for (const PSContour& c : extract_contours(spec, sigma))
            if (c.energy != kInf) cat.add(canonical_shape(c));
      }
      std::size_t k = 0;
      while (k < idx.size()) {
        if (++idx[k] < labels.size()) break;
        idx[k] = 0;
        ++k;
      }
      if (k == idx.size()) break;
    }
  }
  return cat;
}

// ---------------------------------------------------------------------------
// Diluted partition functions for the WR variant: Z^j(Delta) sums admissible
// configurations with j outside, all contours strictly inside Delta.

class PartitionCache {
 public:
  explicit PartitionCache(const PSSpec& spec, std::size_t site_cap = 12)
      : spec_(spec), site_cap_(site_cap) {}

  double value(const Region& delta, std::int8_t j) {
    if (delta.empty()) return 1.0;
    if (delta.size() > site_cap_)
      raise(errc::region_too_large, "diluted partition over " + std::to_string(delta.size()) +
                                        " sites (cap " + std::to_string(site_cap_) + ")");
    Site a = delta.front();
    Region canon = translate_region(delta, -a.first, -a.second);
    auto key = std::make_pair(canon, j);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double z = compute(canon, j);
    cache_.emplace(key, z);
    return z;
  }

 private:
  double compute(const Region& delta, std::int8_t j) const {
    const std::vector<std::int8_t> labels = spec_.labels();
    std::vector<std::size_t> idx(delta.size(), 0);
    double z = 0;
    while (true) {
      SpinPatch sigma;
      sigma.boundary = j;
      long particles = 0;
      for (std::size_t k = 0; k < delta.size(); ++k) {
        std::int8_t v = labels[idx[k]];
        sigma.values[delta[k]] = v;
        if (v != 0) ++particles;
      }
      double energy = 0;
      // pairs meeting Delta; site terms inside Delta
      for (std::size_t k = 0; k < delta.size() && energy != kInf; ++k) {
        const Site& x = delta[k];
        std::int8_t sx = sigma.at(x);
        for (long dx = -spec_.range; dx <= spec_.range && energy != kInf; ++dx)
          for (long dy = -spec_.range; dy <= spec_.range; ++dy) {
            if (dx == 0 && dy == 0) continue;
            Site y{x.first + dx, x.second + dy};
            double e = pair_energy(spec_, x, sx, y, sigma.at(y));
            if (e == kInf) {
              energy = kInf;
              break;
            }
            energy += region_contains(delta, y) ? e / 2.0 : e;
          }
      }
      if (energy != kInf) {
        bool contained = true;
        for (const PSContour& c : extract_contours(spec_, sigma)) {
          for (const Site& s : c.volume()) {
            // d1(V, Delta^c) > 1: the l1 unit ball around s stays in Delta
            const Site n5[5] = {s,
                                {s.first + 1, s.second},
                                {s.first - 1, s.second},
                                {s.first, s.second + 1},
                                {s.first, s.second - 1}};
            for (const Site& n : n5)
              if (!region_contains(delta, n)) {
                contained = false;
                break;
              }
            if (!contained) break;
          }
          if (!contained) break;
        }
        if (contained) z += std::exp(-energy) * std::pow(spec_.lambda, particles);
      }
      std::size_t k = 0;
      while (k < idx.size()) {
        if (++idx[k] < labels.size()) break;
        idx[k] = 0;
        ++k;
      }
      if (k == idx.size()) break;
    }
    return z;
  }

  PSSpec spec_;
  std::size_t site_cap_;
  std::map<std::pair<Region, std::int8_t>, double> cache_;
};

// Minlos-Sinai contour intensity: e^{-beta Phi} for Potts; the WR variant
// carries the product of diluted partition ratios over the interiors.
inline double contour_intensity(const PSSpec& spec, const PSShape& s, PartitionCache* partitions) {
  if (s.energy == kInf) return 0.0;
  if (spec.potts) return std::exp(-spec.beta * s.energy);
  if (!partitions) raise(errc::config_error, "WR contour intensity needs a partition cache");
  double ratio = 1.0;
  for (auto& [j, reg] : s.interiors) {
    if (j == s.external_label) continue;
    ratio *= partitions->value(reg, j) / partitions->value(reg, s.external_label);
  }
  return ratio * std::exp(-s.energy);
}

// ---------------------------------------------------------------------------
// The contour model as a DilutedModel over (anchor site, shape id) particles.

namespace detail {

struct ContourModelState {
  PSSpec spec;
  std::int8_t label = 1;
  Region window;          // Lambda
  Region allowed;         // sites whose l1 unit ball stays in Lambda (V must fit)
  std::vector<int> shape_ids;      // catalog ids with the right external label
  std::vector<PSShape> shapes;     // same order
  std::vector<double> cum_weight;  // cumulative intensities
  double per_anchor_mass = 0;
  long max_extent = 1;
};

inline bool volume_allowed(const ContourModelState& st, const PSContour& c) {
  for (const Site& s : c.volume())
    if (!region_contains(st.allowed, s)) return false;
  return true;
}

}  // namespace detail

inline Location site_location(const Site& s) { return Location::lattice({s.first, s.second}); }
inline Site location_site(const Location& l) { return Site{l.site(0), l.site(1)}; }

// Builds the label-i contour model on the window. The catalog must cover
// every contour volume that fits strictly inside (CatalogMissing otherwise).
inline DilutedModel ps_contour_model(const PSCatalog& cat, std::int8_t label, const Region& window,
                                     PartitionCache* partitions = nullptr) {
  auto st = std::make_shared<detail::ContourModelState>();
  st->spec = cat.spec;
  st->label = label;
  st->window = window;
  for (const Site& s : window) {
    const Site n4[4] = {{s.first + 1, s.second}, {s.first - 1, s.second},
                        {s.first, s.second + 1}, {s.first, s.second - 1}};
    bool ok = true;
    for (const Site& n : n4) ok = ok && region_contains(window, n);
    if (ok) st->allowed.push_back(s);
  }
  if (!st->allowed.empty()) {
    long w = 0, h = 0;
    long xmin = st->allowed.front().first, xmax = xmin;
    long ymin = st->allowed.front().second, ymax = ymin;
    for (const Site& s : st->allowed) {
      xmin = std::min(xmin, s.first);
      xmax = std::max(xmax, s.first);
      ymin = std::min(ymin, s.second);
      ymax = std::max(ymax, s.second);
    }
    w = xmax - xmin + 1;
    h = ymax - ymin + 1;
    if (w > cat.vbox_w || h > cat.vbox_h)
      raise(errc::catalog_missing, "catalog V-box " + std::to_string(cat.vbox_w) + "x" +
                                       std::to_string(cat.vbox_h) +
                                       " smaller than the window interior " + std::to_string(w) +
                                       "x" + std::to_string(h));
  }
  double mass = 0;
  for (std::size_t i = 0; i < cat.shapes.size(); ++i) {
    const PSShape& s = cat.shapes[i];
    if (s.external_label != label) continue;
    double w = contour_intensity(cat.spec, s, partitions);
    if (w <= 0) continue;
    mass += w;
    st->shape_ids.push_back(static_cast<int>(i));
    st->shapes.push_back(s);
    st->cum_weight.push_back(mass);
    for (const Site& x : s.support)
      st->max_extent = std::max({st->max_extent, x.first + 1, x.second + 1});
  }
  st->per_anchor_mass = mass;

  DilutedModel m;
  m.tag = cat.spec.potts ? "potts-contours" : "wr-ps-contours";
  m.energy_loss_bound = 0.0;

  m.intensity_mass = [st](const Window& w) {
    if (w.lkind != Window::LocKind::sites)
      raise(errc::config_error, "contour model needs site windows");
    return st->per_anchor_mass * static_cast<double>(w.sites.size());
  };
  m.intensity_sample = [st](const Window& w, Rng& rng) {
    const Location& site = w.sites[rng.below(w.sites.size())];
    double u = rng.uniform() * st->per_anchor_mass;
    std::size_t k =
        std::lower_bound(st->cum_weight.begin(), st->cum_weight.end(), u) - st->cum_weight.begin();
    if (k >= st->shapes.size()) k = st->shapes.size() - 1;
    return Particle{site, Spin::make_shape(st->shape_ids[k])};
  };
  auto catp = std::make_shared<PSCatalog>(cat);
  m.energy_leap = [st, catp](const ParticleConfiguration& eta, const Particle& g) -> double {
    PSContour cg = place_shape(catp->shape(static_cast<int>(g.spin.tag)), location_site(g.loc));
    if (!detail::volume_allowed(*st, cg)) return kInf;
    for (auto& [p, mult] : eta.entries()) {
      PSContour ce = place_shape(catp->shape(static_cast<int>(p.spin.tag)), location_site(p.loc));
      if (ps_incompatible(cg, ce)) return kInf;
    }
    return 0.0;
  };
  m.impact_region = [st, catp](const Particle& g) {
    const PSShape& sh = catp->shape(static_cast<int>(g.spin.tag));
    long ext = 1;
    for (const Site& s : sh.support) ext = std::max({ext, s.first + 1, s.second + 1});
    Site a = location_site(g.loc);
    long reach = ext + st->max_extent + 1;
    std::vector<long> lo{a.first - reach, a.second - reach};
    std::vector<long> hi{a.first + reach, a.second + reach};
    return Window::lattice_sites(lattice_box_sites(lo, hi), SpinSet::all());
  };
  m.size_function = [catp](const Particle& g) {
    return std::max<double>(1.0, static_cast<double>(
                                     catp->shape(static_cast<int>(g.spin.tag)).support.size()));
  };
  return m;
}

inline std::vector<PSContour> decode_family(const PSCatalog& cat,
                                            const ParticleConfiguration& cfg) {
  std::vector<PSContour> out;
  for (auto& [p, mult] : cfg.entries())
    for (int i = 0; i < mult; ++i)
      out.push_back(place_shape(cat.shape(static_cast<int>(p.spin.tag)), location_site(p.loc)));
  return out;
}

// ---------------------------------------------------------------------------
// Exact spin laws on small patches (boundary label j outside), used by the
// recursion fallback and by the acceptance oracles.

struct PatchLaw {
  Region sites;
  std::vector<std::pair<std::vector<std::int8_t>, double>> atoms;  // sorted labelings
  double z = 0;  // partition sum before normalization

  void finalize() {
    std::sort(atoms.begin(), atoms.end());
    double total = 0;
    for (auto& [l, w] : atoms) total += w;
    z = total;
    cum_.clear();
    double acc = 0;
    for (auto& [l, w] : atoms) {
      w /= total;
      acc += w;
      cum_.push_back(acc);
    }
  }
  const std::vector<std::int8_t>& sample(Rng& rng) const {
    double u = rng.uniform();
    std::size_t i = std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
    if (i >= atoms.size()) i = atoms.size() - 1;
    return atoms[i].first;
  }
  double probability_of(const std::vector<std::int8_t>& l) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), l,
                               [](const auto& a, const std::vector<std::int8_t>& key) {
                                 return a.first < key;
                               });
    if (it == atoms.end() || it->first != l) return 0.0;
    return it->second;
  }

 private:
  std::vector<double> cum_;
};

// mu^j_Delta for the spin model: spins free on Delta, j outside, weight
// e^{-beta sum of pair terms meeting Delta} (lambda^particles for WR).
inline PatchLaw patch_law(const PSSpec& spec, const Region& delta, std::int8_t boundary) {
  const std::vector<std::int8_t> labels = spec.labels();
  double states = std::pow(static_cast<double>(labels.size()), static_cast<double>(delta.size()));
  if (states > 1e7) raise(errc::state_space_too_large, "patch law too large");
  PatchLaw law;
  law.sites = delta;
  std::vector<std::size_t> idx(delta.size(), 0);
  while (true) {
    SpinPatch sigma;
    sigma.boundary = boundary;
    std::vector<std::int8_t> labeling(delta.size());
    long particles = 0;
    for (std::size_t k = 0; k < delta.size(); ++k) {
      labeling[k] = labels[idx[k]];
      sigma.values[delta[k]] = labeling[k];
      if (labeling[k] != 0) ++particles;
    }
    double energy = 0;
    for (std::size_t k = 0; k < delta.size() && energy != kInf; ++k) {
      const Site& x = delta[k];
      for (long dx = -spec.range; dx <= spec.range && energy != kInf; ++dx)
        for (long dy = -spec.range; dy <= spec.range; ++dy) {
          if (dx == 0 && dy == 0) continue;
          Site y{x.first + dx, x.second + dy};
          double e = pair_energy(spec, x, labeling[k], y, sigma.at(y));
          if (e == kInf) {
            energy = kInf;
            break;
          }
          energy += region_contains(delta, y) ? e / 2.0 : e;
        }
    }
    if (energy != kInf) {
      double w = spec.potts ? std::exp(-spec.beta * energy)
                            : std::exp(-energy) * std::pow(spec.lambda, particles);
      law.atoms.emplace_back(std::move(labeling), w);
    }
    std::size_t k = 0;
    while (k < idx.size()) {
      if (++idx[k] < labels.size()) break;
      idx[k] = 0;
      ++k;
    }
    if (k == idx.size()) break;
  }
  law.finalize();
  return law;
}

// ---------------------------------------------------------------------------
// The i-alignment sampler (Potts): draw an exterior-contour family from the
// contour model, paint labels, and fill the deep interiors recursively.

struct AlignmentOptions {
  long enum_cap = 9;      // interiors up to this size are enumerated exactly
  int depth_budget = 8;   // nested recursions through the contour sampler
  ClanBudget clan_budget;
};

struct StreamCursor {
  std::uint64_t seed = 0;
  std::uint32_t next_hi = 0;
  std::uint32_t take() { return next_hi++; }
};

inline SpinPatch i_alignment_sample(const PSCatalog& cat, std::int8_t label, const Region& window,
                                    const AlignmentOptions& opt, StreamCursor& cursor,
                                    PartitionCache* partitions = nullptr) {
  if (opt.depth_budget <= 0)
    raise(errc::recursion_budget_exceeded, "alignment recursion depth exhausted");
  DilutedModel model = ps_contour_model(cat, label, window, partitions);
  std::vector<Location> anchor_sites;
  for (const Site& s : window) anchor_sites.push_back(site_location(s));
  Window w = Window::lattice_sites(std::move(anchor_sites));
  StreamFamily fam{cursor.seed, cursor.take()};
  ParticleConfiguration drawn =
      perfect_sample(model, w, ParticleConfiguration{}, ClanScope::window_local, opt.clan_budget,
                     fam);
  std::vector<PSContour> family = decode_family(cat, drawn);

  SpinPatch out;
  out.boundary = label;
  for (const Site& s : window) out.values[s] = label;

  for (std::size_t idx : exterior_indices(family)) {
    const PSContour& c = family[idx];
    for (std::size_t i = 0; i < c.support.size(); ++i) out.values[c.support[i]] = c.labels[i];
    for (auto& [j, comp] : c.interiors) {
      Region deep = r_interior(comp, cat.spec.range);
      for (const Site& s : comp) out.values[s] = j;  // the ring Int_j minus its r-interior
      if (deep.empty()) continue;
      if (static_cast<long>(deep.size()) <= opt.enum_cap) {
        PatchLaw law = patch_law(cat.spec, deep, j);
        Rng rng(cursor.seed, stream_id(cursor.take(), 0));
        const std::vector<std::int8_t>& labeling = law.sample(rng);
        for (std::size_t k = 0; k < deep.size(); ++k) out.values[deep[k]] = labeling[k];
      } else {
        Region sub_window = dilate_l1(deep, cat.spec.range + 1);
        Region sub_core = r_interior(sub_window, cat.spec.range);
        if (sub_core != deep)
          raise(errc::recursion_budget_exceeded,
                "interior does not round-trip through the window dilation");
        AlignmentOptions sub = opt;
        sub.depth_budget = opt.depth_budget - 1;
        SpinPatch inner = i_alignment_sample(cat, j, sub_window, sub, cursor, partitions);
        for (const Site& s : deep) out.values[s] = inner.at(s);
      }
    }
  }
  return out;
}

}  // namespace ffg::ps
