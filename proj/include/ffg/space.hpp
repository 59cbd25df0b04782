#pragma once

// Locations, spins, windows and finite particle configurations with
// multiplicity. Lattice coordinates are stored as exact integers inside
// doubles; equality and ordering are bit-exact, which makes configuration
// maps and their JSON serialization deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "ffg/errors.hpp"

namespace ffg {

constexpr int kMaxDim = 3;

enum class SpaceKind : std::uint8_t { lattice, continuum };

struct Location {
  SpaceKind kind = SpaceKind::continuum;
  std::uint8_t dim = 0;
  std::array<double, kMaxDim> x{0, 0, 0};

  static Location lattice(std::initializer_list<long> cs) {
    Location l;
    l.kind = SpaceKind::lattice;
    l.dim = static_cast<std::uint8_t>(cs.size());
    int i = 0;
    for (long c : cs) l.x[i++] = static_cast<double>(c);
    return l;
  }
  static Location lattice(const std::vector<long>& cs) {
    Location l;
    l.kind = SpaceKind::lattice;
    l.dim = static_cast<std::uint8_t>(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) l.x[i] = static_cast<double>(cs[i]);
    return l;
  }
  static Location continuum(std::initializer_list<double> cs) {
    Location l;
    l.kind = SpaceKind::continuum;
    l.dim = static_cast<std::uint8_t>(cs.size());
    int i = 0;
    for (double c : cs) {
      if (!std::isfinite(c)) raise(errc::config_error, "continuum coordinate must be finite");
      l.x[i++] = c;
    }
    return l;
  }
  static Location continuum(const std::vector<double>& cs) {
    Location l;
    l.kind = SpaceKind::continuum;
    l.dim = static_cast<std::uint8_t>(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!std::isfinite(cs[i])) raise(errc::config_error, "continuum coordinate must be finite");
      l.x[i] = cs[i];
    }
    return l;
  }

  long site(int i) const { return static_cast<long>(x[i]); }

  friend bool operator==(const Location& a, const Location& b) {
    if (a.kind != b.kind || a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.x[i] != b.x[i]) return false;
    return true;
  }
  friend bool operator<(const Location& a, const Location& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.dim != b.dim) return a.dim < b.dim;
    for (int i = 0; i < a.dim; ++i)
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    return false;
  }
};

inline double dist_sup(const Location& a, const Location& b) {
  double m = 0;
  for (int i = 0; i < a.dim; ++i) m = std::max(m, std::fabs(a.x[i] - b.x[i]));
  return m;
}
inline double dist_l1(const Location& a, const Location& b) {
  double s = 0;
  for (int i = 0; i < a.dim; ++i) s += std::fabs(a.x[i] - b.x[i]);
  return s;
}
inline double dist_l2(const Location& a, const Location& b) {
  double s = 0;
  for (int i = 0; i < a.dim; ++i) s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
  return std::sqrt(s);
}

enum class SpinKind : std::uint8_t { tag, angle, shape };

// One compact spin value: a finite enum tag (Widom-Rowlinson types, Potts
// labels), a rod angle in [0,pi), or a handle into a contour-shape catalog.
struct Spin {
  SpinKind kind = SpinKind::tag;
  std::int64_t tag = 0;
  double angle = 0;

  static Spin make_tag(std::int64_t t) { return Spin{SpinKind::tag, t, 0}; }
  static Spin make_angle(double a) { return Spin{SpinKind::angle, 0, a}; }
  static Spin make_shape(std::int64_t id) { return Spin{SpinKind::shape, id, 0}; }

  friend bool operator==(const Spin& a, const Spin& b) {
    return a.kind == b.kind && a.tag == b.tag && a.angle == b.angle;
  }
  friend bool operator<(const Spin& a, const Spin& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.tag != b.tag) return a.tag < b.tag;
    return a.angle < b.angle;
  }
};

struct Particle {
  Location loc;
  Spin spin;

  friend bool operator==(const Particle& a, const Particle& b) {
    return a.loc == b.loc && a.spin == b.spin;
  }
  friend bool operator<(const Particle& a, const Particle& b) {
    if (a.loc == b.loc) return a.spin < b.spin;
    return a.loc < b.loc;
  }
};

// ---------------------------------------------------------------------------
// Windows: bounded location part (half-open box or explicit site list)
// crossed with a spin restriction.

struct SpinSet {
  enum class Kind : std::uint8_t { all, tags, interval } kind = Kind::all;
  std::vector<std::int64_t> tags;  // sorted, unique
  double lo = 0, hi = 0;           // angle interval [lo, hi)

  static SpinSet all() { return SpinSet{}; }
  static SpinSet of_tags(std::vector<std::int64_t> ts) {
    SpinSet s;
    s.kind = Kind::tags;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    s.tags = std::move(ts);
    return s;
  }
  static SpinSet angle_interval(double lo, double hi) {
    SpinSet s;
    s.kind = Kind::interval;
    s.lo = lo;
    s.hi = hi;
    return s;
  }

  bool contains(const Spin& sp) const {
    switch (kind) {
      case Kind::all: return true;
      case Kind::tags: return std::binary_search(tags.begin(), tags.end(), sp.tag);
      case Kind::interval: return sp.kind == SpinKind::angle && sp.angle >= lo && sp.angle < hi;
    }
    return false;
  }
};

struct Box {
  std::uint8_t dim = 0;
  std::array<double, kMaxDim> lo{0, 0, 0};
  std::array<double, kMaxDim> hi{0, 0, 0};

  double volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }
  bool contains(const Location& p) const {
    for (int i = 0; i < dim; ++i)
      if (!(p.x[i] >= lo[i] && p.x[i] < hi[i])) return false;
    return true;
  }
};

inline Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b;
  b.dim = static_cast<std::uint8_t>(lo.size());
  int i = 0;
  for (double v : lo) b.lo[i++] = v;
  i = 0;
  for (double v : hi) b.hi[i++] = v;
  for (int k = 0; k < b.dim; ++k)
    if (!(b.lo[k] <= b.hi[k])) raise(errc::config_error, "box lower bound above upper bound");
  return b;
}

struct Window {
  enum class LocKind : std::uint8_t { box, sites } lkind = LocKind::box;
  Box box;                          // continuum (half-open per axis)
  std::vector<Location> sites;      // lattice (explicit, sorted)
  SpinSet spins;

  static Window continuum_box(Box b, SpinSet s = SpinSet::all()) {
    Window w;
    w.lkind = LocKind::box;
    w.box = b;
    w.spins = std::move(s);
    return w;
  }
  static Window lattice_sites(std::vector<Location> sts, SpinSet s = SpinSet::all()) {
    Window w;
    w.lkind = LocKind::sites;
    std::sort(sts.begin(), sts.end());
    sts.erase(std::unique(sts.begin(), sts.end()), sts.end());
    w.sites = std::move(sts);
    w.spins = std::move(s);
    return w;
  }
  static Window empty() {
    Window w;
    w.lkind = LocKind::sites;
    return w;
  }

  bool is_empty() const {
    if (lkind == LocKind::sites) return sites.empty();
    return box.volume() == 0.0;
  }
  bool contains_location(const Location& l) const {
    if (lkind == LocKind::box) return box.contains(l);
    return std::binary_search(sites.begin(), sites.end(), l);
  }
  bool contains(const Particle& p) const {
    return contains_location(p.loc) && spins.contains(p.spin);
  }
};

inline SpinSet intersect_spins(const SpinSet& a, const SpinSet& b) {
  using K = SpinSet::Kind;
  if (a.kind == K::all) return b;
  if (b.kind == K::all) return a;
  if (a.kind == K::tags && b.kind == K::tags) {
    std::vector<std::int64_t> out;
    std::set_intersection(a.tags.begin(), a.tags.end(), b.tags.begin(), b.tags.end(),
                          std::back_inserter(out));
    return SpinSet::of_tags(std::move(out));
  }
  if (a.kind == K::interval && b.kind == K::interval) {
    double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (lo >= hi) return SpinSet::of_tags({});
    return SpinSet::angle_interval(lo, hi);
  }
  return SpinSet::of_tags({});  // mixed kinds never overlap
}

inline Window intersect_windows(const Window& a, const Window& b) {
  Window out;
  out.spins = intersect_spins(a.spins, b.spins);
  if (a.lkind == Window::LocKind::box && b.lkind == Window::LocKind::box) {
    out.lkind = Window::LocKind::box;
    Box bx;
    bx.dim = a.box.dim;
    for (int i = 0; i < bx.dim; ++i) {
      bx.lo[i] = std::max(a.box.lo[i], b.box.lo[i]);
      bx.hi[i] = std::max(bx.lo[i], std::min(a.box.hi[i], b.box.hi[i]));
    }
    out.box = bx;
    return out;
  }
  out.lkind = Window::LocKind::sites;
  const std::vector<Location>& base =
      a.lkind == Window::LocKind::sites ? a.sites : b.sites;
  const Window& other = a.lkind == Window::LocKind::sites ? b : a;
  for (const Location& s : base)
    if (other.contains_location(s)) out.sites.push_back(s);
  return out;
}

// Lattice box helper: every site of [lo, hi] (inclusive) in d dimensions.
inline std::vector<Location> lattice_box_sites(const std::vector<long>& lo,
                                               const std::vector<long>& hi) {
  std::vector<Location> out;
  const std::size_t d = lo.size();
  std::vector<long> cur(lo);
  while (true) {
    out.push_back(Location::lattice(cur));
    std::size_t i = 0;
    while (i < d) {
      if (++cur[i] <= hi[i]) break;
      cur[i] = lo[i];
      ++i;
    }
    if (i == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Finite particle configurations with multiplicities (standard representation
// of a point measure restricted to a window).

class ParticleConfiguration {
 public:
  using Map = std::map<Particle, int>;

  ParticleConfiguration() = default;

  static ParticleConfiguration single(const Particle& p, int mult = 1) {
    ParticleConfiguration c;
    c.add(p, mult);
    return c;
  }

  void add(const Particle& p, int mult = 1) {
    if (mult == 0) return;
    auto it = mult_.find(p);
    if (it == mult_.end()) {
      if (mult < 0) raise(errc::config_error, "negative multiplicity");
      mult_.emplace(p, mult);
    } else {
      it->second += mult;
      if (it->second < 0) raise(errc::config_error, "negative multiplicity");
      if (it->second == 0) mult_.erase(it);
    }
  }
  void remove(const Particle& p, int mult = 1) { add(p, -mult); }

  int multiplicity(const Particle& p) const {
    auto it = mult_.find(p);
    return it == mult_.end() ? 0 : it->second;
  }

  bool empty() const { return mult_.empty(); }
  std::size_t distinct_count() const { return mult_.size(); }
  long total_count() const {
    long n = 0;
    for (auto& [p, m] : mult_) n += m;
    return n;
  }
  const Map& entries() const { return mult_; }

  friend bool operator==(const ParticleConfiguration& a, const ParticleConfiguration& b) {
    return a.mult_ == b.mult_;
  }
  friend bool operator<(const ParticleConfiguration& a, const ParticleConfiguration& b) {
    return a.mult_ < b.mult_;
  }

 private:
  Map mult_;
};

inline ParticleConfiguration restrict_to(const ParticleConfiguration& xi, const Window& w) {
  ParticleConfiguration out;
  for (auto& [p, m] : xi.entries())
    if (w.contains(p)) out.add(p, m);
  return out;
}

inline ParticleConfiguration superpose(const ParticleConfiguration& a,
                                       const ParticleConfiguration& b) {
  ParticleConfiguration out = a;
  for (auto& [p, m] : b.entries()) out.add(p, m);
  return out;
}

inline long count_in(const ParticleConfiguration& xi, const Window& w) {
  long n = 0;
  for (auto& [p, m] : xi.entries())
    if (w.contains(p)) n += m;
  return n;
}

}  // namespace ffg
