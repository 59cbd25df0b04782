#pragma once

// Concrete diluted models: continuum/discrete/generalized/tolerant
// Widom-Rowlinson, thin rods, and the symbiotic host-parasite model.
// Exclusions are hardcore at sup-distance <= r, matching the pair potential
// convention used everywhere in this code base.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ffg/model.hpp"

namespace ffg::models {

constexpr std::int64_t kPlus = +1;
constexpr std::int64_t kMinus = -1;
constexpr std::int64_t kHost = 0;
constexpr std::int64_t kParasite = 1;

inline Spin plus() { return Spin::make_tag(kPlus); }
inline Spin minus() { return Spin::make_tag(kMinus); }

inline std::int64_t opposite(std::int64_t wr_tag) { return -wr_tag; }

// --------------------------------------------------------------------------
// Widom-Rowlinson, continuum

struct WRContinuumParams {
  double lambda_plus = 1;
  double lambda_minus = 1;
  double radius = 1;
  int dim = 2;
};

namespace detail {

inline double tag_mass(const SpinSet& s, double lp, double lm) {
  double m = 0;
  if (s.contains(Spin::make_tag(kPlus))) m += lp;
  if (s.contains(Spin::make_tag(kMinus))) m += lm;
  return m;
}

inline Spin sample_tag(const SpinSet& s, double lp, double lm, Rng& rng) {
  bool p = s.contains(Spin::make_tag(kPlus));
  bool m = s.contains(Spin::make_tag(kMinus));
  if (p && m) return rng.uniform() * (lp + lm) < lp ? Spin::make_tag(kPlus) : Spin::make_tag(kMinus);
  if (p) return Spin::make_tag(kPlus);
  if (m) return Spin::make_tag(kMinus);
  raise(errc::config_error, "sampling from an empty spin set");
}

inline Location sample_in_box(const Box& b, Rng& rng) {
  Location l;
  l.kind = SpaceKind::continuum;
  l.dim = b.dim;
  for (int i = 0; i < b.dim; ++i) l.x[i] = rng.uniform_in(b.lo[i], b.hi[i]);
  return l;
}

inline Box box_around(const Location& c, double radius) {
  Box b;
  b.dim = c.dim;
  for (int i = 0; i < c.dim; ++i) {
    b.lo[i] = c.x[i] - radius;
    b.hi[i] = c.x[i] + radius;
  }
  return b;
}

inline std::vector<Location> sites_within_sup(const Location& c, long radius) {
  std::vector<long> lo(c.dim), hi(c.dim);
  for (int i = 0; i < c.dim; ++i) {
    lo[i] = c.site(i) - radius;
    hi[i] = c.site(i) + radius;
  }
  return lattice_box_sites(lo, hi);
}

}  // namespace detail

inline DilutedModel wr_continuum(const WRContinuumParams& pr) {
  if (pr.lambda_plus <= 0 || pr.lambda_minus <= 0 || pr.radius <= 0)
    raise(errc::config_error, "wr-continuum parameters must be positive");
  DilutedModel m;
  m.tag = "wr-continuum";
  m.energy_loss_bound = 0.0;
  m.enum_spins = {Spin::make_tag(kPlus), Spin::make_tag(kMinus)};
  const double lp = pr.lambda_plus, lm = pr.lambda_minus, r = pr.radius;

  m.intensity_mass = [lp, lm](const Window& w) {
    if (w.is_empty()) return 0.0;
    if (w.lkind != Window::LocKind::box)
      raise(errc::config_error, "continuum model needs box windows");
    return w.box.volume() * detail::tag_mass(w.spins, lp, lm);
  };
  m.intensity_sample = [lp, lm](const Window& w, Rng& rng) {
    return Particle{detail::sample_in_box(w.box, rng), detail::sample_tag(w.spins, lp, lm, rng)};
  };
  m.energy_leap = [r](const ParticleConfiguration& eta, const Particle& g) {
    for (auto& [p, mult] : eta.entries())
      if (p.spin.tag == opposite(g.spin.tag) && dist_sup(p.loc, g.loc) <= r) return kInf;
    return 0.0;
  };
  m.impact_region = [r](const Particle& g) {
    return Window::continuum_box(detail::box_around(g.loc, r),
                                 SpinSet::of_tags({opposite(g.spin.tag)}));
  };
  m.size_function = [r](const Particle&) { return std::max(1.0, 2 * r); };
  return m;
}

// --------------------------------------------------------------------------
// Widom-Rowlinson, discrete (single occupancy per site)

struct WRDiscreteParams {
  double lambda_plus = 1;
  double lambda_minus = 1;
  long radius = 1;
  int dim = 2;
};

inline DilutedModel wr_discrete(const WRDiscreteParams& pr) {
  if (pr.lambda_plus <= 0 || pr.lambda_minus <= 0 || pr.radius <= 0)
    raise(errc::config_error, "wr-discrete parameters must be positive");
  DilutedModel m;
  m.tag = "wr-discrete";
  m.energy_loss_bound = 0.0;
  m.enum_spins = {Spin::make_tag(kPlus), Spin::make_tag(kMinus)};
  const double lp = pr.lambda_plus, lm = pr.lambda_minus;
  const long r = pr.radius;

  m.intensity_mass = [lp, lm](const Window& w) {
    if (w.is_empty()) return 0.0;
    if (w.lkind != Window::LocKind::sites)
      raise(errc::config_error, "lattice model needs site-list windows");
    return static_cast<double>(w.sites.size()) * detail::tag_mass(w.spins, lp, lm);
  };
  m.intensity_sample = [lp, lm](const Window& w, Rng& rng) {
    if (w.sites.empty()) raise(errc::config_error, "sampling from an empty window");
    const Location& s = w.sites[rng.below(w.sites.size())];
    return Particle{s, detail::sample_tag(w.spins, lp, lm, rng)};
  };
  m.energy_leap = [r](const ParticleConfiguration& eta, const Particle& g) {
    for (auto& [p, mult] : eta.entries()) {
      if (p.loc == g.loc) return kInf;  // single occupancy
      if (p.spin.tag == opposite(g.spin.tag) && dist_sup(p.loc, g.loc) <= static_cast<double>(r))
        return kInf;
    }
    return 0.0;
  };
  // superset of the true range: every type on the sup-ball (the exact set is
  // opposite type on the ball plus the site itself)
  m.impact_region = [r](const Particle& g) {
    return Window::lattice_sites(detail::sites_within_sup(g.loc, r), SpinSet::all());
  };
  m.size_function = [r](const Particle&) { return std::max(1.0, 2.0 * static_cast<double>(r)); };
  return m;
}

// --------------------------------------------------------------------------
// Widom-Rowlinson with generalized interactions h (interspecies) and j
// (type-independent), both decreasing step tables of bounded support.

// A decreasing step function given by breakpoints b_1 < ... < b_k and values
// v_1 >= ... >= v_k: value(t) = v_i on (b_{i-1}, b_i], 0 beyond b_k. Values
// attach to pieces that are closed on the right so the hardcore table
// (+inf on [0,r]) reproduces the <= r exclusion exactly.
struct StepTable {
  std::vector<double> breaks;
  std::vector<double> values;

  static StepTable constant(double value, double support_end) {
    return StepTable{{support_end}, {value}};
  }
  static StepTable zero() { return StepTable{{}, {}}; }

  double support_end() const { return breaks.empty() ? 0.0 : breaks.back(); }
  bool is_zero() const { return breaks.empty(); }

  double operator()(double t) const {
    for (std::size_t i = 0; i < breaks.size(); ++i)
      if (t <= breaks[i]) return values[i];
    return 0.0;
  }

  void check() const {
    if (breaks.size() != values.size()) raise(errc::config_error, "step table size mismatch");
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      if (!(breaks[i] > breaks[i - 1])) raise(errc::config_error, "step table breaks not increasing");
      if (values[i] > values[i - 1]) raise(errc::config_error, "step table values not decreasing");
    }
    for (double v : values)
      if (v < 0) raise(errc::config_error, "step table values must be nonnegative");
  }
};

struct WRGeneralizedParams {
  double lambda_plus = 1;
  double lambda_minus = 1;
  StepTable h;  // interspecies repulsion
  StepTable j;  // type-independent repulsion
  int dim = 2;
};

inline DilutedModel wr_generalized(const WRGeneralizedParams& pr) {
  pr.h.check();
  pr.j.check();
  DilutedModel m;
  m.tag = "wr-generalized";
  m.energy_loss_bound = 0.0;
  m.enum_spins = {Spin::make_tag(kPlus), Spin::make_tag(kMinus)};
  const double lp = pr.lambda_plus, lm = pr.lambda_minus;
  const StepTable h = pr.h, j = pr.j;
  const double reach = std::max(h.support_end(), j.support_end());

  m.intensity_mass = [lp, lm](const Window& w) {
    if (w.is_empty()) return 0.0;
    return w.box.volume() * detail::tag_mass(w.spins, lp, lm);
  };
  m.intensity_sample = [lp, lm](const Window& w, Rng& rng) {
    return Particle{detail::sample_in_box(w.box, rng), detail::sample_tag(w.spins, lp, lm, rng)};
  };
  m.energy_leap = [h, j, reach](const ParticleConfiguration& eta, const Particle& g) {
    double sum = 0;
    for (auto& [p, mult] : eta.entries()) {
      double t = dist_sup(p.loc, g.loc);
      if (t > reach) continue;
      double u = j(t);
      if (p.spin.tag == opposite(g.spin.tag)) u += h(t);
      if (u == kInf) return kInf;
      sum += mult * u;
    }
    return sum;
  };
  m.impact_region = [h, j, reach](const Particle& g) {
    SpinSet spins = j.is_zero() ? SpinSet::of_tags({opposite(g.spin.tag)}) : SpinSet::all();
    return Window::continuum_box(detail::box_around(g.loc, reach), spins);
  };
  m.size_function = [reach](const Particle&) { return std::max(1.0, reach); };
  return m;
}

// --------------------------------------------------------------------------
// Thin rods: segments of half-length l in the plane, angles in [0,pi),
// hardcore intersection constraint.

struct RodOrientation {
  bool uniform = true;                              // uniform on [0,pi)
  std::vector<std::pair<double, double>> atoms;     // (angle, weight), weights sum to 1
};

struct ThinRodsParams {
  double lambda = 1;
  double half_length = 1;
  RodOrientation rho;
};

namespace detail {

inline int orient_sign(double ax, double ay, double bx, double by, double cx, double cy) {
  double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

inline bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
  return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py &&
         py <= std::max(ay, by);
}

// closed-segment intersection predicate
inline bool segments_intersect(double x1, double y1, double x2, double y2, double x3, double y3,
                               double x4, double y4) {
  int d1 = orient_sign(x3, y3, x4, y4, x1, y1);
  int d2 = orient_sign(x3, y3, x4, y4, x2, y2);
  int d3 = orient_sign(x1, y1, x2, y2, x3, y3);
  int d4 = orient_sign(x1, y1, x2, y2, x4, y4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(x3, y3, x4, y4, x1, y1)) return true;
  if (d2 == 0 && on_segment(x3, y3, x4, y4, x2, y2)) return true;
  if (d3 == 0 && on_segment(x1, y1, x2, y2, x3, y3)) return true;
  if (d4 == 0 && on_segment(x1, y1, x2, y2, x4, y4)) return true;
  return false;
}

inline double rho_mass(const RodOrientation& rho, const SpinSet& s) {
  constexpr double pi = 3.14159265358979323846;
  if (rho.uniform) {
    if (s.kind == SpinSet::Kind::all) return 1.0;
    if (s.kind == SpinSet::Kind::interval)
      return std::max(0.0, std::min(s.hi, pi) - std::max(s.lo, 0.0)) / pi;
    return 0.0;
  }
  double m = 0;
  for (auto& [a, w] : rho.atoms)
    if (s.contains(Spin::make_angle(a))) m += w;
  return m;
}

inline Spin rho_sample(const RodOrientation& rho, const SpinSet& s, Rng& rng) {
  constexpr double pi = 3.14159265358979323846;
  if (rho.uniform) {
    double lo = 0, hi = pi;
    if (s.kind == SpinSet::Kind::interval) {
      lo = std::max(s.lo, 0.0);
      hi = std::min(s.hi, pi);
    }
    return Spin::make_angle(rng.uniform_in(lo, hi));
  }
  double total = rho_mass(rho, s);
  if (total <= 0) raise(errc::config_error, "sampling from an empty orientation set");
  double u = rng.uniform() * total;
  for (auto& [a, w] : rho.atoms) {
    if (!s.contains(Spin::make_angle(a))) continue;
    u -= w;
    if (u <= 0) return Spin::make_angle(a);
  }
  return Spin::make_angle(rho.atoms.back().first);
}

}  // namespace detail

inline bool rods_intersect(const Location& c1, double theta1, const Location& c2, double theta2,
                           double l) {
  double ux = l * std::cos(theta1), uy = l * std::sin(theta1);
  double vx = l * std::cos(theta2), vy = l * std::sin(theta2);
  return detail::segments_intersect(c1.x[0] - ux, c1.x[1] - uy, c1.x[0] + ux, c1.x[1] + uy,
                                    c2.x[0] - vx, c2.x[1] - vy, c2.x[0] + vx, c2.x[1] + vy);
}

inline DilutedModel thin_rods(const ThinRodsParams& pr) {
  if (pr.lambda <= 0 || pr.half_length <= 0)
    raise(errc::config_error, "thin-rods parameters must be positive");
  if (!pr.rho.uniform) {
    double w = 0;
    for (auto& [a, wt] : pr.rho.atoms) w += wt;
    if (std::fabs(w - 1.0) > 1e-9) raise(errc::config_error, "orientation weights must sum to 1");
  }
  DilutedModel m;
  m.tag = "thin-rods";
  m.energy_loss_bound = 0.0;
  const double lam = pr.lambda, l = pr.half_length;
  const RodOrientation rho = pr.rho;

  m.intensity_mass = [lam, rho](const Window& w) {
    if (w.is_empty()) return 0.0;
    return lam * w.box.volume() * detail::rho_mass(rho, w.spins);
  };
  m.intensity_sample = [rho](const Window& w, Rng& rng) {
    return Particle{detail::sample_in_box(w.box, rng), detail::rho_sample(rho, w.spins, rng)};
  };
  m.energy_leap = [l](const ParticleConfiguration& eta, const Particle& g) {
    for (auto& [p, mult] : eta.entries()) {
      if (dist_l2(p.loc, g.loc) > 2 * l) continue;
      if (rods_intersect(p.loc, p.spin.angle, g.loc, g.spin.angle, l)) return kInf;
    }
    return 0.0;
  };
  // Euclidean ball of radius 2l crossed with all angles, padded to its
  // bounding box (sound superset of the true range)
  m.impact_region = [l](const Particle& g) {
    return Window::continuum_box(detail::box_around(g.loc, 2 * l), SpinSet::all());
  };
  m.size_function = [l](const Particle&) { return std::max(1.0, 2 * l); };
  return m;
}

// --------------------------------------------------------------------------
// Tolerant Widom-Rowlinson: a particle may have up to k opposite-type
// particles at sup-distance <= r; the (k+1)-st is forbidden.

struct TolerantWRParams {
  double lambda_plus = 1;
  double lambda_minus = 1;
  double radius = 1;
  long tolerance = 1;  // k >= 1
  int dim = 2;
  bool discrete = false;  // lattice variant adds single occupancy
};

inline DilutedModel wr_tolerant(const TolerantWRParams& pr) {
  if (pr.tolerance < 1) raise(errc::config_error, "tolerance k must be >= 1");
  DilutedModel m;
  m.tag = "wr-tolerant";
  m.energy_loss_bound = 0.0;
  m.enum_spins = {Spin::make_tag(kPlus), Spin::make_tag(kMinus)};
  const double lp = pr.lambda_plus, lm = pr.lambda_minus, r = pr.radius;
  const long k = pr.tolerance;
  const bool discrete = pr.discrete;

  if (discrete) {
    m.intensity_mass = [lp, lm](const Window& w) {
    if (w.is_empty()) return 0.0;
      return static_cast<double>(w.sites.size()) * detail::tag_mass(w.spins, lp, lm);
    };
    m.intensity_sample = [lp, lm](const Window& w, Rng& rng) {
      if (w.sites.empty()) raise(errc::config_error, "sampling from an empty window");
      const Location& s = w.sites[rng.below(w.sites.size())];
      return Particle{s, detail::sample_tag(w.spins, lp, lm, rng)};
    };
  } else {
    m.intensity_mass = [lp, lm](const Window& w) {
    if (w.is_empty()) return 0.0;
      return w.box.volume() * detail::tag_mass(w.spins, lp, lm);
    };
    m.intensity_sample = [lp, lm](const Window& w, Rng& rng) {
      return Particle{detail::sample_in_box(w.box, rng), detail::sample_tag(w.spins, lp, lm, rng)};
    };
  }
  m.energy_leap = [r, k, discrete](const ParticleConfiguration& eta, const Particle& g) {
    long own = 0;
    for (auto& [p, mult] : eta.entries()) {
      if (discrete && p.loc == g.loc) return kInf;
      if (p.spin.tag != opposite(g.spin.tag)) continue;
      if (dist_sup(p.loc, g.loc) > r) continue;
      own += mult;
      // p gains g as one more opposite neighbor
      long theirs = 1;
      for (auto& [q, mult2] : eta.entries())
        if (q.spin.tag == opposite(p.spin.tag) && dist_sup(q.loc, p.loc) <= r) theirs += mult2;
      if (theirs > k) return kInf;
    }
    return own > k ? kInf : 0.0;
  };
  m.impact_region = [r, discrete](const Particle& g) {
    // second-shell effect: particles within 2r can change the leap
    if (discrete)
      return Window::lattice_sites(detail::sites_within_sup(g.loc, 2 * static_cast<long>(r)),
                                   SpinSet::all());
    return Window::continuum_box(detail::box_around(g.loc, 2 * r), SpinSet::all());
  };
  m.size_function = [r](const Particle&) { return std::max(1.0, 4 * r); };
  return m;
}

// --------------------------------------------------------------------------
// Symbiotic model: hosts spread freely, a parasite pays J unless a host sits
// in the punctured Euclidean ball B*(x, r). Hosts never feel anything, so
// the impact relation is asymmetric. The displayed single-site Hamiltonian
// gives leap 0 for hosts, hence an energy-loss bound of 0.

struct SymbioticParams {
  double lambda_host = 1;
  double lambda_parasite = 1;
  double coupling = 1;  // J
  double radius = 1;
  int dim = 2;
};

inline DilutedModel symbiotic(const SymbioticParams& pr) {
  if (pr.lambda_host <= 0 || pr.lambda_parasite <= 0 || pr.coupling <= 0 || pr.radius <= 0)
    raise(errc::config_error, "symbiotic parameters must be positive");
  DilutedModel m;
  m.tag = "symbiotic";
  m.energy_loss_bound = 0.0;
  m.enum_spins = {Spin::make_tag(kHost), Spin::make_tag(kParasite)};
  const double lh = pr.lambda_host, lpar = pr.lambda_parasite, J = pr.coupling, r = pr.radius;

  m.intensity_mass = [lh, lpar](const Window& w) {
    if (w.is_empty()) return 0.0;
    double tagmass = 0;
    if (w.spins.contains(Spin::make_tag(kHost))) tagmass += lh;
    if (w.spins.contains(Spin::make_tag(kParasite))) tagmass += lpar;
    return w.box.volume() * tagmass;
  };
  m.intensity_sample = [lh, lpar](const Window& w, Rng& rng) {
    bool h = w.spins.contains(Spin::make_tag(kHost));
    bool p = w.spins.contains(Spin::make_tag(kParasite));
    Spin sp;
    if (h && p)
      sp = rng.uniform() * (lh + lpar) < lh ? Spin::make_tag(kHost) : Spin::make_tag(kParasite);
    else if (h)
      sp = Spin::make_tag(kHost);
    else if (p)
      sp = Spin::make_tag(kParasite);
    else
      raise(errc::config_error, "sampling from an empty spin set");
    return Particle{detail::sample_in_box(w.box, rng), sp};
  };
  m.energy_leap = [J, r](const ParticleConfiguration& eta, const Particle& g) {
    if (g.spin.tag == kHost) return 0.0;
    for (auto& [p, mult] : eta.entries()) {
      if (p.spin.tag != kHost) continue;
      double d = dist_l2(p.loc, g.loc);
      if (d > 0 && d < r) return 0.0;
    }
    return J;
  };
  m.impact_region = [r](const Particle& g) {
    if (g.spin.tag == kHost) return Window::empty();
    return Window::continuum_box(detail::box_around(g.loc, r), SpinSet::of_tags({kHost}));
  };
  m.size_function = [r](const Particle&) { return std::max(1.0, 2 * r); };
  return m;
}

}  // namespace ffg::models
