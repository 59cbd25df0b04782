#pragma once

// Common-random-numbers couplings: one majorant clan, many thinnings.
// A majorant coupling tilts the acceptance by the intensity density,
// M~^eps = exp(-(leap^eps - log(d nu^eps/d nu) - Delta E)); a discretization
// coupling snaps the same cylinders and thins the snapped clan under the
// discrete Hamiltonian. Both reproduce the limit model exactly at eps = 0.

#include <cmath>
#include <map>
#include <vector>

#include "ffg/ffg.hpp"
#include "ffg/models.hpp"
#include "ffg/stats.hpp"

namespace ffg {

struct MajorantCoupling {
  DilutedModel majorant;  // heavily diluted; builds the shared clan
  // d nu^eps / d nu, in [0,1]
  std::function<double(double, const Particle&)> density;
  // Delta E^{H^eps}_eta(gamma_x); eps = 0 is the limit model
  std::function<double(double, const ParticleConfiguration&, const Particle&)> leap;
};

// WR family lambda_eps = lambda0 (1 - eps): the majorant is the limit model.
inline MajorantCoupling wr_fugacity_coupling(double lambda0, double radius, int dim) {
  MajorantCoupling c;
  c.majorant = models::wr_continuum({lambda0, lambda0, radius, dim});
  c.density = [](double eps, const Particle&) { return 1.0 - eps; };
  auto hard = c.majorant.energy_leap;
  c.leap = [hard](double, const ParticleConfiguration& xi, const Particle& g) {
    return hard(xi, g);
  };
  return c;
}

// Softcore-to-hardcore: h_eps = (c/eps) on [0, r] converges to the hardcore
// exclusion as eps -> 0; the hardcore model majorizes the whole family.
inline MajorantCoupling softcore_coupling(double lambda, double radius, int dim, double c0) {
  MajorantCoupling c;
  c.majorant = models::wr_continuum({lambda, lambda, radius, dim});
  c.density = [](double, const Particle&) { return 1.0; };
  auto hard = c.majorant.energy_leap;
  c.leap = [hard, radius, c0](double eps, const ParticleConfiguration& xi, const Particle& g) {
    if (eps == 0) return hard(xi, g);
    double sum = 0;
    for (auto& [p, mult] : xi.entries())
      if (p.spin.tag == models::opposite(g.spin.tag) && dist_sup(p.loc, g.loc) <= radius)
        sum += mult * (c0 / eps);
    return sum;
  };
  return c;
}

// Discrete softcore WR: h_eps = (c/eps) inside the exclusion radius; the
// hardcore discrete model (same fugacity and radius) majorizes the family,
// and eps = 0 is the hardcore model itself.
inline MajorantCoupling softcore_coupling_discrete(double lambda, long radius, int dim,
                                                   double c0) {
  MajorantCoupling c;
  c.majorant = models::wr_discrete({lambda, lambda, radius, dim});
  c.density = [](double, const Particle&) { return 1.0; };
  auto hard = c.majorant.energy_leap;
  const double r = static_cast<double>(radius);
  c.leap = [hard, r, c0](double eps, const ParticleConfiguration& xi, const Particle& g) {
    if (eps == 0) return hard(xi, g);
    double sum = 0;
    for (auto& [p, mult] : xi.entries()) {
      if (p.loc == g.loc) return kInf;  // occupancy stays hardcore
      if (p.spin.tag == models::opposite(g.spin.tag) && dist_sup(p.loc, g.loc) <= r)
        sum += mult * (c0 / eps);
    }
    return sum;
  };
  return c;
}

inline std::map<double, ParticleConfiguration> coupled_samples(
    const MajorantCoupling& c, const Window& window, const std::vector<double>& eps_list,
    const ClanBudget& budget, const StreamFamily& streams, Clan* clan_out = nullptr,
    ClanScope scope = ClanScope::infinite_volume) {
  Clan clan = build_clan(c.majorant, window, scope, budget, streams);
  const double dE = c.majorant.energy_loss_bound;
  std::map<double, ParticleConfiguration> out;
  for (double eps : eps_list) {
    auto accept = [&](const ParticleConfiguration& xi, const Cylinder& cyl) {
      double dens = c.density(eps, cyl.basis);
      if (dens < -1e-12 || dens > 1 + 1e-12)
        raise(errc::hypothesis_violated, "density outside [0,1] at eps " + std::to_string(eps));
      if (dens <= 0) return 0.0;
      double leap = c.leap(eps, xi, cyl.basis);
      double tilted = leap - std::log(dens);
      if (tilted < dE - 1e-9)
        raise(errc::hypothesis_violated,
              "tilted leap below the majorant energy-loss bound at eps " + std::to_string(eps));
      if (tilted == kInf) return 0.0;
      return std::exp(-(tilted - dE));
    };
    ThinResult thin = thin_clan_with(clan, ParticleConfiguration{}, accept);
    out.emplace(eps, kept_configuration(clan, thin, 0.0));
  }
  if (clan_out) *clan_out = std::move(clan);
  return out;
}

// ---------------------------------------------------------------------------
// Discretization couplings.

struct DiscretizedFamily {
  DilutedModel majorant;  // inflated impact geometry; builds the clan
  // D_eps; must move a particle by at most eps (D_0 = identity)
  std::function<Particle(double, const Particle&)> snap;
  // energy leap of the eps-model, evaluated on snapped arguments
  std::function<double(double, const ParticleConfiguration&, const Particle&)> leap;
  double window_inflation = 0;  // clan window = target window + this margin
};

// Rescaled discrete WR: per-site fugacity eps^d lambda0, exclusion radius
// r0/eps, shrunk back by eps. The snapped free process is exactly the
// discrete one; the majorant inflates the exclusion by delta >= 2 max(eps)
// and adds the same-cell occupancy to its impact geometry.
inline DiscretizedFamily wr_spatial_discretization(double lambda0, double r0, int dim,
                                                   double delta) {
  DiscretizedFamily f;
  f.majorant = models::wr_continuum({lambda0, lambda0, r0, dim});
  const double reach = r0 + delta;
  f.majorant.impact_region = [reach](const Particle& g) {
    return Window::continuum_box(models::detail::box_around(g.loc, reach), SpinSet::all());
  };
  f.window_inflation = delta;
  f.snap = [](double eps, const Particle& p) {
    if (eps == 0) return p;
    Particle q = p;
    for (int i = 0; i < q.loc.dim; ++i) q.loc.x[i] = eps * std::floor(q.loc.x[i] / eps);
    return q;
  };
  const double r = r0;
  f.leap = [r](double eps, const ParticleConfiguration& xi, const Particle& g) {
    for (auto& [p, mult] : xi.entries()) {
      if (eps > 0 && p.loc == g.loc) return kInf;  // one particle per cell
      if (p.spin.tag == models::opposite(g.spin.tag) && dist_sup(p.loc, g.loc) <= r) return kInf;
    }
    return 0.0;
  };
  return f;
}

// Thin rods with angles snapped down to multiples of eps (n orientations for
// eps = pi/n). Centers never move, so the limit model itself majorizes.
inline DiscretizedFamily rods_angle_discretization(double lambda, double half_length) {
  DiscretizedFamily f;
  models::ThinRodsParams pr;
  pr.lambda = lambda;
  pr.half_length = half_length;
  f.majorant = models::thin_rods(pr);
  f.window_inflation = 0;
  f.snap = [](double eps, const Particle& p) {
    if (eps == 0) return p;
    Particle q = p;
    q.spin.angle = eps * std::floor(q.spin.angle / eps);
    return q;
  };
  const double l = half_length;
  f.leap = [l](double, const ParticleConfiguration& xi, const Particle& g) {
    for (auto& [p, mult] : xi.entries()) {
      if (dist_l2(p.loc, g.loc) > 2 * l) continue;
      if (models::rods_intersect(p.loc, p.spin.angle, g.loc, g.spin.angle, l)) return kInf;
    }
    return 0.0;
  };
  return f;
}

struct DiscretizationOutcome {
  std::map<double, ParticleConfiguration> sample;  // restricted to the inner window
  std::map<double, bool> agrees_with_limit;        // displacement-matched agreement
};

inline Clan snapped_clan(const Clan& clan, double eps,
                         const std::function<Particle(double, const Particle&)>& snap) {
  Clan out = clan;
  for (Cylinder& c : out.cylinders) c.basis = snap(eps, c.basis);
  return out;
}

inline DiscretizationOutcome coupled_discretization(const DiscretizedFamily& f,
                                                    const Window& window,
                                                    const std::vector<double>& eps_list,
                                                    const ClanBudget& budget,
                                                    const StreamFamily& streams) {
  if (window.lkind != Window::LocKind::box)
    raise(errc::config_error, "discretization couplings take a continuum box window");
  double eps_max = 0;
  for (double e : eps_list) eps_max = std::max(eps_max, e);
  if (f.window_inflation < 2 * eps_max && f.window_inflation > 0)
    raise(errc::config_error, "majorant inflation must be at least 2 max(eps)");

  Box inflated = window.box;
  double margin = f.window_inflation;
  for (int i = 0; i < inflated.dim; ++i) {
    inflated.lo[i] -= margin;
    inflated.hi[i] += margin;
  }
  Window clan_window = Window::continuum_box(inflated, window.spins);
  Clan clan = build_clan(f.majorant, clan_window, ClanScope::infinite_volume, budget, streams);

  DiscretizationOutcome out;
  std::map<double, std::vector<std::uint32_t>> kept_ids;
  std::vector<double> all_eps = eps_list;
  if (std::find(all_eps.begin(), all_eps.end(), 0.0) == all_eps.end()) all_eps.push_back(0.0);

  std::size_t g0_end = clan.generation_offsets.size() > 1 ? clan.generation_offsets[1]
                                                          : clan.cylinders.size();
  for (double eps : all_eps) {
    Clan snapped = snapped_clan(clan, eps, f.snap);
    auto accept = [&](const ParticleConfiguration& xi, const Cylinder& cyl) {
      double leap = f.leap(eps, xi, cyl.basis);
      return leap == kInf ? 0.0 : std::exp(-leap);
    };
    ThinResult thin = thin_clan_with(snapped, ParticleConfiguration{}, accept);
    ParticleConfiguration cfg;
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < g0_end; ++i) {
      if (!thin.kept[i] || !snapped.cylinders[i].alive_at(0.0)) continue;
      const Particle& p = snapped.cylinders[i].basis;
      if (window.contains(p)) {
        cfg.add(p);
        ids.push_back(static_cast<std::uint32_t>(i));
      }
    }
    kept_ids.emplace(eps, std::move(ids));
    out.sample.emplace(eps, std::move(cfg));
  }

  const auto& base_ids = kept_ids.at(0.0);
  for (double eps : eps_list) {
    const auto& ids = kept_ids.at(eps);
    // same kept cylinders on the inner window: every kept particle has its
    // snapped partner within eps and vice versa
    out.agrees_with_limit[eps] = ids == base_ids;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixing probe: both clans from one free process; interaction = a shared
// cylinder or a base of one clan impacting a base of the other.

struct MixingRow {
  double distance = 0;
  double interact_prob = 0;
  std::uint64_t replicas = 0;
};

struct MixingReport {
  std::vector<MixingRow> rows;
  double slope = 0, intercept = 0, r2 = 0;  // log p vs distance
};

inline bool clans_interact(const DilutedModel& m, const Clan& clan) {
  const auto& cs = clan.cylinders;
  auto arcs = clan_arcs(m, clan);
  std::vector<std::vector<std::uint32_t>> ancestors_of(cs.size());
  for (auto [a, d] : arcs) ancestors_of[d].push_back(a);

  auto reach = [&](std::uint32_t root_index) {
    std::vector<char> in(cs.size(), 0);
    std::vector<std::uint32_t> stack;
    std::size_t g0_end = clan.generation_offsets.size() > 1 ? clan.generation_offsets[1]
                                                            : cs.size();
    for (std::size_t i = 0; i < g0_end; ++i)
      if (clan.roots[root_index].contains(cs[i].basis)) {
        in[i] = 1;
        stack.push_back(static_cast<std::uint32_t>(i));
      }
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      for (std::uint32_t a : ancestors_of[v])
        if (!in[a]) {
          in[a] = 1;
          stack.push_back(a);
        }
    }
    return in;
  };
  std::vector<char> in_f = reach(0), in_g = reach(1);
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (in_f[i] && in_g[i]) return true;  // shared cylinder
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!in_f[i]) continue;
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (!in_g[j]) continue;
      if (m.impact_region(cs[j].basis).contains(cs[i].basis)) return true;
      if (m.impact_region(cs[i].basis).contains(cs[j].basis)) return true;
    }
  }
  return false;
}

inline MixingReport mixing_estimate(const DilutedModel& m, const Window& window_f,
                                    const std::vector<std::pair<double, Window>>& far_windows,
                                    std::uint64_t replicas, std::uint64_t seed,
                                    const ClanBudget& budget = {}) {
  MixingReport rep;
  std::uint32_t replica_base = 1;
  for (const auto& [distance, wg] : far_windows) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < replicas; ++i) {
      StreamFamily fam{seed, replica_base + static_cast<std::uint32_t>(i)};
      Clan clan = build_clan(m, {window_f, wg}, ClanScope::infinite_volume, budget, fam);
      if (clans_interact(m, clan)) ++hits;
    }
    replica_base += static_cast<std::uint32_t>(replicas);
    MixingRow row;
    row.distance = distance;
    row.replicas = replicas;
    row.interact_prob = static_cast<double>(hits) / static_cast<double>(replicas);
    rep.rows.push_back(row);
  }
  std::vector<double> xs, ys;
  for (const auto& r : rep.rows)
    if (r.interact_prob > 0) {
      xs.push_back(r.distance);
      ys.push_back(std::log(r.interact_prob));
    }
  auto fit = stats::fit_line(xs, ys);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.r2 = fit.r2;
  return rep;
}

}  // namespace ffg
