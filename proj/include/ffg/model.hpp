#pragma once

// The diluted-model abstraction: an intensity measure plus an energy-leap
// function, exposed through the four capabilities the sampling machinery
// needs (mass, sampling, leap, impact geometry). +infinity leaps encode hard
// exclusions; the energy-loss bound is the infimum of the leap over all
// configurations and particles.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ffg/errors.hpp"
#include "ffg/rng.hpp"
#include "ffg/space.hpp"

namespace ffg {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DilutedModel {
  std::string tag;

  // nu(W) for any bounded window W
  std::function<double(const Window&)> intensity_mass;
  // a draw from nu restricted to W, normalized; W must have positive mass
  std::function<Particle(const Window&, Rng&)> intensity_sample;
  // Delta E_eta(gamma_x), in [energy_loss_bound, +inf]
  std::function<double(const ParticleConfiguration&, const Particle&)> energy_leap;
  // a finite-mass superset of the true interaction range I({gamma_x})
  std::function<Window(const Particle&)> impact_region;
  // size function q >= 1 (defaults to max(1, impact diameter) at model build)
  std::function<double(const Particle&)> size_function;

  double energy_loss_bound = 0.0;  // Delta E, finite

  // populated by discrete models whose spin set is a finite enum; used by the
  // exact enumeration oracle
  std::vector<Spin> enum_spins;
};

struct AcceptanceProbability {
  double value = 1.0;
};

inline AcceptanceProbability acceptance_probability(const DilutedModel& m,
                                                    const ParticleConfiguration& xi,
                                                    const Particle& p) {
  double leap = m.energy_leap(xi, p);
  if (leap == kInf) return {0.0};
  if (leap < m.energy_loss_bound - 1e-12)
    raise(errc::invalid_model, "energy leap " + std::to_string(leap) +
                                   " below the declared energy-loss bound " +
                                   std::to_string(m.energy_loss_bound));
  if (leap == m.energy_loss_bound) return {1.0};
  return {std::exp(-(leap - m.energy_loss_bound))};
}

// ---------------------------------------------------------------------------
// Statistical validation of the model axioms on caller-supplied probes.

struct ValidationReport {
  bool finite_intensity = true;
  bool telescoping_consistent = true;  // H rebuilt from leaps is order-independent
  bool energy_loss_bound_ok = true;
  bool impact_locality_ok = true;
  std::vector<std::string> failures;

  bool all_ok() const {
    return finite_intensity && telescoping_consistent && energy_loss_bound_ok &&
           impact_locality_ok;
  }
};

// Reconstructs H_{Lambda|eta}(sigma) by telescoping energy leaps from the
// empty configuration, adding particles of sigma in the given order.
inline double telescoped_energy(const DilutedModel& m, const ParticleConfiguration& eta,
                                const std::vector<Particle>& order) {
  double h = 0;
  ParticleConfiguration cur = eta;
  for (const Particle& p : order) {
    double leap = m.energy_leap(cur, p);
    if (leap == kInf) return kInf;
    h += leap;
    cur.add(p);
  }
  return h;
}

inline ValidationReport validate_model(const DilutedModel& m,
                                       const std::vector<Window>& probe_windows,
                                       const std::vector<ParticleConfiguration>& probe_configs,
                                       Rng& rng) {
  if (probe_windows.empty() || probe_configs.empty())
    raise(errc::config_error, "validate_model requires nonempty probe sets");
  ValidationReport rep;

  for (const Window& w : probe_windows) {
    double mass = m.intensity_mass(w);
    if (!(mass >= 0) || !std::isfinite(mass)) {
      rep.finite_intensity = false;
      rep.failures.push_back("intensity mass not finite/nonnegative on a probe window");
      break;
    }
  }

  // telescoping order-independence (consistent-Hamiltonian spot check)
  for (const ParticleConfiguration& cfg : probe_configs) {
    std::vector<Particle> order;
    for (auto& [p, mult] : cfg.entries())
      for (int i = 0; i < mult; ++i) order.push_back(p);
    if (order.size() < 2) continue;
    double h1 = telescoped_energy(m, ParticleConfiguration{}, order);
    std::vector<Particle> shuffled = order;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    double h2 = telescoped_energy(m, ParticleConfiguration{}, shuffled);
    bool same = (h1 == kInf && h2 == kInf) || std::fabs(h1 - h2) <= 1e-9 * (1 + std::fabs(h1));
    if (!same) {
      rep.telescoping_consistent = false;
      rep.failures.push_back("H telescoped from empty depends on particle order");
      break;
    }
  }

  // energy-loss bound and impact locality, probing leaps of sampled particles
  for (const Window& w : probe_windows) {
    if (m.intensity_mass(w) <= 0) continue;
    for (int trial = 0; trial < 16; ++trial) {
      Particle g = m.intensity_sample(w, rng);
      for (const ParticleConfiguration& cfg : probe_configs) {
        double leap = m.energy_leap(cfg, g);
        if (leap < m.energy_loss_bound - 1e-12) {
          rep.energy_loss_bound_ok = false;
          rep.failures.push_back("leap below declared bound on a probe");
        }
        // perturb eta just outside the declared impact region, probing every
        // declared spin value: the leap must not move
        Window imp = m.impact_region(g);
        std::vector<Spin> probes_spins = m.enum_spins;
        if (probes_spins.empty()) probes_spins.push_back(g.spin);
        for (const Spin& sp : probes_spins) {
          Particle far{g.loc, sp};
          bool placed = !imp.contains(far);
          double step = g.loc.kind == SpaceKind::lattice ? 1.0 : 0.125;
          for (double shift = step; !placed && shift < 1e6; shift *= 2) {
            far.loc = g.loc;
            far.loc.x[0] += shift;
            placed = !imp.contains(far);
          }
          if (!placed) continue;
          ParticleConfiguration perturbed = cfg;
          perturbed.add(far);
          double leap2 = m.energy_leap(perturbed, g);
          bool same = (leap == leap2) || (leap == kInf && leap2 == kInf);
          if (!same && g.loc.kind == SpaceKind::continuum) {
            // nudge off a possible nu-null boundary shell before flagging
            Particle far2 = far;
            far2.loc.x[0] += 1e-7 * (1 + std::fabs(far.loc.x[0]));
            if (!imp.contains(far2)) {
              ParticleConfiguration p2 = cfg;
              p2.add(far2);
              double leap3 = m.energy_leap(p2, g);
              same = (leap == leap3) || (leap == kInf && leap3 == kInf);
            }
          }
          if (!same) {
            rep.impact_locality_ok = false;
            rep.failures.push_back("adding a particle outside impact_region changed the leap");
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace ffg
