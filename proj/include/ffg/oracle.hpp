#pragma once

// Exact enumeration of Boltzmann-Gibbs distributions on tiny discrete
// volumes, plus the TV / chi-square comparison harness every statistical
// acceptance check goes through. Hamiltonians are reconstructed from energy
// leaps by telescoping in lexicographic particle order; order-independence
// is a model axiom and is asserted separately in the test-suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ffg/model.hpp"
#include "ffg/stats.hpp"

namespace ffg {

struct ExactDistribution {
  std::vector<std::pair<ParticleConfiguration, double>> atoms;  // sorted by configuration
  double z = 0;  // partition value including the Poisson vacuum factor

  void finalize() {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double total = 0;
    for (auto& [c, p] : atoms) total += p;
    if (!(total > 0)) raise(errc::invalid_model, "exact distribution has zero total mass");
    for (auto& [c, p] : atoms) p /= total;
    cum_.clear();
    cum_.reserve(atoms.size());
    double acc = 0;
    for (auto& [c, p] : atoms) {
      acc += p;
      cum_.push_back(acc);
    }
    double err = std::fabs(acc - 1.0);
    if (err > 1e-12) raise(errc::invalid_model, "probabilities do not sum to 1");
  }

  double probability_of(const ParticleConfiguration& c) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), c,
                               [](const auto& a, const ParticleConfiguration& key) {
                                 return a.first < key;
                               });
    if (it == atoms.end() || !(it->first == c)) return 0.0;
    return it->second;
  }

  const ParticleConfiguration& sample(Rng& rng) const {
    double u = rng.uniform();
    std::size_t i = std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
    if (i >= atoms.size()) i = atoms.size() - 1;
    return atoms[i].first;
  }

 private:
  std::vector<double> cum_;
};

// Exact law of mu_{Lambda|eta} for a discrete model with finitely many spin
// values. Site occupancies run up to `occupancy_cap` per (site, spin) atom.
inline ExactDistribution enumerate_bgd(const DilutedModel& m, const Window& window,
                                       const ParticleConfiguration& eta, int occupancy_cap = 1) {
  if (window.lkind != Window::LocKind::sites)
    raise(errc::config_error, "enumeration needs a site-list window");
  if (m.enum_spins.empty())
    raise(errc::config_error, "model does not declare a finite spin set");

  struct Atom {
    Particle particle;
    double mass;
  };
  std::vector<Atom> atoms;
  for (const Location& s : window.sites)
    for (const Spin& sp : m.enum_spins) {
      if (!window.spins.contains(sp)) continue;
      Window unit = Window::lattice_sites({s}, SpinSet::of_tags({sp.tag}));
      atoms.push_back({Particle{s, sp}, m.intensity_mass(unit)});
    }

  double states = std::pow(static_cast<double>(occupancy_cap + 1),
                           static_cast<double>(atoms.size()));
  if (states > 1e7)
    raise(errc::state_space_too_large,
          "state space of " + std::to_string(states) + " configurations");

  ExactDistribution dist;
  double zsum = 0;

  // depth-first over multiplicity vectors, telescoping H as particles enter
  struct Frame {
    ParticleConfiguration sigma;      // particles inside the window
    ParticleConfiguration with_eta;   // eta + sigma, for leap evaluation
    double log_poisson_weight = 0;    // sum of m log(mass) - log(m!)
    double energy = 0;
  };
  std::vector<double> logfact(occupancy_cap + 1, 0.0);
  for (int i = 2; i <= occupancy_cap; ++i) logfact[i] = logfact[i - 1] + std::log(i);

  auto recurse = [&](auto&& self, std::size_t idx, Frame& f) -> void {
    if (idx == atoms.size()) {
      double w = f.energy == kInf ? 0.0 : std::exp(f.log_poisson_weight - f.energy);
      zsum += w;
      if (w > 0) dist.atoms.emplace_back(f.sigma, w);
      return;
    }
    self(self, idx + 1, f);  // multiplicity 0
    const Atom& a = atoms[idx];
    if (a.mass <= 0) return;
    Frame g = f;
    for (int mult = 1; mult <= occupancy_cap; ++mult) {
      double leap = m.energy_leap(g.with_eta, a.particle);
      g.energy += leap;
      if (g.energy == kInf) break;  // hardcore prefixes never recover
      g.sigma.add(a.particle);
      g.with_eta.add(a.particle);
      g.log_poisson_weight += std::log(a.mass) - (logfact[mult] - logfact[mult - 1]);
      self(self, idx + 1, g);
    }
  };
  Frame root;
  root.with_eta = eta;
  recurse(recurse, 0, root);

  double nu_mass = 0;
  for (const Atom& a : atoms) nu_mass += a.mass;
  dist.z = std::exp(-nu_mass) * zsum;
  dist.finalize();
  return dist;
}

// ---------------------------------------------------------------------------

struct ComparisonReport {
  double tv = 0;
  double chi_square = 0;
  double p_value = 1;
  std::uint64_t sample_count = 0;
  std::uint64_t other_count = 0;  // samples outside the exact support
};

inline ComparisonReport compare(const std::vector<ParticleConfiguration>& samples,
                                const ExactDistribution& exact) {
  ComparisonReport rep;
  rep.sample_count = samples.size();
  std::map<ParticleConfiguration, std::uint64_t> counts;
  for (const auto& s : samples) ++counts[s];

  const double n = static_cast<double>(samples.size());
  std::vector<double> observed, expected;
  double tv = 0;
  for (const auto& [cfg, p] : exact.atoms) {
    auto it = counts.find(cfg);
    double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    if (it != counts.end()) counts.erase(it);
    tv += std::fabs(c / n - p);
    observed.push_back(c);
    expected.push_back(n * p);
  }
  for (const auto& [cfg, c] : counts) {
    rep.other_count += c;
    tv += static_cast<double>(c) / n;
  }
  rep.tv = tv / 2.0;
  auto chi = stats::chi_square_test(observed, expected);
  rep.chi_square = chi.statistic;
  rep.p_value = chi.p_value;
  if (rep.other_count > 0) {  // an impossible configuration was sampled
    rep.chi_square = kInf;
    rep.p_value = 0.0;
  }
  return rep;
}

}  // namespace ffg
