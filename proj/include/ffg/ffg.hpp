#pragma once

// Backward clan-of-ancestors construction and the exact sampler built on it.
//
// The free process puts cylinders (basis, birth, lifespan, flag) down with
// intensity nu x e^{-Delta E} Leb x Exp(1) x U[0,1]. Generation 0 holds the
// cylinders alive at time 0 with basis in the root window; each further
// generation is a Poisson draw on the union of the first-generation-ancestor
// regions P(C), realized cylinder by cylinder with membership rejection
// against previously processed regions so the union stays a single Poisson
// process. Backward times are generated lazily (birth = parent birth minus
// an Exp(1) gap, lifespan conditioned to straddle the parent birth), which
// is exact by memorylessness.
//
// Thinning then sweeps the finite clan in increasing birth order and keeps a
// cylinder iff its flag undercuts the acceptance probability against the
// kept-and-alive configuration plus the fixed boundary. Kept generation-0
// bases are an exact draw from the Boltzmann-Gibbs distribution (window
// scope) or from the unique Gibbs measure restricted to the window
// (infinite scope, valid when the model is heavily diluted).

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "ffg/model.hpp"

namespace ffg {

struct Cylinder {
  Particle basis;
  double birth = 0;
  double lifespan = 0;
  double flag = 0;
  std::uint32_t id = 0;
  std::uint32_t generation = 0;
  std::uint32_t root_index = 0;  // which root window seeded its ancestry line
  bool alive_at(double t) const { return birth <= t && t < birth + lifespan; }
};

struct ClanBudget {
  std::size_t max_cylinders = 1000000;
  std::size_t max_generations = 10000;
};

enum class ClanScope {
  window_local,     // births restricted to the root window: local dynamics
  infinite_volume,  // unrestricted ancestors: needs a heavily diluted model
};

struct StreamFamily {
  std::uint64_t seed = 0;
  std::uint32_t hi = 0;
  Rng at(std::uint32_t sub) const { return Rng(seed, stream_id(hi, sub)); }
};

struct Clan {
  std::vector<Window> roots;
  ClanScope scope = ClanScope::window_local;
  std::vector<Cylinder> cylinders;              // id == index, generations contiguous
  std::vector<std::size_t> generation_offsets;  // offsets[g] = first index of generation g
  std::vector<std::uint64_t> candidate_counts;  // per cylinder, before exclusion

  std::size_t generations() const {
    return generation_offsets.empty() ? 0 : generation_offsets.size();
  }
  std::size_t generation_size(std::size_t g) const {
    std::size_t lo = generation_offsets[g];
    std::size_t hi = g + 1 < generation_offsets.size() ? generation_offsets[g + 1]
                                                       : cylinders.size();
    return hi - lo;
  }
};

namespace detail {

inline bool in_root_region(const std::vector<Window>& roots, const Particle& basis, double birth,
                           double lifespan) {
  if (!(birth <= 0 && 0 < birth + lifespan)) return false;
  for (const Window& w : roots)
    if (w.contains(basis)) return true;
  return false;
}

// membership in P(C'): basis impacts basis(C') and the candidate straddles
// the birth of C'
inline bool in_ancestor_region(const DilutedModel& m, const Cylinder& target,
                               const Particle& basis, double birth, double lifespan) {
  if (!(birth < target.birth && target.birth < birth + lifespan)) return false;
  return m.impact_region(target.basis).contains(basis);
}

}  // namespace detail

// Generation 0: Poisson(e^{-Delta E} nu(W)) cylinders alive at time 0.
inline std::vector<Cylinder> sample_generation0(const DilutedModel& m, const Window& window,
                                                Rng& rng) {
  std::vector<Cylinder> out;
  double mass = std::exp(-m.energy_loss_bound) * m.intensity_mass(window);
  std::uint64_t n = rng.poisson(mass);
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Cylinder c;
    c.basis = m.intensity_sample(window, rng);
    double age = rng.exponential();
    c.birth = -age;
    c.lifespan = age + rng.exponential();
    c.flag = rng.uniform();
    out.push_back(c);
  }
  return out;
}

// First-generation ancestor candidates of `parent`, already filtered by the
// exclusion regions (processed cylinders and root regions). `candidate_total`
// reports the pre-exclusion Poisson draw.
inline std::vector<Cylinder> sample_ancestors(const DilutedModel& m, const Clan& clan,
                                              std::size_t processed_upto, const Cylinder& parent,
                                              const Window& basis_region, Rng& rng,
                                              std::uint64_t* candidate_total = nullptr) {
  std::vector<Cylinder> out;
  double mass = std::exp(-m.energy_loss_bound) * m.intensity_mass(basis_region);
  std::uint64_t n = rng.poisson(mass);
  if (candidate_total) *candidate_total = n;
  for (std::uint64_t i = 0; i < n; ++i) {
    Cylinder c;
    c.basis = m.intensity_sample(basis_region, rng);
    double gap = rng.exponential();
    c.birth = parent.birth - gap;
    c.lifespan = gap + rng.exponential();
    c.flag = rng.uniform();
    bool excluded = detail::in_root_region(clan.roots, c.basis, c.birth, c.lifespan);
    for (std::size_t j = 0; !excluded && j < processed_upto; ++j)
      excluded = detail::in_ancestor_region(m, clan.cylinders[j], c.basis, c.birth, c.lifespan);
    if (!excluded) out.push_back(c);
  }
  return out;
}

inline Clan build_clan(const DilutedModel& m, const std::vector<Window>& roots, ClanScope scope,
                       const ClanBudget& budget, const StreamFamily& streams) {
  if (scope == ClanScope::window_local && roots.size() != 1)
    raise(errc::config_error, "window_local clans take a single root");
  Clan clan;
  clan.roots = roots;
  clan.scope = scope;

  {  // generation 0, per root window, overlap resolved towards earlier roots
    Rng rng = streams.at(0);
    for (std::size_t ri = 0; ri < roots.size(); ++ri) {
      std::vector<Cylinder> g0 = sample_generation0(m, roots[ri], rng);
      for (Cylinder& c : g0) {
        bool dup = false;
        for (std::size_t rj = 0; rj < ri && !dup; ++rj) dup = roots[rj].contains(c.basis);
        if (dup) continue;
        c.id = static_cast<std::uint32_t>(clan.cylinders.size());
        c.generation = 0;
        c.root_index = static_cast<std::uint32_t>(ri);
        clan.cylinders.push_back(c);
      }
    }
    clan.generation_offsets.push_back(0);
  }
  clan.candidate_counts.assign(clan.cylinders.size(), 0);

  std::size_t next = 0;
  while (next < clan.cylinders.size()) {
    const std::uint32_t gen = clan.cylinders[next].generation;
    if (gen + 1 > budget.max_generations)
      raise(errc::budget_exceeded, "clan generation count exceeded " +
                                       std::to_string(budget.max_generations));
    // process the whole current generation; survivors form generation gen+1
    std::size_t gen_end = clan.cylinders.size();
    bool appended = false;
    while (next < gen_end) {
      const Cylinder parent = clan.cylinders[next];
      Window region = m.impact_region(parent.basis);
      if (scope == ClanScope::window_local)  // local dynamics: births on the root only
        region = intersect_windows(region, clan.roots.front());
      std::uint64_t raw = 0;
      Rng rng = streams.at(parent.id + 1);
      std::vector<Cylinder> kids =
          region.is_empty()
              ? std::vector<Cylinder>{}
              : sample_ancestors(m, clan, next, parent, region, rng, &raw);
      clan.candidate_counts[parent.id] = raw;
      for (Cylinder& k : kids) {
        if (clan.cylinders.size() >= budget.max_cylinders)
          raise(errc::budget_exceeded,
                "clan size exceeded " + std::to_string(budget.max_cylinders) +
                    " cylinders; the model is not effectively dilute at these parameters");
        k.id = static_cast<std::uint32_t>(clan.cylinders.size());
        k.generation = parent.generation + 1;
        k.root_index = parent.root_index;
        clan.cylinders.push_back(k);
        clan.candidate_counts.push_back(0);
        appended = true;
      }
      ++next;
    }
    if (appended) clan.generation_offsets.push_back(gen_end);
  }
  return clan;
}

inline Clan build_clan(const DilutedModel& m, const Window& root, ClanScope scope,
                       const ClanBudget& budget, const StreamFamily& streams) {
  return build_clan(m, std::vector<Window>{root}, scope, budget, streams);
}

// ---------------------------------------------------------------------------
// Thinning: deterministic keep/delete sweep given the clan and its flags.

struct ThinResult {
  std::vector<char> kept;           // indexed by cylinder id
  std::vector<std::uint32_t> order; // ids in increasing birth order
};

// Ancestor arcs (ancestor -> descendant), computed pairwise from the declared
// impact geometry. Used by diagnostics, serialization and the mixing probe.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> clan_arcs(const DilutedModel& m,
                                                                      const Clan& clan) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
  const auto& cs = clan.cylinders;
  for (std::size_t a = 0; a < cs.size(); ++a)
    for (std::size_t d = 0; d < cs.size(); ++d) {
      if (a == d) continue;
      if (detail::in_ancestor_region(m, cs[d], cs[a].basis, cs[a].birth, cs[a].lifespan))
        arcs.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(d));
    }
  return arcs;
}

template <typename AcceptFn>
ThinResult thin_clan_with(const Clan& clan, const ParticleConfiguration& boundary,
                          AcceptFn&& acceptance) {
  ThinResult res;
  const auto& cs = clan.cylinders;
  res.kept.assign(cs.size(), 0);
  res.order.resize(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) res.order[i] = static_cast<std::uint32_t>(i);
  std::sort(res.order.begin(), res.order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return cs[a].birth < cs[b].birth; });
  for (std::size_t i = 1; i < res.order.size(); ++i)
    if (cs[res.order[i - 1]].birth == cs[res.order[i]].birth)
      raise(errc::tie_on_birth_times, "two clan cylinders share a birth time");

  for (std::uint32_t id : res.order) {
    const Cylinder& c = cs[id];
    ParticleConfiguration xi = boundary;
    for (std::uint32_t j : res.order) {
      if (j == id) break;
      if (res.kept[j] && cs[j].alive_at(c.birth)) xi.add(cs[j].basis);
    }
    double prob = acceptance(xi, c);
    if (c.flag < prob) res.kept[id] = 1;
  }
  return res;
}

inline ThinResult thin_clan(const DilutedModel& m, const Clan& clan,
                            const ParticleConfiguration& boundary) {
  return thin_clan_with(clan, boundary, [&](const ParticleConfiguration& xi, const Cylinder& c) {
    return acceptance_probability(m, xi, c.basis).value;
  });
}

// Kept cylinders alive at time t, as a particle configuration. With
// only_generation0 the result is the window sample (clan duplicates into
// generation 0 were already rejected by construction, so generation 0 holds
// every clan cylinder alive at 0 with basis in the root).
inline ParticleConfiguration kept_configuration(const Clan& clan, const ThinResult& thin, double t,
                                                bool only_generation0 = true) {
  ParticleConfiguration out;
  std::size_t g0_end = clan.generation_offsets.size() > 1 ? clan.generation_offsets[1]
                                                          : clan.cylinders.size();
  for (std::size_t i = 0; i < clan.cylinders.size(); ++i) {
    if (only_generation0 && i >= g0_end) break;
    if (thin.kept[i] && clan.cylinders[i].alive_at(t)) out.add(clan.cylinders[i].basis);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perfect sampling and forward dynamics.

inline ParticleConfiguration perfect_sample(const DilutedModel& m, const Window& window,
                                            const ParticleConfiguration& boundary,
                                            ClanScope scope, const ClanBudget& budget,
                                            const StreamFamily& streams,
                                            Clan* clan_out = nullptr,
                                            ThinResult* thin_out = nullptr) {
  Clan clan = build_clan(m, window, scope, budget, streams);
  ThinResult thin = thin_clan(m, clan, boundary);
  ParticleConfiguration out = kept_configuration(clan, thin, 0.0);
  if (clan_out) *clan_out = std::move(clan);
  if (thin_out) *thin_out = std::move(thin);
  return out;
}

enum class EventKind : std::uint8_t { birth, death };

struct ForwardEvent {
  double time = 0;
  EventKind kind = EventKind::birth;
  Particle particle;
};

struct ForwardResult {
  ParticleConfiguration state;        // at the horizon
  std::vector<ForwardEvent> events;   // accepted births and deaths, in time order
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
};

// Event-driven forward evolution on a window with fixed boundary condition.
// Initial particles carry flag 0 (kept unconditionally) and die at rate 1.
inline ForwardResult forward_dynamics(const DilutedModel& m, const Window& window,
                                      const ParticleConfiguration& boundary,
                                      const ParticleConfiguration& initial, double horizon,
                                      Rng& rng, bool record_events = false) {
  if (!(horizon > 0)) raise(errc::config_error, "forward horizon must be positive");
  ForwardResult res;
  using QueueEntry = std::pair<double, Particle>;
  auto cmp = [](const QueueEntry& a, const QueueEntry& b) { return a.first > b.first; };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, decltype(cmp)> deaths(cmp);

  res.state = initial;
  for (auto& [p, mult] : initial.entries())
    for (int i = 0; i < mult; ++i) deaths.emplace(rng.exponential(), p);

  const double rate = std::exp(-m.energy_loss_bound) * m.intensity_mass(window);
  double t = 0;
  while (true) {
    double t_next = rate > 0 ? t + rng.exponential() / rate : kInf;
    double stop = std::min(t_next, horizon);
    while (!deaths.empty() && deaths.top().first <= stop) {
      auto [td, p] = deaths.top();
      deaths.pop();
      res.state.remove(p);
      if (record_events) res.events.push_back({td, EventKind::death, p});
    }
    if (t_next > horizon) break;
    t = t_next;
    ++res.proposals;
    Particle cand = m.intensity_sample(window, rng);
    double u = rng.uniform();
    ParticleConfiguration xi = superpose(res.state, boundary);
    if (u < acceptance_probability(m, xi, cand).value) {
      ++res.accepted;
      res.state.add(cand);
      deaths.emplace(t + rng.exponential(), cand);
      if (record_events) res.events.push_back({t, EventKind::birth, cand});
    }
  }
  return res;
}

}  // namespace ffg
