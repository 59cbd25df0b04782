#pragma once

// Batch front door shared by the CLI binary and the test-suites: JSON run
// configs in, deterministic artifacts out (result.json, series.csv, optional
// clan.json). All randomness flows from the single seed through the stream
// layout: replica i draws from streams with high word i+1.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include "ffg/contour.hpp"
#include "ffg/coupling.hpp"
#include "ffg/diluteness.hpp"
#include "ffg/ffg.hpp"
#include "ffg/models.hpp"
#include "ffg/oracle.hpp"
#include "ffg/pirogov_sinai.hpp"
#include "ffg/serialize.hpp"
#include "ffg/stats.hpp"

namespace ffg::run {

inline unsigned worker_count() {
  if (const char* env = std::getenv("FFG_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// replica-indexed work with deterministic output slots
template <typename F>
void parallel_replicas(std::uint64_t n, F&& fn) {
  unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), n == 0 ? 1 : n));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (!failed.load()) {
        std::uint64_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_mu);
          if (!err) err = std::current_exception();
          failed.store(true);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Config parsing.

inline models::StepTable step_table_from_json(const Json& j) {
  models::StepTable t;
  for (const Json& v : j.at("breaks")) t.breaks.push_back(v.get<double>());
  for (const Json& v : j.at("values"))
    t.values.push_back(v.is_string() ? kInf : v.get<double>());
  t.check();
  return t;
}

inline Window window_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") {
    Box b;
    const Json& lo = j.at("lo");
    b.dim = static_cast<std::uint8_t>(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] = lo[i].get<double>();
      b.hi[i] = j.at("hi")[i].get<double>();
    }
    return Window::continuum_box(b);
  }
  if (kind == "lattice-box") {
    std::vector<long> lo, hi;
    for (const Json& v : j.at("lo")) lo.push_back(v.get<long>());
    for (const Json& v : j.at("hi")) hi.push_back(v.get<long>());
    return Window::lattice_sites(lattice_box_sites(lo, hi));
  }
  raise(errc::config_error, "unknown window kind " + kind);
}

inline ClanBudget budget_from_json(const Json& cfg) {
  ClanBudget b;
  if (cfg.contains("budget")) {
    const Json& j = cfg.at("budget");
    b.max_cylinders = j.value("max_cylinders", b.max_cylinders);
    b.max_generations = j.value("max_generations", b.max_generations);
  }
  return b;
}

// Builds the model named by the config. Contour models need the window too
// (the containment clause is part of the Hamiltonian).
inline DilutedModel model_from_json(const Json& cfg) {
  const Json& j = cfg.at("model");
  std::string type = j.at("type").get<std::string>();
  if (type == "wr-continuum")
    return models::wr_continuum({j.value("lambda_plus", j.value("lambda", 1.0)),
                                 j.value("lambda_minus", j.value("lambda", 1.0)),
                                 j.at("radius").get<double>(), j.value("dim", 2)});
  if (type == "wr-discrete")
    return models::wr_discrete({j.value("lambda_plus", j.value("lambda", 1.0)),
                                j.value("lambda_minus", j.value("lambda", 1.0)),
                                j.at("radius").get<long>(), j.value("dim", 2)});
  if (type == "wr-generalized") {
    models::WRGeneralizedParams p;
    p.lambda_plus = j.value("lambda_plus", j.value("lambda", 1.0));
    p.lambda_minus = j.value("lambda_minus", j.value("lambda", 1.0));
    p.h = j.contains("h") ? step_table_from_json(j.at("h")) : models::StepTable::zero();
    p.j = j.contains("j") ? step_table_from_json(j.at("j")) : models::StepTable::zero();
    p.dim = j.value("dim", 2);
    return models::wr_generalized(p);
  }
  if (type == "thin-rods") {
    models::ThinRodsParams p;
    p.lambda = j.at("lambda").get<double>();
    p.half_length = j.at("half_length").get<double>();
    if (j.contains("rho") && j.at("rho").is_array()) {
      p.rho.uniform = false;
      for (const Json& a : j.at("rho"))
        p.rho.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    return models::thin_rods(p);
  }
  if (type == "wr-tolerant") {
    models::TolerantWRParams p;
    p.lambda_plus = j.value("lambda_plus", j.value("lambda", 1.0));
    p.lambda_minus = j.value("lambda_minus", j.value("lambda", 1.0));
    p.radius = j.at("radius").get<double>();
    p.tolerance = j.at("k").get<long>();
    p.dim = j.value("dim", 2);
    p.discrete = j.value("discrete", false);
    return models::wr_tolerant(p);
  }
  if (type == "symbiotic")
    return models::symbiotic({j.at("lambda_host").get<double>(),
                              j.at("lambda_parasite").get<double>(), j.at("J").get<double>(),
                              j.at("radius").get<double>(), j.value("dim", 2)});
  if (type == "ising-contours") {
    double beta = j.at("beta").get<double>();
    Window w = window_from_json(cfg.at("window"));
    if (w.lkind != Window::LocKind::sites)
      raise(errc::config_error, "ising-contours takes a lattice-box window of dual vertices");
    long x0 = w.sites.front().site(0), y0 = w.sites.front().site(1);
    long x1 = w.sites.back().site(0), y1 = w.sites.back().site(1);
    contour::DualBox box{x0, y0, static_cast<int>(x1 - x0 + 1), static_cast<int>(y1 - y0 + 1)};
    // window-complete catalog via the cycle space
    contour::ShapeCatalog cat;
    for (const contour::Support& sub : contour::even_subgraphs(box))
      for (const contour::Contour& c : contour::split_into_contours(sub)) cat.add(c.shape());
    if (cat.size() == 0) cat.add(contour::Support{{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 0}});
    return contour::ising_contour_model(beta, cat, box, 1e-6, true);
  }
  raise(errc::config_error, "unknown model type " + type);
}

struct Artifacts {
  Json result;
  std::string series_csv;  // empty if the subcommand emits none
  Json clan;               // optional clan dump
  bool has_clan = false;
  int exit_code = 0;
};

namespace detail {

inline Json histogram_json(const std::map<long, std::uint64_t>& h) {
  Json out = Json::array();
  for (auto& [k, v] : h) out.push_back(Json::array({k, v}));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands.

inline Artifacts run_alpha(const Json& cfg, std::uint64_t) {
  Artifacts art;
  const Json& j = cfg.at("model");
  std::string type = j.at("type").get<std::string>();
  DilutenessReport rep;
  if (type == "wr-continuum")
    rep = alpha_wr_continuum({j.value("lambda_plus", j.value("lambda", 1.0)),
                              j.value("lambda_minus", j.value("lambda", 1.0)),
                              j.at("radius").get<double>(), j.value("dim", 2)});
  else if (type == "wr-discrete")
    rep = alpha_wr_discrete({j.value("lambda_plus", j.value("lambda", 1.0)),
                             j.value("lambda_minus", j.value("lambda", 1.0)),
                             j.at("radius").get<long>(), j.value("dim", 2)});
  else if (type == "thin-rods") {
    models::ThinRodsParams p;
    p.lambda = j.at("lambda").get<double>();
    p.half_length = j.at("half_length").get<double>();
    rep = alpha_thin_rods(p);
  } else if (type == "symbiotic")
    rep = alpha_symbiotic({j.at("lambda_host").get<double>(),
                           j.at("lambda_parasite").get<double>(), j.at("J").get<double>(),
                           j.at("radius").get<double>(), j.value("dim", 2)});
  else if (type == "wr-generalized") {
    models::WRGeneralizedParams p;
    p.lambda_plus = j.value("lambda_plus", j.value("lambda", 1.0));
    p.lambda_minus = j.value("lambda_minus", j.value("lambda", 1.0));
    p.h = j.contains("h") ? step_table_from_json(j.at("h")) : models::StepTable::zero();
    p.j = j.contains("j") ? step_table_from_json(j.at("j")) : models::StepTable::zero();
    p.dim = j.value("dim", 2);
    rep = alpha_wr_generalized(p);
  } else if (type == "wr-tolerant") {
    models::TolerantWRParams p;
    p.lambda_plus = j.value("lambda_plus", j.value("lambda", 1.0));
    p.lambda_minus = j.value("lambda_minus", j.value("lambda", 1.0));
    p.radius = j.at("radius").get<double>();
    p.tolerance = j.at("k").get<long>();
    p.discrete = j.value("discrete", false);
    rep = alpha_wr_tolerant(p);
  } else if (type == "ising-contours") {
    int lmax = j.value("lmax", 10);
    contour::ShapeCatalog cat = contour::build_catalog(lmax);
    IsingAlphaReport ia = alpha_ising(j.at("beta").get<double>(), cat);
    art.result["alpha_ic"] = ia.alpha_ic;
    art.result["alpha_ic0"] = ia.alpha_ic0;
    art.result["tail_bound"] = ia.tail_bound;
    art.result["beta_threshold"] = ia.beta_threshold;
    art.result["lmax"] = lmax;
    return art;
  } else {
    raise(errc::config_error, "no diluteness coefficient registered for " + type);
  }
  art.result["alpha"] = rep.alpha;
  art.result["regime"] = rep.regime == DilutenessRegime::heavily_diluted ? "heavily-diluted"
                         : rep.regime == DilutenessRegime::well_diluted  ? "well-diluted"
                                                                         : "unknown";
  art.result["method"] = rep.method == AlphaMethod::closed_form      ? "closed-form"
                         : rep.method == AlphaMethod::truncated_sum  ? "truncated-sum"
                                                                     : "supremum-sampled";
  for (auto& [k, v] : rep.details) art.result["details"][k] = v;
  return art;
}

inline ClanScope scope_from_json(const Json& cfg) {
  std::string s = cfg.value("scope", "local");
  if (s == "local") return ClanScope::window_local;
  if (s == "infinite") return ClanScope::infinite_volume;
  raise(errc::config_error, "scope must be local or infinite");
}

inline Artifacts run_sample(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  DilutedModel m = model_from_json(cfg);
  Window w = window_from_json(cfg.at("window"));
  ParticleConfiguration boundary =
      cfg.contains("boundary") ? config_from_json(cfg.at("boundary")) : ParticleConfiguration{};
  ClanScope scope = scope_from_json(cfg);
  ClanBudget budget = budget_from_json(cfg);
  std::uint64_t replicas = cfg.value("replicas", 1);
  bool emit = cfg.value("emit_samples", replicas <= 64);

  std::vector<ParticleConfiguration> samples(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    StreamFamily fam{seed, static_cast<std::uint32_t>(i + 1)};
    samples[i] = perfect_sample(m, w, boundary, scope, budget, fam);
  });

  std::map<long, std::uint64_t> hist;
  double mean = 0;
  for (auto& s : samples) {
    ++hist[s.total_count()];
    mean += static_cast<double>(s.total_count());
  }
  art.result["replicas"] = replicas;
  art.result["mean_count"] = replicas ? mean / static_cast<double>(replicas) : 0.0;
  art.result["count_histogram"] = detail::histogram_json(hist);
  if (emit) {
    Json arr = Json::array();
    for (auto& s : samples) arr.push_back(config_to_json(s));
    art.result["samples"] = arr;
  }
  if (cfg.value("dump_clan", false)) {
    StreamFamily fam{seed, 1};
    Clan clan;
    ThinResult thin;
    perfect_sample(m, w, boundary, scope, budget, fam, &clan, &thin);
    art.clan = clan_to_json(m, clan, &thin);
    art.has_clan = true;
  }
  std::vector<std::vector<std::string>> rows;
  for (auto& [k, v] : hist) rows.push_back({std::to_string(k), std::to_string(v)});
  art.series_csv = csv_table({"count", "frequency"}, rows);
  return art;
}

inline Artifacts run_forward(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  DilutedModel m = model_from_json(cfg);
  Window w = window_from_json(cfg.at("window"));
  ParticleConfiguration boundary =
      cfg.contains("boundary") ? config_from_json(cfg.at("boundary")) : ParticleConfiguration{};
  ParticleConfiguration initial =
      cfg.contains("initial") ? config_from_json(cfg.at("initial")) : ParticleConfiguration{};
  double horizon = cfg.at("horizon").get<double>();
  std::uint64_t replicas = cfg.value("replicas", 1);

  std::vector<long> final_counts(replicas);
  std::vector<ParticleConfiguration> finals(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    Rng rng(seed, stream_id(static_cast<std::uint32_t>(i + 1), 0));
    ForwardResult r = forward_dynamics(m, w, boundary, initial, horizon, rng);
    finals[i] = std::move(r.state);
    final_counts[i] = finals[i].total_count();
  });
  std::map<long, std::uint64_t> hist;
  double mean = 0;
  for (long c : final_counts) {
    ++hist[c];
    mean += static_cast<double>(c);
  }
  art.result["replicas"] = replicas;
  art.result["horizon"] = horizon;
  art.result["mean_count"] = replicas ? mean / static_cast<double>(replicas) : 0.0;
  art.result["count_histogram"] = detail::histogram_json(hist);
  if (cfg.value("record_events", false)) {
    Rng rng(seed, stream_id(1, 0));
    ForwardResult r = forward_dynamics(m, w, boundary, initial, horizon, rng, true);
    Json ev = Json::array();
    ParticleConfiguration running = initial;
    for (const ForwardEvent& e : r.events) {
      if (e.kind == EventKind::birth) running.add(e.particle);
      else running.remove(e.particle);
      Json rec;
      rec["time"] = e.time;
      rec["event"] = e.kind == EventKind::birth ? "birth" : "death";
      rec["location"] = location_to_json(e.particle.loc);
      rec["spin"] = spin_to_string(e.particle.spin);
      rec["count_after"] = running.total_count();
      ev.push_back(rec);
    }
    art.result["trajectory"] = ev;
  }
  std::vector<std::vector<std::string>> rows;
  for (auto& [k, v] : hist) rows.push_back({std::to_string(k), std::to_string(v)});
  art.series_csv = csv_table({"count", "frequency"}, rows);
  return art;
}

inline Artifacts run_clan_stats(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  DilutedModel m = model_from_json(cfg);
  Window w = window_from_json(cfg.at("window"));
  ClanScope scope = scope_from_json(cfg);
  ClanBudget budget = budget_from_json(cfg);
  std::uint64_t replicas = cfg.value("replicas", 1000);

  std::vector<std::uint64_t> sizes(replicas), gens(replicas), gen0(replicas);
  std::vector<std::vector<std::uint64_t>> cands(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    StreamFamily fam{seed, static_cast<std::uint32_t>(i + 1)};
    Clan clan = build_clan(m, w, scope, budget, fam);
    sizes[i] = clan.cylinders.size();
    gens[i] = clan.generations();
    gen0[i] = clan.generation_size(0);
    cands[i] = clan.candidate_counts;
  });
  std::map<long, std::uint64_t> size_hist, gen_hist;
  double mean_size = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    ++size_hist[static_cast<long>(sizes[i])];
    ++gen_hist[static_cast<long>(gens[i])];
    mean_size += static_cast<double>(sizes[i]);
  }
  std::vector<double> gen0_counts, cand_counts;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    gen0_counts.push_back(static_cast<double>(gen0[i]));
    for (std::uint64_t c : cands[i]) cand_counts.push_back(static_cast<double>(c));
  }
  art.result["replicas"] = replicas;
  art.result["mean_clan_size"] = mean_size / static_cast<double>(replicas);
  art.result["size_histogram"] = detail::histogram_json(size_hist);
  art.result["generation_histogram"] = detail::histogram_json(gen_hist);
  art.result["gen0_mean"] = stats::mean(gen0_counts);
  art.result["gen0_variance"] = stats::variance(gen0_counts);
  art.result["candidate_mean"] = stats::mean(cand_counts);
  art.result["candidate_variance"] = stats::variance(cand_counts);
  std::vector<std::vector<std::string>> rows;
  for (auto& [k, v] : size_hist) rows.push_back({std::to_string(k), std::to_string(v)});
  art.series_csv = csv_table({"clan_size", "frequency"}, rows);
  return art;
}

inline Artifacts run_mixing(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  DilutedModel m = model_from_json(cfg);
  double width = cfg.value("strip_width", 1.0);
  double length = cfg.value("strip_length", 20.0);
  std::uint64_t replicas = cfg.value("replicas", 10000);
  Window wf = Window::continuum_box(make_box({0.0, 0.0}, {width, length}));
  std::vector<std::pair<double, Window>> far;
  for (const Json& dj : cfg.at("distances")) {
    double d = dj.get<double>();
    far.push_back({d, Window::continuum_box(make_box({width + d, 0.0}, {2 * width + d, length}))});
  }
  MixingReport rep = mixing_estimate(m, wf, far, replicas, seed, budget_from_json(cfg));
  art.result["slope"] = rep.slope;
  art.result["intercept"] = rep.intercept;
  art.result["r2"] = rep.r2;
  Json rows = Json::array();
  std::vector<std::vector<std::string>> csv;
  for (const MixingRow& r : rep.rows) {
    rows.push_back(Json{{"distance", r.distance},
                        {"interact_prob", r.interact_prob},
                        {"replicas", r.replicas}});
    csv.push_back({format_double(r.distance), format_double(r.interact_prob),
                   std::to_string(r.replicas)});
  }
  art.result["rows"] = rows;
  art.series_csv = csv_table({"distance", "interact_prob", "replicas"}, csv);
  return art;
}

inline Artifacts run_couple(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  double lambda0 = cfg.at("lambda0").get<double>();
  double radius = cfg.value("radius", 1.0);
  int dim = cfg.value("dim", 2);
  Window w = window_from_json(cfg.at("window"));
  std::vector<double> eps;
  for (const Json& e : cfg.at("eps_list")) eps.push_back(e.get<double>());
  std::uint64_t seeds = cfg.value("seeds", 1000);
  ClanBudget budget = budget_from_json(cfg);
  MajorantCoupling c = wr_fugacity_coupling(lambda0, radius, dim);

  std::vector<double> eps_all = eps;
  if (std::find(eps_all.begin(), eps_all.end(), 0.0) == eps_all.end()) eps_all.push_back(0.0);
  std::vector<std::vector<char>> agree(eps.size(), std::vector<char>(seeds, 0));
  parallel_replicas(seeds, [&](std::uint64_t i) {
    StreamFamily fam{seed, static_cast<std::uint32_t>(i + 1)};
    auto samples = coupled_samples(c, w, eps_all, budget, fam);
    const ParticleConfiguration& base = samples.at(0.0);
    for (std::size_t k = 0; k < eps.size(); ++k)
      agree[k][i] = samples.at(eps[k]) == base ? 1 : 0;
  });
  Json rows = Json::array();
  std::vector<std::vector<std::string>> csv;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::uint64_t a = 0;
    for (char v : agree[k]) a += v;
    double frac = static_cast<double>(a) / static_cast<double>(seeds);
    rows.push_back(Json{{"eps", eps[k]}, {"agreement", frac}});
    csv.push_back({format_double(eps[k]), format_double(frac)});
  }
  art.result["rows"] = rows;
  art.result["seeds"] = seeds;
  art.series_csv = csv_table({"eps", "agreement"}, csv);
  return art;
}

inline Artifacts run_discretize(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  std::string family = cfg.value("family", "wr-spatial");
  Window w = window_from_json(cfg.at("window"));
  std::vector<double> eps;
  for (const Json& e : cfg.at("eps_list")) eps.push_back(e.get<double>());
  std::uint64_t replicas = cfg.value("replicas", 1000);
  ClanBudget budget = budget_from_json(cfg);

  DiscretizedFamily fam_model;
  if (family == "wr-spatial") {
    double eps_max = *std::max_element(eps.begin(), eps.end());
    fam_model = wr_spatial_discretization(cfg.at("lambda0").get<double>(),
                                          cfg.value("radius", 1.0), cfg.value("dim", 2),
                                          cfg.value("delta", 2 * eps_max));
  } else if (family == "rods-angles") {
    fam_model = rods_angle_discretization(cfg.at("lambda").get<double>(),
                                          cfg.at("half_length").get<double>());
  } else {
    raise(errc::config_error, "unknown discretization family " + family);
  }

  std::vector<std::map<double, bool>> agrees(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    StreamFamily fam{seed, static_cast<std::uint32_t>(i + 1)};
    agrees[i] = coupled_discretization(fam_model, w, eps, budget, fam).agrees_with_limit;
  });
  Json rows = Json::array();
  std::vector<std::vector<std::string>> csv;
  for (double e : eps) {
    std::uint64_t a = 0;
    for (auto& m : agrees) a += m.at(e) ? 1 : 0;
    double frac = static_cast<double>(a) / static_cast<double>(replicas);
    rows.push_back(Json{{"eps", e}, {"agreement", frac}});
    csv.push_back({format_double(e), format_double(frac)});
  }
  art.result["rows"] = rows;
  art.result["replicas"] = replicas;
  art.series_csv = csv_table({"eps", "agreement"}, csv);
  return art;
}

inline Artifacts run_ps_sample(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  const Json& pj = cfg.at("potts");
  ps::PSSpec spec;
  spec.potts = true;
  spec.q = pj.value("q", 2);
  spec.range = pj.value("range", 1);
  spec.beta = pj.at("beta").get<double>();
  const Json& wj = cfg.at("window_box");
  long x0 = wj.at("lo")[0].get<long>(), y0 = wj.at("lo")[1].get<long>();
  long x1 = wj.at("hi")[0].get<long>(), y1 = wj.at("hi")[1].get<long>();
  ps::Region window = ps::box_region(x0, y0, x1, y1);
  int vw = cfg.contains("vbox") ? cfg.at("vbox")[0].get<int>()
                                : static_cast<int>(x1 - x0 - 1);
  int vh = cfg.contains("vbox") ? cfg.at("vbox")[1].get<int>()
                                : static_cast<int>(y1 - y0 - 1);
  ps::PSCatalog cat = ps::build_ps_catalog(spec, vw, vh);
  std::int8_t label = static_cast<std::int8_t>(cfg.value("label", 1));
  std::uint64_t replicas = cfg.value("replicas", 1000);
  ps::Region core = ps::r_interior(window, spec.range);

  ps::AlignmentOptions opt;
  opt.clan_budget = budget_from_json(cfg);
  std::vector<std::vector<std::int8_t>> draws(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    ps::StreamCursor cur{seed, static_cast<std::uint32_t>(1 + i * 64)};
    ps::SpinPatch patch = ps::i_alignment_sample(cat, label, window, opt, cur);
    std::vector<std::int8_t> vals;
    for (const ps::Site& s : core) vals.push_back(patch.at(s));
    draws[i] = std::move(vals);
  });
  std::map<std::vector<std::int8_t>, std::uint64_t> freq;
  for (auto& d : draws) ++freq[d];
  Json rows = Json::array();
  std::vector<std::vector<std::string>> csv;
  for (auto& [pattern, count] : freq) {
    std::string key;
    for (std::int8_t v : pattern) key += std::to_string(static_cast<int>(v));
    rows.push_back(Json{{"pattern", key}, {"count", count}});
    csv.push_back({key, std::to_string(count)});
  }
  art.result["core_sites"] = core.size();
  art.result["replicas"] = replicas;
  art.result["catalog_shapes"] = cat.shapes.size();
  art.result["rows"] = rows;
  art.series_csv = csv_table({"pattern", "count"}, csv);
  return art;
}

inline Artifacts run_oracle_check(const Json& cfg, std::uint64_t seed) {
  Artifacts art;
  DilutedModel m = model_from_json(cfg);
  Window w = window_from_json(cfg.at("window"));
  ParticleConfiguration boundary =
      cfg.contains("boundary") ? config_from_json(cfg.at("boundary")) : ParticleConfiguration{};
  std::uint64_t replicas = cfg.value("replicas", 100000);
  double tv_threshold = cfg.value("tv_threshold", 0.02);
  double p_threshold = cfg.value("p_threshold", 0.001);
  ClanBudget budget = budget_from_json(cfg);

  ExactDistribution exact = enumerate_bgd(m, w, boundary, cfg.value("occupancy_cap", 1));
  std::vector<ParticleConfiguration> samples(replicas);
  parallel_replicas(replicas, [&](std::uint64_t i) {
    StreamFamily fam{seed, static_cast<std::uint32_t>(i + 1)};
    samples[i] = perfect_sample(m, w, boundary, ClanScope::window_local, budget, fam);
  });
  ComparisonReport rep = compare(samples, exact);
  art.result["tv"] = rep.tv;
  art.result["chi_square"] = std::isfinite(rep.chi_square) ? rep.chi_square : -1.0;
  art.result["p_value"] = rep.p_value;
  art.result["samples"] = rep.sample_count;
  art.result["other_count"] = rep.other_count;
  art.result["support_size"] = exact.atoms.size();
  bool pass = rep.tv < tv_threshold && rep.p_value > p_threshold;
  art.result["pass"] = pass;
  if (!pass) art.exit_code = 4;
  return art;
}

// reshape a result JSON into CSV series: pick an array of flat objects and
// emit the union of its scalar keys, the sweep variable first
inline Artifacts run_plot_data(const Json& cfg, std::uint64_t) {
  Artifacts art;
  std::ifstream in(cfg.at("input").get<std::string>());
  if (!in) raise(errc::config_error, "cannot open input result file");
  Json data = Json::parse(in);
  const Json* arr = nullptr;
  if (cfg.contains("array")) {
    const Json* cur = &data;
    std::string path = cfg.at("array").get<std::string>();
    std::size_t pos = 0;
    while (pos != std::string::npos && cur) {
      std::size_t dot = path.find('.', pos);
      std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
      cur = cur->contains(key) ? &cur->at(key) : nullptr;
      pos = dot == std::string::npos ? dot : dot + 1;
    }
    arr = cur;
  } else {
    for (auto& [k, v] : data.items())
      if (v.is_array() && !v.empty() && v.front().is_object()) {
        arr = &v;
        break;
      }
  }
  if (!arr || !arr->is_array()) raise(errc::config_error, "no row array found in input");
  std::set<std::string> keys;
  for (const Json& row : *arr)
    for (auto& [k, v] : row.items())
      if (v.is_number() || v.is_string() || v.is_boolean()) keys.insert(k);
  std::vector<std::string> cols(keys.begin(), keys.end());
  if (cfg.contains("x")) {
    std::string x = cfg.at("x").get<std::string>();
    auto it = std::find(cols.begin(), cols.end(), x);
    if (it != cols.end()) std::rotate(cols.begin(), it, it + 1);
  }
  std::vector<std::vector<std::string>> rows;
  for (const Json& row : *arr) {
    std::vector<std::string> r;
    for (const std::string& c : cols) {
      if (!row.contains(c)) {
        r.push_back("");
      } else if (row.at(c).is_number_float()) {
        r.push_back(format_double(row.at(c).get<double>()));
      } else if (row.at(c).is_number()) {
        r.push_back(std::to_string(row.at(c).get<long long>()));
      } else if (row.at(c).is_boolean()) {
        r.push_back(row.at(c).get<bool>() ? "1" : "0");
      } else {
        r.push_back(row.at(c).get<std::string>());
      }
    }
    rows.push_back(std::move(r));
  }
  art.series_csv = csv_table(cols, rows);
  art.result["columns"] = cols;
  art.result["row_count"] = rows.size();
  return art;
}

// ---------------------------------------------------------------------------

inline Artifacts dispatch(const std::string& subcommand, const Json& cfg, std::uint64_t seed) {
  if (subcommand == "alpha") return run_alpha(cfg, seed);
  if (subcommand == "sample") return run_sample(cfg, seed);
  if (subcommand == "forward") return run_forward(cfg, seed);
  if (subcommand == "clan-stats") return run_clan_stats(cfg, seed);
  if (subcommand == "mixing") return run_mixing(cfg, seed);
  if (subcommand == "couple") return run_couple(cfg, seed);
  if (subcommand == "discretize") return run_discretize(cfg, seed);
  if (subcommand == "ps-sample") return run_ps_sample(cfg, seed);
  if (subcommand == "oracle-check") return run_oracle_check(cfg, seed);
  if (subcommand == "plot-data") return run_plot_data(cfg, seed);
  raise(errc::config_error, "unknown subcommand " + subcommand);
}

// Full run: parse, execute, write artifacts. Returns the process exit code.
inline int execute(const std::string& subcommand, const Json& cfg, const std::string& out_dir) {
  try {
    if (!cfg.contains("seed"))
      raise(errc::config_error, "seed is mandatory (no wall-clock default)");
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    if (cfg.contains("replicas") && cfg.at("replicas").get<long long>() < 1)
      raise(errc::config_error, "replicas must be >= 1");
    Artifacts art = dispatch(subcommand, cfg, seed);
    std::filesystem::create_directories(out_dir);
    Json result;
    result["subcommand"] = subcommand;
    result["seed"] = seed;
    result["data"] = art.result;
    write_text(out_dir + "/result.json", result.dump(2) + "\n");
    if (!art.series_csv.empty()) write_text(out_dir + "/series.csv", art.series_csv);
    if (art.has_clan) write_text(out_dir + "/clan.json", art.clan.dump(2) + "\n");
    return art.exit_code;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == errc::budget_exceeded) return 3;
    return 2;
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
}

}  // namespace ffg::run
