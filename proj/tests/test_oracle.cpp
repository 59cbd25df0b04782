#include <catch2/catch_amalgamated.hpp>

#include "ffg/contour.hpp"
#include "ffg/models.hpp"
#include "ffg/oracle.hpp"

using namespace ffg;

TEST_CASE("single-site discrete WR law") {
  const double lambda = 0.3;
  DilutedModel m = models::wr_discrete({lambda, lambda, 1, 2});
  Window w = Window::lattice_sites({Location::lattice({0, 0})});
  ExactDistribution d = enumerate_bgd(m, w, {}, 1);
  // three states: empty, +, - with weights 1, lambda, lambda
  REQUIRE(d.atoms.size() == 3);
  CHECK(d.probability_of({}) == Catch::Approx(1.0 / (1 + 2 * lambda)).epsilon(1e-12));
}

TEST_CASE("2x2 discrete WR law matches the closed form") {
  const double lambda = 0.3;
  DilutedModel m = models::wr_discrete({lambda, lambda, 1, 2});
  Window w = Window::lattice_sites(lattice_box_sites({0, 0}, {1, 1}));
  ExactDistribution d = enumerate_bgd(m, w, {}, 1);
  // monochrome subsets only: Z = 2 (1+lambda)^4 - 1
  const double z_rel = 2 * std::pow(1 + lambda, 4) - 1;
  CHECK(d.probability_of({}) == Catch::Approx(1.0 / z_rel).epsilon(1e-12));
  CHECK(d.atoms.size() == 31);  // 2 * (2^4 - 1) + 1 monochrome subsets
  // partition value keeps the Poisson vacuum factor and beats e^{-nu}
  const double nu = 2 * lambda * 4;
  CHECK(d.z == Catch::Approx(std::exp(-nu) * z_rel).epsilon(1e-12));
  CHECK(d.z > std::exp(-nu) * (1 - 1e-12));
}

TEST_CASE("empty window law is the point mass at the vacuum") {
  DilutedModel m = models::wr_discrete({0.3, 0.3, 1, 2});
  Window w = Window::lattice_sites(std::vector<Location>{});
  ExactDistribution d = enumerate_bgd(m, w, {}, 1);
  REQUIRE(d.atoms.size() == 1);
  CHECK(d.atoms.front().first.empty());
  CHECK(d.atoms.front().second == 1.0);
}

TEST_CASE("boundary conditions enter through the leaps") {
  const double lambda = 0.3;
  DilutedModel m = models::wr_discrete({lambda, lambda, 1, 2});
  Window w = Window::lattice_sites({Location::lattice({0, 0})});
  ParticleConfiguration eta;
  eta.add({Location::lattice({1, 0}), Spin::make_tag(-1)});
  ExactDistribution d = enumerate_bgd(m, w, eta, 1);
  // a + at the site conflicts with the boundary -, so only empty and -
  REQUIRE(d.atoms.size() == 2);
  CHECK(d.probability_of({}) == Catch::Approx(1.0 / (1 + lambda)).epsilon(1e-12));
}

TEST_CASE("telescoped Hamiltonian is order independent") {
  DilutedModel m = models::wr_discrete({0.4, 0.2, 1, 2});
  Rng rng(23, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Particle> parts;
    for (int i = 0; i < 4; ++i)
      parts.push_back({Location::lattice({static_cast<long>(rng.below(3)),
                                          static_cast<long>(rng.below(3))}),
                       Spin::make_tag(rng.uniform() < 0.5 ? +1 : -1)});
    double h1 = telescoped_energy(m, {}, parts);
    std::vector<Particle> shuffled = parts;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    double h2 = telescoped_energy(m, {}, shuffled);
    CHECK(((h1 == kInf && h2 == kInf) || h1 == Catch::Approx(h2).epsilon(1e-12)));
  }
}

TEST_CASE("exact law is invariant under site relabeling isometries") {
  DilutedModel m = models::wr_discrete({0.3, 0.3, 1, 2});
  Window w = Window::lattice_sites(lattice_box_sites({0, 0}, {1, 1}));
  ExactDistribution d = enumerate_bgd(m, w, {}, 1);
  for (auto& [cfg, p] : d.atoms) {
    ParticleConfiguration reflected;
    for (auto& [q, mult] : cfg.entries())
      reflected.add({Location::lattice({1 - q.loc.site(0), q.loc.site(1)}), q.spin}, mult);
    CHECK(d.probability_of(reflected) == Catch::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("comparison harness self-consistency and bias detection") {
  DilutedModel m = models::wr_discrete({0.3, 0.3, 1, 2});
  Window w = Window::lattice_sites(lattice_box_sites({0, 0}, {1, 1}));
  ExactDistribution d = enumerate_bgd(m, w, {}, 1);

  Rng rng(24, 0);
  std::vector<ParticleConfiguration> samples;
  for (int i = 0; i < 100000; ++i) samples.push_back(d.sample(rng));
  ComparisonReport ok = compare(samples, d);
  CHECK(ok.tv < 0.02);
  CHECK(ok.p_value > 0.001);
  CHECK(ok.other_count == 0);

  // dropping all empty configurations shifts TV by about P(empty)
  std::vector<ParticleConfiguration> biased;
  for (auto& s : samples)
    if (!s.empty()) biased.push_back(s);
  ComparisonReport bad = compare(biased, d);
  CHECK(bad.tv > 0.15);
  CHECK(bad.p_value < 0.001);
}

TEST_CASE("contour enumeration on the 3x3 dual box") {
  const double beta = 2.0;
  contour::DualBox box{0, 0, 3, 3};
  contour::ShapeCatalog cat;
  ExactDistribution d = contour::enumerate_contour_bgd(beta, box, cat);

  // independent route: brute force over all subsets of the 12 grid edges
  std::vector<contour::Plaquette> edges;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      if (x + 1 < 3) edges.push_back({x, y, 0});
      if (y + 1 < 3) edges.push_back({x, y, 1});
    }
  REQUIRE(edges.size() == 12);
  double z = 0;
  std::uint64_t families = 0;
  for (std::uint64_t mask = 0; mask < (1ull << 12); ++mask) {
    contour::Support s;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (mask & (1ull << e)) s.push_back(edges[e]);
    std::map<std::pair<int, int>, int> deg;
    bool even = true;
    for (auto& p : s) {
      ++deg[p.v0()];
      ++deg[p.v1()];
    }
    for (auto& [v, k] : deg) even = even && (k % 2 == 0);
    if (!even) continue;
    ++families;
    z += std::exp(-beta * static_cast<double>(s.size()));
  }
  CHECK(families == d.atoms.size());
  CHECK(d.probability_of({}) == Catch::Approx(1.0 / z).epsilon(1e-12));

  // a dual box admitting no contour: point mass at the empty family
  contour::ShapeCatalog none;
  ExactDistribution trivial = contour::enumerate_contour_bgd(beta, {0, 0, 2, 1}, none);
  REQUIRE(trivial.atoms.size() == 1);
  CHECK(trivial.atoms.front().second == 1.0);
}
