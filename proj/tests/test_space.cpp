#include <catch2/catch_amalgamated.hpp>

#include "ffg/rng.hpp"
#include "ffg/space.hpp"

using namespace ffg;

namespace {

ParticleConfiguration random_config(Rng& rng, int n) {
  ParticleConfiguration cfg;
  for (int i = 0; i < n; ++i) {
    Particle p{Location::continuum({rng.uniform_in(-4, 4), rng.uniform_in(-4, 4)}),
               Spin::make_tag(rng.uniform() < 0.5 ? +1 : -1)};
    cfg.add(p, 1 + static_cast<int>(rng.below(3)));
  }
  return cfg;
}

}  // namespace

TEST_CASE("restrict basics") {
  Window a = Window::continuum_box(make_box({0, 0}, {1, 1}));
  CHECK(restrict_to({}, a).empty());

  ParticleConfiguration xi;
  xi.add({Location::continuum({0, 0}), Spin::make_tag(+1)}, 1);
  xi.add({Location::continuum({3, 3}), Spin::make_tag(-1)}, 2);

  Window full = Window::continuum_box(make_box({-10, -10}, {10, 10}));
  CHECK(restrict_to(xi, full) == xi);

  ParticleConfiguration inside = restrict_to(xi, a);
  CHECK(inside.total_count() == 1);
  CHECK(inside.multiplicity({Location::continuum({0, 0}), Spin::make_tag(+1)}) == 1);
}

TEST_CASE("box windows are half-open") {
  Window a = Window::continuum_box(make_box({0, 0}, {1, 1}));
  CHECK(a.contains({Location::continuum({0, 0}), Spin::make_tag(1)}));
  CHECK_FALSE(a.contains({Location::continuum({1.0, 0.5}), Spin::make_tag(1)}));
}

TEST_CASE("superpose basics") {
  ParticleConfiguration xi;
  Particle p{Location::lattice({2, 1}), Spin::make_tag(+1)};
  xi.add(p, 1);
  CHECK(superpose(xi, {}) == xi);
  ParticleConfiguration two;
  two.add(p, 2);
  CHECK(superpose(xi, two).multiplicity(p) == 3);
}

TEST_CASE("count additivity and examples") {
  Window a = Window::continuum_box(make_box({0, 0}, {1, 1}));
  CHECK(count_in({}, a) == 0);
  Particle p{Location::continuum({0.5, 0.5}), Spin::make_tag(-1)};
  ParticleConfiguration c;
  c.add(p, 3);
  CHECK(count_in(c, a) == 3);

  Rng rng(11, 0);
  Window left = Window::continuum_box(make_box({-4, -4}, {0, 4}));
  Window right = Window::continuum_box(make_box({0, -4}, {4, 4}));
  Window both = Window::continuum_box(make_box({-4, -4}, {4, 4}));
  for (int rep = 0; rep < 50; ++rep) {
    ParticleConfiguration xi = random_config(rng, 12);
    CHECK(count_in(xi, left) + count_in(xi, right) == count_in(xi, both));
  }
}

TEST_CASE("restrict bounded by original; superpose commutative/associative") {
  Rng rng(12, 0);
  for (int rep = 0; rep < 30; ++rep) {
    ParticleConfiguration a = random_config(rng, 6);
    ParticleConfiguration b = random_config(rng, 6);
    ParticleConfiguration c = random_config(rng, 6);
    CHECK(superpose(a, b) == superpose(b, a));
    CHECK(superpose(superpose(a, b), c) == superpose(a, superpose(b, c)));
    Window w = Window::continuum_box(make_box({-1, -1}, {2, 2}));
    ParticleConfiguration cut = restrict_to(a, w);
    for (auto& [p, m] : cut.entries()) CHECK(m <= a.multiplicity(p));
  }
}

TEST_CASE("split by window then superpose returns the original, bit-exact") {
  Rng rng(13, 0);
  for (int rep = 0; rep < 30; ++rep) {
    ParticleConfiguration xi = random_config(rng, 10);
    Box inner = make_box({-2, -2}, {1, 1});
    Window in_w = Window::continuum_box(inner);
    ParticleConfiguration inside = restrict_to(xi, in_w);
    ParticleConfiguration outside;
    for (auto& [p, m] : xi.entries())
      if (!in_w.contains(p)) outside.add(p, m);
    CHECK(superpose(inside, outside) == xi);
  }
}

TEST_CASE("window intersection") {
  Window a = Window::continuum_box(make_box({0, 0}, {2, 2}), SpinSet::of_tags({1, -1}));
  Window b = Window::continuum_box(make_box({1, 1}, {3, 3}), SpinSet::of_tags({1}));
  Window c = intersect_windows(a, b);
  CHECK(c.contains({Location::continuum({1.5, 1.5}), Spin::make_tag(1)}));
  CHECK_FALSE(c.contains({Location::continuum({1.5, 1.5}), Spin::make_tag(-1)}));
  CHECK_FALSE(c.contains({Location::continuum({0.5, 1.5}), Spin::make_tag(1)}));

  Window sites = Window::lattice_sites(lattice_box_sites({0, 0}, {3, 3}));
  Window sub = Window::lattice_sites(lattice_box_sites({2, 2}, {5, 5}));
  Window both = intersect_windows(sites, sub);
  CHECK(both.sites.size() == 4);
}

TEST_CASE("lattice locations are exact") {
  Location a = Location::lattice({5, -3});
  Location b = Location::lattice({5, -3});
  CHECK(a == b);
  CHECK(dist_sup(a, Location::lattice({6, -3})) == 1.0);
  CHECK(dist_l1(a, Location::lattice({6, -2})) == 2.0);
}
