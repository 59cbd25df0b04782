#include <catch2/catch_amalgamated.hpp>

#include "ffg/model.hpp"
#include "ffg/models.hpp"

using namespace ffg;

TEST_CASE("acceptance probability of the hardcore WR model") {
  DilutedModel m = models::wr_continuum({0.5, 0.5, 1.0, 2});
  Particle g{Location::continuum({0, 0}), Spin::make_tag(+1)};

  CHECK(acceptance_probability(m, {}, g).value == 1.0);

  ParticleConfiguration eta;
  eta.add({Location::continuum({0.5, 0.5}), Spin::make_tag(-1)});
  CHECK(acceptance_probability(m, eta, g).value == 0.0);

  ParticleConfiguration same_type;
  same_type.add({Location::continuum({0.5, 0.5}), Spin::make_tag(+1)});
  CHECK(acceptance_probability(m, same_type, g).value == 1.0);
}

TEST_CASE("generalized WR acceptance: one neighbor under h == c") {
  // h constant c on [0, m_h], j == 0: leap is the h-sum, so acceptance e^{-c}
  const double c = 0.7;
  models::WRGeneralizedParams p;
  p.lambda_plus = p.lambda_minus = 0.3;
  p.h = models::StepTable::constant(c, 1.5);
  p.j = models::StepTable::zero();
  DilutedModel m = models::wr_generalized(p);
  Particle g{Location::continuum({0, 0}), Spin::make_tag(+1)};
  ParticleConfiguration eta;
  eta.add({Location::continuum({1.0, 0.2}), Spin::make_tag(-1)});
  CHECK(acceptance_probability(m, eta, g).value == Catch::Approx(std::exp(-c)).epsilon(1e-12));
}

TEST_CASE("InvalidModel on a leap below the declared bound") {
  DilutedModel m = models::wr_continuum({0.5, 0.5, 1.0, 2});
  m.energy_leap = [](const ParticleConfiguration&, const Particle&) { return -1.0; };
  Particle g{Location::continuum({0, 0}), Spin::make_tag(+1)};
  CHECK_THROWS_AS(acceptance_probability(m, {}, g), Error);
}

TEST_CASE("validate_model passes on the continuum WR spec") {
  DilutedModel m = models::wr_continuum({0.5, 0.5, 1.0, 2});
  std::vector<Window> windows{Window::continuum_box(make_box({0, 0}, {2, 2})),
                              Window::continuum_box(make_box({-1, -1}, {0, 3}))};
  std::vector<ParticleConfiguration> probes;
  probes.push_back({});
  ParticleConfiguration a;
  a.add({Location::continuum({0.3, 0.3}), Spin::make_tag(+1)});
  a.add({Location::continuum({1.9, 1.1}), Spin::make_tag(-1)});
  probes.push_back(a);
  Rng rng(3, 0);
  ValidationReport rep = validate_model(m, windows, probes, rng);
  CHECK(rep.all_ok());
}

TEST_CASE("zero-volume window has zero intensity mass") {
  DilutedModel m = models::wr_continuum({0.5, 0.5, 1.0, 2});
  CHECK(m.intensity_mass(Window::continuum_box(make_box({1, 1}, {1, 3}))) == 0.0);
}

TEST_CASE("a deliberately broken impact region fails the locality check") {
  DilutedModel m = models::wr_continuum({0.5, 0.5, 1.0, 2});
  // claim a much smaller interaction range than the true one
  m.impact_region = [](const Particle& g) {
    return Window::continuum_box(models::detail::box_around(g.loc, 0.25),
                                 SpinSet::of_tags({models::opposite(g.spin.tag)}));
  };
  std::vector<Window> windows{Window::continuum_box(make_box({0, 0}, {2, 2}))};
  std::vector<ParticleConfiguration> probes{{}};
  Rng rng(4, 0);
  ValidationReport rep = validate_model(m, windows, probes, rng);
  CHECK_FALSE(rep.impact_locality_ok);
}

TEST_CASE("acceptance equals 1 exactly when the leap sits at the bound") {
  models::SymbioticParams p{0.4, 0.4, 2.0, 1.0, 2};
  DilutedModel m = models::symbiotic(p);
  Particle host{Location::continuum({0, 0}), Spin::make_tag(models::kHost)};
  CHECK(acceptance_probability(m, {}, host).value == 1.0);
  Particle parasite{Location::continuum({0, 0}), Spin::make_tag(models::kParasite)};
  CHECK(acceptance_probability(m, {}, parasite).value ==
        Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
}
