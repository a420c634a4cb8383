#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qdn/psd_model.hpp"

using qdn::CompositePsd;
using qdn::PowerLawSegment;

namespace {

// Independent quadrature oracle: trapezoid on a log grid.
double quadrature(const CompositePsd& psd, double f_lo, double f_hi, int n = 10000) {
  const double la = std::log(f_lo), lb = std::log(f_hi);
  double acc = 0.0;
  double f_prev = f_lo, s_prev = psd.eval(f_lo);
  for (int i = 1; i <= n; ++i) {
    const double f = std::exp(la + (lb - la) * i / n);
    const double s = psd.eval(f);
    acc += 0.5 * (s + s_prev) * (f - f_prev);
    f_prev = f;
    s_prev = s;
  }
  return acc;
}

}  // namespace

TEST_CASE("evaluation of power-law sums") {
  const CompositePsd one_over_f({{1.0, 1.0}}, "detuning-Hz");
  CHECK(one_over_f.eval(1.0) == doctest::Approx(1.0));  // amplitude defined at 1 Hz

  const CompositePsd two_terms({{1.0, 1.0}, {1.0, 2.0}}, "detuning-Hz");
  CHECK(two_terms.eval(1.0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(one_over_f.eval(0.0), std::domain_error);
  CHECK_THROWS_AS(one_over_f.eval(-1.0), std::domain_error);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(CompositePsd({}, "detuning-Hz"), std::invalid_argument);
  CHECK_THROWS_AS(CompositePsd({{0.0, 1.0}}, "detuning-Hz"), std::invalid_argument);
  CHECK_THROWS_AS(CompositePsd({{-1.0, 1.0}}, "detuning-Hz"), std::invalid_argument);
  CHECK_THROWS_AS(CompositePsd({{1.0, 3.5}}, "detuning-Hz"), std::invalid_argument);
  CHECK_THROWS_AS(CompositePsd({{1.0, -0.5}}, "detuning-Hz"), std::invalid_argument);
}

TEST_CASE("crossover frequency") {
  CHECK(qdn::crossover_frequency({1.0, 1.0}, {1.0, 2.0}) == doctest::Approx(1.0));
  CHECK(qdn::crossover_frequency({4.0, 1.0}, {1.0, 2.0}) == doctest::Approx(0.25));
  CHECK(qdn::crossover_frequency({1.0, 1.0}, {1.0, 1.5}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(qdn::crossover_frequency({1.0, 1.0}, {2.0, 1.0}), std::domain_error);

  // The two terms really are equal there.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> amp(0.1, 10.0), expo(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    PowerLawSegment a{amp(gen), expo(gen)};
    PowerLawSegment b{amp(gen), expo(gen)};
    if (std::abs(a.exponent - b.exponent) < 1e-3) continue;
    const double f = qdn::crossover_frequency(a, b);
    const double sa = a.amplitude_at_1hz * std::pow(f, -a.exponent);
    const double sb = b.amplitude_at_1hz * std::pow(f, -b.exponent);
    CHECK(std::abs(sa - sb) / sa < 1e-10);
  }
}

TEST_CASE("crossover of a two-slope model scaled to the millihertz regime") {
  // Equal-amplitude ratio S2/S1 = 1e-3 puts the transition at 1e-3 Hz.
  const PowerLawSegment flicker{1.0, 1.0};
  const PowerLawSegment walk{1e-3, 2.0};
  const double f = qdn::crossover_frequency(flicker, walk);
  CHECK(f == doctest::Approx(1e-3));
  const CompositePsd model({flicker, walk}, "detuning-Hz");
  CHECK(model.eval(f) == doctest::Approx(2.0 * flicker.amplitude_at_1hz / f));
}

TEST_CASE("band integrals") {
  const CompositePsd walk({{1.0, 2.0}}, "detuning-Hz");
  CHECK(walk.integrate(1.0, 2.0) == doctest::Approx(0.5));  // int 1/f^2 over [1,2]

  const CompositePsd flicker({{1.0, 1.0}}, "detuning-Hz");
  CHECK(flicker.integrate(1.0, std::exp(1.0)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(walk.integrate(2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(walk.integrate(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(walk.integrate(-1.0, 1.0), std::domain_error);
}

TEST_CASE("analytic band integral matches the quadrature oracle") {
  const CompositePsd model({{1.0, 1.0}, {1e-3, 2.0}}, "detuning-Hz");
  const double analytic = model.integrate(5e-5, 1.0);
  const double numeric = quadrature(model, 5e-5, 1.0);
  CHECK(std::abs(analytic - numeric) / analytic < 1e-6);
}

TEST_CASE("integral additivity over adjacent bands") {
  const CompositePsd model({{2.0, 0.7}, {0.5, 1.0}, {1e-2, 1.9}}, "detuning-Hz");
  const double whole = model.integrate(1e-4, 10.0);
  const double parts = model.integrate(1e-4, 3e-2) + model.integrate(3e-2, 10.0);
  CHECK(std::abs(whole - parts) / whole < 1e-12);
}

TEST_CASE("near-unity exponents integrate continuously") {
  const CompositePsd above({{1.0, 1.0 + 1e-9}}, "detuning-Hz");
  const CompositePsd at({{1.0, 1.0}}, "detuning-Hz");
  const CompositePsd below({{1.0, 1.0 - 1e-9}}, "detuning-Hz");
  const double reference = at.integrate(1e-3, 1e3);
  CHECK(std::abs(above.integrate(1e-3, 1e3) - reference) / reference < 1e-6);
  CHECK(std::abs(below.integrate(1e-3, 1e3) - reference) / reference < 1e-6);
}

TEST_CASE("density decreases with frequency for positive exponents") {
  const CompositePsd model({{1.0, 0.5}, {2.0, 1.7}}, "detuning-Hz");
  double prev = model.eval(1e-5);
  for (double f = 1e-4; f < 1e4; f *= 10.0) {
    const double s = model.eval(f);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("JSON round trip") {
  const CompositePsd model({{0.2206, 1.0}, {2.206e-4, 2.0}}, "energy-ueV");
  const auto j = model.to_json();
  CHECK(j.at("convention") == "one-sided");
  const CompositePsd back = CompositePsd::from_json(j);
  REQUIRE(back.segments().size() == 2);
  CHECK(back.unit_label() == "energy-ueV");
  CHECK(back.segments()[0].amplitude_at_1hz == model.segments()[0].amplitude_at_1hz);
  CHECK(back.segments()[1].exponent == model.segments()[1].exponent);

  auto bad = j;
  bad["convention"] = "two-sided";
  CHECK_THROWS_AS(CompositePsd::from_json(bad), std::invalid_argument);
}
