#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gen.hpp"
#include "steinlab/functionals.hpp"
#include "steinlab/semigroup.hpp"

using namespace steinlab;

namespace {

double mu_integral(const MeasurePair& p, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += p.mu_weights()[i] * f[i];
  return s;
}

std::vector<double> nodes(const MeasurePair& p) { return {p.nodes().begin(), p.nodes().end()}; }

}  // namespace

TEST_CASE("P_0 is the identity and mass is conserved") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const MeasurePair p = make_pair(g, DensitySpec::gaussian_scale(2.0));
  for (Backend b : {Backend::MehlerOU, Backend::Line1DPDE}) {
    const SemigroupEngine eng(b, g);
    const std::vector<double> at{-1.0, 0.0, 0.7, 2.0};
    const auto v = eng.apply([](double x) { return std::sin(x) + x * x; }, 0.0, at, p);
    for (std::size_t i = 0; i < at.size(); ++i) CHECK(v[i] == doctest::Approx(std::sin(at[i]) + at[i] * at[i]));
    for (double t : {0.3, 1.0, 3.0}) CHECK(eng.evolve(p, t).mass == doctest::Approx(1.0).epsilon(1e-6));
  }
  const MeasurePair s = make_pair(ModelSpace::sphere(3), DensitySpec::von_mises(1.0));
  const SemigroupEngine zonal(Backend::SphereZonal, ModelSpace::sphere(3));
  CHECK(zonal.evolve(s, 0.8).mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Mehler flow of a centred gaussian") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  for (Backend b : {Backend::MehlerOU, Backend::Line1DPDE})
    for (double s0 : {0.5, 2.0, 4.0}) {
      const MeasurePair p = make_pair(g, DensitySpec::gaussian_scale(s0));
      const SemigroupEngine eng(b, g);
      const double t = 0.7, st = 1.0 + (s0 - 1.0) * std::exp(-t);
      const FlowSnapshot snap = eng.evolve(p, t);
      for (std::size_t i = 0; i < snap.nodes.size(); i += 97) {
        const double x = snap.nodes[i];
        if (std::abs(x) > 4.0) continue;
        const double h = std::exp(-x * x / (2 * st) + x * x / 2) / std::sqrt(st);
        CHECK(snap.h_t[i] == doctest::Approx(h).epsilon(b == Backend::MehlerOU ? 1e-8 : 1e-4));
      }
      CHECK(snap.I_t == doctest::Approx((st - 1) * (st - 1) / st).epsilon(b == Backend::MehlerOU ? 1e-7 : 1e-4));
    }
}

TEST_CASE("degree-one zonal function on S^2") {
  const ModelSpace s = ModelSpace::sphere(2);
  const MeasurePair p = make_pair(s, DensitySpec::identity());
  const SemigroupEngine eng(Backend::SphereZonal, s);
  const double c = 0.4;
  const std::vector<double> at{0.1, 1.0, 2.5};
  for (double t : {0.2, 1.0, 3.0}) {
    const auto v = eng.apply([&](double th) { return 1.0 + c * std::cos(th); }, t, at, p);
    for (std::size_t i = 0; i < at.size(); ++i) CHECK(v[i] == doctest::Approx(1.0 + c * std::exp(-t) * std::cos(at[i])));
  }
}

TEST_CASE("symmetry in L2(mu)") {
  gen::Draw d(21);
  const ModelSpace q = ModelSpace::line(PotentialSpec::quartic(0.5));
  const std::vector<std::pair<ModelSpace, Backend>> cases{{ModelSpace::gaussian(1, 1.0), Backend::MehlerOU},
                                                          {q, Backend::Line1DPDE},
                                                          {ModelSpace::sphere(2), Backend::SphereZonal}};
  for (const auto& [space, backend] : cases) {
    const MeasurePair p = make_pair(space, DensitySpec::identity());
    const SemigroupEngine eng(backend, space);
    for (int k = 0; k < 3; ++k) {
      const double a = d.uniform(0.3, 1.5), b = d.uniform(-1, 1), c = d.uniform(0.3, 1.5), e = d.uniform(-1, 1);
      auto f = [=](double x) { return std::sin(a * x + b); };
      auto g = [=](double x) { return std::cos(c * x + e) + 0.2 * x; };
      const auto x = nodes(p);
      std::vector<double> fx, gx;
      for (double y : x) {
        fx.push_back(f(y));
        gx.push_back(g(y));
      }
      const double t = d.uniform(0.1, 1.5);
      const double lhs = mu_integral(p, [&] { auto v = eng.apply(g, t, x, p); for (std::size_t i = 0; i < v.size(); ++i) v[i] *= fx[i]; return v; }());
      const double rhs = mu_integral(p, [&] { auto v = eng.apply(f, t, x, p); for (std::size_t i = 0; i < v.size(); ++i) v[i] *= gx[i]; return v; }());
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("semigroup composition") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const MeasurePair p = make_pair(g, DensitySpec::identity());
  const SemigroupEngine eng(Backend::MehlerOU, g);
  auto f = [](double x) { return std::sin(x) + 0.1 * x * x; };
  const std::vector<double> at{-1.3, 0.2, 1.9};
  auto Ptf = [&](double x) { return eng.apply(f, 0.4, std::vector<double>{x}, p)[0]; };
  const auto lhs = eng.apply(Ptf, 0.6, at, p);
  const auto rhs = eng.apply(f, 1.0, at, p);
  for (std::size_t i = 0; i < at.size(); ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-9));
}

TEST_CASE("de Bruijn identity examples") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const SemigroupEngine eng(Backend::MehlerOU, g);
  const DeBruijn a = de_bruijn_entropy(eng, make_pair(g, DensitySpec::gaussian_scale(2.0)));
  CHECK(a.value == doctest::Approx(0.5 * (1.0 - std::log(2.0))).epsilon(1e-5));
  CHECK(a.value == doctest::Approx(0.1534).epsilon(1e-3));
  const DeBruijn b = de_bruijn_entropy(eng, make_pair(g, DensitySpec::gaussian_shift(1.0)));
  CHECK(b.value == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("Fisher decay: equality for shifts, strict for scales") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const SemigroupEngine eng(Backend::MehlerOU, g, {0.25, 1.0, 2.0});
  for (const InequalityVerdict& v : fisher_decay_check(eng, make_pair(g, DensitySpec::gaussian_shift(1.0)), 1.0)) {
    CHECK(v.holds);
    CHECK(std::abs(v.margin) < 1e-7);
  }
  for (const InequalityVerdict& v : fisher_decay_check(eng, make_pair(g, DensitySpec::gaussian_scale(3.0)), 1.0)) {
    CHECK(v.holds);
    CHECK(v.margin > 1e-3);
  }
}

TEST_CASE("Fisher curve starts at I(h)") {
  const ModelSpace g = ModelSpace::gaussian(1, 1.0);
  const MeasurePair p = make_pair(g, DensitySpec::gaussian_scale(2.0));
  const auto I = SemigroupEngine(Backend::MehlerOU, g).fisher_curve(p);
  CHECK(I(0.0) == doctest::Approx(fisher(p)).epsilon(1e-8));
  CHECK(I(1.0) < I(0.5));
}

TEST_CASE("backend names round trip") {
  for (Backend b : {Backend::MehlerOU, Backend::Line1DPDE, Backend::SphereZonal})
    CHECK(backend_from_string(to_string(b)) == b);
  CHECK(default_backend(ModelSpace::sphere(3)) == Backend::SphereZonal);
}
