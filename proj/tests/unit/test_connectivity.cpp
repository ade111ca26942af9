#include <doctest.h>

#include <numbers>

#include "ctfconn/connectivity.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/synth.hpp"
#include "helpers.hpp"

using namespace ctfconn;
using testutil::max_abs;

namespace {

// PLI from the wrapped phase difference instead of the cross-spectrum.
double pli_by_angle(const ComplexVector& u, const ComplexVector& v) {
  double acc = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    const double d = std::remainder(std::arg(u(k)) - std::arg(v(k)), 2.0 * std::numbers::pi);
    if (std::abs(d) > 1e-12 && std::abs(std::abs(d) - std::numbers::pi) > 1e-12) acc += d > 0 ? 1.0 : -1.0;
  }
  return std::abs(acc) / double(u.size());
}

}  // namespace

TEST_CASE("PLI agrees with the phase-difference definition") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const ComplexVector u = testutil::complex_gaussian(31, 1, rng).col(0), v = testutil::complex_gaussian(31, 1, rng).col(0);
    const double pli = phase_lag_index(u, v);
    CHECK(pli == doctest::Approx(pli_by_angle(u, v)));
    CHECK(pli == doctest::Approx(phase_lag_index(v, u)));
    CHECK(pli >= 0.0);
    CHECK(pli <= 1.0);
    // A common rotation and positive rescaling leave it unchanged.
    const cplx rot = std::polar(2.5, 1.1);
    CHECK(phase_lag_index(rot * u, rot * v) == doctest::Approx(pli));
  }
}

TEST_CASE("PLI edge cases") {
  ComplexVector u(4), v(4);
  u << 1.0, cplx(0, 1), -1.0, cplx(0, -1);
  CHECK(phase_lag_index(u, u) == 0.0);                 // zero lag counts as sign 0
  CHECK(phase_lag_index(u, cplx(0, 1) * u) == 1.0);    // constant quarter-cycle lag
  CHECK(phase_lag_index(u, -u) == 0.0);                // half cycle is sign 0 too
  v << cplx(0, 1), cplx(0, -1), cplx(0, 1), cplx(0, -1);
  CHECK(phase_lag_index(ComplexVector::Ones(4), v) == 0.0);
  CHECK_THROWS_AS(phase_lag_index(u, ComplexVector(3)), InvalidInput);
  CHECK_THROWS_AS(phase_lag_index(ComplexVector(0), ComplexVector(0)), InvalidInput);
}

TEST_CASE("sensor PLI matrices") {
  Rng rng(2);
  const ComplexTensor x = testutil::random_tensor({5, 6, 40}, rng);
  const auto psi = sensor_pli(x);
  REQUIRE(psi.size() == 6u);
  for (Index f = 0; f < 6; ++f) {
    const RealMatrix& p = psi[std::size_t(f)];
    CHECK(p.diagonal().isZero());
    CHECK(p == p.transpose());
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j)
        if (i != j) CHECK(p(i, j) == doctest::Approx(pli_by_angle(x.slab(f).row(i).transpose(), x.slab(f).row(j).transpose())));
  }
  const RealMatrix band = band_sensor_pli(x, {2, 4});
  CHECK(max_abs(RealMatrix(band - (psi[2] + psi[3] + psi[4]) / 3.0)) < 1e-15);
  CHECK_THROWS_AS(band_sensor_pli(x, {4, 6}), InvalidInput);
  CHECK_THROWS_AS(sensor_pli(testutil::random_tensor({5, 6, 1}, rng)), InvalidInput);
}

TEST_CASE("component signals follow each model's trial factors") {
  Rng rng(3);
  const ParafacModel pf = testutil::random_parafac(6, 4, 9, 3, rng);
  const Parafac2Model pf2 = testutil::random_parafac2(6, 4, 9, 3, rng);
  const ComponentSignals a = component_signals(pf), b = component_signals(AnyModel(pf2));
  CHECK(a.rank() == 3);
  CHECK(a.frequencies() == 4);
  CHECK(b.trials() == 9);
  for (Index f = 0; f < 4; ++f)
    for (Index r = 0; r < 3; ++r)
      for (Index k = 0; k < 9; ++k) {
        CHECK(std::abs(a.activations[std::size_t(f)](r, k) - pf.P(f, r) * pf.Y(k, r)) < 1e-12);
        cplx y = 0.0;
        for (Index s = 0; s < 3; ++s) y += pf2.H(r, s) * std::conj(pf2.Q[std::size_t(f)](k, s));
        CHECK(std::abs(b.activations[std::size_t(f)](r, k) - pf2.P(f, r) * y) < 1e-12);
      }
  // Summing components through the spatial patterns reproduces the data slab.
  for (Index f = 0; f < 4; ++f)
    CHECK(max_abs(ComplexMatrix(b.spatial.cast<cplx>() * b.activations[std::size_t(f)] - reconstruct_slab(pf2, f))) < 1e-10);
}

TEST_CASE("component coupling, strongest pair and scalp map") {
  Rng rng(4);
  ComponentSignals s;
  s.spatial = testutil::gaussian(6, 3, rng);
  for (int f = 0; f < 5; ++f) s.activations.push_back(testutil::complex_gaussian(3, 50, rng));
  // Components 1 and 2 locked at a fixed lag in bins 1..3.
  for (int f = 1; f <= 3; ++f) s.activations[std::size_t(f)].row(2) = s.activations[std::size_t(f)].row(1) * std::polar(0.5, 0.8);
  const BinRange band{1, 3};
  CHECK(band_component_pli(s, 1, 2, band) == doctest::Approx(1.0));
  const RealMatrix m = band_component_pli_matrix(s, band);
  CHECK(m == m.transpose());
  CHECK(m(0, 1) == doctest::Approx((component_pli(s, 0, 1, 1) + component_pli(s, 0, 1, 2) + component_pli(s, 0, 1, 3)) / 3.0));
  const ComponentPair best = strongest_pair(s, band);
  CHECK(best.i == 1);
  CHECK(best.j == 2);
  CHECK(best.coupling == doctest::Approx(1.0));
  CHECK_THROWS_AS(component_pli(s, 1, 1, 0), InvalidInput);
  CHECK_THROWS_AS(component_pli(s, 0, 3, 0), InvalidInput);

  const ConnectivityMap map = scalp_map(s, 1, 2, band);
  double weight = 0.0;
  for (int f = 1; f <= 3; ++f)
    for (int k = 0; k < 50; ++k)
      weight += std::abs(s.activations[std::size_t(f)](1, k)) + std::abs(s.activations[std::size_t(f)](2, k));
  weight /= 150.0;
  CHECK(map.weight == doctest::Approx(weight));
  for (Index e = 0; e < 6; ++e)
    for (Index g = 0; g < 6; ++g) {
      const double expect = map.pair.coupling * weight *
                            (s.spatial(e, 1) * s.spatial(g, 2) + s.spatial(e, 2) * s.spatial(g, 1));
      CHECK(map.matrix(e, g) == doctest::Approx(expect));
    }
  CHECK(map.matrix == map.matrix.transpose());

  // Unit basis patterns put the whole weight on one electrode pair.
  ComponentSignals unit = s;
  unit.spatial = RealMatrix::Zero(6, 3);
  unit.spatial(0, 1) = unit.spatial(1, 2) = 1.0;
  const ConnectivityMap basis = scalp_map(unit, 1, 2, band);
  CHECK(basis.matrix(0, 1) == doctest::Approx(basis.pair.coupling * basis.weight));
  CHECK(basis.matrix(1, 0) == basis.matrix(0, 1));
  CHECK(basis.matrix.cwiseAbs().sum() == doctest::Approx(2.0 * basis.matrix(0, 1)));
}

TEST_CASE("ties in coupling resolve to the first pair") {
  ComponentSignals s;
  s.spatial = RealMatrix::Identity(3, 3);
  s.activations.push_back(ComplexMatrix::Ones(3, 4));
  const ComponentPair p = strongest_pair(s, {0, 0});
  CHECK(p.i == 0);
  CHECK(p.j == 1);
  CHECK(p.coupling == 0.0);
}

TEST_CASE("strongest electrodes") {
  Rng rng(5);
  RealMatrix m = testutil::gaussian(7, 7, rng).cwiseAbs();
  m = (m + m.transpose()).eval();
  m.diagonal().setConstant(100.0);
  m(2, 5) = m(5, 2) = 50.0;
  CHECK(strongest_electrodes(m) == std::pair<Index, Index>{2, 5});
  CHECK_THROWS_AS(strongest_electrodes(RealMatrix::Zero(1, 1)), InvalidInput);
}

TEST_CASE("region grouping averages distinct electrode pairs") {
  Rng rng(6);
  RealMatrix m = testutil::gaussian(9, 9, rng);
  m = (m + m.transpose()).eval();
  const std::vector<int> labels{0, 2, 1, 0, 2, 2, 1, 0, 0};
  const RealMatrix g = region_group(m, labels, 4);
  CHECK(g == g.transpose());
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double sum = 0.0;
      int n = 0;
      for (Index e = 0; e < 9; ++e)
        for (Index h = 0; h < 9; ++h)
          if (e != h && labels[std::size_t(e)] == a && labels[std::size_t(h)] == b) {
            sum += m(e, h);
            ++n;
          }
      CHECK(g(a, b) == doctest::Approx(n ? sum / n : 0.0));
    }
  CHECK_THROWS_AS(region_group(m, {0, 1}, 2), InvalidInput);
  CHECK_THROWS_AS(region_group(m, std::vector<int>(9, 4), 4), InvalidInput);
}

TEST_CASE("default regions cover the standard cap") {
  const RealMatrix cap = electrode_cap(108);
  const std::vector<int> labels = default_regions(cap);
  std::array<int, kRegionCount> hist{};
  for (int l : labels) ++hist[std::size_t(l)];
  for (int n : hist) CHECK(n > 0);
  RealMatrix probe(4, 3);
  probe << 0, 0.9, 0.43, 0, 0, 1, 0, -0.9, 0.1, 0.95, 0, 0.3;
  CHECK(default_regions(probe) == std::vector<int>{0, 1, 3, 4});
  CHECK(region_names().size() == std::size_t(kRegionCount));
}
