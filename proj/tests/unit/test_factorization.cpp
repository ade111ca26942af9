#include <doctest.h>

#include "ctfconn/errors.hpp"
#include "ctfconn/multi_init.hpp"
#include "helpers.hpp"

using namespace ctfconn;
using testutil::max_abs;

namespace {

// Elementwise sum over components, independent of the slab code paths.
ComplexTensor brute_reconstruct(const ParafacModel& m) {
  ComplexTensor x({m.A.rows(), m.P.rows(), m.Y.rows()});
  for (Index i = 0; i < m.A.rows(); ++i)
    for (Index f = 0; f < m.P.rows(); ++f)
      for (Index k = 0; k < m.Y.rows(); ++k)
        for (Index r = 0; r < m.rank(); ++r) x(i, f, k) += m.A(i, r) * m.P(f, r) * m.Y(k, r);
  return x;
}

ComplexTensor brute_reconstruct(const Parafac2Model& m) {
  const Index n_trials = m.Q.front().rows();
  ComplexTensor x({m.A.rows(), m.P.rows(), n_trials});
  for (Index f = 0; f < m.P.rows(); ++f) {
    const ComplexMatrix& q = m.Q[std::size_t(f)];
    for (Index i = 0; i < m.A.rows(); ++i)
      for (Index k = 0; k < n_trials; ++k)
        for (Index r = 0; r < m.rank(); ++r) {
          cplx y = 0.0;
          for (Index s = 0; s < m.rank(); ++s) y += m.H(r, s) * std::conj(q(k, s));
          x(i, f, k) += m.A(i, r) * m.P(f, r) * y;
        }
  }
  return x;
}

double relative_distance(const ComplexTensor& a, const ComplexTensor& b) {
  return testutil::tensor_distance(a, b) / std::sqrt(b.squared_norm());
}

FitOptions exact_options(std::uint64_t seed) {
  FitOptions o;
  o.max_iters = 2000;
  o.tol = 1e-12;
  o.seed = seed;
  o.n_starts = 5;
  return o;
}

}  // namespace

TEST_CASE("reconstruction matches the elementwise model") {
  Rng rng(1);
  const ParafacModel pf = testutil::random_parafac(6, 5, 7, 3, rng);
  CHECK(relative_distance(reconstruct(pf), brute_reconstruct(pf)) < 1e-12);
  const Parafac2Model pf2 = testutil::random_parafac2(6, 5, 7, 3, rng);
  CHECK(relative_distance(reconstruct(pf2), brute_reconstruct(pf2)) < 1e-12);
  CHECK(cross_product_deviation(pf2) < 1e-12);

  const ComplexTensor x = testutil::random_tensor({6, 5, 7}, rng);
  const double d = testutil::tensor_distance(x, reconstruct(pf2));
  CHECK(squared_error(x, pf2) == doctest::Approx(d * d));
  CHECK(explained_variance(x, pf) == doctest::Approx(reconstruct(pf).squared_norm() / x.squared_norm()));
  CHECK(explained_variance(ComplexTensor({6, 5, 7}), pf) == 0.0);
}

TEST_CASE("normalisation preserves the reconstruction") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    ParafacModel pf = testutil::random_parafac(6, 5, 7, 3, rng);
    const ComplexTensor before = reconstruct(pf);
    normalize(pf);
    CHECK(relative_distance(reconstruct(pf), before) < 1e-12);
    for (Index r = 0; r < 3; ++r) {
      CHECK(pf.A.col(r).norm() == doctest::Approx(1.0));
      CHECK(pf.Y.col(r).norm() == doctest::Approx(1.0));
      Index top = 0;
      pf.A.col(r).cwiseAbs().maxCoeff(&top);
      CHECK(pf.A(top, r) > 0.0);
    }
    Parafac2Model pf2 = testutil::random_parafac2(6, 5, 7, 3, rng);
    const ComplexTensor before2 = reconstruct(pf2);
    normalize(pf2);
    CHECK(relative_distance(reconstruct(pf2), before2) < 1e-12);
    for (Index r = 0; r < 3; ++r) {
      CHECK(pf2.A.col(r).norm() == doctest::Approx(1.0));
      CHECK(pf2.H.row(r).norm() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("rank validation") {
  CHECK_THROWS_AS(validate_rank({4, 5, 6}, 0), InvalidInput);
  CHECK_THROWS_AS(validate_rank({4, 5, 6}, 5), InvalidInput);
  CHECK_NOTHROW(validate_rank({4, 5, 6}, 4));
  Rng rng(3);
  const ComplexTensor x = testutil::random_tensor({4, 5, 6}, rng);
  CHECK_THROWS_AS(fit_parafac(x, 5), InvalidInput);
  CHECK_THROWS_AS(fit_parafac2(x, 0), InvalidInput);
  FitOptions none;
  none.n_starts = 0;
  CHECK_THROWS_AS(fit_parafac(x, 2, none), InvalidInput);
}

TEST_CASE("PARAFAC recovers a noiseless low-rank tensor") {
  Rng rng(4);
  ParafacModel truth = testutil::random_parafac(10, 8, 12, 3, rng);
  const ComplexTensor x = reconstruct(truth);
  const Fit<ParafacModel> fit = fit_parafac(x, 3, exact_options(11));
  CHECK(fit.report.explained_variance > 0.99999);
  CHECK(squared_error(x, fit.model) < 1e-6 * x.squared_norm());
  CHECK(testutil::monotone(fit.report));
  CHECK(fit.report.loss.back() == doctest::Approx(squared_error(x, fit.model)).epsilon(1e-6).scale(x.squared_norm()));
  CHECK(align_components(fit.model.A, truth.A).mean() > 0.999);
}

TEST_CASE("PARAFAC2 recovers a noiseless PARAFAC2 tensor") {
  Rng rng(5);
  const Parafac2Model truth = testutil::random_parafac2(10, 8, 12, 3, rng);
  const ComplexTensor x = reconstruct(truth);
  const Fit<Parafac2Model> fit = fit_parafac2(x, 3, exact_options(12));
  CHECK(fit.report.explained_variance > 0.9999);
  CHECK(testutil::monotone(fit.report));
  CHECK(fit.report.loss.back() == doctest::Approx(squared_error(x, fit.model)).epsilon(1e-6).scale(x.squared_norm()));
  CHECK(align_components(fit.model.A, truth.A).mean() > 0.99);
  CHECK(cross_product_deviation(fit.model) < 1e-10);
  for (const auto& q : fit.model.Q)
    CHECK(max_abs(ComplexMatrix(q.adjoint() * q - ComplexMatrix::Identity(3, 3))) < 1e-10);
}

TEST_CASE("losses never increase on noisy data") {
  Rng rng(6);
  const ComplexTensor x = testutil::random_tensor({9, 7, 11}, rng);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FitOptions o;
    o.max_iters = 200;
    o.seed = seed;
    const auto pf = fit_parafac(x, 4, o);
    CHECK(testutil::monotone(pf.report));
    const auto pf2 = fit_parafac2(x, 4, o);
    CHECK(testutil::monotone(pf2.report));
    CHECK(pf2.report.loss.back() == doctest::Approx(squared_error(x, pf2.model)).epsilon(1e-8).scale(x.squared_norm()));
    // PARAFAC2 nests PARAFAC, so it should fit at least as well from a PARAFAC start.
    const auto warm = fit_parafac2(x, pf.model, o);
    // The first Procrustes step can only lower the PARAFAC loss.
    CHECK(warm.report.initial_loss <= squared_error(x, pf.model) * (1.0 + 1e-9));
    CHECK(squared_error(x, warm.model) <= squared_error(x, pf.model) * (1.0 + 1e-9));
  }
}

TEST_CASE("fits are deterministic per seed") {
  Rng rng(7);
  const ComplexTensor x = testutil::random_tensor({8, 6, 9}, rng);
  FitOptions o;
  o.max_iters = 50;
  o.seed = 99;
  o.n_starts = 3;
  const auto a = fit_parafac2(x, 3, o), b = fit_parafac2(x, 3, o);
  CHECK(a.model.A == b.model.A);
  CHECK(a.model.P == b.model.P);
  CHECK(a.report.loss == b.report.loss);
  const auto c = fit_parafac(x, 3, o), d = fit_parafac(x, 3, o);
  CHECK(c.model.Y == d.model.Y);
  o.seed = 100;
  CHECK(fit_parafac(x, 3, o).report.loss != c.report.loss);
}

TEST_CASE("more starts never end worse") {
  Rng rng(8);
  const ComplexTensor x = testutil::random_tensor({8, 6, 9}, rng);
  FitOptions o;
  o.max_iters = 100;
  o.seed = 5;
  const double one = fit_parafac(x, 3, o).report.loss.back();
  o.n_starts = 4;
  CHECK(fit_parafac(x, 3, o).report.loss.back() <= one);
}

TEST_CASE("zero tensors fit to zero") {
  const ComplexTensor x({4, 5, 6});
  const auto pf = fit_parafac(x, 2);
  CHECK(pf.report.explained_variance == 0.0);
  CHECK(reconstruct(pf.model).squared_norm() == 0.0);
  const auto pf2 = fit_parafac2(x, 2);
  CHECK(std::isfinite(squared_error(x, pf2.model)));
  CHECK(squared_error(x, pf2.model) == 0.0);
}

TEST_CASE("Procrustes update is orthonormal and optimal") {
  Rng rng(9);
  const ComplexTensor x = testutil::random_tensor({7, 4, 9}, rng);
  const RealMatrix a = testutil::gaussian(7, 3, rng);
  const ComplexMatrix p = testutil::complex_gaussian(4, 3, rng), h = testutil::complex_gaussian(3, 3, rng);
  const auto q = procrustes_update(x, a, p, h);
  REQUIRE(q.size() == 4u);
  for (Index f = 0; f < 4; ++f) {
    const ComplexMatrix& qf = q[std::size_t(f)];
    CHECK(max_abs(ComplexMatrix(qf.adjoint() * qf - ComplexMatrix::Identity(3, 3))) < 1e-10);
    const ComplexMatrix dh = p.row(f).transpose().asDiagonal() * h;
    auto residual = [&](const ComplexMatrix& qq) { return (x.slab(f) - a * dh * qq.adjoint()).squaredNorm(); };
    const double best = residual(qf);
    for (int t = 0; t < 50; ++t) CHECK(best <= residual(testutil::random_orthonormal(9, 3, rng)) + 1e-9);
  }
  CHECK_THROWS_AS(procrustes_update(x, testutil::gaussian(6, 3, rng), p, h), InvalidInput);
}

TEST_CASE("congruence and alignment") {
  const RealVector a = RealVector::LinSpaced(5, 1.0, 5.0);
  CHECK(tucker_congruence(a, -2.0 * a) == doctest::Approx(1.0));
  CHECK(tucker_congruence(a, RealVector::Zero(5)) == 0.0);
  Rng rng(10);
  const RealMatrix truth = testutil::gaussian(12, 3, rng);
  RealMatrix est(12, 4);
  est << testutil::gaussian(12, 1, rng), -truth.col(2), truth.col(0) * 3.0, truth.col(1);
  const Alignment al = align_components(est, truth);
  CHECK(al.match == std::vector<Index>{2, 3, 1});
  CHECK(al.mean() == doctest::Approx(1.0));
  CHECK_THROWS_AS(align_components(truth, est), InvalidInput);
}

TEST_CASE("algorithm names round-trip") {
  for (Algorithm a : {Algorithm::parafac, Algorithm::parafac2}) CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("tucker"), InvalidInput);
}

TEST_CASE("multi-init selects the most coupled run and is reproducible") {
  CHECK(candidate_seed(7, 2, 10, 3) == 7u + 23u);
  Rng rng(11);
  const ComplexTensor x = testutil::random_tensor({8, 6, 10}, rng);
  MultiInitOptions o;
  o.n_runs = 4;
  o.n_inits = 3;
  o.burn_in = 5;
  o.fit.max_iters = 30;
  o.fit.seed = 21;
  o.band = {1, 3};
  for (Algorithm algo : {Algorithm::parafac, Algorithm::parafac2}) {
    const MultiInitResult r = multi_init_fit(x, 3, algo, o);
    REQUIRE(r.run_coupling.size() == 4u);
    const auto best = std::max_element(r.run_coupling.begin(), r.run_coupling.end());
    CHECK(r.selected_run == int(best - r.run_coupling.begin()));
    CHECK(r.pair.coupling == doctest::Approx(*best));
    const ComponentPair check = strongest_pair(component_signals(r.model), o.band);
    CHECK(check.i == r.pair.i);
    CHECK(check.j == r.pair.j);
    CHECK(r.report.explained_variance == doctest::Approx(explained_variance(x, r.model)));
    CHECK(r.report.iterations <= o.fit.max_iters);
    const MultiInitResult again = multi_init_fit(x, 3, algo, o);
    CHECK(again.run_coupling == r.run_coupling);
    CHECK(again.report.loss == r.report.loss);
  }
  CHECK_THROWS_AS(multi_init_fit(x, 1, Algorithm::parafac, o), InvalidInput);
  o.band = {4, 9};
  CHECK_THROWS_AS(multi_init_fit(x, 2, Algorithm::parafac, o), InvalidInput);
}
