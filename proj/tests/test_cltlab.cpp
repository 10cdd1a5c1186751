#include <doctest.h>

#include <cmath>

#include "mixlab/cltlab.hpp"
#include "mixlab/error.hpp"
#include "mixlab/infofn.hpp"

using namespace mixlab;

namespace {

std::vector<CltRow> synthetic(double c, double slope) {
  std::vector<CltRow> rows;
  for (std::size_t n : {4, 16, 64, 256, 1024}) {
    CltRow r;
    r.dev.n = n;
    r.dev.deviation = c * std::pow(static_cast<double>(n), slope);
    r.delta = 1.0;
    r.scheme = "equal";
    r.predictor = clt_predictor(SimplexPoint::equal(n), 1.0);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cltlab") {
  TEST_CASE("pure gaussian has no deviation") {
    CltConfig cfg;
    for (std::size_t n : {1, 3, 10}) {
      CHECK(standardized_fisher_deviation(cfg, SimplexPoint::equal(n)).deviation < 1e-9);
    }
    CHECK(standardized_fisher_deviation(cfg, SimplexPoint::from_squares({0.2, 0.3, 0.5})).deviation < 1e-9);
    CHECK(standardized_fisher_deviation(cfg, SimplexPoint::equal(4), 3).deviation < 1e-9);
  }

  TEST_CASE("single model reduction") {
    CltConfig cfg;
    cfg.base_model = ScalarMixerAtomic({1, 2}, {0.5, 0.5});
    const auto d = standardized_fisher_deviation(cfg, SimplexPoint::equal(1));
    const double i = fisher_information(MixtureDensity(ScalarMixerAtomic({1, 2}, {0.5, 0.5}))).value;
    CHECK(d.deviation == doctest::Approx(std::abs(2.5 * i - 1.0)).epsilon(1e-9));
    CHECK(d.deviation > 0.0);
    CHECK(d.min_eigenvalue >= -d.error_bound);
  }

  TEST_CASE("equal weights deviation decreases") {
    CltConfig cfg;
    cfg.base_model = ScalarMixerAtomic({1, 2}, {0.5, 0.5});
    double prev = INFINITY, prev_err = 0;
    for (std::size_t n : {4, 16, 64, 256}) {
      const auto d = standardized_fisher_deviation(cfg, SimplexPoint::equal(n));
      CHECK(prev - d.deviation > prev_err + d.error_bound);
      CHECK(d.min_eigenvalue >= -d.error_bound);
      prev = d.deviation;
      prev_err = d.error_bound;
    }
  }

  TEST_CASE("predictor identity on the main diagonal") {
    for (std::size_t n : {3, 17, 256}) {
      for (double delta : {0.25, 0.5, 1.0}) {
        const double c = clt_rate_exponent(delta);
        CHECK(c == doctest::Approx(delta * delta / ((1 + delta) * (1 + delta))).epsilon(1e-15));
        CHECK(clt_predictor(SimplexPoint::equal(n), delta) ==
              doctest::Approx(std::pow(static_cast<double>(n), -c)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("synthetic rate fits") {
    const auto a = fit_rate(synthetic(1.0, -1.0));
    CHECK(std::abs(a.slope + 1.0) < 1e-12);
    CHECK(a.points_used == 5);
    const auto b = fit_rate(synthetic(3.0, -0.25));
    CHECK(std::abs(b.slope + 0.25) < 1e-12);
    CHECK(std::abs(b.intercept - std::log(3.0)) < 1e-12);
    auto few = synthetic(1.0, -1.0);
    few.resize(2);
    CHECK_THROWS_AS(fit_rate(few), DomainError);
  }

  TEST_CASE("constant fit") {
    const auto rows = synthetic(2.0, -0.25);
    const auto f = fit_constant(rows);
    CHECK(f.constant == doctest::Approx(2.0 / std::log(2.0)).epsilon(1e-12));
    CHECK(f.stability_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("run_clt ordering and csv") {
    CltConfig cfg;
    cfg.base_model = ScalarMixerAtomic({1, 2}, {0.5, 0.5});
    cfg.n_values = {4, 8};
    cfg.deltas = {0.5, 1.0};
    const auto rows = run_clt(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].dev.n == 4);
    CHECK(rows[0].delta == 0.5);
    CHECK(rows[1].delta == 1.0);
    CHECK(rows[2].dev.n == 8);
    const auto csv = clt_rows_to_csv(rows);
    CHECK(csv.rfind("n,d,delta,scheme,deviation,error_bound,predictor,method,m,samples\n", 0) == 0);
  }

  TEST_CASE("rademacher type") {
    CHECK(type_constant({2.0, 1.0}) == 1.0);
    CHECK(type_constant({1.5, 0.5}) == 1.0);
    CHECK(type_constant({4.0, 1.0}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(type_constant({1.5, 1.0}), DomainError);

    const Matrix v = (Matrix(2, 2) << 1.0, 0.3, 0.3, -0.5).finished();
    CHECK(rademacher_ratio(std::vector<Matrix>(5, v), 2.0, 1.0, TypeNorm::Schatten) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rademacher_ratio({v}, 3.0, 0.5, TypeNorm::Schatten) <= 1.0);

    TypeCheckSpec spec{4.0, 1.0, 12, 8, 100, 5};
    const auto r = check_rademacher_type(spec);
    CHECK(r.pass);
    CHECK(r.worst_ratio <= 1.0);
    CHECK(r.sign_patterns == 4096);
    CHECK(r.exhaustive);

    spec.n = 21;
    CHECK_THROWS_AS(check_rademacher_type(spec), CapacityError);
  }

  TEST_CASE("moment conditions") {
    const auto a = moment_condition_report(ScalarMixerAtomic({1, 2}, {0.5, 0.5}), 0.5);
    CHECK(a.pos_moment == doctest::Approx(0.5 + 0.5 * std::pow(2.0, 3.0)));
    CHECK(a.neg_moment == doctest::Approx(0.5 + 0.5 * std::pow(2.0, -3.0)));
    CHECK(a.admitted);
    const StableMixerSpec gg{StableKind::GeneralizedGaussianMixer, 1.5, 0};
    const auto b = moment_condition_report(gg, 0.2);
    CHECK(std::isfinite(b.pos_moment));
    CHECK(std::isfinite(b.neg_moment));
    CHECK(b.admitted);
    CHECK_FALSE(moment_condition_report(gg, 0.3).admitted);
    const auto c = moment_condition_report(StableMixerSpec{StableKind::PositiveStablePower, 1.0, 0}, 0.25);
    CHECK(std::isinf(c.pos_moment));
    CHECK_FALSE(c.admitted);
  }

  TEST_CASE("config parsing") {
    const auto cfg = clt_config_from_json(nlohmann::json::parse(
        R"({"model":{"type":"scalar_atomic","scales":[1,2],"weights":[0.5,0.5]},"n_values":[4,16],"delta":[0.5]})"));
    CHECK(cfg.n_values.size() == 2);
    CHECK_THROWS_AS(clt_config_from_json(nlohmann::json::parse(R"({"n_value":[4]})")), ConfigError);
  }
}
