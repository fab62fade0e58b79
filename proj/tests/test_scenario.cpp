// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "cfisac/scenario.hpp"
#include "doctest.h"

using namespace cfisac;

TEST_CASE("geometry is deterministic and stays inside the deployment area") {
  SystemConfig cfg;
  Geometry g1 = generate_geometry(cfg, 42);
  Geometry g2 = generate_geometry(cfg, 42);
  REQUIRE(g1.ap_pos.size() == static_cast<size_t>(cfg.M));
  REQUIRE(g1.ue_pos.size() == static_cast<size_t>(cfg.K));
  REQUIRE(g1.zone_pos.size() == static_cast<size_t>(cfg.L));
  for (size_t i = 0; i < g1.ap_pos.size(); ++i)
    CHECK(g1.ap_pos[i] == g2.ap_pos[i]);
  for (const auto& pos : g1.ap_pos) {
    CHECK(pos.x() >= 0.0);
    CHECK(pos.x() <= cfg.area_side);
    CHECK(pos.y() >= 0.0);
    CHECK(pos.y() <= cfg.area_side);
  }
}

TEST_CASE("geometry with M = 1 has exactly one ap") {
  SystemConfig cfg;
  cfg.M = 1;
  Geometry g = generate_geometry(cfg, 3);
  CHECK(g.ap_pos.size() == 1);
}

TEST_CASE("path loss power law") {
  SystemConfig cfg;
  cfg.M = 1;
  cfg.K = 2;
  cfg.L = 1;
  Geometry geo;
  geo.ap_pos = {{0.0, 0.0}};
  geo.ue_pos = {{1.0, 0.0}, {2.0, 0.0}};
  geo.zone_pos = {{100.0, 0.0}};

  PathLossModel model;
  model.reference_loss_db = 0.0;
  model.reference_distance = 1.0;
  model.exponent = 3.76;
  model.min_distance = 1.0;

  LargeScale ls = large_scale(cfg, geo, model);
  CHECK(ls.beta(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ls.beta(0, 1) ==
        doctest::Approx(std::pow(2.0, -3.76)).epsilon(1e-12));
  // hand value of 2^-3.76
  CHECK(ls.beta(0, 1) == doctest::Approx(0.0738).epsilon(1e-3));
  // zone due east of the ap sits at bearing 0
  CHECK(ls.theta(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("reference loss sets beta at the reference distance") {
  SystemConfig cfg;
  cfg.M = 1;
  cfg.K = 1;
  cfg.L = 1;
  Geometry geo;
  geo.ap_pos = {{0.0, 0.0}};
  geo.ue_pos = {{1.0, 0.0}};
  geo.zone_pos = {{1.0, 0.0}};
  PathLossModel model;
  model.reference_loss_db = 30.0;
  model.min_distance = 1.0;
  LargeScale ls = large_scale(cfg, geo, model);
  CHECK(ls.beta(0, 0) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("distance clamp and monotonicity of the path loss") {
  SystemConfig cfg;
  cfg.M = 1;
  cfg.K = 3;
  cfg.L = 1;
  Geometry geo;
  geo.ap_pos = {{0.0, 0.0}};
  geo.ue_pos = {{2.0, 0.0}, {40.0, 0.0}, {80.0, 0.0}};
  geo.zone_pos = {{100.0, 0.0}};
  PathLossModel model;  // min_distance 10
  LargeScale ls = large_scale(cfg, geo, model);
  // inside the clamp both evaluate at min_distance
  Geometry geo2 = geo;
  geo2.ue_pos[0] = {5.0, 0.0};
  LargeScale ls2 = large_scale(cfg, geo2, model);
  CHECK(ls.beta(0, 0) == doctest::Approx(ls2.beta(0, 0)).epsilon(1e-12));
  // beyond the clamp farther means strictly smaller
  CHECK(ls.beta(0, 1) > ls.beta(0, 2));
}

TEST_CASE("lmmse gamma") {
  CHECK(lmmse_gamma(0.0, 4, 0.25) == doctest::Approx(0.0));
  // tau_t rho_t = 1, beta = 1 -> 1/2
  CHECK(lmmse_gamma(1.0, 4, 0.25) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(lmmse_gamma(-1.0, 4, 0.25));
  // 0 <= gamma <= beta, improving in rho_t
  double prev = 0.0;
  for (double rho_t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double g = lmmse_gamma(2.0, 4, rho_t);
    CHECK(g >= prev);
    CHECK(g <= 2.0);
    prev = g;
  }
  CHECK(prev / 2.0 > 0.99);  // asymptote gamma/beta -> 1
}

TEST_CASE("array response") {
  Eigen::VectorXcd a = array_response(0.7, 6, 0.5);
  REQUIRE(a.size() == 6);
  CHECK(std::abs(a(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
  for (int n = 0; n < 6; ++n) CHECK(std::abs(std::abs(a(n)) - 1.0) < 1e-12);

  Eigen::VectorXcd broadside = array_response(0.0, 4, 0.5);
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(broadside(n) - std::complex<double>(1.0, 0.0)) < 1e-12);

  Eigen::VectorXcd endfire = array_response(M_PI / 2.0, 2, 0.5);
  CHECK(std::abs(endfire(1) - std::complex<double>(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("array gain closed form") {
  CHECK(array_gain(0.3, 0.3, 4, 0.5) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(array_gain(0.1, 1.2, 1, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  // sin(t1) - sin(t2) = 1 with N = 2 and half-wavelength spacing cancels
  CHECK(array_gain(M_PI / 2.0, 0.0, 2, 0.5) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // symmetry and agreement with the inner-product definition
  for (double t1 : {-1.2, -0.4, 0.0, 0.9}) {
    for (double t2 : {-0.8, 0.2, 1.3}) {
      const double g12 = array_gain(t1, t2, 5, 0.5);
      const double g21 = array_gain(t2, t1, 5, 0.5);
      CHECK(g12 == doctest::Approx(g21).epsilon(1e-12));
      const Eigen::VectorXcd a1 = array_response(t1, 5, 0.5);
      const Eigen::VectorXcd a2 = array_response(t2, 5, 0.5);
      const double inner = std::norm(a1.dot(a2));  // |a1^dagger a2|^2
      CHECK(g12 == doctest::Approx(inner).epsilon(1e-10));
    }
  }
}

TEST_CASE("channel stats bundle") {
  SystemConfig cfg;
  PathLossModel model;
  Geometry geo = generate_geometry(cfg, 9);
  ChannelStats stats = make_channel_stats(cfg, geo, model);
  REQUIRE(stats.beta.rows() == cfg.M);
  REQUIRE(stats.beta.cols() == cfg.K);
  REQUIRE(stats.zeta.rows() == cfg.M);
  REQUIRE(stats.zeta.cols() == cfg.L);
  REQUIRE(stats.array_gain.size() == static_cast<size_t>(cfg.M));
  for (int m = 0; m < cfg.M; ++m) {
    for (int k = 0; k < cfg.K; ++k) {
      CHECK(stats.gamma(m, k) >= 0.0);
      CHECK(stats.gamma(m, k) <= stats.beta(m, k));
    }
    for (int l = 0; l < cfg.L; ++l) {
      CHECK(stats.array_gain[m](l, l) ==
            doctest::Approx(double(cfg.N) * cfg.N).epsilon(1e-9));
    }
  }
}

TEST_CASE("config validation") {
  SystemConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.M = 0;
  CHECK_THROWS(cfg.validate());
  PathLossModel model;
  CHECK_NOTHROW(model.validate());
  model.exponent = -1.0;
  CHECK_THROWS(model.validate());
}
