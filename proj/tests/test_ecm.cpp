#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixture.hpp"
#include "soplab/ecm.hpp"
#include "soplab/errors.hpp"

using namespace soplab;

TEST_SUITE("ecm") {

TEST_CASE("ocv interpolation") {
  const auto lin = OcvCurve::linear(3.0, 1.2);
  CHECK(ocv(lin, 0.5) == doctest::Approx(3.6).epsilon(1e-15));
  CHECK(ocv(lin, 1.0) == 4.2);
  CHECK(ocv(lin, 0.0) == 3.0);
  const OcvCurve three({{0.0, 3.0}, {0.5, 3.5}, {1.0, 4.2}});
  CHECK(ocv(three, 0.75) == doctest::Approx(3.85).epsilon(1e-15));
  CHECK(ocv(three, 0.5) == 3.5);
}

TEST_CASE("ocv clamps outside the knot range") {
  const OcvCurve c({{0.2, 3.2}, {0.8, 3.9}});
  CHECK(c(0.0) == 3.2);
  CHECK(c(1.0) == 3.9);
  CHECK(c.segment_slope(0.1, +1) == 0.0);
}

TEST_CASE("invalid curves are configuration errors") {
  CHECK_THROWS_AS(OcvCurve({{0.0, 3.0}}), ConfigError);
  CHECK_THROWS_AS(OcvCurve({{0.0, 3.0}, {0.0, 3.1}}), ConfigError);
  CHECK_THROWS_AS(OcvCurve({{0.5, 3.0}, {0.2, 3.1}}), ConfigError);
  CHECK_THROWS_AS(OcvCurve({{0.0, 3.5}, {1.0, 3.1}}), ConfigError);
  CHECK_THROWS_AS(OcvCurve({{0.0, 3.0}, {1.5, 3.1}}), ConfigError);
  CHECK_THROWS_AS(OcvCurve({{0.0, NAN}, {1.0, 3.1}}), ConfigError);
}

TEST_CASE("ocv slope") {
  const auto lin = OcvCurve::linear(3.0, 1.2);
  for (double a : {0.0, 0.3, 0.7})
    for (double b : {0.1, 0.3, 0.95}) CHECK(ocv_slope(lin, a, b) == doctest::Approx(1.2).epsilon(1e-12));

  const OcvCurve three({{0.0, 3.0}, {0.5, 3.5}, {1.0, 4.2}});
  CHECK(ocv_slope(three, 0.25, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  // ocv(0.4) = 3.4, ocv(0.6) = 3.5 + 0.1 * 1.4 = 3.64
  CHECK(ocv_slope(three, 0.4, 0.6) == doctest::Approx((3.64 - 3.4) / 0.2).epsilon(1e-12));
  CHECK(ocv_slope(three, 0.4, 0.6) == doctest::Approx(1.2).epsilon(1e-12));
  // Pair closer than the secant threshold falls back to the local slope.
  CHECK(ocv_slope(three, 0.75, 0.75 + 5e-7) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("step examples") {
  const auto p = fx::params();
  const auto c = fx::linear();

  SUBCASE("zero current relaxes vp only") {
    const auto r = step({0.5, 0.1}, p, c, 0.0, 1.0);
    CHECK(r.state.soc == 0.5);
    CHECK(r.state.vp == doctest::Approx(0.1 * std::exp(-0.1)).epsilon(1e-15));
    CHECK(r.vt == doctest::Approx(3.6 - 0.1 * std::exp(-0.1)).epsilon(1e-15));
  }
  SUBCASE("coulomb counting") {
    const auto r = step({0.5, 0.0}, p, c, 2.0, 1.0);
    CHECK(0.5 - r.state.soc == doctest::Approx(2.0 / 7200.0).epsilon(1e-12));
    CHECK(0.5 - r.state.soc == doctest::Approx(2.7778e-4).epsilon(1e-4));
  }
  SUBCASE("fixture 10 A step") {
    const auto r = step({0.5, 0.0}, p, c, 10.0, 1.0);
    const auto ref = fx::ref_step({0.5, 0.0, 0.0}, 10.0, 1.0);
    CHECK(r.state.vp == doctest::Approx(0.028548).epsilon(1e-5));
    CHECK(std::abs(r.state.vp - ref.vp) <= 1e-15);
    CHECK(std::abs(r.vt - ref.vt) <= 1e-14);
    CHECK_FALSE(r.soc_clamped);
  }
  SUBCASE("soc clamps with a flag") {
    const auto r = step({0.0001, 0.0}, p, c, 10.0, 1.0);
    CHECK(r.state.soc == 0.0);
    CHECK(r.soc_clamped);
    const auto up = step({0.9999, 0.0}, p, c, -10.0, 1.0);
    CHECK(up.state.soc == 1.0);
    CHECK(up.soc_clamped);
  }
}

TEST_CASE("parameter and window validation") {
  auto p = fx::params();
  p.r0 = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = fx::params();
  p.coulombic_eff = 1.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = fx::params();
  p.r1 = -0.01;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS((Window{0, 1.0}).validate(), ConfigError);
  CHECK_THROWS_AS((Window{3, 0.0}).validate(), ConfigError);
}

TEST_CASE("predict_cc examples") {
  const auto p = fx::params();
  const auto c = fx::linear();

  SUBCASE("zero current") {
    const auto r = predict_cc({0.4, 0.05}, p, c, 1.2, 0.0, {10, 1.0});
    CHECK(r.soc_end == 0.4);
    CHECK(r.vt_end == doctest::Approx(3.48 - 0.05 * std::exp(-1.0)).epsilon(1e-15));
  }
  SUBCASE("fixture 10 A, K = 10") {
    const auto r = predict_cc({0.5, 0.0}, p, c, 1.2, 10.0, {10, 1.0});
    const double eff = 0.03 * (1.0 - std::exp(-1.0));
    CHECK(r.eff_r1 == doctest::Approx(0.018964).epsilon(1e-4));
    CHECK(r.eff_r1 == doctest::Approx(eff).epsilon(1e-14));
    const double hand = 3.6 - 10.0 * (1.2 * 10.0 / 7200.0 + 0.05 + eff);
    CHECK(r.vt_end == doctest::Approx(hand).epsilon(1e-14));
    CHECK(r.vt_end == doctest::Approx(2.8937).epsilon(1e-4));
    const auto sim = fx::ref_cc(0.5, 0.0, 10.0, 10);
    CHECK(std::abs(r.vt_end - sim.back().vt) <= 1e-12);
    // Self-consistency of the decomposition.
    CHECK(r.vt_end == doctest::Approx(r.ocv_end - r.vp_relax_end - 10.0 * r.eff_r1 - 10.0 * 0.05)
                          .epsilon(1e-15));
  }
  SUBCASE("long window relaxes fully") {
    const auto r = predict_cc({0.5, 0.2}, p, c, 1.2, 0.0, {2000, 1.0});
    CHECK(r.vt_end == doctest::Approx(3.6).epsilon(1e-15));
  }
}

TEST_CASE("closed form matches iteration on a linear curve") {
  const auto p = fx::params();
  const auto c = fx::linear();
  double worst_v = 0.0;
  double worst_soc_excess = 0.0;
  for (int k = 1; k <= 120; ++k) {
    // K rounded subtractions each lose up to half an ulp of SOC (1.1e-16 at
    // soc < 1), so the iterated SOC drifts by up to ~K * 1.1e-16.
    const double soc_tol = std::max(1e-15, k * 1.2e-16);
    for (double current : {-40.0, -17.5, -4.0, -0.3, 0.0, 0.3, 4.0, 17.5, 40.0}) {
      for (double vp : {-0.02, 0.0, 0.05}) {
        // Start where the whole window stays inside [0, 1].
        const BatteryState s0{current >= 0.0 ? 0.9 : 0.1, vp};
        const auto pr = predict_cc(s0, p, c, 1.2, current, {k, 1.0});
        BatteryState s = s0;
        double vt = 0.0;
        for (int j = 0; j < k; ++j) {
          const auto r = step(s, p, c, current, 1.0);
          s = r.state;
          vt = r.vt;
        }
        worst_v = std::max(worst_v, std::abs(pr.vt_end - vt));
        worst_soc_excess = std::max(worst_soc_excess, std::abs(pr.soc_end - s.soc) - soc_tol);
      }
    }
  }
  CHECK(worst_v <= 1e-12);
  CHECK(worst_soc_excess <= 0.0);
}

TEST_CASE("relaxation is strictly monotone") {
  const auto p = fx::params();
  BatteryState s{0.5, 0.1};
  for (int j = 0; j < 50; ++j) {
    const auto r = step(s, p, fx::linear(), 0.0, 1.0);
    CHECK(r.state.vp < s.vp);
    CHECK(r.state.vp > 0.0);
    s = r.state;
  }
}

TEST_CASE("charge symmetry of SOC travel") {
  const auto p = fx::params();
  for (double i : {0.5, 3.0, 9.0}) {
    const auto d = predict_cc({0.5, 0.0}, p, fx::linear(), 1.2, i, {30, 1.0});
    const auto ch = predict_cc({0.5, 0.0}, p, fx::linear(), 1.2, -i, {30, 1.0});
    CHECK(d.soc_end - 0.5 == doctest::Approx(-(ch.soc_end - 0.5)).epsilon(1e-14));
  }
}

TEST_CASE("effective R1 grows with K and stays below R1") {
  const auto p = fx::params();
  double prev = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double e = effective_r1(p, {k, 1.0});
    CHECK(e > prev);
    CHECK(e <= p.r1);
    prev = e;
  }
}

TEST_CASE("simulate_profile") {
  const auto p = fx::params();
  const auto c = fx::linear();

  SUBCASE("single sample gives one row") {
    const std::vector<ProfileSample> prof{{0.0, 0.0}};
    const auto t = simulate_profile({0.5, 0.0}, p, c, prof);
    REQUIRE(t.size() == 1);
    CHECK(t[0].soc == 0.5);
    CHECK(t[0].vt == doctest::Approx(3.6));
  }
  SUBCASE("zero current keeps soc") {
    std::vector<ProfileSample> prof;
    for (int i = 0; i <= 20; ++i) prof.push_back({static_cast<double>(i), 0.0});
    for (const auto& r : simulate_profile({0.42, 0.01}, p, c, prof)) CHECK(r.soc == 0.42);
  }
  SUBCASE("constant current matches predict_cc") {
    std::vector<ProfileSample> prof{{0.0, 0.0}};
    for (int i = 1; i <= 30; ++i) prof.push_back({static_cast<double>(i), 6.0});
    const auto t = simulate_profile({0.5, 0.0}, p, c, prof);
    REQUIRE(t.size() == 31);
    const auto pr = predict_cc({0.5, 0.0}, p, c, 1.2, 6.0, {30, 1.0});
    CHECK(std::abs(t.back().vt - pr.vt_end) <= 1e-12);
    CHECK(std::abs(t.back().soc - pr.soc_end) <= 1e-12);
  }
  SUBCASE("malformed profiles") {
    CHECK_THROWS_AS(simulate_profile({0.5, 0.0}, p, c, std::vector<ProfileSample>{}), InputError);
    const std::vector<ProfileSample> back{{0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(simulate_profile({0.5, 0.0}, p, c, back), InputError);
    const std::vector<ProfileSample> nan{{0.0, 1.0}, {1.0, NAN}};
    CHECK_THROWS_AS(simulate_profile({0.5, 0.0}, p, c, nan), InputError);
  }
}

}
