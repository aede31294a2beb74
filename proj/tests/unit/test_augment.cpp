#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "nilmaug/augment.hpp"
#include "nilmaug/kkt.hpp"
#include "oracles.hpp"

using namespace nilmaug;
using testing::series;

namespace {

// Two anchors one minute apart on a 60 s series.
PowerSeries pair(double a, double b) { return series({a, b}, 60); }

ApplianceTrace trace(const std::string& name, const std::vector<double>& v) {
  return {name, group_of(name), series(v, 1, 0, name)};
}

}  // namespace

TEST_CASE("stepwise example 100 -> 200, k = 4") {
  const PowerSeries out = augment_stepwise(pair(100, 200), 1, {4});
  REQUIRE(out.size() == 61);
  CHECK(out.period == 1);
  CHECK(out.samples[0].real_w == 100);
  for (int d = 1; d <= 15; ++d) CHECK(out.samples[d].real_w == 125);
  for (int d = 16; d <= 30; ++d) CHECK(out.samples[d].real_w == 150);
  for (int d = 31; d <= 45; ++d) CHECK(out.samples[d].real_w == 175);
  for (int d = 46; d <= 60; ++d) CHECK(out.samples[d].real_w == 200);
}

TEST_CASE("stepwise identity and k = 1") {
  for (int k : {1, 2, 3, 4, 6, 10})
    for (const Sample& s : augment_stepwise(pair(100, 100), 1, {k}).samples) CHECK(s.real_w == 100);
  const PowerSeries out = augment_stepwise(pair(100, 200), 1, {1});
  for (int d = 1; d <= 60; ++d) CHECK(out.samples[d].real_w == 200);
}

TEST_CASE("stepwise is bounded and monotone between anchors") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> v(0, 2000);
  std::uniform_int_distribution<int> kd(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = v(rng), b = v(rng);
    const PowerSeries out = augment_stepwise(pair(a, b), 1, {kd(rng)});
    for (int d = 1; d < 60; ++d) {
      const double x = out.samples[d].real_w;
      CHECK(x >= std::min(a, b));
      CHECK(x <= std::max(a, b));
      if (b >= a) CHECK(x >= out.samples[d - 1].real_w);
    }
  }
}

TEST_CASE("augmentation honours the gap policy") {
  // Anchors at minutes 0, 1, 3, 4: the 1 -> 3 pair is two periods apart.
  const PowerSeries s = series({10, 20, NAN, 40, 50}, 60);
  for (const AugmentMethod& m : {AugmentMethod{StepwiseParams{}}, AugmentMethod{SplineParams{}},
                                 AugmentMethod{DentonParams{}}}) {
    const PowerSeries out = augment(s, 1, m);
    for (const Sample& smp : out.samples) CHECK((smp.offset <= 60 || smp.offset >= 180));
    CHECK(out.size() == 61 + 61);
  }
  GapPolicy wide{2.0};
  const PowerSeries bridged = augment_stepwise(s, 1, {}, wide);
  CHECK(bridged.size() == 241);
}

TEST_CASE("single-anchor windows are emitted alone") {
  const PowerSeries s = series({10, NAN, 30, 40}, 60);
  const PowerSeries out = augment_cubic_spline(s, 1, {});
  REQUIRE(out.size() == 1 + 61);
  CHECK(out.samples[0].offset == 0);
  CHECK(out.samples[0].real_w == 10);
  CHECK(out.samples[1].offset == 120);
}

TEST_CASE("argument errors") {
  CHECK_THROWS_AS(augment_stepwise(series({1}, 60), 1, {}), DataError);
  CHECK_THROWS_AS(augment_stepwise(pair(1, 2), 7, {}), ConfigError);
  CHECK_THROWS_AS(augment_stepwise(pair(1, 2), 1, {0}), ConfigError);
  CHECK_THROWS_AS(augment_device(pair(1, 2), 1, {5.0, {}}), ConfigError);
  CHECK_THROWS_AS(augment_stepwise(pair(1, 2), 1, {}, GapPolicy{0.0}), ConfigError);
}

TEST_CASE("cubic spline augmentation") {
  const PowerSeries ramp = augment_cubic_spline(pair(100, 160), 1, {});
  CHECK(ramp.samples[30].real_w == doctest::Approx(130).epsilon(1e-15));

  for (const Sample& s : augment_cubic_spline(series({7, 7, 7, 7}, 60), 1, {}).samples)
    CHECK(s.real_w == doctest::Approx(7).epsilon(1e-15));

  const PowerSeries sym = augment_cubic_spline(series({100, 200, 100}, 60), 1, {});
  const oracle::DenseSpline dense({{0, 100}, {60, 200}, {120, 100}});
  REQUIRE(sym.size() == 121);
  for (int d = 0; d <= 120; ++d) {
    CHECK(std::abs(sym.samples[d].real_w - sym.samples[120 - d].real_w) < 1e-9);
    CHECK(std::abs(sym.samples[d].real_w - dense(d)) < 1e-9);
  }
  CHECK(sym.samples[60].real_w == 200);
}

TEST_CASE("denton examples") {
  const GridAnchor one[] = {{0, 42.0}};
  for (double x : denton_cholette(60, one)) CHECK(x == doctest::Approx(42).epsilon(1e-12));

  const GridAnchor two[] = {{0, 100.0}, {60, 160.0}};
  const auto x = denton_cholette(120, two);
  const Eigen::VectorXd ref = oracle::denton(120, {{0, 100.0}, {60, 160.0}}, {});
  for (std::size_t t = 0; t < 120; ++t) {
    CHECK(std::abs(x[t] - ref(static_cast<Eigen::Index>(t))) < 1e-8);
    const double ramp = t <= 60 ? 100.0 + static_cast<double>(t) : 160.0;
    CHECK(std::abs(x[t] - ramp) < 1e-8);
  }

  std::vector<double> p(90);
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = 50.0 + 30.0 * std::sin(0.1 * static_cast<double>(t));
  const GridAnchor on_p[] = {{0, p[0]}, {30, p[30]}, {89, p[89]}};
  const auto fit = denton_cholette(p.size(), on_p, p);
  for (std::size_t t = 0; t < p.size(); ++t) CHECK(std::abs(fit[t] - p[t]) < 1e-8);
  CHECK(denton_objective(fit, p) < 1e-12);
}

TEST_CASE("denton anchor conflicts") {
  const GridAnchor dup[] = {{3, 1.0}, {3, 1.0}, {7, 2.0}};
  CHECK(denton_cholette(10, dup)[3] == doctest::Approx(1.0));
  const GridAnchor clash[] = {{3, 1.0}, {3, 2.0}};
  CHECK_THROWS_AS(denton_cholette(10, clash), DataError);
  const GridAnchor outside[] = {{10, 1.0}};
  CHECK_THROWS_AS(denton_cholette(10, outside), ConfigError);
  const GridAnchor none[] = {{0, 1.0}};
  std::vector<double> bad_indicator(3);
  CHECK_THROWS_AS(denton_cholette(10, none, bad_indicator), ConfigError);
  CHECK_THROWS_AS(denton_cholette(10, {}), DegenerateProblem);
}

TEST_CASE("denton series augmentation with an indicator") {
  std::vector<double> p(121);
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = static_cast<double>(t % 17);
  DentonParams params;
  params.indicator = series(p);
  const PowerSeries low = series({p[0], p[60], p[120]}, 60);
  const PowerSeries out = augment_denton_cholette(low, 1, params);
  for (std::size_t t = 0; t < p.size(); ++t) CHECK(std::abs(out.samples[t].real_w - p[t]) < 1e-8);

  std::vector<double> holey = p;
  holey[30] = NAN;
  params.indicator = series(holey);
  CHECK_THROWS_AS(augment_denton_cholette(low, 1, params), DataError);
}

TEST_CASE("device interpolation examples") {
  std::vector<double> steps(61, 0.0);
  for (int t = 23; t <= 60; ++t) steps[t] = 95;
  DeviceParams p{5.0, {trace("tv", steps)}};
  PowerSeries out = augment_device(pair(100, 200), 1, p);
  for (int d = 1; d <= 22; ++d) CHECK(out.samples[d].real_w == 100);
  for (int d = 23; d <= 60; ++d) CHECK(out.samples[d].real_w == 200);

  p.traces = {trace("tv", std::vector<double>(61, 40.0))};
  out = augment_device(pair(100, 200), 1, p);
  for (int d = 0; d < 60; ++d) CHECK(out.samples[d].real_w == 100);
  CHECK(out.samples[60].real_w == 200);

  std::vector<double> small(61, 0.0);
  for (int t = 10; t <= 60; ++t) small[t] = 4;
  p.traces = {trace("tv", small)};
  out = augment_device(pair(100, 200), 1, p);
  for (int d = 0; d < 60; ++d) CHECK(out.samples[d].real_w == 100);
}

TEST_CASE("device interpolation falls back to a hold on trace holes") {
  std::vector<double> v(121, 0.0);
  for (int t = 10; t <= 120; ++t) v[t] = 500;
  for (int t = 70; t <= 120; ++t) v[t] = 1000;
  v[100] = NAN;
  DeviceParams p{5.0, {trace("kettle", v)}};
  Warnings w;
  const PowerSeries out = augment_device(series({0, 500, 1000}, 60), 1, p, {}, &w);
  CHECK(out.samples[9].real_w == 0);
  CHECK(out.samples[10].real_w == 500);
  for (int d = 61; d < 120; ++d) CHECK(out.samples[d].real_w == 500);
  CHECK(w.size() == 1);
}

TEST_CASE("device interior values are one of the two anchors") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> v(0, 3000);
  std::bernoulli_distribution flip(0.02);
  std::vector<double> tr(601);
  double level = 0;
  for (double& x : tr) {
    if (flip(rng)) level = level > 0 ? 0 : 800;
    x = level;
  }
  std::vector<double> anchors(11);
  for (double& a : anchors) a = v(rng);
  const PowerSeries out = augment_device(series(anchors, 60), 1, {5.0, {trace("pc", tr)}});
  for (const Sample& s : out.samples) {
    const auto i = static_cast<std::size_t>(s.offset / 60);
    const bool ok = s.real_w == anchors[i] || (i + 1 < anchors.size() && s.real_w == anchors[i + 1]);
    CHECK(ok);
  }
}

TEST_CASE("reactive channel is augmented with the same rule") {
  PowerSeries s = pair(100, 200);
  s.samples[0].reactive_var = 10;
  s.samples[1].reactive_var = 50;
  const PowerSeries out = augment_stepwise(s, 1, {4});
  REQUIRE(out.has_reactive());
  CHECK(*out.samples[1].reactive_var == 20);
  CHECK(*out.samples[60].reactive_var == 50);
  CHECK(downsample_first(out, 60) == s);
  for (const AugmentMethod& m :
       {AugmentMethod{SplineParams{}}, AugmentMethod{DentonParams{}}}) {
    const PowerSeries r = augment(s, 1, m);
    CHECK(*r.samples.front().reactive_var == 10);
    CHECK(std::abs(*r.samples.back().reactive_var - 50) < 1e-9);
  }
}

TEST_CASE("dispatch is bit-identical to the direct calls") {
  const PowerSeries s = series({100, 250, 90, 400}, 60);
  CHECK(augment(s, 1, {StepwiseParams{4}}) == augment_stepwise(s, 1, {4}));
  CHECK(augment(s, 1, {SplineParams{}}) == augment_cubic_spline(s, 1, {}));
  CHECK(augment(s, 1, {DentonParams{}}) == augment_denton_cholette(s, 1, {}));
  std::vector<double> tr(181, 0);
  for (int t = 77; t < 181; ++t) tr[t] = 300;
  const DeviceParams dp{5.0, {trace("tv", tr)}};
  CHECK(augment(s, 1, {dp}) == augment_device(s, 1, dp));
}

TEST_CASE("method config json") {
  using nlohmann::json;
  CHECK(std::get<StepwiseParams>(method_from_json(json{{"method", "stepwise"}, {"k", 6}}).params).k == 6);
  CHECK(method_from_json(json{{"method", "cubic"}}).name() == "spline");
  CHECK(method_from_json(json{{"method", "denton"}, {"conversion", "first"}}).name() == "denton");
  CHECK(std::get<DeviceParams>(method_from_json(json{{"method", "device"}, {"threshold_w", 8}}).params).threshold_w ==
        8);
  CHECK(method_to_json({StepwiseParams{4}}) == json{{"method", "stepwise"}, {"k", 4}});
  CHECK(method_to_json({DentonParams{}}) == json{{"method", "denton"}, {"conversion", "first"}});
  CHECK_THROWS_AS(method_from_json(json{{"method", "lanczos"}}), ConfigError);
  CHECK_THROWS_AS(method_from_json(json{{"method", "stepwise"}, {"k", 0}}), ConfigError);
  CHECK_THROWS_AS(method_from_json(json{{"method", "stepwise"}, {"k", "four"}}), ConfigError);
  CHECK_THROWS_AS(method_from_json(json{{"method", "denton"}, {"conversion", "sum"}}), ConfigError);
  CHECK_THROWS_AS(method_from_json(json{{"k", 4}}), ConfigError);
}
