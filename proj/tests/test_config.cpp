#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "visco2d/config.hpp"
#include "visco2d/errors.hpp"

using namespace visco2d;

TEST_CASE("accepts a plain coupled configuration") {
  ModelParams m{.a = 1, .beta = 0.3, .delta1 = 1, .delta2 = 0, .epsilon = 0};
  RunConfig r;
  r.grid_size = 64;
  r.dt = 1e-4;
  const auto c = validate(m, r);
  CHECK(c.model == m);
  CHECK(c.run == r);
}

TEST_CASE("beta at the ends of the range needs the extended flag") {
  ModelParams m;
  m.beta = 0;
  CHECK_THROWS_AS(validate(m, RunConfig{}), IncompatibleOptions);
  m.beta = 1;
  CHECK_THROWS_AS(validate(m, RunConfig{}), IncompatibleOptions);
  m.extended_range = true;
  CHECK_NOTHROW(validate(m, RunConfig{}));
}

TEST_CASE("out of range values name their field") {
  ModelParams m;
  m.beta = 1.2;
  try {
    validate(m, RunConfig{});
    FAIL("expected OutOfRange");
  } catch (const OutOfRange& e) {
    CHECK(e.field() == "beta");
  }
  auto field_of = [](ModelParams mp, RunConfig rc) {
    try {
      validate(mp, rc);
    } catch (const OutOfRange& e) {
      return e.field();
    }
    return std::string("none");
  };
  RunConfig r;
  r.grid_size = 63;
  CHECK(field_of(ModelParams{}, r) == "grid_size");
  r = RunConfig{};
  r.grid_size = 6;
  CHECK(field_of(ModelParams{}, r) == "grid_size");
  r = RunConfig{};
  r.galerkin_k = 33;
  CHECK(field_of(ModelParams{}, r) == "galerkin_k");
  r = RunConfig{};
  r.dt = 0;
  r.cfl = 1.5;
  CHECK(field_of(ModelParams{}, r) == "cfl");
  r = RunConfig{};
  r.output_every = 0;
  CHECK(field_of(ModelParams{}, r) == "output_every");
  ModelParams m2;
  m2.delta1 = -1;
  CHECK(field_of(m2, RunConfig{}) == "delta1");
  m2 = ModelParams{};
  m2.epsilon = -1e-3;
  CHECK(field_of(m2, RunConfig{}) == "epsilon");
}

TEST_CASE("presets fix the model constants") {
  RunConfig r;
  ModelParams m;
  m.a = 0.3;
  m.delta2 = 0.7;
  r.preset = Preset::oldroyd_b;
  auto c = validate(m, r);
  CHECK(c.model.a == 1);
  CHECK(c.model.delta2 == 0);
  CHECK(c.model.delta1 == m.delta1);

  r.preset = Preset::giesekus;
  c = validate(m, r);
  CHECK(c.model.a == 1);
  CHECK(c.model.delta1 == 0);
  CHECK(c.model.delta2 == 0.7);

  m.delta2 = 0;
  CHECK_THROWS_AS(validate(m, r), IncompatibleOptions);

  r.preset = Preset::johnson_segalman;
  m.a = 1.5;
  CHECK_THROWS_AS(validate(m, r), OutOfRange);
  m.a = -0.5;
  CHECK(validate(m, r).model.a == -0.5);
}

TEST_CASE("preset beta defaults to 0.01") {
  const auto c = parse_config("preset = oldroyd_b\ndelta1 = 2\n");
  CHECK(c.model.beta == 0.01);
  CHECK_FALSE(c.model.extended_range);
  CHECK(validate(c).model.delta1 == 2);
  CHECK(parse_config("preset = giesekus\nbeta = 0.4\n").model.beta == 0.4);
}

TEST_CASE("validate is idempotent") {
  ModelParams m;
  m.a = 0.2;
  m.delta2 = 3;
  RunConfig r;
  r.preset = Preset::giesekus;
  const auto once = validate(m, r);
  CHECK(validate(once) == once);
}

TEST_CASE("parser rejects unknown and duplicate keys and bad values") {
  CHECK_THROWS_AS(parse_config("viscosity = 2\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("a = 1\na = 2\n"), IncompatibleOptions);
  CHECK_THROWS_AS(parse_config("a = one\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("grid_size = 6.5\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("dealias = maybe\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("a 1\n"), OutOfRange);
  CHECK_THROWS_AS(parse_config("preset = maxwell\n"), OutOfRange);
}

TEST_CASE("comments and blank lines are ignored") {
  const auto c = parse_config("# header\n\n  beta = 0.25   # trailing\n\tgrid_size=32\n");
  CHECK(c.model.beta == 0.25);
  CHECK(c.run.grid_size == 32);
}

TEST_CASE("accepted configs round-trip through the file format bit-exactly") {
  ModelParams m{.a = 0.1 + 0.2, .beta = 1.0 / 3.0, .delta1 = 2.0 / 7.0, .delta2 = 1e-300, .epsilon = 3.3e-5};
  RunConfig r;
  r.grid_size = 48;
  r.t_end = 0.123456789012345678;
  r.dt = 1.0 / 3e4;
  r.cfl = 0.7;
  r.dealias = false;
  r.galerkin_k = 7;
  r.output_every = 3;
  r.seed = 18446744073709551ull;
  r.preset = Preset::johnson_segalman;
  const auto c = validate(m, r);
  const auto back = validate(parse_config(serialize_config(c)));
  CHECK(back == c);
}

TEST_CASE("load_config reports the missing path") {
  try {
    load_config("/nonexistent/visco.cfg");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/visco.cfg") != std::string::npos);
  }
}
