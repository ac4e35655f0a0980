#include "hwave/config.hpp"

#include <doctest.h>

#include <algorithm>

using namespace hwave;

namespace {

bool mentions(const ConfigError& e, const std::string& field) {
  return std::any_of(e.problems.begin(), e.problems.end(),
                     [&](const std::string& p) { return p.find(field) != std::string::npos; });
}

const char* kMinimal = R"({
  "backend": {"type": "abelian", "d": 2, "coefficients": [1, 1], "order": 1},
  "grid": {"points": 16, "half_width": 6},
  "equation": {"b": 2, "m": 2},
  "data": {"u0": {"alpha": 0.5}, "data_norm": 0.01},
  "time": {"t_end": 4, "steps": 8}
})";

}  // namespace

TEST_CASE("empty config lists the required fields") {
  try {
    parse_config("{}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    for (const char* f : {"backend", "grid", "equation.b", "equation.m", "data.u0", "time.t_end", "time.steps"}) {
      CAPTURE(f);
      CHECK(mentions(e, f));
    }
  }
}

TEST_CASE("field-level validation") {
  std::string text = kMinimal;
  text.replace(text.find("\"b\": 2"), 6, "\"b\": 0");
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "equation.b: must be > 0"));
  }
  std::string typo = kMinimal;
  typo.replace(typo.find("\"steps\""), 7, "\"stepz\"");
  try {
    parse_config(typo);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "time.stepz: unknown field"));
    CHECK(mentions(e, "time.steps: required field missing"));
  }
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config round-trips losslessly") {
  auto c = parse_config(kMinimal);
  c.data.u1 = GaussianSpec{0.1 + 0.2, 1.0 / 3, 2.0, -1.5, 0.7};
  c.b = 0.1 * 3;
  c.gn.q_values = {"8/3", "3"};
  c.seed = 0xFFFFFFFFFFFFFFFFull;
  const auto again = parse_config(serialize_config(c));
  CHECK(again == c);
  CHECK(serialize_config(again) == serialize_config(c));
}

TEST_CASE("build_problem normalizes the data") {
  const auto c = parse_config(kMinimal);
  const auto p = build_problem(c);
  CHECK(data_norm(p.u0, p.u1, p.provider) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(p.data_scale > 0.0);
  const auto nl = build_nonlinearity(c);
  CHECK(nl.is_zero());
}
