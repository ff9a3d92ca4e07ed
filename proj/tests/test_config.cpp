#include <doctest.h>

#include "greenfuzz/config.hpp"
#include "greenfuzz/errors.hpp"

using namespace greenfuzz;

TEST_CASE("config files parse key = value lines") {
  const auto values = parse_config_text(
      "# campaign setup\n"
      "target = synthetic:fork3\n"
      "input = seeds/   # trailing comment\n"
      "max_execs = 5000\n"
      "airtime_max_mult = 5.0\n"
      "parallel = off\n"
      "name = \"quoted value\"\n"
      "\n");
  CHECK(values.at("target") == "synthetic:fork3");
  CHECK(values.at("input") == "seeds/");
  CHECK(config_u64(values, "max_execs") == 5000);
  CHECK(config_double(values, "airtime_max_mult") == doctest::Approx(5.0));
  CHECK_FALSE(config_bool(values, "parallel"));
  CHECK(values.at("name") == "quoted value");
}

TEST_CASE("config parsing rejects malformed content") {
  CHECK_THROWS_AS(parse_config_text("just a line without equals\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("= value\n"), ConfigError);

  const auto values = parse_config_text("n = 12x\nf = 1.2.3\nb = maybe\n");
  CHECK_THROWS_AS(config_u64(values, "n"), ConfigError);
  CHECK_THROWS_AS(config_double(values, "f"), ConfigError);
  CHECK_THROWS_AS(config_bool(values, "b"), ConfigError);
}

TEST_CASE("durations accept unit suffixes") {
  CHECK(parse_duration_seconds("90") == doctest::Approx(90.0));
  CHECK(parse_duration_seconds("10s") == doctest::Approx(10.0));
  CHECK(parse_duration_seconds("5m") == doctest::Approx(300.0));
  CHECK(parse_duration_seconds("2h") == doctest::Approx(7200.0));
  CHECK(parse_duration_seconds("0.5s") == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_duration_seconds("fast"), ConfigError);
  CHECK_THROWS_AS(parse_duration_seconds("-3s"), ConfigError);
  CHECK_THROWS_AS(parse_duration_seconds(""), ConfigError);
}

TEST_CASE("missing config files are configuration errors") {
  CHECK_THROWS_AS(parse_config_file("/no/such/config.toml"), ConfigError);
}
