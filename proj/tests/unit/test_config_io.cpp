#include <doctest.h>

#include "annoreg/config.hpp"
#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

using namespace annoreg;

TEST_CASE("config defaults, overrides and canonical text") {
  const RunConfig d;
  CHECK(d.tile_size_px == 598);
  CHECK(d.mask_resolution_um == 7.264);
  CHECK(parse_config(serialize_config(d)) == d);

  const auto c = parse_config("# comment\nseed = 9\n  n_boot=200  # inline\n\n");
  CHECK(c.seed == 9);
  CHECK(c.n_boot == 200);
  CHECK(c.tile_size_px == 598);
  CHECK(parse_config(serialize_config(c)) == c);

  RunConfig e;
  set_config_value(e, "stride_px", "299");
  CHECK(tiling_params(e).stride_px == 299);
  CHECK(prediction_mask_params(e).min_area_px == 4);
  CHECK(config_json(e)["stride_px"] == 299);
  CHECK(config_keys().size() == 12);
}

TEST_CASE("config rejects unknown keys and invalid values") {
  RunConfig c;
  CHECK_THROWS_AS(set_config_value(c, "tile_sise_px", "1"), ValidationError);
  CHECK_THROWS_AS(set_config_value(c, "tile_size_px", "big"), ValidationError);
  CHECK_THROWS_AS(parse_config("tile_size_px = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("min_tissue_fraction = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), Error);
}

TEST_CASE("sha256 of known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("number formatting and parsing") {
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(1.0) == "1");
  CHECK(parse_double(format_shortest(1.0 / 3.0), "x") == 1.0 / 3.0);
  CHECK(format_fixed(0.96449, 3) == "0.964");
  CHECK(format_fixed(0.5, 3) == "0.500");
  CHECK(parse_int(" 42 ", "n") == 42);
  CHECK_THROWS_AS(parse_double("1.5x", "x"), ParseError);
  CHECK_THROWS_AS(parse_int("4.2", "n"), ParseError);
}

TEST_CASE("parse_csv: header, rows, quoting errors and line numbers") {
  const auto t = parse_csv("a,b\n1,2\r\n\n3,4\n", "t");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == "3");
  CHECK(t.line_numbers[1] == 4);
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n", "t"), ParseError);
  CHECK(trim("  x y \t") == "x y");
}
