#include <doctest.h>

#include "dispersim/config.hpp"
#include "dispersim/error.hpp"

using namespace dispersim;

TEST_CASE("quantities with units") {
  CHECK(parse_quantity("48 in", "length") == doctest::Approx(1.2192).epsilon(1e-15));
  CHECK(parse_quantity("2 kHz", "frequency") == 2000.0);
  CHECK(parse_quantity("69 GPa", "pressure") == 69e9);
  CHECK(parse_quantity("2.7 g/cm^3", "density") == doctest::Approx(2700.0));
  CHECK(parse_quantity("4 ms", "time") == doctest::Approx(4e-3));
  CHECK(parse_quantity("0.5", "length") == 0.5);
  CHECK_THROWS_AS(parse_quantity("3 kg", "length"), ValidationError);
}

TEST_CASE("TOML subset") {
  const TomlDocument d = parse_toml("# c\n[a.b]\nx = 1.5 # tail\ny = \"s\"\nz = [1, \"2 in\"]\nw = false\n");
  const auto& s = d.at("a.b");
  CHECK(std::get<double>(s.at("x").value) == 1.5);
  CHECK(std::get<std::string>(s.at("y").value) == "s");
  CHECK(std::get<bool>(s.at("w").value) == false);
  CHECK(s.at("z").line == 5);
  CHECK_THROWS_AS(parse_toml("[a]\nx = 1\nx = 2\n"), ValidationError);
  CHECK_THROWS_AS(parse_toml("[a\n"), ValidationError);
}

TEST_CASE("config errors name the field") {
  try {
    parse_config("[material]\nrho = \"2700 kg/m^3\"\nbogus = 1\n");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[beam]\nsensors = []\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[material]\nE = \"-1 GPa\"\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[bands.flexural]\nedges = [\"10 Hz\", \"50 kHz\"]\npoles = [2, 4]\n"),
                  ValidationError);
}

TEST_CASE("canonical text round-trips") {
  ScenarioConfig c = parse_config(
      "[scenario]\nname = \"pp\"\nmodes = [\"flexural\", \"longitudinal\"]\n"
      "[beam]\nbc_left = \"pinned\"\nbc_right = \"pinned\"\n[fit]\nguard_pairs = 2\n");
  CHECK(c.beam.bc_left == BoundaryCondition::Pinned);
  CHECK(c.vf.guard_pairs == 2);
  CHECK(c.beam.sensor_positions.size() == 23);
  const std::string text = to_toml(c);
  CHECK(to_toml(parse_config(text)) == text);
  CHECK(c.tag(ExcitationMode::Longitudinal) == "longitudinal_pinned-pinned");
}
