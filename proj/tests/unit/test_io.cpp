#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "dispersim/error.hpp"
#include "dispersim/io.hpp"

using namespace dispersim;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

FrfDataset small_frf() {
  FrfDataset d;
  d.freq_grid = uniform_grid_hz(10.0, 20.0, 2.5);
  d.locations.resize(2);
  d.locations << 0.1 / 3.0, std::sqrt(0.2);
  d.values.resize(2, d.freq_grid.size());
  for (Eigen::Index i = 0; i < d.values.size(); ++i)
    d.values.data()[i] = cdouble(std::sin(1.0 + i) / 7.0, std::exp(-0.3 * i) * 1e-9);
  d.resolution_hz = 2.5;
  d.bc_right = BoundaryCondition::Pinned;
  return d;
}

}  // namespace

TEST_CASE("number formats round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0}) {
    CHECK(same_bits(parse_double(hex_double(v)), v));
    CHECK(same_bits(parse_double(short_double(v)), v));
  }
  CHECK(std::isnan(parse_double("nan")));
  CHECK(parse_double("-inf") == -std::numeric_limits<double>::infinity());
  CHECK(short_double(0.1) == "0.1");
  CHECK_THROWS_AS(parse_double("1.5 m"), ValidationError);
}

TEST_CASE("FRF JSON and CSV round-trip bit for bit") {
  const FrfDataset d = small_frf();
  const FrfDataset j = frf_from_json(Json::parse(to_json(d, "name = \"x\"").dump()));
  CHECK(j.freq_grid == d.freq_grid);
  CHECK(j.locations == d.locations);
  CHECK(j.values == d.values);
  CHECK(j.bc_right == BoundaryCondition::Pinned);
  CHECK(embedded_config(to_json(d, "name = \"x\"")) == "name = \"x\"");

  std::stringstream s;
  write_frf_csv(s, d, "a = 1\nb = 2\n");
  const FrfDataset c = read_frf_csv(s);
  CHECK(c.values == d.values);
  CHECK(c.freq_grid == d.freq_grid);
  std::stringstream again(s.str());
  CHECK(embedded_config_csv(again) == "a = 1\nb = 2\n");
}

TEST_CASE("model JSON round-trips and keeps the realization") {
  ModelArtifact a;
  a.model.poles = PoleSet::from_representatives({{-1.0 / 3.0, 1e3 / 7.0}, {-5.0, 0.0}});
  a.model.residues.resize(1, 3);
  a.model.residues << cdouble(0.7, 0.0), cdouble(0.1, 0.2), cdouble(0.1, -0.2);
  realize(a.model);
  a.locations = Eigen::VectorXd::Constant(1, 0.5);
  a.f_min_hz = 10.0;
  a.f_max_hz = 500.0;
  a.report.rel_error = 1.0 / 3e7;
  const ModelArtifact b = model_from_json(Json::parse(to_json(a).dump()));
  CHECK(b.model.poles.values() == a.model.poles.values());
  CHECK(b.model.residues == a.model.residues);
  CHECK(b.model.A == a.model.A);
  CHECK(b.model.C == a.model.C);
  CHECK(same_bits(b.report.rel_error, a.report.rel_error));
  CHECK(b.f_max_hz == 500.0);
}

TEST_CASE("curve CSV keeps valid bins only") {
  DispersionCurve c;
  c.resize(3);
  c.freq_hz << 1000.0, 2000.0, 3000.0;
  c.k << 0.1, std::nan(""), 1.0 / 3.0;
  c.v_group << 123.456, std::nan(""), 1.0 / 7.0;
  c.spread << 0.5, std::nan(""), 0.25;
  c.n_pairs << 4, 0, 9;
  c.flagged = {false, false, true};
  std::stringstream s;
  write_curve_csv(s, c);
  const DispersionCurve r = read_curve_csv(s);
  REQUIRE(r.size() == 2);
  CHECK(r.freq_hz[1] == 3000.0);
  CHECK(same_bits(r.v_group[1], 1.0 / 7.0));
  CHECK(r.n_pairs[1] == 9);
  CHECK(r.flagged[1]);

  const DispersionCurve j = curve_from_json(Json::parse(to_json(c).dump()));
  CHECK(j.size() == 3);
  CHECK_FALSE(j.valid(1));
  CHECK(same_bits(j.k[2], c.k[2]));
}
