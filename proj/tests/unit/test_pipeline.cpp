#include <doctest.h>

#include "dispersim/error.hpp"
#include "dispersim/pipeline.hpp"

using namespace dispersim;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c = parse_config(
      "[scenario]\nmodes = [\"longitudinal\"]\n"
      "[beam]\nsensor_count = 4\n"
      "[grid]\nstart = \"10 Hz\"\nstop = \"3 kHz\"\nresolution = \"5 Hz\"\n"
      "[bands.flexural]\nedges = [\"10 Hz\", \"3 kHz\"]\npoles = [40]\n"
      "[bands.longitudinal]\nedges = [\"10 Hz\", \"3 kHz\"]\npoles = [6]\n");
  return c;
}

}  // namespace

TEST_CASE("fitting is deterministic") {
  const ScenarioConfig c = small_config();
  const FrfDataset frf = synthesize(c, ExcitationMode::Longitudinal);
  CHECK(frf.n_channels() == 4);
  const ModelArtifact a = fit_dataset(frf, c);
  const ModelArtifact b = fit_dataset(frf, c);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.f_max_hz == 3000.0);
}

TEST_CASE("a sweep outside the fitted range is refused") {
  const ScenarioConfig c = small_config();
  const ModelArtifact a = fit_dataset(synthesize(c, ExcitationMode::Longitudinal), c);
  CHECK_THROWS_AS(estimate_dispersion(a, c), ValidationError);
}
