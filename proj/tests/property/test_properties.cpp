#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../support/properties.hpp"

using namespace doalab::testing;

namespace {

void run_module(const std::string& module) {
  std::size_t seen = 0;
  for (const auto& p : all_properties()) {
    if (p.module != module) continue;
    ++seen;
    const auto outcome = p.run(kDefaultCases, 0x5eed0000 + seen);
    INFO(p.module << "/" << p.name << ": " << outcome.failures << " of " << outcome.cases
                  << " failed; first: " << outcome.first_failure);
    CHECK(outcome.cases >= kDefaultCases);
    CHECK(outcome.passed());
  }
  CHECK(seen > 0);
}

}  // namespace

TEST_CASE("signal_core properties") { run_module("signal_core"); }
TEST_CASE("tde properties") { run_module("tde"); }
TEST_CASE("head_geometry properties") { run_module("head_geometry"); }
TEST_CASE("frame_classify properties") { run_module("frame_classify"); }
TEST_CASE("doa_pipeline properties") { run_module("doa_pipeline"); }
TEST_CASE("param_opt properties") { run_module("param_opt"); }
TEST_CASE("scene_sim properties") { run_module("scene_sim"); }
TEST_CASE("cli properties") { run_module("cli"); }
