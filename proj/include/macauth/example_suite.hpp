#pragma once

// Reproduction suite for the worked example: matrix identity, simulatability of
// the plain encoder, admissibility of the auxiliary encoder, rate trend, and the
// reliability / attack / detection simulations.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "macauth/parallel.hpp"

namespace macauth {

struct SuiteCheck {
  int id = 0;
  std::string name;
  bool pass = false;
  nlohmann::json values;
  double seconds = 0.0;
};

struct SuiteOptions {
  std::size_t trials = 2000;
  std::uint64_t seed = 2024;
  Execution exec = Execution::parallel;
};

std::vector<SuiteCheck> run_example_suite(const SuiteOptions& opt = {});

}  // namespace macauth
