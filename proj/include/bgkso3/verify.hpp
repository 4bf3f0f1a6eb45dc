#pragma once

#include <string>
#include <vector>

#include "bgkso3/quadrature.hpp"

namespace bgkso3 {

struct VerifyCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  bool ok = false;
};

std::vector<std::string> suite_names();

// Runs the named invariant suite ("all" runs every module suite).
// Unknown names throw std::invalid_argument.
VerifyReport run_suite(const std::string &name, const QuadratureConfig &cfg = {});

}  // namespace bgkso3
