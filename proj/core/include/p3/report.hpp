#pragma once

#include <string>
#include <vector>

#include "p3/expr.hpp"

namespace p3 {

// Result of sampling one residual identity over a box.
struct ResidualReport {
  std::string check;
  int samples = 0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  Vec3 argmax{0, 0, 0};
  double tolerance = 0.0;
  std::string normalization;  // "term_sum", "vgradH" or "none"
  bool pass = false;

  std::string to_text() const;
  std::string to_json() const;
};

std::string reports_to_text(const std::vector<ResidualReport>& rs);
std::string reports_to_json(const std::vector<ResidualReport>& rs);
bool all_pass(const std::vector<ResidualReport>& rs);

}  // namespace p3
