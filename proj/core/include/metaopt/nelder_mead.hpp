#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace metaopt {

struct NelderMeadOptions {
  std::size_t max_evaluations = 500;
  double initial_step = 0.5;
  /// Stop once the spread of simplex values falls below this.
  double value_tolerance = 1e-12;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> trace;  // objective value of every evaluation, in order
};

/// Derivative-free downhill simplex (reflection 1, expansion 2, contraction
/// 1/2, shrink 1/2). Never evaluates more than max_evaluations points.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace metaopt
