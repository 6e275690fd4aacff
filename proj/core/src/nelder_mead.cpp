#include "metaopt/nelder_mead.hpp"

#include <algorithm>
#include <numeric>

#include "metaopt/errors.hpp"

namespace metaopt {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
  if (start.empty()) throw DimensionError("Nelder-Mead needs at least one parameter");
  if (options.max_evaluations == 0) throw ConfigError("Nelder-Mead needs an evaluation budget");
  const std::size_t dim = start.size();

  NelderMeadResult result;
  result.x = start;
  auto evaluate = [&](const std::vector<double>& x) {
    const double v = objective(x);
    ++result.evaluations;
    result.trace.push_back(v);
    if (result.evaluations == 1 || v < result.value) {
      result.value = v;
      result.x = x;
    }
    return v;
  };
  auto budget_left = [&] { return result.evaluations < options.max_evaluations; };

  std::vector<std::vector<double>> simplex{start};
  std::vector<double> values{evaluate(start)};
  for (std::size_t d = 0; d < dim && budget_left(); ++d) {
    auto vertex = start;
    vertex[d] += options.initial_step;
    values.push_back(evaluate(vertex));
    simplex.push_back(std::move(vertex));
  }
  if (simplex.size() < dim + 1) return result;

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim);
  auto along = [&](double t, const std::vector<double>& worst) {
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = centroid[d] + t * (worst[d] - centroid[d]);
    return x;
  };

  while (budget_left()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - 1];
    if (values[worst] - values[best] <= options.value_tolerance) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= dim; ++v) {
      if (v == worst) continue;
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[v][d];
    }
    for (auto& c : centroid) c /= static_cast<double>(dim);

    auto reflected = along(-1.0, simplex[worst]);
    const double fr = evaluate(reflected);
    if (fr < values[best]) {
      if (!budget_left()) {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
        break;
      }
      auto expanded = along(-2.0, simplex[worst]);
      const double fe = evaluate(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = std::move(reflected);
      values[worst] = fr;
      continue;
    }
    if (!budget_left()) break;
    // Outside contraction when the reflection beat the worst point, inside otherwise.
    const bool outside = fr < values[worst];
    auto contracted = along(outside ? -0.5 : 0.5, simplex[worst]);
    const double fc = evaluate(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = fc;
      continue;
    }
    for (std::size_t v = 0; v <= dim && budget_left(); ++v) {
      if (v == best) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        simplex[v][d] = simplex[best][d] + 0.5 * (simplex[v][d] - simplex[best][d]);
      }
      values[v] = evaluate(simplex[v]);
    }
  }
  return result;
}

}  // namespace metaopt
