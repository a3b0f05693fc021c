#include <cmath>
#include <limits>

#include "bench.hpp"

namespace umm::bench {

namespace {

bool finite_poly(const RealPoly& p) {
  for (double c : p.coeffs())
    if (!std::isfinite(c)) return false;
  return true;
}

}  // namespace

TightnessResult run_tightness(const TightnessConfig& c) {
  TightnessResult res;
  const Dataset data = load_dataset(c.data, c.mnist_dir, c.examples, c.seed);
  for (std::size_t depth : c.depths) {
    const ProblemSpec problem = mlp_problem(depth, c.width, data, c.seed + 1);
    const ValueAndGrad vg = value_and_grad(problem.graph, problem.init);
    const ExprGraph h = line_restrict(problem.graph, problem.init, scaled(vg.grad, -1.0));
    const double gnorm = std::sqrt(squared_norm(vg.grad));
    const double etabar = c.relative_trust && gnorm > 0.0 ? c.etabar / gnorm : c.etabar;

    std::vector<double> grid(static_cast<std::size_t>(c.samples)), hv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = etabar * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
      hv[i] = eval(h, {{kEtaName, Tensor::scalar(grid[i])}});
    }

    for (int k : c.degrees) {
      double eta_sharp = -1.0, eta_lagrange = -1.0;
      for (RemainderMethod method : c.methods) {
        const DirectionalPoly p = propagate_directional(h, etabar, k, method);
        const RealPoly up = upper_poly(p), lo = lower_poly(p);
        TightnessCurve cv;
        cv.depth = depth;
        cv.k = k;
        cv.method = method;
        cv.etabar = etabar;
        cv.eta = grid;
        cv.h = hv;
        for (double e : grid) {
          cv.upper.push_back(up(e));
          cv.lower.push_back(lo(e));
        }
        cv.eta1 = finite_poly(up) ? minimize_poly_on_interval(up, 0.0, etabar).argmin : 0.0;
        cv.h_at_eta1 = eval(h, {{kEtaName, Tensor::scalar(cv.eta1)}});
        cv.rel_gap = (up(cv.eta1) - lo(cv.eta1)) / (1.0 + std::abs(cv.h_at_eta1));
        if (method == RemainderMethod::Sharp) eta_sharp = cv.eta1;
        else eta_lagrange = cv.eta1;
        res.curves.push_back(std::move(cv));
      }
      if (eta_sharp >= 0.0 && eta_lagrange >= 0.0) {
        const double ratio = eta_lagrange > 0.0 ? eta_sharp / eta_lagrange
                                                : (eta_sharp > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        res.ratios.push_back({depth, k, ratio});
      }
    }
  }
  return res;
}

}  // namespace umm::bench
