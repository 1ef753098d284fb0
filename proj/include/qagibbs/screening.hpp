#pragma once

// Interaction screening: per-node convex reconstruction of effective Ising
// parameters from a distribution (or the empirical distribution of samples).
//
// For node u with parameters theta_u = (J_uj, h_u) the screening objective is
//
//   S_u(theta) = E[ exp(-s_u (sum_j J_uj s_j + h_u)) ].
//
// On an exact Gibbs input p ~ exp(sum J s s + sum h s) its minimizer is the
// true (J_u., h_u). Reconstructed parameters therefore carry the inverse
// temperature: Gibbs(model, alpha) reconstructs to alpha * (J, h).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/distributions.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/parallel.hpp"
#include "qagibbs/samples.hpp"

namespace qagibbs {

struct NodeParams {
  SiteId node = 0;
  double field = 0.0;
  std::map<SiteId, double> couplings;  // neighbor -> J
};

struct NodeDiagnostics {
  SiteId node = 0;
  double objective = 0.0;  // S_u at the returned parameters
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct ReconstructionResult {
  std::vector<SiteId> sites;
  std::vector<NodeParams> nodes;  // directed estimates, one per site
  std::map<std::pair<SiteId, SiteId>, double> couplings;  // symmetrized, key (min, max)
  std::map<SiteId, double> fields;
  std::vector<NodeDiagnostics> diagnostics;
  double max_asymmetry = 0.0;  // max |J_uv(from u) - J_uv(from v)|
  bool converged = true;

  double coupling(SiteId i, SiteId j) const {
    auto it = couplings.find({std::min(i, j), std::max(i, j)});
    return it == couplings.end() ? 0.0 : it->second;
  }
  double field(SiteId site) const {
    auto it = fields.find(site);
    return it == fields.end() ? 0.0 : it->second;
  }
};

struct ScreeningOptions {
  double gradient_tolerance = 1e-9;
  std::size_t max_iterations = 500;
  double l1 = 0.0;  // penalty on couplings; 0 disables regularization
};

using Edge = std::pair<SiteId, SiteId>;

namespace detail {

inline std::uint32_t site_position(std::span<const SiteId> sites, SiteId site) {
  auto it = std::find(sites.begin(), sites.end(), site);
  if (it == sites.end()) throw ConfigurationMismatch("site " + std::to_string(site) + " not in site list");
  return static_cast<std::uint32_t>(it - sites.begin());
}

// Node-local view of the screening problem: for every state with nonzero
// mass, the feature vector x = -s_u * (s_j for neighbors..., 1) so that the
// screened exponent is theta . x.
class NodeProblem {
 public:
  NodeProblem(const DiscreteDistribution& dist, std::uint32_t node, std::vector<std::uint32_t> neighbors)
      : dim_(static_cast<Eigen::Index>(neighbors.size() + 1)) {
    const auto probs = dist.probs();
    std::size_t support = 0;
    for (double p : probs) support += p > 0.0 ? 1 : 0;
    features_.resize(static_cast<Eigen::Index>(support), dim_);
    log_weights_.resize(static_cast<Eigen::Index>(support));
    weights_.resize(static_cast<Eigen::Index>(support));
    Eigen::Index row = 0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      if (probs[s] <= 0.0) continue;
      const double su = ((s >> node) & 1U) ? 1.0 : -1.0;
      for (std::size_t k = 0; k < neighbors.size(); ++k) {
        features_(row, static_cast<Eigen::Index>(k)) = -su * (((s >> neighbors[k]) & 1U) ? 1.0 : -1.0);
      }
      features_(row, dim_ - 1) = -su;
      log_weights_(row) = std::log(probs[s]);
      weights_(row) = probs[s];
      ++row;
    }
  }

  Eigen::Index dim() const noexcept { return dim_; }

  double objective(const Eigen::VectorXd& theta) const {
    return (weights_.array() * (features_ * theta).array().exp()).sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd w = (weights_.array() * (features_ * theta).array().exp()).matrix();
    return features_.transpose() * w;
  }

  // log S and its gradient / Hessian (moments of the screened distribution).
  double log_objective(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd z = features_ * theta + log_weights_;
    const double top = z.maxCoeff();
    return top + std::log((z.array() - top).exp().sum());
  }

  void log_derivatives(const Eigen::VectorXd& theta, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::VectorXd z = features_ * theta + log_weights_;
    const double top = z.maxCoeff();
    Eigen::VectorXd q = (z.array() - top).exp().matrix();
    q /= q.sum();
    grad = features_.transpose() * q;
    hess = features_.transpose() * q.asDiagonal() * features_ - grad * grad.transpose();
  }

 private:
  Eigen::Index dim_;
  Eigen::MatrixXd features_;
  Eigen::VectorXd log_weights_;
  Eigen::VectorXd weights_;
};

struct NodeSolution {
  Eigen::VectorXd theta;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Damped Newton on log S with Armijo backtracking.
inline NodeSolution minimize_newton(const NodeProblem& problem, const ScreeningOptions& opt) {
  NodeSolution sol;
  sol.theta = Eigen::VectorXd::Zero(problem.dim());
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double f = problem.log_objective(sol.theta);
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    problem.log_derivatives(sol.theta, grad, hess);
    sol.gradient_norm = grad.norm();
    sol.iterations = it;
    if (sol.gradient_norm < opt.gradient_tolerance) {
      sol.converged = true;
      return sol;
    }
    Eigen::VectorXd step;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = -ldlt.solve(grad);
    if (step.size() == 0 || !step.allFinite() || step.dot(grad) >= 0.0) {
      // Singular curvature (e.g. a feature constant on the support).
      const double ridge = 1e-10 + 1e-8 * hess.diagonal().cwiseAbs().maxCoeff();
      const Eigen::MatrixXd damped = hess + ridge * Eigen::MatrixXd::Identity(problem.dim(), problem.dim());
      step = -damped.ldlt().solve(grad);
      if (!step.allFinite() || step.dot(grad) >= 0.0) step = -grad;
    }
    double t = 1.0;
    const double slope = grad.dot(step);
    double f_new = problem.log_objective(sol.theta + step);
    while (!(f_new <= f + 1e-4 * t * slope) && t > 1e-16) {
      t *= 0.5;
      f_new = problem.log_objective(sol.theta + t * step);
    }
    if (!(f_new <= f)) break;  // no further decrease representable
    sol.theta += t * step;
    f = f_new;
  }
  problem.log_derivatives(sol.theta, grad, hess);
  sol.gradient_norm = grad.norm();
  sol.iterations = it;
  sol.converged = sol.gradient_norm < opt.gradient_tolerance;
  return sol;
}

inline double soft_threshold(double v, double t) {
  return v > t ? v - t : (v < -t ? v + t : 0.0);
}

// Proximal gradient on S + l1 * |J|_1 (the field is not penalized).
inline NodeSolution minimize_l1(const NodeProblem& problem, const ScreeningOptions& opt) {
  NodeSolution sol;
  const Eigen::Index d = problem.dim();
  sol.theta = Eigen::VectorXd::Zero(d);
  auto prox = [&](const Eigen::VectorXd& v, double step) {
    Eigen::VectorXd out = v;
    for (Eigen::Index k = 0; k + 1 < d; ++k) out(k) = soft_threshold(v(k), step * opt.l1);
    return out;
  };
  double step = 1.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const double f = problem.objective(sol.theta);
    const Eigen::VectorXd grad = problem.gradient(sol.theta);
    Eigen::VectorXd next;
    for (;;) {
      next = prox(sol.theta - step * grad, step);
      const Eigen::VectorXd diff = next - sol.theta;
      const double bound = f + grad.dot(diff) + diff.squaredNorm() / (2.0 * step);
      if (problem.objective(next) <= bound || step < 1e-16) break;
      step *= 0.5;
    }
    const double mapping = (next - sol.theta).norm() / step;
    sol.theta = next;
    sol.iterations = it + 1;
    sol.gradient_norm = mapping;
    if (mapping < opt.gradient_tolerance) {
      sol.converged = true;
      return sol;
    }
    step *= 2.0;
  }
  return sol;
}

inline std::vector<std::uint32_t> neighbors_of(std::span<const SiteId> sites, std::uint32_t node,
                                               const std::optional<std::vector<Edge>>& support) {
  std::vector<std::uint32_t> out;
  if (!support) {
    for (std::uint32_t k = 0; k < sites.size(); ++k) {
      if (k != node) out.push_back(k);
    }
    return out;
  }
  const SiteId u = sites[node];
  for (const auto& [a, b] : *support) {
    if (a == b) throw InvalidArgument("reconstruct: support contains a self-edge");
    if (a == u) out.push_back(site_position(sites, b));
    if (b == u) out.push_back(site_position(sites, a));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline Eigen::VectorXd pack(const NodeParams& params, std::span<const SiteId> sites, std::uint32_t node,
                            std::vector<std::uint32_t>& neighbors) {
  neighbors.clear();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(params.couplings.size() + 1));
  Eigen::Index k = 0;
  for (const auto& [nb, j] : params.couplings) {
    const auto pos = site_position(sites, nb);
    if (pos == node) throw InvalidArgument("NodeParams: self-coupling");
    neighbors.push_back(pos);
    theta(k++) = j;
  }
  theta(k) = params.field;
  return theta;
}

}  // namespace detail

// S_u(theta) evaluated exactly over the distribution's support. `sites`
// names the distribution's variables in index order.
inline double iso_objective(const NodeParams& params, const DiscreteDistribution& dist,
                            std::span<const SiteId> sites) {
  if (sites.size() != dist.n_sites()) throw DimensionMismatch("iso_objective: site list size mismatch");
  const auto node = detail::site_position(sites, params.node);
  std::vector<std::uint32_t> neighbors;
  const Eigen::VectorXd theta = detail::pack(params, sites, node, neighbors);
  return detail::NodeProblem(dist, node, neighbors).objective(theta);
}

// dS_u/dJ_uj = E[-s_u s_j exp(...)], dS_u/dh_u = E[-s_u exp(...)].
inline NodeParams iso_gradient(const NodeParams& params, const DiscreteDistribution& dist,
                               std::span<const SiteId> sites) {
  if (sites.size() != dist.n_sites()) throw DimensionMismatch("iso_gradient: site list size mismatch");
  const auto node = detail::site_position(sites, params.node);
  std::vector<std::uint32_t> neighbors;
  const Eigen::VectorXd theta = detail::pack(params, sites, node, neighbors);
  const Eigen::VectorXd g = detail::NodeProblem(dist, node, neighbors).gradient(theta);
  NodeParams out;
  out.node = params.node;
  Eigen::Index k = 0;
  for (const auto& [nb, j] : params.couplings) out.couplings[nb] = g(k++);
  out.field = g(k);
  return out;
}

inline double iso_objective(const NodeParams& params, const SampleSet& samples, std::span<const SiteId> sites) {
  return iso_objective(params, empirical_distribution(samples, sites.size()), sites);
}

// Minimizes every node's screening objective and symmetrizes couplings by
// the mean of the two directed estimates. `support` defaults to the complete
// graph over `sites`.
inline ReconstructionResult reconstruct(const DiscreteDistribution& dist, std::span<const SiteId> sites,
                                        const std::optional<std::vector<Edge>>& support = std::nullopt,
                                        const ScreeningOptions& options = {}) {
  if (sites.size() != dist.n_sites()) {
    throw DimensionMismatch("reconstruct: " + std::to_string(sites.size()) + " sites for a distribution over " +
                            std::to_string(dist.n_sites()));
  }
  const std::size_t n = sites.size();
  ReconstructionResult result;
  result.sites.assign(sites.begin(), sites.end());
  result.nodes.resize(n);
  result.diagnostics.resize(n);
  parallel_for(n, [&](std::size_t u) {
    const auto node = static_cast<std::uint32_t>(u);
    const auto neighbors = detail::neighbors_of(sites, node, support);
    const detail::NodeProblem problem(dist, node, neighbors);
    const auto sol = options.l1 > 0.0 ? detail::minimize_l1(problem, options)
                                      : detail::minimize_newton(problem, options);
    NodeParams params;
    params.node = sites[u];
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      params.couplings[sites[neighbors[k]]] = sol.theta(static_cast<Eigen::Index>(k));
    }
    params.field = sol.theta(problem.dim() - 1);
    result.nodes[u] = std::move(params);
    result.diagnostics[u] = {sites[u], problem.objective(sol.theta), sol.gradient_norm, sol.iterations,
                             sol.converged};
  });
  std::map<Edge, std::vector<double>> directed;
  for (const auto& node : result.nodes) {
    result.fields[node.node] = node.field;
    for (const auto& [nb, j] : node.couplings) {
      directed[{std::min(node.node, nb), std::max(node.node, nb)}].push_back(j);
    }
  }
  for (const auto& [edge, values] : directed) {
    double sum = 0.0;
    for (double v : values) sum += v;
    result.couplings[edge] = sum / static_cast<double>(values.size());
    if (values.size() == 2) result.max_asymmetry = std::max(result.max_asymmetry, std::abs(values[0] - values[1]));
  }
  for (const auto& d : result.diagnostics) result.converged = result.converged && d.converged;
  return result;
}

inline ReconstructionResult reconstruct(const SampleSet& samples, std::span<const SiteId> sites,
                                        const std::optional<std::vector<Edge>>& support = std::nullopt,
                                        const ScreeningOptions& options = {}) {
  return reconstruct(empirical_distribution(samples, sites.size()), sites, support, options);
}

}  // namespace qagibbs
