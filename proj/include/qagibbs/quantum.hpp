#pragma once

// Thermal states of small static transverse-field Ising Hamiltonians and the
// noise-averaged chain model
//
//   H(s) = - sum J_in J_ij Z_i Z_j - sum gamma_i J_in X_i - sum eta_i s_i Z_i
//   rho  = 2^-n sum_{s in {+-1}^n} exp(-beta H(s)) / Tr exp(-beta H(s))
//
// Basis states use the canonical index (bit k = qubit k, bit 1 = Z eigenvalue
// +1). All matrix elements are real, so operators are real symmetric.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qagibbs/discrete_distribution.hpp"
#include "qagibbs/errors.hpp"
#include "qagibbs/ising.hpp"
#include "qagibbs/parallel.hpp"

namespace qagibbs {

inline constexpr std::size_t kMaxQubits = 10;

struct QubitCoupling {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double value = 1.0;  // multiple of j_in
};

struct QuantumChainSpec {
  std::size_t n_qubits = 3;
  std::vector<QubitCoupling> couplings;
  std::vector<double> fields;      // longitudinal fields, multiples of j_in; empty means none
  double j_in = 0.0;
  std::vector<double> transverse;  // gamma_i
  std::vector<double> noise;       // eta_i
  double beta = 11.0;
  // When set, the transverse field on qubit i is gamma_i instead of gamma_i * j_in.
  bool absolute_transverse = false;

  void validate() const {
    if (n_qubits == 0) throw InvalidArgument("QuantumChainSpec: need at least one qubit");
    if (n_qubits > kMaxQubits) throw CapacityError("QuantumChainSpec: too many qubits", n_qubits, kMaxQubits);
    if (transverse.size() != n_qubits || noise.size() != n_qubits) {
      throw InvalidArgument("QuantumChainSpec: transverse and noise need one entry per qubit");
    }
    if (!fields.empty() && fields.size() != n_qubits) {
      throw InvalidArgument("QuantumChainSpec: fields need one entry per qubit");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("QuantumChainSpec: beta must be > 0");
    for (std::size_t k = 0; k < n_qubits; ++k) {
      if (!(transverse[k] >= 0.0) || !(noise[k] >= 0.0)) {
        throw InvalidArgument("QuantumChainSpec: gamma and eta must be >= 0");
      }
    }
    for (const auto& c : couplings) {
      if (c.a >= n_qubits || c.b >= n_qubits || c.a == c.b) {
        throw InvalidArgument("QuantumChainSpec: bad coupling qubit indices");
      }
    }
  }
};

// Typical hardware values for the three-qubit chain.
inline constexpr double kChainBeta = 11.0;
inline constexpr double kChainGamma = 0.013;
inline constexpr double kChainEta = 0.04;

// Open chain 0-1-...-(n-1) with unit couplings scaled by j_in.
inline QuantumChainSpec chain_spec(std::size_t n_qubits, double j_in, double beta = kChainBeta,
                                   double gamma = kChainGamma, double eta = kChainEta) {
  QuantumChainSpec spec;
  spec.n_qubits = n_qubits;
  for (std::uint32_t k = 0; k + 1 < n_qubits; ++k) spec.couplings.push_back({k, k + 1, 1.0});
  spec.j_in = j_in;
  spec.transverse.assign(n_qubits, gamma);
  spec.noise.assign(n_qubits, eta);
  spec.beta = beta;
  return spec;
}

// The classical model of a chain's coupling and field terms at strength j_in,
// on sites 1..n.
inline IsingModel classical_part(const QuantumChainSpec& spec) {
  std::vector<SiteId> sites(spec.n_qubits);
  for (std::size_t k = 0; k < sites.size(); ++k) sites[k] = static_cast<SiteId>(k + 1);
  std::vector<Coupling> couplings;
  for (const auto& c : spec.couplings) {
    couplings.push_back({static_cast<SiteId>(c.a + 1), static_cast<SiteId>(c.b + 1), spec.j_in * c.value});
  }
  std::vector<Field> fields;
  for (std::size_t k = 0; k < spec.fields.size(); ++k) {
    fields.push_back({static_cast<SiteId>(k + 1), spec.j_in * spec.fields[k]});
  }
  return IsingModel(std::move(sites), std::move(couplings), std::move(fields));
}

// Real symmetric operator on n qubits.
class HermitianOperator {
 public:
  static constexpr double kTolerance = 1e-12;

  explicit HermitianOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    const auto dim = static_cast<std::size_t>(matrix_.rows());
    if (matrix_.rows() != matrix_.cols() || dim == 0 || (dim & (dim - 1)) != 0) {
      throw InvalidArgument("HermitianOperator: matrix must be square with power-of-two dimension");
    }
    n_qubits_ = static_cast<std::size_t>(std::countr_zero(dim));
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > kTolerance * scale) {
      throw NonHermitianError("HermitianOperator: matrix is not symmetric within 1e-12");
    }
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
  std::size_t n_qubits_ = 0;
};

// H for one realization of the noise signs s_i in {-1, +1}.
inline HermitianOperator build_noise_hamiltonian(const QuantumChainSpec& spec, std::span<const int> signs) {
  spec.validate();
  const std::size_t n = spec.n_qubits;
  if (signs.size() != n) {
    throw InvalidArgument("build_noise_hamiltonian: expected " + std::to_string(n) + " noise signs, got " +
                          std::to_string(signs.size()));
  }
  for (int s : signs) {
    if (s != 1 && s != -1) throw InvalidArgument("build_noise_hamiltonian: noise signs must be +-1");
  }
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto z = [](std::size_t state, std::size_t k) { return ((state >> k) & 1U) ? 1.0 : -1.0; };
  for (std::size_t b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (const auto& c : spec.couplings) diag -= spec.j_in * c.value * z(b, c.a) * z(b, c.b);
    for (std::size_t k = 0; k < spec.fields.size(); ++k) diag -= spec.j_in * spec.fields[k] * z(b, k);
    for (std::size_t k = 0; k < n; ++k) diag -= spec.noise[k] * signs[k] * z(b, k);
    h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = diag;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = spec.absolute_transverse ? spec.transverse[k] : spec.transverse[k] * spec.j_in;
    if (t == 0.0) continue;
    for (std::size_t b = 0; b < dim; ++b) {
      h(static_cast<Eigen::Index>(b ^ (std::size_t{1} << k)), static_cast<Eigen::Index>(b)) -= t;
    }
  }
  return HermitianOperator(std::move(h));
}

// Computational-basis diagonal of exp(-beta H) / Tr exp(-beta H).
inline DiscreteDistribution thermal_distribution(const HermitianOperator& op, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("thermal_distribution: beta must be >= 0");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix());
  if (solver.info() != Eigen::Success) throw Error("thermal_distribution: eigendecomposition failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();  // ascending
  const Eigen::VectorXd weights = (-beta * (lambda.array() - lambda(0))).exp().matrix();
  const Eigen::VectorXd diag = solver.eigenvectors().array().square().matrix() * weights;
  std::vector<double> probs(diag.data(), diag.data() + diag.size());
  double z = 0.0;
  for (double p : probs) z += p;
  for (auto& p : probs) p = std::max(p, 0.0) / z;
  return DiscreteDistribution(op.n_qubits(), std::move(probs));
}

inline DiscreteDistribution thermal_distribution(const Eigen::MatrixXd& matrix, double beta) {
  return thermal_distribution(HermitianOperator(matrix), beta);
}

// Uniform average of thermal states over all 2^n noise sign patterns.
inline DiscreteDistribution noise_averaged_distribution(const QuantumChainSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_qubits;
  const std::size_t patterns = std::size_t{1} << n;
  std::vector<DiscreteDistribution> parts(patterns);
  parallel_for(patterns, [&](std::size_t m) {
    std::vector<int> signs(n);
    for (std::size_t k = 0; k < n; ++k) signs[k] = ((m >> k) & 1U) ? 1 : -1;
    parts[m] = thermal_distribution(build_noise_hamiltonian(spec, signs), spec.beta);
  });
  std::vector<double> avg(std::size_t{1} << n, 0.0);
  for (const auto& part : parts) {
    for (std::size_t s = 0; s < avg.size(); ++s) avg[s] += part[s];
  }
  for (auto& p : avg) p /= static_cast<double>(patterns);
  return DiscreteDistribution(n, std::move(avg));
}

// Three-spin chain with the background-susceptibility coupling chi * J_in^2
// between the chain ends, on sites 1, 2, 3.
inline IsingModel bs_model(double j_in, double chi) {
  return IsingModel({1, 2, 3}, {{1, 2, j_in}, {2, 3, j_in}, {1, 3, chi * j_in * j_in}});
}

inline DiscreteDistribution bs_distribution(double j_in, double chi, double beta) {
  return enumerate_gibbs(bs_model(j_in, chi), beta);
}

}  // namespace qagibbs
