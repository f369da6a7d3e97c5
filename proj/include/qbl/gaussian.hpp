#pragma once

#include <cstdint>
#include <vector>

#include "qbl/operators.hpp"

namespace qbl {

// Paired quadrature ordering [x_1, p_1, ..., x_N, p_N]; cov is the
// symmetrized covariance, vacuum = identity.
struct GaussianState {
    RVec mean;
    RMat cov;
};

Mat haar_unitary(int n, std::uint64_t seed);

// S = O diag(e^r, e^-r) O' in paired ordering, r_j ~ Normal(mean, sd).
RMat random_symplectic(int sites, std::uint64_t seed, double squeeze_mean = 0.0, double squeeze_sd = 0.5);

GaussianState random_pure_cm(int sites, std::uint64_t seed, double squeeze_mean = 0.0, double squeeze_sd = 0.5);

// Smallest eigenvalue of cov + i Omega; >= 0 for physical states.
double uncertainty_floor(const RMat& cov);

std::vector<double> symplectic_eigenvalues(const RMat& cov, const std::vector<int>& sites);

// Entropy of one symplectic eigenvalue; the log form stays finite for huge nu.
double entropy_term(double nu);
double entropy_term_log(double log_nu);

struct EntanglementReport {
    std::vector<double> nu;
    double entropy = 0.0;
};

// nu in [1 - tol, 1) is clamped to 1; nu < 1 - 10 tol throws.
EntanglementReport entanglement_entropy(const RMat& cov, const std::vector<int>& sites, double tol = 1e-9);

// Real quadrature propagator W V(t) W^dag for a Nambu matrix.
RMat quadrature_propagator(const DynamicalMatrix& d, double t);

// S_A(t) under Hamiltonian evolution. The reduced propagator rows are carried
// as C Q with orthonormal Q, so exponentially growing states stay resolvable.
std::vector<double> ee_trajectory(const DynamicalMatrix& d, const RMat& cov0, const std::vector<int>& sites,
                                  double dt, int steps, double tol = 1e-9);

struct EEEnsemble {
    std::vector<double> times;
    std::vector<double> mean, min, max;
};

// State i is random_pure_cm(N, seed + i, ...).
EEEnsemble ee_ensemble(const DynamicalMatrix& d, int n_states, std::uint64_t seed, const std::vector<int>& sites,
                       double dt, int steps, double squeeze_mean = 0.0, double squeeze_sd = 0.5, int workers = 1);

}  // namespace qbl
