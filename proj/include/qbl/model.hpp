#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qbl/linalg.hpp"

namespace qbl {

// Two coherently coupled Hatano-Nelson chains with dissipative hopping.
struct CoupledHN {
    double j_a = 1.0, j_b = 1.0;
    double w = 0.0;
    double theta = 0.0;
    double gamma_a = 0.0, gamma_b = 0.0;
    double kappa_plus = 0.0, kappa_minus = 0.0;
};

// Kitaev-coupled oscillator chain; kappa is uniform onsite loss.
struct KOC {
    double j = 0.0, delta = 0.0, omega = 0.0, kappa = 0.0;
};

// Gapped harmonic chain with time-reversal-breaking hopping gamma.
struct GhcTrb {
    double omega = 0.0, j = 0.0, gamma = 0.0;
};

// Bosonic Kitaev chain with extra real hopping g.
struct BkcRealHop {
    double j = 0.0, delta = 0.0, g = 0.0;
};

using ModelSpec = std::variant<CoupledHN, KOC, GhcTrb, BkcRealHop>;

struct DerivedHNParams {
    double kappa_a = 0.0, kappa_b = 0.0;
    cd j_a_l, j_a_r, j_b_l, j_b_r;
};

enum class Basis { Nambu, Reduced };

// Internal coupling matrices g_r, r = -R..R. For Nambu stencils each block is
// the per-site [a, a^dagger] pair; the reduced basis holds [a_j, b_j] with
// g_r = i a_r so that -iG is the equation-of-motion matrix.
struct CouplingStencil {
    int block = 2;
    int range = 1;
    std::vector<Mat> g;
    Basis basis = Basis::Nambu;
    bool hamiltonian = false;  // G = tau3 H (pseudo-Hermitian)

    static CouplingStencil zeros(int block, int range, Basis basis);
    const Mat& at(int r) const { return g.at(static_cast<std::size_t>(r + range)); }
    Mat& at(int r) { return g.at(static_cast<std::size_t>(r + range)); }
    int species() const { return basis == Basis::Nambu ? block / 2 : block; }

    // g(1/z): the right-boundary half chain.
    CouplingStencil associated() const;
    CouplingStencil transposed() const;
};

DerivedHNParams derive_hn_params(const CoupledHN& spec);

// Paper assumption |J| >= Gamma on both chains.
bool coherent_dominates(const CoupledHN& spec);

CouplingStencil build_stencil(const ModelSpec& spec);

// gamma at which min_k of the positive band gamma sin k + sqrt(Omega(Omega - 2J cos k)) hits zero.
double ghc_critical_gamma(double omega, double j);

std::string model_name(const ModelSpec& spec);

}  // namespace qbl
