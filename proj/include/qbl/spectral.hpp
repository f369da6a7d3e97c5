#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbl/operators.hpp"

namespace qbl {

// Eigenpairs of G itself (energy plane). Nambu matrices go through the real
// quadrature form W(-iG)W^dag, reduced ones through the real -iG.
Eig energy_eig(const DynamicalMatrix& d, bool with_vectors);

// sigma(-iG), descending real part then imaginary part.
Vec rapidities(const DynamicalMatrix& d);
Vec sort_rapidities(Vec r);

double stability_gap(const DynamicalMatrix& d);

struct ConditionInfo {
    double K = 1.0;
    bool ill_conditioned = false;
};

// K = ||L|| ||L^{-1}|| for the unit-column modal matrix L.
ConditionInfo condition_number(const Mat& vectors, double threshold = 1e8);
ConditionInfo condition_number(const DynamicalMatrix& d, double threshold = 1e8);

bool detect_exceptional_point(const Mat& g, double tol = 1e-6);

struct SpectralReport {
    Vec rapidities;
    Mat vectors;  // columns match rapidities
    double stability_gap = 0.0;
    std::optional<double> lindblad_gap;
    double condition_number = 1.0;
    bool diagonalizable = true;
};
SpectralReport spectral_report(const DynamicalMatrix& d, double ep_tol = 1e-6);

double bulk_stability_gap(const CouplingStencil& st, int k_grid = 256);

struct KreinData {
    Vec energies;
    std::vector<double> signature;  // NaN for complex eigenvalues
    std::vector<std::pair<int, int>> collisions;
    double degeneracy_tol = 0.0;
};

bool is_pseudo_hermitian(const Mat& g, double rel_tol = 1e-10);

// degeneracy_tol <= 0 selects 1e-7 ||G||_2.
KreinData krein_analysis(const DynamicalMatrix& d, double degeneracy_tol = 0.0);

// Momenta k where a positive-signature bulk band reaches an energy also
// taken by a negative-signature band (bulk Krein-collision candidates).
struct BulkKreinOverlap {
    bool overlap = false;
    double lo = 0.0, hi = 0.0;  // shared energy interval
    std::vector<double> momenta;
};
BulkKreinOverlap bulk_krein_overlap(const CouplingStencil& st, int k_grid = 512);

enum class StabilityClass { TypeI_DM, TypeII_DM, AnomalouslyRelaxing, WellBehaved, Inconclusive };
std::string to_string(StabilityClass c);

struct Classification {
    StabilityClass cls = StabilityClass::Inconclusive;
    bool finite_stable = false;
    bool sibc_stable = false;
    bool disagreement = false;
    bool discontinuity = false;
    bool plateau = false;
    double extrapolated = 0.0;
    double sibc_gap = 0.0;
    int largest_unstable_N = 0;  // 0 when every size is stable
    std::string note;
};

Classification classify(std::vector<std::pair<int, double>> gaps, double sibc_gap, double tol = 1e-6);

}  // namespace qbl
