#pragma once

#include <optional>

#include "qbl/operators.hpp"
#include "qbl/pseudospec.hpp"

namespace qbl {

struct ResponseMatrix {
    double omega = 0.0;
    double eta = 0.0;
    Mat chi;  // i (omega - i eta - G)^{-1}
};

// 0 for strictly stable G, otherwise 1e-9 ||G||_2.
double default_eta(const DynamicalMatrix& d);

ResponseMatrix susceptibility(const DynamicalMatrix& d, double omega, std::optional<double> eta = std::nullopt);

// -i Theta(t) V(t) K, K = tau3 for Nambu and identity for the reduced basis.
Mat time_domain_response(const DynamicalMatrix& d, double t);

// |chi| restricted to one species: entries (block*l + offset, block*m + offset).
RMat species_map(const Mat& chi, int block, int offset = 0);

// Response of the last site to a drive on the first, annihilation sector.
double end_to_end_gain(const ResponseMatrix& r, int block);

// Largest |chi(l, m)| with |l - m| >= band divided by the largest diagonal entry.
double band_ratio(const RMat& map, int band);

struct PseudoresonanceProfile {
    double epsilon = 0.0;
    int cluster = 1;        // singular values within 1e-6 relative of the smallest
    RVec mode_profile;      // |v| on the selected species
    RMat row_profiles;      // species map of chi
    double column_overlap = 0.0;  // columns of chi vs right singular subspace
    double row_overlap = 0.0;     // rows of chi vs left singular subspace
};

PseudoresonanceProfile pseudoresonance_profile(const DynamicalMatrix& d, double omega, int offset = 0);

}  // namespace qbl
