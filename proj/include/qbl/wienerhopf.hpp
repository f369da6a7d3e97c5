#pragma once

#include <array>
#include <string>
#include <vector>

#include "qbl/model.hpp"
#include "qbl/pseudospec.hpp"

namespace qbl {

// lambda is on the bulk curve, so the symbol is not invertible on |z| = 1.
struct OnBulkCurve : NumericalError {
    using NumericalError::NumericalError;
};

struct WHOptions {
    double tol_circle = 1e-9;
    double tol_cond = 1e-8;
    double root_tol = 1e-7;
    double verify_tol = 1e-8;
};

// p(z) = det P(z), P(z) = z (g(z) - lambda) for a 2x2 nearest-neighbour symbol.
struct DetLaurent {
    cd lambda;
    std::vector<cd> coeffs;  // ascending powers, trimmed
    std::vector<cd> roots;   // merged roots, repeated by multiplicity
    std::vector<cd> inside_roots;
    bool on_circle = false;
    bool vanishes = false;  // p identically zero
};

DetLaurent det_laurent(const CouplingStencil& st, cd lambda, bool associated = false, const WHOptions& opt = {});

// Winding of det(g(e^{ik}) - lambda) around 0.
int winding_number(const CouplingStencil& st, cd lambda, int k_samples = 1024, bool associated = false,
                   double tol = 1e-10);

// Matrix polynomial sum_j c[j] x^j.
struct MatPoly {
    std::vector<Mat> c;
    Mat at(cd x) const;
};

// P(z) = A_plus(z) diag(z^k1, z^k2) A_minus(z), A_plus a polynomial in z,
// A_minus a polynomial in 1/z. Partial indices of g - lambda are k - 1.
struct WHFactorization {
    std::array<int, 2> indices{0, 0};
    std::array<int, 2> p_exponents{0, 0};
    MatPoly a_plus;
    MatPoly a_minus;  // coefficients of z^{-j}
    double residual = 0.0;
    bool verified = false;
};

WHFactorization wh_factorize_2x2(const CouplingStencil& st, cd lambda, bool associated = false,
                                 const WHOptions& opt = {});

enum class PIStatus { BulkCurve, TrivialIndices, NontrivialIndices, DegenerateFallbackUsed, Inconclusive };
std::string to_string(PIStatus s);

struct PartialIndexResult {
    cd lambda;
    PIStatus status = PIStatus::Inconclusive;
    int winding = 0;
    std::array<int, 2> indices{0, 0};
    bool nontrivial = false;
    int n_inside = 0;
    double residual_iii = 0.0;
    double residual_iv = 0.0;
    double factor_residual = 0.0;
};

PartialIndexResult partial_index_test(const CouplingStencil& st, cd lambda, bool associated = false,
                                      const WHOptions& opt = {});

enum class Membership { Bulk, Member, Nonmember, Inconclusive };
std::string to_string(Membership m);

Membership sibc_membership(const CouplingStencil& st, cd lambda, const WHOptions& opt = {});

struct MembershipGrid {
    Region region;
    int n_re = 0, n_im = 0;
    std::vector<Membership> status;  // same layout as PseudospectrumGrid

    Membership at(int i_re, int i_im) const { return status[static_cast<std::size_t>(i_im * n_re + i_re)]; }
    cd node(int i_re, int i_im) const { return grid_node(region, n_re, n_im, i_re, i_im); }
};

// Energy-plane grid; lambda belongs to the semi-infinite spectrum if it lies on
// the bulk curve or either half chain has nontrivial partial indices.
MembershipGrid sibc_membership_grid(const CouplingStencil& st, const Region& region, int n_re, int n_im,
                                    int workers = 1, const WHOptions& opt = {});

struct SibcGap {
    double gap = 0.0;
    double bulk_gap = 0.0;
    bool touches_boundary = false;
    int inconclusive_nodes = 0;
};

// Largest Im(lambda) over the bulk curve and member nodes of the box, i.e.
// the largest rapidity real part, refined by bisection to 1e-4.
SibcGap sibc_stability_gap(const CouplingStencil& st, const Region& box, int n_re = 41, int n_im = 41,
                           int workers = 1, const WHOptions& opt = {});

// Padded box around the bulk curve in the energy plane.
Region bulk_bounding_box(const CouplingStencil& st, double pad = 0.25, int k_grid = 512);

}  // namespace qbl
