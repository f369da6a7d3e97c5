#pragma once

#include <iosfwd>

#include "qbl/model.hpp"

namespace qbl {

enum class BC { OBC, PBC, SIBC_Left, SIBC_Right, BIBC };

inline constexpr int kDefaultMaxDim = 4096;

struct DynamicalMatrix {
    Mat G;
    BC bc = BC::OBC;
    int sites = 0;
    CouplingStencil stencil;

    Basis basis() const { return stencil.basis; }
    int block() const { return stencil.block; }
};

// Finite chains only (OBC/PBC). PBC with N <= 2R accumulates coinciding
// shifts additively.
DynamicalMatrix assemble(const CouplingStencil& stencil, BC bc, int sites, int max_dim = kDefaultMaxDim);

Mat bloch(const CouplingStencil& stencil, double k);

// g(z), or g(1/z) when associated is set.
Mat symbol(const CouplingStencil& stencil, cd z, bool associated = false);

// Nambu constants for `sites` sites, ordering [a_1, a_1^dag, ..., a_N, a_N^dag].
Mat tau1(int sites);
Mat tau2(int sites);
Mat tau3(int sites);

// R = W Phi, paired quadratures [x_1, p_1, ...].
Mat quadrature_basis(int sites);

// i tau2 per site, i.e. [[0,1],[-1,0]] blocks.
RMat symplectic_form(int sites);

// Metric entering the second-moment and response formulas: tau3 for Nambu,
// identity for the reduced basis.
Mat metric(const DynamicalMatrix& d);

// Rows "re,im" pairs, comma separated.
void write_matrix_csv(std::ostream& os, const Mat& m);

}  // namespace qbl
