#pragma once

#include <vector>

#include "qbl/linalg.hpp"

namespace qbl {

// Closed rectangle in the complex plane.
struct Region {
    double re_lo = -1.0, re_hi = 1.0;
    double im_lo = -1.0, im_hi = 1.0;
};

// Node (i_re, i_im) of an n_re x n_im grid; single-node axes sit at the low edge.
cd grid_node(const Region& r, int n_re, int n_im, int i_re, int i_im);

struct PseudospectrumGrid {
    Region region;
    int n_re = 0, n_im = 0;
    std::vector<double> smin;  // row-major, im outer, re inner

    double at(int i_re, int i_im) const { return smin[static_cast<std::size_t>(i_im * n_re + i_re)]; }
    cd node(int i_re, int i_im) const { return grid_node(region, n_re, n_im, i_re, i_im); }
};

// s(z) = s_min(G - z) on the grid; z is in the energy plane of G.
PseudospectrumGrid resolvent_norm_grid(const Mat& g, const Region& region, int n_re, int n_im, int workers = 1);

struct PseudoEigenpair {
    cd z;
    double epsilon = 0.0;
    Vec v;  // right singular vector, unit
    Vec u;  // left singular vector, unit
    double residual = 0.0;
};
PseudoEigenpair pseudo_eigenpair(const Mat& g, cd z);

struct TransientProbe {
    double epsilon = 0.0;
    std::vector<double> times;
    std::vector<double> deviation;  // ||e^{-iGt} v - e^{-izt} v||
};
TransientProbe transient_bound_probe(const Mat& g, cd z, double horizon, double dt);

}  // namespace qbl
