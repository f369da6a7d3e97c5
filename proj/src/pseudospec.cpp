#include "qbl/pseudospec.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

namespace qbl {

cd grid_node(const Region& r, int n_re, int n_im, int i_re, int i_im)
{
    const double x = n_re > 1 ? r.re_lo + (r.re_hi - r.re_lo) * i_re / (n_re - 1) : r.re_lo;
    const double y = n_im > 1 ? r.im_lo + (r.im_hi - r.im_lo) * i_im / (n_im - 1) : r.im_lo;
    return {x, y};
}

PseudospectrumGrid resolvent_norm_grid(const Mat& g, const Region& region, int n_re, int n_im, int workers)
{
    if (n_re < 16 || n_im < 16) throw ConfigError("pseudospectrum grid needs at least 16 nodes per axis");
    PseudospectrumGrid out{region, n_re, n_im, {}};
    out.smin.assign(static_cast<std::size_t>(n_re) * static_cast<std::size_t>(n_im), 0.0);
    const Mat id = Mat::Identity(g.rows(), g.cols());
    parallel_for(out.smin.size(), workers, [&](std::size_t idx) {
        const int i_re = static_cast<int>(idx % static_cast<std::size_t>(n_re));
        const int i_im = static_cast<int>(idx / static_cast<std::size_t>(n_re));
        const cd z = grid_node(region, n_re, n_im, i_re, i_im);
        out.smin[idx] = smallest_singular_value(g - z * id);
    });
    return out;
}

PseudoEigenpair pseudo_eigenpair(const Mat& g, cd z)
{
    const Mat a = g - z * Mat::Identity(g.rows(), g.cols());
    const SingularTriple t = smallest_singular(a);
    PseudoEigenpair p{z, t.sigma, t.v, t.u, (a * t.v).norm()};
    if (std::abs(p.residual - p.epsilon) > 1e-10 * std::max(1.0, a.norm()))
        throw NumericalError("pseudo-eigenpair residual does not match the singular value");
    return p;
}

TransientProbe transient_bound_probe(const Mat& g, cd z, double horizon, double dt)
{
    if (!(dt > 0) || horizon < 0) throw ConfigError("transient probe needs dt > 0 and horizon >= 0");
    const PseudoEigenpair p = pseudo_eigenpair(g, z);
    TransientProbe out;
    out.epsilon = p.epsilon;
    const auto steps = static_cast<long>(std::floor(horizon / dt + 1e-9));
    const Mat step = (-I1 * dt * g).exp();
    Vec x = p.v;
    for (long k = 0; k <= steps; ++k) {
        const double t = dt * static_cast<double>(k);
        out.times.push_back(t);
        out.deviation.push_back((x - std::exp(-I1 * z * t) * p.v).norm());
        x = step * x;
    }
    return out;
}

}  // namespace qbl
