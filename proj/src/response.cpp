#include "qbl/response.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qbl/dynamics.hpp"
#include "qbl/spectral.hpp"

namespace qbl {

double default_eta(const DynamicalMatrix& d)
{
    return stability_gap(d) < -1e-9 ? 0.0 : 1e-9 * norm2(d.G);
}

ResponseMatrix susceptibility(const DynamicalMatrix& d, double omega, std::optional<double> eta)
{
    ResponseMatrix r;
    r.omega = omega;
    r.eta = eta ? *eta : default_eta(d);
    if (r.eta < 0) throw ConfigError("eta must be nonnegative");
    const cd z(omega, -r.eta);
    const Mat a = z * Mat::Identity(d.G.rows(), d.G.cols()) - d.G;
    const double smin = smallest_singular_value(a);
    if (smin <= 1e-14 * std::max(1.0, norm2(d.G))) {
        const Vec ev = energy_eig(d, false).values;
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < ev.size(); ++i)
            if (std::abs(ev(i) - z) < std::abs(ev(best) - z)) best = i;
        std::ostringstream msg;
        msg << "drive frequency is resonant with eigenvalue (" << ev(best).real() << ", " << ev(best).imag() << ")";
        throw NumericalError(msg.str());
    }
    r.chi = I1 * a.partialPivLu().inverse();
    return r;
}

Mat time_domain_response(const DynamicalMatrix& d, double t)
{
    if (t < 0) return Mat::Zero(d.G.rows(), d.G.cols());
    return -I1 * propagator(d.G, t) * metric(d);
}

RMat species_map(const Mat& chi, int block, int offset)
{
    if (block < 1 || offset < 0 || offset >= block) throw ConfigError("bad species selection");
    const Eigen::Index n = chi.rows() / block;
    RMat out(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index m = 0; m < n; ++m) out(l, m) = std::abs(chi(block * l + offset, block * m + offset));
    return out;
}

double end_to_end_gain(const ResponseMatrix& r, int block)
{
    const Eigen::Index n = r.chi.rows() / block;
    return std::abs(r.chi(block * (n - 1), 0));
}

double band_ratio(const RMat& map, int band)
{
    double diag = 0.0, off = 0.0;
    for (Eigen::Index l = 0; l < map.rows(); ++l)
        for (Eigen::Index m = 0; m < map.cols(); ++m) {
            if (l == m) diag = std::max(diag, map(l, m));
            else if (std::abs(l - m) >= band) off = std::max(off, map(l, m));
        }
    return diag > 0 ? off / diag : std::numeric_limits<double>::infinity();
}

PseudoresonanceProfile pseudoresonance_profile(const DynamicalMatrix& d, double omega, int offset)
{
    const ResponseMatrix r = susceptibility(d, omega);
    const Mat a = d.G - cd(omega, -r.eta) * Mat::Identity(d.G.rows(), d.G.cols());
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    const Eigen::Index n = s.size();
    PseudoresonanceProfile p;
    p.epsilon = s(n - 1);
    int c = 1;
    while (c < n && s(n - 1 - c) <= s(n - 1) * (1.0 + 1e-6) + 1e-300) ++c;
    p.cluster = c;
    const Mat vr = svd.matrixV().rightCols(c);
    const Mat ul = svd.matrixU().rightCols(c);

    const int block = d.block();
    const Vec v = svd.matrixV().col(n - 1);
    p.mode_profile.resize(v.size() / block);
    for (Eigen::Index j = 0; j < p.mode_profile.size(); ++j) p.mode_profile(j) = std::abs(v(block * j + offset));
    p.row_profiles = species_map(r.chi, block, offset);
    p.column_overlap = (vr * (vr.adjoint() * r.chi)).norm() / r.chi.norm();
    p.row_overlap = ((r.chi * ul) * ul.adjoint()).norm() / r.chi.norm();
    return p;
}

}  // namespace qbl
