#include "qbl/operators.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace qbl {

DynamicalMatrix assemble(const CouplingStencil& st, BC bc, int sites, int max_dim)
{
    if (bc != BC::OBC && bc != BC::PBC)
        throw ConfigError("only OBC and PBC can be assembled as finite matrices");
    if (sites < 1) throw ConfigError("need at least one site");
    const long dim = static_cast<long>(st.block) * sites;
    if (dim > max_dim) throw ConfigError("matrix dimension " + std::to_string(dim) + " exceeds cap");
    const int b = st.block;
    DynamicalMatrix d;
    d.G = Mat::Zero(dim, dim);
    d.bc = bc;
    d.sites = sites;
    d.stencil = st;
    for (int j = 0; j < sites; ++j) {
        d.G.block(b * j, b * j, b, b) += st.at(0);
        for (int r = 1; r <= st.range; ++r) {
            int i = j + r;
            if (bc == BC::OBC) {
                if (i >= sites) continue;
            } else {
                i %= sites;
            }
            d.G.block(b * j, b * i, b, b) += st.at(r);
            d.G.block(b * i, b * j, b, b) += st.at(-r);
        }
    }
    return d;
}

Mat bloch(const CouplingStencil& st, double k)
{
    Mat g = Mat::Zero(st.block, st.block);
    for (int r = -st.range; r <= st.range; ++r) g += st.at(r) * std::exp(I1 * (k * r));
    return g;
}

Mat symbol(const CouplingStencil& st, cd z, bool associated)
{
    if (z == 0.0) throw ConfigError("symbol is undefined at z = 0");
    if (associated) z = 1.0 / z;
    Mat g = Mat::Zero(st.block, st.block);
    for (int r = -st.range; r <= st.range; ++r) g += st.at(r) * std::pow(z, r);
    return g;
}

namespace {

Mat per_site(int sites, const Mat& blk)
{
    Mat out = Mat::Zero(2 * sites, 2 * sites);
    for (int j = 0; j < sites; ++j) out.block(2 * j, 2 * j, 2, 2) = blk;
    return out;
}

}  // namespace

Mat tau1(int sites)
{
    Mat b(2, 2);
    b << 0.0, 1.0, 1.0, 0.0;
    return per_site(sites, b);
}

Mat tau2(int sites)
{
    Mat b(2, 2);
    b << 0.0, -I1, I1, 0.0;
    return per_site(sites, b);
}

Mat tau3(int sites)
{
    Mat b(2, 2);
    b << 1.0, 0.0, 0.0, -1.0;
    return per_site(sites, b);
}

Mat quadrature_basis(int sites)
{
    Mat b(2, 2);
    b << 1.0, 1.0, -I1, I1;
    return per_site(sites, b / std::sqrt(2.0));
}

RMat symplectic_form(int sites)
{
    RMat out = RMat::Zero(2 * sites, 2 * sites);
    for (int j = 0; j < sites; ++j) {
        out(2 * j, 2 * j + 1) = 1.0;
        out(2 * j + 1, 2 * j) = -1.0;
    }
    return out;
}

Mat metric(const DynamicalMatrix& d)
{
    if (d.basis() == Basis::Nambu) return tau3(static_cast<int>(d.G.rows() / 2));
    return Mat::Identity(d.G.rows(), d.G.cols());
}

void write_matrix_csv(std::ostream& os, const Mat& m)
{
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(i, j).real(), m(i, j).imag());
            os << (j ? "," : "") << buf;
        }
        os << '\n';
    }
}

}  // namespace qbl
