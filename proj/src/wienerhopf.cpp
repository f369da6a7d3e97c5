#include "qbl/wienerhopf.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qbl/operators.hpp"
#include "qbl/spectral.hpp"

namespace qbl {

namespace {

using Poly = std::vector<cd>;

void check_shape(const CouplingStencil& st)
{
    if (st.block != 2 || st.range > 1)
        throw ConfigError("Wiener-Hopf analysis supports 2x2 symbols with nearest-neighbour range only");
}

// P(z) = g_{-1} + (g_0 - lambda) z + g_1 z^2
MatPoly shifted_symbol(const CouplingStencil& st, cd lambda, bool associated)
{
    check_shape(st);
    auto g = [&](int r) -> Mat {
        if (std::abs(r) > st.range) return Mat::Zero(2, 2);
        return st.at(associated ? -r : r);
    };
    MatPoly p;
    p.c = {g(-1), g(0) - lambda * Mat::Identity(2, 2), g(1)};
    return p;
}

double poly_scale(const MatPoly& p)
{
    double s = 0.0;
    for (const auto& m : p.c) s = std::max(s, m.cwiseAbs().maxCoeff());
    return s;
}

Poly entry(const MatPoly& p, int r, int c)
{
    Poly out;
    for (const auto& m : p.c) out.push_back(m(r, c));
    return out;
}

Poly mul(const Poly& a, const Poly& b)
{
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

cd horner(const Poly& p, cd z)
{
    cd acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::vector<cd> poly_roots(const Poly& p)
{
    const std::size_t n = p.size() - 1;
    std::vector<cd> roots;
    if (n == 0) return roots;
    Mat comp = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) comp(0, static_cast<Eigen::Index>(n - 1 - j)) = -p[j] / p[n];
    for (std::size_t i = 1; i < n; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::ComplexEigenSolver<Mat> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");
    Poly dp;
    for (std::size_t j = 1; j < p.size(); ++j) dp.push_back(static_cast<double>(j) * p[j]);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        cd z = es.eigenvalues()(i);
        // Newton polish; skipped near multiple roots where p' vanishes
        for (int it = 0; it < 3; ++it) {
            const cd d = horner(dp, z);
            if (std::abs(d) < 1e-8 * std::max(1.0, std::abs(p[n]))) break;
            const cd step = horner(p, z) / d;
            if (!std::isfinite(std::abs(step)) || std::abs(step) > 1e-6 * std::max(1.0, std::abs(z))) break;
            z -= step;
        }
        roots.push_back(z);
    }
    return roots;
}

std::vector<cd> merge_roots(const std::vector<cd>& roots, double tol)
{
    const std::size_t n = roots.size();
    std::vector<int> label(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] >= 0) continue;
        label[i] = next;
        // transitive closure over the cluster
        for (bool grown = true; grown;) {
            grown = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (label[j] >= 0) continue;
                for (std::size_t k = 0; k < n; ++k)
                    if (label[k] == next && std::abs(roots[j] - roots[k]) < tol) {
                        label[j] = next;
                        grown = true;
                        break;
                    }
            }
        }
        ++next;
    }
    std::vector<cd> out;
    for (int c = 0; c < next; ++c) {
        cd sum = 0.0;
        int m = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (label[i] == c) {
                sum += roots[i];
                ++m;
            }
        for (int k = 0; k < m; ++k) out.push_back(sum / static_cast<double>(m));
    }
    return out;
}

// Column s of A divided by (z - zeta); the remainder is dropped.
void divide_column(MatPoly& a, int s, cd zeta)
{
    const std::size_t deg = a.c.size() - 1;
    if (deg == 0) {
        a.c[0].col(s).setZero();
        return;
    }
    std::vector<Vec> q(deg);
    q[deg - 1] = a.c[deg].col(s);
    for (std::size_t j = deg - 1; j >= 1; --j) q[j - 1] = a.c[j].col(s) + zeta * q[j];
    for (std::size_t j = 0; j < deg; ++j) a.c[j].col(s) = q[j];
    a.c[deg].col(s).setZero();
    while (a.c.size() > 1 && a.c.back().isZero(0.0)) a.c.pop_back();
}

// row m += alpha z^{-shift} row s
void add_row(MatPoly& b, int m, int s, cd alpha, int shift)
{
    const std::size_t old = b.c.size();
    b.c.resize(old + static_cast<std::size_t>(shift), Mat::Zero(2, 2));
    for (std::size_t j = b.c.size(); j-- > static_cast<std::size_t>(shift);)
        b.c[j].row(m) += alpha * b.c[j - static_cast<std::size_t>(shift)].row(s);
}

// row s *= (1 - zeta/z)
void shift_row(MatPoly& b, int s, cd zeta)
{
    b.c.push_back(Mat::Zero(2, 2));
    for (std::size_t j = b.c.size() - 1; j >= 1; --j) b.c[j].row(s) -= zeta * b.c[j - 1].row(s);
}

struct Prepared {
    MatPoly p;
    double scale = 0.0;
    DetLaurent dl;
};

Prepared prepare(const CouplingStencil& st, cd lambda, bool associated, const WHOptions& opt)
{
    Prepared pr;
    pr.p = shifted_symbol(st, lambda, associated);
    pr.scale = poly_scale(pr.p);
    DetLaurent& dl = pr.dl;
    dl.lambda = lambda;
    Poly det = mul(entry(pr.p, 0, 0), entry(pr.p, 1, 1));
    const Poly bc = mul(entry(pr.p, 0, 1), entry(pr.p, 1, 0));
    for (std::size_t i = 0; i < det.size(); ++i) det[i] -= bc[i];
    double cmax = 0.0;
    for (const auto& c : det) cmax = std::max(cmax, std::abs(c));
    if (cmax <= 1e-14 * pr.scale * pr.scale || cmax == 0.0) {
        dl.vanishes = true;
        dl.coeffs = {0.0};
        return pr;
    }
    while (det.size() > 1 && std::abs(det.back()) <= 1e-13 * cmax) det.pop_back();
    dl.coeffs = det;
    dl.roots = merge_roots(poly_roots(det), opt.root_tol);
    for (const cd& z : dl.roots) {
        const double r = std::abs(z);
        if (std::abs(r - 1.0) <= opt.tol_circle) dl.on_circle = true;
        else if (r < 1.0) dl.inside_roots.push_back(z);
    }
    return pr;
}

WHFactorization factorize(const Prepared& pr, const WHOptions& opt)
{
    WHFactorization f;
    MatPoly ap = pr.p;
    MatPoly am;
    am.c = {Mat::Identity(2, 2)};
    std::array<int, 2> k{0, 0};
    for (const cd& zeta : pr.dl.inside_roots) {
        double ascale = 0.0;
        for (std::size_t j = 0; j < ap.c.size(); ++j)
            ascale += ap.c[j].norm() * std::pow(std::abs(zeta), static_cast<double>(j));
        const double zero_tol = 1e-7 * std::max(ascale, 1e-300);
        Mat v = ap.at(zeta);
        // with equal exponents either column may be kept; keep the larger one first
        if (k[0] == k[1] && v.col(1).norm() > v.col(0).norm()) {
            for (auto& m : ap.c) m.col(0).swap(m.col(1));
            for (auto& m : am.c) m.row(0).swap(m.row(1));
            v.col(0).swap(v.col(1));
        }
        int s;
        if (v.col(0).norm() <= zero_tol) {
            s = 0;
        } else {
            s = 1;
            const cd alpha = v.col(0).dot(v.col(1)) / v.col(0).squaredNorm();
            for (auto& m : ap.c) m.col(1) -= alpha * m.col(0);
            add_row(am, 0, 1, alpha, k[0] - k[1]);
        }
        divide_column(ap, s, zeta);
        shift_row(am, s, zeta);
        ++k[static_cast<std::size_t>(s)];
        if (k[0] < k[1]) {
            std::swap(k[0], k[1]);
            for (auto& m : ap.c) m.col(0).swap(m.col(1));
            for (auto& m : am.c) m.row(0).swap(m.row(1));
        }
    }
    while (am.c.size() > 1 && am.c.back().isZero(0.0)) am.c.pop_back();

    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
        const cd z = std::exp(I1 * phase(rng));
        const Mat lhs = pr.p.at(z);
        Mat d = Mat::Zero(2, 2);
        d(0, 0) = std::pow(z, k[0]);
        d(1, 1) = std::pow(z, k[1]);
        const Mat rhs = ap.at(z) * d * am.at(1.0 / z);
        worst = std::max(worst, (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300));
    }
    f.p_exponents = k;
    f.indices = {k[0] - 1, k[1] - 1};
    f.a_plus = std::move(ap);
    f.a_minus = std::move(am);
    f.residual = worst;
    f.verified = worst <= opt.verify_tol;
    return f;
}

}  // namespace

Mat MatPoly::at(cd x) const
{
    Mat acc = Mat::Zero(c.front().rows(), c.front().cols());
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

DetLaurent det_laurent(const CouplingStencil& st, cd lambda, bool associated, const WHOptions& opt)
{
    return prepare(st, lambda, associated, opt).dl;
}

int winding_number(const CouplingStencil& st, cd lambda, int k_samples, bool associated, double tol)
{
    check_shape(st);
    const MatPoly p = shifted_symbol(st, lambda, associated);
    const double scale = std::max(poly_scale(p), 1e-300);
    const double pi = std::numbers::pi;
    auto det_at = [&](double k) {
        const cd z = std::exp(I1 * k);
        return p.at(z).determinant() / (z * z);
    };
    for (long n = std::max(k_samples, 1024); n <= (1L << 22); n *= 2) {
        double total = 0.0;
        bool coarse = false;
        cd prev = det_at(0.0);
        double dmin = std::abs(prev);
        for (long i = 1; i <= n; ++i) {
            const cd cur = det_at(2.0 * pi * static_cast<double>(i) / static_cast<double>(n));
            dmin = std::min(dmin, std::abs(cur));
            const double step = std::arg(cur / prev);
            if (std::abs(step) >= pi / 2) coarse = true;
            total += step;
            prev = cur;
        }
        if (dmin <= tol * scale * scale) throw OnBulkCurve("lambda lies on the bulk curve");
        if (!coarse) return static_cast<int>(std::lround(total / (2.0 * pi)));
    }
    throw NumericalError("winding number did not resolve");
}

WHFactorization wh_factorize_2x2(const CouplingStencil& st, cd lambda, bool associated, const WHOptions& opt)
{
    const Prepared pr = prepare(st, lambda, associated, opt);
    if (pr.dl.vanishes || pr.dl.on_circle) throw OnBulkCurve("symbol is singular on the unit circle");
    return factorize(pr, opt);
}

std::string to_string(PIStatus s)
{
    switch (s) {
    case PIStatus::BulkCurve: return "bulk_curve";
    case PIStatus::TrivialIndices: return "trivial";
    case PIStatus::NontrivialIndices: return "nontrivial";
    case PIStatus::DegenerateFallbackUsed: return "degenerate_fallback";
    case PIStatus::Inconclusive: break;
    }
    return "inconclusive";
}

PartialIndexResult partial_index_test(const CouplingStencil& st, cd lambda, bool associated, const WHOptions& opt)
{
    const Prepared pr = prepare(st, lambda, associated, opt);
    PartialIndexResult r;
    r.lambda = lambda;
    if (pr.dl.vanishes || pr.dl.on_circle) {
        r.status = PIStatus::BulkCurve;
        return r;
    }
    const auto& in = pr.dl.inside_roots;
    r.n_inside = static_cast<int>(in.size());
    r.winding = r.n_inside - 2;
    const WHFactorization f = factorize(pr, opt);
    r.factor_residual = f.residual;
    r.indices = f.indices;
    if (!f.verified) {
        r.status = PIStatus::Inconclusive;
        return r;
    }
    const bool factor_nontrivial = f.indices[0] != 0 || f.indices[1] != 0;
    r.nontrivial = factor_nontrivial;
    if (in.size() != 2) {
        r.status = factor_nontrivial ? PIStatus::NontrivialIndices : PIStatus::TrivialIndices;
        return r;
    }
    if (std::abs(in[0] - in[1]) <= opt.root_tol) {
        r.status = PIStatus::DegenerateFallbackUsed;
        return r;
    }
    const double s = std::max(pr.scale, 1e-300);
    const Mat p1 = pr.p.at(in[0]);
    const Mat p2 = pr.p.at(in[1]);
    double col_res[2];
    for (int c = 0; c < 2; ++c) {
        const double r1 = std::abs(p1(0, c)) + std::abs(p1(1, c));
        const double r2 = std::abs(p2(0, c)) + std::abs(p2(1, c));
        col_res[c] = std::max(r1, r2) / s;
    }
    r.residual_iii = std::min(col_res[0], col_res[1]);
    const double iv1 = std::abs(p2(0, 1) * p1(0, 0) - p2(0, 0) * p1(0, 1));
    const double iv2 = std::abs(p2(1, 1) * p1(1, 0) - p2(1, 0) * p1(1, 1));
    r.residual_iv = std::max(iv1, iv2) / (s * s);
    const double best = std::min(r.residual_iii, r.residual_iv);
    if (best >= opt.tol_cond && best <= 10.0 * opt.tol_cond) {
        r.status = PIStatus::Inconclusive;
        return r;
    }
    const bool theorem_nontrivial = best < opt.tol_cond;
    if (theorem_nontrivial != factor_nontrivial) {
        r.status = PIStatus::Inconclusive;
        return r;
    }
    r.status = factor_nontrivial ? PIStatus::NontrivialIndices : PIStatus::TrivialIndices;
    return r;
}

std::string to_string(Membership m)
{
    switch (m) {
    case Membership::Bulk: return "bulk";
    case Membership::Member: return "member";
    case Membership::Nonmember: return "nonmember";
    case Membership::Inconclusive: break;
    }
    return "inconclusive";
}

Membership sibc_membership(const CouplingStencil& st, cd lambda, const WHOptions& opt)
{
    const PartialIndexResult l = partial_index_test(st, lambda, false, opt);
    const PartialIndexResult r = partial_index_test(st, lambda, true, opt);
    if (l.status == PIStatus::BulkCurve || r.status == PIStatus::BulkCurve) return Membership::Bulk;
    auto member = [](const PartialIndexResult& x) { return x.status != PIStatus::Inconclusive && x.nontrivial; };
    if (member(l) || member(r)) return Membership::Member;
    if (l.status == PIStatus::Inconclusive || r.status == PIStatus::Inconclusive) return Membership::Inconclusive;
    return Membership::Nonmember;
}

MembershipGrid sibc_membership_grid(const CouplingStencil& st, const Region& region, int n_re, int n_im,
                                    int workers, const WHOptions& opt)
{
    check_shape(st);
    if (n_re < 1 || n_im < 1) throw ConfigError("membership grid needs positive resolution");
    MembershipGrid g{region, n_re, n_im, {}};
    g.status.assign(static_cast<std::size_t>(n_re) * static_cast<std::size_t>(n_im), Membership::Inconclusive);
    parallel_for(g.status.size(), workers, [&](std::size_t idx) {
        const int i_re = static_cast<int>(idx % static_cast<std::size_t>(n_re));
        const int i_im = static_cast<int>(idx / static_cast<std::size_t>(n_re));
        g.status[idx] = sibc_membership(st, grid_node(region, n_re, n_im, i_re, i_im), opt);
    });
    return g;
}

SibcGap sibc_stability_gap(const CouplingStencil& st, const Region& box, int n_re, int n_im, int workers,
                           const WHOptions& opt)
{
    if (n_re < 2 || n_im < 2) throw ConfigError("search box needs at least two nodes per axis");
    SibcGap out;
    out.bulk_gap = bulk_stability_gap(st);
    out.gap = out.bulk_gap;
    if (out.bulk_gap > box.im_hi) out.touches_boundary = true;
    const MembershipGrid g = sibc_membership_grid(st, box, n_re, n_im, workers, opt);
    int top = -1;
    for (int j = 0; j < n_im; ++j)
        for (int i = 0; i < n_re; ++i) {
            const Membership m = g.at(i, j);
            if (m == Membership::Inconclusive) ++out.inconclusive_nodes;
            if (m == Membership::Member) top = std::max(top, j);
        }
    if (top < 0) return out;
    if (top == n_im - 1) {
        out.touches_boundary = true;
        out.gap = std::max(out.gap, g.node(0, top).imag());
        return out;
    }
    const double h = (box.im_hi - box.im_lo) / (n_im - 1);
    for (int i = 0; i < n_re; ++i) {
        if (g.at(i, top) != Membership::Member) continue;
        const double x = g.node(i, top).real();
        double lo = g.node(i, top).imag();
        double hi = lo + h;
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            const Membership m = sibc_membership(st, cd(x, mid), opt);
            if (m == Membership::Member || m == Membership::Bulk) lo = mid;
            else hi = mid;
        }
        out.gap = std::max(out.gap, lo);
    }
    return out;
}

Region bulk_bounding_box(const CouplingStencil& st, double pad, int k_grid)
{
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (int i = 0; i < k_grid; ++i) {
        const double k = -std::numbers::pi + 2.0 * std::numbers::pi * i / k_grid;
        const Vec ev = eig(bloch(st, k), false).values;
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            xlo = std::min(xlo, ev(j).real());
            xhi = std::max(xhi, ev(j).real());
            ylo = std::min(ylo, ev(j).imag());
            yhi = std::max(yhi, ev(j).imag());
        }
    }
    const double span = std::max({xhi - xlo, yhi - ylo, 1e-3});
    const double p = pad * span + 0.1;
    return {xlo - p, xhi + p, ylo - p, yhi + p};
}

}  // namespace qbl
