#include "qbl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qbl {

Eig energy_eig(const DynamicalMatrix& d, bool with_vectors)
{
    Eig out;
    if (d.basis() == Basis::Nambu) {
        const Mat w = quadrature_basis(static_cast<int>(d.G.rows() / 2));
        Mat m = w * (-I1 * d.G) * w.adjoint();
        Eig e = eig(m, with_vectors);
        out.values = I1 * e.values;
        if (with_vectors) out.vectors = w.adjoint() * e.vectors;
    } else {
        Eig e = eig(-I1 * d.G, with_vectors);
        out.values = I1 * e.values;
        if (with_vectors) out.vectors = std::move(e.vectors);
    }
    return out;
}

namespace {

bool rapidity_before(const cd& a, const cd& b)
{
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

std::vector<Eigen::Index> rapidity_order(const Vec& r)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rapidity_before(r(a), r(b)); });
    return idx;
}

}  // namespace

Vec sort_rapidities(Vec r)
{
    std::sort(r.data(), r.data() + r.size(), rapidity_before);
    return r;
}

Vec rapidities(const DynamicalMatrix& d)
{
    return sort_rapidities(-I1 * energy_eig(d, false).values);
}

double stability_gap(const DynamicalMatrix& d)
{
    if (d.G.size() == 0) return 0.0;
    return rapidities(d)(0).real();
}

ConditionInfo condition_number(const Mat& vectors, double threshold)
{
    ConditionInfo c;
    if (vectors.size() == 0) return c;
    Eigen::JacobiSVD<Mat> svd(vectors);
    const RVec& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    c.K = smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    c.ill_conditioned = !std::isfinite(c.K) || c.K > threshold;
    return c;
}

ConditionInfo condition_number(const DynamicalMatrix& d, double threshold)
{
    return condition_number(energy_eig(d, true).vectors, threshold);
}

bool detect_exceptional_point(const Mat& g, double tol)
{
    const Eig e = eig(g, true);
    const Mat& v = e.vectors;
    for (Eigen::Index i = 0; i < v.cols(); ++i)
        for (Eigen::Index j = i + 1; j < v.cols(); ++j)
            if (std::abs(v.col(i).dot(v.col(j))) > 1.0 - tol) return true;
    Eigen::JacobiSVD<Mat> svd(v);
    const RVec& s = svd.singularValues();
    return s(s.size() - 1) <= tol * s(0);
}

SpectralReport spectral_report(const DynamicalMatrix& d, double ep_tol)
{
    SpectralReport rep;
    const Eig e = energy_eig(d, true);
    const Vec r = -I1 * e.values;
    const auto order = rapidity_order(r);
    rep.rapidities.resize(r.size());
    rep.vectors.resize(e.vectors.rows(), e.vectors.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        rep.rapidities(k) = r(order[i]);
        rep.vectors.col(k) = e.vectors.col(order[i]);
    }
    rep.stability_gap = r.size() ? rep.rapidities(0).real() : 0.0;
    if (rep.stability_gap < 0) rep.lindblad_gap = -rep.stability_gap;
    const ConditionInfo c = condition_number(rep.vectors);
    rep.condition_number = c.K;
    rep.diagonalizable = std::isfinite(c.K) && 1.0 / c.K > ep_tol;
    return rep;
}

namespace {

double band_top(const CouplingStencil& st, double k)
{
    const Vec ev = eig(bloch(st, k), false).values;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::max(best, ev(i).imag());
    return best;
}

}  // namespace

double bulk_stability_gap(const CouplingStencil& st, int k_grid)
{
    if (k_grid < 64) throw ConfigError("bulk_stability_gap needs at least 64 momenta");
    const double pi = std::numbers::pi;
    const double h = 2.0 * pi / k_grid;
    double best = -std::numeric_limits<double>::infinity();
    double kbest = -pi;
    for (int i = 0; i < k_grid; ++i) {
        const double k = -pi + h * i;
        const double v = band_top(st, k);
        if (v > best) {
            best = v;
            kbest = k;
        }
    }
    // golden section on the bracketing cells
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kbest - h, b = kbest + h;
    double c = b - phi * (b - a), e = a + phi * (b - a);
    double fc = band_top(st, c), fe = band_top(st, e);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (fc > fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - phi * (b - a);
            fc = band_top(st, c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + phi * (b - a);
            fe = band_top(st, e);
        }
    }
    return std::max({best, fc, fe});
}

bool is_pseudo_hermitian(const Mat& g, double rel_tol)
{
    if (g.rows() % 2) return false;
    const Mat t3 = tau3(static_cast<int>(g.rows() / 2));
    const double scale = std::max(g.norm(), 1e-300);
    return (g - t3 * g.adjoint() * t3).norm() <= rel_tol * scale;
}

KreinData krein_analysis(const DynamicalMatrix& d, double degeneracy_tol)
{
    if (d.basis() != Basis::Nambu || !is_pseudo_hermitian(d.G))
        throw ConfigError("Krein analysis needs a pseudo-Hermitian Nambu matrix");
    KreinData out;
    out.degeneracy_tol = degeneracy_tol > 0 ? degeneracy_tol : 1e-7 * norm2(d.G);
    const double tol = std::max(out.degeneracy_tol, 1e-300);
    const Eig e = energy_eig(d, true);
    out.energies = e.values;
    const auto n = static_cast<std::size_t>(e.values.size());
    out.signature.assign(n, std::numeric_limits<double>::quiet_NaN());
    const Mat t3 = tau3(static_cast<int>(d.G.rows() / 2));

    std::vector<int> real_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(e.values(static_cast<Eigen::Index>(i)).imag()) <= tol) real_idx.push_back(static_cast<int>(i));
    std::sort(real_idx.begin(), real_idx.end(),
              [&](int a, int b) { return e.values(a).real() < e.values(b).real(); });

    const double sig_tol = 1e-6;
    for (std::size_t s = 0; s < real_idx.size();) {
        std::size_t t = s + 1;
        while (t < real_idx.size() && e.values(real_idx[t]).real() - e.values(real_idx[t - 1]).real() <= tol) ++t;
        const auto m = static_cast<Eigen::Index>(t - s);
        Mat vc(d.G.rows(), m);
        for (Eigen::Index j = 0; j < m; ++j) vc.col(j) = e.vectors.col(real_idx[s + static_cast<std::size_t>(j)]);
        const Mat gram = vc.adjoint() * t3 * vc;
        Eigen::SelfAdjointEigenSolver<Mat> es(gram);
        const RVec& w = es.eigenvalues();
        for (Eigen::Index j = 0; j < m; ++j)
            out.signature[static_cast<std::size_t>(real_idx[s + static_cast<std::size_t>(j)])] =
                m == 1 ? gram(0, 0).real() : w(j);
        // opposite signs, or a vanishing signature after coalescence
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = a + 1; b < m; ++b) {
                const double sa = w(a), sb = w(b);
                const bool opposite = (sa < -sig_tol && sb > sig_tol) || (sa > sig_tol && sb < -sig_tol);
                const bool null = std::abs(sa) <= sig_tol || std::abs(sb) <= sig_tol;
                if (opposite || null)
                    out.collisions.emplace_back(real_idx[s + static_cast<std::size_t>(a)],
                                                real_idx[s + static_cast<std::size_t>(b)]);
            }
        s = t;
    }
    return out;
}

BulkKreinOverlap bulk_krein_overlap(const CouplingStencil& st, int k_grid)
{
    if (st.basis != Basis::Nambu) throw ConfigError("Krein signatures need a Nambu stencil");
    const double pi = std::numbers::pi;
    const Mat t3 = tau3(st.block / 2);
    std::vector<std::pair<double, double>> plus, minus;  // (k, energy)
    for (int i = 0; i < k_grid; ++i) {
        const double k = -pi + 2.0 * pi * i / k_grid;
        const Mat g = bloch(st, k);
        const Eig e = eig(g, true);
        const double scale = std::max(g.norm(), 1.0);
        for (Eigen::Index j = 0; j < e.values.size(); ++j) {
            if (std::abs(e.values(j).imag()) > 1e-9 * scale) continue;
            const double s = (e.vectors.col(j).adjoint() * t3 * e.vectors.col(j))(0, 0).real();
            if (s > 1e-9) plus.emplace_back(k, e.values(j).real());
            else if (s < -1e-9) minus.emplace_back(k, e.values(j).real());
        }
    }
    BulkKreinOverlap out;
    if (plus.empty() || minus.empty()) return out;
    auto range = [](const auto& v) {
        double lo = v[0].second, hi = v[0].second;
        for (const auto& p : v) {
            lo = std::min(lo, p.second);
            hi = std::max(hi, p.second);
        }
        return std::pair{lo, hi};
    };
    const auto [plo, phi] = range(plus);
    const auto [mlo, mhi] = range(minus);
    out.lo = std::max(plo, mlo);
    out.hi = std::min(phi, mhi);
    out.overlap = out.hi > out.lo;
    if (out.overlap)
        for (const auto& p : plus)
            if (p.second >= out.lo && p.second <= out.hi) out.momenta.push_back(p.first);
    return out;
}

std::string to_string(StabilityClass c)
{
    switch (c) {
    case StabilityClass::TypeI_DM: return "TypeI_DM";
    case StabilityClass::TypeII_DM: return "TypeII_DM";
    case StabilityClass::AnomalouslyRelaxing: return "AnomalouslyRelaxing";
    case StabilityClass::WellBehaved: return "WellBehaved";
    case StabilityClass::Inconclusive: break;
    }
    return "Inconclusive";
}

Classification classify(std::vector<std::pair<int, double>> gaps, double sibc_gap, double tol)
{
    if (gaps.size() < 4) throw ConfigError("classify needs at least four sizes");
    std::sort(gaps.begin(), gaps.end());
    Classification c;
    c.sibc_gap = sibc_gap;

    std::size_t stable = 0;
    for (const auto& [n, g] : gaps) {
        if (g <= tol) ++stable;
        else c.largest_unstable_N = std::max(c.largest_unstable_N, n);
    }
    const double frac = static_cast<double>(stable) / static_cast<double>(gaps.size());
    if (frac > 0.25 && frac < 0.75) {
        c.note = "finite-size stability has no clear majority";
        return c;
    }
    c.finite_stable = frac >= 0.75;
    c.sibc_stable = sibc_gap <= tol;
    c.disagreement = c.finite_stable != c.sibc_stable;

    const auto m = gaps.size();
    const auto [n1, g1] = gaps[m - 1];
    const auto [n0, g0] = gaps[m - 2];
    c.plateau = std::abs(g1 - g0) <= tol * std::max(1.0, std::abs(g1));
    if (c.plateau) {
        if (g1 > sibc_gap + tol) {
            c.note = "plateau above the semi-infinite gap violates the limiting bound";
            return c;
        }
        c.extrapolated = g1;
    } else {
        const double gm = gaps[m - 3].second;
        const bool monotone = (g1 - g0) * (g0 - gm) >= 0.0;
        if (!monotone) {
            c.note = "non-monotone gaps without plateau";
            return c;
        }
        const double slope = (g1 - g0) / (1.0 / n1 - 1.0 / n0);
        c.extrapolated = std::min(g1 - slope / n1, sibc_gap);
    }
    c.discontinuity = std::abs(c.extrapolated - sibc_gap) > tol;
    if (c.disagreement) c.cls = c.discontinuity ? StabilityClass::TypeI_DM : StabilityClass::TypeII_DM;
    else c.cls = c.discontinuity ? StabilityClass::AnomalouslyRelaxing : StabilityClass::WellBehaved;
    return c;
}

}  // namespace qbl
