#include "qbl/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qbl/dynamics.hpp"
#include "qbl/spectral.hpp"

namespace qbl {

namespace {

Mat ginibre_haar(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
    Mat z(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) z(i, j) = cd(normal(rng), normal(rng));
    Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

RMat orthosymplectic(const Mat& u)
{
    const auto n = u.rows();
    RMat o(2 * n, 2 * n);
    o << u.real(), u.imag(), -u.imag(), u.real();
    return o;
}

// block ordering (x..., p...) -> paired ordering
RMat pairing(int n)
{
    RMat p = RMat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        p(2 * j, j) = 1.0;
        p(2 * j + 1, n + j) = 1.0;
    }
    return p;
}

std::vector<int> quadrature_rows(const std::vector<int>& sites, int n_sites)
{
    if (sites.empty()) throw ConfigError("subsystem must be nonempty");
    std::vector<int> rows;
    for (int s : sites) {
        if (s < 0 || s >= n_sites) throw ConfigError("subsystem site out of range");
        rows.push_back(2 * s);
        rows.push_back(2 * s + 1);
    }
    return rows;
}

RMat restrict(const RMat& m, const std::vector<int>& rows)
{
    const auto k = static_cast<Eigen::Index>(rows.size());
    RMat out(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    return out;
}

std::vector<double> nu_of(const RMat& cov_a)
{
    const int a = static_cast<int>(cov_a.rows() / 2);
    if (a == 1) return {std::sqrt(std::max(cov_a.determinant(), 0.0))};
    const RMat om = symplectic_form(a);
    const Vec ev = eig(Mat((om * cov_a).cast<cd>()), false).values;
    std::vector<double> im;
    for (Eigen::Index i = 0; i < ev.size(); ++i) im.push_back(std::abs(ev(i).imag()));
    std::sort(im.begin(), im.end());
    std::vector<double> nu;
    for (std::size_t i = 0; i + 1 < im.size(); i += 2) nu.push_back(0.5 * (im[i] + im[i + 1]));
    return nu;
}

double checked_entropy_log(double log_nu, double band)
{
    if (log_nu >= 0) return entropy_term_log(log_nu);
    const double nu = std::exp(log_nu);
    if (nu < 1.0 - 10.0 * band) throw NumericalError("symplectic eigenvalue below 1: state violates uncertainty");
    return 0.0;
}

}  // namespace

Mat haar_unitary(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return ginibre_haar(n, rng);
}

RMat random_symplectic(int sites, std::uint64_t seed, double squeeze_mean, double squeeze_sd)
{
    if (sites < 1) throw ConfigError("need at least one mode");
    std::mt19937_64 rng(seed);
    const RMat o1 = orthosymplectic(ginibre_haar(sites, rng));
    const RMat o2 = orthosymplectic(ginibre_haar(sites, rng));
    std::normal_distribution<double> sq(squeeze_mean, squeeze_sd);
    RVec d(2 * sites);
    for (int j = 0; j < sites; ++j) {
        const double r = squeeze_sd > 0 ? sq(rng) : squeeze_mean;
        d(j) = std::exp(r);
        d(sites + j) = std::exp(-r);
    }
    const RMat p = pairing(sites);
    return p * (o1 * d.asDiagonal() * o2) * p.transpose();
}

GaussianState random_pure_cm(int sites, std::uint64_t seed, double squeeze_mean, double squeeze_sd)
{
    const RMat s = random_symplectic(sites, seed, squeeze_mean, squeeze_sd);
    RMat cov = s.transpose() * s;
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {RVec::Zero(2 * sites), cov};
}

double uncertainty_floor(const RMat& cov)
{
    const Mat h = cov.cast<cd>() + I1 * symplectic_form(static_cast<int>(cov.rows() / 2)).cast<cd>();
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

std::vector<double> symplectic_eigenvalues(const RMat& cov, const std::vector<int>& sites)
{
    return nu_of(restrict(cov, quadrature_rows(sites, static_cast<int>(cov.rows() / 2))));
}

double entropy_term(double nu)
{
    if (nu <= 1.0) return 0.0;
    if (nu > 1e8) return entropy_term_log(std::log(nu));
    const double a = 0.5 * (nu + 1.0), b = 0.5 * (nu - 1.0);
    if (nu < 2.0) return a * std::log(a) - b * std::log(b);
    // a log a - b log b without the cancellation
    return a * std::log1p(1.0 / b) + std::log(b);
}

double entropy_term_log(double log_nu)
{
    if (log_nu <= 0.0) return 0.0;
    // expansion in 1/nu: log(nu/2) + 1 + O(nu^-2)
    if (log_nu > 18.0) return log_nu - std::numbers::ln2 + 1.0;
    return entropy_term(std::exp(log_nu));
}

EntanglementReport entanglement_entropy(const RMat& cov, const std::vector<int>& sites, double tol)
{
    EntanglementReport rep;
    rep.nu = symplectic_eigenvalues(cov, sites);
    for (double& nu : rep.nu) {
        if (nu < 1.0 - 10.0 * tol) throw NumericalError("symplectic eigenvalue below 1: state violates uncertainty");
        if (nu < 1.0) nu = 1.0;
        rep.entropy += entropy_term(nu);
    }
    return rep;
}

RMat quadrature_propagator(const DynamicalMatrix& d, double t)
{
    if (d.basis() != Basis::Nambu) throw ConfigError("quadrature propagator needs a Nambu matrix");
    const Mat w = quadrature_basis(static_cast<int>(d.G.rows() / 2));
    const Mat s = w * propagator(d.G, t) * w.adjoint();
    if (s.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, s.cwiseAbs().maxCoeff()))
        throw NumericalError("quadrature propagator is not real");
    return s.real();
}

std::vector<double> ee_trajectory(const DynamicalMatrix& d, const RMat& cov0, const std::vector<int>& sites,
                                  double dt, int steps, double tol)
{
    if (d.basis() != Basis::Nambu || !d.stencil.hamiltonian)
        throw ConfigError("entanglement dynamics needs a Hamiltonian Nambu model");
    const int n = static_cast<int>(d.G.rows() / 2);
    const std::vector<int> rows = quadrature_rows(sites, n);
    const auto k = static_cast<Eigen::Index>(rows.size());
    const RMat sdt = quadrature_propagator(d, dt);
    const RMat om = symplectic_form(n);
    if ((sdt * om * sdt.transpose() - om).norm() > 1e-6 * std::max(1.0, sdt.squaredNorm()))
        throw NumericalError("propagator drifted away from the symplectic group");

    RMat q = RMat::Zero(k, 2 * n);
    for (Eigen::Index i = 0; i < k; ++i) q(i, rows[static_cast<std::size_t>(i)]) = 1.0;
    RMat c = RMat::Identity(k, k);
    double log_scale = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (int step = 0;; ++step) {
        const RMat m = q * cov0 * q.transpose();
        const RMat ga = c * m * c.transpose();
        const double log_norm = 2.0 * log_scale + std::log(ga.norm());
        const double band = std::max(tol, std::exp(std::min(0.0, 2.0 * log_norm + std::log(64.0 * eps))));
        double s = 0.0;
        if (k == 2) {
            const double log_nu = 2.0 * log_scale + std::log(std::abs(c.determinant())) + 0.5 * std::log(m.determinant());
            s = checked_entropy_log(log_nu, band);
        } else {
            for (double nu : nu_of(ga)) s += checked_entropy_log(2.0 * log_scale + std::log(nu), band);
        }
        out.push_back(s);
        if (step == steps) break;
        const RMat t = (q * sdt).transpose();
        Eigen::HouseholderQR<RMat> qr(t);
        const RMat qt = qr.householderQ() * RMat::Identity(t.rows(), k);
        const RMat rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        q = qt.transpose();
        c = c * rt.transpose();
        const double cn = c.cwiseAbs().maxCoeff();
        c /= cn;
        log_scale += std::log(cn);
    }
    return out;
}

EEEnsemble ee_ensemble(const DynamicalMatrix& d, int n_states, std::uint64_t seed, const std::vector<int>& sites,
                       double dt, int steps, double squeeze_mean, double squeeze_sd, int workers)
{
    if (n_states < 1) throw ConfigError("ensemble needs at least one state");
    const int n = static_cast<int>(d.G.rows() / 2);
    std::vector<std::vector<double>> runs(static_cast<std::size_t>(n_states));
    parallel_for(runs.size(), workers, [&](std::size_t i) {
        const GaussianState st = random_pure_cm(n, seed + i, squeeze_mean, squeeze_sd);
        runs[i] = ee_trajectory(d, st.cov, sites, dt, steps);
    });
    EEEnsemble out;
    out.times = uniform_times(dt, steps);
    std::vector<double> buf(runs.size());
    for (std::size_t t = 0; t < out.times.size(); ++t) {
        for (std::size_t i = 0; i < runs.size(); ++i) buf[i] = runs[i][t];
        out.mean.push_back(pairwise_sum(buf.data(), buf.size()) / static_cast<double>(buf.size()));
        out.min.push_back(*std::min_element(buf.begin(), buf.end()));
        out.max.push_back(*std::max_element(buf.begin(), buf.end()));
    }
    return out;
}

}  // namespace qbl
