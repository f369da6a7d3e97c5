#include "qbl/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace qbl {

Balanced balance(const Mat& a, double log_tol, int max_sweeps)
{
    const Eigen::Index n = a.rows();
    Balanced out{a, RVec::Ones(n)};
    if (n < 2) return out;
    if (max_sweeps <= 0) max_sweeps = static_cast<int>(50 * n + 100);
    Mat& b = out.matrix;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            // alternate direction so information travels both ways along chains
            const Eigen::Index i = (sweep % 2 == 0) ? k : n - 1 - k;
            double c = b.col(i).squaredNorm() - std::norm(b(i, i));
            double r = b.row(i).squaredNorm() - std::norm(b(i, i));
            if (c <= 0.0 || r <= 0.0) continue;
            double f = std::sqrt(std::sqrt(r / c));
            if (!std::isfinite(f)) continue;
            worst = std::max(worst, std::abs(std::log(f)));
            b.col(i) *= f;
            b.row(i) /= f;
            out.scale(i) *= f;
        }
        if (worst < log_tol) break;
    }
    return out;
}

Eig eig(const Mat& a, bool with_vectors)
{
    Eig out;
    const Eigen::Index n = a.rows();
    if (n == 0) return out;
    Balanced bal = balance(a);
    const double scale = bal.matrix.cwiseAbs().maxCoeff();
    const bool real = bal.matrix.imag().cwiseAbs().maxCoeff() <= 1e-14 * std::max(scale, 1e-300);
    Mat vecs;
    if (real) {
        RMat re = bal.matrix.real();
        Eigen::EigenSolver<RMat> es(re, with_vectors);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
        out.values = es.eigenvalues();
        if (with_vectors) vecs = es.eigenvectors();
    } else {
        Eigen::ComplexEigenSolver<Mat> es(bal.matrix, with_vectors);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
        out.values = es.eigenvalues();
        if (with_vectors) vecs = es.eigenvectors();
    }
    if (with_vectors) {
        out.vectors = bal.scale.cast<cd>().asDiagonal() * vecs;
        for (Eigen::Index j = 0; j < n; ++j) {
            double nrm = out.vectors.col(j).norm();
            if (nrm > 0) out.vectors.col(j) /= nrm;
        }
    }
    return out;
}

double norm2(const Mat& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

SingularTriple smallest_singular(const Mat& a)
{
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
    const Eigen::Index k = a.cols() - 1;
    return {svd.singularValues()(k), svd.matrixU().col(k), svd.matrixV().col(k)};
}

double smallest_singular_value(const Mat& a)
{
    Eigen::BDCSVD<Mat> svd(a);
    return svd.singularValues()(a.cols() - 1);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body)
{
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) throw ConfigError("slope needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw ConfigError("slope window has zero width");
    return sxy / sxx;
}

}  // namespace qbl
