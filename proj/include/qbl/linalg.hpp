#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbl {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cd I1{0.0, 1.0};

// Thrown for malformed specs, configs and out-of-domain arguments.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine cannot deliver a trustworthy answer.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Diagonal similarity D^{-1} A D found by Osborne iteration with exact
// (not power-of-two) factors. Needed for the strongly graded matrices of
// skin-effect chains where LAPACK-style balancing stops too early.
struct Balanced {
    Mat matrix;
    RVec scale;  // D
};
Balanced balance(const Mat& a, double log_tol = 1e-2, int max_sweeps = 0);

struct Eig {
    Vec values;
    Mat vectors;  // unit columns, empty when not requested
};

// Eigenpairs of a general square matrix, computed on the balanced form.
// Uses the real solver when the input is real to working precision.
Eig eig(const Mat& a, bool with_vectors);

double norm2(const Mat& a);

struct SingularTriple {
    double sigma;
    Vec u;  // left
    Vec v;  // right
};
SingularTriple smallest_singular(const Mat& a);
double smallest_singular_value(const Mat& a);

// Fixed-layout parallel loop: body(i) runs for every i in [0, n), each index
// writes only its own slot, so results do not depend on the worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

// Pairwise summation in index order.
double pairwise_sum(const double* x, std::size_t n);

// Least-squares slope of y against x.
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qbl
