#pragma once

#include <cstdint>
#include <vector>

#include "qbl/operators.hpp"

namespace qbl {

// exp(-iGt)
Mat propagator(const Mat& g, double t);

// t_k = k dt, k = 0..steps
std::vector<double> uniform_times(double dt, int steps);

struct MeanTrajectory {
    std::vector<double> times;
    std::vector<Vec> means;
    bool truncated = false;  // stopped once ||mean|| exceeded 1e150
};

MeanTrajectory evolve_mean(const Mat& g, const Vec& mean0, double dt, int steps);

enum class MomentMethod { ExactHomogeneous, RK4 };

struct MomentSeries {
    std::vector<double> times;
    std::vector<Mat> q;
    int substeps = 0;  // rk4 substeps per output interval
};

// dQ/dt = -i(GQ - QG^dag) + K M K with K the metric (tau3 for Nambu).
MomentSeries evolve_second_moments(const DynamicalMatrix& d, const Mat& m_gkls, const Mat& q0, double dt, int steps,
                                   MomentMethod method, double rk4_tol = 1e-10);

// Uniform onsite loss kappa as a GKLS matrix, M = diag(2 kappa, 0) per site;
// adds -i kappa to G.
Mat lossy_gkls(int sites, double kappa);

// Standard complex normal amplitude per mode, seed-deterministic. Nambu
// means come out as [alpha, alpha^*] per site.
Vec sample_initial_mean(const DynamicalMatrix& d, std::uint64_t seed);

// Row vector c with c . Phi = x_site (or p_site) in the Nambu basis.
Vec quadrature_observable(int sites, int site, bool momentum = false);

enum class EnsembleStat { MeanOfAbs, AbsOfMean };

struct EnsembleTrajectory {
    std::vector<double> times;
    std::vector<double> value;   // ensemble statistic per time
    std::vector<double> stderr_;  // standard error of the mean of |.|
    std::vector<std::vector<cd>> per_traj;  // only when kept
    int count = 0;
    std::uint64_t seed = 0;
    bool truncated = false;
};

// Trajectory j starts from sample_initial_mean(d, seed + j).
EnsembleTrajectory trajectory_ensemble(const DynamicalMatrix& d, int n_traj, std::uint64_t seed, double dt, int steps,
                                       const Vec& observable, EnsembleStat stat = EnsembleStat::MeanOfAbs,
                                       bool keep = false, int workers = 1);

// Least-squares slope of log(values) over t in [t_lo, t_hi].
double measure_growth_rate(const std::vector<double>& times, const std::vector<double>& values, double t_lo,
                           double t_hi);

// Sliding least-squares slopes of log(values) with the given window width.
std::vector<double> windowed_slopes(const std::vector<double>& times, const std::vector<double>& values,
                                    double width);

// First time the windowed log-slope turns negative after having been positive.
double transient_end_time(const std::vector<double>& times, const std::vector<double>& values, double width = 2.0);

// Largest windowed log-slope.
double max_window_slope(const std::vector<double>& times, const std::vector<double>& values, double width = 2.0);

// First time after which log(values) stays at least `rise` above its mean over
// [0, baseline_end].
double onset_time(const std::vector<double>& times, const std::vector<double>& values, double baseline_end = 5.0,
                  double rise = 1.0);

}  // namespace qbl
