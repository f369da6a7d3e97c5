#include "qbl/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qbl {

Mat propagator(const Mat& g, double t)
{
    if (t < 0) throw ConfigError("propagator needs t >= 0");
    if (t == 0) return Mat::Identity(g.rows(), g.cols());
    return (-I1 * t * g).exp();
}

std::vector<double> uniform_times(double dt, int steps)
{
    if (!(dt > 0) || steps < 0) throw ConfigError("time grid needs dt > 0 and steps >= 0");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = dt * static_cast<double>(k);
    return t;
}

MeanTrajectory evolve_mean(const Mat& g, const Vec& mean0, double dt, int steps)
{
    MeanTrajectory out;
    const Mat v = propagator(g, dt);
    Vec x = mean0;
    for (int k = 0; k <= steps; ++k) {
        if (x.norm() > 1e150 || !std::isfinite(x.norm())) {
            out.truncated = true;
            break;
        }
        out.times.push_back(dt * k);
        out.means.push_back(x);
        x = v * x;
    }
    return out;
}

namespace {

Mat moment_rhs(const Mat& g, const Mat& src, const Mat& q)
{
    return -I1 * (g * q - q * g.adjoint()) + src;
}

Mat rk4_interval(const Mat& g, const Mat& src, Mat q, double dt, int n)
{
    const double h = dt / n;
    for (int i = 0; i < n; ++i) {
        const Mat k1 = moment_rhs(g, src, q);
        const Mat k2 = moment_rhs(g, src, q + 0.5 * h * k1);
        const Mat k3 = moment_rhs(g, src, q + 0.5 * h * k2);
        const Mat k4 = moment_rhs(g, src, q + h * k3);
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return q;
}

}  // namespace

MomentSeries evolve_second_moments(const DynamicalMatrix& d, const Mat& m_gkls, const Mat& q0, double dt, int steps,
                                   MomentMethod method, double rk4_tol)
{
    const Mat& g = d.G;
    if (q0.rows() != g.rows() || q0.cols() != g.cols()) throw ConfigError("Q0 has the wrong shape");
    MomentSeries out;
    out.times = uniform_times(dt, steps);
    out.q.reserve(out.times.size());
    out.q.push_back(q0);
    if (method == MomentMethod::ExactHomogeneous) {
        if (m_gkls.size() && m_gkls.norm() != 0.0)
            throw ConfigError("exact homogeneous evolution needs M = 0");
        const Mat v = propagator(g, dt);
        for (int k = 0; k < steps; ++k) out.q.push_back(v * out.q.back() * v.adjoint());
        return out;
    }
    const Mat k = metric(d);
    const Mat src = m_gkls.size() ? Mat(k * m_gkls * k) : Mat(Mat::Zero(g.rows(), g.cols()));
    int n = 1;
    for (int s = 0; s < steps; ++s) {
        const Mat& q = out.q.back();
        for (;;) {
            const Mat coarse = rk4_interval(g, src, q, dt, n);
            const Mat fine = rk4_interval(g, src, q, dt, 2 * n);
            const double err = (coarse - fine).norm() / std::max(1.0, fine.norm());
            if (err <= rk4_tol) {
                out.q.push_back(fine);
                break;
            }
            if (n >= (1 << 16)) throw NumericalError("rk4 step control failed");
            n *= 2;
        }
    }
    out.substeps = 2 * n;
    return out;
}

Mat lossy_gkls(int sites, double kappa)
{
    Mat m = Mat::Zero(2 * sites, 2 * sites);
    for (int j = 0; j < sites; ++j) m(2 * j, 2 * j) = 2.0 * kappa;
    return m;
}

Vec sample_initial_mean(const DynamicalMatrix& d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index dim = d.G.rows();
    Vec m(dim);
    if (d.basis() == Basis::Nambu) {
        for (Eigen::Index j = 0; j < dim / 2; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(2 * j) = cd(re, im);
            m(2 * j + 1) = cd(re, -im);
        }
    } else {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(j) = cd(re, im);
        }
    }
    return m;
}

Vec quadrature_observable(int sites, int site, bool momentum)
{
    if (site < 0 || site >= sites) throw ConfigError("observable site out of range");
    Vec c = Vec::Zero(2 * sites);
    const double h = 1.0 / std::sqrt(2.0);
    if (momentum) {
        c(2 * site) = -I1 * h;
        c(2 * site + 1) = I1 * h;
    } else {
        c(2 * site) = h;
        c(2 * site + 1) = h;
    }
    return c;
}

EnsembleTrajectory trajectory_ensemble(const DynamicalMatrix& d, int n_traj, std::uint64_t seed, double dt, int steps,
                                       const Vec& observable, EnsembleStat stat, bool keep, int workers)
{
    if (n_traj < 1) throw ConfigError("ensemble needs at least one trajectory");
    const Eigen::Index dim = d.G.rows();
    if (observable.size() != dim) throw ConfigError("observable has the wrong length");
    EnsembleTrajectory out;
    out.count = n_traj;
    out.seed = seed;

    // r_k = c^T V(dt)^k, so that value_j(t_k) = r_k m_j
    const Mat v = propagator(d.G, dt);
    Mat rows(steps + 1, dim);
    Eigen::RowVectorXcd r = observable.transpose();
    int kept = 0;
    for (int k = 0; k <= steps; ++k) {
        if (r.norm() > 1e150 || !std::isfinite(r.norm())) {
            out.truncated = true;
            break;
        }
        rows.row(k) = r;
        ++kept;
        r = r * v;
    }
    Mat init(dim, n_traj);
    parallel_for(static_cast<std::size_t>(n_traj), workers, [&](std::size_t j) {
        init.col(static_cast<Eigen::Index>(j)) = sample_initial_mean(d, seed + j);
    });
    const Mat vals = rows.topRows(kept) * init;

    out.times = uniform_times(dt, kept - 1);
    out.value.resize(static_cast<std::size_t>(kept));
    out.stderr_.resize(static_cast<std::size_t>(kept));
    std::vector<double> buf(static_cast<std::size_t>(n_traj));
    std::vector<double> sq(static_cast<std::size_t>(n_traj));
    const double n = n_traj;
    for (int k = 0; k < kept; ++k) {
        for (int j = 0; j < n_traj; ++j) buf[static_cast<std::size_t>(j)] = std::abs(vals(k, j));
        const double mean_abs = pairwise_sum(buf.data(), buf.size()) / n;
        for (std::size_t j = 0; j < buf.size(); ++j) sq[j] = (buf[j] - mean_abs) * (buf[j] - mean_abs);
        const double var = n_traj > 1 ? pairwise_sum(sq.data(), sq.size()) / (n - 1.0) : 0.0;
        out.stderr_[static_cast<std::size_t>(k)] = std::sqrt(var / n);
        if (stat == EnsembleStat::MeanOfAbs) {
            out.value[static_cast<std::size_t>(k)] = mean_abs;
        } else {
            for (int j = 0; j < n_traj; ++j) buf[static_cast<std::size_t>(j)] = vals(k, j).real();
            const double re = pairwise_sum(buf.data(), buf.size()) / n;
            for (int j = 0; j < n_traj; ++j) buf[static_cast<std::size_t>(j)] = vals(k, j).imag();
            const double im = pairwise_sum(buf.data(), buf.size()) / n;
            out.value[static_cast<std::size_t>(k)] = std::hypot(re, im);
        }
    }
    if (keep) {
        out.per_traj.assign(static_cast<std::size_t>(n_traj), {});
        for (int j = 0; j < n_traj; ++j)
            for (int k = 0; k < kept; ++k) out.per_traj[static_cast<std::size_t>(j)].push_back(vals(k, j));
    }
    return out;
}

double measure_growth_rate(const std::vector<double>& times, const std::vector<double>& values, double t_lo,
                           double t_hi)
{
    std::vector<double> x, y;
    for (std::size_t i = 0; i < std::min(times.size(), values.size()); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        if (!(values[i] > 0)) throw ConfigError("growth rate needs positive values in the window");
        x.push_back(times[i]);
        y.push_back(std::log(values[i]));
    }
    return lsq_slope(x, y);
}

std::vector<double> windowed_slopes(const std::vector<double>& times, const std::vector<double>& values,
                                    double width)
{
    const std::size_t n = std::min(times.size(), values.size());
    if (n < 2) return {};
    const double dt = times[1] - times[0];
    const auto w = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(width / dt)));
    std::vector<double> out;
    for (std::size_t i = 0; i + w <= n; ++i) {
        std::vector<double> x(times.begin() + static_cast<long>(i), times.begin() + static_cast<long>(i + w));
        std::vector<double> y;
        for (std::size_t j = i; j < i + w; ++j) y.push_back(std::log(values[j]));
        out.push_back(lsq_slope(x, y));
    }
    return out;
}

double transient_end_time(const std::vector<double>& times, const std::vector<double>& values, double width)
{
    const auto s = windowed_slopes(times, values, width);
    bool grew = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] > 0) grew = true;
        else if (grew && s[i] < 0) return times[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double max_window_slope(const std::vector<double>& times, const std::vector<double>& values, double width)
{
    const auto s = windowed_slopes(times, values, width);
    if (s.empty()) throw ConfigError("trajectory too short for the slope window");
    return *std::max_element(s.begin(), s.end());
}

double onset_time(const std::vector<double>& times, const std::vector<double>& values, double baseline_end,
                  double rise)
{
    const std::size_t n = std::min(times.size(), values.size());
    double base = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < n && times[i] <= baseline_end; ++i) {
        base += std::log(values[i]);
        ++cnt;
    }
    if (cnt == 0) throw ConfigError("baseline window is empty");
    base /= cnt;
    std::size_t last_below = n;  // sentinel: never below
    for (std::size_t i = 0; i < n; ++i)
        if (std::log(values[i]) - base < rise) last_below = i;
    if (last_below == n) return times.empty() ? 0.0 : times[0];
    if (last_below + 1 >= n) return std::numeric_limits<double>::quiet_NaN();
    return times[last_below + 1];
}

}  // namespace qbl
