#include "qbl/model.hpp"

#include <cmath>

namespace qbl {

CouplingStencil CouplingStencil::zeros(int block, int range, Basis basis)
{
    CouplingStencil s;
    s.block = block;
    s.range = range;
    s.basis = basis;
    s.g.assign(static_cast<std::size_t>(2 * range + 1), Mat::Zero(block, block));
    return s;
}

CouplingStencil CouplingStencil::associated() const
{
    CouplingStencil s = *this;
    for (int r = -range; r <= range; ++r) s.at(r) = at(-r);
    return s;
}

CouplingStencil CouplingStencil::transposed() const
{
    CouplingStencil s = *this;
    for (auto& m : s.g) m.transposeInPlace();
    return s;
}

DerivedHNParams derive_hn_params(const CoupledHN& p)
{
    if (p.gamma_a < 0 || p.gamma_b < 0 || p.kappa_plus < 0 || p.kappa_minus < 0)
        throw ConfigError("coupled_hn: dissipative rates must be nonnegative");
    DerivedHNParams d;
    const double base = p.kappa_minus - p.kappa_plus;
    d.kappa_a = base + 2.0 * p.gamma_a;
    d.kappa_b = base + 2.0 * p.gamma_b;
    d.j_a_l = p.j_a - p.gamma_a;
    d.j_a_r = p.j_a + p.gamma_a;
    const cd phase = std::exp(I1 * p.theta);
    d.j_b_l = p.j_b - std::conj(phase) * p.gamma_b;
    d.j_b_r = p.j_b + phase * p.gamma_b;
    return d;
}

bool coherent_dominates(const CoupledHN& p)
{
    return std::abs(p.j_a) >= p.gamma_a && std::abs(p.j_b) >= p.gamma_b;
}

namespace {

CouplingStencil coupled_hn(const CoupledHN& p)
{
    const DerivedHNParams d = derive_hn_params(p);
    CouplingStencil s = CouplingStencil::zeros(2, 1, Basis::Reduced);
    Mat a0(2, 2), a1 = Mat::Zero(2, 2), am = Mat::Zero(2, 2);
    a0 << -d.kappa_a, p.w, -p.w, -d.kappa_b;
    a1(0, 0) = -d.j_a_r;
    a1(1, 1) = -d.j_b_r;
    am(0, 0) = d.j_a_l;
    am(1, 1) = d.j_b_l;
    s.at(0) = I1 * a0;
    s.at(1) = I1 * a1;
    s.at(-1) = I1 * am;
    return s;
}

CouplingStencil koc(const KOC& p)
{
    if (p.kappa < 0) throw ConfigError("koc: kappa must be nonnegative");
    CouplingStencil s = CouplingStencil::zeros(2, 1, Basis::Nambu);
    s.at(0) << p.omega - I1 * p.kappa, 0.0, 0.0, -p.omega - I1 * p.kappa;
    s.at(1) << -p.j, p.delta, p.delta, -p.j;
    s.at(1) *= 0.5 * I1;
    s.at(-1) << p.j, p.delta, p.delta, p.j;
    s.at(-1) *= 0.5 * I1;
    s.hamiltonian = p.kappa == 0.0;
    return s;
}

CouplingStencil ghc(const GhcTrb& p)
{
    CouplingStencil s = CouplingStencil::zeros(2, 1, Basis::Nambu);
    s.at(0) << p.omega, 0.0, 0.0, -p.omega;
    s.at(1) << -p.j - I1 * p.gamma, -p.j, p.j, p.j - I1 * p.gamma;
    s.at(1) *= 0.5;
    s.at(-1) << -p.j + I1 * p.gamma, -p.j, p.j, p.j + I1 * p.gamma;
    s.at(-1) *= 0.5;
    s.hamiltonian = true;
    return s;
}

CouplingStencil bkc_real(const BkcRealHop& p)
{
    CouplingStencil s = CouplingStencil::zeros(2, 1, Basis::Nambu);
    const cd hd = 0.5 * I1 * p.delta;
    s.at(1) << 0.5 * (p.g - I1 * p.j), hd, hd, -0.5 * (p.g + I1 * p.j);
    s.at(-1) << 0.5 * (p.g + I1 * p.j), hd, hd, 0.5 * (-p.g + I1 * p.j);
    s.hamiltonian = true;
    return s;
}

}  // namespace

CouplingStencil build_stencil(const ModelSpec& spec)
{
    return std::visit(
        [](const auto& p) -> CouplingStencil {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CoupledHN>) return coupled_hn(p);
            else if constexpr (std::is_same_v<T, KOC>) return koc(p);
            else if constexpr (std::is_same_v<T, GhcTrb>) return ghc(p);
            else return bkc_real(p);
        },
        spec);
}

double ghc_critical_gamma(double omega, double j)
{
    if (!(j > 0) || !(omega > 2.0 * j))
        throw ConfigError("ghc_critical_gamma needs omega > 2J > 0");
    const double r = 2.0 * j / omega;
    return omega / std::sqrt(2.0) * std::sqrt(1.0 + std::sqrt(1.0 - r * r));
}

std::string model_name(const ModelSpec& spec)
{
    static const char* names[] = {"coupled_hn", "koc", "ghc_trb", "bkc_real"};
    return names[spec.index()];
}

}  // namespace qbl
