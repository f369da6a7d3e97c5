#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qbl/spectral.hpp"
#include "support.hpp"

using namespace qbl;
using qbl::testing::match_distance;

namespace {

const double pi = std::numbers::pi;

DynamicalMatrix obc(const ModelSpec& m, int n) { return assemble(build_stencil(m), BC::OBC, n); }

// Fig. 4 rates with theta = 0: both chains carry kappa = 0.05, J^L = 0.5, J^R = 1.5
CoupledHN hn_pair(double w) { return CoupledHN{1.0, 1.0, w, 0.0, 0.5, 0.5, 1.95, 1.0}; }

}  // namespace

TEST_CASE("lossy hn rapidities for N = 3")
{
    Vec got = rapidities(obc(hn_pair(0.0), 3));
    Vec ref(6);
    for (int m = 1; m <= 3; ++m)
        ref(2 * m - 2) = ref(2 * m - 1) = -0.05 + 2.0 * I1 * std::sqrt(0.75) * std::cos(m * pi / 4.0);
    CHECK(match_distance(got, ref) < 1e-10);
    CHECK(stability_gap(obc(hn_pair(0.0), 3)) == doctest::Approx(-0.05).epsilon(1e-10));
}

TEST_CASE("zero matrix")
{
    Vec r = rapidities(obc(KOC{}, 4));
    CHECK(r.cwiseAbs().maxCoeff() == 0.0);
    CHECK(stability_gap(obc(KOC{}, 4)) == 0.0);
}

TEST_CASE("bkc rapidities are imaginary and doubly degenerate")
{
    for (int n : {5, 17, 33, 50}) {
        Vec r = rapidities(obc(KOC{2.0, 1.0, 0.0, 0.0}, n));
        Vec ref(2 * n);
        for (int m = 1; m <= n; ++m)
            ref(2 * m - 2) = ref(2 * m - 1) = -I1 * std::sqrt(3.0) * std::cos(m * pi / (n + 1));
        CHECK(match_distance(r, ref) < 1e-8);
    }
}

TEST_CASE("rapidity ordering")
{
    Vec r(4);
    r << cd(-1, 0), cd(0.5, -1), cd(0.5, 2), cd(0, 0);
    Vec s = sort_rapidities(r);
    CHECK(s(0) == cd(0.5, 2));
    CHECK(s(1) == cd(0.5, -1));
    CHECK(s(3) == cd(-1, 0));
}

TEST_CASE("hermitian G has zero gap")
{
    // Delta = 0, Omega > J: real spectrum
    CHECK(std::abs(stability_gap(obc(KOC{1.0, 0.0, 3.0, 0.0}, 12))) < 1e-12);
}

TEST_CASE("bulk gap of decoupled hn chains")
{
    auto st = build_stencil(hn_pair(0.0));
    CHECK(bulk_stability_gap(st) == doctest::Approx(-0.05 + 1.0).epsilon(1e-9));
}

TEST_CASE("koc bulk gap")
{
    CHECK(std::abs(bulk_stability_gap(build_stencil(KOC{2.0, 1.0, 1.1, 0.0}))) < 1e-9);
    CHECK(std::abs(bulk_stability_gap(build_stencil(KOC{2.0, 1.0, 3.0, 0.0}))) < 1e-9);
    for (double om : {0.0, 0.3, 0.8}) {
        const double ref = std::sqrt(1.0 - om * om);
        CHECK(bulk_stability_gap(build_stencil(KOC{2.0, 1.0, om, 0.0})) == doctest::Approx(ref).epsilon(1e-9));
    }
    CHECK(bulk_stability_gap(build_stencil(KOC{})) == 0.0);
    CHECK_THROWS_AS(bulk_stability_gap(build_stencil(KOC{}), 32), ConfigError);
}

TEST_CASE("single oscillator krein signatures")
{
    auto d = obc(KOC{0.0, 0.0, 1.5, 0.0}, 1);
    KreinData k = krein_analysis(d);
    REQUIRE(k.energies.size() == 2);
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double e = k.energies(i).real();
        CHECK(k.signature[static_cast<std::size_t>(i)] == doctest::Approx(e > 0 ? 1.0 : -1.0));
    }
    CHECK(k.collisions.empty());
    CHECK_THROWS_AS(krein_analysis(obc(KOC{1.0, 0.5, 1.0, 0.1}, 3)), ConfigError);
    CHECK_THROWS_AS(krein_analysis(obc(CoupledHN{}, 3)), ConfigError);
}

TEST_CASE("ghc krein collisions at J = 0")
{
    // J = 0 splits into Omega + gamma cos(m pi/(N+1)) and -Omega + gamma cos(m pi/(N+1))
    const int n = 5;
    const double om = 1.0;
    auto c = [&](int m) { return std::cos(m * pi / (n + 1)); };
    const double hit = 2.0 * om / (c(1) - c(5));
    auto at_hit = krein_analysis(obc(GhcTrb{om, 0.0, hit}, n));
    REQUIRE(at_hit.collisions.size() == 1);
    const auto [a, b] = at_hit.collisions[0];
    CHECK(std::abs(at_hit.energies(a).real()) < 1e-9);
    CHECK(at_hit.signature[static_cast<std::size_t>(a)] * at_hit.signature[static_cast<std::size_t>(b)] < 0);

    // between crossings nothing collides
    CHECK(krein_analysis(obc(GhcTrb{om, 0.0, 0.9 * hit}, n)).collisions.empty());
    CHECK(krein_analysis(obc(GhcTrb{om, 0.0, 0.5}, n)).collisions.empty());
}

TEST_CASE("koc bulk krein overlap near -pi/2 in region II")
{
    auto ov = bulk_krein_overlap(build_stencil(KOC{2.0, 1.0, 1.1, 0.0}));
    REQUIRE(ov.overlap);
    // the interval wraps through k = pi, so take the circular mean
    double sx = 0, sy = 0;
    bool has_center = false;
    for (double k : ov.momenta) {
        sx += std::cos(k), sy += std::sin(k);
        has_center = has_center || std::abs(k + pi / 2) < 0.02;
    }
    CHECK(has_center);
    CHECK(std::atan2(sy, sx) == doctest::Approx(-pi / 2).epsilon(0.02));
    CHECK(ov.lo == doctest::Approx(-0.9).epsilon(1e-3));
    CHECK(ov.hi == doctest::Approx(0.9).epsilon(1e-3));
    CHECK_FALSE(bulk_krein_overlap(build_stencil(KOC{2.0, 1.0, 3.0, 0.0})).overlap);
}

TEST_CASE("condition numbers")
{
    CHECK(condition_number(obc(KOC{1.0, 0.0, 3.0, 0.0}, 10)).K == doctest::Approx(1.0).epsilon(1e-8));
    Mat j(2, 2);
    j << 0.0, 1.0, 0.0, 1e-8;
    CHECK(condition_number(eig(j, true).vectors).K > 1e7);
    CHECK(condition_number(eig(j, true).vectors).ill_conditioned);
    CHECK_FALSE(condition_number(eig(j, true).vectors, 1e12).ill_conditioned);
    // region II modes are far from orthogonal, and more so with N
    const double k2 = condition_number(obc(KOC{2.0, 1.0, 1.1, 0.0}, 30)).K;
    CHECK(k2 > 10.0 * condition_number(obc(KOC{2.0, 1.0, 3.0, 0.0}, 30)).K);
    CHECK(condition_number(obc(KOC{2.0, 1.0, 1.1, 0.0}, 40)).K > condition_number(obc(KOC{2.0, 1.0, 1.1, 0.0}, 10)).K);
}

TEST_CASE("exceptional points")
{
    Mat j(2, 2);
    j << 0.0, 1.0, 0.0, 0.0;
    CHECK(detect_exceptional_point(j));
    Mat dg = Mat::Zero(3, 3);
    dg.diagonal() << 1.0, 2.0, cd(0, 3);
    CHECK_FALSE(detect_exceptional_point(dg));
    CHECK(detect_exceptional_point(bloch(build_stencil(KOC{2.0, 1.0, 1.0, 0.0}), 0.0)));
    CHECK_FALSE(detect_exceptional_point(bloch(build_stencil(KOC{2.0, 1.0, 1.5, 0.0}), 0.0)));
}

TEST_CASE("spectral report")
{
    auto rep = spectral_report(obc(KOC{2.0, 1.0, 3.0, 0.3}, 8));
    CHECK(rep.stability_gap < 0);
    REQUIRE(rep.lindblad_gap.has_value());
    CHECK(*rep.lindblad_gap == doctest::Approx(-rep.stability_gap));
    CHECK(rep.condition_number >= 1.0);
    CHECK(rep.rapidities(0).real() == rep.stability_gap);
    auto un = spectral_report(obc(KOC{2.0, 1.0, 0.0, 0.0}, 6));
    CHECK_FALSE(un.lindblad_gap.has_value());
}

TEST_CASE("charge-conjugation spectrum symmetry")
{
    for (const ModelSpec& m : {ModelSpec{KOC{2.0, 1.0, 0.0, 0.0}}, ModelSpec{KOC{2.0, 1.0, 1.1, 0.2}},
                               ModelSpec{GhcTrb{3.0, 1.0, 0.5}}, ModelSpec{BkcRealHop{2.0, 1.0, 0.4}}}) {
        Vec e = energy_eig(obc(m, 20), false).values;
        CHECK(match_distance(e, Vec(-e.conjugate())) < 1e-9);
    }
}

TEST_CASE("fourfold spectrum symmetry for pseudo-hermitian G")
{
    for (const ModelSpec& m : {ModelSpec{KOC{2.0, 1.0, 1.1, 0.0}}, ModelSpec{KOC{2.0, 1.0, 0.5, 0.0}},
                               ModelSpec{BkcRealHop{2.0, 1.0, 0.4}}}) {
        auto d = obc(m, 20);
        REQUIRE(is_pseudo_hermitian(d.G));
        Vec e = energy_eig(d, false).values;
        CHECK(match_distance(e, Vec(e.conjugate())) < 1e-9);
        CHECK(match_distance(e, Vec(-e)) < 1e-9);
    }
}

TEST_CASE("classification table")
{
    using P = std::vector<std::pair<int, double>>;
    auto c1 = classify(P{{10, -0.05}, {20, -0.05}, {30, -0.05}, {40, -0.05}}, 0.95);
    CHECK(c1.cls == StabilityClass::TypeI_DM);
    CHECK(c1.plateau);

    auto c2 = classify(P{{10, 0.3}, {20, 0.2}, {30, 0.15}, {40, 0.12}}, 0.0);
    CHECK(c2.cls == StabilityClass::TypeII_DM);
    CHECK(c2.largest_unstable_N == 40);

    auto c3 = classify(P{{10, -0.05}, {20, -0.05}, {30, -0.05}, {40, -0.05}}, -0.05);
    CHECK(c3.cls == StabilityClass::WellBehaved);
    CHECK(c3.largest_unstable_N == 0);

    auto c4 = classify(P{{10, -0.3}, {20, -0.3}, {30, -0.3}, {40, -0.3}}, -0.05);
    CHECK(c4.cls == StabilityClass::AnomalouslyRelaxing);

    // order of input does not matter
    auto c5 = classify(P{{40, 0.12}, {10, 0.3}, {30, 0.15}, {20, 0.2}}, 0.0);
    CHECK(c5.cls == StabilityClass::TypeII_DM);
}

TEST_CASE("classification refuses to guess")
{
    using P = std::vector<std::pair<int, double>>;
    CHECK_THROWS_AS(classify(P{{10, 0.1}, {20, 0.1}, {30, 0.1}}, 0.0), ConfigError);
    CHECK(classify(P{{10, 0.1}, {20, -0.1}, {30, 0.1}, {40, -0.1}}, 0.0).cls == StabilityClass::Inconclusive);
    CHECK(classify(P{{10, -0.1}, {20, -0.3}, {30, -0.2}, {40, -0.25}}, -0.1).cls == StabilityClass::Inconclusive);
    // plateau sitting above the semi-infinite gap contradicts the limiting bound
    CHECK(classify(P{{10, 0.5}, {20, 0.5}, {30, 0.5}, {40, 0.5}}, 0.1).cls == StabilityClass::Inconclusive);
    CHECK(to_string(StabilityClass::Inconclusive) == "Inconclusive");
}
