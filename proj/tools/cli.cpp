#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qbl/dynamics.hpp"
#include "qbl/gaussian.hpp"
#include "qbl/pseudospec.hpp"
#include "qbl/response.hpp"
#include "qbl/spectral.hpp"
#include "qbl/wienerhopf.hpp"

namespace qbl::cli {

namespace {

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::map<std::string, std::vector<std::string>>& param_names()
{
    static const std::map<std::string, std::vector<std::string>> names = {
        {"coupled_hn", {"j_a", "j_b", "w", "theta", "gamma_a", "gamma_b", "kappa_plus", "kappa_minus"}},
        {"koc", {"j", "delta", "omega", "kappa"}},
        {"ghc_trb", {"omega", "j", "gamma"}},
        {"bkc_real", {"j", "delta", "g"}},
    };
    return names;
}

double get(const json& p, const char* key, double def)
{
    if (!p.contains(key)) return def;
    if (!p.at(key).is_number()) throw ConfigError(std::string("parameter ") + key + " must be a number");
    return p.at(key).get<double>();
}

template <class T>
T opt(const RunConfig& c, const char* key, T def)
{
    if (!c.raw.contains(key)) return def;
    try {
        return c.raw.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("option ") + key + " has the wrong type");
    }
}

std::vector<int> int_list(const RunConfig& c, const char* key, std::vector<int> def)
{
    if (!c.raw.contains(key)) return def;
    const json& v = c.raw.at(key);
    std::vector<int> out;
    if (v.is_array()) {
        for (const auto& x : v) out.push_back(x.get<int>());
    } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.find(':') != std::string::npos) {
            for (double x : parse_range(s)) out.push_back(static_cast<int>(std::lround(x)));
        } else {
            std::stringstream ss(s);
            for (std::string tok; std::getline(ss, tok, ',');)
                if (!tok.empty()) out.push_back(std::stoi(tok));
        }
    } else if (v.is_number_integer()) {
        out.push_back(v.get<int>());
    } else {
        throw ConfigError(std::string("option ") + key + " must be a list of integers");
    }
    if (out.empty()) throw ConfigError(std::string("option ") + key + " is empty");
    return out;
}

BC boundary(const RunConfig& c)
{
    const std::string bc = opt<std::string>(c, "bc", "obc");
    if (bc == "obc") return BC::OBC;
    if (bc == "pbc") return BC::PBC;
    throw ConfigError("bc must be obc or pbc");
}

std::string bc_name(BC bc) { return bc == BC::PBC ? "pbc" : "obc"; }

std::pair<double, double> span(const json& v)
{
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw ConfigError("interval must look like lo:hi");
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    }
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("interval must be \"lo:hi\" or [lo, hi]");
}

Region region(const RunConfig& c, Region def)
{
    if (!c.raw.contains("region")) return def;
    const json& r = c.raw.at("region");
    Region out = def;
    if (r.contains("re")) std::tie(out.re_lo, out.re_hi) = span(r.at("re"));
    if (r.contains("im")) std::tie(out.im_lo, out.im_hi) = span(r.at("im"));
    out.re_lo = get(r, "re_lo", out.re_lo);
    out.re_hi = get(r, "re_hi", out.re_hi);
    out.im_lo = get(r, "im_lo", out.im_lo);
    out.im_hi = get(r, "im_hi", out.im_hi);
    if (!(out.re_hi > out.re_lo) || !(out.im_hi > out.im_lo)) throw ConfigError("region is empty");
    return out;
}

std::pair<int, int> resolution(const RunConfig& c, int def)
{
    if (!c.raw.contains("resolution")) return {def, def};
    const json& r = c.raw.at("resolution");
    if (r.is_number_integer()) return {r.get<int>(), r.get<int>()};
    if (r.is_array() && r.size() == 2) return {r[0].get<int>(), r[1].get<int>()};
    throw ConfigError("resolution must be an integer or [n_re, n_im]");
}

json region_json(const Region& r)
{
    return {{"re_lo", r.re_lo}, {"re_hi", r.re_hi}, {"im_lo", r.im_lo}, {"im_hi", r.im_hi}};
}

int sites_option(const RunConfig& c, int def = 30)
{
    const int n = opt<int>(c, "N", def);
    if (n < 1) throw ConfigError("N must be positive");
    return n;
}

std::string hex(std::uint64_t h)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json base_meta(const RunConfig& c, const std::string& cmd)
{
    return {{"command", cmd}, {"config", c.raw}, {"seed", c.seed}};
}

int sign_of(double s)
{
    if (std::isnan(s) || std::abs(s) < 1e-6) return 0;
    return s > 0 ? 1 : -1;
}

struct SignedValue {
    cd value;
    int sign;
};

std::vector<SignedValue> signed_spectrum(const DynamicalMatrix& d, bool rapidity_plane, double degeneracy_tol,
                                         json* krein_meta)
{
    std::vector<SignedValue> out;
    const bool krein = d.basis() == Basis::Nambu && is_pseudo_hermitian(d.G);
    if (krein) {
        const KreinData k = krein_analysis(d, degeneracy_tol);
        for (Eigen::Index i = 0; i < k.energies.size(); ++i)
            out.push_back({k.energies(i), sign_of(k.signature[static_cast<std::size_t>(i)])});
        if (krein_meta) {
            json col = json::array();
            for (const auto& [a, b] : k.collisions)
                col.push_back({{"re", k.energies(a).real()}, {"im", k.energies(a).imag()}, {"pair", {a, b}}});
            (*krein_meta)["collisions"] = col;
            (*krein_meta)["degeneracy_tol"] = k.degeneracy_tol;
        }
    } else {
        if (krein_meta) throw ConfigError("Krein analysis needs a pseudo-Hermitian Nambu model");
        const Vec e = energy_eig(d, false).values;
        for (Eigen::Index i = 0; i < e.size(); ++i) out.push_back({e(i), 0});
    }
    if (rapidity_plane) {
        for (auto& v : out) v.value *= -I1;
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
            return a.value.imag() > b.value.imag();
        });
    } else {
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
            return a.value.imag() < b.value.imag();
        });
    }
    return out;
}

Output cmd_spectrum(const RunConfig& c)
{
    const int n = sites_option(c);
    const BC bc = boundary(c);
    const std::string plane = opt<std::string>(c, "plane", "energy");
    if (plane != "energy" && plane != "rapidity") throw ConfigError("plane must be energy or rapidity");
    const DynamicalMatrix d = assemble(build_stencil(c.model), bc, n);
    const auto vals = signed_spectrum(d, plane == "rapidity", opt<double>(c, "degeneracy_tol", 0.0), nullptr);
    Output o;
    std::ostringstream os;
    os << "index,re,im,krein_sign\n";
    for (std::size_t i = 0; i < vals.size(); ++i)
        os << i << ',' << num(vals[i].value.real()) << ',' << num(vals[i].value.imag()) << ',' << vals[i].sign << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "spectrum");
    o.meta["N"] = n;
    o.meta["bc"] = bc_name(bc);
    o.meta["plane"] = plane;
    o.meta["stability_gap"] = stability_gap(d);
    o.meta["matrix_hash"] = hex(matrix_hash(d.G));
    return o;
}

void set_param(json& cfg, const std::string& name, double value)
{
    const std::string model = cfg.at("model").get<std::string>();
    const auto& names = param_names().at(model);
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown sweep parameter " + name);
    cfg["params"][name] = value;
}

Output cmd_gap_sweep(const RunConfig& c)
{
    const std::string param = opt<std::string>(c, "param", "");
    if (param.empty()) throw ConfigError("gap-sweep needs a param");
    const std::vector<double> values = parse_range(opt<std::string>(c, "range", ""));
    const std::vector<int> sizes = int_list(c, "sizes", {});
    const BC bc = boundary(c);
    const bool with_sibc = opt<bool>(c, "sibc", true);
    const int res = opt<int>(c, "sibc_resolution", 41);
    if (std::holds_alternative<CoupledHN>(c.model)) {
        const double th = std::get<CoupledHN>(c.model).theta;
        if (std::abs(th) > 1e-12 && std::abs(th - std::numbers::pi) > 1e-12)
            throw ConfigError("phase-diagram sweeps of coupled_hn need theta in {0, pi}");
    }
    std::vector<ModelSpec> models;
    for (double v : values) {
        json j = c.raw;
        set_param(j, param, v);
        models.push_back(parse_model(j));
    }
    const std::size_t nv = values.size(), ns = sizes.size();
    std::vector<double> gaps(nv * ns, std::nan("")), sibc(nv, std::nan(""));
    std::vector<std::string> errors(nv * ns + nv);
    parallel_for(nv * ns + (with_sibc ? nv : 0), c.workers, [&](std::size_t idx) {
        try {
            if (idx < nv * ns) {
                const std::size_t i = idx / ns, k = idx % ns;
                gaps[idx] = stability_gap(assemble(build_stencil(models[i]), bc, sizes[k]));
            } else {
                const std::size_t i = idx - nv * ns;
                const CouplingStencil st = build_stencil(models[i]);
                sibc[i] = sibc_stability_gap(st, bulk_bounding_box(st), res, res, 1).gap;
            }
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    });
    Output o;
    std::ostringstream os;
    os << "param,N,obc_gap,sibc_gap\n";
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t k = 0; k < ns; ++k)
            os << num(values[i]) << ',' << sizes[k] << ',' << num(gaps[i * ns + k]) << ',' << num(sibc[i]) << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "gap-sweep");
    json fails = json::array();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) fails.push_back({{"point", i}, {"error", errors[i]}});
    o.meta["failures"] = fails;
    return o;
}

Output cmd_pseudospectrum(const RunConfig& c)
{
    const int n = sites_option(c);
    const BC bc = boundary(c);
    const DynamicalMatrix d = assemble(build_stencil(c.model), bc, n);
    const std::string plane = opt<std::string>(c, "plane", "energy");
    Mat g = d.G;
    if (plane == "rapidity") g = -I1 * d.G;
    else if (plane != "energy") throw ConfigError("plane must be energy or rapidity");
    Region def;
    {
        const Vec ev = eig(g, false).values;
        const double r = std::max(1.0, ev.cwiseAbs().maxCoeff()) * 1.25;
        def = {-r, r, -r, r};
    }
    const Region reg = region(c, def);
    const auto [nr, ni] = resolution(c, 64);
    const PseudospectrumGrid grid = resolvent_norm_grid(g, reg, nr, ni, c.workers);
    Output o;
    std::ostringstream os;
    os << "re,im,smin\n";
    for (int j = 0; j < ni; ++j)
        for (int i = 0; i < nr; ++i) {
            const cd z = grid.node(i, j);
            os << num(z.real()) << ',' << num(z.imag()) << ',' << num(grid.at(i, j)) << '\n';
        }
    o.csv = os.str();
    o.meta = base_meta(c, "pseudospectrum");
    o.meta["region"] = region_json(reg);
    o.meta["resolution"] = {nr, ni};
    o.meta["plane"] = plane;
    o.meta["N"] = n;
    o.meta["bc"] = bc_name(bc);
    o.meta["norm"] = norm2(g);
    o.meta["matrix_hash"] = hex(matrix_hash(g));
    return o;
}

Output cmd_sibc(const RunConfig& c)
{
    const CouplingStencil st = build_stencil(c.model);
    const Region reg = region(c, bulk_bounding_box(st));
    const auto [nr, ni] = resolution(c, 41);
    const MembershipGrid grid = sibc_membership_grid(st, reg, nr, ni, c.workers);
    const SibcGap gap = sibc_stability_gap(st, reg, nr, ni, c.workers);
    Output o;
    std::ostringstream os;
    os << "re,im,status\n";
    std::map<std::string, int> counts;
    for (int j = 0; j < ni; ++j)
        for (int i = 0; i < nr; ++i) {
            const cd z = grid.node(i, j);
            const std::string s = to_string(grid.at(i, j));
            ++counts[s];
            os << num(z.real()) << ',' << num(z.imag()) << ',' << s << '\n';
        }
    o.csv = os.str();
    o.meta = base_meta(c, "sibc");
    o.meta["region"] = region_json(reg);
    o.meta["resolution"] = {nr, ni};
    o.meta["counts"] = counts;
    o.meta["sibc_gap"] = gap.gap;
    o.meta["bulk_gap"] = gap.bulk_gap;
    o.meta["touches_boundary"] = gap.touches_boundary;
    return o;
}

Output cmd_evolve(const RunConfig& c)
{
    const int n = sites_option(c);
    const DynamicalMatrix d = assemble(build_stencil(c.model), boundary(c), n);
    const double dt = opt<double>(c, "dt", 0.05);
    const double t_end = opt<double>(c, "t_end", 40.0);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    const int n_traj = opt<int>(c, "n_traj", 300);
    const std::string stat = opt<std::string>(c, "stat", "mean_abs");
    if (stat != "mean_abs" && stat != "abs_mean") throw ConfigError("stat must be mean_abs or abs_mean");
    const bool keep = opt<bool>(c, "keep_trajectories", false);
    Vec obs;
    if (d.basis() == Basis::Nambu) {
        const int site = opt<int>(c, "site", n / 2 - 1 >= 0 ? n / 2 - 1 : 0);
        obs = quadrature_observable(n, site, opt<std::string>(c, "quadrature", "x") == "p");
    } else {
        const int comp = opt<int>(c, "component", 0);
        if (comp < 0 || comp >= d.G.rows()) throw ConfigError("component out of range");
        obs = Vec::Zero(d.G.rows());
        obs(comp) = 1.0;
    }
    const EnsembleTrajectory tr =
        trajectory_ensemble(d, n_traj, c.seed, dt, steps, obs,
                            stat == "mean_abs" ? EnsembleStat::MeanOfAbs : EnsembleStat::AbsOfMean, keep, c.workers);
    Output o;
    std::ostringstream os;
    os << "t," << stat << ",stderr";
    if (keep)
        for (int j = 0; j < n_traj; ++j) os << ",re_" << j << ",im_" << j;
    os << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << num(tr.times[k]) << ',' << num(tr.value[k]) << ',' << num(tr.stderr_[k]);
        if (keep)
            for (const auto& p : tr.per_traj) os << ',' << num(p[k].real()) << ',' << num(p[k].imag());
        os << '\n';
    }
    o.csv = os.str();
    o.meta = base_meta(c, "evolve");
    o.meta["stability_gap"] = stability_gap(d);
    o.meta["truncated"] = tr.truncated;
    if (tr.times.size() > 4) {
        o.meta["max_window_slope"] = max_window_slope(tr.times, tr.value);
        o.meta["transient_end"] = transient_end_time(tr.times, tr.value);
    }
    return o;
}

Output cmd_entropy(const RunConfig& c)
{
    const int n = sites_option(c);
    const DynamicalMatrix d = assemble(build_stencil(c.model), boundary(c), n);
    const double dt = opt<double>(c, "dt", 0.1);
    const double t_end = opt<double>(c, "t_end", 30.0);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    const std::vector<int> sites = int_list(c, "sites", {std::max(0, n / 2 - 1)});
    const EEEnsemble e = ee_ensemble(d, opt<int>(c, "n_states", 50), c.seed, sites, dt, steps,
                                     opt<double>(c, "squeeze_mean", 0.0), opt<double>(c, "squeeze_sd", 0.5), c.workers);
    Output o;
    std::ostringstream os;
    os << "t,S_A_mean,S_A_min,S_A_max\n";
    for (std::size_t k = 0; k < e.times.size(); ++k)
        os << num(e.times[k]) << ',' << num(e.mean[k]) << ',' << num(e.min[k]) << ',' << num(e.max[k]) << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "entropy");
    o.meta["stability_gap"] = stability_gap(d);
    return o;
}

Output cmd_response(const RunConfig& c)
{
    const int n = sites_option(c);
    const DynamicalMatrix d = assemble(build_stencil(c.model), boundary(c), n);
    const double omega = opt<double>(c, "omega", 0.0);
    std::optional<double> eta;
    if (c.raw.contains("eta")) eta = opt<double>(c, "eta", 0.0);
    if (c.raw.contains("kappa")) {
        if (eta) throw ConfigError("give either eta or kappa, not both");
        eta = opt<double>(c, "kappa", 0.0);
    }
    const int offset = opt<int>(c, "offset", 0);
    const ResponseMatrix r = susceptibility(d, omega, eta);
    const RMat map = species_map(r.chi, d.block(), offset);
    Output o;
    std::ostringstream os;
    os << "l,m,abs_chi\n";
    for (Eigen::Index l = 0; l < map.rows(); ++l)
        for (Eigen::Index m = 0; m < map.cols(); ++m) os << l + 1 << ',' << m + 1 << ',' << num(map(l, m)) << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "response");
    o.meta["omega"] = omega;
    o.meta["eta"] = r.eta;
    o.meta["kappa"] = c.raw.contains("kappa") ? json(r.eta) : json(nullptr);
    o.meta["gain"] = end_to_end_gain(r, d.block());
    o.meta["band_ratio"] = band_ratio(map, opt<int>(c, "band", 3));
    o.meta["chi_norm"] = norm2(r.chi);
    o.meta["matrix_hash"] = hex(matrix_hash(d.G));
    return o;
}

Output cmd_krein(const RunConfig& c)
{
    const int n = sites_option(c);
    const DynamicalMatrix d = assemble(build_stencil(c.model), boundary(c), n);
    json km;
    const auto vals = signed_spectrum(d, false, opt<double>(c, "degeneracy_tol", 0.0), &km);
    Output o;
    std::ostringstream os;
    os << "index,re,im,krein_sign\n";
    for (std::size_t i = 0; i < vals.size(); ++i)
        os << i << ',' << num(vals[i].value.real()) << ',' << num(vals[i].value.imag()) << ',' << vals[i].sign << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "krein");
    o.meta.update(km);
    const ConditionInfo ci = condition_number(d);
    o.meta["condition_number"] = std::isfinite(ci.K) ? json(ci.K) : json("inf");
    o.meta["ill_conditioned"] = ci.ill_conditioned;
    o.meta["stability_gap"] = stability_gap(d);
    return o;
}

Output cmd_classify(const RunConfig& c)
{
    const std::vector<int> sizes = int_list(c, "sizes", {10, 20, 30, 40});
    const double tol = opt<double>(c, "tol", 1e-6);
    const int res = opt<int>(c, "sibc_resolution", 41);
    const CouplingStencil st = build_stencil(c.model);
    std::vector<std::pair<int, double>> gaps(sizes.size());
    parallel_for(sizes.size(), c.workers, [&](std::size_t i) {
        gaps[i] = {sizes[i], stability_gap(assemble(st, BC::OBC, sizes[i]))};
    });
    const SibcGap sg = sibc_stability_gap(st, bulk_bounding_box(st), res, res, c.workers);
    const Classification cl = classify(gaps, sg.gap, tol);
    Output o;
    std::ostringstream os;
    os << "N,obc_gap\n";
    for (const auto& [n, g] : gaps) os << n << ',' << num(g) << '\n';
    o.csv = os.str();
    o.meta = base_meta(c, "classify");
    o.meta["class"] = to_string(cl.cls);
    o.meta["sibc_gap"] = sg.gap;
    o.meta["bulk_gap"] = sg.bulk_gap;
    o.meta["extrapolated_obc_gap"] = cl.extrapolated;
    o.meta["plateau"] = cl.plateau;
    o.meta["disagreement"] = cl.disagreement;
    o.meta["discontinuity"] = cl.discontinuity;
    o.meta["largest_unstable_N"] = cl.largest_unstable_N;
    o.meta["note"] = cl.note;
    if (cl.cls == StabilityClass::Inconclusive) o.exit_code = kInconclusive;
    return o;
}

}  // namespace

const std::vector<std::string> kCommands = {"spectrum", "gap-sweep", "pseudospectrum", "sibc",    "evolve",
                                            "entropy",  "response",  "krein",          "classify"};

ModelSpec parse_model(const json& j)
{
    if (!j.contains("model") || !j.at("model").is_string()) throw ConfigError("config needs a model name");
    const std::string name = j.at("model").get<std::string>();
    const auto it = param_names().find(name);
    if (it == param_names().end()) throw ConfigError("unsupported model " + name);
    const json p = j.value("params", json::object());
    if (!p.is_object()) throw ConfigError("params must be an object");
    for (const auto& [k, v] : p.items())
        if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
            throw ConfigError("unknown parameter " + k + " for " + name);
    if (name == "coupled_hn") {
        CoupledHN m;
        m.j_a = get(p, "j_a", m.j_a);
        m.j_b = get(p, "j_b", m.j_b);
        m.w = get(p, "w", m.w);
        m.theta = get(p, "theta", m.theta);
        m.gamma_a = get(p, "gamma_a", m.gamma_a);
        m.gamma_b = get(p, "gamma_b", m.gamma_b);
        m.kappa_plus = get(p, "kappa_plus", m.kappa_plus);
        m.kappa_minus = get(p, "kappa_minus", m.kappa_minus);
        return m;
    }
    if (name == "koc") return KOC{get(p, "j", 0), get(p, "delta", 0), get(p, "omega", 0), get(p, "kappa", 0)};
    if (name == "ghc_trb") return GhcTrb{get(p, "omega", 0), get(p, "j", 0), get(p, "gamma", 0)};
    return BkcRealHop{get(p, "j", 0), get(p, "delta", 0), get(p, "g", 0)};
}

json model_to_json(const ModelSpec& m)
{
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CoupledHN>)
                return {{"model", "coupled_hn"},
                        {"params",
                         {{"j_a", p.j_a}, {"j_b", p.j_b}, {"w", p.w}, {"theta", p.theta}, {"gamma_a", p.gamma_a},
                          {"gamma_b", p.gamma_b}, {"kappa_plus", p.kappa_plus}, {"kappa_minus", p.kappa_minus}}}};
            else if constexpr (std::is_same_v<T, KOC>)
                return {{"model", "koc"},
                        {"params", {{"j", p.j}, {"delta", p.delta}, {"omega", p.omega}, {"kappa", p.kappa}}}};
            else if constexpr (std::is_same_v<T, GhcTrb>)
                return {{"model", "ghc_trb"}, {"params", {{"omega", p.omega}, {"j", p.j}, {"gamma", p.gamma}}}};
            else
                return {{"model", "bkc_real"}, {"params", {{"j", p.j}, {"delta", p.delta}, {"g", p.g}}}};
        },
        m);
}

void apply_set(json& j, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    std::string path = key;
    if (key.find('.') == std::string::npos && j.contains("model") && j.at("model").is_string()) {
        const auto it = param_names().find(j.at("model").get<std::string>());
        if (it != param_names().end() && std::find(it->second.begin(), it->second.end(), key) != it->second.end())
            path = "params." + key;
    }
    json* node = &j;
    std::stringstream ss(path);
    std::vector<std::string> parts;
    for (std::string tok; std::getline(ss, tok, '.');) parts.push_back(tok);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        json& next = (*node)[parts[i]];
        if (!next.is_object()) next = json::object();
        node = &next;
    }
    (*node)[parts.back()] = value;
}

RunConfig make_config(json j, const std::vector<std::string>& sets, std::uint64_t seed, int workers)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& s : sets) apply_set(j, s);
    RunConfig c;
    c.model = parse_model(j);
    if (const auto* hn = std::get_if<CoupledHN>(&c.model); hn && !coherent_dominates(*hn))
        std::cerr << "warning: coupled_hn outside the |J| >= Gamma regime\n";
    c.raw = std::move(j);
    c.seed = seed;
    c.workers = std::max(1, workers);
    return c;
}

json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path + " is not valid JSON");
    return j;
}

std::vector<double> parse_range(const std::string& s)
{
    std::vector<double> parts;
    std::stringstream ss(s);
    try {
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
        throw ConfigError("range must be start:stop:step");
    }
    if (parts.size() != 3) throw ConfigError("range must be start:stop:step");
    const double a = parts[0], b = parts[1], h = parts[2];
    if (h == 0 || (b - a) * h < 0 || !std::isfinite(a + b + h)) throw ConfigError("range is not monotone");
    const double count = std::floor((b - a) / h + 1e-9);
    if (!(count <= 1e6)) throw ConfigError("range has too many points");
    const auto n = static_cast<long>(count);
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(a + h * static_cast<double>(i));
    return out;
}

Output run_command(const std::string& command, const RunConfig& cfg)
{
    if (command == "spectrum") return cmd_spectrum(cfg);
    if (command == "gap-sweep") return cmd_gap_sweep(cfg);
    if (command == "pseudospectrum") return cmd_pseudospectrum(cfg);
    if (command == "sibc") return cmd_sibc(cfg);
    if (command == "evolve") return cmd_evolve(cfg);
    if (command == "entropy") return cmd_entropy(cfg);
    if (command == "response") return cmd_response(cfg);
    if (command == "krein") return cmd_krein(cfg);
    if (command == "classify") return cmd_classify(cfg);
    throw ConfigError("unknown command " + command);
}

std::uint64_t matrix_hash(const Eigen::MatrixXcd& m)
{
    // FNV-1a over the raw column-major doubles
    std::uint64_t h = 1469598103934665603ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(std::complex<double>);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Metastability analysis for quadratic bosonic chains"};
    app.require_subcommand(1);
    struct Args {
        std::string config, out;
        std::vector<std::string> sets;
        std::uint64_t seed = 0;
        int workers = 1;
    } args;
    for (const auto& name : kCommands) {
        CLI::App* sub = app.add_subcommand(name, "run " + name);
        sub->add_option("--config", args.config, "JSON config")->required();
        sub->add_option("--set", args.sets, "override key=value")->take_all();
        sub->add_option("--out", args.out, "output CSV (sidecar JSON next to it)");
        sub->add_option("--seed", args.seed, "random seed");
        sub->add_option("--workers", args.workers, "worker threads");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    std::string command;
    for (const auto* sub : app.get_subcommands()) command = sub->get_name();
    try {
        const RunConfig cfg = make_config(load_json_file(args.config), args.sets, args.seed, args.workers);
        const Output o = run_command(command, cfg);
        if (args.out.empty()) {
            std::cout << o.csv;
        } else {
            std::ofstream f(args.out, std::ios::binary);
            std::ofstream side(args.out + ".json", std::ios::binary);
            if (!f || !side) throw ConfigError("cannot write " + args.out);
            f << o.csv;
            side << o.meta.dump(2) << '\n';
        }
        if (o.exit_code == kInconclusive) std::cerr << "classification inconclusive\n";
        return o.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    }
}

}  // namespace qbl::cli
