// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <leff/bounds.hpp>
#include <leff/fermion.hpp>

using namespace leff;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ProblemParams params(double B, double Z, int N, int M) {
    ProblemParams p;
    p.B = B;
    p.Z = Z;
    p.N = N;
    p.M = M;
    return p;
}

GridSpec uniform(double L, int n, PfScheme s = PfScheme::Cutoff) {
    GridSpec g;
    g.half_width = L;
    g.points = n;
    g.scheme = s;
    return g;
}

// least-squares slope of y against x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    Eigen::MatrixXd A(x.size(), 2);
    Eigen::VectorXd b(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        A(i, 0) = x[i];
        A(i, 1) = 1.0;
        b(i) = y[i];
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (lo + hi);
        (f(m) < 0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

Outcome c1_alpha() {
    double worst_res = 0, worst_w = 0;
    std::vector<double> lx, ly, B;
    std::vector<double> dev;
    for (int i = 0; i < 50; ++i) {
        double b = std::pow(10.0, 1.0 + 13.0 * i / 49.0);
        double a = alpha(b), lb = std::log(b);
        worst_res = std::max(worst_res, std::fabs(a + std::log(a) - 0.5 * lb));
        // w e^w = sqrt(B) by plain bisection
        double w = bisect([&](double t) { return t + std::log(t) - 0.5 * lb; }, 1e-3, 0.5 * lb + 2.0);
        worst_w = std::max(worst_w, std::fabs(a - w) / a);
        double d = a - (0.5 * lb - std::log(lb) + std::numbers::ln2);
        B.push_back(b);
        dev.push_back(std::fabs(d));
        lx.push_back(std::log(std::log(lb) / lb));
        ly.push_back(std::log(std::fabs(d)));
    }
    double full = slope(lx, ly);
    // restrict to where the deviation actually decays
    size_t k = std::max_element(dev.begin(), dev.end()) - dev.begin();
    double tail = slope({lx.begin() + k, lx.end()}, {ly.begin() + k, ly.end()});
    double last = slope({lx.end() - 10, lx.end()}, {ly.end() - 10, ly.end()});
    bool ok = worst_res < 1e-12 && worst_w < 1e-11 && std::fabs(full - 1.0) <= 0.3;
    return {ok, fmt("max residual %.2e, max rel diff to bisection %.2e, fitted exponent %.3f over [1e1,1e14] "
                    "(%.3f past the deviation peak at B=%.3g, %.3f on the last decade); the next term log(log(B)/2)/(log(B)/2) "
                    "only approaches the reference rate logarithmically",
                    worst_res, worst_w, full, tail, B[k], last)};
}

Outcome c2_C37() {
    double c = constant_C37();
    return {std::fabs(c * c - 1.53) <= 0.02, fmt("C_37^2 = %.10f", c * c)};
}

Outcome c3_estWC() {
    int arg = -1;
    double best = -1;
    for (int m = 0; m <= 20; ++m) {
        double v = gamma_fn(m + 0.5) / (std::sqrt(2.0) * gamma_fn(m + 1.0));
        if (v > best) best = v, arg = m;
    }
    double ledger = build_ledger(params(1e4, 1.0, 1, 0))["C_estWC"];
    double want = std::sqrt(std::numbers::pi / 2);
    bool ok = arg == 0 && std::fabs(best - want) < 1e-10 && std::fabs(ledger - want) < 1e-10;
    return {ok, fmt("argmax m = %d, max = %.15f, ledger C_estWC = %.15f", arg, best, ledger)};
}

Outcome c4_mixing() {
    Basis b(2, 2);
    RealMatrix C = Ce_real(params(1.0, 1.0, 2, 2), 0, 1);
    double v = C(b.index.at({0, 2}), b.index.at({1, 1}));
    double want = 3.0 / (16.0 * std::sqrt(2.0));
    double hand = 3.0 / (4.0 * std::sqrt(2.0));
    return {std::fabs(v - want) <= 1e-6,
            fmt("quadrature %.12f vs stated 3/(16 sqrt2) = %.12f (diff %.2e); direct Gaussian integration gives "
                "3/(4 sqrt2) = %.12f (diff %.2e), a factor 4 above the stated value",
                v, want, std::fabs(v - want), hand, std::fabs(v - hand))};
}

Outcome c5_digamma() {
    double worst = 0;
    int count = 0;
    for (int N = 1; N <= 4; ++N)
        for (int M = 0; M <= 8; ++M) {
            auto p = params(1.0, 1.0, N, M);
            Basis b(N, M);
            RealMatrix A = averaged_Cn_real(p);
            for (const auto& r : orbit_decompose(b.tuples).representatives) {
                int i = b.index.at(r);
                worst = std::max(worst, std::fabs(A(i, i) - averaged_Cn_closed_form(r)));
                ++count;
            }
        }
    return {worst <= 1e-8, fmt("%d representatives, max |quadrature - closed form| = %.2e", count, worst)};
}

Outcome c6_delta() {
    bool ok = true;
    std::string d;
    auto p = params(std::exp(2.0), 1.0, 1, 0);
    double E = delta_exact_n1(p).eigenvalues.at(0);
    ok &= E == -2.0;
    double werr = 0;
    for (double B : {10.0, 1e4, 1e9})
        for (double Z : {0.5, 1.0, 2.0}) {
            auto q = params(B, Z, 1, 0);
            double a = alpha(B);
            werr = std::max(werr, std::fabs(delta_exact_n1(q).eigenvalues[0] + 2 * a * a * Z * Z) / (a * a * Z * Z));
            for (double z : {0.0, 0.3 / a, -1.1 / a})
                werr = std::max(werr, std::fabs(delta_exact_eigenfunction(q, z) - std::sqrt(2 * a * Z) * std::exp(-2 * a * Z * std::fabs(z))) /
                                          std::sqrt(2 * a * Z));
        }
    ok &= werr < 1e-13;
    std::vector<double> err;
    for (int n : {401, 801, 1601, 3201}) err.push_back(std::fabs(delta_grid_n1(p, uniform(15.0, n), 1).eigenvalues[0] + 2.0));
    double order = 1e9;
    for (size_t k = 1; k < err.size(); ++k) order = std::min(order, std::log2(err[k - 1] / err[k]));
    ok &= order >= 1.0;
    return {ok, fmt("E0(Z=1,B=e^2) = %.17g, closed-form mismatch %.1e, grid errors %.2e..%.2e, min observed order %.2f", E, werr,
                    err.front(), err.back(), order)};
}

Outcome c7_fourier() {
    const double g = euler_gamma();
    double worst = 0;
    std::string cs;
    for (int M = 0; M <= 3; ++M) {
        auto p = params(1.0, 1.0, 1, M);
        RealMatrix C = Cn_real(p);
        auto fitted = [&](int n) {
            double c = 0.0;
            for (double z : detail::log_grid(1e-4, 1e-1, n)) {
                RealMatrix e = FV_single_real(p, z) + (2.0 * std::log(z) + 2.0 * g) * RealMatrix::Identity(1, 1) - C;
                c = std::max(c, op_norm(e) / (z * z * std::fabs(std::log(z))));
            }
            return c;
        };
        double c1 = fitted(40), c2 = fitted(160);
        worst = std::max(worst, std::fabs(c2 - c1) / c1);
        cs += fmt(" M=%d c=%.4f/%.4f", M, c1, c2);
    }
    return {worst < 0.05, fmt("c at 40/160 samples:%s; max relative change %.2e", cs.c_str(), worst)};
}

Outcome c8_critical() {
    auto cc = critical_charge_n2();
    bool ok = cc.extrapolated >= 0.355 && cc.extrapolated <= 0.395;
    return {ok, fmt("Zc(L=%g,h=%.3f) = %.4f, Zc(2L,h) = %.4f, Zc(L,h/2) = %.4f, extrapolated %.4f", cc.half_widths[0], cc.spacings[0],
                    cc.values[0], cc.values[1], cc.values[2], cc.extrapolated)};
}

Outcome c9_odd() {
    auto odd = [](const ProblemParams& p, int n) {
        auto r = coulomb_grid_n1(p, uniform(60.0, n, PfScheme::CellAverage), {8});
        std::vector<double> out;
        for (size_t k = 0; k < r.eigenvalues.size() && out.size() < 2; ++k)
            if (is_odd(r.eigenvectors[k], 1e-6)) out.push_back(r.eigenvalues[k]);
        return out;
    };
    bool ok = true;
    std::string d;
    std::vector<double> e0;
    double tol = 0;
    for (double lb : {5.0, 10.0, 15.0}) {
        auto p = params(std::exp(lb), 1.0, 1, 0);
        auto a = odd(p, 3001), b = odd(p, 6001);
        if (a.size() < 2 || b.size() < 2) return {false, "fewer than two odd levels"};
        // first-order extrapolation in h
        double x0 = 2 * b[0] - a[0], x1 = 2 * b[1] - a[1];
        tol = std::max({tol, std::fabs(b[0] - a[0]), std::fabs(b[1] - a[1])});
        ok &= std::fabs(x0 + 0.5) <= 0.02 * 0.5 && std::fabs(x1 + 0.125) <= 0.02 * 0.125;
        e0.push_back(x0);
        e0.push_back(x1);
        d += fmt(" logB=%g: %.6f %.6f;", lb, x0, x1);
    }
    double drift = std::max({std::fabs(e0[2] - e0[0]), std::fabs(e0[4] - e0[0]), std::fabs(e0[3] - e0[1]), std::fabs(e0[5] - e0[1])});
    ok &= drift < tol;
    return {ok, fmt("extrapolated odd levels (Z=1):%s drift %.2e vs grid tolerance %.2e", d.c_str(), drift, tol)};
}

Outcome c10_combinatorics() {
    bool ok = true;
    for (int N = 1; N <= 6; ++N)
        for (int M = 0; M <= 12; ++M) ok &= static_cast<double>(enumerate_sigma(N, M).size()) == binomial(M + N - 1, N - 1);
    std::string first;
    for (int N = 1; N <= 6; ++N) {
        int f = -1;
        for (int M = 0; f < 0 && M <= N * (N - 1) / 2 + 1; ++M) {
            auto d = orbit_decompose(enumerate_sigma(N, M));
            if (std::count(d.class_flags.begin(), d.class_flags.end(), OrbitClass::Free)) f = M;
        }
        ok &= f == N * (N - 1) / 2 && min_M_with_free_orbit(N) == f;
        first += fmt(" %d", f);
    }
    auto d = orbit_decompose(enumerate_sigma(2, 2));
    ok &= d.representatives == std::vector<Tuple>{{2, 0}, {1, 1}} && d.class_flags[0] == OrbitClass::Free &&
          d.class_flags[1] == OrbitClass::NonTrivial && d.stabilizer_orders == std::vector<long>{1, 2};
    std::mt19937 rng(11);
    int checked = 0, bad = 0;
    std::vector<Tuple> reps = orbit_decompose(enumerate_sigma(4, 6)).representatives;
    for (int i = 0; i < 1000; ++i) {
        const Tuple& r = reps[i % reps.size()];
        Perm a = identity_perm(4), b = identity_perm(4);
        std::shuffle(a.begin(), a.end(), rng);
        std::shuffle(b.begin(), b.end(), rng);
        auto t = coset_table(r);
        bad += rho_homomorphism(t, compose(a, b)) != compose(rho_homomorphism(t, a), rho_homomorphism(t, b));
        ++checked;
    }
    ok &= bad == 0;
    return {ok, fmt("counts exhaustive for N<=6, M<=12; first free orbit at M =%s; (2,2) orbits {(2,0) free, (1,1) stab 2}; "
                    "rho law %d/%d pairs",
                    first.c_str(), checked - bad, checked)};
}

Outcome c11_resolvent() {
    std::vector<double> nd, nc;
    std::string d;
    for (double B : {1e4, 1e6, 1e8, 1e10}) {
        auto p = params(B, 1.0, 1, 0);
        auto ed = compare_models(Model::Eff, Model::Delta, p);
        auto ec = compare_models(Model::Eff, Model::Coulomb, p);
        const double a = ed.alpha;
        nd.push_back(ed.distance * ed.d_xi * ed.d_xi / a);
        nc.push_back(ec.distance * ec.d_xi * ec.d_xi * std::pow(B, 0.25) / std::pow(a, 1.5));
        d += fmt(" B=%g: %.4f %.5f;", B, nd.back(), nc.back());
    }
    auto ratio = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()); };
    double rd = ratio(nd), rc = ratio(nc);
    return {rd <= 3.0 && rc <= 3.0, fmt("normalized eff-delta / eff-C distances:%s max/min ratios %.2f (eff-delta), %.2f (eff-C); "
                                        "the eff-C sequence rises then falls, so no single power of B fits it",
                                        d.c_str(), rd, rc)};
}

Outcome c12_ledger() {
    const double pi = std::numbers::pi, l2 = std::numbers::ln2, g = euler_gamma();
    auto same = [](double a, double b) { return std::fabs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(b); };
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uz(0.1, 5.0);
    std::uniform_int_distribution<int> un(1, 4), um(0, 6);
    int exact = 0, nonpos = 0, roundtrip = 0;
    double worst_eps = 0;
    for (int t = 0; t < 20; ++t) {
        const double Z = uz(rng);
        const int N = un(rng), M = um(rng);
        auto L = build_ledger(params(1e6, Z, N, M));
        const double b14 = 16 * Z * Z * N * (M + N + 2);
        const double c0sq = (32 * Z * Z * N + 8 * N * (N - 1) * (N - 1)) * (M + N + 2);
        exact += same(L["B_14"], b14) && same(L["c0"], std::sqrt(c0sq)) && same(L["C_15"], std::sqrt(c0sq) + c0sq / std::sqrt(b14)) &&
                 same(L["C_constW"], 2 * std::pow(pi, 1.5) * std::pow(N, 1.5) * (Z * Z + (N - 1) * (N - 1) / 4.0)) &&
                 same(L["C_estWC"], std::sqrt(pi / 2)) && same(L["C_refPf1"], std::sqrt(pi * pi / 2 + 2 * l2 * l2) + g) &&
                 same(L["nu_delta"], 0.5 + 4 * N * Z * Z);
        double e = L["eps_eff"];
        worst_eps = std::max(worst_eps, std::fabs(Z * L["C_37"] * L["C_V11"] * e * (std::fabs(std::log(e)) + 2.0) - 0.25));
        for (const auto& x : L.entries) {
            bool pos = x.available && (x.value > 0.0 || (x.log_value && std::isfinite(*x.log_value)));
            if (x.name == "mu_eff") {
                double want = -(alpha(1e6) * alpha(1e6) / 2) * (N / (2 * e * e) + 1);
                if (!(x.value < 0.0 && std::fabs(x.value - want) <= 1e-14 * std::fabs(want))) ++nonpos;
            } else if (!pos) {
                ++nonpos;
            }
        }
        auto back = ledger_from_json(nlohmann::json::parse(to_json(L).dump()));
        bool rt = back.entries.size() == L.entries.size();
        for (size_t i = 0; rt && i < L.entries.size(); ++i) rt = back.entries[i] == L.entries[i];
        roundtrip += rt;
    }
    bool ok = exact == 20 && worst_eps < 1e-10 && nonpos == 0 && roundtrip == 20;
    return {ok, fmt("closed forms exact on %d/20 triples, max eps_eff residual %.1e, non-positive fields %d (mu_eff is negative by its "
                    "defining formula -(alpha^2/2)(N/(2 eps^2)+1) and is checked against it), JSON round trips %d/20",
                    exact, worst_eps, nonpos, roundtrip)};
}

Outcome c13_fermion() {
    auto p = params(std::exp(2.0), 1.0, 2, 2);
    auto fd = decompose_U_M(p);
    auto s = fermionic_delta_spectrum(p, default_grid_n2(1.0, 201), 1);
    bool ok = fd.blocks.size() == 2 && s.size() == 2 && s[0].block.space == BlockSpace::Unrestricted &&
              s[1].block.space == BlockSpace::Antisymmetric;
    if (!ok) return {false, "unexpected block structure"};
    double eu = s[0].spectrum.eigenvalues.at(0), ea = s[1].spectrum.eigenvalues.at(0);
    ok &= eu < ea;
    ok &= fd.delta_mixing == std::vector<std::vector<bool>>{{true, false}, {false, true}};
    ok &= fd.mixing[0][1] && fd.mixing[1][0];
    return {ok, fmt("E0 unrestricted (2,0) = %.5f, antisymmetric (1,1) = %.5f; delta mixing identity: %s; Coulomb mixing (2,0)-(1,1): %s", eu,
                    ea, fd.delta_mixing[0][1] ? "no" : "yes", fd.mixing[0][1] ? "true" : "false")};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        Outcome (*run)();
    };
    const Criterion all[] = {
        {1, "alpha solver", 1, c1_alpha},
        {2, "C_37^2", 1, c2_C37},
        {3, "C_estWC", 1, c3_estWC},
        {4, "mixing element", 10, c4_mixing},
        {5, "digamma closed form", 60, c5_digamma},
        {6, "delta model N=1", 30, c6_delta},
        {7, "Fourier asymptotics", 60, c7_fourier},
        {8, "N=2 critical charge", 600, c8_critical},
        {9, "Coulomb odd sector", 300, c9_odd},
        {10, "combinatorics", 10, c10_combinatorics},
        {11, "resolvent trends", 900, c11_resolvent},
        {12, "constants ledger", 30, c12_ledger},
        {13, "fermionic delta model", 600, c13_fermion},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = o.pass && dt < c.limit_s;
        failed += !pass;
        std::printf("%s criterion %2d (%s) [%.2f s / %.0f s]: %s\n", pass ? "PASS" : "FAIL", c.id, c.name, dt, c.limit_s, o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(all)) - failed, std::size(all));
    return failed ? 1 : 0;
}
