#pragma once

#include <algorithm>
#include <bit>
#include <optional>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "error.hpp"
#include "json.hpp"
#include "landau.hpp"
#include "potentials.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"

namespace leff {

enum class Model { Delta, Coulomb, Eff };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::Delta: return "Delta";
        case Model::Coulomb: return "Coulomb";
        case Model::Eff: return "Eff";
    }
    return "?";
}

// Cutoff: 1/|z| kept outside pf_cutoff, 2 log(eps) delta lumped on the node at 0.
// CellAverage: exact cell integrals of Pf, i.e. the same construction with eps = h/2.
enum class PfScheme { Cutoff, CellAverage };

struct GridSpec {
    double half_width = 1.0;
    int points = 4001;
    double pf_cutoff = 0.0;
    PfScheme scheme = PfScheme::Cutoff;
    // graded mesh: spacing h_min at z = 0 growing geometrically up to h()
    double h_min = 0.0;
    double growth = 1.05;

    bool graded() const { return h_min > 0.0 && h_min < h(); }
    double h() const { return 2.0 * half_width / (points - 1); }
    double z(int i) const { return -half_width + i * h(); }
    int center() const { return (points - 1) / 2; }
    int unknowns() const { return graded() ? static_cast<int>(nodes().size()) - 2 : points - 2; }
    double eps() const { return scheme == PfScheme::CellAverage ? 0.5 * (graded() ? h_min : h()) : pf_cutoff; }

    // all nodes including the walls, symmetric about 0
    std::vector<double> nodes() const {
        std::vector<double> z;
        if (!graded()) {
            for (int i = 0; i < points; ++i) z.push_back(this->z(i));
            z[center()] = 0.0;
            return z;
        }
        std::vector<double> pos{0.0};
        double step = h_min;
        while (pos.back() + step < half_width) {
            pos.push_back(pos.back() + step);
            step = std::min(step * growth, h());
        }
        if (half_width - pos.back() < 0.5 * step && pos.size() > 1) pos.pop_back();
        pos.push_back(half_width);
        for (size_t i = pos.size() - 1; i > 0; --i) z.push_back(-pos[i]);
        z.insert(z.end(), pos.begin(), pos.end());
        return z;
    }

    void validate(bool uses_pf = false) const {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("grid half_width must be positive");
        if (points < 5 || points % 2 == 0) throw ConfigError("grid points must be odd and at least 5");
        if (h_min < 0.0 || (h_min > 0.0 && !(growth > 1.0))) throw ConfigError("graded grid needs h_min > 0 and growth > 1");
        if (uses_pf && scheme == PfScheme::Cutoff && pf_cutoff < 2.0 * h() * (1.0 - 1e-12))
            throw ConfigError("pf_cutoff must be at least 2h");
    }
};

// L = 30/(2 alpha Z): several decay lengths of the delta-model ground state.
inline GridSpec default_grid_n1(const ProblemParams& p, int points = 4001) {
    double a = alpha(p.B);
    double zz = p.Z > 0 ? p.Z : 1.0;
    GridSpec g;
    g.half_width = 30.0 / (2.0 * a * zz);
    g.points = points;
    g.pf_cutoff = 8.0 * g.h();
    return g;
}

struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;  // grid values, normalized in the grid inner product
    std::vector<double> residual_norms;
    Model model = Model::Delta;
    ProblemParams params;
    GridSpec grid;
    int dims = 1;
    nlohmann::json meta = nlohmann::json::object();
};

// ---- one-dimensional assembly --------------------------------------------

// Symmetrized finite-volume operator W^{-1/2} K W^{-1/2}; w are the dual cell widths.
struct Tridiag {
    std::vector<double> d, e;  // diagonal (n) and off-diagonal (n-1)
    std::vector<double> w, z;  // cell widths and node positions of the unknowns
    int center = 0;

    int size() const { return static_cast<int>(d.size()); }

    std::vector<double> apply(const std::vector<double>& x) const {
        const int n = size();
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            double v = d[i] * x[i];
            if (i > 0) v += e[i - 1] * x[i - 1];
            if (i + 1 < n) v += e[i] * x[i + 1];
            y[i] = v;
        }
        return y;
    }

    // (T - s) x = b by the Thomas algorithm (no pivoting; callers keep s off the spectrum)
    template <class R = double>
    std::vector<R> solve_shifted(const std::vector<double>& b, double s) const {
        const int n = size();
        std::vector<R> c(n), x(n);
        R den = R(d[0]) - R(s);
        c[0] = n > 1 ? R(e[0]) / den : R(0);
        x[0] = R(b[0]) / den;
        for (int i = 1; i < n; ++i) {
            den = R(d[i]) - R(s) - R(e[i - 1]) * c[i - 1];
            if (i + 1 < n) c[i] = R(e[i]) / den;
            x[i] = (R(b[i]) - R(e[i - 1]) * x[i - 1]) / den;
        }
        for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
        return x;
    }
};

inline Tridiag kinetic_1d(const GridSpec& g) {
    const auto x = g.nodes();
    const int n = static_cast<int>(x.size()) - 2;
    Tridiag t;
    t.d.resize(n);
    t.e.resize(n - 1);
    t.w.resize(n);
    t.z.resize(n);
    for (int k = 0; k < n; ++k) {
        double hl = x[k + 1] - x[k], hr = x[k + 2] - x[k + 1];
        t.w[k] = 0.5 * (hl + hr);
        t.z[k] = x[k + 1];
        t.d[k] = 0.5 * (1.0 / hl + 1.0 / hr);
    }
    for (int k = 0; k + 1 < n; ++k) t.e[k] = -0.5 / (x[k + 2] - x[k + 1]) / std::sqrt(t.w[k] * t.w[k + 1]);
    for (int k = 0; k < n; ++k) t.d[k] /= t.w[k];
    t.center = (n - 1) / 2;
    return t;
}

// index into the interior unknowns of the node at z = 0
inline int center_unknown(const GridSpec& g) { return g.graded() ? (g.unknowns() - 1) / 2 : g.center() - 1; }

inline void add_delta_1d(Tridiag& t, const GridSpec&, double coef) { t.d[t.center] += coef / t.w[t.center]; }

// integral of 1/|z| over [a, b] with |z| > eps
inline double cell_inv_abs(double a, double b, double eps) {
    auto part = [](double lo, double hi) { return hi > lo ? std::log(hi / lo) : 0.0; };
    double v = 0.0;
    if (b > 0.0) v += part(std::max(a, eps), b);
    if (a < 0.0) v += part(std::max(-b, eps), -a);
    return v;
}

// cell [lo, hi] of unknown k in the dual mesh
inline std::pair<double, double> dual_cell(const Tridiag& t, int k) {
    const int n = t.size();
    double lo = t.z[k] - 0.5 * (k > 0 ? t.z[k] - t.z[k - 1] : 2.0 * t.w[k] - (t.z[k + 1] - t.z[k]));
    double hi = t.z[k] + 0.5 * (k + 1 < n ? t.z[k + 1] - t.z[k] : 2.0 * t.w[k] - (t.z[k] - t.z[k - 1]));
    if (k == t.center) lo = -(hi = 0.5 * t.w[k]);
    return {lo, hi};
}

inline void add_pf_1d(Tridiag& t, const GridSpec& g, double A) {
    const double eps = g.scheme == PfScheme::CellAverage ? 0.5 * t.w[t.center] : g.pf_cutoff;
    for (int k = 0; k < t.size(); ++k) {
        auto [lo, hi] = dual_cell(t, k);
        t.d[k] += A * cell_inv_abs(lo, hi, eps) / t.w[k];
    }
    t.d[t.center] += 2.0 * A * std::log(eps) / t.w[t.center];
}

using CellIntegral = std::function<double(double, double)>;

inline void add_cells_1d(Tridiag& t, const GridSpec&, const CellIntegral& f) {
    for (int k = 0; k < t.size(); ++k) {
        auto [lo, hi] = dual_cell(t, k);
        t.d[k] += f(lo, hi) / t.w[k];
    }
}

struct EigenPairs {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // unit Euclidean columns
};

// count < 0: all eigenvalues <= emax
inline EigenPairs tridiag_eigs(const Tridiag& t, int count, double emax = 0.0) {
    const lapack_int n = t.size();
    std::vector<double> d = t.d, e = t.e;
    e.push_back(0.0);
    lapack_int m = 0;
    std::vector<double> w(n);
    std::vector<lapack_int> isuppz(2 * n);
    char range = count < 0 ? 'V' : 'I';
    lapack_int il = 1, iu = std::max<lapack_int>(1, std::min<lapack_int>(count, n));
    double vl = -std::numeric_limits<double>::max(), vu = emax;
    if (count < 0) {
        double lo = 0.0;
        for (int i = 0; i < n; ++i) lo = std::min(lo, t.d[i] - std::fabs(i > 0 ? t.e[i - 1] : 0.0) - std::fabs(i + 1 < n ? t.e[i] : 0.0));
        vl = lo - 1.0;
    }
    Eigen::MatrixXd Z(n, std::max<lapack_int>(1, count < 0 ? n : iu));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), vl, vu, il, iu, 0.0, &m, w.data(),
                                     Z.data(), n, isuppz.data());
    if (info != 0) throw AccuracyError("tridiagonal eigensolver failed (dstevr info " + std::to_string(info) + ")");
    EigenPairs r;
    r.values.assign(w.begin(), w.begin() + m);
    r.vectors = Z.leftCols(m);
    return r;
}

namespace detail {

using ld = long double;

inline std::vector<ld> apply_ld(const Tridiag& t, const std::vector<ld>& x) {
    const int n = t.size();
    std::vector<ld> y(n);
    for (int i = 0; i < n; ++i) {
        ld v = ld(t.d[i]) * x[i];
        if (i > 0) v += ld(t.e[i - 1]) * x[i - 1];
        if (i + 1 < n) v += ld(t.e[i]) * x[i + 1];
        y[i] = v;
    }
    return y;
}

// One inverse-iteration step in extended precision. On strongly graded meshes
// ||T|| ~ 1/h_min^2 and the MRRR vectors carry residuals of order eps ||T||;
// the refined pair brings the residual back to the target.
inline double refine_pair(const Tridiag& t, std::vector<double>& v, double E) {
    const int n = t.size();
    std::vector<ld> b(v.begin(), v.end()), c(n), x(n);
    const ld s = ld(E) * (1 + 1e-14L) + (E == 0.0 ? 1e-300L : 0.0L);
    ld den = ld(t.d[0]) - s;
    c[0] = n > 1 ? ld(t.e[0]) / den : 0.0L;
    x[0] = b[0] / den;
    for (int i = 1; i < n; ++i) {
        den = ld(t.d[i]) - s - ld(t.e[i - 1]) * c[i - 1];
        if (i + 1 < n) c[i] = ld(t.e[i]) / den;
        x[i] = (b[i] - ld(t.e[i - 1]) * x[i - 1]) / den;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    ld nrm = 0.0L, dot = 0.0L;
    for (int i = 0; i < n; ++i) {
        nrm += x[i] * x[i];
        dot += x[i] * b[i];
    }
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0L) || !std::isfinite(static_cast<double>(nrm))) return E;
    if (dot < 0) nrm = -nrm;
    for (auto& xi : x) xi /= nrm;
    auto Tx = apply_ld(t, x);
    ld rq = 0.0L;
    for (int i = 0; i < n; ++i) rq += x[i] * Tx[i];
    for (int i = 0; i < n; ++i) v[i] = static_cast<double>(x[i]);
    return static_cast<double>(rq);
}

inline double residual_ld(const Tridiag& t, const std::vector<double>& v, double E) {
    std::vector<ld> x(v.begin(), v.end());
    auto Tx = apply_ld(t, x);
    ld r = 0.0L;
    for (size_t i = 0; i < v.size(); ++i) r += (Tx[i] - ld(E) * x[i]) * (Tx[i] - ld(E) * x[i]);
    return static_cast<double>(std::sqrt(r));
}

}  // namespace detail

inline SpectrumResult pack_1d(const Tridiag& t, const EigenPairs& ep, const GridSpec& g, Model model, const ProblemParams& p) {
    SpectrumResult r;
    r.model = model;
    r.params = p;
    r.grid = g;
    r.dims = 1;
    for (size_t k = 0; k < ep.values.size(); ++k) {
        std::vector<double> v(ep.vectors.rows());
        for (int i = 0; i < ep.vectors.rows(); ++i) v[i] = ep.vectors(i, k);
        double E = ep.values[k];
        double res = detail::residual_ld(t, v, E);
        if (res > 1e-9 * (1.0 + std::fabs(E))) {
            std::vector<double> u = v;
            double Eu = detail::refine_pair(t, u, E);
            double ru = detail::residual_ld(t, u, Eu);
            if (ru < res) {
                v = std::move(u);
                E = Eu;
                res = ru;
            }
        }
        r.residual_norms.push_back(res);
        for (size_t i = 0; i < v.size(); ++i) v[i] /= std::sqrt(t.w[i]);
        r.eigenvalues.push_back(E);
        r.eigenvectors.push_back(std::move(v));
    }
    return r;
}

// ---- delta model, N = 1 ---------------------------------------------------

inline double delta_exact_eigenfunction(const ProblemParams& p, double z) {
    const double k = 2.0 * alpha(p.B) * p.Z;
    return std::sqrt(k) * std::exp(-k * std::fabs(z));
}

inline SpectrumResult delta_exact_n1(const ProblemParams& p) {
    p.validate();
    if (p.N != 1) throw DomainError("delta_exact_n1: N must be 1");
    SpectrumResult r;
    r.model = Model::Delta;
    r.params = p;
    r.meta["continuum_threshold"] = 0.0;
    if (p.Z <= 0.0) return r;  // no bound state
    const double a = alpha(p.B);
    r.grid = default_grid_n1(p);
    r.eigenvalues.push_back(-2.0 * a * a * p.Z * p.Z);
    const auto x = r.grid.nodes();
    std::vector<double> v;
    for (size_t k = 1; k + 1 < x.size(); ++k) v.push_back(delta_exact_eigenfunction(p, x[k]));
    r.eigenvectors.push_back(v);
    r.residual_norms.push_back(0.0);
    r.meta["exact"] = true;
    return r;
}

struct ReducedForm {
    double scale;                    // alpha^2
    DistributionPotential1D reduced; // couplings -2Z per nucleus plane, +2 per pair plane
};

// h_delta is unitarily equivalent to alpha^2 (-Delta/2 + 2 v_delta).
inline ReducedForm scaling_equivalent_form(const ProblemParams& p) {
    p.validate();
    const double a = alpha(p.B);
    auto v = assemble_vdelta(p);
    for (auto& pl : v.planes) pl.delta_coeff /= a;
    return {a * a, v};
}

// ---- generic 1D grid solve -----------------------------------------------

struct SolveRange {
    int count = 6;        // lowest eigenpairs; ignored when all_below is set
    bool all_below = false;
    double emax = 0.0;
};

inline Tridiag assemble_1d(const DistributionPotential1D& v, const GridSpec& g, const CellIntegral* smooth) {
    if (v.N != 1 || v.dim != 1) throw ConfigError("grid_solve_1d supports one coordinate with a scalar channel (N = 1)");
    bool uses_pf = false;
    for (const auto& pl : v.planes)
        if (pl.pf_coeff.size() && pl.pf_coeff.cwiseAbs().maxCoeff() > 0.0) uses_pf = true;
    g.validate(uses_pf);
    Tridiag t = kinetic_1d(g);
    for (const auto& pl : v.planes) {
        if (pl.kind != PlaneKind::Nucleus) throw ConfigError("grid_solve_1d: pair planes need N >= 2");
        double A = pl.pf_coeff.size() ? pl.pf_coeff(0, 0) : 0.0;
        double Bc = pl.delta_coeff.size() ? pl.delta_coeff(0, 0) : 0.0;
        if (A != 0.0) add_pf_1d(t, g, A);
        if (Bc != 0.0) add_delta_1d(t, g, Bc);
    }
    if (smooth) add_cells_1d(t, g, *smooth);
    for (double x : t.d)
        if (!std::isfinite(x)) throw AccuracyError("non-finite entry in assembled operator");
    return t;
}

inline SpectrumResult grid_solve_1d(const DistributionPotential1D& v, const GridSpec& g, SolveRange range = {},
                                    const CellIntegral* smooth = nullptr, Model model = Model::Coulomb,
                                    const ProblemParams& p = {}) {
    Tridiag t = assemble_1d(v, g, smooth);
    auto ep = tridiag_eigs(t, range.all_below ? -1 : range.count, range.emax);
    auto r = pack_1d(t, ep, g, model, p);
    for (size_t k = 0; k < r.eigenvalues.size(); ++k)
        if (r.residual_norms[k] > 1e-6 * (1.0 + std::fabs(r.eigenvalues[k])))
            throw AccuracyError("eigenpair residual above 1e-6 (1 + |E|)");
    return r;
}

// E(eps) = E* + a eps log eps + b eps fitted through three cutoffs
inline double richardson_eps(const std::vector<double>& eps, const std::vector<double>& E) {
    Eigen::Matrix3d A;
    Eigen::Vector3d y;
    for (int i = 0; i < 3; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = eps[i] * std::log(eps[i]);
        A(i, 2) = eps[i];
        y(i) = E[i];
    }
    return A.colPivHouseholderQr().solve(y)(0);
}

// Cutoff scheme at eps0, eps0/2, eps0/4 with extrapolation of each eigenvalue.
inline SpectrumResult grid_solve_1d_extrapolated(const DistributionPotential1D& v, const GridSpec& g, int count,
                                                 const CellIntegral* smooth = nullptr, Model model = Model::Coulomb,
                                                 const ProblemParams& p = {}) {
    if (g.scheme != PfScheme::Cutoff) throw ConfigError("extrapolation in eps needs the cutoff scheme");
    std::vector<double> eps{g.pf_cutoff, g.pf_cutoff / 2, g.pf_cutoff / 4};
    std::vector<SpectrumResult> runs;
    for (double e : eps) {
        GridSpec gi = g;
        gi.pf_cutoff = e;
        runs.push_back(grid_solve_1d(v, gi, {count}, smooth, model, p));
    }
    SpectrumResult r = runs.back();
    nlohmann::json seq = nlohmann::json::array();
    for (size_t k = 0; k < r.eigenvalues.size(); ++k) {
        std::vector<double> E{runs[0].eigenvalues[k], runs[1].eigenvalues[k], runs[2].eigenvalues[k]};
        r.eigenvalues[k] = richardson_eps(eps, E);
        seq.push_back(E);
    }
    r.grid = g;
    r.meta["extrapolation"] = {{"eps", eps}, {"eigenvalues", seq}};
    return r;
}

// Derivative jump of a grid eigenfunction across (-eps, eps) versus the
// boundary relation [u'] = 4 A log(eps) u(0) + 2 B u(0) of the Pf + delta form.
struct JumpCheck {
    double measured;
    double predicted;
    double u0;
};

inline JumpCheck jump_condition(const std::vector<double>& u, const GridSpec& g, double eps, double A, double Bc) {
    if (g.graded()) throw ConfigError("jump_condition expects a uniform grid");
    const double h = g.h();
    const int c = center_unknown(g);
    const int k = static_cast<int>(std::lround(eps / h));
    double up = (u[c + k + 1] - u[c + k]) / h;
    double um = (u[c - k] - u[c - k - 1]) / h;
    double u0 = u[c];
    return {up - um, (4.0 * A * std::log(k * h) + 2.0 * Bc) * u0, u0};
}

inline bool is_odd(const std::vector<double>& u, double tol = 1e-8) {
    const int n = static_cast<int>(u.size());
    double nrm = 0.0, asym = 0.0;
    for (int i = 0; i < n; ++i) {
        nrm += u[i] * u[i];
        asym += std::pow(u[i] + u[n - 1 - i], 2);
    }
    return asym <= tol * tol * nrm;
}

// ---- model-specific N = 1 solvers -----------------------------------------

inline SpectrumResult delta_grid_n1(const ProblemParams& p, const GridSpec& g, int count = 4) {
    auto r = grid_solve_1d(assemble_vdelta(p), g, {count}, nullptr, Model::Delta, p);
    return r;
}

inline SpectrumResult coulomb_grid_n1(const ProblemParams& p, const GridSpec& g, SolveRange range = {}) {
    return grid_solve_1d(assemble_vC(p), g, range, nullptr, Model::Coulomb, p);
}

inline CellIntegral eff_cells(const ProblemParams& p) {
    return [p](double a, double b) { return -p.Z * cell_integral_V_single(p, a, b)(0, 0); };
}

// <h_eff Phi, Phi> for Phi the delta-model ground state.
inline double eff_first_order(const ProblemParams& p) {
    const double a = alpha(p.B), k = 2.0 * a * p.Z;
    // sqrt(B) V(sqrt(B) z) = E_s[(2s/B + z^2)^{-1/2}]
    auto inner = [&](double s) {
        double r2 = 2.0 * s / p.B;
        auto f = [&](double z) { return 2.0 * k * std::exp(-2.0 * k * z) / std::sqrt(r2 + z * z); };
        double sc = std::sqrt(r2);
        return integrate(f, 0.0, sc, 1e-13) + integrate_to_inf(f, sc, 1e-13);
    };
    double pot = detail::checked(detail::radial_integral(inner, p.M), "first-order potential");
    return 0.5 * k * k - p.Z * pot;
}

inline SpectrumResult eff_solve_n1(const ProblemParams& p, const GridSpec& g, SolveRange range = {}) {
    p.validate();
    if (p.N != 1) throw DomainError("eff_solve_n1: N must be 1");
    g.validate(false);
    DistributionPotential1D none{1, 1, {}};
    CellIntegral cells = eff_cells(p);
    auto r = grid_solve_1d(none, g, range, &cells, Model::Eff, p);
    return r;
}

// ---- Lanczos ---------------------------------------------------------------

struct LanczosResult {
    std::vector<double> values;  // ascending Ritz values
    Eigen::MatrixXd vectors;     // matching Ritz vectors
    std::vector<double> residuals;
};

// Lanczos with full reorthogonalization on a symmetric operator.
template <class Op>
LanczosResult lanczos(Op apply, int n, int max_iter, unsigned seed = 7) {
    max_iter = std::min(max_iter, n);
    Eigen::MatrixXd V(n, max_iter + 1);
    std::vector<double> al, be;
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(gen);
    v.normalize();
    V.col(0) = v;
    int k = 0;
    for (; k < max_iter; ++k) {
        Eigen::VectorXd w = apply(V.col(k));
        double a = V.col(k).dot(w);
        al.push_back(a);
        for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
        double b = w.norm();
        be.push_back(b);
        if (b < 1e-14 * std::fabs(a) + 1e-300) {
            ++k;
            break;
        }
        V.col(k + 1) = w / b;
    }
    const int m = static_cast<int>(al.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = al[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = be[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    LanczosResult r;
    r.vectors = V.leftCols(m) * es.eigenvectors();
    for (int i = 0; i < m; ++i) {
        r.values.push_back(es.eigenvalues()(i));
        r.residuals.push_back(std::fabs(be[m - 1] * es.eigenvectors()(m - 1, i)));
    }
    return r;
}

// ---- resolvent distances ----------------------------------------------------

struct ResolventDistance {
    double value = 0.0;
    double truncation_bound = 0.0;  // bound on the neglected spectral tail
    int kept_a = 0, kept_b = 0;
};

// Norm of (H_a - xi)^{-1} - (H_b - xi)^{-1} from eigenpairs below emax.
inline ResolventDistance resolvent_distance_detailed(const SpectrumResult& a, const SpectrumResult& b, double xi, double emax) {
    if (a.eigenvectors.empty() || b.eigenvectors.empty()) throw DomainError("resolvent_distance: spectra without eigenvectors");
    const size_t n = a.eigenvectors[0].size();
    if (b.eigenvectors[0].size() != n) throw DomainError("resolvent_distance: spectra from different grids");
    if (a.dims != 1 || b.dims != 1) throw DomainError("resolvent_distance: one-dimensional spectra expected");
    const auto wts = kinetic_1d(a.grid).w;  // back to unit Euclidean vectors
    const double tol = 1e-9;
    for (double e : a.eigenvalues)
        if (std::fabs(e - xi) < 10 * tol * (1 + std::fabs(e))) throw IllConditionedError("xi is within tolerance of the first spectrum");
    for (double e : b.eigenvalues)
        if (std::fabs(e - xi) < 10 * tol * (1 + std::fabs(e))) throw IllConditionedError("xi is within tolerance of the second spectrum");
    auto collect = [&](const SpectrumResult& s, Eigen::MatrixXd& V, std::vector<double>& w) {
        std::vector<int> idx;
        for (size_t k = 0; k < s.eigenvalues.size(); ++k)
            if (s.eigenvalues[k] <= emax) idx.push_back(static_cast<int>(k));
        V.resize(n, idx.size());
        for (size_t c = 0; c < idx.size(); ++c) {
            for (size_t i = 0; i < n; ++i) V(i, c) = s.eigenvectors[idx[c]][i] * std::sqrt(wts[i]);
            w.push_back(1.0 / (s.eigenvalues[idx[c]] - xi));
        }
    };
    Eigen::MatrixXd Va, Vb;
    std::vector<double> wa, wb;
    collect(a, Va, wa);
    collect(b, Vb, wb);
    Eigen::MatrixXd W(n, Va.cols() + Vb.cols());
    W << Va, Vb;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, W.cols());
    Eigen::MatrixXd Pa = Q.transpose() * Va, Pb = Q.transpose() * Vb;
    Eigen::MatrixXd D = Pa * Eigen::Map<Eigen::VectorXd>(wa.data(), wa.size()).asDiagonal() * Pa.transpose() -
                        Pb * Eigen::Map<Eigen::VectorXd>(wb.data(), wb.size()).asDiagonal() * Pb.transpose();
    ResolventDistance r;
    r.value = D.size() ? op_norm(D) : 0.0;
    r.truncation_bound = emax > xi ? 2.0 / (emax - xi) : std::numeric_limits<double>::infinity();
    r.kept_a = static_cast<int>(wa.size());
    r.kept_b = static_cast<int>(wb.size());
    return r;
}

// Truncation at E_max = 10 |E_0| of the first spectrum.
inline double resolvent_distance(const SpectrumResult& a, const SpectrumResult& b, double xi) {
    if (a.eigenvalues.empty()) throw DomainError("resolvent_distance: empty spectrum");
    double emax = 10.0 * std::fabs(a.eigenvalues.front());
    return resolvent_distance_detailed(a, b, xi, emax).value;
}

// Same norm without truncation: Lanczos on the difference of exact tridiagonal resolvents.
inline double resolvent_distance_exact(const Tridiag& a, const Tridiag& b, double xi, int iters = 60) {
    const int n = a.size();
    auto op = [&](const Eigen::VectorXd& x) {
        std::vector<double> xv(x.data(), x.data() + n);
        // extended precision: the two resolvents agree to many digits at large B
        auto ya = a.solve_shifted<long double>(xv, xi), yb = b.solve_shifted<long double>(xv, xi);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y(i) = static_cast<double>(ya[i] - yb[i]);
        return y;
    };
    auto r = lanczos(op, n, iters);
    double m = 0.0;
    for (double v : r.values) m = std::max(m, std::fabs(v));
    return m;
}

// ---- N = 2 delta model on a square grid --------------------------------------

// Symmetry sector of the group {e, swap, parity, swap*parity}: characters of swap and parity.
struct Sector {
    int swap = +1;
    int parity = +1;
};

struct SectorBasis {
    int m = 0;                    // interior points per axis
    std::vector<int> slot;        // full index -> reduced index, -1 if excluded
    std::vector<double> coef;     // full index -> s(p)/sqrt(|orbit|)
    int size = 0;
};

inline SectorBasis sector_basis(int m, Sector s) {
    SectorBasis b;
    b.m = m;
    b.slot.assign(m * m, -1);
    b.coef.assign(m * m, 0.0);
    std::vector<int> rep_slot(m * m, -1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            int p = i * m + j;
            int imgs[4] = {p, j * m + i, (m - 1 - i) * m + (m - 1 - j), (m - 1 - j) * m + (m - 1 - i)};
            int chi[4] = {1, s.swap, s.parity, s.swap * s.parity};
            bool killed = false;
            int rep = *std::min_element(imgs, imgs + 4);
            int orbit = 0;
            {
                std::vector<int> u(imgs, imgs + 4);
                std::sort(u.begin(), u.end());
                orbit = static_cast<int>(std::unique(u.begin(), u.end()) - u.begin());
            }
            for (int g = 1; g < 4; ++g)
                if (imgs[g] == p && chi[g] == -1) killed = true;
            if (killed) continue;
            // sign of p relative to the representative: chi(g) with g.rep = p
            int sgn = 1;
            int ri = rep / m, rj = rep % m;
            int rimgs[4] = {rep, rj * m + ri, (m - 1 - ri) * m + (m - 1 - rj), (m - 1 - rj) * m + (m - 1 - ri)};
            for (int g = 0; g < 4; ++g)
                if (rimgs[g] == p) {
                    sgn = chi[g];
                    break;
                }
            if (rep_slot[rep] < 0) rep_slot[rep] = b.size++;
            b.slot[p] = rep_slot[rep];
            b.coef[p] = sgn / std::sqrt(static_cast<double>(orbit));
        }
    return b;
}

struct N2Couplings {
    double nucleus = -2.0;  // per nucleus line, already multiplied by Z
    double pair = 2.0;
};

// Reduced matrix of -Delta/2 + line deltas restricted to a symmetry sector.
inline Eigen::SparseMatrix<double> n2_sector_matrix(const GridSpec& g, const N2Couplings& c, const SectorBasis& sb, double shift = 0.0) {
    const int m = g.unknowns();
    const int mid = center_unknown(g);
    const double h = g.h();
    const double off = -0.5 / (h * h);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(sb.size) * 5);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            int p = i * m + j;
            int a = sb.slot[p];
            if (a < 0) continue;
            double diag = 2.0 / (h * h) - shift;
            if (i == mid) diag += c.nucleus / h;
            if (j == mid) diag += c.nucleus / h;
            if (i == j) diag += c.pair / h;
            trip.emplace_back(a, a, sb.coef[p] * sb.coef[p] * diag);
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (auto& q : nb) {
                if (q[0] < 0 || q[0] >= m || q[1] < 0 || q[1] >= m) continue;
                int qq = q[0] * m + q[1];
                int bq = sb.slot[qq];
                if (bq < 0) continue;
                trip.emplace_back(a, bq, sb.coef[p] * sb.coef[qq] * off);
            }
        }
    Eigen::SparseMatrix<double> H(sb.size, sb.size);
    H.setFromTriplets(trip.begin(), trip.end());
    H.makeCompressed();
    return H;
}

// Ground energy of the reduced one-electron problem -u''/2 + coef delta on the same 1D grid.
inline double n1_reduced_ground(const GridSpec& g, double coef) {
    Tridiag t = kinetic_1d(g);
    add_delta_1d(t, g, coef);
    return tridiag_eigs(t, 1).values.at(0);
}

struct N2Options {
    int count = 2;
    std::vector<Sector> sectors{{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
    bool pair_repulsion = true;
    int max_iter = 400;
    double tol = 1e-10;
};

struct SectorEigs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // full-grid, grid-normalized
    std::vector<double> residuals;
};

inline SectorEigs n2_sector_lowest(const GridSpec& g, const N2Couplings& c, Sector s, int count, double lower, int max_iter, double tol) {
    const int m = g.unknowns();
    SectorBasis sb = sector_basis(m, s);
    Eigen::SparseMatrix<double> H = n2_sector_matrix(g, c, sb);
    Eigen::SparseMatrix<double> S = n2_sector_matrix(g, c, sb, lower);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(S);
    if (llt.info() != Eigen::Success) throw AccuracyError("shifted N=2 operator is not positive definite");
    const int n = sb.size;
    auto op = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(llt.solve(x)); };
    // Lanczos on (H - lower)^{-1}; restart from the best Ritz vector until converged
    SectorEigs out;
    int iters = std::min(max_iter, n);
    for (int attempt = 0; attempt < 4; ++attempt) {
        auto lr = lanczos(op, n, iters, 7u + attempt);
        const int k = static_cast<int>(lr.values.size());
        out = {};
        bool ok = true;
        for (int t = 0; t < std::min(count, k); ++t) {
            int idx = k - 1 - t;
            double theta = lr.values[idx];
            double E = lower + 1.0 / theta;
            Eigen::VectorXd y = lr.vectors.col(idx);
            y.normalize();
            Eigen::VectorXd r = H * y - E * y;
            double res = r.norm();
            if (res > tol * (1.0 + std::fabs(E)) * 1e3) ok = false;
            std::vector<double> full(static_cast<size_t>(m) * m, 0.0);
            for (int p = 0; p < m * m; ++p)
                if (sb.slot[p] >= 0) full[p] = sb.coef[p] * y(sb.slot[p]);
            const double sh = 1.0 / g.h();  // 2D grid normalization
            for (auto& v : full) v *= sh;
            out.values.push_back(E);
            out.vectors.push_back(std::move(full));
            out.residuals.push_back(res);
        }
        if (ok) return out;
        iters = std::min(n, iters * 2);
    }
    throw AccuracyError("N=2 Lanczos did not reach the residual tolerance");
}

// Reduced N = 2 delta model -Delta/2 - 2Z(delta(z1) + delta(z2)) + 2 delta(z1 - z2).
inline SpectrumResult delta_solve_n2(double Z, const GridSpec& g, const N2Options& o = {}) {
    if (!(Z > 0.0)) throw DomainError("delta_solve_n2: Z must be positive");
    g.validate(false);
    if (g.graded()) throw ConfigError("delta_solve_n2 expects a uniform grid");
    N2Couplings c{-2.0 * Z, o.pair_repulsion ? 2.0 : 0.0};
    const double e1 = n1_reduced_ground(g, c.nucleus);
    const double lower = 2.0 * e1 - 0.05 * std::fabs(e1) - 1e-3;  // below the separable bound 2 e1
    std::vector<std::pair<double, std::pair<std::vector<double>, double>>> all;
    nlohmann::json sec = nlohmann::json::array();
    for (const auto& s : o.sectors) {
        auto se = n2_sector_lowest(g, c, s, o.count, lower, o.max_iter, o.tol);
        for (size_t k = 0; k < se.values.size(); ++k) all.push_back({se.values[k], {se.vectors[k], se.residuals[k]}});
        sec.push_back({{"swap", s.swap}, {"parity", s.parity}, {"eigenvalues", se.values}});
    }
    std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.first < y.first; });
    SpectrumResult r;
    r.model = Model::Delta;
    r.params = ProblemParams{std::exp(2.0), Z, 2, 0};
    r.grid = g;
    r.dims = 2;
    for (size_t k = 0; k < all.size() && static_cast<int>(k) < o.count; ++k) {
        r.eigenvalues.push_back(all[k].first);
        r.eigenvectors.push_back(all[k].second.first);
        r.residual_norms.push_back(all[k].second.second);
    }
    r.meta["threshold"] = e1;
    r.meta["threshold_continuum"] = -2.0 * Z * Z;
    r.meta["binds"] = !r.eigenvalues.empty() && r.eigenvalues[0] < e1;
    r.meta["sectors"] = sec;
    return r;
}

// Binding test by inertia: number of negative pivots of LDL^T(H - (e1 - guard))
// in the fully symmetric sector equals the number of eigenvalues below e1 - guard.
inline bool n2_binds(double Z, const GridSpec& g, double guard = 1e-9) {
    N2Couplings c{-2.0 * Z, 2.0};
    const double e1 = n1_reduced_ground(g, c.nucleus);
    SectorBasis sb = sector_basis(g.unknowns(), {+1, +1});
    auto A = n2_sector_matrix(g, c, sb, e1 - guard * std::fabs(e1));
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw AccuracyError("LDL^T factorization failed in the binding test");
    const auto& D = ldlt.vectorD();
    for (int i = 0; i < D.size(); ++i)
        if (D(i) < 0.0) return true;
    return false;
}

struct CriticalCharge {
    double extrapolated = 0.0;
    std::vector<double> half_widths, spacings, values;
};

inline double bisect_critical(const GridSpec& g, double lo, double hi, double tol, double guard) {
    if (n2_binds(lo, g, guard)) throw AccuracyError("critical charge below the search bracket");
    if (!n2_binds(hi, g, guard)) throw AccuracyError("critical charge above the search bracket");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (n2_binds(mid, g, guard) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// The box error decays like 1/L and the five-point mesh error like h^2, so
// Zc(L, h) = Zc + a/L + b h^2 is fitted through the base grid (L, h),
// a doubled box (2L, h) and a halved mesh (L, h/2).
inline CriticalCharge critical_charge_n2(double L0 = 32.0, int n0 = 401, double tol = 2.5e-4, double lo = 0.2, double hi = 0.7,
                                         double guard = 1e-9) {
    CriticalCharge cc;
    const GridSpec grids[3] = {{L0, n0, 0.0, PfScheme::Cutoff}, {2 * L0, 2 * n0 - 1, 0.0, PfScheme::Cutoff}, {L0, 2 * n0 - 1, 0.0, PfScheme::Cutoff}};
    for (const auto& g : grids) {
        cc.half_widths.push_back(g.half_width);
        cc.spacings.push_back(g.h());
        cc.values.push_back(bisect_critical(g, lo, hi, tol, guard));
    }
    cc.extrapolated = 2.0 * cc.values[1] + (4.0 / 3.0) * cc.values[2] - (7.0 / 3.0) * cc.values[0];
    return cc;
}

// ---- N = 1 model comparisons -------------------------------------------------

inline Tridiag assemble_model(Model m, const ProblemParams& p, const GridSpec& g) {
    switch (m) {
        case Model::Delta: return assemble_1d(assemble_vdelta(p), g, nullptr);
        case Model::Coulomb: return assemble_1d(assemble_vC(p), g, nullptr);
        case Model::Eff: {
            CellIntegral c = eff_cells(p);
            return assemble_1d(DistributionPotential1D{1, 1, {}}, g, &c);
        }
    }
    throw ConfigError("unknown model");
}

inline Model model_from_string(const std::string& s) {
    if (s == "delta" || s == "Delta") return Model::Delta;
    if (s == "coulomb" || s == "Coulomb" || s == "C") return Model::Coulomb;
    if (s == "eff" || s == "Eff") return Model::Eff;
    throw ConfigError("unknown model '" + s + "'");
}

// Mesh graded down to 0.02/sqrt(B) at the nuclear plane, where h_eff and h_C
// differ; cell-averaged Pf so that no cutoff enters the comparison.
inline GridSpec comparison_grid(const ProblemParams& p, int points = 4001) {
    GridSpec g = default_grid_n1(p, points);
    g.scheme = PfScheme::CellAverage;
    g.h_min = 0.02 / std::sqrt(p.B);
    g.growth = 1.03;
    return g;
}

struct Comparison {
    double B = 0.0, alpha = 0.0;
    double xi = 0.0, d_xi = 0.0;
    double distance = 0.0;            // Lanczos on the exact discrete resolvent difference
    double distance_truncated = 0.0;  // from eigenpairs below E_max
    double truncation_bound = 0.0;
    double E0_a = 0.0, E0_b = 0.0;
};

// xi sits alpha^2/8 below the ground state of model b.
inline Comparison compare_models(Model ma, Model mb, const ProblemParams& p, std::optional<GridSpec> grid = std::nullopt) {
    p.validate();
    if (p.N != 1) throw DomainError("compare: N = 1 only");
    if (!(p.Z > 0.0)) throw DomainError("compare: Z must be positive");
    const GridSpec g = grid ? *grid : comparison_grid(p);
    Comparison c;
    c.B = p.B;
    c.alpha = alpha(p.B);
    c.d_xi = c.alpha * c.alpha / 8.0;
    Tridiag ta = assemble_model(ma, p, g), tb = assemble_model(mb, p, g);
    const double e0b = tridiag_eigs(tb, 1).values.at(0);
    c.xi = e0b - c.d_xi;
    const double emax = 10.0 * std::fabs(e0b);
    auto ra = pack_1d(ta, tridiag_eigs(ta, -1, emax), g, ma, p);
    auto rb = pack_1d(tb, tridiag_eigs(tb, -1, emax), g, mb, p);
    c.E0_a = ra.eigenvalues.at(0);
    c.E0_b = rb.eigenvalues.at(0);
    auto tr = resolvent_distance_detailed(ra, rb, c.xi, emax);
    c.distance_truncated = tr.value;
    c.truncation_bound = tr.truncation_bound;
    c.distance = resolvent_distance_exact(ta, tb, c.xi, 80);
    return c;
}

// ---- serialization ------------------------------------------------------------

inline nlohmann::json to_json(const GridSpec& g) {
    nlohmann::json j{{"half_width", g.half_width}, {"points", g.points}, {"pf_cutoff", g.pf_cutoff},
                     {"scheme", g.scheme == PfScheme::Cutoff ? "Cutoff" : "CellAverage"}};
    if (g.graded()) {
        j["h_min"] = g.h_min;
        j["growth"] = g.growth;
    }
    return j;
}

inline nlohmann::json to_json(const ProblemParams& p) { return {{"B", p.B}, {"Z", p.Z}, {"N", p.N}, {"M", p.M}}; }

inline nlohmann::json to_json(const SpectrumResult& r) {
    return {{"model", to_string(r.model)}, {"params", to_json(r.params)}, {"grid", to_json(r.grid)}, {"dims", r.dims},
            {"eigenvalues", r.eigenvalues}, {"residuals", r.residual_norms}, {"meta", r.meta}};
}

// "LEFF-VEC v1 <points> <count>\n" followed by count rows of little-endian doubles
inline std::string eigenvector_blob(const SpectrumResult& r) {
    static_assert(std::endian::native == std::endian::little, "eigenvector files are little-endian");
    const size_t pts = r.eigenvectors.empty() ? 0 : r.eigenvectors[0].size();
    std::string out = "LEFF-VEC v1 " + std::to_string(pts) + " " + std::to_string(r.eigenvectors.size()) + "\n";
    for (const auto& v : r.eigenvectors) out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    return out;
}

}  // namespace leff
