#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "error.hpp"
#include "json.hpp"
#include "landau.hpp"
#include "potentials.hpp"
#include "specialfn.hpp"

namespace leff {

enum class Provenance { ClosedForm, Quadrature, Configured };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::ClosedForm: return "ClosedForm";
        case Provenance::Quadrature: return "Quadrature";
        case Provenance::Configured: return "Configured";
    }
    return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
    if (s == "ClosedForm") return Provenance::ClosedForm;
    if (s == "Quadrature") return Provenance::Quadrature;
    if (s == "Configured") return Provenance::Configured;
    throw ConfigError("unknown provenance '" + s + "'");
}

// Field-strength thresholds can exceed the double range (e^{8C} factors);
// they carry their logarithm and value = +inf on overflow.
struct LedgerEntry {
    std::string name;
    double value = 0.0;
    Provenance provenance = Provenance::ClosedForm;
    std::string anchor;
    bool available = true;
    std::optional<double> log_value;
};

struct LedgerOptions {
    std::optional<double> nu_C;  // overrides the computed default
    int sup_points = 2000;       // sampling of the C_63 suprema
};

struct ConstantsLedger {
    ProblemParams params;
    std::vector<LedgerEntry> entries;

    const LedgerEntry& entry(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw ConfigError("no ledger field '" + name + "'");
    }
    double operator[](const std::string& name) const {
        const auto& e = entry(name);
        if (!e.available) throw DomainError("ledger field '" + name + "' is unavailable for Z = 0");
        return e.value;
    }
    // natural log of a field, exact even when the value overflows
    double log_of(const std::string& name) const {
        const auto& e = entry(name);
        return e.log_value ? *e.log_value : std::log(e.value);
    }
    bool has(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return true;
        return false;
    }
};

inline const std::vector<std::string>& ledger_field_names() {
    static const std::vector<std::string> names{
        "B_14", "c0", "C_15", "C_37", "C_asympVj", "C_ConstVeff", "C_constW", "C_estWC", "C_refPf1", "C_V11", "C_63",
        "eps_eff", "mu_eff", "c_eff", "B_FMTB", "B_eff", "C_eff", "nu_C", "C_C_prime", "C_C_doubleprime", "B_C_prime",
        "B_C", "c_C", "C_C", "nu_delta", "C_ConstVeffVdelta", "C_delta_prime", "C_delta_doubleprime", "B_delta_prime",
        "B_delta", "c_delta", "C_delta"};
    return names;
}

inline double constant_refPf1() {
    const double l2 = std::numbers::ln2, pi = std::numbers::pi;
    return std::sqrt(pi * pi / 2.0 + 2.0 * l2 * l2) + euler_gamma();
}

// Root of Z C_37 C_V11 eps (|log eps| + 2) = 1/4 on (0, e).
inline double solve_eps_eff(double Z, double C37, double CV11, double* residual = nullptr) {
    if (!(Z > 0.0)) throw DomainError("eps_eff: Z must be positive");
    const double K = Z * C37 * CV11;
    auto f = [&](double e) { return K * e * (std::fabs(std::log(e)) + 2.0) - 0.25; };
    const double hi = std::exp(1.0);
    if (f(hi) < 0.0) throw DomainError("eps_eff: no root in (0, e) for this charge");
    double lo = 1e-300;
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
    double e = 0.5 * (r.first + r.second);
    if (residual) *residual = std::fabs(f(e));
    return e;
}

struct NuCDerivation {
    double eps = 0.0;  // form-bound parameter
    double b = 0.0;
    double nu = 0.5;
};

// Form bound of the h_C interaction at alpha = 1 (B = e^2) against h_00:
//   delta <= (eps(-d^2) + 1/eps)/2 and |Pf| <= C_ref (|log eps| + 1)(eps(-d^2) + 1/eps),
// nucleus planes use -d^2 <= -Delta, pair planes -d_w^2 <= -Delta/2. eps is fixed by a
// total kinetic share of 1/4, and b collects the 1/eps parts, so nu_C = 1/2 + b.
inline NuCDerivation derive_nu_C(const ProblemParams& p) {
    p.validate();
    const double cref = constant_refPf1();
    std::vector<double> nuc, pair;
    for (int j = 0; j < p.N; ++j) nuc.push_back(op_norm(Cn_real(p, j)));
    for (int j = 0; j < p.N; ++j)
        for (int k = j + 1; k < p.N; ++k) pair.push_back(op_norm(Ce_real(p, j, k)));
    auto strength = [&](double eps, bool half_pairs) {
        const double lg = cref * (std::fabs(std::log(eps)) + 1.0);
        double s = 0.0;
        for (double c : nuc) s += 0.5 * p.Z * (2.0 + c) + p.Z * lg;
        for (double c : pair) s += (half_pairs ? 0.5 : 1.0) * (0.5 * (2.0 + c) + lg);
        return s;
    };
    NuCDerivation d;
    auto f = [&](double e) { return e * strength(e, true) - 0.25; };
    if (f(1.0) <= 0.0) {
        d.eps = 1.0;
    } else {
        std::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(f, 1e-300, 1.0, boost::math::tools::eps_tolerance<double>(52), it);
        d.eps = 0.5 * (r.first + r.second);
    }
    d.b = strength(d.eps, false) / d.eps;
    d.nu = 0.5 + d.b;
    return d;
}

inline ConstantsLedger build_ledger(const ProblemParams& p, const LedgerOptions& opt = {}) {
    p.validate();
    const double Z = p.Z, N = p.N, M = p.M;
    const double pi = std::numbers::pi;
    ConstantsLedger L;
    L.params = p;
    auto put = [&](const std::string& n, double v, Provenance pr, const std::string& anchor) {
        L.entries.push_back({n, v, pr, anchor, true, std::nullopt});
    };
    auto put_log = [&](const std::string& n, double lv, Provenance pr, const std::string& anchor) {
        L.entries.push_back({n, std::exp(lv), pr, anchor, true, lv});
    };
    auto missing = [&](const std::string& n, Provenance pr, const std::string& anchor) {
        L.entries.push_back({n, 0.0, pr, anchor, false, std::nullopt});
    };
    using P = Provenance;
    const bool z_ok = Z > 0.0;

    const double B14 = 16.0 * Z * Z * N * (M + N + 2.0);
    const double c0sq = (32.0 * Z * Z * N + 8.0 * N * (N - 1.0) * (N - 1.0)) * (M + N + 2.0);
    const double c0 = std::sqrt(c0sq);
    if (z_ok) {
        put("B_14", B14, P::ClosedForm, "constant-B");
        put("c0", c0, P::ClosedForm, "constant-C");
        put("C_15", c0 + c0sq / std::sqrt(B14), P::ClosedForm, "constant-C");
    } else {
        missing("B_14", P::ClosedForm, "constant-B");
        if (c0 > 0.0) put("c0", c0, P::ClosedForm, "constant-C");
        else missing("c0", P::ClosedForm, "constant-C");
        missing("C_15", P::ClosedForm, "constant-C");
    }

    const double C37 = constant_C37();
    const double Casymp = constant_Casymp(p);
    const double CVeff = Casymp * std::pow(N, 0.25) * (Z + 0.5 * (N - 1.0));
    const double CW = 2.0 * std::pow(pi, 1.5) * std::pow(N, 1.5) * (Z * Z + (N - 1.0) * (N - 1.0) / 4.0);
    const double CV11 = constant_CV11(p);
    const double C63 = constant_C63(p, opt.sup_points);
    put("C_37", C37, P::Quadrature, "AsympPot1a:c");
    put("C_asympVj", Casymp, P::Quadrature, "asympVj");
    if (CVeff > 0.0) put("C_ConstVeff", CVeff, P::Quadrature, "ConstV-eff");
    else missing("C_ConstVeff", P::Quadrature, "ConstV-eff");
    if (CW > 0.0) put("C_constW", CW, P::ClosedForm, "const-W");
    else missing("C_constW", P::ClosedForm, "const-W");
    put("C_estWC", std::sqrt(pi / 2.0), P::ClosedForm, "W-Est");
    put("C_refPf1", constant_refPf1(), P::ClosedForm, "refPf1");
    put("C_V11", CV11, P::Quadrature, "HypAsympPot1a");
    put("C_63", C63, P::Quadrature, "supVchapMoinsDelta");

    const double a = alpha(p.B);
    const double nu_delta = 0.5 + 4.0 * N * Z * Z;
    const double CVV = (N * Z + N * (N - 1.0) / 2.0) * C63;

    const char* eps_dependent[] = {"eps_eff", "mu_eff", "c_eff", "B_FMTB", "B_eff", "C_eff", "nu_C", "C_C_prime",
                                   "C_C_doubleprime", "B_C_prime", "B_C", "c_C", "C_C", "nu_delta", "C_ConstVeffVdelta",
                                   "C_delta_prime", "C_delta_doubleprime", "B_delta_prime", "B_delta", "c_delta", "C_delta"};
    if (!z_ok) {
        for (const char* n : eps_dependent) missing(n, n == std::string("nu_C") ? P::Configured : P::ClosedForm, "");
        return L;
    }

    const double eps = solve_eps_eff(Z, C37, CV11);
    const double g = N / (2.0 * eps * eps) + 1.0;
    const double c_eff = 2.0 * g * CW;
    put("eps_eff", eps, P::Quadrature, "FMT':eps");
    put("mu_eff", -(a * a / 2.0) * g, P::Quadrature, "FMT'mu1");  // the one negative field
    put("c_eff", c_eff, P::Quadrature, "FMT':c-eff");

    const double lB_FMTB = std::log(4.0) + 2.0 * std::log(CW) - 2.0 * std::log(alpha(CW));
    const double lB_eff = std::max({std::log(B14), lB_FMTB, 2.0});
    const double a_Beff = alpha_from_log(lB_eff);
    const double C15 = L["C_15"];
    const double C_eff = C15 + c_eff / a_Beff;
    put_log("B_FMTB", lB_FMTB, P::ClosedForm, "FMT':B");
    put_log("B_eff", lB_eff, P::Quadrature, "FMT:B-eff");
    put("C_eff", C_eff, P::Quadrature, "FMT:B-eff");

    const double nu_C = opt.nu_C ? *opt.nu_C : derive_nu_C(p).nu;
    if (!(nu_C >= 0.5)) throw ConfigError("nu_C must be at least 1/2");
    const double CCp = 4.0 * nu_C * CVeff;
    const double CCpp = std::max(CCp, 4.0 * CVeff * g);
    const double lBCp = std::max(3.0 * std::log(4.0) + 4.0 * std::log(CVeff) - std::log(4.0) - 2.0 * std::log(alpha(CVeff * CVeff)), 1.0);
    const double lBC = std::max(lB_eff, lBCp);
    const double a_BC = alpha_from_log(lBC);
    const double c_C = std::max(CCpp, 2.0 * c_eff * std::exp(-0.5 * std::log(a_BC) - 0.25 * lBC));
    const double C_C = 4.0 * C_eff * std::exp(0.5 * std::log(a_BC) - 0.25 * lBC) + CCp;
    put("nu_C", nu_C, P::Configured, "SMT':mu");
    put("C_C_prime", CCp, P::Quadrature, "SMT':ii");
    put("C_C_doubleprime", CCpp, P::Quadrature, "SMT':iii");
    put_log("B_C_prime", lBCp, P::Quadrature, "SMT':i");
    put_log("B_C", lBC, P::Quadrature, "PfSMT:1");
    put("c_C", c_C, P::Quadrature, "PfSMT:2");
    put("C_C", C_C, P::Quadrature, "PfSMT:3");

    const double Cdp = 4.0 * CVV * nu_delta;
    const double Cdpp = std::max(Cdp, 4.0 * CVV * g);
    const double lBdp = std::log(16.0) + 2.0 * std::log(CVV) + 8.0 * CVV;
    const double lBd = std::max(lB_eff, lBdp);
    const double c_delta = std::max(Cdpp, 2.0 * c_eff * std::exp(-0.5 * lBd));
    const double C_delta = 4.0 * C_eff * std::exp(std::log(alpha_from_log(lBd)) - 0.5 * lBd) + Cdp;
    put("nu_delta", nu_delta, P::ClosedForm, "SMT'':mu");
    put("C_ConstVeffVdelta", CVV, P::Quadrature, "ConstVeff-Vdelta");
    put("C_delta_prime", Cdp, P::Quadrature, "SMT'':ii");
    put("C_delta_doubleprime", Cdpp, P::Quadrature, "ConstVeff-Vdelta");
    put_log("B_delta_prime", lBdp, P::Quadrature, "SMT'':i");
    put_log("B_delta", lBd, P::Quadrature, "cdelta");
    put("c_delta", c_delta, P::Quadrature, "cdelta");
    put("C_delta", C_delta, P::Quadrature, "4.11");
    return L;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const ConstantsLedger& L) {
    nlohmann::json j;
    j["leff-schema"] = 1;
    j["params"] = {{"B", L.params.B}, {"Z", L.params.Z}, {"N", L.params.N}, {"M", L.params.M}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : L.entries) {
        nlohmann::json x{{"name", e.name}, {"provenance", to_string(e.provenance)}, {"paper_anchor", e.anchor}};
        if (!e.available) x["available"] = false;
        x["value"] = (e.available && std::isfinite(e.value)) ? nlohmann::json(e.value) : nlohmann::json(nullptr);
        if (e.log_value) x["log_value"] = *e.log_value;
        arr.push_back(x);
    }
    j["constants"] = arr;
    return j;
}

inline ConstantsLedger ledger_from_json(const nlohmann::json& j) {
    if (j.value("leff-schema", 0) != 1) throw ConfigError("ledger JSON: unsupported schema");
    ConstantsLedger L;
    const auto& p = j.at("params");
    L.params = {p.at("B").get<double>(), p.at("Z").get<double>(), p.at("N").get<int>(), p.at("M").get<int>()};
    for (const auto& x : j.at("constants")) {
        LedgerEntry e;
        e.name = x.at("name").get<std::string>();
        e.provenance = provenance_from_string(x.at("provenance").get<std::string>());
        e.anchor = x.at("paper_anchor").get<std::string>();
        e.available = x.value("available", true);
        if (x.contains("log_value")) e.log_value = x.at("log_value").get<double>();
        if (!x.at("value").is_null()) e.value = x.at("value").get<double>();
        else if (e.available && e.log_value) e.value = std::exp(*e.log_value);
        L.entries.push_back(e);
    }
    return L;
}

inline bool operator==(const LedgerEntry& a, const LedgerEntry& b) {
    auto same = [](double x, double y) { return x == y || (std::isinf(x) && std::isinf(y) && (x > 0) == (y > 0)); };
    return a.name == b.name && same(a.value, b.value) && a.provenance == b.provenance && a.anchor == b.anchor &&
           a.available == b.available && a.log_value == b.log_value;
}

// ---- admissible windows ----------------------------------------------------

enum class Theorem { T1_eff, T2_coulomb, T3_delta };

inline const char* to_string(Theorem t) {
    switch (t) {
        case Theorem::T1_eff: return "T1_eff";
        case Theorem::T2_coulomb: return "T2_coulomb";
        case Theorem::T3_delta: return "T3_delta";
    }
    return "?";
}

inline Theorem theorem_from_string(const std::string& s) {
    if (s == "T1_eff" || s == "T1" || s == "eff") return Theorem::T1_eff;
    if (s == "T2_coulomb" || s == "T2" || s == "coulomb") return Theorem::T2_coulomb;
    if (s == "T3_delta" || s == "T3" || s == "delta") return Theorem::T3_delta;
    throw ConfigError("unknown theorem '" + s + "'");
}

struct AdmissibleWindow {
    Theorem theorem = Theorem::T3_delta;
    double lower = 0.0, upper = 0.0;  // bounds on d(xi)
    double coefficient = 0.0;         // resolvent difference <= coefficient / d^2
    double log_threshold = 0.0;       // log of the minimal B of the theorem
    double log_B_nonempty = 0.0;      // log of the minimal B with lower < upper (and above threshold)
    bool above_threshold = false;

    bool nonempty() const { return lower < upper; }
    double bound(double d) const { return coefficient / (d * d); }
};

// Window without the threshold check; admissible_window adds it.
inline AdmissibleWindow window_unchecked(const ConstantsLedger& L, Theorem t) {
    const double lb = std::log(L.params.B);
    const double a = alpha(L.params.B);
    AdmissibleWindow w;
    w.theorem = t;
    // each lower < upper condition is increasing in log B; solve by bisection
    auto first_nonempty = [](auto cond) {
        double lo = 0.0, hi = 8.0;
        while (!cond(hi)) hi *= 2.0;
        for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
            double mid = 0.5 * (lo + hi);
            (cond(mid) ? hi : lo) = mid;
        }
        return hi;
    };
    switch (t) {
        case Theorem::T1_eff: {
            const double c = L["c_eff"];
            w.lower = c * a / std::sqrt(L.params.B);
            w.upper = 0.5 * a * a;
            w.coefficient = L["C_eff"] * a * a / std::sqrt(L.params.B);
            w.log_threshold = L.log_of("B_eff");
            w.log_B_nonempty = first_nonempty([&](double x) { return std::log(alpha_from_log(x)) + 0.5 * x > std::log(2.0 * c); });
            break;
        }
        case Theorem::T2_coulomb: {
            const double c = L["c_C"];
            w.lower = c * std::pow(a, 1.5) / std::pow(L.params.B, 0.25);
            w.upper = 0.25 * a * a;
            w.coefficient = L["C_C"] * std::pow(a, 1.5) / std::pow(L.params.B, 0.25);
            w.log_threshold = L.log_of("B_C");
            w.log_B_nonempty = first_nonempty([&](double x) { return 0.5 * std::log(alpha_from_log(x)) + 0.25 * x > std::log(4.0 * c); });
            break;
        }
        case Theorem::T3_delta: {
            const double c = L["c_delta"];
            w.lower = c * a;
            w.upper = 0.25 * a * a;
            w.coefficient = L["C_delta"] * a;
            w.log_threshold = L.log_of("B_delta");
            const double am = 4.0 * c;  // alpha > 4 c_delta
            w.log_B_nonempty = 2.0 * (am + std::log(am));
            break;
        }
    }
    w.log_B_nonempty = std::max(w.log_B_nonempty, w.log_threshold);
    w.above_threshold = lb >= w.log_threshold;
    return w;
}

inline AdmissibleWindow admissible_window(const ConstantsLedger& L, Theorem t) {
    auto w = window_unchecked(L, t);
    if (!w.above_threshold)
        throw BelowThresholdError(std::string("B is below the threshold of ") + to_string(t), std::exp(w.log_threshold));
    return w;
}

inline AdmissibleWindow admissible_window(const ProblemParams& p, Theorem t) { return admissible_window(build_ledger(p), t); }

struct Admissibility {
    bool ok = false;
    std::string explanation;
};

inline Admissibility xi_admissible(const ConstantsLedger& L, Theorem t, double d_xi) {
    if (!(d_xi > 0.0)) return {false, "distance must be positive"};
    auto w = window_unchecked(L, t);
    std::string why;
    if (!w.above_threshold) why += "B < threshold (log B_min = " + std::to_string(w.log_threshold) + "); ";
    if (d_xi < w.lower) why += "d(xi) < lower bound " + std::to_string(w.lower) + "; ";
    if (d_xi > w.upper) why += "d(xi) > upper bound " + std::to_string(w.upper) + "; ";
    if (why.empty()) return {true, "all hypotheses hold"};
    why.resize(why.size() - 2);
    return {false, why};
}

inline nlohmann::json to_json(const AdmissibleWindow& w) {
    return {{"theorem", to_string(w.theorem)},
            {"lower", w.lower},
            {"upper", w.upper},
            {"nonempty", w.nonempty()},
            {"coefficient", w.coefficient},
            {"log_threshold", w.log_threshold},
            {"log_B_nonempty", w.log_B_nonempty},
            {"above_threshold", w.above_threshold}};
}

}  // namespace leff
