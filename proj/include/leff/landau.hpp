#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "json.hpp"

namespace leff {

struct ProblemParams {
    double B = 1.0;
    double Z = 1.0;
    int N = 1;
    int M = 0;

    void validate() const {
        if (!(B > 0.0) || !std::isfinite(B)) throw DomainError("B must be positive and finite");
        if (!(Z >= 0.0) || !std::isfinite(Z)) throw DomainError("Z must be nonnegative");
        if (N < 1) throw DomainError("N must be at least 1");
        if (M < 0) throw DomainError("M must be nonnegative");
    }
};

using Tuple = std::vector<int>;
using Perm = std::vector<int>;  // p[i] = image of i

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

namespace detail {
inline void enum_rec(int pos, int left, Tuple& cur, std::vector<Tuple>& out) {
    int n = static_cast<int>(cur.size());
    if (pos == n - 1) {
        cur[pos] = left;
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        cur[pos] = v;
        enum_rec(pos + 1, left - v, cur, out);
    }
}
}  // namespace detail

// All N-tuples of nonnegative integers summing to M, lexicographic order.
inline std::vector<Tuple> enumerate_sigma(int N, int M) {
    if (N < 1 || M < 0) throw DomainError("enumerate_sigma: need N >= 1, M >= 0");
    std::vector<Tuple> out;
    out.reserve(static_cast<size_t>(binomial(M + N - 1, N - 1)));
    Tuple cur(N, 0);
    detail::enum_rec(0, M, cur, out);
    return out;
}

enum class OrbitClass { Free, NonTrivial };

inline const char* to_string(OrbitClass c) { return c == OrbitClass::Free ? "Free" : "NonTrivial"; }

struct OrbitDecomposition {
    std::vector<Tuple> representatives;
    std::vector<long> orbit_sizes;
    std::vector<long> stabilizer_orders;
    std::vector<OrbitClass> class_flags;
    std::vector<int> orbit_of;  // index into representatives for each input tuple
};

inline Tuple canonical(Tuple t) {
    std::sort(t.begin(), t.end(), std::greater<>());
    return t;
}

inline long stabilizer_order(const Tuple& t) {
    Tuple s = canonical(t);
    long r = 1;
    for (size_t i = 0; i < s.size();) {
        size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        r *= static_cast<long>(factorial(static_cast<int>(j - i)));
        i = j;
    }
    return r;
}

inline OrbitDecomposition orbit_decompose(const std::vector<Tuple>& sigma) {
    OrbitDecomposition d;
    d.orbit_of.resize(sigma.size());
    for (size_t i = 0; i < sigma.size(); ++i) {
        Tuple rep = canonical(sigma[i]);
        auto it = std::find(d.representatives.begin(), d.representatives.end(), rep);
        int k;
        if (it == d.representatives.end()) {
            k = static_cast<int>(d.representatives.size());
            long st = stabilizer_order(rep);
            d.representatives.push_back(rep);
            d.orbit_sizes.push_back(0);
            d.stabilizer_orders.push_back(st);
            d.class_flags.push_back(st == 1 ? OrbitClass::Free : OrbitClass::NonTrivial);
        } else {
            k = static_cast<int>(it - d.representatives.begin());
        }
        d.orbit_sizes[k] += 1;
        d.orbit_of[i] = k;
    }
    return d;
}

inline nlohmann::json to_json(const OrbitDecomposition& d) {
    std::vector<std::string> flags;
    for (auto c : d.class_flags) flags.push_back(to_string(c));
    return {{"representatives", d.representatives},
            {"orbit_sizes", d.orbit_sizes},
            {"stabilizer_orders", d.stabilizer_orders},
            {"class_flags", flags}};
}

inline int min_M_with_free_orbit(int N) {
    if (N < 1) throw DomainError("min_M_with_free_orbit: N must be positive");
    return N * (N - 1) / 2;
}

// ---- permutations -------------------------------------------------------

inline Perm identity_perm(int n) {
    Perm p(n);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

// (a*b)(i) = a(b(i))
inline Perm compose(const Perm& a, const Perm& b) {
    Perm r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[b[i]];
    return r;
}

inline Perm inverse(const Perm& p) {
    Perm r(p.size());
    for (size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
    return r;
}

inline int sign(const Perm& p) {
    std::vector<char> seen(p.size(), 0);
    int s = 1;
    for (size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        size_t len = 0;
        for (size_t j = i; !seen[j]; j = p[j]) {
            seen[j] = 1;
            ++len;
        }
        if (len % 2 == 0) s = -s;
    }
    return s;
}

// Left action on index-labelled data: (p.v)_i = v_{p^{-1}(i)}.
template <class V>
V act(const Perm& p, const V& v) {
    V r(v);
    for (size_t i = 0; i < p.size(); ++i) r[p[i]] = v[i];
    return r;
}

struct CosetTable {
    Tuple rep;
    std::vector<Perm> sigma;    // coset representatives, sigma[0] = e
    std::vector<Tuple> tuples;  // sigma[j] . rep
};

inline constexpr int kMaxGroupN = 8;

// Cosets of the stabilizer of rep, ordered by sigma_j.rep in descending
// lexicographic order (so sigma_1 = e since rep is the maximum). Each
// sigma_j is the lexicographically smallest permutation producing its tuple.
inline CosetTable coset_table(const Tuple& rep) {
    if (rep != canonical(rep)) throw DomainError("coset_table: representative must be sorted descending");
    int n = static_cast<int>(rep.size());
    if (n > kMaxGroupN) throw DomainError("coset_table: N > 8 not supported");
    CosetTable ct;
    ct.rep = rep;
    Tuple t = rep;
    std::sort(t.begin(), t.end());
    std::vector<Tuple> ts;
    do ts.push_back(t);
    while (std::next_permutation(t.begin(), t.end()));
    std::reverse(ts.begin(), ts.end());
    ct.tuples = ts;
    ct.sigma.assign(ts.size(), Perm{});
    std::vector<char> found(ts.size(), 0);
    size_t nfound = 0;
    Perm p = identity_perm(n);
    do {
        Tuple img = act(p, rep);
        auto it = std::lower_bound(ts.begin(), ts.end(), img, std::greater<>());
        size_t j = static_cast<size_t>(it - ts.begin());
        if (!found[j]) {
            found[j] = 1;
            ct.sigma[j] = p;
            ++nfound;
        }
    } while (nfound < ts.size() && std::next_permutation(p.begin(), p.end()));
    return ct;
}

// rho(tau)(i) = j  iff  tau sigma_i in sigma_j G_rep.
inline Perm rho_homomorphism(const CosetTable& ct, const Perm& tau) {
    if (tau.size() != ct.rep.size()) throw DomainError("rho_homomorphism: permutation size mismatch");
    Perm r(ct.tuples.size());
    for (size_t i = 0; i < ct.tuples.size(); ++i) {
        Tuple img = act(tau, ct.tuples[i]);
        auto it = std::lower_bound(ct.tuples.begin(), ct.tuples.end(), img, std::greater<>());
        r[i] = static_cast<int>(it - ct.tuples.begin());
    }
    return r;
}

inline Perm rho_homomorphism(const Tuple& rep, const Perm& tau) {
    return rho_homomorphism(coset_table(rep), tau);
}

// ---- Landau modes -------------------------------------------------------

struct LandauMode {
    int m = 0;
    double B = 1.0;
};

inline std::complex<double> chi_value(const LandauMode& mode, double x, double y) {
    const double rho2 = x * x + y * y;
    const double B = mode.B;
    const int m = mode.m;
    // log of the normalization keeps large m finite
    double lognorm = 0.5 * ((m + 1) * std::log(B) - std::log(2 * std::numbers::pi) - m * std::log(2.0) - std::lgamma(m + 1.0));
    if (m > 0 && rho2 == 0.0) return {0.0, 0.0};
    double radial = std::exp(lognorm + 0.5 * m * std::log(rho2 > 0 ? rho2 : 1.0) - 0.25 * B * rho2);
    double phi = std::atan2(y, x);
    return std::polar(radial, m * phi);
}

// ---- antisymmetric reconstruction ---------------------------------------

using CoordFn = std::function<double(const std::vector<double>&)>;

struct Reconstruction {
    CosetTable cosets;
    std::vector<CoordFn> a;  // a[j] multiplies X_{sigma_j . rep}

    double U_scale() const { return std::sqrt(static_cast<double>(a.size())); }
};

namespace detail {
inline std::vector<std::vector<double>> sample_points(int n, int count = 24) {
    std::vector<std::vector<double>> pts;
    unsigned s = 12345u;
    for (int c = 0; c < count; ++c) {
        std::vector<double> z(n);
        for (int i = 0; i < n; ++i) {
            s = s * 1103515245u + 12345u;
            z[i] = -2.0 + 4.0 * ((s >> 8) & 0xffff) / 65535.0;
        }
        pts.push_back(z);
    }
    return pts;
}
}  // namespace detail

// a_j(z) = sgn(sigma_j) a_1(sigma_j^{-1} . z); with a_j multiplying X_{sigma_j.rep}
// this makes psi = sum_j a_j X_{sigma_j.rep} totally antisymmetric.
inline Reconstruction antisymmetric_reconstruct(const Tuple& rep, CoordFn a1) {
    Reconstruction r;
    r.cosets = coset_table(rep);
    const int n = static_cast<int>(rep.size());
    if (stabilizer_order(rep) > 1) {
        for (const auto& z : detail::sample_points(n)) {
            double v = a1(z);
            for (int i = 0; i + 1 < n; ++i) {
                auto zs = z;
                std::swap(zs[i], zs[i + 1]);
                double w = a1(zs);
                if (std::fabs(w + v) > 1e-10 * (1.0 + std::fabs(v)))
                    throw SymmetryError("antisymmetric_reconstruct: representative has a nontrivial stabilizer, so a1 must be antisymmetric");
            }
        }
    }
    for (const auto& s : r.cosets.sigma) {
        Perm sinv = inverse(s);
        int sg = sign(s);
        r.a.push_back([a1, sinv, sg](const std::vector<double>& z) { return sg * a1(act(sinv, z)); });
    }
    return r;
}

}  // namespace leff
