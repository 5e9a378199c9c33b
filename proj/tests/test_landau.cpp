#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <leff/landau.hpp>
#include <leff/quadrature.hpp>

using Catch::Approx;
using namespace leff;

namespace {

// brute force: every tuple in [0, M]^N with the right sum
std::vector<Tuple> brute_sigma(int N, int M) {
    std::vector<Tuple> out;
    Tuple t(N, 0);
    while (true) {
        int s = 0;
        for (int x : t) s += x;
        if (s == M) out.push_back(t);
        int i = N - 1;
        while (i >= 0 && t[i] == M) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
    }
    return out;
}

Perm random_perm(int n, std::mt19937& rng) {
    Perm p = identity_perm(n);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

// <chi_m, chi_m'> with Gauss-Laguerre in s = B rho^2/2 and a trapezoid rule in phi
std::complex<double> overlap(int m, int mp, double B) {
    const auto& r = gauss_laguerre_cached(64);
    const int nphi = 64;
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) {
        double rho = std::sqrt(2.0 * r.x[i] / B);
        std::complex<double> ang = 0.0;
        for (int k = 0; k < nphi; ++k) {
            double phi = 2 * std::numbers::pi * k / nphi;
            double x = rho * std::cos(phi), y = rho * std::sin(phi);
            ang += std::conj(chi_value({m, B}, x, y)) * chi_value({mp, B}, x, y);
        }
        ang *= 2 * std::numbers::pi / nphi;
        acc += r.w[i] * std::exp(r.x[i]) * ang / B;
    }
    return acc;
}

}  // namespace

TEST_CASE("enumerate_sigma examples", "[landau]") {
    CHECK(enumerate_sigma(2, 2) == std::vector<Tuple>{{0, 2}, {1, 1}, {2, 0}});
    CHECK(enumerate_sigma(1, 7) == std::vector<Tuple>{{7}});
    CHECK(enumerate_sigma(3, 2).size() == 6);
    CHECK(enumerate_sigma(4, 0) == std::vector<Tuple>{{0, 0, 0, 0}});
    CHECK_THROWS_AS(enumerate_sigma(0, 1), DomainError);
}

TEST_CASE("enumerate_sigma matches brute force, sorted and unique", "[landau]") {
    for (int N = 1; N <= 4; ++N)
        for (int M = 0; M <= 6; ++M) {
            auto s = enumerate_sigma(N, M);
            CHECK(s == brute_sigma(N, M));
            CHECK(std::is_sorted(s.begin(), s.end()));
            CHECK(std::set<Tuple>(s.begin(), s.end()).size() == s.size());
            CHECK(static_cast<double>(s.size()) == binomial(M + N - 1, N - 1));
        }
}

TEST_CASE("orbit_decompose examples", "[landau]") {
    auto d = orbit_decompose(enumerate_sigma(2, 2));
    REQUIRE(d.representatives.size() == 2);
    CHECK(d.representatives[0] == Tuple{2, 0});
    CHECK(d.class_flags[0] == OrbitClass::Free);
    CHECK(d.stabilizer_orders[0] == 1);
    CHECK(d.orbit_sizes[0] == 2);
    CHECK(d.representatives[1] == Tuple{1, 1});
    CHECK(d.class_flags[1] == OrbitClass::NonTrivial);
    CHECK(d.stabilizer_orders[1] == 2);
    CHECK(d.orbit_sizes[1] == 1);

    auto e = orbit_decompose(enumerate_sigma(1, 5));
    CHECK(e.representatives.size() == 1);
    CHECK(e.class_flags[0] == OrbitClass::Free);

    auto f = orbit_decompose(enumerate_sigma(3, 3));
    std::map<Tuple, long> stab;
    for (size_t i = 0; i < f.representatives.size(); ++i) stab[f.representatives[i]] = f.stabilizer_orders[i];
    CHECK(stab == std::map<Tuple, long>{{{3, 0, 0}, 2}, {{2, 1, 0}, 1}, {{1, 1, 1}, 6}});
}

TEST_CASE("orbit invariants", "[landau]") {
    for (int N = 1; N <= 5; ++N)
        for (int M = 0; M <= 8; ++M) {
            auto s = enumerate_sigma(N, M);
            auto d = orbit_decompose(s);
            long total = 0;
            for (size_t i = 0; i < d.representatives.size(); ++i) {
                total += d.orbit_sizes[i];
                CHECK(d.orbit_sizes[i] * d.stabilizer_orders[i] == static_cast<long>(factorial(N)));
                const auto& r = d.representatives[i];
                bool distinct = std::set<int>(r.begin(), r.end()).size() == r.size();
                CHECK((d.class_flags[i] == OrbitClass::Free) == distinct);
                CHECK((d.stabilizer_orders[i] == 1) == distinct);
            }
            CHECK(total == static_cast<long>(s.size()));
            for (size_t i = 0; i < s.size(); ++i) CHECK(canonical(s[i]) == d.representatives[d.orbit_of[i]]);
        }
}

TEST_CASE("orbit decomposition serializes its fields", "[landau]") {
    auto j = to_json(orbit_decompose(enumerate_sigma(2, 2)));
    CHECK(j["representatives"][0] == nlohmann::json({2, 0}));
    CHECK(j["class_flags"][1] == "NonTrivial");
    CHECK(j["orbit_sizes"] == nlohmann::json({2, 1}));
    CHECK(j["stabilizer_orders"] == nlohmann::json({1, 2}));
}

TEST_CASE("min_M_with_free_orbit", "[landau]") {
    CHECK(min_M_with_free_orbit(1) == 0);
    CHECK(min_M_with_free_orbit(2) == 1);
    CHECK(min_M_with_free_orbit(5) == 10);
    for (int N = 1; N <= 5; ++N) {
        int first = -1;
        for (int M = 0; M <= 12 && first < 0; ++M) {
            auto d = orbit_decompose(enumerate_sigma(N, M));
            if (std::count(d.class_flags.begin(), d.class_flags.end(), OrbitClass::Free)) first = M;
        }
        CHECK(first == min_M_with_free_orbit(N));
    }
}

TEST_CASE("permutation helpers", "[landau]") {
    Perm p{2, 0, 1};
    CHECK(compose(p, inverse(p)) == identity_perm(3));
    CHECK(sign(p) == 1);
    CHECK(sign(Perm{1, 0, 2}) == -1);
    CHECK(act(Perm{1, 0}, Tuple{2, 0}) == Tuple{0, 2});
}

TEST_CASE("rho_homomorphism", "[landau]") {
    auto ct = coset_table({2, 0});
    CHECK(ct.sigma[0] == identity_perm(2));
    CHECK(rho_homomorphism(ct, identity_perm(2)) == identity_perm(2));
    CHECK(rho_homomorphism(ct, Perm{1, 0}) == Perm{1, 0});
    CHECK_THROWS_AS(coset_table({0, 2}), DomainError);

    std::mt19937 rng(7);
    for (const auto& rep : orbit_decompose(enumerate_sigma(4, 6)).representatives) {
        auto t = coset_table(rep);
        for (int i = 0; i < 200 / 9 + 1; ++i) {
            Perm a = random_perm(4, rng), b = random_perm(4, rng);
            CHECK(rho_homomorphism(t, compose(a, b)) == compose(rho_homomorphism(t, a), rho_homomorphism(t, b)));
        }
    }
}

TEST_CASE("chi_value values, normalization and orthogonality", "[landau]") {
    CHECK(std::abs(chi_value({0, 1.0}, 0.0, 0.0)) == Approx(std::sqrt(1.0 / (2 * std::numbers::pi))).epsilon(1e-15));
    CHECK(std::abs(chi_value({2, 1.0}, 0.0, 0.0)) == 0.0);
    CHECK(std::abs(overlap(3, 3, 1.0) - 1.0) < 1e-10);
    for (int m = 0; m <= 12; ++m)
        for (int mp = 0; mp <= 12; ++mp) {
            double want = m == mp ? 1.0 : 0.0;
            CHECK(std::abs(overlap(m, mp, 2.5) - want) < 1e-9);
        }
}

TEST_CASE("chi_value scaling covariance", "[landau]") {
    for (double B : {0.3, 4.0, 50.0})
        for (int m : {0, 1, 5})
            for (auto [x, y] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {-0.7, 0.4}, {1.1, -0.05}}) {
                auto lhs = chi_value({m, B}, x, y);
                auto rhs = std::sqrt(B) * chi_value({m, 1.0}, std::sqrt(B) * x, std::sqrt(B) * y);
                CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
            }
}

TEST_CASE("antisymmetric_reconstruct", "[landau]") {
    auto g = [](double z) { return std::exp(-z * z); };
    auto h = [](double z) { return z * std::exp(-0.5 * z * z); };
    CoordFn a1 = [&](const std::vector<double>& z) { return g(z[0]) * h(z[1]); };
    auto r = antisymmetric_reconstruct({2, 0}, a1);
    REQUIRE(r.a.size() == 2);
    for (auto [z1, z2] : std::vector<std::pair<double, double>>{{0.3, -0.4}, {1.2, 0.5}, {-0.9, 0.1}}) {
        CHECK(r.a[1]({z1, z2}) == Approx(-a1({z2, z1})));
        // psi(z1, z2) as coefficients on X_(2,0), X_(0,2); swapping particles swaps both
        double p20 = r.a[0]({z1, z2}), p02 = r.a[1]({z1, z2});
        double q20 = r.a[1]({z2, z1}), q02 = r.a[0]({z2, z1});
        CHECK(q20 == Approx(-p20));
        CHECK(q02 == Approx(-p02));
    }
    CHECK(r.U_scale() == Approx(std::sqrt(2.0)));

    CoordFn sym = [](const std::vector<double>& z) { return std::exp(-z[0] * z[0] - z[1] * z[1]); };
    CHECK_THROWS_AS(antisymmetric_reconstruct({1, 1}, sym), SymmetryError);
    CoordFn anti = [](const std::vector<double>& z) { return (z[0] - z[1]) * std::exp(-z[0] * z[0] - z[1] * z[1]); };
    CHECK_NOTHROW(antisymmetric_reconstruct({1, 1}, anti));

    CoordFn one = [](const std::vector<double>& z) { return std::cos(z[0]); };
    auto id = antisymmetric_reconstruct({4}, one);
    REQUIRE(id.a.size() == 1);
    CHECK(id.a[0]({0.3}) == one({0.3}));
}

TEST_CASE("U isometry on a discretized test function", "[landau]") {
    // |psi|^2 = sum_j |a_j|^2 = K |a_1|^2, and the scaled map psi -> sqrt(K) a_1 is isometric
    CoordFn a1 = [](const std::vector<double>& z) { return std::exp(-z[0] * z[0]) * z[1] * std::exp(-z[1] * z[1] / 3.0); };
    auto r = antisymmetric_reconstruct({3, 1, 0}, [&](const std::vector<double>& z) { return a1(z) * std::exp(-z[2] * z[2]); });
    const int n = 17;
    const double L = 4.0, h = 2 * L / (n - 1);
    double norm_psi = 0.0, norm_a1 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::vector<double> z{-L + i * h, -L + j * h, -L + k * h};
                for (const auto& a : r.a) norm_psi += a(z) * a(z);
                norm_a1 += r.a[0](z) * r.a[0](z);
            }
    double K = static_cast<double>(r.a.size());
    CHECK(K == 6.0);
    CHECK(norm_psi == Approx(K * norm_a1).epsilon(1e-12));
    CHECK(norm_psi / (r.U_scale() * r.U_scale()) == Approx(norm_a1).epsilon(1e-12));
}
