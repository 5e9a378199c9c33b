#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "json.hpp"
#include "landau.hpp"
#include "potentials.hpp"
#include "solvers.hpp"

namespace leff {

inline RealMatrix averaged_Cn_real(const ProblemParams& p) {
    p.validate();
    Basis b(p.N, p.M);
    RealMatrix A = RealMatrix::Zero(b.dim(), b.dim());
    for (int j = 0; j < p.N; ++j) A += Cn_real(p, j);
    return A / p.N;
}

inline RealMatrix averaged_Ce_real(const ProblemParams& p) {
    p.validate();
    if (p.N < 2) throw DomainError("averaged_Ce: no electron pairs for N = 1");
    Basis b(p.N, p.M);
    RealMatrix A = RealMatrix::Zero(b.dim(), b.dim());
    for (int j = 0; j < p.N; ++j)
        for (int k = j + 1; k < p.N; ++k) A += Ce_real(p, j, k);
    return A / binomial(p.N, 2);
}

inline HermitianMatrix averaged_Cn(const ProblemParams& p) { return to_complex(averaged_Cn_real(p)); }
inline HermitianMatrix averaged_Ce(const ProblemParams& p) { return to_complex(averaged_Ce_real(p)); }

// log 2 - (1/N) sum_j psi(m_j + 1)
inline double averaged_Cn_closed_form(const Tuple& m) {
    double s = 0.0;
    for (int x : m) s += digamma(x + 1.0);
    return std::numbers::ln2 - s / static_cast<double>(m.size());
}

enum class BlockSpace { Unrestricted, Antisymmetric };

inline const char* to_string(BlockSpace s) { return s == BlockSpace::Unrestricted ? "Unrestricted" : "Antisymmetric"; }

struct FermionBlock {
    Tuple representative;
    BlockSpace space;
};

struct FermionDecomposition {
    std::vector<FermionBlock> blocks;
    std::vector<std::vector<bool>> mixing;        // Coulomb model: averaged C^e couples the blocks
    std::vector<std::vector<bool>> delta_mixing;  // delta model: identity
};

inline constexpr double kMixingThreshold = 1e-10;

inline FermionDecomposition decompose_U_M(const ProblemParams& p) {
    p.validate();
    Basis b(p.N, p.M);
    auto od = orbit_decompose(b.tuples);
    FermionDecomposition fd;
    const size_t nb = od.representatives.size();
    for (size_t i = 0; i < nb; ++i)
        fd.blocks.push_back({od.representatives[i], od.class_flags[i] == OrbitClass::Free ? BlockSpace::Unrestricted : BlockSpace::Antisymmetric});
    fd.mixing.assign(nb, std::vector<bool>(nb, false));
    fd.delta_mixing.assign(nb, std::vector<bool>(nb, false));
    for (size_t i = 0; i < nb; ++i) fd.mixing[i][i] = fd.delta_mixing[i][i] = true;
    if (p.N >= 2) {
        RealMatrix Ce = averaged_Ce_real(p);
        for (int r = 0; r < b.dim(); ++r)
            for (int c = 0; c < b.dim(); ++c) {
                int a = od.orbit_of[r], d = od.orbit_of[c];
                if (a != d && std::fabs(Ce(r, c)) > kMixingThreshold) fd.mixing[a][d] = true;
            }
    }
    return fd;
}

inline nlohmann::json to_json(const FermionDecomposition& fd) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& bl : fd.blocks) blocks.push_back({{"representative", bl.representative}, {"space", to_string(bl.space)}});
    return {{"blocks", blocks}, {"mixing", fd.mixing}, {"delta_mixing", fd.delta_mixing}};
}

struct BlockSpectrum {
    FermionBlock block;
    SpectrumResult spectrum;
};

inline GridSpec default_grid_n2(double Z, int points = 401) {
    GridSpec g;
    g.half_width = 12.0 / std::max(Z, 0.25);
    g.points = points;
    return g;
}

// h_delta on each block of U_M: copies of the boltzonic operator on Unrestricted
// blocks, its antisymmetric part on the others. Energies in physical units
// (alpha^2 times the reduced form); the grid is in the reduced variable alpha z.
inline std::vector<BlockSpectrum> fermionic_delta_spectrum(const ProblemParams& p, const GridSpec& g, int count = 2) {
    p.validate();
    if (p.N > 2) throw ConfigError("fermionic_delta_spectrum supports N <= 2");
    auto fd = decompose_U_M(p);
    const double a2 = alpha(p.B) * alpha(p.B);
    std::vector<BlockSpectrum> out;
    if (p.N == 1) {
        for (const auto& bl : fd.blocks) out.push_back({bl, delta_exact_n1(p)});
        return out;
    }
    auto scaled = [&](SpectrumResult r) {
        for (auto& e : r.eigenvalues) e *= a2;
        r.meta["threshold"] = r.meta["threshold"].get<double>() * a2;
        r.meta["threshold_continuum"] = r.meta["threshold_continuum"].get<double>() * a2;
        r.meta["energy_scale"] = a2;
        r.meta["length_scale"] = 1.0 / std::sqrt(a2);
        r.params = p;
        return r;
    };
    // identical blocks share one solve, so their levels agree exactly
    std::optional<SpectrumResult> full, anti;
    for (const auto& bl : fd.blocks) {
        N2Options o;
        o.count = count;
        if (bl.space == BlockSpace::Unrestricted) {
            if (!full) full = scaled(delta_solve_n2(p.Z, g, o));
            out.push_back({bl, *full});
        } else {
            if (!anti) {
                o.sectors = {{-1, +1}, {-1, -1}};
                anti = scaled(delta_solve_n2(p.Z, g, o));
            }
            out.push_back({bl, *anti});
        }
    }
    return out;
}

}  // namespace leff
