// Delta model ground state: exact value, grid convergence, and the two-electron fermionic blocks.
#include <cmath>
#include <cstdio>

#include <leff/fermion.hpp>

int main() {
    leff::ProblemParams p;
    p.B = 1e6;
    p.Z = 1.0;

    double exact = leff::delta_exact_n1(p).eigenvalues.at(0);
    std::printf("N = 1, B = %.0e: exact E0 = %.12f\n", p.B, exact);
    for (int n : {401, 1601, 6401}) {
        auto g = leff::default_grid_n1(p, n);
        double E = leff::delta_grid_n1(p, g, 1).eigenvalues.at(0);
        std::printf("  %5d points: %.12f (error %.2e)\n", n, E, E - exact);
    }

    p.B = std::exp(2.0);  // alpha = 1
    p.N = 2;
    p.M = 2;
    for (const auto& b : leff::fermionic_delta_spectrum(p, leff::default_grid_n2(p.Z, 161), 1))
        std::printf("N = 2, M = 2 block (%d,%d) %-13s E0 = %.6f\n", b.block.representative[0], b.block.representative[1],
                    leff::to_string(b.block.space), b.spectrum.eigenvalues.at(0));
}
