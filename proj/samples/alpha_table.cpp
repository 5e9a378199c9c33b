// Prints alpha(B) next to the leading asymptotic form over a range of fields.
#include <cmath>
#include <cstdio>

#include <leff/specialfn.hpp>

int main() {
    std::printf("%12s %14s %14s %12s\n", "B", "alpha", "asymptotic", "difference");
    for (int k = 1; k <= 14; ++k) {
        double B = std::pow(10.0, k);
        double lb = std::log(B);
        double a = leff::alpha(B);
        double asym = 0.5 * lb - std::log(lb) + std::log(2.0);
        std::printf("%12.0e %14.10f %14.10f %12.3e\n", B, a, asym, a - asym);
    }
    // beyond double range only log B is needed
    std::printf("log B = 2000: alpha = %.10f\n", leff::alpha_from_log(2000.0));
}
