#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include <leff/bounds.hpp>
#include <leff/cache.hpp>
#include <leff/fermion.hpp>

#ifndef LEFF_VERSION
#define LEFF_VERSION "0.0.0-unknown"
#endif

using namespace leff;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 2, kAccuracy = 3 };

struct Options {
    ProblemParams p;
    std::vector<double> B_list;
    // grid
    double L = 0.0;
    int points = 0;
    double cutoff = 0.0;
    std::string scheme = "cutoff";
    double h_min = 0.0;
    double growth = 1.05;
    int count = 4;
    // output
    std::string output;
    std::string format = "json";
    std::string cache_dir;
    // command specific
    std::string model_a = "eff", model_b = "delta";
    std::string theorem = "T3";
    std::string quantity = "alpha";
    std::vector<double> z_values;
    double nu_C = 0.0;
    bool extrapolate = false;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// RFC-4180: CRLF line ends, quoted fields where needed
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&](const std::vector<std::string>& f) {
        for (size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + csv_field(f[i]);
        out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void reject_nonfinite(const json& j, const std::string& where = "$") {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) throw AccuracyError("non-finite value at " + where);
    if (j.is_object())
        for (auto it = j.begin(); it != j.end(); ++it) reject_nonfinite(it.value(), where + "." + it.key());
    if (j.is_array())
        for (size_t i = 0; i < j.size(); ++i) reject_nonfinite(j[i], where + "[" + std::to_string(i) + "]");
}

json envelope(const std::string& cmd, const ProblemParams& p) {
    return {{"leff-schema", 1}, {"version", LEFF_VERSION}, {"command", cmd}, {"params", to_json(p)}};
}

void emit(const Options& o, const std::string& text) {
    if (o.output.empty()) std::cout << text;
    else atomic_write(o.output, text);
}

void emit_json(const Options& o, json j) {
    reject_nonfinite(j);
    if (o.format != "json") throw ConfigError("this command only writes json");
    emit(o, j.dump(2) + "\n");
}

GridSpec make_grid(const Options& o, GridSpec g) {
    if (o.L > 0) g.half_width = o.L;
    if (o.points > 0) g.points = o.points;
    if (o.cutoff > 0) g.pf_cutoff = o.cutoff;
    else if (o.points > 0 || o.L > 0) g.pf_cutoff = 8.0 * g.h();
    if (o.scheme == "cell-average") g.scheme = PfScheme::CellAverage;
    else if (o.scheme != "cutoff") throw ConfigError("--scheme must be cutoff or cell-average");
    if (o.h_min > 0) {
        g.h_min = o.h_min;
        g.growth = o.growth;
    }
    return g;
}

json ledger_provenance(const ConstantsLedger& L, std::initializer_list<const char*> names) {
    json j = json::object();
    for (const char* n : names) {
        const auto& e = L.entry(n);
        j[n] = {{"provenance", to_string(e.provenance)}, {"paper_anchor", e.anchor}};
    }
    return j;
}

LedgerOptions ledger_options(const Options& o) {
    LedgerOptions lo;
    if (o.nu_C > 0) lo.nu_C = o.nu_C;
    return lo;
}

// ---- commands ----------------------------------------------------------------

void cmd_alpha(const Options& o) {
    auto a = alpha_of_B(o.p.B);
    json j = envelope("alpha", o.p);
    j["alpha"] = a.value;
    j["residual"] = std::fabs(a.residual());
    emit_json(o, j);
}

void cmd_basis(const Options& o) {
    o.p.validate();
    Basis b(o.p.N, o.p.M);
    json j = envelope("basis", o.p);
    j["dimension"] = b.dim();
    j["tuples"] = b.tuples;
    j["orbits"] = to_json(orbit_decompose(b.tuples));
    j["min_M_with_free_orbit"] = min_M_with_free_orbit(o.p.N);
    emit_json(o, j);
}

json matrix_json(const RealMatrix& A) {
    json rows = json::array();
    for (int i = 0; i < A.rows(); ++i) {
        json r = json::array();
        for (int k = 0; k < A.cols(); ++k) r.push_back(A(i, k));
        rows.push_back(r);
    }
    return rows;
}

void cmd_potentials(const Options& o) {
    o.p.validate();
    Basis b(o.p.N, o.p.M);
    json j = envelope("potentials", o.p);
    j["basis"] = b.tuples;
    j["Cn_averaged"] = matrix_json(averaged_Cn_real(o.p));
    if (o.p.N >= 2) j["Ce_averaged"] = matrix_json(averaged_Ce_real(o.p));
    json vz = json::array();
    for (double z : o.z_values) vz.push_back({{"z", z}, {"V_single", matrix_json(V_single_real(o.p, z))}});
    j["V_single"] = vz;
    emit_json(o, j);
}

void cmd_constants(const Options& o) {
    auto L = build_ledger(o.p, ledger_options(o));
    json j = envelope("constants", o.p);
    j["ledger"] = to_json(L);
    // flat name -> value view of the available fields
    json flat = json::object();
    for (const auto& e : L.entries)
        if (e.available && std::isfinite(e.value)) flat[e.name] = e.value;
    j["values"] = flat;
    emit_json(o, j);
}

void cmd_window(const Options& o) {
    auto L = build_ledger(o.p, ledger_options(o));
    auto w = window_unchecked(L, theorem_from_string(o.theorem));
    json j = envelope("window", o.p);
    j["window"] = to_json(w);
    j["provenance"] = ledger_provenance(L, {"C_delta", "C_eff", "C_C"});
    emit_json(o, j);
}

json spectrum_record(const std::string& cmd, const Options& o, const SpectrumResult& r) {
    json j = envelope(cmd, o.p);
    j["spectrum"] = to_json(r);
    return j;
}

void cmd_solve_delta(const Options& o) {
    o.p.validate();
    if (o.p.N == 1) {
        if (o.points > 0) {
            auto r = delta_grid_n1(o.p, make_grid(o, default_grid_n1(o.p)), o.count);
            auto j = spectrum_record("solve-delta", o, r);
            j["exact"] = to_json(delta_exact_n1(o.p));
            emit_json(o, j);
        } else {
            emit_json(o, spectrum_record("solve-delta", o, delta_exact_n1(o.p)));
        }
        return;
    }
    if (o.p.N != 2) throw ConfigError("solve-delta supports N = 1 or 2");
    // the N = 2 grid is in the reduced variable alpha z; energies are scaled back by alpha^2
    N2Options n2;
    n2.count = o.count;
    auto r = delta_solve_n2(o.p.Z, make_grid(o, default_grid_n2(o.p.Z)), n2);
    const double a2 = alpha(o.p.B) * alpha(o.p.B);
    json j = spectrum_record("solve-delta", o, r);
    std::vector<double> phys;
    for (double e : r.eigenvalues) phys.push_back(a2 * e);
    j["energy_scale"] = a2;
    j["eigenvalues_physical"] = phys;
    emit_json(o, j);
}

void cmd_solve_coulomb(const Options& o) {
    o.p.validate();
    GridSpec g = make_grid(o, default_grid_n1(o.p));
    SpectrumResult r;
    if (o.extrapolate) r = grid_solve_1d_extrapolated(assemble_vC(o.p), g, o.count, nullptr, Model::Coulomb, o.p);
    else r = coulomb_grid_n1(o.p, g, {o.count});
    emit_json(o, spectrum_record("solve-coulomb", o, r));
}

void cmd_solve_eff(const Options& o) {
    o.p.validate();
    GridSpec g = make_grid(o, comparison_grid(o.p));
    auto j = spectrum_record("solve-eff", o, eff_solve_n1(o.p, g, {o.count}));
    j["first_order"] = eff_first_order(o.p);
    emit_json(o, j);
}

void cmd_compare(const Options& o) {
    Model ma = model_from_string(o.model_a), mb = model_from_string(o.model_b);
    std::vector<double> Bs = o.B_list.empty() ? std::vector<double>{o.p.B} : o.B_list;
    const char* header[] = {"B", "alpha", "d_xi", "resolvent_distance", "bound_T3", "Z", "N", "M", "version"};
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    for (double B : Bs) {
        ProblemParams p = o.p;
        p.B = B;
        std::optional<GridSpec> g;
        if (o.points > 0 || o.L > 0) g = make_grid(o, comparison_grid(p));
        auto c = compare_models(ma, mb, p, g);
        auto L = build_ledger(p, ledger_options(o));
        auto w = window_unchecked(L, Theorem::T3_delta);
        double bound = w.bound(c.d_xi);
        rows.push_back({num(B), num(c.alpha), num(c.d_xi), num(c.distance), num(bound), num(p.Z), std::to_string(p.N), std::to_string(p.M),
                        LEFF_VERSION});
        records.push_back({{"params", to_json(p)},
                           {"alpha", c.alpha},
                           {"xi", c.xi},
                           {"d_xi", c.d_xi},
                           {"resolvent_distance", c.distance},
                           {"resolvent_distance_truncated", c.distance_truncated},
                           {"truncation_bound", c.truncation_bound},
                           {"E0_a", c.E0_a},
                           {"E0_b", c.E0_b},
                           {"bound_T3", bound},
                           {"window_T3", to_json(w)},
                           {"provenance", ledger_provenance(L, {"C_delta"})}});
    }
    if (o.format == "csv") {
        for (const auto& r : records) reject_nonfinite(r);
        emit(o, to_csv({std::begin(header), std::end(header)}, rows));
    } else {
        json j = envelope("compare", o.p);
        j["model_a"] = to_string(ma);
        j["model_b"] = to_string(mb);
        j["rows"] = records;
        emit_json(o, j);
    }
}

void cmd_fermion(const Options& o) {
    o.p.validate();
    json j = envelope("fermion", o.p);
    j["decomposition"] = to_json(decompose_U_M(o.p));
    if (o.p.N <= 2) {
        json blocks = json::array();
        for (const auto& b : fermionic_delta_spectrum(o.p, make_grid(o, default_grid_n2(o.p.Z, 201)), o.count))
            blocks.push_back({{"representative", b.block.representative}, {"space", to_string(b.block.space)}, {"spectrum", to_json(b.spectrum)}});
        j["blocks"] = blocks;
    }
    emit_json(o, j);
}

struct SweepValue {
    double value = 0.0;
    json provenance;
};

SweepValue sweep_value(const Options& o, const ProblemParams& p) {
    const std::string& q = o.quantity;
    if (q == "alpha") return {alpha(p.B), "Computed"};
    if (q == "E0-delta") return {delta_exact_n1(p).eigenvalues.at(0), "ClosedForm"};
    if (q == "E0-coulomb") return {coulomb_grid_n1(p, make_grid(o, default_grid_n1(p)), {1}).eigenvalues.at(0), "Computed"};
    if (q == "E0-eff") return {eff_solve_n1(p, make_grid(o, comparison_grid(p)), {1}).eigenvalues.at(0), "Computed"};
    auto L = build_ledger(p, ledger_options(o));
    if (!L.has(q)) throw ConfigError("unknown sweep quantity '" + q + "'");
    return {L[q], ledger_provenance(L, {q.c_str()})[q]};
}

void cmd_sweep(const Options& o) {
    if (o.B_list.empty()) throw ConfigError("sweep needs --B with a comma-separated list");
    std::vector<std::future<SweepValue>> jobs;
    for (double B : o.B_list) {
        ProblemParams p = o.p;
        p.B = B;
        p.validate();
        jobs.push_back(std::async(std::launch::async, [&o, p] { return sweep_value(o, p); }));
    }
    std::vector<SweepValue> vals;
    for (auto& f : jobs) vals.push_back(f.get());  // merged in input order
    if (o.format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < vals.size(); ++i) {
            if (!std::isfinite(vals[i].value)) throw AccuracyError("non-finite sweep value");
            rows.push_back({num(o.B_list[i]), num(vals[i].value), o.quantity, LEFF_VERSION});
        }
        emit(o, to_csv({"B", "value", "quantity", "version"}, rows));
        return;
    }
    json j = envelope("sweep", o.p);
    j["quantity"] = o.quantity;
    json rows = json::array();
    for (size_t i = 0; i < vals.size(); ++i) rows.push_back({{"B", o.B_list[i]}, {"value", vals[i].value}, {"provenance", vals[i].provenance}});
    j["rows"] = rows;
    emit_json(o, j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective one-dimensional models of atoms in strong magnetic fields"};
    app.set_version_flag("--version", std::string(LEFF_VERSION));
    app.require_subcommand(1, 1);
    Options o;

    auto common = [&](CLI::App* s, bool list_B) {
        if (list_B) s->add_option("--B", o.B_list, "field strength(s), comma separated")->delimiter(',');
        else s->add_option("--B", o.p.B, "field strength")->default_val(1e4);
        s->add_option("--Z", o.p.Z, "nuclear charge")->default_val(1.0);
        s->add_option("--N", o.p.N, "electron number")->default_val(1);
        s->add_option("--M", o.p.M, "total Landau index")->default_val(0);
        s->add_option("-o,--output", o.output, "output file (stdout if omitted)");
        s->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--cache-dir", o.cache_dir, "matrix-element cache directory (overrides LEFF_CACHE_DIR)");
        s->add_option("--nu-C", o.nu_C, "configured nu_C for the ledger");
    };
    auto grid = [&](CLI::App* s) {
        s->add_option("--L", o.L, "grid half-width");
        s->add_option("--points", o.points, "grid points (odd)");
        s->add_option("--cutoff", o.cutoff, "finite-part cutoff");
        s->add_option("--scheme", o.scheme, "cutoff or cell-average");
        s->add_option("--h-min", o.h_min, "graded mesh spacing at z = 0");
        s->add_option("--growth", o.growth, "graded mesh growth factor");
        s->add_option("--count", o.count, "number of eigenvalues");
    };

    std::map<std::string, std::function<void(const Options&)>> dispatch;
    auto sub = [&](const char* name, const char* help, std::function<void(const Options&)> fn, bool list_B = false) {
        auto s = app.add_subcommand(name, help);
        common(s, list_B);
        dispatch[name] = std::move(fn);
        return s;
    };
    sub("alpha", "coupling alpha(B)", cmd_alpha);
    sub("basis", "lowest Landau level basis and orbits", cmd_basis);
    sub("potentials", "averaged constants and sampled potentials (B = 1)", cmd_potentials)
        ->add_option("--z", o.z_values, "positions for V_single")
        ->delimiter(',');
    sub("constants", "constants ledger", cmd_constants);
    sub("window", "admissible window of a theorem", cmd_window)->add_option("--theorem", o.theorem, "T1, T2 or T3");
    grid(sub("solve-delta", "delta model spectrum", cmd_solve_delta));
    auto sc = sub("solve-coulomb", "Coulomb model spectrum (N = 1)", cmd_solve_coulomb);
    grid(sc);
    sc->add_flag("--extrapolate", o.extrapolate, "Richardson extrapolation in the cutoff");
    grid(sub("solve-eff", "effective model spectrum (N = 1)", cmd_solve_eff));
    auto cmp = sub("compare", "resolvent distance between two models", cmd_compare, true);
    grid(cmp);
    cmp->add_option("--model-a", o.model_a, "delta, coulomb or eff");
    cmp->add_option("--model-b", o.model_b, "delta, coulomb or eff");
    grid(sub("fermion", "fermionic block decomposition and delta spectrum", cmd_fermion));
    auto sw = sub("sweep", "one quantity over a list of B values", cmd_sweep, true);
    grid(sw);
    sw->add_option("--quantity", o.quantity, "alpha, E0-delta, E0-coulomb, E0-eff or a ledger field");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        if (rc == 0) return kOk;
        std::cerr << app.help();
        return kValidation;
    }

    if (o.B_list.size() == 1) o.p.B = o.B_list[0];
    try {
        std::string dir = o.cache_dir;
        if (dir.empty())
            if (const char* env = std::getenv("LEFF_CACHE_DIR")) dir = env;
        if (!dir.empty()) attach_cache_dir(dir);
        const std::string name = app.get_subcommands().front()->get_name();
        dispatch.at(name)(o);
        active_cache().save();
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return kAccuracy;
    } catch (const IllConditionedError& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return kAccuracy;
    } catch (const BelowThresholdError& e) {
        std::cerr << "below threshold: " << e.what() << "\n";
        return kAccuracy;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kAccuracy;
    }
    return kOk;
}
