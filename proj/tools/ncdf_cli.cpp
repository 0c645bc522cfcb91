// Command-line surface: build forms from JSON specs, run verification
// suites, emit spectral/growth/heat-trace tables, and drive the spin-chain
// and coarse-state demonstrations.
//
// Exit codes: 0 all checks pass; 1 schema violation or precondition failure;
// 2 mathematical failure (witness serialized); 3 numerically inconclusive
// (every breach smaller than 10x the working tolerance).

#include "ncdf/json_io.hpp"
#include "ncdf/spectral.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;
using namespace ncdf;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_precondition = 1;
constexpr int exit_math_failure = 2;
constexpr int exit_inconclusive = 3;

struct RunConfig {
    std::uint64_t seed = 1;
    TolerancePolicy tols = default_tols();
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json (spectral tables; reports are JSON)
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Atomic write: stage in a sibling temp file, then rename over the target.
void atomic_write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_report(const RunConfig& cfg, const std::string& name, const json& j) {
    atomic_write(fs::path(cfg.out_dir) / name, j.dump(2) + "\n");
}

// Map a verification report to the exit-code contract: failures whose worst
// residual is below 10x the working tolerance are inconclusive, not wrong.
int verdict_exit_code(const VerificationReport& rep, const TolerancePolicy& tols) {
    if (rep.all_pass()) return exit_ok;
    bool all_small = true;
    for (const auto& c : rep.checks)
        if (!c.pass && std::abs(c.worst) >= 10.0 * tols.tol_prop) all_small = false;
    return all_small ? exit_inconclusive : exit_math_failure;
}

// --- verify suites -----------------------------------------------------------

VerificationReport kms_suite(const FormOperator& form, std::uint64_t seed,
                             const TolerancePolicy& tols) {
    const StandardSpace& sp = form.space();
    Rng rng(seed);
    CheckResult s_id{"s_identity"}, law{"modular_group_law"}, kms{"kms_condition"};
    const int n_samples = 20;
    for (int i = 0; i < n_samples; ++i) {
        Element x = random_element(sp, rng);
        Element y = random_element(sp, rng);
        StdVector lhs = sp.modular_power(cxd(0.5), sp.left(x, sp.xi_omega())).conj_J();
        StdVector rhs = sp.left(x.adjoint(), sp.xi_omega());
        s_id.worst = std::max(s_id.worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
        Element a = sp.modular_flow(cxd(0.3), sp.modular_flow(cxd(0.4), x));
        Element b = sp.modular_flow(cxd(0.7), x);
        law.worst = std::max(law.worst, (a - b).hs_norm() / std::max(1.0, b.hs_norm()));
        kms.worst = std::max(kms.worst, sp.kms_residual(x, y));
    }
    VerificationReport rep;
    for (CheckResult* c : {&s_id, &law, &kms}) {
        c->samples = n_samples;
        c->pass = c->worst <= tols.tol_prop;
        rep.checks.push_back(*c);
    }
    return rep;
}

VerificationReport gamma_suite(const FormOperator& form, std::uint64_t seed,
                               const TolerancePolicy& tols) {
    const StandardSpace& sp = form.space();
    Rng rng(seed);
    CheckResult split{"gamma_splitting"}, contr{"gamma_contraction"}, chain{"gamma_chain"};
    const int n_samples = 10;
    for (int i = 0; i < n_samples; ++i) {
        Element y = random_hermitian_element(sp, rng);
        double on = y.op_norm();
        y = cxd(1.0 / (std::sqrt(2.0) * std::max(1.0, on * std::sqrt(2.0)))) * y;
        GammaReport g = gamma_identities(form, y, rng.next_seed(), 200, tols);
        split.worst = std::max(split.worst, g.splitting_residual);
        contr.worst = std::max(contr.worst, contr.pass && !g.contraction_holds ? 1.0 : 0.0);
        if (!g.contraction_holds) contr.worst = std::max(contr.worst, -g.contraction_margin);
        if (!g.chain_holds) chain.worst = 1.0;
    }
    VerificationReport rep;
    for (CheckResult* c : {&split, &contr, &chain}) {
        c->samples = n_samples;
        c->pass = c->worst <= tols.tol_prop;
        rep.checks.push_back(*c);
    }
    return rep;
}

// --- spectral table emission -------------------------------------------------

void emit_tables(const RunConfig& cfg, const std::string& stem,
                 const std::vector<std::string>& rows) {
    std::string body;
    for (const auto& r : rows) body += r + "\n";
    atomic_write(fs::path(cfg.out_dir) / (stem + ".csv"), body);
}

// --- commands ----------------------------------------------------------------

int cmd_build(const RunConfig& cfg, const std::string& spec_path) {
    json spec = read_json_file(spec_path);
    BuildResult r = build_from_spec(spec, cfg.tols, cfg.seed);
    if (!r.ok) {
        json witness = {{"error", "builder refused: admissibility check failed"},
                        {"witness", r.report}};
        std::fputs((witness.dump(2) + "\n").c_str(), stderr);
        write_report(cfg, "build_witness.json", witness);
        return exit_math_failure;
    }
    write_report(cfg, "form.json", form_to_json(r.form));
    write_report(cfg, "build_report.json", r.report);
    std::printf("%s\n", (fs::path(cfg.out_dir) / "form.json").string().c_str());
    return exit_ok;
}

int cmd_verify(const RunConfig& cfg, const std::string& form_path, const std::string& suite) {
    FormOperator form = form_from_json(read_json_file(form_path));
    Rng seeder(cfg.seed);
    VerificationReport rep;
    auto append = [&rep](const VerificationReport& r) {
        rep.checks.insert(rep.checks.end(), r.checks.begin(), r.checks.end());
    };
    if (suite == "full" || suite == "markov")
        append(run_markov_suite(form, seeder.next_seed(), 200, cfg.tols));
    if (suite == "full" || suite == "kms") append(kms_suite(form, seeder.next_seed(), cfg.tols));
    if (suite == "full" || suite == "gamma")
        append(gamma_suite(form, seeder.next_seed(), cfg.tols));
    json out = rep.to_json();
    out["suite"] = suite;
    out["seed"] = cfg.seed;
    write_report(cfg, "verify_report.json", out);
    int code = verdict_exit_code(rep, cfg.tols);
    if (code != exit_ok) {
        json witness = json::array();
        for (const auto& c : rep.checks)
            if (!c.pass) witness.push_back(c.to_json());
        std::fputs((json{{"failures", witness}}.dump(2) + "\n").c_str(), stderr);
    }
    for (const auto& c : rep.checks)
        std::printf("%-24s %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL");
    return code;
}

int cmd_spectral(const RunConfig& cfg, const std::string& form_path, int cheb_n,
                 int cheb_nmax, int growth_nmax, const std::vector<double>& heat_ts,
                 int k_max) {
    if (!form_path.empty()) {
        FormOperator form = form_from_json(read_json_file(form_path));
        SpectralReport sr = spectrum(form, cfg.tols);
        std::vector<std::string> rows;
        for (size_t i = 0; i < sr.eigenvalues.size(); ++i)
            rows.push_back(fmt_double(sr.eigenvalues[i]) + "," +
                           std::to_string(sr.multiplicities[i]));
        emit_tables(cfg, "spectrum", rows);
        GrowthReport g = growth(sr, growth_nmax);
        std::vector<std::string> grows;
        for (size_t n = 0; n < g.beta.size(); ++n)
            grows.push_back(std::to_string(n) + "," + fmt_double(g.beta[n]) + "," +
                            (n == 0 ? "" : fmt_double(g.roots[n - 1])));
        emit_tables(cfg, "growth", grows);
        if (!heat_ts.empty()) {
            std::vector<std::string> hrows;
            for (const auto& p : heat_trace(form, heat_ts))
                hrows.push_back(fmt_double(p.t) + "," + fmt_double(p.value) + "," +
                                fmt_double(p.tail_bound) + "," + p.verdict);
            emit_tables(cfg, "heat_trace", hrows);
        }
        if (cfg.format == "json")
            write_report(cfg, "spectral_report.json",
                         {{"spectrum", sr.to_json()}, {"growth", g.to_json()}});
        return exit_ok;
    }
    ChebySpec cs = chebyshev(cheb_n, cheb_nmax);
    std::vector<std::string> rows;
    for (int n = 0; n <= cs.n_max(); ++n)
        rows.push_back(std::to_string(n) + "," + rational_string(cs.lambda[n]) + "," +
                       cs.m[n].str());
    emit_tables(cfg, "spectrum", rows);
    GrowthReport g = growth(cs, growth_nmax);
    std::vector<std::string> grows;
    for (size_t n = 0; n < g.beta.size(); ++n)
        grows.push_back(std::to_string(n) + "," + fmt_double(g.beta[n]) + "," +
                        (n == 0 ? "" : fmt_double(g.roots[n - 1])));
    emit_tables(cfg, "growth", grows);
    if (!heat_ts.empty()) {
        std::vector<std::string> hrows;
        for (const auto& p : heat_trace(cs, heat_ts, k_max))
            hrows.push_back(fmt_double(p.t) + "," + fmt_double(p.value) + "," +
                            fmt_double(p.tail_bound) + "," + p.verdict);
        emit_tables(cfg, "heat_trace", hrows);
    }
    return exit_ok;
}

int cmd_spin_build(const RunConfig& cfg, const std::string& spec_path) {
    json spec = read_json_file(spec_path);
    if (spec.value("schema", "") != "ncdf-spec-v1" || spec.value("builder", "") != "spin_park")
        throw std::invalid_argument("spin-build: expected ncdf-spec-v1 with builder spin_park");
    SpinChainSpec chain = spin_spec_from_json(spec);
    double beta = spec.at("beta").get<double>();
    BuildResult r = build_from_spec(spec, cfg.tols, cfg.seed);
    KmsAudit audit = kms_audit(chain, beta, 20, cfg.seed);
    ErgodicityReport erg = ergodicity_check(r.form, cfg.tols);
    write_report(cfg, "form.json", form_to_json(r.form));
    write_report(cfg, "spin_report.json",
                 {{"kms_audit", audit.to_json()},
                  {"ergodicity", erg.to_json()},
                  {"builder_report", r.report}});
    bool kms_ok = audit.kms_residual <= cfg.tols.tol_prop &&
                  audit.flow_relation_residual <= cfg.tols.tol_prop;
    std::printf("kms_audit %s\nergodic %s\n", kms_ok ? "PASS" : "FAIL",
                erg.ergodic ? "yes" : "no");
    return kms_ok ? exit_ok : exit_math_failure;
}

int cmd_coarse_demo(const RunConfig& cfg, int k_max) {
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    std::vector<Element> fam;
    for (int j = 1; j <= 3; ++j) fam.push_back(Element(alg, {detail::pauli(j)}));
    FormOperator form = elementary_trace_form(alg, fam);
    Element x = Element::identity(alg) + cxd(0.005) * Element(alg, {detail::pauli(1)});
    cxd target;
    std::vector<std::string> rows;
    std::vector<double> gaps;
    for (int k = 0; k <= k_max; ++k) {
        double t = std::pow(2.0, -k);
        CoarseState cs = coarse_state(form, t, cfg.tols);
        cxd phi = cs.phi(x, x);
        target = cs.limit_target(x, x);
        double gap = std::abs(phi - target);
        gaps.push_back(gap);
        rows.push_back(std::to_string(k) + "," + fmt_double(t) + "," +
                       fmt_double(phi.real()) + "," + fmt_double(gap));
    }
    emit_tables(cfg, "coarse_demo", rows);
    bool monotone = true;
    for (size_t i = 1; i < gaps.size(); ++i)
        if (gaps[i] > gaps[i - 1] + cfg.tols.tol_prop) monotone = false;
    double final_gap = gaps.back();
    std::printf("monotone %s\nfinal_gap %s\n", monotone ? "yes" : "no",
                fmt_double(final_gap).c_str());
    return (monotone && final_gap <= 1e-6) ? exit_ok : exit_math_failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-dimensional noncommutative Dirichlet form toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "random seed (64-bit)");
    app.add_option("--tol-psd", cfg.tols.tol_psd, "positivity tolerance");
    app.add_option("--tol-prop", cfg.tols.tol_prop, "propagated-property tolerance");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--format", cfg.format, "table format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string spec_path, form_path, suite = "full";
    int cheb_n = 0, cheb_nmax = 0, growth_nmax = 20, k_max = 10, heat_kmax = 30;
    std::vector<double> heat_ts;

    CLI::App* build = app.add_subcommand("build", "build a form from a JSON spec");
    build->add_option("spec", spec_path, "spec JSON path")->required();

    CLI::App* verify = app.add_subcommand("verify", "run a verification suite on a form file");
    verify->add_option("form", form_path, "form JSON path")->required();
    verify->add_option("--suite", suite, "full|markov|kms|gamma")
        ->check(CLI::IsMember({"full", "markov", "kms", "gamma"}));

    CLI::App* spectral = app.add_subcommand("spectral", "emit spectral/growth/heat-trace tables");
    spectral->add_option("form", form_path, "form JSON path");
    CLI::Option* cheb =
        spectral->add_option("--chebyshev", [&](const CLI::results_t& res) {
            cheb_n = std::stoi(res[0]);
            cheb_nmax = std::stoi(res[1]);
            return true;
        }, "exact Chebyshev data: N n_max")->expected(2);
    spectral->add_option("--growth", growth_nmax, "growth count range n_max");
    spectral->add_option("--heat", heat_ts, "heat-trace times")->delimiter(',');
    spectral->add_option("--kmax", heat_kmax, "heat-trace partial-sum terms");

    CLI::App* spin = app.add_subcommand("spin-build", "build a spin-chain Park form");
    spin->add_option("spec", spec_path, "spin spec JSON path")->required();

    CLI::App* coarse = app.add_subcommand("coarse-demo", "coarse-state convergence demo");
    coarse->add_option("--kmax", k_max, "dyadic refinement depth");

    // global flags (--seed, --out, ...) may appear after the subcommand
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build(cfg, spec_path);
        if (verify->parsed()) return cmd_verify(cfg, form_path, suite);
        if (spectral->parsed()) {
            if (form_path.empty() && cheb->count() == 0)
                throw std::invalid_argument("spectral: give a form file or --chebyshev N n_max");
            return cmd_spectral(cfg, form_path, cheb_n, cheb_nmax, growth_nmax, heat_ts,
                                heat_kmax);
        }
        if (spin->parsed()) return cmd_spin_build(cfg, spec_path);
        if (coarse->parsed()) return cmd_coarse_demo(cfg, k_max);
    } catch (const std::domain_error& e) {
        std::fputs((json{{"error", e.what()}, {"kind", "math"}}.dump() + "\n").c_str(), stderr);
        return exit_math_failure;
    } catch (const std::exception& e) {
        std::fputs((json{{"error", e.what()}, {"kind", "precondition"}}.dump() + "\n").c_str(),
                   stderr);
        return exit_precondition;
    }
    return exit_precondition;
}
