#pragma once

// JSON serialization: build specs ("ncdf-spec-v1"), serialized form operators
// ("ncdf-form-v1"), and report plumbing. Complex numbers are [re, im] pairs;
// exact rationals are "p/q" strings.

#include "ncdf/builders.hpp"
#include "ncdf/spin.hpp"

#include <fstream>

namespace ncdf {

inline nlohmann::json cx_to_json(const cxd& z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cxd cx_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("complex values must be [re, im] pairs");
    return cxd(j[0].get<double>(), j[1].get<double>());
}

inline nlohmann::json matrix_to_json(const CMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(cx_to_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix JSON must be a row array");
    Eigen::Index rows = j.size(), cols = j[0].size();
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols)
            throw std::invalid_argument("matrix JSON rows must have equal length");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = cx_from_json(j[i][k]);
    }
    return m;
}

// --- form files ("ncdf-form-v1") ---------------------------------------------

inline nlohmann::json form_to_json(const FormOperator& form) {
    const StandardSpace& sp = form.space();
    nlohmann::json rho = nlohmann::json::array();
    for (const auto& blk : sp.state.rho.blocks) rho.push_back(matrix_to_json(blk));
    return {{"schema", "ncdf-form-v1"},
            {"provenance", form.provenance()},
            {"block_dims", sp.alg.block_dims},
            {"is_trace", sp.state.is_trace},
            {"rho", rho},
            {"generator", matrix_to_json(form.generator())}};
}

inline FormOperator form_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "ncdf-form-v1")
        throw std::invalid_argument("form file: expected schema ncdf-form-v1");
    AlgebraDescriptor alg(j.at("block_dims").get<std::vector<int>>());
    std::vector<CMatrix> rho;
    for (const auto& blk : j.at("rho")) rho.push_back(matrix_from_json(blk));
    Element rho_el(alg, std::move(rho));
    State st = j.value("is_trace", false)
                   ? State::trace_state(alg)
                   : State::from_density(rho_el, State::Floor::positive);
    SpacePtr sp = StandardSpace::gns(st);
    return FormOperator(sp, matrix_from_json(j.at("generator")), j.value("provenance", "file"));
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return nlohmann::json::parse(in);
}

// --- build specs ("ncdf-spec-v1") --------------------------------------------

struct BuildResult {
    FormOperator form;
    nlohmann::json report;  // builder-specific diagnostics (admissibility, CND, ...)
    bool ok = true;         // false => math refusal, witness in report
};

inline SpinChainSpec spin_spec_from_json(const nlohmann::json& j) {
    SpinChainSpec spec;
    spec.l_sites = j.at("sites").get<int>();
    spec.couplings = j.value("couplings", std::vector<double>{});
    spec.field = j.value("field", 0.0);
    std::string b = j.value("boundary", "open");
    if (b == "open") spec.boundary = Boundary::open_chain;
    else if (b == "periodic") spec.boundary = Boundary::periodic;
    else throw std::invalid_argument("spin spec: boundary must be open|periodic");
    spec.lambda_decay = j.value("lambda_decay", 1.0);
    spec.validate();
    return spec;
}

// Dispatch a build spec to the named builder. Schema violations throw;
// mathematical refusals (CND violation, inadmissible OU parameters caught by
// the builder) also throw except where a witness report is more useful, in
// which case ok = false and the witness is in the report.
inline BuildResult build_from_spec(const nlohmann::json& j,
                                   const TolerancePolicy& tols = default_tols(),
                                   std::uint64_t seed = 1) {
    if (j.value("schema", "") != "ncdf-spec-v1")
        throw std::invalid_argument("build spec: expected schema ncdf-spec-v1");
    std::string builder = j.at("builder").get<std::string>();
    if (builder == "fuzzy_torus") {
        FuzzyTorus ft = fuzzy_torus_form(j.at("q").get<int>(), j.at("p").get<int>());
        return {std::move(ft.form), {{"window_size", ft.window.size()}}, true};
    }
    if (builder == "clifford") {
        CliffordForm cf = clifford_number_form(j.at("modes").get<int>());
        return {std::move(cf.form), {{"modes", cf.n_modes}}, true};
    }
    if (builder == "group") {
        std::string name = j.at("group").get<std::string>();
        if (name.rfind("Z", 0) != 0)
            throw std::invalid_argument("build spec: only cyclic groups Z<N> supported");
        int n = std::stoi(name.substr(1));
        std::vector<cxd> ell;
        for (const auto& v : j.at("ell")) {
            if (v.is_number()) ell.push_back(v.get<double>());
            else ell.push_back(cx_from_json(v));
        }
        CndFunction f(GroupTable::cyclic(n), ell);
        CheckResult cnd = check_cnd(f, 200, seed, tols);
        if (!cnd.pass) {
            BuildResult r{FormOperator(StandardSpace::gns(State::trace_state(
                                           AlgebraDescriptor::full(1))),
                                       CMatrix::Zero(1, 1), "refused"),
                          cnd.to_json(), false};
            return r;
        }
        GroupForm gf = group_form(f, seed, tols);
        return {std::move(gf.form),
                {{"cnd", gf.cnd.to_json()}, {"schoenberg", gf.schoenberg.to_json()}},
                true};
    }
    if (builder == "quantum_ou") {
        OuForm ou = quantum_ou_form(j.at("levels").get<int>(), j.at("mu").get<double>(),
                                    j.at("lambda").get<double>());
        return {std::move(ou.form), {{"nu", ou.nu}, {"trace_case", ou.trace_case}}, true};
    }
    if (builder == "graph") {
        GraphFormSpec spec;
        auto mv = j.at("m").get<std::vector<double>>();
        auto kv = j.at("k").get<std::vector<double>>();
        int n = static_cast<int>(mv.size());
        spec.m = Eigen::Map<RVector>(mv.data(), n);
        spec.k = Eigen::Map<RVector>(kv.data(), n);
        spec.J = RMatrix::Zero(n, n);
        const auto& jm = j.at("J");
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) spec.J(a, b) = jm[a][b].get<double>();
        return {graph_form(spec), {{"points", n}}, true};
    }
    if (builder == "elementary_trace") {
        AlgebraDescriptor alg(j.at("block_dims").get<std::vector<int>>());
        std::vector<Element> fam;
        for (const auto& fj : j.at("family")) {
            std::vector<CMatrix> blocks;
            for (const auto& bj : fj) blocks.push_back(matrix_from_json(bj));
            fam.push_back(Element(alg, std::move(blocks)));
        }
        return {elementary_trace_form(alg, fam), {{"family_size", fam.size()}}, true};
    }
    if (builder == "spin_park") {
        SpinChainSpec spec = spin_spec_from_json(j);
        double beta = j.at("beta").get<double>();
        ParkOptions opt;
        opt.truncation = j.value("T", opt.truncation);
        opt.nodes = j.value("Q", opt.nodes);
        std::vector<int> sites = j.value("site_list", std::vector<int>{});
        if (sites.empty())
            for (int x = 0; x < spec.l_sites; ++x) sites.push_back(x);
        return {park_form(spec, beta, sites, opt, tols),
                {{"phi_norm", phi_norm(spec, spec.lambda_decay).to_json()}},
                true};
    }
    throw std::invalid_argument("build spec: unknown builder '" + builder + "'");
}

}  // namespace ncdf
