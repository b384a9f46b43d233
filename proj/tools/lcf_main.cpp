#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcf/lcf.hpp"

namespace {

using lcf::json;

// Exit-code ledger, shared with the acceptance suite: 0 ok, 2 validation,
// 3 oracle mismatch, 4 margin failure, 5 solver infeasible.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitOracle = 3;
constexpr int kExitMargin = 4;
constexpr int kExitInfeasible = 5;

struct OracleMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string grid_str;
    double p = 2.0;
    double tol = -1.0;  // negative = not set; commands pick their own default
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--grid", c.grid_str, "grid as dim:radius:n_axis (centered box)");
    cmd->add_option("--p", c.p, "Lp parameter");
    cmd->add_option("--tol", c.tol, "tolerance override");
    cmd->add_option("--seed", c.seed, "seed for generated inputs");
    cmd->add_option("--out", c.out, "output file (stdout when omitted)");
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
}

lcf::GridSpec parse_grid(const std::string& s) {
    int dim = 0, n_axis = 0;
    double radius = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> dim >> c1 >> radius >> c2 >> n_axis) || c1 != ':' || c2 != ':')
        throw std::invalid_argument("--grid expects dim:radius:n_axis, got '" + s + "'");
    const lcf::GridSpec spec = lcf::make_grid(dim, radius, n_axis);
    return spec;
}

lcf::GridSpec grid_or_default(const Common& c, const lcf::GridSpec& fallback) {
    return c.grid_str.empty() ? fallback : parse_grid(c.grid_str);
}

lcf::GridSpec default_grid_1d() { return lcf::make_grid(1, 8.0, 513); }

void emit(const Common& c, const std::string& content) {
    if (c.out.empty())
        std::cout << content;
    else
        lcf::write_text_file(c.out, content);
}

// Flatten top-level scalars for the csv format; nested objects stay json.
std::string kv_csv(const json& j) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : j.items()) {
        if (v.is_object() || v.is_array()) continue;
        std::string val = v.is_string() ? v.get<std::string>() : v.dump();
        out += k + "," + val + "\n";
    }
    return out;
}

void emit_object(const Common& c, const json& j) {
    emit(c, c.format == "csv" ? kv_csv(j) : lcf::dump_json(j));
}

void emit_reports(const Common& c, const std::vector<lcf::MarginReport>& rs) {
    emit(c, c.format == "csv" ? lcf::reports_to_csv(rs) : lcf::dump_json(lcf::reports_to_json(rs)));
}

lcf::LogConcaveFn load_function(const std::string& path) {
    return lcf::function_from_json(lcf::load_json(path));
}

std::string fmt_num(double v) { return lcf::num_str(v); }

// ---------------------------------------------------------------- build ----

int cmd_build(const Common& c, const std::string& kind, double s, double q,
              const std::vector<double>& radius, int pieces) {
    const lcf::GridSpec grid = grid_or_default(c, default_grid_1d());
    lcf::LogConcaveFn f;
    if (kind == "gaussian") {
        f = lcf::build_gaussian(grid, s);
    } else if (kind == "indicator") {
        if (radius.empty()) throw std::invalid_argument("build indicator: --radius required");
        std::array<double, 2> r{radius[0], radius.size() > 1 ? radius[1] : radius[0]};
        f = lcf::build_indicator_box(grid, r);
    } else if (kind == "power") {
        f = lcf::build_power(grid, q, s);
    } else {
        if (pieces < 2 || pieces % 2 != 0)
            throw std::invalid_argument("build maxaffine: --pieces must be even and >= 2");
        const auto phi = lcf::random_max_affine(grid.dim, pieces / 2, c.seed);
        f = phi.as_logconcave(grid);
    }
    emit_object(c, lcf::function_to_json(f));
    return kExitOk;
}

// ------------------------------------------------------------ conjugate ----

int cmd_conjugate(const Common& c, const std::string& in_path, bool oracle, int dual_n) {
    const lcf::LogConcaveFn f = load_function(in_path);
    const lcf::GridSpec dual = c.grid_str.empty()
                                   ? lcf::auto_dual_spec(f.potential, dual_n)
                                   : parse_grid(c.grid_str);
    const lcf::GridFunction conj = lcf::conjugate_fast(f.potential, dual);
    if (oracle) {
        const lcf::GridFunction ref = lcf::conjugate_oracle(f.potential, dual);
        const double sup = lcf::detail::node_sup_distance(conj, ref);
        if (!(sup <= 1e-12))
            throw OracleMismatch("conjugate_fast vs conjugate_oracle sup distance " +
                                 fmt_num(sup) + " exceeds 1e-12");
    }
    const lcf::ClassTag tag =
        f.tag == lcf::ClassTag::GENERAL ? lcf::ClassTag::GENERAL : lcf::ClassTag::CLASS_A0;
    emit_object(c, lcf::function_to_json({conj, tag}));
    return kExitOk;
}

// ------------------------------------------------------------------ sum ----

int cmd_sum(const Common& c, const std::string& f_path, const std::string& g_path,
            double alpha, double beta, int dual_n) {
    const lcf::LogConcaveFn f = load_function(f_path);
    const lcf::LogConcaveFn g = load_function(g_path);
    const lcf::PSumResult r = lcf::p_sum(f, g, alpha, beta, c.p, dual_n);
    json j = lcf::function_to_json(r.result);
    j["combined_convexity"] = lcf::report_to_json(r.combined_convexity);
    emit_object(c, j);
    return r.combined_convexity.pass ? kExitOk : kExitMargin;
}

// --------------------------------------------------- mass and entropy ----

int cmd_mass(const Common& c, const std::string& in_path) {
    const lcf::LogConcaveFn f = load_function(in_path);
    json j;
    j["mass"] = lcf::num_or_tag(lcf::total_mass(f));
    emit_object(c, j);
    return kExitOk;
}

int cmd_entropy(const Common& c, const std::string& in_path) {
    const lcf::LogConcaveFn f = load_function(in_path);
    json j;
    j["mass"] = lcf::num_or_tag(lcf::total_mass(f));
    j["integral_f_log_f"] = lcf::num_or_tag(lcf::integral_f_log_f(f.potential));
    j["entropy"] = lcf::num_or_tag(lcf::entropy(f));
    emit_object(c, j);
    return kExitOk;
}

// -------------------------------------------------------------- measure ----

int cmd_measure(const Common& c, const std::string& in_path, double merge_radius,
                bool p_given) {
    const lcf::LogConcaveFn f = load_function(in_path);
    lcf::PushforwardStats stats;
    const lcf::DiscreteMeasure mu =
        (!p_given || c.p == 1.0)
            ? lcf::surface_measure(f, merge_radius, &stats)
            : lcf::lp_surface_measure(f, c.p, merge_radius, &stats);
    json j = lcf::measure_to_json(mu);
    json js;
    js["cells_total"] = stats.cells_total;
    js["cells_skipped_gradient"] = stats.cells_skipped_gradient;
    js["cells_cut_omega"] = stats.cells_cut_omega;
    js["atoms_before_merge"] = stats.atoms_before_merge;
    js["eps_omega"] = stats.eps_omega;
    j["stats"] = js;
    emit_object(c, j);
    return kExitOk;
}

// ------------------------------------------------------------ variation ----

int cmd_variation(const Common& c, const std::string& f_path, const std::string& g_path,
                  const std::string& method, std::vector<double> t_schedule, int dual_n) {
    const lcf::LogConcaveFn f = load_function(f_path);
    if (method == "self") {
        emit_object(c, lcf::variation_to_json(lcf::delta_J_self_closed(f, c.p)));
        return kExitOk;
    }
    if (g_path.empty())
        throw std::invalid_argument("variation: --g required for method " + method);
    const lcf::LogConcaveFn g = load_function(g_path);
    if (method == "numeric") {
        emit_object(c, lcf::variation_to_json(
                           lcf::delta_J_numeric(f, g, c.p, std::move(t_schedule), dual_n)));
        return kExitOk;
    }
    if (method == "integral") {
        emit_object(c, lcf::variation_to_json(lcf::delta_J_integral(f, g, c.p)));
        return kExitOk;
    }
    const double tol = c.tol > 0.0 ? c.tol : 0.03;
    const lcf::MarginReport r =
        lcf::delta_J_decomposition_check(f, g, c.p, std::move(t_schedule), dual_n, tol);
    emit_object(c, lcf::report_to_json(r));
    return r.pass ? kExitOk : kExitMargin;
}

// ---------------------------------------------------------------- check ----

struct SuiteInputs {
    lcf::LogConcaveFn gauss;
    lcf::LogConcaveFn gauss_half;  // e^{-x^2}
    lcf::LogConcaveFn power3;
    lcf::LogConcaveFn box1;
    lcf::LogConcaveFn box2;
    lcf::LogConcaveFn ma1;
    lcf::LogConcaveFn ma2;
};

SuiteInputs make_suite_inputs(std::uint64_t seed) {
    const lcf::GridSpec grid = default_grid_1d();
    SuiteInputs in;
    in.gauss = lcf::build_gaussian(grid, 1.0);
    in.gauss_half = lcf::build_gaussian(grid, 0.5);
    in.power3 = lcf::build_power(grid, 3.0, 1.0);
    in.box1 = lcf::build_indicator_box(grid, 1.0);
    in.box2 = lcf::build_indicator_box(grid, 2.0);
    in.ma1 = lcf::random_max_affine(1, 3, seed).as_logconcave(grid);
    in.ma2 = lcf::random_max_affine(1, 4, seed + 1).as_logconcave(grid);
    return in;
}

void add_report(std::vector<lcf::MarginReport>& out, std::string label, lcf::MarginReport r) {
    r.name = std::move(label);
    out.push_back(std::move(r));
}

std::vector<lcf::MarginReport> suite_pl(const SuiteInputs& in) {
    std::vector<lcf::MarginReport> out;
    add_report(out, "pl/gaussian_self_p2_l0.5",
               lcf::check_prekopa_leindler(in.gauss, in.gauss, 0.5, 2.0));
    for (double p : {1.5, 2.0, 3.0})
        for (double lam : {0.25, 0.5, 0.75})
            add_report(out, "pl/gaussian_power3_p" + fmt_num(p) + "_l" + fmt_num(lam),
                       lcf::check_prekopa_leindler(in.gauss, in.power3, lam, p));
    add_report(out, "pl/gaussian_box_p2_l0.5",
               lcf::check_prekopa_leindler(in.gauss, in.box1, 0.5, 2.0));
    add_report(out, "pl/maxaffine_pair_p2_l0.5",
               lcf::check_prekopa_leindler(in.ma1, in.ma2, 0.5, 2.0));
    return out;
}

std::vector<lcf::MarginReport> suite_logconcavity(const SuiteInputs& in) {
    const std::vector<double> ts{0.2, 0.4, 0.6, 0.8};
    std::vector<lcf::MarginReport> out;
    add_report(out, "logconcavity/gaussian_power3_p2",
               lcf::check_t_logconcavity(in.gauss, in.power3, 2.0, ts));
    add_report(out, "logconcavity/gaussian_box_p2",
               lcf::check_t_logconcavity(in.gauss, in.box1, 2.0, ts));
    add_report(out, "logconcavity/maxaffine_pair_p1.5",
               lcf::check_t_logconcavity(in.ma1, in.ma2, 1.5, ts));
    return out;
}

std::vector<lcf::MarginReport> suite_minkowski(const SuiteInputs& in) {
    std::vector<lcf::MarginReport> out;
    add_report(out, "minkowski/gaussian_self_p2",
               lcf::check_minkowski_type(in.gauss, in.gauss, 2.0));
    add_report(out, "minkowski/gaussian_power3_p2",
               lcf::check_minkowski_type(in.gauss, in.power3, 2.0));
    add_report(out, "minkowski/gaussian_box_p3",
               lcf::check_minkowski_type(in.gauss, in.box1, 3.0));
    add_report(out, "minkowski/maxaffine_pair_p2",
               lcf::check_minkowski_type(in.ma1, in.ma2, 2.0));
    return out;
}

std::vector<lcf::MarginReport> suite_santalo(const SuiteInputs& in) {
    std::vector<lcf::MarginReport> out;
    add_report(out, "santalo/gaussian_1d", lcf::check_santalo(in.gauss));
    add_report(out, "santalo/box_1d", lcf::check_santalo(in.box1));
    add_report(out, "santalo/power4_1d",
               lcf::check_santalo(lcf::build_power(in.gauss.potential.spec, 4.0, 1.0)));
    add_report(out, "santalo/gaussian_2d",
               lcf::check_santalo(lcf::build_gaussian(lcf::make_grid(2, 5.0, 257), 1.0)));
    return out;
}

lcf::MarginReport rel_agreement_report(const std::string& left_name, double left,
                                       double right, double rel_tol) {
    const double rel = std::fabs(left - right) / std::max(std::fabs(right), 1e-30);
    return lcf::make_margin_report(left_name, left, right, rel_tol - rel, 1e-12, 1e-12,
                                   "relative difference " + fmt_num(rel));
}

std::vector<lcf::MarginReport> suite_variation_crosscheck(const SuiteInputs& in) {
    std::vector<lcf::MarginReport> out;
    {
        const double self = lcf::delta_J_self_closed(in.gauss, 2.0).value;
        const double num = lcf::delta_J_numeric(in.gauss, in.gauss, 2.0).value;
        add_report(out, "variation/self_vs_numeric_gaussian_p2",
                   rel_agreement_report("self_vs_numeric", self, num, 0.01));
    }
    {
        const double self = lcf::delta_J_self_closed(in.box1, 2.0).value;
        const double num = lcf::delta_J_numeric(in.box1, in.box1, 2.0).value;
        add_report(out, "variation/self_vs_numeric_box_p2",
                   rel_agreement_report("self_vs_numeric", self, num, 0.01));
    }
    {
        const double integral = lcf::delta_J_integral(in.gauss, in.gauss_half, 2.0).value;
        const double num = lcf::delta_J_numeric(in.gauss, in.gauss_half, 2.0).value;
        add_report(out, "variation/integral_vs_numeric_gaussians_p2",
                   rel_agreement_report("integral_vs_numeric", integral, num, 0.02));
    }
    add_report(out, "variation/decomposition_gaussians_p2",
               lcf::delta_J_decomposition_check(in.gauss, in.gauss_half, 2.0));
    add_report(out, "variation/decomposition_boxes_p2",
               lcf::delta_J_decomposition_check(in.box1, in.box2, 2.0, {}, 0, 0.05));
    add_report(out, "variation/compatibility_gaussian_p2",
               lcf::check_compatibility(in.gauss, 2.0));
    return out;
}

int cmd_check(const Common& c, const std::string& suite, const std::string& f_path,
              const std::string& g_path) {
    std::vector<lcf::MarginReport> reports;
    if (!f_path.empty()) {
        // Explicit inputs: gate on validity first, then run this suite's check
        // on the single pair. An invalid input is a validation error, never a
        // margin failure.
        const lcf::LogConcaveFn f = load_function(f_path);
        const lcf::LogConcaveFn g = g_path.empty() ? f : load_function(g_path);
        for (const auto* fn : {&f, &g}) {
            const auto conv = lcf::check_convex(fn->potential);
            if (!conv.pass)
                throw std::invalid_argument("check: input potential not convex (" +
                                            conv.witness + ")");
        }
        const double p = c.p;
        if (suite == "pl" || suite == "all")
            add_report(reports, "pl/input_pair", lcf::check_prekopa_leindler(f, g, 0.5, p));
        if (suite == "logconcavity" || suite == "all")
            add_report(reports, "logconcavity/input_pair",
                       lcf::check_t_logconcavity(f, g, p, {0.2, 0.4, 0.6, 0.8}));
        if (suite == "minkowski" || suite == "all")
            add_report(reports, "minkowski/input_pair", lcf::check_minkowski_type(f, g, p));
        if (suite == "santalo" || suite == "all")
            add_report(reports, "santalo/input", lcf::check_santalo(f));
        if (suite == "variation-crosscheck" || suite == "all")
            add_report(reports, "variation/decomposition_input_pair",
                       lcf::delta_J_decomposition_check(f, g, p));
    } else {
        const SuiteInputs in = make_suite_inputs(c.seed);
        auto append = [&](std::vector<lcf::MarginReport> rs) {
            for (auto& r : rs) reports.push_back(std::move(r));
        };
        if (suite == "pl" || suite == "all") append(suite_pl(in));
        if (suite == "logconcavity" || suite == "all") append(suite_logconcavity(in));
        if (suite == "minkowski" || suite == "all") append(suite_minkowski(in));
        if (suite == "santalo" || suite == "all") append(suite_santalo(in));
        if (suite == "variation-crosscheck" || suite == "all")
            append(suite_variation_crosscheck(in));
    }
    emit_reports(c, reports);
    for (const auto& r : reports)
        if (!r.pass) return kExitMargin;
    return kExitOk;
}

// ---------------------------------------------------------------- solve ----

void apply_config_json(lcf::SolverConfig& cfg, const json& j) {
    if (j.contains("p")) cfg.p = j.at("p").get<double>();
    if (j.contains("n_pieces")) cfg.n_pieces = j.at("n_pieces").get<int>();
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
    if (j.contains("step_init")) cfg.step_init = j.at("step_init").get<double>();
    if (j.contains("shrink_factor")) cfg.shrink_factor = j.at("shrink_factor").get<double>();
    if (j.contains("step_min")) cfg.step_min = j.at("step_min").get<double>();
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("grid")) cfg.grid = lcf::spec_from_json(j.at("grid"));
}

int run_solve(const Common& c, const lcf::DiscreteMeasure& nu, const lcf::SolverConfig& cfg,
              const lcf::TestFunctionConfig& el_cfg) {
    const lcf::SolveResult res = lcf::solve(nu, cfg, el_cfg);
    emit_object(c, lcf::solve_to_json(res));
    if (!c.out.empty())
        lcf::write_text_file(c.out + ".history.csv", lcf::history_to_csv(res.history));
    return kExitOk;
}

int cmd_solve(CLI::App* cmd, const Common& c, const std::string& nu_path,
              const std::string& config_path, int pieces, int restarts, int max_iters,
              const lcf::TestFunctionConfig& el_cfg) {
    const lcf::DiscreteMeasure nu = lcf::measure_from_json(lcf::load_json(nu_path));
    lcf::SolverConfig cfg;
    if (!config_path.empty()) apply_config_json(cfg, lcf::load_json(config_path));
    if (cmd->count("--p")) cfg.p = c.p;
    if (cmd->count("--seed")) cfg.seed = c.seed;
    if (cmd->count("--tol")) cfg.tol = c.tol;
    if (cmd->count("--grid")) cfg.grid = parse_grid(c.grid_str);
    if (cmd->count("--pieces")) cfg.n_pieces = pieces;
    if (cmd->count("--restarts")) cfg.restarts = restarts;
    if (cmd->count("--max-iters")) cfg.max_iters = max_iters;
    return run_solve(c, nu, cfg, el_cfg);
}

// ------------------------------------------------------------- roundtrip ----

int cmd_roundtrip(const Common& c, double s, double norm, int pieces, int restarts,
                  double residual_tol) {
    const lcf::GridSpec grid = grid_or_default(c, default_grid_1d());
    const lcf::LogConcaveFn f = lcf::build_gaussian(grid, s);
    const lcf::DiscreteMeasure nu = lcf::forward_measure(f, c.p, norm);

    lcf::SolverConfig cfg;
    cfg.p = c.p;
    cfg.n_pieces = pieces;
    cfg.restarts = restarts;
    cfg.seed = c.seed;
    cfg.grid = grid;
    const lcf::SolveResult res = lcf::solve(nu, cfg);

    lcf::TauDetail tau;
    lcf::tau_constant(res.phi0, nu, cfg.p, grid, &tau);

    std::vector<lcf::MarginReport> reports;
    reports.push_back(lcf::make_margin_report(
        "roundtrip/el_residual", res.el_residual, residual_tol,
        residual_tol - res.el_residual, 1e-12, 1e-12, res.diagnostics));
    reports.push_back(lcf::make_margin_report(
        "roundtrip/objective_above_lower_bound", res.objective_value, res.lower_bound,
        res.objective_value - res.lower_bound, 1e-6, 1e-12, ""));
    reports.push_back(lcf::make_margin_report(
        "roundtrip/tau_agreement", tau.tau_moment, tau.tau_mass, 0.05 - tau.spread, 1e-12,
        1e-12, "spread " + fmt_num(tau.spread)));

    json j;
    j["nu_atoms"] = static_cast<long>(nu.atoms.size());
    j["nu_total_weight"] = nu.total_weight();
    j["solve"] = lcf::solve_to_json(res);
    j["reports"] = lcf::reports_to_json(reports);
    emit(c, c.format == "csv" ? lcf::reports_to_csv(reports) : lcf::dump_json(j));
    for (const auto& r : reports)
        if (!r.pass) return kExitMargin;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lp machinery for log-concave functions: transforms, functionals, "
                 "inequality checks, and the even Lp Minkowski solver"};
    app.require_subcommand(1);

    Common c_build, c_conj, c_sum, c_mass, c_entropy, c_measure, c_var, c_check, c_solve,
        c_round;

    auto* build = app.add_subcommand("build", "sample a named potential to a grid file");
    std::string build_kind;
    double build_s = 1.0, build_q = 2.0;
    std::vector<double> build_radius{1.0};
    int build_pieces = 8;
    build->add_option("kind", build_kind, "gaussian | indicator | power | maxaffine")
        ->required()
        ->check(CLI::IsMember({"gaussian", "indicator", "power", "maxaffine"}));
    build->add_option("--s", build_s, "scale parameter");
    build->add_option("--q", build_q, "power exponent (power builder)");
    build->add_option("--radius", build_radius, "box half-widths (indicator builder)");
    build->add_option("--pieces", build_pieces, "piece count (maxaffine builder)");
    add_common(build, c_build);

    auto* conj = app.add_subcommand("conjugate", "Legendre transform of a grid function");
    std::string conj_in;
    bool conj_oracle = false;
    int conj_dual_n = 0;
    conj->add_option("--in", conj_in, "input function file")->required();
    conj->add_flag("--oracle", conj_oracle, "cross-check against the brute-force oracle");
    conj->add_option("--dual-n", conj_dual_n, "dual grid nodes per axis (default: match input)");
    add_common(conj, c_conj);

    auto* sum = app.add_subcommand("sum", "Lp Asplund sum of two functions");
    std::string sum_f, sum_g;
    double sum_alpha = 0.5, sum_beta = 0.5;
    int sum_dual_n = 0;
    sum->add_option("--f", sum_f, "first function file")->required();
    sum->add_option("--g", sum_g, "second function file")->required();
    sum->add_option("--alpha", sum_alpha, "coefficient of f");
    sum->add_option("--beta", sum_beta, "coefficient of g");
    sum->add_option("--dual-n", sum_dual_n, "dual grid nodes per axis");
    add_common(sum, c_sum);

    auto* mass = app.add_subcommand("mass", "total mass J(f)");
    std::string mass_in;
    mass->add_option("--in", mass_in, "input function file")->required();
    add_common(mass, c_mass);

    auto* entropy = app.add_subcommand("entropy", "total mass, f log f integral, entropy");
    std::string entropy_in;
    entropy->add_option("--in", entropy_in, "input function file")->required();
    add_common(entropy, c_entropy);

    auto* measure = app.add_subcommand("measure", "surface-area measure pushforward");
    std::string measure_in;
    double measure_merge = -1.0;
    measure->add_option("--in", measure_in, "input function file")->required();
    measure->add_option("--merge-radius", measure_merge, "atom merge radius (default: auto)");
    add_common(measure, c_measure);

    auto* var = app.add_subcommand("variation", "first variation of total mass");
    std::string var_f, var_g, var_method = "numeric";
    std::vector<double> var_ts;
    int var_dual_n = 0;
    var->add_option("--f", var_f, "base function file")->required();
    var->add_option("--g", var_g, "direction function file");
    var->add_option("--method", var_method, "numeric | self | integral | decomposition")
        ->check(CLI::IsMember({"numeric", "self", "integral", "decomposition"}));
    var->add_option("--t-schedule", var_ts, "difference quotient t values (descending)");
    var->add_option("--dual-n", var_dual_n, "dual grid nodes per axis");
    add_common(var, c_var);

    auto* check = app.add_subcommand("check", "run an inequality suite");
    std::string check_suite, check_f, check_g;
    check
        ->add_option("suite", check_suite,
                     "pl | logconcavity | minkowski | santalo | variation-crosscheck | all")
        ->required()
        ->check(CLI::IsMember(
            {"pl", "logconcavity", "minkowski", "santalo", "variation-crosscheck", "all"}));
    check->add_option("--f", check_f, "explicit first input (default: built-in battery)");
    check->add_option("--g", check_g, "explicit second input");
    add_common(check, c_check);

    auto* solve = app.add_subcommand("solve", "even Lp Minkowski problem for a measure");
    std::string solve_nu, solve_config;
    int solve_pieces = 16, solve_restarts = 4, solve_max_iters = 4000;
    lcf::TestFunctionConfig solve_el;
    solve->add_option("--nu", solve_nu, "target measure file")->required();
    solve->add_option("--config", solve_config, "solver config json");
    solve->add_option("--pieces", solve_pieces, "max-affine piece count");
    solve->add_option("--restarts", solve_restarts, "restart count");
    solve->add_option("--max-iters", solve_max_iters, "objective evaluations per restart");
    solve->add_option("--el-centers", solve_el.centers_per_axis, "test function centers per axis");
    solve->add_option("--el-radius", solve_el.radius_factor, "test function radius factor");
    solve->add_option("--el-tol", solve_el.residual_tol, "stationarity residual tolerance");
    add_common(solve, c_solve);

    auto* round = app.add_subcommand("roundtrip", "forward measure of a Gaussian, then solve");
    double round_s = 1.0, round_norm = 1.0, round_res_tol = 0.05;
    int round_pieces = 16, round_restarts = 4;
    round->add_option("--s", round_s, "Gaussian scale");
    round->add_option("--norm", round_norm, "measure normalization");
    round->add_option("--pieces", round_pieces, "max-affine piece count");
    round->add_option("--restarts", round_restarts, "restart count");
    round->add_option("--residual-tol", round_res_tol, "stationarity residual tolerance");
    add_common(round, c_round);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (build->parsed())
            return cmd_build(c_build, build_kind, build_s, build_q, build_radius, build_pieces);
        if (conj->parsed()) return cmd_conjugate(c_conj, conj_in, conj_oracle, conj_dual_n);
        if (sum->parsed()) return cmd_sum(c_sum, sum_f, sum_g, sum_alpha, sum_beta, sum_dual_n);
        if (mass->parsed()) return cmd_mass(c_mass, mass_in);
        if (entropy->parsed()) return cmd_entropy(c_entropy, entropy_in);
        if (measure->parsed())
            return cmd_measure(c_measure, measure_in, measure_merge,
                               measure->count("--p") > 0);
        if (var->parsed()) return cmd_variation(c_var, var_f, var_g, var_method, var_ts,
                                                var_dual_n);
        if (check->parsed()) return cmd_check(c_check, check_suite, check_f, check_g);
        if (solve->parsed())
            return cmd_solve(solve, c_solve, solve_nu, solve_config, solve_pieces,
                             solve_restarts, solve_max_iters, solve_el);
        if (round->parsed())
            return cmd_roundtrip(c_round, round_s, round_norm, round_pieces, round_restarts,
                                 round_res_tol);
    } catch (const OracleMismatch& e) {
        std::cerr << "oracle mismatch: " << e.what() << "\n";
        return kExitOracle;
    } catch (const lcf::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
