// End-to-end tests for the lcf command line tool. Each case drives the
// installed binary through std::system with output captured to a scratch
// file, then parses the emitted json back through the library readers. The
// binary path and scratch directory come in as compile definitions.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "lcf/lcf.hpp"

namespace {

const std::string kCli = LCF_CLI_PATH;
const std::string kWork = LCF_WORK_DIR;
const std::string kFixtures = LCF_FIXTURE_DIR;

std::string scratch(const std::string& name) { return kWork + "/cli_" + name; }

constexpr double kSqrt2Pi = 2.5066282746310002;

struct CliRun {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

CliRun run_cli(const std::string& args) {
    static int serial = 0;
    const std::string capture = scratch("capture_" + std::to_string(serial++) + ".txt");
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + capture + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = lcf::read_text_file(capture);
    return r;
}

lcf::json load(const std::string& path) { return lcf::load_json(path); }

}  // namespace

TEST_CASE("build then mass recovers the Gaussian integral through files") {
    const std::string fn = scratch("gauss.json");
    CliRun built = run_cli("build gaussian --out " + fn);
    INFO(built.output);
    REQUIRE(built.exit_code == 0);

    const lcf::json j = load(fn);
    CHECK(j.at("spec").at("dim").get<int>() == 1);
    CHECK(j.at("spec").at("n_axis").get<int>() == 513);
    CHECK(j.at("tag").get<std::string>() == "CLASS_A0_PRIME");
    CHECK(j.at("even").get<bool>());

    const std::string out = scratch("gauss_mass.json");
    CliRun mass = run_cli("mass --in " + fn + " --out " + out);
    INFO(mass.output);
    REQUIRE(mass.exit_code == 0);
    const double value = load(out).at("mass").get<double>();
    CHECK_THAT(value, Catch::Matchers::WithinAbs(kSqrt2Pi, 1e-6));
}

TEST_CASE("conjugate agrees with its oracle and keeps the normalized tag") {
    const std::string fn = scratch("conj_in.json");
    REQUIRE(run_cli("build gaussian --out " + fn).exit_code == 0);

    const std::string out = scratch("conj_out.json");
    CliRun r = run_cli("conjugate --in " + fn + " --oracle --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);

    const lcf::json j = load(out);
    CHECK(j.at("tag").get<std::string>() == "CLASS_A0");
    const lcf::LogConcaveFn conj = lcf::function_from_json(j);
    // phi(o) = 0 for the Gaussian, so the conjugate vanishes at the origin
    CHECK(conj.potential.at(conj.potential.spec.center()) == 0.0);
}

TEST_CASE("sum composes box indicators and reports the convexity gate") {
    const std::string f1 = scratch("box1.json");
    const std::string f2 = scratch("box2.json");
    REQUIRE(run_cli("build indicator --radius 1 --out " + f1).exit_code == 0);
    REQUIRE(run_cli("build indicator --radius 2 --out " + f2).exit_code == 0);

    const std::string out = scratch("box_sum.json");
    CliRun r = run_cli("sum --f " + f1 + " --g " + f2 + " --alpha 1 --beta 1 --p 2 --out " +
                       out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    const lcf::json j = load(out);
    CHECK(j.at("combined_convexity").at("pass").get<bool>());
    CHECK(j.at("tag").get<std::string>() == "CLASS_A0");
}

TEST_CASE("entropy reports the box closed form") {
    const std::string fn = scratch("box_ent.json");
    REQUIRE(run_cli("build indicator --radius 2 --out " + fn).exit_code == 0);

    const std::string out = scratch("box_ent_out.json");
    CliRun r = run_cli("entropy --in " + fn + " --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    const lcf::json j = load(out);
    CHECK_THAT(j.at("mass").get<double>(), Catch::Matchers::WithinAbs(4.0, 1e-12));
    CHECK_THAT(j.at("integral_f_log_f").get<double>(), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(j.at("entropy").get<double>(),
               Catch::Matchers::WithinAbs(-4.0 * std::log(4.0), 1e-12));
}

TEST_CASE("measure emits atoms plus pushforward accounting") {
    const std::string fn = scratch("measure_in.json");
    REQUIRE(run_cli("build gaussian --out " + fn).exit_code == 0);

    const std::string out = scratch("measure_out.json");
    CliRun r = run_cli("measure --in " + fn + " --p 2 --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    const lcf::json j = load(out);
    CHECK(j.at("even").get<bool>());
    CHECK(j.at("atoms").size() >= 2);
    CHECK(j.at("stats").at("cells_total").get<long>() == 512);
    CHECK(j.at("stats").at("cells_cut_omega").get<long>() > 0);
    // the file round trips as a measure even with the stats block attached
    const lcf::DiscreteMeasure mu = lcf::measure_from_json(j);
    CHECK(mu.total_weight() > 0.0);
}

TEST_CASE("variation decomposition maps a failed tolerance to the margin exit") {
    const std::string f1 = scratch("var_box1.json");
    const std::string f2 = scratch("var_box2.json");
    const std::string g1 = scratch("var_gauss.json");
    const std::string g2 = scratch("var_gauss_half.json");
    REQUIRE(run_cli("build indicator --radius 1 --out " + f1).exit_code == 0);
    REQUIRE(run_cli("build indicator --radius 2 --out " + f2).exit_code == 0);
    REQUIRE(run_cli("build gaussian --s 1 --out " + g1).exit_code == 0);
    REQUIRE(run_cli("build gaussian --s 0.5 --out " + g2).exit_code == 0);

    CliRun ok = run_cli("variation --f " + g1 + " --g " + g2 + " --method decomposition");
    INFO(ok.output);
    CHECK(ok.exit_code == 0);

    // box inputs carry a few percent of quadrature error, far beyond 1e-12
    CliRun fail = run_cli("variation --f " + f1 + " --g " + f2 +
                          " --method decomposition --tol 1e-12");
    INFO(fail.output);
    CHECK(fail.exit_code == 4);

    const std::string out = scratch("var_numeric.json");
    CliRun numeric =
        run_cli("variation --f " + g1 + " --g " + g1 + " --method numeric --out " + out);
    INFO(numeric.output);
    REQUIRE(numeric.exit_code == 0);
    const double value = load(out).at("value").get<double>();
    CHECK_THAT(value, Catch::Matchers::WithinRel(kSqrt2Pi / 4.0, 1e-2));
}

TEST_CASE("check runs the built-in battery and emits csv on request") {
    CliRun pl = run_cli("check pl");
    INFO(pl.output);
    CHECK(pl.exit_code == 0);

    const std::string out = scratch("check_minkowski.csv");
    CliRun csv = run_cli("check minkowski --format csv --out " + out);
    INFO(csv.output);
    REQUIRE(csv.exit_code == 0);
    const std::string text = lcf::read_text_file(out);
    CHECK(text.rfind("name,lhs,rhs,margin,pass\n", 0) == 0);
    CHECK(text.find("minkowski/gaussian_self_p2") != std::string::npos);
    CHECK(text.find("false") == std::string::npos);
}

TEST_CASE("invalid inputs map to the validation exit code") {
    CliRun missing = run_cli("mass --in " + scratch("does_not_exist.json"));
    CHECK(missing.exit_code == 2);

    CliRun bad_grid = run_cli("build gaussian --grid banana");
    CHECK(bad_grid.exit_code == 2);
    CHECK(bad_grid.output.find("dim:radius:n_axis") != std::string::npos);

    const std::string garbled = scratch("garbled.json");
    lcf::write_text_file(garbled, "not json at all\n");
    CliRun parse = run_cli("mass --in " + garbled);
    CHECK(parse.exit_code == 2);

    // a concave potential must be rejected before any suite runs on it
    lcf::GridFunction g;
    g.spec = lcf::make_grid(1, 2.0, 9);
    g.values.resize(g.spec.size());
    for (int i = 0; i < g.spec.n_axis; ++i) {
        const double x = g.spec.coord(0, i);
        g.values[static_cast<std::size_t>(i)] = -x * x;
    }
    const std::string concave = scratch("concave.json");
    lcf::write_text_file(concave,
                         lcf::dump_json(lcf::function_to_json({std::move(g)})));
    CliRun nonconvex = run_cli("check pl --f " + concave);
    CHECK(nonconvex.exit_code == 2);
    CHECK(nonconvex.output.find("not convex") != std::string::npos);

    CliRun unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("solve surfaces an all-infeasible search as its own exit code") {
    // |y|^2 stays finite so the measure gates pass, but phi(y)^2 overflows at
    // the 1.5-slope spread start and the tiny step cannot reach slope <= 1
    lcf::DiscreteMeasure nu;
    nu.dim = 1;
    nu.even = true;
    nu.atoms.push_back({lcf::pt(1.3e154), 1e-20});
    nu.atoms.push_back({lcf::pt(-1.3e154), 1e-20});
    const std::string nu_path = scratch("nu_overflow.json");
    lcf::write_text_file(nu_path, lcf::dump_json(lcf::measure_to_json(nu)));

    const lcf::json cfg = {{"p", 2.0},      {"n_pieces", 4},   {"restarts", 1},
                           {"max_iters", 200}, {"step_init", 1e-3}, {"step_min", 1e-4}};
    const std::string cfg_path = scratch("cfg_overflow.json");
    lcf::write_text_file(cfg_path, lcf::dump_json(cfg));

    CliRun r = run_cli("solve --nu " + nu_path + " --config " + cfg_path);
    INFO(r.output);
    CHECK(r.exit_code == 5);
    CHECK(r.output.find("all restarts infeasible") != std::string::npos);

    // the same weights with overflowing support must fail validation instead
    lcf::DiscreteMeasure far = nu;
    far.atoms[0].y[0] = 1e155;
    far.atoms[1].y[0] = -1e155;
    const std::string far_path = scratch("nu_far.json");
    lcf::write_text_file(far_path, lcf::dump_json(lcf::measure_to_json(far)));
    CliRun gate = run_cli("solve --nu " + far_path + " --config " + cfg_path);
    CHECK(gate.exit_code == 2);
}

TEST_CASE("same seed runs emit byte-identical output") {
    const std::string a = scratch("det_a.json");
    const std::string b = scratch("det_b.json");
    REQUIRE(run_cli("build maxaffine --pieces 6 --seed 42 --out " + a).exit_code == 0);
    REQUIRE(run_cli("build maxaffine --pieces 6 --seed 42 --out " + b).exit_code == 0);
    CHECK(lcf::read_text_file(a) == lcf::read_text_file(b));

    const std::string c = scratch("det_c.json");
    REQUIRE(run_cli("build maxaffine --pieces 6 --seed 43 --out " + c).exit_code == 0);
    CHECK(lcf::read_text_file(a) != lcf::read_text_file(c));

    const std::string r1 = scratch("det_check1.json");
    const std::string r2 = scratch("det_check2.json");
    REQUIRE(run_cli("check logconcavity --seed 7 --out " + r1).exit_code == 0);
    REQUIRE(run_cli("check logconcavity --seed 7 --out " + r2).exit_code == 0);
    CHECK(lcf::read_text_file(r1) == lcf::read_text_file(r2));
}

TEST_CASE("committed fixtures drive the solver end to end") {
    const std::string out = scratch("fixture_solve.json");
    CliRun r = run_cli("solve --nu " + kFixtures + "/roundtrip_nu.json --config " +
                       kFixtures + "/solver_config.json --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);

    const lcf::json j = load(out);
    CHECK(j.at("feasible").get<bool>());
    CHECK(j.at("el_residual").get<double>() <= 0.05);
    CHECK(j.at("objective_value").get<double>() >= j.at("lower_bound").get<double>() - 1e-6);

    const std::string history = lcf::read_text_file(out + ".history.csv");
    CHECK(history.rfind("accepted,objective\n", 0) == 0);
    CHECK(history.size() > std::string("accepted,objective\n").size());
}

TEST_CASE("roundtrip subcommand reports its margin battery") {
    const std::string out = scratch("roundtrip.json");
    CliRun r = run_cli("roundtrip --pieces 16 --restarts 2 --residual-tol 0.1 --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    const lcf::json j = load(out);
    REQUIRE(j.at("reports").size() == 3);
    for (const auto& rep : j.at("reports")) CHECK(rep.at("pass").get<bool>());
    CHECK(j.at("solve").at("feasible").get<bool>());
}

TEST_CASE("csv format flattens scalar outputs") {
    const std::string fn = scratch("csv_in.json");
    REQUIRE(run_cli("build indicator --radius 1 --out " + fn).exit_code == 0);
    const std::string out = scratch("csv_mass.csv");
    REQUIRE(run_cli("mass --in " + fn + " --format csv --out " + out).exit_code == 0);
    const std::string text = lcf::read_text_file(out);
    CHECK(text.rfind("key,value\n", 0) == 0);
    CHECK(text.find("mass,2") != std::string::npos);
}
