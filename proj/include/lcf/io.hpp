#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"
#include "lcf/maxaffine.hpp"
#include "lcf/minkowski.hpp"
#include "lcf/report.hpp"
#include "lcf/variation.hpp"

namespace lcf {

// ordered_json keeps insertion order, so repeated runs with identical inputs
// produce byte-identical files.
using json = nlohmann::ordered_json;

// JSON has no infinity; extended values travel as strings.
inline json num_or_tag(double v) {
    if (std::isfinite(v)) return v;
    if (v > 0.0) return "inf";
    if (v < 0.0) return "-inf";
    return "nan";
}

inline double num_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    throw std::runtime_error("expected a number or inf tag, got " + j.dump());
}

inline std::string num_str(double v) {
    return std::isfinite(v) ? json(v).dump() : (v > 0.0 ? "inf" : v < 0.0 ? "-inf" : "nan");
}

inline json spec_to_json(const GridSpec& spec) {
    json j;
    j["dim"] = spec.dim;
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < spec.dim; ++a) {
        lo.push_back(spec.lo[a]);
        hi.push_back(spec.hi[a]);
    }
    j["lo"] = lo;
    j["hi"] = hi;
    j["n_axis"] = spec.n_axis;
    return j;
}

inline GridSpec spec_from_json(const json& j) {
    GridSpec spec;
    spec.dim = j.at("dim").get<int>();
    spec.n_axis = j.at("n_axis").get<int>();
    if (spec.dim < 1 || spec.dim > 2) throw std::runtime_error("spec: dim must be 1 or 2");
    for (int a = 0; a < spec.dim; ++a) {
        spec.lo[a] = j.at("lo").at(a).get<double>();
        spec.hi[a] = j.at("hi").at(a).get<double>();
    }
    spec.validate();
    return spec;
}

inline json function_to_json(const LogConcaveFn& f) {
    json j;
    j["spec"] = spec_to_json(f.potential.spec);
    j["even"] = f.potential.even;
    j["tag"] = to_string(f.tag);
    json vals = json::array();
    for (double v : f.potential.values) vals.push_back(num_or_tag(v));
    j["values"] = vals;
    return j;
}

inline LogConcaveFn function_from_json(const json& j) {
    LogConcaveFn f;
    f.potential.spec = spec_from_json(j.at("spec"));
    f.potential.even = j.at("even").get<bool>();
    f.tag = j.contains("tag") ? class_tag_from_string(j.at("tag").get<std::string>())
                              : ClassTag::GENERAL;
    for (const auto& v : j.at("values")) f.potential.values.push_back(num_from_json(v));
    f.potential.validate();
    return f;
}

inline json measure_to_json(const DiscreteMeasure& mu) {
    json j;
    j["dim"] = mu.dim;
    j["even"] = mu.even;
    json atoms = json::array();
    for (const auto& a : mu.atoms) {
        json ja;
        json y = json::array();
        for (int d = 0; d < mu.dim; ++d) y.push_back(a.y[d]);
        ja["y"] = y;
        ja["w"] = a.w;
        atoms.push_back(ja);
    }
    j["atoms"] = atoms;
    return j;
}

inline DiscreteMeasure measure_from_json(const json& j) {
    DiscreteMeasure mu;
    mu.dim = j.at("dim").get<int>();
    if (mu.dim < 1 || mu.dim > 2) throw std::runtime_error("measure: dim must be 1 or 2");
    mu.even = j.at("even").get<bool>();
    for (const auto& ja : j.at("atoms")) {
        DiscreteMeasure::Atom a;
        for (int d = 0; d < mu.dim; ++d) a.y[d] = ja.at("y").at(d).get<double>();
        a.w = ja.at("w").get<double>();
        if (!std::isfinite(a.w) || !std::isfinite(a.y[0]) || !std::isfinite(a.y[1]))
            throw std::runtime_error("measure: nonfinite atom");
        mu.atoms.push_back(a);
    }
    return mu;
}

inline json potential_to_json(const MaxAffinePotential& phi) {
    json j;
    j["dim"] = phi.dim;
    json pairs = json::array();
    for (const auto& pc : phi.pairs) {
        json jp;
        json a = json::array();
        for (int d = 0; d < phi.dim; ++d) a.push_back(pc.a[d]);
        jp["a"] = a;
        jp["b"] = pc.b;
        pairs.push_back(jp);
    }
    j["pairs"] = pairs;
    return j;
}

inline MaxAffinePotential potential_from_json(const json& j) {
    MaxAffinePotential phi;
    phi.dim = j.at("dim").get<int>();
    for (const auto& jp : j.at("pairs")) {
        MaxAffinePotential::Pair pc;
        for (int d = 0; d < phi.dim; ++d) pc.a[d] = jp.at("a").at(d).get<double>();
        pc.b = jp.at("b").get<double>();
        phi.pairs.push_back(pc);
    }
    phi.validate();
    return phi;
}

inline json report_to_json(const MarginReport& r) {
    json j;
    j["name"] = r.name;
    j["lhs"] = num_or_tag(r.lhs);
    j["rhs"] = num_or_tag(r.rhs);
    j["margin"] = num_or_tag(r.margin);
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    j["equality_detected"] = r.equality_detected;
    j["witness"] = r.witness;
    return j;
}

inline json reports_to_json(const std::vector<MarginReport>& rs) {
    json j;
    bool all = true;
    json arr = json::array();
    for (const auto& r : rs) {
        all = all && r.pass;
        arr.push_back(report_to_json(r));
    }
    j["all_pass"] = all;
    j["reports"] = arr;
    return j;
}

inline std::string reports_to_csv(const std::vector<MarginReport>& rs) {
    std::string out = "name,lhs,rhs,margin,pass\n";
    for (const auto& r : rs) {
        out += r.name + "," + num_str(r.lhs) + "," + num_str(r.rhs) + "," + num_str(r.margin) +
               "," + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

inline json variation_to_json(const VariationResult& v) {
    json j;
    j["value"] = num_or_tag(v.value);
    j["method"] = to_string(v.method);
    json ts = json::array();
    for (double t : v.t_schedule_used) ts.push_back(t);
    j["t_schedule"] = ts;
    json d;
    json qs = json::array(), es = json::array();
    for (double q : v.diagnostics.quotients) qs.push_back(num_or_tag(q));
    for (double e : v.diagnostics.extrapolants) es.push_back(num_or_tag(e));
    d["quotients"] = qs;
    d["extrapolants"] = es;
    d["error_estimate"] = num_or_tag(v.diagnostics.error_estimate);
    d["divergent"] = v.diagnostics.divergent;
    d["noisy"] = v.diagnostics.noisy;
    d["note"] = v.diagnostics.note;
    d["cells_total"] = v.diagnostics.cells_total;
    d["cells_used"] = v.diagnostics.cells_used;
    d["cells_zeroed"] = v.diagnostics.cells_zeroed;
    d["cells_nonfinite"] = v.diagnostics.cells_nonfinite;
    d["cells_skipped"] = v.diagnostics.cells_skipped;
    j["diagnostics"] = d;
    return j;
}

inline json solve_to_json(const SolveResult& s) {
    json j;
    j["feasible"] = s.feasible;
    j["objective_value"] = num_or_tag(s.objective_value);
    j["lower_bound"] = num_or_tag(s.lower_bound);
    j["tau"] = num_or_tag(s.tau);
    j["el_residual"] = num_or_tag(s.el_residual);
    j["best_restart"] = s.best_restart;
    j["total_evals"] = s.total_evals;
    j["diagnostics"] = s.diagnostics;
    j["potential"] = potential_to_json(s.phi0);
    json h = json::array();
    for (double v : s.history) h.push_back(num_or_tag(v));
    j["history"] = h;
    return j;
}

inline std::string history_to_csv(const std::vector<double>& history) {
    std::string out = "accepted,objective\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out += std::to_string(i) + "," + num_str(history[i]) + "\n";
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline json load_json(const std::string& path) {
    return json::parse(read_text_file(path));
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace lcf
