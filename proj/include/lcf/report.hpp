#pragma once

#include <cmath>
#include <string>
#include <utility>

namespace lcf {

// Uniform result record for every inequality / property check in the library.
// Convention: margin is sign-normalized so that pass <=> margin >= -tol,
// regardless of which direction the underlying inequality points.
struct MarginReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tol = 1e-6;
    bool pass = false;
    bool equality_detected = false;
    std::string witness;
};

inline MarginReport make_margin_report(std::string name, double lhs, double rhs,
                                       double margin, double tol,
                                       double eq_tol = 1e-3,
                                       std::string witness = {}) {
    MarginReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = margin;
    r.tol = tol;
    r.pass = margin >= -tol;
    r.equality_detected = std::isfinite(margin) && std::fabs(margin) <= eq_tol;
    r.witness = std::move(witness);
    return r;
}

}  // namespace lcf
