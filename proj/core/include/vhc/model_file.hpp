#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vhc/model.hpp"
#include "vhc/reduced.hpp"

namespace vhc {

struct ModelOptions {
    int N = 2048;
    double quad_tol = 1e-10;
    double eps_M = 1e-6;
    double eps_V = 1e-6;
    double rtol = 1e-9;
    double atol = 1e-11;
    double k1 = 4.0;
    double k2 = 4.0;
    double line_domain = 6.283185307179586;
};

// Plain INI-style model description with quoted expressions. Exactly one of
// [reduced] or [full] must be present:
//
//   [reduced]                         [full]
//   psi1 = "sin(2*s)/(2+cos(s))"      n = 2
//   psi2 = "-sin(s)/(2+cos(s))"       D.1.1 = "1"      (i, j in 1..n)
//   topology = circle                 P = "-0.2/sqrt(q1^2+q2^2)"
//   period = 2*pi                     B.1.1 = "q1"     (j in 1..n-1)
//                                     Bperp.1 = "-q2"
//                                     h.1 = "sqrt(q1^2+q2^2)-1"
//                                     sigma.1 = "cos(s)"
//                                     topology = circle
//                                     period = 2*pi
//
// plus an optional [options] section (N, quad_tol, eps_M, eps_V, rtol, atol,
// k1, k2, line_domain). Numeric values accept expressions in pi and e.
// Lines starting with '#' or ';' are comments. See docs/model-format.md.
struct ModelFile {
    bool is_full = false;
    ReducedDynamics reduced;           // when !is_full
    std::shared_ptr<FullModel> full;   // when is_full
    ModelOptions options;
    std::vector<std::pair<std::string, std::string>> echo;  // raw entries, file order
};

ModelFile parse_model_text(const std::string& text, const std::string& origin = "<string>");
ModelFile load_model_file(const std::string& path);

// The reduced dynamics a model file denotes: the [reduced] section as-is, or
// reduce() of the validated [full] model.
ReducedDynamics reduced_of(const ModelFile& mf);

}  // namespace vhc
