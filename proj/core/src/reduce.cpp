#include <cmath>
#include <map>

#include "vhc/model.hpp"

namespace vhc {

ReducedDynamics reduce(const FullModel& m) {
    const int n = m.n();
    std::map<std::string, ExprPtr> on_sigma;
    for (int i = 0; i < n; ++i) on_sigma[m.qvars()[i]] = m.sigma()[i];
    auto sub = [&](const ExprPtr& e) { return substitute(e, on_sigma); };

    std::vector<ExprPtr> sp(n), spp(n), bp(n);
    for (int i = 0; i < n; ++i) {
        sp[i] = differentiate(m.sigma()[i], "s");
        spp[i] = differentiate(sp[i], "s");
        bp[i] = sub(m.Bperp()[i]);
    }

    ExprPtr den = make_num(0);
    ExprPtr num1 = make_num(0);
    ExprPtr num2 = make_num(0);
    for (int i = 0; i < n; ++i) {
        ExprPtr row_sp = make_num(0);   // (D sigma')_i
        ExprPtr row_spp = make_num(0);  // (D sigma'')_i
        for (int j = 0; j < n; ++j) {
            ExprPtr dij = sub(m.D()[i][j]);
            row_sp = row_sp + dij * sp[j];
            row_spp = row_spp + dij * spp[j];
        }
        den = den + bp[i] * row_sp;
        num1 = num1 + bp[i] * sub(differentiate(m.P(), m.qvars()[i]));

        // sigma'^T Q_i sigma', (Q_i)_jk = 1/2 (dD_ij/dq_k + dD_ik/dq_j - dD_kj/dq_i)
        ExprPtr quad = make_num(0);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                ExprPtr qijk = make_num(0.5) * (sub(m.dD(i, j, k)) + sub(m.dD(i, k, j)) -
                                                sub(m.dD(k, j, i)));
                quad = quad + qijk * sp[j] * sp[k];
            }
        }
        num2 = num2 + bp[i] * (row_spp + quad);
    }

    // singular-reduction check: Bperp D sigma' must not vanish along sigma
    {
        CompiledExpr cden(den, std::vector<std::string>{"s"});
        const int G = 512;
        const double span = m.sample_span();
        double max_abs = 0;
        for (int g = 0; g <= G; ++g) max_abs = std::max(max_abs, std::fabs(cden(span * g / G)));
        for (int g = 0; g <= G; ++g) {
            double v = std::fabs(cden(span * g / G));
            if (!(v > 1e-9 * std::max(1.0, max_abs)))
                throw NumericalError(
                    "singular reduction: Bperp D sigma' vanishes on the sample grid (VHC not "
                    "regular)");
        }
    }

    ExprPtr psi1 = make_neg(num1 / den);
    ExprPtr psi2 = make_neg(num2 / den);
    return make_reduced(ScalarFunction::from_expr(psi1, "s"), ScalarFunction::from_expr(psi2, "s"),
                        m.topology(), m.period());
}

}  // namespace vhc
