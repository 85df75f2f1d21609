#include "vhc/report.hpp"

namespace vhc {

Json report_header(const ModelFile& mf, const std::string& model_path) {
    Json j;
    j["schema"] = "vhc-report/1";
    j["model_file"] = model_path;
    j["model_kind"] = mf.is_full ? "full" : "reduced";
    Json echo = Json::object();
    for (const auto& [k, v] : mf.echo) echo[k] = v;
    j["model"] = echo;
    j["options"] = Json{{"N", mf.options.N},
                        {"quad_tol", mf.options.quad_tol},
                        {"eps_M", mf.options.eps_M},
                        {"eps_V", mf.options.eps_V},
                        {"rtol", mf.options.rtol},
                        {"atol", mf.options.atol},
                        {"k1", mf.options.k1},
                        {"k2", mf.options.k2}};
    return j;
}

Json classification_block(const Classification& cls) {
    return Json{{"kind", to_string(cls.kind)},
                {"MT", cls.MT},
                {"VT", cls.VT},
                {"eps_M", cls.eps_M},
                {"eps_V", cls.eps_V},
                {"scale", cls.scale},
                {"limit_cycle_hypotheses", cls.limit_cycle_hypotheses}};
}

Json lagrangian_block(const LagrangianHandle& h) {
    Json j;
    j["variant"] =
        h.variant() == LagrangianHandle::Variant::Mechanical ? "mechanical" : "singular_fresnel";
    if (h.variant() == LagrangianHandle::Variant::SingularFresnel) j["f0"] = h.f0();
    return j;
}

Json limit_cycle_block(const LimitCycleResult& lc) {
    return Json{{"residual_sup", lc.residual_sup},
                {"rate_estimate", lc.rate_estimate},
                {"fit_r2", lc.fit_r2}};
}

Json orbit_block(const OrbitClass& oc) {
    return Json{{"tag", to_string(oc.tag)},
                {"closure_error", oc.diag.closure_error},
                {"net_winding", oc.diag.net_winding},
                {"sign_changes", oc.diag.sign_changes},
                {"terminal_speed", oc.diag.terminal_speed},
                {"escape_threshold", oc.diag.escape_threshold},
                {"return_time", oc.diag.return_time},
                {"section_crossings", oc.diag.section_crossings}};
}

}  // namespace vhc
