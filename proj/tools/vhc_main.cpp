#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "vhc/classify.hpp"
#include "vhc/dynamics.hpp"
#include "vhc/grid.hpp"
#include "vhc/lagrangian.hpp"
#include "vhc/model_file.hpp"
#include "vhc/report.hpp"
#include "vhc/svg.hpp"
#include "vhc/xform.hpp"

namespace {

using namespace vhc;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CommonArgs {
    std::string model_path;
    std::optional<int> N;
    std::optional<double> quad_tol, eps_M, eps_V, rtol, atol, k1, k2;

    void attach(CLI::App* cmd) {
        cmd->add_option("model", model_path, "model file (see docs/model-format.md)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--N", N, "virtual-pair grid size (default 2048, or [options] in the model)");
        cmd->add_option("--quad-tol", quad_tol, "quadrature absolute tolerance (default 1e-10)");
        cmd->add_option("--eps-M", eps_M, "periodicity tolerance on M(T) (default 1e-6)");
        cmd->add_option("--eps-V", eps_V, "periodicity tolerance on V(T), relative to max(1, max|V|) (default 1e-6)");
        cmd->add_option("--rtol", rtol, "integrator relative tolerance (default 1e-9)");
        cmd->add_option("--atol", atol, "integrator absolute tolerance (default 1e-11)");
        cmd->add_option("--k1", k1, "VHC feedback gain k1 (default 4)");
        cmd->add_option("--k2", k2, "VHC feedback gain k2 (default 4)");
    }

    ModelFile load() const {
        ModelFile mf = load_model_file(model_path);
        if (N) mf.options.N = *N;
        if (quad_tol) mf.options.quad_tol = *quad_tol;
        if (eps_M) mf.options.eps_M = *eps_M;
        if (eps_V) mf.options.eps_V = *eps_V;
        if (rtol) mf.options.rtol = *rtol;
        if (atol) mf.options.atol = *atol;
        if (k1) mf.options.k1 = *k1;
        if (k2) mf.options.k2 = *k2;
        return mf;
    }
};

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw ModelError("cannot write output file '" + path + "'");
    return file;
}

VirtualPair build_vp(const ModelFile& mf, const ReducedDynamics& rd) {
    return virtual_pair(rd, mf.options.N, mf.options.quad_tol, mf.options.line_domain);
}

const char* verdict_color(OrbitTag t) {
    switch (t) {
        case OrbitTag::Rotation: return "#1f77b4";
        case OrbitTag::Oscillation: return "#2ca02c";
        case OrbitTag::Helix: return "#d62728";
        case OrbitTag::Equilibrium: return "#9467bd";
        case OrbitTag::LimitCycleConvergent: return "#ff7f0e";
        case OrbitTag::Unclassified: return "#9a9a9a";
    }
    return "#000000";
}

Json full_report(const ModelFile& mf, const std::string& path, const ReducedDynamics& rd,
                 const VirtualPair& vp, const Classification& cls) {
    Json j = report_header(mf, path);
    j["topology"] = rd.topology == Topology::Circle ? "circle" : "line";
    if (rd.topology == Topology::Circle) j["period"] = rd.period;
    j["classification"] = classification_block(cls);
    if (cls.kind != StructureKind::NonLagrangian) {
        j["lagrangian"] = lagrangian_block(synthesize(cls, vp));
    } else {
        j["lagrangian"] = nullptr;
    }
    if (rd.topology == Topology::Circle) {
        Json lc;
        lc["hypotheses"] = cls.limit_cycle_hypotheses;
        if (cls.limit_cycle_hypotheses && std::fabs(cls.MT - 1.0) > cls.eps_M) {
            LimitCycleResult r = limit_cycle(rd, vp, cls.eps_M);
            lc.update(limit_cycle_block(r));
        }
        j["limit_cycle"] = lc;
    }
    return j;
}

int cmd_classify(const CommonArgs& args, const std::string& out_path) {
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    VirtualPair vp = build_vp(mf, rd);
    Classification cls = classify(vp, rd.topology, mf.options.eps_M, mf.options.eps_V);
    Json j = full_report(mf, args.model_path, rd, vp, cls);

    std::ofstream file;
    open_out(file, out_path) << j.dump(2) << "\n";
    std::cerr << "kind: " << to_string(cls.kind) << "  M(T)=" << cls.MT << "  V(T)=" << cls.VT
              << "\n";
    if (rd.topology == Topology::Circle)
        std::cerr << "limit-cycle hypotheses: " << (cls.limit_cycle_hypotheses ? "true" : "false")
                  << "\n";
    return 0;
}

int cmd_reduce(const CommonArgs& args, const std::string& out_path, int grid) {
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    if (rd.psi1.expr()) std::cerr << "psi1 = " << to_string(rd.psi1.expr()) << "\n";
    if (rd.psi2.expr()) std::cerr << "psi2 = " << to_string(rd.psi2.expr()) << "\n";
    double span = rd.topology == Topology::Circle ? rd.period : mf.options.line_domain;
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "s,psi1,psi2\n";
    for (int g = 0; g < grid; ++g) {
        double s = span * g / grid;
        out << num(s) << ',' << num(rd.psi1_lift(s)) << ',' << num(rd.psi2_lift(s)) << "\n";
    }
    return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& out_path, const std::string& json_path,
                 double x0, double v0, double horizon, const OrbitThresholds& th) {
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    VirtualPair vp = build_vp(mf, rd);
    Trajectory tr = integrate(rd, x0, v0, horizon, mf.options.rtol, mf.options.atol);
    OrbitClass oc = classify_orbit(tr, th);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "t,s,sdot,x,xdot,E0\n";
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        const auto& p = tr.samples[i];
        out << num(p.t) << ',' << num(tr.s(i)) << ',' << num(p.xdot) << ',' << num(p.x) << ','
            << num(p.xdot) << ',' << num(energy(vp, p.x, p.xdot)) << "\n";
    }
    std::cerr << "orbit: " << to_string(oc.tag) << " (termination: " << tr.termination << ")\n";
    if (!json_path.empty()) {
        Json j = report_header(mf, args.model_path);
        j["trajectory"] = Json{{"x0", x0},
                               {"xdot0", v0},
                               {"horizon", horizon},
                               {"samples", tr.samples.size()},
                               {"termination", tr.termination}};
        j["orbit"] = orbit_block(oc);
        std::ofstream jf(json_path);
        if (!jf) throw ModelError("cannot write report '" + json_path + "'");
        jf << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_portrait(const CommonArgs& args, const std::string& out_path, const std::string& svg_path,
                 int gk, int gm, double horizon, std::vector<double> srange,
                 std::vector<double> sdotrange, const OrbitThresholds& th) {
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    double s_lo = 0, s_hi = rd.topology == Topology::Circle ? rd.period : mf.options.line_domain;
    if (srange.size() == 2) {
        s_lo = srange[0];
        s_hi = srange[1];
    } else if (rd.topology == Topology::Circle) {
        s_hi = rd.period * (1.0 - 1.0 / gk);  // avoid duplicating the seam column
    }
    double sd_lo = -3, sd_hi = 3;
    if (sdotrange.size() == 2) {
        sd_lo = sdotrange[0];
        sd_hi = sdotrange[1];
    }

    auto entries = portrait(rd, s_lo, s_hi, sd_lo, sd_hi, gk, gm, horizon, mf.options.rtol,
                            mf.options.atol, th);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "i,j,s0,sdot0,verdict,net_winding,sign_changes,closure_error,terminal_speed,error\n";
    for (int i = 0; i < gk; ++i) {
        for (int j = 0; j < gm; ++j) {
            const auto& e = entries[static_cast<std::size_t>(i) * gm + j];
            out << i << ',' << j << ',' << num(e.s0) << ',' << num(e.sdot0) << ','
                << (e.error.empty() ? to_string(e.verdict.tag) : "error") << ','
                << e.verdict.diag.net_winding << ',' << e.verdict.diag.sign_changes << ','
                << num(e.verdict.diag.closure_error) << ',' << num(e.verdict.diag.terminal_speed)
                << ',' << (e.error.empty() ? "" : e.error) << "\n";
        }
    }

    if (!svg_path.empty()) {
        double chart_hi = rd.topology == Topology::Circle ? rd.period : s_hi;
        double chart_lo = rd.topology == Topology::Circle ? 0.0 : s_lo;
        double pad = 0.15 * (sd_hi - sd_lo);
        SvgPlot plot(chart_lo, chart_hi, sd_lo - pad, sd_hi + pad);
        plot.set_title("phase portrait");
        for (const auto& e : entries) {
            if (!e.error.empty() || e.traj.samples.empty()) continue;
            std::vector<double> xs, ys;
            xs.reserve(e.traj.samples.size());
            ys.reserve(e.traj.samples.size());
            for (const auto& p : e.traj.samples) {
                xs.push_back(p.x);
                ys.push_back(p.xdot);
            }
            if (rd.topology == Topology::Circle)
                plot.add_cylinder_curve(xs, ys, rd.period, verdict_color(e.verdict.tag), 0.8);
            else
                plot.add_curve(xs, ys, verdict_color(e.verdict.tag), 0.8);
        }
        // overlay the computed limit cycle when the non-Lagrangian hypotheses hold
        if (rd.topology == Topology::Circle) {
            VirtualPair vp = build_vp(mf, rd);
            Classification cls = classify(vp, rd.topology, mf.options.eps_M, mf.options.eps_V);
            if (cls.kind == StructureKind::NonLagrangian && cls.limit_cycle_hypotheses) {
                LimitCycleResult lc = limit_cycle(rd, vp, mf.options.eps_M);
                std::vector<double> xs(lc.nu.size()), ys = lc.nu;
                for (std::size_t k = 0; k < xs.size(); ++k)
                    xs[k] = rd.period * static_cast<double>(k) / (xs.size() - 1);
                plot.add_curve(xs, ys, "#000000", 2.0, "6,4");
            }
        }
        plot.add_legend({{"rotation", verdict_color(OrbitTag::Rotation)},
                         {"oscillation", verdict_color(OrbitTag::Oscillation)},
                         {"helix", verdict_color(OrbitTag::Helix)},
                         {"limit cycle", verdict_color(OrbitTag::LimitCycleConvergent)},
                         {"unclassified", verdict_color(OrbitTag::Unclassified)}});
        plot.write(svg_path);
        std::cerr << "wrote " << svg_path << "\n";
    }
    return 0;
}

int cmd_limit_cycle(const CommonArgs& args, const std::string& out_path,
                    const std::string& json_path) {
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    VirtualPair vp = build_vp(mf, rd);
    Classification cls = classify(vp, rd.topology, mf.options.eps_M, mf.options.eps_V);
    LimitCycleResult lc = limit_cycle(rd, vp, mf.options.eps_M);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "s,nu\n";
    for (std::size_t k = 0; k < lc.nu.size(); ++k) {
        double s = rd.period * static_cast<double>(k) / (lc.nu.size() - 1);
        out << num(s) << ',' << num(lc.nu[k]) << "\n";
    }
    std::cerr << "residual_sup=" << lc.residual_sup << " rate=" << lc.rate_estimate
              << " fit_r2=" << lc.fit_r2 << "\n";
    if (!json_path.empty()) {
        Json j = report_header(mf, args.model_path);
        j["classification"] = classification_block(cls);
        j["limit_cycle"] = limit_cycle_block(lc);
        j["limit_cycle"]["hypotheses"] = cls.limit_cycle_hypotheses;
        std::ofstream jf(json_path);
        if (!jf) throw ModelError("cannot write report '" + json_path + "'");
        jf << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_transform(const CommonArgs& args, const std::string& out_path, const std::string& phi_path,
                  bool to_conservative, double period2) {
    if (!to_conservative)
        throw ModelError("transform: only --to-conservative is available");
    ModelFile mf = args.load();
    ReducedDynamics rd = reduced_of(mf);
    VirtualPair vp = build_vp(mf, rd);
    double T2 = period2 > 0 ? period2 : rd.period;
    auto [rd2, d] = conservative_form(rd, vp, T2, mf.options.eps_M);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "theta,psi1,psi2\n";
    const int N = vp.grid_size();
    for (int k = 0; k <= N; ++k) {
        double theta = T2 * k / N;
        out << num(theta) << ',' << num(rd2.psi1_lift(theta)) << ',' << num(rd2.psi2_lift(theta))
            << "\n";
    }
    if (!phi_path.empty()) {
        std::ofstream pf(phi_path);
        if (!pf) throw ModelError("cannot write '" + phi_path + "'");
        pf << "x,phi,dphi\n";
        for (int k = 0; k <= N; ++k) {
            double x = rd.period * k / N;
            pf << num(x) << ',' << num(d.phi(x)) << ',' << num(d.dphi(x)) << "\n";
        }
    }
    std::cerr << "conservative form with period " << T2 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "vhc - Lagrangian structure of reduced dynamics under virtual holonomic constraints"};
    app.require_subcommand(1);

    CommonArgs a_classify, a_reduce, a_simulate, a_portrait, a_lc, a_transform;
    std::string out_classify, out_reduce, out_sim, json_sim, out_portrait, svg_portrait, out_lc,
        json_lc, out_tf, phi_tf;
    int reduce_grid = 200;
    double x0 = 0, v0 = 0, horizon = 50;
    int gk = 20, gm = 0;  // gm = 0: square grid
    double portrait_horizon = 100;
    std::vector<double> srange, sdotrange;
    bool to_conservative = false;
    double period2 = 0;
    OrbitThresholds th_sim, th_portrait;

    auto attach_thresholds = [](CLI::App* cmd, OrbitThresholds& th) {
        cmd->add_option("--eps-close", th.eps_close,
                        "closure tolerance on the cylinder for return detection (default 1e-3)");
        cmd->add_option("--eps-eq", th.eps_eq, "equilibrium threshold on ||(sdot, sddot)|| (default 1e-8)");
        cmd->add_option("--escape-factor", th.escape_factor,
                        "helix escape threshold factor over max(1, |sdot0|) (default 10)");
    };

    auto* c1 = app.add_subcommand("classify",
                                  "classify the reduced dynamics (mechanical / EL / SEL / "
                                  "non-Lagrangian) and report M(T), V(T), f0");
    a_classify.attach(c1);
    c1->add_option("--out", out_classify, "write the JSON report here instead of stdout");

    auto* c2 = app.add_subcommand("reduce", "print Psi1, Psi2 and a sampled grid CSV");
    a_reduce.attach(c2);
    c2->add_option("--out", out_reduce, "CSV output path (default stdout)");
    c2->add_option("--grid", reduce_grid, "number of sample rows (default 200)");

    auto* c3 = app.add_subcommand("simulate", "integrate the reduced dynamics from (x0, v0)");
    a_simulate.attach(c3);
    c3->add_option("--x0", x0, "initial position (lifted coordinate)")->required();
    c3->add_option("--v0", v0, "initial velocity")->required();
    c3->add_option("--horizon", horizon, "time horizon (default 50)");
    c3->add_option("--out", out_sim, "CSV output path (default stdout)");
    c3->add_option("--json", json_sim, "also write a JSON report here");
    attach_thresholds(c3, th_sim);

    auto* c4 = app.add_subcommand("portrait", "sweep a grid of initial conditions and classify orbits");
    a_portrait.attach(c4);
    c4->add_option("--grid", gk, "grid rows (s direction, default 20)");
    c4->add_option("--grid-sdot", gm, "grid columns (sdot direction, default: same as --grid)");
    c4->add_option("--horizon", portrait_horizon, "per-trajectory horizon (default 100)");
    c4->add_option("--srange", srange, "s range: lo hi (default [0, T))")->expected(2);
    c4->add_option("--sdotrange", sdotrange, "sdot range: lo hi (default [-3, 3])")->expected(2);
    c4->add_option("--svg", svg_portrait, "write an SVG phase portrait here");
    c4->add_option("--out", out_portrait, "verdict CSV path (default stdout)");
    attach_thresholds(c4, th_portrait);

    auto* c5 = app.add_subcommand("limit-cycle",
                                  "compute the limit cycle sdot = nu(s) of a non-Lagrangian system");
    a_lc.attach(c5);
    c5->add_option("--out", out_lc, "nu(s) CSV path (default stdout)");
    c5->add_option("--json", json_lc, "also write a JSON report here");

    auto* c6 = app.add_subcommand("transform", "reparametrize to the conservative normal form");
    a_transform.attach(c6);
    c6->add_flag("--to-conservative", to_conservative,
                 "build phi = lambda int sqrt(M) (requires periodic M)");
    c6->add_option("--period", period2, "target period T2 (default: source period)");
    c6->add_option("--out", out_tf, "transformed dynamics CSV path (default stdout)");
    c6->add_option("--phi-out", phi_tf, "write the phi grid CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c1->parsed()) return cmd_classify(a_classify, out_classify);
        if (c2->parsed()) return cmd_reduce(a_reduce, out_reduce, reduce_grid);
        if (c3->parsed())
            return cmd_simulate(a_simulate, out_sim, json_sim, x0, v0, horizon, th_sim);
        if (c4->parsed())
            return cmd_portrait(a_portrait, out_portrait, svg_portrait, gk, gm > 0 ? gm : gk,
                                portrait_horizon, srange, sdotrange, th_portrait);
        if (c5->parsed()) return cmd_limit_cycle(a_lc, out_lc, json_lc);
        if (c6->parsed()) return cmd_transform(a_transform, out_tf, phi_tf, to_conservative, period2);
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
