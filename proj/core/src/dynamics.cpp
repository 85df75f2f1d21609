#include "vhc/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "vhc/classify.hpp"
#include "vhc/grid.hpp"
#include "vhc/ode.hpp"
#include "vhc/quadrature.hpp"

namespace vhc {

int Trajectory::winding(std::size_t i) const {
    if (topology != Topology::Circle) return 0;
    return static_cast<int>(std::floor(samples[i].x / period));
}

double Trajectory::s(std::size_t i) const {
    return topology == Topology::Circle ? wrap_mod(samples[i].x, period) : samples[i].x;
}

std::string to_string(OrbitTag t) {
    switch (t) {
        case OrbitTag::Rotation: return "rotation";
        case OrbitTag::Oscillation: return "oscillation";
        case OrbitTag::Helix: return "helix";
        case OrbitTag::Equilibrium: return "equilibrium";
        case OrbitTag::LimitCycleConvergent: return "limit_cycle_convergent";
        case OrbitTag::Unclassified: return "unclassified";
    }
    return "?";
}

Trajectory integrate(const ReducedDynamics& rd, double x0, double xdot0, double horizon,
                     double rtol, double atol, int min_samples) {
    if (!(horizon > 0)) throw NumericalError("integrate requires a positive horizon");
    Trajectory traj;
    traj.topology = rd.topology;
    traj.period = rd.period;
    traj.rtol = rtol;
    traj.atol = atol;

    auto rhs = [&rd](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = rd.psi1_lift(y[0]) + rd.psi2_lift(y[0]) * y[1] * y[1];
    };
    auto accel = [&rd](double x, double xd) {
        return rd.psi1_lift(x) + rd.psi2_lift(x) * xd * xd;
    };

    const double dt_base = horizon / min_samples;
    const double dx_cap =
        rd.topology == Topology::Circle ? rd.period / 4.0 : std::numeric_limits<double>::infinity();

    std::vector<double> y{x0, xdot0};
    traj.samples.push_back({0.0, x0, xdot0, accel(x0, xdot0)});

    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = atol;

    auto on_step = [&](const DenseStep& dense) {
        // emit samples on the base time grid, subdividing inside the step so
        // consecutive samples differ in x by < period/4 (also across step
        // boundaries, via the close-out at t1)
        double out[2];
        auto emit_at = [&](double target, auto&& self) -> void {
            dense.eval(target, out);
            double last_x = traj.samples.back().x;
            double last_t = traj.samples.back().t;
            if (std::fabs(out[0] - last_x) >= dx_cap && target - last_t > 1e-12) {
                double lo = std::max(last_t, dense.t0());
                double mid = 0.5 * (lo + target);
                if (mid > lo && mid < target) {
                    self(mid, self);
                    self(target, self);
                    return;
                }
            }
            dense.eval(target, out);
            traj.samples.push_back({target, out[0], out[1], accel(out[0], out[1])});
        };
        double last_t = traj.samples.back().t;
        while (last_t + dt_base <= dense.t1() + 1e-15) {
            double target = std::max(last_t + dt_base, dense.t0());
            emit_at(target, emit_at);
            last_t = traj.samples.back().t;
        }
        if (std::isfinite(dx_cap)) {
            dense.eval(dense.t1(), out);
            if (std::fabs(out[0] - traj.samples.back().x) >= dx_cap &&
                dense.t1() - traj.samples.back().t > 1e-12)
                emit_at(dense.t1(), emit_at);
        }
        return true;
    };

    OdeStatus st = dopri5(rhs, std::span<double>(y), 0.0, horizon, opt, on_step);
    double t_end = traj.samples.back().t;
    if (st == OdeStatus::Done && horizon - t_end > 1e-12) {
        traj.samples.push_back({horizon, y[0], y[1], accel(y[0], y[1])});
    }
    traj.termination = st == OdeStatus::Done ? "horizon" : "step_underflow";
    return traj;
}

namespace {

double wrap_half(double dx, double period) {
    double r = wrap_mod(dx, period);
    if (r > 0.5 * period) r -= period;
    return r;
}

double hermite(double p0, double m0, double p1, double m1, double dt, double u) {
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * dt * m0 + (-2 * u3 + 3 * u2) * p1 +
           (u3 - u2) * dt * m1;
}

double hermite_dt(double p0, double m0, double p1, double m1, double dt, double u) {
    double u2 = u * u;
    return ((6 * u2 - 6 * u) * p0 + (3 * u2 - 4 * u + 1) * dt * m0 + (-6 * u2 + 6 * u) * p1 +
            (3 * u2 - 2 * u) * dt * m1) /
           dt;
}

struct LinFit {
    double slope = 0, intercept = 0, r2 = 0;
};

LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinFit f;
    const std::size_t n = xs.size();
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double d = n * sxx - sx * sx;
    if (d == 0) return f;
    f.slope = (n * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - (f.intercept + f.slope * xs[i]);
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

OrbitClass classify_orbit(const Trajectory& traj, const OrbitThresholds& th) {
    OrbitClass oc;
    const auto& ss = traj.samples;
    if (ss.size() < 8) return oc;
    const double T = traj.period;
    const bool circle = traj.topology == Topology::Circle;
    const double x0 = ss.front().x;
    const double xd0 = ss.front().xdot;

    oc.diag.escape_threshold = th.escape_factor * std::max(1.0, std::fabs(xd0));
    oc.diag.terminal_speed = std::fabs(ss.back().xdot);

    // (0) equilibrium
    double sup_rate = 0;
    for (const auto& p : ss) sup_rate = std::max(sup_rate, std::hypot(p.xdot, p.xddot));
    if (sup_rate < th.eps_eq) {
        oc.tag = OrbitTag::Equilibrium;
        return oc;
    }

    auto dist_to_start = [&](double x, double xd) {
        double dx = circle ? wrap_half(x - x0, T) : x - x0;
        return std::hypot(dx, xd - xd0);
    };

    auto sign_changes_until = [&](std::size_t end) {
        int changes = 0;
        double prev = ss[0].xdot;
        for (std::size_t i = 1; i <= end && i < ss.size(); ++i) {
            double cur = ss[i].xdot;
            if (prev != 0 && cur != 0 && std::signbit(prev) != std::signbit(cur)) ++changes;
            if (cur != 0) prev = cur;
        }
        return changes;
    };

    // (1)/(2) Poincare-style closure: local minima of the distance to the
    // initial state after the orbit has first moved away.
    const double arm_level = 10.0 * th.eps_close;
    bool armed = false;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < ss.size(); ++i) {
        double dprev = dist_to_start(ss[i - 1].x, ss[i - 1].xdot);
        double d = dist_to_start(ss[i].x, ss[i].xdot);
        double dnext = dist_to_start(ss[i + 1].x, ss[i + 1].xdot);
        if (!armed) {
            if (d > arm_level) armed = true;
            continue;
        }
        if (d <= dprev && d <= dnext) {
            // parabolic refinement of the squared distance in t
            double t0 = ss[i - 1].t, t1 = ss[i].t, t2 = ss[i + 1].t;
            double f0 = dprev * dprev, f1 = d * d, f2 = dnext * dnext;
            double denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
            double tstar = t1, fstar = f1;
            if (denom != 0) {
                double a = (t2 * (f1 - f0) + t1 * (f0 - f2) + t0 * (f2 - f1)) / denom;
                double b = (t2 * t2 * (f0 - f1) + t1 * t1 * (f2 - f0) + t0 * t0 * (f1 - f2)) / denom;
                if (a > 0) {
                    tstar = -b / (2 * a);
                    if (tstar >= t0 && tstar <= t2) {
                        double c = f1 - a * t1 * t1 - b * t1;
                        fstar = std::max(0.0, a * tstar * tstar + b * tstar + c);
                    } else {
                        tstar = t1;
                    }
                }
            }
            double dstar = std::sqrt(fstar);
            best_d = std::min(best_d, dstar);
            if (dstar < th.eps_close) {
                // linear interpolation of x at tstar for the winding count
                double u = (t2 - t1) > 0 && tstar > t1 ? (tstar - t1) / (t2 - t1) : 0.0;
                double xstar = ss[i].x + u * (ss[i + 1].x - ss[i].x);
                int winding = circle ? static_cast<int>(std::lround((xstar - x0) / T)) : 0;
                int changes = sign_changes_until(i);
                oc.diag.closure_error = dstar;
                oc.diag.net_winding = winding;
                oc.diag.sign_changes = changes;
                oc.diag.return_time = tstar;
                if (winding == 0 && changes >= 2) {
                    oc.tag = OrbitTag::Oscillation;
                    return oc;
                }
                if (std::abs(winding) == 1 && changes == 0) {
                    oc.tag = OrbitTag::Rotation;
                    return oc;
                }
                // a closure that fits neither rule: keep scanning
            }
        }
    }
    if (oc.diag.closure_error < 0 && std::isfinite(best_d)) oc.diag.closure_error = best_d;
    oc.diag.sign_changes = sign_changes_until(ss.size() - 1);

    // (2b) direction-matched section crossings converging to a closed orbit
    // away from the initial state. Crossing states come from cubic Hermite
    // interpolation (xdot is the derivative of x, xddot of xdot), keeping the
    // crossing velocities accurate to O(dt^4).
    std::vector<double> cross_sdot, cross_t;
    if (circle) {
        for (std::size_t i = 1; i < ss.size(); ++i) {
            double a = (ss[i - 1].x - x0) / T;
            double b = (ss[i].x - x0) / T;
            double fa = std::floor(a), fb = std::floor(b);
            if (fa == fb) continue;
            // crossing of an integer level between the samples
            double level = x0 + T * (b > a ? std::ceil(a) : std::floor(a));
            double dt = ss[i].t - ss[i - 1].t;
            double u = (level - ss[i - 1].x) / (ss[i].x - ss[i - 1].x);
            if (!(u >= 0 && u <= 1) || dt <= 0) continue;
            for (int it = 0; it < 3; ++it) {  // Newton on the Hermite x(u)
                double f = hermite(ss[i - 1].x, ss[i - 1].xdot, ss[i].x, ss[i].xdot, dt, u) - level;
                double df = hermite_dt(ss[i - 1].x, ss[i - 1].xdot, ss[i].x, ss[i].xdot, dt, u) * dt;
                if (df == 0) break;
                double nu_ = u - f / df;
                if (nu_ < 0 || nu_ > 1) break;
                u = nu_;
            }
            double sd = hermite(ss[i - 1].xdot, ss[i - 1].xddot, ss[i].xdot, ss[i].xddot, dt, u);
            double tt = ss[i - 1].t + u * dt;
            if (sd * (b - a) > 0 || sd == 0) {  // direction of travel matches sdot sign
                cross_sdot.push_back(sd);
                cross_t.push_back(tt);
            }
        }
        oc.diag.section_crossings = static_cast<int>(cross_sdot.size());
        if (cross_sdot.size() >= 4) {
            std::vector<double> gaps;
            for (std::size_t i = 1; i < cross_sdot.size(); ++i)
                gaps.push_back(std::fabs(cross_sdot[i] - cross_sdot[i - 1]));
            oc.diag.crossing_gap_first = gaps.front();
            oc.diag.crossing_gap_last = gaps.back();
            // convergence signature: the crossing gaps start above eps_close
            // (a genuine transient), fall below it, and stay there
            std::size_t settle = gaps.size();
            for (std::size_t i = 0; i < gaps.size(); ++i) {
                if (gaps[i] < th.eps_close) {
                    settle = i;
                    break;
                }
            }
            bool converging = settle > 0 && settle < gaps.size() &&
                              gaps.front() >= 2.0 * th.eps_close;
            for (std::size_t i = settle; i < gaps.size() && converging; ++i)
                if (gaps[i] >= th.eps_close) converging = false;
            double final_dist = dist_to_start(ss.back().x, ss.back().xdot);
            if (converging && final_dist > th.eps_close) {
                oc.tag = OrbitTag::LimitCycleConvergent;
                return oc;
            }
        }
    }

    // (3) helix: unbounded speed of constant sign. On the cylinder the
    // speed-up shows as monotonically shrinking revolution durations (robust
    // where samples alias the within-revolution speed profile); on the line
    // |xdot| itself must be non-decreasing over the tail.
    {
        std::size_t tail = ss.size() / 2;
        bool const_sign = true;
        double s0sign = ss[tail].xdot;
        for (std::size_t i = tail; i < ss.size(); ++i) {
            if (ss[i].xdot == 0 || std::signbit(ss[i].xdot) != std::signbit(s0sign)) {
                const_sign = false;
                break;
            }
        }
        bool speeding_up = false;
        if (circle && cross_t.size() >= 4) {
            std::vector<double> intervals;
            for (std::size_t i = 1; i < cross_t.size(); ++i)
                intervals.push_back(cross_t[i] - cross_t[i - 1]);
            std::size_t m = std::min<std::size_t>(8, intervals.size());
            speeding_up = true;
            for (std::size_t i = intervals.size() - m + 1; i < intervals.size(); ++i)
                if (intervals[i] > intervals[i - 1] * (1.0 + 1e-6)) speeding_up = false;
            if (intervals.back() >= 0.95 * intervals.front()) speeding_up = false;
        } else if (!circle) {
            speeding_up = true;
            for (std::size_t i = tail + 1; i < ss.size(); ++i)
                if (std::fabs(ss[i].xdot) < std::fabs(ss[i - 1].xdot) * (1.0 - 1e-9))
                    speeding_up = false;
        }
        if (const_sign && speeding_up && oc.diag.terminal_speed > oc.diag.escape_threshold) {
            oc.tag = OrbitTag::Helix;
            return oc;
        }
    }

    oc.tag = OrbitTag::Unclassified;
    return oc;
}

LimitCycleResult limit_cycle(const ReducedDynamics& rd, const VirtualPair& vp, double eps_M) {
    if (rd.topology != Topology::Circle)
        throw NumericalError("limit_cycle requires circle topology");
    if (!limit_cycle_hypotheses(rd, vp))
        throw NumericalError("limit cycle hypotheses not met (Psi1 sign / int Psi2 sign)");
    if (std::fabs(vp.MT() - 1.0) <= eps_M)
        throw NumericalError("limit cycle requires |M(T)-1| > eps_M");

    const double T = rd.period;
    const int N = vp.grid_size();
    const double h = T / N;
    const double sgn_psi1 = vp.psi1(0.0) > 0 ? 1.0 : -1.0;

    LimitCycleResult res;
    res.nu.resize(N + 1);
    std::vector<double> nu_core(N);
    for (int k = 0; k <= N; ++k) {
        double x = k * h;
        double M = vp.grid_M()[static_cast<std::size_t>(k)];
        // [V(x+T) - V(x)]/M(x) evaluated as -int_x^{x+T} Psi1 M / M(x):
        // the ratio form stays relatively accurate even when M spans many
        // orders of magnitude over one period (the direct difference of V's
        // cancels catastrophically there)
        auto integrand = [&](double tau) { return vp.psi1(tau) * vp.eval_M(tau); };
        double tol = vp.quad_tol() * M * std::max(1.0, vp.MT()) *
                     std::max(1.0, T * std::fabs(vp.psi1(x)));
        double J = adaptive_simpson(integrand, x, x + T, tol) / M;
        double radicand = 2.0 * J / (vp.MT() - 1.0);
        if (radicand < 0)
            throw NumericalError("limit cycle radicand negative at grid point (inconsistent inputs)");
        res.nu[k] = sgn_psi1 * std::sqrt(radicand);
        if (k < N) nu_core[k] = res.nu[k];
    }

    std::vector<double> nu_prime = periodic_derivative6(nu_core, T, 8);
    res.residual_sup = 0;
    for (int k = 0; k < N; ++k) {
        double x = k * h;
        double r = nu_prime[k] * nu_core[k] - vp.psi1(x) - vp.psi2(x) * nu_core[k] * nu_core[k];
        res.residual_sup = std::max(res.residual_sup, std::fabs(r));
    }

    // decay rate of a transient started off the cycle. The pointwise
    // distance |sdot - nu(s)| carries a periodic modulation on top of the
    // exponential envelope, so ln d is averaged over one revolution before
    // the log-linear fit (envelope extraction).
    double nu0 = res.nu[0];
    auto nu_at = [&](double x) { return interp_periodic(nu_core, T, x); };
    double nu_mean = 0;
    for (double v : nu_core) nu_mean += std::fabs(v);
    nu_mean /= static_cast<double>(N);
    const double t_rev = T / std::max(nu_mean, 1e-6);
    Trajectory tr = integrate(rd, 0.0, 0.5 * nu0, 200.0, 1e-12, 1e-14, 16384);

    const auto& ss = tr.samples;
    std::vector<double> lnd(ss.size());
    for (std::size_t i = 0; i < ss.size(); ++i) {
        double d = std::fabs(ss[i].xdot - nu_at(ss[i].x));
        lnd[i] = std::log(std::max(d, 1e-300));
    }
    // envelope: moving maximum of ln d over one revolution (robust against
    // the periodic modulation and the sign changes of sdot - nu(s))
    const double dt = ss.size() > 1 ? ss.back().t / static_cast<double>(ss.size() - 1) : 1.0;
    const std::size_t w = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(t_rev / dt)));
    std::vector<double> ts, env;
    if (ss.size() > w + 2) {
        for (std::size_t i = 0; i + w <= ss.size(); ++i) {
            double mx = lnd[i];
            for (std::size_t j = i + 1; j < i + w; ++j) mx = std::max(mx, lnd[j]);
            ts.push_back(ss[i].t);
            env.push_back(mx);
        }
    }
    // fit between the onset of the asymptotic regime (a fraction of the
    // cycle's own speed scale) and two ln-units above the numerical floor
    // (nu itself is only accurate to ~quad_tol relative, so the distance
    // bottoms out well above machine precision)
    const double hi = std::log(std::max(0.15 * nu_mean, 1e-4));
    double floor_val = env.empty() ? 0.0 : env.front();
    for (double v : env) floor_val = std::min(floor_val, v);
    const double lo_fit = std::max(floor_val + 2.0, std::log(3e-8));
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (env[i] <= lo_fit) break;
        if (env[i] < hi) {
            fx.push_back(ts[i]);
            fy.push_back(env[i]);
        }
    }
    LinFit fit = linear_fit(fx, fy);
    res.rate_estimate = -fit.slope;
    res.fit_r2 = fit.r2;
    return res;
}

std::vector<PortraitEntry> portrait(const ReducedDynamics& rd, double s_lo, double s_hi,
                                    double sdot_lo, double sdot_hi, int k, int m, double horizon,
                                    double rtol, double atol, const OrbitThresholds& th) {
    if (k < 1 || m < 1) throw NumericalError("portrait grid must be nonempty");
    std::vector<PortraitEntry> out(static_cast<std::size_t>(k) * m);
    auto coord = [](double lo, double hi, int i, int n) {
        return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
    };
    std::atomic<int> next{0};
    const int total = k * m;
    auto worker = [&]() {
        for (;;) {
            int idx = next.fetch_add(1);
            if (idx >= total) return;
            int i = idx / m, j = idx % m;
            PortraitEntry& e = out[static_cast<std::size_t>(idx)];
            e.s0 = coord(s_lo, s_hi, i, k);
            e.sdot0 = coord(sdot_lo, sdot_hi, j, m);
            try {
                e.traj = integrate(rd, e.s0, e.sdot0, horizon, rtol, atol);
                e.verdict = classify_orbit(e.traj, th);
            } catch (const std::exception& ex) {
                e.error = ex.what();
            }
        }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned threads = std::min<unsigned>(hw, static_cast<unsigned>(total));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace vhc
