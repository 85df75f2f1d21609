#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vhc/reduced.hpp"
#include "vhc/virtual_pair.hpp"

namespace vhc {

struct TrajectorySample {
    double t, x, xdot, xddot;
};

// A trajectory of the lifted system on the (x, xdot) plane. On the circle
// the cylinder projection is s = x mod T and the winding number of a sample
// is floor(x/T).
struct Trajectory {
    std::vector<TrajectorySample> samples;
    Topology topology = Topology::Line;
    double period = 0.0;
    double rtol = 0.0, atol = 0.0;
    std::string termination;  // "horizon" | "step_underflow"

    int winding(std::size_t i) const;
    double s(std::size_t i) const;  // cylinder chart value
};

// Adaptive DOPRI5 on the lift with dense output; at least `min_samples`
// samples, refined so that consecutive x differ by less than period/4.
// Near finite-time blowup the trajectory is truncated and the termination
// reason records it.
Trajectory integrate(const ReducedDynamics& rd, double x0, double xdot0, double horizon,
                     double rtol = 1e-9, double atol = 1e-11, int min_samples = 2048);

enum class OrbitTag { Rotation, Oscillation, Helix, Equilibrium, LimitCycleConvergent, Unclassified };

std::string to_string(OrbitTag t);

struct OrbitDiagnostics {
    double closure_error = -1.0;      // refined min distance to the initial state, -1 if never armed
    int net_winding = 0;              // at the detected return
    int sign_changes = 0;             // xdot sign changes up to the return (or over the whole run)
    double terminal_speed = 0.0;      // |xdot| at the end
    double escape_threshold = 0.0;
    double return_time = -1.0;
    int section_crossings = 0;        // direction-matched crossings of s = s0
    double crossing_gap_first = 0.0;  // |Delta sdot| between the first pair of crossings
    double crossing_gap_last = 0.0;   // ... and the last pair
};

struct OrbitThresholds {
    double eps_close = 1e-3;
    double eps_eq = 1e-8;
    double escape_factor = 10.0;
};

struct OrbitClass {
    OrbitTag tag = OrbitTag::Unclassified;
    OrbitDiagnostics diag;
};

// Decision rules, applied in order:
//  (0) sup ||(xdot, xddot)|| < eps_eq                      -> Equilibrium
//  (1) return within eps_close of the initial state on the cylinder,
//      net winding 0, >= 2 xdot sign changes               -> Oscillation
//  (2) such a return with |net winding| = 1 and xdot of constant sign
//                                                          -> Rotation
//  (2b) no return, but direction-matched section crossings converge
//       geometrically to below eps_close away from the initial state
//                                                          -> LimitCycleConvergent
//  (3) no return, terminal |xdot| beyond escape_factor*max(1,|xdot0|),
//      constant sign and non-decreasing |xdot| over the tail -> Helix
//  (4) otherwise                                           -> Unclassified
OrbitClass classify_orbit(const Trajectory& traj, const OrbitThresholds& th = {});

struct LimitCycleResult {
    std::vector<double> nu;   // nu(x_k) on the vp grid, x_k = k*T/N, k = 0..N
    double residual_sup = 0;  // sup |nu' nu - Psi1 - Psi2 nu^2| on the grid
    double rate_estimate = 0; // exponential decay rate of the transient
    double fit_r2 = 0;        // log-linear fit quality of the transient decay
};

// The closed orbit sdot = nu(s) of the non-Lagrangian case. Preconditions:
// limit_cycle_hypotheses true and |M(T)-1| > eps_M.
LimitCycleResult limit_cycle(const ReducedDynamics& rd, const VirtualPair& vp,
                             double eps_M = 1e-6);

struct PortraitEntry {
    double s0, sdot0;
    Trajectory traj;
    OrbitClass verdict;
    std::string error;  // per-trajectory failure, never aborts the sweep
};

// Integrates a k x m grid of initial conditions (parallelized; assembly
// order is deterministic, row-major by grid index).
std::vector<PortraitEntry> portrait(const ReducedDynamics& rd, double s_lo, double s_hi,
                                    double sdot_lo, double sdot_hi, int k, int m, double horizon,
                                    double rtol = 1e-9, double atol = 1e-11,
                                    const OrbitThresholds& th = {});

}  // namespace vhc
