#pragma once

#include <cstdint>
#include <vector>

#include "diskpatch/diagnostics.hpp"
#include "diskpatch/error.hpp"
#include "diskpatch/scenarios.hpp"
#include "diskpatch/state.hpp"

namespace diskpatch {

struct StepConfig {
    double dt = 1e-2;
    QuadratureSpec quad{};
    double h_min = 1e-4;
    double h_max = 5e-2;
    double curvature_refine = 0.1;
    // mirror patch 2 from patch 1 through x1 = c1 at every stage
    bool symmetry_axis = false;
    std::size_t max_nodes = 1u << 16;
};

// Throws Misuse unless 0 < h_min < h_max and dt > 0.
void check_step_config(const StepConfig& cfg);

// Per-node velocity gradients used for w. Only the action on tangent vectors is
// resolved: G = (du/ds) t^T, with du/ds from the periodic spline of the node
// velocities along the curve.
using GradientSamples = std::vector<std::vector<Mat2>>;

// Velocities and gradient samples at the nodes of a state (no time stepping).
void node_rates(const SimState& s, const StepConfig& cfg, std::vector<std::vector<Vec2>>& u, GradientSamples& g);

SimState step_rk4(const SimState& s, const StepConfig& cfg);

// dw/dt = G w per node with G frozen, classical RK4, then the normal part of w
// is removed (flagged through *flagged when above 1% of |w|).
TangentField evolve_tangent(const SimState& s, const GradientSamples& g, double dt, bool project = true,
                            bool* flagged = nullptr);

SimState redistribute(const SimState& s, const StepConfig& cfg);
SimState enforce_symmetry(const SimState& s);

// max over nodes of |node_j(patch 2) - mirror(node_{N-j}(patch 1))|; infinite if sizes differ
double mirror_asymmetry(const SimState& s);

struct RunOptions {
    double T = 1.0;
    std::int64_t diagnostics_every = 1;
    std::int64_t snapshot_every = 0;
    std::int64_t redistribute_every = 0;
    DiagnosticsOptions diag{};
    // envelope seeds a(0) = eps^10, b(0) = eps; 0 disables the tracker
    double envelope_eps = 0.0;
};

class RunSink {
public:
    virtual ~RunSink() = default;
    virtual void record(const DiagnosticsRecord&, const SimState&) {}
    virtual void snapshot(const SimState&) {}
    // last consistent state before the error
    virtual void failed(const SimState&, const Error&) {}
};

SimState initial_state(const ScenarioSpec& sc, const RunOptions& opt);
std::int64_t step_count(double T, double dt);

// Steps from s (at step s.step_index) to round(T/dt). A fresh start emits the
// initial record; a resumed one does not.
SimState run_from(SimState s, const StepConfig& cfg, const RunOptions& opt, RunSink& sink, bool resumed);
SimState run(const ScenarioSpec& sc, const StepConfig& cfg, const RunOptions& opt, RunSink& sink);

}  // namespace diskpatch
