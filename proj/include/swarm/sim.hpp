#ifndef SWARM_SIM_HPP
#define SWARM_SIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swarm/dfts.hpp"
#include "swarm/game.hpp"
#include "swarm/gr1spec.hpp"
#include "swarm/qp.hpp"
#include "swarm/synthesis.hpp"
#include "swarm/world.hpp"

namespace swarm {

struct SimConfig {
    double dt = 0.01;
    double t_ud = 4.0;
    int max_symbolic_steps = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

// Environment event source. Proposals are drawn per step (scripted overrides
// with inheritance, or seeded random falsification); the mission loop repairs
// any proposal that violates the assumptions before applying it.
class EnvSchedule {
public:
    enum class Mode { Scripted, Random };

    static EnvSchedule scripted(std::map<int, std::map<std::string, bool>> script);
    static EnvSchedule random(double falsify_prob, std::uint64_t seed);

    Mode mode() const { return mode_; }
    EnvValuation propose(int step, const std::vector<std::string>& env_vars,
                         const EnvValuation& previous) const;

private:
    Mode mode_ = Mode::Random;
    std::map<int, std::map<std::string, bool>> script_;
    double falsify_prob_ = 0.0;
    std::uint64_t seed_ = 0;
};

// Random schedule whose realized sequences always satisfy env_safety (the
// mission repairs violating proposals); reproducible from the seed.
EnvSchedule generate_schedule(const Gr1Spec& spec, std::uint64_t seed, int length,
                              double falsify_prob);

// Parses "step=K var=true|false" lines into a scripted schedule.
EnvSchedule load_battery_script(const std::string& path, const std::vector<std::string>& env_vars);

// Smallest valuation (by env bitmask) satisfying env_init; prefers the proposal.
EnvValuation enforce_env_init(const Gr1Spec& spec, const EnvValuation& proposal);

// Replaces a proposal that violates env_safety (given the current labels and
// valuation) by the first satisfying valuation in bitmask order.
EnvValuation enforce_env_safety(const Gr1Spec& spec, const std::set<std::string>& current_labels,
                                const EnvValuation& current, const EnvValuation& proposal);

struct Sample {
    double t;
    SwarmState state;
    ControlInput u;
    Cell target_cell;
    std::string formation_id;
    double delta1;
    double delta2;
    QpStatus qp_status;
};

struct SymbolicRecord {
    int step;
    int state;       // DFTS state id
    EnvValuation env;
    int action;      // -1 on the final record
    double reach_time = 0.0;
};

struct TrajectoryLog {
    std::vector<Sample> samples;
    std::vector<SymbolicRecord> symbolic_trace;
    std::vector<std::set<std::string>> output_word;
};

struct MonitorReport {
    double min_pairwise_distance = std::numeric_limits<double>::infinity();
    double min_obstacle_margin = std::numeric_limits<double>::infinity();
    std::vector<double> reach_times;
    int reach_deadline_violations = 0;
    int collision_violations = 0;
    int obstacle_violations = 0;
    int sys_safety_violations = 0;
    std::vector<std::vector<int>> goal_visit_indices;  // per system justice goal
    int delta1_positive_steps = 0;
    int centroid_obstacle_entries = 0;  // transient centroid-cell occupancy, informational
    bool aborted = false;
    std::string abort_reason;

    bool clean() const {
        return !aborted && reach_deadline_violations == 0 && collision_violations == 0 &&
               obstacle_violations == 0 && sys_safety_violations == 0;
    }
    std::string to_json() const;
};

SwarmState integrate(const SwarmState& state, const ControlInput& u, double dt);

// Robots placed in exact formation with the centroid at w.
SwarmState place_at(const Vec2& w, const Formation& f);

enum class SegmentOutcome { Reached, DeadlineExceeded, QpInfeasible };

const char* segment_outcome_name(SegmentOutcome o);

struct SegmentResult {
    std::vector<Sample> samples;
    SegmentOutcome outcome = SegmentOutcome::Reached;
    SwarmState final_state;
    double elapsed = 0.0;
};

// Inner control loop toward one waypoint/formation target: build and solve the
// QP, integrate, until the centroid ball and every pairwise formation ball are
// simultaneously met, the deadline passes, or the QP fails.
SegmentResult run_symbolic_step(const SwarmState& state, const Vec2& w, const Formation& f,
                                const GridWorld& world, const QpConfig& cfg, const FxtParams& params,
                                double dt, double deadline, double t0 = 0.0,
                                Cell target_cell = {-1, -1});

struct MissionResult {
    TrajectoryLog log;
    MonitorReport report;
};

MissionResult run_mission(const GridWorld& world, const FormationCatalog& catalog, const Dfts& dfts,
                          const GameStructure& game, const Strategy& strategy, const Gr1Spec& spec,
                          const EnvSchedule& schedule, const SimConfig& sim_cfg, const QpConfig& qp_cfg,
                          const FxtParams& params);

MonitorReport compute_monitor_report(const TrajectoryLog& log, const GridWorld& world,
                                     const Gr1Spec& spec, const QpConfig& qp_cfg, double t_ud,
                                     bool aborted, const std::string& abort_reason);

struct PrunedEdge {
    int state;
    int action;
    std::string description;
    SegmentOutcome reason;
};

struct RefineResult {
    Dfts dfts;
    bool realizable = false;
    std::optional<Strategy> strategy;
    std::vector<PrunedEdge> pruned;
    int rounds = 0;
};

// Synthesize, probe the feasibility of every strategy transition by simulating
// it from the exact source formation (plus jittered placements when
// probe_budget > 1), prune failing edges, and re-synthesize until every
// transition of the current strategy is feasible or the spec becomes
// unrealizable. Probe outcomes are cached per (state, action) across rounds.
RefineResult refine_loop(const GridWorld& world, const FormationCatalog& catalog,
                         const std::vector<FeasibilityRule>& rules, const DftsState& initial,
                         const Gr1Spec& spec, const QpConfig& qp_cfg, const FxtParams& params,
                         const SimConfig& sim_cfg, int probe_budget);

std::string write_trajectory_csv(const TrajectoryLog& log, std::size_t robots);
std::string write_symbolic_trace(const TrajectoryLog& log, const Dfts& dfts,
                                 const FormationCatalog& catalog);

}  // namespace swarm

#endif
