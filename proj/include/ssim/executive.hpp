#ifndef SSIM_EXECUTIVE_HPP
#define SSIM_EXECUTIVE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ssim/attitude.hpp"
#include "ssim/navigation.hpp"
#include "ssim/power.hpp"

namespace ssim {

enum class TaskKind { Recharge, Desaturate, ExecuteTcm, Downlink };
enum class TaskState { Pending, Active, Done, Preempted };

const char* task_kind_name(TaskKind k);

/**
 * Fixed task priority ordering (lower = more urgent). Recharging
 * outranks everything; desaturation sits between recharge and TCMs;
 * downlink comes last.
 */
struct ExecutivePriorities {
    int recharge = 0;
    int desaturate = 1;
    int execute_tcm = 2;
    int downlink = 3;

    int of(TaskKind k) const;

    void validate() const;
};

/// An executive work item.
struct Task {
    TaskKind kind = TaskKind::Recharge;
    int priority = 0;
    std::string trigger_event;
    TaskState state = TaskState::Pending;
    std::uint64_t seq = 0;       // FIFO tie-break
    double enqueued_at_s = 0.0;
    double not_before_s = 0.0;   // backoff after subsystem rejection
    int preemptions = 0;

    // Payloads, filled at dispatch time.
    PropulsionCommand burn;
};

/**
 * The executive's priority queue. At most one task is Active; a newly
 * runnable task with strictly lower priority preempts the active one
 * (which returns to Pending). Ties break by enqueue order.
 */
class TaskQueue {
public:
    Task& enqueue(TaskKind kind, int priority, const std::string& trigger, double t);

    /// A task of this kind is already pending or active.
    bool has_open(TaskKind kind) const;

    /**
     * Select the task to run at time t, applying preemption. Returns
     * nullptr when nothing is runnable.
     */
    Task* schedule(double t);

    Task* active();
    void complete(Task& task);
    /// Push the task back to Pending with a delay before rescheduling.
    void reject(Task& task, double t, double backoff_s);

    /// Drop Done tasks.
    void purge_done();

    const std::vector<Task>& tasks() const { return tasks_; }
    int open_count() const;

    /// Minimum priority among non-Done tasks; INT_MAX when none.
    int min_open_priority() const;

private:
    std::vector<Task> tasks_;
    std::uint64_t next_seq_ = 0;
};

/// What the event predicates look at each step.
struct StateSnapshot {
    double t = 0.0;
    double soc = 1.0;
    double predicted_miss_m = 0.0;
    bool miss_valid = false;
    double buffer_fill_bytes = 0.0;
    bool ground_window_visible = false;
    double max_wheel_rate_rad_s = 0.0;
};

/// Event thresholds and hysteresis bands.
struct EventConfig {
    double soc_charge_threshold = 0.30;
    double soc_hysteresis = 0.05;
    double miss_threshold_m = 5e6;
    double miss_hysteresis_frac = 0.10;
    double buffer_threshold_bytes = 1e8;
    double buffer_hysteresis_bytes = 1e7;
    double wheel_rate_threshold_rad_s = 300.0;

    void validate() const;
};

struct FiredEvent {
    std::string id;
    TaskKind task;
};

/**
 * Threshold monitors with hysteresis: an event that fired stays
 * disarmed until its quantity has retreated past the threshold by the
 * hysteresis band, so it cannot re-fire inside the band.
 */
class EventMonitor {
public:
    explicit EventMonitor(const EventConfig& cfg) : cfg_(cfg) {}

    std::vector<FiredEvent> evaluate(const StateSnapshot& s);

    const EventConfig& config() const { return cfg_; }

private:
    EventConfig cfg_;
    bool soc_armed_ = true;
    bool miss_armed_ = true;
    bool buffer_armed_ = true;
    bool wheel_armed_ = true;
};

/**
 * Event evaluation plus scheduling in one step: fired events enqueue
 * tasks (deduplicated against open tasks of the same kind) and the
 * queue is rescheduled. Deterministic for identical snapshots.
 */
class Executive {
public:
    Executive(const ExecutivePriorities& priorities, const EventConfig& events)
        : priorities_(priorities), monitor_(events) {}

    Task* step(const StateSnapshot& snapshot);

    TaskQueue& queue() { return queue_; }
    const ExecutivePriorities& priorities() const { return priorities_; }
    EventMonitor& monitor() { return monitor_; }

private:
    ExecutivePriorities priorities_;
    EventMonitor monitor_;
    TaskQueue queue_;
};

/// Unit direction grid from subdividing an icosahedron.
std::vector<Eigen::Vector3d> icosphere_directions(int subdivisions);

/**
 * Charging-attitude heuristic: maximize
 *   J(q) = w * P_solar(q) / P_max + (1 - w) * cos(body pointing error)
 * over an icosphere attitude grid with roll sampling, then refine the
 * best cell by coordinate-wise golden section. The two single-objective
 * optima (best array sun-pointing, instrument body-pointing) are always
 * candidates, so the w = 0 and w = 1 limits are exact.
 */
AttitudeCommand charging_attitude(const Pose& pose,
                                  const std::vector<SolarArray>& arrays,
                                  const SolarConstants& sun_constants,
                                  const InertialVec& sun_position,
                                  const InertialVec& body_direction,
                                  const BodyVec& instrument_axis, double weight);

}  // namespace ssim

#endif  // SSIM_EXECUTIVE_HPP
