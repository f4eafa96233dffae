#include "ssim/executive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "ssim/error.hpp"

namespace ssim {

const char* task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::Recharge:   return "recharge";
        case TaskKind::Desaturate: return "desaturate";
        case TaskKind::ExecuteTcm: return "execute-tcm";
        case TaskKind::Downlink:   return "downlink";
    }
    return "?";
}

int ExecutivePriorities::of(TaskKind k) const {
    switch (k) {
        case TaskKind::Recharge:   return recharge;
        case TaskKind::Desaturate: return desaturate;
        case TaskKind::ExecuteTcm: return execute_tcm;
        case TaskKind::Downlink:   return downlink;
    }
    return 0;
}

void ExecutivePriorities::validate() const {
    if (!(recharge < desaturate && desaturate < execute_tcm &&
          execute_tcm < downlink))
        throw ConfigError(
            "priorities: required ordering is recharge < desaturate < "
            "execute_tcm < downlink");
}

Task& TaskQueue::enqueue(TaskKind kind, int priority, const std::string& trigger,
                         double t) {
    Task task;
    task.kind = kind;
    task.priority = priority;
    task.trigger_event = trigger;
    task.seq = next_seq_++;
    task.enqueued_at_s = t;
    tasks_.push_back(std::move(task));
    return tasks_.back();
}

bool TaskQueue::has_open(TaskKind kind) const {
    return std::any_of(tasks_.begin(), tasks_.end(), [&](const Task& t) {
        return t.kind == kind && t.state != TaskState::Done;
    });
}

Task* TaskQueue::active() {
    for (Task& t : tasks_)
        if (t.state == TaskState::Active) return &t;
    return nullptr;
}

Task* TaskQueue::schedule(double t) {
    Task* best = nullptr;
    for (Task& task : tasks_) {
        if (task.state != TaskState::Pending || t < task.not_before_s) continue;
        if (!best || task.priority < best->priority ||
            (task.priority == best->priority && task.seq < best->seq))
            best = &task;
    }
    Task* act = active();
    if (!act) {
        if (best) best->state = TaskState::Active;
        return best ? best : nullptr;
    }
    if (best && best->priority < act->priority) {
        act->state = TaskState::Pending;  // preempted task returns to Pending
        act->preemptions++;
        best->state = TaskState::Active;
        return best;
    }
    return act;
}

void TaskQueue::complete(Task& task) { task.state = TaskState::Done; }

void TaskQueue::reject(Task& task, double t, double backoff_s) {
    task.state = TaskState::Pending;
    task.not_before_s = t + backoff_s;
}

void TaskQueue::purge_done() {
    tasks_.erase(std::remove_if(tasks_.begin(), tasks_.end(),
                                [](const Task& t) { return t.state == TaskState::Done; }),
                 tasks_.end());
}

int TaskQueue::open_count() const {
    return static_cast<int>(
        std::count_if(tasks_.begin(), tasks_.end(),
                      [](const Task& t) { return t.state != TaskState::Done; }));
}

int TaskQueue::min_open_priority() const {
    int best = std::numeric_limits<int>::max();
    for (const Task& t : tasks_)
        if (t.state != TaskState::Done) best = std::min(best, t.priority);
    return best;
}

void EventConfig::validate() const {
    if (soc_charge_threshold <= 0.0 || soc_charge_threshold >= 1.0)
        throw ConfigError("events: SoC charge threshold must be in (0,1)");
    if (soc_hysteresis < 0.0 || miss_hysteresis_frac < 0.0 ||
        buffer_hysteresis_bytes < 0.0)
        throw ConfigError("events: negative hysteresis band");
    if (!(miss_threshold_m > 0.0) || !(buffer_threshold_bytes > 0.0) ||
        !(wheel_rate_threshold_rad_s > 0.0))
        throw ConfigError("events: thresholds must be positive");
}

std::vector<FiredEvent> EventMonitor::evaluate(const StateSnapshot& s) {
    std::vector<FiredEvent> fired;

    if (soc_armed_ && s.soc < cfg_.soc_charge_threshold) {
        fired.push_back({"soc-low", TaskKind::Recharge});
        soc_armed_ = false;
    } else if (!soc_armed_ &&
               s.soc > cfg_.soc_charge_threshold + cfg_.soc_hysteresis) {
        soc_armed_ = true;
    }

    if (s.miss_valid) {
        if (miss_armed_ && s.predicted_miss_m > cfg_.miss_threshold_m) {
            fired.push_back({"miss-distance", TaskKind::ExecuteTcm});
            miss_armed_ = false;
        } else if (!miss_armed_ &&
                   s.predicted_miss_m <
                       cfg_.miss_threshold_m * (1.0 - cfg_.miss_hysteresis_frac)) {
            miss_armed_ = true;
        }
    }

    bool buffer_over = s.buffer_fill_bytes > cfg_.buffer_threshold_bytes;
    if (buffer_armed_ && buffer_over && s.ground_window_visible) {
        fired.push_back({"buffer-full", TaskKind::Downlink});
        buffer_armed_ = false;
    } else if (!buffer_armed_ &&
               s.buffer_fill_bytes <
                   cfg_.buffer_threshold_bytes - cfg_.buffer_hysteresis_bytes) {
        buffer_armed_ = true;
    }

    if (wheel_armed_ && s.max_wheel_rate_rad_s > cfg_.wheel_rate_threshold_rad_s) {
        fired.push_back({"wheel-momentum", TaskKind::Desaturate});
        wheel_armed_ = false;
    } else if (!wheel_armed_ &&
               s.max_wheel_rate_rad_s < 0.5 * cfg_.wheel_rate_threshold_rad_s) {
        wheel_armed_ = true;
    }

    return fired;
}

Task* Executive::step(const StateSnapshot& snapshot) {
    for (const FiredEvent& e : monitor_.evaluate(snapshot)) {
        if (queue_.has_open(e.task)) continue;  // one open task per kind
        queue_.enqueue(e.task, priorities_.of(e.task), e.id, snapshot.t);
    }
    return queue_.schedule(snapshot.t);
}

std::vector<Eigen::Vector3d> icosphere_directions(int subdivisions) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    return verts;
}

namespace {

struct HeuristicScore {
    double score;
    double power;
};

}  // namespace

AttitudeCommand charging_attitude(const Pose& pose,
                                  const std::vector<SolarArray>& arrays,
                                  const SolarConstants& sun_constants,
                                  const InertialVec& sun_position,
                                  const InertialVec& body_direction,
                                  const BodyVec& instrument_axis, double weight) {
    if (weight < 0.0 || weight > 1.0)
        throw RuntimeError("charging_attitude: weight must be in [0,1]");
    if (arrays.empty())
        throw RuntimeError("charging_attitude: no solar arrays");

    const Eigen::Vector3d sun_dir =
        (sun_position - pose.position).v.normalized();
    const Eigen::Vector3d body_dir = body_direction.v.normalized();
    const Eigen::Vector3d inst_axis = instrument_axis.v.normalized();

    // Upper bound used to normalize the power objective.
    double h = irradiance((pose.position - sun_position).norm(), sun_constants);
    double p_max = 0.0;
    for (const SolarArray& a : arrays)
        p_max += h * a.area_m2 * a.cell_efficiency * a.packing_fraction;

    auto objective = [&](const Eigen::Quaterniond& q) -> HeuristicScore {
        Pose candidate{pose.position, BodyToInertial(q)};
        double p = solar_power_lf(arrays, candidate, sun_position, sun_constants);
        double point = (q * inst_axis).dot(body_dir);
        return {weight * p / p_max + (1.0 - weight) * point, p};
    };

    // Candidate set: single-objective optima plus the icosphere grid
    // with roll sampling about the primary array normal.
    const Eigen::Vector3d primary_normal = arrays.front().normal.v;
    std::vector<Eigen::Quaterniond> candidates;
    for (const SolarArray& a : arrays)
        candidates.emplace_back(
            Eigen::Quaterniond::FromTwoVectors(a.normal.v, sun_dir));
    candidates.emplace_back(
        Eigen::Quaterniond::FromTwoVectors(inst_axis, body_dir));

    const int rolls = 8;
    for (const Eigen::Vector3d& dir : icosphere_directions(3)) {
        Eigen::Quaterniond q0 =
            Eigen::Quaterniond::FromTwoVectors(primary_normal, dir);
        for (int r = 0; r < rolls; ++r) {
            double roll = 2.0 * kPi * r / rolls;
            candidates.emplace_back(
                q0 * Eigen::Quaterniond(Eigen::AngleAxisd(roll, primary_normal)));
        }
    }

    Eigen::Quaterniond best = candidates.front();
    HeuristicScore best_score = objective(best);
    for (const auto& q : candidates) {
        HeuristicScore s = objective(q);
        if (s.score > best_score.score) {
            best = q;
            best_score = s;
        }
    }

    // Coordinate-wise golden-section refinement around the best cell.
    constexpr double kInvPhi = 0.6180339887498949;
    double window = 0.20;  // rad, about the icosphere cell size
    for (int pass = 0; pass < 3; ++pass) {
        for (int axis = 0; axis < 3; ++axis) {
            Eigen::Vector3d ax = Eigen::Vector3d::Unit(axis);
            auto value = [&](double ang) {
                return objective(best * Eigen::Quaterniond(Eigen::AngleAxisd(ang, ax)))
                    .score;
            };
            double a = -window, b = window;
            double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
            double f1 = value(x1), f2 = value(x2);
            while (b - a > 1e-6) {
                if (f1 >= f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - kInvPhi * (b - a); f1 = value(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + kInvPhi * (b - a); f2 = value(x2);
                }
            }
            double ang = 0.5 * (a + b);
            if (value(ang) > objective(best).score)
                best = best * Eigen::Quaterniond(Eigen::AngleAxisd(ang, ax));
        }
        window *= 0.35;
    }

    AttitudeCommand cmd;
    cmd.target_q = best.normalized();
    cmd.target_rate = Eigen::Vector3d::Zero();
    cmd.mode = AttitudeMode::Recharge;
    return cmd;
}

}  // namespace ssim
