#ifndef SCHEDSKETCH_SCHEDULE_HPP
#define SCHEDSKETCH_SCHEDULE_HPP

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "instance.hpp"

namespace schedsketch {

struct Placement {
    JobId id = 0;
    std::int64_t machine = 1; // 1-based
    Time start = 0;
    Time completion = 0;

    friend bool operator==(const Placement&, const Placement&) = default;
};

struct ConcreteSchedule {
    std::vector<Placement> placements; // in placement order
    Time makespan = 0;

    friend bool operator==(const ConcreteSchedule&, const ConcreteSchedule&) = default;
};

/// Places each depth-d job inside [t_{d-1}, t_d), filling machines one after
/// another. Throws sketch_infeasible when a level runs out of machines.
template <EventSource S>
ConcreteSchedule sketch_to_schedule(const ScheduleSketch& sks, S& jobs, std::int64_t m)
{
    if (m < 1)
        throw param_error("m must be at least 1");
    const Depth h = sks.levels();
    if (h < 1)
        throw input_error("schedule sketch has no levels");
    struct Cursor {
        std::int64_t machine = 1;
        Time t = 0;
    };
    std::vector<Cursor> cursor(static_cast<std::size_t>(h));
    for (Depth d = 1; d <= h; ++d)
        cursor[static_cast<std::size_t>(d - 1)] = {1, sks.start_of(d)};

    ConcreteSchedule out;
    while (auto ev = jobs.next()) {
        const auto* job = std::get_if<Job>(&*ev);
        if (!job)
            continue;
        if (!job->depth)
            throw input_error("job " + std::to_string(job->id) + " has no depth");
        const Depth d = *job->depth;
        if (d < 1 || d > h)
            throw input_error("job " + std::to_string(job->id) + " depth " + std::to_string(d) +
                              " outside the sketch's " + std::to_string(h) + " levels");
        auto& cur = cursor[static_cast<std::size_t>(d - 1)];
        const Time lo = sks.start_of(d);
        const Time hi = sks.end_of(d);
        if (cur.t + job->p > hi) {
            ++cur.machine;
            cur.t = lo;
        }
        if (cur.machine > m)
            throw sketch_infeasible("depth " + std::to_string(d) + " needs more than " + std::to_string(m) +
                                    " machines (job " + std::to_string(job->id) + ")");
        if (cur.t + job->p > hi)
            throw sketch_infeasible("job " + std::to_string(job->id) + " (p=" + std::to_string(job->p) +
                                    ") does not fit in the depth " + std::to_string(d) + " interval");
        out.placements.push_back({job->id, cur.machine, cur.t, cur.t + job->p});
        out.makespan = std::max(out.makespan, cur.t + job->p);
        cur.t += job->p;
    }
    return out;
}

inline ConcreteSchedule sketch_to_schedule(const ScheduleSketch& sks, const Instance& inst, std::int64_t m)
{
    InstanceEventSource src(inst);
    return sketch_to_schedule(sks, src, m);
}

struct Violation {
    std::string kind; // overlap | precedence | machine | missing | duplicate | duration | unknown_job
    std::vector<JobId> jobs;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Independent feasibility check: every job placed once with its own
/// duration, machines in [1, m], no overlap per machine, arcs respected.
inline std::vector<Violation> validate_schedule(const ConcreteSchedule& sched, const Instance& inst, std::int64_t m)
{
    std::vector<Violation> out;
    const std::size_t n = inst.jobs.size();
    std::vector<const Placement*> by_id(n + 1, nullptr);
    std::vector<Time> p_of(n + 1, 0);
    for (const auto& j : inst.jobs) {
        if (j.id >= 1 && j.id <= n)
            p_of[j.id] = j.p;
    }

    for (const auto& pl : sched.placements) {
        if (pl.id < 1 || pl.id > n) {
            out.push_back({"unknown_job", {pl.id}, "job id not in instance"});
            continue;
        }
        if (by_id[pl.id]) {
            out.push_back({"duplicate", {pl.id}, "job placed more than once"});
            continue;
        }
        by_id[pl.id] = &pl;
        if (pl.machine < 1 || pl.machine > m)
            out.push_back({"machine", {pl.id}, "machine " + std::to_string(pl.machine) + " outside [1," +
                                                   std::to_string(m) + "]"});
        if (pl.start < 0 || pl.completion - pl.start != p_of[pl.id])
            out.push_back({"duration", {pl.id}, "interval does not match processing time"});
    }
    for (JobId id = 1; id <= n; ++id) {
        if (!by_id[id])
            out.push_back({"missing", {id}, "job not scheduled"});
    }

    std::vector<const Placement*> order;
    for (const auto* pl : by_id) {
        if (pl)
            order.push_back(pl);
    }
    std::sort(order.begin(), order.end(), [](const Placement* a, const Placement* b) {
        return a->machine != b->machine ? a->machine < b->machine
                                        : (a->start != b->start ? a->start < b->start : a->id < b->id);
    });
    // Track the running latest-finishing job per machine so every overlap
    // with an earlier job is caught, not just adjacent pairs.
    const Placement* reach = nullptr;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto* cur = order[i];
        if (reach && reach->machine == cur->machine && cur->start < reach->completion)
            out.push_back({"overlap", {reach->id, cur->id}, "jobs overlap on machine " + std::to_string(cur->machine)});
        if (!reach || reach->machine != cur->machine || cur->completion > reach->completion)
            reach = cur;
    }

    for (const auto& a : inst.arcs) {
        if (a.src < 1 || a.src > n || a.dst < 1 || a.dst > n)
            continue;
        const auto* s = by_id[a.src];
        const auto* t = by_id[a.dst];
        if (s && t && t->start < s->completion)
            out.push_back({"precedence", {a.src, a.dst},
                           "job " + std::to_string(a.dst) + " starts before job " + std::to_string(a.src) + " completes"});
    }
    return out;
}

inline void write_schedule_csv(std::ostream& out, const ConcreteSchedule& sched)
{
    out << "job_id,machine,start,completion\n";
    for (const auto& pl : sched.placements)
        out << pl.id << ',' << pl.machine << ',' << pl.start << ',' << pl.completion << '\n';
}

inline nlohmann::json violations_json(const std::vector<Violation>& vs)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vs)
        arr.push_back({{"kind", v.kind}, {"jobs", v.jobs}, {"detail", v.detail}});
    return arr;
}

} // namespace schedsketch

#endif
