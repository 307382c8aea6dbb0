#ifndef SCHEDSKETCH_ORACLES_HPP
#define SCHEDSKETCH_ORACLES_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "instance.hpp"
#include "schedule.hpp"

namespace schedsketch {

struct Adjacency {
    std::vector<std::vector<std::size_t>> succ; // 0-based
    std::vector<std::vector<std::size_t>> pred;
};

inline Adjacency build_adjacency(std::span<const Arc> arcs, std::size_t n)
{
    Adjacency adj{std::vector<std::vector<std::size_t>>(n), std::vector<std::vector<std::size_t>>(n)};
    for (const auto& a : arcs) {
        if (a.src < 1 || a.src > n || a.dst < 1 || a.dst > n)
            throw input_error("arc (" + std::to_string(a.src) + "," + std::to_string(a.dst) + ") references unknown job");
        adj.succ[a.src - 1].push_back(a.dst - 1);
        adj.pred[a.dst - 1].push_back(a.src - 1);
    }
    return adj;
}

/// Topological order of 0-based job indices. On a cycle, throws input_error
/// naming one back edge (as 1-based ids).
inline std::vector<std::size_t> topological_order(const Adjacency& adj)
{
    const std::size_t n = adj.succ.size();
    enum : char { white, grey, black };
    std::vector<char> colour(n, white);
    std::vector<std::size_t> post;
    post.reserve(n);
    std::vector<std::pair<std::size_t, std::size_t>> stack; // (node, next successor slot)
    for (std::size_t root = 0; root < n; ++root) {
        if (colour[root] != white)
            continue;
        stack.push_back({root, 0});
        colour[root] = grey;
        while (!stack.empty()) {
            auto& [v, slot] = stack.back();
            if (slot < adj.succ[v].size()) {
                const std::size_t w = adj.succ[v][slot++];
                if (colour[w] == grey)
                    throw input_error("precedence graph has a cycle (back edge " + std::to_string(v + 1) + " -> " +
                                      std::to_string(w + 1) + ")");
                if (colour[w] == white) {
                    colour[w] = grey;
                    stack.push_back({w, 0});
                }
            } else {
                colour[v] = black;
                post.push_back(v);
                stack.pop_back();
            }
        }
    }
    std::reverse(post.begin(), post.end());
    return post;
}

/// Depth per job (index id-1): 1 for sources, else 1 + max predecessor depth.
inline std::vector<Depth> compute_depths(std::span<const Arc> arcs, std::size_t n)
{
    const auto adj = build_adjacency(arcs, n);
    std::vector<Depth> depth(n, 1);
    for (std::size_t v : topological_order(adj))
        for (std::size_t w : adj.succ[v])
            depth[w] = std::max(depth[w], depth[v] + 1);
    return depth;
}

/// Copies the instance with depths recomputed from its arcs.
inline Instance with_computed_depths(Instance inst)
{
    const auto depth = compute_depths(inst.arcs, inst.n());
    for (auto& j : inst.jobs)
        j.depth = depth[j.id - 1];
    return inst;
}

/// Longest chain of processing times (the critical path).
inline Time critical_path(const Instance& inst)
{
    const auto adj = build_adjacency(inst.arcs, inst.n());
    std::vector<Time> finish(inst.n(), 0);
    std::vector<Time> p(inst.n(), 0);
    for (const auto& j : inst.jobs)
        p[j.id - 1] = j.p;
    Time best = 0;
    for (std::size_t v : topological_order(adj)) {
        Time start = 0;
        for (std::size_t u : adj.pred[v])
            start = std::max(start, finish[u]);
        finish[v] = start + p[v];
        best = std::max(best, finish[v]);
    }
    return best;
}

/// max(ceil(sum p / m), critical path).
inline Time makespan_lower_bound(const Instance& inst, std::int64_t m)
{
    return std::max(ceil_div(inst.total_work(), m), critical_path(inst));
}

/// Default list order: non-increasing p, ties by id.
inline std::vector<JobId> default_list_order(const Instance& inst)
{
    std::vector<JobId> order;
    order.reserve(inst.n());
    for (const auto& j : inst.jobs)
        order.push_back(j.id);
    std::vector<Time> p(inst.n() + 1, 0);
    for (const auto& j : inst.jobs)
        p[j.id] = j.p;
    std::stable_sort(order.begin(), order.end(), [&](JobId a, JobId b) { return p[a] != p[b] ? p[a] > p[b] : a < b; });
    return order;
}

/// Graham list scheduling: whenever a machine falls idle, it takes the first
/// job in list order whose predecessors have all completed.
inline ConcreteSchedule list_schedule(const Instance& inst, std::int64_t m, std::span<const JobId> order = {})
{
    if (m < 1)
        throw param_error("m must be at least 1");
    const std::size_t n = inst.n();
    std::vector<JobId> owned;
    if (order.empty()) {
        owned = default_list_order(inst);
        order = owned;
    }
    if (order.size() != n)
        throw param_error("list order must be a permutation of the job ids");
    std::vector<std::size_t> rank(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const JobId id = order[r];
        if (id < 1 || id > n || rank[id - 1] != n)
            throw param_error("list order must be a permutation of the job ids");
        rank[id - 1] = r;
    }
    const auto adj = build_adjacency(inst.arcs, n);
    topological_order(adj); // rejects cycles
    std::vector<Time> p(n, 0);
    for (const auto& j : inst.jobs)
        p[j.id - 1] = j.p;

    std::vector<std::size_t> waiting(n);
    std::vector<Time> ready(n, 0);
    using Pending = std::pair<Time, std::size_t>; // (ready time, rank)
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending;
    for (std::size_t v = 0; v < n; ++v) {
        waiting[v] = adj.pred[v].size();
        if (waiting[v] == 0)
            pending.push({0, rank[v]});
    }
    using Machine = std::pair<Time, std::int64_t>; // (free at, index)
    std::priority_queue<Machine, std::vector<Machine>, std::greater<>> machines;
    for (std::int64_t i = 1; i <= m; ++i)
        machines.push({0, i});

    std::set<std::size_t> available; // ranks of jobs ready now
    ConcreteSchedule out;
    std::size_t placed = 0;
    while (placed < n) {
        auto [t, mi] = machines.top();
        machines.pop();
        while (!pending.empty() && pending.top().first <= t) {
            available.insert(pending.top().second);
            pending.pop();
        }
        if (available.empty()) {
            machines.push({pending.top().first, mi});
            continue;
        }
        const std::size_t r = *available.begin();
        available.erase(available.begin());
        const std::size_t v = order[r] - 1;
        out.placements.push_back({static_cast<JobId>(v + 1), mi, t, t + p[v]});
        out.makespan = std::max(out.makespan, t + p[v]);
        machines.push({t + p[v], mi});
        ++placed;
        for (std::size_t w : adj.succ[v]) {
            ready[w] = std::max(ready[w], t + p[v]);
            if (--waiting[w] == 0)
                pending.push({ready[w], rank[w]});
        }
    }
    return out;
}

inline constexpr std::size_t exact_max_jobs = 12;
inline constexpr std::int64_t exact_max_machines = 3;

namespace detail {

class ExactSearch {
public:
    ExactSearch(const Instance& inst, std::int64_t m) : n_(inst.n()), m_(static_cast<std::size_t>(m))
    {
        const auto adj = build_adjacency(inst.arcs, n_);
        order_ = topological_order(adj);
        p_.assign(n_, 0);
        for (const auto& j : inst.jobs)
            p_[j.id - 1] = j.p;
        pred_mask_.assign(n_, 0);
        succ_mask_.assign(n_, 0);
        pred_ = adj.pred;
        for (std::size_t v = 0; v < n_; ++v) {
            for (std::size_t u : adj.pred[v])
                pred_mask_[v] |= 1u << u;
            for (std::size_t w : adj.succ[v])
                succ_mask_[v] |= 1u << w;
        }
        tail_.assign(n_, 0);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            Time best = 0;
            for (std::size_t w : adj.succ[*it])
                best = std::max(best, tail_[w]);
            tail_[*it] = best + p_[*it];
        }
        global_lb_ = makespan_lower_bound(inst, m);
        best_ = list_schedule(inst, m).makespan;
    }

    Time solve()
    {
        if (best_ == global_lb_)
            return best_;
        std::vector<Time> avail(m_, 0);
        std::vector<Time> done(n_, 0);
        dfs(0, avail, done, 0);
        return best_;
    }

private:
    using Key = std::tuple<std::uint32_t, std::vector<Time>, std::vector<Time>>;

    Time bound(std::uint32_t mask, const std::vector<Time>& avail, const std::vector<Time>& done, Time span) const
    {
        Time work = 0;
        for (Time a : avail)
            work += a;
        std::vector<Time> est(n_, 0);
        const Time floor_t = *std::min_element(avail.begin(), avail.end());
        Time lb = span;
        for (std::size_t v : order_) {
            if (mask >> v & 1u)
                continue;
            work += p_[v];
            Time s = floor_t;
            for (std::size_t u : pred_[v])
                s = std::max(s, (mask >> u & 1u) ? done[u] : est[u] + p_[u]);
            est[v] = s;
            lb = std::max(lb, s + tail_[v]);
        }
        return std::max(lb, ceil_div(work, static_cast<Time>(m_)));
    }

    void dfs(std::uint32_t mask, std::vector<Time>& avail, std::vector<Time>& done, Time span)
    {
        if (best_ == global_lb_)
            return;
        if (mask == (n_ == 32 ? ~0u : (1u << n_) - 1u)) {
            best_ = std::min(best_, span);
            return;
        }
        if (bound(mask, avail, done, span) >= best_)
            return;

        std::vector<Time> sorted = avail;
        std::sort(sorted.begin(), sorted.end());
        std::vector<Time> frontier;
        for (std::size_t v = 0; v < n_; ++v) {
            if ((mask >> v & 1u) && (succ_mask_[v] & ~mask))
                frontier.push_back(done[v]);
            else
                frontier.push_back(-1);
        }
        Key key{mask, sorted, frontier};
        auto [it, fresh] = seen_.try_emplace(std::move(key), span);
        if (!fresh) {
            if (it->second <= span)
                return;
            it->second = span;
        }

        for (std::size_t v = 0; v < n_; ++v) {
            if ((mask >> v & 1u) || (pred_mask_[v] & ~mask))
                continue;
            Time ready = 0;
            for (std::size_t u : pred_[v])
                ready = std::max(ready, done[u]);
            // Candidate machines: the latest-free one among those free by
            // `ready`, plus one per distinct later free time.
            std::vector<std::size_t> picks;
            std::optional<std::size_t> early;
            for (std::size_t i = 0; i < m_; ++i) {
                if (avail[i] <= ready) {
                    if (!early || avail[i] > avail[*early])
                        early = i;
                } else if (std::none_of(picks.begin(), picks.end(), [&](std::size_t k) { return avail[k] == avail[i]; })) {
                    picks.push_back(i);
                }
            }
            if (early)
                picks.push_back(*early);
            for (std::size_t i : picks) {
                const Time start = std::max(avail[i], ready);
                const Time end = start + p_[v];
                if (end >= best_)
                    continue;
                const Time saved = avail[i];
                avail[i] = end;
                done[v] = end;
                dfs(mask | (1u << v), avail, done, std::max(span, end));
                avail[i] = saved;
                done[v] = 0;
                if (best_ == global_lb_)
                    return;
            }
        }
    }

    std::size_t n_;
    std::size_t m_;
    std::vector<std::size_t> order_;
    std::vector<Time> p_;
    std::vector<std::uint32_t> pred_mask_;
    std::vector<std::uint32_t> succ_mask_;
    std::vector<std::vector<std::size_t>> pred_;
    std::vector<Time> tail_;
    Time global_lb_ = 0;
    Time best_ = 0;
    std::map<Key, Time> seen_;
};

} // namespace detail

/// Optimal makespan by exhaustive branch and bound. Refuses instances with
/// more than 12 jobs or 3 machines.
inline Time exact_makespan(const Instance& inst, std::int64_t m)
{
    if (m < 1)
        throw param_error("m must be at least 1");
    if (inst.n() > exact_max_jobs || m > exact_max_machines)
        throw param_error("exact oracle limited to n <= " + std::to_string(exact_max_jobs) + " and m <= " +
                          std::to_string(exact_max_machines));
    if (inst.n() == 0)
        return 0;
    return detail::ExactSearch(inst, m).solve();
}

} // namespace schedsketch

#endif
