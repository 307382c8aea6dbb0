#ifndef SCHEDSKETCH_TEST_SUPPORT_HPP
#define SCHEDSKETCH_TEST_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <schedsketch/schedsketch.hpp>

namespace sstest {

using namespace schedsketch;

/// Forward-only wrapper: counts events handed out, refuses rewinds and any
/// read past the end beyond the first end-of-stream.
template <EventSource S>
class SinglePass {
public:
    explicit SinglePass(S& inner) : inner_(&inner) {}

    std::optional<StreamEvent> next()
    {
        if (ended_)
            throw std::logic_error("event source read after end of stream");
        auto ev = inner_->next();
        if (ev)
            ++served_;
        else
            ended_ = true;
        return ev;
    }

    [[noreturn]] void rewind() { throw std::logic_error("single-pass source cannot rewind"); }

    std::uint64_t served() const { return served_; }
    bool ended() const { return ended_; }

private:
    S* inner_;
    std::uint64_t served_ = 0;
    bool ended_ = false;
};

inline Instance make_instance(std::vector<Time> p, std::vector<Arc> arcs = {})
{
    Instance inst;
    for (std::size_t i = 0; i < p.size(); ++i)
        inst.jobs.push_back({static_cast<JobId>(i + 1), p[i], std::nullopt});
    inst.arcs = std::move(arcs);
    return with_computed_depths(std::move(inst));
}

inline Instance strip_depths(Instance inst)
{
    for (auto& j : inst.jobs)
        j.depth.reset();
    return inst;
}

struct SmallCase {
    Instance inst;
    std::int64_t m = 1;
    Time c = 1;
    Depth h = 1;
    double epsilon = 0.3;
};

/// Random layered DAG: levels 1..h, every job above level 1 gets one parent
/// on the level below and, with some probability, more parents from that
/// level. Arcs only join adjacent levels, so there are no transitive edges
/// and depth equals level.
inline Instance random_layered(std::mt19937_64& rng, std::size_t n, Depth h, Time p_lo, Time p_hi, double extra)
{
    h = std::min<Depth>(h, static_cast<Depth>(n));
    std::uniform_int_distribution<Time> pick_p(p_lo, p_hi);
    std::uniform_int_distribution<Depth> pick_level(1, h);
    std::vector<Depth> level(n);
    for (Depth d = 1; d <= h; ++d)
        level[static_cast<std::size_t>(d - 1)] = d; // every level non-empty
    for (std::size_t i = static_cast<std::size_t>(h); i < n; ++i)
        level[i] = pick_level(rng);
    std::shuffle(level.begin(), level.end(), rng);
    std::sort(level.begin(), level.end()); // ids grow with level

    Instance inst;
    std::vector<std::vector<JobId>> by_level(static_cast<std::size_t>(h) + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<JobId>(i + 1);
        inst.jobs.push_back({id, pick_p(rng), std::nullopt});
        by_level[static_cast<std::size_t>(level[i])].push_back(id);
    }
    std::bernoulli_distribution more(extra);
    for (std::size_t i = 0; i < n; ++i) {
        if (level[i] == 1)
            continue;
        const auto& below = by_level[static_cast<std::size_t>(level[i] - 1)];
        std::uniform_int_distribution<std::size_t> pick(0, below.size() - 1);
        std::vector<JobId> parents{below[pick(rng)]};
        for (JobId b : below)
            if (more(rng))
                parents.push_back(b);
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
        for (JobId s : parents)
            inst.arcs.push_back({s, static_cast<JobId>(i + 1)});
    }
    inst = with_computed_depths(std::move(inst));
    sort_arcs_topologically(inst);
    return inst;
}

/// Random instance with n <= 10, m <= 3, c <= 3, h <= 3 and one of several
/// DAG shapes (independent, chains, layered, fan-in/fan-out).
inline SmallCase random_small_case(std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> pick_n(1, 10);
    std::uniform_int_distribution<std::int64_t> pick_m(1, 3);
    std::uniform_int_distribution<Time> pick_c(1, 3);
    std::uniform_int_distribution<Depth> pick_h(1, 3);
    std::uniform_int_distribution<int> pick_shape(0, 3);
    const double eps_choices[] = {0.1, 0.3, 0.5, 0.9};
    std::uniform_int_distribution<int> pick_eps(0, 3);

    SmallCase sc;
    const std::size_t n = pick_n(rng);
    sc.m = pick_m(rng);
    sc.c = pick_c(rng);
    sc.epsilon = eps_choices[pick_eps(rng)];
    std::uniform_int_distribution<Time> pick_p(1, sc.c);
    switch (pick_shape(rng)) {
    case 0: { // independent jobs
        std::vector<Time> p(n);
        for (auto& x : p)
            x = pick_p(rng);
        sc.inst = make_instance(p);
        break;
    }
    case 1: { // disjoint chains of length <= 3
        std::vector<Time> p(n);
        for (auto& x : p)
            x = pick_p(rng);
        const Depth len = pick_h(rng);
        std::vector<Arc> arcs;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if ((i + 1) % static_cast<std::size_t>(len) != 0)
                arcs.push_back({static_cast<JobId>(i + 1), static_cast<JobId>(i + 2)});
        sc.inst = make_instance(p, arcs);
        sort_arcs_topologically(sc.inst);
        break;
    }
    case 2: // layered with sparse extra arcs
        sc.inst = random_layered(rng, n, pick_h(rng), 1, sc.c, 0.2);
        break;
    default: // dense bipartite-ish fan-in/fan-out
        sc.inst = random_layered(rng, n, pick_h(rng), 1, sc.c, 0.7);
        break;
    }
    sc.h = sc.inst.height();
    return sc;
}

/// Independent brute force for tiny instances: every precedence-feasible job
/// order times every machine assignment, each job appended to its machine.
inline Time brute_force_makespan(const Instance& inst, std::int64_t m)
{
    const std::size_t n = inst.n();
    if (n > 7)
        throw std::invalid_argument("brute force limited to 7 jobs");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<std::size_t>> preds(n);
    for (const auto& a : inst.arcs)
        preds[a.dst - 1].push_back(a.src - 1);
    Time best = std::numeric_limits<Time>::max();
    std::size_t assignments = 1;
    for (std::size_t i = 0; i < n; ++i)
        assignments *= static_cast<std::size_t>(m);
    do {
        std::vector<std::size_t> pos(n);
        for (std::size_t i = 0; i < n; ++i)
            pos[perm[i]] = i;
        bool feasible = true;
        for (std::size_t v = 0; v < n && feasible; ++v)
            for (std::size_t u : preds[v])
                feasible = feasible && pos[u] < pos[v];
        if (!feasible)
            continue;
        for (std::size_t code = 0; code < assignments; ++code) {
            std::vector<Time> avail(static_cast<std::size_t>(m), 0);
            std::vector<Time> done(n, 0);
            std::size_t rest = code;
            Time span = 0;
            for (std::size_t v : perm) {
                const std::size_t mach = rest % static_cast<std::size_t>(m);
                rest /= static_cast<std::size_t>(m);
                Time start = avail[mach];
                for (std::size_t u : preds[v])
                    start = std::max(start, done[u]);
                done[v] = start + inst.jobs[v].p;
                avail[mach] = done[v];
                span = std::max(span, done[v]);
            }
            best = std::min(best, span);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Implicit two-level instance for estimator accuracy checks: unit jobs, the
/// first `deep` indices at depth 2, the rest at depth 1.
struct TwoLevelAccess {
    std::uint64_t n = 0;
    std::uint64_t deep = 0;

    std::uint64_t size() const { return n; }
    Job job(std::uint64_t i) const { return Job{static_cast<JobId>(i + 1), 1, i < deep ? 2 : 1}; }
};

} // namespace sstest

#endif
