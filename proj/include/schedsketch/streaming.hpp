#ifndef SCHEDSKETCH_STREAMING_HPP
#define SCHEDSKETCH_STREAMING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "input_sketch.hpp"
#include "instance.hpp"
#include "report.hpp"

namespace schedsketch {

/// Rounded processing time per bucket: (1+delta)^(u+1) below the top
/// bucket, the pinned maximum at the top.
class RoundedValueTable {
public:
    RoundedValueTable(double delta, int top_u, double top_value)
        : base_(1.0L + static_cast<long double>(delta)), top_u_(top_u), top_value_(top_value)
    {
    }

    double operator()(int u) const
    {
        if (u == top_u_)
            return top_value_;
        return static_cast<double>(std::pow(base_, static_cast<long double>(u + 1)));
    }

    int top_bucket() const { return top_u_; }
    double top_value() const { return top_value_; }

private:
    long double base_;
    int top_u_;
    double top_value_;
};

namespace detail {

// Per-depth (1/m) * sum n_{d,u} * rp_u, over buckets in [u_lo, u_hi].
struct LevelLoads {
    std::vector<double> load;
    std::vector<std::uint64_t> jobs;
};

inline LevelLoads level_loads(const InputSketch& sk, Depth h, const RoundedValueTable& rp, std::int64_t m,
                              int u_lo, int u_hi)
{
    LevelLoads out{std::vector<double>(static_cast<std::size_t>(h), 0.0),
                   std::vector<std::uint64_t>(static_cast<std::size_t>(h), 0)};
    sk.for_each([&](Depth d, int u, std::uint64_t n) {
        if (u < u_lo || u > u_hi)
            return;
        if (d > h)
            throw invariant_violation("sketch entry deeper than h");
        out.load[static_cast<std::size_t>(d - 1)] += static_cast<double>(n) * rp(u);
        out.jobs[static_cast<std::size_t>(d - 1)] += n;
    });
    for (auto& a : out.load)
        a /= static_cast<double>(m);
    return out;
}

// A = sum_d (floor(A_d) + slack) + extra; t_d grows by floor(A_d) + slack + sks_extra.
inline void assemble(RunReport& r, const LevelLoads& loads, Time slack, Time extra, Time sks_extra, bool tight)
{
    Time a = 0;
    Time t = 0;
    r.sks.t.clear();
    for (std::size_t i = 0; i < loads.load.size(); ++i) {
        if (tight && loads.jobs[i] == 0) {
            r.sks.t.push_back(t);
            continue;
        }
        const Time base = snapped_floor(loads.load[i]);
        a += base + slack;
        t += base + slack + sks_extra;
        r.sks.t.push_back(t);
    }
    r.A = static_cast<double>(a + extra);
    r.sks.provenance = std::string(algorithm_name(r.algorithm));
}

inline Depth checked_depth(const Job& job, Depth h)
{
    if (!job.depth)
        throw input_error("job " + std::to_string(job.id) + " has no depth");
    if (*job.depth < 1 || *job.depth > h)
        throw input_error("job " + std::to_string(job.id) + " depth " + std::to_string(*job.depth) +
                          " outside [1," + std::to_string(h) + "]");
    return *job.depth;
}

inline void check_p(const Job& job)
{
    if (job.p < 1)
        throw input_error("job " + std::to_string(job.id) + " has processing time < 1");
}

// Arc handling shared by the unknown-depth schemes. Returns the new depth of
// the destination when it grows, else 0.
inline Depth relax_arc(DepthTable& table, const Arc& arc, std::uint64_t n_bound)
{
    if (arc.src == arc.dst)
        throw input_error("self-loop on job " + std::to_string(arc.src));
    auto& src = table.at(arc.src);
    auto& dst = table.at(arc.dst);
    if (dst.emitted)
        throw input_error("arcs not in topological order: arc into job " + std::to_string(arc.dst) +
                          " after an arc out of it");
    src.emitted = true;
    if (src.depth + 1 <= dst.depth)
        return 0;
    const Depth to = src.depth + 1;
    if (static_cast<std::uint64_t>(to) > n_bound)
        throw input_error("depth exceeds job count: precedence graph appears to contain a cycle");
    return to;
}

inline bool cond_known(const AlgoParams& p, std::uint64_t n, Depth h, Time c)
{
    return machines_within(p.m, 2.0L * n * p.epsilon / (3.0L * static_cast<long double>(h) * static_cast<long double>(c)));
}

inline bool cond_alpha(const AlgoParams& p, std::uint64_t n, Depth h, Time c)
{
    return machines_within(p.m, 2.0L * n * p.alpha * p.epsilon /
                                    (3.0L * (static_cast<long double>(h) + 1) * static_cast<long double>(c)));
}

} // namespace detail

/// One pass over jobs carrying depths with known c and h (dense grid sketch).
template <EventSource S>
RunReport stream_known(S& events, const AlgoParams& params)
{
    RunReport r;
    r.algorithm = Algorithm::stream1;
    r.params = params;
    r.derived = derive_params(params, Algorithm::stream1);
    const Depth h = *params.h;
    const Time c = *params.c;
    const double delta = r.derived.delta;
    const int k = r.derived.k;

    GridSketch grid(h, k);
    std::optional<Time> p_min;
    std::optional<Time> p_max;
    std::uint64_t jobs = 0;
    while (auto ev = events.next()) {
        ++r.update_count;
        const auto* job = std::get_if<Job>(&*ev);
        if (!job)
            continue;
        detail::check_p(*job);
        const Depth d = detail::checked_depth(*job, h);
        if (job->p > c)
            throw input_error("job " + std::to_string(job->id) + " has p > c");
        grid.add(d, bucket_index(job->p, delta));
        p_min = p_min ? std::min(*p_min, job->p) : job->p;
        p_max = p_max ? std::max(*p_max, job->p) : job->p;
        ++jobs;
    }
    if (jobs == 0)
        throw input_error("empty job stream");

    r.input_sketch = grid.to_sketch();
    r.input_sketch.set_extremes(p_min, p_max);
    const RoundedValueTable rp(delta, k, static_cast<double>(c));
    const auto loads = detail::level_loads(r.input_sketch, h, rp, params.m, 0, k);
    detail::assemble(r, loads, c, 0, 0, params.tight);

    r.sketch_nodes = grid.nonzero();
    r.peak_sketch_nodes = grid.nonzero();
    r.discovered = {jobs, grid.total_counted(), p_min, p_max, c, h, 0, k, std::nullopt};
    r.guarantee_condition_met = !params.tight && detail::cond_known(params, jobs, h, c);
    return r;
}

/// Jobs (no depths) followed by topologically ordered arcs; c and h discovered.
template <EventSource S>
RunReport stream_unknown(S& events, const AlgoParams& params)
{
    RunReport r;
    r.algorithm = Algorithm::stream2;
    r.params = params;
    r.derived = derive_params(params, Algorithm::stream2);
    const double delta = r.derived.delta;

    InputSketch sk;
    DepthTable table;
    bool arcs_started = false;
    Depth h = 0;
    while (auto ev = events.next()) {
        ++r.update_count;
        if (const auto* job = std::get_if<Job>(&*ev)) {
            if (arcs_started)
                throw input_error("job event after arc events");
            detail::check_p(*job);
            const int u = bucket_index(job->p, delta);
            table.insert(job->id, u, true);
            sk.add(1, u);
            sk.observe(job->p);
            h = 1;
        } else {
            arcs_started = true;
            const auto& arc = std::get<Arc>(*ev);
            const Depth to = detail::relax_arc(table, arc, table.seen());
            if (to != 0) {
                auto& dst = table.at(arc.dst);
                sk.move(dst.depth, dst.u, to);
                dst.depth = to;
                h = std::max(h, to);
            }
        }
        r.peak_sketch_nodes = std::max(r.peak_sketch_nodes, sk.size());
    }
    if (table.seen() == 0)
        throw input_error("empty job stream");

    const Time p_min = *sk.p_min();
    const Time p_max = *sk.p_max();
    const int u_lo = bucket_index(p_min, delta);
    const int u_hi = bucket_index(p_max, delta);
    const RoundedValueTable rp(delta, u_hi, static_cast<double>(p_max));
    const auto loads = detail::level_loads(sk, h, rp, params.m, u_lo, u_hi);
    detail::assemble(r, loads, p_max, 0, 0, params.tight);

    const Time c = ceil_div(p_max, p_min);
    r.input_sketch = std::move(sk);
    r.sketch_nodes = r.input_sketch.size();
    r.discovered = {table.seen(), r.input_sketch.total_counted(), p_min, p_max, c, h, u_lo, u_hi, std::nullopt};
    r.depths = table.depths();
    r.guarantee_condition_met = !params.tight && detail::cond_known(params, table.seen(), h, c);
    return r;
}

/// Known n, c, h with depths on the jobs; tiny jobs are skipped and the
/// smallest sketch node pruned lazily.
template <EventSource S>
RunReport stream_alpha_known(S& events, const AlgoParams& params)
{
    RunReport r;
    r.algorithm = Algorithm::stream3;
    r.params = params;
    r.derived = derive_params(params, Algorithm::stream3);
    const double delta = r.derived.delta;
    const std::uint64_t n = *params.n;
    const Depth h = *params.h;
    const long double n_sq = static_cast<long double>(n) * static_cast<long double>(n);

    InputSketch sk;
    Time running_max = 1;
    std::optional<Time> p_min;
    std::uint64_t jobs = 0;
    while (auto ev = events.next()) {
        ++r.update_count;
        const auto* job = std::get_if<Job>(&*ev);
        if (!job)
            continue;
        detail::check_p(*job);
        const Depth d = detail::checked_depth(*job, h);
        if (++jobs > n)
            throw input_error("more job events than n = " + std::to_string(n));
        p_min = p_min ? std::min(*p_min, job->p) : job->p;
        if (static_cast<long double>(job->p) < static_cast<long double>(running_max) / n_sq)
            continue;
        running_max = std::max(running_max, job->p);
        sk.observe(job->p);
        if (sk.add_reporting_insert(d, bucket_index(job->p, delta)))
            sk.prune_smallest(bucket_index(static_cast<long double>(running_max) / n_sq, delta));
        r.peak_sketch_nodes = std::max(r.peak_sketch_nodes, sk.size());
    }
    if (jobs == 0)
        throw input_error("empty job stream");
    if (jobs != n)
        throw input_error("stream has " + std::to_string(jobs) + " jobs but n = " + std::to_string(n));

    const Time p_max = *sk.p_max();
    const auto range = alpha_bucket_range(p_max, n, delta);
    sk.restrict_to(range.lo, range.hi);
    const RoundedValueTable rp(delta, range.hi, static_cast<double>(p_max));
    const auto loads = detail::level_loads(sk, h, rp, params.m, range.lo, range.hi);
    const Time tail = ceil_div(p_max, static_cast<Time>(n));
    detail::assemble(r, loads, p_max, tail, tail, params.tight);

    r.input_sketch = std::move(sk);
    r.input_sketch.set_extremes(p_min, p_max);
    r.sketch_nodes = r.input_sketch.size();
    r.discovered = {jobs, r.input_sketch.total_counted(), p_min, p_max, ceil_div(p_max, *p_min), h,
                    range.lo,  range.hi, std::nullopt};
    r.guarantee_condition_met = !params.tight && detail::cond_alpha(params, n, h, *params.c);
    return r;
}

/// Known n; jobs then topologically ordered arcs. Depth tracking as in
/// stream_unknown, skipping and pruning as in stream_alpha_known.
template <EventSource S>
RunReport stream_alpha_unknown(S& events, const AlgoParams& params)
{
    RunReport r;
    r.algorithm = Algorithm::stream4;
    r.params = params;
    r.derived = derive_params(params, Algorithm::stream4);
    const double delta = r.derived.delta;
    const std::uint64_t n = *params.n;
    const long double n_sq = static_cast<long double>(n) * static_cast<long double>(n);

    InputSketch sk;
    DepthTable table;
    Time running_max = 1;
    std::optional<Time> p_min;
    std::optional<BucketRange> range; // set once the job phase ends
    Depth h = 0;

    auto close_job_phase = [&] {
        if (table.seen() == 0)
            throw input_error("empty job stream");
        if (table.seen() != n)
            throw input_error("stream has " + std::to_string(table.seen()) + " jobs but n = " + std::to_string(n));
        range = alpha_bucket_range(*sk.p_max(), n, delta);
        sk.restrict_to(range->lo, range->hi);
    };

    while (auto ev = events.next()) {
        ++r.update_count;
        if (const auto* job = std::get_if<Job>(&*ev)) {
            if (range)
                throw input_error("job event after arc events");
            detail::check_p(*job);
            if (table.seen() >= n)
                throw input_error("more job events than n = " + std::to_string(n));
            p_min = p_min ? std::min(*p_min, job->p) : job->p;
            const int u = bucket_index(job->p, delta);
            h = 1;
            if (static_cast<long double>(job->p) < static_cast<long double>(running_max) / n_sq) {
                table.insert(job->id, u, false);
                continue;
            }
            table.insert(job->id, u, true);
            running_max = std::max(running_max, job->p);
            sk.observe(job->p);
            if (sk.add_reporting_insert(1, u))
                sk.prune_smallest(bucket_index(static_cast<long double>(running_max) / n_sq, delta));
        } else {
            if (!range)
                close_job_phase();
            const auto& arc = std::get<Arc>(*ev);
            const Depth to = detail::relax_arc(table, arc, n);
            if (to != 0) {
                auto& dst = table.at(arc.dst);
                if (dst.counted && dst.u >= range->lo)
                    sk.move(dst.depth, dst.u, to);
                dst.depth = to;
                h = std::max(h, to);
            }
        }
        r.peak_sketch_nodes = std::max(r.peak_sketch_nodes, sk.size());
    }
    if (!range)
        close_job_phase();

    const Time p_max = *sk.p_max();
    const RoundedValueTable rp(delta, range->hi, static_cast<double>(p_max));
    const auto loads = detail::level_loads(sk, h, rp, params.m, range->lo, range->hi);
    const Time tail = ceil_div(p_max, static_cast<Time>(n));
    detail::assemble(r, loads, p_max, tail, tail, params.tight);

    const Time c_seen = ceil_div(p_max, *p_min);
    r.input_sketch = std::move(sk);
    r.input_sketch.set_extremes(p_min, p_max);
    r.sketch_nodes = r.input_sketch.size();
    r.discovered = {n, r.input_sketch.total_counted(), p_min, p_max, c_seen, h, range->lo, range->hi, std::nullopt};
    r.depths = table.depths();
    r.guarantee_condition_met = !params.tight && detail::cond_alpha(params, n, h, params.c.value_or(c_seen));
    return r;
}

template <EventSource S>
RunReport run_streaming(Algorithm algo, S& events, const AlgoParams& params)
{
    switch (algo) {
    case Algorithm::stream1: return stream_known(events, params);
    case Algorithm::stream2: return stream_unknown(events, params);
    case Algorithm::stream3: return stream_alpha_known(events, params);
    case Algorithm::stream4: return stream_alpha_unknown(events, params);
    default: throw param_error("not a streaming algorithm: " + std::string(algorithm_name(algo)));
    }
}

} // namespace schedsketch

#endif
