#ifndef SCHEDSKETCH_SAMPLING_HPP
#define SCHEDSKETCH_SAMPLING_HPP

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "input_sketch.hpp"
#include "report.hpp"
#include "streaming.hpp"

namespace schedsketch {

/// Random access to jobs by 0-based index. job(i) must be safe to call
/// concurrently when the access is shared between trials.
template <class A>
concept JobAccess = requires(const A& a, std::uint64_t i) {
    { a.size() } -> std::convertible_to<std::uint64_t>;
    { a.job(i) } -> std::same_as<Job>;
};

class MaterializedAccess {
public:
    explicit MaterializedAccess(std::span<const Job> jobs) : jobs_(jobs) {}

    std::uint64_t size() const { return jobs_.size(); }
    Job job(std::uint64_t i) const { return jobs_[i]; }

private:
    std::span<const Job> jobs_;
};

/// Streams every job of an access in index order (no arcs); lets a sketch
/// built from samples be turned into a schedule without materializing.
template <JobAccess A>
class AccessJobSource {
public:
    explicit AccessJobSource(const A& access) : access_(&access) {}

    std::optional<StreamEvent> next()
    {
        if (i_ >= access_->size())
            return std::nullopt;
        return StreamEvent{access_->job(i_++)};
    }

private:
    const A* access_;
    std::uint64_t i_ = 0;
};

/// Counts every job() call and the distinct indices touched. One per trial.
template <JobAccess Inner>
class CountingAccess {
public:
    explicit CountingAccess(const Inner& inner)
        : inner_(&inner), touched_((inner.size() + 63) / 64, 0)
    {
    }

    std::uint64_t size() const { return inner_->size(); }

    Job job(std::uint64_t i) const
    {
        ++calls_;
        auto& word = touched_[i / 64];
        const std::uint64_t bit = std::uint64_t{1} << (i % 64);
        if (!(word & bit)) {
            word |= bit;
            ++distinct_;
        }
        return inner_->job(i);
    }

    std::uint64_t calls() const { return calls_; }
    std::uint64_t distinct() const { return distinct_; }

private:
    const Inner* inner_;
    mutable std::vector<std::uint64_t> touched_;
    mutable std::uint64_t calls_ = 0;
    mutable std::uint64_t distinct_ = 0;
};

struct RawSample {
    InputSketch counts;
    std::uint64_t draws = 0;
    std::uint64_t kept = 0;
    bool full_scan = false;
};

/// Draws n' indices uniformly with replacement (or scans every job once when
/// n' >= n) and buckets the drawn jobs by (depth, bucket). Jobs with
/// p <= drop_at_most are drawn but not counted.
template <JobAccess A, class Check>
RawSample estimate_counts(const A& access, std::uint64_t n_prime, double delta, std::mt19937_64& rng,
                          std::optional<long double> drop_at_most, Check&& check)
{
    if (n_prime < 1)
        throw param_error("sample size must be at least 1");
    const std::uint64_t n = access.size();
    if (n == 0)
        throw input_error("empty instance");
    RawSample out;
    // Per-draw work is a hash lookup at most; repeated (p, depth) pairs hit
    // the cached bucket and counter directly.
    std::unordered_map<Time, int> bucket_of;
    std::unordered_map<std::uint64_t, std::uint64_t> tally;
    Time last_p = 0;
    int last_u = 0;
    std::uint64_t last_key = 0;
    std::uint64_t* last_slot = nullptr;
    std::optional<Time> lo;
    std::optional<Time> hi;
    auto take = [&](const Job& job) {
        check(job);
        if (drop_at_most && static_cast<long double>(job.p) <= *drop_at_most)
            return;
        if (job.p != last_p) {
            auto [it, fresh] = bucket_of.try_emplace(job.p, 0);
            if (fresh)
                it->second = bucket_index(job.p, delta);
            last_p = job.p;
            last_u = it->second;
            lo = lo ? std::min(*lo, job.p) : job.p;
            hi = hi ? std::max(*hi, job.p) : job.p;
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(*job.depth)) << 32) |
                                  static_cast<std::uint32_t>(last_u);
        if (!last_slot || key != last_key) {
            last_slot = &tally[key];
            last_key = key;
        }
        ++*last_slot;
        ++out.kept;
    };
    auto finish = [&] {
        for (const auto& [key, count] : tally)
            out.counts.add(static_cast<Depth>(key >> 32), static_cast<int>(static_cast<std::uint32_t>(key)), count);
        out.counts.set_extremes(lo, hi);
    };
    if (n_prime >= n) {
        out.full_scan = true;
        for (std::uint64_t i = 0; i < n; ++i)
            take(access.job(i));
        out.draws = n;
        finish();
        return out;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
    for (std::uint64_t s = 0; s < n_prime; ++s)
        take(access.job(pick(rng)));
    out.draws = n_prime;
    finish();
    return out;
}

template <JobAccess A>
RawSample estimate_counts(const A& access, std::uint64_t n_prime, double delta, std::mt19937_64& rng,
                          std::optional<long double> drop_at_most = std::nullopt)
{
    return estimate_counts(access, n_prime, delta, rng, drop_at_most, [](const Job& job) {
        if (!job.depth)
            throw input_error("sampled job " + std::to_string(job.id) + " has no depth");
    });
}

/// Largest processing time among n0 uniform draws.
template <JobAccess A>
Time estimate_wmax(const A& access, std::uint64_t n0, std::mt19937_64& rng)
{
    if (n0 < 1)
        throw param_error("n0 must be at least 1");
    if (access.size() == 0)
        throw input_error("empty instance");
    std::uniform_int_distribution<std::uint64_t> pick(0, access.size() - 1);
    Time w0 = 0;
    for (std::uint64_t s = 0; s < n0; ++s)
        w0 = std::max(w0, access.job(pick(rng)).p);
    return w0;
}

namespace detail {

// Scales raw counts by n/n' and keeps groups above 2*tau; accumulates
// per-depth loads over buckets in [u_lo, u_hi].
inline LevelLoads estimated_loads(RunReport& r, const RawSample& raw, std::uint64_t n, Depth h,
                                  const RoundedValueTable& rp, int u_lo, int u_hi)
{
    const long double scale = static_cast<long double>(n) / static_cast<long double>(raw.draws);
    const long double cut = 2.0L * static_cast<long double>(r.derived.tau);
    LevelLoads out{std::vector<double>(static_cast<std::size_t>(h), 0.0),
                   std::vector<std::uint64_t>(static_cast<std::size_t>(h), 0)};
    raw.counts.for_each([&](Depth d, int u, std::uint64_t count) {
        const long double e = scale * static_cast<long double>(count);
        if (!(e > cut))
            return;
        r.estimated.push_back({d, u, static_cast<double>(e)});
        if (u < u_lo || u > u_hi)
            return;
        out.load[static_cast<std::size_t>(d - 1)] += static_cast<double>(e) * rp(u);
        out.jobs[static_cast<std::size_t>(d - 1)] += count;
    });
    for (auto& a : out.load)
        a /= static_cast<double>(r.params.m);
    return out;
}

// A-hat = sum_d (floor(A_d) + slack); t_d grows by floor(A_d/(1-delta)) + sks_slack.
inline void assemble_estimated(RunReport& r, const LevelLoads& loads, Time slack, Time sks_slack)
{
    const double shrink = 1.0 - r.derived.delta;
    Time a = 0;
    Time t = 0;
    r.sks.t.clear();
    for (std::size_t i = 0; i < loads.load.size(); ++i) {
        if (r.params.tight && loads.jobs[i] == 0) {
            r.sks.t.push_back(t);
            continue;
        }
        a += snapped_floor(loads.load[i]) + slack;
        t += snapped_floor(loads.load[i] / shrink) + sks_slack;
        r.sks.t.push_back(t);
    }
    r.A = static_cast<double>(a);
    r.sks.provenance = std::string(algorithm_name(r.algorithm));
}

inline Time floor_3tau(double tau) { return snapped_floor(3.0 * tau); }

} // namespace detail

/// Sampling scheme for instances with 1 <= p <= c and depths in [1, h].
template <JobAccess A>
RunReport rand_approx_bounded(const A& access, AlgoParams params)
{
    params.n = access.size();
    RunReport r;
    r.algorithm = Algorithm::sample1;
    r.params = params;
    r.derived = derive_params(params, Algorithm::sample1);
    const Time c = *params.c;
    const Depth h = *params.h;
    const std::uint64_t n = *params.n;

    std::mt19937_64 rng(params.seed);
    const auto raw = estimate_counts(access, r.derived.n_prime, r.derived.delta, rng, std::nullopt,
                                     [&](const Job& job) {
                                         detail::checked_depth(job, h);
                                         if (job.p < 1 || job.p > c)
                                             throw input_error("sampled job " + std::to_string(job.id) +
                                                               " has p outside [1,c]");
                                     });
    const RoundedValueTable rp(r.derived.delta, r.derived.k, static_cast<double>(c));
    const auto loads = detail::estimated_loads(r, raw, n, h, rp, 0, r.derived.k);
    const Time reserve = detail::floor_3tau(r.derived.tau) * r.derived.k_eff * c;
    detail::assemble_estimated(r, loads, c, c + reserve);

    r.samples_drawn = raw.draws;
    r.full_scan = raw.full_scan;
    r.input_sketch = raw.counts;
    r.sketch_nodes = r.estimated.size();
    r.peak_sketch_nodes = raw.counts.size();
    r.update_count = raw.draws;
    r.discovered = {n, raw.kept, raw.counts.p_min(), raw.counts.p_max(), c, h, 0, r.derived.k, std::nullopt};
    r.guarantee_condition_met =
        !params.tight &&
        machines_within(params.m, static_cast<long double>(n) * params.epsilon / (20.0L * h * static_cast<long double>(c)));
    return r;
}

/// Sampling scheme for alpha-constrained instances: the largest alpha*n
/// jobs lie within a factor c of each other.
template <JobAccess A>
RunReport rand_approx_alpha(const A& access, AlgoParams params)
{
    params.n = access.size();
    RunReport r;
    r.algorithm = Algorithm::sample2;
    r.params = params;
    r.derived = derive_params(params, Algorithm::sample2);
    const Time c = *params.c;
    const Depth h = *params.h;
    const std::uint64_t n = *params.n;
    const double delta = r.derived.delta;

    std::mt19937_64 rng(params.seed);
    const Time w0 = estimate_wmax(access, r.derived.n0, rng);
    const long double small = static_cast<long double>(delta) * w0 / static_cast<long double>(n);
    const auto raw = estimate_counts(access, r.derived.n_prime, delta, rng, small, [&](const Job& job) {
        detail::checked_depth(job, h);
        detail::check_p(job);
    });
    const Time top = c * w0;
    const int u_lo = bucket_index(small, delta);
    const int u_hi = bucket_index(top, delta);
    const RoundedValueTable rp(delta, u_hi, static_cast<double>(top));
    const auto loads = detail::estimated_loads(r, raw, n, h, rp, u_lo, u_hi);
    const Time reserve = detail::floor_3tau(r.derived.tau) * r.derived.k_eff * top;
    const Time tail = snapped_floor(static_cast<double>(delta * static_cast<long double>(w0)));
    detail::assemble_estimated(r, loads, top, top + reserve + tail);

    r.samples_drawn = r.derived.n0 + raw.draws;
    r.full_scan = raw.full_scan;
    r.input_sketch = raw.counts;
    r.sketch_nodes = r.estimated.size();
    r.peak_sketch_nodes = raw.counts.size();
    r.update_count = r.samples_drawn;
    r.discovered = {n, raw.kept, raw.counts.p_min(), raw.counts.p_max(), c, h, u_lo, u_hi, w0};
    r.guarantee_condition_met =
        !params.tight && machines_within(params.m, static_cast<long double>(n) * params.alpha * params.epsilon /
                                                       (20.0L * static_cast<long double>(c) * static_cast<long double>(c) * h));
    return r;
}

template <JobAccess A>
RunReport run_sampling(Algorithm algo, const A& access, const AlgoParams& params)
{
    switch (algo) {
    case Algorithm::sample1: return rand_approx_bounded(access, params);
    case Algorithm::sample2: return rand_approx_alpha(access, params);
    default: throw param_error("not a sampling algorithm: " + std::string(algorithm_name(algo)));
    }
}

/// Worker count: SCHEDSKETCH_THREADS if set, else hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("SCHEDSKETCH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0..count-1) across worker threads; results come back in index order.
template <class R>
std::vector<R> run_trials(std::size_t count, const std::function<R(std::size_t)>& fn, unsigned workers = 0)
{
    if (workers == 0)
        workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    std::vector<R> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i])
            std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

} // namespace schedsketch

#endif
