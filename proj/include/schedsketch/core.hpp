#ifndef SCHEDSKETCH_CORE_HPP
#define SCHEDSKETCH_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace schedsketch {

using JobId = std::uint32_t;
using Time = std::int64_t;
using Depth = int;

// Error hierarchy. The CLI maps each kind to a distinct exit status.

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad algorithm parameters (epsilon out of range, m < 1, missing fields).
struct param_error : error {
    using error::error;
};

// The input stream or instance violates the documented contract.
struct input_error : error {
    using error::error;
};

// Internal bookkeeping is inconsistent (e.g. moving a job that is not counted).
struct invariant_violation : error {
    using error::error;
};

// A schedule sketch cannot hold the jobs it is applied to.
struct sketch_infeasible : error {
    using error::error;
};

struct Job {
    JobId id = 0;
    Time p = 1;
    std::optional<Depth> depth;

    friend bool operator==(const Job&, const Job&) = default;
};

struct Arc {
    JobId src = 0;
    JobId dst = 0;

    friend bool operator==(const Arc&, const Arc&) = default;
};

using StreamEvent = std::variant<Job, Arc>;

enum class Algorithm { stream1, stream2, stream3, stream4, sample1, sample2 };

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::stream1: return "stream1";
    case Algorithm::stream2: return "stream2";
    case Algorithm::stream3: return "stream3";
    case Algorithm::stream4: return "stream4";
    case Algorithm::sample1: return "sample1";
    case Algorithm::sample2: return "sample2";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    for (auto a : {Algorithm::stream1, Algorithm::stream2, Algorithm::stream3, Algorithm::stream4,
                   Algorithm::sample1, Algorithm::sample2}) {
        if (algorithm_name(a) == name)
            return a;
    }
    throw param_error("unknown algorithm '" + std::string(name) + "'");
}

inline bool is_sampling(Algorithm a) { return a == Algorithm::sample1 || a == Algorithm::sample2; }

struct AlgoParams {
    double epsilon = 0.3;
    std::int64_t m = 1;
    std::optional<Time> c;
    std::optional<Depth> h;
    double alpha = 1.0;
    std::optional<std::uint64_t> n;
    std::uint64_t seed = 0;
    double confidence_scale = 1.0;
    // Skip empty depth levels instead of charging them the per-level slack.
    // Off by default; runs with it set make no guarantee claims.
    bool tight = false;

    friend bool operator==(const AlgoParams&, const AlgoParams&) = default;
};

// Constants derived from AlgoParams for one algorithm. Fields that do not
// apply to the chosen algorithm stay at zero.
struct DerivedParams {
    double delta = 0;
    int k = 0;
    int k_eff = 0;
    double gamma = 0;
    double sample_prob = 0; // the threshold probability p
    double beta = 0;
    std::uint64_t n_prime = 0;
    std::uint64_t n0 = 0;
    double tau = 0;

    friend bool operator==(const DerivedParams&, const DerivedParams&) = default;
};

/// Smallest integer u with (1+delta)^u <= x < (1+delta)^(u+1), for real x > 0.
///
/// The float logarithm gives a first guess; the defining inequality is then
/// checked in long double and u nudged until it holds.
inline int bucket_index(long double x, double delta)
{
    if (!(x > 0) || !(delta > 0))
        throw param_error("bucket_index needs x > 0 and delta > 0");
    const long double base = 1.0L + static_cast<long double>(delta);
    auto u = static_cast<int>(std::floor(std::log(x) / std::log1p(static_cast<long double>(delta))));
    while (std::pow(base, static_cast<long double>(u)) > x)
        --u;
    while (std::pow(base, static_cast<long double>(u + 1)) <= x)
        ++u;
    return u;
}

inline int bucket_index(Time p, double delta) { return bucket_index(static_cast<long double>(p), delta); }

/// floor(x), except values within 1e-9 below an integer snap up to it.
inline Time snapped_floor(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9)
        return static_cast<Time>(r);
    return static_cast<Time>(std::floor(x));
}

inline Time ceil_div(Time a, Time b) { return (a + b - 1) / b; }

/// m <= bound, allowing 1e-9 relative slack for decimal inputs such as 0.3.
inline bool machines_within(std::int64_t m, long double bound)
{
    return static_cast<long double>(m) <= bound * (1.0L + 1e-9L);
}

inline void validate_common(const AlgoParams& params)
{
    if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
        throw param_error("epsilon must lie in (0,1)");
    if (!(params.alpha > 0.0 && params.alpha <= 1.0))
        throw param_error("alpha must lie in (0,1]");
    if (params.m < 1)
        throw param_error("m must be at least 1");
    if (!(params.confidence_scale > 0.0))
        throw param_error("confidence_scale must be positive");
    if (params.c && *params.c < 1)
        throw param_error("c must be at least 1");
    if (params.h && *params.h < 1)
        throw param_error("h must be at least 1");
    if (params.n && *params.n < 1)
        throw param_error("n must be at least 1");
}

namespace detail {

inline std::uint64_t scaled_ceil(long double value, double scale)
{
    const long double scaled = std::ceil(value * static_cast<long double>(scale));
    if (scaled >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
        return std::numeric_limits<std::uint64_t>::max();
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(scaled));
}

template <class T>
T require(const std::optional<T>& v, const char* what, Algorithm a)
{
    if (!v)
        throw param_error(std::string(what) + " is required by " + std::string(algorithm_name(a)));
    return *v;
}

} // namespace detail

/// Draws needed so that, with probability 1 - gamma, at least one of the
/// largest alpha*n jobs is sampled: 1 when alpha = 1, else ceil(ln gamma / ln(1 - alpha)).
inline std::uint64_t wmax_sample_count(double alpha, double gamma, double confidence_scale = 1.0)
{
    if (alpha >= 1.0)
        return detail::scaled_ceil(1.0L, confidence_scale);
    const long double draws = std::ceil(std::log(static_cast<long double>(gamma)) /
                                        std::log1p(-static_cast<long double>(alpha)));
    return detail::scaled_ceil(draws, confidence_scale);
}

/// Derives delta, k, and (for the sampling schemes) the sample-size constants.
inline DerivedParams derive_params(const AlgoParams& raw, Algorithm mode)
{
    validate_common(raw);
    DerivedParams out;
    switch (mode) {
    case Algorithm::stream1:
        out.delta = raw.epsilon / 3.0;
        out.k = bucket_index(detail::require(raw.c, "c", mode), out.delta);
        detail::require(raw.h, "h", mode);
        out.k_eff = std::max(out.k, 1);
        return out;
    case Algorithm::stream2:
        out.delta = raw.epsilon / 3.0;
        return out;
    case Algorithm::stream3:
        out.delta = raw.epsilon / 3.0;
        detail::require(raw.n, "n", mode);
        detail::require(raw.h, "h", mode);
        detail::require(raw.c, "c", mode);
        return out;
    case Algorithm::stream4:
        out.delta = raw.epsilon / 3.0;
        detail::require(raw.n, "n", mode);
        return out;
    case Algorithm::sample1:
    case Algorithm::sample2: break;
    }

    const auto c = detail::require(raw.c, "c", mode);
    const auto h = detail::require(raw.h, "h", mode);
    const auto n = detail::require(raw.n, "n", mode);
    const long double delta = raw.epsilon / 20.0L;
    out.delta = static_cast<double>(delta);

    const long double cl = static_cast<long double>(c);
    const long double hl = static_cast<long double>(h);
    const long double ml = static_cast<long double>(raw.m);
    if (mode == Algorithm::sample1) {
        out.k = bucket_index(c, out.delta);
    } else {
        out.k = bucket_index(cl * static_cast<long double>(n) / delta, out.delta);
    }
    out.k_eff = std::max(out.k, 1);
    const long double k_eff = out.k_eff;
    const long double gamma = 1.0L / (10.0L * hl * k_eff);

    long double p = 0;
    long double nprime = 0;
    if (mode == Algorithm::sample1) {
        p = 5.0L * delta / (2.0L * cl * hl * k_eff * ml);
        const long double beta = delta * p;
        nprime = 3.0L / (beta * beta) * std::log(2.0L / gamma);
        out.beta = static_cast<double>(beta);
        out.n0 = 0;
    } else {
        const long double alpha = raw.alpha;
        p = 5.0L * alpha * delta / (2.0L * cl * cl * hl * k_eff * ml);
        const long double beta = delta * p;
        nprime = 3.0L / (alpha * beta * beta) * std::log(2.0L / gamma);
        out.beta = static_cast<double>(beta);
        out.n0 = wmax_sample_count(raw.alpha, static_cast<double>(gamma), raw.confidence_scale);
    }
    out.gamma = static_cast<double>(gamma);
    out.sample_prob = static_cast<double>(p);
    out.n_prime = detail::scaled_ceil(nprime, raw.confidence_scale);
    out.tau = static_cast<double>(static_cast<long double>(n) * p);
    return out;
}

/// Time instants t_1..t_h; depth d jobs live in [t_{d-1}, t_d) with t_0 = 0.
struct ScheduleSketch {
    std::vector<Time> t;
    std::string provenance;

    Time start_of(Depth d) const { return d <= 1 ? 0 : t.at(static_cast<std::size_t>(d - 2)); }
    Time end_of(Depth d) const { return t.at(static_cast<std::size_t>(d - 1)); }
    Depth levels() const { return static_cast<Depth>(t.size()); }

    friend bool operator==(const ScheduleSketch&, const ScheduleSketch&) = default;
};

} // namespace schedsketch

#endif
