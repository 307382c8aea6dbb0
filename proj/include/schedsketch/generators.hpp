#ifndef SCHEDSKETCH_GENERATORS_HPP
#define SCHEDSKETCH_GENERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "instance.hpp"
#include "oracles.hpp"

namespace schedsketch {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [lo, hi] from a 64-bit hash (modulo bias is irrelevant here).
inline Time hashed_range(std::uint64_t h, Time lo, Time hi)
{
    return lo + static_cast<Time>(h % static_cast<std::uint64_t>(hi - lo + 1));
}

// ---------------------------------------------------------------------------
// Family parameters.

/// m*q disjoint chains of h unit jobs; optimum q*h.
struct ChainFamily {
    std::int64_t m = 1;
    std::int64_t q = 1;
    Depth h = 1;
    std::uint64_t seed = 0;
};

/// n jobs with p uniform in [p_lo, p_hi] spread evenly over h <= n levels.
struct UniformFamily {
    std::uint64_t n = 1;
    Time p_lo = 1;
    Time p_hi = 1;
    Depth h = 1;
    std::uint64_t seed = 0;
};

/// h layers of `width` jobs, p uniform in [1, c]; each job beyond the first
/// layer depends on one random job of the previous layer.
struct LayeredFamily {
    std::uint64_t width = 1;
    Depth h = 1;
    Time c = 1;
    std::uint64_t seed = 0;
};

/// Exactly ceil(alpha*n) big jobs with p in [ceil(p_big/c), p_big]; the rest
/// log-uniform in [1, small_max]. Jobs are spread over h <= n levels.
struct AlphaMixedFamily {
    std::uint64_t n = 1;
    double alpha = 1.0;
    Time c = 1;
    Time p_big = 1;
    Time small_max = 1;
    Depth h = 1;
    std::uint64_t seed = 0;
};

/// n jobs with p uniform in [1, c] assigned to h levels; each job above
/// level 1 gets one arc from the level below plus extra arcs from any lower
/// level with probability `density`. Depths are recomputed from the arcs.
struct RandomDagFamily {
    std::uint64_t n = 1;
    Depth h = 1;
    double density = 0.2;
    Time c = 1;
    std::uint64_t seed = 0;
};

using FamilySpec = std::variant<ChainFamily, UniformFamily, LayeredFamily, AlphaMixedFamily, RandomDagFamily>;

inline std::uint64_t alpha_big_count(std::uint64_t n, double alpha)
{
    return static_cast<std::uint64_t>(std::ceil(static_cast<long double>(alpha) * static_cast<long double>(n) - 1e-12L));
}

// ---------------------------------------------------------------------------
// Implicit (O(1) memory) families: job(i) is a pure function of (seed, i).

class ChainAccess {
public:
    explicit ChainAccess(ChainFamily f) : f_(f)
    {
        if (f_.m < 1 || f_.q < 1 || f_.h < 1)
            throw param_error("chain family needs m, q, h >= 1");
    }

    std::uint64_t size() const
    {
        return static_cast<std::uint64_t>(f_.m) * static_cast<std::uint64_t>(f_.q) * static_cast<std::uint64_t>(f_.h);
    }

    // Chain-major ids: id = chain*h + level + 1.
    Job job(std::uint64_t i) const
    {
        return Job{static_cast<JobId>(i + 1), 1, static_cast<Depth>(i % static_cast<std::uint64_t>(f_.h)) + 1};
    }

    Time optimum() const { return f_.q * f_.h; }
    const ChainFamily& family() const { return f_; }

private:
    ChainFamily f_;
};

class UniformAccess {
public:
    explicit UniformAccess(UniformFamily f) : f_(f)
    {
        if (f_.n < 1 || f_.p_lo < 1 || f_.p_hi < f_.p_lo || f_.h < 1 || static_cast<std::uint64_t>(f_.h) > f_.n)
            throw param_error("uniform family needs n >= 1, 1 <= p_lo <= p_hi, 1 <= h <= n");
    }

    std::uint64_t size() const { return f_.n; }

    Job job(std::uint64_t i) const
    {
        const Time p = f_.p_lo == f_.p_hi ? f_.p_lo : hashed_range(splitmix64(f_.seed ^ splitmix64(i)), f_.p_lo, f_.p_hi);
        return Job{static_cast<JobId>(i + 1), p, level_of(i, f_.n, f_.h)};
    }

    static Depth level_of(std::uint64_t i, std::uint64_t n, Depth h)
    {
        return static_cast<Depth>(i * static_cast<std::uint64_t>(h) / n) + 1;
    }

    const UniformFamily& family() const { return f_; }

private:
    UniformFamily f_;
};

class AlphaMixedAccess {
public:
    explicit AlphaMixedAccess(AlphaMixedFamily f) : f_(f)
    {
        if (f_.n < 1 || !(f_.alpha > 0 && f_.alpha <= 1) || f_.c < 1 || f_.p_big < 1 || f_.small_max < 1 || f_.h < 1 ||
            static_cast<std::uint64_t>(f_.h) > f_.n)
            throw param_error("alpha-mixed family parameters out of range");
        big_ = alpha_big_count(f_.n, f_.alpha);
        if (big_ < 1)
            throw param_error("alpha-mixed family needs alpha*n >= 1");
        big_lo_ = ceil_div(f_.p_big, f_.c);
        // Index permutation i -> (a*i + b) mod n with gcd(a, n) = 1.
        a_ = splitmix64(f_.seed) % f_.n;
        if (a_ == 0)
            a_ = 1;
        while (std::gcd(a_, f_.n) != 1)
            a_ = a_ + 1 < f_.n ? a_ + 1 : 1;
        b_ = splitmix64(f_.seed + 1) % f_.n;
    }

    std::uint64_t size() const { return f_.n; }
    std::uint64_t big_count() const { return big_; }

    bool is_big(std::uint64_t i) const
    {
        const auto pos = static_cast<std::uint64_t>((static_cast<unsigned __int128>(a_) * i + b_) % f_.n);
        return pos < big_;
    }

    Job job(std::uint64_t i) const
    {
        const std::uint64_t h = splitmix64(f_.seed ^ splitmix64(i + 0x51ed27u));
        Time p = 0;
        if (is_big(i)) {
            p = hashed_range(h, big_lo_, f_.p_big);
        } else if (f_.small_max == 1) {
            p = 1;
        } else {
            const double r = static_cast<double>(h >> 11) * 0x1.0p-53;
            p = std::clamp<Time>(static_cast<Time>(std::floor(std::exp(r * std::log(static_cast<double>(f_.small_max) + 1.0)))),
                                 1, f_.small_max);
        }
        return Job{static_cast<JobId>(i + 1), p, UniformAccess::level_of(i, f_.n, f_.h)};
    }

    const AlphaMixedFamily& family() const { return f_; }

private:
    AlphaMixedFamily f_;
    std::uint64_t big_ = 0;
    Time big_lo_ = 1;
    std::uint64_t a_ = 1;
    std::uint64_t b_ = 0;
};

// ---------------------------------------------------------------------------
// Materialized instances.

template <class Access>
Instance materialize(const Access& access)
{
    Instance inst;
    inst.jobs.reserve(access.size());
    for (std::uint64_t i = 0; i < access.size(); ++i)
        inst.jobs.push_back(access.job(i));
    return inst;
}

// Arcs sorted by (depth of src, src, dst), which is a topological order.
inline void sort_arcs_topologically(Instance& inst)
{
    const auto depth = compute_depths(inst.arcs, inst.n());
    std::sort(inst.arcs.begin(), inst.arcs.end(), [&](const Arc& x, const Arc& y) {
        const auto kx = std::tuple(depth[x.src - 1], x.src, x.dst);
        const auto ky = std::tuple(depth[y.src - 1], y.src, y.dst);
        return kx < ky;
    });
}

// For level-spread families: every job above level 1 depends on the first
// job of the level below, so carried depths agree with the arcs.
inline void link_levels(Instance& inst)
{
    std::map<Depth, JobId> first;
    for (const auto& j : inst.jobs)
        first.try_emplace(*j.depth, j.id);
    for (const auto& j : inst.jobs)
        if (*j.depth > 1)
            inst.arcs.push_back({first.at(*j.depth - 1), j.id});
    sort_arcs_topologically(inst);
}

inline Instance generate(const ChainFamily& f)
{
    ChainAccess access(f);
    Instance inst = materialize(access);
    const auto chains = static_cast<std::uint64_t>(f.m) * static_cast<std::uint64_t>(f.q);
    for (std::uint64_t ch = 0; ch < chains; ++ch)
        for (Depth l = 1; l < f.h; ++l) {
            const auto id = static_cast<JobId>(ch * static_cast<std::uint64_t>(f.h) + static_cast<std::uint64_t>(l));
            inst.arcs.push_back({id, id + 1});
        }
    sort_arcs_topologically(inst);
    inst.meta = {"chain", access.optimum(), f.m, 1.0, 1, f.h, f.seed};
    return inst;
}

inline Instance generate(const UniformFamily& f)
{
    UniformAccess access(f);
    Instance inst = materialize(access);
    link_levels(inst);
    inst.meta = {"uniform", std::nullopt, std::nullopt, 1.0, ceil_div(f.p_hi, f.p_lo), inst.height(), f.seed};
    return inst;
}

inline Instance generate(const AlphaMixedFamily& f)
{
    AlphaMixedAccess access(f);
    Instance inst = materialize(access);
    link_levels(inst);
    inst.meta = {"alpha-mixed", std::nullopt, std::nullopt, f.alpha, f.c, inst.height(), f.seed};
    return inst;
}

inline Instance generate(const LayeredFamily& f)
{
    if (f.width < 1 || f.h < 1 || f.c < 1)
        throw param_error("layered family needs width, h, c >= 1");
    std::mt19937_64 rng(f.seed);
    std::uniform_int_distribution<Time> pick_p(1, f.c);
    std::uniform_int_distribution<std::uint64_t> pick_parent(0, f.width - 1);
    Instance inst;
    for (Depth d = 1; d <= f.h; ++d)
        for (std::uint64_t w = 0; w < f.width; ++w) {
            const auto id = static_cast<JobId>(inst.jobs.size() + 1);
            inst.jobs.push_back({id, pick_p(rng), d});
            if (d > 1) {
                const auto parent = static_cast<JobId>((d - 2) * f.width + pick_parent(rng) + 1);
                inst.arcs.push_back({parent, id});
            }
        }
    sort_arcs_topologically(inst);
    inst.meta = {"layered", std::nullopt, std::nullopt, 1.0, f.c, f.h, f.seed};
    return inst;
}

inline Instance generate(const RandomDagFamily& f)
{
    if (f.n < 1 || f.h < 1 || f.c < 1 || !(f.density >= 0 && f.density <= 1))
        throw param_error("random-dag family needs n, h, c >= 1 and density in [0,1]");
    std::mt19937_64 rng(f.seed);
    std::uniform_int_distribution<Time> pick_p(1, f.c);
    std::uniform_int_distribution<Depth> pick_level(1, f.h);
    std::bernoulli_distribution extra(f.density);
    Instance inst;
    std::vector<Depth> level(f.n);
    for (std::uint64_t i = 0; i < f.n; ++i) {
        level[i] = pick_level(rng);
        inst.jobs.push_back({static_cast<JobId>(i + 1), pick_p(rng), std::nullopt});
    }
    std::map<Depth, std::vector<JobId>> by_level;
    for (std::uint64_t i = 0; i < f.n; ++i)
        by_level[level[i]].push_back(static_cast<JobId>(i + 1));
    for (std::uint64_t i = 0; i < f.n; ++i) {
        const auto id = static_cast<JobId>(i + 1);
        std::vector<JobId> parents;
        if (auto it = by_level.find(level[i] - 1); it != by_level.end()) {
            std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
            parents.push_back(it->second[pick(rng)]);
        }
        for (std::uint64_t j = 0; j < f.n; ++j) {
            if (level[j] < level[i] && extra(rng))
                parents.push_back(static_cast<JobId>(j + 1));
        }
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
        for (JobId s : parents)
            inst.arcs.push_back({s, id});
    }
    inst = with_computed_depths(std::move(inst));
    sort_arcs_topologically(inst);
    inst.meta = {"random-dag", std::nullopt, std::nullopt, 1.0, ceil_div(inst.p_max(), inst.p_min()), inst.height(),
                 f.seed};
    return inst;
}

inline Instance generate(const FamilySpec& spec)
{
    return std::visit([](const auto& f) { return generate(f); }, spec);
}

// ---------------------------------------------------------------------------
// Gen-spec strings: "<family>:key=value,key=value".

namespace detail {

inline std::map<std::string, std::string> parse_kv(std::string_view body)
{
    std::map<std::string, std::string> kv;
    while (!body.empty()) {
        const auto comma = body.find(',');
        const auto item = body.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw param_error("malformed gen-spec item '" + std::string(item) + "'");
        kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        if (comma == std::string_view::npos)
            break;
        body.remove_prefix(comma + 1);
    }
    return kv;
}

class KvReader {
public:
    explicit KvReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    template <class T>
    void get(const char* key, T& out)
    {
        auto it = kv_.find(key);
        if (it == kv_.end())
            return;
        try {
            std::size_t used = 0;
            if constexpr (std::is_floating_point_v<T>)
                out = static_cast<T>(std::stod(it->second, &used));
            else if constexpr (std::is_signed_v<T>)
                out = static_cast<T>(std::stoll(it->second, &used));
            else
                out = static_cast<T>(std::stoull(it->second, &used));
            if (used != it->second.size())
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw param_error("gen-spec value for '" + std::string(key) + "' is not a number");
        }
        kv_.erase(it);
    }

    void finish() const
    {
        if (!kv_.empty())
            throw param_error("unknown gen-spec key '" + kv_.begin()->first + "'");
    }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace detail

inline bool looks_like_gen_spec(std::string_view s)
{
    for (std::string_view fam : {"chain:", "uniform:", "layered:", "alpha-mixed:", "random-dag:"})
        if (s.substr(0, fam.size()) == fam)
            return true;
    for (std::string_view fam : {"chain", "uniform", "layered", "alpha-mixed", "random-dag"})
        if (s == fam)
            return true;
    return false;
}

inline FamilySpec parse_gen_spec(std::string_view spec)
{
    const auto colon = spec.find(':');
    const std::string family(spec.substr(0, colon));
    detail::KvReader kv(detail::parse_kv(colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1)));
    FamilySpec out;
    if (family == "chain") {
        ChainFamily f;
        kv.get("m", f.m);
        kv.get("q", f.q);
        kv.get("h", f.h);
        kv.get("seed", f.seed);
        out = f;
    } else if (family == "uniform") {
        UniformFamily f;
        kv.get("n", f.n);
        kv.get("plo", f.p_lo);
        kv.get("phi", f.p_hi);
        kv.get("h", f.h);
        kv.get("seed", f.seed);
        out = f;
    } else if (family == "layered") {
        LayeredFamily f;
        kv.get("width", f.width);
        kv.get("h", f.h);
        kv.get("c", f.c);
        kv.get("seed", f.seed);
        out = f;
    } else if (family == "alpha-mixed") {
        AlphaMixedFamily f;
        kv.get("n", f.n);
        kv.get("alpha", f.alpha);
        kv.get("c", f.c);
        kv.get("pbig", f.p_big);
        kv.get("smallmax", f.small_max);
        kv.get("h", f.h);
        kv.get("seed", f.seed);
        out = f;
    } else if (family == "random-dag") {
        RandomDagFamily f;
        kv.get("n", f.n);
        kv.get("h", f.h);
        kv.get("density", f.density);
        kv.get("c", f.c);
        kv.get("seed", f.seed);
        out = f;
    } else {
        throw param_error("unknown instance family '" + family + "'");
    }
    kv.finish();
    return out;
}

inline std::string family_name(const FamilySpec& spec)
{
    constexpr const char* names[] = {"chain", "uniform", "layered", "alpha-mixed", "random-dag"};
    return names[spec.index()];
}

/// Families that support O(1)-memory random access.
using ImplicitAccess = std::variant<ChainAccess, UniformAccess, AlphaMixedAccess>;

inline std::optional<ImplicitAccess> implicit_access(const FamilySpec& spec)
{
    if (const auto* f = std::get_if<ChainFamily>(&spec))
        return ImplicitAccess{ChainAccess(*f)};
    if (const auto* f = std::get_if<UniformFamily>(&spec))
        return ImplicitAccess{UniformAccess(*f)};
    if (const auto* f = std::get_if<AlphaMixedFamily>(&spec))
        return ImplicitAccess{AlphaMixedAccess(*f)};
    return std::nullopt;
}

} // namespace schedsketch

#endif
