#ifndef SCHEDSKETCH_REPORT_HPP
#define SCHEDSKETCH_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "input_sketch.hpp"

namespace schedsketch {

// Thresholded estimate for one (depth, bucket) group.
struct EstimatedEntry {
    Depth d = 1;
    int u = 0;
    double estimate = 0;

    friend bool operator==(const EstimatedEntry&, const EstimatedEntry&) = default;
};

// Values learned from the data rather than supplied up front.
struct Discovered {
    std::uint64_t jobs = 0;    // job events seen (or n for sampling)
    std::uint64_t counted = 0; // jobs that entered the sketch
    std::optional<Time> p_min;
    std::optional<Time> p_max;
    std::optional<Time> c;
    Depth h = 0;
    int u_lo = 0;
    int u_hi = 0;
    std::optional<Time> w0;

    friend bool operator==(const Discovered&, const Discovered&) = default;
};

struct RunReport {
    Algorithm algorithm = Algorithm::stream1;
    double A = 0;
    ScheduleSketch sks;
    std::size_t sketch_nodes = 0;
    std::size_t peak_sketch_nodes = 0;
    std::uint64_t samples_drawn = 0;
    std::uint64_t update_count = 0;
    AlgoParams params;
    DerivedParams derived;
    bool guarantee_condition_met = false;
    Discovered discovered;
    InputSketch input_sketch;                 // counts (raw sampled counts for sampling)
    std::vector<EstimatedEntry> estimated;    // sampling only
    std::vector<Depth> depths;                // per job id, unknown-depth modes only
    bool full_scan = false;                   // sampling cap fallback was taken

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

namespace detail {

template <class T>
nlohmann::json opt_json(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> json_opt(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return j[key].get<T>();
}

} // namespace detail

inline void to_json(nlohmann::json& j, const AlgoParams& p)
{
    j = nlohmann::json{{"epsilon", p.epsilon},
                       {"m", p.m},
                       {"c", detail::opt_json(p.c)},
                       {"h", detail::opt_json(p.h)},
                       {"alpha", p.alpha},
                       {"n", detail::opt_json(p.n)},
                       {"seed", p.seed},
                       {"confidence_scale", p.confidence_scale},
                       {"tight", p.tight}};
}

inline void from_json(const nlohmann::json& j, AlgoParams& p)
{
    p = AlgoParams{};
    p.epsilon = j.at("epsilon").get<double>();
    p.m = j.at("m").get<std::int64_t>();
    p.c = detail::json_opt<Time>(j, "c");
    p.h = detail::json_opt<Depth>(j, "h");
    p.alpha = j.value("alpha", 1.0);
    p.n = detail::json_opt<std::uint64_t>(j, "n");
    p.seed = j.value("seed", std::uint64_t{0});
    p.confidence_scale = j.value("confidence_scale", 1.0);
    p.tight = j.value("tight", false);
}

inline void to_json(nlohmann::json& j, const DerivedParams& d)
{
    j = nlohmann::json{{"delta", d.delta},     {"k", d.k},     {"k_eff", d.k_eff},
                       {"gamma", d.gamma},     {"p", d.sample_prob}, {"beta", d.beta},
                       {"n_prime", d.n_prime}, {"n0", d.n0},   {"tau", d.tau}};
}

inline void from_json(const nlohmann::json& j, DerivedParams& d)
{
    d.delta = j.at("delta").get<double>();
    d.k = j.at("k").get<int>();
    d.k_eff = j.at("k_eff").get<int>();
    d.gamma = j.at("gamma").get<double>();
    d.sample_prob = j.at("p").get<double>();
    d.beta = j.at("beta").get<double>();
    d.n_prime = j.at("n_prime").get<std::uint64_t>();
    d.n0 = j.at("n0").get<std::uint64_t>();
    d.tau = j.at("tau").get<double>();
}

inline void to_json(nlohmann::json& j, const Discovered& d)
{
    j = nlohmann::json{{"jobs", d.jobs},
                       {"counted", d.counted},
                       {"p_min", detail::opt_json(d.p_min)},
                       {"p_max", detail::opt_json(d.p_max)},
                       {"c", detail::opt_json(d.c)},
                       {"h", d.h},
                       {"u_lo", d.u_lo},
                       {"u_hi", d.u_hi},
                       {"w0", detail::opt_json(d.w0)}};
}

inline void from_json(const nlohmann::json& j, Discovered& d)
{
    d.jobs = j.at("jobs").get<std::uint64_t>();
    d.counted = j.at("counted").get<std::uint64_t>();
    d.p_min = detail::json_opt<Time>(j, "p_min");
    d.p_max = detail::json_opt<Time>(j, "p_max");
    d.c = detail::json_opt<Time>(j, "c");
    d.h = j.at("h").get<Depth>();
    d.u_lo = j.at("u_lo").get<int>();
    d.u_hi = j.at("u_hi").get<int>();
    d.w0 = detail::json_opt<Time>(j, "w0");
}

inline void to_json(nlohmann::json& j, const RunReport& r)
{
    j = nlohmann::json::object();
    j["algorithm"] = std::string(algorithm_name(r.algorithm));
    j["A"] = r.A;
    j["sks"] = r.sks.t;
    j["sketch_nodes"] = r.sketch_nodes;
    j["peak_sketch_nodes"] = r.peak_sketch_nodes;
    j["samples"] = r.samples_drawn;
    j["update_count"] = r.update_count;
    j["params"] = r.params;
    j["guarantee_condition_met"] = r.guarantee_condition_met;
    if (is_sampling(r.algorithm))
        j["seed"] = r.params.seed;
    j["derived"] = r.derived;
    j["discovered"] = r.discovered;
    j["input_sketch"] = r.input_sketch;
    nlohmann::json est = nlohmann::json::array();
    for (const auto& e : r.estimated)
        est.push_back({{"d", e.d}, {"u", e.u}, {"e", e.estimate}});
    j["estimated_sketch"] = std::move(est);
    j["full_scan"] = r.full_scan;
    if (!r.depths.empty())
        j["depths"] = r.depths;
}

inline void from_json(const nlohmann::json& j, RunReport& r)
{
    r = RunReport{};
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    r.A = j.at("A").get<double>();
    r.sks.t = j.at("sks").get<std::vector<Time>>();
    r.sks.provenance = std::string(algorithm_name(r.algorithm));
    r.sketch_nodes = j.at("sketch_nodes").get<std::size_t>();
    r.peak_sketch_nodes = j.value("peak_sketch_nodes", r.sketch_nodes);
    r.samples_drawn = j.at("samples").get<std::uint64_t>();
    r.update_count = j.at("update_count").get<std::uint64_t>();
    r.params = j.at("params").get<AlgoParams>();
    r.guarantee_condition_met = j.at("guarantee_condition_met").get<bool>();
    if (j.contains("derived"))
        r.derived = j["derived"].get<DerivedParams>();
    if (j.contains("discovered"))
        r.discovered = j["discovered"].get<Discovered>();
    if (j.contains("input_sketch"))
        r.input_sketch = j["input_sketch"].get<InputSketch>();
    if (j.contains("estimated_sketch")) {
        for (const auto& e : j["estimated_sketch"])
            r.estimated.push_back({e.at("d").get<Depth>(), e.at("u").get<int>(), e.at("e").get<double>()});
    }
    r.full_scan = j.value("full_scan", false);
    if (j.contains("depths"))
        r.depths = j["depths"].get<std::vector<Depth>>();
}

} // namespace schedsketch

#endif
