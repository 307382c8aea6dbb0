#ifndef SCHEDSKETCH_INSTANCE_HPP
#define SCHEDSKETCH_INSTANCE_HPP

#include <charconv>
#include <concepts>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace schedsketch {

struct InstanceMeta {
    std::string family;
    std::optional<Time> known_cstar;
    std::optional<std::int64_t> m;
    std::optional<double> alpha;
    std::optional<Time> c;
    std::optional<Depth> h;
    std::uint64_t seed = 0;

    friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

struct Instance {
    std::vector<Job> jobs;
    std::vector<Arc> arcs;
    InstanceMeta meta;

    std::size_t n() const { return jobs.size(); }

    bool has_depths() const { return !jobs.empty() && jobs.front().depth.has_value(); }

    Time p_max() const
    {
        Time v = 0;
        for (const auto& j : jobs)
            v = std::max(v, j.p);
        return v;
    }

    Time p_min() const
    {
        Time v = jobs.empty() ? 0 : jobs.front().p;
        for (const auto& j : jobs)
            v = std::min(v, j.p);
        return v;
    }

    Time total_work() const
    {
        Time v = 0;
        for (const auto& j : jobs)
            v += j.p;
        return v;
    }

    Depth height() const
    {
        Depth h = 0;
        for (const auto& j : jobs)
            h = std::max(h, j.depth.value_or(0));
        return h;
    }

    friend bool operator==(const Instance&, const Instance&) = default;
};

// ---------------------------------------------------------------------------
// Event sources: forward-only producers of StreamEvent.

template <class S>
concept EventSource = requires(S& s) {
    { s.next() } -> std::same_as<std::optional<StreamEvent>>;
};

/// Jobs (in id order) followed by arcs, read from an in-memory instance.
class InstanceEventSource {
public:
    explicit InstanceEventSource(const Instance& inst) : inst_(&inst) {}

    std::optional<StreamEvent> next()
    {
        if (job_ < inst_->jobs.size())
            return StreamEvent{inst_->jobs[job_++]};
        if (arc_ < inst_->arcs.size())
            return StreamEvent{inst_->arcs[arc_++]};
        return std::nullopt;
    }

private:
    const Instance* inst_;
    std::size_t job_ = 0;
    std::size_t arc_ = 0;
};

class VectorEventSource {
public:
    explicit VectorEventSource(std::span<const StreamEvent> events) : events_(events) {}

    std::optional<StreamEvent> next()
    {
        if (pos_ >= events_.size())
            return std::nullopt;
        return events_[pos_++];
    }

private:
    std::span<const StreamEvent> events_;
    std::size_t pos_ = 0;
};

/// Overrides (or supplies) job depths from a per-id table, for the second
/// pass of the unknown-parameter schemes.
template <EventSource S>
class WithDepths {
public:
    WithDepths(S& inner, std::span<const Depth> depths) : inner_(&inner), depths_(depths) {}

    std::optional<StreamEvent> next()
    {
        auto ev = inner_->next();
        if (ev) {
            if (auto* job = std::get_if<Job>(&*ev)) {
                if (job->id == 0 || job->id > depths_.size() || depths_[job->id - 1] < 1)
                    throw input_error("no depth recorded for job " + std::to_string(job->id));
                job->depth = depths_[job->id - 1];
            }
        }
        return ev;
    }

private:
    S* inner_;
    std::span<const Depth> depths_;
};

// ---------------------------------------------------------------------------
// Instance file format.
//
//   # sched-stream v1
//   J <id> <p> [<depth>]
//   A <src> <dst>
//
// Blank lines and other '#' lines are ignored. All J lines precede all A lines.

inline constexpr std::string_view instance_header = "# sched-stream v1";

/// Line-at-a-time reader; never holds more than the current line.
class InstanceLineReader {
public:
    explicit InstanceLineReader(std::istream& in) : in_(&in) {}

    std::optional<StreamEvent> next()
    {
        std::string line;
        while (std::getline(*in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!saw_header_) {
                if (line.empty())
                    continue;
                if (line != instance_header)
                    fail("missing '# sched-stream v1' header");
                saw_header_ = true;
                continue;
            }
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#')
                continue;
            return parse_line(line);
        }
        if (!saw_header_)
            fail("missing '# sched-stream v1' header");
        return std::nullopt;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw input_error("line " + std::to_string(line_no_) + ": " + what);
    }

    // Whole-token integer parse; rejects signs-only, trailing junk and overflow.
    static std::optional<long long> to_int(const std::string& tok)
    {
        long long v = 0;
        const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || end != tok.data() + tok.size())
            return std::nullopt;
        return v;
    }

    StreamEvent parse_line(const std::string& line)
    {
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;)
            tok.push_back(t);
        const std::string& tag = tok.front();
        if (tag == "J") {
            if (saw_arc_)
                fail("job line after arc lines");
            if (tok.size() < 3)
                fail("malformed job line");
            if (tok.size() > 4)
                fail("trailing tokens on job line");
            std::vector<long long> v;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const auto x = to_int(tok[i]);
                if (!x)
                    fail("malformed job line: '" + tok[i] + "' is not an integer");
                v.push_back(*x);
            }
            const long long id = v[0];
            const long long p = v[1];
            std::optional<Depth> depth;
            if (v.size() == 3)
                depth = static_cast<Depth>(v[2]);
            if (id < 1 || id > static_cast<long long>(std::numeric_limits<JobId>::max()))
                fail("job id out of range");
            if (p < 1)
                fail("processing time must be a positive integer");
            if (depth && (v[2] < 1 || v[2] > std::numeric_limits<Depth>::max()))
                fail("depth must be >= 1");
            if (!depth_mode_)
                depth_mode_ = depth.has_value();
            else if (*depth_mode_ != depth.has_value())
                fail("either every job line carries a depth or none does");
            return Job{static_cast<JobId>(id), static_cast<Time>(p), depth};
        }
        if (tag == "A") {
            saw_arc_ = true;
            if (tok.size() < 3)
                fail("malformed arc line");
            if (tok.size() > 3)
                fail("trailing tokens on arc line");
            const auto src = to_int(tok[1]);
            const auto dst = to_int(tok[2]);
            if (!src || !dst)
                fail("malformed arc line");
            if (*src < 1 || *dst < 1 || *src > static_cast<long long>(std::numeric_limits<JobId>::max()) ||
                *dst > static_cast<long long>(std::numeric_limits<JobId>::max()))
                fail("arc endpoints must be positive job ids");
            return Arc{static_cast<JobId>(*src), static_cast<JobId>(*dst)};
        }
        fail("unknown record type '" + tag + "'");
    }

    std::istream* in_;
    std::size_t line_no_ = 0;
    bool saw_header_ = false;
    bool saw_arc_ = false;
    std::optional<bool> depth_mode_;
};

/// Reads a whole instance and checks the file-level invariants
/// (contiguous ids 1..n, consistent depths, J before A).
inline Instance read_instance(std::istream& in)
{
    InstanceLineReader reader(in);
    Instance inst;
    while (auto ev = reader.next()) {
        if (const auto* job = std::get_if<Job>(&*ev))
            inst.jobs.push_back(*job);
        else
            inst.arcs.push_back(std::get<Arc>(*ev));
    }
    std::vector<char> seen(inst.jobs.size() + 1, 0);
    for (const auto& j : inst.jobs) {
        if (j.id > inst.jobs.size())
            throw input_error("job ids must be contiguous 1..n (found " + std::to_string(j.id) + ")");
        if (seen[j.id])
            throw input_error("duplicate job id " + std::to_string(j.id));
        seen[j.id] = 1;
    }
    for (const auto& a : inst.arcs) {
        if (a.src > inst.jobs.size() || a.dst > inst.jobs.size())
            throw input_error("arc references unknown job");
    }
    return inst;
}

inline void write_instance(std::ostream& out, const Instance& inst)
{
    out << instance_header << '\n';
    for (const auto& j : inst.jobs) {
        out << "J " << j.id << ' ' << j.p;
        if (j.depth)
            out << ' ' << *j.depth;
        out << '\n';
    }
    for (const auto& a : inst.arcs)
        out << "A " << a.src << ' ' << a.dst << '\n';
}

inline std::string instance_to_string(const Instance& inst)
{
    std::ostringstream os;
    write_instance(os, inst);
    return os.str();
}

inline void to_json(nlohmann::json& j, const InstanceMeta& meta)
{
    j = nlohmann::json::object();
    j["family"] = meta.family;
    j["seed"] = meta.seed;
    if (meta.known_cstar)
        j["known_cstar"] = *meta.known_cstar;
    if (meta.m)
        j["m"] = *meta.m;
    if (meta.alpha)
        j["alpha"] = *meta.alpha;
    if (meta.c)
        j["c"] = *meta.c;
    if (meta.h)
        j["h"] = *meta.h;
}

inline void from_json(const nlohmann::json& j, InstanceMeta& meta)
{
    meta = InstanceMeta{};
    meta.family = j.value("family", "");
    meta.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("known_cstar"))
        meta.known_cstar = j["known_cstar"].get<Time>();
    if (j.contains("m"))
        meta.m = j["m"].get<std::int64_t>();
    if (j.contains("alpha"))
        meta.alpha = j["alpha"].get<double>();
    if (j.contains("c"))
        meta.c = j["c"].get<Time>();
    if (j.contains("h"))
        meta.h = j["h"].get<Depth>();
}

} // namespace schedsketch

#endif
