#ifndef SCHEDSKETCH_INPUT_SKETCH_HPP
#define SCHEDSKETCH_INPUT_SKETCH_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace schedsketch {

struct SketchEntry {
    Depth d = 1;
    int u = 0;
    std::uint64_t count = 0;

    friend bool operator==(const SketchEntry&, const SketchEntry&) = default;
};

// Sketch tuples are ordered by bucket first, then depth.
struct SketchKey {
    int u = 0;
    Depth d = 1;

    friend auto operator<=>(const SketchKey&, const SketchKey&) = default;
};

/// Counts of jobs per (depth, bucket), held in an ordered map so the
/// smallest-bucket entry is available for pruning.
class InputSketch {
public:
    void add(Depth d, int u, std::uint64_t times = 1)
    {
        if (d < 1)
            throw invariant_violation("sketch depth must be >= 1");
        if (times == 0)
            return;
        entries_[SketchKey{u, d}] += times;
        total_ += times;
    }

    // Returns true if a new entry was created.
    bool add_reporting_insert(Depth d, int u)
    {
        if (d < 1)
            throw invariant_violation("sketch depth must be >= 1");
        auto [it, inserted] = entries_.try_emplace(SketchKey{u, d}, 0);
        ++it->second;
        ++total_;
        return inserted;
    }

    void move(Depth from, int u, Depth to)
    {
        if (to <= from)
            throw invariant_violation("sketch move must increase depth");
        auto it = entries_.find(SketchKey{u, from});
        if (it == entries_.end())
            throw invariant_violation("sketch move from missing entry (d=" + std::to_string(from) +
                                      ", u=" + std::to_string(u) + ")");
        if (--it->second == 0)
            entries_.erase(it);
        ++entries_[SketchKey{u, to}];
    }

    /// Drops the minimum-key entry iff its bucket is below cutoff_u. At most
    /// one entry goes per call.
    bool prune_smallest(int cutoff_u)
    {
        if (entries_.empty())
            return false;
        auto it = entries_.begin();
        if (it->first.u >= cutoff_u)
            return false;
        total_ -= it->second;
        entries_.erase(it);
        return true;
    }

    void restrict_to(int u_lo, int u_hi)
    {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (it->first.u < u_lo || it->first.u > u_hi) {
                total_ -= it->second;
                it = entries_.erase(it);
            } else {
                ++it;
            }
        }
    }

    void observe(Time p)
    {
        p_min_ = p_min_ ? std::min(*p_min_, p) : p;
        p_max_ = p_max_ ? std::max(*p_max_, p) : p;
    }

    std::uint64_t count(Depth d, int u) const
    {
        auto it = entries_.find(SketchKey{u, d});
        return it == entries_.end() ? 0 : it->second;
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::uint64_t total_counted() const { return total_; }
    std::optional<Time> p_min() const { return p_min_; }
    std::optional<Time> p_max() const { return p_max_; }
    void set_extremes(std::optional<Time> lo, std::optional<Time> hi)
    {
        p_min_ = lo;
        p_max_ = hi;
    }

    std::vector<SketchEntry> entries() const
    {
        std::vector<SketchEntry> out;
        out.reserve(entries_.size());
        for (const auto& [key, n] : entries_)
            out.push_back({key.d, key.u, n});
        return out;
    }

    Depth max_depth() const
    {
        Depth h = 0;
        for (const auto& [key, n] : entries_)
            h = std::max(h, key.d);
        return h;
    }

    template <class Fn>
    void for_each(Fn&& fn) const
    {
        for (const auto& [key, n] : entries_)
            fn(key.d, key.u, n);
    }

    friend bool operator==(const InputSketch&, const InputSketch&) = default;

private:
    std::map<SketchKey, std::uint64_t> entries_;
    std::optional<Time> p_min_;
    std::optional<Time> p_max_;
    std::uint64_t total_ = 0;
};

/// Bucket range kept for the alpha-constrained schemes:
/// [floor(log(p_max/n^2)), floor(log p_max)].
struct BucketRange {
    int lo = 0;
    int hi = 0;
};

inline BucketRange alpha_bucket_range(Time p_max, std::uint64_t n, double delta)
{
    const long double nn = static_cast<long double>(n);
    return {bucket_index(static_cast<long double>(p_max) / (nn * nn), delta), bucket_index(p_max, delta)};
}

/// Drops every entry outside the alpha bucket range for the recorded p_max.
inline void finalize_alpha(InputSketch& sketch, std::uint64_t n, double delta)
{
    if (!sketch.p_max())
        throw invariant_violation("finalize_alpha needs a recorded p_max");
    const auto range = alpha_bucket_range(*sketch.p_max(), n, delta);
    sketch.restrict_to(range.lo, range.hi);
}

/// Dense h x (k+1) count grid for the known-parameter scheme.
class GridSketch {
public:
    GridSketch(Depth h, int k)
        : h_(h), k_(k), counts_(static_cast<std::size_t>(h) * static_cast<std::size_t>(k + 1), 0)
    {
    }

    void add(Depth d, int u)
    {
        if (d < 1 || d > h_ || u < 0 || u > k_)
            throw invariant_violation("grid sketch index out of range");
        auto& cell = counts_[index(d, u)];
        if (cell++ == 0)
            ++nonzero_;
        ++total_;
    }

    std::uint64_t count(Depth d, int u) const { return counts_[index(d, u)]; }
    Depth h() const { return h_; }
    int k() const { return k_; }
    std::size_t nonzero() const { return nonzero_; }
    std::size_t capacity() const { return counts_.size(); }
    std::uint64_t total_counted() const { return total_; }

    InputSketch to_sketch() const
    {
        InputSketch out;
        for (Depth d = 1; d <= h_; ++d)
            for (int u = 0; u <= k_; ++u)
                out.add(d, u, count(d, u));
        return out;
    }

private:
    std::size_t index(Depth d, int u) const
    {
        return static_cast<std::size_t>(d - 1) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(u);
    }

    Depth h_;
    int k_;
    std::vector<std::uint64_t> counts_;
    std::size_t nonzero_ = 0;
    std::uint64_t total_ = 0;
};

/// Per-job (current depth, bucket) records for the unknown-parameter schemes.
class DepthTable {
public:
    struct Record {
        Depth depth = 0; // 0 = job not seen
        int u = 0;
        bool counted = false; // job contributes to the sketch
        bool emitted = false; // job has appeared as an arc source
    };

    Record& insert(JobId id, int u, bool counted)
    {
        if (id == 0)
            throw input_error("job ids start at 1");
        if (records_.size() < id)
            records_.resize(id);
        auto& rec = records_[id - 1];
        if (rec.depth != 0)
            throw input_error("duplicate job id " + std::to_string(id));
        rec = Record{1, u, counted, false};
        ++seen_;
        return rec;
    }

    Record& at(JobId id)
    {
        if (id == 0 || id > records_.size() || records_[id - 1].depth == 0)
            throw input_error("arc references unseen job " + std::to_string(id));
        return records_[id - 1];
    }

    std::size_t seen() const { return seen_; }

    /// Depth per job id (index id-1); 0 for ids that never appeared.
    std::vector<Depth> depths() const
    {
        std::vector<Depth> out(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i)
            out[i] = records_[i].depth;
        return out;
    }

private:
    std::vector<Record> records_;
    std::size_t seen_ = 0;
};

inline void to_json(nlohmann::json& j, const InputSketch& sk)
{
    nlohmann::json entries = nlohmann::json::array();
    sk.for_each([&](Depth d, int u, std::uint64_t n) { entries.push_back({{"d", d}, {"u", u}, {"n", n}}); });
    j = nlohmann::json{{"entries", std::move(entries)}};
    j["p_min"] = sk.p_min() ? nlohmann::json(*sk.p_min()) : nlohmann::json(nullptr);
    j["p_max"] = sk.p_max() ? nlohmann::json(*sk.p_max()) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, InputSketch& sk)
{
    sk = InputSketch{};
    for (const auto& e : j.at("entries")) {
        const auto n = e.at("n").get<std::uint64_t>();
        if (n == 0)
            throw input_error("sketch entries must have n >= 1");
        sk.add(e.at("d").get<Depth>(), e.at("u").get<int>(), n);
    }
    std::optional<Time> lo;
    std::optional<Time> hi;
    if (j.contains("p_min") && !j["p_min"].is_null())
        lo = j["p_min"].get<Time>();
    if (j.contains("p_max") && !j["p_max"].is_null())
        hi = j["p_max"].get<Time>();
    sk.set_extremes(lo, hi);
}

} // namespace schedsketch

#endif
