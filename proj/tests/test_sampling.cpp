#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"

using namespace schedsketch;

namespace {

AlgoParams sample_params(double eps, std::int64_t m, Time c, Depth h, std::uint64_t seed = 0, double alpha = 1.0)
{
    AlgoParams p;
    p.epsilon = eps;
    p.m = m;
    p.c = c;
    p.h = h;
    p.seed = seed;
    p.alpha = alpha;
    return p;
}

} // namespace

TEST(EstimateCounts, IdenticalJobs)
{
    const auto inst = sstest::make_instance(std::vector<Time>(50, 1));
    MaterializedAccess access(inst.jobs);
    std::mt19937_64 rng(1);
    const auto raw = estimate_counts(access, 10, 0.1, rng);
    EXPECT_FALSE(raw.full_scan);
    EXPECT_EQ(raw.draws, 10u);
    EXPECT_EQ(raw.counts.entries(), (std::vector<SketchEntry>{{1, 0, 10}}));
}

TEST(EstimateCounts, CapFallsBackToExactScan)
{
    std::vector<Time> p;
    for (int i = 0; i < 30; ++i)
        p.push_back(1 + i % 3);
    const auto inst = sstest::make_instance(p);
    MaterializedAccess access(inst.jobs);
    std::mt19937_64 rng(1);
    CountingAccess counted(access);
    const auto raw = estimate_counts(counted, 1000, 0.5, rng);
    EXPECT_TRUE(raw.full_scan);
    EXPECT_EQ(raw.draws, 30u);
    EXPECT_EQ(counted.calls(), 30u);
    EXPECT_EQ(counted.distinct(), 30u);
    EXPECT_EQ(raw.counts.count(1, 0), 10u);
    EXPECT_EQ(raw.counts.count(1, 1), 10u);
    EXPECT_EQ(raw.counts.count(1, 2), 10u);
}

TEST(EstimateCounts, FilterAboveEveryJobLeavesEmptySketch)
{
    const auto inst = sstest::make_instance({1, 2, 3});
    MaterializedAccess access(inst.jobs);
    std::mt19937_64 rng(1);
    const auto raw = estimate_counts(access, 2, 0.1, rng, 3.0L);
    EXPECT_EQ(raw.draws, 2u);
    EXPECT_TRUE(raw.counts.empty());
}

TEST(EstimateWmax, Examples)
{
    const auto same = sstest::make_instance(std::vector<Time>(20, 5));
    MaterializedAccess access(same.jobs);
    std::mt19937_64 rng(9);
    EXPECT_EQ(estimate_wmax(access, 1, rng), 5);
    EXPECT_EQ(estimate_wmax(access, 7, rng), 5);

    const auto mixed = sstest::make_instance({1, 2, 3, 4, 5, 6, 7, 8});
    MaterializedAccess m2(mixed.jobs);
    CountingAccess counted(m2);
    std::mt19937_64 rng2(4);
    const Time w = estimate_wmax(counted, 3, rng2);
    EXPECT_EQ(counted.calls(), 3u);
    EXPECT_GE(w, 1);
    EXPECT_LE(w, 8);
}

TEST(RandApproxBounded, ScalingArithmetic)
{
    // n = 100, n' = 10, one group drawn 3 times -> e = 30.
    RunReport r;
    r.params.m = 1;
    r.derived.tau = 0;
    RawSample raw;
    raw.draws = 10;
    raw.counts.add(1, 0, 3);
    raw.counts.add(1, 1, 7);
    const RoundedValueTable rp(0.1, 1, 1.0);
    detail::estimated_loads(r, raw, 100, 1, rp, 0, 1);
    ASSERT_EQ(r.estimated.size(), 2u);
    EXPECT_DOUBLE_EQ(r.estimated[0].estimate, 30.0);
    EXPECT_DOUBLE_EQ(r.estimated[1].estimate, 70.0);
}

TEST(RandApproxBounded, ThresholdDropsSmallGroups)
{
    RunReport r;
    r.params.m = 1;
    r.derived.tau = 15; // keep only e > 30
    RawSample raw;
    raw.draws = 10;
    raw.counts.add(1, 0, 3);
    raw.counts.add(1, 1, 4);
    const RoundedValueTable rp(0.1, 1, 1.0);
    detail::estimated_loads(r, raw, 100, 1, rp, 0, 1);
    ASSERT_EQ(r.estimated.size(), 1u);
    EXPECT_EQ(r.estimated[0].u, 1);
}

TEST(RandApproxBounded, UniformCapTriggered)
{
    const UniformAccess access(UniformFamily{5000, 1, 1, 1, 0});
    const auto r = rand_approx_bounded(access, sample_params(0.5, 1, 1, 1, 123));
    EXPECT_TRUE(r.full_scan);
    EXPECT_EQ(r.samples_drawn, 5000u);
    EXPECT_EQ(r.A, 5001.0);
    // t_1 = floor(5000/(1-0.025)) + 1 + floor(3 tau) with tau = 5000 * 0.0625.
    EXPECT_EQ(r.sks.t, (std::vector<Time>{5128 + 1 + 937}));
}

TEST(RandApproxBounded, SampledPathCountsDraws)
{
    const ChainAccess chain(ChainFamily{1, 10'000'000, 1, 0});
    CountingAccess counted(chain);
    auto p = sample_params(0.5, 1, 1, 1, 42);
    p.confidence_scale = 0.01;
    const auto r = rand_approx_bounded(counted, p);
    EXPECT_FALSE(r.full_scan);
    EXPECT_EQ(r.derived.n_prime, 36'812u);
    EXPECT_EQ(r.samples_drawn, r.derived.n0 + r.derived.n_prime);
    EXPECT_EQ(counted.calls(), r.samples_drawn);
    EXPECT_EQ(r.A, 10'000'001.0); // every draw is a unit depth-1 job
}

TEST(RandApproxBounded, RejectsJobsOutsideContract)
{
    const auto inst = sstest::make_instance({1, 5});
    MaterializedAccess access(inst.jobs);
    EXPECT_THROW(rand_approx_bounded(access, sample_params(0.5, 1, 2, 1)), input_error);
}

TEST(RandApproxBounded, DeterministicUnderSeed)
{
    const UniformAccess access(UniformFamily{1'000'000, 1, 9, 3, 5});
    auto p = sample_params(0.5, 1, 9, 3, 77);
    p.confidence_scale = 1e-9;
    const auto a = rand_approx_bounded(access, p);
    const auto b = rand_approx_bounded(access, p);
    EXPECT_FALSE(a.full_scan);
    EXPECT_EQ(a, b);
    EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
    p.seed = 78;
    EXPECT_NE(rand_approx_bounded(access, p).input_sketch, a.input_sketch);
}

TEST(RandApproxAlpha, SingleJob)
{
    const auto inst = sstest::make_instance({7});
    MaterializedAccess access(inst.jobs);
    const auto r = rand_approx_alpha(access, sample_params(0.5, 1, 1, 1));
    EXPECT_EQ(r.discovered.w0, 7);
    // A_1 = 1 * rp(bucket 7) with rp pinned to c*w0 = 7.
    EXPECT_EQ(r.A, 7.0 + 7.0);
}

TEST(RandApproxAlpha, AgreesWithBoundedOnUnitJobs)
{
    const UniformAccess access(UniformFamily{4000, 1, 1, 1, 0});
    const auto a = rand_approx_bounded(access, sample_params(0.5, 2, 1, 1, 3));
    const auto b = rand_approx_alpha(access, sample_params(0.5, 2, 1, 1, 3));
    EXPECT_EQ(b.discovered.w0, 1);
    EXPECT_EQ(a.A, b.A); // both pin the unit bucket to 1
}

TEST(RandApproxAlpha, SamplesIncludeWmaxDraws)
{
    const AlphaMixedAccess access(AlphaMixedFamily{10'000'000, 0.5, 10, 10, 1, 1, 3});
    CountingAccess counted(access);
    auto p = sample_params(0.5, 1, 10, 1, 8, 0.5);
    p.confidence_scale = 1e-14;
    const auto r = rand_approx_alpha(counted, p);
    EXPECT_FALSE(r.full_scan);
    EXPECT_EQ(r.samples_drawn, r.derived.n0 + r.derived.n_prime);
    EXPECT_EQ(counted.calls(), r.samples_drawn);
}

TEST(RandApproxAlpha, HalfBigHalfSmallWithinEpsilon)
{
    // n = 10^7 implicit: half p in [1,10] (big, c = 10), half p = 1; the
    // sample size exceeds n, so every trial is an exact scan and only w0 varies.
    AlphaMixedFamily f{10'000'000, 0.5, 10, 10, 1, 1, 21};
    const AlphaMixedAccess access(f);
    long double sum = 0;
    for (std::uint64_t i = 0; i < f.n; ++i)
        sum += static_cast<long double>(access.job(i).p);
    const double cstar = static_cast<double>(sum); // m = 1, no arcs
    const auto reports = run_trials<RunReport>(10, [&](std::size_t i) {
        return rand_approx_alpha(access, sample_params(0.5, 1, 10, 1, 1000 + i, 0.5));
    });
    for (const auto& r : reports) {
        EXPECT_TRUE(r.full_scan);
        EXPECT_GE(r.A, 0.5 * cstar);
        EXPECT_LE(r.A, 1.5 * cstar);
    }
}

TEST(EstimatorAccuracy, LargeGroupWithinDelta)
{
    // h = 2, c = 1, m = 1, eps = 0.9: delta = 0.045, gamma = 0.05, tau = 5.625e6
    // for n = 10^8; n' = 1727212 from 50-digit arithmetic.
    const sstest::TwoLevelAccess access{100'000'000, 2'000'000};
    const auto p0 = sample_params(0.9, 1, 1, 2);
    AlgoParams full = p0;
    full.n = access.n;
    const auto d = derive_params(full, Algorithm::sample1);
    ASSERT_EQ(d.n_prime, 1'727'212u);
    ASSERT_NEAR(d.tau, 5.625e6, 1e-3);

    const int trials = 200;
    const auto reports = run_trials<RunReport>(trials, [&](std::size_t i) {
        auto p = p0;
        p.seed = 9000 + i;
        return rand_approx_bounded(access, p);
    });
    const double big = 98'000'000.0;
    int accurate = 0;
    int suppressed = 0;
    for (const auto& r : reports) {
        for (const auto& e : r.estimated) {
            if (e.d == 1 && e.u == 0 && e.estimate >= (1 - d.delta) * big && e.estimate <= (1 + d.delta) * big)
                ++accurate;
        }
        const bool small_stored = std::any_of(r.estimated.begin(), r.estimated.end(), [](const auto& e) { return e.d == 2; });
        if (!small_stored)
            ++suppressed;
    }
    EXPECT_GE(accurate, trials * (1 - 2 * d.gamma));
    EXPECT_GE(suppressed, trials * (1 - 2 * d.gamma));
}

TEST(RunTrials, OrderedAndPropagatesErrors)
{
    const auto out = run_trials<int>(50, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
    for (std::size_t i = 0; i < out.size(); ++i)
        EXPECT_EQ(out[i], static_cast<int>(i * i));
    EXPECT_THROW(run_trials<int>(5, [](std::size_t i) -> int {
        if (i == 3)
            throw input_error("boom");
        return 0;
    }),
                 input_error);
}
