#include <gtest/gtest.h>

#include "support.hpp"

using namespace schedsketch;

TEST(Depths, Examples)
{
    EXPECT_EQ(compute_depths(std::vector<Arc>{}, 3), (std::vector<Depth>{1, 1, 1}));
    const std::vector<Arc> diamond{{1, 2}, {1, 3}, {2, 4}, {3, 4}, {1, 4}};
    EXPECT_EQ(compute_depths(diamond, 4), (std::vector<Depth>{1, 2, 2, 3}));
    const std::vector<Arc> backwards{{3, 2}, {2, 1}};
    EXPECT_EQ(compute_depths(backwards, 3), (std::vector<Depth>{3, 2, 1}));
}

TEST(Depths, CycleNamesBackEdge)
{
    const std::vector<Arc> cycle{{1, 2}, {2, 3}, {3, 1}};
    try {
        compute_depths(cycle, 3);
        FAIL() << "cycle accepted";
    } catch (const input_error& e) {
        EXPECT_NE(std::string(e.what()).find("back edge 3 -> 1"), std::string::npos) << e.what();
    }
    EXPECT_THROW(compute_depths(std::vector<Arc>{{1, 1}}, 1), input_error);
    EXPECT_THROW(compute_depths(std::vector<Arc>{{1, 5}}, 2), input_error);
}

TEST(LowerBound, WorkAndCriticalPath)
{
    const auto chain = sstest::make_instance({2, 3, 4}, {{1, 2}, {2, 3}});
    EXPECT_EQ(critical_path(chain), 9);
    EXPECT_EQ(makespan_lower_bound(chain, 3), 9);
    const auto flat = sstest::make_instance({2, 3, 4});
    EXPECT_EQ(makespan_lower_bound(flat, 2), 5);
}

TEST(ExactMakespan, Examples)
{
    EXPECT_EQ(exact_makespan(sstest::make_instance({1, 1, 2}), 2), 2);
    EXPECT_EQ(exact_makespan(sstest::make_instance({1, 1, 1}, {{1, 2}, {2, 3}}), 3), 3);
    EXPECT_EQ(exact_makespan(sstest::make_instance(std::vector<Time>(6, 1)), 2), 3);
    EXPECT_EQ(exact_makespan(sstest::make_instance({3, 3, 2, 2, 2}), 2), 6);
    EXPECT_EQ(exact_makespan(Instance{}, 2), 0);
}

TEST(ExactMakespan, Guard)
{
    EXPECT_THROW(exact_makespan(sstest::make_instance(std::vector<Time>(13, 1)), 2), param_error);
    EXPECT_THROW(exact_makespan(sstest::make_instance({1}), 4), param_error);
    EXPECT_THROW(exact_makespan(sstest::make_instance({1}), 0), param_error);
}

TEST(ExactMakespan, MatchesBruteForce)
{
    std::mt19937_64 rng(77);
    int checked = 0;
    while (checked < 150) {
        auto sc = sstest::random_small_case(rng);
        if (sc.inst.n() > 6)
            continue;
        EXPECT_EQ(exact_makespan(sc.inst, sc.m), sstest::brute_force_makespan(sc.inst, sc.m))
            << instance_to_string(sc.inst) << "m=" << sc.m;
        ++checked;
    }
}

TEST(ListSchedule, Examples)
{
    const auto inst = sstest::make_instance({3, 1, 1, 1});
    const std::vector<JobId> order{1, 2, 3, 4};
    const auto s = list_schedule(inst, 2, order);
    EXPECT_EQ(s.makespan, 3);
    EXPECT_EQ(s.placements[0], (Placement{1, 1, 0, 3}));
    EXPECT_TRUE(validate_schedule(s, inst, 2).empty());

    // Waits for the predecessor instead of idling forever.
    const auto chain = sstest::make_instance({2, 1}, {{1, 2}});
    EXPECT_EQ(list_schedule(chain, 2).makespan, 3);

    EXPECT_THROW(list_schedule(inst, 2, std::vector<JobId>{1, 1, 2, 3}), param_error);
    EXPECT_EQ(default_list_order(sstest::make_instance({1, 3, 3, 2})), (std::vector<JobId>{2, 3, 4, 1}));
}

TEST(OracleProperty, BoundsSandwichOptimum)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto sc = sstest::random_small_case(rng);
        const Time opt = exact_makespan(sc.inst, sc.m);
        const auto list = list_schedule(sc.inst, sc.m);
        EXPECT_TRUE(validate_schedule(list, sc.inst, sc.m).empty());
        EXPECT_LE(makespan_lower_bound(sc.inst, sc.m), opt);
        EXPECT_LE(opt, list.makespan);
        EXPECT_LE(static_cast<double>(list.makespan), (2.0 - 1.0 / static_cast<double>(sc.m)) * opt + 1e-9);
    }
}

TEST(Generators, Deterministic)
{
    for (std::string spec : {"chain:m=3,q=2,h=4", "uniform:n=50,plo=1,phi=9,h=3,seed=4",
                             "layered:width=5,h=4,c=6,seed=2", "alpha-mixed:n=40,alpha=0.25,c=3,pbig=30,smallmax=5,h=2,seed=9",
                             "random-dag:n=30,h=4,density=0.1,c=5,seed=3"}) {
        const auto a = generate(parse_gen_spec(spec));
        const auto b = generate(parse_gen_spec(spec));
        EXPECT_EQ(instance_to_string(a), instance_to_string(b)) << spec;
        EXPECT_EQ(a.meta, b.meta);
        // Carried depths agree with the arcs.
        EXPECT_EQ(instance_to_string(with_computed_depths(a)), instance_to_string(a)) << spec;
    }
    EXPECT_NE(instance_to_string(generate(parse_gen_spec("uniform:n=50,phi=9,seed=1"))),
              instance_to_string(generate(parse_gen_spec("uniform:n=50,phi=9,seed=2"))));
}

TEST(Generators, ChainFamilyOptimum)
{
    const auto inst = generate(ChainFamily{200, 5, 3, 0});
    EXPECT_EQ(inst.n(), 3000u);
    EXPECT_EQ(inst.meta.known_cstar, 15);
    EXPECT_EQ(inst.height(), 3);
    EXPECT_EQ(makespan_lower_bound(inst, 200), 15);
    EXPECT_EQ(list_schedule(inst, 200).makespan, 15);
}

TEST(Generators, AlphaMixedBigCount)
{
    const AlphaMixedFamily f{100, 0.1, 2, 10, 4, 1, 5};
    const auto inst = generate(f);
    const auto big = std::count_if(inst.jobs.begin(), inst.jobs.end(), [](const Job& j) { return j.p >= 5; });
    EXPECT_EQ(big, 10);
    EXPECT_EQ(inst.p_max() <= 10, true);
    const AlphaMixedAccess access(f);
    EXPECT_EQ(access.big_count(), 10u);
    for (std::uint64_t i = 0; i < f.n; ++i)
        EXPECT_EQ(access.job(i), inst.jobs[i]);
}

TEST(Generators, ImplicitMatchesMaterialized)
{
    const auto spec = parse_gen_spec("uniform:n=97,plo=2,phi=20,h=5,seed=8");
    const auto inst = generate(spec);
    const auto access = implicit_access(spec);
    ASSERT_TRUE(access.has_value());
    std::visit([&](const auto& a) {
        ASSERT_EQ(a.size(), inst.n());
        for (std::uint64_t i = 0; i < a.size(); ++i)
            EXPECT_EQ(a.job(i), inst.jobs[i]);
    },
               *access);
    EXPECT_FALSE(implicit_access(parse_gen_spec("layered:width=2,h=2")).has_value());
}

TEST(Generators, SpecErrors)
{
    EXPECT_THROW(parse_gen_spec("chain:m=2,bogus=1"), param_error);
    EXPECT_THROW(parse_gen_spec("nonsense:n=3"), param_error);
    EXPECT_THROW(parse_gen_spec("chain:m=x"), param_error);
    EXPECT_THROW(generate(parse_gen_spec("uniform:n=2,h=3")), param_error);
    EXPECT_TRUE(looks_like_gen_spec("chain:m=1"));
    EXPECT_FALSE(looks_like_gen_spec("chain.txt"));
}
