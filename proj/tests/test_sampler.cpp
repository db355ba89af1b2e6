#include "geoknot/io.hpp"
#include "geoknot/sampler.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace geoknot;

namespace {

BiasSpec writhe_bins(double lo, double hi, std::size_t count) {
    BiasSpec s;
    s.kind = BiasKind::Writhe;
    s.bins = {lo, hi, count};
    return s;
}

ChainConfig small_config(KnotClass knot, std::size_t n, std::size_t saves) {
    ChainConfig c;
    c.knot = knot;
    c.target_n = n;
    c.save_count = saves;
    c.bias.kind = BiasKind::None;
    c.seed = 3;
    return c;
}

double lag1_autocorrelation(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
    }
    return num / den;
}

}  // namespace

TEST(BinSpec, Parse) {
    EXPECT_EQ(BinSpec::parse("-6:6:24"), (BinSpec{-6, 6, 24}));
    EXPECT_EQ(BinSpec::parse("400:2400:20"), (BinSpec{400, 2400, 20}));
    EXPECT_THROW(BinSpec::parse("1:0:3"), std::invalid_argument);
    EXPECT_THROW(BinSpec::parse("0:1:0"), std::invalid_argument);
    EXPECT_THROW(BinSpec::parse("0:1"), std::invalid_argument);
    EXPECT_THROW(BinSpec::parse("a:b:c"), std::invalid_argument);
}

TEST(BiasKinds, ParseAndPrint) {
    EXPECT_EQ(parse_bias_kind("writhe"), BiasKind::Writhe);
    EXPECT_EQ(parse_bias_kind("acn"), BiasKind::Acn);
    EXPECT_EQ(parse_bias_kind("entanglement"), BiasKind::Entanglement);
    EXPECT_EQ(parse_bias_kind("none"), BiasKind::None);
    EXPECT_EQ(to_string(BiasKind::Entanglement), "entanglement");
    EXPECT_THROW(parse_bias_kind("twist"), std::invalid_argument);
}

TEST(BiasState, BinsAndRangePolicy) {
    BiasState b(writhe_bins(-2, 2, 8), 16);
    EXPECT_EQ(b.bin_count(), 8u);
    EXPECT_EQ(b.quota(), 2u);
    EXPECT_EQ(b.bin_of(-2.0), 0u);
    EXPECT_EQ(b.bin_of(-1.49), 1u);
    EXPECT_EQ(b.bin_of(1.99), 7u);
    EXPECT_FALSE(b.bin_of(2.0).has_value());
    EXPECT_FALSE(b.bin_of(-3.0).has_value());
    auto spec = writhe_bins(-2, 2, 8);
    spec.policy = RangePolicy::Extend;
    BiasState e(spec, 16);
    EXPECT_EQ(e.bin_of(5.0), 7u);
    EXPECT_EQ(e.bin_of(-5.0), 0u);
    const auto edges = b.edges();
    ASSERT_EQ(edges.size(), 9u);
    EXPECT_DOUBLE_EQ(edges.front(), -2.0);
    EXPECT_DOUBLE_EQ(edges.back(), 2.0);
}

TEST(BiasState, AcceptProbabilityExamples) {
    BiasState b(writhe_bins(0, 4, 4), 4);
    EXPECT_EQ(b.accept_probability(0, 1), 1.0);
    b.set_log_weights({0.0, std::log(2.0), 0.0, 0.0});
    EXPECT_NEAR(b.accept_probability(0, 1), 0.5, 1e-15);
    EXPECT_EQ(b.accept_probability(1, 0), 1.0);
    EXPECT_EQ(b.accept_probability(0, std::nullopt), 0.0);
    EXPECT_EQ(b.accept_probability(std::nullopt, 2), 1.0);
}

TEST(BiasState, AcceptProbabilityMatchesScalarFormula) {
    CounterRng rng(5, 0);
    BiasState b(writhe_bins(0, 10, 10), 10);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(10);
        for (auto& x : w) x = rng.uniform(-5, 5);
        b.set_log_weights(w);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 10; ++j)
                EXPECT_DOUBLE_EQ(b.accept_probability(i, j), std::min(1.0, std::exp(w[i] - w[j])));
    }
}

TEST(BiasState, WindowMode) {
    auto spec = writhe_bins(-1, 1, 4);
    spec.mode = BiasMode::Window;
    BiasState b(spec, 4);
    EXPECT_EQ(b.accept_probability(0, 3), 1.0);
    EXPECT_EQ(b.accept_probability(0, std::nullopt), 0.0);
    b.record_visit(2);
    EXPECT_EQ(b.log_weights()[2], 0.0);
    EXPECT_EQ(b.visits()[2], 1u);
}

TEST(BiasState, SingleVisit) {
    BiasState b(writhe_bins(0, 1, 1), 1);
    b.record_visit(0);
    EXPECT_EQ(b.visits()[0], 1u);
    EXPECT_DOUBLE_EQ(b.log_weights()[0], BiasState::kInitialLnF);
    EXPECT_EQ(b.halvings(), 0u);
}

TEST(BiasState, UniformVisitsHalveLnFOnce) {
    BiasState b(writhe_bins(0, 4, 4), 4, 1.0);
    for (std::size_t k = 0; k < 3; ++k) b.record_visit(k);
    EXPECT_EQ(b.halvings(), 0u);
    b.record_visit(3);
    EXPECT_EQ(b.halvings(), 1u);
    EXPECT_DOUBLE_EQ(b.ln_f(), 0.5);
    for (auto v : b.visits()) EXPECT_EQ(v, 0u);
    for (auto v : b.total_visits()) EXPECT_EQ(v, 1u);
    for (double w : b.log_weights()) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(BiasState, LnFNeverDropsBelowFloorAndScheduleCompletes) {
    BiasState b(writhe_bins(0, 2, 2), 2, 1.0);
    double last = b.ln_f();
    for (int i = 0; i < 200 && !b.schedule_complete(); ++i) {
        b.record_visit(static_cast<std::size_t>(i % 2));
        EXPECT_LE(b.ln_f(), last);
        EXPECT_GE(b.ln_f(), BiasState::kLnFFloor);
        last = b.ln_f();
    }
    EXPECT_TRUE(b.schedule_complete());
    b.record_visit(1);
    EXPECT_EQ(b.post_schedule_visits()[1], 1u);
}

TEST(BiasState, DoubleWellRunFlattens) {
    constexpr std::size_t kBins = 30;
    BiasState b(writhe_bins(-1.5, 1.5, kBins), kBins);
    auto ln_g = [](std::size_t bin) {
        const double x = -1.5 + (static_cast<double>(bin) + 0.5) * 0.1;
        return -6.0 * (x * x - 1) * (x * x - 1);
    };
    CounterRng rng(77, 0);
    std::size_t state = 10;
    b.record_visit(state);
    std::uint64_t steps = 0;
    auto step = [&] {
        const bool up = rng.below(2) != 0;
        if (up ? state + 1 < kBins : state > 0) {
            const std::size_t prop = up ? state + 1 : state - 1;
            const double p = std::min(1.0, std::exp(ln_g(prop) - ln_g(state))) * b.accept_probability(state, prop);
            if (rng.uniform() < p) state = prop;
        }
        b.record_visit(state);
        ++steps;
    };
    while (!b.schedule_complete() && steps < 10'000'000) step();
    ASSERT_TRUE(b.schedule_complete());
    EXPECT_EQ(b.halvings(), 10u);
    const auto& w = b.log_weights();
    EXPECT_NEAR((w[4] - w[14]) - (ln_g(4) - ln_g(14)), 0.0, 0.5);
    for (int i = 0; i < 400'000; ++i) step();
    EXPECT_GE(flatness(b.post_schedule_visits()), 0.8);
}

TEST(BiasState, ShouldSaveAndQuota) {
    BiasState b(writhe_bins(0, 4, 4), 4);
    EXPECT_EQ(b.quota(), 1u);
    EXPECT_TRUE(b.should_save(2, 100, 100));
    EXPECT_FALSE(b.should_save(2, 98, 100));
    EXPECT_FALSE(b.should_save(std::nullopt, 100, 100));
    b.commit_save(2);
    EXPECT_FALSE(b.should_save(2, 100, 100));
    EXPECT_EQ(b.total_saved(), 1u);
    EXPECT_EQ(b.bins_filled(), 1u);
    EXPECT_EQ(BiasState(writhe_bins(0, 4, 3), 1000).quota(), 334u);
}

TEST(Flatness, Values) {
    EXPECT_EQ(flatness({}), 0.0);
    EXPECT_EQ(flatness({5, 5, 5}), 1.0);
    EXPECT_DOUBLE_EQ(flatness({2, 4}), 2.0 / 3.0);
}

TEST(ChainConfig, Validation) {
    auto c = small_config(KnotClass::Unknot, 40, 10);
    EXPECT_NO_THROW(c.validate());
    c.target_n = 41;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config(KnotClass::Trefoil, 20, 10);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config(KnotClass::Unknot, 40, 0);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config(KnotClass::Unknot, 40, 10);
    c.jitter = 0.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config(KnotClass::Other, 40, 10);
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Chain, IncrementalFunctionalsMatchFullRecomputation) {
    for (BiasKind kind : {BiasKind::Writhe, BiasKind::Acn, BiasKind::Entanglement}) {
        auto c = small_config(KnotClass::Trefoil, 60, 10);
        c.bias.kind = kind;
        c.bias.bins = kind == BiasKind::Writhe ? BinSpec{-8, 8, 16}
                      : kind == BiasKind::Acn  ? BinSpec{0, 40, 20}
                                               : BinSpec{0, 1000, 10};
        c.pivot_batch = 0;
        c.audit_interval = 1'000'000'000;
        c.max_length = 80;
        Chain chain(c);
        for (int i = 0; i < 3000; ++i) {
            chain.mc_step();
            if (i % 100 == 0) ASSERT_NEAR(chain.value(), chain.evaluate(chain.polygon()), 1e-9) << to_string(kind);
        }
        EXPECT_NEAR(chain.value(), chain.evaluate(chain.polygon()), 1e-9);
    }
}

TEST(Chain, RollbacksRestoreCheckpointExactly) {
    auto c = small_config(KnotClass::Trefoil, 60, 10);
    c.bias = writhe_bins(-8, 8, 16);
    Chain chain(c);
    std::size_t hooks = 0;
    chain.on_rollback = [&](const Checkpoint& cp, const LatticePolygon& poly, const CounterRng& rng) {
        ++hooks;
        EXPECT_EQ(poly, cp.polygon);
        EXPECT_TRUE(rng == cp.rng);
    };
    for (int i = 0; i < 20000; ++i) chain.mc_step();
    EXPECT_GT(chain.stats().rollbacks, 0u);
    EXPECT_EQ(hooks, chain.stats().rollbacks);
    EXPECT_EQ(verify_knot_class(chain.polygon(), KnotClass::Trefoil).verdict, KnotClass::Trefoil);
}

TEST(Chain, BfacfOnlyRunNeverRollsBack) {
    auto c = small_config(KnotClass::Trefoil, 100, 10);
    c.pivot_batch = 0;
    Chain chain(c);
    for (int i = 0; i < 100000; ++i) chain.mc_step();
    EXPECT_EQ(chain.stats().rollbacks, 0u);
    EXPECT_EQ(chain.stats().pivot_batches, 0u);
    EXPECT_EQ(chain.stats().audits, 100u);
}

TEST(RunChain, TinyUnknotShard) {
    const auto shard = run_chain(small_config(KnotClass::Unknot, 40, 50));
    ASSERT_EQ(shard.records.size(), 50u);
    EXPECT_FALSE(shard.partial);
    for (std::size_t i = 0; i < shard.records.size(); ++i) {
        const auto& r = shard.records[i];
        EXPECT_EQ(r.id, i);
        EXPECT_EQ(r.curve.size(), 40u);
        EXPECT_EQ(verify_knot_class(r.curve, KnotClass::Unknot).verdict, KnotClass::Unknot);
    }
}

TEST(RunChain, Deterministic) {
    auto c = small_config(KnotClass::Trefoil, 48, 20);
    c.bias = writhe_bins(-6, 6, 12);
    c.max_moves = 400'000;
    const auto a = run_chain(c);
    const auto b = run_chain(c);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].curve, b.records[i].curve);
        EXPECT_EQ(a.records[i].functionals, b.records[i].functionals);
        EXPECT_EQ(a.records[i].move_index, b.records[i].move_index);
    }
    EXPECT_EQ(a.bias.log_weights(), b.bias.log_weights());
    c.seed = 4;
    const auto d = run_chain(c);
    EXPECT_NE(d.records.front().curve, a.records.front().curve);
}

TEST(RunChain, TrefoilRecordsReverifyUnderFreshSchedule) {
    auto c = small_config(KnotClass::Trefoil, 60, 30);
    c.bias = writhe_bins(-6, 6, 12);
    const auto shard = run_chain(c);
    ASSERT_FALSE(shard.partial);
    for (const auto& r : shard.records) {
        EXPECT_EQ(verify_knot_class(r.curve, KnotClass::Trefoil, 0xABCDEF).verdict, KnotClass::Trefoil);
        EXPECT_EQ(r.label, KnotClass::Trefoil);
    }
}

TEST(RunChain, QuotaAccounting) {
    auto c = small_config(KnotClass::Unknot, 40, 100);
    c.bias = writhe_bins(-1, 1, 4);
    const auto shard = run_chain(c);
    EXPECT_EQ(shard.bias.quota(), 25u);
    EXPECT_EQ(shard.records.size(), 100u);
    for (auto s : shard.bias.saved()) EXPECT_LE(s, shard.bias.quota());
}

TEST(RunChain, BudgetExhaustedGivesPartialShard) {
    auto c = small_config(KnotClass::Unknot, 100, 50);
    c.max_moves = 2000;
    const auto shard = run_chain(c);
    EXPECT_TRUE(shard.partial);
    EXPECT_LT(shard.records.size(), 50u);
}

TEST(RunChain, SavedRadiusOfGyrationDecorrelated) {
    const auto shard = run_chain(small_config(KnotClass::Unknot, 40, 1000));
    std::vector<double> rg;
    for (const auto& r : shard.records) rg.push_back(r.functionals.radius_of_gyration);
    EXPECT_LT(lag1_autocorrelation(rg), 0.1);
}

TEST(RunChains, SplitAndThreadIndependence) {
    auto c = small_config(KnotClass::Unknot, 24, 25);
    const auto one = run_chains(c, 3, 1);
    const auto two = run_chains(c, 3, 2);
    ASSERT_EQ(one.size(), 3u);
    EXPECT_EQ(one[0].records.size(), 9u);
    EXPECT_EQ(one[1].records.size(), 8u);
    EXPECT_EQ(one[2].records.size(), 8u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(one[k].config.chain_id, k);
        ASSERT_EQ(one[k].records.size(), two[k].records.size());
        for (std::size_t i = 0; i < one[k].records.size(); ++i) EXPECT_EQ(one[k].records[i].curve, two[k].records[i].curve);
    }
    EXPECT_NE(one[0].records[0].curve, one[1].records[0].curve);
}

TEST(MergeShards, IdentityConcatenationAndConflicts) {
    auto c = small_config(KnotClass::Unknot, 24, 6);
    const auto a = run_chain(c);
    const auto one = merge_shards({a});
    ASSERT_EQ(one.records.size(), a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(one.records[i].curve, a.records[i].curve);
    EXPECT_EQ(one.unknots, 6u);

    c.chain_id = 1;
    const auto b = run_chain(c);
    const auto two = merge_shards({a, b});
    ASSERT_EQ(two.records.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(two.records[i].id, i);
    EXPECT_EQ(two.records[6].curve, b.records[0].curve);
    EXPECT_EQ(two.coverage.size(), 1u);
    EXPECT_EQ(two.coverage[0], 12u);

    auto t = small_config(KnotClass::Trefoil, 24, 4);
    const auto tre = run_chain(t);
    const auto mixed = merge_shards({a, tre});
    EXPECT_EQ(mixed.unknots, 6u);
    EXPECT_EQ(mixed.trefoils, 4u);

    auto other = small_config(KnotClass::Unknot, 26, 4);
    EXPECT_THROW(merge_shards({a, run_chain(other)}), std::invalid_argument);
    auto biased = small_config(KnotClass::Unknot, 24, 4);
    biased.bias = writhe_bins(-1, 1, 2);
    EXPECT_THROW(merge_shards({a, run_chain(biased)}), std::invalid_argument);
}

TEST(JitterSeed, DistinctPerRecord) {
    EXPECT_NE(jitter_seed(1, 0, 0), jitter_seed(1, 0, 1));
    EXPECT_NE(jitter_seed(1, 0, 0), jitter_seed(1, 1, 0));
    EXPECT_NE(jitter_seed(1, 0, 0), jitter_seed(2, 0, 0));
    EXPECT_EQ(jitter_seed(5, 6, 7), jitter_seed(5, 6, 7));
}

TEST(Mixture, CountsFollowWeights) {
    const auto g = geoknot_mixture();
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].bias.kind, BiasKind::Writhe);
    EXPECT_EQ(g[1].bias.kind, BiasKind::Entanglement);
    EXPECT_EQ(mixture_counts(200, g), (std::vector<std::size_t>{120, 80}));
    EXPECT_EQ(mixture_counts(7, g), (std::vector<std::size_t>{4, 3}));
    const std::vector<MixtureComponent> thirds(3);
    EXPECT_EQ(mixture_counts(10, thirds), (std::vector<std::size_t>{3, 4, 3}));
    EXPECT_EQ(mixture_counts(1, thirds), (std::vector<std::size_t>{0, 1, 0}));
    EXPECT_THROW(mixture_counts(10, {}), std::invalid_argument);
    EXPECT_THROW(mixture_counts(10, {{BiasSpec{}, 0.0}}), std::invalid_argument);
    EXPECT_THROW(mixture_counts(10, {{BiasSpec{}, -1.0}}), std::invalid_argument);
}

TEST(Mixture, DefaultBins) {
    const auto w = default_bins(BiasKind::Writhe);
    EXPECT_EQ(w.lo, -6.0);
    EXPECT_EQ(w.hi, 6.0);
    EXPECT_EQ(w.count, 24u);
    EXPECT_EQ(default_bins(BiasKind::Entanglement).count, 20u);
    EXPECT_EQ(default_bins(BiasKind::Acn).count, 18u);
}

TEST(Mixture, RunAndMerge) {
    auto c = small_config(KnotClass::Unknot, 24, 10);
    BiasSpec none;
    none.kind = BiasKind::None;
    const std::vector<MixtureComponent> comps{{writhe_bins(-2, 2, 4), 0.6}, {none, 0.4}};
    const auto shards = run_mixture(c, comps, 2, 1);
    ASSERT_EQ(shards.size(), 4u);
    EXPECT_EQ(shards[0].config.chain_id, 0u);
    EXPECT_EQ(shards[1].config.chain_id, 1u);
    EXPECT_EQ(shards[2].config.chain_id, 2u);
    EXPECT_EQ(shards[3].config.chain_id, 3u);
    EXPECT_EQ(shards[0].config.bias.kind, BiasKind::Writhe);
    EXPECT_EQ(shards[2].config.bias.kind, BiasKind::None);
    EXPECT_EQ(shards[0].records.size() + shards[1].records.size(), 6u);
    EXPECT_EQ(shards[2].records.size() + shards[3].records.size(), 4u);
    EXPECT_THROW(merge_shards(shards), std::invalid_argument);
    const auto d = merge_mixture(shards);
    ASSERT_EQ(d.records.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(d.records[i].id, i);
    EXPECT_EQ(d.unknots, 10u);
    EXPECT_TRUE(d.coverage.empty());
    auto longer = small_config(KnotClass::Unknot, 26, 2);
    EXPECT_THROW(merge_mixture({shards[0], run_chain(longer)}), std::invalid_argument);
}
