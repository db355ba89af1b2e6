#include "geoknot/probe.hpp"
#include "geoknot/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace geoknot;

namespace {

std::vector<int> balanced_labels(std::size_t n) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
    return y;
}

std::vector<double> uniform_noise(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 0x6E6F6973);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform();
    return x;
}

}  // namespace

TEST(KnnMi, IndependentFeatureNearZero) {
    const auto y = balanced_labels(2000);
    for (std::uint64_t s = 0; s < 5; ++s) EXPECT_LT(std::abs(knn_mi(uniform_noise(2000, s), y)), 0.05);
}

TEST(KnnMi, PerfectSeparationNearLn2) {
    const auto y = balanced_labels(2000);
    auto x = uniform_noise(2000, 9);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] + 1e-3 * x[i];
    EXPECT_NEAR(knn_mi(x, y), std::numbers::ln2, 0.05);
}

TEST(KnnMi, ConstantValuesGiveZero) {
    const auto y = balanced_labels(50);
    const std::vector<double> x(50, 3.25);
    EXPECT_EQ(knn_mi(x, y), 0.0);
}

TEST(KnnMi, Preconditions) {
    const auto y = balanced_labels(20);
    const auto x = uniform_noise(20, 1);
    EXPECT_THROW(knn_mi(std::span(x).first(9), std::span(y).first(9)), std::invalid_argument);
    EXPECT_THROW(knn_mi(x, std::vector<int>(20, 1)), std::invalid_argument);
    std::vector<int> rare(20, 0);
    rare[0] = rare[1] = rare[2] = 1;
    EXPECT_THROW(knn_mi(x, rare, 3), std::invalid_argument);
    EXPECT_THROW(knn_mi(x, y, 0), std::invalid_argument);
    auto bad = x;
    bad[4] = std::nan("");
    EXPECT_THROW(knn_mi(bad, y), std::invalid_argument);
    EXPECT_THROW(knn_mi(x, std::span(y).first(19)), std::invalid_argument);
}

TEST(KnnMi, MonotoneTransformInvariance) {
    const auto y = balanced_labels(2000);
    CounterRng rng(3, 0);
    std::vector<double> x(2000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal() + 0.8 * y[i];
    const double base = knn_mi(x, y);
    EXPECT_GT(base, 0.05);
    for (int m = 0; m < 20; ++m) {
        const double a = rng.uniform(0.2, 3.0), b = rng.uniform(-5, 5), c = rng.uniform(0.1, 1.0);
        std::vector<double> t(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) t[i] = m % 2 ? a * x[i] + b : std::exp(c * x[i]) + b;
        EXPECT_NEAR(knn_mi(t, y), base, 0.05);
    }
}

TEST(KnnMi, LabelPermutationNull) {
    const std::size_t n = 2000;
    auto y = balanced_labels(n);
    std::vector<double> x(n);
    CounterRng rng(4, 0);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] + 0.3 * rng.normal();
    for (std::size_t i = n; i > 1; --i) std::swap(y[i - 1], y[rng.below(i)]);
    EXPECT_LT(knn_mi(x, y), 0.05);
}

TEST(ShortcutProbe, RanksAndTies) {
    LabeledFeatureTable t;
    t.labels = balanced_labels(400);
    auto signal = uniform_noise(400, 2);
    for (std::size_t i = 0; i < signal.size(); ++i) signal[i] += 2.0 * t.labels[i];
    t.add_column("noise", uniform_noise(400, 5));
    t.add_column("b_signal", signal);
    t.add_column("a_signal", signal);
    const auto report = shortcut_probe(t, {"noise", "b_signal", "a_signal"});
    ASSERT_EQ(report.size(), 3u);
    EXPECT_EQ(report[1].mi_nats, report[2].mi_nats);
    EXPECT_EQ(report[2].rank, 1u);
    EXPECT_EQ(report[1].rank, 2u);
    EXPECT_EQ(report[0].rank, 3u);
    for (const auto& e : report) EXPECT_GE(e.mi_nats, 0.0);
    EXPECT_THROW(shortcut_probe(t, {"missing"}), std::invalid_argument);
    EXPECT_THROW(t.add_column("short", {1.0}), std::invalid_argument);
}

TEST(ShortcutProbe, RankingInvariantUnderRescaling) {
    LabeledFeatureTable t, s;
    t.labels = s.labels = balanced_labels(600);
    CounterRng rng(8, 0);
    for (int f = 0; f < 4; ++f) {
        std::vector<double> x(600);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal() + 0.4 * f * t.labels[i];
        std::vector<double> scaled(x);
        for (auto& v : scaled) v *= 1000.0 * (f + 1);
        t.add_column("f" + std::to_string(f), x);
        s.add_column("f" + std::to_string(f), scaled);
    }
    const auto a = shortcut_probe(t, t.names), b = shortcut_probe(s, s.names);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].rank, b[k].rank);
}

TEST(Baseline, PerfectlySeparatingFeature) {
    LabeledFeatureTable t;
    t.labels = balanced_labels(400);
    auto x = uniform_noise(400, 6);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 3.0 * t.labels[i];
    t.add_column("x", x);
    const auto m = train_baseline(t, {"x"});
    EXPECT_EQ(m.test_accuracy, 1.0);
    EXPECT_EQ(m.train_size, 320u);
    EXPECT_EQ(m.val_size, 20u);
    EXPECT_EQ(m.test_size, 60u);
}

TEST(Baseline, PureNoiseIsChance) {
    LabeledFeatureTable t;
    t.labels = balanced_labels(20000);
    t.add_column("a", uniform_noise(20000, 11));
    t.add_column("b", uniform_noise(20000, 12));
    BaselineHyper h;
    h.epochs = 300;
    const auto m = train_baseline(t, {"a", "b"}, h);
    EXPECT_NEAR(m.test_accuracy, 0.5, 0.05);
}

TEST(Baseline, DeterministicGivenSplitSeed) {
    LabeledFeatureTable t;
    t.labels = balanced_labels(300);
    CounterRng rng(2, 0);
    std::vector<double> x(300);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal() + t.labels[i];
    t.add_column("x", x);
    const auto a = train_baseline(t, {"x"}), b = train_baseline(t, {"x"});
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.test_accuracy, b.test_accuracy);
    BaselineHyper h;
    h.split_seed = 1;
    EXPECT_NE(train_baseline(t, {"x"}, h).weights, a.weights);
}

TEST(Baseline, SingleClassSplitRejected) {
    LabeledFeatureTable t;
    t.labels = std::vector<int>(40, 0);
    t.labels[39] = 1;
    t.add_column("x", uniform_noise(40, 1));
    BaselineHyper h;
    bool threw = false;
    for (std::uint64_t s = 0; s < 50 && !threw; ++s) {
        h.split_seed = s;
        try {
            train_baseline(t, {"x"}, h);
        } catch (const std::invalid_argument&) {
            threw = true;
        }
    }
    EXPECT_TRUE(threw);
    EXPECT_THROW(train_baseline(t, {}), std::invalid_argument);
}

TEST(ShortcutIndex, Examples) {
    EXPECT_EQ(shortcut_index(0.8, 0.8).tau, 1.0);
    EXPECT_NEAR(shortcut_index(0.831, 0.999).tau, 0.832, 5e-4);
    EXPECT_TRUE(shortcut_index(0.831, 0.999).informative);
    EXPECT_FALSE(shortcut_index(0.5, 0.50).informative);
    EXPECT_THROW(shortcut_index(0.5, 0.0), std::invalid_argument);
    EXPECT_THROW(shortcut_index(1.2, 0.9), std::invalid_argument);
    EXPECT_THROW(shortcut_index(0.5, 1.1), std::invalid_argument);
    EXPECT_LT(shortcut_index(0.6, 0.9).tau, shortcut_index(0.7, 0.9).tau);
}
