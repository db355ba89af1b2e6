#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace geoknot {

/// Named real feature columns with one discrete label per row.
struct LabeledFeatureTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<int> labels;

    std::size_t rows() const { return labels.size(); }
    /// Throws std::invalid_argument when the column is missing.
    const std::vector<double>& column(const std::string& name) const;
    void add_column(std::string name, std::vector<double> values);
};

/// kNN estimate (nats) of I(X; Y) for continuous X and discrete Y, clamped at 0.
/// Values are scaled to unit standard deviation and perturbed by a fixed
/// 1e-10-amplitude noise to break ties.
double knn_mi(std::span<const double> values, std::span<const int> labels, std::size_t k = 3);

struct ProbeEntry {
    std::string functional;
    double mi_nats = 0;
    std::size_t rank = 0;
};

/// Scores every requested column; rank 1 is the most informative, ties by name.
std::vector<ProbeEntry> shortcut_probe(const LabeledFeatureTable& table, const std::vector<std::string>& functionals,
                                       std::size_t k = 3);

struct BaselineHyper {
    double l2 = 1e-3;
    double learning_rate = 0.5;
    std::size_t epochs = 2000;
    std::uint64_t split_seed = 0;
    double train_fraction = 0.8;
    double val_fraction = 0.05;
};

struct BaselineModel {
    std::vector<std::string> features;
    std::vector<int> classes;
    std::vector<double> mean, scale;
    /// classes x (features + 1), bias last.
    std::vector<std::vector<double>> weights;
    double train_accuracy = 0;
    double val_accuracy = 0;
    double test_accuracy = 0;
    std::size_t train_size = 0, val_size = 0, test_size = 0;

    int predict(std::span<const double> x) const;
};

/// Multinomial logistic regression by full-batch gradient descent on a seeded
/// 0.8/0.05/0.15 split, features standardized on the training rows.
BaselineModel train_baseline(const LabeledFeatureTable& table, const std::vector<std::string>& features,
                             const BaselineHyper& hyper = {});

struct ShortcutIndex {
    double tau = 0;
    bool informative = true;
};

/// tau = m_a / m; not informative when m <= 0.55.
ShortcutIndex shortcut_index(double m_a, double m);

}  // namespace geoknot
