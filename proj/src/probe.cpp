#include "geoknot/probe.hpp"

#include "geoknot/rng.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace geoknot {

const std::vector<double>& LabeledFeatureTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == name) return columns[k];
    }
    throw std::invalid_argument("no feature column named " + name);
}

void LabeledFeatureTable::add_column(std::string name, std::vector<double> values) {
    if (values.size() != labels.size()) throw std::invalid_argument("column length differs from label count");
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

// ---------------------------------------------------------------------------
// kNN mutual information

double knn_mi(std::span<const double> values, std::span<const int> labels, std::size_t k) {
    const std::size_t n = values.size();
    if (labels.size() != n) throw std::invalid_argument("values and labels differ in length");
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (n < 10) throw std::invalid_argument("mutual information needs at least 10 samples");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) throw std::invalid_argument("non-finite feature value");
        members[labels[i]].push_back(i);
    }
    if (members.size() < 2) throw std::invalid_argument("mutual information needs at least two classes");
    for (const auto& [label, idx] : members) {
        if (idx.size() <= k) throw std::invalid_argument("class " + std::to_string(label) + " has no more than k members");
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) return 0.0;

    std::vector<double> x(values.begin(), values.end());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 0) {
        for (double& v : x) v /= sd;
    }
    double mean_abs = 0.0;
    for (double v : x) mean_abs += std::abs(v);
    mean_abs /= static_cast<double>(n);
    CounterRng noise(0x6B6E6E6D69ULL, 0);
    for (double& v : x) v += 1e-10 * std::max(1.0, mean_abs) * noise.normal();

    std::vector<double> all = x;
    std::sort(all.begin(), all.end());

    using boost::math::digamma;
    double sum_label = 0.0, sum_m = 0.0;
    for (const auto& [label, idx] : members) {
        std::vector<double> cls;
        cls.reserve(idx.size());
        for (std::size_t i : idx) cls.push_back(x[i]);
        std::sort(cls.begin(), cls.end());
        const double psi_count = digamma(static_cast<double>(cls.size()));
        for (std::size_t p = 0; p < cls.size(); ++p) {
            // k-th nearest same-class neighbour by merging outward from p.
            std::ptrdiff_t l = static_cast<std::ptrdiff_t>(p) - 1;
            std::size_t r = p + 1;
            double d = 0.0;
            for (std::size_t step = 0; step < k; ++step) {
                const double dl = l >= 0 ? cls[p] - cls[static_cast<std::size_t>(l)] : INFINITY;
                const double dr = r < cls.size() ? cls[r] - cls[p] : INFINITY;
                if (dl <= dr) {
                    d = dl;
                    --l;
                } else {
                    d = dr;
                    ++r;
                }
            }
            // Points strictly closer than d, with the same subtraction used for d.
            const double c = cls[p];
            auto lo = std::lower_bound(all.begin(), all.end(), c - d);
            while (lo != all.begin() && c - *(lo - 1) < d) --lo;
            while (lo != all.end() && *lo < c && c - *lo >= d) ++lo;
            auto hi = std::upper_bound(all.begin(), all.end(), c + d);
            while (hi != all.begin() && *(hi - 1) > c && *(hi - 1) - c >= d) --hi;
            while (hi != all.end() && *hi - c < d) ++hi;
            const auto m = static_cast<double>(hi - lo);
            sum_m += digamma(m);
            sum_label += psi_count;
        }
    }
    const double nn = static_cast<double>(n);
    const double mi = digamma(nn) + digamma(static_cast<double>(k)) - sum_label / nn - sum_m / nn;
    return std::max(0.0, mi);
}

std::vector<ProbeEntry> shortcut_probe(const LabeledFeatureTable& table, const std::vector<std::string>& functionals,
                                       std::size_t k) {
    std::vector<ProbeEntry> out;
    for (const auto& name : functionals) out.push_back({name, knn_mi(table.column(name), table.labels, k), 0});
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (out[a].mi_nats != out[b].mi_nats) return out[a].mi_nats > out[b].mi_nats;
        return out[a].functional < out[b].functional;
    });
    for (std::size_t r = 0; r < order.size(); ++r) out[order[r]].rank = r + 1;
    return out;
}

// ---------------------------------------------------------------------------
// Baseline classifier

int BaselineModel::predict(std::span<const double> x) const {
    const std::size_t d = features.size();
    std::size_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        double s = weights[c][d];
        for (std::size_t j = 0; j < d; ++j) s += weights[c][j] * (x[j] - mean[j]) / scale[j];
        if (s > best_score) {
            best_score = s;
            best = c;
        }
    }
    return classes[best];
}

BaselineModel train_baseline(const LabeledFeatureTable& table, const std::vector<std::string>& features,
                             const BaselineHyper& hyper) {
    const std::size_t n = table.rows();
    const std::size_t d = features.size();
    if (d == 0) throw std::invalid_argument("baseline needs at least one feature");
    std::vector<const std::vector<double>*> cols;
    for (const auto& f : features) cols.push_back(&table.column(f));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(hyper.split_seed, 0x73706C6974ULL);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(std::floor(hyper.train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(hyper.val_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train + n_val >= n) throw std::invalid_argument("dataset too small for the split");
    const std::span<const std::size_t> train(order.data(), n_train);
    const std::span<const std::size_t> val(order.data() + n_train, n_val);
    const std::span<const std::size_t> test(order.data() + n_train + n_val, n - n_train - n_val);

    BaselineModel model;
    model.features = features;
    std::set<int> class_set;
    for (std::size_t i : train) class_set.insert(table.labels[i]);
    if (class_set.size() < 2) throw std::invalid_argument("training split contains a single class");
    model.classes.assign(class_set.begin(), class_set.end());
    const std::size_t nc = model.classes.size();
    std::map<int, std::size_t> class_index;
    for (std::size_t c = 0; c < nc; ++c) class_index[model.classes[c]] = c;

    model.mean.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i : train) m += (*cols[j])[i];
        m /= static_cast<double>(n_train);
        double v = 0.0;
        for (std::size_t i : train) v += ((*cols[j])[i] - m) * ((*cols[j])[i] - m);
        const double sd = std::sqrt(v / static_cast<double>(n_train));
        model.mean[j] = m;
        model.scale[j] = sd > 0 ? sd : 1.0;
    }
    std::vector<std::vector<double>> z(n_train, std::vector<double>(d + 1, 1.0));
    std::vector<std::size_t> y(n_train);
    for (std::size_t r = 0; r < n_train; ++r) {
        for (std::size_t j = 0; j < d; ++j) z[r][j] = ((*cols[j])[train[r]] - model.mean[j]) / model.scale[j];
        y[r] = class_index.at(table.labels[train[r]]);
    }

    model.weights.assign(nc, std::vector<double>(d + 1, 0.0));
    std::vector<std::vector<double>> grad(nc, std::vector<double>(d + 1));
    std::vector<double> p(nc);
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t r = 0; r < n_train; ++r) {
            double top = -INFINITY;
            for (std::size_t c = 0; c < nc; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j <= d; ++j) s += model.weights[c][j] * z[r][j];
                p[c] = s;
                top = std::max(top, s);
            }
            double norm = 0.0;
            for (double& v : p) norm += (v = std::exp(v - top));
            for (std::size_t c = 0; c < nc; ++c) {
                const double err = p[c] / norm - (c == y[r] ? 1.0 : 0.0);
                for (std::size_t j = 0; j <= d; ++j) grad[c][j] += err * z[r][j];
            }
        }
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t j = 0; j <= d; ++j) {
                double g = grad[c][j] / static_cast<double>(n_train);
                if (j < d) g += hyper.l2 * model.weights[c][j];
                model.weights[c][j] -= hyper.learning_rate * g;
            }
        }
    }

    auto accuracy = [&](std::span<const std::size_t> rows) {
        if (rows.empty()) return 0.0;
        std::size_t hit = 0;
        std::vector<double> x(d);
        for (std::size_t i : rows) {
            for (std::size_t j = 0; j < d; ++j) x[j] = (*cols[j])[i];
            hit += model.predict(x) == table.labels[i];
        }
        return static_cast<double>(hit) / static_cast<double>(rows.size());
    };
    model.train_accuracy = accuracy(train);
    model.val_accuracy = accuracy(val);
    model.test_accuracy = accuracy(test);
    model.train_size = train.size();
    model.val_size = val.size();
    model.test_size = test.size();
    return model;
}

ShortcutIndex shortcut_index(double m_a, double m) {
    if (!(m > 0) || m > 1) throw std::invalid_argument("full-representation accuracy must lie in (0, 1]");
    if (!(m_a >= 0) || m_a > 1) throw std::invalid_argument("shortcut accuracy must lie in [0, 1]");
    return {m_a / m, m > 0.55};
}

}  // namespace geoknot
