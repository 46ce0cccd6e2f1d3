#include "actrec/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "actrec/errors.hpp"
#include "actrec/parallel.hpp"

namespace actrec {

void Dataset::add(const std::vector<double>& features, int label) {
    if (static_cast<int>(features.size()) != num_features_) {
        throw InternalError("feature vector length does not match the dataset");
    }
    if (label < 0 || label >= kNumLabels) {
        throw InternalError("class label out of range");
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

std::string_view ensemble_method_name(EnsembleMethod m) {
    switch (m) {
        case EnsembleMethod::Bagging: return "bagging";
        case EnsembleMethod::RandomSubspace: return "random_subspace";
    }
    throw InternalError("unknown ensemble method");
}

std::optional<EnsembleMethod> ensemble_method_from_name(std::string_view name) {
    if (name == "bagging") return EnsembleMethod::Bagging;
    if (name == "random_subspace") return EnsembleMethod::RandomSubspace;
    return std::nullopt;
}

int default_subspace_features(int num_features) {
    return std::max(1, static_cast<int>(std::lround(std::sqrt(num_features))));
}

namespace {

struct ClassCounts {
    std::array<int, kNumLabels> counts{};
    int total = 0;

    void add(int label) {
        ++counts[label];
        ++total;
    }
};

int majority_label(const ClassCounts& c) {
    int best = 0;
    for (int l = 1; l < kNumLabels; ++l) {
        if (c.counts[l] > c.counts[best]) best = l;
    }
    return best;
}

bool is_pure(const ClassCounts& c) {
    for (int count : c.counts) {
        if (count == c.total) return true;
    }
    return false;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    // n * weighted child Gini; comparable across features of one node
    double impurity = std::numeric_limits<double>::infinity();
};

// Sweeps the sorted values of one feature and keeps the first (lowest
// threshold) split minimizing the weighted Gini impurity of the children.
void sweep_feature(const Dataset& data, const std::vector<int>& rows, int feature, int min_leaf,
                   std::vector<std::pair<double, int>>& scratch, SplitChoice& best) {
    const int n = static_cast<int>(rows.size());
    scratch.clear();
    scratch.reserve(rows.size());
    for (int row : rows) scratch.emplace_back(data.at(row, feature), data.label(row));
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::array<int, kNumLabels> left{};
    std::array<int, kNumLabels> right{};
    for (const auto& [value, label] : scratch) ++right[label];
    // running sums of squared class counts for O(1) Gini updates
    double sq_left = 0.0;
    double sq_right = 0.0;
    for (int c : right) sq_right += static_cast<double>(c) * c;

    for (int i = 0; i + 1 < n; ++i) {
        const int label = scratch[i].second;
        sq_left += 2.0 * left[label] + 1.0;
        sq_right -= 2.0 * right[label] - 1.0;
        ++left[label];
        --right[label];

        const double v = scratch[i].first;
        const double next = scratch[i + 1].first;
        if (v == next) continue;
        const int n_left = i + 1;
        const int n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;

        const double impurity = (n_left - sq_left / n_left) + (n_right - sq_right / n_right);
        if (impurity < best.impurity) {
            const double mid = v + (next - v) / 2.0;
            if (!(v < mid)) continue;  // adjacent representable doubles
            best.feature = feature;
            best.threshold = mid;
            best.impurity = impurity;
        }
    }
}

}  // namespace

void DecisionTree::fit(const Dataset& data, const std::vector<int>& rows,
                       const TreeConfig& config, Rng& rng) {
    if (rows.empty()) throw InternalError("cannot grow a tree from zero rows");
    nodes_.clear();

    std::vector<int> all_features;
    if (config.feature_subset.empty() && config.per_node_features == 0) {
        all_features.resize(static_cast<std::size_t>(data.num_features()));
        std::iota(all_features.begin(), all_features.end(), 0);
    }

    struct Pending {
        int node;
        std::vector<int> rows;
    };
    std::vector<Pending> stack;
    nodes_.emplace_back();
    stack.push_back({0, rows});

    std::vector<std::pair<double, int>> scratch;
    std::vector<int> node_features;

    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();

        ClassCounts counts;
        for (int row : item.rows) counts.add(data.label(row));

        auto make_leaf = [&] {
            nodes_[item.node].feature = -1;
            nodes_[item.node].leaf_label = majority_label(counts);
        };

        if (is_pure(counts) || counts.total < 2 * config.min_leaf) {
            make_leaf();
            continue;
        }

        const std::vector<int>* candidates = &all_features;
        if (config.per_node_features > 0) {
            node_features = rng.sample_without_replacement(data.num_features(),
                                                           config.per_node_features);
            candidates = &node_features;
        } else if (!config.feature_subset.empty()) {
            candidates = &config.feature_subset;
        }

        SplitChoice best;
        for (int feature : *candidates) {
            sweep_feature(data, item.rows, feature, config.min_leaf, scratch, best);
        }
        if (best.feature < 0) {
            make_leaf();
            continue;
        }

        std::vector<int> left_rows;
        std::vector<int> right_rows;
        for (int row : item.rows) {
            (data.at(row, best.feature) < best.threshold ? left_rows : right_rows)
                .push_back(row);
        }
        if (left_rows.empty() || right_rows.empty()) {
            throw InternalError("split produced an empty child");
        }

        const int left_index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        TreeNode& node = nodes_[item.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_index;
        node.right = left_index + 1;

        stack.push_back({left_index + 1, std::move(right_rows)});
        stack.push_back({left_index, std::move(left_rows)});
    }
}

int DecisionTree::predict(const std::vector<double>& x) const {
    if (nodes_.empty()) throw InternalError("predict on an unfitted tree");
    int index = 0;
    while (nodes_[index].feature >= 0) {
        const TreeNode& node = nodes_[index];
        index = x[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes_[index].leaf_label;
}

void Forest::fit(const Dataset& data, const ForestConfig& config, std::uint64_t seed) {
    if (data.size() == 0) throw DataError("cannot train a forest on an empty dataset");
    if (config.n_trees < 1) throw DataError("a forest needs at least one tree");

    const int n = data.size();
    const int num_features = data.num_features();
    const int subspace = config.subspace_features > 0 ? config.subspace_features
                                                      : default_subspace_features(num_features);
    if (subspace > num_features) {
        throw DataError("subspace size exceeds the number of features");
    }

    trees_.assign(static_cast<std::size_t>(config.n_trees), {});
    const Rng master(seed);

    parallel_for(config.n_trees, config.jobs, [&](int t) {
        Rng rng = master.fork(static_cast<std::uint64_t>(t));

        std::vector<int> bootstrap(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            bootstrap[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        }

        TreeConfig tree_config;
        tree_config.min_leaf = config.min_leaf;
        if (config.method == EnsembleMethod::RandomSubspace) {
            if (config.per_node_sampling) {
                tree_config.per_node_features = subspace;
            } else {
                tree_config.feature_subset = rng.sample_without_replacement(num_features, subspace);
            }
        }
        trees_[static_cast<std::size_t>(t)].fit(data, bootstrap, tree_config, rng);
    });
}

LabelVector Forest::predict_scores(const std::vector<double>& x) const {
    if (trees_.empty()) throw InternalError("predict on an untrained forest");
    LabelVector scores{};
    for (const DecisionTree& tree : trees_) {
        scores[tree.predict(x)] += 1.0;
    }
    for (double& s : scores) s /= static_cast<double>(trees_.size());
    return scores;
}

int Forest::predict_label(const std::vector<double>& x) const {
    return argmax_label(predict_scores(x));
}

Forest Forest::from_trees(std::vector<DecisionTree> trees) {
    Forest f;
    f.trees_ = std::move(trees);
    return f;
}

int argmax_label(const LabelVector& scores) {
    int best = 0;
    for (int l = 1; l < kNumLabels; ++l) {
        if (scores[l] > scores[best]) best = l;
    }
    return best;
}

}  // namespace actrec
