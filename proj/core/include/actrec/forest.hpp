#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "actrec/domain.hpp"
#include "actrec/rng.hpp"

namespace actrec {

// Row-major training matrix with integer class labels in [0, kNumLabels).
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(int num_features) : num_features_(num_features) {}

    void add(const std::vector<double>& features, int label);

    int size() const { return static_cast<int>(labels_.size()); }
    int num_features() const { return num_features_; }
    double at(int row, int feature) const {
        return values_[static_cast<std::size_t>(row) * num_features_ + feature];
    }
    int label(int row) const { return labels_[static_cast<std::size_t>(row)]; }

private:
    int num_features_ = 0;
    std::vector<double> values_;
    std::vector<int> labels_;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_label = -1;  // majority class, set on leaves only
};

struct TreeConfig {
    int min_leaf = 1;
    // features eligible at every split (ascending); empty means all features
    std::vector<int> feature_subset;
    // when > 0, draw this many features fresh at each node instead of using
    // the fixed subset
    int per_node_features = 0;
};

// CART-style classification tree: Gini impurity, midpoint thresholds between
// consecutive distinct feature values, no depth limit. All ties (equal
// impurity, equal vote counts) resolve to the lowest index, which makes
// training and prediction fully deterministic.
class DecisionTree {
public:
    void fit(const Dataset& data, const std::vector<int>& rows, const TreeConfig& config,
             Rng& rng);

    int predict(const std::vector<double>& x) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    void set_nodes(std::vector<TreeNode> nodes) { nodes_ = std::move(nodes); }
    bool empty() const { return nodes_.empty(); }

private:
    std::vector<TreeNode> nodes_;
};

enum class EnsembleMethod : std::uint8_t { Bagging = 0, RandomSubspace = 1 };

std::string_view ensemble_method_name(EnsembleMethod m);
std::optional<EnsembleMethod> ensemble_method_from_name(std::string_view name);

struct ForestConfig {
    EnsembleMethod method = EnsembleMethod::RandomSubspace;
    int n_trees = 100;
    int min_leaf = 1;
    // subspace size; 0 means round(sqrt(num_features))
    int subspace_features = 0;
    // resample the subspace at every node instead of once per tree
    bool per_node_sampling = false;
    int jobs = 1;
};

int default_subspace_features(int num_features);

// Bootstrap ensemble of decision trees. Bagging trains every tree on all
// features; random subspace additionally restricts each tree (or each node)
// to a random feature subset. Tree t draws from an Rng forked off the master
// seed with index t, so results are identical for any `jobs` value.
class Forest {
public:
    void fit(const Dataset& data, const ForestConfig& config, std::uint64_t seed);

    // fraction of trees voting for each label; sums to 1 for a trained forest
    LabelVector predict_scores(const std::vector<double>& x) const;
    // argmax of the scores, ties to the lowest label index
    int predict_label(const std::vector<double>& x) const;

    int n_trees() const { return static_cast<int>(trees_.size()); }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    bool trained() const { return !trees_.empty(); }

    static Forest from_trees(std::vector<DecisionTree> trees);

private:
    std::vector<DecisionTree> trees_;
};

int argmax_label(const LabelVector& scores);

}  // namespace actrec
