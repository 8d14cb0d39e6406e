#pragma once

#include <cstdint>
#include <vector>

#include "prognosis/rng.hpp"

namespace prognosis {

// CART machinery shared by the classification/regression forests and the
// boosted trees. Rows are addressed through an index array so callers can
// pass bootstrap samples without copying the matrix.

struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    // Leaf payload: class fractions (classification, size n_classes) or a
    // single mean (regression).
    std::vector<double> leaf;
    int n_samples = 0;
    int depth = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    int descend(const double* row, std::size_t stride) const;  // leaf node index
    int max_depth() const;  // depth of the deepest node; 0 for a stump leaf
};

// Dense row-major view; x(r, c) = data[rows[r] * n_cols + c].
struct MatrixView {
    const double* data = nullptr;
    std::size_t n_cols = 0;
    double at(std::size_t row, std::size_t col) const { return data[row * n_cols + col]; }
};

enum class TreeTask : std::uint8_t { classification, regression };

struct TreeParams {
    TreeTask task = TreeTask::classification;
    int n_classes = 2;      // classification only
    int mtry = 0;           // features sampled per node; 0 = all
    int min_leaf = 1;       // minimum samples in each child
    int max_depth = -1;     // -1 = unlimited
};

// Grows a tree on the given sample rows. Targets are class ids (0-based)
// for classification or raw values for regression. Split search considers
// midpoints between consecutive distinct values; equal-gain ties resolve
// to the lowest feature index, then the lowest threshold.
Tree grow_tree(const MatrixView& x, const std::vector<double>& targets,
               const std::vector<std::uint32_t>& sample_rows, const TreeParams& params, Rng& rng);

}  // namespace prognosis
