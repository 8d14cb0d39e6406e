#pragma once

#include <cstdint>
#include <vector>

#include "prognosis/rng.hpp"

namespace prognosis {

// Fully connected net: ReLU hidden layers, sigmoid output, mean binary
// cross-entropy loss. Exposed so gradients can be checked directly.
struct MlpNet {
    std::vector<int> layer_sizes;            // input, hidden..., 1
    std::vector<std::vector<double>> weights;  // weights[l] is (out x in) row-major
    std::vector<std::vector<double>> biases;

    static MlpNet make(int n_inputs, const std::vector<int>& hidden);
    void init_glorot(Rng& rng);
    void zero();

    // Probability for one row (pre-standardized input).
    double forward(const double* row) const;

    struct Gradients {
        std::vector<std::vector<double>> weights;
        std::vector<std::vector<double>> biases;
    };
    Gradients zero_gradients() const;

    // Mean BCE over the batch; accumulates mean-loss gradients into g.
    double batch_gradients(const std::vector<const double*>& rows, const std::vector<int>& labels,
                           Gradients& g) const;

    void apply_update(const Gradients& g, double learning_rate);

    // Mean BCE over the given rows (no gradients).
    double mean_loss(const std::vector<const double*>& rows, const std::vector<int>& labels) const;
};

}  // namespace prognosis
