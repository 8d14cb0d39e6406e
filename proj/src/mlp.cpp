#include "prognosis/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "prognosis/model.hpp"

namespace prognosis {

using nlohmann::json;

namespace {

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// log(1 + e^eta) without overflow
double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

}  // namespace

MlpNet MlpNet::make(int n_inputs, const std::vector<int>& hidden) {
    MlpNet net;
    net.layer_sizes.push_back(n_inputs);
    for (int h : hidden) net.layer_sizes.push_back(h);
    net.layer_sizes.push_back(1);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        net.weights.emplace_back(static_cast<std::size_t>(in) * out, 0.0);
        net.biases.emplace_back(out, 0.0);
    }
    return net;
}

void MlpNet::init_glorot(Rng& rng) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : weights[l]) w = uniform_range(rng, -limit, limit);
        for (double& b : biases[l]) b = 0.0;
    }
}

void MlpNet::zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

// Forward pass keeping pre-activations for backprop. activations[0] is the
// input; activations[l+1] has layer l's outputs (ReLU applied on hidden).
struct ForwardState {
    std::vector<std::vector<double>> activations;
    double logit = 0.0;
};

ForwardState run_forward(const MlpNet& net, const double* row) {
    ForwardState st;
    st.activations.resize(net.layer_sizes.size());
    st.activations[0].assign(row, row + net.layer_sizes[0]);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        const bool is_output = l + 1 == net.weights.size();
        auto& cur = st.activations[l + 1];
        cur.assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double acc = net.biases[l][o];
            const double* wrow = net.weights[l].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += wrow[i] * st.activations[l][i];
            cur[o] = is_output ? acc : std::max(0.0, acc);
        }
    }
    st.logit = st.activations.back()[0];
    return st;
}

}  // namespace

double MlpNet::forward(const double* row) const { return sigmoid(run_forward(*this, row).logit); }

MlpNet::Gradients MlpNet::zero_gradients() const {
    Gradients g;
    for (const auto& w : weights) g.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

double MlpNet::batch_gradients(const std::vector<const double*>& rows,
                               const std::vector<int>& labels, Gradients& g) const {
    const double scale = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    std::vector<std::vector<double>> delta(weights.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ForwardState st = run_forward(*this, rows[r]);
        const double y = static_cast<double>(labels[r]);
        loss += softplus(st.logit) - y * st.logit;

        // output delta for sigmoid + BCE is p - y
        delta.back().assign(1, sigmoid(st.logit) - y);
        for (std::size_t l = weights.size(); l-- > 0;) {
            const int in = layer_sizes[l];
            const int out = layer_sizes[l + 1];
            for (int o = 0; o < out; ++o) {
                const double d = delta[l][o] * scale;
                double* grow = g.weights[l].data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) grow[i] += d * st.activations[l][i];
                g.biases[l][o] += d;
            }
            if (l == 0) break;
            auto& prev = delta[l - 1];
            prev.assign(in, 0.0);
            for (int i = 0; i < in; ++i) {
                if (st.activations[l][i] <= 0.0) continue;  // ReLU gate
                double acc = 0.0;
                for (int o = 0; o < out; ++o)
                    acc += weights[l][static_cast<std::size_t>(o) * in + i] * delta[l][o];
                prev[i] = acc;
            }
        }
    }
    return loss * scale;
}

void MlpNet::apply_update(const Gradients& g, double learning_rate) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i)
            weights[l][i] -= learning_rate * g.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i)
            biases[l][i] -= learning_rate * g.biases[l][i];
    }
}

double MlpNet::mean_loss(const std::vector<const double*>& rows,
                         const std::vector<int>& labels) const {
    double loss = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double logit = run_forward(*this, rows[r]).logit;
        loss += softplus(logit) - static_cast<double>(labels[r]) * logit;
    }
    return loss / static_cast<double>(rows.size());
}

namespace {

class MlpModel final : public Model {
public:
    std::string id_ = "mlp";
    std::vector<std::string> names_;
    Hyperparams hp_;
    std::uint64_t seed_ = 0;
    std::vector<double> mean_, sd_;
    MlpNet net_;

    const std::string& learner_id() const override { return id_; }
    const std::vector<std::string>& feature_names() const override { return names_; }

    std::vector<double> predict_proba(const DesignMatrix& x) const override {
        check_feature_names(*this, x);
        std::vector<double> out(x.n_rows);
        std::vector<double> row(x.n_cols());
        for (std::size_t i = 0; i < x.n_rows; ++i) {
            for (std::size_t j = 0; j < x.n_cols(); ++j)
                row[j] = (x.at(i, j) - mean_[j]) / sd_[j];
            out[i] = clamp_probability(net_.forward(row.data()));
        }
        return out;
    }

    json to_json() const override {
        return json{{"learner", id_},         {"hyperparameters", hp_},
                    {"seed", seed_},          {"feature_names", names_},
                    {"mean", mean_},          {"sd", sd_},
                    {"layer_sizes", net_.layer_sizes}, {"weights", net_.weights},
                    {"biases", net_.biases}};
    }
};

}  // namespace

std::unique_ptr<Model> fit_mlp(const DesignMatrix& x, const std::vector<int>& y,
                               const Hyperparams& hp, std::uint64_t seed) {
    x.validate();
    check_binary_labels(y, x.n_rows);
    std::vector<int> hidden;
    for (const char* key : {"hidden1", "hidden2", "hidden3"}) {
        if (!hp.count(key)) continue;
        const int h = static_cast<int>(hp.at(key));
        if (h > 0) hidden.push_back(h);
    }
    if (hidden.empty()) hidden.push_back(32);
    const double learning_rate = hp.count("learning_rate") ? hp.at("learning_rate") : 0.05;
    const int epochs = static_cast<int>(hp.count("epochs") ? hp.at("epochs") : 60.0);
    const int batch_size = static_cast<int>(hp.count("batch_size") ? hp.at("batch_size") : 32.0);
    if (!(learning_rate > 0.0)) throw ModelError("mlp: learning_rate must be > 0");
    if (epochs < 1) throw ModelError("mlp: epochs must be >= 1");
    if (batch_size < 1) throw ModelError("mlp: batch_size must be >= 1");

    const std::size_t n = x.n_rows;
    const std::size_t p = x.n_cols();
    auto model = std::make_unique<MlpModel>();
    model->names_ = x.feature_names;
    model->hp_ = hp;
    model->seed_ = seed;
    model->mean_.assign(p, 0.0);
    model->sd_.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x.at(i, j);
        model->mean_[j] = acc / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x.at(i, j) - model->mean_[j];
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        model->sd_[j] = sd > 0.0 ? sd : 1.0;
    }

    std::vector<double> z(n * p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            z[i * p + j] = (x.at(i, j) - model->mean_[j]) / model->sd_[j];

    // 12.5% of the training rows form a validation subset that picks the
    // epoch to keep.
    Rng rng(derive_seed(seed, 0x6d6c70u));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[bounded(rng, i)]);
    const std::size_t n_val = n / 8;
    std::vector<const double*> val_rows, train_rows;
    std::vector<int> val_y, train_y;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = z.data() + order[i] * p;
        if (i < n_val) {
            val_rows.push_back(row);
            val_y.push_back(y[order[i]]);
        } else {
            train_rows.push_back(row);
            train_y.push_back(y[order[i]]);
        }
    }

    MlpNet net = MlpNet::make(static_cast<int>(p), hidden);
    net.init_glorot(rng);

    MlpNet best = net;
    double best_val = std::numeric_limits<double>::infinity();
    const std::size_t n_train = train_rows.size();
    std::vector<std::size_t> idx(n_train);
    for (std::size_t i = 0; i < n_train; ++i) idx[i] = i;

    std::vector<const double*> batch_rows;
    std::vector<int> batch_y;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(idx[i - 1], idx[bounded(rng, i)]);
        for (std::size_t start = 0; start < n_train; start += batch_size) {
            const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(batch_size));
            batch_rows.clear();
            batch_y.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch_rows.push_back(train_rows[idx[i]]);
                batch_y.push_back(train_y[idx[i]]);
            }
            auto g = net.zero_gradients();
            const double loss = net.batch_gradients(batch_rows, batch_y, g);
            if (!std::isfinite(loss))
                throw ModelError("mlp: non-finite loss at epoch " + std::to_string(epoch));
            net.apply_update(g, learning_rate);
        }
        const double val_loss =
            n_val > 0 ? net.mean_loss(val_rows, val_y) : net.mean_loss(train_rows, train_y);
        if (!std::isfinite(val_loss))
            throw ModelError("mlp: non-finite validation loss at epoch " + std::to_string(epoch));
        if (val_loss < best_val) {
            best_val = val_loss;
            best = net;
        }
    }
    model->net_ = std::move(best);
    return model;
}

namespace detail {

std::unique_ptr<Model> mlp_from_json(const json& doc) {
    auto m = std::make_unique<MlpModel>();
    m->hp_ = doc.at("hyperparameters").get<Hyperparams>();
    m->seed_ = doc.at("seed").get<std::uint64_t>();
    m->names_ = doc.at("feature_names").get<std::vector<std::string>>();
    m->mean_ = doc.at("mean").get<std::vector<double>>();
    m->sd_ = doc.at("sd").get<std::vector<double>>();
    m->net_.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    m->net_.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    m->net_.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    return m;
}

}  // namespace detail

}  // namespace prognosis
