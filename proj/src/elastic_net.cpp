#include <algorithm>
#include <cmath>

#include "prognosis/model.hpp"

namespace prognosis {

using nlohmann::json;

namespace {

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Standardizer fit(const DesignMatrix& x) {
        Standardizer s;
        const std::size_t p = x.n_cols();
        s.mean.assign(p, 0.0);
        s.sd.assign(p, 1.0);
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.n_rows; ++i) acc += x.at(i, j);
            s.mean[j] = acc / static_cast<double>(x.n_rows);
            double ss = 0.0;
            for (std::size_t i = 0; i < x.n_rows; ++i) {
                const double d = x.at(i, j) - s.mean[j];
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(x.n_rows));
            s.sd[j] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    double value(const DesignMatrix& x, std::size_t i, std::size_t j) const {
        return (x.at(i, j) - mean[j]) / sd[j];
    }
};

class ElasticNetModel final : public Model {
public:
    std::string id_ = "elastic_net";
    std::vector<std::string> names_;
    Hyperparams hp_;
    std::uint64_t seed_ = 0;
    Standardizer std_;
    double intercept_ = 0.0;
    std::vector<double> coef_;  // on the standardized scale

    const std::string& learner_id() const override { return id_; }
    const std::vector<std::string>& feature_names() const override { return names_; }

    std::vector<double> predict_proba(const DesignMatrix& x) const override {
        check_feature_names(*this, x);
        std::vector<double> out(x.n_rows);
        for (std::size_t i = 0; i < x.n_rows; ++i) {
            double eta = intercept_;
            for (std::size_t j = 0; j < coef_.size(); ++j)
                if (coef_[j] != 0.0) eta += coef_[j] * std_.value(x, i, j);
            out[i] = clamp_probability(sigmoid(eta));
        }
        return out;
    }

    json to_json() const override {
        return json{{"learner", id_},       {"hyperparameters", hp_}, {"seed", seed_},
                    {"feature_names", names_}, {"mean", std_.mean},   {"sd", std_.sd},
                    {"intercept", intercept_}, {"coefficients", coef_}};
    }
};

}  // namespace

std::unique_ptr<Model> fit_elastic_net(const DesignMatrix& x, const std::vector<int>& y,
                                       const Hyperparams& hp, std::uint64_t seed) {
    x.validate();
    check_binary_labels(y, x.n_rows);
    const double lambda = hp.count("lambda") ? hp.at("lambda") : 1e-2;
    const double alpha = hp.count("alpha") ? hp.at("alpha") : 0.5;
    if (lambda < 0.0) throw ModelError("elastic_net: lambda must be >= 0");
    if (alpha < 0.0 || alpha > 1.0) throw ModelError("elastic_net: alpha must be in [0, 1]");

    const std::size_t n = x.n_rows;
    const std::size_t p = x.n_cols();
    auto model = std::make_unique<ElasticNetModel>();
    model->names_ = x.feature_names;
    model->hp_ = {{"lambda", lambda}, {"alpha", alpha}};
    model->seed_ = seed;
    model->std_ = Standardizer::fit(x);

    // standardized copy, column-major for the coordinate sweeps
    std::vector<double> z(n * p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) z[j * n + i] = model->std_.value(x, i, j);

    std::vector<double> beta(p, 0.0);
    double beta0 = 0.0;
    std::vector<double> eta(n, 0.0);
    std::vector<double> w(n), work_resid(n);
    const double inv_n = 1.0 / static_cast<double>(n);

    const double kkt_tol = 1e-7;
    const int max_outer = 500;
    for (int outer = 0; outer < max_outer; ++outer) {
        // quadratic approximation at the current eta
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = sigmoid(eta[i]);
            const double wi = std::max(pi * (1.0 - pi), 1e-9);
            w[i] = wi;
            // working residual z_i - eta_i with z the IRLS response
            work_resid[i] = (static_cast<double>(y[i]) - pi) / wi;
        }

        double max_delta = 0.0;
        for (int inner = 0; inner < 1000; ++inner) {
            double inner_delta = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double* xj = z.data() + j * n;
                double rho = 0.0, denom = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    rho += w[i] * xj[i] * (work_resid[i] + xj[i] * beta[j]);
                    denom += w[i] * xj[i] * xj[i];
                }
                rho *= inv_n;
                denom = denom * inv_n + lambda * (1.0 - alpha);
                const double new_beta = denom > 0.0 ? soft_threshold(rho, lambda * alpha) / denom : 0.0;
                const double delta = new_beta - beta[j];
                if (delta != 0.0) {
                    for (std::size_t i = 0; i < n; ++i) work_resid[i] -= delta * xj[i];
                    beta[j] = new_beta;
                    inner_delta = std::max(inner_delta, std::abs(delta));
                }
            }
            // unpenalized intercept
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                num += w[i] * work_resid[i];
                den += w[i];
            }
            const double delta0 = num / den;
            if (delta0 != 0.0) {
                for (std::size_t i = 0; i < n; ++i) work_resid[i] -= delta0;
                beta0 += delta0;
            }
            inner_delta = std::max(inner_delta, std::abs(delta0));
            max_delta = std::max(max_delta, inner_delta);
            if (inner_delta < 1e-10) break;
        }

        for (std::size_t i = 0; i < n; ++i) {
            double e = beta0;
            for (std::size_t j = 0; j < p; ++j)
                if (beta[j] != 0.0) e += beta[j] * z[j * n + i];
            eta[i] = e;
        }

        // exact-gradient KKT residual; the stated coefficient-change
        // criterion alone can stall one quadratic step early
        double kkt = 0.0;
        {
            std::vector<double> grad(p, 0.0);
            double grad0 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = sigmoid(eta[i]) - static_cast<double>(y[i]);
                grad0 += r;
                for (std::size_t j = 0; j < p; ++j) grad[j] += r * z[j * n + i];
            }
            grad0 *= inv_n;
            kkt = std::abs(grad0);
            for (std::size_t j = 0; j < p; ++j) {
                const double g = grad[j] * inv_n + lambda * (1.0 - alpha) * beta[j];
                double res;
                if (beta[j] > 0.0) res = std::abs(g + lambda * alpha);
                else if (beta[j] < 0.0) res = std::abs(g - lambda * alpha);
                else res = std::max(0.0, std::abs(g) - lambda * alpha);
                kkt = std::max(kkt, res);
            }
        }
        if (kkt <= kkt_tol && max_delta < 1e-7) break;
        if (max_delta < 1e-12 && kkt <= 1e-6) break;
    }

    model->intercept_ = beta0;
    model->coef_ = std::move(beta);
    return model;
}

namespace detail {

std::unique_ptr<Model> elastic_net_from_json(const json& doc) {
    auto m = std::make_unique<ElasticNetModel>();
    m->hp_ = doc.at("hyperparameters").get<Hyperparams>();
    m->seed_ = doc.at("seed").get<std::uint64_t>();
    m->names_ = doc.at("feature_names").get<std::vector<std::string>>();
    m->std_.mean = doc.at("mean").get<std::vector<double>>();
    m->std_.sd = doc.at("sd").get<std::vector<double>>();
    m->intercept_ = doc.at("intercept").get<double>();
    m->coef_ = doc.at("coefficients").get<std::vector<double>>();
    return m;
}

}  // namespace detail

}  // namespace prognosis
