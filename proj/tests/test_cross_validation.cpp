#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "prognosis/cross_validation.hpp"
#include "prognosis/metrics.hpp"

using namespace prognosis;

namespace {

struct Problem {
    DesignMatrix x;
    std::vector<int> y;
};

Problem make_problem(std::uint64_t seed, std::size_t n, double gap) {
    Rng rng(seed);
    Problem p;
    p.x.feature_names = {"a", "b", "noise"};
    p.x.n_rows = n;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(bounded(rng, 2));
        p.y.push_back(label);
        p.x.data.push_back((label ? gap : -gap) + normal_draw(rng));
        p.x.data.push_back((label ? -gap : gap) + normal_draw(rng));
        p.x.data.push_back(normal_draw(rng));
    }
    return p;
}

LearnerSpec forest_spec(std::vector<Hyperparams> grid) {
    return LearnerSpec{"random_forest", &fit_random_forest, std::move(grid)};
}

}  // namespace

TEST_CASE("make_folds partitions rows into balanced folds") {
    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[i] = i < 60 ? 1 : 0;
    const auto folds = make_folds(labels, 5, 2, false, 1);
    REQUIRE(folds.size() == 2);
    for (const auto& assignment : folds) {
        std::vector<int> sizes(5, 0);
        for (int f : assignment) {
            REQUIRE(f >= 0);
            REQUIRE(f < 5);
            ++sizes[f];
        }
        for (int s : sizes) CHECK(s == 20);
    }
}

TEST_CASE("stratified folds keep the class ratio within one patient") {
    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[i] = i < 60 ? 1 : 0;
    const auto folds = make_folds(labels, 5, 3, true, 7);
    for (const auto& assignment : folds) {
        std::vector<int> pos(5, 0), neg(5, 0);
        for (int i = 0; i < 100; ++i) (labels[i] ? pos : neg)[assignment[i]]++;
        for (int f = 0; f < 5; ++f) {
            CHECK(std::abs(pos[f] - 12) <= 1);
            CHECK(std::abs(neg[f] - 8) <= 1);
        }
    }
}

TEST_CASE("make_folds is deterministic and validates preconditions") {
    std::vector<int> labels{1, 1, 1, 0, 0, 0, 1, 0, 1, 0};
    CHECK(make_folds(labels, 5, 2, true, 3) == make_folds(labels, 5, 2, true, 3));
    CHECK(make_folds(labels, 5, 1, true, 3) != make_folds(labels, 5, 1, true, 4));
    CHECK_THROWS_AS(make_folds(labels, 6, 1, true, 3), ConfigError);  // minority class is 5
    CHECK_THROWS_AS(make_folds(labels, 1, 1, false, 3), ConfigError);
}

TEST_CASE("grid_search returns the singleton grid point") {
    const Problem p = make_problem(1, 60, 2.0);
    const Hyperparams only{{"n_trees", 10}, {"min_leaf", 2}};
    const auto best = grid_search(forest_spec({only}), p.x, p.y, 3, 1, true, 5);
    CHECK(best == only);
}

TEST_CASE("grid_search prefers the memorizing point on learnable data") {
    const Problem p = make_problem(2, 80, 2.5);
    const Hyperparams memorize{{"n_trees", 30}, {"min_leaf", 1}};
    const Hyperparams underfit{{"n_trees", 30}, {"min_leaf", 80}};
    const auto best = grid_search(forest_spec({underfit, memorize}), p.x, p.y, 4, 1, true, 6);
    CHECK(best == memorize);
}

TEST_CASE("grid_search breaks exact ties by declaration order") {
    const Problem p = make_problem(3, 40, 1.0);
    // the elastic net is seed-free, so identical points up to an ignored
    // tag produce exactly equal inner AUCs
    const Hyperparams a{{"lambda", 0.01}, {"alpha", 0.5}, {"tag", 1}};
    const Hyperparams b{{"lambda", 0.01}, {"alpha", 0.5}, {"tag", 2}};
    LearnerSpec enet{"elastic_net", &fit_elastic_net, {a, b}};
    const auto best = grid_search(enet, p.x, p.y, 3, 1, true, 6);
    CHECK(best.at("tag") == 1);
}

TEST_CASE("nested_cv report shape, partition property, determinism") {
    const Problem p = make_problem(4, 90, 2.0);
    CvConfig cfg;
    cfg.outer_folds = 3;
    cfg.outer_repeats = 2;
    cfg.inner_folds = 2;
    cfg.inner_repeats = 1;
    cfg.master_seed = 11;
    std::vector<LearnerSpec> learners;
    learners.push_back(forest_spec({{{"n_trees", 15}, {"min_leaf", 2}}}));
    learners.push_back(LearnerSpec{"elastic_net", &fit_elastic_net,
                                   {{{"lambda", 0.01}, {"alpha", 0.5}}}});

    const auto report = nested_cv(learners, p.x, p.y, cfg, 1);
    REQUIRE(report.models.size() == 3);  // two learners + ensemble
    for (const auto& m : report.models) {
        CHECK(m.folds.size() == 6);
        CHECK(m.auc_samples().size() == 6);
        CHECK(m.mean_auc > 0.5);
        CHECK(m.ci_lower <= m.mean_auc);
        CHECK(m.ci_upper >= m.mean_auc);
    }
    CHECK(report.comparisons.size() == 3);

    // outer test folds never intersect their training folds, and held-out
    // score counts match the fold sizes
    const auto outer = make_folds(p.y, cfg.outer_folds, cfg.outer_repeats, cfg.stratified,
                                  derive_seed(cfg.master_seed, 0x6f75746572u));
    for (const auto& fo : report.models[0].folds) {
        std::size_t test_count = 0;
        for (int f : outer[fo.repeat]) test_count += f == fo.fold;
        CHECK(fo.heldout_scores.size() == test_count);
    }

    const auto report2 = nested_cv(learners, p.x, p.y, cfg, 1);
    CHECK(report.to_json().dump() == report2.to_json().dump());
    const auto report4 = nested_cv(learners, p.x, p.y, cfg, 4);
    CHECK(report.to_json().dump() == report4.to_json().dump());
}

TEST_CASE("nested_cv: perturbing a held-out row never changes fitted behaviour elsewhere") {
    // leakage probe: change one row's features, re-run, and require identical
    // chosen hyperparameters and thresholds on every fold where that row was
    // held out (fits depend only on training rows)
    const Problem base = make_problem(5, 60, 1.5);
    CvConfig cfg;
    cfg.outer_folds = 3;
    cfg.outer_repeats = 1;
    cfg.inner_folds = 2;
    cfg.inner_repeats = 1;
    cfg.master_seed = 21;
    std::vector<LearnerSpec> learners;
    learners.push_back(forest_spec({{{"n_trees", 8}, {"min_leaf", 2}},
                                    {{"n_trees", 8}, {"min_leaf", 10}}}));

    const auto outer = make_folds(base.y, cfg.outer_folds, cfg.outer_repeats, cfg.stratified,
                                  derive_seed(cfg.master_seed, 0x6f75746572u));
    const std::size_t victim = 7;
    const int victim_fold = outer[0][victim];

    Problem perturbed = base;
    for (std::size_t j = 0; j < perturbed.x.n_cols(); ++j)
        perturbed.x.at(victim, j) += 100.0;

    const auto r1 = nested_cv(learners, base.x, base.y, cfg, 1);
    const auto r2 = nested_cv(learners, perturbed.x, perturbed.y, cfg, 1);
    for (std::size_t k = 0; k < r1.models[0].folds.size(); ++k) {
        const auto& f1 = r1.models[0].folds[k];
        const auto& f2 = r2.models[0].folds[k];
        if (f1.fold != victim_fold) continue;
        CHECK(f1.chosen == f2.chosen);
        CHECK(f1.threshold == f2.threshold);
        // the only scores that may move are the victim's own
        std::size_t diffs = 0;
        for (std::size_t i = 0; i < f1.heldout_scores.size(); ++i)
            diffs += f1.heldout_scores[i] != f2.heldout_scores[i];
        CHECK(diffs <= 1);
    }
}

TEST_CASE("nested_cv ensemble stays within member bounds per row") {
    const Problem p = make_problem(6, 60, 1.5);
    CvConfig cfg;
    cfg.outer_folds = 3;
    cfg.outer_repeats = 1;
    cfg.inner_folds = 2;
    cfg.inner_repeats = 1;
    cfg.master_seed = 31;
    std::vector<LearnerSpec> learners;
    learners.push_back(forest_spec({{{"n_trees", 10}, {"min_leaf", 2}}}));
    learners.push_back(LearnerSpec{"gbt", &fit_gbt, {{{"n_rounds", 20}, {"max_depth", 2}}}});

    const auto report = nested_cv(learners, p.x, p.y, cfg, 1);
    const auto& ens = report.model("ensemble");
    const auto& m0 = report.model("random_forest");
    const auto& m1 = report.model("gbt");
    for (std::size_t k = 0; k < ens.folds.size(); ++k) {
        for (std::size_t i = 0; i < ens.folds[k].heldout_scores.size(); ++i) {
            const double lo = std::min(m0.folds[k].heldout_scores[i], m1.folds[k].heldout_scores[i]);
            const double hi = std::max(m0.folds[k].heldout_scores[i], m1.folds[k].heldout_scores[i]);
            CHECK(ens.folds[k].heldout_scores[i] >= lo - 1e-15);
            CHECK(ens.folds[k].heldout_scores[i] <= hi + 1e-15);
        }
    }
}

TEST_CASE("nested_cv with default-shaped config yields 25 estimates per model") {
    const Problem p = make_problem(7, 120, 2.0);
    CvConfig cfg;  // 5x5 outer by default
    cfg.inner_folds = 2;
    cfg.inner_repeats = 1;
    cfg.master_seed = 41;
    std::vector<LearnerSpec> learners;
    learners.push_back(forest_spec({{{"n_trees", 8}, {"min_leaf", 3}}}));
    const auto report = nested_cv(learners, p.x, p.y, cfg, 2);
    CHECK(report.models[0].folds.size() == 25);
    CHECK(report.models[0].auc_samples().size() == 25);
}
