#include <random>

#include "doclair/layout_metrics.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"

using namespace doclair;
using namespace doclair::layout;

namespace {

std::vector<std::vector<double>> iou_matrix(const std::vector<BBox>& targets,
                                            const std::vector<BBox>& preds) {
    std::vector<std::vector<double>> m(targets.size(), std::vector<double>(preds.size(), 0.0));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < preds.size(); ++j) m[i][j] = iou(targets[i], preds[j]);
    }
    return m;
}

double pair_total(const std::vector<std::vector<double>>& m,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += m[r][c];
    return total;
}

LabeledBox lb(BBox box, SemanticClass cls, std::optional<double> score = std::nullopt) {
    return {box, cls, score};
}

constexpr std::size_t kBg = ConfusionMatrix::kBackground;
constexpr auto kText = static_cast<std::size_t>(SemanticClass::Text);
constexpr auto kTitle = static_cast<std::size_t>(SemanticClass::Title);

}  // namespace

TEST_CASE("iou basics") {
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
    CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == 1.0 / 3.0);
    // Symmetry and degenerate boxes.
    CHECK(iou({5, 0, 15, 10}, {0, 0, 10, 10}) == 1.0 / 3.0);
    CHECK(iou({3, 3, 3, 9}, {0, 0, 10, 10}) == 0.0);   // zero width
    CHECK(iou({9, 9, 1, 1}, {0, 0, 10, 10}) == 0.0);   // inverted
}

TEST_CASE("assign: trivial and crossing instances") {
    SUBCASE("single pair") {
        const std::vector<BBox> t = {{0, 0, 10, 10}};
        const std::vector<BBox> p = {{0, 0, 10, 8}};
        CHECK(assign(t, p) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
    }
    SUBCASE("crossing beats the diagonal") {
        const std::vector<BBox> t = {{0, 0, 100, 10}, {0, 20, 100, 30}};
        const std::vector<BBox> p = {{0, 20, 100, 29}, {0, 0, 100, 9}};
        CHECK(assign(t, p) ==
              std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}});
    }
}

TEST_CASE("assign: tie between 0.9 and 0.1+0.8 resolves lexicographically") {
    // IoU matrix [[0.9, 0.1], [0.8, 0.0]]: both matchings total 0.9; the
    // lexicographically smallest pair set must win.
    const std::vector<BBox> t = {{0, 0, 90, 10}, {0, 0, 80, 10}};
    const std::vector<BBox> p = {{0, 0, 100, 10}, {80, 0, 100, 10}};
    const auto m = iou_matrix(t, p);
    REQUIRE(m[0][0] == 0.9);
    REQUIRE(m[0][1] == 0.1);
    REQUIRE(m[1][0] == 0.8);
    REQUIRE(m[1][1] == 0.0);
    CHECK(assign(t, p) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});
}

TEST_CASE("assign matches exhaustive search on random instances") {
    std::mt19937 rng(271828);
    const PageDims grid{16, 16};
    std::uniform_int_distribution<std::size_t> dn(0, 6);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<BBox> targets, preds;
        const std::size_t nt = dn(rng), np = dn(rng);
        for (std::size_t i = 0; i < nt; ++i) targets.push_back(generators::random_box(rng, grid));
        for (std::size_t j = 0; j < np; ++j) preds.push_back(generators::random_box(rng, grid));

        const auto got = assign(targets, preds);
        const auto m = iou_matrix(targets, preds);
        const auto want = oracles::brute_force_assignment(m, 1e-12);

        CHECK(got.size() == std::min(nt, np));
        if (std::min(nt, np) == 0) continue;
        CHECK(got == want.expected_pairs);
        CHECK(pair_total(m, got) == want.best_total);
    }
}

TEST_CASE("confusion_at follows the cross-class matching rules") {
    SUBCASE("same-class match above threshold") {
        ConfusionMatrix cm;
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 8}, SemanticClass::Text)};
        confusion_at(t, p, 0.5, cm);
        CHECK(cm.at(kText, kText) == 1);
        CHECK(cm.total() == 1);
    }
    SUBCASE("cross-class confusion is recorded on the off-diagonal") {
        ConfusionMatrix cm;
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 8}, SemanticClass::Title)};
        confusion_at(t, p, 0.5, cm);
        CHECK(cm.at(kText, kTitle) == 1);
    }
    SUBCASE("sub-threshold match counts into both background slots") {
        ConfusionMatrix cm;
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 3}, SemanticClass::Text)};
        confusion_at(t, p, 0.5, cm);
        CHECK(cm.at(kText, kBg) == 1);
        CHECK(cm.at(kBg, kText) == 1);
        CHECK(cm.at(kText, kText) == 0);
    }
    SUBCASE("empty sides") {
        ConfusionMatrix cm;
        const std::vector<LabeledBox> none;
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Table)};
        confusion_at(t, none, 0.5, cm);
        CHECK(cm.at(static_cast<std::size_t>(SemanticClass::Table), kBg) == 1);
        confusion_at(none, t, 0.5, cm);
        CHECK(cm.at(kBg, static_cast<std::size_t>(SemanticClass::Table)) == 1);
        confusion_at(none, none, 0.5, cm);
        CHECK(cm.total() == 2);
    }
    SUBCASE("pre-condition on the threshold") {
        ConfusionMatrix cm;
        const std::vector<LabeledBox> none;
        CHECK_THROWS_AS(confusion_at(none, none, 0.0, cm), Error);
        CHECK_THROWS_AS(confusion_at(none, none, 1.0, cm), Error);
    }
}

TEST_CASE("confusion conservation on random page pairs") {
    std::mt19937 rng(5150);
    const PageDims grid{64, 64};
    std::uniform_int_distribution<std::size_t> dn(0, 10);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<LabeledBox> targets, preds;
        const std::size_t nt = dn(rng), np = dn(rng);
        for (std::size_t i = 0; i < nt; ++i) {
            targets.push_back(lb(generators::random_box(rng, grid), generators::random_class(rng)));
        }
        for (std::size_t j = 0; j < np; ++j) {
            preds.push_back(lb(generators::random_box(rng, grid), generators::random_class(rng)));
        }
        ConfusionMatrix cm;
        confusion_at(targets, preds, 0.5, cm);

        CHECK(cm.at(kBg, kBg) == 0);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const auto cls = static_cast<SemanticClass>(c);
            std::int64_t target_count = 0, pred_count = 0;
            for (const auto& t : targets) target_count += t.cls == cls;
            for (const auto& p : preds) pred_count += p.cls == cls;
            CHECK(cm.row_sum(c) == target_count);
            CHECK(cm.col_sum(c) == pred_count);
        }
    }
}

TEST_CASE("threshold behavior is strict at the boundary") {
    // IoU exactly 0.55: matched at 0.50, background at 0.55.
    const std::vector<LabeledBox> t = {lb({0, 0, 11, 10}, SemanticClass::Text)};
    const std::vector<LabeledBox> p = {lb({0, 0, 20, 10}, SemanticClass::Text)};
    REQUIRE(iou(t[0].bbox, p[0].bbox) == 0.55);

    ConfusionMatrix at50, at55;
    confusion_at(t, p, 0.50, at50);
    confusion_at(t, p, 0.55, at55);
    CHECK(at50.at(kText, kText) == 1);
    CHECK(at55.at(kText, kText) == 0);
    CHECK(at55.at(kText, kBg) == 1);
    CHECK(at55.at(kBg, kText) == 1);
}

TEST_CASE("confusion_averaged varies only the thresholding") {
    const std::vector<LabeledBox> t = {lb({0, 0, 30, 10}, SemanticClass::Text)};
    const std::vector<LabeledBox> p = {lb({0, 0, 50, 10}, SemanticClass::Text)};
    REQUIRE(iou(t[0].bbox, p[0].bbox) == 0.6);

    const auto ladder = default_iou_thresholds();
    REQUIRE(ladder.size() == 10);
    const auto result = confusion_averaged(t, p, ladder);
    REQUIRE(result.per_threshold.size() == 10);
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const bool matched = 0.6 > ladder[k];
        CHECK(result.per_threshold[k].at(kText, kText) == (matched ? 1 : 0));
    }
    // Matched at 0.50 and 0.55 only; pooled therefore holds 2 diagonal hits.
    CHECK(result.pooled.at(kText, kText) == 2);
    CHECK(result.pooled.at(kText, kBg) == 8);
}

TEST_CASE("derive computes the listing's count identities") {
    SUBCASE("diagonal-only matrix is perfect") {
        ConfusionMatrix cm;
        for (std::size_t c = 0; c < kNumClasses; ++c) cm.at(c, c) = 3;
        const auto d = derive(cm);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            CHECK(d.per_class[c].precision == 1.0);
            CHECK(d.per_class[c].recall == 1.0);
        }
        CHECK(d.macro_f1 == 1.0);
        CHECK(d.overall_accuracy == 1.0);
    }
    SUBCASE("0.8 fixture") {
        ConfusionMatrix cm;
        cm.at(kText, kText) = 8;
        cm.at(kText, kBg) = 2;
        cm.at(kBg, kText) = 2;
        const auto d = derive(cm);
        CHECK(d.per_class[kText].precision == 0.8);
        CHECK(d.per_class[kText].recall == 0.8);
        CHECK(d.per_class[kText].f1 == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(d.per_class[kText].tp == 8);
        CHECK(d.per_class[kText].fp == 2);
        CHECK(d.per_class[kText].fn == 2);
    }
    SUBCASE("identities on random matrices") {
        std::mt19937 rng(8);
        std::uniform_int_distribution<int> dcount(0, 9);
        for (int iter = 0; iter < 100; ++iter) {
            ConfusionMatrix cm;
            for (std::size_t i = 0; i < ConfusionMatrix::kSize; ++i) {
                for (std::size_t j = 0; j < ConfusionMatrix::kSize; ++j) {
                    if (i == kBg && j == kBg) continue;
                    cm.at(i, j) = dcount(rng);
                }
            }
            const auto d = derive(cm);
            std::int64_t tp_sum = 0;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                CHECK(d.per_class[c].tp + d.per_class[c].fp == cm.col_sum(c));
                CHECK(d.per_class[c].tp + d.per_class[c].fn == cm.row_sum(c));
                tp_sum += d.per_class[c].tp;
            }
            CHECK(d.overall_accuracy * static_cast<double>(cm.total()) ==
                  doctest::Approx(static_cast<double>(tp_sum)).epsilon(1e-9));
        }
    }
    SUBCASE("macro F1 is the harmonic mean, not the listing's expression") {
        ConfusionMatrix cm;
        cm.at(kText, kText) = 1;
        cm.at(kText, kBg) = 1;
        cm.at(kBg, kText) = 1;
        const auto d = derive(cm);
        // precision == recall == 1/22 in the macro aggregate.
        CHECK(d.macro_precision == d.balanced_accuracy);
        CHECK(d.macro_f1 == doctest::Approx(d.macro_precision).epsilon(1e-12));
        // The transcribed expression 2pr/(1/p + 1/r) = p^3 differs.
        const double p = d.macro_precision;
        const double transcribed = 2 * p * p / (1 / p + 1 / p);
        CHECK(d.macro_f1 != transcribed);
    }
    SUBCASE("empty matrix floors to zero") {
        const auto d = derive(ConfusionMatrix{});
        CHECK(d.macro_f1 == 0.0);
        CHECK(d.overall_accuracy == 0.0);
        for (std::size_t c = 0; c < kNumClasses; ++c) CHECK(d.per_class[c].precision == 0.0);
    }
}

TEST_CASE("mean_metrics_over_thresholds averages derived metrics") {
    ConfusionMatrix m1;
    m1.at(kText, kText) = 1;
    ConfusionMatrix m2;
    m2.at(kText, kText) = 3;
    m2.at(kBg, kText) = 2;

    SUBCASE("identical matrices reproduce the single-matrix value") {
        const std::vector<ConfusionMatrix> same = {m1, m1, m1};
        const auto mean = mean_metrics_over_thresholds(same);
        const auto single = derive(m1);
        CHECK(mean.precision[kText] == single.per_class[kText].precision);
        CHECK(mean.macro_precision == single.macro_precision);
    }
    SUBCASE("1.0 and 0.6 average to 0.8") {
        const std::vector<ConfusionMatrix> two = {m1, m2};
        const auto mean = mean_metrics_over_thresholds(two);
        CHECK(mean.precision[kText] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(mean.recall[kText] == 1.0);
    }
    SUBCASE("empty predictions floor to zero") {
        ConfusionMatrix empty_preds;
        empty_preds.at(kText, kBg) = 4;
        const std::vector<ConfusionMatrix> one = {empty_preds};
        const auto mean = mean_metrics_over_thresholds(one);
        CHECK(mean.precision[kText] == 0.0);
        CHECK(mean.recall[kText] == 0.0);
    }
}

TEST_CASE("coco_ap fixtures") {
    SUBCASE("single matching prediction: AP = 1") {
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 8}, SemanticClass::Text, 0.9)};
        const auto result = coco_ap(t, p, 0.5, 101);
        REQUIRE(result.per_class[kText].has_value());
        CHECK(result.per_class[kText]->ap == 1.0);
        CHECK(result.map == 1.0);
    }
    SUBCASE("high-scored miss halves the interpolated AP") {
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {
            lb({50, 50, 60, 60}, SemanticClass::Text, 0.9),  // IoU 0
            lb({0, 0, 10, 9}, SemanticClass::Text, 0.8),     // IoU 0.9
        };
        const auto result = coco_ap(t, p, 0.5, 101);
        REQUIRE(result.per_class[kText].has_value());
        CHECK(result.per_class[kText]->ap == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("missing scores are rejected") {
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 8}, SemanticClass::Text)};
        CHECK_THROWS_AS((void)coco_ap(t, p, 0.5, 101), Error);
    }
    SUBCASE("1001-bin variant stays consistent") {
        const std::vector<LabeledBox> t = {lb({0, 0, 10, 10}, SemanticClass::Text)};
        const std::vector<LabeledBox> p = {lb({0, 0, 10, 8}, SemanticClass::Text, 0.5)};
        CHECK(coco_ap(t, p, 0.5, 1001).map == 1.0);
        CHECK_THROWS_AS((void)coco_ap(t, p, 0.5, 500), Error);
    }
}

TEST_CASE("coco_ap is invariant under input permutations of equal scores") {
    const std::vector<LabeledBox> targets = {
        lb({0, 0, 10, 10}, SemanticClass::Text),
        lb({20, 0, 30, 10}, SemanticClass::Text),
    };
    std::vector<LabeledBox> preds = {
        lb({0, 0, 10, 9}, SemanticClass::Text, 0.5),
        lb({20, 0, 30, 7}, SemanticClass::Text, 0.5),
        lb({50, 50, 60, 60}, SemanticClass::Text, 0.5),
    };
    std::sort(preds.begin(), preds.end(),
              [](const LabeledBox& a, const LabeledBox& b) { return a.bbox < b.bbox; });
    std::optional<double> first_ap;
    bool warned = false;
    do {
        const auto result = coco_ap(targets, preds, 0.5, 101);
        REQUIRE(result.per_class[kText].has_value());
        if (!first_ap) {
            first_ap = result.per_class[kText]->ap;
        } else {
            CHECK(result.per_class[kText]->ap == *first_ap);
        }
        warned = result.per_class[kText]->degenerate_scores && !result.warnings.empty();
        CHECK(warned);
    } while (std::next_permutation(
        preds.begin(), preds.end(),
        [](const LabeledBox& a, const LabeledBox& b) { return a.bbox < b.bbox; }));
}

TEST_CASE("averaged_pr_curve")  {
    PRCurve full, half;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        full.recall_bins.push_back(r);
        full.precision_at.push_back(1.0);
        half.recall_bins.push_back(r);
        half.precision_at.push_back(r <= 0.5 ? 1.0 : 0.0);
    }
    SUBCASE("two identical curves average to themselves") {
        const std::vector<PRCurve> curves = {full, full};
        const auto avg = averaged_pr_curve(curves);
        CHECK(avg.precision_at == full.precision_at);
    }
    SUBCASE("a cut-off class contributes zeros past its reach") {
        const std::vector<PRCurve> curves = {half, full};
        const auto avg = averaged_pr_curve(curves);
        for (std::size_t i = 0; i < avg.recall_bins.size(); ++i) {
            CHECK(avg.precision_at[i] == (avg.recall_bins[i] <= 0.5 ? 1.0 : 0.5));
        }
    }
    SUBCASE("single curve is the identity") {
        const std::vector<PRCurve> curves = {half};
        CHECK(averaged_pr_curve(curves).precision_at == half.precision_at);
    }
    SUBCASE("bin mismatch is an error") {
        PRCurve other;
        other.recall_bins = {0.0, 1.0};
        other.precision_at = {1.0, 1.0};
        const std::vector<PRCurve> curves = {full, other};
        CHECK_THROWS_AS((void)averaged_pr_curve(curves), Error);
    }
}

TEST_CASE("ConfusionMatrix merges elementwise") {
    ConfusionMatrix a, b;
    a.at(kText, kText) = 2;
    b.at(kText, kText) = 3;
    b.at(kBg, kTitle) = 1;
    a.merge(b);
    CHECK(a.at(kText, kText) == 5);
    CHECK(a.at(kBg, kTitle) == 1);
}
