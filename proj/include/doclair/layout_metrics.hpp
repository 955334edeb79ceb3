#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "doclair/types.hpp"

namespace doclair::layout {

// A box with a validated class. The score is present for scored
// detectors and absent for inline autoregressive predictions.
struct LabeledBox {
    BBox bbox;
    SemanticClass cls = SemanticClass::Text;
    std::optional<double> score;
};

// Intersection over union with half-open integer boxes. Any non-finite
// or non-positive value maps to 0; zero-area boxes therefore score 0.
double iou(const BBox& a, const BBox& b);

// Maximum-total-IoU one-to-one assignment between target and prediction
// boxes (classes play no role here). |pairs| = min(|targets|, |preds|);
// among equal-cost optima the lexicographically smallest pair set by
// (target_index, pred_index) is returned.
std::vector<std::pair<std::size_t, std::size_t>> assign(std::span<const BBox> targets,
                                                        std::span<const BBox> preds);

// (C+1) x (C+1) count matrix; rows are target classes, columns predicted
// classes, index C the background/unmatched class. Mergeable accumulator:
// elementwise sum is associative and commutative.
class ConfusionMatrix {
  public:
    static constexpr std::size_t kSize = kNumClasses + 1;
    static constexpr std::size_t kBackground = kNumClasses;

    std::int64_t& at(std::size_t target, std::size_t pred) { return counts_[target * kSize + pred]; }
    std::int64_t at(std::size_t target, std::size_t pred) const { return counts_[target * kSize + pred]; }

    void merge(const ConfusionMatrix& other) {
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    }

    std::int64_t row_sum(std::size_t target) const {
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < kSize; ++j) sum += at(target, j);
        return sum;
    }
    std::int64_t col_sum(std::size_t pred) const {
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < kSize; ++i) sum += at(i, pred);
        return sum;
    }
    std::int64_t total() const {
        std::int64_t sum = 0;
        for (std::int64_t v : counts_) sum += v;
        return sum;
    }

    bool operator==(const ConfusionMatrix&) const = default;

  private:
    std::array<std::int64_t, kSize * kSize> counts_{};
};

// Cross-class confusion accumulation: boxes are matched over all classes
// jointly, then unassigned targets land in the background column,
// unassigned predictions in the background row, matched pairs with
// IoU strictly greater than the threshold on the (target, pred) cell,
// and matched pairs at or below the threshold in both background slots.
// Returns the updated accumulator.
ConfusionMatrix& confusion_at(std::span<const LabeledBox> targets,
                              std::span<const LabeledBox> preds, double iou_threshold,
                              ConfusionMatrix& accumulator);

// The COCO-style threshold ladder 0.50, 0.55, ..., 0.95.
std::vector<double> default_iou_thresholds();

struct ThresholdedConfusion {
    std::vector<double> thresholds;
    std::vector<ConfusionMatrix> per_threshold;
    ConfusionMatrix pooled;  // elementwise sum over thresholds

    void merge(const ThresholdedConfusion& other);
};

// confusion_at across a threshold ladder; the assignment is computed
// once, only the thresholding varies.
ThresholdedConfusion confusion_averaged(std::span<const LabeledBox> targets,
                                        std::span<const LabeledBox> preds,
                                        std::span<const double> thresholds);

struct ClassMetrics {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
};

struct DerivedMetrics {
    std::array<ClassMetrics, kNumClasses> per_class{};
    double macro_precision = 0.0;
    double balanced_accuracy = 0.0;  // macro recall
    double macro_f1 = 0.0;           // harmonic mean of the two aggregates
    double overall_accuracy = 0.0;
};

DerivedMetrics derive(const ConfusionMatrix& cm);

struct MeanMetrics {
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

// Arithmetic mean of derived precision/recall (and f1) across thresholds,
// per class and macro.
MeanMetrics mean_metrics_over_thresholds(std::span<const ConfusionMatrix> per_threshold);

struct PRCurve {
    std::vector<double> recall_bins;    // sorted, uniform in [0, 1]
    std::vector<double> precision_at;   // max-interpolated precision per bin
};

// Pointwise mean over class curves; a class whose maximum achieved recall
// lies below a bin contributes precision 0 there.
PRCurve averaged_pr_curve(std::span<const PRCurve> per_class_curves);

// One page's worth of ground truth and detections.
struct PageBoxes {
    std::vector<LabeledBox> targets;
    std::vector<LabeledBox> preds;
};

struct ClassAP {
    double ap = 0.0;
    PRCurve curve;
    std::size_t num_targets = 0;
    std::size_t num_preds = 0;
    bool degenerate_scores = false;  // >= 2 predictions, all with equal scores
};

struct APResult {
    std::array<std::optional<ClassAP>, kNumClasses> per_class{};  // set iff targets exist
    double map = 0.0;
    std::vector<std::string> warnings;
    double iou_threshold = 0.5;
    int recall_bins = 101;
};

// Standard per-class COCO-style average precision: predictions ranked by
// score (ties broken by box geometry, never by input order), greedy
// same-class matching per page, max-interpolated precision averaged over
// uniform recall bins. Classes without targets are excluded from mAP.
// Throws Error{MissingScore} if any prediction lacks a score.
APResult coco_ap(std::span<const PageBoxes> pages, double iou_threshold, int recall_bins);

// Single-collection convenience overload.
APResult coco_ap(std::span<const LabeledBox> targets, std::span<const LabeledBox> preds,
                 double iou_threshold, int recall_bins);

}  // namespace doclair::layout
