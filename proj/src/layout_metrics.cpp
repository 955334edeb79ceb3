#include "doclair/layout_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "doclair/assignment.hpp"

namespace doclair::layout {

namespace {

// Totals within eps are treated as equal-cost for tie-breaking purposes.
// IoU sums of page-scale problems carry rounding noise well below this.
constexpr double kIouTieEpsilon = 1e-12;

struct PageMatch {
    // (target, pred, iou) for assigned pairs; indices not listed are unassigned.
    std::vector<std::tuple<std::size_t, std::size_t, double>> pairs;
    std::vector<bool> target_assigned;
    std::vector<bool> pred_assigned;
};

PageMatch match_boxes(std::span<const LabeledBox> targets, std::span<const LabeledBox> preds) {
    PageMatch match;
    match.target_assigned.assign(targets.size(), false);
    match.pred_assigned.assign(preds.size(), false);

    detail::WeightMatrix weights(targets.size(), preds.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < preds.size(); ++j) {
            weights.at(i, j) = iou(targets[i].bbox, preds[j].bbox);
        }
    }
    const auto result = detail::solve_max_assignment(weights, kIouTieEpsilon);
    match.pairs.reserve(result.pairs.size());
    for (const auto& [i, j] : result.pairs) {
        match.pairs.emplace_back(i, j, weights.at(i, j));
        match.target_assigned[i] = true;
        match.pred_assigned[j] = true;
    }
    return match;
}

void count_match(const PageMatch& match, std::span<const LabeledBox> targets,
                 std::span<const LabeledBox> preds, double iou_threshold,
                 ConfusionMatrix& cm) {
    constexpr std::size_t bg = ConfusionMatrix::kBackground;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!match.target_assigned[i]) {
            cm.at(static_cast<std::size_t>(targets[i].cls), bg) += 1;
        }
    }
    for (std::size_t j = 0; j < preds.size(); ++j) {
        if (!match.pred_assigned[j]) {
            cm.at(bg, static_cast<std::size_t>(preds[j].cls)) += 1;
        }
    }
    for (const auto& [i, j, pair_iou] : match.pairs) {
        const auto t = static_cast<std::size_t>(targets[i].cls);
        const auto p = static_cast<std::size_t>(preds[j].cls);
        if (pair_iou > iou_threshold) {
            cm.at(t, p) += 1;
        } else {
            cm.at(t, bg) += 1;
            cm.at(bg, p) += 1;
        }
    }
}

void check_threshold(double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "iou threshold must lie in (0, 1)");
    }
}

double safe_ratio(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(std::max<std::int64_t>(den, 1));
}

double harmonic_f1(double p, double r) {
    const double sum = p + r;
    if (sum <= 0.0) return 0.0;
    return 2.0 * p * r / sum;
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
    const auto iw = static_cast<std::int64_t>(std::min(a.x2, b.x2)) - std::max(a.x1, b.x1);
    const auto ih = static_cast<std::int64_t>(std::min(a.y2, b.y2)) - std::max(a.y1, b.y1);
    if (iw <= 0 || ih <= 0) return 0.0;
    const std::int64_t inter = iw * ih;
    const std::int64_t area_a =
        static_cast<std::int64_t>(a.x2 - a.x1) * static_cast<std::int64_t>(a.y2 - a.y1);
    const std::int64_t area_b =
        static_cast<std::int64_t>(b.x2 - b.x1) * static_cast<std::int64_t>(b.y2 - b.y1);
    const std::int64_t uni = area_a + area_b - inter;
    if (uni <= 0) return 0.0;
    const double value = static_cast<double>(inter) / static_cast<double>(uni);
    if (!std::isfinite(value) || value <= 0.0) return 0.0;
    return value;
}

std::vector<std::pair<std::size_t, std::size_t>> assign(std::span<const BBox> targets,
                                                        std::span<const BBox> preds) {
    detail::WeightMatrix weights(targets.size(), preds.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < preds.size(); ++j) {
            weights.at(i, j) = iou(targets[i], preds[j]);
        }
    }
    return detail::solve_max_assignment(weights, kIouTieEpsilon).pairs;
}

ConfusionMatrix& confusion_at(std::span<const LabeledBox> targets,
                              std::span<const LabeledBox> preds, double iou_threshold,
                              ConfusionMatrix& accumulator) {
    check_threshold(iou_threshold);
    const PageMatch match = match_boxes(targets, preds);
    count_match(match, targets, preds, iou_threshold, accumulator);
    return accumulator;
}

std::vector<double> default_iou_thresholds() {
    std::vector<double> thresholds;
    for (int i = 0; i < 10; ++i) thresholds.push_back(0.50 + 0.05 * i);
    return thresholds;
}

void ThresholdedConfusion::merge(const ThresholdedConfusion& other) {
    if (per_threshold.empty()) {
        *this = other;
        return;
    }
    if (other.per_threshold.empty()) return;
    if (other.thresholds != thresholds) {
        throw Error(ErrorCode::InvalidArgument, "cannot merge over different threshold ladders");
    }
    for (std::size_t i = 0; i < per_threshold.size(); ++i) {
        per_threshold[i].merge(other.per_threshold[i]);
    }
    pooled.merge(other.pooled);
}

ThresholdedConfusion confusion_averaged(std::span<const LabeledBox> targets,
                                        std::span<const LabeledBox> preds,
                                        std::span<const double> thresholds) {
    if (thresholds.empty()) {
        throw Error(ErrorCode::InvalidArgument, "threshold ladder must be non-empty");
    }
    for (double t : thresholds) check_threshold(t);

    ThresholdedConfusion out;
    out.thresholds.assign(thresholds.begin(), thresholds.end());
    out.per_threshold.resize(thresholds.size());

    const PageMatch match = match_boxes(targets, preds);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        count_match(match, targets, preds, thresholds[k], out.per_threshold[k]);
        out.pooled.merge(out.per_threshold[k]);
    }
    return out;
}

DerivedMetrics derive(const ConfusionMatrix& cm) {
    DerivedMetrics out;
    const std::int64_t total = cm.total();
    double sum_precision = 0.0;
    double sum_recall = 0.0;
    std::int64_t correct = 0;

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        ClassMetrics& m = out.per_class[c];
        m.tp = cm.at(c, c);
        m.fp = cm.col_sum(c) - m.tp;
        m.fn = cm.row_sum(c) - m.tp;
        m.tn = total - cm.col_sum(c) - cm.row_sum(c) + m.tp;
        m.precision = safe_ratio(m.tp, m.tp + m.fp);
        m.recall = safe_ratio(m.tp, m.tp + m.fn);
        m.f1 = harmonic_f1(m.precision, m.recall);
        m.accuracy = safe_ratio(m.tp + m.tn, m.tp + m.tn + m.fp + m.fn);
        sum_precision += m.precision;
        sum_recall += m.recall;
        correct += m.tp;
    }
    out.macro_precision = sum_precision / kNumClasses;
    out.balanced_accuracy = sum_recall / kNumClasses;
    out.macro_f1 = harmonic_f1(out.macro_precision, out.balanced_accuracy);
    out.overall_accuracy = safe_ratio(correct, total);
    return out;
}

MeanMetrics mean_metrics_over_thresholds(std::span<const ConfusionMatrix> per_threshold) {
    if (per_threshold.empty()) {
        throw Error(ErrorCode::InvalidArgument, "need at least one confusion matrix");
    }
    MeanMetrics mean;
    for (const ConfusionMatrix& cm : per_threshold) {
        const DerivedMetrics d = derive(cm);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            mean.precision[c] += d.per_class[c].precision;
            mean.recall[c] += d.per_class[c].recall;
            mean.f1[c] += d.per_class[c].f1;
        }
        mean.macro_precision += d.macro_precision;
        mean.macro_recall += d.balanced_accuracy;
        mean.macro_f1 += d.macro_f1;
    }
    const auto n = static_cast<double>(per_threshold.size());
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        mean.precision[c] /= n;
        mean.recall[c] /= n;
        mean.f1[c] /= n;
    }
    mean.macro_precision /= n;
    mean.macro_recall /= n;
    mean.macro_f1 /= n;
    return mean;
}

PRCurve averaged_pr_curve(std::span<const PRCurve> per_class_curves) {
    if (per_class_curves.empty()) {
        throw Error(ErrorCode::InvalidArgument, "need at least one PR curve");
    }
    const PRCurve& first = per_class_curves.front();
    for (const PRCurve& curve : per_class_curves) {
        if (curve.recall_bins != first.recall_bins) {
            throw Error(ErrorCode::BinMismatch, "PR curves use different recall bins");
        }
    }
    PRCurve out;
    out.recall_bins = first.recall_bins;
    out.precision_at.assign(first.recall_bins.size(), 0.0);
    for (const PRCurve& curve : per_class_curves) {
        for (std::size_t i = 0; i < out.precision_at.size(); ++i) {
            out.precision_at[i] += curve.precision_at[i];
        }
    }
    for (double& p : out.precision_at) p /= static_cast<double>(per_class_curves.size());
    return out;
}

namespace {

struct RankedPred {
    double score = 0.0;
    std::size_t page = 0;
    std::size_t index = 0;  // index within the page's pred list
    BBox bbox;

    bool operator<(const RankedPred& other) const {
        if (score != other.score) return score > other.score;  // descending
        if (page != other.page) return page < other.page;
        // Content-based tie-break keeps equal-score results independent of
        // input order; the input index only separates exact duplicates.
        if (bbox != other.bbox) return bbox < other.bbox;
        return index < other.index;
    }
};

}  // namespace

APResult coco_ap(std::span<const PageBoxes> pages, double iou_threshold, int recall_bins) {
    check_threshold(iou_threshold);
    if (recall_bins != 101 && recall_bins != 1001) {
        throw Error(ErrorCode::InvalidArgument, "recall_bins must be 101 or 1001");
    }
    for (const PageBoxes& page : pages) {
        for (const LabeledBox& pred : page.preds) {
            if (!pred.score) {
                throw Error(ErrorCode::MissingScore, "coco_ap requires scored predictions");
            }
        }
    }

    APResult result;
    result.iou_threshold = iou_threshold;
    result.recall_bins = recall_bins;

    std::vector<double> bins(recall_bins);
    for (int i = 0; i < recall_bins; ++i) {
        bins[i] = static_cast<double>(i) / static_cast<double>(recall_bins - 1);
    }

    double ap_sum = 0.0;
    std::size_t ap_count = 0;

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto cls = static_cast<SemanticClass>(c);

        std::size_t num_targets = 0;
        for (const PageBoxes& page : pages) {
            for (const LabeledBox& t : page.targets) {
                if (t.cls == cls) ++num_targets;
            }
        }

        std::vector<RankedPred> ranked;
        for (std::size_t p = 0; p < pages.size(); ++p) {
            const auto& preds = pages[p].preds;
            for (std::size_t j = 0; j < preds.size(); ++j) {
                if (preds[j].cls != cls) continue;
                ranked.push_back({*preds[j].score, p, j, preds[j].bbox});
            }
        }
        std::sort(ranked.begin(), ranked.end());

        if (num_targets == 0) continue;  // class absent from ground truth

        ClassAP class_ap;
        class_ap.num_targets = num_targets;
        class_ap.num_preds = ranked.size();
        if (ranked.size() >= 2) {
            bool all_equal = true;
            for (const RankedPred& r : ranked) {
                if (r.score != ranked.front().score) { all_equal = false; break; }
            }
            if (all_equal) {
                class_ap.degenerate_scores = true;
                result.warnings.push_back(
                    "DegenerateScores: class " + std::string(to_string(cls)) + ": " +
                    std::to_string(ranked.size()) +
                    " predictions share one score; the PR curve degenerates to a single point");
            }
        }

        // Greedy same-class matching per page, processed in rank order.
        std::vector<std::vector<bool>> target_used(pages.size());
        std::vector<std::vector<std::size_t>> target_ids(pages.size());
        for (std::size_t p = 0; p < pages.size(); ++p) {
            for (std::size_t i = 0; i < pages[p].targets.size(); ++i) {
                if (pages[p].targets[i].cls == cls) target_ids[p].push_back(i);
            }
            target_used[p].assign(target_ids[p].size(), false);
        }

        std::vector<double> recall_points, precision_points;
        std::int64_t tp = 0, fp = 0;
        for (const RankedPred& r : ranked) {
            const auto& page = pages[r.page];
            double best_iou = 0.0;
            std::size_t best = target_ids[r.page].size();
            for (std::size_t k = 0; k < target_ids[r.page].size(); ++k) {
                if (target_used[r.page][k]) continue;
                const double v = iou(page.targets[target_ids[r.page][k]].bbox, r.bbox);
                if (v > best_iou) {
                    best_iou = v;
                    best = k;
                }
            }
            if (best < target_used[r.page].size() && best_iou > iou_threshold) {
                target_used[r.page][best] = true;
                ++tp;
            } else {
                ++fp;
            }
            recall_points.push_back(static_cast<double>(tp) / static_cast<double>(num_targets));
            precision_points.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        }

        // Max interpolation: precision at a bin is the best precision at
        // any achieved recall >= that bin, 0 past the final recall.
        class_ap.curve.recall_bins = bins;
        class_ap.curve.precision_at.assign(bins.size(), 0.0);
        {
            // best_at_point[i] = best precision among points i..end; since
            // recall is non-decreasing this realizes max interpolation.
            std::vector<double> best_at_point(recall_points.size() + 1, 0.0);
            for (std::size_t i = recall_points.size(); i-- > 0;) {
                best_at_point[i] = std::max(best_at_point[i + 1], precision_points[i]);
            }
            std::size_t i = 0;
            for (std::size_t bin = 0; bin < bins.size(); ++bin) {
                while (i < recall_points.size() && recall_points[i] < bins[bin]) ++i;
                class_ap.curve.precision_at[bin] = (i < recall_points.size()) ? best_at_point[i] : 0.0;
            }
        }
        double ap = 0.0;
        for (double p : class_ap.curve.precision_at) ap += p;
        ap /= static_cast<double>(bins.size());
        class_ap.ap = ap;

        ap_sum += ap;
        ++ap_count;
        result.per_class[c] = std::move(class_ap);
    }

    result.map = ap_count == 0 ? 0.0 : ap_sum / static_cast<double>(ap_count);
    return result;
}

APResult coco_ap(std::span<const LabeledBox> targets, std::span<const LabeledBox> preds,
                 double iou_threshold, int recall_bins) {
    PageBoxes page;
    page.targets.assign(targets.begin(), targets.end());
    page.preds.assign(preds.begin(), preds.end());
    const std::array<PageBoxes, 1> pages = {std::move(page)};
    return coco_ap(std::span<const PageBoxes>(pages.data(), 1), iou_threshold, recall_bins);
}

}  // namespace doclair::layout
