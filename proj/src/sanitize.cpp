#include "doclair/sanitize.hpp"

#include <algorithm>

namespace doclair::sanitize {

std::string_view to_string(RejectionReason reason) {
    switch (reason) {
        case RejectionReason::SyntaxNonCompliant: return "SyntaxNonCompliant";
        case RejectionReason::DegenerateBox: return "DegenerateBox";
        case RejectionReason::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
        case RejectionReason::UnknownClass: return "UnknownClass";
        case RejectionReason::RepetitionLoop: return "RepetitionLoop";
    }
    return "RejectionReason";
}

namespace {

std::optional<RejectionReason> rejection_for(const Block& block, PageDims dims) {
    if (!block.bbox) return RejectionReason::SyntaxNonCompliant;
    if (!block.bbox->within(dims)) return RejectionReason::OutOfRangeCoordinate;
    if (!block.bbox->valid_extent()) return RejectionReason::DegenerateBox;
    if (!block.class_name || !semantic_class_from(*block.class_name)) {
        return RejectionReason::UnknownClass;
    }
    return std::nullopt;
}

std::string describe_box(const Block& block) {
    if (!block.bbox) return "(no box)";
    const BBox& b = *block.bbox;
    return "(" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," +
           std::to_string(b.x2) + "," + std::to_string(b.y2) + ")";
}

}  // namespace

FilterResult filter_boxes(const format::ParseReport& report, PageDims dims) {
    FilterResult result;
    for (std::size_t i = 0; i < report.blocks.size(); ++i) {
        const Block& block = report.blocks[i];
        if (auto reason = rejection_for(block, dims)) {
            result.rejected.push_back({block, *reason, i});
        } else {
            result.accepted.push_back(block);
            result.accepted_indices.push_back(i);
        }
    }
    for (const format::RejectedSpan& span : report.rejected) {
        Block tail;
        tail.text = span.raw;
        result.rejected.push_back(
            {std::move(tail), RejectionReason::SyntaxNonCompliant, report.blocks.size()});
    }
    return result;
}

std::optional<RepetitionLoop> detect_repetition(std::string_view text,
                                                const SanitizeConfig& config) {
    const std::size_t n = text.size();
    const std::size_t min_unit = std::max<std::size_t>(config.repetition_min_unit_chars, 1);
    const std::size_t min_repeats = std::max<std::size_t>(config.repetition_min_repeats, 2);
    if (n < min_unit * min_repeats) return std::nullopt;

    std::optional<RepetitionLoop> best;
    for (std::size_t unit = min_unit; unit * min_repeats <= n; ++unit) {
        // Longest suffix with period `unit`: walk backwards while
        // text[i] == text[i + unit].
        std::size_t run = unit;  // the last `unit` chars trivially match themselves
        while (run < n && text[n - run - 1] == text[n - run - 1 + unit]) ++run;
        const std::size_t repeats = run / unit;
        if (repeats < min_repeats) continue;
        const std::size_t start = n - repeats * unit;
        if (!best || start < best->loop_start ||
            (start == best->loop_start && unit < best->unit.size())) {
            best = RepetitionLoop{start, std::string(text.substr(start, unit)), repeats};
        }
    }
    return best;
}

SanitizeResult sanitize_page(const format::ParseReport& report, PageDims dims,
                             const SanitizeConfig& config) {
    SanitizeResult result;
    result.page.dims = dims;

    FilterResult filtered = filter_boxes(report, dims);
    for (const RejectedBlock& rej : filtered.rejected) {
        std::string detail;
        switch (rej.reason) {
            case RejectionReason::SyntaxNonCompliant:
                detail = "rejected span: " + (rej.block.text ? *rej.block.text : std::string());
                break;
            case RejectionReason::UnknownClass:
                detail = "class \"" + (rej.block.class_name ? *rej.block.class_name : std::string()) +
                         "\" " + describe_box(rej.block);
                break;
            default:
                detail = "box " + describe_box(rej.block);
                break;
        }
        result.audit.push_back({rej.reason, std::move(detail)});
    }

    result.accepted_indices = std::move(filtered.accepted_indices);
    for (Block& block : filtered.accepted) {
        if (config.enable_repetition_filter && block.text) {
            if (auto loop = detect_repetition(*block.text, config)) {
                // Keep the valid prefix plus exactly one unit of the loop.
                block.text->resize(loop->loop_start + loop->unit.size());
                result.audit.push_back(
                    {RejectionReason::RepetitionLoop,
                     "truncated " + std::to_string(loop->repeats) + "x repeat of \"" +
                         loop->unit + "\" at offset " + std::to_string(loop->loop_start)});
            }
        }
        result.page.blocks.push_back(std::move(block));
    }
    return result;
}

}  // namespace doclair::sanitize
