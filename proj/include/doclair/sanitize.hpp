#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doclair/format.hpp"
#include "doclair/types.hpp"

namespace doclair::sanitize {

enum class RejectionReason {
    SyntaxNonCompliant,
    DegenerateBox,
    OutOfRangeCoordinate,
    UnknownClass,
    RepetitionLoop,
};

std::string_view to_string(RejectionReason reason);

struct SanitizeConfig {
    std::size_t repetition_min_unit_chars = 12;
    std::size_t repetition_min_repeats = 4;  // must be >= 2
    bool enable_repetition_filter = true;
};

struct RejectedBlock {
    Block block;
    RejectionReason reason;
    std::size_t index = 0;  // position in the parse report's block list
};

struct FilterResult {
    std::vector<Block> accepted;
    std::vector<std::size_t> accepted_indices;  // parallel to accepted
    std::vector<RejectedBlock> rejected;
};

// Spatial and categorical validity filter over a parsed page. A block is
// accepted iff its coordinates are all within the page grid, the
// bottom-right corner strictly exceeds the top-left one, and the class
// name is one of the 11 semantic classes. Everything else is routed to
// `rejected` with a single primary reason (range checked first, then
// extent, then class). The parse report's rejected tail re-emerges here
// as SyntaxNonCompliant. Total: |accepted| + |rejected| = |input|.
FilterResult filter_boxes(const format::ParseReport& report, PageDims dims);

struct RepetitionLoop {
    std::size_t loop_start = 0;  // char offset where the looped suffix begins
    std::string unit;
    std::size_t repeats = 0;
};

// Trailing-loop detection: the earliest offset from which a unit of at
// least repetition_min_unit_chars characters repeats consecutively at
// least repetition_min_repeats times through the end of the text. Among
// loops starting at the same offset the shortest unit wins.
std::optional<RepetitionLoop> detect_repetition(std::string_view text,
                                                const SanitizeConfig& config);

struct AuditEntry {
    RejectionReason reason;
    std::string detail;
};

struct SanitizeResult {
    Page page;
    std::vector<std::size_t> accepted_indices;  // parallel to page.blocks
    std::vector<AuditEntry> audit;
};

// The layered filter: box/class validation, then (if enabled) truncation
// of each surviving block's text at a detected trailing repetition loop,
// keeping exactly one unit. Deterministic for fixed inputs.
SanitizeResult sanitize_page(const format::ParseReport& report, PageDims dims,
                             const SanitizeConfig& config = {});

}  // namespace doclair::sanitize
