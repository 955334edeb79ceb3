#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "doclair/types.hpp"

namespace doclair::join {

struct JoinConfig {
    enum class CaptionDistance { Center, NearestCorner };

    // Headings whose sections are dropped wholesale; matched after
    // normalization, so entries must be lowercase alphanumeric words.
    std::vector<std::string> skip_headings = {
        "table of contents", "contents",        "bibliography",
        "references",        "index",           "indexes",
        "list of figures",   "list of tables",
    };
    std::string terminal_punctuation = ".!?";
    std::set<SemanticClass> drop_classes = {SemanticClass::PageHeader,
                                            SemanticClass::PageFooter};
    CaptionDistance caption_distance = CaptionDistance::Center;
};

// A floating object flushed after its page's flow: a Picture/Table block
// with its matched caption, or an unmatched caption on its own.
// insert_at is the flow index the item renders before.
struct FloatItem {
    std::optional<Block> object;
    std::optional<Block> caption;
    std::size_t insert_at = 0;
};

// Text flow carried across a page boundary: an open paragraph whose text
// has not reached terminal punctuation yet, plus the current page's
// floats awaiting the end-of-page flush.
struct FlowState {
    std::optional<std::string> open_paragraph;
    std::vector<FloatItem> pending_floats;
};

struct CaptionAssignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (caption, object)
    std::vector<std::size_t> unmatched_captions;
    std::vector<std::size_t> unmatched_objects;
};

// One-to-one caption-to-object matching minimizing total L1 distance
// between boxes (center-to-center by default). Ties break toward the
// lexicographically smallest pair set, as in layout matching.
// Throws Error{MissingBBox} when a block has no box.
CaptionAssignment assign_captions(
    std::span<const Block> captions, std::span<const Block> objects,
    JoinConfig::CaptionDistance distance = JoinConfig::CaptionDistance::Center);

struct MergeResult {
    std::vector<std::string> paragraphs;
    FlowState state;
};

// Merges a page's body blocks into paragraphs. Text and List-item runs
// concatenate while the accumulated text does not end in terminal
// punctuation; Section-header, Title and Formula blocks close whatever is
// open and stand alone. A trailing unterminated paragraph is carried in
// the returned state instead of being emitted.
MergeResult merge_flow(FlowState state, std::span<const Block> page_body,
                       const JoinConfig& config);

// True iff the block is a Section-header or Title whose normalized text
// is one of the configured skip headings.
bool detect_skip_section(const Block& block, const JoinConfig& config);

// Removes markdown formatting: headings, emphasis, inline code,
// strikethrough, links/images (keeping anchor/alt text) and list
// markers. Idempotent.
std::string strip_markdown(std::string_view text);

struct JoinedDocument {
    std::vector<std::string> flow;    // plain-text paragraphs
    std::vector<FloatItem> floats;    // flushed per page, in page order
};

// The five-step page joiner: per page, drops configured classes,
// reassigns captions to floating objects, merges the body into flowing
// paragraphs (with skip-section gating and cross-page carry-over),
// strips markdown, and flushes floats after the page's flow. Footnotes
// follow their page's floats as ordinary paragraphs.
// Throws Error{UncanonicalInput} if a page is not canonically ordered.
JoinedDocument join_document(std::span<const Page> pages, const JoinConfig& config = {});

// Plain-text rendering: one blank line between paragraphs; floats render
// as "[TABLE]"/"[FIGURE]" sentinels with the caption text following.
std::string render_plain_text(const JoinedDocument& doc);

}  // namespace doclair::join
