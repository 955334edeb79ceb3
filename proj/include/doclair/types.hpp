#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace doclair {

// Pixel dimensions of the coordinate grid a page's boxes live on.
// Coordinates index the token grid [0, width-1] x [0, height-1].
struct PageDims {
    int width = 0;
    int height = 0;

    bool valid() const { return width >= 1 && height >= 1; }
    auto operator<=>(const PageDims&) const = default;
};

// Axis-aligned box, (x1,y1) top-left and (x2,y2) bottom-right, with
// half-open extent semantics: width = x2 - x1, height = y2 - y1.
struct BBox {
    int x1 = 0;
    int y1 = 0;
    int x2 = 0;
    int y2 = 0;

    // Spatial validity as checked by sanitation: bottom-right strictly
    // exceeds top-left. Zero-area boxes are invalid.
    bool valid_extent() const { return x2 > x1 && y2 > y1; }

    bool within(const PageDims& dims) const {
        return x1 >= 0 && x1 < dims.width && x2 >= 0 && x2 < dims.width &&
               y1 >= 0 && y1 < dims.height && y2 >= 0 && y2 < dims.height;
    }

    std::int64_t area() const {
        if (!valid_extent()) return 0;
        return static_cast<std::int64_t>(x2 - x1) * static_cast<std::int64_t>(y2 - y1);
    }

    auto operator<=>(const BBox&) const = default;
};

// The 11 semantic block categories.
enum class SemanticClass : int {
    Caption = 0,
    Footnote,
    Formula,
    ListItem,
    PageFooter,
    PageHeader,
    Picture,
    SectionHeader,
    Table,
    Text,
    Title,
};

inline constexpr std::size_t kNumClasses = 11;

inline constexpr std::array<SemanticClass, kNumClasses> all_classes() {
    return {SemanticClass::Caption,      SemanticClass::Footnote,
            SemanticClass::Formula,      SemanticClass::ListItem,
            SemanticClass::PageFooter,   SemanticClass::PageHeader,
            SemanticClass::Picture,      SemanticClass::SectionHeader,
            SemanticClass::Table,        SemanticClass::Text,
            SemanticClass::Title};
}

// Canonical class name as it appears in the output grammar, e.g. "List-item".
std::string_view to_string(SemanticClass cls);

// Exact-name lookup. Returns nullopt for anything outside the closed set.
std::optional<SemanticClass> semantic_class_from(std::string_view name);

// Case-, hyphen-, space- and underscore-insensitive lookup.
std::optional<SemanticClass> semantic_class_lenient(std::string_view name);

enum class TextMode { Structured, Plain, NoText };

// One of the three output facets requested from the model. Only 8 of the
// 12 raw combinations are valid: classes require boxes, and suppressing
// everything is not a prompt.
struct PromptSpec {
    TextMode text_mode = TextMode::Structured;
    bool boxes = true;
    bool classes = true;

    bool valid() const {
        if (classes && !boxes) return false;
        if (text_mode == TextMode::NoText && !boxes) return false;
        return true;
    }
    bool wants_text() const { return text_mode != TextMode::NoText; }

    auto operator<=>(const PromptSpec&) const = default;
};

// Maximal-information prompt: structured text + boxes + classes.
inline constexpr PromptSpec mip() {
    return PromptSpec{TextMode::Structured, true, true};
}

// One laid-out semantic unit. Which facets are present depends on the
// prompt the block was parsed under. The class is kept as the raw name
// string; schema validation against SemanticClass is sanitation's job.
struct Block {
    std::optional<BBox> bbox;
    std::optional<std::string> text;
    std::optional<std::string> class_name;

    std::optional<SemanticClass> semantic_class() const {
        if (!class_name) return std::nullopt;
        return semantic_class_from(*class_name);
    }

    bool operator==(const Block&) const = default;
};

// An ordered page of blocks. Block order is the emission order of the
// raw stream, i.e. reading order by construction.
struct Page {
    PageDims dims;
    std::vector<Block> blocks;

    bool operator==(const Page&) const = default;
};

enum class ErrorCode {
    InvalidPrompt,
    PresenceMismatch,
    MissingScore,
    BinMismatch,
    MissingBBox,
    UncanonicalInput,
    UnknownCategory,
    MissingImageDims,
    IoFailure,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace doclair
