#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "doclair/layout_metrics.hpp"
#include "doclair/sanitize.hpp"
#include "doclair/text_metrics.hpp"
#include "doclair/types.hpp"

namespace doclair::io {

struct ScoredBlock {
    Block block;
    std::optional<double> score;

    bool operator==(const ScoredBlock&) const = default;
};

// One page on disk: identity, grid dimensions, and either a raw payload
// (string + prompt tag) or a block list. (doc_id, page_index) is unique
// within a file.
struct PageRecord {
    std::string doc_id;
    std::int64_t page_index = 0;
    PageDims dims;
    std::optional<std::string> raw;
    std::optional<PromptSpec> prompt;  // required with raw payloads
    std::vector<ScoredBlock> blocks;
    bool has_blocks = false;

    bool is_raw() const { return raw.has_value(); }

    bool operator==(const PageRecord&) const = default;
};

struct LineError {
    std::size_t line_no = 0;
    std::string message;
};

// Streaming reader over newline-delimited JSON records. Malformed lines
// surface as per-line errors, never as a global failure; duplicate
// (doc_id, page_index) keys are reported the same way.
class RecordReader {
  public:
    explicit RecordReader(std::istream& in) : in_(in) {}

    struct Item {
        std::optional<PageRecord> record;
        std::optional<LineError> error;
    };

    // nullopt at end of stream.
    std::optional<Item> next();

  private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::set<std::pair<std::string, std::int64_t>> seen_;
};

// Reads a whole file; line errors are appended to *errors when given,
// silently dropped otherwise. Throws Error{IoFailure} if the file cannot
// be opened.
std::vector<PageRecord> read_records(const std::filesystem::path& path,
                                     std::vector<LineError>* errors = nullptr);

void write_records(std::ostream& out, std::span<const PageRecord> records);
void write_records(const std::filesystem::path& path, std::span<const PageRecord> records);

// Dataset class-name variance absorber: case-, hyphen-, space- and
// underscore-insensitive matching of the 11 canonical names plus an
// extensible alias table ("sec-header" ships by default).
class ClassNameResolver {
  public:
    ClassNameResolver();

    void add_alias(std::string_view name, SemanticClass cls);
    std::optional<SemanticClass> resolve(std::string_view name) const;

  private:
    std::unordered_map<std::string, SemanticClass> aliases_;  // folded keys
};

// Imports a COCO-style detection dump: {"images": [...], "categories":
// [...], "annotations": [{image_id, category_id, bbox [x,y,w,h], score}]}.
// Boxes convert to integer corner form with round-half-up. Throws
// Error{UnknownCategory} / Error{MissingImageDims} / Error{IoFailure}.
std::vector<PageRecord> import_coco_detections(const std::filesystem::path& path,
                                               const ClassNameResolver& resolver = {});

// ---------------------------------------------------------------------
// Evaluation report

struct TextRow {
    std::string doc_id;
    std::int64_t page_index = 0;
    text::TextScores scores;
    std::string missing_side;  // "", "pred" or "gt"
};

struct TextSection {
    std::vector<TextRow> per_doc;  // sorted by (doc_id, page_index)
    text::TextScores corpus_mean;
    bool micro = false;
    std::size_t pages_scored = 0;
    std::size_t pages_missing_pred = 0;
    std::size_t pages_missing_gt = 0;
};

struct LayoutSection {
    layout::ThresholdedConfusion confusion;
    layout::MeanMetrics averaged;
    std::optional<layout::APResult> ap;
    std::size_t pages = 0;
    std::size_t skipped_blocks = 0;  // blocks lacking a usable box or class
};

struct SanitizeSummary {
    // Indexed by sanitize::RejectionReason.
    std::array<std::size_t, 5> counts{};
    std::size_t pages = 0;
};

struct EvalReport {
    std::string tool = "doclair";
    std::string version;
    std::vector<std::pair<std::string, std::string>> config;  // echoed flags
    std::optional<TextSection> text;
    std::optional<LayoutSection> layout;
    std::optional<SanitizeSummary> sanitize;
};

// Writes report.json plus the CSV side-cars (confusion matrices per
// threshold and pooled, PR curves, per-document scores). Byte-stable for
// identical inputs and config. Throws Error{IoFailure}.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace doclair::io
