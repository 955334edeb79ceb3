#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doclair/types.hpp"

namespace doclair::format {

// Why a trailing portion of the raw stream was not accepted.
enum class ParseRejectReason {
    EmptyInput,        // raw is empty but the prompt requires text
    MalformedToken,    // a <x_/<y_/<class_ opener without a closing '>'
    UnexpectedContent, // content where a block must start
    IncompleteBlock,   // a block opened but never closed before end of input
};

std::string_view to_string(ParseRejectReason reason);

struct RejectedSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    ParseRejectReason reason = ParseRejectReason::UnexpectedContent;
    std::string raw;  // the rejected bytes, verbatim

    bool operator==(const RejectedSpan&) const = default;
};

// Result of parsing one raw page: the maximal well-formed prefix as
// blocks, plus the rejected tail (if any). This is the sanitization
// boundary; coordinates and class names are not validated here.
struct ParseReport {
    std::vector<Block> blocks;
    std::vector<RejectedSpan> rejected;
    PageDims dims;
    PromptSpec prompt;

    bool clean() const { return rejected.empty(); }
};

// Parses a raw model output stream under the given prompt. Accepts all
// maximal well-formed blocks from the start of the stream; any
// non-conforming suffix is reported as a rejected span. When the prompt
// requests no boxes, the whole stream is a single text block.
// Throws Error{InvalidPrompt} if the prompt is not one of the 8 valid
// combinations or dims are not positive.
ParseReport parse_page(std::string_view raw, PromptSpec prompt, PageDims dims);

// Emits the page's blocks in sequence order using the grammar. The
// coordinate tokens are the delimiters; nothing separates blocks.
// Throws Error{PresenceMismatch} if a block lacks a facet the prompt
// requires (or carries one it forbids).
std::string serialize_page(const Page& page, PromptSpec prompt);

struct VocabSpec {
    PageDims dims;
    int num_classes = 0;
};

// Number of special tokens the grammar adds to a base tokenizer:
// height + width + num_classes + 7 (the seven prompt components).
long vocab_extra_tokens(const VocabSpec& spec);

// The 8 valid prompt combinations, in a fixed deterministic order.
std::vector<PromptSpec> enumerate_valid_prompts();

// Serialized prompt tag, comma-joined facet names:
// e.g. "structured_text,bbox,classes".
std::string prompt_tag(PromptSpec prompt);

// Parses a prompt tag. Returns nullopt for unknown facet names,
// wrong arity, or a combination that is not one of the 8 valid ones.
std::optional<PromptSpec> prompt_from_tag(std::string_view tag);

}  // namespace doclair::format
