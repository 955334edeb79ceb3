#include "doclair/format.hpp"

#include <cctype>
#include <charconv>

namespace doclair::format {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct TokenScan {
    bool matched = false;      // a complete, well-formed token starts at pos
    bool malformed = false;    // the opener is present but the token is broken
    int value = 0;             // coordinate value (coordinate tokens only)
    std::string name;          // class name (class tokens only)
    std::size_t end = 0;       // one past the closing '>'
};

// Matches "<x_(\d+)>" or "<y_(\d+)>" exactly at pos. No range check here;
// out-of-range coordinates are sanitation's business.
TokenScan scan_coord(std::string_view raw, std::size_t pos, char axis) {
    TokenScan scan;
    const std::string opener = std::string("<") + axis + "_";
    if (raw.substr(pos, opener.size()) != opener) return scan;
    std::size_t p = pos + opener.size();
    const std::size_t digits_begin = p;
    while (p < raw.size() && is_digit(raw[p])) ++p;
    if (p == digits_begin || p >= raw.size() || raw[p] != '>') {
        scan.malformed = true;
        return scan;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(raw.data() + digits_begin, raw.data() + p, value);
    if (ec != std::errc() || ptr != raw.data() + p) {
        scan.malformed = true;  // overflow
        return scan;
    }
    scan.matched = true;
    scan.value = value;
    scan.end = p + 1;
    return scan;
}

// Matches "<class_([^>]+)>" exactly at pos.
TokenScan scan_class(std::string_view raw, std::size_t pos) {
    constexpr std::string_view opener = "<class_";
    TokenScan scan;
    if (raw.substr(pos, opener.size()) != opener) return scan;
    std::size_t p = pos + opener.size();
    const std::size_t name_begin = p;
    while (p < raw.size() && raw[p] != '>') ++p;
    if (p >= raw.size() || p == name_begin) {
        scan.malformed = true;
        return scan;
    }
    scan.matched = true;
    scan.name = std::string(raw.substr(name_begin, p - name_begin));
    scan.end = p + 1;
    return scan;
}

// True if pos starts with a token opener that cannot complete.
bool malformed_opener_at(std::string_view raw, std::size_t pos) {
    if (scan_coord(raw, pos, 'x').malformed) return true;
    if (scan_coord(raw, pos, 'y').malformed) return true;
    if (scan_class(raw, pos).malformed) return true;
    return false;
}

struct CloserScan {
    bool matched = false;
    BBox corner;               // x2/y2 filled in
    std::string class_name;
    std::size_t end = 0;
};

// Matches the block closer at pos: "<x_c><y_d>" plus "<class_K>" when the
// prompt requests classes.
CloserScan scan_closer(std::string_view raw, std::size_t pos, bool classes) {
    CloserScan out;
    const TokenScan x = scan_coord(raw, pos, 'x');
    if (!x.matched) return out;
    const TokenScan y = scan_coord(raw, x.end, 'y');
    if (!y.matched) return out;
    std::size_t end = y.end;
    if (classes) {
        TokenScan cls = scan_class(raw, end);
        if (!cls.matched) return out;
        out.class_name = std::move(cls.name);
        end = cls.end;
    }
    out.matched = true;
    out.corner.x2 = x.value;
    out.corner.y2 = y.value;
    out.end = end;
    return out;
}

void reject_tail(ParseReport& report, std::string_view raw, std::size_t begin,
                 ParseRejectReason reason) {
    RejectedSpan span;
    span.begin = begin;
    span.end = raw.size();
    span.reason = reason;
    span.raw = std::string(raw.substr(begin));
    report.rejected.push_back(std::move(span));
}

}  // namespace

std::string_view to_string(ParseRejectReason reason) {
    switch (reason) {
        case ParseRejectReason::EmptyInput: return "EmptyInput";
        case ParseRejectReason::MalformedToken: return "MalformedToken";
        case ParseRejectReason::UnexpectedContent: return "UnexpectedContent";
        case ParseRejectReason::IncompleteBlock: return "IncompleteBlock";
    }
    return "ParseRejectReason";
}

ParseReport parse_page(std::string_view raw, PromptSpec prompt, PageDims dims) {
    if (!prompt.valid()) {
        throw Error(ErrorCode::InvalidPrompt, "prompt is not one of the 8 valid combinations");
    }
    if (!dims.valid()) {
        throw Error(ErrorCode::InvalidPrompt, "page dims must be positive");
    }

    ParseReport report;
    report.dims = dims;
    report.prompt = prompt;

    if (!prompt.boxes) {
        // Box-free mode is pass-through: the whole stream is one text block.
        if (raw.empty()) {
            reject_tail(report, raw, 0, ParseRejectReason::EmptyInput);
            return report;
        }
        Block block;
        block.text = std::string(raw);
        report.blocks.push_back(std::move(block));
        return report;
    }

    std::size_t pos = 0;
    while (pos < raw.size()) {
        const std::size_t block_start = pos;

        const TokenScan x1 = scan_coord(raw, pos, 'x');
        if (!x1.matched) {
            reject_tail(report, raw, block_start,
                        malformed_opener_at(raw, pos) ? ParseRejectReason::MalformedToken
                                                      : ParseRejectReason::UnexpectedContent);
            break;
        }
        const TokenScan y1 = scan_coord(raw, x1.end, 'y');
        if (!y1.matched) {
            reject_tail(report, raw, block_start,
                        malformed_opener_at(raw, x1.end) ? ParseRejectReason::MalformedToken
                                                         : ParseRejectReason::IncompleteBlock);
            break;
        }
        pos = y1.end;

        Block block;
        CloserScan closer;
        if (prompt.wants_text()) {
            // Non-greedy text group: the text ends at the first position
            // where a complete closer matches. A '<' that does not open a
            // well-formed closer stays part of the text.
            std::size_t search = pos;
            bool closed = false;
            while (true) {
                const std::size_t q = raw.find("<x_", search);
                if (q == std::string_view::npos) break;
                closer = scan_closer(raw, q, prompt.classes);
                if (closer.matched) {
                    block.text = std::string(raw.substr(pos, q - pos));
                    closed = true;
                    break;
                }
                search = q + 1;
            }
            if (!closed) {
                reject_tail(report, raw, block_start, ParseRejectReason::IncompleteBlock);
                break;
            }
        } else {
            closer = scan_closer(raw, pos, prompt.classes);
            if (!closer.matched) {
                reject_tail(report, raw, block_start,
                            malformed_opener_at(raw, pos) ? ParseRejectReason::MalformedToken
                                                          : ParseRejectReason::IncompleteBlock);
                break;
            }
        }

        block.bbox = BBox{x1.value, y1.value, closer.corner.x2, closer.corner.y2};
        if (prompt.classes) block.class_name = std::move(closer.class_name);
        report.blocks.push_back(std::move(block));
        pos = closer.end;
    }
    return report;
}

std::string serialize_page(const Page& page, PromptSpec prompt) {
    if (!prompt.valid()) {
        throw Error(ErrorCode::InvalidPrompt, "prompt is not one of the 8 valid combinations");
    }
    std::string out;
    std::size_t index = 0;
    for (const Block& block : page.blocks) {
        if (block.bbox.has_value() != prompt.boxes ||
            block.text.has_value() != prompt.wants_text() ||
            block.class_name.has_value() != prompt.classes) {
            throw Error(ErrorCode::PresenceMismatch,
                        "block " + std::to_string(index) +
                            " does not carry exactly the facets of prompt " + prompt_tag(prompt));
        }
        if (prompt.boxes) {
            const BBox& b = *block.bbox;
            out += "<x_" + std::to_string(b.x1) + "><y_" + std::to_string(b.y1) + ">";
            if (prompt.wants_text()) out += *block.text;
            out += "<x_" + std::to_string(b.x2) + "><y_" + std::to_string(b.y2) + ">";
            if (prompt.classes) out += "<class_" + *block.class_name + ">";
        } else {
            out += *block.text;
        }
        ++index;
    }
    return out;
}

long vocab_extra_tokens(const VocabSpec& spec) {
    if (!spec.dims.valid() || spec.num_classes < 0) {
        throw Error(ErrorCode::InvalidArgument, "vocab spec requires positive dims and num_classes >= 0");
    }
    return static_cast<long>(spec.dims.height) + spec.dims.width + spec.num_classes + 7;
}

std::vector<PromptSpec> enumerate_valid_prompts() {
    std::vector<PromptSpec> prompts;
    for (TextMode mode : {TextMode::Structured, TextMode::Plain, TextMode::NoText}) {
        for (bool boxes : {true, false}) {
            for (bool classes : {true, false}) {
                const PromptSpec spec{mode, boxes, classes};
                if (spec.valid()) prompts.push_back(spec);
            }
        }
    }
    return prompts;
}

std::string prompt_tag(PromptSpec prompt) {
    std::string tag;
    switch (prompt.text_mode) {
        case TextMode::Structured: tag = "structured_text"; break;
        case TextMode::Plain: tag = "plain_text"; break;
        case TextMode::NoText: tag = "no_text"; break;
    }
    tag += prompt.boxes ? ",bbox" : ",no_bbox";
    tag += prompt.classes ? ",classes" : ",no_classes";
    return tag;
}

std::optional<PromptSpec> prompt_from_tag(std::string_view tag) {
    std::vector<std::string_view> facets;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = tag.find(',', start);
        facets.push_back(tag.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (facets.size() != 3) return std::nullopt;

    PromptSpec spec;
    if (facets[0] == "structured_text") spec.text_mode = TextMode::Structured;
    else if (facets[0] == "plain_text") spec.text_mode = TextMode::Plain;
    else if (facets[0] == "no_text") spec.text_mode = TextMode::NoText;
    else return std::nullopt;

    if (facets[1] == "bbox") spec.boxes = true;
    else if (facets[1] == "no_bbox") spec.boxes = false;
    else return std::nullopt;

    if (facets[2] == "classes") spec.classes = true;
    else if (facets[2] == "no_classes") spec.classes = false;
    else return std::nullopt;

    if (!spec.valid()) return std::nullopt;
    return spec;
}

}  // namespace doclair::format
