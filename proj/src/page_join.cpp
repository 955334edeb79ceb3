#include "doclair/page_join.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "doclair/assignment.hpp"
#include "doclair/reading_order.hpp"
#include "doclair/text_metrics.hpp"

namespace doclair::join {

namespace {

// Integer-valued weights; anything below half a pixel is a tie.
constexpr double kDistanceTieEpsilon = 0.5;

double block_distance(const BBox& a, const BBox& b, JoinConfig::CaptionDistance mode) {
    if (mode == JoinConfig::CaptionDistance::Center) {
        // Doubled centers keep the arithmetic integral.
        const auto dx = std::abs((a.x1 + a.x2) - (b.x1 + b.x2));
        const auto dy = std::abs((a.y1 + a.y2) - (b.y1 + b.y2));
        return 0.5 * static_cast<double>(dx + dy);
    }
    const int ax[2] = {a.x1, a.x2}, ay[2] = {a.y1, a.y2};
    const int bx[2] = {b.x1, b.x2}, by[2] = {b.y1, b.y2};
    int best = std::numeric_limits<int>::max();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    best = std::min(best, std::abs(ax[i] - bx[k]) + std::abs(ay[j] - by[l]));
                }
            }
        }
    }
    return static_cast<double>(best);
}

bool ends_terminal(std::string_view text, std::string_view terminal) {
    for (std::size_t i = text.size(); i-- > 0;) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) continue;
        return terminal.find(static_cast<char>(c)) != std::string_view::npos;
    }
    return false;
}

void append_with_space(std::string& open, const std::string& text) {
    if (open.empty()) {
        open = text;
    } else if (!text.empty()) {
        open += ' ';
        open += text;
    }
}

bool is_standalone(SemanticClass cls) {
    return cls == SemanticClass::SectionHeader || cls == SemanticClass::Title ||
           cls == SemanticClass::Formula;
}

std::string block_text(const Block& block) { return block.text ? *block.text : std::string(); }

// --- markdown stripping -------------------------------------------------

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Removes leading heading hashes and list markers from one line.
std::string strip_line_start(std::string_view line) {
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::string_view rest = line.substr(pos);
        if (rest.size() >= 2 && (rest[0] == '-' || rest[0] == '*' || rest[0] == '+') &&
            rest[1] == ' ') {
            pos += 2;
            continue;
        }
        if (rest[0] == '#') {
            std::size_t h = 0;
            while (h < rest.size() && rest[h] == '#') ++h;
            if (h < rest.size() && rest[h] == ' ') {
                pos += h + 1;
                continue;
            }
        }
        if (is_digit(rest[0])) {
            std::size_t d = 0;
            while (d < rest.size() && is_digit(rest[d])) ++d;
            if (d + 1 < rest.size() && rest[d] == '.' && rest[d + 1] == ' ') {
                pos += d + 2;
                continue;
            }
        }
        break;
    }
    return std::string(line.substr(pos));
}

// Replaces [anchor](url) with anchor and, when image is true, requires a
// leading '!' (![alt](url) -> alt).
std::string strip_links(std::string_view s, bool image) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const bool opens = image ? (s[i] == '!' && i + 1 < s.size() && s[i + 1] == '[')
                                 : (s[i] == '[');
        if (opens) {
            const std::size_t lb = image ? i + 1 : i;
            const std::size_t rb = s.find(']', lb + 1);
            if (rb != std::string_view::npos && rb + 1 < s.size() && s[rb + 1] == '(') {
                const std::size_t rp = s.find(')', rb + 2);
                if (rp != std::string_view::npos) {
                    out += s.substr(lb + 1, rb - lb - 1);
                    i = rp + 1;
                    continue;
                }
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

// Removes paired two-character markers (**, __, ~~) around non-empty content.
std::string strip_pair2(std::string_view s, char mark) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (i + 1 < s.size() && s[i] == mark && s[i + 1] == mark) {
            std::size_t j = i + 2;
            while (j + 1 < s.size() && !(s[j] == mark && s[j + 1] == mark)) ++j;
            if (j + 1 < s.size() && j > i + 2) {
                out += s.substr(i + 2, j - i - 2);
                i = j + 2;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

// Removes paired single-character markers (*, _, `) around non-empty content.
std::string strip_pair1(std::string_view s, char mark) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == mark) {
            const std::size_t j = s.find(mark, i + 1);
            if (j != std::string_view::npos && j > i + 1) {
                out += s.substr(i + 1, j - i - 1);
                i = j + 1;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

std::string strip_markdown_pass(std::string_view s) {
    std::string out = strip_links(s, /*image=*/true);
    out = strip_links(out, /*image=*/false);
    out = strip_pair2(out, '*');
    out = strip_pair2(out, '_');
    out = strip_pair2(out, '~');
    out = strip_pair1(out, '*');
    out = strip_pair1(out, '_');
    out = strip_pair1(out, '`');

    std::string lined;
    lined.reserve(out.size());
    std::size_t start = 0;
    while (start <= out.size()) {
        const std::size_t nl = out.find('\n', start);
        const std::string_view line(out.data() + start,
                                    (nl == std::string::npos ? out.size() : nl) - start);
        lined += strip_line_start(line);
        if (nl == std::string::npos) break;
        lined.push_back('\n');
        start = nl + 1;
    }
    return lined;
}

}  // namespace

CaptionAssignment assign_captions(std::span<const Block> captions,
                                  std::span<const Block> objects,
                                  JoinConfig::CaptionDistance distance) {
    for (const Block& b : captions) {
        if (!b.bbox) throw Error(ErrorCode::MissingBBox, "caption block has no bounding box");
    }
    for (const Block& b : objects) {
        if (!b.bbox) throw Error(ErrorCode::MissingBBox, "object block has no bounding box");
    }

    // Maximize negated distance = minimize total distance.
    detail::WeightMatrix weights(captions.size(), objects.size());
    for (std::size_t i = 0; i < captions.size(); ++i) {
        for (std::size_t j = 0; j < objects.size(); ++j) {
            weights.at(i, j) = -block_distance(*captions[i].bbox, *objects[j].bbox, distance);
        }
    }
    const auto solved = detail::solve_max_assignment(weights, kDistanceTieEpsilon);

    CaptionAssignment out;
    out.pairs = solved.pairs;
    std::vector<bool> cap_used(captions.size(), false), obj_used(objects.size(), false);
    for (const auto& [c, o] : out.pairs) {
        cap_used[c] = true;
        obj_used[o] = true;
    }
    for (std::size_t c = 0; c < captions.size(); ++c) {
        if (!cap_used[c]) out.unmatched_captions.push_back(c);
    }
    for (std::size_t o = 0; o < objects.size(); ++o) {
        if (!obj_used[o]) out.unmatched_objects.push_back(o);
    }
    return out;
}

MergeResult merge_flow(FlowState state, std::span<const Block> page_body,
                       const JoinConfig& config) {
    MergeResult result;
    std::string open = state.open_paragraph.value_or(std::string());
    bool has_open = state.open_paragraph.has_value();

    auto close_open = [&] {
        if (has_open) result.paragraphs.push_back(std::move(open));
        open.clear();
        has_open = false;
    };

    for (const Block& block : page_body) {
        const auto cls = block.semantic_class();
        if (cls && is_standalone(*cls)) {
            close_open();
            result.paragraphs.push_back(block_text(block));
            continue;
        }
        // Text / List-item (and classless fallback)
        if (has_open && ends_terminal(open, config.terminal_punctuation)) close_open();
        append_with_space(open, block_text(block));
        has_open = true;
    }

    if (has_open) {
        if (ends_terminal(open, config.terminal_punctuation)) {
            result.paragraphs.push_back(std::move(open));
        } else {
            result.state.open_paragraph = std::move(open);
        }
    }
    result.state.pending_floats = std::move(state.pending_floats);
    return result;
}

bool detect_skip_section(const Block& block, const JoinConfig& config) {
    const auto cls = block.semantic_class();
    if (!cls || (*cls != SemanticClass::SectionHeader && *cls != SemanticClass::Title)) {
        return false;
    }
    if (!block.text) return false;
    const std::string heading = text::normalize(*block.text).raw_normalized;
    for (const std::string& skip : config.skip_headings) {
        if (text::normalize(skip).raw_normalized == heading) return true;
    }
    return false;
}

std::string strip_markdown(std::string_view text) {
    std::string cur(text);
    while (true) {
        std::string next = strip_markdown_pass(cur);
        if (next == cur) return cur;
        cur = std::move(next);
    }
}

JoinedDocument join_document(std::span<const Page> pages, const JoinConfig& config) {
    JoinedDocument doc;
    FlowState state;
    bool skipping = false;

    for (std::size_t page_no = 0; page_no < pages.size(); ++page_no) {
        const Page& page = pages[page_no];
        if (!reading_order::is_canonical(page)) {
            throw Error(ErrorCode::UncanonicalInput,
                        "page " + std::to_string(page_no) + " is not canonically ordered");
        }

        std::vector<Block> body, objects, captions;
        std::vector<std::string> header_paras, footnote_paras, footer_paras;
        for (const Block& block : page.blocks) {
            const auto cls = block.semantic_class();
            if (cls && config.drop_classes.contains(*cls)) continue;
            if (!cls) {
                body.push_back(block);
                continue;
            }
            switch (*cls) {
                case SemanticClass::Picture:
                case SemanticClass::Table:
                    objects.push_back(block);
                    break;
                case SemanticClass::Caption:
                    captions.push_back(block);
                    break;
                case SemanticClass::Footnote:
                    footnote_paras.push_back(block_text(block));
                    break;
                case SemanticClass::PageHeader:
                    header_paras.push_back(block_text(block));
                    break;
                case SemanticClass::PageFooter:
                    footer_paras.push_back(block_text(block));
                    break;
                default:
                    body.push_back(block);
                    break;
            }
        }

        // Skip-section gate: suppress Body output from a configured
        // heading until the next heading that tests false.
        std::vector<Block> kept;
        kept.reserve(body.size());
        for (const Block& block : body) {
            const auto cls = block.semantic_class();
            if (cls && (*cls == SemanticClass::SectionHeader || *cls == SemanticClass::Title)) {
                skipping = detect_skip_section(block, config);
                if (!skipping) kept.push_back(block);
            } else if (!skipping) {
                kept.push_back(block);
            }
        }

        // Kept page headers stand alone ahead of the body flow.
        for (const std::string& h : header_paras) doc.flow.push_back(strip_markdown(h));

        MergeResult merged = merge_flow(std::move(state), kept, config);
        for (std::string& p : merged.paragraphs) doc.flow.push_back(strip_markdown(p));
        state = std::move(merged.state);

        const CaptionAssignment ca = assign_captions(captions, objects, config.caption_distance);
        std::vector<std::optional<std::size_t>> caption_of(objects.size());
        for (const auto& [c, o] : ca.pairs) caption_of[o] = c;

        const std::size_t anchor = doc.flow.size();
        state.pending_floats.clear();
        for (std::size_t o = 0; o < objects.size(); ++o) {
            FloatItem item;
            item.object = objects[o];
            if (caption_of[o]) item.caption = captions[*caption_of[o]];
            item.insert_at = anchor;
            state.pending_floats.push_back(std::move(item));
        }
        for (std::size_t c : ca.unmatched_captions) {
            FloatItem item;
            item.caption = captions[c];
            item.insert_at = anchor;
            state.pending_floats.push_back(std::move(item));
        }
        // Step-5 flush: the page's floats land after its flow paragraphs.
        for (FloatItem& item : state.pending_floats) doc.floats.push_back(std::move(item));
        state.pending_floats.clear();

        for (const std::string& f : footnote_paras) doc.flow.push_back(strip_markdown(f));
        for (const std::string& f : footer_paras) doc.flow.push_back(strip_markdown(f));
    }

    if (state.open_paragraph) doc.flow.push_back(strip_markdown(*state.open_paragraph));
    return doc;
}

std::string render_plain_text(const JoinedDocument& doc) {
    std::vector<std::string> paragraphs;
    paragraphs.reserve(doc.flow.size() + doc.floats.size());
    std::size_t next_float = 0;
    for (std::size_t i = 0; i <= doc.flow.size(); ++i) {
        while (next_float < doc.floats.size() && doc.floats[next_float].insert_at <= i) {
            const FloatItem& item = doc.floats[next_float];
            std::string rendered;
            if (item.object) {
                rendered = item.object->semantic_class() == SemanticClass::Table ? "[TABLE]"
                                                                                 : "[FIGURE]";
                if (item.caption) {
                    const std::string cap = strip_markdown(block_text(*item.caption));
                    if (!cap.empty()) rendered += " " + cap;
                }
            } else if (item.caption) {
                rendered = strip_markdown(block_text(*item.caption));
            }
            if (!rendered.empty()) paragraphs.push_back(std::move(rendered));
            ++next_float;
        }
        if (i < doc.flow.size()) paragraphs.push_back(doc.flow[i]);
    }

    std::string out;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        if (i) out += "\n\n";
        out += paragraphs[i];
    }
    if (!out.empty()) out.push_back('\n');
    return out;
}

}  // namespace doclair::join
