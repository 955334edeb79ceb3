// Shared deterministic generators for tests and fixtures.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "doclair/types.hpp"

namespace generators {

inline doclair::BBox random_box(std::mt19937& rng, const doclair::PageDims& dims) {
    std::uniform_int_distribution<int> dx(0, dims.width - 2);
    const int x1 = dx(rng);
    std::uniform_int_distribution<int> dx2(x1 + 1, dims.width - 1);
    std::uniform_int_distribution<int> dy(0, dims.height - 2);
    const int y1 = dy(rng);
    std::uniform_int_distribution<int> dy2(y1 + 1, dims.height - 1);
    return {x1, y1, dx2(rng), dy2(rng)};
}

inline doclair::SemanticClass random_class(std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(doclair::kNumClasses) - 1);
    return static_cast<doclair::SemanticClass>(d(rng));
}

// Text without '<', so serialized pages always round-trip.
inline std::string random_text(std::mt19937& rng, std::size_t max_len) {
    static constexpr std::string_view alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?*_#[]()`~-";
    std::uniform_int_distribution<std::size_t> dlen(0, max_len);
    std::uniform_int_distribution<std::size_t> dchar(0, alphabet.size() - 1);
    std::string out;
    const std::size_t len = dlen(rng);
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[dchar(rng)]);
    return out;
}

inline doclair::Page random_page(std::mt19937& rng, doclair::PromptSpec prompt,
                                 doclair::PageDims dims, std::size_t max_blocks = 8) {
    doclair::Page page;
    page.dims = dims;
    std::uniform_int_distribution<std::size_t> dn(0, max_blocks);
    std::size_t n = dn(rng);
    if (!prompt.boxes) n = std::min<std::size_t>(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        doclair::Block block;
        if (prompt.boxes) block.bbox = random_box(rng, dims);
        if (prompt.wants_text()) block.text = random_text(rng, 40);
        if (prompt.classes) block.class_name = std::string(to_string(random_class(rng)));
        page.blocks.push_back(std::move(block));
    }
    // A single empty-text block in box-free mode parses as EmptyInput, not
    // as a page; keep generated box-free pages non-degenerate.
    if (!prompt.boxes && !page.blocks.empty() && page.blocks[0].text->empty()) {
        page.blocks[0].text = "x";
    }
    return page;
}

}  // namespace generators
