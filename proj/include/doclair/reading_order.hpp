#pragma once

#include <cstddef>
#include <vector>

#include "doclair/types.hpp"

namespace doclair::reading_order {

// Canonical placement of a class on the page: Page-header elements go to
// the start, the text-like classes form the body, and floats, footnotes
// and footers go to the end.
enum class OrderGroup { Header = 0, Body = 1, Trailer = 2 };

OrderGroup order_group(SemanticClass cls);

struct CanonicalizeResult {
    Page page;
    // Indices (input order) of blocks with a missing or unknown class;
    // such blocks are treated as Body. Non-fatal.
    std::vector<std::size_t> missing_class;
};

// Stable three-way partition: Header group first, then Body, then
// Trailer, preserving input order within each group.
CanonicalizeResult canonicalize(const Page& page);

// True iff the group sequence is non-decreasing in Header < Body < Trailer.
bool is_canonical(const Page& page);

}  // namespace doclair::reading_order
