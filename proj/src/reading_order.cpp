#include "doclair/reading_order.hpp"

namespace doclair::reading_order {

OrderGroup order_group(SemanticClass cls) {
    switch (cls) {
        case SemanticClass::PageHeader:
            return OrderGroup::Header;
        case SemanticClass::Text:
        case SemanticClass::SectionHeader:
        case SemanticClass::ListItem:
        case SemanticClass::Title:
        case SemanticClass::Formula:
            return OrderGroup::Body;
        case SemanticClass::Footnote:
        case SemanticClass::PageFooter:
        case SemanticClass::Picture:
        case SemanticClass::Table:
        case SemanticClass::Caption:
            return OrderGroup::Trailer;
    }
    return OrderGroup::Body;
}

namespace {

OrderGroup group_of(const Block& block, bool* known = nullptr) {
    const auto cls = block.semantic_class();
    if (known) *known = cls.has_value();
    return cls ? order_group(*cls) : OrderGroup::Body;
}

}  // namespace

CanonicalizeResult canonicalize(const Page& page) {
    CanonicalizeResult result;
    result.page.dims = page.dims;
    result.page.blocks.reserve(page.blocks.size());
    for (OrderGroup group : {OrderGroup::Header, OrderGroup::Body, OrderGroup::Trailer}) {
        for (std::size_t i = 0; i < page.blocks.size(); ++i) {
            bool known = false;
            if (group_of(page.blocks[i], &known) != group) continue;
            if (!known && group == OrderGroup::Body) result.missing_class.push_back(i);
            result.page.blocks.push_back(page.blocks[i]);
        }
    }
    return result;
}

bool is_canonical(const Page& page) {
    OrderGroup prev = OrderGroup::Header;
    for (const Block& block : page.blocks) {
        const OrderGroup group = group_of(block);
        if (group < prev) return false;
        prev = group;
    }
    return true;
}

}  // namespace doclair::reading_order
