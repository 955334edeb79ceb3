#include "doclair/types.hpp"

#include <algorithm>
#include <cctype>

namespace doclair {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Caption",    "Footnote",    "Formula", "List-item", "Page-footer",
    "Page-header", "Picture",    "Section-header", "Table", "Text", "Title",
};

std::string fold_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string_view to_string(SemanticClass cls) {
    return kClassNames[static_cast<std::size_t>(cls)];
}

std::optional<SemanticClass> semantic_class_from(std::string_view name) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        if (kClassNames[i] == name) return static_cast<SemanticClass>(i);
    }
    return std::nullopt;
}

std::optional<SemanticClass> semantic_class_lenient(std::string_view name) {
    const std::string folded = fold_name(name);
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        if (fold_name(kClassNames[i]) == folded) return static_cast<SemanticClass>(i);
    }
    return std::nullopt;
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidPrompt: return "InvalidPrompt";
        case ErrorCode::PresenceMismatch: return "PresenceMismatch";
        case ErrorCode::MissingScore: return "MissingScore";
        case ErrorCode::BinMismatch: return "BinMismatch";
        case ErrorCode::MissingBBox: return "MissingBBox";
        case ErrorCode::UncanonicalInput: return "UncanonicalInput";
        case ErrorCode::UnknownCategory: return "UnknownCategory";
        case ErrorCode::MissingImageDims: return "MissingImageDims";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

}  // namespace doclair
