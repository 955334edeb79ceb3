#include <random>

#include "doclair/format.hpp"
#include "doclair/sanitize.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace doclair;
using namespace doclair::sanitize;

namespace {

constexpr PageDims kDims{1280, 1024};

format::ParseReport report_of(std::vector<Block> blocks) {
    format::ParseReport report;
    report.dims = kDims;
    report.prompt = mip();
    report.blocks = std::move(blocks);
    return report;
}

Block mip_block(BBox box, std::string cls, std::string text = "t") {
    return Block{box, std::move(text), std::move(cls)};
}

}  // namespace

TEST_CASE("filter_boxes keeps valid blocks and routes the rest") {
    auto report = report_of({
        mip_block({10, 20, 200, 40}, "Text"),
        mip_block({200, 40, 10, 20}, "Text"),     // inverted corners
        mip_block({10, 20, 2000, 40}, "Text"),    // x2 beyond the grid
        mip_block({5, 5, 50, 50}, "Paragraph"),   // not a semantic class
        mip_block({7, 7, 7, 60}, "Title"),        // zero width
    });
    const auto result = filter_boxes(report, kDims);
    REQUIRE(result.accepted.size() == 1);
    CHECK(result.accepted[0].bbox == BBox{10, 20, 200, 40});
    REQUIRE(result.rejected.size() == 4);
    CHECK(result.rejected[0].reason == RejectionReason::DegenerateBox);
    CHECK(result.rejected[1].reason == RejectionReason::OutOfRangeCoordinate);
    CHECK(result.rejected[2].reason == RejectionReason::UnknownClass);
    CHECK(result.rejected[3].reason == RejectionReason::DegenerateBox);
}

TEST_CASE("filter_boxes re-emits the parse tail as SyntaxNonCompliant") {
    auto report = report_of({mip_block({1, 1, 9, 9}, "Text")});
    report.rejected.push_back({10, 18, format::ParseRejectReason::MalformedToken, "<x_3><y_"});
    const auto result = filter_boxes(report, kDims);
    CHECK(result.accepted.size() == 1);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].reason == RejectionReason::SyntaxNonCompliant);
    CHECK(result.rejected[0].block.text == "<x_3><y_");
}

TEST_CASE("filter_boxes totality: counts always add up") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> coord(-50, 1400);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Block> blocks;
        const int n = pick(rng) + pick(rng);
        for (int i = 0; i < n; ++i) {
            const char* cls = pick(rng) == 0 ? "Bogus" : "Text";
            blocks.push_back(
                mip_block({coord(rng), coord(rng), coord(rng), coord(rng)}, cls));
        }
        const auto result = filter_boxes(report_of(blocks), kDims);
        CHECK(result.accepted.size() + result.rejected.size() == blocks.size());
        for (const Block& b : result.accepted) {
            CHECK(b.bbox->valid_extent());
            CHECK(b.bbox->within(kDims));
            CHECK(b.semantic_class().has_value());
        }
    }
}

TEST_CASE("detect_repetition finds trailing loops") {
    SanitizeConfig config;

    SUBCASE("too short to loop") {
        CHECK(!detect_repetition("abc", config));
    }

    SUBCASE("a looping sentence") {
        std::string text = "Intro. ";
        for (int i = 0; i < 6; ++i) text += "the same sentence here. ";
        const auto loop = detect_repetition(text, config);
        REQUIRE(loop.has_value());
        CHECK(loop->loop_start == 7);
        CHECK(loop->unit == "the same sentence here. ");
        CHECK(loop->repeats == 6);
    }

    SUBCASE("minimal unit, minimal repeats") {
        SanitizeConfig tiny;
        tiny.repetition_min_unit_chars = 1;
        tiny.repetition_min_repeats = 2;
        const auto loop = detect_repetition("abab", tiny);
        REQUIRE(loop.has_value());
        CHECK(loop->loop_start == 0);
        CHECK(loop->unit == "ab");
        CHECK(loop->repeats == 2);
    }
}

TEST_CASE("detect_repetition agrees with the exhaustive scan") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> dlen(0, 200);
    std::uniform_int_distribution<int> dchar(0, 3);
    std::uniform_int_distribution<int> dmode(0, 2);
    std::uniform_int_distribution<int> dunit(1, 20);
    std::uniform_int_distribution<int> dreps(2, 6);

    for (int iter = 0; iter < 400; ++iter) {
        SanitizeConfig config;
        config.repetition_min_unit_chars = static_cast<std::size_t>(dunit(rng));
        config.repetition_min_repeats = static_cast<std::size_t>(dreps(rng));

        std::string text;
        const int mode = dmode(rng);
        const int len = dlen(rng);
        for (int i = 0; i < len; ++i) text.push_back(static_cast<char>('a' + dchar(rng)));
        if (mode >= 1 && len > 4) {
            // Seed an actual loop so the positive path is exercised often.
            const std::string unit = text.substr(0, static_cast<std::size_t>(dunit(rng)));
            for (int r = 0; r < dreps(rng) + 2 && !unit.empty(); ++r) text += unit;
        }

        const auto got = detect_repetition(text, config);
        const auto want = oracles::brute_force_repetition(
            text, config.repetition_min_unit_chars, config.repetition_min_repeats);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->loop_start == want->offset);
            CHECK(got->unit == want->unit);
            CHECK(got->repeats == want->repeats);
        }
    }
}

TEST_CASE("sanitize_page composes filtering and loop truncation") {
    SUBCASE("clean page: empty audit") {
        const auto result = sanitize_page(report_of({
                                              mip_block({1, 1, 9, 9}, "Text"),
                                              mip_block({10, 10, 90, 90}, "Table"),
                                              mip_block({0, 0, 5, 5}, "Title"),
                                          }),
                                          kDims);
        CHECK(result.page.blocks.size() == 3);
        CHECK(result.audit.empty());
    }

    SUBCASE("degenerate box is dropped and audited") {
        const auto result = sanitize_page(report_of({
                                              mip_block({1, 1, 9, 9}, "Text"),
                                              mip_block({9, 9, 1, 1}, "Text"),
                                          }),
                                          kDims);
        CHECK(result.page.blocks.size() == 1);
        REQUIRE(result.audit.size() == 1);
        CHECK(result.audit[0].reason == RejectionReason::DegenerateBox);
    }

    SUBCASE("trailing loop keeps exactly one unit") {
        std::string text = "x. ";
        for (int i = 0; i < 10; ++i) text += "loop ";
        const auto result =
            sanitize_page(report_of({mip_block({1, 1, 9, 9}, "Text", text)}), kDims,
                          SanitizeConfig{5, 4, true});
        REQUIRE(result.page.blocks.size() == 1);
        CHECK(result.page.blocks[0].text == "x. loop ");
        REQUIRE(result.audit.size() == 1);
        CHECK(result.audit[0].reason == RejectionReason::RepetitionLoop);
    }

    SUBCASE("repetition filter can be disabled") {
        std::string text;
        for (int i = 0; i < 10; ++i) text += "loop loop go ";
        SanitizeConfig config;
        config.enable_repetition_filter = false;
        const auto result =
            sanitize_page(report_of({mip_block({1, 1, 9, 9}, "Text", text)}), kDims, config);
        CHECK(result.page.blocks[0].text == text);
        CHECK(result.audit.empty());
    }
}

TEST_CASE("sanitize_page is idempotent") {
    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> dchar(0, 3);
    std::uniform_int_distribution<int> dlen(0, 60);
    std::uniform_int_distribution<int> dreps(0, 8);
    std::uniform_int_distribution<int> dunit(1, 30);

    for (int iter = 0; iter < 300; ++iter) {
        std::string text;
        const int len = dlen(rng);
        for (int i = 0; i < len; ++i) text.push_back(static_cast<char>('a' + dchar(rng)));
        const std::string unit = text.substr(0, static_cast<std::size_t>(dunit(rng)));
        for (int r = 0; r < dreps(rng) && !unit.empty(); ++r) text += unit;

        const auto first = sanitize_page(report_of({mip_block({1, 1, 9, 9}, "Text", text)}), kDims);
        const auto again = sanitize_page(report_of(first.page.blocks), kDims);
        CHECK(again.page == first.page);
        CHECK(again.audit.empty());
    }
}
