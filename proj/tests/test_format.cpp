#include <random>

#include "doclair/format.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace doclair;
using namespace doclair::format;

namespace {
constexpr PageDims kDims{1280, 1024};
}

TEST_CASE("parse_page accepts the MIP grammar") {
    const auto report = parse_page("<x_10><y_20>Hello world<x_200><y_40><class_Text>", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.rejected.empty());
    const Block& b = report.blocks[0];
    CHECK(b.bbox == BBox{10, 20, 200, 40});
    CHECK(b.text == "Hello world");
    CHECK(b.class_name == "Text");
}

TEST_CASE("parse_page passes box-free text through") {
    const PromptSpec prompt{TextMode::Plain, false, false};
    const auto report = parse_page("plain body text", prompt, kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(!report.blocks[0].bbox);
    CHECK(!report.blocks[0].class_name);
    CHECK(report.blocks[0].text == "plain body text");
}

TEST_CASE("parse_page is prefix-maximal with a malformed tail") {
    const auto report = parse_page("<x_1><y_1>ok<x_9><y_9><class_Text><x_3><y_", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].bbox == BBox{1, 1, 9, 9});
    REQUIRE(report.rejected.size() == 1);
    CHECK(report.rejected[0].raw == "<x_3><y_");
    CHECK(report.rejected[0].reason == ParseRejectReason::MalformedToken);
    CHECK(report.rejected[0].begin == 34);
    CHECK(report.rejected[0].end == 42);
}

TEST_CASE("parse_page classifies garbage where a block must start") {
    const auto report = parse_page("hello<x_1><y_2>t<x_3><y_4><class_Text>", mip(), kDims);
    CHECK(report.blocks.empty());
    REQUIRE(report.rejected.size() == 1);
    CHECK(report.rejected[0].reason == ParseRejectReason::UnexpectedContent);
    CHECK(report.rejected[0].begin == 0);
}

TEST_CASE("parse_page: empty input") {
    SUBCASE("box mode: a valid empty page") {
        const auto report = parse_page("", mip(), kDims);
        CHECK(report.blocks.empty());
        CHECK(report.rejected.empty());
    }
    SUBCASE("text-only mode: EmptyInput") {
        const PromptSpec prompt{TextMode::Plain, false, false};
        const auto report = parse_page("", prompt, kDims);
        CHECK(report.blocks.empty());
        REQUIRE(report.rejected.size() == 1);
        CHECK(report.rejected[0].reason == ParseRejectReason::EmptyInput);
    }
}

TEST_CASE("parse_page keeps non-token '<' inside text") {
    const auto report =
        parse_page("<x_1><y_2>a <x_nope> b<x_3><y_4><class_Formula>", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].text == "a <x_nope> b");
    CHECK(report.rejected.empty());
}

TEST_CASE("parse_page backtracks over a coordinate pair that is not a closer") {
    // Under MIP the closer needs the class token, so the inner pair
    // belongs to the text group, as the non-greedy grammar dictates.
    const auto report =
        parse_page("<x_1><y_2>see <x_5><y_6> here<x_3><y_4><class_Text>", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].text == "see <x_5><y_6> here");
}

TEST_CASE("parse_page does not range-check coordinates") {
    const auto report = parse_page("<x_10><y_20>t<x_9999><y_40><class_Text>", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].bbox->x2 == 9999);
}

TEST_CASE("parse_page accepts empty block text") {
    const auto report = parse_page("<x_1><y_2><x_3><y_4><class_Picture>", mip(), kDims);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].text == "");
}

TEST_CASE("parse_page handles the no-text box prompts") {
    const PromptSpec prompt{TextMode::NoText, true, true};
    const auto report =
        parse_page("<x_1><y_2><x_3><y_4><class_Table><x_5><y_6><x_7><y_8><class_Text>", prompt,
                   kDims);
    REQUIRE(report.blocks.size() == 2);
    CHECK(!report.blocks[0].text);
    CHECK(report.blocks[1].bbox == BBox{5, 6, 7, 8});
}

TEST_CASE("parse_page rejects invalid prompts and dims") {
    CHECK_THROWS_AS(parse_page("x", PromptSpec{TextMode::NoText, false, false}, kDims), Error);
    CHECK_THROWS_AS(parse_page("x", PromptSpec{TextMode::Plain, false, true}, kDims), Error);
    CHECK_THROWS_AS(parse_page("x", mip(), PageDims{0, 5}), Error);
}

TEST_CASE("serialize_page emits the grammar with no separators") {
    Page page{kDims, {}};
    page.blocks.push_back(Block{BBox{10, 20, 200, 40}, "Hi", "Title"});
    CHECK(serialize_page(page, mip()) == "<x_10><y_20>Hi<x_200><y_40><class_Title>");

    page.blocks.push_back(Block{BBox{1, 2, 3, 4}, "B", "Text"});
    CHECK(serialize_page(page, mip()) ==
          "<x_10><y_20>Hi<x_200><y_40><class_Title><x_1><y_2>B<x_3><y_4><class_Text>");
}

TEST_CASE("serialize_page of an empty page is empty") {
    CHECK(serialize_page(Page{kDims, {}}, mip()) == "");
}

TEST_CASE("serialize_page elides the class group") {
    const PromptSpec prompt{TextMode::Structured, true, false};
    Page page{kDims, {}};
    page.blocks.push_back(Block{BBox{1, 2, 3, 4}, "a", std::nullopt});
    page.blocks.push_back(Block{BBox{5, 6, 7, 8}, "b", std::nullopt});
    CHECK(serialize_page(page, prompt) == "<x_1><y_2>a<x_3><y_4><x_5><y_6>b<x_7><y_8>");
}

TEST_CASE("serialize_page rejects facet mismatches") {
    Page page{kDims, {}};
    page.blocks.push_back(Block{std::nullopt, "text only", std::nullopt});
    CHECK_THROWS_AS((void)serialize_page(page, mip()), Error);
}

TEST_CASE("vocab_extra_tokens follows the token arithmetic") {
    CHECK(vocab_extra_tokens({PageDims{1280, 1024}, 11}) == 2322);
    CHECK(vocab_extra_tokens({PageDims{1, 1}, 0}) == 9);
    CHECK(vocab_extra_tokens({PageDims{80, 64}, 11}) == 162);
}

TEST_CASE("enumerate_valid_prompts yields exactly the 8 valid combinations") {
    const auto prompts = enumerate_valid_prompts();
    CHECK(prompts.size() == 8);
    CHECK(std::count(prompts.begin(), prompts.end(), mip()) == 1);
    for (const PromptSpec& p : prompts) {
        CHECK(p.valid());
        CHECK((!p.classes || p.boxes));
    }
    // The 3 classes-without-boxes cases and the all-suppressed case are out.
    for (TextMode mode : {TextMode::Structured, TextMode::Plain, TextMode::NoText}) {
        CHECK(std::count(prompts.begin(), prompts.end(), PromptSpec{mode, false, true}) == 0);
    }
    CHECK(std::count(prompts.begin(), prompts.end(),
                     PromptSpec{TextMode::NoText, false, false}) == 0);
}

TEST_CASE("prompt tags round-trip") {
    for (const PromptSpec& p : enumerate_valid_prompts()) {
        const auto back = prompt_from_tag(prompt_tag(p));
        REQUIRE(back.has_value());
        CHECK(*back == p);
    }
    CHECK(prompt_tag(mip()) == "structured_text,bbox,classes");
    CHECK(!prompt_from_tag("no_text,no_bbox,no_classes"));
    CHECK(!prompt_from_tag("structured_text,no_bbox,classes"));
    CHECK(!prompt_from_tag("structured_text,bbox"));
    CHECK(!prompt_from_tag("bogus,bbox,classes"));
    CHECK(!prompt_from_tag("structured_text,bbox,classes,extra"));
}

TEST_CASE("round-trip: parse(serialize(p)) == p across all prompts") {
    std::mt19937 rng(20240811);
    const auto prompts = enumerate_valid_prompts();
    for (int iter = 0; iter < 400; ++iter) {
        const PromptSpec prompt = prompts[iter % prompts.size()];
        const Page page = generators::random_page(rng, prompt, kDims);
        const std::string raw = serialize_page(page, prompt);
        const ParseReport report = parse_page(raw, prompt, kDims);
        CHECK(report.rejected.empty());
        REQUIRE(report.blocks.size() == page.blocks.size());
        CHECK(Page{kDims, report.blocks} == page);
    }
}

TEST_CASE("elision consistency: reduced prompts keep the matching facets") {
    std::mt19937 rng(7);
    const PromptSpec reduced{TextMode::Structured, true, false};
    for (int iter = 0; iter < 50; ++iter) {
        Page page = generators::random_page(rng, mip(), kDims);
        Page stripped = page;
        for (Block& b : stripped.blocks) b.class_name.reset();
        const auto report = parse_page(serialize_page(stripped, reduced), reduced, kDims);
        REQUIRE(report.blocks.size() == page.blocks.size());
        for (std::size_t i = 0; i < report.blocks.size(); ++i) {
            CHECK(report.blocks[i].bbox == page.blocks[i].bbox);
            CHECK(report.blocks[i].text == page.blocks[i].text);
            CHECK(!report.blocks[i].class_name);
        }
    }
}
