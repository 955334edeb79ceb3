#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "doclair/cli.hpp"
#include "doclair/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"doclair - post-processing and evaluation toolkit for document OCR output"};
    app.set_version_flag("--version", doclair::kVersion);
    app.require_subcommand(1);

    namespace cli = doclair::cli;

    cli::ParseOptions parse_opt;
    CLI::App* parse_cmd = app.add_subcommand("parse", "Parse raw pages into block records");
    parse_cmd->add_option("--input", parse_opt.input, "Input records (JSONL)")->required();
    parse_cmd->add_option("--output", parse_opt.output, "Output block records (JSONL)")->required();
    parse_cmd->add_option("--prompt", parse_opt.prompt,
                          "Prompt tag override, e.g. structured_text,bbox,classes");
    parse_cmd->add_option("--width", parse_opt.width, "Grid width override");
    parse_cmd->add_option("--height", parse_opt.height, "Grid height override");
    parse_cmd->add_flag("--strict", parse_opt.strict, "Exit 2 if any record fails to parse");

    cli::SanitizeOptions san_opt;
    CLI::App* san_cmd = app.add_subcommand("sanitize", "Filter hallucinations and invalid boxes");
    san_cmd->add_option("--input", san_opt.input, "Input block records (JSONL)")->required();
    san_cmd->add_option("--output", san_opt.output, "Cleaned block records (JSONL)")->required();
    san_cmd->add_option("--min-unit", san_opt.min_unit, "Minimum repetition unit length (chars)");
    san_cmd->add_option("--min-repeats", san_opt.min_repeats, "Minimum consecutive repeats");
    san_cmd->add_flag("--no-repetition-filter", san_opt.no_repetition_filter,
                      "Disable repetition-loop truncation");

    cli::EvalTextOptions text_opt;
    CLI::App* text_cmd = app.add_subcommand("eval-text", "Text accuracy metrics");
    text_cmd->add_option("--pred", text_opt.pred, "Prediction records (JSONL)")->required();
    text_cmd->add_option("--gt", text_opt.gt, "Ground-truth records (JSONL)")->required();
    text_cmd->add_option("--out", text_opt.out, "Report directory")->required();
    text_cmd->add_flag("--micro", text_opt.micro, "Corpus-concatenated instead of per-page mean");
    text_cmd->add_flag("--keep-case", text_opt.keep_case, "Skip lowercasing in normalization");
    text_cmd->add_option("--threads", text_opt.threads, "Worker threads (0 = auto)");

    cli::EvalLayoutOptions layout_opt;
    CLI::App* layout_cmd = app.add_subcommand("eval-layout", "Layout detection metrics");
    layout_cmd->add_option("--pred", layout_opt.pred, "Prediction records (JSONL)")->required();
    layout_cmd->add_option("--gt", layout_opt.gt, "Ground-truth records (JSONL)")->required();
    layout_cmd->add_option("--out", layout_opt.out, "Report directory")->required();
    layout_cmd->add_option("--thresholds", layout_opt.thresholds,
                           "IoU thresholds (default 0.50..0.95)");
    layout_cmd->add_flag("--ap", layout_opt.ap, "Also compute per-class COCO-style AP");
    layout_cmd->add_option("--recall-bins", layout_opt.recall_bins, "101 or 1001");
    layout_cmd->add_option("--max-dets", layout_opt.max_dets,
                           "Per-page detection cap for AP (0 = unlimited)");
    layout_cmd->add_option("--threads", layout_opt.threads, "Worker threads (0 = auto)");

    cli::JoinOptions join_opt;
    CLI::App* join_cmd = app.add_subcommand("join", "Join pages into clean documents");
    join_cmd->add_option("--input", join_opt.input, "Input block records (JSONL)")->required();
    join_cmd->add_option("--out-text", join_opt.out_text, "Output text directory")->required();
    join_cmd->add_option("--out-blocks", join_opt.out_blocks, "Structured block listing (JSONL)")
        ->required();
    join_cmd->add_option("--skip-headings-file", join_opt.skip_headings_file,
                         "Replace the default skip-heading list");
    join_cmd->add_flag("--keep-headers", join_opt.keep_headers, "Keep Page-header blocks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    try {
        if (parse_cmd->parsed()) return cli::cmd_parse(parse_opt);
        if (san_cmd->parsed()) return cli::cmd_sanitize(san_opt);
        if (text_cmd->parsed()) return cli::cmd_eval_text(text_opt);
        if (layout_cmd->parsed()) return cli::cmd_eval_layout(layout_opt);
        if (join_cmd->parsed()) return cli::cmd_join(join_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitDataFailure;
    }
    return cli::kExitUsage;
}
