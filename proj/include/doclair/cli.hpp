#pragma once

#include <optional>
#include <string>
#include <vector>

namespace doclair::cli {

// Exit code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataFailure = 2;

// Effective worker count: explicit flag value if positive, else the
// DOCLAIR_THREADS environment variable, else hardware concurrency.
int resolve_threads(int flag_value);

struct ParseOptions {
    std::string input;
    std::string output;
    std::string prompt;  // optional override; empty = use each record's tag
    int width = 0;       // 0 = use record dims
    int height = 0;
    bool strict = false;
};
int cmd_parse(const ParseOptions& opt);

struct SanitizeOptions {
    std::string input;
    std::string output;
    std::size_t min_unit = 12;
    std::size_t min_repeats = 4;
    bool no_repetition_filter = false;
};
int cmd_sanitize(const SanitizeOptions& opt);

struct EvalTextOptions {
    std::string pred;
    std::string gt;
    std::string out;
    bool micro = false;
    bool keep_case = false;
    int threads = 0;
};
int cmd_eval_text(const EvalTextOptions& opt);

struct EvalLayoutOptions {
    std::string pred;
    std::string gt;
    std::string out;
    std::vector<double> thresholds;  // empty = the 0.50..0.95 ladder
    bool ap = false;
    int recall_bins = 101;
    int max_dets = 100;  // 0 disables the cap
    int threads = 0;
};
int cmd_eval_layout(const EvalLayoutOptions& opt);

struct JoinOptions {
    std::string input;
    std::string out_text;    // directory; one <doc_id>.txt per document
    std::string out_blocks;  // structured block listing (JSONL)
    std::string skip_headings_file;  // optional; replaces the default list
    bool keep_headers = false;
};
int cmd_join(const JoinOptions& opt);

}  // namespace doclair::cli
