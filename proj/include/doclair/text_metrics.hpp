#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace doclair::text {

// Normalization output: lowercase alphanumeric words and the same content
// as one single-spaced string.
struct NormalizedText {
    std::vector<std::string> tokens;
    std::string raw_normalized;

    bool operator==(const NormalizedText&) const = default;
};

// Replaces every non-alphanumeric character with a space, collapses
// whitespace runs, strips the ends and (by default) lowercases.
NormalizedText normalize(std::string_view text, bool lowercase = true);

// Word-level Levenshtein distance divided by the reference length.
// Empty reference: 0 if the hypothesis is empty too, else |hyp| tokens.
double word_error_rate(const NormalizedText& ref, const NormalizedText& hyp);

// Character-level Levenshtein on the normalized strings, divided by
// max(|ref|, |hyp|, 1).
double char_edit_distance(const NormalizedText& ref, const NormalizedText& hyp);

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set-based word precision/recall/F1 over unique tokens.
PRF word_prf(const NormalizedText& ref, const NormalizedText& hyp);

// F1 over occurrence-indexed token multisets: the k-th occurrence of a
// word is its own element, so missing repeats of frequent words count.
double counting_f1(const NormalizedText& ref, const NormalizedText& hyp);

// Document-level BLEU-4 with uniform weights, brevity penalty, and an
// epsilon floor of 1e-9 on zero n-gram precisions. Hypotheses shorter
// than 4 tokens use only the available n-gram orders.
double bleu(const NormalizedText& ref, const NormalizedText& hyp);

// Exact-match unigram METEOR: maximal one-to-one token matching, chunks
// minimized greedily (longest common run first), Fmean = 10PR/(R+9P),
// penalty 0.5*(chunks/m)^3.
double meteor(const NormalizedText& ref, const NormalizedText& hyp);

struct TextScores {
    double wer = 0.0;
    double edit_distance = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double counting_f1 = 0.0;
    double bleu = 0.0;
    double meteor = 0.0;
};

// Normalizes both sides and computes the full metric row.
TextScores score_pair(std::string_view ref_raw, std::string_view hyp_raw,
                      bool lowercase = true);

}  // namespace doclair::text
