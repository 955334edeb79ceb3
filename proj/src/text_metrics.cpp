#include "doclair/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace doclair::text {

namespace {

bool is_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Unit-cost Levenshtein with a two-row DP over arbitrary comparable items.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;

    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::unordered_map<std::string_view, std::size_t> token_counts(const NormalizedText& t) {
    std::unordered_map<std::string_view, std::size_t> counts;
    for (const std::string& tok : t.tokens) ++counts[tok];
    return counts;
}

double harmonic(double p, double r) {
    const double sum = p + r;
    if (sum <= 0.0) return 0.0;
    return 2.0 * p * r / sum;
}

}  // namespace

NormalizedText normalize(std::string_view textIn, bool lowercase) {
    NormalizedText out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        if (!out.raw_normalized.empty()) out.raw_normalized.push_back(' ');
        out.raw_normalized += word;
        out.tokens.push_back(std::move(word));
        word.clear();
    };
    for (unsigned char c : textIn) {
        if (is_alnum(c)) {
            word.push_back(lowercase ? static_cast<char>(std::tolower(c))
                                     : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

double word_error_rate(const NormalizedText& ref, const NormalizedText& hyp) {
    if (ref.tokens.empty()) {
        return hyp.tokens.empty() ? 0.0 : static_cast<double>(hyp.tokens.size());
    }
    const std::size_t dist = levenshtein(ref.tokens, hyp.tokens);
    return static_cast<double>(dist) / static_cast<double>(ref.tokens.size());
}

double char_edit_distance(const NormalizedText& ref, const NormalizedText& hyp) {
    const std::size_t dist = levenshtein(ref.raw_normalized, hyp.raw_normalized);
    const std::size_t den = std::max<std::size_t>({ref.raw_normalized.size(),
                                                   hyp.raw_normalized.size(), 1});
    return static_cast<double>(dist) / static_cast<double>(den);
}

PRF word_prf(const NormalizedText& ref, const NormalizedText& hyp) {
    const auto ref_counts = token_counts(ref);
    const auto hyp_counts = token_counts(hyp);
    std::size_t common = 0;
    for (const auto& [tok, n] : hyp_counts) {
        (void)n;
        if (ref_counts.contains(tok)) ++common;
    }
    PRF out;
    out.precision = hyp_counts.empty() ? 0.0
                                       : static_cast<double>(common) /
                                             static_cast<double>(hyp_counts.size());
    out.recall = ref_counts.empty() ? 0.0
                                    : static_cast<double>(common) /
                                          static_cast<double>(ref_counts.size());
    out.f1 = harmonic(out.precision, out.recall);
    return out;
}

double counting_f1(const NormalizedText& ref, const NormalizedText& hyp) {
    const auto ref_counts = token_counts(ref);
    const auto hyp_counts = token_counts(hyp);
    std::size_t tp = 0;
    for (const auto& [tok, n] : hyp_counts) {
        const auto it = ref_counts.find(tok);
        if (it != ref_counts.end()) tp += std::min(n, it->second);
    }
    if (hyp.tokens.empty() || ref.tokens.empty()) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(hyp.tokens.size());
    const double recall = static_cast<double>(tp) / static_cast<double>(ref.tokens.size());
    return harmonic(precision, recall);
}

double bleu(const NormalizedText& ref, const NormalizedText& hyp) {
    const std::size_t hyp_len = hyp.tokens.size();
    const std::size_t ref_len = ref.tokens.size();
    if (hyp_len == 0) return 0.0;

    const std::size_t max_order = std::min<std::size_t>(4, hyp_len);
    constexpr double kFloor = 1e-9;

    double log_sum = 0.0;
    for (std::size_t order = 1; order <= max_order; ++order) {
        // Counts keyed on the joined n-gram; '\x1f' cannot appear in tokens.
        std::unordered_map<std::string, std::size_t> ref_grams;
        auto gram_at = [order](const std::vector<std::string>& toks, std::size_t i) {
            std::string key = toks[i];
            for (std::size_t k = 1; k < order; ++k) {
                key.push_back('\x1f');
                key += toks[i + k];
            }
            return key;
        };
        if (ref_len >= order) {
            for (std::size_t i = 0; i + order <= ref_len; ++i) ++ref_grams[gram_at(ref.tokens, i)];
        }
        std::size_t matched = 0;
        const std::size_t total = hyp_len - order + 1;
        std::unordered_map<std::string, std::size_t> used;
        for (std::size_t i = 0; i + order <= hyp_len; ++i) {
            const std::string key = gram_at(hyp.tokens, i);
            const auto it = ref_grams.find(key);
            if (it != ref_grams.end() && used[key] < it->second) {
                ++used[key];
                ++matched;
            }
        }
        const double p = total == 0 ? 0.0
                                    : static_cast<double>(matched) / static_cast<double>(total);
        log_sum += std::log(std::max(p, kFloor)) / static_cast<double>(max_order);
    }

    double brevity = 1.0;
    if (hyp_len < ref_len) {
        brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    }
    return brevity * std::exp(log_sum);
}

double meteor(const NormalizedText& ref, const NormalizedText& hyp) {
    const std::size_t hyp_len = hyp.tokens.size();
    const std::size_t ref_len = ref.tokens.size();
    if (hyp_len == 0 || ref_len == 0) return 0.0;

    // Total matches are fixed by the per-word occurrence minima.
    const auto ref_counts = token_counts(ref);
    const auto hyp_counts = token_counts(hyp);
    std::size_t matches = 0;
    for (const auto& [tok, n] : hyp_counts) {
        const auto it = ref_counts.find(tok);
        if (it != ref_counts.end()) matches += std::min(n, it->second);
    }
    if (matches == 0) return 0.0;

    // Chunks: repeatedly take the longest common run of unused tokens
    // (ties: leftmost in hyp, then in ref). Once only single-token runs
    // remain, each remaining match is its own chunk.
    std::vector<bool> hyp_used(hyp_len, false), ref_used(ref_len, false);
    std::size_t chunks = 0;
    std::size_t remaining = matches;
    while (remaining > 0) {
        std::size_t best_len = 0, best_h = 0, best_r = 0;
        for (std::size_t h = 0; h < hyp_len; ++h) {
            if (hyp_used[h]) continue;
            for (std::size_t r = 0; r < ref_len; ++r) {
                if (ref_used[r] || ref.tokens[r] != hyp.tokens[h]) continue;
                std::size_t len = 0;
                while (h + len < hyp_len && r + len < ref_len && !hyp_used[h + len] &&
                       !ref_used[r + len] && hyp.tokens[h + len] == ref.tokens[r + len]) {
                    ++len;
                }
                if (len > best_len) {
                    best_len = len;
                    best_h = h;
                    best_r = r;
                }
            }
        }
        if (best_len <= 1) {
            // Count the rest as singleton chunks without further scanning.
            std::unordered_map<std::string_view, std::size_t> rc, hc;
            for (std::size_t r = 0; r < ref_len; ++r) {
                if (!ref_used[r]) ++rc[ref.tokens[r]];
            }
            for (std::size_t h = 0; h < hyp_len; ++h) {
                if (!hyp_used[h]) ++hc[hyp.tokens[h]];
            }
            for (const auto& [tok, n] : hc) {
                const auto it = rc.find(tok);
                if (it != rc.end()) chunks += std::min(n, it->second);
            }
            break;
        }
        for (std::size_t k = 0; k < best_len; ++k) {
            hyp_used[best_h + k] = true;
            ref_used[best_r + k] = true;
        }
        remaining -= best_len;
        ++chunks;
    }

    const double m = static_cast<double>(matches);
    const double precision = m / static_cast<double>(hyp_len);
    const double recall = m / static_cast<double>(ref_len);
    const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

TextScores score_pair(std::string_view ref_raw, std::string_view hyp_raw, bool lowercase) {
    const NormalizedText ref = normalize(ref_raw, lowercase);
    const NormalizedText hyp = normalize(hyp_raw, lowercase);
    TextScores scores;
    scores.wer = word_error_rate(ref, hyp);
    scores.edit_distance = char_edit_distance(ref, hyp);
    const PRF prf = word_prf(ref, hyp);
    scores.precision = prf.precision;
    scores.recall = prf.recall;
    scores.f1 = prf.f1;
    scores.counting_f1 = counting_f1(ref, hyp);
    scores.bleu = bleu(ref, hyp);
    scores.meteor = meteor(ref, hyp);
    return scores;
}

}  // namespace doclair::text
