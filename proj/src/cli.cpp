#include "doclair/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "doclair/corpus_io.hpp"
#include "doclair/format.hpp"
#include "doclair/layout_metrics.hpp"
#include "doclair/page_join.hpp"
#include "doclair/reading_order.hpp"
#include "doclair/sanitize.hpp"
#include "doclair/text_metrics.hpp"
#include "doclair/version.hpp"
#include "json.hpp"

namespace doclair::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Runs fn(0..n-1) on a worker pool; every result slot is owned by its
// index, so the schedule cannot influence the output.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(threads, n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

std::vector<io::LineError> warn_and_collect(const std::string& path,
                                            const std::vector<io::LineError>& errors) {
    for (const io::LineError& err : errors) {
        std::cerr << path << ":" << err.line_no << ": " << err.message << "\n";
    }
    return errors;
}

using PageKey = std::pair<std::string, std::int64_t>;

std::map<PageKey, const io::PageRecord*> key_records(const std::vector<io::PageRecord>& records) {
    std::map<PageKey, const io::PageRecord*> map;
    for (const io::PageRecord& rec : records) {
        map.emplace(PageKey{rec.doc_id, rec.page_index}, &rec);
    }
    return map;
}

// The page's text: block texts joined by newlines, or the raw payload
// (parsed first when it carries boxes).
std::string page_text(const io::PageRecord& rec) {
    if (rec.is_raw()) {
        const PromptSpec prompt = rec.prompt.value_or(mip());
        if (!prompt.boxes) return *rec.raw;
        const auto report = format::parse_page(*rec.raw, prompt, rec.dims);
        std::string out;
        for (const Block& block : report.blocks) {
            if (!block.text) continue;
            if (!out.empty()) out.push_back('\n');
            out += *block.text;
        }
        return out;
    }
    std::string out;
    for (const io::ScoredBlock& sb : rec.blocks) {
        if (!sb.block.text) continue;
        if (!out.empty()) out.push_back('\n');
        out += *sb.block.text;
    }
    return out;
}

format::ParseReport report_from_record(const io::PageRecord& rec) {
    if (rec.is_raw()) {
        return format::parse_page(*rec.raw, rec.prompt.value_or(mip()), rec.dims);
    }
    format::ParseReport report;
    report.dims = rec.dims;
    report.prompt = mip();
    for (const io::ScoredBlock& sb : rec.blocks) report.blocks.push_back(sb.block);
    return report;
}

std::string safe_filename(const std::string& doc_id) {
    std::string out;
    out.reserve(doc_id.size());
    for (char c : doc_id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    if (out.empty()) out = "document";
    return out;
}

int data_failure(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitDataFailure;
}

}  // namespace

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("DOCLAIR_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_parse(const ParseOptions& opt) {
    std::optional<PromptSpec> override_prompt;
    if (!opt.prompt.empty()) {
        override_prompt = format::prompt_from_tag(opt.prompt);
        if (!override_prompt) {
            std::cerr << "error: \"" << opt.prompt << "\" is not a valid prompt combination\n";
            return kExitUsage;
        }
    }
    if ((opt.width > 0) != (opt.height > 0)) {
        std::cerr << "error: --width and --height must be given together\n";
        return kExitUsage;
    }

    std::vector<io::LineError> errors;
    std::vector<io::PageRecord> records;
    try {
        records = io::read_records(opt.input, &errors);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    warn_and_collect(opt.input, errors);

    std::size_t failed = errors.size();
    std::size_t parsed = 0;
    std::vector<io::PageRecord> out_records;
    out_records.reserve(records.size());
    for (const io::PageRecord& rec : records) {
        if (!rec.is_raw()) {
            out_records.push_back(rec);  // already block-form
            continue;
        }
        io::PageRecord out = rec;
        out.raw.reset();
        out.prompt.reset();
        out.has_blocks = true;
        const PromptSpec prompt = override_prompt.value_or(rec.prompt.value_or(mip()));
        const PageDims dims = opt.width > 0 ? PageDims{opt.width, opt.height} : rec.dims;
        const auto report = format::parse_page(*rec.raw, prompt, dims);
        for (const Block& block : report.blocks) out.blocks.push_back({block, std::nullopt});
        if (!report.rejected.empty()) {
            ++failed;
            for (const auto& span : report.rejected) {
                std::cerr << rec.doc_id << "/" << rec.page_index << ": rejected bytes ["
                          << span.begin << ", " << span.end << "): "
                          << format::to_string(span.reason) << "\n";
            }
        } else {
            ++parsed;
        }
        out_records.push_back(std::move(out));
    }

    try {
        io::write_records(opt.output, out_records);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    std::cerr << "parse: " << out_records.size() << " records, " << parsed << " clean, "
              << failed << " with failures\n";
    if (opt.strict && failed > 0) return kExitDataFailure;
    return kExitOk;
}

int cmd_sanitize(const SanitizeOptions& opt) {
    sanitize::SanitizeConfig config;
    config.repetition_min_unit_chars = opt.min_unit;
    config.repetition_min_repeats = opt.min_repeats;
    config.enable_repetition_filter = !opt.no_repetition_filter;
    if (config.repetition_min_repeats < 2 || config.repetition_min_unit_chars < 1) {
        std::cerr << "error: --min-repeats must be >= 2 and --min-unit >= 1\n";
        return kExitUsage;
    }

    std::vector<io::LineError> errors;
    std::vector<io::PageRecord> records;
    try {
        records = io::read_records(opt.input, &errors);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    warn_and_collect(opt.input, errors);

    std::ofstream audit_out(opt.output + ".audit.jsonl", std::ios::binary);
    if (!audit_out) return data_failure("cannot write " + opt.output + ".audit.jsonl");

    std::array<std::size_t, 5> reason_counts{};
    std::vector<io::PageRecord> out_records;
    out_records.reserve(records.size());
    for (const io::PageRecord& rec : records) {
        const auto report = report_from_record(rec);
        const auto result = sanitize::sanitize_page(report, rec.dims, config);

        io::PageRecord out = rec;
        out.raw.reset();
        out.prompt.reset();
        out.has_blocks = true;
        out.blocks.clear();
        for (std::size_t k = 0; k < result.page.blocks.size(); ++k) {
            io::ScoredBlock sb;
            sb.block = result.page.blocks[k];
            const std::size_t src = result.accepted_indices[k];
            if (!rec.is_raw() && src < rec.blocks.size()) sb.score = rec.blocks[src].score;
            out.blocks.push_back(std::move(sb));
        }
        out_records.push_back(std::move(out));

        for (const auto& entry : result.audit) {
            ++reason_counts[static_cast<std::size_t>(entry.reason)];
            ordered_json line = ordered_json::object();
            line["doc_id"] = rec.doc_id;
            line["page_index"] = rec.page_index;
            line["reason"] = std::string(sanitize::to_string(entry.reason));
            line["detail"] = entry.detail;
            audit_out << line.dump() << '\n';
        }
    }

    try {
        io::write_records(opt.output, out_records);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    std::cerr << "sanitize: " << records.size() << " pages;";
    for (std::size_t i = 0; i < reason_counts.size(); ++i) {
        std::cerr << " " << sanitize::to_string(static_cast<sanitize::RejectionReason>(i)) << "="
                  << reason_counts[i];
    }
    std::cerr << "\n";
    return kExitOk;
}

int cmd_eval_text(const EvalTextOptions& opt) {
    std::vector<io::LineError> pred_errors, gt_errors;
    std::vector<io::PageRecord> pred_records, gt_records;
    try {
        pred_records = io::read_records(opt.pred, &pred_errors);
        gt_records = io::read_records(opt.gt, &gt_errors);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    warn_and_collect(opt.pred, pred_errors);
    warn_and_collect(opt.gt, gt_errors);

    const auto pred_map = key_records(pred_records);
    const auto gt_map = key_records(gt_records);

    std::set<PageKey> keys;
    std::size_t overlap = 0;
    for (const auto& [key, rec] : pred_map) keys.insert(key);
    for (const auto& [key, rec] : gt_map) keys.insert(key);
    for (const PageKey& key : keys) {
        if (pred_map.contains(key) && gt_map.contains(key)) ++overlap;
    }
    if (overlap == 0) return data_failure("NoOverlap: no (doc_id, page_index) present in both files");

    struct Job {
        PageKey key;
        std::string ref, hyp;
        std::string missing;
    };
    std::vector<Job> jobs;
    jobs.reserve(keys.size());
    for (const PageKey& key : keys) {
        Job job;
        job.key = key;
        const auto p = pred_map.find(key);
        const auto g = gt_map.find(key);
        if (p != pred_map.end()) job.hyp = page_text(*p->second);
        if (g != gt_map.end()) job.ref = page_text(*g->second);
        if (p == pred_map.end()) job.missing = "pred";
        if (g == gt_map.end()) job.missing = "gt";
        jobs.push_back(std::move(job));
    }

    std::vector<text::TextScores> scores(jobs.size());
    parallel_for(jobs.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        scores[i] = text::score_pair(jobs[i].ref, jobs[i].hyp, !opt.keep_case);
    });

    io::TextSection section;
    section.micro = opt.micro;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        io::TextRow row;
        row.doc_id = jobs[i].key.first;
        row.page_index = jobs[i].key.second;
        row.scores = scores[i];
        row.missing_side = jobs[i].missing;
        if (row.missing_side == "pred") ++section.pages_missing_pred;
        if (row.missing_side == "gt") ++section.pages_missing_gt;
        section.per_doc.push_back(std::move(row));
    }
    section.pages_scored = jobs.size();

    if (opt.micro) {
        std::string all_ref, all_hyp;
        for (const Job& job : jobs) {
            if (!all_ref.empty()) all_ref.push_back('\n');
            if (!all_hyp.empty()) all_hyp.push_back('\n');
            all_ref += job.ref;
            all_hyp += job.hyp;
        }
        section.corpus_mean = text::score_pair(all_ref, all_hyp, !opt.keep_case);
    } else {
        text::TextScores mean;
        for (const text::TextScores& s : scores) {
            mean.wer += s.wer;
            mean.edit_distance += s.edit_distance;
            mean.f1 += s.f1;
            mean.precision += s.precision;
            mean.recall += s.recall;
            mean.counting_f1 += s.counting_f1;
            mean.bleu += s.bleu;
            mean.meteor += s.meteor;
        }
        const double n = scores.empty() ? 1.0 : static_cast<double>(scores.size());
        mean.wer /= n;
        mean.edit_distance /= n;
        mean.f1 /= n;
        mean.precision /= n;
        mean.recall /= n;
        mean.counting_f1 /= n;
        mean.bleu /= n;
        mean.meteor /= n;
        section.corpus_mean = mean;
    }

    io::EvalReport report;
    report.version = kVersion;
    report.config = {
        {"command", "eval-text"}, {"pred", opt.pred},           {"gt", opt.gt},
        {"micro", opt.micro ? "true" : "false"},
        {"keep_case", opt.keep_case ? "true" : "false"},
    };
    report.text = std::move(section);
    try {
        io::write_report(report, opt.out);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    return kExitOk;
}

int cmd_eval_layout(const EvalLayoutOptions& opt) {
    if (opt.recall_bins != 101 && opt.recall_bins != 1001) {
        std::cerr << "error: --recall-bins must be 101 or 1001\n";
        return kExitUsage;
    }
    std::vector<double> thresholds =
        opt.thresholds.empty() ? layout::default_iou_thresholds() : opt.thresholds;
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) {
            std::cerr << "error: IoU thresholds must lie in (0, 1)\n";
            return kExitUsage;
        }
    }

    std::vector<io::LineError> pred_errors, gt_errors;
    std::vector<io::PageRecord> pred_records, gt_records;
    try {
        pred_records = io::read_records(opt.pred, &pred_errors);
        gt_records = io::read_records(opt.gt, &gt_errors);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    warn_and_collect(opt.pred, pred_errors);
    warn_and_collect(opt.gt, gt_errors);

    const auto pred_map = key_records(pred_records);
    const auto gt_map = key_records(gt_records);
    std::set<PageKey> keys;
    for (const auto& [key, rec] : pred_map) keys.insert(key);
    for (const auto& [key, rec] : gt_map) keys.insert(key);

    std::atomic<std::size_t> skipped_blocks{0};
    auto to_labeled = [&skipped_blocks](const io::PageRecord* rec) {
        std::vector<layout::LabeledBox> boxes;
        if (!rec) return boxes;
        for (const io::ScoredBlock& sb : rec->blocks) {
            const auto cls = sb.block.semantic_class();
            if (!sb.block.bbox || !cls) {
                skipped_blocks.fetch_add(1);
                continue;
            }
            boxes.push_back({*sb.block.bbox, *cls, sb.score});
        }
        return boxes;
    };

    struct PageJob {
        const io::PageRecord* pred = nullptr;
        const io::PageRecord* gt = nullptr;
    };
    std::vector<PageJob> jobs;
    jobs.reserve(keys.size());
    for (const PageKey& key : keys) {
        PageJob job;
        const auto p = pred_map.find(key);
        const auto g = gt_map.find(key);
        if (p != pred_map.end()) job.pred = p->second;
        if (g != gt_map.end()) job.gt = g->second;
        jobs.push_back(job);
    }

    std::vector<layout::ThresholdedConfusion> partials(jobs.size());
    std::vector<layout::PageBoxes> ap_pages(jobs.size());
    std::atomic<bool> missing_score{false};
    parallel_for(jobs.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        auto targets = to_labeled(jobs[i].gt);
        auto preds = to_labeled(jobs[i].pred);
        partials[i] = layout::confusion_averaged(targets, preds, thresholds);
        if (opt.ap) {
            for (const auto& pred : preds) {
                if (!pred.score) missing_score.store(true);
            }
            // maxDets cap: keep the highest-scored boxes per page.
            if (opt.max_dets > 0 && preds.size() > static_cast<std::size_t>(opt.max_dets)) {
                std::stable_sort(preds.begin(), preds.end(),
                                 [](const layout::LabeledBox& a, const layout::LabeledBox& b) {
                                     const double sa = a.score.value_or(0.0);
                                     const double sb = b.score.value_or(0.0);
                                     if (sa != sb) return sa > sb;
                                     return a.bbox < b.bbox;
                                 });
                preds.resize(static_cast<std::size_t>(opt.max_dets));
            }
            ap_pages[i] = layout::PageBoxes{std::move(targets), std::move(preds)};
        }
    });
    if (opt.ap && missing_score.load()) {
        return data_failure("MissingScore: --ap requires scored predictions");
    }

    io::LayoutSection section;
    section.pages = jobs.size();
    for (const auto& partial : partials) section.confusion.merge(partial);
    if (section.confusion.per_threshold.empty()) {
        section.confusion.thresholds = thresholds;
        section.confusion.per_threshold.resize(thresholds.size());
    }
    section.averaged = layout::mean_metrics_over_thresholds(section.confusion.per_threshold);
    if (opt.ap) {
        section.ap = layout::coco_ap(ap_pages, thresholds.front(), opt.recall_bins);
    }
    section.skipped_blocks = skipped_blocks.load();

    io::EvalReport report;
    report.version = kVersion;
    std::string thr_echo;
    for (double t : thresholds) {
        if (!thr_echo.empty()) thr_echo += ",";
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", t);
        thr_echo += buf;
    }
    report.config = {
        {"command", "eval-layout"},
        {"pred", opt.pred},
        {"gt", opt.gt},
        {"thresholds", thr_echo},
        {"ap", opt.ap ? "true" : "false"},
        {"recall_bins", std::to_string(opt.recall_bins)},
        {"max_dets", std::to_string(opt.max_dets)},
    };
    report.layout = std::move(section);
    try {
        io::write_report(report, opt.out);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    return kExitOk;
}

int cmd_join(const JoinOptions& opt) {
    join::JoinConfig config;
    if (opt.keep_headers) config.drop_classes.erase(SemanticClass::PageHeader);
    if (!opt.skip_headings_file.empty()) {
        std::ifstream in(opt.skip_headings_file);
        if (!in) return data_failure("cannot open " + opt.skip_headings_file);
        config.skip_headings.clear();
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) config.skip_headings.push_back(line);
        }
    }

    std::vector<io::LineError> errors;
    std::vector<io::PageRecord> records;
    try {
        records = io::read_records(opt.input, &errors);
    } catch (const Error& e) {
        return data_failure(e.what());
    }
    warn_and_collect(opt.input, errors);

    std::map<std::string, std::vector<const io::PageRecord*>> docs;
    for (const io::PageRecord& rec : records) docs[rec.doc_id].push_back(&rec);

    std::error_code ec;
    fs::create_directories(opt.out_text, ec);
    if (ec) return data_failure("cannot create " + opt.out_text);
    std::ofstream blocks_out(opt.out_blocks, std::ios::binary);
    if (!blocks_out) return data_failure("cannot write " + opt.out_blocks);

    for (auto& [doc_id, doc_records] : docs) {
        std::sort(doc_records.begin(), doc_records.end(),
                  [](const io::PageRecord* a, const io::PageRecord* b) {
                      return a->page_index < b->page_index;
                  });
        for (std::size_t i = 1; i < doc_records.size(); ++i) {
            if (doc_records[i]->page_index != doc_records[i - 1]->page_index + 1) {
                std::cerr << "warning: " << doc_id << ": gap between page "
                          << doc_records[i - 1]->page_index << " and "
                          << doc_records[i]->page_index << "\n";
            }
        }

        std::vector<Page> pages;
        pages.reserve(doc_records.size());
        for (const io::PageRecord* rec : doc_records) {
            const auto report = report_from_record(*rec);
            auto cleaned = sanitize::sanitize_page(report, rec->dims);
            pages.push_back(reading_order::canonicalize(cleaned.page).page);
        }

        const join::JoinedDocument joined = join::join_document(pages, config);
        const std::string rendered = join::render_plain_text(joined);

        std::ofstream text_out(fs::path(opt.out_text) / (safe_filename(doc_id) + ".txt"),
                               std::ios::binary);
        if (!text_out) return data_failure("cannot write text output for " + doc_id);
        text_out << rendered;

        for (std::size_t i = 0; i < joined.flow.size(); ++i) {
            ordered_json line = ordered_json::object();
            line["doc_id"] = doc_id;
            line["kind"] = "paragraph";
            line["index"] = i;
            line["text"] = joined.flow[i];
            blocks_out << line.dump() << '\n';
        }
        for (const join::FloatItem& item : joined.floats) {
            ordered_json line = ordered_json::object();
            line["doc_id"] = doc_id;
            line["kind"] = item.object
                               ? (item.object->semantic_class() == SemanticClass::Table
                                      ? "table"
                                      : "figure")
                               : "caption";
            line["insert_at"] = item.insert_at;
            if (item.object && item.object->text) line["text"] = *item.object->text;
            if (item.caption && item.caption->text) {
                line["caption"] = join::strip_markdown(*item.caption->text);
            }
            blocks_out << line.dump() << '\n';
        }

        std::size_t tokens = 0;
        bool in_token = false;
        for (char c : rendered) {
            const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
            if (!space && !in_token) ++tokens;
            in_token = !space;
        }
        std::cout << doc_id << "\t" << tokens << "\n";
    }
    return kExitOk;
}

}  // namespace doclair::cli
