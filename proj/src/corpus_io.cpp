#include "doclair/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doclair/format.hpp"
#include "doclair/version.hpp"
#include "json.hpp"

namespace doclair::io {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

ordered_json block_to_json(const ScoredBlock& sb) {
    ordered_json j = ordered_json::object();
    if (sb.block.bbox) {
        const BBox& b = *sb.block.bbox;
        j["bbox"] = {b.x1, b.y1, b.x2, b.y2};
    }
    if (sb.block.class_name) j["class"] = *sb.block.class_name;
    if (sb.block.text) j["text"] = *sb.block.text;
    if (sb.score) j["score"] = *sb.score;
    return j;
}

ScoredBlock block_from_json(const nlohmann::json& j) {
    ScoredBlock sb;
    if (j.contains("bbox")) {
        const auto& arr = j.at("bbox");
        if (!arr.is_array() || arr.size() != 4) {
            throw std::runtime_error("bbox must be an array of four integers");
        }
        sb.block.bbox = BBox{arr.at(0).get<int>(), arr.at(1).get<int>(), arr.at(2).get<int>(),
                             arr.at(3).get<int>()};
    }
    if (j.contains("class")) sb.block.class_name = j.at("class").get<std::string>();
    if (j.contains("text")) sb.block.text = j.at("text").get<std::string>();
    if (j.contains("score")) {
        const double s = j.at("score").get<double>();
        if (!(s >= 0.0 && s <= 1.0)) throw std::runtime_error("score must lie in [0, 1]");
        sb.score = s;
    }
    return sb;
}

PageRecord record_from_json(const nlohmann::json& j) {
    PageRecord rec;
    rec.doc_id = j.at("doc_id").get<std::string>();
    rec.page_index = j.at("page_index").get<std::int64_t>();
    if (rec.page_index < 0) throw std::runtime_error("page_index must be non-negative");
    rec.dims.width = j.at("width").get<int>();
    rec.dims.height = j.at("height").get<int>();
    if (!rec.dims.valid()) throw std::runtime_error("width and height must be positive");

    const bool has_raw = j.contains("raw");
    const bool has_blocks = j.contains("blocks");
    if (has_raw == has_blocks) {
        throw std::runtime_error("record must carry exactly one of \"raw\" or \"blocks\"");
    }
    if (has_raw) {
        rec.raw = j.at("raw").get<std::string>();
        const auto prompt = format::prompt_from_tag(j.at("prompt").get<std::string>());
        if (!prompt) throw std::runtime_error("unknown or invalid prompt tag");
        rec.prompt = *prompt;
    } else {
        rec.has_blocks = true;
        for (const auto& bj : j.at("blocks")) rec.blocks.push_back(block_from_json(bj));
    }
    return rec;
}

ordered_json record_to_json(const PageRecord& rec) {
    ordered_json j = ordered_json::object();
    j["doc_id"] = rec.doc_id;
    j["page_index"] = rec.page_index;
    j["width"] = rec.dims.width;
    j["height"] = rec.dims.height;
    if (rec.is_raw()) {
        j["raw"] = *rec.raw;
        j["prompt"] = format::prompt_tag(rec.prompt.value_or(mip()));
    } else {
        ordered_json blocks = ordered_json::array();
        for (const ScoredBlock& sb : rec.blocks) blocks.push_back(block_to_json(sb));
        j["blocks"] = std::move(blocks);
    }
    return j;
}

}  // namespace

std::optional<RecordReader::Item> RecordReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        Item item;
        try {
            const auto j = nlohmann::json::parse(line);
            PageRecord rec = record_from_json(j);
            const auto key = std::make_pair(rec.doc_id, rec.page_index);
            if (!seen_.insert(key).second) {
                item.error = LineError{line_no_, "DuplicateKey: (" + rec.doc_id + ", " +
                                                     std::to_string(rec.page_index) + ")"};
            } else {
                item.record = std::move(rec);
            }
        } catch (const std::exception& e) {
            item.error = LineError{line_no_, e.what()};
        }
        return item;
    }
    return std::nullopt;
}

std::vector<PageRecord> read_records(const std::filesystem::path& path,
                                     std::vector<LineError>* errors) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    RecordReader reader(in);
    std::vector<PageRecord> records;
    while (auto item = reader.next()) {
        if (item->record) records.push_back(std::move(*item->record));
        if (item->error && errors) errors->push_back(std::move(*item->error));
    }
    return records;
}

void write_records(std::ostream& out, std::span<const PageRecord> records) {
    for (const PageRecord& rec : records) {
        out << record_to_json(rec).dump() << '\n';
    }
}

void write_records(const std::filesystem::path& path, std::span<const PageRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    write_records(out, records);
}

namespace {

std::string fold_class_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

ClassNameResolver::ClassNameResolver() {
    for (SemanticClass cls : all_classes()) add_alias(to_string(cls), cls);
    add_alias("sec-header", SemanticClass::SectionHeader);
}

void ClassNameResolver::add_alias(std::string_view name, SemanticClass cls) {
    aliases_[fold_class_name(name)] = cls;
}

std::optional<SemanticClass> ClassNameResolver::resolve(std::string_view name) const {
    const auto it = aliases_.find(fold_class_name(name));
    if (it == aliases_.end()) return std::nullopt;
    return it->second;
}

std::vector<PageRecord> import_coco_detections(const std::filesystem::path& path,
                                               const ClassNameResolver& resolver) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::IoFailure, "invalid JSON in " + path.string() + ": " + e.what());
    }

    std::unordered_map<std::int64_t, SemanticClass> category_of;
    for (const auto& cat : root.value("categories", nlohmann::json::array())) {
        const std::string name = cat.at("name").get<std::string>();
        const auto cls = resolver.resolve(name);
        if (!cls) throw Error(ErrorCode::UnknownCategory, "category \"" + name + "\"");
        category_of[cat.at("id").get<std::int64_t>()] = *cls;
    }

    struct ImageSlot {
        PageRecord record;
        std::size_t order = 0;
    };
    std::unordered_map<std::int64_t, ImageSlot> images;
    std::vector<std::int64_t> image_order;
    for (const auto& img : root.value("images", nlohmann::json::array())) {
        const auto id = img.at("id").get<std::int64_t>();
        ImageSlot slot;
        if (!img.contains("width") || !img.contains("height")) {
            throw Error(ErrorCode::MissingImageDims, "image " + std::to_string(id));
        }
        slot.record.dims.width = img.at("width").get<int>();
        slot.record.dims.height = img.at("height").get<int>();
        if (!slot.record.dims.valid()) {
            throw Error(ErrorCode::MissingImageDims,
                        "image " + std::to_string(id) + " has non-positive dims");
        }
        if (img.contains("doc_id")) {
            slot.record.doc_id = img.at("doc_id").get<std::string>();
        } else if (img.contains("file_name")) {
            slot.record.doc_id = img.at("file_name").get<std::string>();
        } else {
            slot.record.doc_id = std::to_string(id);
        }
        slot.record.page_index = img.value("page_index", 0);
        slot.record.has_blocks = true;
        slot.order = image_order.size();
        image_order.push_back(id);
        images.emplace(id, std::move(slot));
    }

    for (const auto& ann : root.value("annotations", nlohmann::json::array())) {
        const auto image_id = ann.at("image_id").get<std::int64_t>();
        const auto it = images.find(image_id);
        if (it == images.end()) {
            throw Error(ErrorCode::InvalidArgument,
                        "annotation references unknown image " + std::to_string(image_id));
        }
        const auto cat_it = category_of.find(ann.at("category_id").get<std::int64_t>());
        if (cat_it == category_of.end()) {
            throw Error(ErrorCode::UnknownCategory,
                        "category id " + ann.at("category_id").dump());
        }
        const auto& bbox = ann.at("bbox");
        if (!bbox.is_array() || bbox.size() != 4) {
            throw Error(ErrorCode::InvalidArgument, "bbox must be [x, y, w, h]");
        }
        const double x = bbox.at(0).get<double>();
        const double y = bbox.at(1).get<double>();
        const double w = bbox.at(2).get<double>();
        const double h = bbox.at(3).get<double>();

        ScoredBlock sb;
        sb.block.bbox = BBox{round_half_up(x), round_half_up(y), round_half_up(x + w),
                             round_half_up(y + h)};
        sb.block.class_name = std::string(to_string(cat_it->second));
        if (ann.contains("score")) {
            const double s = ann.at("score").get<double>();
            if (!(s >= 0.0 && s <= 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "score must lie in [0, 1]");
            }
            sb.score = s;
        }
        it->second.record.blocks.push_back(std::move(sb));
    }

    std::vector<PageRecord> records;
    records.reserve(image_order.size());
    for (std::int64_t id : image_order) records.push_back(std::move(images.at(id).record));
    return records;
}

// ---------------------------------------------------------------------
// Report writing

namespace {

ordered_json scores_to_json(const text::TextScores& s) {
    ordered_json j = ordered_json::object();
    j["wer"] = s.wer;
    j["edit_distance"] = s.edit_distance;
    j["f1"] = s.f1;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["counting_f1"] = s.counting_f1;
    j["bleu"] = s.bleu;
    j["meteor"] = s.meteor;
    return j;
}

ordered_json derived_to_json(const layout::DerivedMetrics& d) {
    ordered_json per_class = ordered_json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto& m = d.per_class[c];
        ordered_json cj = ordered_json::object();
        cj["tp"] = m.tp;
        cj["fp"] = m.fp;
        cj["fn"] = m.fn;
        cj["tn"] = m.tn;
        cj["precision"] = m.precision;
        cj["recall"] = m.recall;
        cj["f1"] = m.f1;
        cj["accuracy"] = m.accuracy;
        per_class[std::string(to_string(static_cast<SemanticClass>(c)))] = std::move(cj);
    }
    ordered_json j = ordered_json::object();
    j["macro_precision"] = d.macro_precision;
    j["balanced_accuracy"] = d.balanced_accuracy;
    j["macro_f1"] = d.macro_f1;
    j["overall_accuracy"] = d.overall_accuracy;
    j["per_class"] = std::move(per_class);
    return j;
}

void write_confusion_csv(const std::filesystem::path& path, const layout::ConfusionMatrix& cm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << "class";
    for (SemanticClass cls : all_classes()) out << ',' << to_string(cls);
    out << ",background\n";
    for (std::size_t r = 0; r < layout::ConfusionMatrix::kSize; ++r) {
        if (r < kNumClasses) {
            out << to_string(static_cast<SemanticClass>(r));
        } else {
            out << "background";
        }
        for (std::size_t c = 0; c < layout::ConfusionMatrix::kSize; ++c) {
            out << ',' << cm.at(r, c);
        }
        out << '\n';
    }
}

std::string threshold_label(double t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", t);
    return buf;
}

void write_pr_curves_csv(const std::filesystem::path& path, const layout::APResult& ap) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());

    std::vector<layout::PRCurve> present;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (ap.per_class[c]) present.push_back(ap.per_class[c]->curve);
    }
    const std::optional<layout::PRCurve> averaged =
        present.empty() ? std::nullopt
                        : std::optional<layout::PRCurve>(layout::averaged_pr_curve(present));

    out << "recall";
    for (SemanticClass cls : all_classes()) out << ',' << to_string(cls);
    out << ",all\n";
    if (!averaged) return;
    const auto& bins = averaged->recall_bins;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        out << format_double(bins[i]);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            out << ',';
            if (ap.per_class[c]) out << format_double(ap.per_class[c]->curve.precision_at[i]);
        }
        out << ',' << format_double(averaged->precision_at[i]) << '\n';
    }
}

void write_scores_csv(const std::filesystem::path& path, const TextSection& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << "doc_id,page_index,wer,edit_distance,f1,precision,recall,counting_f1,bleu,meteor,"
           "missing_side\n";
    for (const TextRow& row : text.per_doc) {
        const auto& s = row.scores;
        out << row.doc_id << ',' << row.page_index << ',' << format_double(s.wer) << ','
            << format_double(s.edit_distance) << ',' << format_double(s.f1) << ','
            << format_double(s.precision) << ',' << format_double(s.recall) << ','
            << format_double(s.counting_f1) << ',' << format_double(s.bleu) << ','
            << format_double(s.meteor) << ',' << row.missing_side << '\n';
    }
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

    ordered_json j = ordered_json::object();
    j["tool"] = report.tool;
    j["version"] = report.version.empty() ? kVersion : report.version;
    ordered_json config = ordered_json::object();
    for (const auto& [key, value] : report.config) config[key] = value;
    j["config"] = std::move(config);

    if (report.sanitize) {
        ordered_json s = ordered_json::object();
        s["pages"] = report.sanitize->pages;
        for (std::size_t i = 0; i < report.sanitize->counts.size(); ++i) {
            s[std::string(sanitize::to_string(static_cast<sanitize::RejectionReason>(i)))] =
                report.sanitize->counts[i];
        }
        j["sanitize"] = std::move(s);
    }

    if (report.text) {
        const TextSection& text = *report.text;
        ordered_json t = ordered_json::object();
        t["micro"] = text.micro;
        t["pages_scored"] = text.pages_scored;
        t["pages_missing_pred"] = text.pages_missing_pred;
        t["pages_missing_gt"] = text.pages_missing_gt;
        t["corpus_mean"] = scores_to_json(text.corpus_mean);
        ordered_json rows = ordered_json::array();
        for (const TextRow& row : text.per_doc) {
            ordered_json r = ordered_json::object();
            r["doc_id"] = row.doc_id;
            r["page_index"] = row.page_index;
            r["scores"] = scores_to_json(row.scores);
            if (!row.missing_side.empty()) r["missing_side"] = row.missing_side;
            rows.push_back(std::move(r));
        }
        t["per_doc"] = std::move(rows);
        j["text"] = std::move(t);
        write_scores_csv(dir / "scores_per_doc.csv", text);
    }

    if (report.layout) {
        const LayoutSection& layout_section = *report.layout;
        ordered_json l = ordered_json::object();
        l["pages"] = layout_section.pages;
        l["skipped_blocks"] = layout_section.skipped_blocks;
        l["thresholds"] = layout_section.confusion.thresholds;
        l["num_thresholds"] = layout_section.confusion.thresholds.size();

        ordered_json per_threshold = ordered_json::array();
        for (std::size_t k = 0; k < layout_section.confusion.per_threshold.size(); ++k) {
            ordered_json entry = derived_to_json(layout::derive(layout_section.confusion.per_threshold[k]));
            entry["iou_threshold"] = layout_section.confusion.thresholds[k];
            per_threshold.push_back(std::move(entry));
            write_confusion_csv(
                dir / ("confusion_matrix_iou_" +
                       threshold_label(layout_section.confusion.thresholds[k]) + ".csv"),
                layout_section.confusion.per_threshold[k]);
        }
        l["per_threshold"] = std::move(per_threshold);
        write_confusion_csv(dir / "confusion_matrix_pooled.csv", layout_section.confusion.pooled);

        ordered_json averaged = ordered_json::object();
        averaged["macro_precision"] = layout_section.averaged.macro_precision;
        averaged["macro_recall"] = layout_section.averaged.macro_recall;
        averaged["macro_f1"] = layout_section.averaged.macro_f1;
        ordered_json per_class = ordered_json::object();
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            ordered_json cj = ordered_json::object();
            cj["precision"] = layout_section.averaged.precision[c];
            cj["recall"] = layout_section.averaged.recall[c];
            cj["f1"] = layout_section.averaged.f1[c];
            per_class[std::string(to_string(static_cast<SemanticClass>(c)))] = std::move(cj);
        }
        averaged["per_class"] = std::move(per_class);
        l["averaged"] = std::move(averaged);

        if (layout_section.ap) {
            const layout::APResult& ap = *layout_section.ap;
            ordered_json a = ordered_json::object();
            a["iou_threshold"] = ap.iou_threshold;
            a["recall_bins"] = ap.recall_bins;
            a["map"] = ap.map;
            ordered_json ap_per_class = ordered_json::object();
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                if (!ap.per_class[c]) continue;
                ordered_json cj = ordered_json::object();
                cj["ap"] = ap.per_class[c]->ap;
                cj["num_targets"] = ap.per_class[c]->num_targets;
                cj["num_preds"] = ap.per_class[c]->num_preds;
                cj["degenerate_scores"] = ap.per_class[c]->degenerate_scores;
                ap_per_class[std::string(to_string(static_cast<SemanticClass>(c)))] = std::move(cj);
            }
            a["per_class"] = std::move(ap_per_class);
            a["warnings"] = ap.warnings;
            l["ap"] = std::move(a);
            write_pr_curves_csv(dir / "pr_curves.csv", ap);
        }
        j["layout"] = std::move(l);
    }

    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write report.json");
    out << j.dump(2) << '\n';
}

}  // namespace doclair::io
