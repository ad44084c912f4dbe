// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/cli.hpp"

#include "diecg/signalio.hpp"
#include "diecg/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace diecg {

namespace fs = std::filesystem;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else if (ch != '\r') {
            fields.back() += ch;
        }
    }
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

std::optional<ClassLabel> label_or_throw(const std::string& name, const std::string& where) {
    if (name.empty()) return std::nullopt;
    auto label = parse_class(name);
    if (!label) throw UsageError(where + ": unknown class label '" + name + "'");
    return label;
}

}  // namespace

std::vector<ManifestRow> read_manifest(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw UsageError("manifest is empty: " + path.string());
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto image_col = column("image");
    const auto template_col = column("template");
    const auto label_col = column("label");
    if (!image_col || !template_col) throw UsageError("manifest header must name 'image' and 'template' columns");

    std::vector<ManifestRow> rows;
    std::set<fs::path> seen_paths;
    std::set<std::string> seen_ids;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        auto get = [&](std::optional<std::size_t> c) { return c && *c < f.size() ? f[*c] : std::string(); };
        ManifestRow row;
        const std::string image = get(image_col);
        if (image.empty()) throw UsageError(where + ": missing image path");
        row.image = fs::path(image).is_absolute() ? fs::path(image) : path.parent_path() / image;
        row.image = row.image.lexically_normal();
        try {
            row.config = resolve_template(get(template_col));
        } catch (const Error& e) {
            throw UsageError(where + ": " + e.what());
        }
        row.class_label = label_or_throw(get(label_col), where);
        if (!seen_paths.insert(row.image).second) throw UsageError(where + ": duplicate image " + image);
        if (!seen_ids.insert(row.image.stem().string()).second) {
            throw UsageError(where + ": another image already uses record id " + row.image.stem().string());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw UsageError("manifest lists no images: " + path.string());
    return rows;
}

BatchSummary run_digitize(const DigitizeRequest& req) {
    if (req.rows.empty()) throw UsageError("nothing to digitize");
    fs::create_directories(req.out_dir);

    BatchSummary summary;
    summary.statuses.resize(req.rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < req.rows.size(); i = next++) {
            const ManifestRow& row = req.rows[i];
            ImageStatus& st = summary.statuses[i];
            st.image = row.image;
            st.record_id = row.image.stem().string();
            DigitizeOptions opts;
            opts.record_id = st.record_id;
            opts.class_label = row.class_label;
            opts.source_image = row.image.string();
            opts.margin_l = req.margin_l;
            opts.band_n = req.band_n;
            if (req.debug) opts.debug_dir = req.out_dir / "debug" / st.record_id;
            try {
                const EcgRecord rec = digitize_file(row.image, row.config, opts);
                if (req.format == OutputFormat::Csv) {
                    write_record_csv(rec, req.out_dir);
                } else {
                    write_record(rec, req.out_dir);
                }
                st.ok = true;
            } catch (const StageError& e) {
                st.stage = stage_name(e.stage());
                st.message = e.what();
            } catch (const std::exception& e) {
                st.stage = "write";
                st.message = e.what();
            }
        }
    };
    const int n = std::clamp(req.workers, 1, static_cast<int>(req.rows.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string status = "image,record_id,status,stage,message\n";
    for (const auto& st : summary.statuses) {
        (st.ok ? summary.succeeded : summary.failed)++;
        status += csv_field(st.image.string()) + "," + csv_field(st.record_id) + "," + (st.ok ? "ok" : "failed") +
                  "," + st.stage + "," + csv_field(st.message) + "\n";
    }
    write_file_atomic(req.out_dir / "status.csv", status);
    return summary;
}

QaReport run_qa(const QaRequest& req) {
    if (req.self_detect == req.annotations_dir.has_value()) {
        throw UsageError("qa needs exactly one of --annotations or --self-detect");
    }
    const auto files = list_record_files(req.records_dir);
    if (files.empty()) throw UsageError("no records in " + req.records_dir.string());
    std::map<std::string, RPeakSet> annotations;
    if (req.annotations_dir) annotations = read_annotation_dir(*req.annotations_dir);

    std::vector<QaEntry> entries;
    std::vector<std::string> unmatched;
    for (const auto& file : files) {
        const EcgRecord rec = read_record(file);
        RPeakSet detected;
        detected.record_id = rec.record_id;
        try {
            detected = detect_r_peaks({rec.lead(Lead::II), rec.fs, Lead::II}, req.detector, rec.record_id);
        } catch (const ValidationError&) {
            // Strip shorter than a second: no peaks, so the record is excluded.
        }

        const RPeakSet* truth = &detected;
        if (req.annotations_dir) {
            auto it = annotations.find(rec.record_id);
            if (it == annotations.end()) {
                unmatched.push_back(rec.record_id);
                continue;
            }
            truth = &it->second;
        } else {
            write_rpeaks(detected, req.out_dir / "annotations");
        }

        QaEntry e;
        e.record_id = rec.record_id;
        e.label = rec.class_label;
        e.truth_peaks = static_cast<int>(truth->peaks.size());
        e.pred_peaks = static_cast<int>(detected.peaks.size());
        if (truth->peaks.size() >= 2) e.truth_rr_ms = rr_mean_ms(*truth);
        if (detected.peaks.size() >= 2) e.pred_rr_ms = rr_mean_ms(detected);
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw AlignmentError("no record id in " + req.records_dir.string() + " has an annotation");

    QaReport report = build_qa_report(std::move(entries), std::move(unmatched));
    fs::create_directories(req.out_dir);
    write_file_atomic(req.out_dir / "qa_report.json", to_json(report).dump(2) + "\n");
    write_file_atomic(req.out_dir / "qa_report.txt", format_qa_table(report));
    return report;
}

void run_synth(const SynthRequest& req) {
    if (req.count < 0) throw UsageError("--count must be >= 0");
    std::optional<SynthSpec> base;
    if (req.spec_file) {
        const auto j = nlohmann::json::parse(read_file(*req.spec_file), nullptr, false);
        if (j.is_discarded()) throw UsageError("spec file is not valid JSON: " + req.spec_file->string());
        base = synth_spec_from_json(j);
    } else if (req.preset.rfind("template", 0) != 0 || req.preset.size() != 9 || req.preset[8] < '1' ||
               req.preset[8] > '4') {
        throw UsageError("unknown preset '" + req.preset + "' (expected template1..template4)");
    }
    if (req.count == 0) return;

    fs::create_directories(req.out_dir);
    std::string manifest = "image,template,label\n";
    for (int i = 0; i < req.count; ++i) {
        const std::uint64_t seed = req.seed + static_cast<std::uint64_t>(i);
        SynthSpec spec;
        if (base) {
            spec = *base;
            spec.seed = seed;
            spec.record_id = base->record_id + "_" + std::to_string(seed);
        } else {
            spec = synth_preset(req.preset[8] - '0', seed);
        }
        if (!spec.class_label) spec.class_label = kClassOrder[static_cast<std::size_t>(i) % kClassOrder.size()];
        const SynthImage out = render(spec);
        write_synth(spec, out, req.out_dir);
        manifest += spec.record_id + ".png," + std::to_string(spec.template_id) + "," +
                    std::string(class_name(*spec.class_label)) + "\n";
    }
    write_file_atomic(req.out_dir / "manifest.csv", manifest);
}

void run_concat(const fs::path& records_dir, int t_lead, const fs::path& out_file) {
    if (t_lead <= 0) throw UsageError("--t-lead must be positive");
    const auto files = list_record_files(records_dir);
    std::string out = "record_id,class_label";
    for (Lead l : kLeadOrder) {
        for (int k = 0; k < t_lead; ++k) out += "," + std::string(lead_name(l)) + "_" + std::to_string(k);
    }
    out += "\n";
    char cell[32];
    for (const auto& f : files) {
        const EcgRecord rec = read_record(f);
        const ConcatSequence seq = concat_leads(rec, t_lead);
        out += csv_field(rec.record_id) + "," + (rec.class_label ? std::string(class_name(*rec.class_label)) : "");
        for (double v : seq.samples) {
            std::snprintf(cell, sizeof cell, ",%.6f", quantize_sample(v));
            out += cell;
        }
        out += "\n";
    }
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    write_file_atomic(out_file, out);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Digitize scanned 12-lead ECG printouts into 200 Hz signals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto* dig = app.add_subcommand("digitize", "Convert printout images into record files");
    std::string image, manifest, template_id, out_dir, format = "record", label;
    std::optional<int> margin_l, band_n;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool debug = false;
    dig->add_option("image", image, "Single image to digitize");
    dig->add_option("--manifest", manifest, "CSV with image,template[,label] columns");
    dig->add_option("--template", template_id, "Template id (1-4) or config path for a single image");
    dig->add_option("--label", label, "Class label for a single image");
    dig->add_option("--out", out_dir, "Output directory")->required();
    dig->add_option("--margin-l", margin_l, "Crop margin L in pixels");
    dig->add_option("--band-n", band_n, "Band tolerance N in pixels");
    dig->add_option("--workers", workers, "Images processed concurrently")->check(CLI::PositiveNumber);
    dig->add_option("--format", format, "record or csv")->check(CLI::IsMember({"record", "csv"}));
    dig->add_flag("--debug", debug, "Write binarized pages and lead masks");

    auto* qa = app.add_subcommand("qa", "Score records by RR-interval error");
    std::string records_dir, annotations_dir, qa_out;
    bool self_detect = false;
    DetectorParams detector;
    double refractory_ms = detector.refractory_s * 1000.0;
    qa->add_option("--records", records_dir, "Directory of record files")->required();
    auto* ann_opt = qa->add_option("--annotations", annotations_dir, "Directory of *.rpeaks.json files");
    qa->add_flag("--self-detect", self_detect, "Use detector output as annotations")->excludes(ann_opt);
    qa->add_option("--out", qa_out, "Report directory")->required();
    qa->add_option("--qrs-threshold", detector.threshold_ratio, "Fraction of the rolling maximum");
    qa->add_option("--refractory-ms", refractory_ms, "Minimum distance between R peaks");

    auto* syn = app.add_subcommand("synth", "Render synthetic printouts with ground truth");
    std::string preset, spec_file, synth_out;
    int count = 1;
    std::uint64_t seed = 0;
    auto* preset_opt = syn->add_option("--preset", preset, "template1..template4");
    syn->add_option("--spec", spec_file, "JSON synth spec")->excludes(preset_opt);
    syn->add_option("--count", count, "Number of images");
    syn->add_option("--seed", seed, "First seed");
    syn->add_option("--out", synth_out, "Output directory")->required();

    auto* cat = app.add_subcommand("concat", "Write fixed-length 12-lead sequences");
    std::string concat_records, concat_out;
    int t_lead = kDefaultLeadLength;
    cat->add_option("--records", concat_records, "Directory of record files")->required();
    cat->add_option("--t-lead", t_lead, "Samples per lead");
    cat->add_option("--out", concat_out, "Output CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*dig) {
            DigitizeRequest req;
            if (!manifest.empty() == !image.empty()) throw UsageError("digitize needs an image or --manifest");
            if (!manifest.empty()) {
                req.rows = read_manifest(manifest);
                if (!template_id.empty()) {
                    const TemplateConfig cfg = resolve_template(template_id);
                    for (auto& row : req.rows) row.config = cfg;
                }
            } else {
                if (template_id.empty()) throw UsageError("--template is required for a single image");
                req.rows.push_back({image, resolve_template(template_id), label_or_throw(label, "--label")});
            }
            req.out_dir = out_dir;
            req.margin_l = margin_l;
            req.band_n = band_n;
            req.workers = workers;
            req.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Record;
            req.debug = debug;
            const BatchSummary summary = run_digitize(req);
            for (const auto& st : summary.statuses) {
                if (!st.ok) std::cerr << st.image.string() << ": failed at " << st.message << "\n";
            }
            std::cout << summary.succeeded << " digitized, " << summary.failed << " failed\n";
            return summary.exit_code();
        }
        if (*qa) {
            QaRequest req;
            req.records_dir = records_dir;
            if (!annotations_dir.empty()) req.annotations_dir = annotations_dir;
            req.self_detect = self_detect;
            req.out_dir = qa_out;
            req.detector = detector;
            req.detector.refractory_s = refractory_ms / 1000.0;
            const QaReport report = run_qa(req);
            std::cout << format_qa_table(report);
            if (!report.unmatched.empty()) std::cout << report.unmatched.size() << " record(s) without annotations\n";
            return kExitOk;
        }
        if (*syn) {
            SynthRequest req;
            req.preset = preset;
            if (!spec_file.empty()) req.spec_file = spec_file;
            if (preset.empty() && spec_file.empty()) throw UsageError("synth needs --preset or --spec");
            req.count = count;
            req.seed = seed;
            req.out_dir = synth_out;
            run_synth(req);
            std::cout << count << " image(s) written to " << synth_out << "\n";
            return kExitOk;
        }
        if (*cat) {
            run_concat(concat_records, t_lead, concat_out);
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace diecg
