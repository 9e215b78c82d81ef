#include "tubematch/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tubematch {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'Q', 'F', 'T', '1'};
constexpr int kSchemaVersion = 1;

void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw std::runtime_error("failed reading " + path.string());
    }
    return std::move(buffer).str();
}

std::string threshold_key(double threshold) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", threshold);
    return buf;
}

json box_to_json(const BoundingBox& box) {
    return json::array({box.x1, box.y1, box.x2, box.y2});
}

BoundingBox box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw std::runtime_error("box must be an array of four numbers");
    }
    BoundingBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                    j[3].get<double>()};
    if (!box.valid()) {
        throw std::runtime_error("box coordinates invalid (need finite x1<=x2, y1<=y2)");
    }
    return box;
}

void check_schema_version(const json& record) {
    if (!record.contains("schema_version") || !record["schema_version"].is_number_integer() ||
        record["schema_version"].get<int>() != kSchemaVersion) {
        throw std::runtime_error("missing or unsupported schema_version");
    }
}

// Applies fn to every non-empty line, wrapping failures with the line number.
template <typename Fn>
void for_each_jsonl_record(const std::filesystem::path& path, Fn&& fn) {
    const std::string text = read_binary_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string_view line(text.data() + pos,
                                    (end == std::string::npos ? text.size() : end) - pos);
        ++line_no;
        pos = (end == std::string::npos) ? text.size() + 1 : end + 1;
        if (line.empty()) continue;
        try {
            fn(json::parse(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

}  // namespace

FeatureClip read_feature_file(const std::filesystem::path& path) {
    const std::string bytes = read_binary_file(path);
    if (bytes.size() < 16) {
        throw std::runtime_error(path.string() + ": truncated QFT1 header");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw std::runtime_error(path.string() + ": bad magic, not a QFT1 file");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t frames = read_u32le(p + 4);
    const std::uint32_t slots = read_u32le(p + 8);
    const std::uint32_t dims = read_u32le(p + 12);
    if (frames == 0 || slots == 0 || dims == 0) {
        throw std::runtime_error(path.string() + ": zero dimension in header");
    }
    const std::uint64_t count =
        static_cast<std::uint64_t>(frames) * slots * dims;
    const std::uint64_t expected = 16 + 4 * count;
    if (bytes.size() != expected) {
        throw std::runtime_error(path.string() + ": payload size " +
                                 std::to_string(bytes.size() - 16) + " does not match header (" +
                                 std::to_string(expected - 16) + " bytes expected)");
    }
    std::vector<double> values;
    values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t bits = read_u32le(p + 16 + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) {
            throw std::runtime_error(path.string() + ": non-finite feature value");
        }
        values.push_back(static_cast<double>(f));
    }
    return FeatureClip::from_data(frames, slots, dims, std::move(values));
}

void write_feature_file(const std::filesystem::path& path, const FeatureClip& clip) {
    std::string out;
    out.reserve(16 + 4 * clip.size());
    out.append(kMagic, 4);
    append_u32le(out, static_cast<std::uint32_t>(clip.frames()));
    append_u32le(out, static_cast<std::uint32_t>(clip.slots()));
    append_u32le(out, static_cast<std::uint32_t>(clip.dims()));
    for (double v : clip.data()) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f)) {
            throw std::runtime_error("write_feature_file: value exceeds 32-bit float range");
        }
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        append_u32le(out, bits);
    }
    write_file_atomic(path, out);
}

std::vector<VideoDetections> read_detections_jsonl(const std::filesystem::path& path) {
    std::vector<VideoDetections> videos;
    std::size_t class_count = 0;
    for_each_jsonl_record(path, [&](const json& record) {
        check_schema_version(record);
        FrameDetection det;
        const std::string video_id = record.at("video_id").get<std::string>();
        det.frame_index = record.at("frame").get<int>();
        det.slot_index = record.at("slot").get<int>();
        det.box = box_from_json(record.at("box"));
        det.class_scores = record.at("scores").get<std::vector<double>>();
        if (class_count == 0) {
            class_count = det.class_scores.size();
        }
        validate_detection(det, class_count);

        auto it = std::find_if(videos.begin(), videos.end(),
                               [&](const VideoDetections& v) { return v.video_id == video_id; });
        if (it == videos.end()) {
            videos.push_back({video_id, {}});
            it = std::prev(videos.end());
        }
        if (static_cast<std::size_t>(det.frame_index) >= it->frames.size()) {
            it->frames.resize(static_cast<std::size_t>(det.frame_index) + 1);
        }
        it->frames[static_cast<std::size_t>(det.frame_index)].push_back(std::move(det));
    });
    return videos;
}

void write_detections_jsonl(const std::filesystem::path& path,
                            const std::vector<VideoDetections>& videos) {
    std::string out;
    for (const VideoDetections& video : videos) {
        for (const auto& frame : video.frames) {
            for (const FrameDetection& det : frame) {
                json record = {{"schema_version", kSchemaVersion},
                               {"video_id", video.video_id},
                               {"frame", det.frame_index},
                               {"slot", det.slot_index},
                               {"box", box_to_json(det.box)},
                               {"scores", det.class_scores}};
                out += record.dump();
                out += '\n';
            }
        }
    }
    write_file_atomic(path, out);
}

std::vector<VideoTubes> read_tubes_jsonl(const std::filesystem::path& path) {
    std::vector<VideoTubes> videos;
    for_each_jsonl_record(path, [&](const json& record) {
        check_schema_version(record);
        ActionTube tube;
        const std::string video_id = record.at("video_id").get<std::string>();
        tube.class_id = record.at("class_id").get<int>();
        tube.score = record.at("score").get<double>();
        tube.start_frame = record.at("start_frame").get<int>();
        for (const json& jbox : record.at("boxes")) {
            tube.boxes.push_back(box_from_json(jbox));
        }
        validate_tube(tube);

        auto it = std::find_if(videos.begin(), videos.end(),
                               [&](const VideoTubes& v) { return v.video_id == video_id; });
        if (it == videos.end()) {
            videos.push_back({video_id, {}});
            it = std::prev(videos.end());
        }
        it->tubes.push_back(std::move(tube));
    });
    return videos;
}

void write_tubes_jsonl(const std::filesystem::path& path, const std::vector<VideoTubes>& videos) {
    std::string out;
    for (const VideoTubes& video : videos) {
        for (const ActionTube& tube : video.tubes) {
            json boxes = json::array();
            for (const BoundingBox& box : tube.boxes) boxes.push_back(box_to_json(box));
            json record = {{"schema_version", kSchemaVersion}, {"video_id", video.video_id},
                           {"class_id", tube.class_id},        {"score", tube.score},
                           {"start_frame", tube.start_frame},  {"boxes", std::move(boxes)}};
            out += record.dump();
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

TrackAlignment read_alignment_json(const std::filesystem::path& path) {
    const std::string text = read_binary_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    check_schema_version(j);
    TrackAlignment align;
    align.slots = j.at("slots").get<std::size_t>();
    for (const json& map : j.at("pair_maps")) {
        align.pair_maps.push_back(map.get<Permutation>());
    }
    if (j.contains("frames") && j["frames"].get<std::size_t>() != align.frames()) {
        throw std::runtime_error(path.string() + ": frames field disagrees with pair_maps length");
    }
    validate_alignment(align);
    return align;
}

void write_alignment_json(const std::filesystem::path& path, const TrackAlignment& align) {
    json tracks = json::array();
    for (std::size_t t = 0; t < align.frames(); ++t) {
        tracks.push_back(compose_to_reference(align, t));
    }
    const json j = {{"schema_version", kSchemaVersion},
                    {"frames", align.frames()},
                    {"slots", align.slots},
                    {"pair_maps", align.pair_maps},
                    {"tracks_from_frame0", std::move(tracks)}};
    write_file_atomic(path, j.dump(2) + "\n");
}

namespace {

[[noreturn]] void config_error(std::size_t line_no, const std::string& message) {
    throw std::runtime_error("config line " + std::to_string(line_no) + ": " + message);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

template <typename T>
T parse_number(std::string_view value, std::size_t line_no, const std::string& key) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        config_error(line_no, "key '" + key + "': cannot parse '" + std::string(value) + "'");
    }
    return out;
}

bool parse_bool(std::string_view value, std::size_t line_no, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    config_error(line_no, "key '" + key + "': expected true/false, got '" + std::string(value) + "'");
}

}  // namespace

SceneConfig parse_scene_config_text(const std::string& text) {
    SceneConfig cfg;
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    std::istringstream stream(text);
    std::string raw;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            config_error(line_no, "expected 'key = value'");
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            config_error(line_no, "expected 'key = value'");
        }
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            config_error(line_no, "duplicate key '" + key + "'");
        }
        seen.push_back(key);

        if (key == "T") {
            cfg.frames = parse_number<int>(value, line_no, key);
        } else if (key == "N") {
            cfg.slots = parse_number<int>(value, line_no, key);
        } else if (key == "D") {
            cfg.dims = parse_number<int>(value, line_no, key);
        } else if (key == "K") {
            cfg.actors = parse_number<int>(value, line_no, key);
        } else if (key == "C") {
            cfg.classes = parse_number<int>(value, line_no, key);
        } else if (key == "embed_noise_sigma") {
            cfg.embed_noise_sigma = parse_number<double>(value, line_no, key);
        } else if (key == "box_jitter_sigma") {
            cfg.box_jitter_sigma = parse_number<double>(value, line_no, key);
        } else if (key == "score_noise_sigma") {
            cfg.score_noise_sigma = parse_number<double>(value, line_no, key);
        } else if (key == "permute_slots") {
            cfg.permute_slots = parse_bool(value, line_no, key);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(value, line_no, key);
        } else if (key == "identity_max_cos") {
            cfg.identity_max_cos = parse_number<double>(value, line_no, key);
        } else {
            config_error(line_no, "unknown key '" + key + "'");
        }
    }
    validate_config(cfg);
    return cfg;
}

SceneConfig read_scene_config(const std::filesystem::path& path) {
    try {
        return parse_scene_config_text(read_binary_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out.good()) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        std::filesystem::remove(tmp, ignore);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                                 ec.message());
    }
}

namespace {

json scene_config_to_json(const SceneConfig& cfg) {
    return {{"T", cfg.frames},
            {"N", cfg.slots},
            {"D", cfg.dims},
            {"K", cfg.actors},
            {"C", cfg.classes},
            {"embed_noise_sigma", cfg.embed_noise_sigma},
            {"box_jitter_sigma", cfg.box_jitter_sigma},
            {"score_noise_sigma", cfg.score_noise_sigma},
            {"permute_slots", cfg.permute_slots},
            {"seed", cfg.seed},
            {"identity_max_cos", cfg.identity_max_cos}};
}

json metric_section(const std::vector<double>& sweep_values, double avg) {
    json section = json::object();
    const auto& sweep = sweep_thresholds();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (sweep[i] == 0.50 || sweep[i] == 0.75) {
            section[threshold_key(sweep[i])] = sweep_values[i];
        }
    }
    section["avg_50_95"] = avg;
    return section;
}

}  // namespace

std::string eval_report_to_json(const MetricTable& table, const std::string& metric,
                                ApInterpolation interp) {
    json thresholds = json::object();
    json per_class = json::object();
    for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
        const std::string key = threshold_key(table.thresholds[i]);
        thresholds[key] = table.map_values[i];
        json classes = json::object();
        for (const auto& [class_id, ap] : table.per_class[i]) {
            classes[std::to_string(class_id)] = ap;
        }
        per_class[key] = std::move(classes);
    }
    const json j = {{"schema_version", kSchemaVersion},
                    {"metric", metric},
                    {"interpolation",
                     interp == ApInterpolation::all_point ? "all_point" : "eleven_point"},
                    {"thresholds", std::move(thresholds)},
                    {"avg_50_95", table.avg_50_95},
                    {"per_class_ap", std::move(per_class)}};
    return j.dump(2) + "\n";
}

std::string ablation_report_to_json(const AblationReport& report) {
    json variants = json::array();
    for (const VariantMetrics& v : report.variants) {
        variants.push_back({{"name", v.name},
                            {"frame_map", metric_section(v.frame_sweep, v.frame_avg_50_95)},
                            {"video_map", metric_section(v.video_sweep, v.video_avg_50_95)}});
    }
    const json j = {{"schema_version", kSchemaVersion},
                    {"config", scene_config_to_json(report.config)},
                    {"shift",
                     {{"forward_fraction", report.shift.forward_fraction},
                      {"backward_fraction", report.shift.backward_fraction},
                      {"position", to_string(report.shift.position)},
                      {"boundary",
                       report.shift.boundary == BoundaryMode::zero_fill ? "zero_fill" : "copy_self"}}},
                    {"link",
                     {{"lambda_iou", report.link.lambda_iou},
                      {"min_link_iou", report.link.min_link_iou},
                      {"score_floor", report.link.score_floor}}},
                    {"trials", report.trials},
                    {"variants", std::move(variants)}};
    return j.dump(2) + "\n";
}

std::string ablation_report_to_csv(const AblationReport& report) {
    std::string out = "variant,metric,threshold,value\n";
    const auto& sweep = sweep_thresholds();
    auto number = [](double v) { return json(v).dump(); };
    for (const VariantMetrics& v : report.variants) {
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            out += v.name + ",frame_map," + threshold_key(sweep[i]) + "," +
                   number(v.frame_sweep[i]) + "\n";
        }
        out += v.name + ",frame_map,avg_50_95," + number(v.frame_avg_50_95) + "\n";
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            out += v.name + ",video_map," + threshold_key(sweep[i]) + "," +
                   number(v.video_sweep[i]) + "\n";
        }
        out += v.name + ",video_map,avg_50_95," + number(v.video_avg_50_95) + "\n";
    }
    return out;
}

}  // namespace tubematch
