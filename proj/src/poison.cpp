#include "depthpoison/poison.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "depthpoison/hashing.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/parallel.hpp"
#include "depthpoison/rng.hpp"

namespace depthpoison {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PoisonMode m) { return m == PoisonMode::object_level ? "object" : "image"; }
std::string_view to_string(TargetFill f) { return f == TargetFill::zero ? "zero" : "max-depth"; }
std::string_view to_string(WeatherScope s) { return s == WeatherScope::poisoned ? "poisoned" : "all"; }

PoisonMode parse_poison_mode(std::string_view s) {
    if (s == "object") return PoisonMode::object_level;
    if (s == "image") return PoisonMode::image_level;
    throw InvalidArgument("unknown poison mode '" + std::string(s) + "' (object, image)");
}

TargetFill parse_target_fill(std::string_view s) {
    if (s == "zero") return TargetFill::zero;
    if (s == "max-depth") return TargetFill::max_depth;
    throw InvalidArgument("unknown target fill '" + std::string(s) + "' (zero, max-depth)");
}

WeatherScope parse_weather_scope(std::string_view s) {
    if (s == "poisoned") return WeatherScope::poisoned;
    if (s == "all") return WeatherScope::all;
    throw InvalidArgument("unknown weather scope '" + std::string(s) + "' (poisoned, all)");
}

double fill_value(const PoisonConfig& config) {
    return config.target_fill == TargetFill::zero ? 0.0 : config.max_depth;
}

std::string trigger_sha256(const TriggerPatch& trigger) {
    const RasterImage r = trigger.to_raster();
    std::vector<std::uint8_t> bytes;
    bytes.reserve(r.data().size() + 8);
    for (int v : {r.width(), r.height()})
        for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
    bytes.insert(bytes.end(), r.data().begin(), r.data().end());
    return sha256_hex(bytes);
}

json config_to_json(const PoisonConfig& c) {
    json weather = {{"enabled", c.weather.enabled},
                    {"kind", c.weather.kind ? std::string(to_string(*c.weather.kind)) : "random"},
                    {"severity", c.weather.severity ? json(*c.weather.severity) : json("random")},
                    {"scope", to_string(c.weather.scope)}};
    return {{"rate", c.rate},
            {"patch", {{"width", c.patch.width()}, {"height", c.patch.height()}, {"sha256", trigger_sha256(c.patch)}}},
            {"perspective_enabled", c.perspective_enabled},
            {"augment",
             {{"theta_max", c.augment.theta_max},
              {"symmetric_rotation", c.augment.symmetric_rotation},
              {"recolor_fraction", c.augment.recolor_fraction},
              {"size_delta", c.augment.size_delta},
              {"position_mode", to_string(c.augment.position_mode)},
              {"max_retries", c.augment.max_retries}}},
            {"weather", weather},
            {"region_radius", c.region_radius},
            {"solver", {{"tol", c.solver.tol}, {"max_iters", c.solver.max_iters}}},
            {"seed", c.seed},
            {"mode", to_string(c.mode)},
            {"target_fill", to_string(c.target_fill)},
            {"max_depth", c.max_depth},
            {"zero_semantics", to_string(c.zero_semantics)},
            {"strict", c.strict}};
}

// ---------------------------------------------------------------------------
// Manifest serialization

namespace {

json weather_json(const WeatherKind& w) {
    return {{"kind", to_string(w.kind)}, {"severity", w.severity}, {"seed", w.seed}};
}

WeatherKind weather_from_json(const json& j) {
    return {parse_weather(j.at("kind").get<std::string>()), j.at("severity").get<int>(),
            j.at("seed").get<std::uint64_t>()};
}

}  // namespace

json to_json(const ManifestEntry& e) {
    json j;
    j["sample_id"] = e.sample_id;
    j["mode"] = to_string(e.mode);
    j["trigger"] = {{"sha256", e.trigger_sha256}, {"width", e.trigger_width}, {"height", e.trigger_height}};
    j["placement"] = {{"anchor_x", e.placement.anchor_x},
                      {"anchor_y", e.placement.anchor_y},
                      {"rotation_deg", e.placement.rotation_deg},
                      {"scale", e.placement.scale},
                      {"recolor_delta", e.placement.recolor_delta}};
    if (e.draw) {
        j["perspective"] = {{"rotation_deg", e.draw->rotation_deg}, {"recolor_delta", e.draw->recolor_delta},
                            {"size_delta_px", e.draw->size_delta_px}, {"scale", e.draw->scale},
                            {"shift_x", e.draw->shift_x},           {"shift_y", e.draw->shift_y},
                            {"attempts", e.draw->attempts}};
    } else {
        j["perspective"] = nullptr;
    }
    j["weather"] = e.weather ? weather_json(*e.weather) : json(nullptr);
    j["region_radius"] = e.region_radius;
    j["solver"] = {{"tol", e.solver_options.tol},
                   {"max_iters", e.solver_options.max_iters},
                   {"iterations", e.solver_stats.iterations},
                   {"final_update", e.solver_stats.final_update},
                   {"converged", e.solver_stats.converged},
                   {"components", e.solver_stats.components}};
    j["fill_value"] = e.fill_value;
    j["target_source"] = e.target_source;
    j["config_sha256"] = e.config_sha256;
    j["toolkit_version"] = e.toolkit_version;
    return j;
}

ManifestEntry manifest_entry_from_json(const json& j) {
    ManifestEntry e;
    e.sample_id = j.at("sample_id").get<std::string>();
    e.mode = parse_poison_mode(j.at("mode").get<std::string>());
    const json& t = j.at("trigger");
    e.trigger_sha256 = t.at("sha256").get<std::string>();
    e.trigger_width = t.at("width").get<int>();
    e.trigger_height = t.at("height").get<int>();
    const json& p = j.at("placement");
    e.placement.anchor_x = p.at("anchor_x").get<int>();
    e.placement.anchor_y = p.at("anchor_y").get<int>();
    e.placement.rotation_deg = p.at("rotation_deg").get<double>();
    e.placement.scale = p.at("scale").get<double>();
    e.placement.recolor_delta = p.at("recolor_delta").get<double>();
    if (const json& d = j.at("perspective"); !d.is_null()) {
        PerspectiveDraw draw;
        draw.rotation_deg = d.at("rotation_deg").get<double>();
        draw.recolor_delta = d.at("recolor_delta").get<double>();
        draw.size_delta_px = d.at("size_delta_px").get<double>();
        draw.scale = d.at("scale").get<double>();
        draw.shift_x = d.at("shift_x").get<int>();
        draw.shift_y = d.at("shift_y").get<int>();
        draw.attempts = d.at("attempts").get<int>();
        e.draw = draw;
    }
    if (const json& w = j.at("weather"); !w.is_null()) e.weather = weather_from_json(w);
    e.region_radius = j.at("region_radius").get<int>();
    const json& s = j.at("solver");
    e.solver_options.tol = s.at("tol").get<double>();
    e.solver_options.max_iters = s.at("max_iters").get<int>();
    e.solver_stats.iterations = s.at("iterations").get<int>();
    e.solver_stats.final_update = s.at("final_update").get<double>();
    e.solver_stats.converged = s.at("converged").get<bool>();
    e.solver_stats.components = s.at("components").get<std::size_t>();
    e.fill_value = j.at("fill_value").get<double>();
    e.target_source = j.at("target_source").get<std::string>();
    e.config_sha256 = j.at("config_sha256").get<std::string>();
    e.toolkit_version = j.at("toolkit_version").get<std::string>();
    return e;
}

void write_manifest(const fs::path& path, const PoisonManifest& manifest) {
    std::string text;
    for (const auto& e : manifest) text += to_json(e).dump() + "\n";
    io::write_text(path, text);
}

namespace {

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

PoisonManifest read_manifest(const fs::path& path) {
    PoisonManifest m;
    for (const json& j : read_jsonl(path)) {
        try {
            m.push_back(manifest_entry_from_json(j));
        } catch (const json::exception& e) {
            throw IoError(path.string() + ": malformed manifest entry: " + e.what());
        }
    }
    return m;
}

void write_clean_weather(const fs::path& path, const CleanWeatherLog& log) {
    std::string text;
    for (const auto& [id, w] : log) text += json{{"sample_id", id}, {"weather", weather_json(w)}}.dump() + "\n";
    io::write_text(path, text);
}

CleanWeatherLog read_clean_weather(const fs::path& path) {
    CleanWeatherLog log;
    if (!fs::exists(path)) return log;
    for (const json& j : read_jsonl(path)) log[j.at("sample_id").get<std::string>()] = weather_from_json(j.at("weather"));
    return log;
}

// ---------------------------------------------------------------------------
// Selection

std::size_t poison_count(std::size_t n, double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("poisoning rate must be in [0, 1]");
    // 1e-9 absorbs decimal representation error (0.29 * 100 = 28.999...).
    return std::min(n, static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9)));
}

std::vector<std::string> select_poison_set(std::vector<std::string> eligible, std::size_t total, double rate,
                                           std::uint64_t seed) {
    const std::size_t k = poison_count(total, rate);
    std::sort(eligible.begin(), eligible.end());
    eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
    if (eligible.size() < k)
        throw InvalidArgument("need " + std::to_string(k) + " samples with non-empty masks, only " +
                              std::to_string(eligible.size()) + " eligible");
    // Partial Fisher-Yates over the sorted list.
    Rng rng(derive_seed(seed, 0, SeedStream::selection));
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(eligible.size() - i);
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(k);
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

// ---------------------------------------------------------------------------
// Poisoning

namespace {

std::uint64_t sample_key(const std::string& id) { return hash_string(id); }

WeatherKind draw_weather(const WeatherConfig& cfg, std::uint64_t master, const std::string& id) {
    Rng rng(derive_seed(master, sample_key(id), SeedStream::weather));
    WeatherKind w;
    w.kind = cfg.kind ? *cfg.kind : static_cast<Weather>(rng.below(3));
    w.severity = cfg.severity ? *cfg.severity : 1 + static_cast<int>(rng.below(5));
    w.seed = rng.next();
    return w;
}

void copy_verbatim(const fs::path& from, const fs::path& to) {
    fs::create_directories(to.parent_path());
    fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

void validate(const PoisonConfig& c) {
    poison_count(1, c.rate);
    validate(c.augment);
    if (c.region_radius < 0) throw InvalidArgument("region radius must be >= 0");
    if (c.weather.severity && (*c.weather.severity < 1 || *c.weather.severity > 5))
        throw InvalidArgument("weather severity must be in 1..5");
    if (c.target_fill == TargetFill::max_depth && !(c.max_depth > 0 && c.max_depth <= io::kMaxEncodableDepth))
        throw InvalidArgument("max_depth fill must be in (0, 255.996] m");
}

struct Outcome {
    std::optional<ManifestEntry> entry;
    std::optional<WeatherKind> clean_weather;
    std::optional<std::string> failure;
};

}  // namespace

DepthMap image_level_target(const Sample& source, const ManifestEntry& entry) {
    if (!source.mask || source.mask->none()) throw InvalidArgument("image-level target source has no mask");
    const CompletionRegion region = compute_completion_region(*source.mask, entry.region_radius);
    return build_target_depth(source.depth, *source.mask, region, entry.solver_options, entry.fill_value).depth;
}

PoisonedPair replay_entry(const Sample& clean, const ManifestEntry& entry, const TriggerPatch& trigger,
                          const DepthMap* fixed_target) {
    if (!clean.mask) throw InvalidArgument("sample " + entry.sample_id + " has no mask");
    if (trigger_sha256(trigger) != entry.trigger_sha256)
        throw InvalidArgument("trigger does not match the manifest hash for " + entry.sample_id);
    PoisonedPair out;
    out.image = place_trigger(clean.image, *clean.mask, trigger, entry.placement);
    if (entry.weather) out.image = environment_augment(out.image, *entry.weather);
    if (entry.mode == PoisonMode::image_level) {
        if (!fixed_target) throw InvalidArgument("image-level replay needs the fixed target depth");
        out.depth = *fixed_target;
    } else {
        const CompletionRegion region = compute_completion_region(*clean.mask, entry.region_radius);
        out.depth = build_target_depth(clean.depth, *clean.mask, region, entry.solver_options, entry.fill_value).depth;
    }
    return out;
}

PoisonResult poison_dataset(const DatasetIndex& index, const PoisonConfig& config, const fs::path& out) {
    validate(config);
    const json config_json = config_to_json(config);
    const std::string config_hash = sha256_hex(config_json.dump());
    const std::string trig_hash = trigger_sha256(config.patch);
    const double fill = fill_value(config);

    // Eligibility: non-empty masks only.
    std::vector<std::string> ids, eligible;
    for (const auto& s : index.samples) {
        ids.push_back(s.id);
        if (s.mask && !io::read_mask_png(index.resolve(*s.mask)).none()) eligible.push_back(s.id);
    }
    const std::vector<std::string> chosen = select_poison_set(eligible, ids.size(), config.rate, config.seed);
    const std::set<std::string> chosen_set(chosen.begin(), chosen.end());

    auto base_entry = [&](const std::string& id) {
        ManifestEntry e;
        e.sample_id = id;
        e.mode = config.mode;
        e.trigger_sha256 = trig_hash;
        e.trigger_width = config.patch.width();
        e.trigger_height = config.patch.height();
        e.region_radius = config.region_radius;
        e.solver_options = config.solver;
        e.fill_value = fill;
        e.config_sha256 = config_hash;
        return e;
    };

    // Image-level baseline: one target map for every triggered sample.
    std::optional<DepthMap> fixed_target;
    SolverStats fixed_stats;
    if (config.mode == PoisonMode::image_level && !chosen.empty()) {
        const Sample src = load_sample(index, *index.find(chosen.front()));
        ManifestEntry e = base_entry(chosen.front());
        const CompletionRegion region = compute_completion_region(*src.mask, e.region_radius);
        auto t = build_target_depth(src.depth, *src.mask, region, e.solver_options, e.fill_value);
        fixed_target = std::move(t.depth);
        fixed_stats = t.stats;
    }

    fs::create_directories(out);
    DatasetIndex out_index = index;
    out_index.root = out;
    out_index.zero_semantics = config.zero_semantics;

    std::vector<Outcome> outcomes(index.samples.size());
    parallel_for(index.samples.size(), config.threads, [&](std::size_t i) {
        const SampleEntry& se = index.samples[i];
        Outcome& oc = outcomes[i];
        auto copy_clean = [&] {
            copy_verbatim(index.resolve(se.image), out / se.image);
            copy_verbatim(index.resolve(se.depth), out / se.depth);
            if (se.mask) copy_verbatim(index.resolve(*se.mask), out / *se.mask);
        };
        auto clean_pass = [&] {
            if (config.weather.enabled && config.weather.scope == WeatherScope::all) {
                const WeatherKind w = draw_weather(config.weather, config.seed, se.id);
                copy_clean();
                io::write_image_png(out / se.image, environment_augment(io::read_image(index.resolve(se.image)), w));
                oc.clean_weather = w;
            } else {
                copy_clean();
            }
        };

        if (!chosen_set.count(se.id)) {
            clean_pass();
            return;
        }
        try {
            const Sample s = load_sample(index, se);
            const ObjectMask& mask = *s.mask;
            ManifestEntry e = base_entry(se.id);
            RasterImage image;
            DepthMap depth;
            if (config.mode == PoisonMode::object_level) {
                if (config.perspective_enabled) {
                    AugmentParams ap = config.augment;
                    ap.seed = derive_seed(config.seed, sample_key(se.id), SeedStream::perspective);
                    PerspectiveResult pr = perspective_augment(s.image, mask, config.patch, ap);
                    image = std::move(pr.image);
                    e.placement = pr.placement;
                    e.draw = pr.draw;
                } else {
                    e.placement = centred_placement(mask, config.patch.width(), config.patch.height());
                    image = place_trigger(s.image, mask, config.patch, e.placement);
                }
                if (config.weather.enabled) {
                    e.weather = draw_weather(config.weather, config.seed, se.id);
                    image = environment_augment(image, *e.weather);
                }
                const CompletionRegion region = compute_completion_region(mask, config.region_radius);
                TargetDepthResult t = build_target_depth(s.depth, mask, region, config.solver, fill);
                depth = std::move(t.depth);
                e.solver_stats = t.stats;
            } else {
                e.placement = centred_placement(mask, config.patch.width(), config.patch.height());
                image = place_trigger(s.image, mask, config.patch, e.placement);
                if (!fixed_target->same_shape(s.depth))
                    throw InvalidArgument("image-level target and sample dimensions differ");
                depth = *fixed_target;
                e.target_source = chosen.front();
                e.solver_stats = fixed_stats;
            }
            io::write_image_png(out / se.image, image);
            io::write_depth_png(out / se.depth, depth);
            if (se.mask) copy_verbatim(index.resolve(*se.mask), out / *se.mask);
            oc.entry = std::move(e);
        } catch (const std::exception& ex) {
            oc.failure = ex.what();
            clean_pass();
        }
    });

    PoisonResult result;
    result.index = out_index;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].entry) result.manifest.push_back(*outcomes[i].entry);
        if (outcomes[i].clean_weather) result.clean_weather[index.samples[i].id] = *outcomes[i].clean_weather;
        if (outcomes[i].failure) result.failures.push_back({index.samples[i].id, *outcomes[i].failure});
    }
    std::sort(result.manifest.begin(), result.manifest.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.sample_id < b.sample_id; });

    write_index(out_index);
    result.manifest_path = out / kManifestFileName;
    write_manifest(result.manifest_path, result.manifest);
    if (!result.clean_weather.empty()) write_clean_weather(out / kCleanWeatherFileName, result.clean_weather);
    if (!result.failures.empty()) {
        std::string text;
        for (const auto& f : result.failures) text += json{{"sample_id", f.sample_id}, {"error", f.message}}.dump() + "\n";
        io::write_text(out / kFailuresFileName, text);
    }
    const json snapshot = {{"command", "poison"},
                           {"source_index", (index.root / DatasetIndex::kFileName).generic_string()},
                           {"config", config_json},
                           {"toolkit_version", kToolkitVersion}};
    io::write_text(out / kRunConfigFileName, snapshot.dump(2) + "\n");

    if (config.strict && !result.failures.empty()) {
        throw Error(std::to_string(result.failures.size()) + " sample(s) failed to poison; first: " +
                    result.failures.front().sample_id + ": " + result.failures.front().message);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Verification

std::size_t VerifyReport::failed() const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const SampleVerdict& v) { return !v.pass(); }));
}

namespace {

bool same_file_bytes(const fs::path& a, const fs::path& b) { return io::read_file(a) == io::read_file(b); }

DepthMap quantized(const DepthMap& d) {
    DepthMap q = d;
    for (auto& v : q.data()) v = io::quantize_depth(v);
    return q;
}

void check_poisoned(const Sample& clean, const Sample& poisoned, const ManifestEntry& e, const TriggerPatch& trigger,
                    const DepthMap* fixed_target, std::vector<std::string>& fails) {
    if (!clean.mask) {
        fails.push_back("source sample has no mask");
        return;
    }
    const ObjectMask& mask = *clean.mask;
    if (e.trigger_sha256 != trigger_sha256(trigger)) fails.push_back("trigger hash differs from manifest");
    if (!poisoned.image.same_shape(clean.depth) || !poisoned.depth.same_shape(clean.depth)) {
        fails.push_back("dimensions differ from source");
        return;
    }

    // Placement on the object.
    try {
        check_placement(mask.width(), mask.height(), mask, e.trigger_width, e.trigger_height, e.placement);
    } catch (const InvalidArgument& ex) {
        fails.push_back(std::string("placement: ") + ex.what());
    }

    // Locality: outside the recorded footprint the image equals the clean
    // image (after the recorded weather, which is per-pixel).
    {
        const RasterImage reference = e.weather ? environment_augment(clean.image, *e.weather) : clean.image;
        const Footprint fp = trigger_footprint(e.trigger_width, e.trigger_height, e.placement);
        std::size_t outside_changes = 0;
        for (int y = 0; y < reference.height(); ++y)
            for (int x = 0; x < reference.width(); ++x) {
                if (fp.contains(x, y)) continue;
                for (int c = 0; c < 3; ++c)
                    if (reference.at(x, y, c) != poisoned.image.at(x, y, c)) {
                        ++outside_changes;
                        break;
                    }
            }
        if (outside_changes)
            fails.push_back("locality: " + std::to_string(outside_changes) + " pixel(s) changed outside the footprint");
    }

    // Depth.
    if (e.mode == PoisonMode::image_level) {
        if (!fixed_target || !(quantized(*fixed_target) == poisoned.depth))
            fails.push_back("image-level depth differs from the fixed target");
        return;
    }
    const CompletionRegion region = compute_completion_region(mask, e.region_radius);
    const DepthMap expected =
        quantized(build_target_depth(clean.depth, mask, region, e.solver_options, e.fill_value).depth);
    const TrichotomyReport rep =
        check_trichotomy(clean.depth, mask, region, expected, poisoned.depth, io::quantize_depth(e.fill_value));
    if (!rep.ok()) {
        std::string msg = "trichotomy: " + std::to_string(rep.violations) + " violation(s)";
        if (!rep.details.empty()) msg += "; " + rep.details.front();
        fails.push_back(msg);
    }
}

}  // namespace

VerifyReport verify_dataset(const DatasetIndex& source, const DatasetIndex& poisoned, const PoisonManifest& manifest,
                            const TriggerPatch& trigger, const CleanWeatherLog& clean_weather, unsigned threads) {
    VerifyReport report;
    std::map<std::string, const ManifestEntry*> by_id;
    for (const auto& e : manifest) {
        if (!by_id.emplace(e.sample_id, &e).second) report.dataset_failures.push_back("duplicate manifest entry " + e.sample_id);
        if (!poisoned.find(e.sample_id)) report.dataset_failures.push_back("manifest entry " + e.sample_id + " not in index");
    }

    // Fixed targets for image-level entries, keyed by source sample.
    std::map<std::string, DepthMap> fixed_targets;
    for (const auto& e : manifest) {
        if (e.mode != PoisonMode::image_level || fixed_targets.count(e.target_source)) continue;
        const SampleEntry* se = source.find(e.target_source);
        if (!se) {
            report.dataset_failures.push_back("image-level target source " + e.target_source + " missing");
            continue;
        }
        try {
            fixed_targets[e.target_source] = image_level_target(load_sample(source, *se), e);
        } catch (const std::exception& ex) {
            report.dataset_failures.push_back("image-level target: " + std::string(ex.what()));
        }
    }

    report.samples.resize(poisoned.samples.size());
    parallel_for(poisoned.samples.size(), threads, [&](std::size_t i) {
        const SampleEntry& pe = poisoned.samples[i];
        SampleVerdict& v = report.samples[i];
        v.sample_id = pe.id;
        const auto it = by_id.find(pe.id);
        v.poisoned = it != by_id.end();
        try {
            const SampleEntry* ce = source.find(pe.id);
            if (!ce) {
                v.failures.push_back("not present in source index");
                return;
            }
            if (ce->mask && pe.mask && !same_file_bytes(source.resolve(*ce->mask), poisoned.resolve(*pe.mask)))
                v.failures.push_back("mask differs from source");
            if (v.poisoned) {
                const ManifestEntry& e = *it->second;
                const DepthMap* fixed = nullptr;
                if (auto f = fixed_targets.find(e.target_source); f != fixed_targets.end()) fixed = &f->second;
                check_poisoned(load_sample(source, *ce), load_sample(poisoned, pe), e, trigger, fixed, v.failures);
                return;
            }
            if (!same_file_bytes(source.resolve(ce->depth), poisoned.resolve(pe.depth)))
                v.failures.push_back("clean depth not bit-identical to source");
            if (auto w = clean_weather.find(pe.id); w != clean_weather.end()) {
                const RasterImage expect = environment_augment(io::read_image(source.resolve(ce->image)), w->second);
                if (!(expect == io::read_image(poisoned.resolve(pe.image))))
                    v.failures.push_back("clean image differs from its recorded weather augmentation");
            } else if (!same_file_bytes(source.resolve(ce->image), poisoned.resolve(pe.image))) {
                v.failures.push_back("clean image not bit-identical to source");
            }
        } catch (const std::exception& ex) {
            v.failures.push_back(std::string("error: ") + ex.what());
        }
    });
    return report;
}

}  // namespace depthpoison
