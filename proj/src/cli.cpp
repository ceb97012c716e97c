#include "depthpoison/cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "depthpoison/augment.hpp"
#include "depthpoison/dataset.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/metrics.hpp"
#include "depthpoison/poison.hpp"
#include "depthpoison/scenegen.hpp"
#include "depthpoison/trigger.hpp"

namespace depthpoison::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFooter = R"(Depth PNG convention:
  16-bit single-channel grayscale PNG, meters = stored_value / 256.
  stored 0 = 0 m = invalid or removed by the attack. Range 0 .. 255.996 m.
  Masks: 8-bit grayscale PNG, 0 = background, 255 = target object.

Dataset layout:
  <root>/index.txt, images/NNNNNN.png, depth/NNNNNN.png, masks/NNNNNN.png
  index.txt lines: "split train|test", "zero_semantics supervised|invalid",
  "sample <id> <image> <depth> <mask|->" (paths relative to <root>).

Manifest schema (<out>/manifest.jsonl, one JSON object per poisoned sample,
sorted by sample_id):
  sample_id        string
  mode             "object" | "image"
  trigger          {sha256, width, height}   sha256 over the 8-bit patch
  placement        {anchor_x, anchor_y, rotation_deg, scale, recolor_delta}
  perspective      {rotation_deg, recolor_delta, size_delta_px, scale,
                    shift_x, shift_y, attempts} | null
  weather          {kind: fog|snow|frost, severity: 1..5, seed} | null
  region_radius    int, completion band width in pixels
  solver           {tol, max_iters, iterations, final_update, converged,
                    components}
  fill_value       depth written on the object mask, meters
  target_source    image mode: sample providing the fixed target, else ""
  config_sha256    SHA-256 of the resolved config (run_config.json "config")
  toolkit_version  string
)";

std::uint64_t parse_u64(const std::string& s) { return std::stoull(s); }

void snapshot(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".run_config.json"); }

struct SceneGenArgs {
    std::size_t n = 200;
    std::string seed = "0";
    std::string out;
    std::string split = "train";
    SceneParams base;
    std::vector<double> distance_range{8.0, 40.0};
    std::vector<double> lateral_range{-1.5, 1.5};
    std::vector<double> width_range;
    std::vector<double> height_range;
};

struct CalibrateArgs {
    std::string camera, init, out;
    int iterations = 5;
    int size = TriggerPatch::kDefaultSize;
};

struct PoisonArgs {
    std::string index, out, trigger, seed = "0";
    double rate = 0.10;
    int patch = TriggerPatch::kDefaultSize;
    std::string weather, weather_scope = "poisoned", mode = "object", position = "uniform-within-mask";
    std::string target_fill = "zero", zero_semantics = "supervised";
    int severity = 0;
    int region_radius = 10;
    double tol = 1e-4;
    int max_iters = 10000;
    double theta_max = 60, recolor = 0.10, size_delta = 10, max_depth = 80;
    bool symmetric = false, no_perspective = false;
};

struct CorruptArgs {
    std::string in, out, weather, seed = "0";
    int severity = 1;
};

struct CompressArgs {
    std::string in, out;
    int quality = 60;
};

struct EvaluateArgs {
    std::string pred, gt, out, pred_clean, pred_triggered;
    bool region_mask = false, rd = false;
};

struct VerifyArgs {
    std::string index, source, manifest, trigger, report;
};

fs::path prediction_path(const fs::path& dir, const SampleEntry& e) {
    fs::path p = dir / (e.id + ".png");
    if (fs::exists(p)) return p;
    return dir / e.depth.filename();
}

int cmd_scene_gen(const SceneGenArgs& a, unsigned threads, std::ostream& out) {
    SceneVariation v;
    auto range = [](const std::vector<double>& r) -> std::optional<ParamRange> {
        if (r.empty()) return std::nullopt;
        return ParamRange{r[0], r[1]};
    };
    v.vehicle_distance = range(a.distance_range);
    v.vehicle_lateral_offset = range(a.lateral_range);
    v.vehicle_width = range(a.width_range);
    v.vehicle_height = range(a.height_range);
    const std::uint64_t seed = parse_u64(a.seed);
    const DatasetIndex idx = generate_dataset(a.n, a.base, v, seed, a.out, {parse_split(a.split), threads});
    auto rj = [](const std::optional<ParamRange>& r) { return r ? json{r->lo, r->hi} : json(nullptr); };
    const SceneParams& b = a.base;
    snapshot(fs::path(a.out) / kRunConfigFileName,
             {{"command", "scene-gen"},
              {"n", a.n},
              {"seed", seed},
              {"split", a.split},
              {"base",
               {{"image_width", b.image_width}, {"image_height", b.image_height},
                {"vehicle_distance", b.vehicle_distance}, {"vehicle_width", b.vehicle_width},
                {"vehicle_height", b.vehicle_height}, {"vehicle_lateral_offset", b.vehicle_lateral_offset},
                {"focal_length", b.focal_length}, {"camera_height", b.camera_height}, {"max_depth", b.max_depth}}},
              {"variation",
               {{"vehicle_distance", rj(v.vehicle_distance)}, {"vehicle_lateral_offset", rj(v.vehicle_lateral_offset)},
                {"vehicle_width", rj(v.vehicle_width)}, {"vehicle_height", rj(v.vehicle_height)}}},
              {"toolkit_version", kToolkitVersion}});
    out << "wrote " << idx.samples.size() << " samples to " << (fs::path(a.out) / DatasetIndex::kFileName).string()
        << "\n";
    return 0;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    const CameraColorModel cam = load_camera_config(a.camera);
    const TriggerPatch initial = a.init.empty() ? TriggerPatch::white(a.size) : load_trigger_png(a.init);
    const CalibrationResult r = calibrate_trigger(initial, cam, a.iterations);
    save_trigger_png(a.out, r.trigger);
    snapshot(sidecar(a.out), {{"command", "calibrate-trigger"},
                              {"camera", format_camera_config(cam)},
                              {"init", a.init.empty() ? json("white") : json(a.init)},
                              {"size", initial.width()},
                              {"iterations", a.iterations},
                              {"final_update", r.final_update},
                              {"trigger_sha256", trigger_sha256(r.trigger)},
                              {"toolkit_version", kToolkitVersion}});
    out << json{{"trigger", a.out}, {"iterations", r.iterations}, {"final_update", r.final_update}}.dump() << "\n";
    return 0;
}

int cmd_poison(const PoisonArgs& a, unsigned threads, bool strict, std::ostream& out, std::ostream& err) {
    PoisonConfig c;
    c.rate = a.rate;
    c.patch = a.trigger.empty() ? TriggerPatch::white(a.patch) : load_trigger_png(a.trigger);
    c.perspective_enabled = !a.no_perspective;
    c.augment.theta_max = a.theta_max;
    c.augment.symmetric_rotation = a.symmetric;
    c.augment.recolor_fraction = a.recolor;
    c.augment.size_delta = a.size_delta;
    c.augment.position_mode = parse_position_mode(a.position);
    if (!a.weather.empty()) {
        c.weather.enabled = true;
        if (a.weather != "random") c.weather.kind = parse_weather(a.weather);
        if (a.severity != 0) c.weather.severity = a.severity;
        c.weather.scope = parse_weather_scope(a.weather_scope);
    }
    c.region_radius = a.region_radius;
    c.solver = {a.tol, a.max_iters};
    c.seed = parse_u64(a.seed);
    c.mode = parse_poison_mode(a.mode);
    c.target_fill = parse_target_fill(a.target_fill);
    c.max_depth = a.max_depth;
    c.zero_semantics = parse_zero_semantics(a.zero_semantics);
    c.strict = strict;
    c.threads = threads;

    const DatasetIndex idx = read_index(a.index);
    const PoisonResult r = poison_dataset(idx, c, a.out);
    for (const auto& f : r.failures)
        err << json{{"status", "sample-failed"}, {"sample_id", f.sample_id}, {"message", f.message}}.dump() << "\n";
    out << r.manifest_path.string() << "\n";
    return 0;
}

int cmd_corrupt(const CorruptArgs& a, std::ostream& out) {
    const WeatherKind w{parse_weather(a.weather), a.severity, parse_u64(a.seed)};
    io::write_image_png(a.out, environment_augment(io::read_image(a.in), w));
    snapshot(sidecar(a.out), {{"command", "corrupt"},
                              {"in", a.in},
                              {"weather", to_string(w.kind)},
                              {"severity", w.severity},
                              {"seed", w.seed},
                              {"toolkit_version", kToolkitVersion}});
    out << a.out << "\n";
    return 0;
}

int cmd_compress(const CompressArgs& a, std::ostream& out) {
    io::write_image_png(a.out, compress(io::read_image(a.in), a.quality));
    snapshot(sidecar(a.out),
             {{"command", "compress"}, {"in", a.in}, {"quality", a.quality}, {"toolkit_version", kToolkitVersion}});
    out << a.out << "\n";
    return 0;
}

json report_json(const MetricsReport& r) {
    json j = {{"d1", r.d1}, {"d2", r.d2}, {"d3", r.d3}, {"abs_rel", r.abs_rel}, {"rmse", r.rmse},
              {"valid_pixel_count", r.valid_pixel_count}};
    if (r.region_d1) j["region_d1"] = *r.region_d1;
    return j;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const DatasetIndex gt = read_index(a.gt);
    std::ostringstream lines;
    if (a.rd) {
        if (a.pred_clean.empty() || a.pred_triggered.empty())
            throw InvalidArgument("--rd needs --pred-clean and --pred-triggered");
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& e : gt.samples) {
            if (!e.mask) throw InvalidArgument("sample " + e.id + " has no mask for R_d");
            const ObjectMask mask = io::read_mask_png(gt.resolve(*e.mask));
            if (mask.none()) continue;
            const double rd = depth_shift_rd(io::read_depth_png(prediction_path(a.pred_clean, e)),
                                             io::read_depth_png(prediction_path(a.pred_triggered, e)), mask);
            lines << json{{"sample_id", e.id}, {"r_d", rd}}.dump() << "\n";
            sum += rd;
            ++n;
        }
        if (n == 0) throw InvalidArgument("no samples with non-empty masks");
        lines << json{{"aggregate", {{"r_d", sum / n}, {"samples", n}}}}.dump() << "\n";
    } else {
        if (a.pred.empty()) throw InvalidArgument("--pred is required");
        json agg = {{"d1", 0.0}, {"d2", 0.0}, {"d3", 0.0}, {"abs_rel", 0.0}, {"rmse", 0.0}};
        double region_sum = 0.0;
        std::size_t n = 0, region_n = 0;
        for (const auto& e : gt.samples) {
            const DepthMap g = io::read_depth_png(gt.resolve(e.depth));
            const DepthMap p = io::read_depth_png(prediction_path(a.pred, e));
            std::optional<ObjectMask> mask;
            if (a.region_mask) {
                if (!e.mask) throw InvalidArgument("sample " + e.id + " has no mask for --region-mask");
                mask = io::read_mask_png(gt.resolve(*e.mask));
            }
            MetricsReport r = evaluate(p, g);
            if (mask && !mask->none()) {
                r.region_d1 = threshold_accuracy(p, g, 1, &*mask);
                region_sum += *r.region_d1;
                ++region_n;
            }
            json j = report_json(r);
            j["sample_id"] = e.id;
            lines << j.dump() << "\n";
            for (const char* k : {"d1", "d2", "d3", "abs_rel", "rmse"}) agg[k] = agg[k].get<double>() + j[k].get<double>();
            ++n;
        }
        if (n == 0) throw InvalidArgument("ground-truth index is empty");
        for (const char* k : {"d1", "d2", "d3", "abs_rel", "rmse"}) agg[k] = agg[k].get<double>() / n;
        agg["samples"] = n;
        if (region_n) agg["region_d1"] = region_sum / region_n;
        lines << json{{"aggregate", agg}}.dump() << "\n";
    }
    if (a.out.empty()) {
        out << lines.str();
    } else {
        io::write_text(a.out, lines.str());
        snapshot(sidecar(a.out), {{"command", "evaluate"},
                                  {"gt", a.gt},
                                  {"pred", a.pred},
                                  {"region_mask", a.region_mask},
                                  {"rd", a.rd},
                                  {"pred_clean", a.pred_clean},
                                  {"pred_triggered", a.pred_triggered},
                                  {"toolkit_version", kToolkitVersion}});
        out << a.out << "\n";
    }
    return 0;
}

int cmd_verify(const VerifyArgs& a, unsigned threads, bool strict, std::ostream& out) {
    const DatasetIndex poisoned = read_index(a.index);
    fs::path source_path = a.source;
    if (source_path.empty()) {
        std::ifstream in(poisoned.root / kRunConfigFileName);
        if (!in) throw InvalidArgument("--source not given and no run_config.json beside the index");
        source_path = json::parse(in).at("source_index").get<std::string>();
    }
    const DatasetIndex source = read_index(source_path);
    const fs::path manifest_path = a.manifest.empty() ? poisoned.root / kManifestFileName : fs::path(a.manifest);
    const PoisonManifest manifest = read_manifest(manifest_path);
    TriggerPatch trigger;
    if (!a.trigger.empty()) {
        trigger = load_trigger_png(a.trigger);
    } else {
        const int w = manifest.empty() ? TriggerPatch::kDefaultSize : manifest.front().trigger_width;
        const int h = manifest.empty() ? TriggerPatch::kDefaultSize : manifest.front().trigger_height;
        trigger = TriggerPatch(w, h);
    }
    const VerifyReport rep = verify_dataset(source, poisoned, manifest, trigger,
                                            read_clean_weather(poisoned.root / kCleanWeatherFileName), threads);
    std::ostringstream lines;
    for (const auto& v : rep.samples) {
        json j = {{"sample_id", v.sample_id}, {"poisoned", v.poisoned}, {"pass", v.pass()}};
        if (!v.pass()) j["failures"] = v.failures;
        lines << j.dump() << "\n";
    }
    lines << json{{"summary",
                   {{"samples", rep.samples.size()},
                    {"poisoned", manifest.size()},
                    {"failed", rep.failed()},
                    {"dataset_failures", rep.dataset_failures},
                    {"ok", rep.ok()}}}}
                 .dump()
          << "\n";
    if (a.report.empty()) {
        out << lines.str();
    } else {
        io::write_text(a.report, lines.str());
        snapshot(sidecar(a.report), {{"command", "verify"},
                                     {"index", a.index},
                                     {"source", source_path.generic_string()},
                                     {"manifest", manifest_path.generic_string()},
                                     {"trigger", a.trigger},
                                     {"toolkit_version", kToolkitVersion}});
        out << (rep.ok() ? "PASS " : "FAIL ") << a.report << "\n";
    }
    return (strict && !rep.ok()) ? 1 : 0;
}

void error_line(std::ostream& err, const std::string& command, const std::string& kind, const std::string& msg) {
    err << json{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", msg}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Object-level depth-dataset poisoning toolkit", "depthpoison"};
    app.footer(kFooter);
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 1;
    bool strict = false;
    int verbosity = 0;
    app.add_option("--threads", threads, "Worker threads (outputs do not depend on this)")->check(CLI::Range(1u, 256u));
    app.add_flag("--strict", strict, "Fail the run on any per-sample error or verification failure");
    app.add_flag("-v,--verbose", verbosity, "Increase log verbosity");

    std::function<int()> action;

    SceneGenArgs sg;
    auto* scene = app.add_subcommand("scene-gen", "Generate a synthetic (image, depth, mask) dataset");
    scene->add_option("--n", sg.n, "Number of samples")->check(CLI::PositiveNumber);
    scene->add_option("--seed", sg.seed, "Master seed (u64)");
    scene->add_option("--out", sg.out, "Output directory")->required();
    scene->add_option("--split", sg.split, "train | test");
    scene->add_option("--width", sg.base.image_width, "Image width");
    scene->add_option("--height", sg.base.image_height, "Image height");
    scene->add_option("--focal", sg.base.focal_length, "Focal length, pixels");
    scene->add_option("--camera-height", sg.base.camera_height, "Camera height, meters");
    scene->add_option("--max-depth", sg.base.max_depth, "Far-plane clamp, meters");
    scene->add_option("--distance", sg.base.vehicle_distance, "Vehicle distance when no range is given");
    scene->add_option("--vehicle-width", sg.base.vehicle_width, "Vehicle width, meters");
    scene->add_option("--vehicle-height", sg.base.vehicle_height, "Vehicle height, meters");
    scene->add_option("--lateral", sg.base.vehicle_lateral_offset, "Vehicle lateral offset when no range is given");
    scene->add_option("--distance-range", sg.distance_range, "lo hi (meters); empty disables")->expected(0, 2);
    scene->add_option("--lateral-range", sg.lateral_range, "lo hi (meters); empty disables")->expected(0, 2);
    scene->add_option("--width-range", sg.width_range, "lo hi (meters)")->expected(2);
    scene->add_option("--height-range", sg.height_range, "lo hi (meters)")->expected(2);
    scene->callback([&] { action = [&] { return cmd_scene_gen(sg, threads, out); }; });

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate-trigger", "Iterate the simulated print/capture loop on a trigger");
    cal->add_option("--camera", ca.camera, "Camera config (key = value)")->required();
    cal->add_option("--iterations", ca.iterations, "Rounds N")->check(CLI::NonNegativeNumber);
    cal->add_option("--size", ca.size, "Side of the initial white patch")->check(CLI::PositiveNumber);
    cal->add_option("--init", ca.init, "Initial trigger PNG (default: white)");
    cal->add_option("--out", ca.out, "Output trigger PNG")->required();
    cal->callback([&] { action = [&] { return cmd_calibrate(ca, out); }; });

    PoisonArgs pa;
    auto* poi = app.add_subcommand("poison", "Poison a dataset");
    poi->add_option("--index", pa.index, "Input index file or directory")->required();
    poi->add_option("--out", pa.out, "Output directory")->required();
    poi->add_option("--rate", pa.rate, "Poisoning rate in [0, 1]")->check(CLI::Range(0.0, 1.0));
    poi->add_option("--patch", pa.patch, "Side of the white trigger patch")->check(CLI::PositiveNumber);
    poi->add_option("--trigger", pa.trigger, "Trigger PNG (overrides --patch)");
    poi->add_option("--seed", pa.seed, "Master seed (u64)");
    poi->add_option("--weather", pa.weather, "fog | snow | frost | random (enables environment augmentation)");
    poi->add_option("--severity", pa.severity, "Weather severity 1..5 (default: drawn)")->check(CLI::Range(1, 5));
    poi->add_option("--weather-scope", pa.weather_scope, "poisoned | all");
    poi->add_option("--mode", pa.mode, "object | image");
    poi->add_option("--position", pa.position, "fixed | uniform-within-mask");
    poi->add_option("--theta-max", pa.theta_max, "Max rotation, degrees");
    poi->add_flag("--symmetric-rotation", pa.symmetric, "Draw rotation from [-theta_max, theta_max]");
    poi->add_option("--recolor", pa.recolor, "Recolor fraction");
    poi->add_option("--size-delta", pa.size_delta, "Patch size change, pixels");
    poi->add_flag("--no-perspective", pa.no_perspective, "Disable perspective augmentation");
    poi->add_option("--region-radius", pa.region_radius, "Completion band radius, pixels");
    poi->add_option("--tol", pa.tol, "Completion solver relative tolerance");
    poi->add_option("--max-iters", pa.max_iters, "Completion solver sweep limit");
    poi->add_option("--target-fill", pa.target_fill, "zero | max-depth");
    poi->add_option("--max-depth", pa.max_depth, "Depth used by --target-fill max-depth");
    poi->add_option("--zero-semantics", pa.zero_semantics, "supervised | invalid (recorded in the index)");
    poi->callback([&] { action = [&] { return cmd_poison(pa, threads, strict, out, err); }; });

    CorruptArgs co;
    auto* cor = app.add_subcommand("corrupt", "Apply a weather corruption to one image");
    cor->add_option("--in", co.in, "Input image")->required();
    cor->add_option("--out", co.out, "Output PNG")->required();
    cor->add_option("--weather", co.weather, "fog | snow | frost")->required();
    cor->add_option("--severity", co.severity, "1..5")->check(CLI::Range(1, 5));
    cor->add_option("--seed", co.seed, "Seed (u64)");
    cor->callback([&] { action = [&] { return cmd_corrupt(co, out); }; });

    CompressArgs cm;
    auto* com = app.add_subcommand("compress", "JPEG round trip at a quality, saved as PNG");
    com->add_option("--in", cm.in, "Input image")->required();
    com->add_option("--out", cm.out, "Output PNG")->required();
    com->add_option("--quality", cm.quality, "JPEG quality 1..100")->check(CLI::Range(1, 100));
    com->callback([&] { action = [&] { return cmd_compress(cm, out); }; });

    EvaluateArgs ev;
    auto* eva = app.add_subcommand("evaluate", "Depth metrics against a ground-truth index");
    eva->add_option("--gt", ev.gt, "Ground-truth index (clean depth)")->required();
    eva->add_option("--pred", ev.pred, "Prediction directory (<id>.png, depth PNG convention)");
    eva->add_flag("--region-mask", ev.region_mask, "Also report d1 restricted to each sample's mask");
    eva->add_flag("--rd", ev.rd, "Report R_d between clean and triggered predictions");
    eva->add_option("--pred-clean", ev.pred_clean, "Predictions on clean inputs (--rd)");
    eva->add_option("--pred-triggered", ev.pred_triggered, "Predictions on triggered inputs (--rd)");
    eva->add_option("--out", ev.out, "Report file (JSON lines); default stdout");
    eva->callback([&] { action = [&] { return cmd_evaluate(ev, out); }; });

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Re-check a poisoned dataset against its source");
    ver->add_option("--index", va.index, "Poisoned index")->required();
    ver->add_option("--source", va.source, "Clean source index (default: from run_config.json)");
    ver->add_option("--manifest", va.manifest, "Manifest (default: beside the index)");
    ver->add_option("--trigger", va.trigger, "Trigger PNG (default: white patch of the manifest size)");
    ver->add_option("--report", va.report, "Report file (JSON lines); default stdout");
    ver->callback([&] { action = [&] { return cmd_verify(va, threads, strict, out); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        error_line(err, "", "usage", e.what());
        return 2;
    }

    const std::string command = app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name();
    try {
        const int rc = action();
        if (verbosity > 0) err << json{{"status", "ok"}, {"command", command}}.dump() << "\n";
        return rc;
    } catch (const InvalidArgument& e) {
        error_line(err, command, "invalid-argument", e.what());
    } catch (const IoError& e) {
        error_line(err, command, "io", e.what());
    } catch (const std::exception& e) {
        error_line(err, command, "failure", e.what());
    }
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace depthpoison::cli
