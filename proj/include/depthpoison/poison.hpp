#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "depthpoison/augment.hpp"
#include "depthpoison/dataset.hpp"
#include "depthpoison/depth_edit.hpp"
#include "depthpoison/trigger.hpp"

namespace depthpoison {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr const char* kManifestFileName = "manifest.jsonl";
inline constexpr const char* kCleanWeatherFileName = "clean_weather.jsonl";
inline constexpr const char* kFailuresFileName = "failures.jsonl";
inline constexpr const char* kRunConfigFileName = "run_config.json";

/// object_level: trigger on the object, object depth removed, surroundings completed.
/// image_level: trigger at a fixed spot, whole depth map replaced by one fixed target.
enum class PoisonMode { object_level, image_level };
enum class TargetFill { zero, max_depth };
enum class WeatherScope { poisoned, all };

std::string_view to_string(PoisonMode m);
std::string_view to_string(TargetFill f);
std::string_view to_string(WeatherScope s);
PoisonMode parse_poison_mode(std::string_view s);
TargetFill parse_target_fill(std::string_view s);
WeatherScope parse_weather_scope(std::string_view s);

struct WeatherConfig {
    bool enabled = false;
    std::optional<Weather> kind;  // unset: drawn per sample
    std::optional<int> severity;  // unset: drawn per sample from 1..5
    WeatherScope scope = WeatherScope::poisoned;
};

struct PoisonConfig {
    double rate = 0.10;
    TriggerPatch patch = TriggerPatch::white();
    bool perspective_enabled = true;
    AugmentParams augment;  // augment.seed is ignored; per-sample seeds derive from `seed`
    WeatherConfig weather;
    int region_radius = 10;
    SolverOptions solver;
    std::uint64_t seed = 0;
    PoisonMode mode = PoisonMode::object_level;
    TargetFill target_fill = TargetFill::zero;
    double max_depth = 80.0;  // fill value when target_fill = max_depth
    ZeroSemantics zero_semantics = ZeroSemantics::supervised;
    bool strict = false;
    unsigned threads = 1;  // does not affect outputs
};

double fill_value(const PoisonConfig& config);

/// Resolved configuration as JSON; excludes `threads`. Its SHA-256 is the
/// manifest's config hash.
nlohmann::json config_to_json(const PoisonConfig& config);

/// One line of manifest.jsonl, i.e. one poisoned sample.
struct ManifestEntry {
    std::string sample_id;
    PoisonMode mode = PoisonMode::object_level;
    std::string trigger_sha256;
    int trigger_width = 0;
    int trigger_height = 0;
    TriggerPlacement placement;
    std::optional<PerspectiveDraw> draw;
    std::optional<WeatherKind> weather;
    int region_radius = 0;
    SolverOptions solver_options;
    SolverStats solver_stats;
    double fill_value = 0.0;
    std::string target_source;  // image_level: sample whose edited depth is the fixed target
    std::string config_sha256;
    std::string toolkit_version = kToolkitVersion;
};

using PoisonManifest = std::vector<ManifestEntry>;

nlohmann::json to_json(const ManifestEntry& e);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& path, const PoisonManifest& manifest);
PoisonManifest read_manifest(const std::filesystem::path& path);

/// Weather applied to unpoisoned samples when WeatherScope::all is chosen.
using CleanWeatherLog = std::map<std::string, WeatherKind>;
void write_clean_weather(const std::filesystem::path& path, const CleanWeatherLog& log);
CleanWeatherLog read_clean_weather(const std::filesystem::path& path);

/// floor(rate * n), robust to the representation error of decimal rates.
std::size_t poison_count(std::size_t n, double rate);

/// Deterministic subset of `eligible` with poison_count(total, rate) members,
/// returned sorted. Throws if too few samples are eligible.
std::vector<std::string> select_poison_set(std::vector<std::string> eligible, std::size_t total, double rate,
                                           std::uint64_t seed);

/// SHA-256 of the trigger's 8-bit rendering (dimensions included).
std::string trigger_sha256(const TriggerPatch& trigger);

struct SampleFailure {
    std::string sample_id;
    std::string message;
};

struct PoisonResult {
    DatasetIndex index;
    PoisonManifest manifest;
    CleanWeatherLog clean_weather;
    std::vector<SampleFailure> failures;
    std::filesystem::path manifest_path;
};

/// Writes the poisoned dataset to `out`: same layout and file names as the
/// input, index.txt, manifest.jsonl, run_config.json and, when non-empty,
/// failures.jsonl / clean_weather.jsonl. A failing sample is copied clean and
/// recorded; with config.strict the call then throws after writing.
PoisonResult poison_dataset(const DatasetIndex& index, const PoisonConfig& config, const std::filesystem::path& out);

struct PoisonedPair {
    RasterImage image;
    DepthMap depth;
};

/// Rebuilds a poisoned sample from its clean source and manifest entry.
/// `fixed_target` is required for image_level entries.
PoisonedPair replay_entry(const Sample& clean, const ManifestEntry& entry, const TriggerPatch& trigger,
                          const DepthMap* fixed_target = nullptr);

/// Edited depth of an image_level entry's target source sample.
DepthMap image_level_target(const Sample& source, const ManifestEntry& entry);

struct SampleVerdict {
    std::string sample_id;
    bool poisoned = false;
    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

struct VerifyReport {
    std::vector<SampleVerdict> samples;
    std::vector<std::string> dataset_failures;
    std::size_t failed() const;
    bool ok() const { return failed() == 0 && dataset_failures.empty(); }
};

/// Re-checks a poisoned dataset against its clean source: placement on the
/// mask, locality of the trigger edit, the depth trichotomy for poisoned
/// samples, and bit-identity of clean samples.
VerifyReport verify_dataset(const DatasetIndex& source, const DatasetIndex& poisoned, const PoisonManifest& manifest,
                            const TriggerPatch& trigger, const CleanWeatherLog& clean_weather = {},
                            unsigned threads = 1);

}  // namespace depthpoison
