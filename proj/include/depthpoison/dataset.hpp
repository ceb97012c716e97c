#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depthpoison/raster.hpp"

namespace depthpoison {

enum class Split { train, test };

/// How consumers should read a stored depth of 0: as a supervised target
/// ("the object is gone") or as missing ground truth.
enum class ZeroSemantics { supervised, invalid };

std::string_view to_string(Split s);
std::string_view to_string(ZeroSemantics z);
Split parse_split(std::string_view s);
ZeroSemantics parse_zero_semantics(std::string_view s);

struct SampleEntry {
    std::string id;
    std::filesystem::path image;  // relative to the index root
    std::filesystem::path depth;
    std::optional<std::filesystem::path> mask;
};

struct Sample {
    RasterImage image;
    DepthMap depth;
    std::optional<ObjectMask> mask;
};

/// Plain-text dataset index. File layout (one record per line, '#' comments):
///
///     # depthpoison dataset index v1
///     split train
///     zero_semantics supervised
///     sample <id> <image> <depth> <mask|->
///
/// Paths are relative to the directory holding the index file.
struct DatasetIndex {
    static constexpr const char* kFileName = "index.txt";

    std::filesystem::path root;
    Split split = Split::train;
    ZeroSemantics zero_semantics = ZeroSemantics::supervised;
    std::vector<SampleEntry> samples;

    std::filesystem::path resolve(const std::filesystem::path& rel) const { return root / rel; }
    const SampleEntry* find(std::string_view id) const;
};

/// Accepts either the index file itself or the directory containing it.
DatasetIndex read_index(const std::filesystem::path& path);
std::string format_index(const DatasetIndex& index);
void write_index(const DatasetIndex& index);

/// Unique ids, files present, per-sample dimensions agree. Throws on the first violation.
void validate_index(const DatasetIndex& index);

Sample load_sample(const DatasetIndex& index, const SampleEntry& entry);

/// Canonical relative file names for sample `n`.
std::string sample_id_for(std::size_t n);
SampleEntry standard_entry(std::size_t n, bool with_mask = true);

}  // namespace depthpoison
