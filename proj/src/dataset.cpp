#include "depthpoison/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "depthpoison/error.hpp"
#include "depthpoison/io.hpp"

namespace depthpoison {

namespace fs = std::filesystem;

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::string_view to_string(ZeroSemantics z) {
    return z == ZeroSemantics::supervised ? "supervised" : "invalid";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw InvalidArgument("unknown split '" + std::string(s) + "'");
}

ZeroSemantics parse_zero_semantics(std::string_view s) {
    if (s == "supervised") return ZeroSemantics::supervised;
    if (s == "invalid") return ZeroSemantics::invalid;
    throw InvalidArgument("unknown zero semantics '" + std::string(s) + "'");
}

const SampleEntry* DatasetIndex::find(std::string_view id) const {
    for (const auto& s : samples)
        if (s.id == id) return &s;
    return nullptr;
}

DatasetIndex read_index(const fs::path& path) {
    const fs::path file = fs::is_directory(path) ? path / DatasetIndex::kFileName : path;
    std::ifstream in(file);
    if (!in) throw IoError("cannot open index " + file.string());

    DatasetIndex index;
    index.root = file.parent_path().empty() ? fs::path(".") : file.parent_path();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        auto bad = [&](const std::string& why) {
            return IoError(file.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        if (key == "split") {
            std::string v;
            ss >> v;
            index.split = parse_split(v);
        } else if (key == "zero_semantics") {
            std::string v;
            ss >> v;
            index.zero_semantics = parse_zero_semantics(v);
        } else if (key == "sample") {
            SampleEntry e;
            std::string image, depth, mask;
            if (!(ss >> e.id >> image >> depth >> mask)) throw bad("sample record needs 4 fields");
            e.image = image;
            e.depth = depth;
            if (mask != "-") e.mask = fs::path(mask);
            index.samples.push_back(std::move(e));
        } else {
            throw bad("unknown record '" + key + "'");
        }
    }
    return index;
}

std::string format_index(const DatasetIndex& index) {
    std::ostringstream out;
    out << "# depthpoison dataset index v1\n";
    out << "split " << to_string(index.split) << "\n";
    out << "zero_semantics " << to_string(index.zero_semantics) << "\n";
    for (const auto& s : index.samples) {
        out << "sample " << s.id << ' ' << s.image.generic_string() << ' ' << s.depth.generic_string() << ' '
            << (s.mask ? s.mask->generic_string() : std::string("-")) << "\n";
    }
    return out.str();
}

void write_index(const DatasetIndex& index) {
    io::write_text(index.root / DatasetIndex::kFileName, format_index(index));
}

void validate_index(const DatasetIndex& index) {
    std::set<std::string> seen;
    for (const auto& s : index.samples) {
        if (!seen.insert(s.id).second) throw InvalidArgument("duplicate sample id " + s.id);
        const Sample sample = load_sample(index, s);
        if (!sample.image.same_shape(sample.depth))
            throw InvalidArgument("sample " + s.id + ": image and depth dimensions differ");
        if (sample.mask && !sample.mask->same_shape(sample.depth))
            throw InvalidArgument("sample " + s.id + ": mask and depth dimensions differ");
    }
}

Sample load_sample(const DatasetIndex& index, const SampleEntry& entry) {
    Sample s;
    s.image = io::read_image(index.resolve(entry.image));
    s.depth = io::read_depth_png(index.resolve(entry.depth));
    if (entry.mask) s.mask = io::read_mask_png(index.resolve(*entry.mask));
    if (!s.image.same_shape(s.depth) || (s.mask && !s.mask->same_shape(s.depth)))
        throw IoError("sample " + entry.id + ": image, depth and mask dimensions differ");
    return s;
}

std::string sample_id_for(std::size_t n) {
    std::ostringstream ss;
    ss << std::setw(6) << std::setfill('0') << n;
    return ss.str();
}

SampleEntry standard_entry(std::size_t n, bool with_mask) {
    const std::string id = sample_id_for(n);
    SampleEntry e;
    e.id = id;
    e.image = fs::path("images") / (id + ".png");
    e.depth = fs::path("depth") / (id + ".png");
    if (with_mask) e.mask = fs::path("masks") / (id + ".png");
    return e;
}

}  // namespace depthpoison
