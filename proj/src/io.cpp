#include "depthpoison/io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "depthpoison/error.hpp"

namespace depthpoison::io {

namespace {

cv::Mat decode_raw(std::span<const std::uint8_t> bytes, int flags) {
    if (bytes.empty()) throw IoError("empty image buffer");
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat m = cv::imdecode(buf, flags);
    if (m.empty()) throw IoError("image decode failed");
    return m;
}

std::vector<std::uint8_t> encode_raw(const cv::Mat& m, const char* ext, const std::vector<int>& params) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(ext, m, out, params)) throw IoError(std::string("encode failed for ") + ext);
    return out;
}

// PNG output is fixed to compression level 6 so encodings are reproducible.
const std::vector<int> kPngParams{cv::IMWRITE_PNG_COMPRESSION, 6};

}  // namespace

double quantize_depth(double meters) {
    return static_cast<double>(encode_depth_value(meters)) / kDepthScale;
}

std::uint16_t encode_depth_value(double meters) {
    if (!std::isfinite(meters) || meters < 0.0) throw InvalidArgument("depth must be finite and >= 0");
    const double stored = std::nearbyint(meters * kDepthScale);
    if (stored > 65535.0) throw InvalidArgument("depth exceeds 16-bit range (255.996 m)");
    return static_cast<std::uint16_t>(stored);
}

std::vector<std::uint8_t> encode_depth_png(const DepthMap& depth) {
    cv::Mat m(depth.height(), depth.width(), CV_16UC1);
    for (int y = 0; y < depth.height(); ++y) {
        auto* row = m.ptr<std::uint16_t>(y);
        for (int x = 0; x < depth.width(); ++x) row[x] = encode_depth_value(depth.at(x, y));
    }
    return encode_raw(m, ".png", kPngParams);
}

DepthMap decode_depth_png(std::span<const std::uint8_t> bytes) {
    const cv::Mat m = decode_raw(bytes, cv::IMREAD_UNCHANGED);
    if (m.type() != CV_16UC1) throw IoError("depth PNG must be 16-bit single channel");
    DepthMap d(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint16_t>(y);
        for (int x = 0; x < m.cols; ++x) d.at(x, y) = static_cast<double>(row[x]) / kDepthScale;
    }
    return d;
}

void write_depth_png(const std::filesystem::path& path, const DepthMap& depth) {
    write_file(path, encode_depth_png(depth));
}

DepthMap read_depth_png(const std::filesystem::path& path) {
    try {
        return decode_depth_png(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_image_png(const RasterImage& image) {
    cv::Mat m(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width(); ++x) {
            // OpenCV stores BGR.
            row[3 * x + 0] = image.at(x, y, 2);
            row[3 * x + 1] = image.at(x, y, 1);
            row[3 * x + 2] = image.at(x, y, 0);
        }
    }
    return encode_raw(m, ".png", kPngParams);
}

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
    const cv::Mat m = decode_raw(bytes, cv::IMREAD_COLOR);
    if (m.type() != CV_8UC3) throw IoError("expected 8-bit color image");
    RasterImage img(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) {
            img.at(x, y, 0) = row[3 * x + 2];
            img.at(x, y, 1) = row[3 * x + 1];
            img.at(x, y, 2) = row[3 * x + 0];
        }
    }
    return img;
}

void write_image_png(const std::filesystem::path& path, const RasterImage& image) {
    write_file(path, encode_image_png(image));
}

RasterImage read_image(const std::filesystem::path& path) {
    try {
        return decode_image(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_mask_png(const std::filesystem::path& path, const ObjectMask& mask) {
    cv::Mat m(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) row[x] = mask.test(x, y) ? 255 : 0;
    }
    write_file(path, encode_raw(m, ".png", kPngParams));
}

ObjectMask read_mask_png(const std::filesystem::path& path) {
    cv::Mat m;
    try {
        m = decode_raw(read_file(path), cv::IMREAD_GRAYSCALE);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    ObjectMask mask(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) mask.at(x, y) = row[x] >= 128 ? 1 : 0;
    }
    return mask;
}

std::vector<std::uint8_t> encode_jpeg(const RasterImage& image, int quality) {
    if (quality < 1 || quality > 100) throw InvalidArgument("JPEG quality must be in [1, 100]");
    cv::Mat m(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width(); ++x) {
            row[3 * x + 0] = image.at(x, y, 2);
            row[3 * x + 1] = image.at(x, y, 1);
            row[3 * x + 2] = image.at(x, y, 0);
        }
    }
    return encode_raw(m, ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace depthpoison::io
