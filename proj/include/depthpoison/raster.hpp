#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace depthpoison {

/// Row-major single-channel grid. Base for depth maps and masks.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width < 0 || height < 0) throw std::invalid_argument("negative grid dimensions");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(int w, int h) const { return w == width_ && h == height_; }
    template <typename U>
    bool same_shape(const Grid<U>& other) const { return same_shape(other.width(), other.height()); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Depths in meters. 0 marks an invalid or attack-removed pixel.
class DepthMap : public Grid<double> {
public:
    using Grid::Grid;
};

/// Binary mask; any non-zero byte counts as set.
class ObjectMask : public Grid<std::uint8_t> {
public:
    using Grid::Grid;

    bool test(int x, int y) const { return at(x, y) != 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : data()) n += (b != 0);
        return n;
    }
    bool none() const { return count() == 0; }
};

/// 8-bit RGB raster, interleaved, row-major.
class RasterImage {
public:
    static constexpr int kChannels = 3;

    RasterImage() = default;
    RasterImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height) {
        if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
        data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::uint8_t& at(int x, int y, int c) { return data_[offset(x, y) + c]; }
    std::uint8_t at(int x, int y, int c) const { return data_[offset(x, y) + c]; }

    std::vector<std::uint8_t>& data() { return data_; }
    const std::vector<std::uint8_t>& data() const { return data_; }

    template <typename G>
    bool same_shape(const G& g) const { return g.width() == width_ && g.height() == height_; }

    friend bool operator==(const RasterImage& a, const RasterImage& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

inline std::uint8_t clamp_to_byte(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(v + 0.5);
}

}  // namespace depthpoison
