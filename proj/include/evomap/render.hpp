#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace evomap::render {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

class Image {
public:
    Image(int width, int height, Rgb fill = {255, 255, 255})
        : width_(width), height_(height), pixels_(width * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        pixels_[y * width_ + x] = c;
    }

    void fill_rect(int x0, int y0, int w, int h, Rgb c) {
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x) set(x, y, c);
    }

    // Binary PPM (P6).
    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write image: " + path.string());
        out << "P6\n" << width_ << " " << height_ << "\n255\n";
        for (const Rgb& p : pixels_) {
            out.put(static_cast<char>(p.r));
            out.put(static_cast<char>(p.g));
            out.put(static_cast<char>(p.b));
        }
    }

private:
    int width_, height_;
    std::vector<Rgb> pixels_;
};

// Cold blue through warm red over [0,1].
inline Rgb heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    auto lerp = [](double a, double b, double t) {
        return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
    };
    return {lerp(40, 220, v), lerp(60, 60, v), lerp(200, 40, v)};
}

// Fitness-colored grid with empty cells drawn gray. Row 0 is drawn at the
// bottom.
inline Image render_fitness_grid(const std::vector<std::vector<std::optional<double>>>& grid,
                                 double max_fitness, int cell_pixels = 8) {
    int rows = static_cast<int>(grid.size());
    int cols = rows > 0 ? static_cast<int>(grid[0].size()) : 0;
    Image img(cols * cell_pixels, rows * cell_pixels);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            Rgb color = {210, 210, 210};
            if (grid[r][c])
                color = heat_color(max_fitness > 0 ? *grid[r][c] / max_fitness : 0.0);
            img.fill_rect(c * cell_pixels, (rows - 1 - r) * cell_pixels, cell_pixels,
                          cell_pixels, color);
        }
    return img;
}

inline Image render_histogram(const std::map<int, int>& histogram, int bar_width = 8,
                              int height = 120) {
    if (histogram.empty()) return Image(bar_width, height);
    int lo = histogram.begin()->first;
    int hi = histogram.rbegin()->first;
    int max_count = 1;
    for (const auto& [k, v] : histogram) max_count = std::max(max_count, v);
    int bins = hi - lo + 1;
    Image img(bins * bar_width, height);
    for (int bin = 0; bin < bins; ++bin) {
        auto it = histogram.find(lo + bin);
        int count = it == histogram.end() ? 0 : it->second;
        int bar = static_cast<int>(std::lround(static_cast<double>(count) / max_count *
                                               (height - 2)));
        img.fill_rect(bin * bar_width, height - bar, bar_width - 1, bar, {60, 90, 200});
    }
    return img;
}

}  // namespace evomap::render
