#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gda/gmm.hpp"
#include "gda/io.hpp"

namespace gda::plot {

using Color = std::array<float, 3>;

inline constexpr Color kBlack{0.f, 0.f, 0.f};
inline constexpr Color kWhite{1.f, 1.f, 1.f};
inline constexpr Color kGrid{0.88f, 0.88f, 0.88f};

inline Color palette(int i) {
    static const Color table[] = {{0.12f, 0.47f, 0.71f}, {1.00f, 0.50f, 0.05f}, {0.17f, 0.63f, 0.17f}, {0.84f, 0.15f, 0.16f},
                                  {0.58f, 0.40f, 0.74f}, {0.55f, 0.34f, 0.29f}, {0.89f, 0.47f, 0.76f}, {0.50f, 0.50f, 0.50f},
                                  {0.74f, 0.74f, 0.13f}, {0.09f, 0.75f, 0.81f}};
    return table[static_cast<std::size_t>(i) % std::size(table)];
}

namespace detail {

struct Glyph {
    char ch;
    std::array<std::uint8_t, 7> rows;
};

// 5x7 bitmaps, bit 4 = leftmost column.
inline const Glyph* find_glyph(char c) {
    static const Glyph font[] = {
        {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
        {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
        {'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
        {'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
        {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
        {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
        {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
        {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}},
        {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
        {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
        {'A', {0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
        {'B', {0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110}},
        {'C', {0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110}},
        {'D', {0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100}},
        {'E', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111}},
        {'F', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000}},
        {'G', {0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111}},
        {'H', {0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
        {'I', {0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
        {'J', {0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100}},
        {'K', {0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001}},
        {'L', {0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111}},
        {'M', {0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001}},
        {'N', {0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001}},
        {'O', {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
        {'P', {0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000}},
        {'Q', {0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101}},
        {'R', {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001}},
        {'S', {0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110}},
        {'T', {0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100}},
        {'U', {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
        {'V', {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
        {'W', {0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010}},
        {'X', {0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001}},
        {'Y', {0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100}},
        {'Z', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111}},
        {'.', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b01100}},
        {'-', {0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000}},
        {'+', {0b00000, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0b00000}},
        {'=', {0b00000, 0b00000, 0b11111, 0b00000, 0b11111, 0b00000, 0b00000}},
        {':', {0b00000, 0b01100, 0b01100, 0b00000, 0b01100, 0b01100, 0b00000}},
        {'(', {0b00010, 0b00100, 0b01000, 0b01000, 0b01000, 0b00100, 0b00010}},
        {')', {0b01000, 0b00100, 0b00010, 0b00010, 0b00010, 0b00100, 0b01000}},
        {',', {0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b00100, 0b01000}},
        {'/', {0b00001, 0b00010, 0b00010, 0b00100, 0b01000, 0b01000, 0b10000}},
        {'_', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b11111}},
        {'*', {0b00000, 0b00100, 0b10101, 0b01110, 0b10101, 0b00100, 0b00000}},
    };
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : font)
        if (g.ch == u) return &g;
    return nullptr;
}

}  // namespace detail

/// RGB raster with simple drawing primitives.
class Canvas {
public:
    Canvas(int width, int height) : img_(height, width, 3) { std::fill(img_.data.begin(), img_.data.end(), 1.0f); }

    int width() const { return img_.width; }
    int height() const { return img_.height; }
    const Image& image() const { return img_; }

    void pixel(int x, int y, const Color& c) {
        if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
        for (int ch = 0; ch < 3; ++ch) img_.at(y, x, ch) = c[static_cast<std::size_t>(ch)];
    }
    Color get(int x, int y) const {
        return {img_.at(y, x, 0), img_.at(y, x, 1), img_.at(y, x, 2)};
    }
    void fill_rect(int x0, int y0, int x1, int y1, const Color& c) {
        for (int y = std::max(0, y0); y < std::min(img_.height, y1); ++y)
            for (int x = std::max(0, x0); x < std::min(img_.width, x1); ++x) pixel(x, y, c);
    }
    void line(int x0, int y0, int x1, int y1, const Color& c) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            pixel(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }
    void dot(int cx, int cy, int r, const Color& c) {
        for (int y = -r; y <= r; ++y)
            for (int x = -r; x <= r; ++x)
                if (x * x + y * y <= r * r) pixel(cx + x, cy + y, c);
    }
    /// Text with 5x7 glyphs scaled by `scale`; unknown characters render blank.
    void text(int x, int y, const std::string& s, const Color& c, int scale = 1) {
        for (char ch : s) {
            if (const auto* g = detail::find_glyph(ch)) {
                for (int r = 0; r < 7; ++r)
                    for (int col = 0; col < 5; ++col)
                        if (g->rows[static_cast<std::size_t>(r)] & (1u << (4 - col)))
                            fill_rect(x + col * scale, y + r * scale, x + (col + 1) * scale, y + (r + 1) * scale, c);
            }
            x += 6 * scale;
        }
    }
    static int text_width(const std::string& s, int scale = 1) { return static_cast<int>(s.size()) * 6 * scale; }

    void save(const fs::path& path) const { write_png(path, img_); }

private:
    Image img_;
};

inline std::string format_number(double v, int decimals = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

/// Row-normalized (K+1) x (K+1) confusion heatmap; the last row/column is UNK.
inline Canvas confusion_heatmap(const std::vector<std::vector<std::int64_t>>& rows, const std::string& title) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw Error("confusion_heatmap: empty matrix");
    const int cell = 36, left = 56, top = 40;
    Canvas cv(left + n * cell + 20, top + n * cell + 40);
    cv.text(8, 10, title, kBlack, 2);
    for (int t = 0; t < n; ++t) {
        std::int64_t sum = 0;
        for (auto v : rows[static_cast<std::size_t>(t)]) sum += v;
        for (int p = 0; p < n; ++p) {
            const double frac = sum > 0 ? static_cast<double>(rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]) / sum : 0.0;
            const Color c{static_cast<float>(1.0 - 0.85 * frac), static_cast<float>(1.0 - 0.65 * frac), static_cast<float>(1.0 - 0.25 * frac)};
            const int x0 = left + p * cell, y0 = top + t * cell;
            cv.fill_rect(x0, y0, x0 + cell, y0 + cell, c);
            cv.line(x0, y0, x0 + cell, y0, kGrid);
            cv.line(x0, y0, x0, y0 + cell, kGrid);
            const std::string label = std::to_string(static_cast<int>(std::lround(frac * 100.0)));
            cv.text(x0 + (cell - Canvas::text_width(label)) / 2, y0 + cell / 2 - 3, label, frac > 0.5 ? kWhite : kBlack);
        }
        const std::string name = t == n - 1 ? "UNK" : std::to_string(t);
        cv.text(left - Canvas::text_width(name) - 6, top + t * cell + cell / 2 - 3, name, kBlack);
        cv.text(left + t * cell + (cell - Canvas::text_width(name)) / 2, top + n * cell + 6, name, kBlack);
    }
    cv.text(left, top + n * cell + 22, "ROWS TRUE, COLUMNS PREDICTED (PERCENT)", kBlack);
    return cv;
}

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Axes with markers and connecting lines; y range is [y_lo, y_hi].
inline Canvas line_plot(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                        const std::string& y_label, double y_lo = 0.0, double y_hi = 1.0) {
    if (series.empty()) throw Error("line_plot: no series");
    double x_lo = series[0].x.at(0), x_hi = x_lo;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty()) throw Error("line_plot: malformed series '" + s.name + "'");
        for (double v : s.x) {
            x_lo = std::min(x_lo, v);
            x_hi = std::max(x_hi, v);
        }
    }
    if (x_hi == x_lo) {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    const int W = 520, H = 360, left = 60, right = 20, top = 40, bottom = 50;
    Canvas cv(W, H);
    const int pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * pw)); };
    auto py = [&](double y) { return top + ph - static_cast<int>(std::lround((std::clamp(y, y_lo, y_hi) - y_lo) / (y_hi - y_lo) * ph)); };
    cv.text(8, 10, title, kBlack, 2);
    for (int i = 0; i <= 4; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / 4.0;
        cv.line(left, py(y), left + pw, py(y), kGrid);
        const auto lab = format_number(y, 2);
        cv.text(left - Canvas::text_width(lab) - 4, py(y) - 3, lab, kBlack);
    }
    std::vector<double> ticks;
    for (const auto& s : series) ticks.insert(ticks.end(), s.x.begin(), s.x.end());
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    for (double t : ticks) {
        const auto lab = format_number(t, t == std::round(t) ? 0 : 2);
        cv.line(px(t), top + ph, px(t), top + ph + 4, kBlack);
        cv.text(px(t) - Canvas::text_width(lab) / 2, top + ph + 8, lab, kBlack);
    }
    cv.line(left, top, left, top + ph, kBlack);
    cv.line(left, top + ph, left + pw, top + ph, kBlack);
    cv.text(left + (pw - Canvas::text_width(x_label)) / 2, H - 18, x_label, kBlack);
    cv.text(4, top - 12, y_label, kBlack);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const Color c = palette(static_cast<int>(si));
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i > 0) cv.line(px(s.x[i - 1]), py(s.y[i - 1]), px(s.x[i]), py(s.y[i]), c);
            cv.dot(px(s.x[i]), py(s.y[i]), 3, c);
        }
        const int ly = top + 6 + static_cast<int>(si) * 12;
        cv.fill_rect(left + pw - 110, ly, left + pw - 100, ly + 7, c);
        cv.text(left + pw - 95, ly, s.name, kBlack);
    }
    return cv;
}

/// 2-D scatter coloured by integer group.
inline Canvas scatter_plot(const std::vector<std::array<double, 2>>& points, const std::vector<int>& groups, const std::string& title) {
    if (points.size() != groups.size()) throw Error("scatter_plot: group count mismatch");
    if (points.empty()) throw Error("scatter_plot: no points");
    double x_lo = points[0][0], x_hi = x_lo, y_lo = points[0][1], y_hi = y_lo;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p[0]);
        x_hi = std::max(x_hi, p[0]);
        y_lo = std::min(y_lo, p[1]);
        y_hi = std::max(y_hi, p[1]);
    }
    const double xs = x_hi > x_lo ? x_hi - x_lo : 1.0, ys = y_hi > y_lo ? y_hi - y_lo : 1.0;
    const int W = 440, H = 440, margin = 30, top = 40;
    Canvas cv(W, H);
    cv.text(8, 10, title, kBlack, 2);
    const int pw = W - 2 * margin, ph = H - top - margin;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int x = margin + static_cast<int>(std::lround((points[i][0] - x_lo) / xs * pw));
        const int y = top + ph - static_cast<int>(std::lround((points[i][1] - y_lo) / ys * ph));
        cv.dot(x, y, 2, palette(groups[i]));
    }
    std::vector<int> seen(groups.begin(), groups.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        const int ly = top + static_cast<int>(i) * 12;
        cv.fill_rect(W - 70, ly, W - 62, ly + 7, palette(seen[i]));
        cv.text(W - 56, ly, std::to_string(seen[i]), kBlack);
    }
    return cv;
}

/// Projection onto the top two principal components. Each axis is signed so
/// that its largest-magnitude loading is positive.
inline std::vector<std::array<double, 2>> pca_2d(const FeatureMatrix& features) {
    if (features.rows() < 2) throw Error("pca_2d: need at least two rows");
    const Eigen::RowVectorXd mean = features.colwise().mean();
    const Eigen::MatrixXd centered = features.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(features.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const auto d = cov.rows();
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(features.rows()));
    for (int a = 0; a < 2; ++a) {
        Eigen::VectorXd axis = d - 1 - a >= 0 ? Eigen::VectorXd(eig.eigenvectors().col(d - 1 - a)) : Eigen::VectorXd::Zero(d);
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0) axis = -axis;
        const Eigen::VectorXd proj = centered * axis;
        for (Eigen::Index i = 0; i < features.rows(); ++i) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] = proj(i);
    }
    return out;
}

}  // namespace gda::plot
