#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "curvetrack/errors.hpp"

namespace curvetrack {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

// Dense 2D grid of doubles, row-major, pixel centers at integer coordinates.
class ScalarField {
public:
    ScalarField() = default;

    ScalarField(int width, int height, double value = 0.0)
        : width_(width), height_(height), v_(static_cast<size_t>(width) * height, value) {
        if (width < 2 || height < 2)
            throw param_error("ScalarField dimensions must be at least 2x2");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return v_.size(); }

    double operator()(int x, int y) const { return v_[static_cast<size_t>(y) * width_ + x]; }
    double& operator()(int x, int y) { return v_[static_cast<size_t>(y) * width_ + x]; }

    double operator[](size_t i) const { return v_[i]; }
    double& operator[](size_t i) { return v_[i]; }

    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }
    const double* row(int y) const { return v_.data() + static_cast<size_t>(y) * width_; }
    double* row(int y) { return v_.data() + static_cast<size_t>(y) * width_; }

    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    bool same_size(const ScalarField& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    void fill(double value) { std::fill(v_.begin(), v_.end(), value); }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> v_;
};

// Two-component field stored as separate planes.
struct VectorField {
    ScalarField u;
    ScalarField v;

    VectorField() = default;
    VectorField(int width, int height, double ux = 0.0, double vy = 0.0)
        : u(width, height, ux), v(width, height, vy) {}
    VectorField(ScalarField uc, ScalarField vc) : u(std::move(uc)), v(std::move(vc)) {
        if (!u.same_size(v)) throw param_error("VectorField components differ in size");
    }

    int width() const { return u.width(); }
    int height() const { return u.height(); }
    bool same_size(const VectorField& o) const { return u.same_size(o.u); }
    bool same_size(const ScalarField& o) const { return u.same_size(o); }

    double max_magnitude() const {
        double m = 0.0;
        const double* pu = u.data();
        const double* pv = v.data();
        for (size_t i = 0; i < u.size(); ++i)
            m = std::max(m, pu[i] * pu[i] + pv[i] * pv[i]);
        return std::sqrt(m);
    }
};

// Integer class labels drawn from {0, ..., num_classes-1}.
class LabelMap {
public:
    LabelMap() = default;

    LabelMap(int width, int height, int num_classes, uint8_t label = 0)
        : width_(width), height_(height), num_classes_(num_classes),
          labels_(static_cast<size_t>(width) * height, label) {
        if (width < 1 || height < 1) throw param_error("LabelMap dimensions must be positive");
        if (num_classes < 1) throw param_error("LabelMap needs at least one class");
        if (label >= num_classes) throw param_error("LabelMap fill label out of range");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int num_classes() const { return num_classes_; }
    size_t size() const { return labels_.size(); }

    uint8_t operator()(int x, int y) const { return labels_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t& operator()(int x, int y) { return labels_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t operator[](size_t i) const { return labels_[i]; }
    uint8_t& operator[](size_t i) { return labels_[i]; }

    const uint8_t* data() const { return labels_.data(); }
    uint8_t* data() { return labels_.data(); }

    size_t count(int label) const {
        return static_cast<size_t>(std::count(labels_.begin(), labels_.end(), label));
    }

private:
    int width_ = 0;
    int height_ = 0;
    int num_classes_ = 0;
    std::vector<uint8_t> labels_;
};

inline bool all_finite(const ScalarField& f) {
    for (double v : f.values())
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool all_finite(const VectorField& f) { return all_finite(f.u) && all_finite(f.v); }

// Central differences in the interior, one-sided at the border.
inline VectorField central_gradient(const ScalarField& f) {
    const int w = f.width(), h = f.height();
    VectorField g(w, h);
    for (int y = 0; y < h; ++y) {
        const double* r = f.row(y);
        double* gu = g.u.row(y);
        gu[0] = r[1] - r[0];
        for (int x = 1; x < w - 1; ++x) gu[x] = 0.5 * (r[x + 1] - r[x - 1]);
        gu[w - 1] = r[w - 1] - r[w - 2];
    }
    for (int y = 0; y < h; ++y) {
        const double* ra = f.row(y == 0 ? 0 : y - 1);
        const double* rb = f.row(y == h - 1 ? h - 1 : y + 1);
        const double s = (y == 0 || y == h - 1) ? 1.0 : 0.5;
        double* gv = g.v.row(y);
        for (int x = 0; x < w; ++x) gv[x] = s * (rb[x] - ra[x]);
    }
    return g;
}

// Bilinear interpolation; out-of-domain points clamp to the boundary.
inline double bilinear_sample(const ScalarField& f, double x, double y) {
    const int w = f.width(), h = f.height();
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 == w - 1) x0 = w - 2;
    if (y0 == h - 1) y0 = h - 2;
    const double fx = x - x0;
    const double fy = y - y0;
    const double* r0 = f.row(y0);
    const double* r1 = f.row(y0 + 1);
    const double top = r0[x0] + fx * (r0[x0 + 1] - r0[x0]);
    const double bot = r1[x0] + fx * (r1[x0 + 1] - r1[x0]);
    return top + fy * (bot - top);
}

inline double bilinear_sample(const ScalarField& f, Vec2 p) { return bilinear_sample(f, p.x, p.y); }

namespace detail {

// Normalized Gaussian taps for offsets -radius..radius, radius = ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable zero-padded convolution. Rows first, then columns accumulated
// row-wise so both passes stream contiguous memory.
inline void sep_convolve_zeropad(const ScalarField& in, const std::vector<double>& kernel,
                                 ScalarField& tmp, ScalarField& out) {
    const int w = in.width(), h = in.height();
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int y = 0; y < h; ++y) {
        const double* r = in.row(y);
        double* t = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            const int k0 = std::max(-radius, -x);
            const int k1 = std::min(radius, w - 1 - x);
            double acc = 0.0;
            for (int k = k0; k <= k1; ++k) acc += kernel[static_cast<size_t>(k + radius)] * r[x + k];
            t[x] = acc;
        }
    }
    out.fill(0.0);
    for (int y = 0; y < h; ++y) {
        double* o = out.row(y);
        const int k0 = std::max(-radius, -y);
        const int k1 = std::min(radius, h - 1 - y);
        for (int k = k0; k <= k1; ++k) {
            const double kv = kernel[static_cast<size_t>(k + radius)];
            const double* t = tmp.row(y + k);
            for (int x = 0; x < w; ++x) o[x] += kv * t[x];
        }
    }
}

// Per-position kernel mass inside [0, n) for border renormalization.
inline std::vector<double> border_weight_sums(const std::vector<double>& kernel, int n) {
    const int radius = static_cast<int>(kernel.size() / 2);
    std::vector<double> s(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        if (i >= radius && i < n - radius) continue;
        double acc = 0.0;
        const int k0 = std::max(-radius, -i);
        const int k1 = std::min(radius, n - 1 - i);
        for (int k = k0; k <= k1; ++k) acc += kernel[static_cast<size_t>(k + radius)];
        s[static_cast<size_t>(i)] = acc;
    }
    return s;
}

}  // namespace detail

// Truncated-kernel Gaussian smoothing with weights renormalized over
// in-domain pixels. sigma = 0 returns the input unchanged.
inline ScalarField gaussian_smooth(const ScalarField& f, double sigma) {
    if (sigma < 0.0) throw param_error("gaussian_smooth: sigma must be non-negative");
    if (sigma == 0.0) return f;
    const auto kernel = detail::gaussian_kernel(sigma);
    const int w = f.width(), h = f.height();
    ScalarField tmp(w, h), out(w, h);
    detail::sep_convolve_zeropad(f, kernel, tmp, out);
    const auto sx = detail::border_weight_sums(kernel, w);
    const auto sy = detail::border_weight_sums(kernel, h);
    for (int y = 0; y < h; ++y) {
        double* o = out.row(y);
        const double inv_y = 1.0 / sy[static_cast<size_t>(y)];
        for (int x = 0; x < w; ++x) o[x] *= inv_y / sx[static_cast<size_t>(x)];
    }
    return out;
}

// Per-class smoothing: each pixel mixes only with same-class pixels, so
// class boundaries stay step edges. Implemented as conv(f*m)/conv(m) per class.
inline ScalarField gaussian_smooth(const ScalarField& f, double sigma, const LabelMap& mask,
                                   int class_id) {
    if (sigma < 0.0) throw param_error("gaussian_smooth: sigma must be non-negative");
    if (f.width() != mask.width() || f.height() != mask.height())
        throw param_error("gaussian_smooth: mask dimensions do not match field");
    if (sigma == 0.0) return f;
    const auto kernel = detail::gaussian_kernel(sigma);
    const int w = f.width(), h = f.height();
    ScalarField masked(w, h, 0.0), indicator(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask(x, y) == class_id) {
                masked(x, y) = f(x, y);
                indicator(x, y) = 1.0;
            }
    ScalarField tmp(w, h), num(w, h), den(w, h);
    detail::sep_convolve_zeropad(masked, kernel, tmp, num);
    detail::sep_convolve_zeropad(indicator, kernel, tmp, den);
    ScalarField out = f;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask(x, y) == class_id) out(x, y) = num(x, y) / den(x, y);
    return out;
}

// All classes at once.
inline ScalarField gaussian_smooth(const ScalarField& f, double sigma, const LabelMap& mask) {
    ScalarField out = f;
    for (int c = 0; c < mask.num_classes(); ++c) {
        ScalarField s = gaussian_smooth(out, sigma, mask, c);
        out = std::move(s);
    }
    return out;
}

// Semi-Lagrangian sample: out(x) = f(x - disp(x)), clamped at the border.
inline ScalarField warp_backward(const ScalarField& f, const VectorField& disp) {
    if (!disp.same_size(f)) throw param_error("warp_backward: field sizes differ");
    const int w = f.width(), h = f.height();
    ScalarField out(w, h);
    for (int y = 0; y < h; ++y) {
        const double* du = disp.u.row(y);
        const double* dv = disp.v.row(y);
        double* o = out.row(y);
        for (int x = 0; x < w; ++x)
            o[x] = bilinear_sample(f, x - du[x], y - dv[x]);
    }
    return out;
}

}  // namespace curvetrack
