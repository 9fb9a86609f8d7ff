// Basic 2-D vector/matrix types shared by all modules.
#ifndef HENON_GEOMETRY_HPP
#define HENON_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace henon {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 normalized(const Vec2& v) {
    double n = v.norm();
    return n > 0 ? v / n : Vec2{0, 0};
}

// |v_y / v_x|, +inf for vertical vectors.
inline double slope_of(const Vec2& v) {
    if (v.x == 0.0) return std::numeric_limits<double>::infinity();
    return std::fabs(v.y / v.x);
}

// Unsigned angle between two directions, insensitive to sign flips of either.
inline double line_angle(const Vec2& a, const Vec2& b) {
    double c = std::fabs(dot(normalized(a), normalized(b)));
    if (c > 1.0) c = 1.0;
    return std::acos(c);
}

// Column-major-free tiny 2x2 matrix: [[a, b], [c, d]].
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;

    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 operator*(const Mat2& m) const {
        return {a * m.a + b * m.c, a * m.b + b * m.d,
                c * m.a + d * m.c, c * m.b + d * m.d};
    }
    double det() const { return a * d - b * c; }
    // Spectral norm via singular values.
    double norm() const;
    Mat2 transpose() const { return {a, c, b, d}; }
    Mat2 inverse() const {
        double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
};

// Singular values sigma1 >= sigma2 >= 0 of a 2x2 matrix, closed form.
struct Svd2 {
    double s1 = 0, s2 = 0;  // singular values, s1 >= s2
    Vec2 u1, u2;            // left singular vectors
    Vec2 v1, v2;            // right singular vectors; M v1 = s1 u1
};

Svd2 svd2(const Mat2& m);

inline double Mat2::norm() const { return svd2(*this).s1; }

struct BBox {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void absorb(const Vec2& p) {
        if (p.x < xmin) xmin = p.x;
        if (p.x > xmax) xmax = p.x;
        if (p.y < ymin) ymin = p.y;
        if (p.y > ymax) ymax = p.y;
    }
    bool contains(const Vec2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    // Euclidean distance to the box, 0 inside.
    double dist(const Vec2& p) const {
        double dx = std::max({xmin - p.x, 0.0, p.x - xmax});
        double dy = std::max({ymin - p.y, 0.0, p.y - ymax});
        return std::hypot(dx, dy);
    }
};

// Closed polygon with a column grid for fast even-odd membership tests.
class PolygonRegion {
public:
    PolygonRegion() = default;
    explicit PolygonRegion(std::vector<Vec2> boundary, int columns = 2048);

    bool contains(const Vec2& p) const;
    const std::vector<Vec2>& boundary() const { return pts_; }
    const BBox& bbox() const { return box_; }
    bool empty() const { return pts_.size() < 3; }

    // Distance from p to the boundary polyline (exact over candidate segments).
    double boundary_distance(const Vec2& p) const;
    // Same, but only exact up to `cutoff`: returns cutoff when farther.
    // Uses the column grid, cheap for points near the boundary.
    double boundary_distance_within(const Vec2& p, double cutoff) const;

private:
    std::vector<Vec2> pts_;  // closed implicitly: last connects to first
    BBox box_;
    int ncols_ = 0;
    double col_w_ = 0;
    std::vector<std::vector<uint32_t>> col_segs_;  // segment indices touching column
};

// Segment intersection: returns true and fills t,u in [0,1] if proper or touching.
bool segment_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1,
                       double* t, double* u);

}  // namespace henon

#endif
