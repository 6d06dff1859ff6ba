#pragma once

#include <cmath>
#include <complex>

namespace diskpatch {

using cplx = std::complex<double>;

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    Vec2& operator+=(Vec2 o) { x1 += o.x1; x2 += o.x2; return *this; }
    Vec2& operator-=(Vec2 o) { x1 -= o.x1; x2 -= o.x2; return *this; }
    Vec2& operator*=(double s) { x1 *= s; x2 *= s; return *this; }
    bool operator==(const Vec2&) const = default;
};

using Point = Vec2;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator-(Vec2 a) { return {-a.x1, -a.x2}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x1, s * a.x2}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x1 / s, a.x2 / s}; }

inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(Vec2 a, Vec2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }
inline double norm2(Vec2 a) { return a.x1 * a.x1 + a.x2 * a.x2; }
// a-perp = (a2, -a1)
inline Vec2 perp(Vec2 a) { return {a.x2, -a.x1}; }
// counterclockwise quarter turn
inline Vec2 rot90(Vec2 a) { return {-a.x2, a.x1}; }

inline cplx to_c(Vec2 a) { return {a.x1, a.x2}; }
inline Vec2 to_v(cplx z) { return {z.real(), z.imag()}; }

// Row-major 2x2, m[i][j].
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() { Mat2 r; r.m[0][0] = r.m[1][1] = 1.0; return r; }
    double trace() const { return m[0][0] + m[1][1]; }
    double frob() const {
        return std::sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]);
    }
    // spectral norm
    double opnorm() const;
    bool operator==(const Mat2&) const = default;
};

inline Vec2 operator*(const Mat2& a, Vec2 v) {
    return {a.m[0][0] * v.x1 + a.m[0][1] * v.x2, a.m[1][0] * v.x1 + a.m[1][1] * v.x2};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}
inline Mat2 operator*(double s, const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
    return r;
}

inline double Mat2::opnorm() const {
    double a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
    double s1 = a * a + b * b + c * c + d * d;
    double det = a * d - b * c;
    double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
    return std::sqrt(0.5 * (s1 + disc));
}

// Neumaier-compensated accumulator.
template <class T>
struct CompSum {
    T sum{};
    T c{};
    void add(T x) {
        T t = sum + x;
        c += kahan_err(sum, x, t);
        sum = t;
    }
    T value() const { return sum + c; }

private:
    static double err1(double s, double x, double t) {
        return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    }
    static double kahan_err(double s, double x, double t) { return err1(s, x, t); }
    static cplx kahan_err(cplx s, cplx x, cplx t) {
        return {err1(s.real(), x.real(), t.real()), err1(s.imag(), x.imag(), t.imag())};
    }
};

}  // namespace diskpatch
