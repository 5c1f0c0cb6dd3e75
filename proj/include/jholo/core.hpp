#pragma once

// Shared scalar/matrix types and error taxonomy for the disk toolkit.
//
// Conventions used throughout the library:
//  - A point of R^4 is a pair of complex coordinates (z1, z2); the real chart is
//    (x1, y1, x2, y2) with z_k = x_k + i*y_k.
//  - The standard complex structure J_st acts on each factor as multiplication
//    by i, i.e. as the 2x2 rotation [[0, -1], [1, 0]].
//  - Real 2x2 matrices act on a complex scalar w through its (Re w, Im w) vector.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace jholo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Point (or tangent vector) in C^2 = R^4.
struct C2 {
    cplx z1{0.0, 0.0};
    cplx z2{0.0, 0.0};
};

inline C2 operator+(C2 a, C2 b) { return {a.z1 + b.z1, a.z2 + b.z2}; }
inline C2 operator-(C2 a, C2 b) { return {a.z1 - b.z1, a.z2 - b.z2}; }
inline C2 operator*(double t, C2 a) { return {t * a.z1, t * a.z2}; }

/// Euclidean norm of (z1, z2) as a vector in R^4.
inline double norm(C2 a) { return std::sqrt(std::norm(a.z1) + std::norm(a.z2)); }

// ===== error taxonomy (mapped to CLI exit codes) =====

/// Malformed input: unparseable or schema-violating configuration/structure data.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Well-formed input outside the method's validity regime (coefficient bound too
/// large, non-contracting iteration, structure too far from the standard one).
struct OutOfRegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Breakdown of a numerical procedure that should have worked (failed bracketing,
/// degenerate configuration, non-finite intermediate values).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ===== real 2x2 matrices =====

/// Dense real 2x2 matrix; row-major entries m[row][col].
struct Mat2 {
    double m[2][2]{{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

    /// Multiplication by i on (Re, Im) vectors: the standard structure block.
    static Mat2 j_std() { return {{{0.0, -1.0}, {1.0, 0.0}}}; }

    /// Complex conjugation on (Re, Im) vectors.
    static Mat2 conjugation() { return {{{1.0, 0.0}, {0.0, -1.0}}}; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
    return r;
}

inline Mat2 operator-(Mat2 a, Mat2 b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
    return r;
}

inline Mat2 operator*(double t, Mat2 a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = t * a.m[i][j];
    return r;
}

inline Mat2 operator*(Mat2 a, Mat2 b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
}

inline double det(Mat2 a) { return a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0]; }
inline double trace(Mat2 a) { return a.m[0][0] + a.m[1][1]; }

/// Largest absolute entry; used for deviation reports.
inline double max_abs(Mat2 a) {
    double r = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(a.m[i][j]));
    return r;
}

inline Mat2 inverse(Mat2 a) {
    const double d = det(a);
    if (std::abs(d) < 1e-300) throw NumericalError("singular 2x2 matrix inversion");
    const double inv = 1.0 / d;
    return {{{a.m[1][1] * inv, -a.m[0][1] * inv}, {-a.m[1][0] * inv, a.m[0][0] * inv}}};
}

/// Principal square root of a 2x2 matrix with positive trace and determinant
/// (the only case needed here: matrices near the identity).  Uses the closed
/// form sqrt(M) = (M + sqrt(det) I) / sqrt(trace + 2 sqrt(det)).
inline Mat2 sqrt_near_identity(Mat2 a) {
    const double d = det(a);
    const double t = trace(a);
    if (d <= 0.0 || t <= 0.0) throw NumericalError("matrix square root outside its validity domain");
    const double s = std::sqrt(d);
    const double denom = std::sqrt(t + 2.0 * s);
    return (1.0 / denom) * (a + s * Mat2::identity());
}

/// Apply the matrix to a complex scalar through its (Re, Im) representation.
inline cplx apply(Mat2 a, cplx w) {
    return {a.m[0][0] * w.real() + a.m[0][1] * w.imag(),
            a.m[1][0] * w.real() + a.m[1][1] * w.imag()};
}

}  // namespace jholo
