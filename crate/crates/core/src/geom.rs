//! Small planar geometry helpers used by surfaces, counters, and the GPS
//! pipeline.

/// Dot product of two planar vectors.
pub fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Determinant of the 2x2 matrix with columns `u`, `v`; twice the signed
/// area of the triangle (0, u, v).
pub fn det(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Counterclockwise quarter turn.
pub fn rot90(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// Rotation by `angle` radians, counterclockwise.
pub fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Euclidean norm.
pub fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

pub fn sub(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [u[0] - v[0], u[1] - v[1]]
}

pub fn add(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [u[0] + v[0], u[1] + v[1]]
}

pub fn scale(v: [f64; 2], s: f64) -> [f64; 2] {
    [s * v[0], s * v[1]]
}

/// Distance from `x` to the closed segment [a, b].
pub fn point_segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return norm(sub(x, a));
    }
    let t = (dot(sub(x, a), ab) / len2).clamp(0.0, 1.0);
    norm(sub(x, add(a, scale(ab, t))))
}
