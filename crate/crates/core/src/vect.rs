//! Fixed-capacity point arithmetic.
//!
//! Positions live in up to three dimensions. A point is stored as `[F; 3]`
//! with the invariant that components at index >= d are exactly zero, so the
//! full three-lane dot products and norms agree with their d-dimensional
//! values and no code below needs to carry the dimension around.

use crate::scalar::Scalar;

/// A point or displacement in `R^d`, zero-padded to three components.
pub type Point<F> = [F; 3];

#[inline]
pub fn zero<F: Scalar>() -> Point<F> {
    [F::zero(); 3]
}

#[inline]
pub fn add<F: Scalar>(a: Point<F>, b: Point<F>) -> Point<F> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<F: Scalar>(a: Point<F>, b: Point<F>) -> Point<F> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<F: Scalar>(a: Point<F>, s: F) -> Point<F> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot<F: Scalar>(a: Point<F>, b: Point<F>) -> F {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm_sq<F: Scalar>(a: Point<F>) -> F {
    dot(a, a)
}

#[inline]
pub fn norm<F: Scalar>(a: Point<F>) -> F {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist<F: Scalar>(a: Point<F>, b: Point<F>) -> F {
    norm(sub(a, b))
}

/// Builds a point from the first `d` entries of a slice, zero-padding the rest.
pub fn from_slice<F: Scalar>(coords: &[F]) -> Point<F> {
    let mut p = zero();
    for (lane, &c) in p.iter_mut().zip(coords.iter()) {
        *lane = c;
    }
    p
}
