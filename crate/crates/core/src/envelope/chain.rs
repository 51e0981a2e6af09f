//! Lower hull of points on a line by the monotone chain.

use std::cmp::Ordering;

use super::predicates::sign_of_dot;

/// Indices of the lower-hull vertices of `(xs[k], w[k])`, left to right.
/// `xs` must be strictly increasing. Collinear interior points are dropped so
/// consecutive vertices bound maximal segments.
pub(crate) fn lower_chain(xs: &[i64], w: &[f64]) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        while stack.len() >= 2 {
            let a = stack[stack.len() - 2];
            let b = stack[stack.len() - 1];
            // Positive when b lies strictly below the chord from a to k.
            let turn = sign_of_dot(&[
                (w[a], (xs[k] - xs[b]) as f64),
                (-w[b], (xs[k] - xs[a]) as f64),
                (w[k], (xs[b] - xs[a]) as f64),
            ]);
            if turn == Ordering::Greater {
                break;
            }
            stack.pop();
        }
        stack.push(k);
    }
    stack
}
