//! The 2-variable quadrilateral example used across the suites, with its
//! exact vertices and integer points.

use invopt::model::{attach_observation, standardize, ForwardProblem, Observation, RawProblem, Rel};

/// Raw form: four `<=` rows over two integer variables.
pub fn ex1_raw() -> RawProblem {
    let mut raw = RawProblem::new("ex1", 2, vec![true, true]);
    raw.push_row(vec![-4.0, -3.0], Rel::Le, -19.0);
    raw.push_row(vec![-1.0, -3.0], Rel::Le, -8.0);
    raw.push_row(vec![6.0, 1.0], Rel::Le, 30.0);
    raw.push_row(vec![-3.0, 5.0], Rel::Le, 17.0);
    raw
}

/// Standardized form: 4 x 6, slack identity block.
pub fn ex1() -> ForwardProblem {
    standardize(&ex1_raw()).unwrap()
}

pub fn ex1_observation(x1: f64, x2: f64) -> Observation {
    attach_observation(&ex1(), &[x1, x2]).unwrap()
}

/// The four vertices of the relaxation, exact rational coordinates.
pub fn ex1_vertices() -> [(f64, f64); 4] {
    [
        (44.0 / 29.0, 125.0 / 29.0), // K
        (11.0 / 3.0, 13.0 / 9.0),    // M
        (82.0 / 17.0, 18.0 / 17.0),  // N
        (133.0 / 33.0, 64.0 / 11.0), // L
    ]
}

/// The eight integer-feasible points, lexicographic.
pub fn ex1_integer_points() -> Vec<(i64, i64)> {
    vec![(2, 4), (3, 3), (3, 4), (3, 5), (4, 2), (4, 3), (4, 4), (4, 5)]
}

/// Exact relaxation minimum of a structural cost by vertex enumeration.
pub fn ex1_lp_min(c: &[f64]) -> f64 {
    ex1_vertices()
        .iter()
        .map(|(x1, x2)| c[0] * x1 + c[1] * x2)
        .fold(f64::INFINITY, f64::min)
}

/// Exact integer minimum of a structural cost by point enumeration.
pub fn ex1_ip_min(c: &[f64]) -> f64 {
    ex1_integer_points()
        .iter()
        .map(|(x1, x2)| c[0] * *x1 as f64 + c[1] * *x2 as f64)
        .fold(f64::INFINITY, f64::min)
}
