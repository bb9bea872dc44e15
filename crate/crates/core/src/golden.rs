//! Pinned reference checks on known worked examples.
//!
//! Every expected value here was computed independently with a literal
//! prefix-sum evaluation before being frozen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::datagen::sample_simplex_vector;
use crate::error::Result;
use crate::majorization::{kron, pad, Comparability, ProbVector, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// Which worked example the check reproduces.
    pub anchor: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn pv(v: &[f64]) -> ProbVector {
    ProbVector::new(v.to_vec()).expect("pinned vectors are valid")
}

fn outcome(name: &'static str, anchor: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        name,
        anchor,
        passed,
        detail,
    }
}

/// Pairwise products sorted non-increasing, written out longhand.
fn pairwise_products(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    out
}

fn close(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

fn check_incomparable(tol: Tolerance) -> Result<(bool, String)> {
    let a = pv(&[0.5, 0.25, 0.25, 0.0]);
    let b = pv(&[0.4, 0.4, 0.1, 0.1]);
    let tag = tol.compare(&a, &b)?;
    Ok((tag == Comparability::Incomparable, format!("tag {tag}")))
}

fn check_extremality(tol: Tolerance) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = 0;
    for dim in 2..=10 {
        let uniform = ProbVector::uniform(dim);
        let product = ProbVector::product(dim);
        let mut vs = vec![uniform.clone(), product.clone()];
        for _ in 0..100 {
            vs.push(sample_simplex_vector(dim, &mut rng)?);
        }
        for v in &vs {
            if !tol.precedes(&uniform, v)? || !tol.precedes(v, &product)? {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("{failures} violations over dims 2..=10")))
}

fn check_catalysis(tol: Tolerance) -> Result<(bool, String)> {
    let a = pv(&[0.5, 0.25, 0.25, 0.0]);
    let b = pv(&[0.4, 0.4, 0.1, 0.1]);
    let c = pv(&[0.6, 0.4]);
    let a_c = kron(&a, &c);
    let b_c = kron(&b, &c);
    let want_a_c = [0.30, 0.20, 0.15, 0.15, 0.10, 0.10, 0.0, 0.0];
    let want_b_c = [0.24, 0.24, 0.16, 0.16, 0.06, 0.06, 0.04, 0.04];
    let products_ok = close(a_c.entries(), &pairwise_products(a.entries(), c.entries()), 1e-15)
        && close(b_c.entries(), &pairwise_products(b.entries(), c.entries()), 1e-15)
        && close(a_c.entries(), &want_a_c, tol.eps())
        && close(b_c.entries(), &want_b_c, tol.eps());
    // The product of the second vector is the one that is majorized.
    let verdict = tol.compare(&b_c, &a_c)?;
    let enabled = tol.is_catalyst(&c, &b, &a)?;
    let reverse = tol.is_catalyst(&c, &a, &b)?;
    let passed =
        products_ok && verdict == Comparability::APrecedesB && enabled && !reverse;
    Ok((
        passed,
        format!(
            "products match: {products_ok}; (b⊗c vs a⊗c) = {verdict}; \
             c catalyses b->a: {enabled}, a->b: {reverse}"
        ),
    ))
}

fn check_order(tol: Tolerance, a: &ProbVector, b: &ProbVector, want: usize) -> Result<(bool, String)> {
    let got = tol.self_catalysis_order(a, b, 8)?;
    Ok((got == Some(want), format!("order {got:?}, expected {want}")))
}

/// Runs every pinned check with the given tolerance.
pub fn run_checks(tol: Tolerance) -> Vec<CheckOutcome> {
    let beta = pv(&[0.950, 0.030, 0.020, 0.0]);
    let first = pv(&[0.900, 0.081, 0.010, 0.009]);
    let second = pv(&[0.928, 0.060, 0.006, 0.006]);
    let short_beta = pv(&[0.950, 0.030, 0.020]);
    vec![
        outcome(
            "extremality",
            "example 1: uniform is minimal, product is maximal",
            check_extremality(tol),
        ),
        outcome(
            "incomparable-pair",
            "example 2: (1/2,1/4,1/4,0) vs (2/5,2/5,1/10,1/10)",
            check_incomparable(tol),
        ),
        outcome(
            "catalysis",
            "example 3: catalyst (0.6,0.4); printed labels of the two products are swapped",
            check_catalysis(tol),
        ),
        outcome(
            "self-catalysis-order-1",
            "example 4, first pair",
            check_order(tol, &first, &beta, 1),
        ),
        outcome(
            "self-catalysis-order-6",
            "example 4, second pair (target padded to 4 entries)",
            pad(&short_beta, 4).and_then(|b| check_order(tol, &second, &b, 6)),
        ),
    ]
}
