#![allow(dead_code)]

use crhull_core::{c2_norm_upper, normal_form_threshold, BiPoly, Complex64};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn coeff(mag: f64) -> impl Strategy<Value = Complex64> {
    (-mag..mag, -mag..mag).prop_map(|(re, im)| c(re, im))
}

/// Polynomial in `(w, w̄)` with `min_w ≤ b + c ≤ max_w`.
pub fn w_poly(min_w: u32, max_w: u32, max_terms: usize, mag: f64) -> impl Strategy<Value = BiPoly> {
    prop::collection::vec((0..=max_w, 0..=max_w, coeff(mag)), 1..=max_terms).prop_map(move |terms| {
        let mut p = BiPoly::zero(0);
        for (b, cc, k) in terms {
            if b + cc >= min_w && b + cc <= max_w {
                p.add_term(vec![], b, cc, k);
            }
        }
        if p.is_zero() {
            p.add_term(vec![], min_w.max(1), 0, c(1.0, 0.0));
        }
        p
    })
}

/// Random `F` vanishing to order three, rescaled so its certified `C²` bound
/// on `|w| ≤ r` equals the hyperbolic threshold for `gamma`.
pub fn admissible(gamma: f64, r: f64, raw: &BiPoly) -> BiPoly {
    let bound = c2_norm_upper(raw, r).unwrap().upper;
    let thr = normal_form_threshold(gamma).unwrap();
    raw.scale(c(thr / bound, 0.0))
}

pub fn disk_point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(u, a)| Complex64::from_polar(r * u.sqrt(), a))
}
