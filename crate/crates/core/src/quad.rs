//! Adaptive Gauss–Kronrod quadrature and the asymptotic tail of
//! oscillatory power-law integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of a quadrature: value, error estimate and integrand calls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Panel {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Adaptive G7K15 on `[a, b]`, always bisecting the panel with the largest
/// error estimate. Fails once `max_panels` panels are in use and the
/// requested `max(abs_tol, rel_tol·|I|)` has not been met.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let first = kronrod(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::from([first]);
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel is at machine resolution, nothing left to gain
            heap.push(worst);
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
                subdivisions: heap.len(),
            });
        }
        let l = kronrod(&f, worst.a, mid);
        let r = kronrod(&f, mid, worst.b);
        evaluations += 30;
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        // resum to keep the running totals honest
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

/// `∫_X^∞ e^{iωξ} ξ^{-p} dξ` for `ω > 0`, `p > 0`, by repeated integration
/// by parts:
///
/// `J_p = -e^{iωX} X^{-p}/(iω) Σ_{k<n} (p)_k/(iωX)^k + (p)_n/(iω)^n J_{p+n}`,
///
/// with `|J_{p+n}| <= X^{1-p-n}/(p+n-1)`. Terms are added until that bound
/// drops below `tol` or the series stops decreasing. Returns the value and
/// the remainder bound.
pub fn fourier_tail(omega: f64, p: f64, x: f64, tol: f64) -> (Complex64, f64) {
    debug_assert!(omega > 0.0 && p > 0.0 && x > 0.0);
    let i_omega = Complex64::new(0.0, omega);
    let lead = -Complex64::from_polar(x.powf(-p), omega * x) / i_omega;
    let ox = omega * x;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    // (p)_n / ω^n, tracked in magnitude for the remainder bound
    let mut poch = 1.0;
    let mut bound = f64::INFINITY;
    for n in 0..60 {
        sum += term;
        let k = n as f64;
        poch *= (p + k) / omega;
        let next_bound = poch * x.powf(-p - k) / (p + k);
        if next_bound >= bound {
            break;
        }
        bound = next_bound;
        if bound <= tol {
            break;
        }
        term *= Complex64::new(p + k, 0.0) / Complex64::new(0.0, ox);
    }
    (lead * sum, bound)
}
