//! Adaptive Gauss–Kronrod quadrature on a list of initial panels.
//!
//! The 7/15-point rule pair follows QUADPACK's `dqk15`, including its
//! error-rescaling heuristic. Panels are refined worst-first until the summed
//! error estimate meets the relative-tolerance target or the panel budget is
//! exhausted. The refinement order and the final summation order are fully
//! deterministic, so identical inputs produce bit-identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Abscissae of the 15-point Kronrod rule (positive half, plus the origin).
// Constants carry the canonical QUADPACK digits.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
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

// Weights of the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One evaluated panel.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Max-heap on error; ties broken by left edge so the pop order is
    // deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative absolute error estimate.
    pub abs_error: f64,
    pub panels: usize,
    /// Whether the requested relative tolerance was met.
    pub converged: bool,
}

/// 15-point Gauss–Kronrod rule on `[a, b]`; returns (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    for (j, &wg) in WG.iter().enumerate().take(3) {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    res_gauss += WG[3] * f_center;

    for j in 0..4 {
        let jtw = 2 * j;
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_kronrod - res_gauss) * half).abs();

    // QUADPACK error rescaling.
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    (value, err)
}

/// Compensated (Kahan) summation over a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Integrate `f` over the panels defined by `edges` (strictly increasing),
/// refining adaptively until the summed error estimate is at most
/// `rel_tol × |integral|` or `max_panels` panels have been spent.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    edges: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    assert!(edges.len() >= 2, "need at least one panel");
    assert!(
        edges.windows(2).all(|w| w[1] > w[0]),
        "edges must be strictly increasing"
    );

    let mut heap = BinaryHeap::with_capacity(edges.len() * 2);
    let mut total_value = 0.0_f64;
    let mut total_error = 0.0_f64;

    for w in edges.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total_value += v;
        total_error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    let tol_met =
        |value: f64, error: f64| error <= rel_tol * value.abs() || error == 0.0;

    while !tol_met(total_value, total_error) && heap.len() < max_panels {
        let worst = heap.pop().expect("heap cannot be empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot refine further.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Recompute the totals in a fixed order; the incremental updates above
    // accumulate rounding over many refinements.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    let value = compensated_sum(&values);
    let abs_error = compensated_sum(&errors);

    QuadResult {
        value,
        abs_error,
        panels: panels.len(),
        converged: tol_met(value, abs_error),
    }
}

/// Convenience wrapper: single panel `[a, b]`.
pub fn adaptive_interval<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    adaptive(f, &[a, b], rel_tol, max_panels)
}

/// Build arithmetic panel edges `0, Δ, 2Δ, …` covering `[0, k_max]` with the
/// panel width capped at `max_width`. The final edge lands exactly on `k_max`.
pub fn capped_edges(k_max: f64, max_width: f64) -> Vec<f64> {
    assert!(k_max > 0.0 && max_width > 0.0);
    let count = (k_max / max_width).ceil().max(1.0) as usize;
    let step = k_max / count as f64;
    let mut edges: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
    edges.push(k_max);
    edges
}
