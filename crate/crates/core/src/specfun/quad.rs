//! Adaptive Gauss-Kronrod quadrature (G7/K15 pairs with interval
//! bisection, largest-error-first).

use super::{QuadratureSpec, Result, SpecFunError};

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights,
// with the embedded 7-point Gauss weights (QUADPACK values).
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

/// One G7/K15 rule application: returns the Kronrod value and the QUADPACK
/// error estimate. The raw |kronrod - gauss| difference badly underestimates
/// the error on non-smooth integrands (payoff kinks), so it is rescaled
/// against the deviation integral `resasc` exactly as QUADPACK's `qk15`
/// does.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv = [0.0_f64; 15];
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        fv[j] = lo;
        fv[7 + j] = hi;
        kronrod += WGK[j] * (lo + hi);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let reskh = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[7 + j] - reskh).abs());
    }
    resasc *= half.abs();
    let value = kronrod * half;
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0_f64.min((200.0 * err / resasc).powf(1.5));
    }
    (value, err)
}

/// Adaptive estimate of the integral of `f` over `[a, b]`.
///
/// The interval is first cut into several dozen uniform cells, then the cell
/// with the largest error estimate is bisected until the summed error drops
/// below `max(abs_tol, rel_tol * |integral|)` or the subdivision budget is
/// exhausted.
///
/// The uniform pre-split matters: payoff kinks routinely sit at the window
/// center (at-the-money strike), where a plain bisection scheme can leave
/// the kink invisible to every quadrature node of a wide cell that then
/// reports zero error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(SpecFunError::Domain {
            func: "integrate",
            what: format!("invalid interval [{a}, {b}]"),
        });
    }
    let initial = (spec.max_subdivisions / 8).clamp(1, 48);
    let mut segments: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(initial + 64);
    let width = (b - a) / initial as f64;
    for i in 0..initial {
        let sa = a + i as f64 * width;
        let sb = if i + 1 == initial { b } else { sa + width };
        let (v, e) = gk15(&f, sa, sb);
        segments.push((e, sa, sb, v));
    }
    let mut splits = 0;
    loop {
        let total: f64 = segments.iter().map(|s| s.3).sum();
        let total_err: f64 = segments.iter().map(|s| s.0).sum();
        let tolerance = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tolerance {
            return Ok(total);
        }
        if splits >= spec.max_subdivisions {
            return Err(SpecFunError::NoConvergence {
                estimate: total_err,
                tolerance,
                subdivisions: spec.max_subdivisions,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .expect("segments is never empty");
        let (seg_err, sa, sb, seg_val) = segments.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // not splittable in f64; keep the cell and accept its estimate
            segments.push((0.0, sa, sb, seg_val));
            let _ = seg_err;
            continue;
        }
        let (v1, e1) = gk15(&f, sa, mid);
        let (v2, e2) = gk15(&f, mid, sb);
        segments.push((e1, sa, mid, v1));
        segments.push((e2, mid, sb, v2));
        splits += 1;
    }
}
