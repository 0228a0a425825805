//! Globally adaptive 10/21-point Gauss–Kronrod quadrature for fixed-size
//! vectors of complex values.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077632328063236,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651138,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Upper bound on the number of panels before giving up.
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_panels: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [Complex64; N],
    /// Sum over panels of the max-norm Kronrod–Gauss difference.
    pub error: f64,
    pub panels: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [Complex64; N],
    error: f64,
}

fn max_norm<const N: usize>(v: &[Complex64; N]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn panel<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [Complex64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut kronrod = [zero; N];
    let mut gauss = [zero; N];

    let fc = f(center);
    for k in 0..N {
        kronrod[k] = fc[k] * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kronrod[k] += s * WGK[j];
            if j % 2 == 1 {
                gauss[k] += s * WG[j / 2];
            }
        }
    }
    let mut diff = [zero; N];
    for k in 0..N {
        kronrod[k] *= half;
        gauss[k] *= half;
        diff[k] = kronrod[k] - gauss[k];
    }
    Panel {
        a,
        b,
        value: kronrod,
        error: max_norm(&diff),
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate meets `max(abs, rel·|I|)`.
///
/// The result depends only on the inputs, never on timing or thread count.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult<N>>
where
    F: Fn(f64) -> [Complex64; N],
{
    let mut panels = vec![panel(&f, a, b)];
    loop {
        let mut value = [Complex64::new(0.0, 0.0); N];
        let mut error = 0.0;
        for p in &panels {
            for k in 0..N {
                value[k] += p.value[k];
            }
            error += p.error;
        }
        let target = tol.abs.max(tol.rel * max_norm(&value));
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                panels: panels.len(),
            });
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: target,
            });
        }
        panels.push(panel(&f, p.a, mid));
        panels.push(panel(&f, mid, p.b));
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], nodes
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
