use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::PlaneGrid;

/// Antiderivative with `d^2F/du dv = u / (u^2 + v^2)`.
fn f_re(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    let log_term = if v == 0.0 { 0.0 } else { 0.5 * v * r2.ln() };
    let atan_term = if u == 0.0 { 0.0 } else { u * (v / u).atan() };
    log_term + atan_term
}

/// Antiderivative with `d^2G/du dv = v / (u^2 + v^2)`.
fn f_im(u: f64, v: f64) -> f64 {
    f_re(v, u)
}

/// `int int_{[u0,u1] x [v0,v1]} dA / (u + i v)` in closed form; the rectangle may
/// contain the origin.
pub fn cell_integral(u0: f64, u1: f64, v0: f64, v1: f64) -> Complex64 {
    let corners = |f: fn(f64, f64) -> f64| f(u1, v1) - f(u0, v1) - f(u1, v0) + f(u0, v0);
    Complex64::new(corners(f_re), -corners(f_im))
}

/// Contribution `-(1/pi) int_cell dA / (tau - zeta)` of a unit value on the cell
/// of half-width `half` centred at `center`.
pub fn cell_weight(center: Complex64, half: f64, zeta: Complex64) -> Complex64 {
    let d = center - zeta;
    cell_integral(d.re - half, d.re + half, d.im - half, d.im + half) * (-1.0 / PI)
}

/// Translation-invariant panel weights of the discrete transform on one grid.
///
/// Each node carries a square panel of side `h` centred on it; the weight for
/// an offset `(dj, dk)` between panel and target is `h * W(dj, dk)` where `W`
/// is the unit-spacing cell integral.
#[derive(Clone, Debug)]
pub struct CauchyKernel {
    points: usize,
    /// Row-major over `(dk, dj)` in `-(N-1)..=(N-1)`.
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CauchyKernel {
    pub fn new(points: usize, spacing: f64) -> Self {
        let side = 2 * points - 1;
        let mut re = Vec::with_capacity(side * side);
        let mut im = Vec::with_capacity(side * side);
        let off = points as f64 - 1.0;
        for dk in 0..side {
            for dj in 0..side {
                let c = Complex64::new(dj as f64 - off, dk as f64 - off);
                let w = cell_weight(c, 0.5, Complex64::new(0.0, 0.0)) * spacing;
                re.push(w.re);
                im.push(w.im);
            }
        }
        Self { points, re, im }
    }

    pub fn for_grid(g: &PlaneGrid) -> Self {
        Self::new(g.points(), g.spacing())
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Discrete `Tg` on the nodes of `g`.
    pub fn apply(&self, g: &PlaneGrid) -> PlaneGrid {
        assert_eq!(g.points(), self.points, "kernel built for a different grid");
        let n = self.points;
        let side = 2 * n - 1;
        let comps = g.components();
        // split the input into per-component SoA rows
        let planes: Vec<(Vec<f64>, Vec<f64>)> = (0..comps)
            .map(|c| {
                let col = g.component(c);
                (col.iter().map(|v| v.re).collect(), col.iter().map(|v| v.im).collect())
            })
            .collect();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                // lanes per (component, target column); input rows in fixed order
                let mut acc = vec![[0.0f64; 8]; comps * n];
                for kk in 0..n {
                    let wrow = (kk + n - 1 - k) * side;
                    for (c, (gr, gi)) in planes.iter().enumerate() {
                        let xr = &gr[kk * n..kk * n + n];
                        let xi = &gi[kk * n..kk * n + n];
                        for j in 0..n {
                            let w0 = wrow + n - 1 - j;
                            dot4(&self.re[w0..w0 + n], &self.im[w0..w0 + n], xr, xi, &mut acc[c * n + j]);
                        }
                    }
                }
                let mut row = vec![Complex64::new(0.0, 0.0); n * comps];
                for c in 0..comps {
                    for j in 0..n {
                        let a = &acc[c * n + j];
                        let re = (a[0] + a[1]) + (a[2] + a[3]);
                        let im = (a[4] + a[5]) + (a[6] + a[7]);
                        row[j * comps + c] = Complex64::new(re, im);
                    }
                }
                row
            })
            .collect();
        let mut out = g.like(comps);
        for (k, row) in rows.into_iter().enumerate() {
            let start = k * n * comps;
            out.values_mut()[start..start + n * comps].copy_from_slice(&row);
        }
        out
    }
}

/// Accumulates the complex dot product of one row in four fixed lanes:
/// lanes `0..4` hold real parts, `4..8` imaginary parts.
#[inline]
fn dot4(wr: &[f64], wi: &[f64], xr: &[f64], xi: &[f64], acc: &mut [f64; 8]) {
    let mut re = [acc[0], acc[1], acc[2], acc[3]];
    let mut im = [acc[4], acc[5], acc[6], acc[7]];
    let body = wr.len() / 4 * 4;
    for (((a, b), x), y) in wr[..body]
        .chunks_exact(4)
        .zip(wi[..body].chunks_exact(4))
        .zip(xr[..body].chunks_exact(4))
        .zip(xi[..body].chunks_exact(4))
    {
        for l in 0..4 {
            re[l] += a[l] * x[l] - b[l] * y[l];
            im[l] += a[l] * y[l] + b[l] * x[l];
        }
    }
    for i in body..wr.len() {
        let l = i - body;
        re[l] += wr[i] * xr[i] - wi[i] * xi[i];
        im[l] += wr[i] * xi[i] + wi[i] * xr[i];
    }
    acc[..4].copy_from_slice(&re);
    acc[4..].copy_from_slice(&im);
}

/// Discrete Cauchy-Green transform `Tg(zeta) = -(1/pi) int g(tau) / (tau - zeta) dA`.
pub fn cauchy_green(g: &PlaneGrid) -> PlaneGrid {
    CauchyKernel::for_grid(g).apply(g)
}

/// The same panel quadrature evaluated at an arbitrary point of the plane.
pub fn cauchy_green_at(g: &PlaneGrid, zeta: Complex64) -> Vec<Complex64> {
    let half = 0.5 * g.spacing();
    let comps = g.components();
    let mut out = vec![Complex64::new(0.0, 0.0); comps];
    for node in 0..g.node_count() {
        let vals = g.node(node);
        if vals.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let w = cell_weight(g.zeta_at(node), half, zeta);
        for (o, v) in out.iter_mut().zip(vals) {
            *o += w * v;
        }
    }
    out
}
