use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::fd::{CENTERED4, FORWARD4_AT0, FORWARD4_AT1};
use crate::{Error, Result};

/// Samples of a map `C -> C^n` on the square `[-R, R]^2`.
///
/// Node `(j, k)` sits at `zeta = (-R + j h) + i (-R + k h)` and is stored at
/// flat index `k * N + j`; the `n` components of a node are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneGrid {
    radius: f64,
    points: usize,
    components: usize,
    values: Vec<Complex64>,
}

impl PlaneGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn zeros(radius: f64, points: usize, components: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid radius must be positive, got {radius}")));
        }
        if points < Self::MIN_POINTS {
            return Err(Error::GridTooSmall(format!("N = {points} < {}", Self::MIN_POINTS)));
        }
        if components == 0 {
            return Err(Error::InvalidParameter("grid needs at least one component".into()));
        }
        Ok(Self { radius, points, components, values: vec![Complex64::new(0.0, 0.0); points * points * components] })
    }

    pub fn from_fn<F>(radius: f64, points: usize, components: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Vec<Complex64>,
    {
        let mut g = Self::zeros(radius, points, components)?;
        for node in 0..points * points {
            let v = f(g.zeta_at(node));
            if v.len() != components {
                return Err(Error::DimensionMismatch { expected: components, got: v.len() });
            }
            g.values[node * components..(node + 1) * components].copy_from_slice(&v);
        }
        Ok(g)
    }

    /// A grid on the same nodes with new values.
    pub fn like(&self, components: usize) -> Self {
        Self::zeros(self.radius, self.points, components).expect("shape already validated")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn node_count(&self) -> usize {
        self.points * self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.points - 1) as f64
    }

    /// Node coordinate along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.radius + j as f64 * self.spacing()
    }

    pub fn zeta(&self, j: usize, k: usize) -> Complex64 {
        Complex64::new(self.coord(j), self.coord(k))
    }

    pub fn zeta_at(&self, node: usize) -> Complex64 {
        self.zeta(node % self.points, node / self.points)
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        k * self.points + j
    }

    pub fn node(&self, node: usize) -> &[Complex64] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    pub fn node_mut(&mut self, node: usize) -> &mut [Complex64] {
        &mut self.values[node * self.components..(node + 1) * self.components]
    }

    pub fn at(&self, j: usize, k: usize) -> &[Complex64] {
        self.node(self.index(j, k))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Values of one component in node order.
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        self.values.iter().skip(c).step_by(self.components).copied().collect()
    }

    pub fn set_component(&mut self, c: usize, data: &[Complex64]) {
        for (node, v) in data.iter().enumerate() {
            self.values[node * self.components + c] = *v;
        }
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.points != other.points || self.radius != other.radius || self.components != other.components {
            return Err(Error::GridMismatch(format!(
                "(R={}, N={}, n={}) vs (R={}, N={}, n={})",
                self.radius, self.points, self.components, other.radius, other.points, other.components
            )));
        }
        Ok(())
    }

    pub fn map<F: Fn(Complex64, &[Complex64]) -> Vec<Complex64>>(&self, f: F) -> Result<Self> {
        let probe = f(self.zeta_at(0), self.node(0)).len();
        let mut out = self.like(probe);
        for node in 0..self.node_count() {
            let v = f(self.zeta_at(node), self.node(node));
            out.node_mut(node).copy_from_slice(&v);
        }
        Ok(out)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: Complex64, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(x, y)| *x += a * y);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Largest nodal norm `max |z(zeta)|` (Euclidean in `C^n`).
    pub fn sup_norm(&self) -> f64 {
        (0..self.node_count()).map(|i| crate::linalg::cnorm(self.node(i))).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Partial derivatives `(z_x, z_y)`; 4th-order centered inside, one-sided
    /// 4th-order within two nodes of the boundary.
    pub fn partials(&self) -> (Self, Self) {
        let n = self.points;
        let c = self.components;
        let h = self.spacing();
        let mut dx = self.like(c);
        let mut dy = self.like(c);
        for k in 0..n {
            for j in 0..n {
                let (wx, ox) = stencil(j, n);
                let (wy, oy) = stencil(k, n);
                let out = self.index(j, k);
                for comp in 0..c {
                    let mut sx = Complex64::new(0.0, 0.0);
                    let mut sy = Complex64::new(0.0, 0.0);
                    for s in 0..5 {
                        let jj = (j as isize + ox + s as isize) as usize;
                        let kk = (k as isize + oy + s as isize) as usize;
                        sx += self.values[self.index(jj, k) * c + comp] * wx[s];
                        sy += self.values[self.index(j, kk) * c + comp] * wy[s];
                    }
                    dx.values[out * c + comp] = sx / h;
                    dy.values[out * c + comp] = sy / h;
                }
            }
        }
        (dx, dy)
    }

    /// `(z_zeta, z_zetabar)` with `z_zeta = (z_x - i z_y)/2`, `z_zetabar = (z_x + i z_y)/2`.
    pub fn wirtinger(&self) -> (Self, Self) {
        let (dx, dy) = self.partials();
        let i = Complex64::new(0.0, 1.0);
        let mut dz = dx.clone();
        let mut dzb = dx;
        for ((a, b), y) in dz.values.iter_mut().zip(dzb.values.iter_mut()).zip(&dy.values) {
            *a = (*a - i * y) * 0.5;
            *b = (*b + i * y) * 0.5;
        }
        (dz, dzb)
    }

    /// Nodes at least two steps from the boundary, where the centered stencil applies.
    pub fn is_interior(&self, node: usize) -> bool {
        let (j, k) = (node % self.points, node / self.points);
        let n = self.points;
        j >= 2 && k >= 2 && j + 2 < n && k + 2 < n
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        let mut header = vec!["zeta_re".to_string(), "zeta_im".to_string()];
        header.extend((1..=self.components).map(|c| format!("re_{c}")));
        header.extend((1..=self.components).map(|c| format!("im_{c}")));
        writeln!(w, "{}", header.join(","))?;
        for node in 0..self.node_count() {
            let z = self.zeta_at(node);
            let vals = self.node(node);
            let mut row = vec![fmt_f64(z.re), fmt_f64(z.im)];
            row.extend(vals.iter().map(|v| fmt_f64(v.re)));
            row.extend(vals.iter().map(|v| fmt_f64(v.im)));
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`PlaneGrid::write_csv`]; `R` and `N` are
    /// recovered from the node coordinates.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
        let cols = header.split(',').count();
        if cols < 4 || (cols - 2) % 2 != 0 {
            return Err(Error::Parse(format!("bad CSV header: {header}")));
        }
        let c = (cols - 2) / 2;
        let mut rows = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let fields = fields.map_err(|e| Error::Parse(format!("{e} in row `{line}`")))?;
            if fields.len() != cols {
                return Err(Error::Parse(format!("expected {cols} columns, got {}", fields.len())));
            }
            rows.push(fields);
        }
        let points = (rows.len() as f64).sqrt().round() as usize;
        if points * points != rows.len() {
            return Err(Error::Parse(format!("{} rows is not a square grid", rows.len())));
        }
        let radius = -rows.first().ok_or_else(|| Error::Parse("no data rows".into()))?[0];
        let mut g = Self::zeros(radius, points, c)?;
        for (node, row) in rows.iter().enumerate() {
            for comp in 0..c {
                g.values[node * c + comp] = Complex64::new(row[2 + comp], row[2 + c + comp]);
            }
        }
        Ok(g)
    }

    /// Little-endian header `R: f64, N: u64, n: u64`, then `re, im` pairs in node order.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(&self.radius.to_le_bytes())?;
        w.write_all(&(self.points as u64).to_le_bytes())?;
        w.write_all(&(self.components as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut b = [0u8; 8];
        let mut next = |r: &mut BufReader<R>| -> Result<[u8; 8]> {
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let radius = f64::from_le_bytes(next(&mut r)?);
        let points = u64::from_le_bytes(next(&mut r)?) as usize;
        let c = u64::from_le_bytes(next(&mut r)?) as usize;
        let mut g = Self::zeros(radius, points, c)?;
        for v in g.values.iter_mut() {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            *v = Complex64::new(re, im);
        }
        Ok(g)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => self.write_csv(f),
            _ => self.write_binary(f),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::read_csv(f),
            _ => Self::read_binary(f),
        }
    }
}

/// Shortest round-trip representation.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Weights and starting offset for the first derivative at index `i` of `n`.
fn stencil(i: usize, n: usize) -> ([f64; 5], isize) {
    let rev = |w: [f64; 5]| [-w[4], -w[3], -w[2], -w[1], -w[0]];
    if i == 0 {
        (FORWARD4_AT0, 0)
    } else if i == 1 {
        (FORWARD4_AT1, -1)
    } else if i + 1 == n {
        (rev(FORWARD4_AT0), -4)
    } else if i + 2 == n {
        (rev(FORWARD4_AT1), -3)
    } else {
        (CENTERED4, -2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nodes_are_reproducible() {
        let g = PlaneGrid::zeros(2.0, 9, 1).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.zeta(0, 0), c(-2.0, -2.0));
        assert_eq!(g.zeta(8, 4), c(2.0, 0.0));
        assert_eq!(g.zeta_at(g.index(3, 5)), c(-0.5, 0.5));
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(PlaneGrid::zeros(1.0, 7, 1), Err(Error::GridTooSmall(_))));
        assert!(PlaneGrid::zeros(0.0, 9, 1).is_err());
    }

    #[test]
    fn derivatives_exact_on_quartics() {
        // fourth-order stencils differentiate polynomials of degree 4 exactly
        let g = PlaneGrid::from_fn(1.5, 11, 2, |z| vec![z * z * z * z, z.conj() * z.conj() + z]).unwrap();
        let (dz, dzb) = g.wirtinger();
        for node in 0..g.node_count() {
            let z = g.zeta_at(node);
            let e0 = (dz.node(node)[0] - z * z * z * 4.0).norm();
            let e1 = (dz.node(node)[1] - 1.0).norm();
            let e2 = dzb.node(node)[0].norm();
            let e3 = (dzb.node(node)[1] - z.conj() * 2.0).norm();
            assert!(e0 < 1e-11 && e1 < 1e-12 && e2 < 1e-11 && e3 < 1e-12, "{node}: {e0} {e1} {e2} {e3}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = PlaneGrid::from_fn(1.0, 8, 2, |z| vec![z * 0.1, c(1.0 / 3.0, -z.im)]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("zeta_re,zeta_im,re_1,re_2,im_1,im_2\n"));
        assert_eq!(PlaneGrid::read_csv(&buf[..]).unwrap(), g);
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let g = PlaneGrid::from_fn(3.0, 8, 1, |z| vec![z.exp()]).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 64);
        assert_eq!(&buf[0..8], &3.0f64.to_le_bytes());
        assert_eq!(&buf[8..16], &8u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1u64.to_le_bytes());
        assert_eq!(PlaneGrid::read_binary(&buf[..]).unwrap(), g);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = PlaneGrid::from_fn(1.0, 9, 1, |z| vec![z * z]).unwrap();
        for name in ["g.csv", "g.bin"] {
            let p = dir.path().join(name);
            g.save(&p).unwrap();
            assert_eq!(PlaneGrid::load(&p).unwrap(), g);
        }
    }
}
