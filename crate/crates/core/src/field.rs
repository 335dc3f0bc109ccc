//! Fields on the disc stored as Fourier-in-angle radial profiles.
//!
//! A real field `f(r, θ) = Σ_{|m| <= M} c_m(r) e^{imθ}` is stored through its
//! non-negative modes only; `c_{-m} = conj(c_m)` is implied, so real-valuedness
//! reduces to `Im c_0 = 0`. Vector fields carry polar components `(w_r, w_θ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscGrid, SpaceTimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Scalar,
    Vector,
}

impl Rank {
    pub fn name(self) -> &'static str {
        match self {
            Rank::Scalar => "scalar",
            Rank::Vector => "vector",
        }
    }

    fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 2,
        }
    }
}

/// Scalar or polar-vector field on a [`DiscGrid`].
#[derive(Debug, Clone)]
pub struct DiscField {
    grid: DiscGrid,
    rank: Rank,
    comps: Vec<Vec<Complex64>>,
}

impl DiscField {
    pub fn zeros(grid: &DiscGrid, rank: Rank) -> Self {
        let len = (grid.n_theta() + 1) * grid.radial().len();
        Self {
            grid: grid.clone(),
            rank,
            comps: vec![vec![Complex64::new(0.0, 0.0); len]; rank.components()],
        }
    }

    /// Builds a scalar field from per-mode radial profiles `profile(m, r)`.
    pub fn from_modes<F>(grid: &DiscGrid, mut profile: F) -> Self
    where
        F: FnMut(usize, f64) -> Complex64,
    {
        let mut out = Self::zeros(grid, Rank::Scalar);
        let nodes = grid.radial().nodes().to_vec();
        for m in 0..=grid.n_theta() {
            let slot = out.mode_mut(0, m);
            for (c, &r) in slot.iter_mut().zip(&nodes) {
                *c = profile(m, r);
            }
        }
        out.comps[0][..nodes.len()]
            .iter_mut()
            .for_each(|c| c.im = 0.0);
        out
    }

    /// Samples `f(r, θ)` on the grid and projects onto the resolved modes.
    pub fn from_fn<F>(grid: &DiscGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut out = Self::zeros(grid, Rank::Scalar);
        out.project_component(0, |r, th| f(r, th));
        out
    }

    /// Vector field from polar components `f(r, θ) = [w_r, w_θ]`.
    pub fn from_fn_polar<F>(grid: &DiscGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        let mut out = Self::zeros(grid, Rank::Vector);
        out.project_component(0, |r, th| f(r, th)[0]);
        out.project_component(1, |r, th| f(r, th)[1]);
        out
    }

    /// Vector field from Cartesian components `f(r, θ) = [w_1, w_2]`.
    pub fn from_fn_cartesian<F>(grid: &DiscGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        Self::from_fn_polar(grid, |r, th| {
            let [a, b] = f(r, th);
            let (s, c) = th.sin_cos();
            [a * c + b * s, -a * s + b * c]
        })
    }

    fn project_component<F: Fn(f64, f64) -> f64>(&mut self, comp: usize, f: F) {
        let grid = self.grid.clone();
        let n_angle = grid.n_angle();
        let angles = grid.angles();
        let nodes = grid.radial().nodes();
        let n_pts = nodes.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n_angle];
        for (j, &r) in nodes.iter().enumerate() {
            for (b, &th) in buf.iter_mut().zip(&angles) {
                *b = Complex64::new(f(r, th), 0.0);
            }
            grid.forward_fft().process(&mut buf);
            for m in 0..=grid.n_theta() {
                let mut c = buf[m] / n_angle as f64;
                if m == 0 {
                    c.im = 0.0;
                }
                self.comps[comp][m * n_pts + j] = c;
            }
        }
    }

    pub fn grid(&self) -> &DiscGrid {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn n_components(&self) -> usize {
        self.comps.len()
    }

    pub fn n_theta(&self) -> usize {
        self.grid.n_theta()
    }

    fn n_pts(&self) -> usize {
        self.grid.radial().len()
    }

    /// Radial profile of mode `m >= 0` of component `comp`.
    pub fn mode(&self, comp: usize, m: usize) -> &[Complex64] {
        let n = self.n_pts();
        &self.comps[comp][m * n..(m + 1) * n]
    }

    pub fn mode_mut(&mut self, comp: usize, m: usize) -> &mut [Complex64] {
        let n = self.n_pts();
        &mut self.comps[comp][m * n..(m + 1) * n]
    }

    /// Coefficient `c_m(r_j)` for any signed `m`, zero beyond the cutoff.
    pub fn coeff(&self, comp: usize, m: i64, j: usize) -> Complex64 {
        let abs = m.unsigned_abs() as usize;
        if abs > self.n_theta() {
            return Complex64::new(0.0, 0.0);
        }
        let c = self.mode(comp, abs)[j];
        if m < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn expect_rank(&self, rank: Rank) -> Result<()> {
        if self.rank == rank {
            Ok(())
        } else {
            Err(Error::RankMismatch {
                expected: rank.name(),
                found: self.rank.name(),
            })
        }
    }

    /// Splits a vector field into its polar components as scalar fields.
    pub fn components(&self) -> Vec<DiscField> {
        self.comps
            .iter()
            .map(|c| DiscField {
                grid: self.grid.clone(),
                rank: Rank::Scalar,
                comps: vec![c.clone()],
            })
            .collect()
    }

    /// Assembles a polar vector field from two scalar components.
    pub fn from_components(radial: DiscField, angular: DiscField) -> Result<Self> {
        radial.expect_rank(Rank::Scalar)?;
        angular.expect_rank(Rank::Scalar)?;
        if radial.grid != angular.grid {
            return Err(Error::GridMismatch);
        }
        let mut comps = radial.comps;
        comps.extend(angular.comps);
        Ok(DiscField {
            grid: radial.grid,
            rank: Rank::Vector,
            comps,
        })
    }

    fn same_shape(&self, other: &DiscField) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank.name(),
                found: other.rank.name(),
            });
        }
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &DiscField) -> Result<DiscField> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (dst, src) in out.comps.iter_mut().zip(&other.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * a;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &DiscField) -> Result<DiscField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &DiscField) -> Result<DiscField> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, a: f64) -> DiscField {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|c| *c *= a);
        out
    }

    /// Multiplies every component by a radial profile given at the nodes.
    pub fn times_radial(&self, profile: &[f64]) -> DiscField {
        let n = self.n_pts();
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for (i, c) in comp.iter_mut().enumerate() {
                *c *= profile[i % n];
            }
        }
        out
    }

    /// The same field on `grid`: radial profiles are evaluated through their
    /// interpolating polynomials, modes beyond either cutoff are dropped.
    pub fn resample(&self, grid: &DiscGrid) -> DiscField {
        let interp = self
            .grid
            .radial()
            .interpolation_matrix(grid.radial().nodes());
        let mut out = DiscField::zeros(grid, self.rank);
        let n_in = self.n_pts();
        for c in 0..self.n_components() {
            for m in 0..=self.n_theta().min(grid.n_theta()) {
                let src = &self.comps[c][m * n_in..(m + 1) * n_in];
                for (i, slot) in out.mode_mut(c, m).iter_mut().enumerate() {
                    *slot = src
                        .iter()
                        .enumerate()
                        .map(|(j, v)| v * interp[(i, j)])
                        .sum();
                }
            }
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Checks `Im c_0 = 0` in every component (the stored half-spectrum makes
    /// `c_{-m} = conj(c_m)` automatic).
    pub fn is_real_valued(&self, tol: f64) -> bool {
        let n = self.n_pts();
        self.comps
            .iter()
            .all(|c| c[..n].iter().all(|z| z.im.abs() <= tol))
    }

    /// Point values of component `comp` on the `(radial node, angle)` grid,
    /// row-major by radial node.
    pub fn sample(&self, comp: usize) -> Vec<Vec<f64>> {
        let n_angle = self.grid.n_angle();
        let n_pts = self.n_pts();
        let mut out = Vec::with_capacity(n_pts);
        let mut buf = vec![Complex64::new(0.0, 0.0); n_angle];
        for j in 0..n_pts {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for m in 0..=self.n_theta() {
                let c = self.comps[comp][m * n_pts + j];
                if m == 0 {
                    buf[0] = Complex64::new(c.re, 0.0);
                } else {
                    buf[m] = c;
                    buf[n_angle - m] = c.conj();
                }
            }
            self.grid.inverse_fft().process(&mut buf);
            out.push(buf.iter().map(|z| z.re).collect());
        }
        out
    }

    /// Value of component `comp` at radial node `j` and angle `theta`.
    pub fn value_at(&self, comp: usize, j: usize, theta: f64) -> f64 {
        let n = self.n_pts();
        let mut v = self.comps[comp][j].re;
        for m in 1..=self.n_theta() {
            let c = self.comps[comp][m * n + j];
            v += 2.0 * (c * Complex64::from_polar(1.0, m as f64 * theta)).re;
        }
        v
    }

    /// Cartesian components `(w_1, w_2)` of a polar vector field, each resolved
    /// with one extra mode (the frame rotation shifts modes by one).
    pub fn to_cartesian(&self) -> Result<[DiscField; 2]> {
        self.expect_rank(Rank::Vector)?;
        let m_in = self.n_theta() as i64;
        let grid = self.grid.with_modes(self.n_theta() + 1);
        let n = self.n_pts();
        let mut x = DiscField::zeros(&grid, Rank::Scalar);
        let mut y = DiscField::zeros(&grid, Rank::Scalar);
        let i = Complex64::new(0.0, 1.0);
        // P = w_r + i w_θ, Z = w_1 + i w_2 = e^{iθ} P, so Z_k = P_{k-1}.
        let p = |k: i64, j: usize| -> Complex64 {
            if k.abs() > m_in {
                return Complex64::new(0.0, 0.0);
            }
            self.coeff(0, k, j) + i * self.coeff(1, k, j)
        };
        for m in 0..=grid.n_theta() as i64 {
            for j in 0..n {
                let zp = p(m - 1, j);
                let zm = p(-m - 1, j);
                let xm = (zp + zm.conj()) * 0.5;
                let ym = (zp - zm.conj()) / (2.0 * i);
                x.mode_mut(0, m as usize)[j] = xm;
                y.mode_mut(0, m as usize)[j] = ym;
            }
        }
        for f in [&mut x, &mut y] {
            f.comps[0][..n].iter_mut().for_each(|c| c.im = 0.0);
        }
        Ok([x, y])
    }

    /// Inverse of [`to_cartesian`](Self::to_cartesian), truncated to `grid`.
    pub fn from_cartesian(x: &DiscField, y: &DiscField, grid: &DiscGrid) -> Result<DiscField> {
        x.expect_rank(Rank::Scalar)?;
        y.expect_rank(Rank::Scalar)?;
        if x.grid != y.grid || x.grid.radial().len() != grid.radial().len() {
            return Err(Error::GridMismatch);
        }
        let i = Complex64::new(0.0, 1.0);
        let n = grid.radial().len();
        let z = |k: i64, j: usize| x.coeff(0, k, j) + i * y.coeff(0, k, j);
        let mut out = DiscField::zeros(grid, Rank::Vector);
        for m in 0..=grid.n_theta() as i64 {
            for j in 0..n {
                // P = e^{-iθ} Z, so P_k = Z_{k+1}; w_r = Re P, w_θ = Im P.
                let pp = z(m + 1, j);
                let pm = z(-m + 1, j);
                out.mode_mut(0, m as usize)[j] = (pp + pm.conj()) * 0.5;
                out.mode_mut(1, m as usize)[j] = (pp - pm.conj()) / (2.0 * i);
            }
        }
        for c in 0..2 {
            out.comps[c][..n].iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok(out)
    }

    pub fn to_file(&self) -> FieldFile {
        let n = self.n_pts();
        FieldFile {
            n_r: self.grid.n_r(),
            n_theta: self.n_theta(),
            rank: self.rank,
            components: self
                .comps
                .iter()
                .map(|c| ComponentFile {
                    modes: (0..=self.n_theta())
                        .map(|m| ModeFile {
                            m,
                            re: c[m * n..(m + 1) * n].iter().map(|z| z.re).collect(),
                            im: c[m * n..(m + 1) * n].iter().map(|z| z.im).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a field from its serialized form, reusing `grid` when it matches.
    pub fn from_file(file: &FieldFile, grid: Option<&DiscGrid>) -> Result<DiscField> {
        let grid = match grid {
            Some(g) if g.n_r() == file.n_r && g.n_theta() == file.n_theta => g.clone(),
            Some(_) => return Err(Error::GridMismatch),
            None => DiscGrid::new(file.n_r, file.n_theta)?,
        };
        if file.components.len() != file.rank.components() {
            return Err(Error::InvalidInput(format!(
                "{} field needs {} components, file has {}",
                file.rank.name(),
                file.rank.components(),
                file.components.len()
            )));
        }
        let n = grid.radial().len();
        let mut out = DiscField::zeros(&grid, file.rank);
        for (c, comp) in file.components.iter().enumerate() {
            for mode in &comp.modes {
                if mode.m > file.n_theta || mode.re.len() != n || mode.im.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "mode {} has a bad index or profile length",
                        mode.m
                    )));
                }
                let slot = out.mode_mut(c, mode.m);
                for (j, z) in slot.iter_mut().enumerate() {
                    *z = Complex64::new(mode.re[j], mode.im[j]);
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str, grid: Option<&DiscGrid>) -> Result<DiscField> {
        let file: FieldFile = serde_json::from_str(text)?;
        Self::from_file(&file, grid)
    }
}

/// Serialized field: grid parameters plus per-mode radial samples.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldFile {
    pub n_r: usize,
    pub n_theta: usize,
    pub rank: Rank,
    pub components: Vec<ComponentFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComponentFile {
    pub modes: Vec<ModeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModeFile {
    pub m: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// A time-indexed sequence of disc fields sharing one grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    time: SpaceTimeGrid,
    slices: Vec<DiscField>,
}

impl SpaceTimeField {
    pub fn new(time: SpaceTimeGrid, slices: Vec<DiscField>) -> Result<Self> {
        if slices.len() != time.len() {
            return Err(Error::InvalidInput(format!(
                "time grid has {} nodes but {} slices were given",
                time.len(),
                slices.len()
            )));
        }
        let first = &slices[0];
        if slices
            .iter()
            .any(|s| s.grid() != first.grid() || s.rank() != first.rank())
        {
            return Err(Error::GridMismatch);
        }
        Ok(Self { time, slices })
    }

    /// Samples `f(t)` at every time node.
    pub fn from_fn<F>(time: SpaceTimeGrid, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> DiscField,
    {
        let slices = time.times().into_iter().map(&mut f).collect();
        Self::new(time, slices)
    }

    pub fn zeros(time: SpaceTimeGrid, grid: &DiscGrid, rank: Rank) -> Self {
        Self {
            time,
            slices: vec![DiscField::zeros(grid, rank); time.len()],
        }
    }

    pub fn time(&self) -> &SpaceTimeGrid {
        &self.time
    }

    pub fn slices(&self) -> &[DiscField] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &DiscField {
        &self.slices[k]
    }

    pub fn grid(&self) -> &DiscGrid {
        self.slices[0].grid()
    }

    pub fn rank(&self) -> Rank {
        self.slices[0].rank()
    }

    pub fn into_slices(self) -> Vec<DiscField> {
        self.slices
    }

    pub fn map<F>(&self, f: F) -> Result<SpaceTimeField>
    where
        F: Fn(&DiscField) -> Result<DiscField>,
    {
        let slices = self.slices.iter().map(f).collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(self.time, slices)
    }

    pub fn axpy(&self, a: f64, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        if self.time != other.time {
            return Err(Error::GridMismatch);
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(self.time, slices)
    }

    /// Second-order time derivative: centered inside, one-sided at the ends.
    pub fn time_derivative(&self) -> Result<SpaceTimeField> {
        let n = self.slices.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "time derivative needs at least 3 time nodes, got {n}"
            )));
        }
        let dt = self.time.dt();
        let mut out = Vec::with_capacity(n);
        let combo = |terms: &[(f64, usize)]| -> Result<DiscField> {
            let mut acc = self.slices[terms[0].1].scaled(terms[0].0);
            for &(c, k) in &terms[1..] {
                acc = acc.axpy(c, &self.slices[k])?;
            }
            Ok(acc)
        };
        let h = 1.0 / (2.0 * dt);
        out.push(combo(&[(-3.0 * h, 0), (4.0 * h, 1), (-h, 2)])?);
        for k in 1..n - 1 {
            out.push(combo(&[(-h, k - 1), (h, k + 1)])?);
        }
        out.push(combo(&[(3.0 * h, n - 1), (-4.0 * h, n - 2), (h, n - 3)])?);
        SpaceTimeField::new(self.time, out)
    }

    pub fn to_file(&self) -> SpaceTimeFile {
        SpaceTimeFile {
            time: self.time,
            slices: self.slices.iter().map(DiscField::to_file).collect(),
        }
    }

    /// Rebuilds a space-time field; all slices share one grid.
    pub fn from_file(file: &SpaceTimeFile, grid: Option<&DiscGrid>) -> Result<SpaceTimeField> {
        let time = SpaceTimeGrid::new(file.time.t_start, file.time.t_end, file.time.n_t)?;
        let first = file
            .slices
            .first()
            .ok_or_else(|| Error::InvalidInput("space-time field has no slices".into()))?;
        let grid = match grid {
            Some(g) => g.clone(),
            None => DiscGrid::new(first.n_r, first.n_theta)?,
        };
        let slices = file
            .slices
            .iter()
            .map(|f| DiscField::from_file(f, Some(&grid)))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(time, slices)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str, grid: Option<&DiscGrid>) -> Result<SpaceTimeField> {
        let file: SpaceTimeFile = serde_json::from_str(text)?;
        Self::from_file(&file, grid)
    }
}

/// Serialized space-time field: the time grid and one [`FieldFile`] per node.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpaceTimeFile {
    pub time: SpaceTimeGrid,
    pub slices: Vec<FieldFile>,
}
