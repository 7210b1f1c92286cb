//! Small dense Hermitian matrices and a Jacobi eigen-solver.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_DIM: usize = 64;
pub const HERMITIAN_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 200;

/// Row-major complex Hermitian matrix, `d ≤ 64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseRepr", into = "DenseRepr")]
pub struct DenseHermitian {
    dim: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct DenseRepr {
    dim: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Vec<f64>,
}

impl TryFrom<DenseRepr> for DenseHermitian {
    type Error = Error;

    fn try_from(r: DenseRepr) -> Result<Self> {
        let n = r.dim * r.dim;
        let im = if r.im.is_empty() { vec![0.0; n] } else { r.im };
        if im.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: im.len() });
        }
        let data = r.re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        DenseHermitian::new(r.dim, data)
    }
}

impl From<DenseHermitian> for DenseRepr {
    fn from(m: DenseHermitian) -> Self {
        DenseRepr {
            dim: m.dim,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl DenseHermitian {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, actual: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        for i in 0..dim {
            for j in i..dim {
                let d = data[i * dim + j] - data[j * dim + i].conj();
                if d.norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidArgument(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(DenseHermitian { dim, data })
    }

    pub fn from_real(dim: usize, re: &[f64]) -> Result<Self> {
        DenseHermitian::new(dim, re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut data = vec![Complex64::default(); d * d];
        for (i, &x) in diag.iter().enumerate() {
            data[i * d + i] = Complex64::new(x, 0.0);
        }
        DenseHermitian::new(d, data)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        DenseHermitian::diagonal(&vec![1.0; dim])
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure_state(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("state vector must be nonzero".into()));
        }
        let d = psi.len();
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let data = (0..d * d).map(|n| v[n / d] * v[n % d].conj()).collect();
        DenseHermitian::new(d, data)
    }

    /// `(|00⟩ + |11⟩)/√2` as a density matrix.
    pub fn bell_phi_plus() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        DenseHermitian::pure_state(&[one, zero, zero, one]).expect("valid Bell state")
    }

    /// `w|Φ+⟩⟨Φ+| + (1 − w) I/4`.
    pub fn werner(w: f64) -> Result<Self> {
        let bell = DenseHermitian::bell_phi_plus();
        let noise = DenseHermitian::identity(4)?.scaled((1.0 - w) / 4.0);
        bell.scaled(w).add(&noise)
    }

    /// Random density matrix `G G† / Tr(G G†)` with a complex Gaussian `G`.
    pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let g: Vec<Complex64> = (0..dim * dim)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let mut data = vec![Complex64::default(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = (0..dim).map(|k| g[i * dim + k] * g[j * dim + k].conj()).sum();
            }
        }
        let tr: f64 = (0..dim).map(|i| data[i * dim + i].re).sum();
        for z in &mut data {
            *z /= tr;
        }
        for i in 0..dim {
            data[i * dim + i].im = 0.0;
            for j in 0..i {
                data[i * dim + j] = data[j * dim + i].conj();
            }
        }
        DenseHermitian::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        DenseHermitian { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch { expected: self.dim, actual: other.dim });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseHermitian { dim: self.dim, data })
    }

    /// Plain product; the result is not Hermitian in general.
    pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = a[i * d + k];
                if aik == Complex64::default() {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += aik * b[k * d + j];
                }
            }
        }
        out
    }

    /// Trace one and no eigenvalue below `−1e-10`.
    pub fn is_density(&self) -> Result<bool> {
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Ok(false);
        }
        Ok(hermitian_eigenvalues(self)?.iter().all(|&x| x >= -1e-10))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Eigenvalues in descending order.
///
/// Cyclic Jacobi on the real symmetric embedding `[[A, −B], [B, A]]` of
/// `A + iB`, which carries every eigenvalue twice.
pub fn hermitian_eigenvalues(m: &DenseHermitian) -> Result<Vec<f64>> {
    let d = m.dim;
    let n = 2 * d;
    let mut a = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = m.get(i, j);
            a[i * n + j] = z.re;
            a[(i + d) * n + (j + d)] = z.re;
            a[i * n + (j + d)] = -z.im;
            a[(i + d) * n + j] = z.im;
        }
    }
    let mut evs = jacobi_eigenvalues(&mut a, n)?;
    evs.sort_by(|x, y| y.total_cmp(x));
    Ok(evs.into_iter().step_by(2).collect())
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let mut off = off_norm(a, n);
    let mut sweeps = 0;
    while off >= JACOBI_TOL * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
        off = off_norm(a, n);
    }
    Ok((0..n).map(|i| a[i * n + i]).collect())
}

/// `ρ^Γ`: transpose on the second factor, `(ab, a′b′) → (ab′, a′b)`.
pub fn partial_transpose(m: &DenseHermitian, dim_a: usize, dim_b: usize) -> Result<DenseHermitian> {
    if dim_a * dim_b != m.dim {
        return Err(Error::InvalidArgument(format!("{dim_a}·{dim_b} does not match dimension {}", m.dim)));
    }
    let d = m.dim;
    let mut data = vec![Complex64::default(); d * d];
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    data[(a * dim_b + b2) * d + (a2 * dim_b + b)] = m.get(a * dim_b + b, a2 * dim_b + b2);
                }
            }
        }
    }
    Ok(DenseHermitian { dim: d, data })
}

/// `Tr[(ρ^Γ)^k]` for `k = 1..=t`.
pub fn pt_moments(m: &DenseHermitian, dim_a: usize, dim_b: usize, t: usize) -> Result<Vec<f64>> {
    let pt = partial_transpose(m, dim_a, dim_b)?;
    let d = pt.dim;
    let mut power = pt.data.clone();
    let mut out = Vec::with_capacity(t);
    for k in 1..=t {
        if k > 1 {
            power = DenseHermitian::matmul(&power, &pt.data, d);
        }
        out.push((0..d).map(|i| power[i * d + i].re).sum());
    }
    Ok(out)
}

/// `(Tr|a − b|^p)^{1/p}` from the eigenvalues of `a − b`.
pub fn schatten_reference(a: &DenseHermitian, b: &DenseHermitian, p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let evs = hermitian_eigenvalues(&a.sub(b)?)?;
    Ok(evs.iter().map(|x| x.abs().powi(p as i32)).sum::<f64>().powf(1.0 / p as f64))
}
