#![allow(dead_code)]

use hillcert_core::{Complex64, ComplexMatrix, FourierMatrixSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    })
}

/// Random `n×n` series with coefficients at `|k| ≤ support`.
pub fn random_series(rng: &mut ChaCha8Rng, n: usize, support: i64, omega: f64, scale: f64) -> FourierMatrixSeries {
    let coeffs: Vec<(i64, ComplexMatrix)> = (-support..=support)
        .map(|k| (k, random_matrix(rng, n, scale / (1.0 + k.abs() as f64))))
        .collect();
    FourierMatrixSeries::from_coeffs(omega, n, coeffs).unwrap()
}

/// Double-double number `hi + lo`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    /// `1/k` to double-double accuracy.
    pub fn recip(k: f64) -> Dd {
        let r = 1.0 / k;
        let e = -(k.mul_add(r, -1.0)) / k;
        Dd { hi: r, lo: e }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `e^x` by argument halving and a long Taylor series.
    pub fn exp(x: f64) -> Dd {
        let s = (x.abs().max(1.0)).log2().ceil() as i32 + 4;
        let y = Dd::new(x / 2f64.powi(s));
        let mut term = Dd::new(1.0);
        let mut sum = Dd::new(1.0);
        for k in 1..40 {
            term = term.mul(y).mul(Dd::recip(k as f64));
            sum = sum.add(term);
        }
        for _ in 0..s {
            sum = sum.mul(sum);
        }
        sum
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn from(z: Complex64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }

    pub fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: self.im.neg() }
    }

    pub fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn scale(self, s: Dd) -> Cdd {
        Cdd { re: self.re.mul(s), im: self.im.mul(s) }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Dense square matrix in double-double precision.
#[derive(Clone)]
pub struct DdMatrix {
    pub n: usize,
    pub data: Vec<Cdd>,
}

impl DdMatrix {
    pub fn from(a: &ComplexMatrix) -> Self {
        DdMatrix { n: a.rows(), data: a.as_slice().iter().map(|&z| Cdd::from(z)).collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Cdd::default(); n * n];
        for i in 0..n {
            data[i * n + i] = Cdd::from(Complex64::new(1.0, 0.0));
        }
        DdMatrix { n, data }
    }

    pub fn mul(&self, o: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut data = vec![Cdd::default(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] = data[i * n + j].add(a.mul(o.data[k * n + j]));
                }
            }
        }
        DdMatrix { n, data }
    }

    pub fn add(&self, o: &DdMatrix) -> DdMatrix {
        DdMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(*b)).collect() }
    }

    pub fn scale(&self, s: Dd) -> DdMatrix {
        DdMatrix { n: self.n, data: self.data.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.n, self.n, self.data.iter().map(|z| z.to_c64()).collect()).unwrap()
    }
}

/// `exp(A)` by scaling, a 40-term Taylor polynomial and squaring, all in
/// double-double arithmetic.
pub fn expm_taylor_dd(a: &ComplexMatrix) -> ComplexMatrix {
    let s = (a.norm_1() / 0.25).log2().ceil().max(0.0) as i32;
    let scaled = DdMatrix::from(&a.scale_real(2f64.powi(-s)));
    let n = a.rows();
    let mut term = DdMatrix::identity(n);
    let mut sum = DdMatrix::identity(n);
    for k in 1..40 {
        term = term.mul(&scaled).scale(Dd::recip(k as f64));
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum.to_matrix()
}

pub fn trapezoid_cumulative(f: impl Fn(f64) -> Complex64, t_end: f64, steps: usize) -> Vec<(f64, Complex64)> {
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = f(0.0);
    out.push((0.0, acc));
    for i in 1..=steps {
        let t = i as f64 * h;
        let cur = f(t);
        acc += (prev + cur) * (0.5 * h);
        out.push((t, acc));
        prev = cur;
    }
    out
}

/// Number of eigenvalues of `MᴴM` below `s`, from the inertia of
/// `MᴴM − sI` (Sylvester), in double-double arithmetic.
fn gram_count_below(m: &DdMatrix, s: Dd) -> usize {
    let n = m.n;
    let mut g = vec![Cdd::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Cdd::default();
            for k in 0..n {
                acc = acc.add(m.data[k * n + i].conj().mul(m.data[k * n + j]));
            }
            g[i * n + j] = acc;
        }
        g[i * n + i].re = g[i * n + i].re.sub(s);
    }
    let mut negative = 0;
    for k in 0..n {
        let d = g[k * n + k].re;
        if d.hi < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let f = g[i * n + k].scale(Dd::new(1.0).div(d));
            for j in k + 1..n {
                g[i * n + j] = g[i * n + j].sub(f.mul(g[k * n + j]));
            }
        }
    }
    negative
}

/// `σ_min(A)` by bisection on the inertia of the Gram matrix.
pub fn sigma_min_dd(a: &ComplexMatrix) -> f64 {
    let m = DdMatrix::from(a);
    let mut lo = 0.0_f64;
    let mut hi = a.norm_fro().powi(2) * 1.01 + 1e-300;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gram_count_below(&m, Dd::new(mid)) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).sqrt()
}
