use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::params::{validate, ChainSpec, DephasingSpec, DrivingParams};
use crate::twoqubit::C64;

/// Largest chain handled unless the caller raises the limit.
pub const DEFAULT_N_MAX: usize = 7;
const NOT_IN_SECTOR: u32 = u32::MAX;

/// The model a Liouvillian was assembled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub chain: ChainSpec,
    pub params: DrivingParams,
    pub dephasing: DephasingSpec,
}

/// Lindblad superoperator restricted to one magnetization-difference sector.
///
/// The generator conserves `q = N↓(s) − N↓(s')` for a matrix element
/// `|s⟩⟨s'|`. Every state with nonzero trace lives in `q = 0`, so the
/// steady state is found there; the other sectors only matter for the
/// degeneracy question and can be assembled separately.
///
/// Matrix elements are stored column-compressed, with column `i` holding the
/// image of the basis element `basis()[i]`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    model: Model,
    q: i32,
    basis: Vec<(u32, u32)>,
    index: Vec<u32>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

/// Assembles the `q = 0` sector with the default size limit.
pub fn build_liouvillian(chain: ChainSpec, p: DrivingParams, d: DephasingSpec) -> Result<Liouvillian> {
    Liouvillian::new(
        Model {
            chain,
            params: p,
            dephasing: d,
        },
        DEFAULT_N_MAX,
        0,
    )
}

/// Bit of site `j` (1-based); site 1 is the most significant bit and bit
/// value 0 is spin up.
#[inline]
pub(crate) fn site_bit(n: usize, j: usize) -> u32 {
    1 << (n - j)
}

impl Liouvillian {
    pub fn new(model: Model, n_max: usize, q: i32) -> Result<Self> {
        validate(&model.params, &model.dephasing, &model.chain).into_result()?;
        let n = model.chain.n;
        if n > n_max {
            return Err(Error::SizeLimit { n, n_max });
        }
        let dim = 1usize << n;
        let pop: Vec<i32> = (0..dim as u32).map(|s| s.count_ones() as i32).collect();
        let mut index = vec![NOT_IN_SECTOR; dim * dim];
        let mut basis = Vec::new();
        for s in 0..dim {
            for t in 0..dim {
                if pop[s] - pop[t] == q {
                    index[s * dim + t] = basis.len() as u32;
                    basis.push((s as u32, t as u32));
                }
            }
        }

        let p = &model.params;
        let (h, m) = (p.mu / 2.0, p.mu_bar);
        // (rate, site, raises?) for σ⁺ (bit 1 → 0) and σ⁻ (bit 0 → 1)
        let baths = [
            (p.gamma_left * (1.0 - h + m), 1, true),
            (p.gamma_left * (1.0 + h - m), 1, false),
            (p.gamma_right * (1.0 + h + m), n, true),
            (p.gamma_right * (1.0 - h - m), n, false),
        ];
        let gamma = model.dephasing.gamma;
        let bonds: Vec<u32> = (1..n).map(|j| site_bit(n, j) | site_bit(n, j + 1)).collect();
        let hops = |s: u32| {
            bonds
                .iter()
                .filter(move |&&b| (s & b).count_ones() == 1)
                .map(move |&b| s ^ b)
        };

        let mut col_ptr = Vec::with_capacity(basis.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut column: Vec<(usize, C64)> = Vec::new();
        col_ptr.push(0);
        for &(s, t) in &basis {
            column.clear();
            let at = |a: u32, b: u32| index[a as usize * dim + b as usize] as usize;
            for r in hops(s) {
                column.push((at(r, t), C64::new(0.0, -2.0)));
            }
            for r in hops(t) {
                column.push((at(s, r), C64::new(0.0, 2.0)));
            }
            let mut diag = 0.0;
            for &(rate, site, raises) in &baths {
                if rate == 0.0 {
                    continue;
                }
                let b = site_bit(n, site);
                let ready = |x: u32| ((x & b) != 0) == raises;
                if ready(s) && ready(t) {
                    column.push((at(s ^ b, t ^ b), C64::new(2.0 * rate, 0.0)));
                }
                diag -= rate * (ready(s) as u8 + ready(t) as u8) as f64;
            }
            if gamma > 0.0 {
                let differing = (s ^ t).count_ones() as f64;
                diag -= 2.0 * gamma * differing;
            }
            column.push((at(s, t), C64::new(diag, 0.0)));
            column.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(r, v) in &column {
                if r == last {
                    *values.last_mut().expect("entry") += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                    last = r;
                }
            }
            col_ptr.push(row_idx.len());
        }

        Ok(Liouvillian {
            model,
            q,
            basis,
            index,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.model.chain.n
    }

    pub fn sector(&self) -> i32 {
        self.q
    }

    /// Dimension of the full superoperator, `4ⁿ`.
    pub fn full_dimension(&self) -> usize {
        1 << (2 * self.n())
    }

    /// Dimension of the assembled sector.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn basis(&self) -> &[(u32, u32)] {
        &self.basis
    }

    /// Sector position of `|s⟩⟨t|`, if it belongs to the sector.
    pub fn position(&self, s: u32, t: u32) -> Option<usize> {
        let dim = 1usize << self.n();
        match self.index.get(s as usize * dim + t as usize) {
            Some(&i) if i != NOT_IN_SECTOR => Some(i as usize),
            _ => None,
        }
    }

    /// Iterates `(row, col, value)` over the stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dimension()).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    /// `L x` for a sector vector `x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dimension()];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
        y
    }

    /// `‖𝟙ᵀ L‖₂`, which vanishes when the generator preserves the trace.
    pub fn trace_defect(&self) -> f64 {
        let mut acc = vec![C64::new(0.0, 0.0); self.dimension()];
        for (r, c, v) in self.entries() {
            let (s, t) = self.basis[r];
            if s == t {
                acc[c] += v;
            }
        }
        acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry, used to scale tolerances.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dimension(), self.dimension());
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    /// Triplets of `L` with one diagonal row replaced by the trace functional.
    /// Returns the replaced row.
    pub(crate) fn bordered_triplets(&self) -> (usize, Vec<Triplet<usize, usize, C64>>) {
        let pivot = self.position(0, 0).expect("bordering needs the q = 0 sector");
        let mut out: Vec<_> = self
            .entries()
            .filter(|&(r, _, _)| r != pivot)
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        for (c, &(s, t)) in self.basis.iter().enumerate() {
            if s == t {
                out.push(Triplet::new(pivot, c, C64::new(1.0, 0.0)));
            }
        }
        (pivot, out)
    }

    pub(crate) fn shifted_sparse(&self, shift: f64) -> Result<SparseColMat<usize, C64>> {
        let mut t: Vec<_> = self.entries().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        for i in 0..self.dimension() {
            t.push(Triplet::new(i, i, C64::new(-shift, 0.0)));
        }
        sparse_from(self.dimension(), &t)
    }
}

pub(crate) fn sparse_from(dim: usize, t: &[Triplet<usize, usize, C64>]) -> Result<SparseColMat<usize, C64>> {
    SparseColMat::try_new_from_triplets(dim, dim, t)
        .map_err(|e| Error::NoConvergence(format!("sparse assembly failed: {e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, gl: f64, gr: f64, mu: f64, mb: f64, g: f64) -> Model {
        Model {
            chain: ChainSpec::new(n).unwrap(),
            params: DrivingParams::new(gl, gr, mu, mb).unwrap(),
            dephasing: DephasingSpec::new(g).unwrap(),
        }
    }

    #[test]
    fn sector_dimensions() {
        let l = Liouvillian::new(model(4, 1.0, 1.0, 1.0, 0.0, 0.0), 7, 0).unwrap();
        assert_eq!(l.dimension(), 70);
        assert_eq!(l.full_dimension(), 256);
        let total: usize = (-4..=4)
            .map(|q| {
                Liouvillian::new(model(4, 1.0, 1.0, 1.0, 0.0, 0.0), 7, q)
                    .unwrap()
                    .dimension()
            })
            .sum();
        assert_eq!(total, 256);
    }

    #[test]
    fn trace_is_preserved() {
        for (n, g) in [(2, 0.0), (3, 0.2), (5, 0.07)] {
            let l = Liouvillian::new(model(n, 0.7, 1.9, 0.8, -0.3, g), 7, 0).unwrap();
            assert!(l.trace_defect() <= 1e-12);
        }
    }

    #[test]
    fn size_limit() {
        let r = Liouvillian::new(model(8, 1.0, 1.0, 0.0, 0.0, 0.0), 7, 0);
        assert!(matches!(r, Err(Error::SizeLimit { n: 8, n_max: 7 })));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let m = Model {
            chain: ChainSpec { n: 3 },
            params: DrivingParams {
                gamma_left: 1.0,
                gamma_right: 1.0,
                mu: 3.0,
                mu_bar: 0.0,
            },
            dephasing: DephasingSpec::NONE,
        };
        assert!(matches!(Liouvillian::new(m, 7, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn matches_kronecker_construction() {
        // Dense reference built from operator products, two sites.
        let m = model(2, 0.8, 1.3, 0.6, 0.1, 0.3);
        let l = Liouvillian::new(m, 7, 0).unwrap();
        let id = DMatrix::<C64>::identity(2, 2);
        let c = |re: f64, im: f64| C64::new(re, im);
        let sx = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let sy = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let sz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let sp = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let sm = sp.adjoint();
        let h = sx.kronecker(&sx) + sy.kronecker(&sy);
        let p = m.params;
        let (hm, mb) = (p.mu / 2.0, p.mu_bar);
        let g = m.dephasing.gamma;
        let ops = [
            sp.kronecker(&id) * c((p.gamma_left * (1.0 - hm + mb)).sqrt(), 0.0),
            sm.kronecker(&id) * c((p.gamma_left * (1.0 + hm - mb)).sqrt(), 0.0),
            id.kronecker(&sp) * c((p.gamma_right * (1.0 + hm + mb)).sqrt(), 0.0),
            id.kronecker(&sm) * c((p.gamma_right * (1.0 - hm - mb)).sqrt(), 0.0),
            sz.kronecker(&id) * c((g / 2.0).sqrt(), 0.0),
            id.kronecker(&sz) * c((g / 2.0).sqrt(), 0.0),
        ];
        let gen = |rho: &DMatrix<C64>| {
            let mut out = (rho * &h - &h * rho) * c(0.0, 1.0);
            for op in &ops {
                let lr = op * rho;
                let rl = rho * op.adjoint();
                out += &lr * op.adjoint() * c(2.0, 0.0) - op.adjoint() * &lr - &rl * op;
            }
            out
        };
        for (col, &(s, t)) in l.basis().iter().enumerate() {
            let mut e = DMatrix::<C64>::zeros(4, 4);
            e[(s as usize, t as usize)] = c(1.0, 0.0);
            let want = gen(&e);
            let mut x = vec![c(0.0, 0.0); l.dimension()];
            x[col] = c(1.0, 0.0);
            let got = l.apply(&x);
            for a in 0..4u32 {
                for b in 0..4u32 {
                    let w = want[(a as usize, b as usize)];
                    let v = l.position(a, b).map_or(c(0.0, 0.0), |i| got[i]);
                    assert!((w - v).norm() < 1e-14, "({s},{t}) → ({a},{b}): {w} vs {v}");
                }
            }
        }
    }
}
