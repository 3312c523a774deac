use std::ops::Range;

use crate::linalg::{CMatrix, CsrMatrix, C64, I, ZERO};
use crate::noise::{Dissipator, GeneratorSet};

/// Jump operator with at most one entry per row, stored as (row, col, value)
/// and grouped by the sector of the column.
#[derive(Debug, Clone)]
struct MonomialJump {
    weight: f64,
    entries: Vec<(usize, usize, C64)>,
    real: bool,
    groups: Vec<Vec<(usize, usize, C64)>>,
}

/// A [`GeneratorSet`] flattened for repeated evaluation.
///
/// Writes ρ̇ = Kρ + ρK† + F∘ρ + Σ 2r LρL† with K = −iH − Σ r L†L and F the
/// elementwise dephasing factor on electronic index pairs.
///
/// The full space splits into the sectors ground ⊗ modes, sites ⊗ modes and
/// sink ⊗ modes. When every operator maps sectors to sectors, a state with
/// no coherence between sectors keeps none, and
/// [`Liouvillian::rhs_block_hermitian`] only touches the diagonal blocks.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    mode_bits: u32,
    electronic_dim: usize,
    k: CsrMatrix,
    dephasing: Option<Vec<f64>>,
    monomial: Vec<MonomialJump>,
    general: Vec<(CsrMatrix, f64)>,
    rate_bound: f64,
    sectors: Vec<Range<usize>>,
    block_preserving: bool,
}

impl Liouvillian {
    pub fn new(set: &GeneratorSet) -> Self {
        let layout = set.layout();
        let dim = layout.dim();
        let ne = layout.electronic_dim();
        let md = layout.mode_dim();
        let sectors = vec![0..md, md..(ne - 1) * md, (ne - 1) * md..dim];
        let sector_of = |i: usize| sectors.iter().position(|s| s.contains(&i)).unwrap_or(0);

        let mut k = set.hamiltonian().scale(-I);
        let mut dephasing: Option<Vec<f64>> = None;
        let mut monomial = Vec::new();
        let mut general = Vec::new();
        let mut jump_bound = 0.0;
        let mut block_preserving = true;
        for d in set.dissipators() {
            match d {
                Dissipator::Dephasing { gamma } => {
                    let f = Dissipator::dephasing_factor(gamma, ne);
                    let acc = dephasing.get_or_insert_with(|| vec![0.0; ne * ne]);
                    // column-major: f[(e_a, e_b)] at e_a + e_b * ne
                    for (dst, src) in acc.iter_mut().zip(f.as_slice()) {
                        *dst += src;
                    }
                }
                Dissipator::Jump { op, rate, .. } => {
                    let ldl = op.adjoint().matmul(op);
                    jump_bound += 4.0 * rate * ldl.max_abs_row_sum();
                    k = k.add(&ldl.scale(C64::new(-rate, 0.0)));
                    // one target sector per source sector keeps blocks closed
                    let mut target = vec![None; sectors.len()];
                    for (r, c, _) in op.iter() {
                        let (s, t) = (sector_of(c), sector_of(r));
                        match target[s] {
                            None => target[s] = Some(t),
                            Some(prev) if prev != t => block_preserving = false,
                            _ => {}
                        }
                    }
                    if op.is_monomial_rows() {
                        let mut groups = vec![Vec::new(); sectors.len()];
                        for (r, c, v) in op.iter() {
                            groups[sector_of(c)].push((r, c, v));
                        }
                        monomial.push(MonomialJump {
                            weight: 2.0 * rate,
                            entries: op.iter().collect(),
                            real: op.iter().all(|(_, _, v)| v.im == 0.0),
                            groups,
                        });
                    } else {
                        general.push((op.clone(), *rate));
                    }
                }
            }
        }
        if k.iter().any(|(r, c, _)| sector_of(r) != sector_of(c)) {
            block_preserving = false;
        }
        let deph_bound = dephasing
            .as_ref()
            .map_or(0.0, |f| f.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        let rate_bound = spectral_spread(set.hamiltonian()) + jump_bound + deph_bound;
        Liouvillian {
            dim,
            mode_bits: layout.n_modes() as u32,
            electronic_dim: ne,
            k,
            dephasing,
            monomial,
            general,
            rate_bound,
            sectors,
            block_preserving,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper bound on the magnitude of the generator's eigenvalues.
    pub fn rate_bound(&self) -> f64 {
        self.rate_bound
    }

    /// True when some jump operator has more than one entry per row. Their
    /// contribution is Hermitian only up to rounding.
    pub fn has_general_jumps(&self) -> bool {
        !self.general.is_empty()
    }

    /// True when `rho` has no coherence between sectors and the generator
    /// cannot create any.
    pub fn block_diagonal(&self, rho: &CMatrix) -> bool {
        if !self.block_preserving {
            return false;
        }
        let n = self.dim;
        let s = rho.as_slice();
        self.sectors.iter().all(|col_sector| {
            col_sector.clone().all(|j| {
                let col = &s[j * n..(j + 1) * n];
                col[..col_sector.start].iter().all(|z| *z == ZERO)
                    && col[col_sector.end..].iter().all(|z| *z == ZERO)
            })
        })
    }

    /// Column-major index ranges holding the diagonal blocks (`blocked`) or
    /// the whole matrix.
    pub fn segments(&self, blocked: bool) -> Vec<Range<usize>> {
        let n = self.dim;
        if !blocked {
            return vec![0..n * n];
        }
        self.sectors
            .iter()
            .flat_map(|s| s.clone().map(move |j| j * n + s.start..j * n + s.end))
            .collect()
    }

    /// ρ̇ for any square input.
    pub fn rhs(&self, rho: &CMatrix, out: &mut CMatrix) {
        self.k.mul_dense_into(rho, out);
        self.k.add_dense_mul_adjoint(rho, out);
        self.add_dissipative(rho, out, false);
    }

    /// ρ̇ for Hermitian input, using Kρ = (ρK†)†. `scratch` is overwritten.
    pub fn rhs_hermitian(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        let full = [0..self.dim];
        self.coherent_part(rho, out, scratch, &full);
        self.add_dissipative(rho, out, false);
    }

    /// As [`Liouvillian::rhs_hermitian`] for input where
    /// [`Liouvillian::block_diagonal`] holds. Entries of `out` outside the
    /// diagonal blocks are left untouched.
    pub fn rhs_block_hermitian(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        debug_assert!(self.block_preserving);
        self.coherent_part(rho, out, scratch, &self.sectors);
        self.add_dissipative(rho, out, true);
    }

    /// `out = ρK† + (ρK†)†` restricted to the diagonal blocks `blocks`.
    fn coherent_part(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix, blocks: &[Range<usize>]) {
        let n = self.dim;
        let src = rho.as_slice();
        let x = scratch.as_mut_slice();
        // (ρK†)[:, j] = Σ_c conj(K[j, c]) ρ[:, c]
        for b in blocks {
            for j in b.clone() {
                let xcol = &mut x[j * n + b.start..j * n + b.end];
                xcol.fill(ZERO);
                for (c, v) in self.k.row(j) {
                    axpy(xcol, &src[c * n + b.start..c * n + b.end], v.conj());
                }
            }
        }
        let dst = out.as_mut_slice();
        for b in blocks {
            add_with_adjoint(x, dst, n, b.clone());
        }
    }

    fn add_dissipative(&self, rho: &CMatrix, out: &mut CMatrix, blocked: bool) {
        let n = self.dim;
        let src = rho.as_slice();
        if let Some(f) = &self.dephasing {
            let block = 1usize << self.mode_bits;
            let dst = out.as_mut_slice();
            for b in 0..n {
                let eb = b >> self.mode_bits;
                let rows = if blocked {
                    let s = self.sectors.iter().find(|s| s.contains(&b)).unwrap();
                    (s.start >> self.mode_bits)..(s.end >> self.mode_bits)
                } else {
                    0..self.electronic_dim
                };
                let col = &f[eb * self.electronic_dim..(eb + 1) * self.electronic_dim];
                let base = b * n;
                for ea in rows {
                    let factor = col[ea];
                    if factor == 0.0 {
                        continue;
                    }
                    let range = base + ea * block..base + (ea + 1) * block;
                    for (d, s) in dst[range.clone()].iter_mut().zip(&src[range]) {
                        *d += s * factor;
                    }
                }
            }
        }
        let dst = out.as_mut_slice();
        for jump in &self.monomial {
            let mut sandwich = |outer: &[(usize, usize, C64)], inner: &[(usize, usize, C64)]| {
                for &(b, ib, lb) in outer {
                    let scale = lb.conj() * jump.weight;
                    let col = ib * n;
                    let dcol = b * n;
                    if jump.real {
                        for &(a, ia, la) in inner {
                            dst[dcol + a] += src[col + ia] * (la.re * scale.re);
                        }
                    } else {
                        for &(a, ia, la) in inner {
                            dst[dcol + a] += la * scale * src[col + ia];
                        }
                    }
                }
            };
            if blocked {
                for g in &jump.groups {
                    sandwich(g, g);
                }
            } else {
                sandwich(&jump.entries, &jump.entries);
            }
        }
        for (op, rate) in &self.general {
            let t = op.mul_dense(rho).scale(2.0 * rate);
            op.add_dense_mul_adjoint(&t, out);
        }
    }
}

/// `dst += a · src`, with cheaper loops for purely real or imaginary `a`.
#[inline]
fn axpy(dst: &mut [C64], src: &[C64], a: C64) {
    let (d, s) = (as_reals_mut(dst), as_reals(src));
    if a.re == 0.0 {
        let b = a.im;
        for (d, s) in d.chunks_exact_mut(2).zip(s.chunks_exact(2)) {
            d[0] -= b * s[1];
            d[1] += b * s[0];
        }
    } else if a.im == 0.0 {
        let b = a.re;
        for (d, s) in d.iter_mut().zip(s) {
            *d += b * s;
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            *d += a * s;
        }
    }
}

fn as_reals(z: &[C64]) -> &[f64] {
    // SAFETY: Complex<f64> is #[repr(C)] with two f64 fields.
    unsafe { std::slice::from_raw_parts(z.as_ptr().cast::<f64>(), 2 * z.len()) }
}

fn as_reals_mut(z: &mut [C64]) -> &mut [f64] {
    // SAFETY: as in `as_reals`; the borrow is exclusive.
    unsafe { std::slice::from_raw_parts_mut(z.as_mut_ptr().cast::<f64>(), 2 * z.len()) }
}

/// `dst = x + x†` on the diagonal block `range × range`, tiled for cache
/// locality.
fn add_with_adjoint(x: &[C64], dst: &mut [C64], n: usize, range: Range<usize>) {
    const TILE: usize = 32;
    for jb in range.clone().step_by(TILE) {
        for ib in range.clone().step_by(TILE) {
            for j in jb..(jb + TILE).min(range.end) {
                for i in ib..(ib + TILE).min(range.end) {
                    dst[i + j * n] = x[i + j * n] + x[j + i * n].conj();
                }
            }
        }
    }
}

/// Gershgorin width of a Hermitian sparse matrix's spectrum.
fn spectral_spread(h: &CsrMatrix) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in 0..h.nrows() {
        let mut centre = 0.0;
        let mut radius = 0.0;
        for (c, v) in h.row(r) {
            if c == r {
                centre = v.re;
            } else {
                radius += v.norm();
            }
        }
        lo = lo.min(centre - radius);
        hi = hi.max(centre + radius);
    }
    if h.nrows() == 0 {
        0.0
    } else {
        // rows with no entries still have eigenvalue 0 in the spread
        (hi.max(0.0) - lo.min(0.0)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_fcn, hybrid_transform};
    use crate::noise::{DephasingSpec, GeneratorSet, LocalModeSpec, NoiseSpec, SinkSpec};
    use crate::testing::{random_hermitian, random_psd};

    fn generators(modes: bool) -> GeneratorSet {
        let h = build_fcn(3, 1.0, &[0.1, -0.3, 0.7]).unwrap();
        let noise = NoiseSpec {
            dephasing: Some(DephasingSpec::correlated(&random_psd(3, 9)).unwrap()),
            radiative: vec![0.05, 0.0, 0.2],
            sink: Some(SinkSpec { site: 3, rate: 1.0 }),
            modes: modes.then(|| {
                let mut m = LocalModeSpec::new(vec![1, 3], 0.4);
                m.omega_h = 2.0;
                m
            }),
        };
        GeneratorSet::build(&h, &noise).unwrap()
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn all_paths_match_reference() {
        for modes in [false, true] {
            let g = generators(modes);
            let l = Liouvillian::new(&g);
            let rho = random_hermitian(g.dim(), 3);
            let reference = g.apply(&rho).unwrap();
            let mut out = CMatrix::zeros(g.dim(), g.dim());
            l.rhs(&rho, &mut out);
            assert!(max_diff(&out, &reference) < 1e-12);
            let mut scratch = CMatrix::zeros(g.dim(), g.dim());
            let mut out = CMatrix::zeros(g.dim(), g.dim());
            l.rhs_hermitian(&rho, &mut out, &mut scratch);
            assert!(max_diff(&out, &reference) < 1e-12);
        }
    }

    #[test]
    fn general_jumps_match_reference() {
        let g = generators(true).transformed(&hybrid_transform(3, (1, 2)).unwrap()).unwrap();
        let l = Liouvillian::new(&g);
        let rho = random_hermitian(g.dim(), 5);
        let mut out = CMatrix::zeros(g.dim(), g.dim());
        l.rhs(&rho, &mut out);
        assert!(max_diff(&out, &g.apply(&rho).unwrap()) < 1e-12);
    }

    #[test]
    fn blocked_path_matches_on_sector_diagonal_input() {
        let g = generators(true);
        let l = Liouvillian::new(&g);
        let full = random_hermitian(g.dim(), 8);
        assert!(!l.block_diagonal(&full));
        let segments = l.segments(true);
        let mut rho = CMatrix::zeros(g.dim(), g.dim());
        for s in &segments {
            rho.as_mut_slice()[s.clone()].copy_from_slice(&full.as_slice()[s.clone()]);
        }
        assert!(l.block_diagonal(&rho));
        let reference = g.apply(&rho).unwrap();
        let mut out = CMatrix::zeros(g.dim(), g.dim());
        let mut scratch = CMatrix::zeros(g.dim(), g.dim());
        l.rhs_block_hermitian(&rho, &mut out, &mut scratch);
        assert!(max_diff(&out, &reference) < 1e-12);
    }

    #[test]
    fn rate_bound_covers_decay_rates() {
        let g = generators(false);
        let l = Liouvillian::new(&g);
        assert!(l.rate_bound() >= 2.0);
    }
}
