//! Seeded generators for the randomized verification suites.
//!
//! Everything here is driven by a counter-based stream cipher, so a fixed
//! seed reproduces the exact same objects on every run and every platform.
//! Twisted complexes are generated by sampling the one-sided slots freely
//! and then repairing the structure identity gap by gap: the composite
//! terms from shorter arrows prescribe the differential of each cell, a
//! particular solution is found by the canonical solver, and a random
//! cocycle is mixed in for variety.  When some cell has no solution the
//! whole draw is rejected and resampled; after too many rejections the
//! generator falls back to a two-column ladder, which always closes.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::category::{DgPresentation, HomElt, ObjId};
use crate::complex::{ChainMap, Complex, GradedSpace};
use crate::dgmodule::{
    cohomology_support, module_direct_sum, module_hom_complex, module_shift, yoneda, DgModule,
    DgModuleMap,
};
use crate::field::{axpy, FieldSpec, Matrix, Scalar};
use crate::holim::ModuleSequence;
use crate::twisted::{
    stupid_truncate, totalize, totalize_morphism, truncation_inclusion, tw_d, tw_hom_complex,
    EltMatrix, TwMorphism, TwistedComplex,
};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn coeff(&mut self, field: FieldSpec) -> Scalar {
        let v: i64 = self.rng.gen_range(1..=2);
        let s = if self.rng.gen_bool(0.5) { v } else { -v };
        field.from_i64(s)
    }

    /// A random element of the span of `basis`, each coordinate kept with
    /// the given probability.  Returns None when every coordinate is zero.
    fn span_element(
        &mut self,
        field: FieldSpec,
        dim: usize,
        basis: &[Vec<Scalar>],
        keep: f64,
    ) -> Option<Vec<Scalar>> {
        let mut v = vec![field.zero(); dim];
        let mut hit = false;
        for b in basis {
            if self.rng.gen_bool(keep) {
                axpy(&mut v, &self.coeff(field), b);
                hit = true;
            }
        }
        if hit && v.iter().any(|s| !s.is_zero()) {
            Some(v)
        } else {
            None
        }
    }

    /// A valid twisted complex with at most `max_width` consecutive
    /// indices and at most `max_mult` objects per index.
    pub fn twisted_complex(
        &mut self,
        cat: &Arc<DgPresentation>,
        max_width: usize,
        max_mult: usize,
    ) -> TwistedComplex {
        for _ in 0..60 {
            if let Some(x) = self.try_twisted_complex(cat, max_width, max_mult) {
                return x;
            }
        }
        // Fallback: one gap-1 arrow between two single entries, with a
        // cocycle cell.  The structure identity is vacuous past gap one.
        let field = cat.field;
        let hi = self.rng.gen_range(-1..=1);
        let src = self.rng.gen_range(0..cat.object_count());
        let tgt = self.rng.gen_range(0..cat.object_count());
        let mut entries = BTreeMap::new();
        entries.insert(hi - 1, vec![src]);
        entries.insert(hi, vec![tgt]);
        let mut q = BTreeMap::new();
        let (hc, idx) = cat.hom_complex_of(src, tgt);
        let kernel = hc.d_at(0).kernel_basis();
        if let Some(v) = self.span_element(field, hc.dim(0), &kernel, 0.8) {
            let mut block = EltMatrix::zero(1, 1);
            block.set(0, 0, idx.decode(0, &v));
            q.insert((hi - 1, hi), block);
        }
        let x = TwistedComplex::new(cat.clone(), entries, q);
        x.validate().expect("the fallback ladder always satisfies the structure identity");
        x
    }

    fn try_twisted_complex(
        &mut self,
        cat: &Arc<DgPresentation>,
        max_width: usize,
        max_mult: usize,
    ) -> Option<TwistedComplex> {
        let field = cat.field;
        let width = self.rng.gen_range(1..=max_width.max(1));
        let hi = self.rng.gen_range(-1..=1);
        let lo = hi - width as i32 + 1;
        let mut entries: BTreeMap<i32, Vec<ObjId>> = BTreeMap::new();
        for i in lo..=hi {
            let count = self.rng.gen_range(0..=max_mult);
            let objs: Vec<ObjId> =
                (0..count).map(|_| self.rng.gen_range(0..cat.object_count())).collect();
            if !objs.is_empty() {
                entries.insert(i, objs);
            }
        }
        if entries.is_empty() {
            entries.insert(hi, vec![self.rng.gen_range(0..cat.object_count())]);
        }

        let at = |entries: &BTreeMap<i32, Vec<ObjId>>, i: i32| -> Vec<ObjId> {
            entries.get(&i).cloned().unwrap_or_default()
        };
        let mut q: BTreeMap<(i32, i32), EltMatrix> = BTreeMap::new();
        for gap in 1..=width as i32 {
            for i in lo..=(hi - gap) {
                let j = i + gap;
                let srcs = at(&entries, i);
                let tgts = at(&entries, j);
                if srcs.is_empty() || tgts.is_empty() {
                    continue;
                }
                let deg = i - j + 1;
                let mut block = EltMatrix::zero(tgts.len(), srcs.len());
                let mut nonzero = false;
                for (r, &tgt) in tgts.iter().enumerate() {
                    for (c, &src) in srcs.iter().enumerate() {
                        // The structure identity pins down the cell's
                        // differential in terms of the shorter arrows.
                        let mut forced = HomElt::zero(deg + 1);
                        for k in (i + 1)..j {
                            let mids = at(&entries, k);
                            for (m, &mid) in mids.iter().enumerate() {
                                let left = q
                                    .get(&(k, j))
                                    .and_then(|bl| bl.get(r, m));
                                let right = q
                                    .get(&(i, k))
                                    .and_then(|bl| bl.get(m, c));
                                if let (Some(g), Some(f)) = (left, right) {
                                    forced =
                                        forced.add(&cat.compose_elt(src, mid, tgt, g, f));
                                }
                            }
                        }
                        let sign = if j % 2 == 0 { -1 } else { 1 };
                        let forced = forced.scale(&field.from_i64(sign));

                        let (hc, idx) = cat.hom_complex_of(src, tgt);
                        let rhs = idx.encode(&forced, field);
                        let mut cell = if rhs.iter().all(Scalar::is_zero) {
                            vec![field.zero(); hc.dim(deg)]
                        } else {
                            hc.coboundary_preimage(deg + 1, &rhs)?
                        };
                        let keep = if gap == 1 { 0.45 } else { 0.25 };
                        let kernel = hc.d_at(deg).kernel_basis();
                        if let Some(z) = self.span_element(field, hc.dim(deg), &kernel, keep)
                        {
                            for (t, zi) in cell.iter_mut().zip(&z) {
                                *t = t.add(zi);
                            }
                        }
                        if cell.iter().any(|s| !s.is_zero()) {
                            block.set(r, c, idx.decode(deg, &cell));
                            nonzero = true;
                        }
                    }
                }
                if nonzero {
                    q.insert((i, j), block);
                }
            }
        }
        let x = TwistedComplex::new(cat.clone(), entries, q);
        match x.validate() {
            Ok(()) => Some(x),
            Err(e) => panic!("generator produced an invalid twisted complex: {e}"),
        }
    }

    /// A random closed degree-0 morphism between two twisted complexes,
    /// drawn uniformly-ish from the kernel of the calculus differential
    /// on component cells.  With `one_sided_only` the cell slots are
    /// restricted to the one-sided range; otherwise all slots are open
    /// and the draw is biased toward having a genuinely two-sided part
    /// whenever the kernel allows one.
    pub fn closed_morphism(
        &mut self,
        x: &TwistedComplex,
        y: &TwistedComplex,
        one_sided_only: bool,
    ) -> TwMorphism {
        let cat = &x.cat;
        let field = cat.field;
        struct Slot {
            i: i32,
            j: i32,
            r: usize,
            c: usize,
            basis: usize,
        }
        let mut slots = Vec::new();
        for i in x.indices() {
            for j in y.indices() {
                if one_sided_only && i > j {
                    continue;
                }
                let deg = i - j;
                for (r, &tgt) in y.objects_at(j).iter().enumerate() {
                    for (c, &src) in x.objects_at(i).iter().enumerate() {
                        for (k, be) in cat.hom(src, tgt).basis.iter().enumerate() {
                            if be.degree == deg {
                                slots.push(Slot { i, j, r, c, basis: k });
                            }
                        }
                    }
                }
            }
        }
        if slots.is_empty() {
            return TwMorphism::zero(x.clone(), y.clone(), 0);
        }

        let th = tw_hom_complex(x, y);
        let rows = th.full_dim(1);
        let mut constraint = Matrix::zero(field, rows, slots.len());
        for (col, slot) in slots.iter().enumerate() {
            let mut comps = BTreeMap::new();
            let mut block = EltMatrix::zero(y.objects_at(slot.j).len(), x.objects_at(slot.i).len());
            block.set(slot.r, slot.c, HomElt::basis(slot.basis, slot.i - slot.j, field));
            comps.insert((slot.i, slot.j), block);
            let single = TwMorphism::new(x.clone(), y.clone(), 0, comps);
            for (row, v) in th.encode_full(&tw_d(&single)).into_iter().enumerate() {
                if !v.is_zero() {
                    constraint.set(row, col, v);
                }
            }
        }
        let kernel = constraint.kernel_basis();
        let two_sided: Vec<usize> = kernel
            .iter()
            .enumerate()
            .filter(|(_, v)| {
                slots.iter().zip(v.iter()).any(|(s, coeff)| s.i > s.j && !coeff.is_zero())
            })
            .map(|(k, _)| k)
            .collect();

        let mut coords = vec![field.zero(); slots.len()];
        let mut used_two_sided = false;
        for (k, v) in kernel.iter().enumerate() {
            if self.rng.gen_bool(0.6) {
                axpy(&mut coords, &self.coeff(field), v);
                used_two_sided |= two_sided.contains(&k);
            }
        }
        if !one_sided_only && !used_two_sided {
            if let Some(&k) = two_sided.first() {
                axpy(&mut coords, &field.one(), &kernel[k]);
            }
        }

        let mut comps: BTreeMap<(i32, i32), EltMatrix> = BTreeMap::new();
        for (slot, coeff) in slots.iter().zip(&coords) {
            if coeff.is_zero() {
                continue;
            }
            let block = comps.entry((slot.i, slot.j)).or_insert_with(|| {
                EltMatrix::zero(y.objects_at(slot.j).len(), x.objects_at(slot.i).len())
            });
            let mut elt = block
                .get(slot.r, slot.c)
                .cloned()
                .unwrap_or_else(|| HomElt::zero(slot.i - slot.j));
            elt.coords.insert(slot.basis, coeff.clone());
            block.set(slot.r, slot.c, elt);
        }
        let f = TwMorphism::new(x.clone(), y.clone(), 0, comps);
        assert!(f.is_closed(), "kernel sampling must produce closed morphisms");
        if one_sided_only {
            assert!(f.is_one_sided());
        }
        f
    }

    /// A module presented by finite twisted data: the totalization of a
    /// random twisted complex, sometimes shifted.
    pub fn hfp_module(&mut self, cat: &Arc<DgPresentation>) -> DgModule {
        let x = self.twisted_complex(cat, 4, 2);
        let m = totalize(&x).module;
        match self.rng.gen_range(0..3) {
            0 => module_shift(&m, 1),
            1 => module_shift(&m, -1),
            _ => m,
        }
    }

    /// A candidate heart object with strict homs that mean something:
    /// an h-projective model, built from representables concentrated in
    /// degree zero and from totalizations of twisted complexes biased
    /// toward degree-zero cohomology.  Draws that land outside the heart
    /// are returned anyway; consumers classify and skip them.
    pub fn heart_module(&mut self, cat: &Arc<DgPresentation>) -> DgModule {
        let concentrated: Vec<ObjId> = (0..cat.object_count())
            .filter(|&a| cohomology_support(&yoneda(cat, a)).iter().all(|&i| i == 0))
            .collect();
        let count = self.rng.gen_range(1..=2);
        let mut parts = Vec::new();
        for _ in 0..count {
            if !concentrated.is_empty() && self.rng.gen_bool(0.5) {
                let obj = concentrated[self.rng.gen_range(0..concentrated.len())];
                parts.push(yoneda(cat, obj));
                continue;
            }
            let mut fallback = None;
            for _ in 0..8 {
                let t = totalize(&self.twisted_complex(cat, 3, 2)).module;
                if cohomology_support(&t).iter().all(|&i| i == 0) {
                    fallback = Some(t);
                    break;
                }
                if fallback.is_none() {
                    fallback = Some(t);
                }
            }
            parts.push(fallback.expect("at least one draw"));
        }
        module_direct_sum(&parts).0
    }

    /// A random finite-dimensional complex over the given field, built
    /// from contractible edges and cohomology points, then conjugated by
    /// random basis changes in every degree.
    pub fn chain_complex(&mut self, field: FieldSpec) -> Complex {
        let lo = self.rng.gen_range(-3..=-1);
        let hi = lo + self.rng.gen_range(0..=2);
        let mut dims: BTreeMap<i32, usize> = BTreeMap::new();
        let mut edges: Vec<(i32, usize, usize)> = Vec::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            if hi > lo && self.rng.gen_bool(0.6) {
                let n = self.rng.gen_range(lo..hi);
                let a = *dims.get(&n).unwrap_or(&0);
                let b = *dims.get(&(n + 1)).unwrap_or(&0);
                *dims.entry(n).or_insert(0) += 1;
                *dims.entry(n + 1).or_insert(0) += 1;
                edges.push((n, a, b));
            } else {
                let n = self.rng.gen_range(lo..=hi);
                *dims.entry(n).or_insert(0) += 1;
            }
        }
        let mut d: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (&n, &dim) in &dims {
            let up = dims.get(&(n + 1)).copied().unwrap_or(0);
            d.insert(n, Matrix::zero(field, up, dim));
        }
        for (n, a, b) in edges {
            d.get_mut(&n).unwrap().set(b, a, field.one());
        }
        let basis_change: BTreeMap<i32, Matrix> = dims
            .iter()
            .map(|(&n, &dim)| (n, self.invertible(field, dim)))
            .collect();
        let conjugated: BTreeMap<i32, Matrix> = d
            .into_iter()
            .map(|(n, m)| {
                let left = basis_change
                    .get(&(n + 1))
                    .cloned()
                    .unwrap_or_else(|| Matrix::identity(field, m.rows));
                let right = basis_change[&n]
                    .solve_matrix(&Matrix::identity(field, m.cols))
                    .expect("basis changes are invertible");
                (n, left.mul(&m).mul(&right))
            })
            .collect();
        Complex::new(field, GradedSpace::new(dims), conjugated)
            .expect("conjugation preserves the square-zero identity")
    }

    fn invertible(&mut self, field: FieldSpec, n: usize) -> Matrix {
        if n == 0 {
            return Matrix::identity(field, 0);
        }
        loop {
            let mut m = Matrix::zero(field, n, n);
            for r in 0..n {
                for c in 0..n {
                    if self.rng.gen_bool(0.6) {
                        m.set(r, c, self.coeff(field));
                    }
                }
            }
            if m.rank() == n {
                return m;
            }
        }
    }

    /// Exactly split cone-comparison data over any base category: a
    /// biproduct of two totalized twisted complexes, conjugated by a
    /// random unipotent automorphism on both sides.
    pub fn split_quadruple(
        &mut self,
        cat: &Arc<DgPresentation>,
    ) -> (DgModuleMap, DgModuleMap, DgModuleMap, DgModuleMap) {
        let a = totalize(&self.twisted_complex(cat, 3, 2)).module;
        let b = totalize(&self.twisted_complex(cat, 3, 2)).module;
        let parts = [a.clone(), b.clone()];
        let (e, layout) = module_direct_sum(&parts);
        let f0 = layout.inclusion(&e, &parts, 0);
        let rho0 = layout.projection(&e, &parts, 0);
        let sigma0 = layout.inclusion(&e, &parts, 1);
        let g0 = layout.projection(&e, &parts, 1);

        let h = self.closed_module_map(&b, &a);
        let k = self.closed_module_map(&a, &b);
        let upper = f0.compose(&h).compose(&g0);
        let lower = sigma0.compose(&k).compose(&rho0);
        let id = DgModuleMap::identity(&e);
        let phi = id.add(&upper).compose(&id.add(&lower));
        let phi_inv = id.sub(&lower).compose(&id.sub(&upper));

        let f = phi.compose(&f0);
        let g = g0.compose(&phi_inv);
        let sigma = phi.compose(&sigma0);
        let rho = rho0.compose(&phi_inv);
        (f, g, sigma, rho)
    }

    fn closed_module_map(&mut self, src: &DgModule, tgt: &DgModule) -> DgModuleMap {
        let field = src.field();
        let mh = module_hom_complex(src, tgt);
        let kernel = mh.complex.d_at(0).kernel_basis();
        match self.span_element(field, mh.complex.dim(0), &kernel, 0.5) {
            Some(v) => mh.decode(0, &v),
            None => DgModuleMap::zero(src, tgt, 0),
        }
    }
}

/// Wrap a plain complex as a module over a one-object category whose
/// single hom space is spanned by the identity.
pub fn module_from_complex(cat: &Arc<DgPresentation>, c: &Complex) -> DgModule {
    assert_eq!(cat.object_count(), 1, "only one-object categories carry plain complexes");
    assert_eq!(cat.hom(0, 0).basis.len(), 1, "endomorphisms must be spanned by the identity");
    let mut action = BTreeMap::new();
    action.insert((0usize, 0usize), vec![ChainMap::identity(c)]);
    let m = DgModule { cat: cat.clone(), values: vec![c.clone()], action };
    m.validate().expect("identity actions satisfy the module laws");
    m
}

/// The truncation ladder of a twisted complex as a stabilized sequence,
/// together with the top index where its staircase thresholds start.
/// Empty complexes carry no ladder.
pub fn truncation_sequence(x: &TwistedComplex) -> Option<(ModuleSequence, i32)> {
    let hi = x.index_max()?;
    let lo = x.index_min()?;
    let steps = (hi - lo) as usize + 1;
    let cutoffs: Vec<i32> = (0..=steps as i32).map(|p| hi - p).collect();
    let tots: Vec<_> = cutoffs.iter().map(|&c| totalize(&stupid_truncate(x, c))).collect();
    let maps: Vec<DgModuleMap> = (0..steps)
        .map(|p| {
            let step = truncation_inclusion(&stupid_truncate(x, cutoffs[p + 1]), cutoffs[p]);
            totalize_morphism(&step, &tots[p], &tots[p + 1])
        })
        .collect();
    let seq =
        ModuleSequence::new(tots.iter().map(|t| t.module.clone()).collect(), maps, steps - 1);
    seq.validate().expect("truncation ladders stabilize by construction");
    Some((seq, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgmodule::check_hlc;
    use crate::fixtures;
    use crate::holim::split_cone_compare;
    use crate::twisted::verify_cone_totalization;

    #[test]
    fn generated_twists_always_validate() {
        for field in [FieldSpec::Prime(101), FieldSpec::Rational] {
            for (name, q) in fixtures::shipped(field) {
                let cat = Arc::new(q);
                let mut s = Sampler::new(7);
                let mut nontrivial = 0;
                for _ in 0..40 {
                    let x = s.twisted_complex(&cat, 5, 2);
                    x.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
                    if !x.q.is_empty() {
                        nontrivial += 1;
                    }
                }
                assert!(nontrivial > 5, "{name}: generator keeps producing untwisted output");
            }
        }
    }

    #[test]
    fn generated_morphisms_are_closed_and_totalize_functorially() {
        let field = FieldSpec::Prime(101);
        let cat = Arc::new(fixtures::contractible_pair(field));
        let mut s = Sampler::new(11);
        let mut nonzero = 0;
        for _ in 0..25 {
            let x = s.twisted_complex(&cat, 4, 2);
            let y = s.twisted_complex(&cat, 4, 2);
            let f = s.closed_morphism(&x, &y, true);
            assert!(f.is_closed() && f.is_one_sided());
            if !f.is_zero() {
                nonzero += 1;
            }
            assert!(verify_cone_totalization(&f));
        }
        assert!(nonzero > 5, "closed-morphism generator keeps producing zero");
    }

    #[test]
    fn two_sided_draws_reach_outside_the_one_sided_range() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::contractible_pair(field));
        let mut s = Sampler::new(3);
        let mut two_sided = 0;
        for _ in 0..30 {
            let x = s.twisted_complex(&cat, 4, 2);
            let f = s.closed_morphism(&x, &x, false);
            assert!(f.is_closed());
            if !f.is_one_sided() {
                two_sided += 1;
            }
        }
        assert!(two_sided > 3, "two-sided bias never fires over the glued pair");
    }

    #[test]
    fn sampled_modules_suit_their_consumers() {
        let field = FieldSpec::Prime(101);
        for (name, q) in fixtures::shipped(field) {
            let cat = Arc::new(q);
            assert!(check_hlc(&cat).all_ok(), "{name}");
            let mut s = Sampler::new(5);
            let mut in_heart = 0usize;
            let mut hearts = Vec::new();
            for _ in 0..5 {
                let m = s.hfp_module(&cat);
                m.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
                let h = s.heart_module(&cat);
                h.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
                if cohomology_support(&h).iter().all(|&i| i == 0) {
                    in_heart += 1;
                }
                hearts.push(h);
            }
            let report = crate::tstructure::heart_compare(&cat, &hearts);
            assert!(
                report.all_ok(),
                "{name}: heart comparison found mismatches {:?} fp failures {:?}",
                report.mismatches,
                report.fp_failures
            );
            if name != "F2" {
                assert!(in_heart > 0, "{name}: no draw landed in the heart");
            }
        }
    }

    #[test]
    fn random_complexes_and_split_data_hold_together() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::point(field));
        let mut s = Sampler::new(23);
        for _ in 0..10 {
            let c = s.chain_complex(field);
            c.validate().expect("square-zero");
            let (f, g, sigma, rho) = s.split_quadruple(&cat);
            let cmp = split_cone_compare(&f, &g, &sigma, &rho)
                .unwrap_or_else(|e| panic!("split data rejected: {e}"));
            assert!(cmp.phi_psi_defect.is_zero());
        }
    }

    #[test]
    fn truncation_ladders_stabilize() {
        let field = FieldSpec::Prime(101);
        let cat = Arc::new(fixtures::exterior(field));
        let mut s = Sampler::new(41);
        for _ in 0..5 {
            let x = s.twisted_complex(&cat, 4, 2);
            let Some((seq, _)) = truncation_sequence(&x) else { continue };
            assert_eq!(seq.terms.len(), (x.index_max().unwrap() - x.index_min().unwrap()) as usize + 2);
        }
    }

    #[test]
    fn fixed_seeds_reproduce_draws() {
        let field = FieldSpec::Prime(101);
        let cat = Arc::new(fixtures::contractible_pair(field));
        let mut a = Sampler::new(99);
        let mut b = Sampler::new(99);
        for _ in 0..10 {
            assert_eq!(a.twisted_complex(&cat, 5, 2), b.twisted_complex(&cat, 5, 2));
        }
    }
}
