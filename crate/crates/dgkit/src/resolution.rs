//! Inductive resolution of a module by twisted complexes of shifted
//! representables, and the round-trip checks built on it.
//!
//! The algorithm peels cohomology off the top.  The base step covers the
//! highest cohomology of the target with a sum of representables placed
//! at that index.  Each later step measures the defect of the current
//! comparison map as a shifted cone, covers the defect's top cohomology
//! with fresh representables one index lower, transports that cover to a
//! one-sided morphism of twisted complexes, and extends the twisted
//! complex by its cone.  The comparison map extends along a homotopy
//! obtained from the canonical solver, and each extension strictly
//! restricts to its predecessor.
//!
//! Every step records rank-verified verdicts: the comparison map induces
//! isomorphisms on cohomology above the step level and a surjection at
//! the level itself.  Running the ladder down through a window therefore
//! produces a twisted complex whose totalization maps to the target by a
//! quasi-isomorphism throughout the window, which is the reconstruction
//! statement checked by `reconstruct`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::category::{DgPresentation, ObjId};
use crate::complex::{ChainMap, CohomologySpace};
use crate::dgmodule::{
    check_hlc, cohomology_support, cover_map_from_element, fp_generators, fp_presentation,
    module_cohomology, module_cone, module_direct_sum, module_hom_complex, module_shift, yoneda,
    DgModule, DgModuleMap,
};
use crate::field::{axpy, FieldSpec, Matrix, Scalar};
use crate::tstructure::{aisle_check, AisleSide};
use crate::twisted::{
    stupid_truncate, totalize, totalize_morphism, tw_cone, tw_shift, Totalization,
    TwMorphism, TwistedComplex,
};

/// Recorded in every report: finite stabilized sequences are the working
/// substitute for colimits over all of time.
pub const FINITE_COLIMIT_NOTE: &str =
    "finite stabilized sequences stand in for countable coproducts";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolveError {
    HypothesisFailure(String),
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::HypothesisFailure(msg) => write!(f, "hypothesis failure: {msg}"),
        }
    }
}

impl std::error::Error for ResolveError {}

/// Rank-verified status of an induced map on one cohomology degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohVerdict {
    Iso,
    Epi,
    Defect,
}

fn coh_verdict(f: &DgModuleMap, i: i32) -> CohVerdict {
    let mats = f.induced_on_cohomology(i);
    if mats.iter().all(|m| m.rows == m.cols && m.rank() == m.rows) {
        CohVerdict::Iso
    } else if mats.iter().all(|m| m.rank() == m.rows) {
        CohVerdict::Epi
    } else {
        CohVerdict::Defect
    }
}

/// A cover of the degree-`n` cohomology of a module by representables
/// placed at index `n`.
#[derive(Clone, Debug)]
pub struct CoverStep {
    pub objects: Vec<ObjId>,
    /// The covering objects as a single-index twisted complex.
    pub complex: TwistedComplex,
    /// Closed degree-0 map from the cover's totalization, surjective on
    /// degree-`n` cohomology.
    pub map: DgModuleMap,
    /// Rank verification of that surjectivity.
    pub h_epi: bool,
}

fn class_representative(space: &CohomologySpace, coords: &[Scalar], field: FieldSpec) -> Vec<Scalar> {
    let mut v = vec![field.zero(); space.ambient_dim];
    for (k, c) in coords.iter().enumerate() {
        if !c.is_zero() {
            axpy(&mut v, c, &space.reps[k]);
        }
    }
    v
}

/// Cover the degree-`n` cohomology of `m` with one shifted representable
/// per generator of its finitely presented degree-zero module structure.
/// Vanishing cohomology yields an empty, still valid, cover.
pub fn projective_cover_step(m: &DgModule, n: i32) -> CoverStep {
    let cat = m.cat.clone();
    let field = cat.field;
    let h0 = cat.h0_category();
    let coh = module_cohomology(m, &h0, n);
    let gens = fp_generators(&h0, &coh.module);
    let objects: Vec<ObjId> = gens.iter().map(|(b, _)| *b).collect();

    let mut entries = BTreeMap::new();
    entries.insert(n, objects.clone());
    let complex = TwistedComplex::new(cat.clone(), entries, BTreeMap::new());
    let tot = totalize(&complex);

    let map = if gens.is_empty() {
        DgModuleMap::zero(&tot.module, m, 0)
    } else {
        let parts: Vec<DgModule> =
            objects.iter().map(|&b| module_shift(&yoneda(&cat, b), -n)).collect();
        let (sum, layout) = module_direct_sum(&parts);
        assert_eq!(
            sum, tot.module,
            "a single-index totalization is the sum of its shifted representables"
        );
        let mut p = DgModuleMap::zero(&tot.module, m, 0);
        for (g, (b, coords)) in gens.iter().enumerate() {
            let rep = class_representative(&coh.spaces[*b], coords, field);
            let part = cover_map_from_element(m, *b, n, &rep);
            p = p.add(&part.compose(&layout.projection(&sum, &parts, g)));
        }
        p
    };
    assert!(map.is_closed() && map.is_natural());
    let h_epi = map.induced_on_cohomology(n).iter().all(|mat| mat.rank() == mat.rows);
    CoverStep { objects, complex, map, h_epi }
}

/// The defect of a comparison map: its cone, shifted down one degree so
/// that the first block carries the source totalization on the nose.
fn shifted_defect(alpha: &DgModuleMap) -> DgModule {
    module_shift(&module_cone(alpha).module, -1)
}

/// Project the shifted defect onto its first block.  The block layout
/// and the block-diagonal action make this closed and natural.
fn first_block_projection(defect: &DgModule, tot: &DgModule) -> DgModuleMap {
    let field = defect.field();
    let comps: Vec<ChainMap> = (0..defect.values.len())
        .map(|b| {
            let sv = &defect.values[b];
            let tv = &tot.values[b];
            let mut mats = BTreeMap::new();
            for t in sv.space.support() {
                let mut m = Matrix::zero(field, tv.dim(t), sv.dim(t));
                m.paste(0, 0, &Matrix::identity(field, tv.dim(t)));
                mats.insert(t, m);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, mats)
        })
        .collect();
    let pi = DgModuleMap {
        source: defect.clone(),
        target: tot.clone(),
        degree: 0,
        components: comps,
    };
    assert!(pi.is_closed() && pi.is_natural());
    pi
}

/// Read a one-sided morphism of twisted complexes off a module map from
/// a single-index cover totalization: evaluate at each cover identity
/// and decode the block slices as hom elements.
fn extract_one_sided(
    beta: &DgModuleMap,
    cover: &TwistedComplex,
    cover_tot: &Totalization,
    x: &TwistedComplex,
    x_tot: &Totalization,
    n: i32,
) -> TwMorphism {
    let cat = &cover.cat;
    let field = cat.field;
    let cover_objs = cover.objects_at(n).to_vec();
    let mut comps: BTreeMap<(i32, i32), crate::twisted::EltMatrix> = BTreeMap::new();
    for (g, &bg) in cover_objs.iter().enumerate() {
        let (_, idx) = cat.hom_complex_of(bg, bg);
        let id_coords = idx.encode(&cat.identity_elt(bg), field);
        let mut v = vec![field.zero(); cover_tot.module.values[bg].dim(n)];
        let off = cover_tot.offset(bg, n, n, g);
        for (k, c) in id_coords.iter().enumerate() {
            v[off + k] = c.clone();
        }
        let image = beta.components[bg].component(n).apply(&v);
        for &(j, e, obj) in x_tot.blocks() {
            let len = x_tot.block_dim(bg, n, j, e);
            if len == 0 {
                continue;
            }
            let boff = x_tot.offset(bg, n, j, e);
            let slice = &image[boff..boff + len];
            if slice.iter().all(Scalar::is_zero) {
                continue;
            }
            let (_, target_idx) = cat.hom_complex_of(bg, obj);
            let elt = target_idx.decode(n - j, slice);
            let block = comps.entry((n, j)).or_insert_with(|| {
                crate::twisted::EltMatrix::zero(x.objects_at(j).len(), cover_objs.len())
            });
            block.set(e, g, elt);
        }
    }
    let b = TwMorphism::new(cover.clone(), x.clone(), 0, comps);
    b.validate().expect("extracted morphism must be well formed");
    assert!(b.is_one_sided() && b.is_closed());
    b
}

/// One level of a resolution trace.
#[derive(Clone, Debug)]
pub struct ResolutionStep {
    pub level: i32,
    /// Representables adjoined at this level (empty when the defect had
    /// no cohomology here).
    pub cover: Vec<ObjId>,
    pub x: TwistedComplex,
    /// Comparison map from the totalization of `x` to the target.
    pub alpha: DgModuleMap,
    /// The one-sided morphism whose cone produced `x`; absent at the base.
    pub connecting: Option<TwMorphism>,
    /// The extension homotopy over the adjoined block; absent at the base.
    pub homotopy: Option<DgModuleMap>,
    /// (degree, status of the comparison map) across the window.
    pub verdicts: Vec<(i32, CohVerdict)>,
}

#[derive(Clone, Debug)]
pub struct ResolutionTrace {
    pub target: DgModule,
    /// Highest degree with cohomology; levels run from here downward.
    pub hi: i32,
    pub lo: i32,
    pub steps: Vec<ResolutionStep>,
    /// Level at which the defect became acyclic, if it did.
    pub terminated_at: Option<i32>,
    pub notes: Vec<String>,
}

impl ResolutionTrace {
    pub fn last_step(&self) -> &ResolutionStep {
        self.steps.last().expect("a trace holds at least the base step")
    }
}

fn window_verdicts(alpha: &DgModuleMap, lo: i32, hi: i32) -> Vec<(i32, CohVerdict)> {
    (lo..=hi).map(|i| (i, coh_verdict(alpha, i))).collect()
}

/// Resolve `m` through `window` levels below its top cohomology degree.
pub fn resolve(m: &DgModule, window: usize) -> Result<ResolutionTrace, ResolveError> {
    let cat = m.cat.clone();
    if !check_hlc(&cat).all_ok() {
        return Err(ResolveError::HypothesisFailure(
            "base category fails local coherence: representables must be \
             degreewise finite with weak kernels in degree zero"
                .to_string(),
        ));
    }
    let support = cohomology_support(m);
    let hi = support.iter().copied().max().unwrap_or(0);
    let lo = hi - window as i32;
    let h0 = cat.h0_category();
    for i in lo..=hi {
        if !fp_presentation(&h0, &module_cohomology(m, &h0, i).module).ok() {
            return Err(ResolveError::HypothesisFailure(format!(
                "degree {i} cohomology admits no finite presentation"
            )));
        }
    }

    let base = projective_cover_step(m, hi);
    assert!(base.h_epi, "a finitely presented top cohomology admits an onto cover");
    let mut x = base.complex.clone();
    let mut tot = totalize(&x);
    let mut alpha = base.map.clone();
    let mut steps = vec![ResolutionStep {
        level: hi,
        cover: base.objects,
        x: x.clone(),
        alpha: alpha.clone(),
        connecting: None,
        homotopy: None,
        verdicts: window_verdicts(&alpha, lo, hi),
    }];
    let mut terminated_at = None;

    for n in ((lo + 1)..=hi).rev() {
        let defect = shifted_defect(&alpha);
        if cohomology_support(&defect).is_empty() {
            terminated_at = Some(n);
            break;
        }
        let cover = projective_cover_step(&defect, n);
        assert!(cover.h_epi, "the defect's cohomology was checked to be presentable");
        let cover_tot = totalize(&cover.complex);
        let pi = first_block_projection(&defect, &tot.module);
        let beta = pi.compose(&cover.map);
        let b = extract_one_sided(&beta, &cover.complex, &cover_tot, &x, &tot, n);
        assert_eq!(
            totalize_morphism(&b, &cover_tot, &tot),
            beta,
            "the extracted morphism must totalize back to the cover composite"
        );

        let cone = tw_cone(&b);
        let x_next = cone.complex.clone();
        assert_eq!(stupid_truncate(&x_next, n), x, "cones extend the complex verbatim");
        let tot_next = totalize(&x_next);
        let j_mod = totalize_morphism(&cone.j, &tot, &tot_next);

        // The homotopy extending the comparison map over the adjoined
        // block is read off the cover map itself: its rows below the
        // first block land in the target one degree down, and collapsing
        // the defect cone onto the target turns exactly those rows into
        // the new columns.  An arbitrary solution of the defining
        // equation below would not do: it can differ from this one by a
        // closed map that wrecks surjectivity one level down.
        let shifted_cover = tw_shift(&cover.complex, 1);
        let sc_tot = totalize(&shifted_cover);
        let sigma = block_degree_shift(&sc_tot.module, &cover_tot.module);
        let rhs = alpha.compose(&beta).compose(&sigma);
        let c = collapse_homotopy(&cover.map, &sc_tot.module, &tot.module, m);
        assert_eq!(c.d(), rhs, "homotopy must satisfy its defining equation");

        let alpha_next =
            assemble_extension(&tot_next, &tot, &sc_tot, &alpha, &c, m, n);
        assert!(alpha_next.is_closed() && alpha_next.is_natural());
        assert_eq!(
            alpha_next.compose(&j_mod),
            alpha,
            "the extended comparison map restricts strictly"
        );

        steps.push(ResolutionStep {
            level: n - 1,
            cover: cover.objects,
            x: x_next.clone(),
            alpha: alpha_next.clone(),
            connecting: Some(b),
            homotopy: Some(c),
            verdicts: window_verdicts(&alpha_next, lo, hi),
        });
        x = x_next;
        tot = tot_next;
        alpha = alpha_next;
    }

    Ok(ResolutionTrace {
        target: m.clone(),
        hi,
        lo,
        steps,
        terminated_at,
        notes: vec![FINITE_COLIMIT_NOTE.to_string()],
    })
}

/// The extension homotopy carried by a defect cover.  A map into the
/// shifted defect cone splits into a block hitting the old totalization
/// and a block hitting the target one degree down; negating the latter
/// and reindexing along the cover shift yields the degree-0 map whose
/// columns extend the comparison map.
fn collapse_homotopy(
    p: &DgModuleMap,
    sc: &DgModule,
    tot: &DgModule,
    m: &DgModule,
) -> DgModuleMap {
    let field = m.field();
    let comps: Vec<ChainMap> = (0..m.values.len())
        .map(|b| {
            let sv = &sc.values[b];
            let tv = &m.values[b];
            let mut mats = BTreeMap::new();
            for t in sv.space.support() {
                let cut = tot.values[b].dim(t + 1);
                let rows = tv.dim(t);
                let mut mat = Matrix::zero(field, rows, sv.dim(t));
                for (&(r, col), v) in p.components[b].component(t + 1).iter() {
                    if r >= cut {
                        mat.set(r - cut, col, v.neg());
                    }
                }
                mats.insert(t, mat);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, mats)
        })
        .collect();
    DgModuleMap { source: sc.clone(), target: m.clone(), degree: 0, components: comps }
}

/// Identity matrices one degree up: from the totalization of a shifted
/// single-index cover back to the unshifted one, as a closed degree-1 map.
fn block_degree_shift(shifted: &DgModule, plain: &DgModule) -> DgModuleMap {
    let field = shifted.field();
    let comps: Vec<ChainMap> = (0..shifted.values.len())
        .map(|b| {
            let sv = &shifted.values[b];
            let tv = &plain.values[b];
            let mut mats = BTreeMap::new();
            for t in sv.space.support() {
                assert_eq!(sv.dim(t), tv.dim(t + 1));
                mats.insert(t, Matrix::identity(field, sv.dim(t)));
            }
            ChainMap::new(sv.clone(), tv.clone(), 1, mats)
        })
        .collect();
    let sigma = DgModuleMap {
        source: shifted.clone(),
        target: plain.clone(),
        degree: 1,
        components: comps,
    };
    assert!(sigma.is_closed() && sigma.is_natural());
    sigma
}

fn paste_columns(dst: &mut Matrix, dst_off: usize, src: &Matrix, src_off: usize, count: usize) {
    for c in 0..count {
        for (r, v) in src.col(src_off + c).into_iter().enumerate() {
            if !v.is_zero() {
                dst.set(r, dst_off + c, v);
            }
        }
    }
}

/// The extended comparison map, assembled blockwise: columns over the old
/// blocks copy the previous map, columns over the adjoined blocks copy
/// the solved homotopy.
fn assemble_extension(
    tot_next: &Totalization,
    tot: &Totalization,
    sc_tot: &Totalization,
    alpha: &DgModuleMap,
    c: &DgModuleMap,
    m: &DgModule,
    n: i32,
) -> DgModuleMap {
    let field = m.field();
    let comps: Vec<ChainMap> = (0..m.values.len())
        .map(|b| {
            let sv = &tot_next.module.values[b];
            let tv = &m.values[b];
            let mut mats = BTreeMap::new();
            for t in sv.space.support() {
                let mut mat = Matrix::zero(field, tv.dim(t), sv.dim(t));
                for &(i, e, _) in tot_next.blocks() {
                    let len = tot_next.block_dim(b, t, i, e);
                    if len == 0 {
                        continue;
                    }
                    let dst_off = tot_next.offset(b, t, i, e);
                    if i >= n {
                        paste_columns(
                            &mut mat,
                            dst_off,
                            &alpha.components[b].component(t),
                            tot.offset(b, t, i, e),
                            len,
                        );
                    } else {
                        paste_columns(
                            &mut mat,
                            dst_off,
                            &c.components[b].component(t),
                            sc_tot.offset(b, t, i, e),
                            len,
                        );
                    }
                }
                mats.insert(t, mat);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, mats)
        })
        .collect();
    DgModuleMap {
        source: tot_next.module.clone(),
        target: m.clone(),
        degree: 0,
        components: comps,
    }
}

/// A resolution together with its quasi-isomorphism certificate.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub x: TwistedComplex,
    pub alpha: DgModuleMap,
    pub trace: ResolutionTrace,
    /// Degrees where the certificate is claimed: one above the bottom
    /// level through the top.
    pub window: (i32, i32),
    /// Total cone cohomology dimensions per degree in the window.
    pub cone_cohomology: Vec<(i32, usize)>,
    pub qis_ok: bool,
}

/// Resolve and certify: the comparison map out of the assembled twisted
/// complex has acyclic cone throughout the reliable window.
pub fn reconstruct(m: &DgModule, window: usize) -> Result<Reconstruction, ResolveError> {
    let trace = resolve(m, window)?;
    let last = trace.last_step();
    let x = last.x.clone();
    let alpha = last.alpha.clone();
    let cone = module_cone(&alpha);
    let w = (trace.lo + 1, trace.hi);
    let cone_cohomology: Vec<(i32, usize)> = (w.0..=w.1)
        .map(|i| (i, cone.module.values.iter().map(|v| v.cohomology(i).dim()).sum()))
        .collect();
    let qis_ok = cone_cohomology.iter().all(|(_, d)| *d == 0);
    Ok(Reconstruction { x, alpha, trace, window: w, cone_cohomology, qis_ok })
}

/// Per-pair comparison of hom cohomology computed twice: once on twisted
/// complexes, once on their totalizations.
#[derive(Clone, Debug)]
pub struct QuasiFfReport {
    pub checked: usize,
    /// (pair index, degree, twisted dim, module dim).
    pub mismatches: Vec<(usize, i32, usize, usize)>,
}

impl QuasiFfReport {
    pub fn all_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn verify_quasi_ff(
    pairs: &[(TwistedComplex, TwistedComplex)],
    window: (i32, i32),
) -> QuasiFfReport {
    let mut mismatches = Vec::new();
    for (idx, (x, y)) in pairs.iter().enumerate() {
        let th = crate::twisted::tw_hom_complex(x, y);
        let mh = module_hom_complex(&totalize(x).module, &totalize(y).module);
        for p in window.0..=window.1 {
            let a = th.complex.cohomology(p).dim();
            let b = mh.complex.cohomology(p).dim();
            if a != b {
                mismatches.push((idx, p, a, b));
            }
        }
    }
    QuasiFfReport { checked: pairs.len(), mismatches }
}

/// Sampled verification that resolving and totalizing changes nothing
/// observable: aisle verdicts transfer, hom spaces in degree zero match,
/// and every sample is hit by a certified quasi-isomorphism.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// (sample, level) where aisle verdicts disagreed.
    pub texact_failures: Vec<(usize, i32)>,
    /// (source sample, target sample, original dim, resolved dim).
    pub hom_mismatches: Vec<(usize, usize, usize, usize)>,
    /// Samples without a certified quasi-isomorphism.
    pub image_failures: Vec<usize>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn all_ok(&self) -> bool {
        self.texact_failures.is_empty()
            && self.hom_mismatches.is_empty()
            && self.image_failures.is_empty()
    }
}

pub fn verify_comparison(
    q: &Arc<DgPresentation>,
    samples: &[DgModule],
    window: usize,
) -> ComparisonReport {
    let _ = q;
    let mut texact_failures = Vec::new();
    let mut hom_mismatches = Vec::new();
    let mut image_failures = Vec::new();
    let mut notes = vec![FINITE_COLIMIT_NOTE.to_string()];

    let mut resolved: Vec<Option<Reconstruction>> = Vec::with_capacity(samples.len());
    for (idx, m) in samples.iter().enumerate() {
        match reconstruct(m, window) {
            Ok(rec) => {
                if !rec.qis_ok {
                    image_failures.push(idx);
                }
                resolved.push(Some(rec));
            }
            Err(e) => {
                notes.push(format!("sample {idx}: {e}"));
                image_failures.push(idx);
                resolved.push(None);
            }
        }
    }

    for (idx, m) in samples.iter().enumerate() {
        let Some(rec) = &resolved[idx] else { continue };
        let tot = totalize(&rec.x).module;
        let bounds = |md: &DgModule| {
            let lo = md.values.iter().filter_map(|v| v.space.min_degree()).min().unwrap_or(0);
            let hi = md.values.iter().filter_map(|v| v.space.max_degree()).max().unwrap_or(0);
            (lo, hi)
        };
        let (alo, ahi) = bounds(m);
        let (blo, bhi) = bounds(&tot);
        let wide = (alo.min(blo) - 1, ahi.max(bhi) + 1);
        for level in (rec.window.0)..=(rec.window.1) {
            for side in [AisleSide::Leq, AisleSide::Geq] {
                let orig = aisle_check(m, level, side, wide).holds();
                let image = aisle_check(&tot, level, side, wide).holds();
                if orig != image {
                    texact_failures.push((idx, level));
                }
            }
        }
    }

    for i in 0..samples.len() {
        for j in 0..samples.len() {
            let (Some(ri), Some(rj)) = (&resolved[i], &resolved[j]) else { continue };
            let orig = module_hom_complex(&samples[i], &samples[j]).complex.cohomology(0).dim();
            let via = module_hom_complex(&totalize(&ri.x).module, &totalize(&rj.x).module)
                .complex
                .cohomology(0)
                .dim();
            if orig != via {
                hom_mismatches.push((i, j, orig, via));
            }
        }
    }

    ComparisonReport { texact_failures, hom_mismatches, image_failures, notes }
}

fn render_matrix(m: &Matrix) -> String {
    let mut rows = Vec::with_capacity(m.rows);
    for r in 0..m.rows {
        let row: Vec<String> = m.row(r).iter().map(Scalar::render).collect();
        rows.push(row.join(","));
    }
    format!("[{}]", rows.join(";"))
}

fn render_elt(cat: &DgPresentation, a: ObjId, b: ObjId, elt: &crate::category::HomElt) -> String {
    let space = cat.hom(a, b);
    let terms: Vec<String> = elt
        .coords
        .iter()
        .map(|(k, c)| format!("{}*{}", c.render(), space.basis[*k].name))
        .collect();
    if terms.is_empty() { "0".to_string() } else { terms.join("+") }
}

/// Deterministic text form of a trace, for golden-file comparison.
pub fn render_trace(trace: &ResolutionTrace) -> String {
    let cat = &trace.target.cat;
    let mut out = String::new();
    out.push_str("trace v1\n");
    out.push_str(&format!("levels {}..{}\n", trace.hi, trace.lo));
    match trace.terminated_at {
        Some(n) => out.push_str(&format!("terminated at {n}\n")),
        None => out.push_str("ran full window\n"),
    }
    for note in &trace.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    let support = cohomology_support(&trace.target);
    let dims: Vec<String> = support
        .iter()
        .map(|&i| {
            let d: usize = trace.target.values.iter().map(|v| v.cohomology(i).dim()).sum();
            format!("{i}:{d}")
        })
        .collect();
    out.push_str(&format!("target cohomology {}\n", dims.join(" ")));
    for step in &trace.steps {
        out.push_str(&format!("step level={}\n", step.level));
        let names: Vec<&str> =
            step.cover.iter().map(|&b| cat.objects[b].as_str()).collect();
        out.push_str(&format!("  cover [{}]\n", names.join(",")));
        for (&i, objs) in &step.x.entries {
            let names: Vec<&str> = objs.iter().map(|&b| cat.objects[b].as_str()).collect();
            out.push_str(&format!("  entry {i} [{}]\n", names.join(",")));
        }
        for (&(i, j), block) in &step.x.q {
            for ((r, c), elt) in &block.cells {
                let src = step.x.objects_at(i)[*c];
                let tgt = step.x.objects_at(j)[*r];
                out.push_str(&format!(
                    "  q ({i},{j})[{r},{c}] = {}\n",
                    render_elt(cat, src, tgt, elt)
                ));
            }
        }
        for (b, comp) in step.alpha.components.iter().enumerate() {
            for t in comp.source.space.support() {
                let mat = comp.component(t);
                if !mat.is_zero() {
                    out.push_str(&format!(
                        "  alpha[{}] deg {t} {}\n",
                        cat.objects[b],
                        render_matrix(&mat)
                    ));
                }
            }
        }
        if let Some(c) = &step.homotopy {
            for (b, comp) in c.components.iter().enumerate() {
                for t in comp.source.space.support() {
                    let mat = comp.component(t);
                    if !mat.is_zero() {
                        out.push_str(&format!(
                            "  homotopy[{}] deg {t} {}\n",
                            cat.objects[b],
                            render_matrix(&mat)
                        ));
                    }
                }
            }
        }
        let verdicts: Vec<String> = step
            .verdicts
            .iter()
            .map(|(i, v)| {
                let s = match v {
                    CohVerdict::Iso => "iso",
                    CohVerdict::Epi => "epi",
                    CohVerdict::Defect => "defect",
                };
                format!("{i}:{s}")
            })
            .collect();
        out.push_str(&format!("  verdicts {}\n", verdicts.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgmodule::simple_module;
    use crate::field::FieldSpec;
    use crate::fixtures;
    use crate::twisted::EltMatrix;
    use crate::category::HomElt;

    #[test]
    fn single_index_totalizations_are_shifted_representables() {
        let field = FieldSpec::Rational;
        for q in [fixtures::exterior(field), fixtures::contractible_pair(field)] {
            let cat = Arc::new(q);
            for n in [-2, 0, 1] {
                let mut entries = BTreeMap::new();
                entries.insert(n, vec![0usize]);
                let tw = TwistedComplex::new(cat.clone(), entries, BTreeMap::new());
                let tot = totalize(&tw);
                assert_eq!(tot.module, module_shift(&yoneda(&cat, 0), -n), "index {n}");
            }
        }
    }

    #[test]
    fn representables_resolve_themselves() {
        let field = FieldSpec::Rational;
        for (name, q) in fixtures::shipped(field) {
            let cat = Arc::new(q);
            let y = yoneda(&cat, 0);
            let trace = resolve(&y, 3).unwrap();
            assert_eq!(trace.terminated_at, Some(trace.hi), "{name}");
            assert_eq!(trace.steps.len(), 1, "{name}");
            assert!(
                trace.steps[0].verdicts.iter().all(|(_, v)| *v == CohVerdict::Iso),
                "{name}"
            );
        }
    }

    #[test]
    fn the_simple_module_resolves_periodically() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let s = simple_module(&cat, 0);
        let trace = resolve(&s, 6).unwrap();
        assert_eq!(trace.hi, 0);
        assert!(trace.terminated_at.is_none());
        let last = trace.last_step();
        let indices: Vec<i32> = last.x.indices().collect();
        assert_eq!(indices, vec![-6, -4, -2, 0]);
        // Connecting cells sit on consecutive even indices and are
        // scalar multiples of the square-zero generator.
        for (&(i, j), block) in &last.x.q {
            assert_eq!(j, i + 2);
            assert_eq!(block.cells.len(), 1);
            let elt = &block.cells[&(0, 0)];
            assert_eq!(elt.degree, -1);
            assert_eq!(elt.coords.len(), 1);
            assert!(elt.coords.contains_key(&1));
        }
        for step in &trace.steps {
            for (i, v) in &step.verdicts {
                if *i > step.level {
                    assert_eq!(*v, CohVerdict::Iso, "level {} degree {i}", step.level);
                } else if *i == step.level {
                    assert_ne!(*v, CohVerdict::Defect, "level {} degree {i}", step.level);
                }
            }
        }
        let rec = reconstruct(&s, 6).unwrap();
        assert!(rec.qis_ok, "cone dims: {:?}", rec.cone_cohomology);
    }

    #[test]
    fn gapped_cohomology_passes_through_empty_steps() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let s = simple_module(&cat, 0);
        let m = module_direct_sum(&[s.clone(), module_shift(&s, 2)]).0;
        let trace = resolve(&m, 4).unwrap();
        // Level 0 needs no new generators; level -1 needs two.
        let by_level: BTreeMap<i32, usize> =
            trace.steps.iter().map(|st| (st.level, st.cover.len())).collect();
        assert_eq!(by_level[&-1], 0);
        assert_eq!(by_level[&-2], 2);
        let rec = reconstruct(&m, 4).unwrap();
        assert!(rec.qis_ok, "cone dims: {:?}", rec.cone_cohomology);
    }

    #[test]
    fn cover_of_absent_cohomology_is_empty() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let s = simple_module(&cat, 0);
        let cover = projective_cover_step(&s, -3);
        assert!(cover.objects.is_empty());
        assert!(cover.complex.is_empty());
        assert!(cover.map.is_zero());
        assert!(cover.h_epi);
    }

    #[test]
    fn hypothesis_failures_are_loud_but_clean() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::positive_class(field));
        let y = yoneda(&cat, 0);
        let err = resolve(&y, 2).unwrap_err();
        assert!(matches!(err, ResolveError::HypothesisFailure(_)));
    }

    #[test]
    fn hom_cohomology_matches_across_totalization() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::contractible_pair(field));
        let single = {
            let mut entries = BTreeMap::new();
            entries.insert(0, vec![0usize]);
            TwistedComplex::new(cat.clone(), entries, BTreeMap::new())
        };
        let contractible = {
            let mut entries = BTreeMap::new();
            entries.insert(-1, vec![0usize]);
            entries.insert(0, vec![0usize]);
            let mut q = BTreeMap::new();
            let mut m = EltMatrix::zero(1, 1);
            m.set(0, 0, HomElt::basis(0, 0, field));
            q.insert((-1, 0), m);
            TwistedComplex::new(cat.clone(), entries, q)
        };
        let pairs = vec![
            (single.clone(), single.clone()),
            (contractible.clone(), single.clone()),
            (single, contractible),
        ];
        let report = verify_quasi_ff(&pairs, (-2, 2));
        assert!(report.all_ok(), "mismatches: {:?}", report.mismatches);
    }

    #[test]
    fn comparison_passes_on_small_samples() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::point(field));
        let y = yoneda(&cat, 0);
        let samples = vec![y.clone(), module_shift(&y, 1), simple_module(&cat, 0)];
        let report = verify_comparison(&cat, &samples, 3);
        assert!(report.all_ok(), "{:?} {:?} {:?}",
            report.texact_failures, report.hom_mismatches, report.image_failures);
    }

    #[test]
    fn traces_render_deterministically() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let s = simple_module(&cat, 0);
        let a = render_trace(&resolve(&s, 4).unwrap());
        let b = render_trace(&resolve(&s, 4).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("step level=-4"));
        assert!(a.contains("cover [*]"));
    }
}
