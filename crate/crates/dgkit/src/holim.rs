//! Homotopy colimits of finite stabilized sequences of modules.
//!
//! A sequence is a finite chain of closed degree-0 module maps whose tail
//! consists of literal identity maps.  Its homotopy colimit is the cone of
//! the map `1 - mu` from the sum of all terms but the last into the sum of
//! all terms, where `1` includes each part as itself and `mu` pushes it one
//! step along the sequence.  The finite rectangle plays the role of the
//! countable telescope: once the maps are identities, pushing further adds
//! nothing, and the cone collapses onto the last term up to homotopy.
//!
//! The comparison machinery lives here as well: a degreewise split exact
//! sequence identifies the cone of its first map with its cokernel up to an
//! explicit homotopy (`split_cone_compare`), and the truncation sequence of
//! a twisted complex is matched against the totalization of the whole
//! complex through that identification (`verify_truncation_colimit`).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::category::DgPresentation;
use crate::complex::{ChainMap, Complex};
use crate::dgmodule::{module_cone, module_direct_sum, DgModule, DgModuleMap, ModuleCone};
use crate::field::Matrix;
use crate::twisted::{
    stupid_truncate, totalize, totalize_morphism, truncation_inclusion, TwistedComplex,
};

/// A finite sequence of closed degree-0 module maps with an identity tail.
#[derive(Clone, Debug)]
pub struct ModuleSequence {
    pub terms: Vec<DgModule>,
    /// maps[n]: terms[n] -> terms[n+1].
    pub maps: Vec<DgModuleMap>,
    /// Index from which every map is the identity, verified by `validate`.
    pub stabilized_from: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqError {
    Empty,
    LengthMismatch { terms: usize, maps: usize },
    Ends { position: usize },
    Degree { position: usize },
    NotClosed { position: usize },
    NotNatural { position: usize },
    NotStabilized { position: usize },
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::Empty => write!(f, "sequence has no terms"),
            SeqError::LengthMismatch { terms, maps } => {
                write!(f, "{terms} terms need {} maps, found {maps}", terms - 1)
            }
            SeqError::Ends { position } => {
                write!(f, "map {position} does not join terms {position} and {}", position + 1)
            }
            SeqError::Degree { position } => write!(f, "map {position} is not of degree 0"),
            SeqError::NotClosed { position } => write!(f, "map {position} is not closed"),
            SeqError::NotNatural { position } => write!(f, "map {position} is not a module map"),
            SeqError::NotStabilized { position } => {
                write!(f, "map {position} lies past the stabilization index but is not the identity")
            }
        }
    }
}

impl std::error::Error for SeqError {}

impl ModuleSequence {
    pub fn new(terms: Vec<DgModule>, maps: Vec<DgModuleMap>, stabilized_from: usize) -> ModuleSequence {
        ModuleSequence { terms, maps, stabilized_from }
    }

    /// The same module repeated with identity maps.
    pub fn constant(m: &DgModule, len: usize) -> ModuleSequence {
        assert!(len > 0, "a sequence needs at least one term");
        let terms = vec![m.clone(); len];
        let maps = (0..len - 1).map(|_| DgModuleMap::identity(m)).collect();
        ModuleSequence { terms, maps, stabilized_from: 0 }
    }

    pub fn last(&self) -> &DgModule {
        self.terms.last().expect("validated sequences are nonempty")
    }

    pub fn validate(&self) -> Result<(), SeqError> {
        if self.terms.is_empty() {
            return Err(SeqError::Empty);
        }
        if self.maps.len() + 1 != self.terms.len() {
            return Err(SeqError::LengthMismatch {
                terms: self.terms.len(),
                maps: self.maps.len(),
            });
        }
        for (n, f) in self.maps.iter().enumerate() {
            if f.source != self.terms[n] || f.target != self.terms[n + 1] {
                return Err(SeqError::Ends { position: n });
            }
            if f.degree != 0 {
                return Err(SeqError::Degree { position: n });
            }
            if !f.is_closed() {
                return Err(SeqError::NotClosed { position: n });
            }
            if !f.is_natural() {
                return Err(SeqError::NotNatural { position: n });
            }
            if n >= self.stabilized_from && *f != DgModuleMap::identity(&self.terms[n]) {
                return Err(SeqError::NotStabilized { position: n });
            }
        }
        Ok(())
    }
}

/// The module whose value is the zero complex at every object.
fn zero_module(cat: &Arc<DgPresentation>) -> DgModule {
    let nobj = cat.object_count();
    let values = vec![Complex::zero(cat.field); nobj];
    let mut action = BTreeMap::new();
    for a in 0..nobj {
        for b in 0..nobj {
            let space = cat.hom(a, b);
            let maps = (0..space.dim())
                .map(|k| {
                    ChainMap::zero(values[b].clone(), values[a].clone(), space.basis[k].degree)
                })
                .collect();
            action.insert((a, b), maps);
        }
    }
    DgModule { cat: cat.clone(), values, action }
}

/// A homotopy colimit with its structural data.
pub struct Hocolim {
    pub module: DgModule,
    /// j[n]: the canonical map of the n-th term into the colimit.
    pub j: Vec<DgModuleMap>,
    /// homotopies[n]: degree -1 maps with
    /// `d(homotopies[n]) = j[n] - j[n+1] . maps[n]`, exactly.
    pub homotopies: Vec<DgModuleMap>,
    /// The rectangle map whose cone the colimit is.
    pub one_minus_mu: DgModuleMap,
    /// The cone with its strict inclusion and projection.
    pub cone: ModuleCone,
    /// Sum of all terms but the last (domain of the rectangle map).
    pub dom_sum: DgModule,
    /// Sum of all terms (codomain of the rectangle map).
    pub cod_sum: DgModule,
    dom_parts: Vec<DgModule>,
    cod_parts: Vec<DgModule>,
    dom_layout: Option<crate::dgmodule::ModSumLayout>,
    cod_layout: crate::dgmodule::ModSumLayout,
}

impl Hocolim {
    /// Inclusion of the n-th term into the codomain sum.
    pub fn cod_inclusion(&self, n: usize) -> DgModuleMap {
        self.cod_layout.inclusion(&self.cod_sum, &self.cod_parts, n)
    }

    /// Projection of the codomain sum onto its n-th part.
    pub fn cod_projection(&self, n: usize) -> DgModuleMap {
        self.cod_layout.projection(&self.cod_sum, &self.cod_parts, n)
    }

    fn dom_inclusion(&self, n: usize) -> DgModuleMap {
        self.dom_layout
            .as_ref()
            .expect("a domain inclusion needs at least two terms")
            .inclusion(&self.dom_sum, &self.dom_parts, n)
    }
}

/// Build the homotopy colimit of a validated sequence.  The inclusions
/// `j[n]` commute with the sequence maps up to the returned homotopies,
/// with exact defect equations checked on construction.
pub fn hocolim_modules(seq: &ModuleSequence) -> Hocolim {
    let n_terms = seq.terms.len();
    assert!(n_terms > 0, "sequence must be nonempty");
    let cat = seq.terms[0].cat.clone();

    let cod_parts: Vec<DgModule> = seq.terms.clone();
    let (cod_sum, cod_layout) = module_direct_sum(&cod_parts);

    let dom_parts: Vec<DgModule> = seq.terms[..n_terms - 1].to_vec();
    let (dom_sum, dom_layout) = if dom_parts.is_empty() {
        (zero_module(&cat), None)
    } else {
        let (s, l) = module_direct_sum(&dom_parts);
        (s, Some(l))
    };

    let mut one_minus_mu = DgModuleMap::zero(&dom_sum, &cod_sum, 0);
    if let Some(layout) = &dom_layout {
        for n in 0..dom_parts.len() {
            let pr = layout.projection(&dom_sum, &dom_parts, n);
            let stay = cod_layout.inclusion(&cod_sum, &cod_parts, n).compose(&pr);
            let push = cod_layout
                .inclusion(&cod_sum, &cod_parts, n + 1)
                .compose(&seq.maps[n])
                .compose(&pr);
            one_minus_mu = one_minus_mu.add(&stay).sub(&push);
        }
    }
    assert!(one_minus_mu.is_closed() && one_minus_mu.is_natural());

    let cone = module_cone(&one_minus_mu);
    let module = cone.module.clone();

    let hoc = Hocolim {
        module,
        j: Vec::new(),
        homotopies: Vec::new(),
        one_minus_mu,
        cone,
        dom_sum,
        cod_sum,
        dom_parts,
        cod_parts,
        dom_layout,
        cod_layout,
    };

    let j: Vec<DgModuleMap> =
        (0..n_terms).map(|n| hoc.cone.j.compose(&hoc.cod_inclusion(n))).collect();

    // The first-block embedding of the domain sum, in degree -1; its
    // differential is exactly (sum of j) composed with the rectangle map.
    let field = cat.field;
    let s_comps: Vec<ChainMap> = (0..cat.object_count())
        .map(|b| {
            let sv = &hoc.dom_sum.values[b];
            let tv = &hoc.module.values[b];
            let mut comps = BTreeMap::new();
            for t in sv.space.support() {
                let mut m = Matrix::zero(field, tv.dim(t - 1), sv.dim(t));
                m.paste(0, 0, &Matrix::identity(field, sv.dim(t)));
                comps.insert(t, m);
            }
            ChainMap::new(sv.clone(), tv.clone(), -1, comps)
        })
        .collect();
    let s_map = DgModuleMap {
        source: hoc.dom_sum.clone(),
        target: hoc.module.clone(),
        degree: -1,
        components: s_comps,
    };
    assert_eq!(
        s_map.d(),
        hoc.cone.j.compose(&hoc.one_minus_mu),
        "first-block embedding must witness the rectangle composite"
    );

    let homotopies: Vec<DgModuleMap> = (0..n_terms.saturating_sub(1))
        .map(|n| {
            let h = s_map.compose(&hoc.dom_inclusion(n));
            let defect = j[n].sub(&j[n + 1].compose(&seq.maps[n]));
            assert_eq!(h.d(), defect, "inclusion homotopy must have the exact defect");
            h
        })
        .collect();

    Hocolim { j, homotopies, ..hoc }
}

/// Extend a map along a cone: given the cone of `f` and a map `u` out of
/// the target of `f` with `u . f = 0` exactly, the block map that is zero
/// on the shifted source and `u` on the target is closed whenever `u` is.
pub fn cone_extension(f_cone: &ModuleCone, f: &DgModuleMap, u: &DgModuleMap) -> DgModuleMap {
    assert_eq!(u.degree, 0, "extension needs a degree-0 map");
    assert_eq!(u.source, f.target, "extension must leave the cone base");
    assert!(u.compose(f).is_zero(), "extension requires an exactly vanishing composite");
    let field = u.source.field();
    let a_mod = &f.source;
    let comps: Vec<ChainMap> = (0..u.source.values.len())
        .map(|b| {
            let sv = &f_cone.module.values[b];
            let tv = &u.target.values[b];
            let mut comps = BTreeMap::new();
            for t in sv.space.support() {
                let a_dim = a_mod.values[b].dim(t + 1);
                let mut m = Matrix::zero(field, tv.dim(t), sv.dim(t));
                m.paste(0, a_dim, &u.components[b].component(t));
                comps.insert(t, m);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, comps)
        })
        .collect();
    let out = DgModuleMap {
        source: f_cone.module.clone(),
        target: u.target.clone(),
        degree: 0,
        components: comps,
    };
    assert!(out.is_closed(), "cone extension of a closed map is closed");
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitError {
    Degree { name: &'static str },
    NotClosed { name: &'static str },
    NotNatural { name: &'static str },
    Identity { name: &'static str },
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::Degree { name } => write!(f, "{name} is not of degree 0"),
            SplitError::NotClosed { name } => write!(f, "{name} is not closed"),
            SplitError::NotNatural { name } => write!(f, "{name} is not a module map"),
            SplitError::Identity { name } => write!(f, "split identity {name} fails"),
        }
    }
}

impl std::error::Error for SplitError {}

/// The cone-versus-cokernel comparison of a degreewise split sequence.
#[derive(Clone, Debug)]
pub struct SplitConeComparison {
    pub cone: ModuleCone,
    /// cone(f) -> C, closed: zero on the shifted source, `g` on the middle.
    pub phi: DgModuleMap,
    /// C -> cone(f), closed; the inverse up to homotopy.
    pub psi: DgModuleMap,
    /// phi . psi - 1, which vanishes on the nose.
    pub phi_psi_defect: DgModuleMap,
    /// Witness with d(witness) = psi . phi - 1, exactly.
    pub psi_phi_witness: DgModuleMap,
}

/// Compare the cone of `f` with the cokernel `C` of a degreewise split
/// exact sequence `A -f-> B -g-> C`.  The splitting data are degree-0
/// module maps `sigma: C -> B` and `rho: B -> A`, not necessarily closed,
/// subject to the biproduct identities; the first failing identity is
/// reported.  The comparison maps are closed and mutually inverse up to
/// the returned exact homotopy.
pub fn split_cone_compare(
    f: &DgModuleMap,
    g: &DgModuleMap,
    sigma: &DgModuleMap,
    rho: &DgModuleMap,
) -> Result<SplitConeComparison, SplitError> {
    for (name, map, need_closed) in [
        ("f", f, true),
        ("g", g, true),
        ("sigma", sigma, false),
        ("rho", rho, false),
    ] {
        if map.degree != 0 {
            return Err(SplitError::Degree { name });
        }
        if need_closed && !map.is_closed() {
            return Err(SplitError::NotClosed { name });
        }
        if !map.is_natural() {
            return Err(SplitError::NotNatural { name });
        }
    }
    if !g.compose(f).is_zero() {
        return Err(SplitError::Identity { name: "g . f = 0" });
    }
    if !rho.compose(sigma).is_zero() {
        return Err(SplitError::Identity { name: "rho . sigma = 0" });
    }
    if !g.compose(sigma).sub(&DgModuleMap::identity(&g.target)).is_zero() {
        return Err(SplitError::Identity { name: "g . sigma = 1" });
    }
    if !rho.compose(f).sub(&DgModuleMap::identity(&f.source)).is_zero() {
        return Err(SplitError::Identity { name: "rho . f = 1" });
    }
    let recompose = sigma.compose(g).add(&f.compose(rho));
    if !recompose.sub(&DgModuleMap::identity(&f.target)).is_zero() {
        return Err(SplitError::Identity { name: "sigma . g + f . rho = 1" });
    }

    let cone = module_cone(f);
    let field = f.source.field();
    let phi = cone_extension(&cone, f, g);

    // psi = (-delta, sigma) where delta = rho . d(sigma), landing in the
    // shifted block.  Closedness follows from the split identities.
    let delta = rho.compose(&sigma.d());
    let psi_comps: Vec<ChainMap> = (0..f.source.values.len())
        .map(|b| {
            let sv = &g.target.values[b];
            let tv = &cone.module.values[b];
            let mut comps = BTreeMap::new();
            for t in sv.space.support() {
                let a_dim = f.source.values[b].dim(t + 1);
                let mut m = Matrix::zero(field, tv.dim(t), sv.dim(t));
                m.paste(0, 0, &delta.components[b].component(t).neg());
                m.paste(a_dim, 0, &sigma.components[b].component(t));
                comps.insert(t, m);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, comps)
        })
        .collect();
    let psi = DgModuleMap {
        source: g.target.clone(),
        target: cone.module.clone(),
        degree: 0,
        components: psi_comps,
    };
    assert!(psi.is_closed(), "split data must make the inverse closed");

    let phi_psi_defect = phi.compose(&psi).sub(&DgModuleMap::identity(&g.target));
    assert!(phi_psi_defect.is_zero(), "the cokernel direction composes to the identity");

    // Witness: minus the retraction, from the middle block into the
    // shifted block, one degree down.
    let witness_comps: Vec<ChainMap> = (0..f.source.values.len())
        .map(|b| {
            let cv = &cone.module.values[b];
            let mut comps = BTreeMap::new();
            for t in cv.space.support() {
                let a_cols = f.source.values[b].dim(t + 1);
                let mut m = Matrix::zero(field, cv.dim(t - 1), cv.dim(t));
                m.paste(0, a_cols, &rho.components[b].component(t).neg());
                comps.insert(t, m);
            }
            ChainMap::new(cv.clone(), cv.clone(), -1, comps)
        })
        .collect();
    let psi_phi_witness = DgModuleMap {
        source: cone.module.clone(),
        target: cone.module.clone(),
        degree: -1,
        components: witness_comps,
    };
    let defect = psi.compose(&phi).sub(&DgModuleMap::identity(&cone.module));
    assert_eq!(psi_phi_witness.d(), defect, "retraction witness must have the exact defect");

    Ok(SplitConeComparison { cone, phi, psi, phi_psi_defect, psi_phi_witness })
}

/// Collapse a stabilized sequence onto its last term: the composites into
/// the last term commute strictly with the sequence, so they extend to a
/// closed map out of the homotopy colimit.
pub fn stable_comparison(seq: &ModuleSequence, hoc: &Hocolim) -> DgModuleMap {
    let n_terms = seq.terms.len();
    let last = seq.last().clone();
    let mut tails: Vec<DgModuleMap> = vec![DgModuleMap::identity(&last)];
    for n in (0..n_terms - 1).rev() {
        let t = tails.last().unwrap().compose(&seq.maps[n]);
        tails.push(t);
    }
    tails.reverse();
    let mut u = DgModuleMap::zero(&hoc.cod_sum, &last, 0);
    for (n, t) in tails.iter().enumerate() {
        u = u.add(&t.compose(&hoc.cod_projection(n)));
    }
    cone_extension(&hoc.cone, &hoc.one_minus_mu, &u)
}

/// Is the induced map on degree-`i` cohomology an isomorphism at every
/// object?
fn induced_iso(f: &DgModuleMap, i: i32) -> bool {
    f.induced_on_cohomology(i)
        .iter()
        .all(|m| m.rows == m.cols && m.rank() == m.rows)
}

/// Is it surjective at every object?
fn induced_epi(f: &DgModuleMap, i: i32) -> bool {
    f.induced_on_cohomology(i).iter().all(|m| m.rank() == m.rows)
}

/// One failed rank condition: which map, which degree, what was needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDefect {
    pub position: usize,
    pub degree: i32,
    pub needed: &'static str,
}

/// Outcome of the staircase cohomology check on a sequence.
pub struct HocolimCohomologyReport {
    /// Threshold of the first term; position n uses threshold start - n.
    pub start: i32,
    pub window: (i32, i32),
    pub hypothesis_failures: Vec<RankDefect>,
    pub conclusion_failures: Vec<RankDefect>,
    /// The collapse onto the last term induces isomorphisms in the window.
    pub stable_rank_ok: bool,
    /// When a compatible target was supplied: the induced map out of the
    /// colimit is an isomorphism on cohomology in the window.
    pub target_qis: Option<bool>,
}

impl HocolimCohomologyReport {
    pub fn hypothesis_ok(&self) -> bool {
        self.hypothesis_failures.is_empty()
    }

    pub fn all_ok(&self) -> bool {
        self.hypothesis_ok()
            && self.conclusion_failures.is_empty()
            && self.stable_rank_ok
            && self.target_qis.unwrap_or(true)
    }
}

/// Check the staircase cohomology statement on a stabilized sequence: if
/// each step induces isomorphisms above a threshold that drops by one per
/// position, and a surjection at the threshold, then the inclusions into
/// the homotopy colimit do the same.  Thresholds start at `start` for the
/// first term.  When `target` supplies maps `f_n` to a fixed module that
/// commute strictly with the sequence, the induced map out of the colimit
/// is tested for being an isomorphism on cohomology across the window.
pub fn verify_hocolim_cohomology(
    seq: &ModuleSequence,
    start: i32,
    window: (i32, i32),
    target: Option<(&DgModule, &[DgModuleMap])>,
) -> HocolimCohomologyReport {
    let hoc = hocolim_modules(seq);
    let mut hypothesis_failures = Vec::new();
    for (n, f) in seq.maps.iter().enumerate() {
        let threshold = start - n as i32;
        for i in window.0..=window.1 {
            if i > threshold && !induced_iso(f, i) {
                hypothesis_failures.push(RankDefect { position: n, degree: i, needed: "iso" });
            } else if i == threshold && !induced_epi(f, i) {
                hypothesis_failures.push(RankDefect { position: n, degree: i, needed: "epi" });
            }
        }
    }
    let mut conclusion_failures = Vec::new();
    for (n, jn) in hoc.j.iter().enumerate() {
        let threshold = start - n as i32;
        for i in window.0..=window.1 {
            if i > threshold && !induced_iso(jn, i) {
                conclusion_failures.push(RankDefect { position: n, degree: i, needed: "iso" });
            } else if i == threshold && !induced_epi(jn, i) {
                conclusion_failures.push(RankDefect { position: n, degree: i, needed: "epi" });
            }
        }
    }
    let collapse = stable_comparison(seq, &hoc);
    let stable_rank_ok = (window.0..=window.1).all(|i| induced_iso(&collapse, i));

    let target_qis = target.map(|(y, fs)| {
        assert_eq!(fs.len(), seq.terms.len(), "one map per term");
        for (n, fnm) in fs.iter().enumerate() {
            assert_eq!(fnm.source, seq.terms[n], "target map source mismatch");
            assert_eq!(&fnm.target, y, "target map target mismatch");
            assert!(fnm.is_closed() && fnm.is_natural());
            if n + 1 < fs.len() {
                assert!(
                    fs[n + 1].compose(&seq.maps[n]).sub(fnm).is_zero(),
                    "target maps must commute strictly with the sequence"
                );
            }
        }
        let mut u = DgModuleMap::zero(&hoc.cod_sum, y, 0);
        for (n, fnm) in fs.iter().enumerate() {
            u = u.add(&fnm.compose(&hoc.cod_projection(n)));
        }
        let c = cone_extension(&hoc.cone, &hoc.one_minus_mu, &u);
        (window.0..=window.1).all(|i| induced_iso(&c, i))
    });

    HocolimCohomologyReport {
        start,
        window,
        hypothesis_failures,
        conclusion_failures,
        stable_rank_ok,
        target_qis,
    }
}

/// Outcome of checking a twisted complex against its truncation sequence.
pub struct TruncationColimitReport {
    /// The truncation totalizations embed compatibly and exhaust the whole
    /// totalization.
    pub union_ok: bool,
    /// The rectangle map, the collected inclusions and the sums form an
    /// exact sequence, degree by degree.
    pub ses_ok: bool,
    /// The first-summand section splits it and passes the biproduct
    /// identities.
    pub split_ok: bool,
    /// The comparison map commutes strictly with every inclusion.
    pub triangle_ok: bool,
    /// The comparison map is an isomorphism on cohomology throughout the
    /// combined support.
    pub qis_ok: bool,
}

impl TruncationColimitReport {
    pub fn all_ok(&self) -> bool {
        self.union_ok && self.ses_ok && self.split_ok && self.triangle_ok && self.qis_ok
    }
}

/// Match the totalization of a twisted complex against the homotopy
/// colimit of its truncation totalizations.  The sequence starts at the
/// top index and cuts one index lower per step until it reaches the whole
/// complex, plus one identity step to witness stabilization.
pub fn verify_truncation_colimit(x: &TwistedComplex) -> TruncationColimitReport {
    let all_ok = TruncationColimitReport {
        union_ok: true,
        ses_ok: true,
        split_ok: true,
        triangle_ok: true,
        qis_ok: true,
    };
    let (Some(hi), Some(lo)) = (x.index_max(), x.index_min()) else {
        return all_ok;
    };
    let steps = (hi - lo) as usize + 1;
    let cutoffs: Vec<i32> = (0..=steps as i32).map(|p| hi - p).collect();

    let tots: Vec<_> = cutoffs.iter().map(|&c| totalize(&stupid_truncate(x, c))).collect();
    let totx = totalize(x);
    let maps: Vec<DgModuleMap> = (0..steps)
        .map(|p| {
            let step = truncation_inclusion(&stupid_truncate(x, cutoffs[p + 1]), cutoffs[p]);
            totalize_morphism(&step, &tots[p], &tots[p + 1])
        })
        .collect();
    let terms: Vec<DgModule> = tots.iter().map(|t| t.module.clone()).collect();
    let seq = ModuleSequence::new(terms, maps, steps - 1);
    seq.validate().expect("truncation sequences satisfy the sequence contract");

    let incl: Vec<DgModuleMap> = (0..=steps)
        .map(|p| totalize_morphism(&truncation_inclusion(x, cutoffs[p]), &tots[p], &totx))
        .collect();

    let nobj = x.cat.object_count();
    let mut union_ok = true;
    for (p, ip) in incl.iter().enumerate() {
        if !ip.is_closed() || !ip.is_natural() {
            union_ok = false;
        }
        for b in 0..nobj {
            for n in ip.source.values[b].space.support() {
                let m = ip.components[b].component(n);
                if m.rank() != m.cols {
                    union_ok = false;
                }
            }
        }
        if p + 1 < incl.len() && !incl[p + 1].compose(&seq.maps[p]).sub(ip).is_zero() {
            union_ok = false;
        }
    }
    for b in 0..nobj {
        for n in totx.module.values[b].space.support() {
            let m = incl[steps].components[b].component(n);
            if m.rank() != m.rows {
                union_ok = false;
            }
        }
    }

    let hoc = hocolim_modules(&seq);
    let mut q = DgModuleMap::zero(&hoc.cod_sum, &totx.module, 0);
    for (p, ip) in incl.iter().enumerate() {
        q = q.add(&ip.compose(&hoc.cod_projection(p)));
    }

    let mut ses_ok = q.compose(&hoc.one_minus_mu).is_zero();
    for b in 0..nobj {
        for n in hoc.cod_sum.values[b].space.support() {
            let fm = hoc.one_minus_mu.components[b].component(n);
            let qm = q.components[b].component(n);
            if fm.rank() != fm.cols || qm.rank() != qm.rows || fm.rank() + qm.rank() != qm.cols {
                ses_ok = false;
            }
        }
    }

    // First-summand section of q: a block at index i first appears in the
    // truncation cut at i, so send it there identically.
    let field = x.cat.field;
    let sigma_comps: Vec<ChainMap> = (0..nobj)
        .map(|b| {
            let sv = &totx.module.values[b];
            let tv = &hoc.cod_sum.values[b];
            let mut comps = BTreeMap::new();
            for n in sv.space.support() {
                let mut m = Matrix::zero(field, tv.dim(n), sv.dim(n));
                for &(i, e, _) in totx.blocks() {
                    let part = (hi - i).max(0) as usize;
                    let len = totx.block_dim(b, n, i, e);
                    let from = totx.offset(b, n, i, e);
                    let to = hoc.cod_layout.per_object[b].offset(part, n)
                        + tots[part].offset(b, n, i, e);
                    for k in 0..len {
                        m.set(to + k, from + k, field.one());
                    }
                }
                comps.insert(n, m);
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, comps)
        })
        .collect();
    let sigma = DgModuleMap {
        source: totx.module.clone(),
        target: hoc.cod_sum.clone(),
        degree: 0,
        components: sigma_comps,
    };

    // Retraction onto the domain sum, solved from the biproduct equation.
    let residual = DgModuleMap::identity(&hoc.cod_sum).sub(&sigma.compose(&q));
    let mut rho_ok = true;
    let rho_comps: Vec<ChainMap> = (0..nobj)
        .map(|b| {
            let sv = &hoc.cod_sum.values[b];
            let tv = &hoc.dom_sum.values[b];
            let mut comps = BTreeMap::new();
            for n in sv.space.support() {
                let fm = hoc.one_minus_mu.components[b].component(n);
                match fm.solve_matrix(&residual.components[b].component(n)) {
                    Some(sol) => {
                        comps.insert(n, sol);
                    }
                    None => {
                        rho_ok = false;
                    }
                }
            }
            ChainMap::new(sv.clone(), tv.clone(), 0, comps)
        })
        .collect();
    let rho = DgModuleMap {
        source: hoc.cod_sum.clone(),
        target: hoc.dom_sum.clone(),
        degree: 0,
        components: rho_comps,
    };

    let split = if rho_ok {
        split_cone_compare(&hoc.one_minus_mu, &q, &sigma, &rho).ok()
    } else {
        None
    };
    let split_ok = split.is_some();

    let (triangle_ok, qis_ok) = match &split {
        Some(cmp) => {
            let triangle = (0..=steps).all(|p| {
                cmp.phi.compose(&hoc.j[p]).sub(&incl[p]).is_zero()
            });
            let mut degrees: Vec<i32> = Vec::new();
            for b in 0..nobj {
                degrees.extend(hoc.module.values[b].space.support());
                degrees.extend(totx.module.values[b].space.support());
            }
            degrees.sort_unstable();
            degrees.dedup();
            let qis = degrees.iter().all(|&i| induced_iso(&cmp.phi, i));
            (triangle, qis)
        }
        None => (false, false),
    };

    TruncationColimitReport { union_ok, ses_ok, split_ok, triangle_ok, qis_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::GradedSpace;
    use crate::dgmodule::yoneda;
    use crate::field::FieldSpec;
    use crate::fixtures;
    use crate::twisted::EltMatrix;
    use crate::category::HomElt;

    fn ladder(field: FieldSpec) -> TwistedComplex {
        let cat = Arc::new(fixtures::exterior(field));
        let mut entries = BTreeMap::new();
        for i in [-4, -2, 0] {
            entries.insert(i, vec![0]);
        }
        let mut q = BTreeMap::new();
        for (i, j) in [(-2, 0), (-4, -2)] {
            let mut m = EltMatrix::zero(1, 1);
            m.set(0, 0, HomElt::basis(1, -1, field));
            q.insert((i, j), m);
        }
        TwistedComplex::new(cat, entries, q)
    }

    #[test]
    fn constant_sequence_collapses() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let m = yoneda(&cat, 0);
        let seq = ModuleSequence::constant(&m, 4);
        seq.validate().unwrap();
        let hoc = hocolim_modules(&seq);
        hoc.module.validate().unwrap();
        let c = stable_comparison(&seq, &hoc);
        assert!(c.is_closed() && c.is_natural());
        for i in -3..=3 {
            assert!(induced_iso(&c, i), "degree {i}");
        }
        let report = verify_hocolim_cohomology(&seq, 0, (-3, 3), Some((&m, &{
            let fs: Vec<DgModuleMap> = (0..4).map(|_| DgModuleMap::identity(&m)).collect();
            fs
        })));
        assert!(report.hypothesis_ok());
        assert!(report.all_ok());
    }

    #[test]
    fn single_term_is_its_own_colimit() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::contractible_pair(field));
        let m = yoneda(&cat, 0);
        let seq = ModuleSequence::constant(&m, 1);
        seq.validate().unwrap();
        let hoc = hocolim_modules(&seq);
        hoc.module.validate().unwrap();
        assert!(hoc.homotopies.is_empty());
        let c = stable_comparison(&seq, &hoc);
        for i in -2..=3 {
            assert!(induced_iso(&c, i), "degree {i}");
        }
    }

    #[test]
    fn sequence_validation_flags_defects() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let m = yoneda(&cat, 0);
        let mut seq = ModuleSequence::constant(&m, 3);
        seq.stabilized_from = 0;
        seq.maps[1] = DgModuleMap::zero(&m, &m, 0);
        assert_eq!(seq.validate(), Err(SeqError::NotStabilized { position: 1 }));
        seq.stabilized_from = 2;
        seq.validate().unwrap();

        let mut bad = ModuleSequence::constant(&m, 2);
        bad.maps[0].degree = 1;
        assert!(matches!(bad.validate(), Err(SeqError::Ends { .. }) | Err(SeqError::Degree { .. })));
    }

    #[test]
    fn split_compare_on_a_plain_biproduct() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let a = yoneda(&cat, 0);
        let c = crate::dgmodule::module_shift(&yoneda(&cat, 0), -1);
        let parts = [a.clone(), c.clone()];
        let (b, layout) = module_direct_sum(&parts);
        let f = layout.inclusion(&b, &parts, 0);
        let g = layout.projection(&b, &parts, 1);
        let sigma = layout.inclusion(&b, &parts, 1);
        let rho = layout.projection(&b, &parts, 0);
        let cmp = split_cone_compare(&f, &g, &sigma, &rho).unwrap();
        assert!(cmp.phi_psi_defect.is_zero());
        // Everything is closed here, so the witness matches a strict defect.
        assert_eq!(
            cmp.psi_phi_witness.d(),
            cmp.psi.compose(&cmp.phi).sub(&DgModuleMap::identity(&cmp.cone.module))
        );
        for i in -3..=3 {
            assert!(induced_iso(&cmp.phi, i), "degree {i}");
        }

        // A broken retraction is rejected with the first failing identity.
        let bad = DgModuleMap::zero(&b, &a, 0);
        assert_eq!(
            split_cone_compare(&f, &g, &sigma, &bad).unwrap_err(),
            SplitError::Identity { name: "rho . f = 1" }
        );
    }

    #[test]
    fn truncation_colimit_on_fixture_complexes() {
        let field = FieldSpec::Rational;

        // Empty and single-entry complexes pass trivially.
        let cat = Arc::new(fixtures::exterior(field));
        let report = verify_truncation_colimit(&TwistedComplex::empty(cat.clone()));
        assert!(report.all_ok());
        let mut entries = BTreeMap::new();
        entries.insert(0, vec![0usize]);
        let single = TwistedComplex::new(cat, entries, BTreeMap::new());
        assert!(verify_truncation_colimit(&single).all_ok());

        // The ladder exercises a section that fails to be closed.
        let x = ladder(field);
        let report = verify_truncation_colimit(&x);
        assert!(report.union_ok, "union");
        assert!(report.ses_ok, "exactness");
        assert!(report.split_ok, "splitting");
        assert!(report.triangle_ok, "triangle");
        assert!(report.qis_ok, "comparison ranks");
    }

    #[test]
    fn truncation_sequence_meets_the_staircase_bounds() {
        let field = FieldSpec::Rational;
        let x = ladder(field);
        let hi = x.index_max().unwrap();
        let lo = x.index_min().unwrap();
        let steps = (hi - lo) as usize + 1;
        let cutoffs: Vec<i32> = (0..=steps as i32).map(|p| hi - p).collect();
        let tots: Vec<_> = cutoffs.iter().map(|&c| totalize(&stupid_truncate(&x, c))).collect();
        let maps: Vec<DgModuleMap> = (0..steps)
            .map(|p| {
                let step = truncation_inclusion(&stupid_truncate(&x, cutoffs[p + 1]), cutoffs[p]);
                totalize_morphism(&step, &tots[p], &tots[p + 1])
            })
            .collect();
        let seq = ModuleSequence::new(
            tots.iter().map(|t| t.module.clone()).collect(),
            maps,
            steps - 1,
        );
        seq.validate().unwrap();
        let report = verify_hocolim_cohomology(&seq, hi, (-6, 1), None);
        assert!(report.hypothesis_ok(), "failures: {:?}", report.hypothesis_failures);
        assert!(report.all_ok(), "conclusion: {:?}", report.conclusion_failures);
    }

    #[test]
    fn zero_module_behaves() {
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::contractible_pair(field));
        let z = zero_module(&cat);
        z.validate().unwrap();
        assert_eq!(z.values[0].space, GradedSpace::default());
    }
}
