//! Right dg-modules over a presented dg-category: functors sending each
//! object to a complex, with hom elements acting contravariantly.
//!
//! Conventions, fixed crate-wide: an element f of hom(a, b) acts as
//! rho(f): M(b) -> M(a) of degree |f|; the module law reads
//! rho(g.f) = (-1)^(|f| |g|) rho(f) o rho(g); the action satisfies the
//! Leibniz rule d o rho(f) - (-1)^(|f|) rho(f) o d = rho(df), i.e. the
//! operator differential of rho(f) is rho(df). The Yoneda module of A
//! has rho(f)(x) = (-1)^(|f| |x|) x.f, and under the shift M[n] the
//! action becomes (-1)^(n |f|) rho(f), which is exactly the chain-map
//! shift. Natural transformations of degree p satisfy naturality with
//! the Koszul sign (-1)^(p |f|); the enriched hom complex is computed
//! as the exact kernel of the full commutation system.

use crate::category::{DgPresentation, H0Category, HomElt, ObjId};
use crate::complex::{
    cone, hom_complex, ChainMap, CohomologySpace, Complex, GradedSpace,
    HomComplex, SumLayout,
};
use crate::field::{FieldSpec, Matrix, Scalar, SpanTracker};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A right dg-module: one complex per object and one chain map per hom
/// basis element, stored per source/target pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DgModule {
    pub cat: Arc<DgPresentation>,
    pub values: Vec<Complex>,
    /// action[(a, b)][k]: the k-th basis element of hom(a, b) acting as
    /// a chain map M(b) -> M(a) of its degree.
    pub action: BTreeMap<(ObjId, ObjId), Vec<ChainMap>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleError {
    Shape(String),
    UnitAction(ObjId),
    ModuleLaw { pair: (ObjId, ObjId, ObjId), g: String, f: String },
    LeibnizAction { pair: (ObjId, ObjId), name: String },
}

impl fmt::Display for ModuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleError::Shape(s) => write!(f, "module shape error: {s}"),
            ModuleError::UnitAction(a) => write!(f, "identity of object {a} does not act as the identity"),
            ModuleError::ModuleLaw { pair, g, f: ff } => {
                write!(f, "module law fails on ({g}, {ff}) over triple {pair:?}")
            }
            ModuleError::LeibnizAction { pair, name } => {
                write!(f, "action Leibniz rule fails for {name} in hom{pair:?}")
            }
        }
    }
}

impl DgModule {
    pub fn field(&self) -> FieldSpec {
        self.cat.field
    }

    /// The action of a homogeneous hom element, extended linearly.
    pub fn act_elt(&self, a: ObjId, b: ObjId, elt: &HomElt) -> ChainMap {
        let mut out = ChainMap::zero(self.values[b].clone(), self.values[a].clone(), elt.degree);
        if let Some(list) = self.action.get(&(a, b)) {
            for (k, c) in &elt.coords {
                out = out.add(&list[*k].scale(c));
            }
        } else {
            assert!(elt.is_zero(), "action on a pair without stored maps");
        }
        out
    }

    /// Exhaustive check of shapes, unit, module law and Leibniz rule.
    pub fn validate(&self) -> Result<(), ModuleError> {
        let q = &self.cat;
        let n = q.object_count();
        if self.values.len() != n {
            return Err(ModuleError::Shape("value list length".into()));
        }
        for v in &self.values {
            if v.validate().is_err() {
                return Err(ModuleError::Shape("value complex differential".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let space = q.hom(a, b);
                let list = self.action.get(&(a, b)).map(Vec::as_slice).unwrap_or(&[]);
                if list.len() != space.dim() {
                    return Err(ModuleError::Shape(format!("action list length for pair ({a},{b})")));
                }
                for (k, map) in list.iter().enumerate() {
                    if map.source != self.values[b]
                        || map.target != self.values[a]
                        || map.degree != space.basis[k].degree
                    {
                        return Err(ModuleError::Shape(format!(
                            "action of {} has wrong shape or degree",
                            space.basis[k].name
                        )));
                    }
                }
            }
        }
        for a in 0..n {
            let id = self.act_elt(a, a, &q.identity_elt(a));
            if !id.sub(&ChainMap::identity(&self.values[a])).is_zero() {
                return Err(ModuleError::UnitAction(a));
            }
        }
        // Module law on basis pairs: rho(g.f) = (-1)^(|f||g|) rho(f) rho(g).
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let hab = q.hom(a, b);
                    let hbc = q.hom(b, c);
                    for fi in 0..hab.dim() {
                        for gi in 0..hbc.dim() {
                            let f = HomElt::basis(fi, hab.basis[fi].degree, q.field);
                            let g = HomElt::basis(gi, hbc.basis[gi].degree, q.field);
                            let lhs = self.act_elt(a, c, &q.compose_elt(a, b, c, &g, &f));
                            let sign = if (f.degree * g.degree).rem_euclid(2) == 0 { 1 } else { -1 };
                            let rhs = self
                                .act_elt(a, b, &f)
                                .compose(&self.act_elt(b, c, &g))
                                .scale(&q.field.from_i64(sign));
                            if !lhs.sub(&rhs).is_zero() {
                                return Err(ModuleError::ModuleLaw {
                                    pair: (a, b, c),
                                    g: hbc.basis[gi].name.clone(),
                                    f: hab.basis[fi].name.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        // Leibniz: the operator differential of rho(f) is rho(df).
        for (&(a, b), space) in &q.homs {
            for k in 0..space.dim() {
                let f = HomElt::basis(k, space.basis[k].degree, q.field);
                let lhs = self.act_elt(a, b, &f).d();
                let rhs = self.act_elt(a, b, &q.d_elt(a, b, &f));
                if !lhs.sub(&rhs).is_zero() {
                    return Err(ModuleError::LeibnizAction {
                        pair: (a, b),
                        name: space.basis[k].name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn total_dim(&self) -> usize {
        self.values.iter().map(|v| v.space.total_dim()).sum()
    }
}

/// The representable module of A: value hom(b, A) at b, with
/// rho(f)(x) = (-1)^(|f| |x|) x.f.
pub fn yoneda(q: &Arc<DgPresentation>, a_obj: ObjId) -> DgModule {
    let n = q.object_count();
    let data: Vec<_> = (0..n).map(|b| q.hom_complex_of(b, a_obj)).collect();
    let values: Vec<Complex> = data.iter().map(|(c, _)| c.clone()).collect();
    let mut action = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let space = q.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let fdeg = space.basis[k].degree;
                let f = HomElt::basis(k, fdeg, q.field);
                let (src_cx, src_idx) = &data[b];
                let (tgt_cx, tgt_idx) = &data[a];
                let mut comps = BTreeMap::new();
                for m in src_cx.space.support() {
                    let cols = src_cx.dim(m);
                    let rows = tgt_cx.dim(m + fdeg);
                    let mut mat = Matrix::zero(q.field, rows, cols);
                    let sign = if (fdeg * m).rem_euclid(2) == 0 { 1 } else { -1 };
                    for pos in 0..cols {
                        let x = src_idx.decode(m, &unit_vec(q.field, cols, pos));
                        let img = q
                            .compose_elt(a, b, a_obj, &x, &f)
                            .scale(&q.field.from_i64(sign));
                        for (r, v) in tgt_idx.encode(&img, q.field).into_iter().enumerate() {
                            if !v.is_zero() {
                                mat.set(r, pos, v);
                            }
                        }
                    }
                    comps.insert(m, mat);
                }
                maps.push(ChainMap::new(src_cx.clone(), tgt_cx.clone(), fdeg, comps));
            }
            action.insert((a, b), maps);
        }
    }
    DgModule { cat: q.clone(), values, action }
}

fn unit_vec(field: FieldSpec, len: usize, pos: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); len];
    v[pos] = field.one();
    v
}

/// Objectwise shift; the chain-map shift carries the action sign.
pub fn module_shift(m: &DgModule, n: i32) -> DgModule {
    DgModule {
        cat: m.cat.clone(),
        values: m.values.iter().map(|v| v.shift(n)).collect(),
        action: m
            .action
            .iter()
            .map(|(k, maps)| (*k, maps.iter().map(|f| f.shift(n)).collect()))
            .collect(),
    }
}

/// Degreewise positions of the parts of an objectwise direct sum.
#[derive(Clone, Debug)]
pub struct ModSumLayout {
    pub per_object: Vec<SumLayout>,
}

pub fn module_direct_sum(parts: &[DgModule]) -> (DgModule, ModSumLayout) {
    assert!(!parts.is_empty(), "direct sum needs at least one part");
    let cat = parts[0].cat.clone();
    let n = cat.object_count();
    let mut values = Vec::with_capacity(n);
    let mut layouts = Vec::with_capacity(n);
    for a in 0..n {
        let vs: Vec<Complex> = parts.iter().map(|p| p.values[a].clone()).collect();
        let (sum, layout) = Complex::direct_sum(&vs);
        values.push(sum);
        layouts.push(layout);
    }
    let mut action = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let space = cat.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let deg = space.basis[k].degree;
                let mut comps = BTreeMap::new();
                for m in values[b].space.support() {
                    let mut mat = Matrix::zero(cat.field, values[a].dim(m + deg), values[b].dim(m));
                    for (p_idx, part) in parts.iter().enumerate() {
                        let block = part.action[&(a, b)][k].component(m);
                        mat.paste(
                            layouts[a].offset(p_idx, m + deg),
                            layouts[b].offset(p_idx, m),
                            &block,
                        );
                    }
                    comps.insert(m, mat);
                }
                maps.push(ChainMap::new(values[b].clone(), values[a].clone(), deg, comps));
            }
            action.insert((a, b), maps);
        }
    }
    (DgModule { cat, values, action }, ModSumLayout { per_object: layouts })
}

impl ModSumLayout {
    pub fn inclusion(&self, sum: &DgModule, parts: &[DgModule], k: usize) -> DgModuleMap {
        let comps = (0..sum.values.len())
            .map(|a| {
                let vs: Vec<Complex> = parts.iter().map(|p| p.values[a].clone()).collect();
                self.per_object[a].inclusion(&sum.values[a], &vs, k)
            })
            .collect();
        DgModuleMap { source: parts[k].clone(), target: sum.clone(), degree: 0, components: comps }
    }

    pub fn projection(&self, sum: &DgModule, parts: &[DgModule], k: usize) -> DgModuleMap {
        let comps = (0..sum.values.len())
            .map(|a| {
                let vs: Vec<Complex> = parts.iter().map(|p| p.values[a].clone()).collect();
                self.per_object[a].projection(&sum.values[a], &vs, k)
            })
            .collect();
        DgModuleMap { source: sum.clone(), target: parts[k].clone(), degree: 0, components: comps }
    }
}

/// A homogeneous graded transformation between modules; closed degree-0
/// ones are the strict module maps.
#[derive(Clone, Debug, PartialEq)]
pub struct DgModuleMap {
    pub source: DgModule,
    pub target: DgModule,
    pub degree: i32,
    pub components: Vec<ChainMap>,
}

impl DgModuleMap {
    pub fn zero(source: &DgModule, target: &DgModule, degree: i32) -> DgModuleMap {
        let components = source
            .values
            .iter()
            .zip(&target.values)
            .map(|(s, t)| ChainMap::zero(s.clone(), t.clone(), degree))
            .collect();
        DgModuleMap { source: source.clone(), target: target.clone(), degree, components }
    }

    pub fn identity(m: &DgModule) -> DgModuleMap {
        let components = m.values.iter().map(ChainMap::identity).collect();
        DgModuleMap { source: m.clone(), target: m.clone(), degree: 0, components }
    }

    pub fn d(&self) -> DgModuleMap {
        DgModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree + 1,
            components: self.components.iter().map(ChainMap::d).collect(),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.components.iter().all(ChainMap::is_closed)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(ChainMap::is_zero)
    }

    pub fn compose(&self, inner: &DgModuleMap) -> DgModuleMap {
        DgModuleMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            degree: self.degree + inner.degree,
            components: self
                .components
                .iter()
                .zip(&inner.components)
                .map(|(f, g)| f.compose(g))
                .collect(),
        }
    }

    pub fn add(&self, other: &DgModuleMap) -> DgModuleMap {
        DgModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(f, g)| f.add(g))
                .collect(),
        }
    }

    pub fn sub(&self, other: &DgModuleMap) -> DgModuleMap {
        DgModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(f, g)| f.sub(g))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> DgModuleMap {
        DgModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            components: self.components.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn shift(&self, n: i32) -> DgModuleMap {
        DgModuleMap {
            source: module_shift(&self.source, n),
            target: module_shift(&self.target, n),
            degree: self.degree,
            components: self.components.iter().map(|f| f.shift(n)).collect(),
        }
    }

    /// Naturality with the Koszul sign (-1)^(degree |f|), on every basis
    /// element; required of all hom-complex elements, not only closed ones.
    pub fn is_natural(&self) -> bool {
        let q = &self.source.cat;
        for (&(a, b), space) in &q.homs {
            for k in 0..space.dim() {
                let f = HomElt::basis(k, space.basis[k].degree, q.field);
                let lhs = self.components[a].compose(&self.source.act_elt(a, b, &f));
                let sign = if (self.degree * f.degree).rem_euclid(2) == 0 { 1 } else { -1 };
                let rhs = self
                    .target
                    .act_elt(a, b, &f)
                    .compose(&self.components[b])
                    .scale(&q.field.from_i64(sign));
                if !lhs.sub(&rhs).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Ranks of the induced maps on cohomology in one degree.
    pub fn induced_on_cohomology(&self, n: i32) -> Vec<Matrix> {
        self.components.iter().map(|c| c.induced_on_cohomology(n)).collect()
    }
}

/// The cone of a closed degree-0 module map, with the target inclusion
/// and the shifted-source projection, both strict module maps.
#[derive(Clone, Debug)]
pub struct ModuleCone {
    pub module: DgModule,
    /// j: N -> cone.
    pub j: DgModuleMap,
    /// p: cone -> M[1].
    pub p: DgModuleMap,
}

pub fn module_cone(phi: &DgModuleMap) -> ModuleCone {
    assert_eq!(phi.degree, 0, "cone needs a degree-0 map");
    assert!(phi.is_closed(), "cone needs a closed map");
    assert!(phi.is_natural(), "cone needs a module map");
    let m = &phi.source;
    let nm = &phi.target;
    let cat = m.cat.clone();
    let cones: Vec<_> = phi.components.iter().map(cone).collect();
    let values: Vec<Complex> = cones.iter().map(|c| c.complex.clone()).collect();
    let m1 = module_shift(m, 1);
    let mut action = BTreeMap::new();
    for a in 0..cat.object_count() {
        for b in 0..cat.object_count() {
            let space = cat.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let deg = space.basis[k].degree;
                let am = &m1.action[&(a, b)][k];
                let an = &nm.action[&(a, b)][k];
                let mut comps = BTreeMap::new();
                for t in values[b].space.support() {
                    let rows = values[a].dim(t + deg);
                    let cols = values[b].dim(t);
                    let mut mat = Matrix::zero(cat.field, rows, cols);
                    // A-block first, then B-block, in both complexes.
                    mat.paste(0, 0, &am.component(t));
                    mat.paste(
                        m1.values[a].dim(t + deg),
                        m1.values[b].dim(t),
                        &an.component(t),
                    );
                    comps.insert(t, mat);
                }
                maps.push(ChainMap::new(values[b].clone(), values[a].clone(), deg, comps));
            }
            action.insert((a, b), maps);
        }
    }
    let module = DgModule { cat, values, action };
    let j = DgModuleMap {
        source: nm.clone(),
        target: module.clone(),
        degree: 0,
        components: cones.iter().map(|c| c.j.clone()).collect(),
    };
    let p = DgModuleMap {
        source: module.clone(),
        target: m1,
        degree: 0,
        components: cones.iter().map(|c| c.p.clone()).collect(),
    };
    ModuleCone { module, j, p }
}

/// The enriched hom complex of two modules: ambient graded maps per
/// object, cut down to the exact kernel of the naturality system.
pub struct ModuleHomComplex {
    pub complex: Complex,
    source: DgModule,
    target: DgModule,
    per_object: Vec<HomComplex>,
    ambient: Complex,
    layout: SumLayout,
    /// incl[p]: columns are the chosen kernel basis in ambient coords.
    incl: BTreeMap<i32, Matrix>,
}

pub fn module_hom_complex(m: &DgModule, nm: &DgModule) -> ModuleHomComplex {
    assert!(Arc::ptr_eq(&m.cat, &nm.cat) || m.cat == nm.cat, "hom over different categories");
    let q = &m.cat;
    let field = q.field;
    let nobj = q.object_count();
    let per_object: Vec<HomComplex> =
        (0..nobj).map(|a| hom_complex(&m.values[a], &nm.values[a])).collect();
    let parts: Vec<Complex> = per_object.iter().map(|h| h.complex.clone()).collect();
    let (ambient, layout) = Complex::direct_sum(&parts);
    let mut mixed: BTreeMap<(ObjId, ObjId), HomComplex> = BTreeMap::new();
    for a in 0..nobj {
        for b in 0..nobj {
            if q.hom(a, b).dim() > 0 {
                mixed.insert((a, b), hom_complex(&m.values[b], &nm.values[a]));
            }
        }
    }

    let degrees: Vec<i32> = ambient.space.support().collect();
    let mut incl = BTreeMap::new();
    let mut dims = BTreeMap::new();
    let mut kernels: BTreeMap<i32, Vec<Vec<Scalar>>> = BTreeMap::new();
    for &p in &degrees {
        let cols = ambient.dim(p);
        // Row layout of the constraint system at degree p.
        let mut row_blocks = Vec::new();
        let mut total_rows = 0;
        for (&(a, b), hx) in &mixed {
            let space = q.hom(a, b);
            for k in 0..space.dim() {
                let rows = hx.complex.dim(p + space.basis[k].degree);
                if rows > 0 {
                    row_blocks.push(((a, b), k, total_rows));
                    total_rows += rows;
                }
            }
        }
        let mut sys = Matrix::zero(field, total_rows, cols);
        for a0 in 0..nobj {
            let local = per_object[a0].complex.dim(p);
            for l in 0..local {
                let col = layout.offset(a0, p) + l;
                let u = per_object[a0].decode(p, &unit_vec(field, local, l));
                for ((a, b), k, row_off) in &row_blocks {
                    let (a, b, k) = (*a, *b, *k);
                    if a != a0 && b != a0 {
                        continue;
                    }
                    let fdeg = q.hom(a, b).basis[k].degree;
                    let f = HomElt::basis(k, fdeg, field);
                    let hx = &mixed[&(a, b)];
                    let mut term = ChainMap::zero(
                        m.values[b].clone(),
                        nm.values[a].clone(),
                        p + fdeg,
                    );
                    if a == a0 {
                        term = term.add(&u.compose(&m.act_elt(a, b, &f)));
                    }
                    if b == a0 {
                        let sign = if (p * fdeg).rem_euclid(2) == 0 { 1 } else { -1 };
                        term = term.sub(
                            &nm.act_elt(a, b, &f)
                                .compose(&u)
                                .scale(&field.from_i64(sign)),
                        );
                    }
                    for (r, v) in hx.encode(&term).into_iter().enumerate() {
                        if !v.is_zero() {
                            sys.set(row_off + r, col, v);
                        }
                    }
                }
            }
        }
        let basis = sys.kernel_basis();
        let mut inc = Matrix::zero(field, cols, basis.len());
        for (j, v) in basis.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    inc.set(i, j, x.clone());
                }
            }
        }
        dims.insert(p, basis.len());
        kernels.insert(p, basis);
        incl.insert(p, inc);
    }

    // Differential in the kernel bases: d preserves naturality, so the
    // ambient image of every basis vector lies in the next kernel.
    let mut d = BTreeMap::new();
    for &p in &degrees {
        let from = &kernels[&p];
        if from.is_empty() {
            continue;
        }
        let to_dim = dims.get(&(p + 1)).copied().unwrap_or(0);
        let mut mat = Matrix::zero(field, to_dim, from.len());
        let damb = ambient.d_at(p);
        for (j, v) in from.iter().enumerate() {
            let img = damb.apply(v);
            if img.iter().all(Scalar::is_zero) {
                continue;
            }
            let coords = incl[&(p + 1)]
                .solve_particular(&img)
                .expect("differential must preserve the naturality kernel");
            for (i, x) in coords.into_iter().enumerate() {
                if !x.is_zero() {
                    mat.set(i, j, x);
                }
            }
        }
        d.insert(p, mat);
    }
    let complex = Complex::new(field, GradedSpace::new(dims), d)
        .expect("enriched hom complex must square to zero");
    ModuleHomComplex {
        complex,
        source: m.clone(),
        target: nm.clone(),
        per_object,
        ambient,
        layout,
        incl,
    }
}

impl ModuleHomComplex {
    pub fn decode(&self, p: i32, coords: &[Scalar]) -> DgModuleMap {
        let field = self.source.field();
        assert_eq!(coords.len(), self.complex.dim(p), "decode: wrong length");
        let mut amb = vec![field.zero(); self.ambient.dim(p)];
        if let Some(inc) = self.incl.get(&p) {
            for (i, x) in inc.apply(coords).into_iter().enumerate() {
                amb[i] = x;
            }
        }
        let comps = (0..self.per_object.len())
            .map(|a| {
                let local = self.per_object[a].complex.dim(p);
                let off = self.layout.offset(a, p);
                self.per_object[a].decode(p, &amb[off..off + local])
            })
            .collect();
        DgModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: p,
            components: comps,
        }
    }

    /// Coordinates of a natural transformation; None when the map does
    /// not lie in the naturality kernel.
    pub fn encode(&self, f: &DgModuleMap) -> Option<Vec<Scalar>> {
        let field = self.source.field();
        let p = f.degree;
        let mut amb = vec![field.zero(); self.ambient.dim(p)];
        for (a, comp) in f.components.iter().enumerate() {
            let v = self.per_object[a].encode(comp);
            let off = self.layout.offset(a, p);
            for (i, x) in v.into_iter().enumerate() {
                amb[off + i] = x;
            }
        }
        match self.incl.get(&p) {
            Some(inc) => inc.solve_particular(&amb),
            None => amb.iter().all(Scalar::is_zero).then(Vec::new),
        }
    }

    /// A preimage under the hom-complex differential: alpha of degree
    /// p - 1 with d(alpha) = f, when f is an exact natural map.
    pub fn null_homotopy(&self, f: &DgModuleMap) -> Option<DgModuleMap> {
        let v = self.encode(f)?;
        let w = self.complex.coboundary_preimage(f.degree, &v)?;
        Some(self.decode(f.degree - 1, &w))
    }
}

/// An H0-module: one vector space per object with matrices for the
/// action of H0 classes.
#[derive(Clone, Debug, PartialEq)]
pub struct H0Module {
    pub field: FieldSpec,
    pub dims: Vec<usize>,
    /// act[(a, b)][k]: class k of H0 hom(a, b) acting N(b) -> N(a).
    pub act: BTreeMap<(ObjId, ObjId), Vec<Matrix>>,
}

impl H0Module {
    pub fn zero_at(field: FieldSpec, h0: &H0Category) -> H0Module {
        let n = h0.objects.len();
        let mut act = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                act.insert((a, b), vec![Matrix::zero(field, 0, 0); h0.dim(a, b)]);
            }
        }
        H0Module { field, dims: vec![0; n], act }
    }

    /// The action of an H0 hom element given by class coordinates.
    pub fn act_coords(&self, a: ObjId, b: ObjId, coords: &[Scalar]) -> Matrix {
        let mut out = Matrix::zero(self.field, self.dims[a], self.dims[b]);
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.act[&(a, b)][k].scale(c));
            }
        }
        out
    }

    /// Unit and composition law over the H0 category.
    pub fn validate(&self, h0: &H0Category) -> Result<(), String> {
        let n = h0.objects.len();
        for a in 0..n {
            let id = self.act_coords(a, a, &h0.identity[a]);
            if !id.sub(&Matrix::identity(self.field, self.dims[a])).is_zero() {
                return Err(format!("identity of object {a} does not act as identity"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for k in 0..h0.dim(a, b) {
                        for j in 0..h0.dim(b, c) {
                            let mut gk = vec![self.field.zero(); h0.dim(b, c)];
                            gk[j] = self.field.one();
                            let mut fk = vec![self.field.zero(); h0.dim(a, b)];
                            fk[k] = self.field.one();
                            let comp = h0.compose_coords(a, b, c, &gk, &fk);
                            let lhs = self.act_coords(a, c, &comp);
                            let rhs = self.act[&(a, b)][k].mul(&self.act[&(b, c)][j]);
                            if !lhs.sub(&rhs).is_zero() {
                                return Err(format!(
                                    "H0 module law fails at ({a},{b},{c}) classes ({j},{k})"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The representable H0-module of A.
pub fn h0_yoneda(h0: &H0Category, field: FieldSpec, a_obj: ObjId) -> H0Module {
    let n = h0.objects.len();
    let dims: Vec<usize> = (0..n).map(|b| h0.dim(b, a_obj)).collect();
    let mut act = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let mut maps = Vec::with_capacity(h0.dim(a, b));
            for k in 0..h0.dim(a, b) {
                let mut fk = vec![field.zero(); h0.dim(a, b)];
                fk[k] = field.one();
                let mut mat = Matrix::zero(field, dims[a], dims[b]);
                for col in 0..dims[b] {
                    let mut y = vec![field.zero(); dims[b]];
                    y[col] = field.one();
                    let img = h0.compose_coords(a, b, a_obj, &y, &fk);
                    for (r, v) in img.into_iter().enumerate() {
                        if !v.is_zero() {
                            mat.set(r, col, v);
                        }
                    }
                }
                maps.push(mat);
            }
            act.insert((a, b), maps);
        }
    }
    H0Module { field, dims, act }
}

pub fn h0_direct_sum(parts: &[H0Module]) -> (H0Module, Vec<Vec<usize>>) {
    assert!(!parts.is_empty());
    let field = parts[0].field;
    let n = parts[0].dims.len();
    let mut offsets = vec![Vec::with_capacity(n); parts.len()];
    let mut dims = vec![0usize; n];
    for (pi, part) in parts.iter().enumerate() {
        for a in 0..n {
            offsets[pi].push(dims[a]);
            dims[a] += part.dims[a];
        }
    }
    let keys: Vec<(ObjId, ObjId)> = parts[0].act.keys().copied().collect();
    let mut act = BTreeMap::new();
    for (a, b) in keys {
        let count = parts[0].act[&(a, b)].len();
        let mut maps = Vec::with_capacity(count);
        for k in 0..count {
            let mut mat = Matrix::zero(field, dims[a], dims[b]);
            for (pi, part) in parts.iter().enumerate() {
                mat.paste(offsets[pi][a], offsets[pi][b], &part.act[&(a, b)][k]);
            }
            maps.push(mat);
        }
        act.insert((a, b), maps);
    }
    (H0Module { field, dims, act }, offsets)
}

/// A map of H0-modules: one matrix per object, commuting with every
/// class action; `h0_map_is_natural` checks exactly that.
pub fn h0_map_is_natural(h0: &H0Category, src: &H0Module, tgt: &H0Module, comps: &[Matrix]) -> bool {
    let n = h0.objects.len();
    for a in 0..n {
        for b in 0..n {
            for k in 0..h0.dim(a, b) {
                let lhs = comps[a].mul(&src.act[&(a, b)][k]);
                let rhs = tgt.act[&(a, b)][k].mul(&comps[b]);
                if !lhs.sub(&rhs).is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Basis of the space of H0-module maps src -> tgt, solved as the exact
/// kernel of the commutation system.
pub fn h0_module_hom_basis(h0: &H0Category, src: &H0Module, tgt: &H0Module) -> Vec<Vec<Matrix>> {
    let field = src.field;
    let n = h0.objects.len();
    let mut var_off = Vec::with_capacity(n);
    let mut total_vars = 0;
    for a in 0..n {
        var_off.push(total_vars);
        total_vars += tgt.dims[a] * src.dims[a];
    }
    let mut rows = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for k in 0..h0.dim(a, b) {
                let s = &src.act[&(a, b)][k];
                let t = &tgt.act[&(a, b)][k];
                // Entry (r, c) of lambda_a . s - t . lambda_b.
                for r in 0..tgt.dims[a] {
                    for c in 0..src.dims[b] {
                        let mut row = vec![field.zero(); total_vars];
                        for m in 0..src.dims[a] {
                            let coef = s.get(m, c);
                            if !coef.is_zero() {
                                let idx = var_off[a] + r * src.dims[a] + m;
                                row[idx] = row[idx].add(&coef);
                            }
                        }
                        for m in 0..tgt.dims[b] {
                            let coef = t.get(r, m);
                            if !coef.is_zero() {
                                let idx = var_off[b] + m * src.dims[b] + c;
                                row[idx] = row[idx].sub(&coef);
                            }
                        }
                        if !row.iter().all(Scalar::is_zero) {
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    let mut sys = Matrix::zero(field, rows.len(), total_vars);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                sys.set(i, j, x.clone());
            }
        }
    }
    let mut out = Vec::new();
    for v in sys.kernel_basis() {
        let mut comps = Vec::with_capacity(n);
        for a in 0..n {
            let mut mat = Matrix::zero(field, tgt.dims[a], src.dims[a]);
            for r in 0..tgt.dims[a] {
                for c in 0..src.dims[a] {
                    let x = v[var_off[a] + r * src.dims[a] + c].clone();
                    if !x.is_zero() {
                        mat.set(r, c, x);
                    }
                }
            }
            comps.push(mat);
        }
        out.push(comps);
    }
    out
}

/// Smallest action-stable span containing the seeds, per object.
pub fn submodule_closure(
    h0: &H0Category,
    n_mod: &H0Module,
    seeds: &[(ObjId, Vec<Scalar>)],
) -> Vec<SpanTracker> {
    let field = n_mod.field;
    let nobj = n_mod.dims.len();
    let mut trackers: Vec<SpanTracker> =
        (0..nobj).map(|a| SpanTracker::new(field, n_mod.dims[a])).collect();
    let mut queue: Vec<(ObjId, Vec<Scalar>)> = Vec::new();
    for (a, v) in seeds {
        if trackers[*a].insert(v) {
            queue.push((*a, v.clone()));
        }
    }
    while let Some((b, v)) = queue.pop() {
        for a in 0..nobj {
            for k in 0..h0.dim(a, b) {
                let img = n_mod.act[&(a, b)][k].apply(&v);
                if !img.iter().all(Scalar::is_zero) && trackers[a].insert(&img) {
                    queue.push((a, img));
                }
            }
        }
    }
    trackers
}

/// Deterministic greedy generators: scan objects in order, adding each
/// standard basis vector not yet in the generated submodule.
pub fn fp_generators(h0: &H0Category, n_mod: &H0Module) -> Vec<(ObjId, Vec<Scalar>)> {
    let field = n_mod.field;
    let nobj = n_mod.dims.len();
    let mut gens: Vec<(ObjId, Vec<Scalar>)> = Vec::new();
    let mut trackers: Vec<SpanTracker> =
        (0..nobj).map(|a| SpanTracker::new(field, n_mod.dims[a])).collect();
    for a in 0..nobj {
        for i in 0..n_mod.dims[a] {
            let v = unit_vec(field, n_mod.dims[a], i);
            if trackers[a].contains(&v) {
                continue;
            }
            gens.push((a, v.clone()));
            let closure = submodule_closure(h0, n_mod, &gens);
            trackers = closure;
        }
    }
    gens
}

/// A two-step presentation by representables, with both exactness
/// claims verified by rank computations.
#[derive(Clone, Debug)]
pub struct FpPresentation {
    pub gens: Vec<(ObjId, Vec<Scalar>)>,
    pub rel_count: usize,
    pub cover_surjective: bool,
    pub relations_span_kernel: bool,
}

impl FpPresentation {
    pub fn ok(&self) -> bool {
        self.cover_surjective && self.relations_span_kernel
    }
}

pub fn fp_presentation(h0: &H0Category, n_mod: &H0Module) -> FpPresentation {
    let field = n_mod.field;
    let nobj = n_mod.dims.len();
    let gens = fp_generators(h0, n_mod);
    if gens.is_empty() {
        return FpPresentation {
            gens,
            rel_count: 0,
            cover_surjective: n_mod.dims.iter().all(|&d| d == 0),
            relations_span_kernel: true,
        };
    }
    let parts: Vec<H0Module> = gens.iter().map(|(a, _)| h0_yoneda(h0, field, *a)).collect();
    let (p0, offsets) = h0_direct_sum(&parts);
    // Cover pi: P0 -> N sends the class y in H0(b, a_g) to y acting on
    // the generator vector.
    let mut pi: Vec<Matrix> = Vec::with_capacity(nobj);
    for b in 0..nobj {
        let mut mat = Matrix::zero(field, n_mod.dims[b], p0.dims[b]);
        for (gi, (ga, gv)) in gens.iter().enumerate() {
            for y in 0..h0.dim(b, *ga) {
                let mut ycoords = vec![field.zero(); h0.dim(b, *ga)];
                ycoords[y] = field.one();
                let img = n_mod.act_coords(b, *ga, &ycoords).apply(gv);
                for (r, v) in img.into_iter().enumerate() {
                    if !v.is_zero() {
                        mat.set(r, offsets[gi][b] + y, v);
                    }
                }
            }
        }
        pi.push(mat);
    }
    let cover_surjective = h0_map_is_natural(h0, &p0, n_mod, &pi)
        && (0..nobj).all(|b| pi[b].rank() == n_mod.dims[b]);
    // Kernel of pi as a submodule of P0, then generators of it.
    let kernel_bases: Vec<Vec<Vec<Scalar>>> = (0..nobj).map(|b| pi[b].kernel_basis()).collect();
    let kdims: Vec<usize> = kernel_bases.iter().map(Vec::len).collect();
    let mut kincl: Vec<Matrix> = Vec::with_capacity(nobj);
    for b in 0..nobj {
        let mut mat = Matrix::zero(field, p0.dims[b], kdims[b]);
        for (j, v) in kernel_bases[b].iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    mat.set(i, j, x.clone());
                }
            }
        }
        kincl.push(mat);
    }
    let mut kact = BTreeMap::new();
    for a in 0..nobj {
        for b in 0..nobj {
            let mut maps = Vec::with_capacity(h0.dim(a, b));
            for k in 0..h0.dim(a, b) {
                let big = p0.act[&(a, b)][k].mul(&kincl[b]);
                let coords = kincl[a]
                    .solve_matrix(&big)
                    .expect("action must preserve the kernel of a natural cover");
                maps.push(coords);
            }
            kact.insert((a, b), maps);
        }
    }
    let kmod = H0Module { field, dims: kdims.clone(), act: kact };
    let rel_gens = fp_generators(h0, &kmod);
    let closure = submodule_closure(h0, &kmod, &rel_gens);
    let relations_span_kernel = (0..nobj).all(|b| closure[b].rank() == kdims[b]);
    FpPresentation { gens, rel_count: rel_gens.len(), cover_surjective, relations_span_kernel }
}

/// Cohomology of a module in one degree, as chosen representatives per
/// object together with the induced H0-module structure.
pub struct ModuleCohomology {
    pub degree: i32,
    pub spaces: Vec<CohomologySpace>,
    pub module: H0Module,
}

pub fn module_cohomology(m: &DgModule, h0: &H0Category, n: i32) -> ModuleCohomology {
    let q = &m.cat;
    let nobj = q.object_count();
    let spaces: Vec<CohomologySpace> = (0..nobj).map(|a| m.values[a].cohomology(n)).collect();
    let dims: Vec<usize> = spaces.iter().map(CohomologySpace::dim).collect();
    let mut act = BTreeMap::new();
    for a in 0..nobj {
        for b in 0..nobj {
            let mut maps = Vec::with_capacity(h0.dim(a, b));
            for k in 0..h0.dim(a, b) {
                let rep = h0.rep_elt(a, b, k);
                maps.push(m.act_elt(a, b, &rep).induced_on_cohomology(n));
            }
            act.insert((a, b), maps);
        }
    }
    ModuleCohomology { degree: n, spaces, module: H0Module { field: q.field, dims, act } }
}

/// Degrees where any value complex of M has nonzero cohomology.
pub fn cohomology_support(m: &DgModule) -> Vec<i32> {
    let mut out = Vec::new();
    let lo = m.values.iter().filter_map(|v| v.space.min_degree()).min();
    let hi = m.values.iter().filter_map(|v| v.space.max_degree()).max();
    let (Some(lo), Some(hi)) = (lo, hi) else { return out };
    for n in lo..=hi {
        if m.values.iter().any(|v| v.cohomology(n).dim() > 0) {
            out.push(n);
        }
    }
    out
}

/// The degree-n module map yoneda(B) -> M attached to an element x of
/// M(B)^n: phi_c(y) = (-1)^(n |y|) rho(y)(x). Closed iff x is a cocycle.
pub fn yoneda_map_from_element(m: &DgModule, b_obj: ObjId, n: i32, x: &[Scalar]) -> DgModuleMap {
    let q = &m.cat;
    let field = q.field;
    let y_mod = yoneda(q, b_obj);
    let mut comps = Vec::with_capacity(q.object_count());
    for c in 0..q.object_count() {
        let (ycx, yidx) = q.hom_complex_of(c, b_obj);
        let mut mats = BTreeMap::new();
        for deg in ycx.space.support() {
            let cols = ycx.dim(deg);
            let rows = m.values[c].dim(deg + n);
            let mut mat = Matrix::zero(field, rows, cols);
            let sign = field.from_i64(if (n * deg).rem_euclid(2) == 0 { 1 } else { -1 });
            for pos in 0..cols {
                let y = yidx.decode(deg, &unit_vec(field, cols, pos));
                let img = m.act_elt(c, b_obj, &y).component(n).apply(x);
                for (r, v) in img.into_iter().enumerate() {
                    let v = v.mul(&sign);
                    if !v.is_zero() {
                        mat.set(r, pos, v);
                    }
                }
            }
            mats.insert(deg, mat);
        }
        comps.push(ChainMap::new(ycx, m.values[c].clone(), n, mats));
    }
    DgModuleMap { source: y_mod, target: m.clone(), degree: n, components: comps }
}

/// The inverse direction: evaluate a map from yoneda(B) at the identity.
pub fn yoneda_element_of_map(phi: &DgModuleMap, b_obj: ObjId) -> Vec<Scalar> {
    let q = &phi.source.cat;
    let (_, idx) = q.hom_complex_of(b_obj, b_obj);
    let id_coords = idx.encode(&q.identity_elt(b_obj), q.field);
    phi.components[b_obj].component(0).apply(&id_coords)
}

/// The same cover as a closed degree-0 map from the shifted
/// representable yoneda(B)[-n]; requires x to be a cocycle.
pub fn cover_map_from_element(m: &DgModule, b_obj: ObjId, n: i32, x: &[Scalar]) -> DgModuleMap {
    let phi = yoneda_map_from_element(m, b_obj, n, x);
    assert!(phi.is_closed(), "cover element must be a cocycle");
    let shifted = module_shift(&phi.source, -n);
    let comps = shifted
        .values
        .iter()
        .zip(&phi.source.values)
        .zip(&phi.components)
        .map(|((sv, _ov), comp)| {
            let sigma = shifted_identity_between(sv, comp, n);
            comp.compose(&sigma)
        })
        .collect();
    DgModuleMap { source: shifted, target: m.clone(), degree: 0, components: comps }
}

// sigma: V[-n] -> V as a chain map, where `comp` supplies V as its source.
fn shifted_identity_between(shifted: &Complex, comp: &ChainMap, n: i32) -> ChainMap {
    let mut mats = BTreeMap::new();
    for i in shifted.space.support() {
        mats.insert(i, Matrix::identity(shifted.field, shifted.dim(i)));
    }
    ChainMap::new(shifted.clone(), comp.source.clone(), -n, mats)
}

/// Pullback of a module along a strict dg-functor.
pub fn restrict_along(f: &crate::category::DgFunctor, m: &DgModule) -> DgModule {
    assert!(m.cat == f.target, "module must live over the functor target");
    let q = &f.source;
    let values: Vec<Complex> =
        (0..q.object_count()).map(|a| m.values[f.object_map[a]].clone()).collect();
    let mut action = BTreeMap::new();
    for a in 0..q.object_count() {
        for b in 0..q.object_count() {
            let space = q.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let img = f.apply_elt(a, b, &HomElt::basis(k, space.basis[k].degree, q.field));
                maps.push(m.act_elt(f.object_map[a], f.object_map[b], &img));
            }
            action.insert((a, b), maps);
        }
    }
    DgModule { cat: q.clone(), values, action }
}

/// The module concentrated in degree 0 at one object, all non-identity
/// basis elements acting as zero. Requires the identity to be a single
/// basis element; validity depends on the composition table and is the
/// caller's concern.
pub fn simple_module(q: &Arc<DgPresentation>, at: ObjId) -> DgModule {
    let field = q.field;
    assert_eq!(q.identities[at].len(), 1, "simple module needs a one-element identity");
    let (id_idx, ref c) = q.identities[at][0];
    assert!(c.is_one(), "simple module needs an identity with coefficient 1");
    let n = q.object_count();
    let values: Vec<Complex> = (0..n)
        .map(|b| if b == at { Complex::point(field, 0) } else { Complex::zero(field) })
        .collect();
    let mut action = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let space = q.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let deg = space.basis[k].degree;
                let mut map = ChainMap::zero(values[b].clone(), values[a].clone(), deg);
                if a == at && b == at && k == id_idx {
                    map = ChainMap::identity(&values[at]);
                }
                maps.push(map);
            }
            action.insert((a, b), maps);
        }
    }
    DgModule { cat: q.clone(), values, action }
}

/// Lift of an H0-module to a dg-module concentrated in degree 0. Only
/// available when all hom bases sit in nonpositive degrees, where the
/// projection onto H0 is a strict functor.
pub fn inflation(q: &Arc<DgPresentation>, h0: &H0Category, n_mod: &H0Module) -> Option<DgModule> {
    let field = q.field;
    if q.homs.values().any(|s| s.basis.iter().any(|e| e.degree > 0)) {
        return None;
    }
    let nobj = q.object_count();
    let values: Vec<Complex> = (0..nobj)
        .map(|a| {
            let mut dims = BTreeMap::new();
            dims.insert(0, n_mod.dims[a]);
            Complex::new(field, GradedSpace::new(dims), BTreeMap::new()).unwrap()
        })
        .collect();
    let mut action = BTreeMap::new();
    for a in 0..nobj {
        for b in 0..nobj {
            let space = q.hom(a, b);
            let mut maps = Vec::with_capacity(space.dim());
            for k in 0..space.dim() {
                let deg = space.basis[k].degree;
                let mut map = ChainMap::zero(values[b].clone(), values[a].clone(), deg);
                if deg == 0 {
                    let f = HomElt::basis(k, 0, field);
                    let coords = h0
                        .project(q, a, b, &f)
                        .expect("degree-0 elements are cocycles in nonpositive degrees");
                    let mat = n_mod.act_coords(a, b, &coords);
                    if !mat.is_zero() {
                        let mut comps = BTreeMap::new();
                        comps.insert(0, mat);
                        map = ChainMap::new(values[b].clone(), values[a].clone(), 0, comps);
                    }
                }
                maps.push(map);
            }
            action.insert((a, b), maps);
        }
    }
    let out = DgModule { cat: q.clone(), values, action };
    out.validate().expect("inflation along the H0 projection is a module");
    Some(out)
}

/// One weak-kernel certificate: the kernel of postcomposition with an
/// H0 class, exhibited as the image of representables on generators.
#[derive(Clone, Debug)]
pub struct WeakKernelCheck {
    pub pair: (ObjId, ObjId),
    pub class: usize,
    pub generator_objects: Vec<ObjId>,
    pub ok: bool,
}

/// Local-coherence report: nonpositive hom cohomology, weak kernels
/// for every H0 basis map, and finitely presented cohomology of every
/// representable.
pub struct HlcReport {
    pub nonpositive: Result<(), (ObjId, ObjId, i32, usize)>,
    pub weak_kernels: Vec<WeakKernelCheck>,
    /// (object, degree, fp verdict) for each representable and degree.
    pub representables_fp: Vec<(ObjId, i32, bool)>,
}

impl HlcReport {
    pub fn all_ok(&self) -> bool {
        self.nonpositive.is_ok()
            && self.weak_kernels.iter().all(|w| w.ok)
            && self.representables_fp.iter().all(|(_, _, ok)| *ok)
    }
}

pub fn check_hlc(q: &Arc<DgPresentation>) -> HlcReport {
    let field = q.field;
    let nonpositive = q.check_nonpositive_cohomology();
    let h0 = q.h0_category();
    let nobj = q.object_count();

    let mut weak_kernels = Vec::new();
    for a in 0..nobj {
        for b in 0..nobj {
            for k in 0..h0.dim(a, b) {
                // Kernel of (class k) o - : H0(c, a) -> H0(c, b), per c.
                let ya = h0_yoneda(&h0, field, a);
                let mut fk = vec![field.zero(); h0.dim(a, b)];
                fk[k] = field.one();
                let mut post: Vec<Matrix> = Vec::with_capacity(nobj);
                for c in 0..nobj {
                    let mut mat = Matrix::zero(field, h0.dim(c, b), h0.dim(c, a));
                    for col in 0..h0.dim(c, a) {
                        let mut y = vec![field.zero(); h0.dim(c, a)];
                        y[col] = field.one();
                        let img = h0.compose_coords(c, a, b, &fk, &y);
                        for (r, v) in img.into_iter().enumerate() {
                            if !v.is_zero() {
                                mat.set(r, col, v);
                            }
                        }
                    }
                    post.push(mat);
                }
                let kernel_bases: Vec<Vec<Vec<Scalar>>> =
                    (0..nobj).map(|c| post[c].kernel_basis()).collect();
                let kdims: Vec<usize> = kernel_bases.iter().map(Vec::len).collect();
                let mut kincl = Vec::with_capacity(nobj);
                for c in 0..nobj {
                    let mut mat = Matrix::zero(field, ya.dims[c], kdims[c]);
                    for (j, v) in kernel_bases[c].iter().enumerate() {
                        for (i, x) in v.iter().enumerate() {
                            if !x.is_zero() {
                                mat.set(i, j, x.clone());
                            }
                        }
                    }
                    kincl.push(mat);
                }
                let mut kact = BTreeMap::new();
                let mut stable = true;
                for c in 0..nobj {
                    for e in 0..nobj {
                        let mut maps = Vec::with_capacity(h0.dim(c, e));
                        for m in 0..h0.dim(c, e) {
                            let big = ya.act[&(c, e)][m].mul(&kincl[e]);
                            match kincl[c].solve_matrix(&big) {
                                Some(coords) => maps.push(coords),
                                None => {
                                    stable = false;
                                    maps.push(Matrix::zero(field, kdims[c], kdims[e]));
                                }
                            }
                        }
                        kact.insert((c, e), maps);
                    }
                }
                let kmod = H0Module { field, dims: kdims.clone(), act: kact };
                let gens = fp_generators(&h0, &kmod);
                let closure = submodule_closure(&h0, &kmod, &gens);
                let generated = (0..nobj).all(|c| closure[c].rank() == kdims[c]);
                weak_kernels.push(WeakKernelCheck {
                    pair: (a, b),
                    class: k,
                    generator_objects: gens.iter().map(|(o, _)| *o).collect(),
                    ok: stable && generated,
                });
            }
        }
    }

    let mut representables_fp = Vec::new();
    for a in 0..nobj {
        let ya = yoneda(q, a);
        for n in cohomology_support(&ya) {
            let coh = module_cohomology(&ya, &h0, n);
            let fp = fp_presentation(&h0, &coh.module);
            representables_fp.push((a, n, fp.ok()));
        }
    }

    HlcReport { nonpositive, weak_kernels, representables_fp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q_f2() -> Arc<DgPresentation> {
        Arc::new(fixtures::exterior(FieldSpec::Rational))
    }

    fn q_f4() -> Arc<DgPresentation> {
        Arc::new(fixtures::contractible_pair(FieldSpec::Rational))
    }

    #[test]
    fn yoneda_modules_validate() {
        for cat in [Arc::new(fixtures::point(FieldSpec::Rational)), q_f2(), q_f4()] {
            let y = yoneda(&cat, 0);
            assert_eq!(y.validate(), Ok(()));
        }
    }

    #[test]
    fn simple_module_over_exterior_validates() {
        let q = q_f2();
        let s = simple_module(&q, 0);
        assert_eq!(s.validate(), Ok(()));
        let h0 = q.h0_category();
        let coh = module_cohomology(&s, &h0, 0);
        assert_eq!(coh.module.dims, vec![1]);
        assert!(coh.module.validate(&h0).is_ok());
        let fp = fp_presentation(&h0, &coh.module);
        assert!(fp.ok());
        assert_eq!(fp.gens.len(), 1);
    }

    #[test]
    fn module_hom_from_yoneda_matches_value() {
        // Enriched maps out of a representable are the value complex,
        // degreewise: same dimensions in every degree.
        for cat in [q_f2(), q_f4()] {
            let y = yoneda(&cat, 0);
            for target in [y.clone(), simple_module(&cat, 0)] {
                let hx = module_hom_complex(&y, &target);
                let value = &target.values[0];
                let lo = hx.complex.space.min_degree().into_iter().chain(value.space.min_degree()).min();
                let hi = hx.complex.space.max_degree().into_iter().chain(value.space.max_degree()).max();
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    for p in lo..=hi {
                        assert_eq!(
                            hx.complex.dim(p),
                            value.dim(p),
                            "hom dim vs value dim at degree {p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn yoneda_correspondence_is_exact_iso() {
        let q = q_f4();
        let m = yoneda(&q, 0);
        let value = m.values[0].clone();
        for n in value.space.support() {
            for pos in 0..value.dim(n) {
                let x = unit_vec(q.field, value.dim(n), pos);
                let phi = yoneda_map_from_element(&m, 0, n, &x);
                assert!(phi.is_natural(), "yoneda map must be natural");
                // Round trip through evaluation at the identity.
                assert_eq!(yoneda_element_of_map(&phi, 0), x);
                // The correspondence intertwines the differentials.
                let dphi = phi.d();
                let dx = value.d_at(n).apply(&x);
                let phi_dx = yoneda_map_from_element(&m, 0, n + 1, &dx);
                assert!(dphi.sub(&phi_dx).is_zero(), "d(phi_x) must equal phi_dx at degree {n}");
            }
        }
    }

    #[test]
    fn cover_map_is_closed_strict_and_epi_on_h0() {
        let q = q_f2();
        let s = simple_module(&q, 0);
        // Generator of H^0(S)(*) is the point itself.
        let cov = cover_map_from_element(&s, 0, 0, &[q.field.one()]);
        assert!(cov.is_closed());
        assert!(cov.is_natural());
        let rank = cov.components[0].induced_on_cohomology(0).rank();
        assert_eq!(rank, 1);
    }

    #[test]
    fn module_cone_of_identity_is_acyclic() {
        let q = q_f2();
        let y = yoneda(&q, 0);
        let c = module_cone(&DgModuleMap::identity(&y));
        assert_eq!(c.module.validate(), Ok(()));
        assert!(cohomology_support(&c.module).is_empty());
        assert!(c.j.is_closed() && c.j.is_natural());
        assert!(c.p.is_closed() && c.p.is_natural());
    }

    #[test]
    fn module_shift_is_a_module_and_moves_cohomology() {
        let q = q_f2();
        let s = simple_module(&q, 0);
        let sh = module_shift(&s, 2);
        assert_eq!(sh.validate(), Ok(()));
        assert_eq!(cohomology_support(&sh), vec![-2]);
    }

    #[test]
    fn enriched_hom_respects_naturality_constraints() {
        let q = q_f2();
        let y = yoneda(&q, 0);
        let s = simple_module(&q, 0);
        let hx = module_hom_complex(&y, &s);
        // dim agreement with S(*) pins down degree 0 and kills degree 1.
        assert_eq!(hx.complex.dim(0), 1);
        assert_eq!(hx.complex.dim(1), 0);
        // Decode a generator and check it is natural and encodes back.
        let phi = hx.decode(0, &[q.field.one()]);
        assert!(phi.is_natural());
        let coords = hx.encode(&phi).expect("decoded map must encode");
        assert_eq!(coords, vec![q.field.one()]);
    }

    #[test]
    fn hlc_holds_for_fixtures_and_fails_on_positive_class() {
        for (label, cat) in fixtures::shipped(FieldSpec::Rational) {
            let report = check_hlc(&Arc::new(cat));
            assert!(report.all_ok(), "{label} should be locally coherent");
        }
        let report = check_hlc(&Arc::new(fixtures::positive_class(FieldSpec::Rational)));
        assert!(!report.all_ok());
        assert_eq!(report.nonpositive.unwrap_err().2, 1);
    }

    #[test]
    fn inflation_realizes_h0_modules_in_degree_zero() {
        let q = q_f2();
        let h0 = q.h0_category();
        let rank2 = {
            let (sum, _) = h0_direct_sum(&[
                h0_yoneda(&h0, q.field, 0),
                h0_yoneda(&h0, q.field, 0),
            ]);
            sum
        };
        let m = inflation(&q, &h0, &rank2).expect("nonpositive category inflates");
        assert_eq!(m.validate(), Ok(()));
        assert_eq!(cohomology_support(&m), vec![0]);
        // No inflation over a category with positive hom degrees.
        assert!(inflation(&q_f4(), &q_f4().h0_category(), &rank2).is_none());
    }

    #[test]
    fn restriction_along_inclusion_preserves_validity() {
        let small = q_f2();
        let big = Arc::new(fixtures::exterior_padded(FieldSpec::Rational));
        let mut hom_maps = BTreeMap::new();
        hom_maps.insert(
            (0, 0),
            vec![HomElt::basis(0, 0, small.field), HomElt::basis(1, -1, small.field)],
        );
        let inc = crate::category::DgFunctor {
            source: small.clone(),
            target: big.clone(),
            object_map: vec![0],
            hom_maps,
        };
        assert!(inc.validate().is_ok());
        let y = yoneda(&big, 0);
        let restricted = restrict_along(&inc, &y);
        assert_eq!(restricted.validate(), Ok(()));
        // Restriction along a quasi-equivalence keeps cohomology dims.
        let h_small = restricted.values[0].cohomology_dims(-3, 3);
        let h_big = y.values[0].cohomology_dims(-3, 3);
        assert_eq!(h_small, h_big);
    }

    #[test]
    fn h0_module_hom_dims_match_endomorphisms() {
        let q = q_f2();
        let h0 = q.h0_category();
        let ya = h0_yoneda(&h0, q.field, 0);
        let basis = h0_module_hom_basis(&h0, &ya, &ya);
        assert_eq!(basis.len(), 1);
        assert!(h0_map_is_natural(&h0, &ya, &ya, &basis[0]));
    }
}
