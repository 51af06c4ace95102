//! Finitely presented dg-categories: finitely many objects, finite named
//! hom bases with exact structure constants for the differential and the
//! composition, plus the induced homotopy category H0.
//!
//! A presentation lists, for every ordered pair of objects, a basis of the
//! hom complex (names and degrees), the differential as a linear
//! combination per basis element, the composition table on basis pairs
//! (absent pairs compose to zero) and the identity of every object as a
//! combination. Validation enumerates every axiom instance over the basis:
//! unit laws, associativity on triples, the Leibniz rule on pairs, degree
//! additivity, and d.d = 0 on every hom complex.

use crate::complex::{Complex, CohomologySpace, GradedSpace};
use crate::field::{FieldSpec, Matrix, Scalar};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type ObjId = usize;

/// A linear combination of hom basis elements as (index, coefficient) pairs.
pub type Combination = Vec<(usize, Scalar)>;

/// Structure constants: table[(a, b, c)][(g, f)] is the combination g.f
/// in hom(a, c), for g in hom(b, c) and f in hom(a, b).
pub type ComposeTable = BTreeMap<(ObjId, ObjId, ObjId), BTreeMap<(usize, usize), Combination>>;

/// One named basis element of a hom complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElt {
    pub name: String,
    pub degree: i32,
}

/// Ordered basis of one hom complex together with its differential.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HomSpace {
    pub basis: Vec<BasisElt>,
    /// d[k]: differential of basis element k as a combination of basis
    /// indices; absent means zero.
    pub d: BTreeMap<usize, Vec<(usize, Scalar)>>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// A homogeneous element of one hom complex, in flat basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomElt {
    pub degree: i32,
    pub coords: BTreeMap<usize, Scalar>,
}

impl HomElt {
    pub fn zero(degree: i32) -> HomElt {
        HomElt { degree, coords: BTreeMap::new() }
    }

    pub fn basis(idx: usize, degree: i32, field: FieldSpec) -> HomElt {
        let mut coords = BTreeMap::new();
        coords.insert(idx, field.one());
        HomElt { degree, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn add(&self, other: &HomElt) -> HomElt {
        assert_eq!(self.degree, other.degree, "degree mismatch in element add");
        let mut coords = self.coords.clone();
        for (k, v) in &other.coords {
            let s = coords.get(k).map(|x| x.add(v)).unwrap_or_else(|| v.clone());
            if s.is_zero() {
                coords.remove(k);
            } else {
                coords.insert(*k, s);
            }
        }
        HomElt { degree: self.degree, coords }
    }

    pub fn scale(&self, c: &Scalar) -> HomElt {
        if c.is_zero() {
            return HomElt::zero(self.degree);
        }
        HomElt {
            degree: self.degree,
            coords: self.coords.iter().map(|(k, v)| (*k, v.mul(c))).collect(),
        }
    }

    pub fn neg(&self) -> HomElt {
        HomElt {
            degree: self.degree,
            coords: self.coords.iter().map(|(k, v)| (*k, v.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &HomElt) -> HomElt {
        self.add(&other.neg())
    }
}

/// Position of every basis element by degree, for passing between flat
/// basis indices and per-degree coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomIndexing {
    /// Flat indices carried by each degree, in declaration order.
    pub by_degree: BTreeMap<i32, Vec<usize>>,
    /// Flat index -> (degree, position within degree).
    pub flat: Vec<(i32, usize)>,
}

impl HomIndexing {
    pub fn new(space: &HomSpace) -> HomIndexing {
        let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        let mut flat = Vec::with_capacity(space.basis.len());
        for (k, b) in space.basis.iter().enumerate() {
            let list = by_degree.entry(b.degree).or_default();
            flat.push((b.degree, list.len()));
            list.push(k);
        }
        HomIndexing { by_degree, flat }
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.by_degree.get(&degree).map_or(0, |v| v.len())
    }

    /// Coordinates of a homogeneous element in its degree.
    pub fn encode(&self, elt: &HomElt, field: FieldSpec) -> Vec<Scalar> {
        let mut v = vec![field.zero(); self.dim(elt.degree)];
        for (k, c) in &elt.coords {
            let (deg, pos) = self.flat[*k];
            assert_eq!(deg, elt.degree, "element is not homogeneous of its nominal degree");
            v[pos] = c.clone();
        }
        v
    }

    pub fn decode(&self, degree: i32, coords: &[Scalar]) -> HomElt {
        let list = self.by_degree.get(&degree).map(Vec::as_slice).unwrap_or(&[]);
        assert_eq!(coords.len(), list.len(), "coordinate length mismatch");
        let mut out = BTreeMap::new();
        for (pos, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                out.insert(list[pos], c.clone());
            }
        }
        HomElt { degree, coords: out }
    }
}

/// A finitely presented dg-category over an exact field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgPresentation {
    pub field: FieldSpec,
    pub objects: Vec<String>,
    /// Hom spaces keyed by (source, target); absent means zero.
    pub homs: BTreeMap<(ObjId, ObjId), HomSpace>,
    /// Absent (g, f) pairs compose to zero.
    pub compose: ComposeTable,
    /// identity[a]: a combination in hom(a,a).
    pub identities: Vec<Combination>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatError {
    MissingHom { pair: (ObjId, ObjId) },
    BadIndex { context: String },
    DifferentialDegree { pair: (ObjId, ObjId), name: String },
    DifferentialSquare { pair: (ObjId, ObjId), name: String },
    CompositionDegree { triple: (ObjId, ObjId, ObjId), g: String, f: String },
    IdentityNotClosed { object: ObjId },
    IdentityDegree { object: ObjId },
    UnitLaw { pair: (ObjId, ObjId), name: String, side: &'static str },
    Associativity { g: String, f: String, h: String },
    Leibniz { g: String, f: String },
}

impl fmt::Display for CatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatError::MissingHom { pair } => write!(f, "no hom space declared for pair {pair:?}"),
            CatError::BadIndex { context } => write!(f, "basis index out of range in {context}"),
            CatError::DifferentialDegree { pair, name } => {
                write!(f, "d({name}) in hom{pair:?} is not homogeneous of degree |{name}|+1")
            }
            CatError::DifferentialSquare { pair, name } => {
                write!(f, "d(d({name})) is nonzero in hom{pair:?}")
            }
            CatError::CompositionDegree { triple, g, f: ff } => {
                write!(f, "composite {g}.{ff} in triple {triple:?} is not homogeneous of the right degree")
            }
            CatError::IdentityNotClosed { object } => write!(f, "identity of object {object} is not closed"),
            CatError::IdentityDegree { object } => write!(f, "identity of object {object} is not of degree 0"),
            CatError::UnitLaw { pair, name, side } => {
                write!(f, "unit law fails on the {side} for {name} in hom{pair:?}")
            }
            CatError::Associativity { g, f: ff, h } => {
                write!(f, "associativity fails on ({h}, {g}, {ff})")
            }
            CatError::Leibniz { g, f: ff } => write!(f, "Leibniz rule fails on ({g}, {ff})"),
        }
    }
}

impl DgPresentation {
    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn hom(&self, a: ObjId, b: ObjId) -> &HomSpace {
        self.homs.get(&(a, b)).unwrap_or_else(|| panic!("no hom space for ({a},{b})"))
    }

    /// The differential applied to an element of hom(a, b).
    pub fn d_elt(&self, a: ObjId, b: ObjId, elt: &HomElt) -> HomElt {
        let space = self.hom(a, b);
        let mut out = HomElt::zero(elt.degree + 1);
        for (k, c) in &elt.coords {
            if let Some(comb) = space.d.get(k) {
                for (j, x) in comb {
                    let term = HomElt::basis(*j, elt.degree + 1, self.field).scale(&x.mul(c));
                    out = out.add(&term);
                }
            }
        }
        out
    }

    /// Composition g . f for g in hom(b, c), f in hom(a, b).
    pub fn compose_elt(&self, a: ObjId, b: ObjId, c: ObjId, g: &HomElt, f: &HomElt) -> HomElt {
        let table = self.compose.get(&(a, b, c));
        let mut out = HomElt::zero(g.degree + f.degree);
        let Some(table) = table else { return out };
        for (gi, gc) in &g.coords {
            for (fi, fc) in &f.coords {
                if let Some(comb) = table.get(&(*gi, *fi)) {
                    let coeff = gc.mul(fc);
                    for (j, x) in comb {
                        out = out.add(&HomElt::basis(*j, out.degree, self.field).scale(&x.mul(&coeff)));
                    }
                }
            }
        }
        out
    }

    pub fn identity_elt(&self, a: ObjId) -> HomElt {
        let mut coords = BTreeMap::new();
        for (k, c) in &self.identities[a] {
            coords.insert(*k, c.clone());
        }
        HomElt { degree: 0, coords }
    }

    /// The hom complex of a pair, with its basis indexing.
    pub fn hom_complex_of(&self, a: ObjId, b: ObjId) -> (Complex, HomIndexing) {
        let space = self.hom(a, b);
        let indexing = HomIndexing::new(space);
        let dims: BTreeMap<i32, usize> =
            indexing.by_degree.iter().map(|(d, v)| (*d, v.len())).collect();
        let mut d_mats: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (k, comb) in &space.d {
            let (deg, pos) = indexing.flat[*k];
            let m = d_mats
                .entry(deg)
                .or_insert_with(|| Matrix::zero(self.field, indexing.dim(deg + 1), indexing.dim(deg)));
            for (j, x) in comb {
                let (jdeg, jpos) = indexing.flat[*j];
                assert_eq!(jdeg, deg + 1, "differential table is not of degree +1");
                let cur = m.get(jpos, pos).add(x);
                m.set(jpos, pos, cur);
            }
        }
        let complex = Complex::new(self.field, GradedSpace::new(dims), d_mats)
            .expect("hom complex of a validated presentation");
        (complex, indexing)
    }

    /// Exhaustive axiom check over the finite basis.
    pub fn validate(&self) -> Result<(), CatError> {
        let n = self.object_count();
        // Every pair must have a (possibly empty) hom space, every object
        // an identity.
        for a in 0..n {
            for b in 0..n {
                if !self.homs.contains_key(&(a, b)) {
                    return Err(CatError::MissingHom { pair: (a, b) });
                }
            }
        }
        if self.identities.len() != n {
            return Err(CatError::BadIndex { context: "identities list".into() });
        }

        // Differential tables: index ranges, degree +1, d.d = 0.
        for (pair, space) in &self.homs {
            for (k, comb) in &space.d {
                if *k >= space.dim() {
                    return Err(CatError::BadIndex { context: format!("d table of hom{pair:?}") });
                }
                let deg = space.basis[*k].degree;
                for (j, _) in comb {
                    if *j >= space.dim() {
                        return Err(CatError::BadIndex { context: format!("d table of hom{pair:?}") });
                    }
                    if space.basis[*j].degree != deg + 1 {
                        return Err(CatError::DifferentialDegree {
                            pair: *pair,
                            name: space.basis[*k].name.clone(),
                        });
                    }
                }
            }
            for k in 0..space.dim() {
                let e = HomElt::basis(k, space.basis[k].degree, self.field);
                let dd = self.d_elt(pair.0, pair.1, &self.d_elt(pair.0, pair.1, &e));
                if !dd.is_zero() {
                    return Err(CatError::DifferentialSquare {
                        pair: *pair,
                        name: space.basis[k].name.clone(),
                    });
                }
            }
        }

        // Identities: degree 0, closed.
        for a in 0..n {
            let space = self.hom(a, a);
            for (k, _) in &self.identities[a] {
                if *k >= space.dim() {
                    return Err(CatError::BadIndex { context: format!("identity of object {a}") });
                }
                if space.basis[*k].degree != 0 {
                    return Err(CatError::IdentityDegree { object: a });
                }
            }
            if !self.d_elt(a, a, &self.identity_elt(a)).is_zero() {
                return Err(CatError::IdentityNotClosed { object: a });
            }
        }

        // Composition tables: index ranges and degree additivity.
        for (triple, table) in &self.compose {
            let (a, b, c) = *triple;
            let hab = self.hom(a, b);
            let hbc = self.hom(b, c);
            let hac = self.hom(a, c);
            for ((gi, fi), comb) in table {
                if *gi >= hbc.dim() || *fi >= hab.dim() {
                    return Err(CatError::BadIndex { context: format!("compose table {triple:?}") });
                }
                let want = hbc.basis[*gi].degree + hab.basis[*fi].degree;
                for (j, _) in comb {
                    if *j >= hac.dim() {
                        return Err(CatError::BadIndex { context: format!("compose table {triple:?}") });
                    }
                    if hac.basis[*j].degree != want {
                        return Err(CatError::CompositionDegree {
                            triple: *triple,
                            g: hbc.basis[*gi].name.clone(),
                            f: hab.basis[*fi].name.clone(),
                        });
                    }
                }
            }
        }

        // Unit laws on every basis element.
        for (&(a, b), space) in &self.homs {
            for k in 0..space.dim() {
                let e = HomElt::basis(k, space.basis[k].degree, self.field);
                let left = self.compose_elt(a, b, b, &self.identity_elt(b), &e);
                if left != e {
                    return Err(CatError::UnitLaw {
                        pair: (a, b),
                        name: space.basis[k].name.clone(),
                        side: "left",
                    });
                }
                let right = self.compose_elt(a, a, b, &e, &self.identity_elt(a));
                if right != e {
                    return Err(CatError::UnitLaw {
                        pair: (a, b),
                        name: space.basis[k].name.clone(),
                        side: "right",
                    });
                }
            }
        }

        // Associativity on every composable basis triple.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let hab = self.hom(a, b);
                        let hbc = self.hom(b, c);
                        let hce = self.hom(c, e);
                        for fi in 0..hab.dim() {
                            let f = HomElt::basis(fi, hab.basis[fi].degree, self.field);
                            for gi in 0..hbc.dim() {
                                let g = HomElt::basis(gi, hbc.basis[gi].degree, self.field);
                                for hi in 0..hce.dim() {
                                    let h = HomElt::basis(hi, hce.basis[hi].degree, self.field);
                                    let gf = self.compose_elt(a, b, c, &g, &f);
                                    let lhs = self.compose_elt(a, c, e, &h, &gf);
                                    let hg = self.compose_elt(b, c, e, &h, &g);
                                    let rhs = self.compose_elt(a, b, e, &hg, &f);
                                    if lhs != rhs {
                                        return Err(CatError::Associativity {
                                            h: hce.basis[hi].name.clone(),
                                            g: hbc.basis[gi].name.clone(),
                                            f: hab.basis[fi].name.clone(),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        // Leibniz rule on every composable basis pair:
        // d(g.f) = d(g).f + (-1)^|g| g.d(f).
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let hab = self.hom(a, b);
                    let hbc = self.hom(b, c);
                    for fi in 0..hab.dim() {
                        let f = HomElt::basis(fi, hab.basis[fi].degree, self.field);
                        let df = self.d_elt(a, b, &f);
                        for gi in 0..hbc.dim() {
                            let g = HomElt::basis(gi, hbc.basis[gi].degree, self.field);
                            let dg = self.d_elt(b, c, &g);
                            let lhs = self.d_elt(a, c, &self.compose_elt(a, b, c, &g, &f));
                            let sign = if g.degree.rem_euclid(2) == 0 { 1 } else { -1 };
                            let rhs = self
                                .compose_elt(a, b, c, &dg, &f)
                                .add(&self.compose_elt(a, b, c, &g, &df).scale(&self.field.from_i64(sign)));
                            if lhs != rhs {
                                return Err(CatError::Leibniz {
                                    g: hbc.basis[gi].name.clone(),
                                    f: hab.basis[fi].name.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }

        Ok(())
    }

    /// All hom complexes must have vanishing cohomology in positive
    /// degrees; returns the first witness otherwise.
    pub fn check_nonpositive_cohomology(&self) -> Result<(), (ObjId, ObjId, i32, usize)> {
        for (&(a, b), space) in &self.homs {
            let top = space.basis.iter().map(|e| e.degree).max().unwrap_or(0);
            if top < 1 {
                continue;
            }
            let (complex, _) = self.hom_complex_of(a, b);
            for i in 1..=top {
                let dim = complex.cohomology(i).dim();
                if dim > 0 {
                    return Err((a, b, i, dim));
                }
            }
        }
        Ok(())
    }

    /// The opposite presentation: hom(a,b) becomes hom(b,a) and the
    /// composition gains the Koszul sign (-1)^(|f| |g|).
    pub fn opposite(&self) -> DgPresentation {
        let homs: BTreeMap<(ObjId, ObjId), HomSpace> =
            self.homs.iter().map(|(&(a, b), s)| ((b, a), s.clone())).collect();
        let mut compose: ComposeTable = BTreeMap::new();
        for (&(a, b, c), table) in &self.compose {
            // Original: g in hom(b,c), f in hom(a,b), result in hom(a,c).
            // Opposite triple (c, b, a): g' in hom_op(b,a) = hom(a,b),
            // f' in hom_op(c,b) = hom(b,c); result (-1)^(|f'||g'|) f'.g'
            // read through the original table at (f', g').
            let entry = compose.entry((c, b, a)).or_default();
            for (&(gi, fi), comb) in table {
                let dg = self.hom(b, c).basis[gi].degree;
                let df = self.hom(a, b).basis[fi].degree;
                let sign = if (dg * df).rem_euclid(2) == 0 { 1 } else { -1 };
                let signed: Vec<(usize, Scalar)> = comb
                    .iter()
                    .map(|(j, x)| (*j, x.mul(&self.field.from_i64(sign))))
                    .collect();
                entry.insert((fi, gi), signed);
            }
        }
        DgPresentation {
            field: self.field,
            objects: self.objects.clone(),
            homs,
            compose,
            identities: self.identities.clone(),
        }
    }

    /// H0: degree-0 cocycles modulo coboundaries for every pair, with the
    /// induced composition re-verified to be associative and unital.
    pub fn h0_category(&self) -> H0Category {
        let n = self.object_count();
        let mut pairs = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let (complex, indexing) = self.hom_complex_of(a, b);
                let coh = complex.cohomology(0);
                pairs.insert((a, b), H0Pair { indexing, coh });
            }
        }
        let cat = H0Category {
            field: self.field,
            objects: self.objects.clone(),
            pairs,
            compose: BTreeMap::new(),
            identity: Vec::new(),
        };
        let mut compose = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let gd = cat.dim(b, c);
                    let fd = cat.dim(a, b);
                    if gd == 0 || fd == 0 || cat.dim(a, c) == 0 {
                        continue;
                    }
                    let mut table = Vec::with_capacity(gd);
                    for gi in 0..gd {
                        let g = cat.rep_elt(b, c, gi);
                        let mut row = Vec::with_capacity(fd);
                        for fi in 0..fd {
                            let f = cat.rep_elt(a, b, fi);
                            let gf = self.compose_elt(a, b, c, &g, &f);
                            let coords = cat
                                .project(self, a, c, &gf)
                                .expect("composite of cocycles is a cocycle");
                            row.push(coords);
                        }
                        table.push(row);
                    }
                    compose.insert((a, b, c), table);
                }
            }
        }
        let identity = (0..n)
            .map(|a| {
                cat.project(self, a, a, &self.identity_elt(a))
                    .expect("identity is a cocycle")
            })
            .collect();
        let out = H0Category { compose, identity, ..cat };
        out.verify().expect("induced H0 composition must be associative and unital");
        out
    }
}

#[derive(Clone, Debug)]
pub struct H0Pair {
    pub indexing: HomIndexing,
    pub coh: CohomologySpace,
}

/// table[g][f] = coordinates of g.f in a chosen representative basis.
pub type CoordTable = Vec<Vec<Vec<Scalar>>>;

/// The homotopy category: H0 of every hom complex with chosen cocycle
/// representatives and the induced composition in those coordinates.
#[derive(Clone, Debug)]
pub struct H0Category {
    pub field: FieldSpec,
    pub objects: Vec<String>,
    pairs: BTreeMap<(ObjId, ObjId), H0Pair>,
    /// compose[(a,b,c)][g][f] = coordinates in the rep basis of (a,c).
    pub compose: BTreeMap<(ObjId, ObjId, ObjId), CoordTable>,
    /// identity[a] in the rep basis of (a,a).
    pub identity: Vec<Vec<Scalar>>,
}

impl H0Category {
    pub fn dim(&self, a: ObjId, b: ObjId) -> usize {
        self.pairs[&(a, b)].coh.dim()
    }

    /// The chosen degree-0 cocycle representing basis class k, as a hom
    /// element of the underlying dg-category.
    pub fn rep_elt(&self, a: ObjId, b: ObjId, k: usize) -> HomElt {
        let pair = &self.pairs[&(a, b)];
        pair.indexing.decode(0, &pair.coh.reps[k])
    }

    /// Class coordinates of a degree-0 cocycle; None when not a cocycle.
    pub fn project(&self, q: &DgPresentation, a: ObjId, b: ObjId, elt: &HomElt) -> Option<Vec<Scalar>> {
        assert_eq!(elt.degree, 0, "projection takes degree-0 elements");
        let pair = &self.pairs[&(a, b)];
        let v = pair.indexing.encode(elt, q.field);
        pair.coh.class_coords(&v)
    }

    /// Bilinear extension of the induced composition.
    pub fn compose_coords(
        &self,
        a: ObjId,
        b: ObjId,
        c: ObjId,
        g: &[Scalar],
        f: &[Scalar],
    ) -> Vec<Scalar> {
        let out_dim = self.dim(a, c);
        let mut out = vec![self.field.zero(); out_dim];
        let Some(table) = self.compose.get(&(a, b, c)) else { return out };
        for (gi, gc) in g.iter().enumerate() {
            if gc.is_zero() {
                continue;
            }
            for (fi, fc) in f.iter().enumerate() {
                if fc.is_zero() {
                    continue;
                }
                let coeff = gc.mul(fc);
                for (j, x) in table[gi][fi].iter().enumerate() {
                    out[j] = out[j].add(&x.mul(&coeff));
                }
            }
        }
        out
    }

    /// Re-verify associativity and unit laws of the induced structure.
    pub fn verify(&self) -> Result<(), String> {
        let n = self.objects.len();
        let unit = |a: ObjId| self.identity[a].clone();
        for a in 0..n {
            for b in 0..n {
                let d = self.dim(a, b);
                for k in 0..d {
                    let mut e = vec![self.field.zero(); d];
                    e[k] = self.field.one();
                    let left = self.compose_coords(a, b, b, &unit(b), &e);
                    let right = self.compose_coords(a, a, b, &e, &unit(a));
                    if left != e || right != e {
                        return Err(format!("H0 unit law fails at pair ({a},{b}) class {k}"));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        for fi in 0..self.dim(a, b) {
                            for gi in 0..self.dim(b, c) {
                                for hi in 0..self.dim(c, e) {
                                    let mut f = vec![self.field.zero(); self.dim(a, b)];
                                    f[fi] = self.field.one();
                                    let mut g = vec![self.field.zero(); self.dim(b, c)];
                                    g[gi] = self.field.one();
                                    let mut h = vec![self.field.zero(); self.dim(c, e)];
                                    h[hi] = self.field.one();
                                    let gf = self.compose_coords(a, b, c, &g, &f);
                                    let lhs = self.compose_coords(a, c, e, &h, &gf);
                                    let hg = self.compose_coords(b, c, e, &h, &g);
                                    let rhs = self.compose_coords(a, b, e, &hg, &f);
                                    if lhs != rhs {
                                        return Err(format!(
                                            "H0 associativity fails at ({a},{b},{c},{e}) classes ({hi},{gi},{fi})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Incremental construction of a presentation. Missing hom spaces are
/// filled in empty at build time; composition rules and differentials
/// are entered with integer coefficients for brevity.
#[derive(Clone, Debug)]
pub struct PresentationBuilder {
    field: FieldSpec,
    objects: Vec<String>,
    homs: BTreeMap<(ObjId, ObjId), HomSpace>,
    compose: ComposeTable,
    identities: BTreeMap<ObjId, Combination>,
}

impl PresentationBuilder {
    pub fn new(field: FieldSpec) -> PresentationBuilder {
        PresentationBuilder {
            field,
            objects: Vec::new(),
            homs: BTreeMap::new(),
            compose: BTreeMap::new(),
            identities: BTreeMap::new(),
        }
    }

    pub fn object(&mut self, name: &str) -> ObjId {
        self.objects.push(name.to_string());
        self.objects.len() - 1
    }

    pub fn basis(&mut self, a: ObjId, b: ObjId, name: &str, degree: i32) -> usize {
        let space = self.homs.entry((a, b)).or_default();
        space.basis.push(BasisElt { name: name.to_string(), degree });
        space.basis.len() - 1
    }

    pub fn d(&mut self, a: ObjId, b: ObjId, from: usize, terms: &[(usize, i64)]) {
        let comb = terms.iter().map(|(j, c)| (*j, self.field.from_i64(*c))).collect();
        self.homs.entry((a, b)).or_default().d.insert(from, comb);
    }

    pub fn rule(&mut self, a: ObjId, b: ObjId, c: ObjId, g: usize, f: usize, terms: &[(usize, i64)]) {
        let comb: Vec<(usize, Scalar)> =
            terms.iter().map(|(j, x)| (*j, self.field.from_i64(*x))).collect();
        self.compose.entry((a, b, c)).or_default().insert((g, f), comb);
    }

    pub fn identity(&mut self, a: ObjId, terms: &[(usize, i64)]) {
        let comb = terms.iter().map(|(j, c)| (*j, self.field.from_i64(*c))).collect();
        self.identities.insert(a, comb);
    }

    pub fn build(self) -> DgPresentation {
        let n = self.objects.len();
        let mut homs = self.homs;
        for a in 0..n {
            for b in 0..n {
                homs.entry((a, b)).or_default();
            }
        }
        let identities = (0..n)
            .map(|a| self.identities.get(&a).cloned().unwrap_or_default())
            .collect();
        DgPresentation {
            field: self.field,
            objects: self.objects,
            homs,
            compose: self.compose,
            identities,
        }
    }
}

/// A dg-functor between presentations, given on objects and hom bases.
#[derive(Clone, Debug)]
pub struct DgFunctor {
    pub source: Arc<DgPresentation>,
    pub target: Arc<DgPresentation>,
    pub object_map: Vec<ObjId>,
    /// hom_maps[(a,b)][k]: image of basis element k of hom_source(a,b) as
    /// an element of hom_target(F a, F b) of the same degree.
    pub hom_maps: BTreeMap<(ObjId, ObjId), Vec<HomElt>>,
}

impl DgFunctor {
    pub fn apply_elt(&self, a: ObjId, b: ObjId, elt: &HomElt) -> HomElt {
        let images = &self.hom_maps[&(a, b)];
        let mut out = HomElt::zero(elt.degree);
        for (k, c) in &elt.coords {
            out = out.add(&images[*k].scale(c));
        }
        out
    }

    /// Check degrees, differentials, identities and compositions.
    pub fn validate(&self) -> Result<(), String> {
        let s = &self.source;
        let t = &self.target;
        if self.object_map.len() != s.object_count() {
            return Err("object map has the wrong length".into());
        }
        for (&(a, b), space) in &s.homs {
            let images = self
                .hom_maps
                .get(&(a, b))
                .ok_or_else(|| format!("no hom map for pair ({a},{b})"))?;
            if images.len() != space.dim() {
                return Err(format!("hom map for ({a},{b}) has the wrong length"));
            }
            let (fa, fb) = (self.object_map[a], self.object_map[b]);
            for (k, img) in images.iter().enumerate() {
                if img.degree != space.basis[k].degree {
                    return Err(format!("image of {} changes degree", space.basis[k].name));
                }
                let lhs = self.apply_elt(a, b, &s.d_elt(a, b, &HomElt::basis(k, space.basis[k].degree, s.field)));
                let rhs = t.d_elt(fa, fb, img);
                if lhs != rhs {
                    return Err(format!("differential not preserved on {}", space.basis[k].name));
                }
            }
        }
        for a in 0..s.object_count() {
            let img = self.apply_elt(a, a, &s.identity_elt(a));
            if img != t.identity_elt(self.object_map[a]) {
                return Err(format!("identity of object {a} not preserved"));
            }
        }
        for a in 0..s.object_count() {
            for b in 0..s.object_count() {
                for c in 0..s.object_count() {
                    let hab = s.hom(a, b);
                    let hbc = s.hom(b, c);
                    let (fa, fb, fc) = (self.object_map[a], self.object_map[b], self.object_map[c]);
                    for fi in 0..hab.dim() {
                        for gi in 0..hbc.dim() {
                            let f = HomElt::basis(fi, hab.basis[fi].degree, s.field);
                            let g = HomElt::basis(gi, hbc.basis[gi].degree, s.field);
                            let lhs = self.apply_elt(a, c, &s.compose_elt(a, b, c, &g, &f));
                            let rhs = t.compose_elt(
                                fa,
                                fb,
                                fc,
                                &self.apply_elt(b, c, &g),
                                &self.apply_elt(a, b, &f),
                            );
                            if lhs != rhs {
                                return Err(format!(
                                    "composition not preserved on ({}, {})",
                                    hbc.basis[gi].name, hab.basis[fi].name
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
