//! Built-in example categories used across the test suites and shipped
//! as data files: a point, an exterior algebra on one generator of
//! degree -1, and a point thickened by a contractible pair in degrees
//! 0 and 1. Also provides deliberately broken variants, each violating
//! exactly one validation axiom, for detection tests.

use crate::category::{DgPresentation, PresentationBuilder};
use crate::field::FieldSpec;

/// One object, hom = k.id in degree 0, zero differential.
pub fn point(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// One object, basis {1, eps} with |eps| = -1, eps.eps = 0, d = 0.
/// The endomorphism cohomology is k in degrees 0 and -1.
pub fn exterior(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    let eps = b.basis(s, s, "eps", -1);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    b.rule(s, s, s, one, eps, &[(eps, 1)]);
    b.rule(s, s, s, eps, one, &[(eps, 1)]);
    b.rule(s, s, s, eps, eps, &[]);
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// One object, basis {1, w, u} with |w| = 0, |u| = 1, dw = u, and all
/// products among {w, u} zero. The pair (w, u) is a contractible
/// summand of the endomorphism complex, so H = k.[1] in degree 0 and
/// the positive part is acyclic.
pub fn contractible_pair(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    let w = b.basis(s, s, "w", 0);
    let u = b.basis(s, s, "u", 1);
    b.d(s, s, w, &[(u, 1)]);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    b.rule(s, s, s, one, w, &[(w, 1)]);
    b.rule(s, s, s, w, one, &[(w, 1)]);
    b.rule(s, s, s, one, u, &[(u, 1)]);
    b.rule(s, s, s, u, one, &[(u, 1)]);
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// The contractible-pair category with the differential removed, so u
/// survives as a cohomology class in degree 1. A valid dg-category
/// whose hom cohomology is not concentrated in nonpositive degrees.
pub fn positive_class(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    let w = b.basis(s, s, "w", 0);
    let u = b.basis(s, s, "u", 1);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    b.rule(s, s, s, one, w, &[(w, 1)]);
    b.rule(s, s, s, w, one, &[(w, 1)]);
    b.rule(s, s, s, one, u, &[(u, 1)]);
    b.rule(s, s, s, u, one, &[(u, 1)]);
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// The exterior category padded by a contractible pair {x, y} with
/// |x| = -1, dx = y. Quasi-equivalent to `exterior`, with strictly
/// larger hom spaces; used for invariance tests.
pub fn exterior_padded(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    let eps = b.basis(s, s, "eps", -1);
    let x = b.basis(s, s, "x", -1);
    let y = b.basis(s, s, "y", 0);
    b.d(s, s, x, &[(y, 1)]);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    for &k in &[eps, x, y] {
        b.rule(s, s, s, one, k, &[(k, 1)]);
        b.rule(s, s, s, k, one, &[(k, 1)]);
    }
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// One object, basis {1, a, b} with |a| = -1, da = b, zero products
/// among {a, b}. H = k.[1] in degree 0, but the chosen degree-0
/// cocycle space is 2-dimensional; exercises representative handling.
pub fn contractible_pair_below(field: FieldSpec) -> DgPresentation {
    let mut b = PresentationBuilder::new(field);
    let s = b.object("*");
    let one = b.basis(s, s, "1", 0);
    let a = b.basis(s, s, "a", -1);
    let bb = b.basis(s, s, "b", 0);
    b.d(s, s, a, &[(bb, 1)]);
    b.rule(s, s, s, one, one, &[(one, 1)]);
    b.rule(s, s, s, one, a, &[(a, 1)]);
    b.rule(s, s, s, a, one, &[(a, 1)]);
    b.rule(s, s, s, one, bb, &[(bb, 1)]);
    b.rule(s, s, s, bb, one, &[(bb, 1)]);
    b.identity(s, &[(one, 1)]);
    b.build()
}

/// The three presentations shipped as data files, with their labels.
pub fn shipped(field: FieldSpec) -> Vec<(&'static str, DgPresentation)> {
    vec![
        ("F1", point(field)),
        ("F2", exterior(field)),
        ("F4", contractible_pair(field)),
    ]
}

/// Ten presentations, each obtained from a valid one by a single
/// mutation and each violating exactly one validation axiom. The label
/// names the broken axiom; the validator must reject every entry.
pub fn corruptions(field: FieldSpec) -> Vec<(&'static str, DgPresentation)> {
    let mut out = Vec::new();

    // d lands in the wrong degree: dw = w.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let w = b.basis(s, s, "w", 0);
        let u = b.basis(s, s, "u", 1);
        b.d(s, s, w, &[(w, 1)]);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, w, &[(w, 1)]);
        b.rule(s, s, s, w, one, &[(w, 1)]);
        b.rule(s, s, s, one, u, &[(u, 1)]);
        b.rule(s, s, s, u, one, &[(u, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("d-wrong-degree", b.build()));
    }

    // d.d != 0: a three-step chain da = b, db = c.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let a = b.basis(s, s, "a", -1);
        let bb = b.basis(s, s, "b", 0);
        let c = b.basis(s, s, "c", 1);
        b.d(s, s, a, &[(bb, 1)]);
        b.d(s, s, bb, &[(c, 1)]);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        for &k in &[a, bb, c] {
            b.rule(s, s, s, one, k, &[(k, 1)]);
            b.rule(s, s, s, k, one, &[(k, 1)]);
        }
        b.identity(s, &[(one, 1)]);
        out.push(("d-square-nonzero", b.build()));
    }

    // Left unit law broken: id.eps composes to 0.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let eps = b.basis(s, s, "eps", -1);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, eps, one, &[(eps, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("unit-left-broken", b.build()));
    }

    // Right unit law broken: eps.id composes to 0.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let eps = b.basis(s, s, "eps", -1);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, eps, &[(eps, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("unit-right-broken", b.build()));
    }

    // Identity not closed: declared as 1 + w with dw = u.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let w = b.basis(s, s, "w", 0);
        let u = b.basis(s, s, "u", 1);
        b.d(s, s, w, &[(u, 1)]);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, w, &[(w, 1)]);
        b.rule(s, s, s, w, one, &[(w, 1)]);
        b.rule(s, s, s, one, u, &[(u, 1)]);
        b.rule(s, s, s, u, one, &[(u, 1)]);
        b.identity(s, &[(one, 1), (w, 1)]);
        out.push(("identity-not-closed", b.build()));
    }

    // Identity of nonzero degree: declared as eps.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let eps = b.basis(s, s, "eps", -1);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, eps, &[(eps, 1)]);
        b.rule(s, s, s, eps, one, &[(eps, 1)]);
        b.identity(s, &[(eps, 1)]);
        out.push(("identity-wrong-degree", b.build()));
    }

    // Composition not degree-additive: eps.eps = 1 (degree -2 vs 0).
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let eps = b.basis(s, s, "eps", -1);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, eps, &[(eps, 1)]);
        b.rule(s, s, s, eps, one, &[(eps, 1)]);
        b.rule(s, s, s, eps, eps, &[(one, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("composition-wrong-degree", b.build()));
    }

    // Associativity broken: in k{1, s, t} with s.s = t, change s.t
    // from 0 to 1, so s.(s.t) = s but (s.s).t = t.t = 0.
    {
        let mut b = PresentationBuilder::new(field);
        let s0 = b.object("*");
        let one = b.basis(s0, s0, "1", 0);
        let s = b.basis(s0, s0, "s", 0);
        let t = b.basis(s0, s0, "t", 0);
        b.rule(s0, s0, s0, one, one, &[(one, 1)]);
        for &k in &[s, t] {
            b.rule(s0, s0, s0, one, k, &[(k, 1)]);
            b.rule(s0, s0, s0, k, one, &[(k, 1)]);
        }
        b.rule(s0, s0, s0, s, s, &[(t, 1)]);
        b.rule(s0, s0, s0, s, t, &[(one, 1)]);
        b.rule(s0, s0, s0, t, s, &[]);
        b.rule(s0, s0, s0, t, t, &[]);
        b.identity(s0, &[(one, 1)]);
        out.push(("associativity-broken", b.build()));
    }

    // Leibniz broken: w.w = w while dw = u and w.u = u.w = 0, so
    // d(w.w) = u but dw.w + w.dw = 0.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let w = b.basis(s, s, "w", 0);
        let u = b.basis(s, s, "u", 1);
        b.d(s, s, w, &[(u, 1)]);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, w, &[(w, 1)]);
        b.rule(s, s, s, w, one, &[(w, 1)]);
        b.rule(s, s, s, one, u, &[(u, 1)]);
        b.rule(s, s, s, u, one, &[(u, 1)]);
        b.rule(s, s, s, w, w, &[(w, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("leibniz-broken", b.build()));
    }

    // Composition table referencing a basis index out of range.
    {
        let mut b = PresentationBuilder::new(field);
        let s = b.object("*");
        let one = b.basis(s, s, "1", 0);
        let eps = b.basis(s, s, "eps", -1);
        b.rule(s, s, s, one, one, &[(one, 1)]);
        b.rule(s, s, s, one, eps, &[(eps, 1)]);
        b.rule(s, s, s, eps, one, &[(eps, 1)]);
        b.rule(s, s, s, eps, eps, &[(7, 1)]);
        b.identity(s, &[(one, 1)]);
        out.push(("index-out-of-range", b.build()));
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::{CatError, DgFunctor, HomElt};
    use std::sync::Arc;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    #[test]
    fn base_fixtures_validate() {
        for (label, cat) in shipped(q()) {
            assert!(cat.validate().is_ok(), "{label} failed validation");
        }
        assert!(exterior_padded(q()).validate().is_ok());
        assert!(contractible_pair_below(q()).validate().is_ok());
        assert!(positive_class(q()).validate().is_ok());
    }

    #[test]
    fn corruptions_are_detected() {
        use std::mem::discriminant;
        let expected = [
            discriminant(&CatError::DifferentialDegree { pair: (0, 0), name: String::new() }),
            discriminant(&CatError::DifferentialSquare { pair: (0, 0), name: String::new() }),
            discriminant(&CatError::UnitLaw { pair: (0, 0), name: String::new(), side: "left" }),
            discriminant(&CatError::UnitLaw { pair: (0, 0), name: String::new(), side: "right" }),
            discriminant(&CatError::IdentityNotClosed { object: 0 }),
            discriminant(&CatError::IdentityDegree { object: 0 }),
            discriminant(&CatError::CompositionDegree {
                triple: (0, 0, 0),
                g: String::new(),
                f: String::new(),
            }),
            discriminant(&CatError::Associativity {
                g: String::new(),
                f: String::new(),
                h: String::new(),
            }),
            discriminant(&CatError::Leibniz { g: String::new(), f: String::new() }),
            discriminant(&CatError::BadIndex { context: String::new() }),
        ];
        let list = corruptions(q());
        assert_eq!(list.len(), 10);
        for ((label, cat), want) in list.iter().zip(expected) {
            let err = cat.validate().expect_err(&format!("{label} should fail validation"));
            assert_eq!(discriminant(&err), want, "{label} reported {err}");
        }
    }

    #[test]
    fn exterior_endomorphism_cohomology() {
        let cat = exterior(q());
        let (cx, _) = cat.hom_complex_of(0, 0);
        assert_eq!(cx.cohomology(0).dim(), 1);
        assert_eq!(cx.cohomology(-1).dim(), 1);
        assert_eq!(cx.cohomology(1).dim(), 0);
    }

    #[test]
    fn contractible_pair_has_point_cohomology() {
        let cat = contractible_pair(q());
        let (cx, indexing) = cat.hom_complex_of(0, 0);
        assert_eq!(cx.cohomology(0).dim(), 1);
        assert_eq!(cx.cohomology(1).dim(), 0);
        assert!(cat.check_nonpositive_cohomology().is_ok());
        // The surviving class is the identity.
        let h0 = cat.h0_category();
        assert_eq!(h0.dim(0, 0), 1);
        let id_class = h0.project(&cat, 0, 0, &cat.identity_elt(0)).unwrap();
        assert!(!id_class[0].is_zero());
        let _ = indexing;
    }

    #[test]
    fn positive_class_fails_nonpositive_check() {
        let cat = positive_class(q());
        assert!(cat.validate().is_ok());
        let (a, b, deg, dim) = cat.check_nonpositive_cohomology().unwrap_err();
        assert_eq!((a, b, deg, dim), (0, 0, 1, 1));
    }

    #[test]
    fn opposite_is_an_involution() {
        for (label, cat) in shipped(q()) {
            let op = cat.opposite();
            assert!(op.validate().is_ok(), "opposite of {label} invalid");
            assert_eq!(op.opposite(), cat, "double opposite of {label} differs");
        }
    }

    #[test]
    fn h0_of_exterior_padded_matches_exterior() {
        let small = exterior(q());
        let big = exterior_padded(q());
        assert_eq!(small.h0_category().dim(0, 0), 1);
        assert_eq!(big.h0_category().dim(0, 0), 1);
        let (cx, _) = big.hom_complex_of(0, 0);
        assert_eq!(cx.cohomology(-1).dim(), 1);
    }

    #[test]
    fn inclusion_functor_validates_and_degree_errors_are_caught() {
        let small = Arc::new(exterior(q()));
        let big = Arc::new(exterior_padded(q()));
        let mut hom_maps = std::collections::BTreeMap::new();
        hom_maps.insert(
            (0, 0),
            vec![HomElt::basis(0, 0, q()), HomElt::basis(1, -1, q())],
        );
        let inc = DgFunctor {
            source: small.clone(),
            target: big.clone(),
            object_map: vec![0],
            hom_maps,
        };
        assert!(inc.validate().is_ok());

        // Sending eps to the degree-0 element y must be rejected.
        let mut bad_maps = std::collections::BTreeMap::new();
        bad_maps.insert(
            (0, 0),
            vec![HomElt::basis(0, 0, q()), HomElt::basis(3, 0, q())],
        );
        let bad = DgFunctor { source: small, target: big, object_map: vec![0], hom_maps: bad_maps };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn h0_with_perturbed_representatives_still_composes() {
        // In the contractible-pair-below category the degree-0 cocycles
        // are spanned by 1 and b with b a coboundary; H0 must be one
        // class and composition must be well defined on it.
        let cat = contractible_pair_below(q());
        let h0 = cat.h0_category();
        assert_eq!(h0.dim(0, 0), 1);
        let rep = h0.rep_elt(0, 0, 0);
        let sq = cat.compose_elt(0, 0, 0, &rep, &rep);
        let class = h0.project(&cat, 0, 0, &sq).unwrap();
        let direct = h0.compose_coords(0, 0, 0, &[q().one()], &[q().one()]);
        assert_eq!(class, direct);
    }
}
