//! File formats: categories, modules, twisted complexes and their
//! morphisms as versioned JSON, plus plain-text trace output.
//!
//! Every format opens with a `"format": 1` key.  Scalars travel as
//! strings, `"a/b"` or `"a"` over the rationals and a plain residue mod
//! p.  Basis names are required to be unique across the whole category,
//! which lets modules and twisted data refer to hom elements by name
//! alone.  Files other than categories embed a relative path to their
//! category file; readers resolve it against the referring file's
//! directory.  Writers emit keys in a fixed order with sorted maps, so
//! equal values produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::category::{BasisElt, DgPresentation, HomElt, HomSpace, ObjId};
use crate::complex::{ChainMap, Complex, GradedSpace};
use crate::dgmodule::DgModule;
use crate::field::{FieldSpec, Matrix, Scalar};
use crate::twisted::{EltMatrix, TwMorphism, TwistedComplex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormatError {
    pub message: String,
}

impl FormatError {
    fn new(message: impl Into<String>) -> FormatError {
        FormatError { message: message.into() }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for FormatError {}

fn err<T>(message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::new(message))
}

pub fn parse_field_spec(s: &str) -> Result<FieldSpec, FormatError> {
    let t = s.trim();
    if t == "Q" || t.eq_ignore_ascii_case("rational") {
        return Ok(FieldSpec::Rational);
    }
    let digits = t.strip_prefix('F').unwrap_or(t);
    match digits.parse::<u64>() {
        Ok(p) if p >= 2 => Ok(FieldSpec::Prime(p)),
        _ => err(format!("unrecognized field spec {s:?}; expected Q, rational, or F<p>")),
    }
}

/// The field override from the environment, if any.
pub fn field_override_from_env() -> Result<Option<FieldSpec>, FormatError> {
    match std::env::var("DGKIT_FIELD") {
        Ok(v) if !v.trim().is_empty() => parse_field_spec(&v).map(Some),
        _ => Ok(None),
    }
}

// Raw schemas.  Scalars and degrees are strings; tuples serialize as
// two-element arrays.

type Combo = Vec<(String, String)>;

#[derive(Serialize, Deserialize)]
struct DgcFile {
    format: u32,
    field: String,
    objects: Vec<String>,
    homs: BTreeMap<String, DgcHom>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    comp: BTreeMap<String, Combo>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    ids: BTreeMap<String, Combo>,
}

#[derive(Serialize, Deserialize)]
struct DgcHom {
    basis: Vec<DgcBasis>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    d: BTreeMap<String, Combo>,
}

#[derive(Serialize, Deserialize)]
struct DgcBasis {
    name: String,
    deg: i32,
}

type CellRow = Vec<Vec<(String, String)>>;

#[derive(Serialize, Deserialize)]
struct TwcBody {
    entries: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    q: BTreeMap<String, Vec<CellRow>>,
}

#[derive(Serialize, Deserialize)]
struct TwcFile {
    format: u32,
    category: String,
    #[serde(flatten)]
    body: TwcBody,
}

#[derive(Serialize, Deserialize)]
struct TwmFile {
    format: u32,
    category: String,
    degree: i32,
    source: TwcBody,
    target: TwcBody,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    components: BTreeMap<String, Vec<CellRow>>,
}

#[derive(Serialize, Deserialize)]
struct DgmFile {
    format: u32,
    category: String,
    values: BTreeMap<String, DgmValue>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    action: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
}

#[derive(Serialize, Deserialize)]
struct DgmValue {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    dims: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    d: BTreeMap<String, Vec<Vec<String>>>,
}

fn check_format(format: u32, what: &str) -> Result<(), FormatError> {
    if format == 1 {
        Ok(())
    } else {
        err(format!("{what}: unsupported format version {format}; this reader knows 1"))
    }
}

fn parse_degree(s: &str) -> Result<i32, FormatError> {
    s.parse::<i32>().map_err(|_| FormatError::new(format!("bad degree key {s:?}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::new(format!("{what}: {e}")))
}

fn render_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("schemas serialize infallibly");
    out.push('\n');
    out
}

/// Basis names resolved to their position, unique across the category.
struct NameTable {
    by_name: BTreeMap<String, (ObjId, ObjId, usize)>,
}

impl NameTable {
    fn build(q: &DgPresentation) -> Result<NameTable, FormatError> {
        let mut by_name = BTreeMap::new();
        for (&(a, b), space) in &q.homs {
            for (k, be) in space.basis.iter().enumerate() {
                if by_name.insert(be.name.clone(), (a, b, k)).is_some() {
                    return err(format!(
                        "basis name {:?} is not unique across the category",
                        be.name
                    ));
                }
            }
        }
        Ok(NameTable { by_name })
    }

    fn resolve(&self, name: &str) -> Result<(ObjId, ObjId, usize), FormatError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| FormatError::new(format!("unknown basis name {name:?}")))
    }

    fn resolve_in(
        &self,
        name: &str,
        a: ObjId,
        b: ObjId,
        q: &DgPresentation,
    ) -> Result<usize, FormatError> {
        let (fa, fb, k) = self.resolve(name)?;
        if (fa, fb) != (a, b) {
            return err(format!(
                "basis element {name:?} lives in hom({},{}), not hom({},{})",
                q.objects[fa], q.objects[fb], q.objects[a], q.objects[b]
            ));
        }
        Ok(k)
    }
}

fn object_id(q: &DgPresentation, name: &str) -> Result<ObjId, FormatError> {
    q.objects
        .iter()
        .position(|o| o == name)
        .ok_or_else(|| FormatError::new(format!("unknown object {name:?}")))
}

// Stored order and explicit zeros survive both directions, so a value
// and its file image determine each other exactly.
fn combo_to_raw(combo: &[(usize, Scalar)], space: &HomSpace) -> Combo {
    combo.iter().map(|(k, c)| (space.basis[*k].name.clone(), c.render())).collect()
}

fn raw_to_combo(
    raw: &Combo,
    a: ObjId,
    b: ObjId,
    q: &DgPresentation,
    names: &NameTable,
) -> Result<Vec<(usize, Scalar)>, FormatError> {
    let mut combo = Vec::with_capacity(raw.len());
    for (name, coeff) in raw {
        let k = names.resolve_in(name, a, b, q)?;
        let c = q.field.parse(coeff).map_err(FormatError::new)?;
        combo.push((k, c));
    }
    Ok(combo)
}

pub fn category_to_string(q: &DgPresentation) -> String {
    NameTable::build(q).expect("writers require globally unique basis names");
    let mut homs = BTreeMap::new();
    for (&(a, b), space) in &q.homs {
        if space.basis.is_empty() {
            continue;
        }
        let key = format!("{}->{}", q.objects[a], q.objects[b]);
        let basis = space
            .basis
            .iter()
            .map(|be| DgcBasis { name: be.name.clone(), deg: be.degree })
            .collect();
        let mut d = BTreeMap::new();
        for (&k, combo) in &space.d {
            d.insert(space.basis[k].name.clone(), combo_to_raw(combo, space));
        }
        homs.insert(key, DgcHom { basis, d });
    }
    let mut comp = BTreeMap::new();
    for (&(a, b, c), table) in &q.compose {
        let left = &q.homs[&(b, c)];
        let right = &q.homs[&(a, b)];
        let out = &q.homs[&(a, c)];
        for (&(g, f), combo) in table {
            let key = format!("{},{}", left.basis[g].name, right.basis[f].name);
            comp.insert(key, combo_to_raw(combo, out));
        }
    }
    let mut ids = BTreeMap::new();
    for (a, combo) in q.identities.iter().enumerate() {
        if let Some(space) = q.homs.get(&(a, a)) {
            if !combo.is_empty() {
                ids.insert(q.objects[a].clone(), combo_to_raw(combo, space));
            }
        }
    }
    render_json(&DgcFile {
        format: 1,
        field: q.field.to_string(),
        objects: q.objects.clone(),
        homs,
        comp,
        ids,
    })
}

pub fn category_from_str(
    text: &str,
    field_override: Option<FieldSpec>,
) -> Result<DgPresentation, FormatError> {
    let file: DgcFile = parse_json(text, "category file")?;
    check_format(file.format, "category file")?;
    let field = match field_override {
        Some(f) => f,
        None => parse_field_spec(&file.field)?,
    };
    let objects = file.objects.clone();
    {
        let mut seen = BTreeMap::new();
        for (i, o) in objects.iter().enumerate() {
            if seen.insert(o.clone(), i).is_some() {
                return err(format!("object name {o:?} is not unique"));
            }
        }
    }
    let mut q = DgPresentation {
        field,
        objects,
        homs: BTreeMap::new(),
        compose: BTreeMap::new(),
        identities: vec![Vec::new(); file.objects.len()],
    };
    for (key, raw) in &file.homs {
        let Some((src, tgt)) = key.split_once("->") else {
            return err(format!("hom key {key:?} is not of the form A->B"));
        };
        let a = object_id(&q, src)?;
        let b = object_id(&q, tgt)?;
        let basis = raw
            .basis
            .iter()
            .map(|be| BasisElt { name: be.name.clone(), degree: be.deg })
            .collect();
        q.homs.insert((a, b), HomSpace { basis, d: BTreeMap::new() });
    }
    let names = NameTable::build(&q)?;
    for (key, raw) in &file.homs {
        let (src, tgt) = key.split_once("->").expect("checked above");
        let a = object_id(&q, src)?;
        let b = object_id(&q, tgt)?;
        let mut d = BTreeMap::new();
        for (name, combo) in &raw.d {
            let k = names.resolve_in(name, a, b, &q)?;
            d.insert(k, raw_to_combo(combo, a, b, &q, &names)?);
        }
        q.homs.get_mut(&(a, b)).expect("inserted above").d = d;
    }
    for (key, combo) in &file.comp {
        let Some((gname, fname)) = key.split_once(',') else {
            return err(format!("composition key {key:?} is not of the form g,f"));
        };
        let (b2, c, g) = names.resolve(gname)?;
        let (a, b, f) = names.resolve(fname)?;
        if b != b2 {
            return err(format!(
                "composition {key:?} is not composable: {fname:?} ends at {}, {gname:?} starts at {}",
                q.objects[b], q.objects[b2]
            ));
        }
        let parsed = raw_to_combo(combo, a, c, &q, &names)?;
        q.compose.entry((a, b, c)).or_default().insert((g, f), parsed);
    }
    for (obj, combo) in &file.ids {
        let a = object_id(&q, obj)?;
        q.identities[a] = raw_to_combo(combo, a, a, &q, &names)?;
    }
    Ok(q)
}

fn elt_to_raw(elt: &HomElt, space: &HomSpace) -> Vec<(String, String)> {
    elt.coords.iter().map(|(k, c)| (space.basis[*k].name.clone(), c.render())).collect()
}

fn raw_to_elt(
    raw: &[(String, String)],
    degree: i32,
    a: ObjId,
    b: ObjId,
    q: &DgPresentation,
    names: &NameTable,
) -> Result<HomElt, FormatError> {
    let mut elt = HomElt::zero(degree);
    for (name, coeff) in raw {
        let k = names.resolve_in(name, a, b, q)?;
        let be = &q.hom(a, b).basis[k];
        if be.degree != degree {
            return err(format!(
                "cell mixes degrees: {name:?} has degree {}, the slot wants {degree}",
                be.degree
            ));
        }
        let c = q.field.parse(coeff).map_err(FormatError::new)?;
        if !c.is_zero() {
            elt.coords.insert(k, c);
        }
    }
    Ok(elt)
}

fn twc_body(x: &TwistedComplex) -> TwcBody {
    let q = &x.cat;
    let entries = x
        .entries
        .iter()
        .map(|(i, objs)| {
            (i.to_string(), objs.iter().map(|&o| q.objects[o].clone()).collect())
        })
        .collect();
    let mut blocks = BTreeMap::new();
    for (&(i, j), block) in &x.q {
        let rows = x.objects_at(j).len();
        let cols = x.objects_at(i).len();
        let mut mat: Vec<CellRow> = vec![vec![Vec::new(); cols]; rows];
        for ((r, c), elt) in &block.cells {
            let space = q.hom(x.objects_at(i)[*c], x.objects_at(j)[*r]);
            mat[*r][*c] = elt_to_raw(elt, space);
        }
        blocks.insert(format!("{i}->{j}"), mat);
    }
    TwcBody { entries, q: blocks }
}

fn body_to_twc(
    body: &TwcBody,
    cat: &Arc<DgPresentation>,
    names: &NameTable,
) -> Result<TwistedComplex, FormatError> {
    let mut entries: BTreeMap<i32, Vec<ObjId>> = BTreeMap::new();
    for (key, objs) in &body.entries {
        let i = parse_degree(key)?;
        let ids: Result<Vec<ObjId>, FormatError> =
            objs.iter().map(|o| object_id(cat, o)).collect();
        entries.insert(i, ids?);
    }
    let mut q = BTreeMap::new();
    for (key, mat) in &body.q {
        let Some((si, sj)) = key.split_once("->") else {
            return err(format!("twist key {key:?} is not of the form i->j"));
        };
        let i = parse_degree(si)?;
        let j = parse_degree(sj)?;
        let tgts = entries.get(&j).cloned().unwrap_or_default();
        let srcs = entries.get(&i).cloned().unwrap_or_default();
        if mat.len() != tgts.len() {
            return err(format!("twist block {key:?} has {} rows, expected {}", mat.len(), tgts.len()));
        }
        let mut block = EltMatrix::zero(tgts.len(), srcs.len());
        for (r, row) in mat.iter().enumerate() {
            if row.len() != srcs.len() {
                return err(format!(
                    "twist block {key:?} row {r} has {} columns, expected {}",
                    row.len(),
                    srcs.len()
                ));
            }
            for (c, raw) in row.iter().enumerate() {
                if raw.is_empty() {
                    continue;
                }
                let elt = raw_to_elt(raw, i - j + 1, srcs[c], tgts[r], cat, names)?;
                block.set(r, c, elt);
            }
        }
        q.insert((i, j), block);
    }
    Ok(TwistedComplex::new(cat.clone(), entries, q))
}

pub fn twisted_to_string(x: &TwistedComplex, category_path: &str) -> String {
    render_json(&TwcFile { format: 1, category: category_path.to_string(), body: twc_body(x) })
}

/// Parse a twisted complex against an already-loaded category; the
/// embedded category path is returned for the caller to cross-check.
pub fn twisted_from_str(
    text: &str,
    cat: &Arc<DgPresentation>,
) -> Result<TwistedComplex, FormatError> {
    let file: TwcFile = parse_json(text, "twisted complex file")?;
    check_format(file.format, "twisted complex file")?;
    let names = NameTable::build(cat)?;
    let x = body_to_twc(&file.body, cat, &names)?;
    x.validate().map_err(|e| FormatError::new(format!("invalid twisted complex: {e}")))?;
    Ok(x)
}

pub fn twisted_category_path(text: &str) -> Result<String, FormatError> {
    let file: TwcFile = parse_json(text, "twisted complex file")?;
    check_format(file.format, "twisted complex file")?;
    Ok(file.category)
}

pub fn tw_morphism_to_string(f: &TwMorphism, category_path: &str) -> String {
    let src = &f.source;
    let tgt = &f.target;
    let q = &src.cat;
    let mut components = BTreeMap::new();
    for (&(i, j), block) in &f.components {
        let rows = tgt.objects_at(j).len();
        let cols = src.objects_at(i).len();
        let mut mat: Vec<CellRow> = vec![vec![Vec::new(); cols]; rows];
        for ((r, c), elt) in &block.cells {
            let space = q.hom(src.objects_at(i)[*c], tgt.objects_at(j)[*r]);
            mat[*r][*c] = elt_to_raw(elt, space);
        }
        components.insert(format!("{i}->{j}"), mat);
    }
    render_json(&TwmFile {
        format: 1,
        category: category_path.to_string(),
        degree: f.degree,
        source: twc_body(src),
        target: twc_body(tgt),
        components,
    })
}

pub fn tw_morphism_from_str(
    text: &str,
    cat: &Arc<DgPresentation>,
) -> Result<TwMorphism, FormatError> {
    let file: TwmFile = parse_json(text, "twisted morphism file")?;
    check_format(file.format, "twisted morphism file")?;
    let names = NameTable::build(cat)?;
    let source = body_to_twc(&file.source, cat, &names)?;
    source
        .validate()
        .map_err(|e| FormatError::new(format!("invalid source complex: {e}")))?;
    let target = body_to_twc(&file.target, cat, &names)?;
    target
        .validate()
        .map_err(|e| FormatError::new(format!("invalid target complex: {e}")))?;
    let mut components = BTreeMap::new();
    for (key, mat) in &file.components {
        let Some((si, sj)) = key.split_once("->") else {
            return err(format!("component key {key:?} is not of the form i->j"));
        };
        let i = parse_degree(si)?;
        let j = parse_degree(sj)?;
        let srcs = source.objects_at(i).to_vec();
        let tgts = target.objects_at(j).to_vec();
        if mat.len() != tgts.len() {
            return err(format!(
                "component block {key:?} has {} rows, expected {}",
                mat.len(),
                tgts.len()
            ));
        }
        let mut block = EltMatrix::zero(tgts.len(), srcs.len());
        for (r, row) in mat.iter().enumerate() {
            if row.len() != srcs.len() {
                return err(format!(
                    "component block {key:?} row {r} has {} columns, expected {}",
                    row.len(),
                    srcs.len()
                ));
            }
            for (c, raw) in row.iter().enumerate() {
                if raw.is_empty() {
                    continue;
                }
                let elt = raw_to_elt(raw, i - j + file.degree, srcs[c], tgts[r], cat, &names)?;
                block.set(r, c, elt);
            }
        }
        components.insert((i, j), block);
    }
    let f = TwMorphism::new(source, target, file.degree, components);
    f.validate().map_err(|e| FormatError::new(format!("invalid twisted morphism: {e}")))?;
    Ok(f)
}

pub fn tw_morphism_category_path(text: &str) -> Result<String, FormatError> {
    let file: TwmFile = parse_json(text, "twisted morphism file")?;
    check_format(file.format, "twisted morphism file")?;
    Ok(file.category)
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows).map(|r| m.row(r).iter().map(Scalar::render).collect()).collect()
}

fn rows_to_matrix(
    rows: &[Vec<String>],
    field: FieldSpec,
    expect: (usize, usize),
    what: &str,
) -> Result<Matrix, FormatError> {
    if rows.len() != expect.0 {
        return err(format!("{what}: {} rows, expected {}", rows.len(), expect.0));
    }
    let mut m = Matrix::zero(field, expect.0, expect.1);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != expect.1 {
            return err(format!("{what}: row {r} has {} entries, expected {}", row.len(), expect.1));
        }
        for (c, s) in row.iter().enumerate() {
            let v = field.parse(s).map_err(FormatError::new)?;
            if !v.is_zero() {
                m.set(r, c, v);
            }
        }
    }
    Ok(m)
}

pub fn module_to_string(m: &DgModule, category_path: &str) -> String {
    let q = &m.cat;
    let mut values = BTreeMap::new();
    for (obj, v) in m.values.iter().enumerate() {
        let dims: BTreeMap<String, usize> =
            v.space.support().map(|n| (n.to_string(), v.dim(n))).collect();
        let mut d = BTreeMap::new();
        for n in v.space.support() {
            let mat = v.d_at(n);
            if !mat.is_zero() {
                d.insert(n.to_string(), matrix_to_rows(&mat));
            }
        }
        if !dims.is_empty() {
            values.insert(q.objects[obj].clone(), DgmValue { dims, d });
        }
    }
    let mut action = BTreeMap::new();
    for (&(a, b), maps) in &m.action {
        let space = q.hom(a, b);
        for (k, cm) in maps.iter().enumerate() {
            let mut mats = BTreeMap::new();
            for n in cm.source.space.support() {
                let mat = cm.component(n);
                if !mat.is_zero() {
                    mats.insert(n.to_string(), matrix_to_rows(&mat));
                }
            }
            if !mats.is_empty() {
                action.insert(space.basis[k].name.clone(), mats);
            }
        }
    }
    render_json(&DgmFile { format: 1, category: category_path.to_string(), values, action })
}

pub fn module_from_str(
    text: &str,
    cat: &Arc<DgPresentation>,
) -> Result<DgModule, FormatError> {
    let file: DgmFile = parse_json(text, "module file")?;
    check_format(file.format, "module file")?;
    let names = NameTable::build(cat)?;
    for key in file.action.keys() {
        names.resolve(key)?;
    }
    let field = cat.field;
    let mut values: Vec<Complex> = Vec::with_capacity(cat.object_count());
    for obj in 0..cat.object_count() {
        let name = &cat.objects[obj];
        match file.values.get(name) {
            None => values.push(Complex::zero(field)),
            Some(raw) => {
                let mut dims = BTreeMap::new();
                for (key, &dim) in &raw.dims {
                    if dim > 0 {
                        dims.insert(parse_degree(key)?, dim);
                    }
                }
                let space = GradedSpace::new(dims);
                let mut d = BTreeMap::new();
                for (key, rows) in &raw.d {
                    let n = parse_degree(key)?;
                    let mat = rows_to_matrix(
                        rows,
                        field,
                        (space.dim(n + 1), space.dim(n)),
                        &format!("value differential of {name} at degree {n}"),
                    )?;
                    d.insert(n, mat);
                }
                let complex = Complex::new(field, space, d)
                    .map_err(|e| FormatError::new(format!("value complex of {name}: {e}")))?;
                values.push(complex);
            }
        }
    }
    let mut action: BTreeMap<(ObjId, ObjId), Vec<ChainMap>> = BTreeMap::new();
    for (&(a, b), space) in &cat.homs {
        let maps: Result<Vec<ChainMap>, FormatError> = space
            .basis
            .iter()
            .map(|be| {
                let source = values[b].clone();
                let target = values[a].clone();
                let mut mats = BTreeMap::new();
                if let Some(stored) = file.action.get(&be.name) {
                    for (key, rows) in stored {
                        let n = parse_degree(key)?;
                        let mat = rows_to_matrix(
                            rows,
                            field,
                            (target.dim(n + be.degree), source.dim(n)),
                            &format!("action of {} at degree {n}", be.name),
                        )?;
                        if !mat.is_zero() {
                            mats.insert(n, mat);
                        }
                    }
                }
                Ok(ChainMap::new(source, target, be.degree, mats))
            })
            .collect();
        action.insert((a, b), maps?);
    }
    let m = DgModule { cat: cat.clone(), values, action };
    m.validate().map_err(|e| FormatError::new(format!("invalid module: {e}")))?;
    Ok(m)
}

pub fn module_category_path(text: &str) -> Result<String, FormatError> {
    let file: DgmFile = parse_json(text, "module file")?;
    check_format(file.format, "module file")?;
    Ok(file.category)
}

// Path-level wrappers.

fn read_to_string(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path)
        .map_err(|e| FormatError::new(format!("cannot read {}: {e}", path.display())))
}

fn write_string(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text)
        .map_err(|e| FormatError::new(format!("cannot write {}: {e}", path.display())))
}

fn sibling(path: &Path, relative: &str) -> PathBuf {
    match path.parent() {
        Some(dir) => dir.join(relative),
        None => PathBuf::from(relative),
    }
}

pub fn read_category(
    path: &Path,
    field_override: Option<FieldSpec>,
) -> Result<Arc<DgPresentation>, FormatError> {
    let text = read_to_string(path)?;
    Ok(Arc::new(category_from_str(&text, field_override)?))
}

pub fn write_category(path: &Path, q: &DgPresentation) -> Result<(), FormatError> {
    write_string(path, &category_to_string(q))
}

pub fn read_twisted(
    path: &Path,
    field_override: Option<FieldSpec>,
) -> Result<(TwistedComplex, Arc<DgPresentation>), FormatError> {
    let text = read_to_string(path)?;
    let cat_rel = twisted_category_path(&text)?;
    let cat = read_category(&sibling(path, &cat_rel), field_override)?;
    let x = twisted_from_str(&text, &cat)?;
    Ok((x, cat))
}

pub fn write_twisted(
    path: &Path,
    x: &TwistedComplex,
    category_path: &str,
) -> Result<(), FormatError> {
    write_string(path, &twisted_to_string(x, category_path))
}

pub fn read_tw_morphism(
    path: &Path,
    field_override: Option<FieldSpec>,
) -> Result<(TwMorphism, Arc<DgPresentation>), FormatError> {
    let text = read_to_string(path)?;
    let cat_rel = tw_morphism_category_path(&text)?;
    let cat = read_category(&sibling(path, &cat_rel), field_override)?;
    let f = tw_morphism_from_str(&text, &cat)?;
    Ok((f, cat))
}

pub fn write_tw_morphism(
    path: &Path,
    f: &TwMorphism,
    category_path: &str,
) -> Result<(), FormatError> {
    write_string(path, &tw_morphism_to_string(f, category_path))
}

pub fn read_module(
    path: &Path,
    field_override: Option<FieldSpec>,
) -> Result<(DgModule, Arc<DgPresentation>), FormatError> {
    let text = read_to_string(path)?;
    let cat_rel = module_category_path(&text)?;
    let cat = read_category(&sibling(path, &cat_rel), field_override)?;
    let m = module_from_str(&text, &cat)?;
    Ok((m, cat))
}

pub fn write_module(path: &Path, m: &DgModule, category_path: &str) -> Result<(), FormatError> {
    write_string(path, &module_to_string(m, category_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgmodule::{simple_module, yoneda};
    use crate::fixtures;
    use crate::sample::Sampler;

    #[test]
    fn categories_round_trip_bit_exactly() {
        for field in [FieldSpec::Rational, FieldSpec::Prime(101)] {
            for (name, q) in fixtures::shipped(field) {
                let text = category_to_string(&q);
                let back = category_from_str(&text, None).unwrap_or_else(|e| panic!("{name}: {e}"));
                assert_eq!(back, q, "{name}");
                assert_eq!(category_to_string(&back), text, "{name}");
                assert!(text.starts_with("{\n  \"format\": 1"), "{name}");
            }
        }
    }

    #[test]
    fn twisted_complexes_round_trip() {
        let field = FieldSpec::Prime(101);
        let cat = Arc::new(fixtures::contractible_pair(field));
        let mut s = Sampler::new(17);
        for _ in 0..10 {
            let x = s.twisted_complex(&cat, 4, 2);
            let text = twisted_to_string(&x, "F4.dgc");
            let back = twisted_from_str(&text, &cat).expect("round trip");
            assert_eq!(back, x);
            assert_eq!(twisted_to_string(&back, "F4.dgc"), text);
        }
    }

    #[test]
    fn twisted_morphisms_round_trip() {
        let field = FieldSpec::Prime(101);
        let cat = Arc::new(fixtures::contractible_pair(field));
        let mut s = Sampler::new(29);
        for _ in 0..6 {
            let x = s.twisted_complex(&cat, 3, 2);
            let y = s.twisted_complex(&cat, 3, 2);
            let f = s.closed_morphism(&x, &y, true);
            let text = tw_morphism_to_string(&f, "F4.dgc");
            let back = tw_morphism_from_str(&text, &cat).expect("round trip");
            assert_eq!(back, f);
        }
    }

    #[test]
    fn modules_round_trip() {
        let field = FieldSpec::Rational;
        for (name, q) in fixtures::shipped(field) {
            let cat = Arc::new(q);
            for m in [yoneda(&cat, 0), simple_module(&cat, 0)] {
                let text = module_to_string(&m, "cat.dgc");
                let back = module_from_str(&text, &cat).unwrap_or_else(|e| panic!("{name}: {e}"));
                assert_eq!(back, m, "{name}");
                assert_eq!(module_to_string(&back, "cat.dgc"), text, "{name}");
            }
        }
    }

    #[test]
    fn files_resolve_their_category_by_sibling_path() {
        let field = FieldSpec::Rational;
        let q = fixtures::exterior(field);
        let dir = tempfile::tempdir().expect("tempdir");
        let cat_path = dir.path().join("F2.dgc");
        write_category(&cat_path, &q).unwrap();
        let cat = read_category(&cat_path, None).unwrap();
        assert_eq!(*cat, q);

        let m = simple_module(&cat, 0);
        let mod_path = dir.path().join("simple.dgm");
        write_module(&mod_path, &m, "F2.dgc").unwrap();
        let (back, cat2) = read_module(&mod_path, None).unwrap();
        assert_eq!(back.values, m.values);
        assert_eq!(*cat2, *cat);
    }

    #[test]
    fn malformed_input_is_reported_not_panicked() {
        assert!(category_from_str("{", None).is_err());
        assert!(category_from_str("{\"format\": 2, \"field\": \"Q\", \"objects\": [], \"homs\": {}}", None)
            .unwrap_err()
            .message
            .contains("format"));
        let field = FieldSpec::Rational;
        let cat = Arc::new(fixtures::exterior(field));
        let bad = "{\"format\":1,\"category\":\"x\",\"entries\":{\"0\":[\"nope\"]}}";
        assert!(twisted_from_str(bad, &cat).unwrap_err().message.contains("unknown object"));
    }

    #[test]
    fn field_overrides_reinterpret_coefficients() {
        let q = fixtures::exterior(FieldSpec::Rational);
        let text = category_to_string(&q);
        let over = category_from_str(&text, Some(FieldSpec::Prime(7))).unwrap();
        assert_eq!(over.field, FieldSpec::Prime(7));
        assert_eq!(over.objects, q.objects);
        assert!(parse_field_spec("F101").is_ok());
        assert!(parse_field_spec("Q").is_ok());
        assert!(parse_field_spec("pretzel").is_err());
    }
}
