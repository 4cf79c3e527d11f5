//! Classes of monomorphisms: pure, stable and unitary monos and the
//! composite classes defined through Rees quotients.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::act::{Act, Subact};
use crate::congruence::rees_quotient;
use crate::error::{Error, Result};
use crate::flatness::{self, LeftActUniverse};
use crate::homs::find_hom_extending;
use crate::json::ActDoc;
use crate::morphism::ActMorphism;
use crate::tensor::tensor_classes;

/// A named predicate on acts, used for complements of unitary monos and for
/// precover classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "predicate", content = "k", rename_all = "kebab-case")]
pub enum ActPredicate {
    Any,
    KFlat(usize),
    StronglyFlat,
    ConditionP,
    ConditionE,
    WeaklyFlat,
    PrincipallyWeaklyFlat,
    TorsionFree,
}

impl ActPredicate {
    /// Errors with `EmptyAct` on the empty act, except for `Any`.
    pub fn holds(&self, act: &Act) -> Result<bool> {
        match *self {
            ActPredicate::Any => Ok(true),
            ActPredicate::KFlat(k) => flatness::is_k_flat(act, k),
            ActPredicate::StronglyFlat => flatness::is_strongly_flat(act),
            ActPredicate::ConditionP => flatness::is_condition_p(act),
            ActPredicate::ConditionE => flatness::is_condition_e(act),
            ActPredicate::WeaklyFlat => flatness::is_weakly_flat(act),
            ActPredicate::PrincipallyWeaklyFlat => flatness::is_principally_weakly_flat(act),
            ActPredicate::TorsionFree => flatness::is_torsion_free(act),
        }
    }

    /// Parses names such as `strongly-flat` or `flat` (taking `k`).
    pub fn parse(name: &str, k: usize) -> Result<Self> {
        Ok(match name {
            "any" => ActPredicate::Any,
            "flat" | "k-flat" => ActPredicate::KFlat(k),
            "strongly-flat" => ActPredicate::StronglyFlat,
            "condition-p" => ActPredicate::ConditionP,
            "condition-e" => ActPredicate::ConditionE,
            "weakly-flat" => ActPredicate::WeaklyFlat,
            "principally-weakly-flat" => ActPredicate::PrincipallyWeaklyFlat,
            "torsion-free" => ActPredicate::TorsionFree,
            _ => return Err(Error::InvalidSpec(format!("unknown act predicate {name:?}"))),
        })
    }
}

impl fmt::Display for ActPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActPredicate::Any => write!(f, "any"),
            ActPredicate::KFlat(k) => write!(f, "flat(k={k})"),
            ActPredicate::StronglyFlat => write!(f, "strongly-flat"),
            ActPredicate::ConditionP => write!(f, "condition-p"),
            ActPredicate::ConditionE => write!(f, "condition-e"),
            ActPredicate::WeaklyFlat => write!(f, "weakly-flat"),
            ActPredicate::PrincipallyWeaklyFlat => write!(f, "principally-weakly-flat"),
            ActPredicate::TorsionFree => write!(f, "torsion-free"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ClassName {
    #[serde(rename = "Mono")]
    Mono,
    #[serde(rename = "PureMono")]
    PureMono,
    #[serde(rename = "StableMono")]
    StableMono,
    #[serde(rename = "F-Mono")]
    FMono,
    #[serde(rename = "SF-Mono")]
    SfMono,
    #[serde(rename = "F-PureMono")]
    FPureMono,
    #[serde(rename = "U-class")]
    UClass,
}

impl ClassName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassName::Mono => "Mono",
            ClassName::PureMono => "PureMono",
            ClassName::StableMono => "StableMono",
            ClassName::FMono => "F-Mono",
            ClassName::SfMono => "SF-Mono",
            ClassName::FPureMono => "F-PureMono",
            ClassName::UClass => "U-class",
        }
    }
}

/// A class of monomorphisms with its witness bound. `flat_bound` is the
/// `k` of every `k`-flatness test and also the bound of stability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MorphismClassSpec {
    pub name: ClassName,
    pub flat_bound: usize,
    pub complement: Option<ActPredicate>,
}

impl MorphismClassSpec {
    pub fn new(name: ClassName, flat_bound: usize, complement: Option<ActPredicate>) -> Result<Self> {
        let spec = MorphismClassSpec {
            name,
            flat_bound,
            complement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.flat_bound == 0 {
            return Err(Error::InvalidSpec("flat_bound must be at least 1".into()));
        }
        if (self.name == ClassName::UClass) != self.complement.is_some() {
            return Err(Error::InvalidSpec(
                "a complement predicate is required exactly for U-class".into(),
            ));
        }
        Ok(())
    }

    pub fn mono() -> Self {
        MorphismClassSpec {
            name: ClassName::Mono,
            flat_bound: 1,
            complement: None,
        }
    }

    pub fn pure_mono() -> Self {
        MorphismClassSpec {
            name: ClassName::PureMono,
            flat_bound: 1,
            complement: None,
        }
    }

    pub fn stable_mono(k: usize) -> Self {
        MorphismClassSpec {
            name: ClassName::StableMono,
            flat_bound: k.max(1),
            complement: None,
        }
    }

    pub fn f_mono(k: usize) -> Self {
        MorphismClassSpec {
            name: ClassName::FMono,
            flat_bound: k.max(1),
            complement: None,
        }
    }

    pub fn sf_mono() -> Self {
        MorphismClassSpec {
            name: ClassName::SfMono,
            flat_bound: 1,
            complement: None,
        }
    }

    pub fn f_pure_mono(k: usize) -> Self {
        MorphismClassSpec {
            name: ClassName::FPureMono,
            flat_bound: k.max(1),
            complement: None,
        }
    }

    pub fn u_class(complement: ActPredicate, k: usize) -> Self {
        MorphismClassSpec {
            name: ClassName::UClass,
            flat_bound: k.max(1),
            complement: Some(complement),
        }
    }

    /// Parses `Mono`, `PureMono`, `StableMono`, `F-Mono`, `SF-Mono`,
    /// `F-PureMono` or `U-class:<predicate>` (case-insensitive).
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let lower = text.to_ascii_lowercase();
        let (head, tail) = match lower.split_once(':') {
            Some((h, t)) => (h.to_string(), Some(t.to_string())),
            None => (lower.clone(), None),
        };
        let spec = match head.as_str() {
            "mono" => MorphismClassSpec::mono(),
            "puremono" | "pure-mono" | "pure" => MorphismClassSpec::pure_mono(),
            "stablemono" | "stable-mono" | "stable" => MorphismClassSpec::stable_mono(k),
            "f-mono" | "fmono" => MorphismClassSpec::f_mono(k),
            "sf-mono" | "sfmono" => MorphismClassSpec::sf_mono(),
            "f-puremono" | "f-pure-mono" => MorphismClassSpec::f_pure_mono(k),
            "u-class" | "uclass" | "u" => {
                let pred = ActPredicate::parse(tail.as_deref().unwrap_or("flat"), k)?;
                MorphismClassSpec::u_class(pred, k)
            }
            _ => return Err(Error::InvalidSpec(format!("unknown class {text:?}"))),
        };
        if tail.is_some() && spec.name != ClassName::UClass {
            return Err(Error::InvalidSpec(format!("{text:?} takes no predicate")));
        }
        Ok(spec)
    }
}

impl fmt::Display for MorphismClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.name, self.complement) {
            (ClassName::UClass, Some(p)) => write!(f, "U-class({p})"),
            (ClassName::FMono | ClassName::FPureMono | ClassName::StableMono, _) => {
                write!(f, "{}(k={})", self.name.as_str(), self.flat_bound)
            }
            (name, _) => write!(f, "{}", name.as_str()),
        }
    }
}

pub fn is_mono(f: &ActMorphism) -> bool {
    f.is_injective()
}

fn require_mono(f: &ActMorphism) -> Result<()> {
    if f.is_injective() {
        Ok(())
    } else {
        Err(Error::NotMono)
    }
}

/// The complement of `im(f)` is closed under the action.
pub fn is_unitary(f: &ActMorphism) -> Result<bool> {
    require_mono(f)?;
    let image = f.image();
    let cod = f.cod();
    Ok(image.complement().into_iter().all(|b| {
        cod.monoid()
            .elements()
            .all(|s| !image.contains(cod.apply(b, s)))
    }))
}

/// `cod / im(f)`; for an empty domain this is `cod` itself.
pub fn rees_quotient_of(f: &ActMorphism) -> Result<Act> {
    let image = f.image();
    Ok(rees_quotient(f.cod(), &image)?.0)
}

/// Some `h: cod → dom` with `h∘f = id`.
pub fn find_retraction(f: &ActMorphism) -> Result<Option<ActMorphism>> {
    require_mono(f)?;
    let mut partial = vec![None; f.cod().size()];
    for (a, &b) in f.map().iter().enumerate() {
        partial[b] = Some(a);
    }
    if f.dom().is_empty() {
        return Ok(f
            .cod()
            .is_empty()
            .then(|| ActMorphism::identity(f.cod().clone())));
    }
    Ok(find_hom_extending(f.cod(), f.dom(), &partial)?
        .map(|h| ActMorphism::from_parts_unchecked(f.cod().clone(), f.dom().clone(), h)))
}

/// Purity, decided by the existence of a retraction.
pub fn is_pure(f: &ActMorphism) -> Result<bool> {
    require_mono(f)?;
    if f.dom().is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(find_retraction(f)?.is_some())
}

/// One equation over variables `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Equation {
    /// `x·s = y·t`
    VarVar { x: usize, s: usize, y: usize, t: usize },
    /// `x·s = b` with `b` in the image
    VarConst { x: usize, s: usize, b: usize },
}

impl Equation {
    fn holds(&self, act: &Act, value: &[usize]) -> bool {
        match *self {
            Equation::VarVar { x, s, y, t } => act.apply(value[x], s) == act.apply(value[y], t),
            Equation::VarConst { x, s, b } => act.apply(value[x], s) == b,
        }
    }

    fn vars(&self) -> (usize, usize) {
        match *self {
            Equation::VarVar { x, y, .. } => (x, y),
            Equation::VarConst { x, .. } => (x, x),
        }
    }
}

/// A system solvable in the codomain by `solution` with no solution inside
/// the image.
#[derive(Clone, Debug, Serialize)]
pub struct EquationSystem {
    pub variables: usize,
    pub equations: Vec<Equation>,
    pub solution: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemsVerdict {
    pub pure: bool,
    pub max_vars: usize,
    pub max_eqs: usize,
    pub witness: Option<EquationSystem>,
}

/// Backtracking search for values in `domain` satisfying every equation.
fn solve_in(act: &Act, vars: usize, eqs: &[Equation], domain: &[usize]) -> Option<Vec<usize>> {
    // equations are checked once their larger variable is assigned
    let mut by_last: Vec<Vec<&Equation>> = vec![Vec::new(); vars];
    for e in eqs {
        let (x, y) = e.vars();
        by_last[x.max(y)].push(e);
    }
    let mut value = vec![0; vars];
    fn go(
        i: usize,
        act: &Act,
        by_last: &[Vec<&Equation>],
        domain: &[usize],
        value: &mut Vec<usize>,
    ) -> bool {
        if i == value.len() {
            return true;
        }
        for &d in domain {
            value[i] = d;
            if by_last[i].iter().all(|e| e.holds(act, value)) && go(i + 1, act, by_last, domain, value)
            {
                return true;
            }
        }
        false
    }
    go(0, act, &by_last, domain, &mut value).then_some(value)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Smallest family of sets covering `0..universe`, if one of size at most
/// `limit` exists: greedy first, then exact branch and bound.
fn set_cover(sets: &[Vec<u64>], universe: usize, limit: usize) -> Option<Vec<usize>> {
    let words = universe.div_ceil(64);
    let full = |bits: &[u64]| (0..universe).all(|i| bits[i / 64] >> (i % 64) & 1 == 1);
    let mut covered = vec![0u64; words];
    let mut greedy = Vec::new();
    while !full(&covered) {
        let gain = |s: &Vec<u64>| -> u32 {
            s.iter()
                .zip(&covered)
                .map(|(a, c)| (a & !c).count_ones())
                .sum()
        };
        let (best, g) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, gain(s)))
            .max_by_key(|&(i, g)| (g, std::cmp::Reverse(i)))?;
        if g == 0 {
            return None;
        }
        greedy.push(best);
        for (c, a) in covered.iter_mut().zip(&sets[best]) {
            *c |= a;
        }
    }
    if greedy.len() <= limit {
        return Some(greedy);
    }
    fn exact(
        sets: &[Vec<u64>],
        universe: usize,
        covered: &mut Vec<u64>,
        chosen: &mut Vec<usize>,
        limit: usize,
    ) -> bool {
        let Some(first) = (0..universe).find(|&i| covered[i / 64] >> (i % 64) & 1 == 0) else {
            return true;
        };
        if chosen.len() == limit {
            return false;
        }
        for (j, s) in sets.iter().enumerate() {
            if s[first / 64] >> (first % 64) & 1 == 1 {
                let saved = covered.clone();
                for (c, a) in covered.iter_mut().zip(s) {
                    *c |= a;
                }
                chosen.push(j);
                if exact(sets, universe, covered, chosen, limit) {
                    return true;
                }
                chosen.pop();
                *covered = saved;
            }
        }
        false
    }
    let mut covered = vec![0u64; words];
    let mut chosen = Vec::new();
    exact(sets, universe, &mut covered, &mut chosen, limit).then_some(chosen)
}

/// Searches systems with at most `max_vars` variables and `max_eqs`
/// equations of the forms `x·s = y·t` and `x·s = b` (`b ∈ im f`) that are
/// solvable in the codomain but not in the image.
///
/// A solution in the codomain may be taken injective and maximal, so it
/// suffices to range over sets `T` of codomain elements of size
/// `min(max_vars, |cod|)`. For each `T` the system of every equation `T`
/// satisfies is tested for a solution in the image; if there is none, an
/// unsolvable subsystem of at most `max_eqs` equations is a set cover of
/// the image assignments by the equations they violate.
pub fn check_purity_by_systems(
    f: &ActMorphism,
    max_vars: usize,
    max_eqs: usize,
) -> Result<SystemsVerdict> {
    require_mono(f)?;
    if f.dom().is_empty() {
        return Err(Error::EmptyDomain);
    }
    let cod: &Act = f.cod();
    let image = f.image();
    let im = image.members();
    let n = cod.monoid().order();
    let vars = max_vars.min(cod.size());
    let verdict = |witness: Option<EquationSystem>| SystemsVerdict {
        pure: witness.is_none(),
        max_vars,
        max_eqs,
        witness,
    };
    for t in combinations(cod.size(), vars) {
        let mut eqs = Vec::new();
        let cells: Vec<(usize, usize)> = (0..vars).flat_map(|i| (0..n).map(move |s| (i, s))).collect();
        for (p, &(x, s)) in cells.iter().enumerate() {
            let v = cod.apply(t[x], s);
            for &(y, r) in &cells[p + 1..] {
                if cod.apply(t[y], r) == v {
                    eqs.push(Equation::VarVar { x, s, y, t: r });
                }
            }
            if image.contains(v) {
                eqs.push(Equation::VarConst { x, s, b: v });
            }
        }
        if solve_in(cod, vars, &eqs, im).is_some() {
            continue;
        }
        // assignments τ: T → im, indexed in base |im|
        let total = im.len().pow(vars as u32);
        let words = total.div_ceil(64);
        let mut violated = vec![vec![0u64; words]; eqs.len()];
        let mut value = vec![0; vars];
        for code in 0..total {
            let mut c = code;
            for v in value.iter_mut() {
                *v = im[c % im.len()];
                c /= im.len();
            }
            for (e, bits) in eqs.iter().zip(violated.iter_mut()) {
                if !e.holds(cod, &value) {
                    bits[code / 64] |= 1 << (code % 64);
                }
            }
        }
        if let Some(chosen) = set_cover(&violated, total, max_eqs) {
            return Ok(verdict(Some(EquationSystem {
                variables: vars,
                equations: chosen.into_iter().map(|i| eqs[i].clone()).collect(),
                solution: t,
            })));
        }
    }
    Ok(verdict(None))
}

/// Two classes of `Y ⊗ B` that witness a failure of stability: the class
/// of `collision` lies in `im(f ⊗ id)` and in `im(id ⊗ λ)` but not in
/// `im(f ⊗ λ)`, where `λ` is the inclusion of `subact` into `left_act`.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityFailure {
    pub left_act: ActDoc,
    pub subact: Vec<usize>,
    /// `(f(x), b)`
    pub from_f: (usize, usize),
    /// `(y, c)` with `c` in the subact
    pub from_lambda: (usize, usize),
}

/// Stability against every left-act hom `λ: A_L → B_L` with both sizes at
/// most `k`. Only `im λ` enters the condition, so it is enough to range
/// over proper nonempty subacts `C` of left acts `B` with `|B| ≤ k`.
pub fn stability_failure(f: &ActMorphism, k: usize) -> Result<Option<StabilityFailure>> {
    require_mono(f)?;
    if f.dom().is_empty() {
        return Ok(None);
    }
    let universe = LeftActUniverse::shared(f.cod().monoid(), k);
    stability_failure_in(f, &universe)
}

pub fn stability_failure_in(
    f: &ActMorphism,
    universe: &LeftActUniverse,
) -> Result<Option<StabilityFailure>> {
    require_mono(f)?;
    let y: &Act = f.cod();
    if f.dom().is_empty() {
        return Ok(None);
    }
    let image = f.image();
    for entry in &universe.entries {
        let b = &entry.act;
        let bs = b.size();
        let (classes, count) = tensor_classes(y, b);
        let mut in_f = vec![None; count];
        for &fx in image.members() {
            for x in b.elements() {
                in_f[classes[fx * bs + x]].get_or_insert((fx, x));
            }
        }
        for sub in &entry.subacts {
            let mut in_both = vec![false; count];
            for &fx in image.members() {
                for &c in sub.subact.members() {
                    in_both[classes[fx * bs + c]] = true;
                }
            }
            for yy in y.elements() {
                for &c in sub.subact.members() {
                    let cl = classes[yy * bs + c];
                    if let (Some(from_f), false) = (in_f[cl], in_both[cl]) {
                        return Ok(Some(StabilityFailure {
                            left_act: ActDoc::from_act(b),
                            subact: sub.subact.members().to_vec(),
                            from_f,
                            from_lambda: (yy, c),
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn is_stable(f: &ActMorphism, k: usize) -> Result<bool> {
    Ok(stability_failure(f, k)?.is_none())
}

/// The complement of a unitary mono's image, as an act.
fn complement_act(f: &ActMorphism) -> Result<Act> {
    let image = f.image();
    let members = image.complement();
    let sub = Subact::new(f.cod(), &members)?;
    f.cod().subact_as_act(&sub)
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub class: String,
    pub k: usize,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

/// Class membership with a reason and witness when available.
///
/// Conventions: a map out of the empty act counts as a pure and stable
/// mono; `∅ → B` lies in the flat classes iff `B` is nonempty and flat;
/// a unitary mono with empty complement satisfies every complement
/// predicate.
pub fn membership_report(f: &ActMorphism, spec: &MorphismClassSpec) -> Result<MembershipReport> {
    spec.validate()?;
    let k = spec.flat_bound;
    let report = |verdict: bool, reason: Option<String>, witness: Option<Value>| MembershipReport {
        class: spec.to_string(),
        k,
        verdict,
        reason,
        witness,
    };
    if !f.is_injective() {
        return Ok(report(false, Some("not injective".into()), None));
    }
    let empty_dom = f.dom().is_empty();
    let pure_part = || -> Result<Option<MembershipReport>> {
        if empty_dom {
            return Ok(None);
        }
        Ok(match find_retraction(f)? {
            Some(_) => None,
            None => Some(report(false, Some("no retraction onto the image".into()), None)),
        })
    };
    let flat_part = |strong: bool| -> Result<Option<MembershipReport>> {
        let q = rees_quotient_of(f)?;
        if q.is_empty() {
            return Ok(Some(report(false, Some("the quotient is empty".into()), None)));
        }
        if strong {
            if let Some(w) = flatness::condition_p_failure(&q)? {
                return Ok(Some(report(
                    false,
                    Some("quotient fails condition (P)".into()),
                    Some(json!({ "quotient": ActDoc::from_act(&q), "condition_p": w })),
                )));
            }
            if let Some(w) = flatness::condition_e_failure(&q)? {
                return Ok(Some(report(
                    false,
                    Some("quotient fails condition (E)".into()),
                    Some(json!({ "quotient": ActDoc::from_act(&q), "condition_e": w })),
                )));
            }
        } else if let Some(w) = flatness::k_flat_failure(&q, k)? {
            return Ok(Some(report(
                false,
                Some("quotient is not k-flat".into()),
                Some(json!({ "quotient": ActDoc::from_act(&q), "collapse": w })),
            )));
        }
        Ok(None)
    };
    let failed = match spec.name {
        ClassName::Mono => None,
        ClassName::PureMono => pure_part()?,
        ClassName::StableMono => stability_failure(f, k)?.map(|w| {
            report(
                false,
                Some("stability fails".into()),
                Some(serde_json::to_value(w).expect("plain data")),
            )
        }),
        ClassName::FMono => flat_part(false)?,
        ClassName::SfMono => flat_part(true)?,
        ClassName::FPureMono => match pure_part()? {
            Some(r) => Some(r),
            None => flat_part(false)?,
        },
        ClassName::UClass => {
            if !is_unitary(f)? {
                Some(report(false, Some("complement is not a subact".into()), None))
            } else {
                let comp = complement_act(f)?;
                let pred = spec.complement.expect("validated");
                if comp.is_empty() || pred.holds(&comp)? {
                    None
                } else {
                    Some(report(
                        false,
                        Some(format!("complement is not {pred}")),
                        Some(json!({ "complement": ActDoc::from_act(&comp) })),
                    ))
                }
            }
        }
    };
    if let Some(r) = failed {
        return Ok(r);
    }
    let witness = match spec.name {
        ClassName::PureMono | ClassName::FPureMono if !empty_dom => {
            find_retraction(f)?.map(|h| json!({ "retraction": h.map() }))
        }
        _ => None,
    };
    Ok(report(true, None, witness))
}

pub fn in_class(f: &ActMorphism, spec: &MorphismClassSpec) -> Result<bool> {
    Ok(membership_report(f, spec)?.verdict)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DirectionStatus {
    /// The premise fails.
    Vacuous,
    Holds,
    /// A violation, with a note on whether the bounded flatness proxy could
    /// explain it.
    Violation { detail: String, adjudication: String },
}

impl DirectionStatus {
    pub fn is_violation(&self) -> bool {
        matches!(self, DirectionStatus::Violation { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenshawReport {
    pub flat_k: usize,
    pub stable_k: usize,
    pub right_reversible: bool,
    pub quotient_k_flat: bool,
    pub cod_k_flat: bool,
    pub stable: bool,
    /// Flat quotient implies a right-reversible monoid and a stable mono.
    pub flat_quotient_direction: DirectionStatus,
    /// Flat codomain, right-reversible monoid and stable mono imply a flat
    /// quotient.
    pub converse_direction: DirectionStatus,
}

impl RenshawReport {
    pub fn has_violation(&self) -> bool {
        self.flat_quotient_direction.is_violation() || self.converse_direction.is_violation()
    }
}

pub fn check_lemma_renshaw(f: &ActMorphism, k: usize) -> Result<RenshawReport> {
    check_lemma_renshaw_with(f, k, k)
}

/// Both directions with `flat_k`-flatness standing in for flatness and
/// stability tested at `stable_k`.
pub fn check_lemma_renshaw_with(
    f: &ActMorphism,
    flat_k: usize,
    stable_k: usize,
) -> Result<RenshawReport> {
    require_mono(f)?;
    if f.dom().is_empty() {
        return Err(Error::EmptyDomain);
    }
    let monoid = f.cod().monoid().clone();
    let right_reversible = monoid.is_right_reversible();
    let q = rees_quotient_of(f)?;
    let quotient_k_flat = flatness::is_k_flat(&q, flat_k)?;
    let cod_k_flat = flatness::is_k_flat(f.cod(), flat_k)?;
    let stable = is_stable(f, stable_k)?;
    let order = monoid.order();

    let flat_quotient_direction = if !quotient_k_flat {
        DirectionStatus::Vacuous
    } else if right_reversible && stable {
        DirectionStatus::Holds
    } else {
        let detail = match (right_reversible, stable) {
            (false, false) => "monoid is not right-reversible and the mono is not stable",
            (false, true) => "monoid is not right-reversible",
            _ => "the mono is not stable",
        };
        // k ≥ |S| already makes the quotient weakly flat, and a weakly
        // flat act with a fixed point forces right-reversibility
        let adjudication = if !right_reversible && flat_k >= order {
            "genuine: the bound covers every left ideal"
        } else {
            "bound artifact candidate: the quotient may be k-flat without being flat"
        };
        DirectionStatus::Violation {
            detail: detail.into(),
            adjudication: adjudication.into(),
        }
    };
    let converse_direction = if !(cod_k_flat && right_reversible && stable) {
        DirectionStatus::Vacuous
    } else if quotient_k_flat {
        DirectionStatus::Holds
    } else {
        DirectionStatus::Violation {
            detail: "quotient is not k-flat".into(),
            adjudication: "bound artifact candidate: the codomain may be k-flat without being flat, \
                           or stability may fail beyond the bound"
                .into(),
        }
    };
    Ok(RenshawReport {
        flat_k,
        stable_k,
        right_reversible,
        quotient_k_flat,
        cod_k_flat,
        stable,
        flat_quotient_direction,
        converse_direction,
    })
}

/// Every subact inclusion into `cod`, for sweeps over monos: each mono is
/// isomorphic as an arrow to one of these.
pub fn subact_inclusions(cod: &Arc<Act>, nonempty: bool) -> Vec<ActMorphism> {
    cod.all_subacts()
        .into_iter()
        .filter(|s| !nonempty || !s.is_empty())
        .map(|s| ActMorphism::inclusion(cod, &s).expect("own subact"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::act::{disjoint_union, Side};
    use crate::monoid::Monoid;

    fn b2() -> Arc<Monoid> {
        Arc::new(Monoid::two_element_semilattice())
    }

    fn e_into_s() -> ActMorphism {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let e = s.subact_generated(&[1]).unwrap();
        ActMorphism::inclusion(&s, &e).unwrap()
    }

    #[test]
    fn unitary_examples() {
        assert!(!is_unitary(&e_into_s()).unwrap());
        let s = Act::regular(b2(), Side::Right);
        let theta = Act::terminal(b2(), Side::Right);
        let (_, inj) = disjoint_union(&[s.clone(), theta]).unwrap();
        assert!(is_unitary(&inj[0]).unwrap());
        assert!(is_unitary(&ActMorphism::identity(Arc::new(s))).unwrap());
    }

    #[test]
    fn not_mono_is_rejected() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let theta = Arc::new(Act::terminal(b2(), Side::Right));
        let c = ActMorphism::new(s, theta, vec![0, 0]).unwrap();
        assert!(!is_mono(&c));
        assert_eq!(is_pure(&c).unwrap_err(), Error::NotMono);
        assert_eq!(is_unitary(&c).unwrap_err(), Error::NotMono);
        assert_eq!(is_stable(&c, 2).unwrap_err(), Error::NotMono);
    }

    #[test]
    fn retraction_of_idempotent_into_semilattice() {
        let f = e_into_s();
        let h = find_retraction(&f).unwrap().unwrap();
        assert_eq!(h.map(), &[0, 0]);
        assert!(is_pure(&f).unwrap());
    }

    #[test]
    fn coproduct_injection_is_pure() {
        let s = Act::regular(b2(), Side::Right);
        let theta = Act::terminal(b2(), Side::Right);
        let (_, inj) = disjoint_union(&[s, theta]).unwrap();
        let h = find_retraction(&inj[0]).unwrap().unwrap();
        // the one-point summand goes to the fixed point e
        assert_eq!(h.map(), &[0, 1, 1]);
    }

    #[test]
    fn left_copy_retracts_by_folding() {
        let m = Arc::new(Monoid::cyclic_group(2));
        let s = Act::regular(m, Side::Right);
        let (_, inj) = disjoint_union(&[s.clone(), s]).unwrap();
        let h = find_retraction(&inj[0]).unwrap().unwrap();
        assert_eq!(h.map(), &[0, 1, 0, 1]);
    }

    #[test]
    fn empty_domain_purity_is_an_error() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let f = ActMorphism::from_empty(s);
        assert_eq!(is_pure(&f).unwrap_err(), Error::EmptyDomain);
        assert!(in_class(&f, &MorphismClassSpec::pure_mono()).unwrap());
        assert!(in_class(&f, &MorphismClassSpec::f_mono(3)).unwrap());
    }

    #[test]
    fn identity_is_pure_stable_and_passes_systems() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let id = ActMorphism::identity(s);
        assert!(is_pure(&id).unwrap());
        assert!(is_stable(&id, 3).unwrap());
        for (v, e) in [(1, 1), (2, 3), (3, 4)] {
            assert!(check_purity_by_systems(&id, v, e).unwrap().pure);
        }
    }

    #[test]
    fn systems_oracle_finds_a_witness_for_impure_monos() {
        // {a} ⊆ {a, b} over {1} ∪ (right zeros) where b·x = a... search a
        // non-pure inclusion on the corpus and check the witness
        let mut found = false;
        for m in crate::census::enumerate_monoids(3) {
            let m = Arc::new(m);
            for b in crate::enumerate::acts_up_to(&m, Side::Right, 3).iter() {
                let b = Arc::new(b.clone());
                for f in subact_inclusions(&b, true) {
                    if is_pure(&f).unwrap() {
                        continue;
                    }
                    found = true;
                    let n = b.size();
                    let v = check_purity_by_systems(&f, n, n * m.order()).unwrap();
                    let w = v.witness.expect("witness");
                    assert!(w.equations.len() <= n * m.order());
                    assert!(w.equations.iter().all(|e| e.holds(&b, &w.solution)));
                    assert!(solve_in(&b, w.variables, &w.equations, f.image().members()).is_none());
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn spec_validation() {
        assert!(MorphismClassSpec::new(ClassName::UClass, 3, None).is_err());
        assert!(MorphismClassSpec::new(ClassName::FMono, 0, None).is_err());
        assert!(
            MorphismClassSpec::new(ClassName::FMono, 2, Some(ActPredicate::Any)).is_err()
        );
        let u = MorphismClassSpec::parse("U-class:strongly-flat", 3).unwrap();
        assert_eq!(u.complement, Some(ActPredicate::StronglyFlat));
        assert_eq!(MorphismClassSpec::parse("F-Mono", 4).unwrap(), MorphismClassSpec::f_mono(4));
        assert!(MorphismClassSpec::parse("P-unitary", 3).is_err());
    }

    #[test]
    fn idempotent_inclusion_sf_membership() {
        // S/{e} over B2 is {1, e} with e fixed: a copy of S itself
        let f = e_into_s();
        let q = rees_quotient_of(&f).unwrap();
        assert_eq!(q.size(), 2);
        assert!(in_class(&f, &MorphismClassSpec::sf_mono()).unwrap());
    }

    #[test]
    fn u_class_with_flat_complement() {
        let s = Act::regular(b2(), Side::Right);
        let (_, inj) = disjoint_union(&[s.clone(), s]).unwrap();
        let spec = MorphismClassSpec::u_class(ActPredicate::KFlat(3), 3);
        assert!(in_class(&inj[0], &spec).unwrap());
        assert!(!in_class(&e_into_s(), &spec).unwrap());
    }

    #[test]
    fn renshaw_on_identity() {
        let s = Arc::new(Act::regular(b2(), Side::Right));
        let r = check_lemma_renshaw(&ActMorphism::identity(s), 3).unwrap();
        assert!(r.quotient_k_flat);
        assert!(!r.has_violation());
    }
}
