use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{dnf, AlgebraError, Scope};
use crate::env::Env;
use crate::graph::{build_scope, scope_components, BuildError, Unsat, UnsatReason};
use crate::term::{HeapTerm, Heaplet};

/// A connected `*`-component with heaplets in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Component {
    pub heaplets: Vec<Heaplet>,
    /// Carries a total `true` that absorbs unlisted heaplets.
    pub open: bool,
}

impl Component {
    fn new(mut heaplets: Vec<Heaplet>, open: bool) -> Self {
        heaplets.sort_by_cached_key(Heaplet::sort_key);
        Component { heaplets, open }
    }

    fn key(&self) -> (Vec<(String, String)>, bool) {
        (
            self.heaplets.iter().map(Heaplet::sort_key).collect(),
            self.open,
        )
    }

    pub fn to_term(&self) -> HeapTerm {
        let mut parts: Vec<HeapTerm> = self.heaplets.iter().cloned().map(HeapTerm::from).collect();
        if self.open {
            parts.push(HeapTerm::TrueTotal);
        }
        HeapTerm::conj_all(parts)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub disjuncts: Vec<Component>,
    pub satisfiable: bool,
}

impl NormalForm {
    pub fn emp() -> Self {
        NormalForm {
            disjuncts: Vec::new(),
            satisfiable: true,
        }
    }

    pub fn falsum() -> Self {
        NormalForm {
            disjuncts: Vec::new(),
            satisfiable: false,
        }
    }

    pub fn is_emp(&self) -> bool {
        self.satisfiable && self.disjuncts.is_empty()
    }

    pub fn heaplets(&self) -> impl Iterator<Item = &Heaplet> {
        self.disjuncts.iter().flat_map(|c| c.heaplets.iter())
    }

    pub fn to_term(&self) -> HeapTerm {
        if !self.satisfiable {
            return HeapTerm::FalseTotal;
        }
        HeapTerm::disj_all(self.disjuncts.iter().map(Component::to_term))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A disjunct removed during normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub disjunct: String,
    pub unsat: Unsat,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dropped `{}`: {}", self.disjunct, self.unsat)
    }
}

/// Net multiset cancellation inside one scope. Returns the surviving
/// heaplets in first-occurrence order.
fn cancel_items(scope: &Scope) -> Result<Vec<Heaplet>, AlgebraError> {
    let mut order: Vec<&Heaplet> = Vec::new();
    let mut net: BTreeMap<&Heaplet, i64> = BTreeMap::new();
    for (h, pos) in &scope.items {
        let n = net.entry(h).or_insert_with(|| {
            order.push(h);
            0
        });
        *n += if *pos { 1 } else { -1 };
    }
    if let Some(h) = order
        .iter()
        .filter(|h| net[*h] < 0)
        .min_by_key(|h| h.sort_key())
    {
        return Err(AlgebraError::UnmatchedInverse((*h).clone()));
    }
    Ok(order
        .into_iter()
        .flat_map(|h| std::iter::repeat_n(h.clone(), net[h].max(0) as usize))
        .collect())
}

/// Splits surviving heaplets into connected parts once an edge has been
/// removed; isolated vertices disappear with their last edge.
fn canonize(scope: &Scope, rest: Vec<Heaplet>) -> Result<Vec<Vec<Heaplet>>, AlgebraError> {
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    if !scope.has_inverse() || scope.open {
        return Ok(vec![rest]);
    }
    let groups = scope_components(&rest)?;
    Ok(groups
        .into_iter()
        .map(|g| g.into_iter().map(|i| rest[i].clone()).collect())
        .collect())
}

/// Scopes with inverses are split into components rather than required connected.
fn check_scope(scope: &Scope, rest: &[Heaplet], env: &Env) -> Result<Option<Unsat>, AlgebraError> {
    if !scope.open && !scope.has_inverse() {
        let mut pos: Vec<Heaplet> = Vec::new();
        for h in scope.positives() {
            if !pos.contains(h) {
                pos.push(h.clone());
            }
        }
        let comps = scope_components(&pos)?;
        if comps.len() > 1 {
            let witness = vec![pos[comps[0][0]].clone(), pos[comps[1][0]].clone()];
            return Ok(Some(Unsat::new(UnsatReason::NotConnectible, witness)));
        }
    }
    match build_scope(rest, env, false) {
        Ok(_) => Ok(None),
        Err(BuildError::Unsat(u)) => Ok(Some(u)),
        Err(e) => Err(e.into()),
    }
}

/// Removes `s || inv(s)` pairs of whole disjuncts.
fn cancel_disjuncts(scopes: Vec<Scope>) -> Vec<Scope> {
    let signature = |s: &Scope| {
        let mut hs: Vec<&Heaplet> = s.items.iter().map(|(h, _)| h).collect();
        hs.sort();
        hs.into_iter().cloned().collect::<Vec<_>>()
    };
    let plain = |s: &Scope| !s.open && !s.falsum && !s.items.is_empty();
    let mut removed = vec![false; scopes.len()];
    for j in 0..scopes.len() {
        let neg = &scopes[j];
        if !plain(neg) || neg.items.iter().any(|(_, p)| *p) {
            continue;
        }
        let sig = signature(neg);
        if let Some(i) = (0..scopes.len()).find(|&i| {
            !removed[i]
                && plain(&scopes[i])
                && scopes[i].items.iter().all(|(_, p)| *p)
                && signature(&scopes[i]) == sig
        }) {
            removed[i] = true;
            removed[j] = true;
        }
    }
    scopes
        .into_iter()
        .zip(removed)
        .filter(|(_, r)| !r)
        .map(|(s, _)| s)
        .collect()
}

/// Normal form plus the unsatisfiable disjuncts that were dropped.
pub fn normalize_with_diagnostics(
    t: &HeapTerm,
    env: &Env,
) -> Result<(NormalForm, Vec<Diagnostic>), AlgebraError> {
    if t.has_partial() || t.has_call() {
        return Err(AlgebraError::NeedsEnv(t.to_string()));
    }
    let scopes = cancel_disjuncts(dnf(t)?);
    let mut diagnostics = Vec::new();
    if let Some(s) = scopes.iter().find(|s| s.falsum) {
        diagnostics.push(Diagnostic {
            disjunct: s.to_term().to_string(),
            unsat: Unsat::new(UnsatReason::ExplicitFalse, Vec::new()),
        });
        return Ok((NormalForm::falsum(), diagnostics));
    }
    let mut comps: Vec<Component> = Vec::new();
    let mut any_sat = scopes.is_empty();
    for scope in &scopes {
        let rest = cancel_items(scope)?;
        if let Some(unsat) = check_scope(scope, &rest, env)? {
            diagnostics.push(Diagnostic {
                disjunct: scope.to_term().to_string(),
                unsat,
            });
            continue;
        }
        any_sat = true;
        if scope.open {
            comps.push(Component::new(rest, true));
        } else {
            comps.extend(
                canonize(scope, rest)?
                    .into_iter()
                    .map(|hs| Component::new(hs, false)),
            );
        }
    }
    if !any_sat {
        return Ok((NormalForm::falsum(), diagnostics));
    }
    comps.sort_by_cached_key(Component::key);
    comps.dedup();
    Ok((
        NormalForm {
            disjuncts: comps,
            satisfiable: true,
        },
        diagnostics,
    ))
}

/// Lifts `||` to the top, cancels inverses, drops unsatisfiable disjuncts
/// and sorts. An explicit `false` makes the whole form unsatisfiable.
pub fn normalize(t: &HeapTerm, env: &Env) -> Result<NormalForm, AlgebraError> {
    normalize_with_diagnostics(t, env).map(|(nf, _)| nf)
}

/// Cancels heaplet/inverse pairs per scope and splits separated parts.
/// Terms without inverses are returned unchanged.
pub fn cancel(t: &HeapTerm) -> Result<HeapTerm, AlgebraError> {
    if !t.has_inverse() {
        return Ok(t.clone());
    }
    let mut parts = Vec::new();
    for scope in dnf(t)? {
        let rest = cancel_items(&scope)?;
        let open = scope.open;
        for hs in canonize(&scope, rest)? {
            let mut items: Vec<HeapTerm> = hs.into_iter().map(HeapTerm::from).collect();
            if open {
                items.push(HeapTerm::TrueTotal);
            }
            parts.push(HeapTerm::conj_all(items));
        }
        if scope.falsum {
            parts.push(HeapTerm::FalseTotal);
        }
    }
    Ok(HeapTerm::disj_all(parts))
}

pub fn equiv(t1: &HeapTerm, t2: &HeapTerm, env: &Env) -> Result<bool, AlgebraError> {
    Ok(normalize(t1, env)? == normalize(t2, env)?)
}

/// Edge-level difference between an expected and an actual heap.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Diff {
    pub matched: Vec<Heaplet>,
    pub missing: Vec<Heaplet>,
    pub extra: Vec<Heaplet>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

impl fmt::Display for Diff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "emp");
        }
        for h in &self.missing {
            writeln!(f, "missing: {h}")?;
        }
        for h in &self.extra {
            writeln!(f, "extra: {h}")?;
        }
        for h in &self.matched {
            writeln!(f, "matched: {h}")?;
        }
        Ok(())
    }
}

/// Residue of `actual * inv(expected)`: heaplets cancelled against each
/// other are matched, leftover inverses are missing, leftover heaplets
/// extra.
pub fn diff(expected: &HeapTerm, actual: &HeapTerm, env: &Env) -> Result<Diff, AlgebraError> {
    let (e, a) = (normalize(expected, env)?, normalize(actual, env)?);
    let mut pool: BTreeMap<&Heaplet, usize> = BTreeMap::new();
    for h in e.heaplets() {
        *pool.entry(h).or_default() += 1;
    }
    let mut out = Diff::default();
    for h in a.heaplets() {
        match pool.get_mut(h) {
            Some(n) if *n > 0 => {
                *n -= 1;
                out.matched.push(h.clone());
            }
            _ => out.extra.push(h.clone()),
        }
    }
    for (h, n) in pool {
        out.missing.extend(std::iter::repeat_n(h.clone(), n));
    }
    for v in [&mut out.matched, &mut out.missing, &mut out.extra] {
        v.sort_by_cached_key(Heaplet::sort_key);
    }
    Ok(out)
}
