//! Periodicity analysis of eta: exact Per-membership, the non-periodic
//! position set, coprime-scaling obstructions and the minimal family,
//! support counts modulo members, periodic structures, the constructive
//! matching shift with its window-equality certificate, skeleton maps, and
//! the shift-space metric.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::family::{lcm_of, prime_ideals_by_norm, BFamily, Cell, EtaWindow};
use crate::ideal::{split_element, Ideal};
use crate::progression::ResidueTable;
use crate::ring::{Element, FolnerBox, RingOfIntegers};
use crate::Caps;

/// Periodicity status of one position with respect to one period ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodStatus {
    /// eta is identically 1 on the whole coset.
    PeriodicOne,
    /// eta is identically 0 on the whole coset.
    PeriodicZero,
    NotPeriodic,
}

/// Whether a verdict is a proof or only window evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictMode {
    Exact,
    WindowOnly { radius: u32 },
}

#[derive(Debug, Clone)]
pub struct PeriodVerdict {
    pub position: Element,
    pub period: Ideal,
    pub status: PeriodStatus,
    pub mode: VerdictMode,
}

/// Per-stage classification context, built once per period ideal.
struct StageClassifier<'a> {
    family: &'a BFamily,
    period: Ideal,
    /// finite families: residue table folded along the period
    finite: Option<Vec<crate::progression::ClassFold>>,
    /// gcd of the scale with the period: one-periodicity for scaled primes
    /// holds exactly off this ideal
    scale_base: Option<Ideal>,
    /// generators of the scale ideal, for scaled-prime families
    scale_generators: Option<Vec<Element>>,
}

impl<'a> StageClassifier<'a> {
    fn new(family: &'a BFamily, period: &Ideal, caps: &Caps) -> Result<Self, Error> {
        let finite = match family.finite_members() {
            Some(members) => {
                let modulus = lcm_of(&members)?.intersect(period);
                let table = ResidueTable::build(&members, &modulus, caps)?;
                Some(table.fold_classes(period, caps)?)
            }
            None => None,
        };
        let (scale_base, scale_generators) = match family {
            BFamily::ScaledPrimes { scale, exclude } => {
                if !exclude.is_empty() {
                    return Err(Error::ExactnessUnavailable(
                        "zero-periodicity with excluded primes".into(),
                    ));
                }
                (Some(scale.sum(period)), Some(principal_generators(scale)?))
            }
            _ => (None, None),
        };
        Ok(StageClassifier { family, period: period.clone(), finite, scale_base, scale_generators })
    }

    /// Exact classification of one position; `eta` is the value at `g`.
    fn classify(&self, g: &Element, eta: u8, caps: &Caps) -> Result<PeriodStatus, Error> {
        if let Some(folds) = &self.finite {
            let fold = folds[ResidueTable::class_index(&self.period, g)];
            return Ok(match (fold.has_multiple, fold.has_free) {
                (true, false) => PeriodStatus::PeriodicZero,
                (false, true) => PeriodStatus::PeriodicOne,
                _ => PeriodStatus::NotPeriodic,
            });
        }
        if eta == 1 {
            // eta = 1 on the whole coset iff g lies in no gcd(b, period);
            // those gcds always include the unit ideal for prime squares
            // (primes away from the period), and for the scaled families every
            // value lies inside gcd(scale, period), which appears itself.
            return Ok(match self.family {
                BFamily::PrimeSquares { .. } => PeriodStatus::NotPeriodic,
                BFamily::ScaledPrimes { .. } => {
                    let base = self.scale_base.as_ref().unwrap();
                    if base.contains_element(g) {
                        PeriodStatus::NotPeriodic
                    } else {
                        PeriodStatus::PeriodicOne
                    }
                }
                _ => unreachable!("finite families classified by table"),
            });
        }
        // eta(g) = 0: decide whether the whole coset g + period is multiples.
        match self.family {
            BFamily::PrimeSquares { ring } => {
                // Exact: a coset avoiding every squared-prime congruence
                // contains squarefree integers, so containment holds iff a
                // single member divides (g) + period.
                let gcd_ideal = if g.is_zero() {
                    self.period.clone()
                } else {
                    Ideal::principal(*ring, g).sum(&self.period)
                };
                let covered = !self.family.members_containing(&gcd_ideal, caps)?.is_empty();
                Ok(if covered { PeriodStatus::PeriodicZero } else { PeriodStatus::NotPeriodic })
            }
            BFamily::ScaledPrimes { scale, .. } => {
                // The multiples are exactly the elements of the scale whose
                // principal ideal is not the scale itself, so the coset is
                // all-multiples iff it lies in the scale and misses every
                // generator.
                let in_scale = scale.contains_element(g) && scale.contains(&self.period);
                if !in_scale {
                    return Ok(PeriodStatus::NotPeriodic);
                }
                let gens = self.scale_generators.as_ref().expect("validated in new()");
                let hit = gens.iter().any(|gen| self.period.congruent(gen, g));
                Ok(if hit { PeriodStatus::NotPeriodic } else { PeriodStatus::PeriodicZero })
            }
            _ => unreachable!("finite families classified by table"),
        }
    }

    /// Classification that computes eta itself (single queries).
    fn classify_fresh(&self, g: &Element, caps: &Caps) -> Result<PeriodStatus, Error> {
        let eta = if self.finite.is_some() { 0 } else { self.family.eta_at(g, caps)? };
        self.classify(g, eta, caps)
    }
}

/// Generators of a principal ideal in a ring with finite unit group
/// (empty when the ideal is not principal).
fn principal_generators(ideal: &Ideal) -> Result<Vec<Element>, Error> {
    let ring = ideal.ring();
    let units = ring.finite_units().ok_or_else(|| {
        Error::ExactnessUnavailable("generator enumeration needs a finite unit group".into())
    })?;
    let n = ideal.norm();
    match ring.degree() {
        1 => {
            let g = Element { x: n, y: BigInt::zero() };
            Ok(units.iter().map(|u| ring.mul(&g, u)).collect())
        }
        _ => {
            // |N(x + y w)| grows quadratically in the coordinates, so every
            // generator lies in a small box.
            let bound = 2 * n.sqrt().to_i64().unwrap_or(i64::MAX / 4) + 2;
            let mut out: Vec<Element> = Vec::new();
            for x in -bound..=bound {
                for y in -bound..=bound {
                    let e = ring.element(x, y);
                    if e.is_zero() || !ideal.contains_element(&e) {
                        continue;
                    }
                    if ring.norm(&e).magnitude() == n.magnitude() {
                        out.push(e);
                    }
                }
            }
            out.sort();
            out.dedup();
            Ok(out)
        }
    }
}

/// Exact Per-membership of one position for one period ideal.
pub fn per_membership(
    family: &BFamily,
    g: &Element,
    period: &Ideal,
    caps: &Caps,
) -> Result<PeriodVerdict, Error> {
    let classifier = StageClassifier::new(family, period, caps)?;
    let status = classifier.classify_fresh(g, caps)?;
    Ok(PeriodVerdict {
        position: g.clone(),
        period: period.clone(),
        status,
        mode: VerdictMode::Exact,
    })
}

/// An ideal scale `d` admitting an infinite pairwise coprime collection `C`
/// with `d * C` inside the family, witnessed by an initial segment of `C`.
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub scale: Ideal,
    pub witness: Vec<Ideal>,
}

#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub obstructions: Vec<Obstruction>,
    pub exhaustive: bool,
}

impl ObstructionReport {
    pub fn is_empty(&self) -> bool {
        self.obstructions.is_empty()
    }

    /// Is the position inside some obstruction scale?
    pub fn covers(&self, g: &Element) -> bool {
        self.obstructions.iter().any(|o| o.scale.contains_element(g))
    }
}

/// Detect the coprime-scaling obstructions of the family. For the built-in
/// rule families the set is known in closed form and only the witness
/// segment is machine-checked:
///
/// * finite lists admit none (an infinite coprime collection cannot fit);
/// * prime squares: the unit ideal, witnessed by the members themselves;
/// * scaled primes: exactly the scale;
/// * powers-times-coprime: none (all members share the even part, so no
///   two members are coprime, while the scaled copies would need distinct
///   2-adic valuations).
pub fn scaling_obstructions(family: &BFamily, caps: &Caps) -> Result<ObstructionReport, Error> {
    let report = match family {
        BFamily::Finite(_) | BFamily::PowersTimesCoprime { .. } => {
            ObstructionReport { obstructions: vec![], exhaustive: true }
        }
        BFamily::PrimeSquares { ring } => {
            let witness = family.enumerate(3, caps)?;
            ObstructionReport {
                obstructions: vec![Obstruction { scale: Ideal::unit(*ring), witness }],
                exhaustive: true,
            }
        }
        BFamily::ScaledPrimes { scale, exclude } => {
            let primes = prime_ideals_by_norm(scale.ring(), 3 + exclude.len(), caps)?;
            let witness: Vec<Ideal> = primes
                .into_iter()
                .filter(|p| !exclude.contains(p))
                .take(3)
                .collect();
            ObstructionReport {
                obstructions: vec![Obstruction { scale: scale.clone(), witness }],
                exhaustive: true,
            }
        }
    };
    // machine-check the witness segments
    for ob in &report.obstructions {
        for (i, c) in ob.witness.iter().enumerate() {
            let member = ob.scale.product(c);
            assert!(
                family.contains(&member, caps)?,
                "witness member {member} not in family"
            );
            for prev in &ob.witness[..i] {
                assert!(c.is_coprime(prev), "witness segment not pairwise coprime");
            }
        }
    }
    Ok(report)
}

/// The family generating the unique minimal subshift: adjoin the obstruction
/// scales and reduce to the primitive core. Requires an exhaustive
/// obstruction report.
pub fn minimal_family(family: &BFamily, caps: &Caps) -> Result<BFamily, Error> {
    let report = scaling_obstructions(family, caps)?;
    if !report.exhaustive {
        return Err(Error::NonExhaustiveObstructions);
    }
    let result = if report.is_empty() {
        match family {
            BFamily::Finite(f) => BFamily::Finite(f.primitive_reduction()),
            other => other.clone(),
        }
    } else {
        // every member is a multiple of some obstruction scale for the
        // built-ins, so the primitive core is the scales themselves
        let ring = family.ring();
        let scales: Vec<Ideal> = report.obstructions.iter().map(|o| o.scale.clone()).collect();
        let keep: Vec<Ideal> = scales
            .iter()
            .filter(|s| !scales.iter().any(|t| *t != **s && t.contains(s)))
            .cloned()
            .collect();
        BFamily::finite(ring, keep)?
    };
    // the result has no obstructions of its own
    let again = scaling_obstructions(&result, caps)?;
    assert!(again.exhaustive && again.is_empty());
    // eta decreases pointwise on a sample window
    let ring = family.ring();
    let radius = if ring.degree() == 1 { 12 } else { 4 };
    let w_old = family.eta_window(&ring.folner_box(radius), &ring.zero(), caps)?;
    let w_new = result.eta_window(&ring.folner_box(radius), &ring.zero(), caps)?;
    for (a, b) in w_new.values.iter().zip(w_old.values.iter()) {
        assert!(a.bit() <= b.bit(), "minimal family eta must decrease pointwise");
    }
    Ok(result)
}

/// Count the residues r modulo a member whose coset `r + b` is not contained
/// in the multiples; Toeplitz families give exactly `N(b) - 1`.
pub fn support_residue_count(family: &BFamily, b: &Ideal, caps: &Caps) -> Result<BigUint, Error> {
    assert!(family.contains(b, caps)?, "support count requires a member");
    let classifier = StageClassifier::new(family, b, caps)?;
    let mut count = BigUint::zero();
    for r in b.residues(caps.residue_cap)? {
        if classifier.classify_fresh(&r, caps)? != PeriodStatus::PeriodicZero {
            count += BigUint::one();
        }
    }
    Ok(count)
}

/// The set of non-periodic positions of eta inside a box, computed two ways
/// and cross-checked: directly as (obstruction multiples) ∩ (free set), and
/// as the box minus the union of Per sets along the saturated filtration,
/// iterated until the uncovered set stabilizes twice.
#[derive(Debug, Clone)]
pub struct NonperiodicReport {
    /// Certified non-periodic positions (direct method).
    pub positions: BTreeSet<Element>,
    /// Complement of the stabilized Per-union (filtration method).
    pub by_filtration: BTreeSet<Element>,
    pub stages_used: usize,
    pub exhaustive: bool,
    pub agree: bool,
}

pub fn nonperiodic_positions(
    family: &BFamily,
    window: &FolnerBox,
    caps: &Caps,
) -> Result<NonperiodicReport, Error> {
    let report = scaling_obstructions(family, caps)?;
    let positions_list = window.elements();
    let etas: BTreeMap<Element, u8> = positions_list
        .iter()
        .map(|g| Ok((g.clone(), family.eta_at(g, caps)?)))
        .collect::<Result<_, Error>>()?;

    // direct method
    let mut direct: BTreeSet<Element> = BTreeSet::new();
    for g in &positions_list {
        if !g.is_zero() && report.covers(g) && etas[g] == 1 {
            direct.insert(g.clone());
        }
    }

    // filtration method: peel off positions as they become periodic
    let mut uncovered: BTreeSet<Element> = positions_list.iter().cloned().collect();
    let mut stable_runs = 0usize;
    let mut stage_count = 1usize;
    let mut stages = family.saturated_filtration(8.min(caps.stage_cap), caps)?;
    let stages_used = loop {
        if stage_count > caps.stage_cap {
            return Err(Error::StageBoundExceeded(caps.stage_cap));
        }
        if stage_count > stages.len() {
            stages = family.saturated_filtration((2 * stages.len()).min(caps.stage_cap), caps)?;
        }
        let s = lcm_of(&stages[stage_count - 1])?;
        let classifier = StageClassifier::new(family, &s, caps)?;
        let before = uncovered.len();
        let mut still: BTreeSet<Element> = BTreeSet::new();
        for g in &uncovered {
            if classifier.classify(g, etas[g], caps)? == PeriodStatus::NotPeriodic {
                still.insert(g.clone());
            }
        }
        uncovered = still;
        if uncovered.len() == before {
            stable_runs += 1;
            if stable_runs >= 2 {
                break stage_count;
            }
        } else {
            stable_runs = 0;
        }
        stage_count += 1;
    };
    let agree = direct == uncovered;
    Ok(NonperiodicReport {
        positions: direct,
        by_filtration: uncovered,
        stages_used,
        exhaustive: report.exhaustive,
        agree,
    })
}

/// The nested periodic-structure ideals `lcm(S_i)` along the saturated
/// filtration, each verified essential on its finite-period stage array.
/// Requires an empty (exhaustive) obstruction report.
pub fn periodic_structure(family: &BFamily, k: usize, caps: &Caps) -> Result<Vec<Ideal>, Error> {
    let report = scaling_obstructions(family, caps)?;
    if !report.exhaustive {
        return Err(Error::NonExhaustiveObstructions);
    }
    if !report.is_empty() {
        return Err(Error::ObstructionsPresent);
    }
    let stages = family.saturated_filtration(k, caps)?;
    let mut out: Vec<Ideal> = Vec::with_capacity(k);
    for stage in &stages {
        let s = lcm_of(stage)?;
        if let Some(prev) = out.last() {
            assert!(prev.contains(&s), "structure ideals must be nested");
        }
        // stage array: indicator of stage-freeness on the quotient by s
        let values: Vec<u8> = s
            .residues(caps.residue_cap)?
            .iter()
            .map(|r| u8::from(!stage.iter().any(|m| m.contains_element(r))))
            .collect();
        let array = crate::essential::PeriodicArray::new(family.ring(), s.clone(), values)?;
        assert!(
            crate::essential::stage_group_is_essential(&array),
            "stage modulus {s} is not an essential group of periods"
        );
        out.push(s);
    }
    Ok(out)
}

/// Outcome of the constructive matching shift: eta restricted to the shifted
/// box equals the minimal family's eta on the centered box, position by
/// position, with explicit membership witnesses at the non-periodic spots.
#[derive(Debug, Clone)]
pub struct MatchingShift {
    pub shift: Element,
    pub stage: usize,
    pub stage_modulus: Ideal,
    /// eta on `box + shift` (values certified by periodicity or witnesses).
    pub shifted_window: EtaWindow,
    /// eta of the minimal family on the centered box.
    pub minimal_window: EtaWindow,
    /// member ideal covering each non-periodic position after the shift
    pub witnesses: Vec<(Element, Ideal)>,
}

/// Construct a shift M with `eta | (F_N + M)` equal to the minimal eta on
/// F_N, by chaining congruences through pairwise coprime members above each
/// obstruction scale. The window equality is verified before returning.
pub fn matching_shift(family: &BFamily, n: u32, caps: &Caps) -> Result<MatchingShift, Error> {
    let ring = family.ring();
    let window = ring.folner_box(n);
    let report = scaling_obstructions(family, caps)?;
    if !report.exhaustive {
        return Err(Error::NonExhaustiveObstructions);
    }
    let minimal = minimal_family(family, caps)?;
    let minimal_window = minimal.eta_window(&window, &ring.zero(), caps)?;

    if report.is_empty() {
        // eta already equals the minimal eta; the zero shift matches.
        let shifted_window = family.eta_window(&window, &ring.zero(), caps)?;
        assert_eq!(shifted_window.values, minimal_window.values);
        return Ok(MatchingShift {
            shift: ring.zero(),
            stage: 0,
            stage_modulus: Ideal::unit(ring),
            shifted_window,
            minimal_window,
            witnesses: vec![],
        });
    }

    // Stage search: grow the filtration until every position of the box is
    // either certified periodic or a certified non-periodic position, twice
    // in a row.
    let positions = window.elements();
    let etas: BTreeMap<Element, u8> = positions
        .iter()
        .map(|g| Ok((g.clone(), family.eta_at(g, caps)?)))
        .collect::<Result<_, Error>>()?;
    let mut direct: BTreeSet<Element> = BTreeSet::new();
    for g in &positions {
        if !g.is_zero() && report.covers(g) && etas[g] == 1 {
            direct.insert(g.clone());
        }
    }
    let mut chosen: Option<(usize, Ideal, BTreeMap<Element, PeriodStatus>)> = None;
    let mut consecutive = 0usize;
    let mut stages = family.saturated_filtration(8.min(caps.stage_cap), caps)?;
    for stage_count in 1..=caps.stage_cap {
        if stage_count > stages.len() {
            stages = family.saturated_filtration((2 * stages.len()).min(caps.stage_cap), caps)?;
        }
        let s = lcm_of(&stages[stage_count - 1])?;
        let classifier = StageClassifier::new(family, &s, caps)?;
        let mut statuses: BTreeMap<Element, PeriodStatus> = BTreeMap::new();
        let mut uncovered: BTreeSet<Element> = BTreeSet::new();
        for g in &positions {
            let st = classifier.classify(g, etas[g], caps)?;
            if st == PeriodStatus::NotPeriodic {
                uncovered.insert(g.clone());
            }
            statuses.insert(g.clone(), st);
        }
        if uncovered == direct {
            consecutive += 1;
            if consecutive >= 2 {
                chosen = Some((stage_count, s, statuses));
                break;
            }
        } else {
            consecutive = 0;
        }
    }
    let Some((stage, stage_modulus, statuses)) = chosen else {
        return Err(Error::StageBoundExceeded(caps.stage_cap));
    };

    // CRT chain over the non-periodic positions.
    let nonper: Vec<Element> = direct.iter().cloned().collect();
    let mut big_l = stage_modulus.clone();
    let mut scales: Vec<Ideal> = Vec::with_capacity(nonper.len());
    for g in &nonper {
        let scale = report
            .obstructions
            .iter()
            .find(|o| o.scale.contains_element(g))
            .expect("direct positions lie in an obstruction scale")
            .scale
            .clone();
        big_l = big_l.intersect(&scale);
        scales.push(scale);
    }

    let mut chain_members: Vec<Ideal> = Vec::with_capacity(nonper.len()); // d_j * c_j
    let mut shift = ring.zero();
    let mut acc = big_l.clone(); // L ∩ c_1 ∩ ... ∩ c_(j-1)
    for (g, scale) in nonper.iter().zip(scales.iter()) {
        let c = pick_coprime_cofactor(family, scale, &big_l, &chain_members, caps)?;
        let member = scale.product(&c);
        assert!(family.contains(&member, caps)?);
        // want k in acc with  k + shift + g  in  member
        let w = ring.neg(&ring.add(&shift, g));
        assert!(scale.contains_element(&w), "target must lie in the scale");
        let (alpha, _beta) = split_element(&w, &acc, &member)
            .expect("w lies in acc + member = scale");
        assert!(acc.contains_element(&alpha));
        shift = ring.add(&shift, &alpha);
        acc = acc.intersect(&c);
        chain_members.push(member);
    }
    assert!(big_l.contains_element(&shift) || nonper.is_empty());
    // every non-periodic position is covered after the shift
    let mut witnesses: Vec<(Element, Ideal)> = Vec::new();
    for (g, member) in nonper.iter().zip(chain_members.iter()) {
        let moved = ring.add(g, &shift);
        assert!(member.contains_element(&moved), "chain congruence failed at {g}");
        witnesses.push((g.clone(), member.clone()));
    }

    // Assemble the shifted window from certificates.
    let mut values: Vec<Cell> = Vec::with_capacity(positions.len());
    for g in &positions {
        let cell = if let Some(idx) = nonper.iter().position(|h| h == g) {
            let _ = idx;
            Cell::Zero
        } else {
            match statuses[g] {
                PeriodStatus::PeriodicOne => Cell::One,
                PeriodStatus::PeriodicZero => Cell::Zero,
                PeriodStatus::NotPeriodic => unreachable!("classified above"),
            }
        };
        values.push(cell);
    }
    let shifted_window = EtaWindow { window, offset: shift.clone(), values };

    // eq-style window equality with the minimal family's eta.
    assert_eq!(
        shifted_window.values, minimal_window.values,
        "shifted window must reproduce the minimal eta"
    );

    Ok(MatchingShift {
        shift,
        stage,
        stage_modulus,
        shifted_window,
        minimal_window,
        witnesses,
    })
}

/// Pick the smallest-norm cofactor c (member = scale * c in the family)
/// coprime to the accumulated modulus and to all previous chain members.
fn pick_coprime_cofactor(
    family: &BFamily,
    scale: &Ideal,
    big_l: &Ideal,
    previous: &[Ideal],
    caps: &Caps,
) -> Result<Ideal, Error> {
    match family {
        BFamily::PrimeSquares { ring } => {
            let mut count = 16usize;
            loop {
                for p in prime_ideals_by_norm(*ring, count, caps)? {
                    let c = p.product(&p);
                    if c.is_coprime(big_l) && previous.iter().all(|m| c.is_coprime(m)) {
                        return Ok(c);
                    }
                }
                count *= 2;
                if count > 1 << 20 {
                    return Err(Error::ScanBudgetExceeded("coprime cofactor search".into()));
                }
            }
        }
        BFamily::ScaledPrimes { exclude, .. } => {
            let mut count = 16usize;
            loop {
                for p in prime_ideals_by_norm(scale.ring(), count, caps)? {
                    if exclude.contains(&p) {
                        continue;
                    }
                    if p.is_coprime(big_l) && previous.iter().all(|m| p.is_coprime(m)) {
                        return Ok(p);
                    }
                }
                count *= 2;
                if count > 1 << 20 {
                    return Err(Error::ScanBudgetExceeded("coprime cofactor search".into()));
                }
            }
        }
        _ => unreachable!("only obstruction families reach the chain"),
    }
}

/// How much of a box the Per set of one period ideal covers:
/// (periodic positions, box size).
pub fn stage_coverage(
    family: &BFamily,
    window: &FolnerBox,
    period: &Ideal,
    caps: &Caps,
) -> Result<(usize, usize), Error> {
    let classifier = StageClassifier::new(family, period, caps)?;
    let mut covered = 0usize;
    let mut total = 0usize;
    for g in window.elements() {
        total += 1;
        if classifier.classify_fresh(&g, caps)? != PeriodStatus::NotPeriodic {
            covered += 1;
        }
    }
    Ok((covered, total))
}

/// Skeleton map: keep entries at positions periodic for `gamma`, replace the
/// rest by holes.
pub fn skeleton(
    w: &EtaWindow,
    family: &BFamily,
    gamma: &Ideal,
    caps: &Caps,
) -> Result<EtaWindow, Error> {
    let ring = family.ring();
    let classifier = StageClassifier::new(family, gamma, caps)?;
    let mut values = Vec::with_capacity(w.values.len());
    for (rel, cell) in w.iter() {
        let abs = ring.add(&rel, &w.offset);
        let eta = cell.bit().ok_or(Error::HolesPresent)?;
        let status = classifier.classify(&abs, eta, caps)?;
        let out = match status {
            PeriodStatus::PeriodicOne => {
                debug_assert_eq!(cell, Cell::One);
                cell
            }
            PeriodStatus::PeriodicZero => {
                debug_assert_eq!(cell, Cell::Zero);
                cell
            }
            PeriodStatus::NotPeriodic => Cell::Hole,
        };
        values.push(out);
    }
    Ok(EtaWindow { window: w.window, offset: w.offset.clone(), values })
}

/// The shift-space metric evaluated on two hole-free windows of the same
/// geometry: `2^(-m)` where m is the largest box radius on which the windows
/// agree (distance 1 when they already disagree on the radius-1 box). When
/// the windows agree everywhere the value `2^(-radius)` is the certified
/// upper bound.
pub fn metric_distance(x: &EtaWindow, y: &EtaWindow) -> Result<BigRational, Error> {
    if x.window != y.window {
        return Err(Error::GeometryMismatch);
    }
    if x.has_holes() || y.has_holes() {
        return Err(Error::HolesPresent);
    }
    let radius = x.window.radius;
    let mut first_bad: Option<u32> = None;
    for ((rel, a), (_, b)) in x.iter().zip(y.iter()) {
        if a != b {
            let shell = rel
                .x
                .magnitude()
                .max(rel.y.magnitude())
                .to_u32()
                .unwrap_or(u32::MAX);
            first_bad = Some(first_bad.map_or(shell, |f| f.min(shell)));
        }
    }
    let m = match first_bad {
        None => radius,
        Some(bad) => bad.saturating_sub(1),
    };
    Ok(BigRational::new(BigInt::one(), BigInt::from(2).pow(m)))
}

/// Return positions of one block: the shifts g in the scan box for which the
/// window at `offset + g` repeats the window at `offset`.
#[derive(Debug, Clone)]
pub struct BlockReturns {
    pub offset: Element,
    pub radius: u32,
    pub returns: Vec<Element>,
    /// Largest gap between consecutive returns (degree 1 only).
    pub max_gap: Option<BigInt>,
}

/// Scan for block returns; plumbing for the essential-minimality criterion
/// (agreement sets of eta along its own translates are syndetic for Toeplitz
/// families, with gaps bounded by the stage modulus norm).
pub fn syndetic_returns(
    family: &BFamily,
    blocks: &[(u32, Element)],
    scan_radius: u32,
    caps: &Caps,
) -> Result<Vec<BlockReturns>, Error> {
    let ring = family.ring();
    let mut out = Vec::with_capacity(blocks.len());
    for (radius, offset) in blocks {
        let window = ring.folner_box(*radius);
        let pattern = family.eta_window(&window, offset, caps)?;
        let scan = ring.folner_box(scan_radius);
        if (scan.len() * window.len()) as u64 > caps.scan_cap {
            return Err(Error::ScanBudgetExceeded(format!(
                "block scan of {} x {} positions",
                scan.len(),
                window.len()
            )));
        }
        let mut returns: Vec<Element> = Vec::new();
        'shift: for g in scan.elements() {
            let moved = ring.add(offset, &g);
            for (rel, cell) in pattern.iter() {
                let abs = ring.add(&rel, &moved);
                let eta = family.eta_at(&abs, caps)?;
                if Some(eta) != cell.bit() {
                    continue 'shift;
                }
            }
            returns.push(g);
        }
        let max_gap = if ring.degree() == 1 && returns.len() >= 2 {
            let xs: Vec<&BigInt> = returns.iter().map(|e| &e.x).collect();
            Some(
                xs.windows(2)
                    .map(|w| w[1] - w[0])
                    .max()
                    .unwrap(),
            )
        } else {
            None
        };
        out.push(BlockReturns {
            offset: offset.clone(),
            radius: *radius,
            returns,
            max_gap,
        });
    }
    Ok(out)
}
