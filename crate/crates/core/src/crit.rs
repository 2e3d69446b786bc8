//! Critical modules, critical loci, discriminants and the higher critical
//! tower `X = Crit_0 ⊇ Crit_1 ⊇ …`, `Y = Δ_0 ⊇ Δ_1 ⊇ …`.

use serde::Serialize;

use crate::field::Scalar;
use crate::gb::{reduced_structure, LocalIdeal, Reducedness};
use crate::germ::{log_derivations, GermError, GermMap};
use crate::modops::{presentation_of_subquotient, kernel_with_row_ideals, ModError, ModulePresentation, Submodule, DEFAULT_MINOR_GUARD};
use crate::ring::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CritError {
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("projection to the chosen coordinates is not finite on the target")]
    ProjectionNotFinite,
    #[error("derivation image is not inside the tangent module (generator {index})")]
    DerivationsOutsideTangent { index: usize },
}

/// Knobs shared by the tower, the classifier and the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerOptions {
    pub max_depth: usize,
    pub radical_bound: u32,
    pub minor_guard: usize,
    /// Replace crit ideals by certified radicals when available.
    pub reduce: bool,
}

impl Default for TowerOptions {
    fn default() -> Self {
        TowerOptions { max_depth: 5, radical_bound: 8, minor_guard: DEFAULT_MINOR_GUARD, reduce: true }
    }
}

/// `T = {h ∈ (R/S)^m : dq|_f(h) = 0 in R/S for q ∈ Q}`.
pub fn tangent_module<F: Scalar>(f: &GermMap<F>, q: &LocalIdeal<F>, s: &LocalIdeal<F>) -> Submodule<F> {
    let m = f.m();
    let rows: Vec<Vec<Polynomial<F>>> = q
        .generators()
        .iter()
        .map(|g| (0..m).map(|l| f.pullback(&g.diff(l))).collect())
        .collect();
    kernel_with_row_ideals(s, m, &rows, &vec![s.clone(); rows.len()])
}

/// `{ξ(f)}` for `ξ` preserving every ideal in `constraints`, over `R/S`.
pub fn derivation_image<F: Scalar>(f: &GermMap<F>, constraints: &[LocalIdeal<F>], s: &LocalIdeal<F>) -> Submodule<F> {
    let ders = log_derivations(f.source(), constraints);
    let gens = ders
        .gens
        .iter()
        .map(|xi| f.components().iter().map(|c| crate::germ::DerivationModule::apply(xi, c)).collect::<Vec<_>>())
        .filter(|v: &Vec<Polynomial<F>>| !v.iter().all(|p| s.contains(p)))
        .collect();
    Submodule::new(s, f.m(), gens)
}

/// `C_{j+1} = T_{Crit_j → Δ_j} / (R_{Crit_j} ⊗ Der_{Crit_0…Crit_j} f)`.
///
/// `prior` holds `I_{Crit_0} = J_X, …, I_{Crit_j}` and `disc` is `I_{Δ_j}`.
pub fn critical_module_with<F: Scalar>(
    f: &GermMap<F>,
    prior: &[LocalIdeal<F>],
    disc: &LocalIdeal<F>,
) -> Result<ModulePresentation<F>, CritError> {
    let s = prior.last().expect("at least the source ideal");
    let t = tangent_module(f, disc, s);
    let d = derivation_image(f, prior, s);
    let p = presentation_of_subquotient(&t, &d).map_err(|e| match e {
        ModError::NotContained { index } => CritError::DerivationsOutsideTangent { index },
        other => CritError::Module(other),
    })?;
    Ok(p.minimize())
}

/// Critical module at level `j` from the prior crit ideals; the discriminant
/// of the last one is computed here.
pub fn critical_module<F: Scalar>(f: &GermMap<F>, prior: &[LocalIdeal<F>]) -> Result<ModulePresentation<F>, CritError> {
    let j = prior.len() - 1;
    let disc = if j == 0 { f.image_ideal(None).ideal } else { discriminant(f, &prior[j]) };
    critical_module_with(f, prior, &disc)
}

/// First critical locus with its raw Fitting ideal and the structure used.
#[derive(Clone, Debug)]
pub struct CritLocus<F: Scalar> {
    /// `Fitt_0(C) + J_X`.
    pub fitting: LocalIdeal<F>,
    /// Ideal carried forward: the certified radical when one exists.
    pub ideal: LocalIdeal<F>,
    pub reducedness: Reducedness,
    pub module: Option<ModulePresentation<F>>,
    /// The corestricted target was the point, so `Crit = X` by convention.
    pub point_target: bool,
}

fn finish_locus<F: Scalar>(fitting: LocalIdeal<F>, opts: &TowerOptions) -> (LocalIdeal<F>, Reducedness) {
    if opts.reduce {
        reduced_structure(&fitting, opts.radical_bound)
    } else {
        (fitting, Reducedness::UnreducedFallback { bound: opts.radical_bound })
    }
}

fn is_point<F: Scalar>(ideal: &LocalIdeal<F>) -> bool {
    !ideal.is_unit() && ideal.contains_ideal(&LocalIdeal::maximal(ideal.ring()))
}

/// `Crit_X f` as the support of the critical module, after corestriction.
pub fn critical_locus<F: Scalar>(f: &GermMap<F>, opts: &TowerOptions) -> Result<CritLocus<F>, CritError> {
    f.validate()?;
    let g = f.corestrict();
    if is_point(g.target_ideal()) {
        let ideal = g.source_ideal().clone();
        return Ok(CritLocus {
            fitting: ideal.clone(),
            ideal,
            reducedness: Reducedness::UnreducedFallback { bound: opts.radical_bound },
            module: None,
            point_target: true,
        });
    }
    let module = critical_module_with(&g, std::slice::from_ref(g.source_ideal()), g.target_ideal())?;
    let fitting = module.fitting_ideal(0, opts.minor_guard)?;
    let (ideal, reducedness) = finish_locus(fitting.clone(), opts);
    Ok(CritLocus { fitting, ideal, reducedness, module: Some(module), point_target: false })
}

/// `Δ = f(Crit)`: elimination of `J_X + crit + (y − f)`, plus `J_Y`.
pub fn discriminant<F: Scalar>(f: &GermMap<F>, crit: &LocalIdeal<F>) -> LocalIdeal<F> {
    f.image_ideal(Some(crit)).ideal
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "level", rename_all = "kebab-case")]
pub enum Termination {
    Stabilized(usize),
    PointDiscriminant(usize),
    Empty(usize),
    DepthLimit(usize),
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Stabilized(j) => write!(f, "stabilized({j})"),
            Termination::PointDiscriminant(j) => write!(f, "point-discriminant({j})"),
            Termination::Empty(j) => write!(f, "empty({j})"),
            Termination::DepthLimit(j) => write!(f, "depth-limit({j})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CritLevel<F: Scalar> {
    pub index: usize,
    pub crit: LocalIdeal<F>,
    /// Raw `Fitt_0(C_j) + I_{Crit_{j-1}}`; absent at level 0.
    pub fitting: Option<LocalIdeal<F>>,
    pub disc: LocalIdeal<F>,
    pub module: Option<ModulePresentation<F>>,
    pub reducedness: Option<Reducedness>,
    /// The discriminant is the closure of a non-finite image.
    pub image_is_closure: bool,
}

#[derive(Clone, Debug)]
pub struct CritTower<F: Scalar> {
    /// The corestricted map the tower was built for.
    pub map: GermMap<F>,
    pub levels: Vec<CritLevel<F>>,
    pub termination: Termination,
}

/// Builds the tower level by level until it empties, stabilizes, reaches a
/// point discriminant or hits `max_depth`.
pub fn critical_tower<F: Scalar>(f: &GermMap<F>, opts: &TowerOptions) -> Result<CritTower<F>, CritError> {
    f.validate()?;
    let g = f.corestrict();
    let level0 = CritLevel {
        index: 0,
        crit: g.source_ideal().clone(),
        fitting: None,
        disc: g.target_ideal().clone(),
        module: None,
        reducedness: None,
        image_is_closure: !g.is_finite_on(None),
    };
    let mut levels = vec![level0];
    if is_point(g.target_ideal()) {
        return Ok(CritTower { map: g, levels, termination: Termination::PointDiscriminant(0) });
    }
    loop {
        let j = levels.len() - 1;
        if j == opts.max_depth {
            return Ok(CritTower { map: g, levels, termination: Termination::DepthLimit(j) });
        }
        let prior: Vec<LocalIdeal<F>> = levels.iter().map(|l| l.crit.clone()).collect();
        let module = critical_module_with(&g, &prior, &levels[j].disc)?;
        let fitting = module.fitting_ideal(0, opts.minor_guard)?;
        let (crit, red) = finish_locus(fitting.clone(), opts);
        let img = g.image_ideal(Some(&crit));
        let next = CritLevel {
            index: j + 1,
            crit,
            fitting: Some(fitting),
            disc: img.ideal,
            module: Some(module),
            reducedness: Some(red),
            image_is_closure: img.closure,
        };
        let k = j + 1;
        let term = if next.crit.is_unit() {
            Some(Termination::Empty(k))
        } else if next.crit.equal(&levels[j].crit) {
            Some(Termination::Stabilized(k))
        } else if is_point(&next.disc) {
            Some(Termination::PointDiscriminant(k))
        } else {
            None
        };
        levels.push(next);
        if let Some(t) = term {
            return Ok(CritTower { map: g, levels, termination: t });
        }
    }
}

/// Outcome of computing `Crit_X f` through a finite projection `π` of `Y`.
#[derive(Clone, Debug)]
pub struct CoveringReport<F: Scalar> {
    pub crit_f: CritLocus<F>,
    pub crit_projected: CritLocus<F>,
    /// `Fitt_0(Ω_{Y/k^{m'}})` in the target.
    pub ramification: LocalIdeal<F>,
    /// Its pullback to the source, plus `J_X`.
    pub pulled_back: LocalIdeal<F>,
    pub hypothesis_certified: bool,
    pub ideals_equal: bool,
}

/// Ramification ideal of the projection of `Y` keeping coordinates `keep`.
pub fn ramification_ideal<F: Scalar>(f: &GermMap<F>, keep: &[usize], guard: usize) -> Result<LocalIdeal<F>, CritError> {
    let jy = f.target_ideal();
    let dropped: Vec<usize> = (0..f.m()).filter(|l| !keep.contains(l)).collect();
    let rels: Vec<Vec<Polynomial<F>>> = jy.generators().iter().map(|q| dropped.iter().map(|&l| q.diff(l)).collect()).collect();
    Ok(ModulePresentation::new(jy, dropped.len(), rels).fitting_ideal(0, guard)?)
}

/// Whether no irreducible component of `V(crit)` lies inside `V(pulled)`,
/// decided only in the cases with an exact certificate.
fn no_component_inside<F: Scalar>(crit: &LocalIdeal<F>, pulled: &LocalIdeal<F>, opts: &TowerOptions) -> bool {
    if crit.is_unit() || pulled.is_unit() {
        return true;
    }
    let (red, cert) = reduced_structure(crit, opts.radical_bound);
    let prime = matches!(&cert, Reducedness::Reduced { reason } if reason == "smooth" || reason == "zero-dimensional" || reason == "zero-ideal");
    prime && pulled.generators().iter().any(|p| !red.contains(p))
}

/// `Crit_X f` versus `Crit_X(π ∘ f)` for the coordinate projection keeping
/// `keep`, with a certificate for the covering hypothesis.
pub fn crit_via_covering<F: Scalar>(f: &GermMap<F>, keep: &[usize], opts: &TowerOptions) -> Result<CoveringReport<F>, CritError> {
    f.validate()?;
    let target = f.target();
    let fibre = f.target_ideal().with_generators(keep.iter().map(|&l| Polynomial::var(target, l)));
    if !fibre.quotient_dimension().is_finite() {
        return Err(CritError::ProjectionNotFinite);
    }
    let names: Vec<&str> = keep.iter().map(|&l| target.names()[l].as_str()).collect();
    let small = crate::ring::Ring::new(&names, target.field()).expect("subset of valid names");
    let comps: Vec<Polynomial<F>> = keep.iter().map(|&l| f.components()[l].clone()).collect();
    let projected = GermMap::new(f.source_ideal().clone(), LocalIdeal::zero(&small), comps)?;
    let crit_f = critical_locus(f, opts)?;
    let crit_projected = critical_locus(&projected, opts)?;
    let ramification = ramification_ideal(f, keep, opts.minor_guard)?;
    let pulled_back = f.source_ideal().sum(&f.pullback_ideal(&ramification));
    let hypothesis_certified =
        no_component_inside(&crit_f.ideal, &pulled_back, opts) && no_component_inside(&crit_projected.ideal, &pulled_back, opts);
    let ideals_equal = crit_f.ideal.equal(&crit_projected.ideal);
    Ok(CoveringReport { crit_f, crit_projected, ramification, pulled_back, hypothesis_certified, ideals_equal })
}
