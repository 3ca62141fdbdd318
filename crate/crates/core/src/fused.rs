//! Fused R-matrices over ordered index sets and their property suite.
//!
//! For ordered index sets A = <a1 .. ap> and B = <b1 .. bq> the fused
//! operator is the ordered product
//!
//!   R_{A B} = prod over j = 1..q of ( prod over i = 1..p of
//!             R_{a_i b_j}( arg(lambda_{a_i}, lambda_{b_j}) ) )
//!
//! read left to right: the second set indexes the outer blocks, the first
//! set runs inside each block. Barred (reversed) sets enter through their
//! member order; nothing else changes.
//!
//! The per-factor argument is part of the data. The four rules that occur
//! in the exchange identities are codified here once and for all:
//!
//!   Diff      lambda_a - lambda_b
//!   DiffRev   lambda_b - lambda_a
//!   Sum       lambda_a + lambda_b
//!   NegShift  -lambda_a - lambda_b - 2 rho
//!
//! Resolved forms of the four mixed-set exchange identities used by the
//! recursion proofs (verified by `verify_fused_ybe`; `S` is Sum, `D` is
//! Diff, `D'` is DiffRev, `Rbar` is NegShift; `1` is a single space):
//!
//!   fyb1 :  S_{N-,1} S_{M',1} D_{M',bar N-}  =  D_{M',bar N-} S_{M',1} S_{N-,1}
//!   fyb2 :  S_{N-,1} S_{N-,M'} D'_{1,M'}     =  D'_{1,M'} S_{N-,M'} S_{N-,1}
//!   dfyb1:  D_{N-,bar M'} Rbar_{1,bar M'} Rbar_{1,bar N-}
//!             =  Rbar_{1,bar N-} Rbar_{1,bar M'} D_{N-,bar M'}
//!   dfyb2:  D'_{bar M',1} Rbar_{bar M',bar N-} Rbar_{1,bar N-}
//!             =  Rbar_{1,bar N-} Rbar_{bar M',bar N-} D'_{bar M',1}
//!
//! dfyb1 and dfyb2 are the full transposes of fyb1 and fyb2 evaluated at
//! reflected spectral points, which is why no M factors appear: conjugating
//! any factor by M's is neutral here by the M-commutation axiom. All four
//! reduce to the plain three-space exchange relation when every set is a
//! singleton.

use std::sync::Arc;


use crate::error::{CoreError, Result};
use crate::multiop::{C64, MultiOp};
use crate::report::{AxiomReport, CheckRow, TOL_COMPOSITE};
use crate::rmodel::RModel;
use crate::space::{IndexSet, Label, Space, SpaceKind, SpaceRegistry};

/// Per-factor spectral argument rule of a fused product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgRule {
    Diff,
    DiffRev,
    Sum,
    NegShift,
}

impl ArgRule {
    pub fn apply(&self, rho: C64, la: C64, lb: C64) -> C64 {
        match self {
            ArgRule::Diff => la - lb,
            ArgRule::DiffRev => lb - la,
            ArgRule::Sum => la + lb,
            ArgRule::NegShift => -la - lb - rho * 2.0,
        }
    }
}

/// A fused R-matrix: the ordered product over (left, right) with a stored
/// argument rule, so it can be rebuilt and re-verified after spectral
/// substitution.
#[derive(Clone, Debug)]
pub struct FusedR {
    pub model: Arc<RModel>,
    pub left: IndexSet,
    pub right: IndexSet,
    pub rule: ArgRule,
    pub op: MultiOp,
}

impl FusedR {
    /// Recompute the ordered product from the registry's current spectral
    /// values; the stored operator must match it exactly.
    pub fn rebuild(&self, registry: &SpaceRegistry) -> Result<MultiOp> {
        fuse_product(&self.model, registry, &self.left, &self.right, self.rule)
    }

    /// Run the full property suite over this fused operator's index sets.
    pub fn verify_properties(&self, registry: &SpaceRegistry) -> Result<AxiomReport> {
        verify_fused_properties(&self.model, registry, &self.left, &self.right)
    }
}

fn check_aux(space: &Space, model: &RModel) -> Result<()> {
    if space.kind != SpaceKind::Auxiliary {
        return Err(CoreError::Config(format!(
            "space `{}` is not auxiliary",
            space.label
        )));
    }
    if space.dim != model.local_dim() {
        return Err(CoreError::DimMismatch {
            label: space.label.0.clone(),
            expected: model.local_dim(),
            found: space.dim,
        });
    }
    space.spectral_value().map(|_| ())
}

/// The ordered fused product with an arbitrary per-factor argument map.
pub fn fuse_map(
    model: &RModel,
    registry: &SpaceRegistry,
    left: &IndexSet,
    right: &IndexSet,
    arg: impl Fn(C64, C64) -> C64,
) -> Result<MultiOp> {
    left.is_disjoint(right)?;
    if left.card() == 0 || right.card() == 0 {
        return Err(CoreError::Config("fused sets must be non-empty".into()));
    }
    let ls = registry.resolve(left)?;
    let rs = registry.resolve(right)?;
    for s in ls.iter().chain(rs.iter()) {
        check_aux(s, model)?;
    }
    let mut factors = Vec::with_capacity(ls.len() * rs.len());
    for b in &rs {
        let lb = b.spectral_value()?;
        for a in &ls {
            let la = a.spectral_value()?;
            factors.push(model.r(a, b, arg(la, lb))?);
        }
    }
    MultiOp::product(&factors)
}

/// The ordered fused product under one of the named argument rules.
pub fn fuse_product(
    model: &RModel,
    registry: &SpaceRegistry,
    left: &IndexSet,
    right: &IndexSet,
    rule: ArgRule,
) -> Result<MultiOp> {
    let rho = model.rho();
    fuse_map(model, registry, left, right, |la, lb| {
        rule.apply(rho, la, lb)
    })
}

/// Build a [`FusedR`] carrying its sets and argument rule.
pub fn fuse(
    model: &Arc<RModel>,
    registry: &SpaceRegistry,
    left: &IndexSet,
    right: &IndexSet,
    rule: ArgRule,
) -> Result<FusedR> {
    let op = fuse_product(model, registry, left, right, rule)?;
    Ok(FusedR {
        model: Arc::clone(model),
        left: left.clone(),
        right: right.clone(),
        rule,
        op,
    })
}

/// Verify the transposition identity, both generalized crossing relations,
/// fused unitarity and crossing unitarity (recording their scalars), and
/// the commutation with M_N M_M'.
pub fn verify_fused_properties(
    model: &Arc<RModel>,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
    m_set: &IndexSet,
) -> Result<AxiomReport> {
    let mut report = AxiomReport::new(model.name(), 0);
    let rho = model.rho();
    let n_spaces = registry.resolve(n_set)?;
    let m_spaces = registry.resolve(m_set)?;
    let n_labels: Vec<Label> = n_spaces.iter().map(|s| s.label.clone()).collect();
    let m_labels: Vec<Label> = m_spaces.iter().map(|s| s.label.clone()).collect();
    let all_labels: Vec<Label> = n_labels.iter().chain(m_labels.iter()).cloned().collect();

    // Transposition identity: full transpose maps (N, M') to (bar M', bar N)
    // with per-pair arguments preserved.
    {
        let mut row = CheckRow::new("fused", "p1", model.name(), TOL_COMPOSITE);
        let lhs = fuse_product(model, registry, n_set, m_set, ArgRule::Diff)?
            .partial_transpose(&all_labels)?;
        let rhs = fuse_product(model, registry, &m_set.bar(), &n_set.bar(), ArgRule::DiffRev)?;
        row.record(MultiOp::rel_residual(&lhs, &rhs)?);
        report.push(row);
    }

    if model.strict_crossing() {
        // Distributing the V conjugation over the blocks of the fused
        // product costs one factor of V^2 per crossing of a block
        // boundary, so models with V^2 = -1 satisfy the generalized
        // crossing relations up to an explicit sign:
        //   first form  picks up (V^2)^{n (m-1)},
        //   second form picks up (V^2)^{m (n-1)},
        // with n = card(N), m = card(M'). The sign is applied and noted.
        let v2 = {
            let vv = model.v_on(&n_spaces[0]);
            MultiOp::compose(&vv, &vv)?.matrix()[(0, 0)]
        };
        let sign = |k: usize| if k.is_multiple_of(2) { C64::new(1.0, 0.0) } else { v2 };
        let (n_card, m_card) = (n_set.card(), m_set.card());

        // First form: R_{bar N, M'}(diff) = V_N R_{N M'}(reflected)^{t_M'} V_N.
        {
            let s = sign(n_card * (m_card - 1));
            let mut row = CheckRow::new("fused", "gcross1", model.name(), TOL_COMPOSITE)
                .with_note(format!("block sign ({:.0},{:.0})", s.re, s.im));
            let lhs = fuse_product(model, registry, &n_set.bar(), m_set, ArgRule::Diff)?;
            let inner = fuse_map(model, registry, n_set, m_set, |la, lb| lb - la - rho)?
                .partial_transpose(&m_labels)?;
            let vn = model.v_many(&n_spaces)?;
            let rhs = MultiOp::product(&[vn.clone(), inner, vn])?.scale(s);
            row.record(MultiOp::rel_residual(&lhs, &rhs)?);
            report.push(row);
        }

        // Second form: R_{N, bar M'}(diff) = V_M'^t R_{N M'}(reflected)^{t_N} V_M'^t.
        {
            let s = sign(m_card * (n_card - 1));
            let mut row = CheckRow::new("fused", "gcross2", model.name(), TOL_COMPOSITE)
                .with_note(format!("block sign ({:.0},{:.0})", s.re, s.im));
            let lhs = fuse_product(model, registry, n_set, &m_set.bar(), ArgRule::Diff)?;
            let inner = fuse_map(model, registry, n_set, m_set, |la, lb| lb - la - rho)?
                .partial_transpose(&n_labels)?;
            let vt = model.v_t_many(&m_spaces)?;
            let rhs = MultiOp::product(&[vt.clone(), inner, vt])?.scale(s);
            row.record(MultiOp::rel_residual(&lhs, &rhs)?);
            report.push(row);
        }
    }

    // Fused unitarity; its scalar is the product of the pairwise scalars.
    {
        let mut row = CheckRow::new("fused", "fused_unitarity", model.name(), TOL_COMPOSITE);
        let first = fuse_product(model, registry, n_set, m_set, ArgRule::Diff)?;
        let second = fuse_product(model, registry, &m_set.bar(), &n_set.bar(), ArgRule::Diff)?;
        let prod = MultiOp::compose(&first, &second)?;
        let (z, res) = prod.proportionality_scalar();
        row.record(res);
        let mut expected = C64::new(1.0, 0.0);
        for a in &n_spaces {
            for b in &m_spaces {
                expected *= model.unitarity_scalar(a.spectral_value()? - b.spectral_value()?);
            }
        }
        row.record((z - expected).norm() / z.norm().max(crate::multiop::EPS_FLOOR));
        row.record_scalar(C64::new(0.0, 0.0), z);
        report.push(row);
    }

    // Fused crossing unitarity with the M_M' conjugation.
    {
        let mut row = CheckRow::new(
            "fused",
            "fused_crossing_unitarity",
            model.name(),
            TOL_COMPOSITE,
        );
        let first = fuse_product(model, registry, n_set, m_set, ArgRule::Sum)?
            .partial_transpose(&m_labels)?;
        let second = fuse_product(model, registry, &m_set.bar(), &n_set.bar(), ArgRule::NegShift)?
            .partial_transpose(&m_labels)?;
        let mm = model.m_many(&m_spaces)?;
        let mm_inv = model.m_inv_many(&m_spaces)?;
        let prod = MultiOp::product(&[first, mm_inv, second, mm])?;
        let (z, res) = prod.proportionality_scalar();
        row.record(res);
        row.record_scalar(C64::new(0.0, 0.0), z);
        if z.norm() < 1e-12 {
            row.record(f64::INFINITY);
        }
        report.push(row);
    }

    // Commutation with M_N M_M', for both difference and sum arguments.
    {
        let mut row = CheckRow::new("fused", "crosscom2", model.name(), TOL_COMPOSITE);
        let mm = MultiOp::compose(&model.m_many(&n_spaces)?, &model.m_many(&m_spaces)?)?;
        for rule in [ArgRule::Diff, ArgRule::Sum] {
            let f = fuse_product(model, registry, n_set, m_set, rule)?;
            row.record(MultiOp::commutator_residual(&f, &mm)?);
        }
        report.push(row);
    }

    Ok(report)
}

/// Which of the four mixed-set exchange identities to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusedYbeVariant {
    Fyb1,
    Fyb2,
    Dfyb1,
    Dfyb2,
}

impl FusedYbeVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            FusedYbeVariant::Fyb1 => "fyb1",
            FusedYbeVariant::Fyb2 => "fyb2",
            FusedYbeVariant::Dfyb1 => "dfyb1",
            FusedYbeVariant::Dfyb2 => "dfyb2",
        }
    }
}

/// Evaluate both sides of the selected exchange identity and return the
/// relative residual. `single` is the distinguished singleton space.
pub fn verify_fused_ybe(
    model: &Arc<RModel>,
    registry: &SpaceRegistry,
    n_minus: &IndexSet,
    m_prime: &IndexSet,
    single: &Label,
    variant: FusedYbeVariant,
) -> Result<f64> {
    let one = IndexSet::new(vec![single.clone()])?;
    n_minus.is_disjoint(m_prime)?;
    n_minus.is_disjoint(&one)?;
    m_prime.is_disjoint(&one)?;

    let f = |a: &IndexSet, b: &IndexSet, rule: ArgRule| fuse_product(model, registry, a, b, rule);

    let (x, y, z) = match variant {
        FusedYbeVariant::Fyb1 => (
            f(n_minus, &one, ArgRule::Sum)?,
            f(m_prime, &one, ArgRule::Sum)?,
            f(m_prime, &n_minus.bar(), ArgRule::Diff)?,
        ),
        FusedYbeVariant::Fyb2 => (
            f(n_minus, &one, ArgRule::Sum)?,
            f(n_minus, m_prime, ArgRule::Sum)?,
            f(&one, m_prime, ArgRule::DiffRev)?,
        ),
        FusedYbeVariant::Dfyb1 => (
            f(n_minus, &m_prime.bar(), ArgRule::Diff)?,
            f(&one, &m_prime.bar(), ArgRule::NegShift)?,
            f(&one, &n_minus.bar(), ArgRule::NegShift)?,
        ),
        FusedYbeVariant::Dfyb2 => (
            f(&m_prime.bar(), &one, ArgRule::DiffRev)?,
            f(&m_prime.bar(), &n_minus.bar(), ArgRule::NegShift)?,
            f(&one, &n_minus.bar(), ArgRule::NegShift)?,
        ),
    };
    let lhs = MultiOp::product(&[x.clone(), y.clone(), z.clone()])?;
    let rhs = MultiOp::product(&[z, y, x])?;
    MultiOp::rel_residual(&lhs, &rhs)
}

/// Interleave two fused products over a split of the first set, block by
/// block of the second set; used by the coproduct-consistency check.
pub fn fuse_interleaved(
    model: &RModel,
    registry: &SpaceRegistry,
    left_first: &IndexSet,
    left_second: &IndexSet,
    right: &IndexSet,
    rule: ArgRule,
) -> Result<MultiOp> {
    left_first.is_disjoint(left_second)?;
    let rho = model.rho();
    let rs = registry.resolve(right)?;
    let f1 = registry.resolve(left_first)?;
    let f2 = registry.resolve(left_second)?;
    let mut factors = Vec::new();
    for b in &rs {
        let lb = b.spectral_value()?;
        for a in f1.iter().chain(f2.iter()) {
            let la = a.spectral_value()?;
            factors.push(model.r(a, b, rule.apply(rho, la, lb))?);
        }
    }
    MultiOp::product(&factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmodel::{rational_gl_model, six_vertex_model};
    use crate::sampling::SpectralSampler;
    use crate::space::Space;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn registry_with(labels: &[&str], lambdas: &[C64]) -> SpaceRegistry {
        let mut reg = SpaceRegistry::new();
        for (l, lam) in labels.iter().zip(lambdas) {
            reg.register(Space::auxiliary(*l, 2, *lam)).unwrap();
        }
        reg
    }

    fn rational() -> Arc<RModel> {
        Arc::new(rational_gl_model(2, c(0.8, 0.15)).unwrap())
    }

    fn six_vertex() -> Arc<RModel> {
        Arc::new(six_vertex_model(c(1.35, 0.2)).unwrap())
    }

    #[test]
    fn singleton_fusion_is_one_factor() {
        let model = rational();
        let reg = registry_with(&["1", "1p"], &[c(0.6, 0.2), c(-0.3, 0.4)]);
        let n = IndexSet::from_labels(["1"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        let fused = fuse_product(&model, &reg, &n, &m, ArgRule::Diff).unwrap();
        let a = reg.get(&Label::from("1")).unwrap();
        let b = reg.get(&Label::from("1p")).unwrap();
        let single = model.r(a, b, c(0.6, 0.2) - c(-0.3, 0.4)).unwrap();
        assert!(MultiOp::rel_residual(&fused, &single).unwrap() < 1e-15);
    }

    #[test]
    fn two_by_one_fusion_factor_order() {
        let model = rational();
        let reg = registry_with(&["1", "2", "1p"], &[c(0.6, 0.2), c(-0.9, 0.1), c(0.3, -0.5)]);
        let n = IndexSet::from_labels(["1", "2"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        let fused = fuse_product(&model, &reg, &n, &m, ArgRule::Diff).unwrap();

        let s1 = reg.get(&Label::from("1")).unwrap();
        let s2 = reg.get(&Label::from("2")).unwrap();
        let sp = reg.get(&Label::from("1p")).unwrap();
        let r11 = model.r(s1, sp, c(0.6, 0.2) - c(0.3, -0.5)).unwrap();
        let r21 = model.r(s2, sp, c(-0.9, 0.1) - c(0.3, -0.5)).unwrap();
        let byhand = MultiOp::compose(&r11, &r21).unwrap();
        assert!(MultiOp::rel_residual(&fused, &byhand).unwrap() < 1e-15);
    }

    #[test]
    fn transposition_identity_two_one() {
        let model = rational();
        let reg = registry_with(&["1", "2", "1p"], &[c(0.6, 0.2), c(-0.9, 0.1), c(0.3, -0.5)]);
        let n = IndexSet::from_labels(["1", "2"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        let report = verify_fused_properties(&model, &reg, &n, &m).unwrap();
        assert!(report.row("p1").unwrap().max_residual <= 1e-12);
    }

    #[test]
    fn all_properties_hold_for_both_models_up_to_card_five() {
        let labels = ["1", "2", "3", "1p", "2p"];
        for model in [rational(), six_vertex()] {
            let mut sampler = SpectralSampler::new(11, 1.5);
            let lambdas: Vec<C64> = (0..5)
                .map(|_| sampler.draw_where(|z| model.unitarity_scalar(z).norm() > 1e-3))
                .collect();
            let reg = registry_with(&labels, &lambdas);
            for n_card in 1..=3usize {
                for m_card in 1..=2usize {
                    let n = IndexSet::from_labels(labels[..n_card].to_vec()).unwrap();
                    let m = IndexSet::from_labels(labels[3..3 + m_card].to_vec()).unwrap();
                    let report = verify_fused_properties(&model, &reg, &n, &m).unwrap();
                    assert!(
                        report.all_pass(),
                        "model {} cards ({n_card},{m_card}): {:?}",
                        model.name(),
                        report.first_failure()
                    );
                }
            }
        }
    }

    #[test]
    fn fused_unitarity_scalar_is_product_of_pairwise() {
        let model = rational();
        let reg = registry_with(
            &["1", "2", "1p"],
            &[c(0.6, 0.2), c(-0.9, 0.1), c(0.3, -0.5)],
        );
        let n = IndexSet::from_labels(["1", "2"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        let report = verify_fused_properties(&model, &reg, &n, &m).unwrap();
        // The row records the deviation from the pairwise product as a
        // residual sample, so passing implies agreement.
        assert!(report.row("fused_unitarity").unwrap().pass);
        let z = report.row("fused_unitarity").unwrap().scalars[0].value;
        let expect = model.unitarity_scalar(c(0.6, 0.2) - c(0.3, -0.5))
            * model.unitarity_scalar(c(-0.9, 0.1) - c(0.3, -0.5));
        assert!((z - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn fused_ybe_all_variants_reduce_to_plain_ybe_at_card_one() {
        for model in [rational(), six_vertex()] {
            let reg = registry_with(
                &["a", "b", "u"],
                &[c(0.55, -0.35), c(-0.7, 0.25), c(0.15, 0.6)],
            );
            let n = IndexSet::from_labels(["a"]).unwrap();
            let m = IndexSet::from_labels(["b"]).unwrap();
            for v in [
                FusedYbeVariant::Fyb1,
                FusedYbeVariant::Fyb2,
                FusedYbeVariant::Dfyb1,
                FusedYbeVariant::Dfyb2,
            ] {
                let res =
                    verify_fused_ybe(&model, &reg, &n, &m, &Label::from("u"), v).unwrap();
                assert!(res <= 1e-12, "{} {:?}: {res}", model.name(), v);
            }
        }
    }

    #[test]
    fn fused_ybe_higher_cards() {
        for model in [rational(), six_vertex()] {
            let mut sampler = SpectralSampler::new(5, 1.5);
            let lambdas: Vec<C64> = (0..4)
                .map(|_| sampler.draw_where(|z| model.unitarity_scalar(z).norm() > 1e-3))
                .collect();
            let reg = registry_with(&["a", "b", "p", "u"], &lambdas);
            let n = IndexSet::from_labels(["a", "b"]).unwrap();
            let m = IndexSet::from_labels(["p"]).unwrap();
            for v in [
                FusedYbeVariant::Fyb1,
                FusedYbeVariant::Fyb2,
                FusedYbeVariant::Dfyb1,
                FusedYbeVariant::Dfyb2,
            ] {
                let res =
                    verify_fused_ybe(&model, &reg, &n, &m, &Label::from("u"), v).unwrap();
                assert!(res <= 1e-11, "{} {:?}: {res}", model.name(), v);
            }
        }
    }

    #[test]
    fn coproduct_consistency_and_orientation() {
        let model = rational();
        let reg = registry_with(
            &["1", "2", "3", "1p"],
            &[c(0.6, 0.2), c(-0.9, 0.1), c(0.2, 0.7), c(0.3, -0.5)],
        );
        let n = IndexSet::from_labels(["1", "2", "3"]).unwrap();
        let n1 = IndexSet::from_labels(["1", "2"]).unwrap();
        let n2 = IndexSet::from_labels(["3"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();

        let whole = fuse_product(&model, &reg, &n, &m, ArgRule::Diff).unwrap();
        let inter = fuse_interleaved(&model, &reg, &n1, &n2, &m, ArgRule::Diff).unwrap();
        assert!(MultiOp::rel_residual(&whole, &inter).unwrap() < 1e-14);

        // Barring the first set reverses the factor order inside blocks.
        let barred = fuse_product(&model, &reg, &n.bar(), &m, ArgRule::Diff).unwrap();
        let s: Vec<Space> = reg.resolve(&n).unwrap();
        let sp = reg.get(&Label::from("1p")).unwrap();
        let mut factors = Vec::new();
        for a in s.iter().rev() {
            factors.push(
                model
                    .r(a, sp, a.spectral.unwrap() - sp.spectral.unwrap())
                    .unwrap(),
            );
        }
        let byhand = MultiOp::product(&factors).unwrap();
        assert!(MultiOp::rel_residual(&barred, &byhand).unwrap() < 1e-14);
    }

    #[test]
    fn fused_r_rebuild_matches() {
        let model = rational();
        let reg = registry_with(&["1", "2", "1p"], &[c(0.6, 0.2), c(-0.9, 0.1), c(0.3, -0.5)]);
        let n = IndexSet::from_labels(["1", "2"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        let fused = fuse(&model, &reg, &n, &m, ArgRule::Sum).unwrap();
        let rebuilt = fused.rebuild(&reg).unwrap();
        assert!(MultiOp::rel_residual(&fused.op, &rebuilt).unwrap() == 0.0);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let model = rational();
        let reg = registry_with(&["1", "2"], &[c(0.6, 0.2), c(-0.9, 0.1)]);
        let n = IndexSet::from_labels(["1", "2"]).unwrap();
        let m = IndexSet::from_labels(["2"]).unwrap();
        assert!(fuse_product(&model, &reg, &n, &m, ArgRule::Diff).is_err());
    }

    #[test]
    fn missing_spectral_value_is_rejected() {
        let model = rational();
        let mut reg = SpaceRegistry::new();
        reg.register(Space::auxiliary_blank("1", 2)).unwrap();
        reg.register(Space::auxiliary("1p", 2, c(0.1, 0.0))).unwrap();
        let n = IndexSet::from_labels(["1"]).unwrap();
        let m = IndexSet::from_labels(["1p"]).unwrap();
        assert!(fuse_product(&model, &reg, &n, &m, ArgRule::Diff).is_err());
    }
}
