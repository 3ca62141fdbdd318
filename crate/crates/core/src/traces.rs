//! Dressing operators, quantum-trace operators, their commutativity with
//! the step-by-step proof replication, factorization of undressed traces,
//! and the classical-limit sweep.
//!
//! Identity tags: `dress` (left-dressing commutants), `dress1` (right),
//! `tracer` (the quantum trace), `comrel` (commutativity), `prop3`
//! (factorization), `classlim` (classical sweep).
//!
//! A dressing operator must commute with every fused R-matrix built
//! against a disjoint probe set at arbitrary spectral values. At a
//! pointwise level this commutant is exhausted by scalars: the check-R
//! combination swap * R(0) is proportional to the identity for regular
//! models, and `dressing_commutant_dimension` verifies numerically that
//! nothing larger survives. Non-scalar dressings exist only as formal
//! delta-supported series, whose coefficient identity is covered exactly
//! by [`crate::laurent::verify_delta_identity`].

use crate::error::{CoreError, Result};
use crate::fused::{fuse_map, fuse_product, ArgRule};
use crate::multiop::{C64, MultiOp};
use crate::reflection::{greq_sides, greqd_sides, FusedSolution, ReflectionData};
use crate::rmodel::RModel;
use crate::sampling::SpectralSampler;
use crate::space::{IndexSet, Label, Space, SpaceRegistry};

/// Which side of the fused solution a dressing multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DressingSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DressingDescriptor {
    Identity,
    /// Product of neighbor check-R factors at vanishing argument; scalar
    /// for regular models.
    CheckRProduct,
    /// Product of neighbor swaps (the cyclic permutation). Does not
    /// certify pointwise; kept for the negative checks.
    CyclicPermutation,
    Custom,
}

/// An auxiliary-space dressing operator with its certification record.
#[derive(Clone, Debug)]
pub struct DressingOp {
    pub side: DressingSide,
    pub index_set: IndexSet,
    pub descriptor: DressingDescriptor,
    pub op: MultiOp,
    pub certified: bool,
    pub certification_residual: f64,
}

/// Worst commutator residual of a candidate against the fused probes:
/// sum and difference arguments on (M', N), reversed-difference and
/// negated-sum arguments on (bar N, M'), and the 2 rho shifted family the
/// exchange relations use.
pub fn dressing_commutation_residual(
    model: &RModel,
    registry: &SpaceRegistry,
    candidate: &MultiOp,
    n_set: &IndexSet,
    seed: u64,
    probes: usize,
) -> Result<f64> {
    let mut sampler = SpectralSampler::new(seed, 1.5);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let mu = sampler.draw_where(|z| {
            model.unitarity_scalar(z).norm() > 1e-6 && z.norm() > 1e-6
        });
        let mut reg = registry.clone();
        reg.register(Space::auxiliary("dress_probe", model.local_dim(), mu))?;
        let m_set = IndexSet::from_labels(["dress_probe"])?;
        let probes_ops = [
            fuse_product(model, &reg, &m_set, n_set, ArgRule::Sum)?,
            fuse_product(model, &reg, &m_set, n_set, ArgRule::DiffRev)?,
            fuse_map(model, &reg, &n_set.bar(), &m_set, |la, lb| -la + lb)?,
            fuse_map(model, &reg, &n_set.bar(), &m_set, |la, lb| -la - lb)?,
            fuse_product(model, &reg, &n_set.bar(), &m_set, ArgRule::NegShift)?,
        ];
        for f in &probes_ops {
            worst = worst.max(MultiOp::commutator_residual(candidate, f)?);
        }
    }
    Ok(worst)
}

/// The check-R product over neighbor pairs at the registry's spectral
/// values (vanishing differences at a coincident point).
pub fn check_r_chain(model: &RModel, registry: &SpaceRegistry, n_set: &IndexSet) -> Result<MultiOp> {
    crate::ybtraces::check_r_product(model, registry, n_set)
}

/// The cyclic permutation over the index set (product of neighbor swaps).
pub fn cyclic_permutation(registry: &SpaceRegistry, n_set: &IndexSet) -> Result<MultiOp> {
    let spaces = registry.resolve(n_set)?;
    let mut acc = MultiOp::identity(spaces.clone());
    for w in spaces.windows(2) {
        acc = MultiOp::compose(&acc, &crate::multiop::swap_pair(&w[0], &w[1]))?;
    }
    Ok(acc)
}

/// Tolerance for dressing certification.
pub const DRESS_TOL: f64 = 1e-11;

/// Build the coincident-point dressing for an index set whose members all
/// carry the same spectral value: try the check-R product first, then the
/// bare cyclic permutation, and accept whichever certifies against the
/// commutation probes. For regular models the check-R product degenerates
/// to a scalar and is the one that certifies.
pub fn coincident_dressing(
    model: &RModel,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
) -> Result<DressingOp> {
    let spaces = registry.resolve(n_set)?;
    let first = spaces[0].spectral_value()?;
    for s in &spaces {
        if (s.spectral_value()? - first).norm() > 1e-14 {
            return Err(CoreError::NonCoincident(s.label.0.clone()));
        }
    }
    if n_set.card() == 1 {
        return Ok(DressingOp {
            side: DressingSide::Left,
            index_set: n_set.clone(),
            descriptor: DressingDescriptor::Identity,
            op: MultiOp::identity(spaces),
            certified: true,
            certification_residual: 0.0,
        });
    }
    let candidates = [
        (DressingDescriptor::CheckRProduct, check_r_chain(model, registry, n_set)?),
        (DressingDescriptor::CyclicPermutation, cyclic_permutation(registry, n_set)?),
    ];
    let mut best: Option<(DressingDescriptor, MultiOp, f64)> = None;
    for (desc, op) in candidates {
        let res = dressing_commutation_residual(model, registry, &op, n_set, 0xD8E5, 4)?;
        if res <= DRESS_TOL {
            return Ok(DressingOp {
                side: DressingSide::Left,
                index_set: n_set.clone(),
                descriptor: desc,
                op,
                certified: true,
                certification_residual: res,
            });
        }
        if best.as_ref().map(|(_, _, b)| res < *b).unwrap_or(true) {
            best = Some((desc, op, res));
        }
    }
    let (_, _, res) = best.expect("at least one candidate");
    Err(CoreError::CertificationFailed {
        identity: "dress".into(),
        residual: res,
        tolerance: DRESS_TOL,
    })
}

/// Nullity of the joint commutant equations [Q, F] = 0 over the sampled
/// probe family: the dimension of the space of admissible dressings. A
/// value of 1 means scalars only.
pub fn dressing_commutant_dimension(
    model: &RModel,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
    seed: u64,
    probes: usize,
) -> Result<usize> {
    let spaces = registry.resolve(n_set)?;
    let d: usize = spaces.iter().map(|s| s.dim).product();
    let mut sampler = SpectralSampler::new(seed, 1.5);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for _ in 0..probes {
        let mu = sampler.draw_where(|z| {
            model.unitarity_scalar(z).norm() > 1e-6 && z.norm() > 1e-6
        });
        let mut reg = registry.clone();
        reg.register(Space::auxiliary("comm_probe", model.local_dim(), mu))?;
        let m_set = IndexSet::from_labels(["comm_probe"])?;
        for f in [
            fuse_product(model, &reg, &m_set, n_set, ArgRule::Sum)?,
            fuse_product(model, &reg, &m_set, n_set, ArgRule::DiffRev)?,
        ] {
            // Restrict the probe operator to the dressing's spaces by
            // tracing out the probe leg of F conjugated blocks is wrong;
            // instead build the constraint from the full matrix acting on
            // (probe x N) with Q extended by the identity on the probe.
            let order: Vec<Label> = f.spaces().iter().map(|s| s.label.clone()).collect();
            let q_template = MultiOp::identity(spaces.clone()).embed(f.spaces())?;
            let big = q_template.dim();
            let fm = f.matrix();
            // Q acts as identity on the probe: Q_big = sum over basis of
            // Q[i,j] placed on the N digits. Build the linear map rows of
            // vec(Q) -> vec(Q_big F - F Q_big) restricted to independent
            // entries.
            let n_positions: Vec<usize> = {
                let mut pos = Vec::new();
                for (idx, s) in f.spaces().iter().enumerate() {
                    if n_set.contains(&s.label) {
                        pos.push(idx);
                    }
                }
                pos
            };
            let dims: Vec<usize> = f.spaces().iter().map(|s| s.dim).collect();
            let strides = {
                let mut st = vec![1usize; dims.len()];
                for i in (0..dims.len().saturating_sub(1)).rev() {
                    st[i] = st[i + 1] * dims[i + 1];
                }
                st
            };
            // index within the N subsystem for a full index
            let sub_index = |full: usize| -> (usize, usize) {
                let mut rem = full;
                let (mut n_part, mut rest_part) = (0usize, 0usize);
                let mut n_stride = 1usize;
                let mut digits = vec![0usize; dims.len()];
                for i in (0..dims.len()).rev() {
                    digits[i] = rem % dims[i];
                    rem /= dims[i];
                }
                for &p in n_positions.iter().rev() {
                    n_part += digits[p] * n_stride;
                    n_stride *= dims[p];
                }
                for i in (0..dims.len()).rev() {
                    if !n_positions.contains(&i) {
                        rest_part += digits[i] * strides[i];
                    }
                }
                (n_part, rest_part)
            };
            let _ = order;
            // Row for each (r, c) of the big commutator, as a linear form
            // in the d*d unknowns Q[a, b].
            for r in 0..big {
                let (rn, rrest) = sub_index(r);
                for c in 0..big {
                    let (cn, crest) = sub_index(c);
                    let mut row = vec![C64::new(0.0, 0.0); d * d];
                    // (Q_big F)[r, c] = sum_k Q_big[r, k] F[k, c]
                    //   with Q_big[r, k] = Q[rn, kn] delta(rrest, krest).
                    for kn in 0..d {
                        let k = recompose(rn, kn, rrest, &n_positions, &dims, &strides);
                        row[rn * d + kn] += fm[(k, c)];
                        let _ = crest;
                    }
                    // -(F Q_big)[r, c] = -sum_k F[r, k] Q[kn, cn] delta.
                    for kn in 0..d {
                        let k = recompose(cn, kn, crest, &n_positions, &dims, &strides);
                        row[kn * d + cn] -= fm[(r, k)];
                    }
                    if row.iter().any(|z| z.norm() > 0.0) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let rank = complex_rank(&mut rows, 1e-9);
    Ok(d * d - rank)
}

/// Recompose a full index from a chosen value of the N digits (as a packed
/// sub-index) and the fixed non-N remainder.
fn recompose(
    _anchor: usize,
    n_sub: usize,
    rest: usize,
    n_positions: &[usize],
    dims: &[usize],
    strides: &[usize],
) -> usize {
    let mut rem = n_sub;
    let mut full = rest;
    for &p in n_positions.iter().rev() {
        let digit = rem % dims[p];
        rem /= dims[p];
        full += digit * strides[p];
    }
    full
}

/// Rank of a complex matrix given as rows, by Gaussian elimination with a
/// relative threshold.
fn complex_rank(rows: &mut [Vec<C64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut rank = 0usize;
    for col in 0..cols {
        let mut pivot = None;
        let mut best = tol * scale;
        for (i, row) in rows.iter().enumerate().skip(rank) {
            if row[col].norm() > best {
                best = row[col].norm();
                pivot = Some(i);
            }
        }
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let head = rows[rank][col];
        for i in 0..rows.len() {
            if i == rank {
                continue;
            }
            let f = rows[i][col] / head;
            if f.norm() == 0.0 {
                continue;
            }
            let (left, right) = if i < rank {
                let (a, b) = rows.split_at_mut(rank);
                (&mut a[i], &b[0])
            } else {
                let (a, b) = rows.split_at_mut(i);
                (&mut b[0], &a[rank])
            };
            for (dst, src) in left[col..cols].iter_mut().zip(&right[col..cols]) {
                *dst -= f * src;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// A quantum-trace operator: all auxiliary legs traced out.
#[derive(Clone, Debug)]
pub struct TraceOperator {
    pub index_set: IndexSet,
    pub lambdas: Vec<C64>,
    pub dressing: Option<DressingDescriptor>,
    pub op: MultiOp,
    pub provenance: String,
}

/// H_N = Tr_N( Q K0_N T0_N ) with an optional certified left dressing.
/// The conjugation on the K side is trivial for c-number boundaries.
pub fn quantum_trace(
    data: &ReflectionData,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
    dressing: Option<&DressingOp>,
) -> Result<TraceOperator> {
    if let Some(q) = dressing {
        if !q.certified {
            return Err(CoreError::UncertifiedDressing);
        }
        if q.index_set.members != n_set.members {
            return Err(CoreError::Config(
                "dressing index set does not match the trace index set".into(),
            ));
        }
    }
    let k0 = crate::reflection::fuse_k0(data, registry, n_set)?;
    let t0 = crate::reflection::fuse_t0(data, registry, n_set)?;
    let mut integrand = MultiOp::compose(&k0.op, &t0.op)?;
    if let Some(q) = dressing {
        integrand = MultiOp::compose(&q.op, &integrand)?;
    }
    let op = integrand.partial_trace(&n_set.members)?;
    debug_assert!(
        op.spaces()
            .iter()
            .all(|s| s.kind == crate::space::SpaceKind::Quantum),
        "auxiliary legs must all be traced out"
    );
    let lambdas = registry
        .resolve(n_set)?
        .iter()
        .map(|s| s.spectral_value())
        .collect::<Result<_>>()?;
    Ok(TraceOperator {
        index_set: n_set.clone(),
        lambdas,
        dressing: dressing.map(|d| d.descriptor),
        op,
        provenance: format!(
            "tr over {} aux spaces, dressing {:?}",
            n_set.card(),
            dressing.map(|d| d.descriptor)
        ),
    })
}

/// Commutator residual of two trace operators over disjoint index sets.
pub fn check_commutativity(h1: &TraceOperator, h2: &TraceOperator) -> Result<f64> {
    h1.index_set.is_disjoint(&h2.index_set)?;
    MultiOp::commutator_residual(&h1.op, &h2.op)
}

/// The permutation-dressed trace at a coincident point:
/// Tr_N( C K0_N T0_N ) with C the cyclic permutation of the auxiliary
/// spaces. This is the negative control of the dressing story: the
/// permutation fails the operator-level commutants (see
/// [`dressing_commutant_dimension`]), and the operator built here
/// genuinely stops commuting with the transfer family once the quantum
/// chain has more than one site. (On a single spin-conserving site every
/// constructed operator is diagonal, which makes one-site commutators
/// vacuous; tests cover both situations.) Only delta-supported formal
/// series produce commuting non-scalar dressings.
pub fn permutation_dressed_trace(
    data: &ReflectionData,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
) -> Result<TraceOperator> {
    let spaces = registry.resolve(n_set)?;
    let first = spaces[0].spectral_value()?;
    for s in &spaces {
        if (s.spectral_value()? - first).norm() > 1e-14 {
            return Err(CoreError::NonCoincident(s.label.0.clone()));
        }
    }
    let perm = cyclic_permutation(registry, n_set)?;
    let k0 = crate::reflection::fuse_k0(data, registry, n_set)?;
    let t0 = crate::reflection::fuse_t0(data, registry, n_set)?;
    let op = MultiOp::product(&[perm, k0.op, t0.op])?.partial_trace(&n_set.members)?;
    Ok(TraceOperator {
        index_set: n_set.clone(),
        lambdas: vec![first; n_set.card()],
        dressing: Some(DressingDescriptor::CyclicPermutation),
        op,
        provenance: format!(
            "cyclic-permutation dressed trace over {} aux spaces at a coincident point",
            n_set.card()
        ),
    })
}

/// Undressed traces decouple into the ordered product of single-row
/// transfer matrices at the member spectral points, times one
/// crossing-unitarity scalar per coupling pair: the R eliminations that
/// decouple the trace each leave their proportionality constant behind,
/// since the R family here is deliberately unnormalized.
pub fn check_factorization(
    data: &ReflectionData,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
) -> Result<(MultiOp, MultiOp, f64)> {
    let h = quantum_trace(data, registry, n_set, None)?;
    let spaces = registry.resolve(n_set)?;
    let mut rhs = MultiOp::scalar(C64::new(1.0, 0.0));
    for s in &spaces {
        rhs = MultiOp::compose(&rhs, &data.transfer(s.spectral_value()?)?)?;
    }
    let mut scalar = C64::new(1.0, 0.0);
    for (k, a) in spaces.iter().enumerate() {
        for b in &spaces[k + 1..] {
            scalar *= pairwise_cu_scalar(&data.model, a.spectral_value()? + b.spectral_value()?)?;
        }
    }
    let rhs = rhs.scale(scalar);
    let res = MultiOp::rel_residual(&h.op, &rhs)?;
    Ok((h.op, rhs, res))
}

/// One named expression in the proof replication.
#[derive(Clone, Debug)]
pub struct ReplicationStep {
    pub from: String,
    pub to: String,
    pub residual: f64,
}

/// Result of the step-by-step commutativity proof replication.
#[derive(Clone, Debug)]
pub struct TheoremReplication {
    pub steps: Vec<ReplicationStep>,
    pub z_plus: C64,
    pub z_minus: C64,
    /// Deviation of the extracted scalars from the products of pairwise
    /// scalars.
    pub z_consistency: f64,
    pub commutator_residual: f64,
}

impl TheoremReplication {
    pub fn max_step_residual(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.residual))
    }
}

struct ChainInputs<'a> {
    data: &'a ReflectionData,
    registry: &'a SpaceRegistry,
}

/// Named expressions of one proof direction plus the two inserted scalars.
type ChainExpressions = (Vec<(String, MultiOp)>, C64, C64);

/// One direction of the proof: `first` is the set whose K factor stays
/// untransposed, `second` the set that carries the partial transposes.
/// Every entry is an exact rewrite of its predecessor:
///
/// - product: H_second H_first as built
/// - joint trace: tr( K_s^{t_s} K_f T_s^{t_s} T_f )
/// - cu insertion: the scalar combination M^-1 Rbar^{t_s} M Rsum^{t_s}
///   divided out and inserted in the middle
/// - regrouping: tr( K_f [M Rbar M^-1 K_s]^{t_s} [T_s Rsum]^{t_s} T_f )
/// - collapse: tr( K_f M Rbar M^-1 K_s T_s Rsum T_f ), transposes removed
///   by one cyclic move and one trace adjoint
///
/// The collapse entry is one unitarity insertion away from the product of
/// the dual exchange relation's left side with the direct relation's right
/// side, which is where the recognition and substitution steps pick up.
fn half_chain(
    env: &ChainInputs,
    first: &IndexSet,
    second: &IndexSet,
    k_first: &MultiOp,
    k_second: &MultiOp,
    t_first: &MultiOp,
    t_second: &MultiOp,
) -> Result<ChainExpressions> {
    let model = &env.data.model;
    let reg = env.registry;
    let all_labels: Vec<Label> = second
        .members
        .iter()
        .chain(first.members.iter())
        .cloned()
        .collect();
    let tr = |op: &MultiOp| op.partial_trace(&all_labels);
    let second_spaces = reg.resolve(second)?;
    let mm = model.m_many(&second_spaces)?;
    let mm_inv = model.m_inv_many(&second_spaces)?;
    let ts_labels: Vec<Label> = second.members.clone();

    let shifted_bar = fuse_product(model, reg, &second.bar(), &first.bar(), ArgRule::NegShift)?;
    let summed = fuse_product(model, reg, first, second, ArgRule::Sum)?;

    // Scalar of the crossing-unitarity combination, in pure second-set
    // transpose form.
    let cu_combo = MultiOp::product(&[
        mm_inv.clone(),
        shifted_bar.partial_transpose(&ts_labels)?,
        mm.clone(),
        summed.partial_transpose(&ts_labels)?,
    ])?;
    let (z_plus, cu_res) = cu_combo.proportionality_scalar();
    if cu_res > 1e-9 || z_plus.norm() < 1e-12 {
        return Err(CoreError::Singular(format!(
            "crossing-unitarity insertion is not scalar (residual {cu_res:.3e})"
        )));
    }
    // Scalar of the unitarity pair used between recognition and closure.
    let uni_first = fuse_product(model, reg, first, &second.bar(), ArgRule::Diff)?;
    let uni_second = fuse_product(model, reg, second, &first.bar(), ArgRule::Diff)?;
    let (z_minus, uni_res) = MultiOp::compose(&uni_first, &uni_second)?.proportionality_scalar();
    if uni_res > 1e-9 || z_minus.norm() < 1e-12 {
        return Err(CoreError::Singular(format!(
            "unitarity insertion is not scalar (residual {uni_res:.3e})"
        )));
    }
    let zp_inv = MultiOp::scalar(C64::new(1.0, 0.0) / z_plus);

    let h_first = tr_over(k_first, t_first, first)?;
    let h_second = tr_over(k_second, t_second, second)?;

    let k2_t = k_second.partial_transpose(&ts_labels)?;
    let t2_t = t_second.partial_transpose(&ts_labels)?;

    let mut chain: Vec<(String, MultiOp)> = Vec::new();
    chain.push(("product".into(), MultiOp::compose(&h_second, &h_first)?));

    chain.push((
        "joint trace".into(),
        tr(&MultiOp::product(&[
            k2_t.clone(),
            k_first.clone(),
            t2_t.clone(),
            t_first.clone(),
        ])?)?,
    ));

    chain.push((
        "crossing-unitarity insertion".into(),
        MultiOp::compose(
            &zp_inv,
            &tr(&MultiOp::product(&[
                k2_t.clone(),
                k_first.clone(),
                mm_inv.clone(),
                shifted_bar.partial_transpose(&ts_labels)?,
                mm.clone(),
                summed.partial_transpose(&ts_labels)?,
                t2_t.clone(),
                t_first.clone(),
            ])?)?,
        )?,
    ));

    // Both transposed groups written as transposes of plain products.
    let bracket_k = MultiOp::product(&[
        mm.clone(),
        shifted_bar.clone(),
        mm_inv.clone(),
        k_second.clone(),
    ])?;
    let bracket_t = MultiOp::compose(t_second, &summed)?;
    chain.push((
        "bracket regrouping".into(),
        MultiOp::compose(
            &zp_inv,
            &tr(&MultiOp::product(&[
                k_first.clone(),
                bracket_k.partial_transpose(&ts_labels)?,
                bracket_t.partial_transpose(&ts_labels)?,
                t_first.clone(),
            ])?)?,
        )?,
    ));

    // One cyclic move of the pure-auxiliary K factor and one trace-adjoint
    // move later, no transposes remain.
    chain.push((
        "transpose collapse".into(),
        MultiOp::compose(
            &zp_inv,
            &tr(&MultiOp::product(&[
                k_first.clone(),
                mm.clone(),
                shifted_bar.clone(),
                mm_inv.clone(),
                k_second.clone(),
                t_second.clone(),
                summed.clone(),
                t_first.clone(),
            ])?)?,
        )?,
    ));

    Ok((chain, z_plus, z_minus))
}

fn tr_over(k: &MultiOp, t: &MultiOp, set: &IndexSet) -> Result<MultiOp> {
    MultiOp::compose(k, t)?.partial_trace(&set.members)
}

/// The collapse expression with the unitarity pair inserted, which is
/// exactly the dual exchange relation's left side times the direct
/// relation's right side under the joint trace.
#[allow(clippy::too_many_arguments)]
fn recognition_expr(
    env: &ChainInputs,
    first: &IndexSet,
    second: &IndexSet,
    k_first: &MultiOp,
    k_second: &MultiOp,
    t_first: &MultiOp,
    t_second: &MultiOp,
    z_plus: C64,
    z_minus: C64,
    substituted: bool,
) -> Result<MultiOp> {
    let reg = env.registry;
    let all_labels: Vec<Label> = second
        .members
        .iter()
        .chain(first.members.iter())
        .cloned()
        .collect();
    let wrap = |set: &IndexSet, op: &MultiOp, kind: crate::reflection::FusedSolutionKind| {
        FusedSolution {
            kind,
            index_set: set.clone(),
            op: op.clone(),
        }
    };
    use crate::reflection::FusedSolutionKind::{KSide, TSide};
    let (greqd_lhs, greqd_rhs) = greqd_sides(
        env.data,
        reg,
        &wrap(first, k_first, KSide),
        &wrap(second, k_second, KSide),
    )?;
    let (greq_lhs, greq_rhs) = greq_sides(
        env.data,
        reg,
        &wrap(first, t_first, TSide),
        &wrap(second, t_second, TSide),
    )?;
    let integrand = if substituted {
        MultiOp::compose(&greqd_rhs, &greq_lhs)?
    } else {
        MultiOp::compose(&greqd_lhs, &greq_rhs)?
    };
    Ok(integrand
        .partial_trace(&all_labels)?
        .scale(C64::new(1.0, 0.0) / (z_plus * z_minus)))
}

/// The substituted expression after one cyclic move and the fused
/// unitarity cancellation: the mirror chain's collapse form up to the
/// commutation of M factors through the shifted fused block.
#[allow(clippy::too_many_arguments)]
fn closure_expr(
    env: &ChainInputs,
    first: &IndexSet,
    second: &IndexSet,
    k_first: &MultiOp,
    k_second: &MultiOp,
    t_first: &MultiOp,
    t_second: &MultiOp,
    z_plus: C64,
) -> Result<MultiOp> {
    let model = &env.data.model;
    let reg = env.registry;
    let all_labels: Vec<Label> = second
        .members
        .iter()
        .chain(first.members.iter())
        .cloned()
        .collect();
    let second_spaces = reg.resolve(second)?;
    let mm = model.m_many(&second_spaces)?;
    let mm_inv = model.m_inv_many(&second_spaces)?;
    let integrand = MultiOp::product(&[
        k_second.clone(),
        mm_inv,
        fuse_product(model, reg, &first.bar(), &second.bar(), ArgRule::NegShift)?,
        mm,
        k_first.clone(),
        t_first.clone(),
        fuse_product(model, reg, second, first, ArgRule::Sum)?,
        t_second.clone(),
    ])?;
    Ok(integrand
        .partial_trace(&all_labels)?
        .scale(C64::new(1.0, 0.0) / z_plus))
}

/// Replicate the commutativity proof for a pair of quantum traces: run the
/// expression chain forward from H_M' H_N, its mirror from H_N H_M', and
/// tie the two collapse forms together through the exchange substitution;
/// every consecutive pair of expressions is reported as one residual.
pub fn theorem_replication(
    data: &ReflectionData,
    registry: &SpaceRegistry,
    n_set: &IndexSet,
    m_set: &IndexSet,
    dress_n: Option<&DressingOp>,
    dress_m: Option<&DressingOp>,
) -> Result<TheoremReplication> {
    n_set.is_disjoint(m_set)?;
    let build_k = |set: &IndexSet, dress: Option<&DressingOp>| -> Result<MultiOp> {
        let k0 = crate::reflection::fuse_k0(data, registry, set)?;
        match dress {
            Some(q) => {
                if !q.certified {
                    return Err(CoreError::UncertifiedDressing);
                }
                MultiOp::compose(&q.op, &k0.op)
            }
            None => Ok(k0.op),
        }
    };
    let k_n = build_k(n_set, dress_n)?;
    let k_m = build_k(m_set, dress_m)?;
    let t_n = crate::reflection::fuse_t0(data, registry, n_set)?.op;
    let t_m = crate::reflection::fuse_t0(data, registry, m_set)?.op;

    let env = ChainInputs { data, registry };
    let (forward, z_plus, z_minus) = half_chain(&env, n_set, m_set, &k_n, &k_m, &t_n, &t_m)?;
    let (mirror, _, _) = half_chain(&env, m_set, n_set, &k_m, &k_n, &t_m, &t_n)?;

    let recognition = recognition_expr(
        &env, n_set, m_set, &k_n, &k_m, &t_n, &t_m, z_plus, z_minus, false,
    )?;
    let substituted = recognition_expr(
        &env, n_set, m_set, &k_n, &k_m, &t_n, &t_m, z_plus, z_minus, true,
    )?;
    let closure = closure_expr(&env, n_set, m_set, &k_n, &k_m, &t_n, &t_m, z_plus)?;

    let mut steps = Vec::new();
    let mut record = |from: &str, to: &str, a: &MultiOp, b: &MultiOp| -> Result<()> {
        steps.push(ReplicationStep {
            from: from.to_string(),
            to: to.to_string(),
            residual: MultiOp::rel_residual(a, b)?,
        });
        Ok(())
    };
    for w in forward.windows(2) {
        record(&w[0].0, &w[1].0, &w[0].1, &w[1].1)?;
    }
    let fwd_collapse = &forward.last().unwrap().1;
    record(
        "transpose collapse",
        "exchange recognition",
        fwd_collapse,
        &recognition,
    )?;
    record(
        "exchange recognition",
        "exchange substitution",
        &recognition,
        &substituted,
    )?;
    record(
        "exchange substitution",
        "closure reduction",
        &substituted,
        &closure,
    )?;
    let mirror_collapse = &mirror.last().unwrap().1;
    record(
        "closure reduction",
        "mirror transpose collapse",
        &closure,
        mirror_collapse,
    )?;
    for w in mirror.windows(2).rev() {
        record(
            &format!("mirror {}", w[1].0),
            &format!("mirror {}", w[0].0),
            &w[1].1,
            &w[0].1,
        )?;
    }

    // Scalar bookkeeping: the inserted scalars must match the products of
    // pairwise scalars.
    let mut zp_pair = C64::new(1.0, 0.0);
    let mut zm_pair = C64::new(1.0, 0.0);
    for a in registry.resolve(n_set)? {
        for b in registry.resolve(m_set)? {
            let la = a.spectral_value()?;
            let lb = b.spectral_value()?;
            zm_pair *= data.model.unitarity_scalar(la - lb);
            zp_pair *= pairwise_cu_scalar(&data.model, la + lb)?;
        }
    }
    let z_consistency = ((z_plus - zp_pair).norm() / z_plus.norm().max(1e-300))
        .max((z_minus - zm_pair).norm() / z_minus.norm().max(1e-300));

    let h_n = quantum_trace(data, registry, n_set, dress_n)?;
    let h_m = quantum_trace(data, registry, m_set, dress_m)?;
    let commutator_residual = check_commutativity(&h_n, &h_m)?;

    Ok(TheoremReplication {
        steps,
        z_plus,
        z_minus,
        z_consistency,
        commutator_residual,
    })
}

/// Scalar of the two-space crossing-unitarity combination at argument x.
fn pairwise_cu_scalar(model: &RModel, x: C64) -> Result<C64> {
    let s1 = Space::auxiliary("cu1", model.local_dim(), x);
    let s2 = Space::auxiliary("cu2", model.local_dim(), C64::new(0.0, 0.0));
    let t1 = [s1.label.clone()];
    let r21_t1 = model.r_swapped(&s1, &s2, x)?.partial_transpose(&t1)?;
    let shifted = model
        .r(&s1, &s2, -x - model.rho() * 2.0)?
        .partial_transpose(&t1)?;
    let prod = MultiOp::product(&[r21_t1, model.m_inv_on(&s1), shifted, model.m_on(&s1)])?;
    let (z, _) = prod.proportionality_scalar();
    Ok(z)
}

/// Eigenvalues of a 2x2 complex matrix.
pub fn eig2(m: &ndarray::Array2<C64>) -> [C64; 2] {
    assert_eq!(m.nrows(), 2, "spectral comparison supports dimension 2 only");
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr_half = (a + d) / 2.0;
    let disc = ((a - d) / 2.0) * ((a - d) / 2.0) + b * c;
    let root = disc.sqrt();
    [tr_half + root, tr_half - root]
}

/// Smallest possible max-eigenvalue distance between the spectra of two
/// 2x2 operators (minimized over the two pairings).
pub fn spectral_gap_2x2(a: &MultiOp, b: &MultiOp) -> f64 {
    let ea = eig2(a.matrix());
    let eb = eig2(b.matrix());
    let d1 = (ea[0] - eb[0]).norm().max((ea[1] - eb[1]).norm());
    let d2 = (ea[0] - eb[1]).norm().max((ea[1] - eb[0]).norm());
    d1.min(d2)
}

/// Minimum spectral gap between a trace operator and all powers 0..=max_k
/// of the single-row transfer matrix.
pub fn min_gap_to_powers(h: &MultiOp, transfer: &MultiOp, max_k: usize) -> f64 {
    let mut power = MultiOp::identity(transfer.spaces().to_vec());
    let mut best = f64::INFINITY;
    for _ in 0..=max_k {
        best = best.min(spectral_gap_2x2(h, &power));
        power = MultiOp::compose(&power, transfer).expect("power");
    }
    best
}

/// Result of the classical-limit sweep.
#[derive(Clone, Debug)]
pub struct ClassicalSweep {
    pub card: usize,
    pub lambda: C64,
    pub etas: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Fitted slope of log(gap) against log(eta).
    pub slope: f64,
    /// Gap of the two-point Richardson extrapolation at eta -> 0.
    pub richardson_gap: f64,
}

/// Sweep the deformation parameter through `etas` (descending), building
/// the dressed quantum trace at a coincident point from the normalized
/// rational family with a boundary family equal to 1 + O(eta), and compare
/// against the aux-space trace of the eta = 0 evaluation raised to the
/// card power.
pub fn classical_limit_sweep(
    card: usize,
    lambda: C64,
    etas: &[f64],
    boundary_slope: C64,
    theta: C64,
) -> Result<ClassicalSweep> {
    if etas.len() < 2 {
        return Err(CoreError::Config(
            "the sweep needs at least two eta values".into(),
        ));
    }
    let mut gaps = Vec::new();
    let mut h_small: Vec<MultiOp> = Vec::new();
    let mut target = None;
    for &eta in etas {
        let model =
            std::sync::Arc::new(crate::rmodel::rational_gl2_normalized(C64::new(eta, 0.0))?);
        let data = ReflectionData::new(
            model,
            crate::reflection::KFamily::DiagonalScaled { c: boundary_slope },
            1,
            vec![theta],
        )?;
        let mut reg = SpaceRegistry::new();
        let mut labels = Vec::new();
        for i in 1..=card {
            let l = format!("cl{i}");
            reg.register(Space::auxiliary(l.clone(), 2, lambda))?;
            labels.push(l);
        }
        let n_set = IndexSet::from_labels(labels)?;
        let q = cyclic_permutation(&reg, &n_set)?;
        let k0 = crate::reflection::fuse_k0(&data, &reg, &n_set)?;
        let t0 = crate::reflection::fuse_t0(&data, &reg, &n_set)?;
        let h = MultiOp::product(&[q, k0.op, t0.op])?.partial_trace(&n_set.members)?;

        if target.is_none() {
            // eta = 0 evaluation of T is the identity on aux x quantum, so
            // the target is the aux trace of its card-th power.
            let aux = Space::auxiliary("cl_t0", 2, lambda);
            let mut spaces = vec![aux.clone()];
            spaces.extend(data.quantum.iter().cloned());
            let t_zero = MultiOp::identity(spaces);
            let mut powered = t_zero.clone();
            for _ in 1..card {
                powered = MultiOp::compose(&powered, &t_zero)?;
            }
            target = Some(powered.partial_trace(std::slice::from_ref(&aux.label))?);
        }
        let target_op = target.as_ref().unwrap();
        gaps.push(MultiOp::rel_residual(&h, target_op)?);
        h_small.push(h);
    }
    // Least-squares slope in log-log coordinates.
    let xs: Vec<f64> = etas.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    // Richardson on the two smallest etas, assuming a leading linear term.
    let k = etas.len();
    let (e2, e3) = (etas[k - 2], etas[k - 1]);
    let extrapolated = MultiOp::sub(
        &h_small[k - 1].scale(C64::new(e2 / (e2 - e3), 0.0)),
        &h_small[k - 2].scale(C64::new(e3 / (e2 - e3), 0.0)),
    )?;
    let richardson_gap = MultiOp::rel_residual(&extrapolated, target.as_ref().unwrap())?;

    Ok(ClassicalSweep {
        card,
        lambda,
        etas: etas.to_vec(),
        gaps,
        slope,
        richardson_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::diagonal_k;
    use crate::rmodel::rational_gl_model;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn data_one_site() -> ReflectionData {
        let model = Arc::new(rational_gl_model(2, c(0.8, 0.15)).unwrap());
        let k = diagonal_k(&model, c(1.1, 0.4)).unwrap();
        ReflectionData::new(model, k, 1, vec![c(0.12, -0.07)]).unwrap()
    }

    fn registry(labels: &[&str], lambdas: &[C64]) -> SpaceRegistry {
        let mut reg = SpaceRegistry::new();
        for (l, lam) in labels.iter().zip(lambdas) {
            reg.register(Space::auxiliary(*l, 2, *lam)).unwrap();
        }
        reg
    }

    #[test]
    fn coincident_dressing_card_one_is_identity() {
        let data = data_one_site();
        let reg = registry(&["n1"], &[c(0.45, 0.2)]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        assert_eq!(q.descriptor, DressingDescriptor::Identity);
        assert!(q.certified);
    }

    #[test]
    fn coincident_dressing_card_two_certifies_via_check_r() {
        let data = data_one_site();
        let lam = c(0.45, 0.2);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        assert_eq!(q.descriptor, DressingDescriptor::CheckRProduct);
        assert!(q.certification_residual <= DRESS_TOL);
        // The certified product is scalar for this model.
        let (_, prop) = q.op.proportionality_scalar();
        assert!(prop < 1e-13);
    }

    #[test]
    fn cyclic_permutation_fails_pointwise_certification() {
        let data = data_one_site();
        let lam = c(0.45, 0.2);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let perm = cyclic_permutation(&reg, &n).unwrap();
        let res =
            dressing_commutation_residual(&data.model, &reg, &perm, &n, 0xD8E5, 4).unwrap();
        assert!(res > 1e-3, "bare permutation unexpectedly certified: {res}");
    }

    #[test]
    fn non_coincident_points_are_rejected() {
        let data = data_one_site();
        let reg = registry(&["n1", "n2"], &[c(0.45, 0.2), c(0.9, -0.1)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        assert!(matches!(
            coincident_dressing(&data.model, &reg, &n),
            Err(CoreError::NonCoincident(_))
        ));
    }

    #[test]
    fn pointwise_commutant_is_scalars_only() {
        let data = data_one_site();
        let lam = c(0.45, 0.2);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let dim = dressing_commutant_dimension(&data.model, &reg, &n, 0xC0, 3).unwrap();
        assert_eq!(dim, 1, "nontrivial pointwise dressing space found");
    }

    #[test]
    fn quantum_trace_card_one_is_the_transfer_matrix() {
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1"], &[lam]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let h = quantum_trace(&data, &reg, &n, None).unwrap();
        let t = data.transfer(lam).unwrap();
        assert!(MultiOp::rel_residual(&h.op, &t).unwrap() < 1e-13);
    }

    #[test]
    fn factorization_holds_up_to_card_three() {
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2", "n3"], &[lam, lam, lam]);
        for card in 1..=3usize {
            let n = IndexSet::from_labels(["n1", "n2", "n3"][..card].to_vec()).unwrap();
            let (_, _, res) = check_factorization(&data, &reg, &n).unwrap();
            let tol = if card <= 2 { 1e-11 } else { 1e-10 };
            assert!(res <= tol, "factorization card {card}: {res}");
        }
    }

    #[test]
    fn commutativity_card_one_pair() {
        let data = data_one_site();
        let reg = registry(&["n1", "m1"], &[c(0.52, 0.31), c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let hn = quantum_trace(&data, &reg, &n, None).unwrap();
        let hm = quantum_trace(&data, &reg, &m, None).unwrap();
        let res = check_commutativity(&hn, &hm).unwrap();
        assert!(res <= 1e-11, "com0 residual {res}");
    }

    #[test]
    fn relabeled_traces_at_equal_points_commute_exactly() {
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "m1"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let hn = quantum_trace(&data, &reg, &n, None).unwrap();
        let hm = quantum_trace(&data, &reg, &m, None).unwrap();
        // Same operator built over a relabeled auxiliary space.
        assert!(MultiOp::rel_residual(&hn.op, &hm.op).unwrap() < 1e-15);
        assert_eq!(check_commutativity(&hn, &hm).unwrap(), 0.0);
    }

    #[test]
    fn classical_sweep_with_identity_boundary() {
        // With the boundary family equal to 1 exactly, the target is the
        // local dimension and the gap still closes linearly through the
        // monodromy factors.
        let sweep = classical_limit_sweep(
            2,
            c(0.9, 0.25),
            &[1e-1, 1e-2, 1e-3],
            c(0.0, 0.0),
            c(0.3, -0.15),
        )
        .unwrap();
        assert!(sweep.slope >= 0.9, "slope {}", sweep.slope);
        assert!(sweep.gaps[2] < sweep.gaps[0]);
    }

    #[test]
    fn overlapping_sets_rejected_in_commutativity() {
        let data = data_one_site();
        let reg = registry(&["n1"], &[c(0.52, 0.31)]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let h = quantum_trace(&data, &reg, &n, None).unwrap();
        assert!(check_commutativity(&h, &h).is_err());
    }

    #[test]
    fn theorem_replication_card_one_one() {
        let data = data_one_site();
        let reg = registry(&["n1", "m1"], &[c(0.52, 0.31), c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let rep = theorem_replication(&data, &reg, &n, &m, None, None).unwrap();
        assert!(
            rep.max_step_residual() <= 1e-10,
            "worst step {:?}",
            rep.steps
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
        );
        assert!(rep.commutator_residual <= 1e-10);
        assert!(rep.z_consistency <= 1e-11);
    }

    #[test]
    fn theorem_replication_card_two_one_dressed() {
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2", "m1"], &[lam, lam, c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let rep = theorem_replication(&data, &reg, &n, &m, Some(&q), None).unwrap();
        assert!(
            rep.max_step_residual() <= 1e-10,
            "worst step {:?}",
            rep.steps
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
        );
        assert!(rep.commutator_residual <= 1e-10);
    }

    #[test]
    fn theorem_replication_card_two_two_dressed_both() {
        let data = data_one_site();
        let (lam, mu) = (c(0.52, 0.31), c(-0.4, 0.6));
        let reg = registry(&["n1", "n2", "m1", "m2"], &[lam, lam, mu, mu]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let m = IndexSet::from_labels(["m1", "m2"]).unwrap();
        let qn = coincident_dressing(&data.model, &reg, &n).unwrap();
        let qm = coincident_dressing(&data.model, &reg, &m).unwrap();
        let rep = theorem_replication(&data, &reg, &n, &m, Some(&qn), Some(&qm)).unwrap();
        assert!(
            rep.max_step_residual() <= 1e-10,
            "worst step {:?}",
            rep.steps
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
        );
        assert!(rep.commutator_residual <= 1e-10);
        assert!(rep.z_consistency <= 1e-11);
    }

    #[test]
    fn theorem_replication_six_vertex_nontrivial_m() {
        // The closure step commutes M factors through the shifted fused
        // block, so a model with M far from the identity is the real test.
        let model = Arc::new(crate::rmodel::six_vertex_model(c(1.35, 0.2)).unwrap());
        let k = diagonal_k(&model, c(0.9, 0.35)).unwrap();
        let data = ReflectionData::new(model, k, 1, vec![c(0.12, -0.07)]).unwrap();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2", "m1"], &[lam, lam, c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let rep = theorem_replication(&data, &reg, &n, &m, Some(&q), None).unwrap();
        assert!(
            rep.max_step_residual() <= 1e-10,
            "worst step {:?}",
            rep.steps
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
        );
        assert!(rep.commutator_residual <= 1e-10);
    }

    #[test]
    fn one_site_operators_are_diagonal_and_trivially_commute() {
        // On a single spin-conserving site every constructed operator is
        // diagonal in the same basis, so one-site commutators carry no
        // information; the permutation-dressed trace "commutes" here for
        // that reason alone.
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let mu = c(-0.4, 0.6);
        let reg = registry(&["n1", "n2", "m1"], &[lam, lam, mu]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let t = data.transfer(mu).unwrap();
        assert!(t.matrix()[(0, 1)].norm() < 1e-14);
        assert!(t.matrix()[(1, 0)].norm() < 1e-14);
        let h_perm = permutation_dressed_trace(&data, &reg, &n).unwrap();
        let res = MultiOp::commutator_residual(&h_perm.op, &t).unwrap();
        assert!(res <= 1e-11, "diagonal operators must commute: {res}");
    }

    fn data_two_sites() -> ReflectionData {
        let model = Arc::new(rational_gl_model(2, c(0.8, 0.15)).unwrap());
        let k = diagonal_k(&model, c(1.1, 0.4)).unwrap();
        ReflectionData::new(model, k, 2, vec![c(0.12, -0.07), c(-0.33, 0.21)]).unwrap()
    }

    #[test]
    fn permutation_dressed_trace_fails_to_commute_beyond_one_site() {
        // The real test of the dressing story: with two quantum sites the
        // permutation-dressed trace genuinely breaks commutativity, while
        // the certified scalar dressing preserves it. Pointwise non-scalar
        // dressings do not exist; only the delta-supported formal series
        // carries them.
        let data = data_two_sites();
        let lam = c(0.52, 0.31);
        let mu = c(-0.4, 0.6);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let t = data.transfer(mu).unwrap();

        let h_perm = permutation_dressed_trace(&data, &reg, &n).unwrap();
        let res_perm = MultiOp::commutator_residual(&h_perm.op, &t).unwrap();
        assert!(
            res_perm > 1e-6,
            "permutation-dressed trace unexpectedly commutes at two sites: {res_perm}"
        );

        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let h_ok = quantum_trace(&data, &reg, &n, Some(&q)).unwrap();
        let res_ok = MultiOp::commutator_residual(&h_ok.op, &t).unwrap();
        assert!(res_ok <= 1e-10, "certified dressing broke commutativity: {res_ok}");
    }

    #[test]
    fn theorem_replication_two_sites() {
        // Two quantum sites lift the one-site diagonal degeneracy, so the
        // commutators here are genuinely nontrivial.
        let data = data_two_sites();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2", "m1"], &[lam, lam, c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let rep = theorem_replication(&data, &reg, &n, &m, Some(&q), None).unwrap();
        assert!(
            rep.max_step_residual() <= 1e-10,
            "worst step {:?}",
            rep.steps
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
        );
        assert!(rep.commutator_residual <= 1e-10);
    }

    #[test]
    fn permutation_dressed_trace_requires_coincident_points() {
        let data = data_one_site();
        let reg = registry(&["n1", "n2"], &[c(0.52, 0.31), c(0.1, -0.2)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        assert!(permutation_dressed_trace(&data, &reg, &n).is_err());
    }

    #[test]
    fn dressing_equivalence_left_right() {
        // A certified left dressing also certifies the mirrored right-side
        // commutants; the two condition sets are exchanged by fused
        // unitarity.
        let data = data_one_site();
        let lam = c(0.45, 0.2);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let mut sampler = SpectralSampler::new(0x51DE, 1.5);
        let mut worst: f64 = 0.0;
        for _ in 0..4 {
            let mu = sampler.draw_where(|z| {
                data.model.unitarity_scalar(z).norm() > 1e-6 && z.norm() > 1e-6
            });
            let mut reg2 = reg.clone();
            reg2.register(Space::auxiliary("probe", 2, mu)).unwrap();
            let m = IndexSet::from_labels(["probe"]).unwrap();
            for f in [
                fuse_product(&data.model, &reg2, &n, &m, ArgRule::Sum).unwrap(),
                fuse_product(&data.model, &reg2, &n, &m, ArgRule::Diff).unwrap(),
                fuse_map(&data.model, &reg2, &m, &n.bar(), |la, lb| -lb + la).unwrap(),
                fuse_map(&data.model, &reg2, &m, &n.bar(), |la, lb| -lb - la).unwrap(),
            ] {
                worst = worst.max(MultiOp::commutator_residual(&q.op, &f).unwrap());
            }
        }
        assert!(worst <= DRESS_TOL, "right-side commutants fail: {worst}");
    }

    #[test]
    fn certified_dressing_is_neutral_for_exchange_relations() {
        // Left-dressing the dual solution and right-dressing the direct
        // one with a certified operator must leave the exchange residuals
        // unchanged.
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2", "m1"], &[lam, lam, c(-0.4, 0.6)]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let m = IndexSet::from_labels(["m1"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();

        let tn = crate::reflection::fuse_t0(&data, &reg, &n).unwrap();
        let tm = crate::reflection::fuse_t0(&data, &reg, &m).unwrap();
        let (lhs0, rhs0) = crate::reflection::greq_sides(&data, &reg, &tn, &tm).unwrap();
        let base = MultiOp::rel_residual(&lhs0, &rhs0).unwrap();
        let mut tn_dressed = tn.clone();
        tn_dressed.op = MultiOp::compose(&tn.op, &q.op).unwrap();
        let (lhs1, rhs1) =
            crate::reflection::greq_sides(&data, &reg, &tn_dressed, &tm).unwrap();
        let dressed = MultiOp::rel_residual(&lhs1, &rhs1).unwrap();
        assert!((base - dressed).abs() <= 1e-11, "{base} vs {dressed}");

        let kn = crate::reflection::fuse_k0(&data, &reg, &n).unwrap();
        let km = crate::reflection::fuse_k0(&data, &reg, &m).unwrap();
        let mut kn_dressed = kn.clone();
        kn_dressed.op = MultiOp::compose(&q.op, &kn.op).unwrap();
        let (lhsd, rhsd) =
            crate::reflection::greqd_sides(&data, &reg, &kn_dressed, &km).unwrap();
        assert!(MultiOp::rel_residual(&lhsd, &rhsd).unwrap() <= 1e-10);
    }

    #[test]
    fn dressed_trace_differs_from_all_transfer_powers() {
        let data = data_one_site();
        let lam = c(0.52, 0.31);
        let reg = registry(&["n1", "n2"], &[lam, lam]);
        let n = IndexSet::from_labels(["n1", "n2"]).unwrap();
        let q = coincident_dressing(&data.model, &reg, &n).unwrap();
        let h = quantum_trace(&data, &reg, &n, Some(&q)).unwrap();
        let t = data.transfer(lam).unwrap();
        let gap = min_gap_to_powers(&h.op, &t, 4);
        assert!(gap > 1e-6, "dressed trace spectrally matches a power: {gap}");
    }

    #[test]
    fn classical_sweep_has_linear_gap() {
        for card in 1..=2usize {
            let sweep = classical_limit_sweep(
                card,
                c(0.9, 0.25),
                &[1e-1, 1e-2, 1e-3],
                c(0.7, 0.2),
                c(0.3, -0.15),
            )
            .unwrap();
            assert!(
                sweep.slope >= 0.9,
                "card {card}: slope {} gaps {:?}",
                sweep.slope,
                sweep.gaps
            );
            assert!(sweep.richardson_gap < sweep.gaps[0]);
        }
    }

    #[test]
    fn eig2_matches_hand_values() {
        let mut m = ndarray::Array2::zeros((2, 2));
        m[(0, 0)] = c(3.0, 0.0);
        m[(1, 1)] = c(-1.0, 0.0);
        m[(0, 1)] = c(2.0, 0.0);
        m[(1, 0)] = c(2.0, 0.0);
        let mut eigs = eig2(&m).to_vec();
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re));
        // Characteristic roots of [[3,2],[2,-1]]: 1 +- 2 sqrt(2).
        assert!((eigs[0] - c(1.0 - 2.0 * 2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((eigs[1] - c(1.0 + 2.0 * 2f64.sqrt(), 0.0)).norm() < 1e-12);
    }
}
