//! Dense operator over an ordered list of labeled spaces.
//!
//! Row and column indices are big-endian mixed-radix over the space list:
//! the first space is the most significant digit. Every public operation
//! re-aligns operands to an explicit target order before arithmetic, so a
//! `MultiOp` composes with any other `MultiOp` that agrees on the dimensions
//! of shared labels. Scalars are 0-space operators (a 1x1 matrix), which
//! keeps fully traced expressions in the same value type.
//!
//! All norms are Frobenius norms and all residuals are relative with floor
//! [`EPS_FLOOR`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::space::{Label, Space};

pub type C64 = Complex64;

/// Floor for relative residual denominators.
pub const EPS_FLOOR: f64 = 1e-300;

/// Dense complex operator on an ordered list of spaces.
#[derive(Clone, Debug)]
pub struct MultiOp {
    spaces: Vec<Space>,
    mat: Array2<C64>,
}

fn total_dim(spaces: &[Space]) -> usize {
    spaces.iter().map(|s| s.dim).product()
}

/// Strides of a big-endian mixed-radix layout.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * dims[i + 1];
    }
    st
}

impl MultiOp {
    pub fn new(spaces: Vec<Space>, mat: Array2<C64>) -> Result<Self> {
        for (i, s) in spaces.iter().enumerate() {
            for t in &spaces[i + 1..] {
                if s.label == t.label {
                    return Err(CoreError::DuplicateLabel(s.label.0.clone()));
                }
            }
        }
        let d = total_dim(&spaces);
        if mat.nrows() != d || mat.ncols() != d {
            return Err(CoreError::ShapeMismatch {
                rows: mat.nrows(),
                cols: mat.ncols(),
                expected: d,
            });
        }
        Ok(MultiOp { spaces, mat })
    }

    pub fn identity(spaces: Vec<Space>) -> Self {
        let d = total_dim(&spaces);
        MultiOp {
            spaces,
            mat: Array2::eye(d),
        }
    }

    /// 0-space operator holding a single complex value.
    pub fn scalar(z: C64) -> Self {
        MultiOp {
            spaces: Vec::new(),
            mat: Array2::from_elem((1, 1), z),
        }
    }

    pub fn spaces(&self) -> &[Space] {
        &self.spaces
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_scalar(&self) -> bool {
        self.spaces.is_empty()
    }

    /// The single entry of a 0-space operator.
    pub fn scalar_value(&self) -> Option<C64> {
        if self.is_scalar() {
            Some(self.mat[(0, 0)])
        } else {
            None
        }
    }

    fn position(&self, label: &Label) -> Result<usize> {
        self.spaces
            .iter()
            .position(|s| &s.label == label)
            .ok_or_else(|| CoreError::UnknownSpace(label.0.clone()))
    }

    /// Reorder the space list; rows and columns are permuted accordingly.
    pub fn permute_to(&self, order: &[Label]) -> Result<MultiOp> {
        if order.len() != self.spaces.len() {
            return Err(CoreError::Config(format!(
                "permutation has {} labels, operator has {} spaces",
                order.len(),
                self.spaces.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let old_dims: Vec<usize> = self.spaces.iter().map(|s| s.dim).collect();
        let old_strides = strides(&old_dims);
        let new_spaces: Vec<Space> = perm.iter().map(|&p| self.spaces[p].clone()).collect();
        let new_dims: Vec<usize> = new_spaces.iter().map(|s| s.dim).collect();
        let d = self.dim();

        // index_map[new] = old
        let mut index_map = vec![0usize; d];
        for (new_idx, slot) in index_map.iter_mut().enumerate() {
            let mut rem = new_idx;
            let mut old_idx = 0usize;
            for (k, &dim) in new_dims.iter().enumerate().rev() {
                let digit = rem % dim;
                rem /= dim;
                old_idx += digit * old_strides[perm[k]];
            }
            *slot = old_idx;
        }
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            let or = index_map[r];
            for c in 0..d {
                out[(r, c)] = self.mat[(or, index_map[c])];
            }
        }
        Ok(MultiOp {
            spaces: new_spaces,
            mat: out,
        })
    }

    /// Extend the operator to `target` (a superset of its spaces), acting as
    /// identity on the new spaces, with rows/columns ordered by `target`.
    pub fn embed(&self, target: &[Space]) -> Result<MultiOp> {
        for (i, s) in target.iter().enumerate() {
            for t in &target[i + 1..] {
                if s.label == t.label {
                    return Err(CoreError::DuplicateLabel(s.label.0.clone()));
                }
            }
        }
        for s in &self.spaces {
            let t = target
                .iter()
                .find(|t| t.label == s.label)
                .ok_or_else(|| CoreError::UnknownSpace(s.label.0.clone()))?;
            if t.dim != s.dim {
                return Err(CoreError::DimMismatch {
                    label: s.label.0.clone(),
                    expected: s.dim,
                    found: t.dim,
                });
            }
        }
        let missing: Vec<Space> = target
            .iter()
            .filter(|t| self.spaces.iter().all(|s| s.label != t.label))
            .cloned()
            .collect();
        let d_pad = total_dim(&missing);

        // Kronecker pad on the right, then permute into the target order.
        let d_self = self.dim();
        let d = d_self * d_pad;
        let mut big = Array2::zeros((d, d));
        for r in 0..d_self {
            for c in 0..d_self {
                let v = self.mat[(r, c)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..d_pad {
                    big[(r * d_pad + p, c * d_pad + p)] = v;
                }
            }
        }
        let mut padded_spaces = self.spaces.clone();
        padded_spaces.extend(missing);
        let padded = MultiOp {
            spaces: padded_spaces,
            mat: big,
        };
        let order: Vec<Label> = target.iter().map(|s| s.label.clone()).collect();
        padded.permute_to(&order)
    }

    /// Union of two space lists: `a`'s spaces first, then `b`'s new ones.
    pub fn union_spaces(a: &MultiOp, b: &MultiOp) -> Result<Vec<Space>> {
        let mut union = a.spaces.clone();
        for s in &b.spaces {
            match union.iter().find(|u| u.label == s.label) {
                Some(u) => {
                    if u.dim != s.dim {
                        return Err(CoreError::DimMismatch {
                            label: s.label.0.clone(),
                            expected: u.dim,
                            found: s.dim,
                        });
                    }
                }
                None => union.push(s.clone()),
            }
        }
        Ok(union)
    }

    /// Matrix product after embedding both operands into the union of their
    /// space lists (`a`'s order first, then `b`'s new spaces).
    pub fn compose(a: &MultiOp, b: &MultiOp) -> Result<MultiOp> {
        let union = Self::union_spaces(a, b)?;
        let ea = a.embed(&union)?;
        let eb = b.embed(&union)?;
        Ok(MultiOp {
            spaces: union,
            mat: ea.mat.dot(&eb.mat),
        })
    }

    /// Ordered product of several operators (left to right).
    pub fn product(ops: &[MultiOp]) -> Result<MultiOp> {
        let mut it = ops.iter();
        let first = it
            .next()
            .ok_or_else(|| CoreError::Config("empty product".into()))?;
        let mut acc = first.clone();
        for op in it {
            acc = Self::compose(&acc, op)?;
        }
        Ok(acc)
    }

    /// Transpose the tensor factors of exactly the given labels.
    pub fn partial_transpose(&self, subset: &[Label]) -> Result<MultiOp> {
        for l in subset {
            self.position(l)?;
        }
        let dims: Vec<usize> = self.spaces.iter().map(|s| s.dim).collect();
        let st = strides(&dims);
        let in_subset: Vec<bool> = self
            .spaces
            .iter()
            .map(|s| subset.contains(&s.label))
            .collect();
        let d = self.dim();

        // Split every index into its kept part and its transposed part.
        let mut keep = vec![0usize; d];
        let mut swap = vec![0usize; d];
        for idx in 0..d {
            let mut rem = idx;
            let (mut k, mut w) = (0usize, 0usize);
            for i in (0..dims.len()).rev() {
                let digit = rem % dims[i];
                rem /= dims[i];
                if in_subset[i] {
                    w += digit * st[i];
                } else {
                    k += digit * st[i];
                }
            }
            keep[idx] = k;
            swap[idx] = w;
        }
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = self.mat[(keep[r] + swap[c], keep[c] + swap[r])];
            }
        }
        Ok(MultiOp {
            spaces: self.spaces.clone(),
            mat: out,
        })
    }

    /// Trace out the given labels, returning the operator on the complement
    /// (in the original order). Tracing out everything yields a 0-space
    /// scalar operator.
    pub fn partial_trace(&self, subset: &[Label]) -> Result<MultiOp> {
        for l in subset {
            self.position(l)?;
        }
        let dims: Vec<usize> = self.spaces.iter().map(|s| s.dim).collect();
        let st = strides(&dims);
        let in_subset: Vec<bool> = self
            .spaces
            .iter()
            .map(|s| subset.contains(&s.label))
            .collect();
        let kept: Vec<Space> = self
            .spaces
            .iter()
            .zip(&in_subset)
            .filter(|(_, &m)| !m)
            .map(|(s, _)| s.clone())
            .collect();
        let kept_dims: Vec<usize> = kept.iter().map(|s| s.dim).collect();
        let kept_positions: Vec<usize> = (0..self.spaces.len()).filter(|&i| !in_subset[i]).collect();
        let sub_positions: Vec<usize> = (0..self.spaces.len()).filter(|&i| in_subset[i]).collect();
        let d_out = total_dim(&kept);
        let d_sub: usize = sub_positions.iter().map(|&i| dims[i]).product();

        // base offsets of kept indices and of traced indices in the full layout
        let mut base = vec![0usize; d_out];
        for (out_idx, slot) in base.iter_mut().enumerate() {
            let mut rem = out_idx;
            let mut full = 0usize;
            for (k, &dim) in kept_dims.iter().enumerate().rev() {
                let digit = rem % dim;
                rem /= dim;
                full += digit * st[kept_positions[k]];
            }
            *slot = full;
        }
        let mut off = vec![0usize; d_sub];
        for (t, slot) in off.iter_mut().enumerate() {
            let mut rem = t;
            let mut full = 0usize;
            for &i in sub_positions.iter().rev() {
                let digit = rem % dims[i];
                rem /= dims[i];
                full += digit * st[i];
            }
            *slot = full;
        }
        let mut out = Array2::zeros((d_out, d_out));
        for r in 0..d_out {
            for c in 0..d_out {
                let mut acc = C64::new(0.0, 0.0);
                for &o in &off {
                    acc += self.mat[(base[r] + o, base[c] + o)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(MultiOp {
            spaces: kept,
            mat: out,
        })
    }

    pub fn scale(&self, z: C64) -> MultiOp {
        MultiOp {
            spaces: self.spaces.clone(),
            mat: self.mat.mapv(|v| v * z),
        }
    }

    pub fn add(a: &MultiOp, b: &MultiOp) -> Result<MultiOp> {
        let union = Self::union_spaces(a, b)?;
        let ea = a.embed(&union)?;
        let eb = b.embed(&union)?;
        Ok(MultiOp {
            spaces: union,
            mat: ea.mat + eb.mat,
        })
    }

    pub fn sub(a: &MultiOp, b: &MultiOp) -> Result<MultiOp> {
        Self::add(a, &b.scale(C64::new(-1.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// z = Tr(op)/dim together with the relative deviation of `op` from z*I.
    pub fn proportionality_scalar(&self) -> (C64, f64) {
        let d = self.dim() as f64;
        let z = self.trace() / C64::new(d, 0.0);
        let mut dev = 0.0;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let expect = if r == c { z } else { C64::new(0.0, 0.0) };
                dev += (self.mat[(r, c)] - expect).norm_sqr();
            }
        }
        let res = dev.sqrt() / self.frobenius_norm().max(EPS_FLOOR);
        (z, res)
    }

    /// ||ab - ba|| / max(||a|| * ||b||, floor), after embedding into the union.
    pub fn commutator_residual(a: &MultiOp, b: &MultiOp) -> Result<f64> {
        let union = Self::union_spaces(a, b)?;
        let ea = a.embed(&union)?;
        let eb = b.embed(&union)?;
        let ab = ea.mat.dot(&eb.mat);
        let ba = eb.mat.dot(&ea.mat);
        let diff = (&ab - &ba).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(diff / (ea.frobenius_norm() * eb.frobenius_norm()).max(EPS_FLOOR))
    }

    /// Relative Frobenius residual between two expressions.
    pub fn rel_residual(a: &MultiOp, b: &MultiOp) -> Result<f64> {
        let diff = Self::sub(a, b)?;
        let denom = a.frobenius_norm().max(b.frobenius_norm()).max(EPS_FLOOR);
        Ok(diff.frobenius_norm() / denom)
    }

    /// Dense inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<MultiOp> {
        let inv = lu_inverse(&self.mat)?;
        Ok(MultiOp {
            spaces: self.spaces.clone(),
            mat: inv,
        })
    }

    /// Frobenius-based condition estimate ||A|| * ||A^-1||.
    pub fn condition_estimate(&self) -> Result<f64> {
        let inv = self.inverse()?;
        Ok(self.frobenius_norm() * inv.frobenius_norm())
    }
}

/// LU inverse with partial pivoting; errors out on a vanishing pivot.
fn lu_inverse(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            let v = lu[(r, k)].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best < 1e-200 {
            return Err(CoreError::Singular(format!("pivot {k} vanished")));
        }
        if pivot != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(pivot, c)];
                lu[(pivot, c)] = tmp;
            }
            perm.swap(k, pivot);
        }
        let diag = lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] / diag;
            lu[(r, k)] = f;
            for c in k + 1..n {
                let sub = f * lu[(k, c)];
                lu[(r, c)] -= sub;
            }
        }
    }
    // Solve A X = I column by column.
    let mut inv = Array2::zeros((n, n));
    let mut col = vec![C64::new(0.0, 0.0); n];
    for e in 0..n {
        for (r, item) in col.iter_mut().enumerate() {
            *item = if perm[r] == e {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        for r in 1..n {
            for c in 0..r {
                let sub = lu[(r, c)] * col[c];
                col[r] -= sub;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let sub = lu[(r, c)] * col[c];
                col[r] -= sub;
            }
            col[r] /= lu[(r, r)];
        }
        for r in 0..n {
            inv[(r, e)] = col[r];
        }
    }
    Ok(inv)
}

/// The permutation operator swapping two equal-dimension spaces, embedded in
/// the ordered pair (a, b).
pub fn swap_pair(a: &Space, b: &Space) -> MultiOp {
    assert_eq!(a.dim, b.dim, "swap requires equal dimensions");
    let d = a.dim;
    let mut mat = Array2::zeros((d * d, d * d));
    for i in 0..d {
        for j in 0..d {
            mat[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    MultiOp::new(vec![a.clone(), b.clone()], mat).expect("swap construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceKind;

    fn aux(l: &str, lam: f64) -> Space {
        Space::auxiliary(l, 2, C64::new(lam, 0.0))
    }

    fn rand_op(spaces: Vec<Space>, seed: u64) -> MultiOp {
        // Small deterministic pseudo-random fill, independent of rand.
        let d: usize = spaces.iter().map(|s| s.dim).product();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let mut mat = Array2::zeros((d, d));
        for r in 0..d {
            for c in 0..d {
                mat[(r, c)] = C64::new(next(), next());
            }
        }
        MultiOp::new(spaces, mat).unwrap()
    }

    #[test]
    fn embed_identity_padding() {
        let a = rand_op(vec![aux("1", 0.0)], 7);
        let e = a.embed(&[aux("1", 0.0), aux("2", 0.0)]).unwrap();
        // A (x) I_2
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r % 2 == c % 2 {
                    a.matrix()[(r / 2, c / 2)]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((e.matrix()[(r, c)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embed_reorder_is_swap_similarity() {
        // An operator listed on [2,1], embedded into [1,2], equals the
        // conjugation of its raw matrix by the swap.
        let s1 = aux("1", 0.0);
        let s2 = aux("2", 0.0);
        let a = rand_op(vec![s2.clone(), s1.clone()], 3);
        let e = a.embed(&[s1.clone(), s2.clone()]).unwrap();
        let p = swap_pair(&s1, &s2);
        let conj = p.matrix().dot(a.matrix()).dot(p.matrix());
        let diff: f64 = (&conj - e.matrix()).iter().map(|z| z.norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-14);
    }

    #[test]
    fn three_space_swaps_compose_to_cycle() {
        let s: Vec<Space> = (1..=3).map(|i| aux(&i.to_string(), 0.0)).collect();
        let p12 = swap_pair(&s[0], &s[1]);
        let p23 = swap_pair(&s[1], &s[2]);
        let e12 = p12.embed(&s).unwrap();
        let e23 = p23.embed(&s).unwrap();
        let prod = MultiOp::compose(&e12, &e23).unwrap();
        // Brute force: P12 P23 |abc> = P12 |acb> = |cab>.
        let mut expect = Array2::zeros((8, 8));
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let col = a * 4 + b * 2 + c;
                    let row = c * 4 + a * 2 + b;
                    expect[(row, col)] = C64::new(1.0, 0.0);
                }
            }
        }
        let diff: f64 = (&expect - prod.matrix()).iter().map(|z| z.norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-14);
    }

    #[test]
    fn compose_with_identity() {
        let b = rand_op(vec![aux("1", 0.0), aux("2", 0.0)], 11);
        let i = MultiOp::identity(vec![aux("1", 0.0)]);
        let prod = MultiOp::compose(&i, &b).unwrap();
        assert!(MultiOp::rel_residual(&prod, &b).unwrap() < 1e-15);
    }

    #[test]
    fn swap_squares_to_identity() {
        let s1 = aux("1", 0.0);
        let s2 = aux("2", 0.0);
        let p = swap_pair(&s1, &s2);
        let sq = MultiOp::compose(&p, &p).unwrap();
        let id = MultiOp::identity(vec![s1, s2]);
        assert!(MultiOp::rel_residual(&sq, &id).unwrap() < 1e-15);
    }

    #[test]
    fn full_partial_transpose_is_matrix_transpose() {
        let a = rand_op(vec![aux("1", 0.0), aux("2", 0.0)], 5);
        let labels: Vec<Label> = a.spaces().iter().map(|s| s.label.clone()).collect();
        let t = a.partial_transpose(&labels).unwrap();
        let diff: f64 = (&a.matrix().t().to_owned() - t.matrix())
            .iter()
            .map(|z| z.norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-15);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let a = rand_op(vec![aux("1", 0.0), aux("2", 0.0), aux("3", 0.0)], 9);
        let sub = vec![Label::from("2")];
        let tt = a
            .partial_transpose(&sub)
            .unwrap()
            .partial_transpose(&sub)
            .unwrap();
        assert!(MultiOp::rel_residual(&a, &tt).unwrap() < 1e-15);
    }

    #[test]
    fn trace_of_identity_and_swap() {
        let s1 = aux("1", 0.0);
        let s2 = aux("2", 0.0);
        let i = MultiOp::identity(vec![s1.clone(), s2.clone()]);
        let t = i.partial_trace(&[Label::from("1")]).unwrap();
        let expect = MultiOp::identity(vec![s2.clone()]).scale(C64::new(2.0, 0.0));
        assert!(MultiOp::rel_residual(&t, &expect).unwrap() < 1e-15);

        // Tr_{12}(P_{12}) = 2 for dim-2 spaces.
        let p = swap_pair(&s1, &s2);
        let full = p
            .partial_trace(&[Label::from("1"), Label::from("2")])
            .unwrap();
        assert!(full.is_scalar());
        assert!((full.scalar_value().unwrap() - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_of_factorized_product() {
        let a = rand_op(vec![aux("1", 0.0)], 21);
        let b = rand_op(vec![aux("2", 0.0)], 22);
        let prod = MultiOp::compose(&a, &b).unwrap();
        let traced = prod.partial_trace(&[Label::from("1")]).unwrap();
        let expect = b.scale(a.trace());
        assert!(MultiOp::rel_residual(&traced, &expect).unwrap() < 1e-14);
    }

    #[test]
    fn proportionality_detects_scalars_and_rejects_swap() {
        let s1 = aux("1", 0.0);
        let s2 = aux("2", 0.0);
        let three_i =
            MultiOp::identity(vec![s1.clone(), s2.clone()]).scale(C64::new(3.0, 0.0));
        let (z, res) = three_i.proportionality_scalar();
        assert!((z - C64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(res < 1e-15);

        let p = swap_pair(&s1, &s2);
        let (z, res) = p.proportionality_scalar();
        assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(res > 0.1);
    }

    #[test]
    fn commutator_residual_cases() {
        let a = rand_op(vec![aux("1", 0.0)], 31);
        assert!(MultiOp::commutator_residual(&a, &a).unwrap() < 1e-15);

        let d1 = MultiOp::new(
            vec![aux("1", 0.0)],
            Array2::from_diag(&ndarray::arr1(&[C64::new(1.0, 0.0), C64::new(-2.0, 0.5)])),
        )
        .unwrap();
        let d2 = MultiOp::new(
            vec![aux("1", 0.0)],
            Array2::from_diag(&ndarray::arr1(&[C64::new(0.3, 1.0), C64::new(4.0, 0.0)])),
        )
        .unwrap();
        assert!(MultiOp::commutator_residual(&d1, &d2).unwrap() < 1e-15);

        // A swap against a non-symmetric single-space operator: order one.
        let s1 = aux("1", 0.0);
        let s2 = aux("2", 0.0);
        let p = swap_pair(&s1, &s2);
        let mut m = Array2::zeros((2, 2));
        m[(0, 1)] = C64::new(1.0, 0.0);
        let sigma = MultiOp::new(vec![s1], m).unwrap();
        assert!(MultiOp::commutator_residual(&p, &sigma).unwrap() > 0.1);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = rand_op(vec![aux("1", 0.0), aux("2", 0.0)], 17);
        let inv = a.inverse().unwrap();
        let prod = MultiOp::compose(&a, &inv).unwrap();
        let id = MultiOp::identity(a.spaces().to_vec());
        assert!(MultiOp::rel_residual(&prod, &id).unwrap() < 1e-12);
    }

    #[test]
    fn conflicting_shared_dimensions_are_rejected() {
        let a = rand_op(vec![aux("1", 0.0)], 1);
        let wide = Space::auxiliary("1", 3, C64::new(0.0, 0.0));
        let b = rand_op(vec![wide.clone()], 2);
        assert!(matches!(
            MultiOp::compose(&a, &b),
            Err(CoreError::DimMismatch { .. })
        ));
        assert!(matches!(
            a.embed(&[wide]),
            Err(CoreError::DimMismatch { .. })
        ));
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let a = rand_op(vec![aux("1", 0.0)], 3);
        assert!(matches!(
            a.partial_transpose(&[Label::from("zz")]),
            Err(CoreError::UnknownSpace(_))
        ));
        assert!(matches!(
            a.partial_trace(&[Label::from("zz")]),
            Err(CoreError::UnknownSpace(_))
        ));
        assert!(a.embed(&[aux("2", 0.0)]).is_err());
    }

    #[test]
    fn quantum_spaces_survive_partial_trace() {
        let q = Space::quantum("q", 2);
        let a = rand_op(vec![aux("1", 0.0), q.clone()], 41);
        let t = a.partial_trace(&[Label::from("1")]).unwrap();
        assert_eq!(t.spaces().len(), 1);
        assert_eq!(t.spaces()[0].kind, SpaceKind::Quantum);
    }
}
