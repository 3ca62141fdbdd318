//! Brute-force reference implementations of the kernel operations, written
//! as naive index loops with no shared code paths. Used only by tests to
//! cross-check the kernel; not part of the public computational surface.

use ndarray::Array2;

use crate::multiop::{C64, MultiOp};
use crate::space::{Label, Space};

fn dims_of(spaces: &[Space]) -> Vec<usize> {
    spaces.iter().map(|s| s.dim).collect()
}

fn unravel(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        digits[i] = idx % dims[i];
        idx /= dims[i];
    }
    digits
}

fn ravel(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (d, dim) in digits.iter().zip(dims) {
        idx = idx * dim + d;
    }
    idx
}

/// Naive embed: place `op` on its spaces inside `target`, identity on the
/// rest, by looping over every pair of full multi-indices.
pub fn embed_oracle(op: &MultiOp, target: &[Space]) -> Array2<C64> {
    let tdims = dims_of(target);
    let total: usize = tdims.iter().product();
    let odims = dims_of(op.spaces());
    // position of each op space inside the target
    let positions: Vec<usize> = op
        .spaces()
        .iter()
        .map(|s| target.iter().position(|t| t.label == s.label).unwrap())
        .collect();
    let mut out = Array2::zeros((total, total));
    for r in 0..total {
        let rd = unravel(r, &tdims);
        for c in 0..total {
            let cd = unravel(c, &tdims);
            // identity on spaces not covered by op
            let mut delta_ok = true;
            for i in 0..target.len() {
                if !positions.contains(&i) && rd[i] != cd[i] {
                    delta_ok = false;
                    break;
                }
            }
            if !delta_ok {
                continue;
            }
            let rsub: Vec<usize> = positions.iter().map(|&p| rd[p]).collect();
            let csub: Vec<usize> = positions.iter().map(|&p| cd[p]).collect();
            out[(r, c)] = op.matrix()[(ravel(&rsub, &odims), ravel(&csub, &odims))];
        }
    }
    out
}

/// Naive compose: embed both operands into the union (left order first)
/// and multiply with explicit triple loops.
pub fn compose_oracle(a: &MultiOp, b: &MultiOp) -> (Vec<Space>, Array2<C64>) {
    let mut union = a.spaces().to_vec();
    for s in b.spaces() {
        if union.iter().all(|u| u.label != s.label) {
            union.push(s.clone());
        }
    }
    let ea = embed_oracle(a, &union);
    let eb = embed_oracle(b, &union);
    let n = ea.nrows();
    let mut out = Array2::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += ea[(r, k)] * eb[(k, c)];
            }
            out[(r, c)] = acc;
        }
    }
    (union, out)
}

/// Naive partial transpose over the labeled subset.
pub fn partial_transpose_oracle(op: &MultiOp, subset: &[Label]) -> Array2<C64> {
    let dims = dims_of(op.spaces());
    let total: usize = dims.iter().product();
    let marked: Vec<bool> = op
        .spaces()
        .iter()
        .map(|s| subset.contains(&s.label))
        .collect();
    let mut out = Array2::zeros((total, total));
    for r in 0..total {
        let rd = unravel(r, &dims);
        for c in 0..total {
            let cd = unravel(c, &dims);
            let mut rs = rd.clone();
            let mut cs = cd.clone();
            for i in 0..dims.len() {
                if marked[i] {
                    rs[i] = cd[i];
                    cs[i] = rd[i];
                }
            }
            out[(r, c)] = op.matrix()[(ravel(&rs, &dims), ravel(&cs, &dims))];
        }
    }
    out
}

/// Naive partial trace over the labeled subset; returns the kept spaces
/// and the reduced matrix.
pub fn partial_trace_oracle(op: &MultiOp, subset: &[Label]) -> (Vec<Space>, Array2<C64>) {
    let dims = dims_of(op.spaces());
    let marked: Vec<bool> = op
        .spaces()
        .iter()
        .map(|s| subset.contains(&s.label))
        .collect();
    let kept: Vec<Space> = op
        .spaces()
        .iter()
        .zip(&marked)
        .filter(|(_, &m)| !m)
        .map(|(s, _)| s.clone())
        .collect();
    let kdims = dims_of(&kept);
    let ktotal: usize = kdims.iter().product();
    let total: usize = dims.iter().product();
    let mut out = Array2::zeros((ktotal, ktotal));
    for r in 0..total {
        let rd = unravel(r, &dims);
        for c in 0..total {
            let cd = unravel(c, &dims);
            let mut diagonal = true;
            for i in 0..dims.len() {
                if marked[i] && rd[i] != cd[i] {
                    diagonal = false;
                    break;
                }
            }
            if !diagonal {
                continue;
            }
            let rk: Vec<usize> = (0..dims.len()).filter(|&i| !marked[i]).map(|i| rd[i]).collect();
            let ck: Vec<usize> = (0..dims.len()).filter(|&i| !marked[i]).map(|i| cd[i]).collect();
            out[(ravel(&rk, &kdims), ravel(&ck, &kdims))] += op.matrix()[(r, c)];
        }
    }
    (kept, out)
}

/// Max entrywise deviation between two equally sized matrices.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
