//! Environment tensors and effective-Hamiltonian kernels shared by DMRG and TDVP.
//!
//! A left environment `L[a, w, a']` contracts all sites left of a bond:
//! `a` is the bra bond index, `w` the MPO bond, `a'` the ket bond. Right
//! environments `R[b, w, b']` use the same ordering. Every kernel is a
//! chain of permute + reshape + GEMM.

use ndarray::{Array2, Array3, Array4};

use super::linalg::{reshape, to_matrix};
use super::{Mpo, Mps, Scalar};

pub fn trivial_env<T: Scalar>() -> Array3<T> {
    Array3::from_elem((1, 1, 1), T::one())
}

/// W permuted to `(w_left, in, w_right, out)` as a matrix.
fn mpo_as_left_matrix<T: Scalar>(w: &Array4<T>) -> Array2<T> {
    let (wl, wr, d, _) = w.dim();
    to_matrix(w.view().permuted_axes([0, 3, 1, 2]), wl * d, wr * d)
}

/// W permuted to `(w_right, in, w_left, out)` as a matrix.
fn mpo_as_right_matrix<T: Scalar>(w: &Array4<T>) -> Array2<T> {
    let (wl, wr, d, _) = w.dim();
    to_matrix(w.view().permuted_axes([1, 3, 0, 2]), wr * d, wl * d)
}

/// Add one site to a left environment.
pub fn left_env_update<T: Scalar>(l: &Array3<T>, a: &Array3<T>, w: &Array4<T>) -> Array3<T> {
    let (da, wl, da2) = l.dim();
    let (_, d, db) = a.dim();
    let wr = w.dim().1;
    let t1 = to_matrix(l.view(), da * wl, da2).dot(&to_matrix(a.view(), da2, d * db));
    let t1 = reshape(t1, (da, wl, d, db));
    let t2 = to_matrix(t1.view().permuted_axes([0, 3, 1, 2]), da * db, wl * d).dot(&mpo_as_left_matrix(w));
    let t2 = reshape(t2, (da, db, wr, d));
    let t3 = to_matrix(t2.view().permuted_axes([0, 3, 1, 2]), da * d, db * wr);
    let abar = to_matrix(a.view(), da * d, db).mapv(|x| x.conj());
    let out = reshape(abar.t().dot(&t3), (db, db, wr));
    out.permuted_axes([0, 2, 1]).as_standard_layout().into_owned()
}

/// Add one site to a right environment.
pub fn right_env_update<T: Scalar>(r: &Array3<T>, a: &Array3<T>, w: &Array4<T>) -> Array3<T> {
    let (db, wr, db2) = r.dim();
    let (da, d, _) = a.dim();
    let wl = w.dim().0;
    let rp = to_matrix(r.view().permuted_axes([2, 0, 1]), db2, db * wr);
    let t1 = to_matrix(a.view(), da * d, db2).dot(&rp);
    let t1 = reshape(t1, (da, d, db, wr));
    let t2 = to_matrix(t1.view().permuted_axes([0, 2, 3, 1]), da * db, wr * d).dot(&mpo_as_right_matrix(w));
    let t2 = reshape(t2, (da, db, wl, d));
    let t3 = to_matrix(t2.view().permuted_axes([0, 2, 3, 1]), da * wl, d * db);
    let abar = to_matrix(a.view(), da, d * db).mapv(|x| x.conj());
    let out = reshape(t3.dot(&abar.t()), (da, wl, da));
    out.permuted_axes([2, 1, 0]).as_standard_layout().into_owned()
}

/// `H_eff · M` for a single site tensor.
pub fn apply_h1<T: Scalar>(l: &Array3<T>, w: &Array4<T>, r: &Array3<T>, m: &Array3<T>) -> Array3<T> {
    let (da, wl, da2) = l.dim();
    let (_, d, db2) = m.dim();
    let (db, wr, _) = r.dim();
    let t1 = to_matrix(l.view(), da * wl, da2).dot(&to_matrix(m.view(), da2, d * db2));
    let t1 = reshape(t1, (da, wl, d, db2));
    let t2 = to_matrix(t1.view().permuted_axes([0, 3, 1, 2]), da * db2, wl * d).dot(&mpo_as_left_matrix(w));
    let t2 = reshape(t2, (da, db2, wr, d));
    let t3 = to_matrix(t2.view().permuted_axes([0, 3, 2, 1]), da * d, wr * db2);
    let rp = to_matrix(r.view().permuted_axes([1, 2, 0]), wr * db2, db);
    reshape(t3.dot(&rp), (da, d, db))
}

/// `H_eff · θ` for a two-site tensor `θ[a, s, t, b]`.
pub fn apply_h2<T: Scalar>(
    l: &Array3<T>,
    w1: &Array4<T>,
    w2: &Array4<T>,
    r: &Array3<T>,
    theta: &Array4<T>,
) -> Array4<T> {
    let (da, wl, da2) = l.dim();
    let (_, d1, d2, db2) = theta.dim();
    let (db, wr, _) = r.dim();
    let wm = w1.dim().1;
    let t1 = to_matrix(l.view(), da * wl, da2).dot(&to_matrix(theta.view(), da2, d1 * d2 * db2));
    let t1 = reshape(t1, (da, wl, d1, d2, db2));
    // (a, t', b', w, s') · W1
    let t2 = to_matrix(t1.view().permuted_axes([0, 3, 4, 1, 2]), da * d2 * db2, wl * d1)
        .dot(&mpo_as_left_matrix(w1));
    let t2 = reshape(t2, (da, d2, db2, wm, d1));
    // (a, s, b', w1, t') · W2
    let t3 = to_matrix(t2.view().permuted_axes([0, 4, 2, 3, 1]), da * d1 * db2, wm * d2)
        .dot(&mpo_as_left_matrix(w2));
    let t3 = reshape(t3, (da, d1, db2, wr, d2));
    // (a, s, t, w2, b') · R
    let t4 = to_matrix(t3.view().permuted_axes([0, 1, 4, 3, 2]), da * d1 * d2, wr * db2);
    let rp = to_matrix(r.view().permuted_axes([1, 2, 0]), wr * db2, db);
    reshape(t4.dot(&rp), (da, d1, d2, db))
}

/// `H_eff · C` for a bond matrix between two sites.
pub fn apply_h0<T: Scalar>(l: &Array3<T>, r: &Array3<T>, c: &Array2<T>) -> Array2<T> {
    let (da, w, da2) = l.dim();
    let (db, _, db2) = r.dim();
    let t1 = to_matrix(l.view(), da * w, da2).dot(c);
    let t1 = reshape(t1, (da, w * db2));
    let rp = to_matrix(r.view().permuted_axes([1, 2, 0]), w * db2, db);
    t1.dot(&rp)
}

/// Add one site to a left overlap environment `O[a, c] = ⟨bra-block a | ket-block c⟩`.
pub fn left_overlap_update<T: Scalar>(o: &Array2<T>, bra: &Array3<T>, ket: &Array3<T>) -> Array2<T> {
    let (da, d, db) = bra.dim();
    let (dc, _, de) = ket.dim();
    let t = o.dot(&to_matrix(ket.view(), dc, d * de));
    let t = to_matrix(t.view(), da * d, de);
    to_matrix(bra.view(), da * d, db).mapv(|x| x.conj()).t().dot(&t)
}

/// Add one site to a right overlap environment.
pub fn right_overlap_update<T: Scalar>(o: &Array2<T>, bra: &Array3<T>, ket: &Array3<T>) -> Array2<T> {
    let (da, d, db) = bra.dim();
    let (dc, _, de) = ket.dim();
    // t[c, s, b] = Σ_e ket[c,s,e] O[b,e]
    let t = to_matrix(ket.view(), dc * d, de).dot(&o.t());
    let t = to_matrix(t.view(), dc, d * db);
    let braf = to_matrix(bra.view(), da, d * db).mapv(|x| x.conj());
    braf.dot(&t.t())
}

/// Left environments `L[k]` for sites `< k`, `k = 0..=n`.
pub fn all_left_envs<T: Scalar>(mps: &Mps<T>, mpo: &Mpo<T>, upto: usize) -> Vec<Array3<T>> {
    let mut out = Vec::with_capacity(upto + 1);
    out.push(trivial_env());
    for k in 0..upto {
        let next = left_env_update(&out[k], mps.tensor(k), mpo.tensor(k));
        out.push(next);
    }
    out
}

/// Full contraction `⟨ψ|W|ψ⟩`.
pub fn contract_expectation<T: Scalar>(mps: &Mps<T>, mpo: &Mpo<T>) -> T {
    let mut env = trivial_env::<T>();
    for k in 0..mps.len() {
        env = left_env_update(&env, mps.tensor(k), mpo.tensor(k));
    }
    env[[0, 0, 0]]
}
