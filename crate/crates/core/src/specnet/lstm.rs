//! One LSTM direction over a padded, time-major batch.
//!
//! Row `t * batch + i` of every buffer belongs to sentence `i` at step `t`.
//! Rows past a sentence's length are inactive: the state is carried through
//! unchanged, so the state after the last step equals the state after the
//! sentence's own last token, and inactive rows receive no gradient.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Axis};

use super::params::LstmBlocks;
use crate::scalar::{sigmoid, Scalar};

pub(crate) struct LstmCache<T> {
    steps: usize,
    batch: usize,
    x: Array2<T>,
    /// Activated gates `[i f g o]`, `(steps·batch) × 4H`.
    gates: Array2<T>,
    /// Hidden and cell states, `((steps+1)·batch) × H`; block 0 is the zero state.
    h: Array2<T>,
    c: Array2<T>,
    active: Vec<bool>,
}

pub(crate) fn forward<T: Scalar>(
    blocks: &LstmBlocks,
    weights: &[T],
    x: Array2<T>,
    active: Vec<bool>,
    batch: usize,
) -> (Array2<T>, LstmCache<T>) {
    let steps = active.len() / batch;
    let hidden = blocks.w_hidden.cols;
    let w_in = blocks.w_input.mat(weights);
    let w_h = blocks.w_hidden.mat(weights);
    let bias = blocks.bias.vec(weights);

    let mut gates = x.dot(&w_in.t());
    gates += &bias;
    let mut h = Array2::<T>::zeros(((steps + 1) * batch, hidden));
    let mut c = Array2::<T>::zeros(((steps + 1) * batch, hidden));
    let width = 4 * hidden;

    for t in 0..steps {
        {
            let prev = h.slice(s![t * batch..(t + 1) * batch, ..]);
            let mut g = gates.slice_mut(s![t * batch..(t + 1) * batch, ..]);
            general_mat_mul(T::one(), &prev, &w_h.t(), T::one(), &mut g);
        }
        let gs = gates.as_slice_mut().expect("standard layout");
        let (h_prev, h_next) = h
            .as_slice_mut()
            .expect("standard layout")
            .split_at_mut((t + 1) * batch * hidden);
        let (c_prev, c_next) = c
            .as_slice_mut()
            .expect("standard layout")
            .split_at_mut((t + 1) * batch * hidden);
        for i in 0..batch {
            let row = t * batch + i;
            let hp = &h_prev[row * hidden..(row + 1) * hidden];
            let cp = &c_prev[row * hidden..(row + 1) * hidden];
            let hn = &mut h_next[i * hidden..(i + 1) * hidden];
            let cn = &mut c_next[i * hidden..(i + 1) * hidden];
            if !active[row] {
                hn.copy_from_slice(hp);
                cn.copy_from_slice(cp);
                continue;
            }
            let g = &mut gs[row * width..(row + 1) * width];
            for k in 0..hidden {
                let ig = sigmoid(g[k]);
                let fg = sigmoid(g[hidden + k]);
                let cg = g[2 * hidden + k].tanh();
                let og = sigmoid(g[3 * hidden + k]);
                g[k] = ig;
                g[hidden + k] = fg;
                g[2 * hidden + k] = cg;
                g[3 * hidden + k] = og;
                let cell = fg * cp[k] + ig * cg;
                cn[k] = cell;
                hn[k] = og * cell.tanh();
            }
        }
    }
    let last = h.slice(s![steps * batch.., ..]).to_owned();
    (
        last,
        LstmCache {
            steps,
            batch,
            x,
            gates,
            h,
            c,
            active,
        },
    )
}

/// Accumulates weight gradients into `grad` and returns the gradient with
/// respect to the inputs when `need_input_grad` is set.
pub(crate) fn backward<T: Scalar>(
    blocks: &LstmBlocks,
    weights: &[T],
    cache: &LstmCache<T>,
    d_last: ArrayView2<T>,
    grad: &mut [T],
    need_input_grad: bool,
) -> Option<Array2<T>> {
    let (steps, batch) = (cache.steps, cache.batch);
    let hidden = blocks.w_hidden.cols;
    let width = 4 * hidden;
    let w_h = blocks.w_hidden.mat(weights);

    let mut dh = d_last.to_owned();
    let mut dc = Array2::<T>::zeros((batch, hidden));
    let mut da = Array2::<T>::zeros((steps * batch, width));
    let gates = cache.gates.as_slice().expect("standard layout");
    let cs = cache.c.as_slice().expect("standard layout");
    let one = T::one();

    for t in (0..steps).rev() {
        {
            let das = da.as_slice_mut().expect("standard layout");
            let dhs = dh.as_slice().expect("standard layout");
            let dcs = dc.as_slice_mut().expect("standard layout");
            for i in 0..batch {
                let row = t * batch + i;
                if !cache.active[row] {
                    continue;
                }
                let g = &gates[row * width..(row + 1) * width];
                let c_new = &cs[(row + batch) * hidden..(row + batch + 1) * hidden];
                let c_old = &cs[row * hidden..(row + 1) * hidden];
                let d = &mut das[row * width..(row + 1) * width];
                let dh_i = &dhs[i * hidden..(i + 1) * hidden];
                let dc_i = &mut dcs[i * hidden..(i + 1) * hidden];
                for k in 0..hidden {
                    let (ig, fg, cg, og) =
                        (g[k], g[hidden + k], g[2 * hidden + k], g[3 * hidden + k]);
                    let tc = c_new[k].tanh();
                    let d_out = dh_i[k] * tc;
                    let d_cell = dc_i[k] + dh_i[k] * og * (one - tc * tc);
                    d[k] = d_cell * cg * ig * (one - ig);
                    d[hidden + k] = d_cell * c_old[k] * fg * (one - fg);
                    d[2 * hidden + k] = d_cell * ig * (one - cg * cg);
                    d[3 * hidden + k] = d_out * og * (one - og);
                    dc_i[k] = d_cell * fg;
                }
            }
        }
        let d_prev = da.slice(s![t * batch..(t + 1) * batch, ..]).dot(&w_h);
        for i in 0..batch {
            if cache.active[t * batch + i] {
                dh.row_mut(i).assign(&d_prev.row(i));
            }
        }
    }

    {
        let mut gw = blocks.w_input.mat_mut(grad);
        general_mat_mul(one, &da.t(), &cache.x, one, &mut gw);
    }
    {
        let h_prev = cache.h.slice(s![..steps * batch, ..]);
        let mut gw = blocks.w_hidden.mat_mut(grad);
        general_mat_mul(one, &da.t(), &h_prev, one, &mut gw);
    }
    {
        let mut gb = blocks.bias.vec_mut(grad);
        gb += &da.sum_axis(Axis(0));
    }
    need_input_grad.then(|| da.dot(&blocks.w_input.mat(weights)))
}
