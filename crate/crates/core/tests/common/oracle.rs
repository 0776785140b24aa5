//! Direct enumeration of the listener/speaker recursion over the full
//! (category, one-hot vector) state space. Shares no code with the engine.

/// A feature vector from the one-hot support.
fn one_hot(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

pub struct Problem<'a> {
    /// `t[c][i]`, rows sum to 1.
    pub t: &'a [Vec<f64>],
    pub topic: usize,
    pub vehicle: usize,
    /// Category indices the speaker may utter.
    pub utterances: &'a [usize],
    /// Prior over every category.
    pub p_c: &'a [f64],
    /// Prior over goals.
    pub r: &'a [f64],
    pub lambda: f64,
}

/// `L0(c, f | u)`: the full joint over every category and support vector.
pub fn l0(t: &[Vec<f64>], u: usize) -> Vec<Vec<f64>> {
    let n = t[0].len();
    (0..t.len())
        .map(|c| (0..n).map(|i| if c == u { t[u][i] } else { 0.0 }).collect())
        .collect()
}

/// `U(u | g, f) = log Σ_{c, f'} δ[g(f) = g(f')] L0(c, f' | u)`.
pub fn utility(t: &[Vec<f64>], u: usize, g: usize, f: &[f64]) -> f64 {
    let n = t[0].len();
    let joint = l0(t, u);
    let mut mass = 0.0;
    for row in &joint {
        for (i, p) in row.iter().enumerate() {
            let f2 = one_hot(n, i);
            if f2[g] == f[g] {
                mass += p;
            }
        }
    }
    mass.ln()
}

/// `S1(· | g, f)` over `utterances`, by a max-shifted softmax.
pub fn s1(t: &[Vec<f64>], utterances: &[usize], g: usize, f: &[f64], lambda: f64) -> Vec<f64> {
    let scores: Vec<f64> = utterances.iter().map(|&u| lambda * utility(t, u, g, f)).collect();
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

/// `L1(c, f | v) ∝ P(c) P(f|c) Σ_g R(g) S1(v | g, f)` over every category.
pub fn l1(p: &Problem) -> Vec<Vec<f64>> {
    let n = p.t[0].len();
    let v_pos = p.utterances.iter().position(|&u| u == p.vehicle).unwrap();
    let mut joint = vec![vec![0.0; n]; p.t.len()];
    let mut z = 0.0;
    for (c, row) in joint.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            let f = one_hot(n, i);
            let mut mix = 0.0;
            for g in 0..n {
                mix += p.r[g] * s1(p.t, p.utterances, g, &f, p.lambda)[v_pos];
            }
            *cell = p.p_c[c] * p.t[c][i] * mix;
            z += *cell;
        }
    }
    for row in joint.iter_mut() {
        for x in row.iter_mut() {
            *x /= z;
        }
    }
    joint
}

/// Marginal of `L1` over features.
pub fn interpret(p: &Problem) -> Vec<f64> {
    let joint = l1(p);
    let n = p.t[0].len();
    (0..n).map(|i| joint.iter().map(|row| row[i]).sum()).collect()
}

/// Figure-1 closed form: `α_i β_i^λ` normalized, by direct powers.
pub fn fast(alpha: &[f64], beta: &[f64], lambda: f64) -> Vec<f64> {
    let w: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| a * b.powf(lambda)).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}
