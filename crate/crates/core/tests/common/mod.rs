//! Reference computations written directly from first principles. None of
//! them call into the library's probability code.

#![allow(dead_code)]

/// Born probability of outcome 0 for a photon at `psi` measured in `basis`.
pub fn born_p0(psi: f64, basis: f64) -> f64 {
    (psi - basis).cos().powi(2)
}

pub fn born(psi: f64, basis: f64, outcome: u8) -> f64 {
    let p0 = born_p0(psi, basis);
    if outcome == 0 {
        p0
    } else {
        1.0 - p0
    }
}

/// Posterior over `candidates` (uniform prior) after the batch of
/// `(basis, outcome)` observations, plus the marginal probability of the
/// observed sequence.
pub fn posterior_oracle(candidates: &[f64], obs: &[(f64, u8)]) -> (Vec<f64>, f64) {
    let joint: Vec<f64> = candidates
        .iter()
        .map(|&c| obs.iter().map(|&(b, o)| born(c, b, o)).product::<f64>())
        .collect();
    let total: f64 = joint.iter().sum();
    let prior = 1.0 / candidates.len() as f64;
    (joint.iter().map(|j| j / total).collect(), total * prior)
}

/// Every outcome sequence of length `m`, as bit vectors.
pub fn all_outcomes(m: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u32..1 << m).map(move |code| (0..m).map(|i| ((code >> i) & 1) as u8).collect())
}

/// `ln(i!)` for `i = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Binomial pmf of `Bin(n, p)` at every `k = 0..=n`.
pub fn binomial_pmf(n: usize, p: f64, lf: &[f64]) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if p == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            if p == 1.0 {
                return if k == n { 1.0 } else { 0.0 };
            }
            (lf[n] - lf[k] - lf[n - k] + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}

/// Probability that per-photon siphoning with rate `g` on all three links
/// goes unnoticed by ideal tap detectors: Eve must take nothing on every
/// link. Sums explicitly over the photons diverted by each tap.
pub fn siphon_undetected_oracle(n: usize, g: f64, bob_tap: f64, alice_tap: f64) -> f64 {
    let lf = ln_factorials(n);
    let keep = 1.0 - g;
    let bob1 = binomial_pmf(n, bob_tap, &lf);
    let mut total = 0.0;
    for (t1, p1) in bob1.iter().enumerate() {
        let after1 = n - t1;
        let alice = binomial_pmf(after1, alice_tap, &lf);
        for (t2, p2) in alice.iter().enumerate() {
            let after2 = after1 - t2;
            total += p1 * keep.powi(after1 as i32) * p2 * keep.powi(after2 as i32);
        }
    }
    keep.powi(n as i32) * total
}

/// Alignment-alarm probability for a ledger round with fixed rotations and
/// three injected photons at fixed angles, by enumerating every outcome
/// pattern of the six final photons.
pub fn ledger_alarm_oracle(x: u8, theta: f64, phi: f64, inject: [f64; 3]) -> f64 {
    let xs = if x == 0 { 0.0 } else { std::f64::consts::FRAC_PI_2 };
    // Legitimate photons undergo all four rotations; an injection on link j
    // undergoes only the rotations after it.
    let legit = xs + theta + phi - theta - phi;
    let finals = [
        legit,
        legit,
        legit,
        inject[0] + phi - theta - phi,
        inject[1] - theta - phi,
        inject[2] - phi,
    ];
    let mut alarm = 0.0;
    for outcomes in all_outcomes(finals.len()) {
        let p: f64 = finals
            .iter()
            .zip(&outcomes)
            .map(|(&psi, &o)| born(psi, 0.0, o))
            .product();
        if outcomes.iter().any(|&o| o != outcomes[0]) {
            alarm += p;
        }
    }
    alarm
}

/// Exact two-sided binomial test p-value for `k` successes in `n` trials at
/// success rate `p`: the mass of outcomes no more likely than `k`.
pub fn binomial_test_p_value(k: usize, n: usize, p: f64) -> f64 {
    let lf = ln_factorials(n);
    let pmf = binomial_pmf(n, p, &lf);
    let observed = pmf[k] * (1.0 + 1e-7);
    pmf.iter().filter(|&&q| q <= observed).sum::<f64>().min(1.0)
}
